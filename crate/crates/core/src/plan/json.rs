//! Wire format for query plans.

use serde::{Deserialize, Serialize};

use super::{BitRef, CachePlan, Equation, QueryPlan, RoundBatch};
use crate::error::{Error, Result};
use crate::params::{PirParams, Scheme};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub k: u32,
    pub n: u32,
    /// Corner index, absent for memory-shared and full-cache plans.
    pub s: Option<u32>,
    pub theta: u32,
    pub l: u32,
    pub r: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefetchJson {
    pub db: u32,
    pub message: u32,
    pub indices: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub m: u32,
    pub b: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundJson {
    pub t: u32,
    pub db: u32,
    pub equations: Vec<Vec<TermJson>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanJson {
    pub params: ParamsJson,
    pub prefetch: Vec<PrefetchJson>,
    pub rounds: Vec<RoundJson>,
    pub seed: u64,
}

impl From<&QueryPlan> for PlanJson {
    fn from(plan: &QueryPlan) -> Self {
        let params = ParamsJson {
            k: plan.num_messages(),
            n: plan.num_databases(),
            s: plan.params.corner_index,
            theta: plan.target,
            l: plan.message_length,
            r: plan.params.caching_ratio.clone().unwrap_or_else(Rational::zero),
        };
        let prefetch = (1..=plan.num_databases())
            .flat_map(|db| {
                (1..=plan.num_messages()).map(move |m| PrefetchJson {
                    db,
                    message: m,
                    indices: plan.cache.indices(db, m).to_vec(),
                })
            })
            .collect();
        let rounds = plan
            .rounds
            .iter()
            .map(|b| RoundJson {
                t: b.t,
                db: b.database,
                equations: b
                    .equations
                    .iter()
                    .map(|eq| eq.terms.iter().map(|t| TermJson { m: t.message, b: t.index }).collect())
                    .collect(),
            })
            .collect();
        PlanJson { params, prefetch, rounds, seed: plan.shuffle_seed }
    }
}

impl PlanJson {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Validating conversion back to a plan.
    pub fn into_plan(self) -> Result<QueryPlan> {
        let ParamsJson { k, n, s, theta, l, r } = self.params;
        if theta == 0 || theta > k {
            return Err(Error::InvalidTarget { theta, k });
        }
        let (params, scheme) = match PirParams::with_ratio(k, n, r.clone()).and_then(|p| p.resolve()) {
            Ok(resolved) => resolved,
            // Single-message classical plans sit outside the usual parameter range.
            Err(_) if r.is_zero() && k >= 1 && n >= 2 => (
                PirParams { num_messages: k, num_databases: n, corner_index: Some(0), caching_ratio: Some(r.clone()) },
                Scheme::Classical,
            ),
            Err(e) => return Err(e),
        };
        if s.is_some() && params.corner_index != s {
            return Err(Error::InvalidParams(format!("corner index {s:?} does not match ratio {r}")));
        }

        let in_range = |m: u32, b: u32| (1..=k).contains(&m) && (1..=l).contains(&b);
        let mut sets = vec![vec![Vec::new(); k as usize]; n as usize];
        for p in self.prefetch {
            if !(1..=n).contains(&p.db) || !(1..=k).contains(&p.message) {
                return Err(Error::IndexOutOfRange(format!("prefetch entry db={} message={}", p.db, p.message)));
            }
            if let Some(&bad) = p.indices.iter().find(|&&i| !in_range(p.message, i)) {
                return Err(Error::IndexOutOfRange(format!("cached bit {bad} of message {}", p.message)));
            }
            sets[p.db as usize - 1][p.message as usize - 1].extend(p.indices);
        }
        let cache = CachePlan::from_sets(k, n, l, sets);
        if !cache.is_disjoint() {
            return Err(Error::InvalidParams("cached sets of different databases overlap".into()));
        }

        let mut rounds = Vec::with_capacity(self.rounds.len());
        for round in self.rounds {
            if !(1..=n).contains(&round.db) {
                return Err(Error::IndexOutOfRange(format!("database {}", round.db)));
            }
            let mut equations = Vec::with_capacity(round.equations.len());
            for terms in round.equations {
                if terms.len() != round.t as usize {
                    return Err(Error::MalformedEquation(format!(
                        "round {} equation has {} terms",
                        round.t,
                        terms.len()
                    )));
                }
                let mut bits = Vec::with_capacity(terms.len());
                for TermJson { m, b } in terms {
                    if !in_range(m, b) {
                        return Err(Error::IndexOutOfRange(format!("bit {b} of message {m}")));
                    }
                    bits.push(BitRef::new(m, b));
                }
                let eq = Equation::new(bits, round.t, round.db, theta);
                if eq.terms.windows(2).any(|w| w[0].message == w[1].message) {
                    return Err(Error::MalformedEquation("two bits of the same message".into()));
                }
                equations.push(eq);
            }
            rounds.push(RoundBatch { t: round.t, database: round.db, equations });
        }
        rounds.sort_by_key(|b| (b.t, b.database));
        Ok(QueryPlan { params, scheme, target: theta, message_length: l, cache, rounds, shuffle_seed: self.seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{plan_classical, plan_corner, plan_memory_share};
    use crate::rational::ratio;

    #[test]
    fn roundtrip() {
        for plan in [
            plan_corner(4, 3, 2, 2, 17).unwrap(),
            plan_classical(3, 2, 1, 4).unwrap(),
            plan_classical(1, 2, 1, 4).unwrap(),
            plan_memory_share(3, 2, &ratio(1, 3), 3, 9).unwrap(),
        ] {
            let text = PlanJson::from(&plan).to_json().unwrap();
            let back = PlanJson::from_json(&text).unwrap().into_plan().unwrap();
            assert_eq!(back, plan);
        }
    }

    #[test]
    fn schema_keys() {
        let plan = plan_corner(3, 2, 1, 1, 0).unwrap();
        let value: serde_json::Value = serde_json::from_str(&PlanJson::from(&plan).to_json().unwrap()).unwrap();
        assert_eq!(value["params"]["l"], 8);
        assert_eq!(value["params"]["s"], 1);
        assert_eq!(value["prefetch"].as_array().unwrap().len(), 6);
        assert!(value["rounds"][0]["equations"][0][0]["m"].is_u64());
        assert_eq!(value["seed"], plan.shuffle_seed);
    }

    #[test]
    fn rejects_malformed() {
        let plan = plan_corner(3, 2, 1, 1, 0).unwrap();
        let mut json = PlanJson::from(&plan);
        json.rounds[0].equations[0][0].b = 99;
        assert!(matches!(json.into_plan(), Err(Error::IndexOutOfRange(_))));
        let mut json = PlanJson::from(&plan);
        let first = json.rounds[0].equations[0][0];
        json.rounds[0].equations[0][1] = TermJson { m: first.m, b: first.b % 8 + 1 };
        assert!(matches!(json.into_plan(), Err(Error::MalformedEquation(_))));
        let mut json = PlanJson::from(&plan);
        json.rounds[0].equations[0].pop();
        assert!(matches!(json.into_plan(), Err(Error::MalformedEquation(_))));
    }
}
