//! Two-phase session simulation: prefetch, GF(2) answers, decoding and
//! download metering.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PirParams;
use crate::plan::{self, sub_seed, BitRef, CachePlan, Equation, EquationKind, QueryPlan};
use crate::rational::Rational;

/// The `K` messages, replicated identically on every database.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageStore {
    message_length: u32,
    /// One byte per bit, `0` or `1`.
    bits: Vec<Vec<u8>>,
}

impl MessageStore {
    pub fn new(bits: Vec<Vec<u8>>) -> Result<Self> {
        let message_length = bits.first().map_or(0, |m| m.len()) as u32;
        if bits.iter().any(|m| m.len() as u32 != message_length || m.iter().any(|&b| b > 1)) {
            return Err(Error::InvalidParams("messages must be equal-length bit vectors".into()));
        }
        Ok(MessageStore { message_length, bits })
    }

    /// Uniform random bits.
    pub fn random(num_messages: u32, message_length: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits =
            (0..num_messages).map(|_| (0..message_length).map(|_| rng.random::<bool>() as u8).collect()).collect();
        MessageStore { message_length, bits }
    }

    pub fn num_messages(&self) -> u32 {
        self.bits.len() as u32
    }

    pub fn message_length(&self) -> u32 {
        self.message_length
    }

    pub fn message(&self, k: u32) -> &[u8] {
        &self.bits[k as usize - 1]
    }

    pub fn bit(&self, b: &BitRef) -> Result<u8> {
        self.bits
            .get((b.message as usize).wrapping_sub(1))
            .and_then(|m| m.get((b.index as usize).wrapping_sub(1)))
            .copied()
            .ok_or_else(|| Error::IndexOutOfRange(format!("bit {} of message {}", b.index, b.message)))
    }
}

/// One database: a replica plus the cache indices it handed out itself.
#[derive(Debug, Clone)]
pub struct DatabaseNode<'a> {
    pub id: u32,
    pub replica: &'a MessageStore,
    /// `H_n`; nothing about other databases' sets.
    pub known_cache: Vec<BitRef>,
}

impl<'a> DatabaseNode<'a> {
    pub fn new(id: u32, replica: &'a MessageStore, cache: &CachePlan) -> Self {
        DatabaseNode { id, replica, known_cache: cache.db_bits(id).collect() }
    }
}

/// Cached bit values together with the index sets they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserCache {
    pub sets: CachePlan,
    values: HashMap<BitRef, u8>,
}

impl UserCache {
    pub fn get(&self, b: &BitRef) -> Option<u8> {
        self.values.get(b).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cached bits obtained from database `db`.
    pub fn from_db(&self, db: u32) -> usize {
        (1..=self.sets.num_messages).map(|m| self.sets.indices(db, m).len()).sum()
    }
}

/// Prefetching phase: copy the planned bits out of the store.
pub fn prefetch(store: &MessageStore, cache: &CachePlan) -> Result<UserCache> {
    if cache.message_length != store.message_length() || cache.num_messages != store.num_messages() {
        return Err(Error::IndexOutOfRange("cache plan does not fit the store".into()));
    }
    let mut values = HashMap::new();
    for db in 1..=cache.num_databases {
        for b in cache.db_bits(db) {
            values.insert(b, store.bit(&b)?);
        }
    }
    Ok(UserCache { sets: cache.clone(), values })
}

/// One answer bit per equation: the XOR of the referenced bits.
pub fn answer(node: &DatabaseNode<'_>, equations: &[Equation]) -> Result<Vec<u8>> {
    equations
        .iter()
        .map(|eq| {
            if eq.terms.is_empty() {
                return Err(Error::MalformedEquation("empty equation".into()));
            }
            let mut messages: Vec<u32> = eq.terms.iter().map(|b| b.message).collect();
            messages.sort_unstable();
            if messages.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::MalformedEquation(format!("message {} appears twice", messages[0])));
            }
            eq.terms.iter().try_fold(0u8, |acc, b| Ok(acc ^ node.replica.bit(b)?))
        })
        .collect()
}

/// Recovers `W_θ` from the cache and per-database answers (each aligned
/// with [`QueryPlan::equations_for`]).
///
/// Works by plain XOR cancellation: the side terms of a desired-bearing
/// equation are either all cached or form exactly one downloaded undesired
/// equation.
pub fn decode(cache: &UserCache, plan: &QueryPlan, answers: &[Vec<u8>]) -> Result<Vec<u8>> {
    let n = plan.num_databases() as usize;
    if answers.len() != n {
        return Err(Error::AnswerLengthMismatch { expected: n, got: answers.len() });
    }
    let mut undesired: HashMap<&[BitRef], u8> = HashMap::new();
    let mut desired = Vec::new();
    for (db, ans) in (1..=plan.num_databases()).zip(answers) {
        let expected = plan.equations_for(db).count();
        if ans.len() != expected {
            return Err(Error::AnswerLengthMismatch { expected, got: ans.len() });
        }
        for (eq, &a) in plan.equations_for(db).zip(ans) {
            match eq.kind {
                EquationKind::Undesired => {
                    undesired.insert(&eq.terms, a);
                }
                EquationKind::DesiredBearing => desired.push((eq, a)),
            }
        }
    }

    let theta = plan.target;
    let l = plan.message_length as usize;
    let mut out: Vec<Option<u8>> =
        (1..=plan.message_length).map(|i| cache.get(&BitRef::new(theta, i))).collect();
    for (eq, a) in desired {
        let bit = eq.term_of(theta).expect("desired-bearing");
        let side = eq.side_terms(theta);
        let cached: Option<u8> = side.iter().try_fold(0u8, |acc, b| Some(acc ^ cache.get(b)?));
        let mask = match cached {
            Some(v) => v,
            None => *undesired.get(side.as_slice()).ok_or_else(|| Error::Unresolvable {
                index: bit.index,
                reason: "side information neither cached nor downloaded".into(),
            })?,
        };
        out[bit.index as usize - 1] = Some(a ^ mask);
    }
    (0..l)
        .map(|i| {
            out[i].ok_or_else(|| Error::Unresolvable { index: i as u32 + 1, reason: "never queried".into() })
        })
        .collect()
}

/// All answers for a plan, one vector per database, computed in parallel.
pub fn answer_all(store: &MessageStore, plan: &QueryPlan) -> Result<Vec<Vec<u8>>> {
    (1..=plan.num_databases())
        .into_par_iter()
        .map(|db| {
            let node = DatabaseNode::new(db, store, &plan.cache);
            let eqs: Vec<Equation> = plan.equations_for(db).cloned().collect();
            answer(&node, &eqs)
        })
        .collect()
}

/// Outcome of running one plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub decoded: Vec<u8>,
    pub decode_ok: bool,
    pub per_db: Vec<u64>,
}

/// Runs `plan` against `store`. `sent` is what the databases actually
/// receive; normally it is `plan` itself, a different value models a
/// corrupted query in transit.
pub fn execute(store: &MessageStore, plan: &QueryPlan, sent: &QueryPlan) -> Result<Execution> {
    let cache = prefetch(store, &plan.cache)?;
    let answers = answer_all(store, sent)?;
    let per_db = answers.iter().map(|a| a.len() as u64).collect();
    let decoded = decode(&cache, plan, &answers)?;
    let decode_ok = decoded == store.message(plan.target);
    Ok(Execution { decoded, decode_ok, per_db })
}

pub fn execute_plan(store: &MessageStore, plan: &QueryPlan) -> Result<Execution> {
    execute(store, plan, plan)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionReport {
    pub k: u32,
    pub n: u32,
    pub s: Option<u32>,
    pub r: Rational,
    pub theta: u32,
    pub seed: u64,
    #[serde(rename = "downloaded")]
    pub total_downloaded_bits: u64,
    #[serde(rename = "cost")]
    pub normalized_cost: Rational,
    pub decode_ok: bool,
    #[serde(rename = "per_db")]
    pub per_db_downloads: Vec<u64>,
}

impl SessionReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Plans, prefetches, answers and decodes one session. Messages, cache and
/// randomization all derive from `seed`.
pub fn run_session(params: &PirParams, theta: u32, seed: u64) -> Result<SessionReport> {
    let query = plan::plan_for(params, theta, seed)?;
    let store = MessageStore::random(query.num_messages(), query.message_length, sub_seed(seed, 2));
    let exec = execute_plan(&store, &query)?;
    let downloaded: u64 = exec.per_db.iter().sum();
    Ok(SessionReport {
        k: query.num_messages(),
        n: query.num_databases(),
        s: query.params.corner_index,
        r: query.params.caching_ratio.clone().expect("resolved"),
        theta,
        seed,
        total_downloaded_bits: downloaded,
        normalized_cost: Rational::from(downloaded) / Rational::from(query.message_length as u64),
        decode_ok: exec.decode_ok,
        per_db_downloads: exec.per_db,
    })
}
