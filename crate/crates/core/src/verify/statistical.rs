//! Monte-Carlo comparison of what a single database sees under different
//! target messages.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DbDetail, Mode, PrivacyReport};
use crate::error::{Error, Result};
use crate::params::PirParams;
use crate::plan::{self, embed, randomize, sample_cache_conditioned, sub_seed, BitRef, CachePlan, QueryPlan};

/// Largest transcript space the estimator will tabulate.
pub const DEFAULT_BUDGET: u64 = 10_000;

pub const DEFAULT_TV_THRESHOLD: f64 = 0.05;

/// What counts as one observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    /// The whole sorted query a database receives.
    Full,
    /// Each received equation on its own, pooled over the query.
    Equation,
    /// `Full` when it fits the budget, otherwise `Equation`.
    Auto,
}

/// How plans are randomized before a database sees them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Randomizer {
    /// Unknown caches resampled given `H_n`, then relabeled and shuffled.
    Seeded,
    /// Negative control: one fixed cache, canonical labels, shuffling only.
    NoRelabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticalOptions {
    pub view: View,
    pub budget: u64,
    pub threshold: f64,
    pub randomizer: Randomizer,
}

impl Default for StatisticalOptions {
    fn default() -> Self {
        StatisticalOptions {
            view: View::Auto,
            budget: DEFAULT_BUDGET,
            threshold: DEFAULT_TV_THRESHOLD,
            randomizer: Randomizer::Seeded,
        }
    }
}

/// Upper bound on the number of distinct observations database `db` can
/// make under `view`: every term ranges over the bits of its message that
/// `db` did not hand out.
pub fn transcript_cells(plan: &QueryPlan, db: u32, view: View) -> u128 {
    let free = |m: u32| (plan.message_length as usize - plan.cache.indices(db, m).len()) as u128;
    let eq_cells = |terms: &[BitRef]| terms.iter().map(|b| free(b.message)).product::<u128>();
    match view {
        View::Full | View::Auto => {
            plan.equations_for(db).map(|e| eq_cells(&e.terms)).fold(1u128, |a, c| a.saturating_mul(c))
        }
        View::Equation => {
            let mut shapes: Vec<Vec<u32>> =
                plan.equations_for(db).map(|e| e.terms.iter().map(|b| b.message).collect()).collect();
            shapes.sort();
            shapes.dedup();
            shapes.iter().map(|ms| ms.iter().map(|&m| free(m)).product::<u128>()).sum()
        }
    }
}

type Observation = Vec<Vec<BitRef>>;

fn observe(plan: &QueryPlan, db: u32, view: View, out: &mut HashMap<Observation, u64>) {
    let mut eqs: Vec<Vec<BitRef>> = plan.equations_for(db).map(|e| e.terms.clone()).collect();
    match view {
        View::Equation => {
            for e in eqs {
                *out.entry(vec![e]).or_default() += 1;
            }
        }
        _ => {
            eqs.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
            *out.entry(eqs).or_default() += 1;
        }
    }
}

fn tv(p: &HashMap<Observation, u64>, q: &HashMap<Observation, u64>) -> f64 {
    let (np, nq) = (p.values().sum::<u64>() as f64, q.values().sum::<u64>() as f64);
    let mut sum: f64 = p.iter().map(|(k, &c)| (c as f64 / np - q.get(k).copied().unwrap_or(0) as f64 / nq).abs()).sum();
    sum += q.iter().filter(|(k, _)| !p.contains_key(*k)).map(|(_, &c)| c as f64 / nq).sum::<f64>();
    sum / 2.0
}

/// Empirical distribution of database `db`'s observations for one target.
fn sample_distribution(
    canonical: &QueryPlan,
    realized: &CachePlan,
    db: u32,
    view: View,
    randomizer: Randomizer,
    samples: u64,
    seed: u64,
) -> Result<HashMap<Observation, u64>> {
    let fixed = match randomizer {
        Randomizer::NoRelabel => Some(embed(canonical, realized)?),
        Randomizer::Seeded => None,
    };
    let chunks = 64u64.min(samples.max(1));
    let maps = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<HashMap<Observation, u64>> {
            let mut out = HashMap::new();
            let lo = samples * chunk / chunks;
            let hi = samples * (chunk + 1) / chunks;
            for i in lo..hi {
                let s = sub_seed(seed, i);
                let plan = match &fixed {
                    Some(p) => p.clone(),
                    None => {
                        let mut rng = ChaCha8Rng::seed_from_u64(s);
                        let cache = sample_cache_conditioned(realized, db, &mut rng);
                        randomize(&embed(canonical, &cache)?, sub_seed(s, 1))
                    }
                };
                observe(&plan, db, view, &mut out);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = HashMap::new();
    for m in maps {
        for (k, c) in m {
            *total.entry(k).or_default() += c;
        }
    }
    Ok(total)
}

/// For every database `n`: fix one prefetch realization, sample randomized
/// plans for each target (the caches of the other databases resampled as
/// `n` cannot see them), and compare the empirical distributions of what
/// `n` observes. Passes iff the largest pairwise total-variation distance
/// stays below the threshold.
///
/// `theta_pair` restricts the comparison to one pair of targets.
pub fn verify_statistical_privacy(
    k: u32,
    n: u32,
    s: u32,
    samples: u64,
    theta_pair: Option<(u32, u32)>,
    seed: u64,
    options: StatisticalOptions,
) -> Result<PrivacyReport> {
    PirParams::with_corner(k, n, s)?;
    let canon: Vec<QueryPlan> = (1..=k).map(|theta| plan::canonical_corner(k, n, s, theta)).collect::<Result<_>>()?;
    let realized = plan::plan_for(&PirParams::with_corner(k, n, s)?, 1, seed)?.cache;
    let targets: Vec<u32> = match theta_pair {
        Some((a, b)) => {
            for t in [a, b] {
                if t == 0 || t > k {
                    return Err(Error::InvalidTarget { theta: t, k });
                }
            }
            vec![a, b]
        }
        None => (1..=k).collect(),
    };

    let mut details = Vec::new();
    let mut notes = Vec::new();
    let mut worst = 0f64;
    for db in 1..=n {
        let view = match options.view {
            View::Auto if transcript_cells(&canon[0], db, View::Full) <= options.budget as u128 => View::Full,
            View::Auto => View::Equation,
            v => v,
        };
        let cells = transcript_cells(&canon[0], db, view);
        if cells > options.budget as u128 {
            return Err(Error::EnumerationBudget { cells: cells.to_string(), budget: options.budget });
        }
        let dists = targets
            .iter()
            .map(|&t| {
                let stream = sub_seed(sub_seed(seed, 100 + db as u64), t as u64);
                sample_distribution(&canon[t as usize - 1], &realized, db, view, options.randomizer, samples, stream)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut db_worst = 0f64;
        for i in 0..dists.len() {
            for j in i + 1..dists.len() {
                db_worst = db_worst.max(tv(&dists[i], &dists[j]));
            }
        }
        worst = worst.max(db_worst);
        details.push(DbDetail { database: db, pass: db_worst < options.threshold, violations: 0, tv_distance: Some(db_worst) });
        if db == 1 {
            notes.push(format!("view={view:?} cells={cells}").to_lowercase());
        }
    }
    let pass = details.iter().all(|d| d.pass);
    Ok(PrivacyReport { mode: Mode::Statistical, pass, details, tv_distance: Some(worst), samples, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_for_small_instances() {
        let plan = plan::canonical_corner(2, 2, 1, 1).unwrap();
        assert_eq!(transcript_cells(&plan, 1, View::Full), 9);
        let plan = plan::canonical_corner(3, 2, 1, 1).unwrap();
        assert_eq!(transcript_cells(&plan, 1, View::Equation), 3 * 49 + 343);
        assert_eq!(transcript_cells(&plan, 2, View::Full), 7u128.pow(9));
    }

    #[test]
    fn tv_of_disjoint_and_equal() {
        let a: HashMap<Observation, u64> = [(vec![vec![BitRef::new(1, 1)]], 3)].into();
        let b: HashMap<Observation, u64> = [(vec![vec![BitRef::new(1, 2)]], 5)].into();
        assert_eq!(tv(&a, &b), 1.0);
        assert_eq!(tv(&a, &a), 0.0);
    }

    #[test]
    fn small_instance_is_private_and_control_is_not() {
        let opts = StatisticalOptions::default();
        let report = verify_statistical_privacy(2, 2, 1, 20_000, None, 1, opts).unwrap();
        assert!(report.pass, "{report:?}");
        let control = StatisticalOptions { randomizer: Randomizer::NoRelabel, ..opts };
        let report = verify_statistical_privacy(2, 2, 1, 2_000, None, 1, control).unwrap();
        assert!(report.tv_distance.unwrap() > 0.5);
    }

    #[test]
    fn budget_is_enforced() {
        let opts = StatisticalOptions { view: View::Full, ..Default::default() };
        assert!(matches!(
            verify_statistical_privacy(3, 2, 1, 100, None, 1, opts),
            Err(Error::EnumerationBudget { .. })
        ));
        assert!(verify_statistical_privacy(3, 2, 1, 10, Some((1, 4)), 1, Default::default()).is_err());
    }
}
