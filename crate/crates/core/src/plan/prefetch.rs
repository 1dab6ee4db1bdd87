//! Random prefetch assignments and moving canonical plans onto them.

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BitRef, CachePlan, Equation, QueryPlan, RoundBatch};
use crate::bounds::{self, binomial};
use crate::error::{Error, Result};

/// Independent-looking sub-seed for stream `stream` of `seed` (splitmix64).
pub(crate) fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Corner `s` prefetch: for every message, `N·C(K-2, s-1)` distinct indices
/// chosen uniformly from `1..=L(s)` and split evenly across databases.
pub fn plan_prefetch(k: u32, n: u32, s: u32, seed: u64) -> Result<CachePlan> {
    bounds::validate(k, n)?;
    if s == 0 || s >= k {
        return Err(Error::InvalidCorner { s, k, max: k - 1 });
    }
    let l = bounds::message_length(k, n, s)?
        .to_u32()
        .filter(|&l| l as u64 <= super::MAX_MESSAGE_BITS)
        .ok_or_else(|| Error::InstanceTooLarge(format!("K={k} N={n} s={s}")))?;
    let c = binomial(k as u64 - 2, s as i64 - 1).to_u32().expect("c < L");
    let shape = vec![vec![vec![0; c as usize]; k as usize]; n as usize];
    let shape = CachePlan::from_sets(k, n, l, shape);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 0));
    Ok(sample_cache_like(&shape, &mut rng))
}

/// Uniformly random disjoint cache with the same set sizes as `shape`.
pub fn sample_cache_like<R: Rng + ?Sized>(shape: &CachePlan, rng: &mut R) -> CachePlan {
    let (k, n, l) = (shape.num_messages, shape.num_databases, shape.message_length);
    let mut sets = vec![vec![Vec::new(); k as usize]; n as usize];
    for m in 1..=k {
        let mut pool: Vec<u32> = (1..=l).collect();
        pool.shuffle(rng);
        let mut rest = pool.as_slice();
        for db in 1..=n {
            let (take, tail) = rest.split_at(shape.indices(db, m).len());
            sets[db as usize - 1][m as usize - 1] = take.to_vec();
            rest = tail;
        }
    }
    CachePlan::from_sets(k, n, l, sets)
}

/// Resample every other database's sets while keeping `H_db` fixed: the
/// cache distribution as database `db` sees it.
pub fn sample_cache_conditioned<R: Rng + ?Sized>(cache: &CachePlan, db: u32, rng: &mut R) -> CachePlan {
    let (k, n, l) = (cache.num_messages, cache.num_databases, cache.message_length);
    let mut sets = vec![vec![Vec::new(); k as usize]; n as usize];
    for m in 1..=k {
        let own = cache.indices(db, m);
        let mut pool: Vec<u32> = (1..=l).filter(|i| own.binary_search(i).is_err()).collect();
        pool.shuffle(rng);
        let mut rest = pool.as_slice();
        for other in 1..=n {
            sets[other as usize - 1][m as usize - 1] = if other == db {
                own.to_vec()
            } else {
                let (take, tail) = rest.split_at(cache.indices(other, m).len());
                rest = tail;
                take.to_vec()
            };
        }
    }
    CachePlan::from_sets(k, n, l, sets)
}

/// Carry a plan over to another cache of identical shape. Each `H_{n,k}`
/// maps onto its counterpart and the uncached complement onto the
/// complement, all order-preserving.
pub fn embed(plan: &QueryPlan, cache: &CachePlan) -> Result<QueryPlan> {
    let src = &plan.cache;
    let same_shape = src.num_messages == cache.num_messages
        && src.num_databases == cache.num_databases
        && src.message_length == cache.message_length
        && (1..=src.num_databases).all(|db| {
            (1..=src.num_messages).all(|m| src.indices(db, m).len() == cache.indices(db, m).len())
        });
    if !same_shape || !cache.is_disjoint() {
        return Err(Error::InvalidParams("target cache does not match the plan's cache shape".into()));
    }
    let maps: Vec<Vec<u32>> = (1..=src.num_messages)
        .map(|m| {
            let mut map = vec![0; src.message_length as usize + 1];
            for db in 1..=src.num_databases {
                for (&from, &to) in src.indices(db, m).iter().zip(cache.indices(db, m)) {
                    map[from as usize] = to;
                }
            }
            for (from, to) in src.uncached(m).into_iter().zip(cache.uncached(m)) {
                map[from as usize] = to;
            }
            map
        })
        .collect();
    Ok(relabel_terms(plan, cache.clone(), |b| BitRef::new(b.message, maps[b.message as usize - 1][b.index as usize])))
}

/// Same plan with every term passed through `f` and a new cache.
pub(crate) fn relabel_terms(plan: &QueryPlan, cache: CachePlan, f: impl Fn(&BitRef) -> BitRef) -> QueryPlan {
    let rounds = plan
        .rounds
        .iter()
        .map(|batch| RoundBatch {
            t: batch.t,
            database: batch.database,
            equations: batch
                .equations
                .iter()
                .map(|eq| Equation::new(eq.terms.iter().map(&f).collect(), eq.round, eq.database, plan.target))
                .collect(),
        })
        .collect();
    QueryPlan { cache, rounds, ..plan.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::canonical_corner;

    #[test]
    fn prefetch_shapes() {
        let cache = plan_prefetch(3, 2, 1, 7).unwrap();
        assert_eq!(cache.message_length, 8);
        assert_eq!(cache.per_db_count(), Some(1));
        assert!(cache.is_disjoint());
        let cache = plan_prefetch(4, 2, 2, 7).unwrap();
        assert_eq!(cache.per_db_count(), Some(2));
        for k in 3..7 {
            assert_eq!(plan_prefetch(k, 3, k - 1, 1).unwrap().per_db_count(), Some(1));
        }
        assert_eq!(plan_prefetch(5, 3, 2, 99).unwrap(), plan_prefetch(5, 3, 2, 99).unwrap());
        assert_ne!(plan_prefetch(5, 3, 2, 99).unwrap(), plan_prefetch(5, 3, 2, 98).unwrap());
        assert!(plan_prefetch(4, 2, 0, 1).is_err());
        assert!(plan_prefetch(4, 2, 4, 1).is_err());
    }

    #[test]
    fn conditioned_keeps_own_sets() {
        let cache = plan_prefetch(4, 3, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let other = sample_cache_conditioned(&cache, 2, &mut rng);
            assert!(other.is_disjoint());
            for m in 1..=4 {
                assert_eq!(other.indices(2, m), cache.indices(2, m));
                assert_eq!(other.indices(1, m).len(), cache.indices(1, m).len());
            }
        }
    }

    #[test]
    fn embed_respects_ownership() {
        let plan = canonical_corner(4, 3, 2, 2).unwrap();
        let cache = plan_prefetch(4, 3, 2, 11).unwrap();
        let moved = embed(&plan, &cache).unwrap();
        assert_eq!(moved.cache, cache);
        for (a, b) in plan.equations().zip(moved.equations()) {
            assert_eq!(a.order(), b.order());
            for (x, y) in a.terms.iter().zip(&b.terms) {
                assert_eq!(plan.cache.owner(x), cache.owner(y));
            }
        }
        let wrong = plan_prefetch(4, 3, 1, 11).unwrap();
        assert!(embed(&plan, &wrong).is_err());
    }
}
