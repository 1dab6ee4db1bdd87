//! Canonical construction of corner, classical, full-cache and
//! memory-shared plans.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::prefetch::{embed, plan_prefetch, sample_cache_like, sub_seed};
use super::randomize::randomize;
use super::{combinations, BitRef, CachePlan, Equation, QueryPlan, RoundBatch};
use crate::bounds::{self, binomial};
use crate::error::{Error, Result};
use crate::params::{PirParams, Scheme};
use crate::rational::Rational;

/// Largest message length the planner will materialize.
pub const MAX_MESSAGE_BITS: u64 = 1 << 20;

fn check_size(bits: u64) -> Result<u32> {
    if bits > MAX_MESSAGE_BITS {
        return Err(Error::InstanceTooLarge(bits.to_string()));
    }
    Ok(bits as u32)
}

fn check_target(k: u32, theta: u32) -> Result<()> {
    if theta == 0 || theta > k {
        return Err(Error::InvalidTarget { theta, k });
    }
    Ok(())
}

/// A plan under construction in canonical labeling.
struct Draft {
    k: u32,
    n: u32,
    theta: u32,
    l: u32,
    cache: CachePlan,
    next_fresh: Vec<u32>,
    batches: BTreeMap<(u32, u32), Vec<Equation>>,
}

impl Draft {
    /// Database `db` caches `(db-1)c+1 ..= db·c` of every message; fresh bits
    /// start right after the `N·c` cached ones.
    fn new(k: u32, n: u32, theta: u32, l: u32, cached_per_db: u32) -> Self {
        let sets = (0..n)
            .map(|db| (0..k).map(|_| (db * cached_per_db + 1..=(db + 1) * cached_per_db).collect()).collect())
            .collect();
        Draft {
            k,
            n,
            theta,
            l,
            cache: CachePlan::from_sets(k, n, l, sets),
            next_fresh: vec![n * cached_per_db + 1; k as usize],
            batches: BTreeMap::new(),
        }
    }

    fn fresh(&mut self, message: u32) -> BitRef {
        let slot = &mut self.next_fresh[message as usize - 1];
        assert!(*slot <= self.l, "message {message} ran out of fresh bits");
        let bit = BitRef::new(message, *slot);
        *slot += 1;
        bit
    }

    fn push(&mut self, t: u32, db: u32, terms: Vec<BitRef>) {
        debug_assert_eq!(terms.len(), t as usize);
        let eq = Equation::new(terms, t, db, self.theta);
        self.batches.entry((t, db)).or_default().push(eq);
    }

    fn undesired(&self) -> Vec<u32> {
        (1..=self.k).filter(|&m| m != self.theta).collect()
    }

    /// Rounds `from ..= K`. In round `t` each database pairs a fresh desired
    /// bit with every undesired sum the other databases produced in round
    /// `t-1`, then downloads `copies(t)` fresh sums for every `t`-subset of
    /// undesired messages.
    fn continue_rounds(&mut self, mut prev: Vec<Vec<Vec<BitRef>>>, from: u32, copies: impl Fn(u32) -> u64) {
        let undesired = self.undesired();
        for t in from..=self.k {
            let mut next = vec![Vec::new(); self.n as usize];
            for db in 1..=self.n {
                for src in (1..=self.n).filter(|&m| m != db) {
                    for side in prev[src as usize - 1].clone() {
                        let mut terms = vec![self.fresh(self.theta)];
                        terms.extend(side);
                        self.push(t, db, terms);
                    }
                }
                for subset in combinations(&undesired, t as usize) {
                    for _ in 0..copies(t) {
                        let terms: Vec<BitRef> = subset.iter().map(|&m| self.fresh(m)).collect();
                        next[db as usize - 1].push(terms.clone());
                        self.push(t, db, terms);
                    }
                }
            }
            prev = next;
        }
    }

    fn finish(self, params: PirParams, scheme: Scheme) -> QueryPlan {
        let rounds = self
            .batches
            .into_iter()
            .map(|((t, database), equations)| RoundBatch { t, database, equations })
            .collect();
        QueryPlan {
            params,
            scheme,
            target: self.theta,
            message_length: self.l,
            cache: self.cache,
            rounds,
            shuffle_seed: 0,
        }
    }
}

/// Corner `s` plan in canonical labeling, before any randomization.
///
/// Round `s+1`: at database `n`, for every `s`-subset of undesired messages
/// and every other database `m`, one fresh desired bit plus one bit of each
/// subset message cached from `m`; then `N-1` fresh sums for every
/// `(s+1)`-subset of undesired messages. Later rounds follow
/// [`Draft::continue_rounds`] with `(N-1)^{t-s}` copies.
pub fn canonical_corner(k: u32, n: u32, s: u32, theta: u32) -> Result<QueryPlan> {
    let (params, scheme) = PirParams::with_corner(k, n, s)?.resolve()?;
    if s == 0 {
        return canonical_classical(k, n, theta);
    }
    check_target(k, theta)?;
    let l = check_size(bounds::message_length(k, n, s)?.to_u64().unwrap_or(u64::MAX))?;
    let cached = binomial(k as u64 - 2, s as i64 - 1).to_u32().expect("fits since L does");
    let mut d = Draft::new(k, n, theta, l, cached);

    let undesired = d.undesired();
    let subsets = combinations(&undesired, s as usize);
    // rank[i][p]: position of subset i among the subsets containing its
    // p-th message, which selects that message's cached bit.
    let mut seen = vec![0u32; k as usize];
    let ranks: Vec<Vec<u32>> = subsets
        .iter()
        .map(|sub| {
            sub.iter()
                .map(|&m| {
                    let r = seen[m as usize - 1];
                    seen[m as usize - 1] += 1;
                    r
                })
                .collect()
        })
        .collect();

    let t = s + 1;
    let mut prev = vec![Vec::new(); n as usize];
    for db in 1..=n {
        for (sub, rank) in subsets.iter().zip(&ranks) {
            for src in (1..=n).filter(|&m| m != db) {
                let mut terms = vec![d.fresh(theta)];
                for (&m, &r) in sub.iter().zip(rank) {
                    terms.push(BitRef::new(m, d.cache.indices(src, m)[r as usize]));
                }
                d.push(t, db, terms);
            }
        }
        for subset in combinations(&undesired, t as usize) {
            for _ in 1..n {
                let terms: Vec<BitRef> = subset.iter().map(|&m| d.fresh(m)).collect();
                prev[db as usize - 1].push(terms.clone());
                d.push(t, db, terms);
            }
        }
    }
    let base = (n - 1) as u64;
    d.continue_rounds(prev, s + 2, |t| base.pow(t - s));
    debug_assert_eq!(d.next_fresh[theta as usize - 1], l + 1);
    Ok(d.finish(params, scheme))
}

/// Classical `r = 0` plan: round 1 downloads one bit of every message from
/// each database, later rounds continue greedily with `(N-1)^{t-1}` copies.
/// Message length `N^K`, normalized cost `Σ_{j<K} N^{-j}`.
///
/// Also accepts `K = 1`, where it degenerates to reading the message.
pub fn canonical_classical(k: u32, n: u32, theta: u32) -> Result<QueryPlan> {
    if k == 0 || n < 2 {
        return Err(Error::InvalidParams(format!("classical plan needs K ≥ 1, N ≥ 2 (got K={k}, N={n})")));
    }
    check_target(k, theta)?;
    let l = check_size((n as u64).checked_pow(k).unwrap_or(u64::MAX))?;
    let params = PirParams {
        num_messages: k,
        num_databases: n,
        corner_index: Some(0),
        caching_ratio: Some(Rational::zero()),
    };
    let mut d = Draft::new(k, n, theta, l, 0);
    let mut prev = vec![Vec::new(); n as usize];
    for db in 1..=n {
        let bit = d.fresh(theta);
        d.push(1, db, vec![bit]);
        for m in d.undesired() {
            let bit = d.fresh(m);
            prev[db as usize - 1].push(vec![bit]);
            d.push(1, db, vec![bit]);
        }
    }
    let base = (n - 1) as u64;
    d.continue_rounds(prev, 2, |t| base.pow(t - 1));
    Ok(d.finish(params, Scheme::Classical))
}

/// `r = 1`: `L = N`, bit `n` of every message cached from database `n`, no
/// queries at all.
pub fn canonical_full_cache(k: u32, n: u32, theta: u32) -> Result<QueryPlan> {
    bounds::validate(k, n)?;
    check_target(k, theta)?;
    let params = PirParams {
        num_messages: k,
        num_databases: n,
        corner_index: None,
        caching_ratio: Some(Rational::one()),
    };
    let d = Draft::new(k, n, theta, n, 1);
    Ok(d.finish(params, Scheme::FullCache))
}

/// Canonical plan for extended corner index `0 ..= K`.
fn canonical_index(k: u32, n: u32, idx: u32, theta: u32) -> Result<QueryPlan> {
    match idx {
        0 => canonical_classical(k, n, theta),
        i if i == k => canonical_full_cache(k, n, theta),
        s => canonical_corner(k, n, s, theta),
    }
}

/// Memory sharing between the two corners enclosing `r`.
///
/// With `r = α r_lo + (1-α) r_hi`, each message is split into `m` copies
/// of the lower scheme and `m'` copies of the upper one, the smallest
/// positive integers with `m L_lo : m' L_hi = α : 1-α`. Cached bits of all
/// copies come first (database by database), then the fresh bits copy by
/// copy.
pub fn canonical_memory_share(k: u32, n: u32, r: &Rational, theta: u32) -> Result<QueryPlan> {
    let (params, scheme) = PirParams::with_ratio(k, n, r.clone())?.resolve()?;
    let Scheme::MemoryShare { lower, alpha } = scheme.clone() else {
        return Err(Error::RatioIsCorner(r.to_string()));
    };
    check_target(k, theta)?;
    let lo = canonical_index(k, n, lower, theta)?;
    let hi = canonical_index(k, n, lower + 1, theta)?;

    let (p, q) = (
        alpha.numer().to_u64().expect("alpha in (0,1)"),
        alpha.denom().to_u64().ok_or_else(|| Error::InstanceTooLarge(alpha.to_string()))?,
    );
    let a = lo.message_length as u64 * (q - p);
    let b = hi.message_length as u64 * p;
    let g = a.gcd(&b);
    let (m_lo, m_hi) = (b / g, a / g);
    let total = m_lo
        .checked_mul(lo.message_length as u64)
        .and_then(|x| x.checked_add(m_hi.checked_mul(hi.message_length as u64)?))
        .unwrap_or(u64::MAX);
    let l = check_size(total)?;

    let copies: Vec<&QueryPlan> =
        std::iter::repeat_n(&lo, m_lo as usize).chain(std::iter::repeat_n(&hi, m_hi as usize)).collect();

    // Local-to-global index maps, identical for every message.
    let mut maps: Vec<Vec<u32>> = copies.iter().map(|c| vec![0; c.message_length as usize + 1]).collect();
    let mut next = 1u32;
    for db in 1..=n {
        for (c, map) in copies.iter().zip(maps.iter_mut()) {
            for &i in c.cache.indices(db, 1) {
                map[i as usize] = next;
                next += 1;
            }
        }
    }
    for (c, map) in copies.iter().zip(maps.iter_mut()) {
        for i in c.cache.uncached(1) {
            map[i as usize] = next;
            next += 1;
        }
    }
    debug_assert_eq!(next, l + 1);

    let sets = (1..=n)
        .map(|db| {
            (1..=k)
                .map(|m| {
                    copies
                        .iter()
                        .zip(&maps)
                        .flat_map(|(c, map)| c.cache.indices(db, m).iter().map(|&i| map[i as usize]))
                        .collect()
                })
                .collect()
        })
        .collect();
    let cache = CachePlan::from_sets(k, n, l, sets);

    let mut batches: BTreeMap<(u32, u32), Vec<Equation>> = BTreeMap::new();
    for (c, map) in copies.iter().zip(&maps) {
        for batch in &c.rounds {
            let out = batches.entry((batch.t, batch.database)).or_default();
            for eq in &batch.equations {
                let terms = eq.terms.iter().map(|b| BitRef::new(b.message, map[b.index as usize])).collect();
                out.push(Equation::new(terms, eq.round, eq.database, theta));
            }
        }
    }
    let rounds =
        batches.into_iter().map(|((t, database), equations)| RoundBatch { t, database, equations }).collect();
    Ok(QueryPlan { params, scheme, target: theta, message_length: l, cache, rounds, shuffle_seed: 0 })
}

/// Canonical plan for any resolved instance.
pub fn canonical_for(params: &PirParams, theta: u32) -> Result<QueryPlan> {
    let (resolved, scheme) = params.resolve()?;
    let (k, n) = (resolved.num_messages, resolved.num_databases);
    match scheme {
        Scheme::Classical => canonical_classical(k, n, theta),
        Scheme::Corner { s } => canonical_corner(k, n, s, theta),
        Scheme::FullCache => canonical_full_cache(k, n, theta),
        Scheme::MemoryShare { .. } => {
            canonical_memory_share(k, n, resolved.caching_ratio.as_ref().expect("ratio-driven"), theta)
        }
    }
}

/// Sample a cache with the canonical plan's shape, move the plan onto it,
/// then relabel and shuffle.
fn realize(canonical: QueryPlan, seed: u64) -> Result<QueryPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 0));
    let cache = sample_cache_like(&canonical.cache, &mut rng);
    Ok(randomize(&embed(&canonical, &cache)?, sub_seed(seed, 1)))
}

/// Randomized corner plan. Its cache is exactly `plan_prefetch(K, N, s, seed)`.
pub fn plan_corner(k: u32, n: u32, s: u32, theta: u32, seed: u64) -> Result<QueryPlan> {
    let canonical = canonical_corner(k, n, s, theta)?;
    if s == 0 {
        return realize(canonical, seed);
    }
    let cache = plan_prefetch(k, n, s, seed)?;
    Ok(randomize(&embed(&canonical, &cache)?, sub_seed(seed, 1)))
}

pub fn plan_classical(k: u32, n: u32, theta: u32, seed: u64) -> Result<QueryPlan> {
    realize(canonical_classical(k, n, theta)?, seed)
}

pub fn plan_memory_share(k: u32, n: u32, r: &Rational, theta: u32, seed: u64) -> Result<QueryPlan> {
    realize(canonical_memory_share(k, n, r, theta)?, seed)
}

/// Randomized plan for any instance: corner, endpoint or memory-shared.
pub fn plan_for(params: &PirParams, theta: u32, seed: u64) -> Result<QueryPlan> {
    let (resolved, scheme) = params.resolve()?;
    match scheme {
        Scheme::Corner { s } => plan_corner(resolved.num_messages, resolved.num_databases, s, theta, seed),
        _ => realize(canonical_for(params, theta)?, seed),
    }
}
