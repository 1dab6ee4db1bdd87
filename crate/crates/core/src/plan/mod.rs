//! Prefetch assignments and GF(2) query plans.
//!
//! Plans are first built in a canonical labeling (database `n` caches bits
//! `(n-1)c+1 ..= nc` of every message, fresh bits are handed out in
//! ascending order) and only then mapped onto a sampled cache and relabeled,
//! so the canonical form lines up with hand-written query tables.

mod audit;
mod build;
mod json;
mod prefetch;
mod randomize;

pub use audit::{structural_audit, AuditTable, DbAudit};
pub use build::{
    canonical_classical, canonical_corner, canonical_for, canonical_full_cache, canonical_memory_share, plan_classical,
    plan_corner, plan_for, plan_memory_share, MAX_MESSAGE_BITS,
};
pub use json::{PlanJson, PrefetchJson, RoundJson, TermJson};
pub use prefetch::{embed, plan_prefetch, sample_cache_conditioned, sample_cache_like};
pub(crate) use prefetch::sub_seed;
pub use randomize::{randomize, Relabeling};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::params::{PirParams, Scheme};

/// One bit of one message, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitRef {
    pub message: u32,
    pub index: u32,
}

impl BitRef {
    pub fn new(message: u32, index: u32) -> Self {
        BitRef { message, index }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    /// Carries exactly one bit of the requested message.
    DesiredBearing,
    /// Only undesired-message bits.
    Undesired,
}

/// A GF(2) sum of bits, one per distinct message, sent to one database in
/// round `round` (the round of an equation equals its number of terms).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Equation {
    /// Sorted by message.
    pub terms: Vec<BitRef>,
    pub round: u32,
    pub database: u32,
    pub kind: EquationKind,
}

impl Equation {
    pub fn new(mut terms: Vec<BitRef>, round: u32, database: u32, target: u32) -> Self {
        terms.sort();
        let kind = if terms.iter().any(|b| b.message == target) {
            EquationKind::DesiredBearing
        } else {
            EquationKind::Undesired
        };
        Equation { terms, round, database, kind }
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn term_of(&self, message: u32) -> Option<BitRef> {
        self.terms.iter().copied().find(|b| b.message == message)
    }

    /// Terms other than the bit of `target`.
    pub fn side_terms(&self, target: u32) -> Vec<BitRef> {
        self.terms.iter().copied().filter(|b| b.message != target).collect()
    }

    pub fn contains(&self, bit: &BitRef) -> bool {
        self.terms.binary_search(bit).is_ok()
    }
}

/// Which bits the user caches from which database: `H_{n,k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachePlan {
    pub num_messages: u32,
    pub num_databases: u32,
    pub message_length: u32,
    /// `sets[n-1][k-1]`, each sorted ascending.
    sets: Vec<Vec<Vec<u32>>>,
}

impl CachePlan {
    /// `sets[n-1][k-1]` lists the indices of message `k` cached from
    /// database `n`.
    pub fn from_sets(num_messages: u32, num_databases: u32, message_length: u32, mut sets: Vec<Vec<Vec<u32>>>) -> Self {
        for per_db in &mut sets {
            for set in per_db.iter_mut() {
                set.sort_unstable();
            }
        }
        CachePlan { num_messages, num_databases, message_length, sets }
    }

    pub fn empty(num_messages: u32, num_databases: u32, message_length: u32) -> Self {
        let sets = vec![vec![Vec::new(); num_messages as usize]; num_databases as usize];
        CachePlan { num_messages, num_databases, message_length, sets }
    }

    /// `H_{n,k}`.
    pub fn indices(&self, db: u32, message: u32) -> &[u32] {
        &self.sets[db as usize - 1][message as usize - 1]
    }

    /// `H_n` as bit references.
    pub fn db_bits(&self, db: u32) -> impl Iterator<Item = BitRef> + '_ {
        self.sets[db as usize - 1]
            .iter()
            .enumerate()
            .flat_map(|(k, set)| set.iter().map(move |&i| BitRef::new(k as u32 + 1, i)))
    }

    pub fn contains(&self, db: u32, bit: &BitRef) -> bool {
        self.indices(db, bit.message).binary_search(&bit.index).is_ok()
    }

    /// Database a cached bit came from, if it is cached at all.
    pub fn owner(&self, bit: &BitRef) -> Option<u32> {
        (1..=self.num_databases).find(|&db| self.contains(db, bit))
    }

    pub fn is_cached(&self, bit: &BitRef) -> bool {
        self.owner(bit).is_some()
    }

    /// Number of cached bits per `(database, message)` when uniform.
    pub fn per_db_count(&self) -> Option<usize> {
        let first = self.sets.first()?.first()?.len();
        self.sets.iter().flatten().all(|s| s.len() == first).then_some(first)
    }

    /// Sets of different databases never intersect.
    pub fn is_disjoint(&self) -> bool {
        (1..=self.num_messages).all(|k| {
            let mut seen = BTreeSet::new();
            (1..=self.num_databases).all(|db| self.indices(db, k).iter().all(|i| seen.insert(*i)))
        })
    }

    pub fn total_cached(&self, message: u32) -> usize {
        (1..=self.num_databases).map(|db| self.indices(db, message).len()).sum()
    }

    /// Indices of `message` not cached from any database, ascending.
    pub fn uncached(&self, message: u32) -> Vec<u32> {
        let cached: BTreeSet<u32> =
            (1..=self.num_databases).flat_map(|db| self.indices(db, message).iter().copied()).collect();
        (1..=self.message_length).filter(|i| !cached.contains(i)).collect()
    }
}

/// Equations sent to one database in one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundBatch {
    pub t: u32,
    pub database: u32,
    pub equations: Vec<Equation>,
}

/// Everything the user sends, plus the bookkeeping needed to decode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPlan {
    /// Resolved parameters: both corner index (if any) and caching ratio.
    pub params: PirParams,
    pub scheme: Scheme,
    pub target: u32,
    pub message_length: u32,
    pub cache: CachePlan,
    /// Sorted by `(t, database)`, one batch per pair.
    pub rounds: Vec<RoundBatch>,
    pub shuffle_seed: u64,
}

impl QueryPlan {
    pub fn num_messages(&self) -> u32 {
        self.params.num_messages
    }

    pub fn num_databases(&self) -> u32 {
        self.params.num_databases
    }

    pub fn equations(&self) -> impl Iterator<Item = &Equation> {
        self.rounds.iter().flat_map(|b| b.equations.iter())
    }

    /// The query for database `db`, in transmission order.
    pub fn equations_for(&self, db: u32) -> impl Iterator<Item = &Equation> {
        self.rounds.iter().filter(move |b| b.database == db).flat_map(|b| b.equations.iter())
    }

    pub fn total_equations(&self) -> usize {
        self.rounds.iter().map(|b| b.equations.len()).sum()
    }

    pub fn per_db_equations(&self) -> Vec<usize> {
        (1..=self.num_databases()).map(|db| self.equations_for(db).count()).collect()
    }

    pub fn batch(&self, t: u32, db: u32) -> Option<&RoundBatch> {
        self.rounds.iter().find(|b| b.t == t && b.database == db)
    }
}

/// All `r`-subsets of `items` in lexicographic order.
pub(crate) fn combinations(items: &[u32], r: usize) -> Vec<Vec<u32>> {
    let n = items.len();
    if r > n {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..r).collect();
    let mut out = Vec::new();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // Rightmost position that can still advance.
        let mut i = r;
        while i > 0 && idx[i - 1] == n - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
