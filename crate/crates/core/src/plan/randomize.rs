//! Seeded relabeling and query-order shuffling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::prefetch::relabel_terms;
use super::{BitRef, CachePlan, QueryPlan};

/// A per-message bijection on bit indices that maps every `H_{n,k}` onto
/// itself and the uncached complement onto itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    /// `maps[k-1][i]` is the new index of bit `i` of message `k`; slot 0 unused.
    maps: Vec<Vec<u32>>,
}

impl Relabeling {
    pub fn identity(num_messages: u32, message_length: u32) -> Self {
        Relabeling { maps: vec![(0..=message_length).collect(); num_messages as usize] }
    }

    /// Uniform over all bijections preserving the cache classes.
    pub fn sample<R: Rng + ?Sized>(cache: &CachePlan, rng: &mut R) -> Self {
        let mut out = Self::identity(cache.num_messages, cache.message_length);
        for m in 1..=cache.num_messages {
            let map = &mut out.maps[m as usize - 1];
            let classes = (1..=cache.num_databases).map(|db| cache.indices(db, m).to_vec()).chain([cache.uncached(m)]);
            for class in classes {
                let mut image = class.clone();
                image.shuffle(rng);
                for (from, to) in class.into_iter().zip(image) {
                    map[from as usize] = to;
                }
            }
        }
        out
    }

    pub fn map(&self, bit: &BitRef) -> BitRef {
        BitRef::new(bit.message, self.maps[bit.message as usize - 1][bit.index as usize])
    }

    /// Relabels every equation; the cache is unchanged as a set system.
    pub fn apply(&self, plan: &QueryPlan) -> QueryPlan {
        relabel_terms(plan, plan.cache.clone(), |b| self.map(b))
    }
}

/// Random relabeling followed by a uniform shuffle of the equations inside
/// every `(round, database)` batch.
pub fn randomize(plan: &QueryPlan, seed: u64) -> QueryPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let relabeling = Relabeling::sample(&plan.cache, &mut rng);
    let mut out = relabeling.apply(plan);
    for batch in &mut out.rounds {
        batch.equations.shuffle(&mut rng);
    }
    out.shuffle_seed = seed;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{canonical_corner, structural_audit};

    #[test]
    fn identity_is_noop() {
        let plan = canonical_corner(4, 2, 1, 1).unwrap();
        assert_eq!(Relabeling::identity(4, plan.message_length).apply(&plan), plan);
    }

    #[test]
    fn preserves_audit_and_shapes() {
        let plan = canonical_corner(4, 3, 2, 3).unwrap();
        let a = randomize(&plan, 1);
        let b = randomize(&plan, 2);
        assert_eq!(structural_audit(&a), structural_audit(&plan));
        assert_eq!(structural_audit(&b), structural_audit(&plan));
        assert_ne!(a.rounds, b.rounds);
        let shapes = |p: &QueryPlan| {
            let mut v: Vec<_> = p.equations().map(|e| (e.database, e.round, e.kind as u8)).collect();
            v.sort();
            v
        };
        assert_eq!(shapes(&a), shapes(&b));
        assert_eq!(a.cache, plan.cache);
    }

    #[test]
    fn relabeling_stays_in_class() {
        let plan = canonical_corner(5, 2, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Relabeling::sample(&plan.cache, &mut rng);
        for m in 1..=5 {
            for i in 1..=plan.message_length {
                let b = BitRef::new(m, i);
                assert_eq!(plan.cache.owner(&b), plan.cache.owner(&r.map(&b)));
            }
        }
    }
}
