//! Label-free counts describing what each database sees.

use serde::{Deserialize, Serialize};

use super::{EquationKind, QueryPlan};

/// Counts for one database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DbAudit {
    pub database: u32,
    /// `by_order[t-1][k-1]`: equations of order `t` containing a bit of message `k`.
    pub by_order: Vec<Vec<usize>>,
    /// Equations of each order `1..=K`.
    pub equations_per_order: Vec<usize>,
    pub total_equations: usize,
    pub desired_bearing: usize,
    /// Side terms of desired-bearing equations that the user holds in cache.
    pub cached_side_terms: usize,
    /// Side terms of desired-bearing equations learned from other answers.
    pub downloaded_side_terms: usize,
}

impl DbAudit {
    /// Every message appears equally often at every order.
    pub fn is_message_symmetric(&self) -> bool {
        self.by_order.iter().all(|row| row.windows(2).all(|w| w[0] == w[1]))
    }

    /// Total appearances of message `k` across all orders.
    pub fn message_total(&self, k: u32) -> usize {
        self.by_order.iter().map(|row| row[k as usize - 1]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditTable {
    pub per_db: Vec<DbAudit>,
}

impl AuditTable {
    pub fn db(&self, db: u32) -> &DbAudit {
        &self.per_db[db as usize - 1]
    }

    pub fn total_equations(&self) -> usize {
        self.per_db.iter().map(|d| d.total_equations).sum()
    }

    pub fn is_message_symmetric(&self) -> bool {
        self.per_db.iter().all(DbAudit::is_message_symmetric)
    }

    /// All databases see the same counts.
    pub fn is_database_symmetric(&self) -> bool {
        self.per_db.windows(2).all(|w| {
            w[0].by_order == w[1].by_order
                && w[0].desired_bearing == w[1].desired_bearing
                && w[0].cached_side_terms == w[1].cached_side_terms
        })
    }
}

pub fn structural_audit(plan: &QueryPlan) -> AuditTable {
    let (k, n) = (plan.num_messages() as usize, plan.num_databases());
    let per_db = (1..=n)
        .map(|db| {
            let mut audit = DbAudit {
                database: db,
                by_order: vec![vec![0; k]; k],
                equations_per_order: vec![0; k],
                total_equations: 0,
                desired_bearing: 0,
                cached_side_terms: 0,
                downloaded_side_terms: 0,
            };
            for eq in plan.equations_for(db) {
                let t = eq.order();
                audit.total_equations += 1;
                audit.equations_per_order[t - 1] += 1;
                for b in &eq.terms {
                    audit.by_order[t - 1][b.message as usize - 1] += 1;
                }
                if eq.kind == EquationKind::DesiredBearing {
                    audit.desired_bearing += 1;
                    for b in eq.side_terms(plan.target) {
                        if plan.cache.is_cached(&b) {
                            audit.cached_side_terms += 1;
                        } else {
                            audit.downloaded_side_terms += 1;
                        }
                    }
                }
            }
            audit
        })
        .collect();
    AuditTable { per_db }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::download_count;
    use crate::plan::canonical_corner;
    use num_traits::ToPrimitive;

    #[test]
    fn k4_n2_s1_counts() {
        let audit = structural_audit(&canonical_corner(4, 2, 1, 1).unwrap());
        let db1 = audit.db(1);
        assert_eq!(db1.by_order[1], vec![3; 4]);
        assert_eq!(db1.by_order[2], vec![3; 4]);
        assert_eq!(db1.by_order[3], vec![1; 4]);
        assert_eq!((1..=4).map(|m| db1.message_total(m)).collect::<Vec<_>>(), vec![7; 4]);
        assert_eq!(db1.desired_bearing, 7);
        assert_eq!(db1.cached_side_terms, 3);
        assert_eq!(db1.downloaded_side_terms, 2 * 3 + 3);
        assert_eq!(audit.total_equations(), download_count(4, 2, 1).unwrap().to_usize().unwrap());
        assert!(audit.is_message_symmetric() && audit.is_database_symmetric());
    }

    #[test]
    fn same_for_every_target() {
        let base = structural_audit(&canonical_corner(5, 3, 2, 1).unwrap());
        for theta in 2..=5 {
            assert_eq!(structural_audit(&canonical_corner(5, 3, 2, theta).unwrap()), base);
        }
    }
}
