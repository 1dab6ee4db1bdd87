//! Exact achievable (outer) and converse (inner) download-cost bounds.
//!
//! Everything here is a pure function of `(K, N, r)` computed in exact
//! rational arithmetic.

mod analysis;
mod corners;
mod curve;

pub use analysis::{asymptotic_envelope, monotonicity_witness, psi_decomposition, worst_case_gap};
pub use corners::{
    binomial, classical_cost, classical_download_count, classical_message_length, corner_cost, corner_point,
    corner_points, corner_ratio, corner_ratios_with_endpoints, download_count, geometric_sum, message_length,
    CornerPoint,
};
pub use curve::PiecewiseLinearCurve;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// `K ≥ 2`, `N ≥ 2`.
pub fn validate(num_messages: u32, num_databases: u32) -> Result<()> {
    if num_messages < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 messages, got {num_messages}")));
    }
    if num_databases < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 databases, got {num_databases}")));
    }
    Ok(())
}

fn check_ratio(r: &Rational) -> Result<()> {
    if r.in_unit_interval() {
        Ok(())
    } else {
        Err(Error::RatioOutOfRange(r.to_string()))
    }
}

/// Achievable curve through the classical point, every corner `r_s`, and
/// `(1, 0)`; memory sharing between neighbours gives the segments.
pub fn outer_curve(k: u32, n: u32) -> Result<PiecewiseLinearCurve> {
    let points = corner_points(k, n)?.into_iter().map(|p| (p.ratio, p.cost)).collect();
    PiecewiseLinearCurve::new(points)
}

/// `max_{m=1..K} Σ_{j<m} N^{-j} - m r`.
///
/// Line `m` corresponds to index `i = K + 2 - m` in the usual statement.
pub fn inner_cost(k: u32, n: u32, r: &Rational) -> Result<Rational> {
    validate(k, n)?;
    check_ratio(r)?;
    Ok((1..=k).map(|m| inner_line(n, m, r)).max().expect("K ≥ 2"))
}

/// The `m`-term line `Σ_{j<m} N^{-j} - m r`.
fn inner_line(n: u32, m: u32, r: &Rational) -> Rational {
    geometric_sum(n, m) - Rational::from(m as u64) * r
}

/// Converse line `i ∈ {2, …, K+1}` in its unsimplified form
/// `(1-r) Σ_{j=0}^{K+1-i} N^{-j} - r (1 - 1/N) Σ_{j=0}^{K-i} (K+1-i-j) N^{-j}`.
pub fn inner_line_expanded(k: u32, n: u32, i: u32, r: &Rational) -> Result<Rational> {
    validate(k, n)?;
    if !(2..=k + 1).contains(&i) {
        return Err(Error::InvalidParams(format!("converse line index {i} outside 2..={}", k + 1)));
    }
    let inv_n = Rational::from(n as u64).recip();
    let one = Rational::one();
    let head = (&one - r) * geometric_sum(n, k + 2 - i);
    // Empty for i = K + 1.
    let tail: Rational = (0..(k + 1 - i)).map(|j| Rational::from((k + 1 - i - j) as u64) * inv_n.pow(j as i32)).sum();
    Ok(head - r * (&one - &inv_n) * tail)
}

/// `r̃_i = N^{-(K-i)}` for `1 ≤ i ≤ K-1`: where converse lines `i` and
/// `i+1` cross.
pub fn inner_corner(k: u32, n: u32, i: u32) -> Result<Rational> {
    validate(k, n)?;
    if i == 0 || i >= k {
        return Err(Error::InvalidParams(format!("inner corner {i} outside 1..={}", k - 1)));
    }
    Ok(Rational::from(n as u64).pow(-((k - i) as i32)))
}

/// Converse bound as a curve with breakpoints `0, r̃_1, …, r̃_{K-1}, 1`.
pub fn inner_curve(k: u32, n: u32) -> Result<PiecewiseLinearCurve> {
    validate(k, n)?;
    let mut xs = vec![Rational::zero()];
    for i in 1..k {
        xs.push(inner_corner(k, n, i)?);
    }
    xs.push(Rational::one());
    let points = xs
        .into_iter()
        .map(|x| {
            let y = inner_cost(k, n, &x)?;
            Ok((x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseLinearCurve::new(points)
}

/// Outer minus inner at `r`; never negative.
pub fn gap(k: u32, n: u32, r: &Rational) -> Result<Rational> {
    let outer = outer_curve(k, n)?.eval(r)?;
    Ok(outer - inner_cost(k, n, r)?)
}

/// Baseline where every database knows the full cache: `(1-r) Σ_{j<K} N^{-j}`.
pub fn fully_known_cost(k: u32, n: u32, r: &Rational) -> Result<Rational> {
    validate(k, n)?;
    check_ratio(r)?;
    Ok((Rational::one() - r) * classical_cost(k, n))
}

/// Ratios bounding the regimes where outer and inner provably coincide:
/// `r ≤ N^{-(K-1)}` and `r ≥ (K-2)/(N² - 3N + KN)`.
pub fn exact_regimes(k: u32, n: u32) -> Result<(Rational, Rational)> {
    validate(k, n)?;
    let nn = n as i64;
    let low = Rational::from(n as u64).pow(-(k as i32 - 1));
    let high = Rational::new(k as i64 - 2, nn * nn - 3 * nn + k as i64 * nn);
    Ok((low, high))
}

/// Both bounds for one `(K, N)`, built once for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub num_messages: u32,
    pub num_databases: u32,
    pub outer: PiecewiseLinearCurve,
    pub inner: PiecewiseLinearCurve,
}

impl Bounds {
    pub fn new(k: u32, n: u32) -> Result<Self> {
        Ok(Bounds { num_messages: k, num_databases: n, outer: outer_curve(k, n)?, inner: inner_curve(k, n)? })
    }

    pub fn outer(&self, r: &Rational) -> Result<Rational> {
        self.outer.eval(r)
    }

    pub fn inner(&self, r: &Rational) -> Result<Rational> {
        self.inner.eval(r)
    }

    pub fn gap(&self, r: &Rational) -> Result<Rational> {
        Ok(self.outer(r)? - self.inner(r)?)
    }

    pub fn fully_known(&self, r: &Rational) -> Result<Rational> {
        fully_known_cost(self.num_messages, self.num_databases, r)
    }

    /// Union of both curves' breakpoints, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut xs: Vec<Rational> = self.outer.abscissas().chain(self.inner.abscissas()).cloned().collect();
        xs.sort();
        xs.dedup();
        xs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn outer_curve_examples() {
        let c = outer_curve(3, 2).unwrap();
        assert_eq!(c.eval(&ratio(1, 3)).unwrap(), ratio(5, 6));
        for k in 2..8 {
            for n in 2..5 {
                let c = outer_curve(k, n).unwrap();
                assert_eq!(c.eval(&ratio(0, 1)).unwrap(), classical_cost(k, n));
                assert_eq!(c.eval(&ratio(1, 1)).unwrap(), ratio(0, 1));
            }
        }
    }

    #[test]
    fn inner_cost_examples() {
        assert_eq!(inner_cost(3, 2, &ratio(1, 4)).unwrap(), ratio(1, 1));
        assert_eq!(inner_cost(4, 2, &ratio(1, 8)).unwrap(), ratio(11, 8));
        assert_eq!(inner_cost(4, 2, &ratio(0, 1)).unwrap(), ratio(15, 8));
        assert_eq!(inner_cost(5, 3, &ratio(1, 1)).unwrap(), ratio(0, 1));
        assert!(inner_cost(4, 2, &ratio(3, 2)).is_err());
    }

    #[test]
    fn inner_corner_examples() {
        assert_eq!(inner_corner(4, 2, 1).unwrap(), ratio(1, 8));
        assert_eq!(inner_corner(4, 2, 3).unwrap(), ratio(1, 2));
        assert_eq!(inner_corner(3, 2, 2).unwrap(), ratio(1, 2));
        assert!(inner_corner(3, 2, 0).is_err());
        assert!(inner_corner(3, 2, 3).is_err());
    }

    #[test]
    fn expanded_and_simplified_lines_agree() {
        for k in 2..9 {
            for n in 2..5 {
                for i in 2..=k + 1 {
                    for r in [ratio(0, 1), ratio(1, 7), ratio(1, 2), ratio(5, 9), ratio(1, 1)] {
                        let simplified = inner_line(n, k + 2 - i, &r);
                        assert_eq!(inner_line_expanded(k, n, i, &r).unwrap(), simplified, "K={k} N={n} i={i} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn inner_curve_matches_max_of_lines() {
        for k in 2..9 {
            for n in 2..5 {
                let curve = inner_curve(k, n).unwrap();
                for j in 0..=120 {
                    let r = ratio(j, 120);
                    assert_eq!(curve.eval(&r).unwrap(), inner_cost(k, n, &r).unwrap());
                }
            }
        }
    }

    #[test]
    fn gap_examples() {
        for j in 0..=48 {
            assert!(gap(3, 2, &ratio(j, 48)).unwrap().is_zero());
        }
        assert!(gap(4, 2, &ratio(1, 8)).unwrap().is_zero());
        // Between r_1 = 1/8 and r_2 = 1/3 the bounds separate.
        let g = gap(4, 2, &ratio(1, 5)).unwrap();
        assert!(g > Rational::zero());
        assert_eq!(g, ratio(3, 100));
        assert_eq!(gap(4, 2, &ratio(1, 4)).unwrap(), ratio(1, 20));
    }

    #[test]
    fn fully_known_examples() {
        assert_eq!(fully_known_cost(12, 2, &ratio(0, 1)).unwrap(), classical_cost(12, 2));
        assert_eq!(fully_known_cost(4, 3, &ratio(1, 1)).unwrap(), ratio(0, 1));
        let outer = outer_curve(12, 2).unwrap();
        for j in 0..=64 {
            let r = ratio(j, 64);
            assert!(fully_known_cost(12, 2, &r).unwrap() >= outer.eval(&r).unwrap());
        }
    }

    #[test]
    fn regime_thresholds_are_corners() {
        for k in 3..10 {
            for n in 2..6 {
                let (low, high) = exact_regimes(k, n).unwrap();
                assert_eq!(low, corner_ratio(k, n, 1).unwrap());
                assert_eq!(high, corner_ratio(k, n, k - 2).unwrap());
            }
        }
    }
}
