//! Gap analysis: worst-case gap, the large-K envelope, the ψ
//! decomposition of corner costs, and the corner-interpolation identity
//! linking `K` and `K + 1` messages.

use num_bigint::BigUint;
use num_traits::Zero;

use super::corners::{binomial, corner_points};
use super::{validate, Bounds};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest gap over `[0, 1]` and the smallest ratio attaining it.
///
/// Both bounds are linear between consecutive points of
/// `{0, 1} ∪ {r̃_i} ∪ {r_s}`, so the gap is too, and its maximum sits on one
/// of these abscissas.
pub fn worst_case_gap(n: u32, k: u32) -> Result<(Rational, Rational)> {
    let bounds = Bounds::new(k, n)?;
    let mut best: Option<(Rational, Rational)> = None;
    for r in bounds.breakpoints() {
        let g = bounds.gap(&r)?;
        if best.as_ref().is_none_or(|(bg, _)| &g > bg) {
            best = Some((g, r));
        }
    }
    Ok(best.expect("curves have breakpoints"))
}

/// `N/(N-1) (1-r)²`, the large-`K` ceiling on the achievable cost.
pub fn asymptotic_envelope(n: u32, r: &Rational) -> Result<Rational> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 databases, got {n}")));
    }
    if !r.in_unit_interval() {
        return Err(Error::RatioOutOfRange(r.to_string()));
    }
    let one_minus = Rational::one() - r;
    Ok(Rational::new(n, n - 1) * &one_minus * &one_minus)
}

/// `(ψ₁, ψ₂)` with `D̄(r_s) = ψ₁ / (ψ₂ + 1)`:
///
/// ```text
/// ψ₁ = Σ C(K,s+1+i)(N-1)^{i+1} / Σ C(K-1,s+i)(N-1)^{i+1}
/// ψ₂ = C(K-2,s-1)              / Σ C(K-1,s+i)(N-1)^{i+1}
/// ```
pub fn psi_decomposition(n: u32, k: u32, s: u32) -> Result<(Rational, Rational)> {
    validate(k, n)?;
    if s == 0 || s >= k {
        return Err(Error::InvalidCorner { s, k, max: k - 1 });
    }
    let w = BigUint::from(n - 1);
    let (mut num, mut den) = (BigUint::zero(), BigUint::zero());
    for i in 0..(k - s) {
        let p = w.pow(i + 1);
        num += binomial(k as u64, (s + 1 + i) as i64) * &p;
        den += binomial(k as u64 - 1, (s + i) as i64) * &p;
    }
    let cached = binomial(k as u64 - 2, s as i64 - 1);
    Ok((Rational::new(num, den.clone()), Rational::new(cached, den)))
}

/// The weight `α` placing corner `s` of the `(K+1)`-message curve on the
/// segment between corners `s-1` and `s` of the `K`-message curve:
/// `r_s^{(K+1)} = α r_{s-1}^{(K)} + (1-α) r_s^{(K)}`.
///
/// Checks that `α ∈ [0, 1]` and that the costs interpolate with the same
/// weight. `1 ≤ s ≤ K`; corner 0 is the classical point and corner `K` of
/// the `K`-message curve is `(1, 0)`.
pub fn monotonicity_witness(n: u32, k: u32, s: u32) -> Result<Rational> {
    validate(k, n)?;
    if s == 0 || s > k {
        return Err(Error::InvalidCorner { s, k, max: k });
    }
    let small = corner_points(k, n)?;
    let large = corner_points(k + 1, n)?;
    let (lo, hi, target) = (&small[s as usize - 1], &small[s as usize], &large[s as usize]);
    let alpha = (&target.ratio - &hi.ratio) / (&lo.ratio - &hi.ratio);
    if !alpha.in_unit_interval() {
        return Err(Error::WitnessOutOfRange(alpha.to_string()));
    }
    let mixed = &alpha * &lo.cost + (Rational::one() - &alpha) * &hi.cost;
    if mixed != target.cost {
        return Err(Error::WitnessIdentity(alpha.to_string()));
    }
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{corner_cost, corner_ratio, inner_cost};
    use crate::rational::ratio;

    #[test]
    fn three_messages_have_no_gap() {
        for n in 2..7 {
            let (g, r) = worst_case_gap(n, 3).unwrap();
            assert!(g.is_zero());
            assert_eq!(r, ratio(0, 1));
        }
    }

    #[test]
    fn small_k_worst_gaps() {
        // Frozen from exact evaluation over the candidate abscissas.
        assert_eq!(worst_case_gap(2, 4).unwrap(), (ratio(1, 20), ratio(1, 4)));
        assert_eq!(worst_case_gap(2, 5).unwrap(), (ratio(1, 18), ratio(1, 4)));
        assert_eq!(worst_case_gap(2, 7).unwrap(), (ratio(11, 144), ratio(1, 8)));
    }

    #[test]
    fn hundred_messages_at_one_eighth() {
        let (g, r) = worst_case_gap(2, 100).unwrap();
        assert_eq!(r, ratio(1, 8));
        assert!(g <= ratio(5, 32));
        let expected: Rational =
            "5092723085205709399815183401/34596937560232057238849407912".parse().unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn inner_at_one_over_128() {
        for k in 9..20 {
            assert_eq!(inner_cost(k, 2, &ratio(1, 128)).unwrap(), ratio(247, 128));
        }
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(asymptotic_envelope(2, &ratio(1, 8)).unwrap(), ratio(49, 32));
        assert_eq!(asymptotic_envelope(5, &ratio(1, 1)).unwrap(), ratio(0, 1));
        assert_eq!(asymptotic_envelope(2, &ratio(0, 1)).unwrap(), ratio(2, 1));
        assert!(asymptotic_envelope(1, &ratio(0, 1)).is_err());
        assert!(asymptotic_envelope(2, &ratio(2, 1)).is_err());
    }

    #[test]
    fn psi_examples() {
        let (p1, p2) = psi_decomposition(2, 3, 1).unwrap();
        assert_eq!(&p1 / (&p2 + Rational::one()), ratio(1, 1));
        let (p1, p2) = psi_decomposition(2, 4, 2).unwrap();
        assert_eq!(&p1 / (&p2 + Rational::one()), ratio(5, 6));
        for k in 2..12u32 {
            for s in 1..k {
                let (p1, _) = psi_decomposition(3, k, s).unwrap();
                assert!(p1 <= Rational::new(k, s));
            }
        }
        assert!(psi_decomposition(2, 3, 0).is_err());
        assert!(psi_decomposition(2, 3, 3).is_err());
    }

    #[test]
    fn witness_examples() {
        // (r_1^{(5)}, D̄) lies on the K=4 segment from the classical point.
        let alpha = monotonicity_witness(2, 4, 1).unwrap();
        let r5 = corner_ratio(5, 2, 1).unwrap();
        assert_eq!(&alpha * Rational::zero() + (Rational::one() - &alpha) * corner_ratio(4, 2, 1).unwrap(), r5);
        let alpha = monotonicity_witness(2, 4, 2).unwrap();
        assert!(alpha.in_unit_interval());
        let mixed = &alpha * corner_cost(4, 2, 1).unwrap() + (Rational::one() - &alpha) * corner_cost(4, 2, 2).unwrap();
        assert_eq!(mixed, corner_cost(5, 2, 2).unwrap());
        // Top corner: r_K^{(K+1)} = 1/N = r_{K-1}^{(K)}, so α = 1.
        assert_eq!(monotonicity_witness(3, 6, 6).unwrap(), ratio(1, 1));
        assert!(monotonicity_witness(2, 4, 0).is_err());
        assert!(monotonicity_witness(2, 4, 5).is_err());
    }
}
