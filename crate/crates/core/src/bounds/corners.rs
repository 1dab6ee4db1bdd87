//! Corner points of the achievable curve.
//!
//! Corner `s` (1 ≤ s ≤ K-1) mixes `s` cached undesired bits into each
//! first-round side-information sum. With
//!
//! ```text
//! c      = C(K-2, s-1)
//! S(s)   = Σ_{i=0}^{K-1-s} C(K-1, s+i) (N-1)^{i+1}
//! T(s)   = Σ_{i=0}^{K-1-s} C(K,   s+1+i) (N-1)^{i+1}
//! ```
//!
//! the scheme uses `L(s) = N (c + S)` bits per message, caches `N c` of
//! them, downloads `D = N T` bits, so `r_s = c / (c + S)` and
//! `D̄(r_s) = T / (c + S)`.
//!
//! Corner 0 is the classical point (r = 0, cost Σ_{j<K} N^{-j}) and corner
//! K the full-cache endpoint (r = 1, cost 0).

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::validate;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// C(n, k) as an exact big integer; zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Σ_{j=0}^{terms-1} N^{-j}.
pub fn geometric_sum(num_databases: u32, terms: u32) -> Rational {
    let n = BigUint::from(num_databases);
    let denom = n.pow(terms.saturating_sub(1));
    // (N^terms - 1) / ((N - 1) N^{terms-1})
    let numer = (n.pow(terms) - 1u32) / (&n - 1u32);
    Rational::new(numer, denom)
}

/// Classical (no cache) normalized download cost Σ_{j=0}^{K-1} N^{-j}.
pub fn classical_cost(num_messages: u32, num_databases: u32) -> Rational {
    geometric_sum(num_databases, num_messages)
}

fn check_corner(k: u32, n: u32, s: u32) -> Result<()> {
    validate(k, n)?;
    if s >= k {
        return Err(Error::InvalidCorner { s, k, max: k - 1 });
    }
    Ok(())
}

fn check_nondegenerate(k: u32, n: u32, s: u32) -> Result<()> {
    check_corner(k, n, s)?;
    if s == 0 {
        return Err(Error::InvalidCorner { s, k, max: k - 1 });
    }
    Ok(())
}

/// The three sums defining corner `s`, computed straight from the
/// definitions.
struct CornerSums {
    cached: BigUint,
    side: BigUint,
    download: BigUint,
}

fn corner_sums(k: u32, n: u32, s: u32) -> CornerSums {
    let (k64, s64) = (k as u64, s as i64);
    let base = BigUint::from(n - 1);
    let mut side = BigUint::zero();
    let mut download = BigUint::zero();
    for i in 0..(k - s) {
        let w = base.pow(i + 1);
        side += binomial(k64 - 1, s64 + i as i64) * &w;
        download += binomial(k64, s64 + 1 + i as i64) * &w;
    }
    CornerSums { cached: binomial(k64 - 2, s64 - 1), side, download }
}

/// `r_s`. Corner 0 returns 0.
pub fn corner_ratio(k: u32, n: u32, s: u32) -> Result<Rational> {
    check_corner(k, n, s)?;
    if s == 0 {
        return Ok(Rational::zero());
    }
    let sums = corner_sums(k, n, s);
    Ok(Rational::new(sums.cached.clone(), sums.cached + sums.side))
}

/// `D̄(r_s)`. Corner 0 returns the classical cost.
pub fn corner_cost(k: u32, n: u32, s: u32) -> Result<Rational> {
    check_corner(k, n, s)?;
    if s == 0 {
        return Ok(classical_cost(k, n));
    }
    let sums = corner_sums(k, n, s);
    Ok(Rational::new(sums.download, sums.cached + sums.side))
}

/// `L(s) = N C(K-2,s-1) + N Σ C(K-1,s+i)(N-1)^{i+1}`.
pub fn message_length(k: u32, n: u32, s: u32) -> Result<BigUint> {
    check_nondegenerate(k, n, s)?;
    let sums = corner_sums(k, n, s);
    Ok((sums.cached + sums.side) * n)
}

/// `D(r_s) = N Σ C(K,s+1+i)(N-1)^{i+1}`.
pub fn download_count(k: u32, n: u32, s: u32) -> Result<BigUint> {
    check_nondegenerate(k, n, s)?;
    Ok(corner_sums(k, n, s).download * n)
}

/// Message length of the classical scheme, `N^K`.
pub fn classical_message_length(k: u32, n: u32) -> BigUint {
    BigUint::from(n).pow(k)
}

/// Downloads of the classical scheme, `N (N^K - 1)/(N - 1)`.
pub fn classical_download_count(k: u32, n: u32) -> BigUint {
    let nb = BigUint::from(n);
    (nb.pow(k) - 1u32) / (&nb - 1u32) * &nb
}

/// One corner of the achievable curve, including its sizing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerPoint {
    pub s: u32,
    pub ratio: Rational,
    pub cost: Rational,
    pub message_length: BigUint,
    pub download_count: BigUint,
}

impl CornerPoint {
    /// `download_count / message_length`.
    pub fn cost_from_counts(&self) -> Rational {
        Rational::new(self.download_count.clone(), self.message_length.clone())
    }
}

/// Corner `s` for `0 ≤ s ≤ K`, with 0 the classical point and `K` the
/// full-cache endpoint (length `N`, nothing downloaded).
pub fn corner_point(k: u32, n: u32, s: u32) -> Result<CornerPoint> {
    validate(k, n)?;
    if s > k {
        return Err(Error::InvalidCorner { s, k, max: k });
    }
    if s == k {
        return Ok(CornerPoint {
            s,
            ratio: Rational::one(),
            cost: Rational::zero(),
            message_length: BigUint::from(n),
            download_count: BigUint::zero(),
        });
    }
    if s == 0 {
        return Ok(CornerPoint {
            s,
            ratio: Rational::zero(),
            cost: classical_cost(k, n),
            message_length: classical_message_length(k, n),
            download_count: classical_download_count(k, n),
        });
    }
    let sums = corner_sums(k, n, s);
    let half = &sums.cached + &sums.side;
    Ok(CornerPoint {
        s,
        ratio: Rational::new(sums.cached.clone(), half.clone()),
        cost: Rational::new(sums.download.clone(), half.clone()),
        message_length: half * n,
        download_count: sums.download * n,
    })
}

/// All corners `0..=K` in one pass.
///
/// Uses the suffix recurrences `A_s = C(K-1,s) + (N-1) A_{s+1}` and
/// `B_s = C(K,s+1) + (N-1) B_{s+1}`, so that `S(s) = (N-1) A_s` and
/// `T(s) = (N-1) B_s`; this keeps large-`K` sweeps linear in `K`.
pub fn corner_points(k: u32, n: u32) -> Result<Vec<CornerPoint>> {
    validate(k, n)?;
    let kk = k as usize;
    let row_km1: Vec<BigUint> = binomial_row(k as u64 - 1);
    let row_k: Vec<BigUint> = binomial_row(k as u64);
    let row_km2: Vec<BigUint> = binomial_row(k as u64 - 2);
    let w = BigUint::from(n - 1);

    let mut a = vec![BigUint::zero(); kk + 1];
    let mut b = vec![BigUint::zero(); kk + 1];
    for s in (1..kk).rev() {
        a[s] = &row_km1[s] + &w * &a[s + 1];
        b[s] = &row_k[s + 1] + &w * &b[s + 1];
    }

    let mut out = Vec::with_capacity(kk + 1);
    out.push(corner_point(k, n, 0)?);
    for s in 1..kk {
        let cached = row_km2[s - 1].clone();
        let side = &w * &a[s];
        let download = &w * &b[s];
        let half = &cached + &side;
        out.push(CornerPoint {
            s: s as u32,
            ratio: Rational::new(cached, half.clone()),
            cost: Rational::new(download.clone(), half.clone()),
            message_length: half * n,
            download_count: download * n,
        });
    }
    out.push(corner_point(k, n, k)?);
    Ok(out)
}

fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut cur = BigUint::one();
    row.push(cur.clone());
    for i in 0..n {
        cur = cur * (n - i) / (i + 1);
        row.push(cur.clone());
    }
    row
}

/// `[0, r_1, …, r_{K-1}, 1]`.
pub fn corner_ratios_with_endpoints(k: u32, n: u32) -> Vec<Rational> {
    corner_points(k, n).map(|c| c.into_iter().map(|p| p.ratio).collect()).unwrap_or_default()
}
