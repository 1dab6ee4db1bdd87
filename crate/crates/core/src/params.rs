//! Protocol instance parameters.

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// One protocol instance: `K` messages replicated on `N` databases, driven
/// either by a corner index or by a target caching ratio.
///
/// Exactly one of `corner_index` / `caching_ratio` is set by the
/// constructors; [`PirParams::resolve`] fills in the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PirParams {
    pub num_messages: u32,
    pub num_databases: u32,
    pub corner_index: Option<u32>,
    pub caching_ratio: Option<Rational>,
}

/// How a resolved instance is realized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    /// r = 0: no cache, classical replicated-database retrieval.
    Classical,
    /// One of the K-1 non-degenerate corners.
    Corner { s: u32 },
    /// r = 1: everything cached, nothing downloaded.
    FullCache,
    /// Memory sharing between corner `lower` and corner `lower + 1`, where
    /// index 0 is the classical point and index K the full cache.
    MemoryShare { lower: u32, alpha: Rational },
}

impl PirParams {
    pub fn with_corner(num_messages: u32, num_databases: u32, s: u32) -> Result<Self> {
        bounds::validate(num_messages, num_databases)?;
        if s >= num_messages {
            return Err(Error::InvalidCorner { s, k: num_messages, max: num_messages - 1 });
        }
        Ok(PirParams { num_messages, num_databases, corner_index: Some(s), caching_ratio: None })
    }

    pub fn with_ratio(num_messages: u32, num_databases: u32, r: Rational) -> Result<Self> {
        bounds::validate(num_messages, num_databases)?;
        if !r.in_unit_interval() {
            return Err(Error::RatioOutOfRange(r.to_string()));
        }
        Ok(PirParams { num_messages, num_databases, corner_index: None, caching_ratio: Some(r) })
    }

    /// Records both the corner index (when the ratio is a corner) and the
    /// caching ratio, and returns the realizing scheme.
    pub fn resolve(&self) -> Result<(PirParams, Scheme)> {
        let (k, n) = (self.num_messages, self.num_databases);
        bounds::validate(k, n)?;
        match (&self.corner_index, &self.caching_ratio) {
            (Some(s), None) => {
                let r = bounds::corner_ratio(k, n, *s)?;
                let scheme = if *s == 0 { Scheme::Classical } else { Scheme::Corner { s: *s } };
                Ok((PirParams { caching_ratio: Some(r), ..self.clone() }, scheme))
            }
            (None, Some(r)) => {
                if !r.in_unit_interval() {
                    return Err(Error::RatioOutOfRange(r.to_string()));
                }
                let ratios = bounds::corner_ratios_with_endpoints(k, n);
                if let Some(s) = ratios.iter().position(|x| x == r) {
                    let s = s as u32;
                    let scheme = match s {
                        0 => Scheme::Classical,
                        s if s == k => Scheme::FullCache,
                        s => Scheme::Corner { s },
                    };
                    let corner_index = if s < k { Some(s) } else { None };
                    return Ok((PirParams { corner_index, ..self.clone() }, scheme));
                }
                let lower = ratios.windows(2).position(|w| &w[0] < r && r < &w[1]).expect("r inside [0,1]");
                let (lo, hi) = (&ratios[lower], &ratios[lower + 1]);
                let alpha = (hi - r) / (hi - lo);
                Ok((self.clone(), Scheme::MemoryShare { lower: lower as u32, alpha }))
            }
            _ => Err(Error::InvalidParams(
                "exactly one of corner index and caching ratio must be given".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn resolve_corner_records_ratio() {
        let (p, scheme) = PirParams::with_corner(3, 2, 1).unwrap().resolve().unwrap();
        assert_eq!(p.caching_ratio, Some(ratio(1, 4)));
        assert_eq!(scheme, Scheme::Corner { s: 1 });
    }

    #[test]
    fn resolve_ratio_at_corner_records_index() {
        let (p, scheme) = PirParams::with_ratio(4, 2, ratio(1, 3)).unwrap().resolve().unwrap();
        assert_eq!(p.corner_index, Some(2));
        assert_eq!(scheme, Scheme::Corner { s: 2 });
        let (_, scheme) = PirParams::with_ratio(4, 2, ratio(0, 1)).unwrap().resolve().unwrap();
        assert_eq!(scheme, Scheme::Classical);
        let (p, scheme) = PirParams::with_ratio(4, 2, ratio(1, 1)).unwrap().resolve().unwrap();
        assert_eq!(scheme, Scheme::FullCache);
        assert_eq!(p.corner_index, None);
    }

    #[test]
    fn resolve_between_corners_gives_alpha() {
        let (_, scheme) = PirParams::with_ratio(3, 2, ratio(1, 3)).unwrap().resolve().unwrap();
        assert_eq!(scheme, Scheme::MemoryShare { lower: 1, alpha: ratio(2, 3) });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PirParams::with_corner(1, 2, 0).is_err());
        assert!(PirParams::with_corner(3, 1, 0).is_err());
        assert!(PirParams::with_corner(3, 2, 3).is_err());
        assert!(PirParams::with_ratio(3, 2, ratio(5, 4)).is_err());
        assert!(PirParams::with_ratio(3, 2, ratio(-1, 4)).is_err());
        let both = PirParams { num_messages: 3, num_databases: 2, corner_index: Some(1), caching_ratio: Some(ratio(1, 4)) };
        assert!(both.resolve().is_err());
    }
}
