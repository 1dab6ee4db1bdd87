use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Piecewise-linear function on `[0, 1]` given by its breakpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseLinearCurve {
    points: Vec<(Rational, Rational)>,
}

impl PiecewiseLinearCurve {
    /// Abscissas must be strictly increasing, start at 0 and end at 1.
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParams("curve needs at least two points".into()));
        }
        if !points[0].0.is_zero() || points[points.len() - 1].0 != Rational::one() {
            return Err(Error::InvalidParams("curve must span [0, 1]".into()));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParams("curve abscissas must strictly increase".into()));
        }
        Ok(PiecewiseLinearCurve { points })
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn abscissas(&self) -> impl Iterator<Item = &Rational> {
        self.points.iter().map(|(r, _)| r)
    }

    /// Exact linear interpolation on the enclosing segment. At a breakpoint
    /// the breakpoint value is returned.
    pub fn eval(&self, r: &Rational) -> Result<Rational> {
        if !r.in_unit_interval() {
            return Err(Error::RatioOutOfRange(r.to_string()));
        }
        let idx = self.points.partition_point(|(x, _)| x < r);
        let (x1, y1) = &self.points[idx];
        if x1 == r {
            return Ok(y1.clone());
        }
        let (x0, y0) = &self.points[idx - 1];
        Ok(y0 + (y1 - y0) * (r - x0) / (x1 - x0))
    }

    /// Slope of each segment, left to right.
    pub fn slopes(&self) -> Vec<Rational> {
        self.points.windows(2).map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)).collect()
    }

    /// Segment slopes are nondecreasing.
    pub fn is_convex(&self) -> bool {
        self.slopes().windows(2).all(|w| w[0] <= w[1])
    }
}
