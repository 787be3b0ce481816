//! The one-dimensional local uncentered maximal function
//!
//! `M_R f(x) = sup { (1/(b−a)) ∫_a^b |f| : a ≤ x ≤ b, 0 < b − a ≤ R }`
//!
//! evaluated exactly for step functions, profiled adaptively, and checked
//! against the quantitative 1D inequalities.

pub(crate) mod engine;
mod checks;
mod level;
mod profile;

pub use checks::{
    check_bd_bound, check_convergence, check_counterexample, check_poincare, check_weak_type,
    counterexample_bound, dyadic_counterexample, growth_table_1d, CheckError, GrowthRow1d,
};
pub use level::{unrestricted_distribution, unrestricted_rearrangement};
pub use profile::{maximal_profile, maximal_profile_with, max_depth_from_env, ProfileError, ProfileOptions, SampledProfile};

use crate::rat::Rat;
use crate::step::{Interval, StepFn};
use engine::{Candidate, Prepared64, PreparedRat};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Upper bound on interval length; `Infinite` gives the unrestricted operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Radius {
    Finite(Rat),
    Infinite,
}

impl Radius {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Radius::Finite(r) => Some(r),
            Radius::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Radius::Finite(r) => r.to_f64(),
            Radius::Infinite => f64::INFINITY,
        }
    }

    /// `max(0, ln R)`; infinite for `R = ∞`.
    pub fn log_plus(&self) -> f64 {
        self.to_f64().ln().max(0.0)
    }
}

impl From<Rat> for Radius {
    fn from(r: Rat) -> Radius {
        Radius::Finite(r)
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Radius {
    type Err = crate::rat::ParseRatError;

    fn from_str(s: &str) -> Result<Radius, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" | "Inf" => Ok(Radius::Infinite),
            other => other.parse().map(Radius::Finite),
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Radius, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaximalError {
    #[error("point {0} lies outside the domain")]
    OutsideDomain(Rat),
    #[error("radius must be positive, got {0}")]
    NonPositiveR(Rat),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxQueryResult {
    pub value: Rat,
    pub witness: Interval,
    /// Set when only the shrinking-interval limit attains the value.
    pub degenerate: bool,
}

/// A step function prepared for repeated maximal-function queries.
#[derive(Debug, Clone)]
pub struct MaximalOperator {
    f: StepFn,
    exact: PreparedRat,
    float: Prepared64,
}

impl MaximalOperator {
    pub fn new(f: &StepFn) -> MaximalOperator {
        let exact = PreparedRat::new(f.edges().cloned().collect(), f.values().to_vec());
        let float = exact.to_f64();
        MaximalOperator { f: f.clone(), exact, float }
    }

    pub fn function(&self) -> &StepFn {
        &self.f
    }

    pub fn eval(&self, x: &Rat, radius: &Radius) -> Result<MaxQueryResult, MaximalError> {
        self.eval_with(x, radius, &mut Vec::new())
    }

    pub(crate) fn eval_with(
        &self,
        x: &Rat,
        radius: &Radius,
        buf: &mut Vec<Candidate>,
    ) -> Result<MaxQueryResult, MaximalError> {
        if !self.f.domain().contains(x) {
            return Err(MaximalError::OutsideDomain(x.clone()));
        }
        if let Radius::Finite(r) = radius {
            if !r.is_positive() {
                return Err(MaximalError::NonPositiveR(r.clone()));
            }
        }
        let r = radius.finite();
        let xf = x.to_f64();
        self.float.candidates(xf, radius.to_f64(), buf);

        // Screening: anything whose upper error bar reaches the best certified
        // lower value has to be decided exactly.
        let point = self.exact.point_value(x);
        let mut floor = point.to_f64() * (1.0 - 4.0 * f64::EPSILON);
        for c in buf.iter() {
            if c.err.is_finite() {
                floor = floor.max(c.value - c.err);
            }
        }

        let mut best: Option<(Rat, Rat, Rat)> = None;
        for c in buf.iter().filter(|c| c.value + c.err >= floor) {
            let Some((v, a, b)) = self.exact.evaluate(c.a, c.b, x, r) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((bv, ba, bb)) => match v.cmp(bv) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        let (len, blen) = (&b - &a, bb - ba);
                        len < blen || (len == blen && &a < ba)
                    }
                },
            };
            if better {
                best = Some((v, a, b));
            }
        }
        match best {
            Some((v, a, b)) if v >= point => Ok(MaxQueryResult {
                value: v,
                witness: Interval::new(a, b).expect("positive length"),
                degenerate: false,
            }),
            _ => Ok(self.degenerate_result(x, point, r)),
        }
    }

    /// Witness for the shrinking-interval limit: the side piece carrying the
    /// larger value, clipped to the radius.
    fn degenerate_result(&self, x: &Rat, point: Rat, r: Option<&Rat>) -> MaxQueryResult {
        let edges: Vec<&Rat> = self.f.edges().collect();
        let k = self.f.piece_index(x);
        let right = (x.clone(), edges[k + 1].clone());
        let left = if k > 0 && edges[k] == x { Some((edges[k - 1].clone(), x.clone())) } else { None };
        let (mut a, mut b) = match left {
            Some(l) if self.f.values()[k - 1].abs() == point => l,
            _ if &right.1 > x => right,
            _ => (edges[k].clone(), x.clone()),
        };
        if let Some(r) = r {
            if &(&b - &a) > r {
                if &a == x {
                    b = x + r;
                } else {
                    a = x - r;
                }
            }
        }
        MaxQueryResult {
            value: point,
            witness: Interval::new(a, b).expect("positive length"),
            degenerate: true,
        }
    }
}

/// Exact `M_R f(x)` with a witness interval.
pub fn maximal_eval(f: &StepFn, x: &Rat, radius: &Radius) -> Result<MaxQueryResult, MaximalError> {
    MaximalOperator::new(f).eval(x, radius)
}
