//! Piecewise-constant functions with exact rational breakpoints and values.
//!
//! Values live on the open pieces between consecutive breakpoints. The value
//! at a breakpoint is never stored; [`StepFn::canonical_at`] derives it as the
//! larger of the two adjacent piece values, so modifying a function on a null
//! set can never change anything computed here.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("interval endpoints must satisfy lo < hi (got [{lo}, {hi}])")]
    InvalidInterval { lo: Rat, hi: Rat },
    #[error("breakpoints must be strictly increasing ({prev} is followed by {next})")]
    NonMonotoneBreakpoints { prev: Rat, next: Rat },
    #[error("{breakpoints} breakpoints need {} values, got {values}", breakpoints + 1)]
    CountMismatch { breakpoints: usize, values: usize },
    #[error("breakpoint {0} is not strictly inside the domain")]
    BreakpointOutsideDomain(Rat),
    #[error("window [{lo}, {hi}] is not contained in the domain")]
    WindowOutsideDomain { lo: Rat, hi: Rat },
    #[error("point {0} lies outside the domain")]
    OutsideDomain(Rat),
    #[error("exponent must be at least 1 (got {0})")]
    InvalidExponent(Rat),
    #[error("the function vanishes identically")]
    ZeroFunction,
    #[error("operands live on different domains")]
    DomainMismatch,
}

/// A bounded interval with `lo < hi`. Whether it is open or closed never
/// matters for anything computed on it.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[Rat; 2]", into = "[Rat; 2]")]
pub struct Interval {
    lo: Rat,
    hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Result<Interval, StepError> {
        if lo < hi {
            Ok(Interval { lo, hi })
        } else {
            Err(StepError::InvalidInterval { lo, hi })
        }
    }

    /// Convenience constructor for integer endpoints; panics on `lo >= hi`.
    pub fn int(lo: i64, hi: i64) -> Interval {
        Interval::new(Rat::from_int(lo), Rat::from_int(hi)).expect("lo < hi")
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn length(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl TryFrom<[Rat; 2]> for Interval {
    type Error = StepError;
    fn try_from([lo, hi]: [Rat; 2]) -> Result<Interval, StepError> {
        Interval::new(lo, hi)
    }
}

impl From<Interval> for [Rat; 2] {
    fn from(i: Interval) -> [Rat; 2] {
        [i.lo, i.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct StepFnRepr {
    domain: Interval,
    breakpoints: Vec<Rat>,
    values: Vec<Rat>,
}

/// Piecewise-constant function on a bounded interval, kept in canonical
/// form: no two adjacent pieces carry the same value.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "StepFnRepr", into = "StepFnRepr")]
pub struct StepFn {
    domain: Interval,
    breakpoints: Vec<Rat>,
    values: Vec<Rat>,
}

impl TryFrom<StepFnRepr> for StepFn {
    type Error = StepError;
    fn try_from(r: StepFnRepr) -> Result<StepFn, StepError> {
        StepFn::new(r.domain, r.breakpoints, r.values)
    }
}

impl From<StepFn> for StepFnRepr {
    fn from(f: StepFn) -> StepFnRepr {
        StepFnRepr {
            domain: f.domain,
            breakpoints: f.breakpoints,
            values: f.values,
        }
    }
}

/// One constant piece of a step function.
#[derive(Debug, Clone, Copy)]
pub struct Piece<'a> {
    pub lo: &'a Rat,
    pub hi: &'a Rat,
    pub value: &'a Rat,
}

impl Piece<'_> {
    pub fn length(&self) -> Rat {
        self.hi - self.lo
    }
}

/// Result of an `L^p` norm computation.
#[derive(Debug, Clone)]
pub struct LpNorm {
    /// `sum |v_i|^p * len_i`, exact when `p` is a positive integer.
    pub inner_exact: Option<Rat>,
    pub value: f64,
    /// Absolute error bound on `value`.
    pub error_bound: f64,
}

impl StepFn {
    /// Builds a step function, merging adjacent pieces with equal values.
    pub fn new(domain: Interval, breakpoints: Vec<Rat>, values: Vec<Rat>) -> Result<StepFn, StepError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(StepError::CountMismatch {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        for w in breakpoints.windows(2) {
            if w[0] >= w[1] {
                return Err(StepError::NonMonotoneBreakpoints {
                    prev: w[0].clone(),
                    next: w[1].clone(),
                });
            }
        }
        for b in &breakpoints {
            if b <= domain.lo() || b >= domain.hi() {
                return Err(StepError::BreakpointOutsideDomain(b.clone()));
            }
        }
        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut vals = Vec::with_capacity(values.len());
        let mut values = values.into_iter();
        vals.push(values.next().expect("at least one value"));
        for (b, v) in breakpoints.into_iter().zip(values) {
            if vals.last() != Some(&v) {
                bps.push(b);
                vals.push(v);
            }
        }
        Ok(StepFn {
            domain,
            breakpoints: bps,
            values: vals,
        })
    }

    pub fn constant(domain: Interval, value: Rat) -> StepFn {
        StepFn {
            domain,
            breakpoints: Vec::new(),
            values: vec![value],
        }
    }

    pub fn zero(domain: Interval) -> StepFn {
        StepFn::constant(domain, Rat::zero())
    }

    /// Indicator of `[a, b]` inside `domain`. `a`, `b` may touch the domain ends.
    pub fn indicator(domain: Interval, a: Rat, b: Rat) -> Result<StepFn, StepError> {
        StepFn::from_blocks(domain, &[(a, b, Rat::one())])
    }

    /// Zero function plus constant blocks `(a, b, value)`, which must be
    /// disjoint (touching is allowed) and inside `domain`.
    pub fn from_blocks(domain: Interval, blocks: &[(Rat, Rat, Rat)]) -> Result<StepFn, StepError> {
        let mut blocks: Vec<_> = blocks.to_vec();
        blocks.sort_by(|x, y| x.0.cmp(&y.0));
        let mut bps: Vec<Rat> = Vec::new();
        let mut vals = vec![Rat::zero()];
        for (a, b, v) in blocks {
            let iv = Interval::new(a.clone(), b.clone())?;
            if !domain.contains_interval(&iv) {
                return Err(StepError::WindowOutsideDomain { lo: a, hi: b });
            }
            if let Some(last) = bps.last() {
                if &a < last {
                    return Err(StepError::NonMonotoneBreakpoints { prev: last.clone(), next: a });
                }
            }
            if &a > domain.lo() {
                if bps.last() == Some(&a) {
                    // touching the previous block: replace its trailing zero piece
                    *vals.last_mut().unwrap() = v.clone();
                } else {
                    bps.push(a);
                    vals.push(v.clone());
                }
            } else {
                vals[0] = v.clone();
            }
            if &b < domain.hi() {
                bps.push(b);
                vals.push(Rat::zero());
            }
        }
        StepFn::new(domain, bps, vals)
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    /// Piece endpoints including the domain ends.
    pub fn edges(&self) -> impl Iterator<Item = &Rat> + '_ {
        std::iter::once(self.domain.lo())
            .chain(self.breakpoints.iter())
            .chain(std::iter::once(self.domain.hi()))
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece<'_>> + '_ {
        (0..self.values.len()).map(move |i| self.piece(i))
    }

    pub fn piece(&self, i: usize) -> Piece<'_> {
        let lo = if i == 0 { self.domain.lo() } else { &self.breakpoints[i - 1] };
        let hi = if i == self.breakpoints.len() {
            self.domain.hi()
        } else {
            &self.breakpoints[i]
        };
        Piece {
            lo,
            hi,
            value: &self.values[i],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Rat::is_zero)
    }

    /// `|f|` (re-canonicalized, since `|a| == |b|` may merge pieces).
    pub fn abs(&self) -> StepFn {
        self.map_values(|v| v.abs())
    }

    pub fn scale(&self, c: &Rat) -> StepFn {
        self.map_values(|v| v * c)
    }

    fn map_values(&self, f: impl Fn(&Rat) -> Rat) -> StepFn {
        let values = self.values.iter().map(f).collect();
        StepFn::new(self.domain.clone(), self.breakpoints.clone(), values).expect("same partition")
    }

    /// Pointwise combination on the common refinement of both partitions.
    pub fn zip_with(&self, other: &StepFn, f: impl Fn(&Rat, &Rat) -> Rat) -> Result<StepFn, StepError> {
        if self.domain != other.domain {
            return Err(StepError::DomainMismatch);
        }
        let (mut i, mut j) = (0, 0);
        let mut bps = Vec::new();
        let mut vals = vec![f(&self.values[0], &other.values[0])];
        loop {
            let a = self.breakpoints.get(i);
            let b = other.breakpoints.get(j);
            let next = match (a, b) {
                (None, None) => break,
                (Some(x), None) => {
                    i += 1;
                    x
                }
                (None, Some(y)) => {
                    j += 1;
                    y
                }
                (Some(x), Some(y)) => {
                    if x < y {
                        i += 1;
                        x
                    } else if y < x {
                        j += 1;
                        y
                    } else {
                        i += 1;
                        j += 1;
                        x
                    }
                }
            };
            bps.push(next.clone());
            vals.push(f(&self.values[i], &other.values[j]));
        }
        StepFn::new(self.domain.clone(), bps, vals)
    }

    pub fn add(&self, other: &StepFn) -> Result<StepFn, StepError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepFn) -> Result<StepFn, StepError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Same function on a larger domain, zero outside the old one.
    pub fn extend_zero(&self, domain: Interval) -> Result<StepFn, StepError> {
        if !domain.contains_interval(&self.domain) {
            return Err(StepError::WindowOutsideDomain {
                lo: domain.lo().clone(),
                hi: domain.hi().clone(),
            });
        }
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        if self.domain.lo() > domain.lo() {
            vals.push(Rat::zero());
            bps.push(self.domain.lo().clone());
        }
        vals.extend(self.values.iter().cloned());
        bps.extend(self.breakpoints.iter().cloned());
        if self.domain.hi() < domain.hi() {
            bps.push(self.domain.hi().clone());
            vals.push(Rat::zero());
        }
        StepFn::new(domain, bps, vals)
    }

    /// Index of the piece whose closure contains `x`, preferring the piece
    /// to the right at a breakpoint.
    pub fn piece_index(&self, x: &Rat) -> usize {
        self.breakpoints.partition_point(|b| b <= x)
    }

    /// Exact `∫_window |f|`.
    pub fn integral_abs(&self, window: &Interval) -> Result<Rat, StepError> {
        if !self.domain.contains_interval(window) {
            return Err(StepError::WindowOutsideDomain {
                lo: window.lo().clone(),
                hi: window.hi().clone(),
            });
        }
        let mut total = Rat::zero();
        for p in self.pieces() {
            let lo = p.lo.clone().max(window.lo().clone());
            let hi = p.hi.clone().min(window.hi().clone());
            if lo < hi && !p.value.is_zero() {
                total += (hi - lo) * p.value.abs();
            }
        }
        Ok(total)
    }

    /// `‖f‖₁` over the whole domain.
    pub fn l1_norm(&self) -> Rat {
        self.pieces().map(|p| p.length() * p.value.abs()).sum()
    }

    /// `‖f‖₂²`, exact.
    pub fn l2_norm_sq(&self) -> Rat {
        self.pieces().map(|p| p.length() * p.value * p.value).sum()
    }

    pub fn lp_norm(&self, p: &Rat) -> Result<LpNorm, StepError> {
        if p < &Rat::one() {
            return Err(StepError::InvalidExponent(p.clone()));
        }
        let pf = p.to_f64();
        if let Some(k) = p.to_i64().filter(|k| *k <= i32::MAX as i64) {
            let inner: Rat = self
                .pieces()
                .map(|pc| pc.length() * pc.value.abs().powi(k as i32))
                .sum();
            let value = inner.to_f64().powf(1.0 / pf);
            return Ok(LpNorm {
                inner_exact: Some(inner),
                value,
                error_bound: 4.0 * f64::EPSILON * value,
            });
        }
        let mut inner = 0.0;
        let mut err = 0.0;
        for pc in self.pieces() {
            let term = pc.length().to_f64() * pc.value.abs().to_f64().powf(pf);
            inner += term;
            err += 8.0 * f64::EPSILON * term;
        }
        let value = inner.powf(1.0 / pf);
        // d(s^{1/p}) = s^{1/p - 1} / p ds
        let error_bound = if inner > 0.0 {
            value / inner / pf * (err + inner * f64::EPSILON) + 4.0 * f64::EPSILON * value
        } else {
            0.0
        };
        Ok(LpNorm {
            inner_exact: None,
            value,
            error_bound,
        })
    }

    /// Sum of absolute jumps between adjacent pieces. Because breakpoint
    /// values follow the canonical rule, this is the pointwise variation of
    /// the canonical representative.
    pub fn variation(&self) -> Rat {
        self.values.windows(2).map(|w| (&w[1] - &w[0]).abs()).sum()
    }

    /// `‖f‖₁ + |Df|`.
    pub fn bv_norm(&self) -> Rat {
        self.l1_norm() + self.variation()
    }

    /// Value of the canonical representative at `x`.
    pub fn canonical_at(&self, x: &Rat) -> Result<Rat, StepError> {
        if !self.domain.contains(x) {
            return Err(StepError::OutsideDomain(x.clone()));
        }
        match self.breakpoints.binary_search(x) {
            Ok(k) => Ok(self.values[k].clone().max(self.values[k + 1].clone())),
            Err(k) => Ok(self.values[k].clone()),
        }
    }

    /// `ess sup |f|`.
    pub fn ess_sup_abs(&self) -> Rat {
        self.values.iter().map(Rat::abs).max().unwrap_or_else(Rat::zero)
    }

    /// `λ{|f| > s}`.
    pub fn distribution(&self, s: &Rat) -> Rat {
        self.pieces()
            .filter(|p| &p.value.abs() > s)
            .map(|p| p.length())
            .sum()
    }

    /// Non-increasing rearrangement of `|f|` on `[0, λ(domain))`.
    pub fn rearrangement(&self) -> RearrangedFn {
        let mut pieces: Vec<(Rat, Rat)> = self.pieces().map(|p| (p.value.abs(), p.length())).collect();
        // stable: equal values keep their order, which only affects merged lengths
        pieces.sort_by(|a, b| b.0.cmp(&a.0));
        let mut bps = Vec::with_capacity(pieces.len());
        let mut vals = Vec::with_capacity(pieces.len());
        let mut at = Rat::zero();
        for (i, (v, len)) in pieces.into_iter().enumerate() {
            if i > 0 {
                bps.push(at.clone());
            }
            at += len;
            vals.push(v);
        }
        let domain = Interval::new(Rat::zero(), at).expect("positive total length");
        RearrangedFn(StepFn::new(domain, bps, vals).expect("sorted pieces"))
    }

    /// `(f⁺, f⁻)` with `f = f⁺ − f⁻`.
    pub fn pos_neg_parts(&self) -> (StepFn, StepFn) {
        let zero = Rat::zero();
        let pos = self.map_values(|v| v.clone().max(zero.clone()));
        let neg = self.map_values(|v| (-v).max(zero.clone()));
        (pos, neg)
    }

    /// Maximal closed intervals where `f ≠ 0`.
    pub fn support_components(&self) -> Vec<Interval> {
        let mut out: Vec<Interval> = Vec::new();
        for p in self.pieces().filter(|p| !p.value.is_zero()) {
            match out.last_mut() {
                Some(last) if last.hi() == p.lo => last.hi = p.hi.clone(),
                _ => out.push(Interval {
                    lo: p.lo.clone(),
                    hi: p.hi.clone(),
                }),
            }
        }
        out
    }

    /// Convex hull of `supp f + [−r, r]`, intersected with `ambient`.
    pub fn support_neighborhood(&self, r: &Rat, ambient: &Interval) -> Result<Interval, StepError> {
        let comps = self.support_components();
        let (first, last) = match (comps.first(), comps.last()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(StepError::ZeroFunction),
        };
        let lo = (first.lo() - r).max(ambient.lo().clone());
        let hi = (last.hi() + r).min(ambient.hi().clone());
        Interval::new(lo, hi)
    }

    /// Exact Lebesgue measure of `supp f + [−r, r]` (union of enlarged components).
    pub fn neighborhood_measure(&self, r: &Rat) -> Result<Rat, StepError> {
        let comps = self.support_components();
        if comps.is_empty() {
            return Err(StepError::ZeroFunction);
        }
        let mut total = Rat::zero();
        let mut cur: Option<(Rat, Rat)> = None;
        for c in comps {
            let (lo, hi) = (c.lo() - r, c.hi() + r);
            cur = match cur {
                Some((clo, chi)) if lo <= chi => Some((clo, chi.max(hi))),
                Some((clo, chi)) => {
                    total += chi - clo;
                    Some((lo, hi))
                }
                None => Some((lo, hi)),
            };
        }
        if let Some((clo, chi)) = cur {
            total += chi - clo;
        }
        Ok(total)
    }
}

impl fmt::Debug for StepFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StepFn{{{}", self.domain)?;
        for p in self.pieces() {
            write!(f, " ({},{}):{}", p.lo, p.hi, p.value)?;
        }
        write!(f, "}}")
    }
}

/// Non-increasing rearrangement `f*`, a step function on `[0, λ(I))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RearrangedFn(StepFn);

impl RearrangedFn {
    pub fn as_step(&self) -> &StepFn {
        &self.0
    }

    pub fn into_step(self) -> StepFn {
        self.0
    }
}
