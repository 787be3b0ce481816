//! Orlicz `L(log⁺L)^r` modulars and Luxemburg norms.

use crate::grid2d::GridFn2D;
use crate::report::CheckReport;
use crate::step::StepFn;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrliczError {
    #[error("scale t must be positive")]
    NonPositiveT,
    #[error("exponent r must be at least 1")]
    BadExponent,
    #[error("only d = 2 has a grid backend")]
    BadDimension,
    #[error("bisection did not reach the tolerance")]
    NoConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczParams {
    pub r: f64,
    pub d: u32,
}

/// Anything that is constant on finitely many pieces of known measure.
pub trait Pieces {
    /// `(measure, |value|)` for each piece, in a fixed order.
    fn pieces(&self) -> Vec<(f64, f64)>;
}

impl Pieces for StepFn {
    fn pieces(&self) -> Vec<(f64, f64)> {
        self.pieces().map(|p| (p.length().to_f64(), p.value.abs().to_f64())).collect()
    }
}

impl Pieces for GridFn2D {
    fn pieces(&self) -> Vec<(f64, f64)> {
        let area = self.hx() * self.hy();
        self.values().iter().map(|v| (area, v.abs())).collect()
    }
}

/// `∫ (|g|/t) (log⁺(|g|/t))^r`.
pub fn orlicz_modular(g: &impl Pieces, t: f64, r: f64) -> Result<f64, OrliczError> {
    if !(t > 0.0) {
        return Err(OrliczError::NonPositiveT);
    }
    if !(r >= 1.0) {
        return Err(OrliczError::BadExponent);
    }
    Ok(modular(&g.pieces(), t, r))
}

fn modular(pieces: &[(f64, f64)], t: f64, r: f64) -> f64 {
    pieces
        .iter()
        .map(|&(m, v)| {
            let u = v / t;
            if u > 1.0 {
                // ln(u) = ln_1p(u − 1) is accurate when u is near 1
                m * u * (u - 1.0).ln_1p().powf(r)
            } else {
                0.0
            }
        })
        .sum()
}

/// `inf{ t > 0 : modular(t) ≤ 1 }`, returned as a `t` with
/// `modular(t) ∈ [1 − tol, 1]`.
pub fn luxemburg_norm(g: &impl Pieces, r: f64, tol: f64) -> Result<f64, OrliczError> {
    if !(r >= 1.0) {
        return Err(OrliczError::BadExponent);
    }
    let pieces: Vec<(f64, f64)> = g.pieces().into_iter().filter(|(m, v)| *m > 0.0 && *v > 0.0).collect();
    if pieces.is_empty() {
        return Ok(0.0);
    }
    let sup = pieces.iter().fold(0.0f64, |s, p| s.max(p.1));
    // modular(sup) = 0; halve until the modular exceeds 1
    let mut hi = sup;
    let mut lo = sup / 2.0;
    let mut steps = 0;
    while modular(&pieces, lo, r) <= 1.0 {
        hi = lo;
        lo /= 2.0;
        steps += 1;
        if steps > 2000 || lo == 0.0 {
            return Err(OrliczError::NoConvergence);
        }
    }
    for _ in 0..400 {
        if modular(&pieces, hi, r) >= 1.0 - tol {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // adjacent floats: hi is the closest representable answer
            return Ok(hi);
        }
        if modular(&pieces, mid, r) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(OrliczError::NoConvergence)
}

/// `‖g‖_{L(log⁺L)^r} ≤ (r(d−1))^{r(d−1)/d} ‖g‖_{L^{d/(d−1)}}` for `d = 2`,
/// i.e. `≤ r^{r/2} ‖g‖₂`.
pub fn check_embedding(g: &GridFn2D, params: OrliczParams, tol: f64) -> Result<CheckReport, OrliczError> {
    if params.d != 2 {
        return Err(OrliczError::BadDimension);
    }
    let r = params.r;
    let norm = luxemburg_norm(g, r, 1e-12)?;
    let l2 = g.l2_norm();
    let c = r.powf(r / 2.0);
    let bound = c * l2;
    let mut rep = CheckReport::new("orlicz-embedding");
    rep.measure("luxemburg_norm", norm)
        .measure("l2_norm", l2)
        .measure("constant", c)
        .measure("r", r)
        .headline(norm, bound)
        .require(norm <= bound + tol)
        .tag("grid-binary64")
        .tag("bisection");
    rep.attach_on_failure(|| serde_json::json!({ "g": g, "params": { "r": r, "d": params.d, "tol": tol } }));
    Ok(rep)
}
