//! Adaptive tabulation of `M_R f`.
//!
//! The node set starts from every point where the optimal-cell combinatorics
//! can change (domain ends, breakpoints, and their shifts by `±R`) and is
//! refined by bisection. A segment retires once halving it moves neither the
//! trapezoid integral nor the grid variation by more than its share of the
//! tolerance; the run stops when a full pass changes both by less than `tol`.

use super::{MaximalOperator, Radius};
use crate::rat::Rat;
use crate::step::StepFn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MAX_DEPTH: u32 = 24;

/// Depth cap from `MAXBV_MAX_DEPTH`, falling back to 24.
pub fn max_depth_from_env() -> u32 {
    std::env::var("MAXBV_MAX_DEPTH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DEPTH)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub tol: f64,
    pub max_depth: u32,
    /// Passes in which every segment is bisected regardless of its change.
    pub min_depth: u32,
}

impl ProfileOptions {
    pub fn new(tol: f64) -> ProfileOptions {
        ProfileOptions {
            tol,
            max_depth: max_depth_from_env(),
            min_depth: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    pub radius: Radius,
    pub nodes: Vec<Rat>,
    /// Exact `M_R f` at each node.
    pub values: Vec<Rat>,
    pub refinement_depth: u32,
    /// Grid variation `Σ |M(x_{i+1}) − M(x_i)|`, a lower bound for the variation.
    pub variation_lower: f64,
    /// Trapezoid estimate of `‖M_R f‖₁`.
    pub l1_estimate: f64,
    /// Sum of the most recent per-segment halving changes of the trapezoid sum.
    pub l1_error: f64,
    pub converged: bool,
}

impl SampledProfile {
    pub fn nodes_f64(&self) -> Vec<f64> {
        self.nodes.iter().map(Rat::to_f64).collect()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(Rat::to_f64).collect()
    }

    /// `Σ (ΔM)² / Δx`, the squared L² norm of the derivative of the piecewise
    /// linear interpolant (a lower bound for `‖DM‖₂²`).
    pub fn derivative_l2_sq(&self) -> f64 {
        let (x, y) = (self.nodes_f64(), self.values_f64());
        x.windows(2)
            .zip(y.windows(2))
            .map(|(x, y)| (y[1] - y[0]).powi(2) / (x[1] - x[0]))
            .sum()
    }

    /// Measure of `{M > s}` for the piecewise linear interpolant.
    pub fn distribution(&self, s: f64) -> f64 {
        let (x, y) = (self.nodes_f64(), self.values_f64());
        let mut total = 0.0;
        for i in 0..x.len() - 1 {
            let (x0, x1, y0, y1) = (x[i], x[i + 1], y[i], y[i + 1]);
            let len = x1 - x0;
            total += if y0 > s && y1 > s {
                len
            } else if y0 <= s && y1 <= s {
                0.0
            } else {
                let frac = (y0.max(y1) - s) / (y1 - y0).abs();
                len * frac
            };
        }
        total
    }

    /// Non-increasing rearrangement of the interpolant at `t`:
    /// `inf { s : λ{M > s} ≤ t }`.
    pub fn rearranged(&self, t: f64) -> f64 {
        let top = self.values_f64().into_iter().fold(0.0, f64::max);
        if self.distribution(0.0) <= t {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, top);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.distribution(mid) <= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn max_value(&self) -> f64 {
        self.values_f64().into_iter().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("refinement depth {} reached before the profile stabilized", .partial.refinement_depth)]
    BudgetExceeded { partial: Box<SampledProfile>, achieved_tol: f64 },
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error(transparent)]
    Maximal(#[from] super::MaximalError),
}

/// Adaptive profile of `M_R f` with the depth cap taken from the environment.
pub fn maximal_profile(f: &StepFn, radius: &Radius, tol: f64) -> Result<SampledProfile, ProfileError> {
    maximal_profile_with(f, radius, &ProfileOptions::new(tol))
}

fn seed_nodes(f: &StepFn, radius: &Radius) -> Vec<Rat> {
    let dom = f.domain();
    let mut seeds: Vec<Rat> = f.edges().cloned().collect();
    if let Some(r) = radius.finite() {
        for e in f.edges() {
            for p in [e - r, e + r] {
                if dom.contains(&p) {
                    seeds.push(p);
                }
            }
        }
    }
    seeds.sort();
    seeds.dedup();
    seeds
}

fn trapezoid(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    0.5 * (x1 - x0) * (y0 + y1)
}

pub fn maximal_profile_with(
    f: &StepFn,
    radius: &Radius,
    opts: &ProfileOptions,
) -> Result<SampledProfile, ProfileError> {
    if !(opts.tol > 0.0) {
        return Err(ProfileError::BadTolerance);
    }
    let nodes = seed_nodes(f, radius);
    if f.is_zero() {
        let n = nodes.len();
        return Ok(SampledProfile {
            radius: radius.clone(),
            nodes,
            values: vec![Rat::zero(); n],
            refinement_depth: 0,
            variation_lower: 0.0,
            l1_estimate: 0.0,
            l1_error: 0.0,
            converged: true,
        });
    }
    let op = MaximalOperator::new(f);
    let eval_all = |pts: &[Rat]| -> Result<Vec<Rat>, ProfileError> {
        pts.par_iter()
            .map_init(Vec::new, |buf, x| op.eval_with(x, radius, buf).map(|q| q.value))
            .collect::<Result<Vec<_>, _>>()
            .map_err(ProfileError::from)
    };

    let mut values = eval_all(&nodes)?;
    let mut nodes = nodes;
    let nseg = nodes.len() - 1;
    let mut active = vec![true; nseg];
    let mut last_change = vec![f64::INFINITY; nseg];
    let mut depth = 0;
    let mut converged = false;
    let mut last_pass = (f64::INFINITY, f64::INFINITY);

    while depth < opts.max_depth {
        depth += 1;
        let mids: Vec<Rat> = (0..nodes.len() - 1)
            .filter(|&i| active[i])
            .map(|i| Rat::midpoint(&nodes[i], &nodes[i + 1]))
            .collect();
        let mid_vals = eval_all(&mids)?;

        let cap = nodes.len() + mids.len();
        let mut new_nodes = Vec::with_capacity(cap);
        let mut new_vals = Vec::with_capacity(cap);
        let mut new_active = Vec::with_capacity(cap);
        let mut new_change = Vec::with_capacity(cap);
        let (mut d_l1, mut d_var) = (0.0f64, 0.0f64);
        let mut mids = mids.into_iter().zip(mid_vals);
        let force = depth < opts.min_depth;
        // equidistribute the tolerance over the segments of this pass
        let seg_tol = 0.25 * opts.tol / (nodes.len() - 1) as f64;
        for i in 0..nodes.len() - 1 {
            new_nodes.push(nodes[i].clone());
            new_vals.push(values[i].clone());
            if !active[i] {
                new_active.push(false);
                new_change.push(last_change[i]);
                continue;
            }
            let (m, mv) = mids.next().expect("one midpoint per active segment");
            let (x0, x1, xm) = (nodes[i].to_f64(), nodes[i + 1].to_f64(), m.to_f64());
            let (y0, y1, ym) = (values[i].to_f64(), values[i + 1].to_f64(), mv.to_f64());
            let c_l1 = (trapezoid(x0, x1, y0, y1) - trapezoid(x0, xm, y0, ym) - trapezoid(xm, x1, ym, y1)).abs();
            let c_var = ((y0 - ym).abs() + (ym - y1).abs() - (y0 - y1).abs()).max(0.0);
            d_l1 += c_l1;
            d_var += c_var;
            let keep = force || c_l1 > seg_tol || c_var > seg_tol;
            new_nodes.push(m);
            new_vals.push(mv);
            new_active.extend([keep, keep]);
            new_change.extend([0.5 * c_l1, 0.5 * c_l1]);
        }
        new_nodes.push(nodes.last().unwrap().clone());
        new_vals.push(values.last().unwrap().clone());
        nodes = new_nodes;
        values = new_vals;
        active = new_active;
        last_change = new_change;
        last_pass = (d_l1, d_var);
        if depth >= opts.min_depth && d_l1 < opts.tol && d_var < opts.tol {
            converged = true;
            break;
        }
        if !active.iter().any(|a| *a) {
            converged = true;
            break;
        }
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = (
        nodes.iter().map(Rat::to_f64).collect(),
        values.iter().map(Rat::to_f64).collect(),
    );
    let mut l1 = 0.0;
    let mut var = 0.0;
    for i in 0..xs.len() - 1 {
        l1 += trapezoid(xs[i], xs[i + 1], ys[i], ys[i + 1]);
        var += (ys[i + 1] - ys[i]).abs();
    }
    let profile = SampledProfile {
        radius: radius.clone(),
        nodes,
        values,
        refinement_depth: depth,
        variation_lower: var,
        l1_estimate: l1,
        l1_error: last_change.iter().filter(|c| c.is_finite()).sum(),
        converged,
    };
    if converged {
        Ok(profile)
    } else {
        Err(ProfileError::BudgetExceeded {
            achieved_tol: last_pass.0.max(last_pass.1),
            partial: Box::new(profile),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step::Interval;

    fn chi01(lo: i64, hi: i64) -> StepFn {
        StepFn::indicator(Interval::int(lo, hi), Rat::zero(), Rat::one()).unwrap()
    }

    /// `1 + 1/R + 2 ln R` for the unit box with `R ≥ 1`.
    fn unit_box_l1(r: f64) -> f64 {
        1.0 + 1.0 / r + 2.0 * r.ln()
    }

    #[test]
    fn unit_box_closed_form() {
        for r in [1, 4] {
            let p = maximal_profile(&chi01(-12, 12), &Radius::Finite(Rat::from_int(r)), 1e-7).unwrap();
            assert!(p.converged);
            assert!((p.l1_estimate - unit_box_l1(r as f64)).abs() < 1e-6, "{}", p.l1_estimate);
            assert!((p.variation_lower - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn radius_one_is_piecewise_linear() {
        // M = 1 + x on [−1, 0] and 2 − x on [1, 2]
        let p = maximal_profile(&chi01(-4, 4), &Radius::Finite(Rat::one()), 1e-6).unwrap();
        for (x, y) in p.nodes_f64().iter().zip(p.values_f64()) {
            let expected = if (-1.0..=0.0).contains(x) {
                1.0 + x
            } else if (1.0..=2.0).contains(x) {
                2.0 - x
            } else if (0.0..=1.0).contains(x) {
                1.0
            } else {
                0.0
            };
            assert!((y - expected).abs() < 1e-15, "{x}: {y}");
        }
        assert!((p.derivative_l2_sq() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_function_depth_zero() {
        let p = maximal_profile(&StepFn::zero(Interval::int(0, 1)), &Radius::Finite(Rat::one()), 1e-6).unwrap();
        assert_eq!(p.refinement_depth, 0);
        assert_eq!(p.l1_estimate, 0.0);
        assert_eq!(p.variation_lower, 0.0);
    }

    #[test]
    fn variation_grows_with_refinement() {
        let f = StepFn::new(
            Interval::int(-4, 6),
            vec![Rat::zero(), Rat::new(1, 3), Rat::one(), Rat::from_int(2)],
            vec![Rat::zero(), Rat::from_int(3), Rat::new(1, 2), Rat::from_int(2), Rat::zero()],
        )
        .unwrap();
        let mut prev = 0.0;
        for depth in 1..8 {
            let opts = ProfileOptions { tol: 1e-14, max_depth: depth, min_depth: 1 };
            let p = match maximal_profile_with(&f, &Radius::Finite(Rat::new(3, 2)), &opts) {
                Ok(p) => p,
                Err(ProfileError::BudgetExceeded { partial, .. }) => *partial,
                Err(e) => panic!("{e}"),
            };
            assert!(p.variation_lower >= prev - 1e-12);
            prev = p.variation_lower;
        }
    }

    #[test]
    fn budget_exceeded_carries_partial() {
        let opts = ProfileOptions { tol: 1e-15, max_depth: 2, min_depth: 1 };
        let err = maximal_profile_with(&chi01(-8, 8), &Radius::Finite(Rat::from_int(4)), &opts).unwrap_err();
        match err {
            ProfileError::BudgetExceeded { partial, achieved_tol } => {
                assert_eq!(partial.refinement_depth, 2);
                assert!(achieved_tol > 1e-15);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unrestricted_rearrangement_of_unit_box() {
        // λ{M > s} = 2/s − 1 for s < 1, so (Mχ)*(t) = 2/(t+1) once t ≥ 1
        let p = maximal_profile(&chi01(-64, 64), &Radius::Infinite, 1e-7).unwrap();
        for t in [1.0, 3.0, 10.0, 50.0] {
            assert!((p.rearranged(t) - 2.0 / (t + 1.0)).abs() < 1e-5, "{t}");
        }
        assert_eq!(p.rearranged(0.5), 1.0);
    }
}
