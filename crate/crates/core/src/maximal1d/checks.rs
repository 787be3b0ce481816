//! Checkers for the quantitative 1D inequalities.

use super::profile::{maximal_profile, ProfileError, SampledProfile};
use super::level::unrestricted_rearrangement;
use super::Radius;
use crate::rat::Rat;
use crate::report::CheckReport;
use crate::step::{Interval, StepError, StepFn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for profiles that feed the checkers below.
const PROFILE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("support plus radius {radius} does not fit inside the domain")]
    MarginTooSmall { radius: Rat },
    #[error("radius {0} outside the admissible range")]
    RadiusOutOfRange(Rat),
    #[error("invalid parameter list: {0}")]
    BadParameters(String),
}

fn instance_json(f: &StepFn, extra: serde_json::Value) -> serde_json::Value {
    serde_json::json!({ "f": f, "params": extra })
}

/// `‖M_R f‖₁ ≤ 3(1+2log⁺R)‖f‖₁ + 3V(|f|)` and `V(M_R f) ≤ V(|f|)`, plus the
/// combined form with constant `max{3(1+2log⁺R), 4}` on the variation term.
pub fn check_bd_bound(f: &StepFn, radius: &Rat, tol: f64) -> Result<CheckReport, CheckError> {
    let rad = Radius::Finite(radius.clone());
    let p = maximal_profile(f, &rad, tol)?;
    let l1f = f.l1_norm().to_f64();
    let var_abs = f.abs().variation().to_f64();
    let c = 3.0 * (1.0 + 2.0 * rad.log_plus());
    let l1_bound = c * l1f + 3.0 * var_abs;
    let w11_bound = c.max(4.0) * (l1f + var_abs);
    let (l1, var) = (p.l1_estimate, p.variation_lower);

    let mut rep = CheckReport::new("bd-l1");
    rep.measure("l1_MRf", l1)
        .measure("l1_error", p.l1_error)
        .measure("variation_MRf", var)
        .measure("l1_f", l1f)
        .measure("variation_abs_f", var_abs)
        .measure("R", radius.to_f64())
        .measure("w11_bound", w11_bound)
        .measure("w11_margin", w11_bound - (l1 + var))
        .measure("variation_margin", var_abs - var)
        .headline(l1, l1_bound)
        .require(l1 <= l1_bound + tol)
        .require(var <= var_abs + tol)
        .require(l1 + var <= w11_bound + tol)
        .tag("exact-rational-nodes")
        .tag("adaptive-profile")
        .attach_on_failure(|| instance_json(f, serde_json::json!({ "R": radius, "tol": tol })));
    Ok(rep)
}

/// `(Mf)*(t) ≤ 2‖f‖₁/t` at each threshold, with `M` unrestricted.
pub fn check_weak_type(f: &StepFn, thresholds: &[Rat]) -> Result<CheckReport, CheckError> {
    const TOL: f64 = 1e-6;
    if thresholds.is_empty() || thresholds.iter().any(|t| !t.is_positive()) {
        return Err(CheckError::BadParameters("thresholds must be positive".into()));
    }
    let l1f = f.l1_norm().to_f64();
    let mut rep = CheckReport::new("weak-type");
    rep.measure("l1_f", l1f).tag("level-set-sweep").tag("binary64");
    let mut worst: Option<(f64, f64, f64)> = None;
    for t in thresholds {
        let tf = t.to_f64();
        let lhs = unrestricted_rearrangement(f, tf);
        let rhs = 2.0 * l1f / tf;
        rep.require(lhs <= rhs + TOL);
        if worst.is_none_or(|w| rhs - lhs < w.2) {
            worst = Some((lhs, rhs, rhs - lhs));
        }
        rep.measure(format!("Mf_star@{t}"), lhs);
    }
    let (lhs, rhs, _) = worst.expect("non-empty thresholds");
    rep.headline(lhs, rhs).attach_on_failure(|| {
        instance_json(f, serde_json::json!({ "thresholds": thresholds }))
    });
    Ok(rep)
}

/// The Poincaré-type bound
/// `‖f‖₂² ≤ min{ c²/λ(N)·‖f‖²_BV + λ(N)²/2·‖DM_R f‖₂², λ(N)²‖DM_R f‖₂² }`
/// with `c = 3(1+2log⁺R)` and `N = supp f + [−R, R]`.
pub fn check_poincare(f: &StepFn, radius: &Rat, tol: f64) -> Result<CheckReport, CheckError> {
    let hull = f.support_neighborhood(radius, f.domain())?;
    let unclipped = f
        .support_components()
        .first()
        .map(|c| c.lo() - radius)
        .zip(f.support_components().last().map(|c| c.hi() + radius));
    if let Some((lo, hi)) = unclipped {
        if &lo < f.domain().lo() || &hi > f.domain().hi() {
            return Err(CheckError::MarginTooSmall { radius: radius.clone() });
        }
    }
    let rad = Radius::Finite(radius.clone());
    let p = maximal_profile(f, &rad, tol)?;
    let f2 = f.l2_norm_sq().to_f64();
    let lam = f.neighborhood_measure(radius)?.to_f64();
    let bv = f.bv_norm().to_f64();
    let dm2 = p.derivative_l2_sq();
    let c = 3.0 * (1.0 + 2.0 * rad.log_plus());
    let term1 = c * c / lam * bv * bv + lam * lam / 2.0 * dm2;
    let term2 = lam * lam * dm2;
    let bound = term1.min(term2);
    let mut rep = CheckReport::new("poincare");
    rep.measure("l2sq_f", f2)
        .measure("lambda_N", lam)
        .measure("hull_length", hull.length().to_f64())
        .measure("bv_f", bv)
        .measure("dm_l2sq", dm2)
        .measure("term1", term1)
        .measure("term2", term2)
        .measure("R", radius.to_f64())
        .headline(f2, bound)
        .require(f2 <= bound + tol)
        .tag("exact-rational")
        .tag("adaptive-profile-difference-quotients")
        .attach_on_failure(|| instance_json(f, serde_json::json!({ "R": radius, "tol": tol })));
    Ok(rep)
}

/// Indicator of `[−left_len, 0] ∪ ⋃_{n=0}^{n_max} [2^{−n}, 2^{−n} + 2^{−n−1}]`
/// on the window `[−left_len − 2, 3]`.
pub fn dyadic_counterexample(n_max: u32, left_len: &Rat) -> Result<StepFn, CheckError> {
    if n_max < 1 || !left_len.is_positive() {
        return Err(CheckError::BadParameters("need n_max ≥ 1 and left_len > 0".into()));
    }
    let domain = Interval::new(-(left_len + &Rat::from_int(2)), Rat::from_int(3))?;
    let mut blocks = vec![(-left_len.clone(), Rat::zero(), Rat::one())];
    for n in 0..=n_max as i32 {
        let a = Rat::pow2(-n);
        let b = &a + &Rat::pow2(-n - 1);
        blocks.push((a, b, Rat::one()));
    }
    Ok(StepFn::from_blocks(domain, &blocks)?)
}

/// `2 + 2(N+1) + 2^{−N+2}/R` with `N = min{n : 2^{−n+1} < R}`; the last term
/// sums the per-bump contributions `2^{−n+2}/R` over `n > N`.
pub fn counterexample_bound(radius: &Rat) -> (u32, f64) {
    let mut n = 0u32;
    while Rat::pow2(1 - n as i32) >= *radius {
        n += 1;
    }
    let tail = Rat::pow2(2 - n as i32) / radius;
    (n, 2.0 + 2.0 * (n as f64 + 1.0) + tail.to_f64())
}

/// Variation of `M_R f` for the dyadic counterexample truncated at `n_max`
/// and at `n_max / 2`: bounded independently of the truncation while `V(f)`
/// grows linearly.
pub fn check_counterexample(n_max: u32, radius: &Rat, tol: f64) -> Result<CheckReport, CheckError> {
    if !radius.is_positive() || *radius >= 1 {
        return Err(CheckError::RadiusOutOfRange(radius.clone()));
    }
    if n_max < 2 {
        return Err(CheckError::BadParameters("n_max must be at least 2".into()));
    }
    let rad = Radius::Finite(radius.clone());
    let (n_cut, bound) = counterexample_bound(radius);
    let half = n_max / 2;
    let mut rep = CheckReport::new("counterexample");
    let mut vm = Vec::new();
    for n in [half, n_max] {
        let f = dyadic_counterexample(n, &Rat::one())?;
        let vf = f.variation();
        let p = maximal_profile(&f, &rad, tol)?;
        rep.measure(format!("variation_f@n={n}"), vf.to_f64())
            .measure(format!("variation_MRf@n={n}"), p.variation_lower)
            .require(vf == Rat::from_int(2 * (n as i64 + 2)))
            .require(p.variation_lower <= bound + tol);
        vm.push(p.variation_lower);
    }
    let rel = (vm[1] - vm[0]).abs() / vm[1].max(f64::MIN_POSITIVE);
    rep.measure("N", n_cut as f64)
        .measure("relative_change", rel)
        .measure("R", radius.to_f64())
        .headline(vm[1], bound)
        .require(rel < 0.01)
        .tag("exact-rational-nodes")
        .tag("adaptive-profile");
    if !rep.passed {
        rep.instance = Some(serde_json::json!({ "n_max": n_max, "R": radius, "tol": tol }));
    }
    Ok(rep)
}

/// Convergence `M_{a_n} f → f` in L¹ along decreasing scales, checked on the
/// positive and negative parts separately (for `g ≥ 0`, `M_a g ≥ g` so the
/// L¹ distance is `∫M_a g − ∫g`), together with `V(f) ≤ min_n V(M_{a_n} f)`.
pub fn check_convergence(f: &StepFn, scales: &[Rat]) -> Result<CheckReport, CheckError> {
    const MONO_TOL: f64 = 1e-9;
    const VAR_TOL: f64 = 1e-3;
    if scales.is_empty()
        || scales.iter().any(|a| !a.is_positive())
        || scales.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(CheckError::BadParameters("scales must be positive and decreasing".into()));
    }
    let (fp, fm) = f.pos_neg_parts();
    let parts: Vec<StepFn> = [fp, fm].into_iter().filter(|g| !g.is_zero()).collect();
    let mut diffs = vec![0.0; scales.len()];
    let mut vars = vec![0.0; scales.len()];
    for g in &parts {
        let gl1 = g.l1_norm().to_f64();
        for (k, a) in scales.iter().enumerate() {
            let p = maximal_profile(g, &Radius::Finite(a.clone()), 1e-8)?;
            diffs[k] += (p.l1_estimate - gl1).max(0.0);
            vars[k] += p.variation_lower;
        }
    }
    let vf = f.variation().to_f64();
    let bv = f.bv_norm().to_f64();
    let min_var = vars.iter().cloned().fold(f64::INFINITY, f64::min);
    let last = *diffs.last().unwrap();
    let mut rep = CheckReport::new("charact-convergence");
    for (k, a) in scales.iter().enumerate() {
        rep.measure(format!("l1_gap@a={a}"), diffs[k]);
        rep.measure(format!("variation_M@a={a}"), vars[k]);
    }
    let monotone = diffs.windows(2).all(|w| w[1] <= w[0] + MONO_TOL);
    rep.measure("variation_f", vf)
        .measure("bv_f", bv)
        .measure("min_variation_M", min_var)
        .headline(last, 0.05 * bv)
        .require(monotone)
        .require(last <= 0.05 * bv || bv == 0.0)
        .require(vf <= min_var + VAR_TOL)
        .tag("adaptive-profile")
        .tag("positive-negative-parts")
        .attach_on_failure(|| instance_json(f, serde_json::json!({ "scales": scales })));
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow1d {
    pub radius: Rat,
    pub l1: f64,
    pub variation: f64,
    /// `‖M_R f‖₁ / (1 + log⁺R)`
    pub ratio: f64,
}

/// `‖M_R f‖₁` across radii; the ratio to `1 + log⁺R` should stay bounded.
pub fn growth_table_1d(f: &StepFn, radii: &[Rat]) -> Result<(Vec<GrowthRow1d>, CheckReport), CheckError> {
    if radii.is_empty() || radii.iter().any(|r| !r.is_positive()) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CheckError::BadParameters("radii must be positive and increasing".into()));
    }
    let mut rows = Vec::new();
    for r in radii {
        let rad = Radius::Finite(r.clone());
        let p: SampledProfile = maximal_profile(f, &rad, PROFILE_TOL)?;
        rows.push(GrowthRow1d {
            radius: r.clone(),
            l1: p.l1_estimate,
            variation: p.variation_lower,
            ratio: p.l1_estimate / (1.0 + rad.log_plus()),
        });
    }
    let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let spread = if max == 0.0 { 1.0 } else { max / min };
    let mut rep = CheckReport::new("growth-1d");
    for row in &rows {
        rep.measure(format!("l1@R={}", row.radius), row.l1);
    }
    rep.measure("ratio_max", max)
        .measure("ratio_min", min)
        .headline(spread, 10.0)
        .require(spread < 10.0)
        .tag("adaptive-profile");
    Ok((rows, rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn chi01(lo: i64, hi: i64) -> StepFn {
        StepFn::indicator(Interval::int(lo, hi), Rat::zero(), Rat::one()).unwrap()
    }

    #[test]
    fn bd_unit_box() {
        let rep = check_bd_bound(&chi01(-8, 8), &r("1"), 1e-6).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.bound, 9.0);
        assert!((rep.margin - 7.0).abs() < 1e-6);
        let z = check_bd_bound(&StepFn::zero(Interval::int(0, 1)), &r("1"), 1e-6).unwrap();
        assert!(z.passed);
        assert_eq!(z.margin, 0.0);
    }

    #[test]
    fn weak_type_unit_box() {
        let ts: Vec<Rat> = ["1/4", "1", "4"].iter().map(|s| r(s)).collect();
        let rep = check_weak_type(&chi01(-32, 32), &ts).unwrap();
        assert!(rep.passed);
        assert!((rep.measured["Mf_star@1"] - 1.0).abs() < 1e-5);
        let z = check_weak_type(&StepFn::zero(Interval::int(0, 1)), &ts).unwrap();
        assert!(z.passed);
    }

    #[test]
    fn poincare_unit_box() {
        let rep = check_poincare(&chi01(-4, 4), &r("1"), 1e-6).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.measured["lambda_N"], 3.0);
        // M = 1+x on [−1,0], 2−x on [1,2]: two unit-slope ramps
        assert!((rep.measured["dm_l2sq"] - 2.0).abs() < 1e-9);
        assert!((rep.measured["term2"] - 18.0).abs() < 1e-8);
        assert!(matches!(
            check_poincare(&chi01(-1, 2), &r("2"), 1e-6),
            Err(CheckError::MarginTooSmall { .. })
        ));
    }

    #[test]
    fn poincare_homogeneity() {
        let f = chi01(-4, 4);
        let a = check_poincare(&f, &r("1"), 1e-9).unwrap();
        let b = check_poincare(&f.scale(&r("3")), &r("1"), 1e-9).unwrap();
        assert!((b.measured["l2sq_f"] - 9.0 * a.measured["l2sq_f"]).abs() < 1e-12);
        assert!((b.measured["term2"] - 9.0 * a.measured["term2"]).abs() < 1e-6);
    }

    #[test]
    fn dyadic_set() {
        let f = dyadic_counterexample(1, &r("1")).unwrap();
        assert_eq!(f.variation(), r("6"));
        assert_eq!(f.breakpoints(), &[r("-1"), r("0"), r("1/2"), r("3/4"), r("1"), r("3/2")]);
        let g = dyadic_counterexample(20, &r("1")).unwrap();
        assert_eq!(g.variation(), r("44"));
        // geometric sum of the bump lengths
        assert_eq!(g.l1_norm(), r("1") + r("1") - Rat::pow2(-21));
    }

    #[test]
    fn counterexample_constants() {
        let (n, b) = counterexample_bound(&r("1/4"));
        assert_eq!(n, 4);
        assert_eq!(b, 13.0);
        assert!(matches!(
            check_counterexample(10, &r("1"), 1e-6),
            Err(CheckError::RadiusOutOfRange(_))
        ));
    }

    #[test]
    fn convergence_constant_function() {
        let f = StepFn::constant(Interval::int(0, 2), r("3"));
        let scales: Vec<Rat> = (1..4).map(|k| Rat::pow2(-k)).collect();
        let rep = check_convergence(&f, &scales).unwrap();
        assert!(rep.passed);
        assert!(rep.measured.iter().filter(|(k, _)| k.starts_with("l1_gap")).all(|(_, v)| v.abs() < 1e-12));
    }

    #[test]
    fn growth_zero_function() {
        let (rows, rep) = growth_table_1d(&StepFn::zero(Interval::int(0, 1)), &[r("1"), r("4")]).unwrap();
        assert!(rows.iter().all(|r| r.l1 == 0.0));
        assert!(rep.passed);
    }
}
