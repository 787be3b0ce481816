//! Claim registry, seeded random families and the verification suites.

use crate::grid2d::{self, GridError, GridFn2D, ResolutionPolicy};
use crate::maximal1d::{self, CheckError, Radius};
use crate::orlicz::{self, OrliczError, OrliczParams};
use crate::rat::Rat;
use crate::report::CheckReport;
use crate::step::{Interval, StepFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bundled claim manifest (see `claims.toml` at the crate root).
pub const MANIFEST: &str = include_str!("../claims.toml");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimSpec {
    pub claim_id: &'static str,
    pub anchor: &'static str,
    /// Formula checked; must match the manifest verbatim.
    pub statement: &'static str,
    pub generator: &'static str,
    pub tolerance: f64,
    pub bound: &'static str,
}

pub const CLAIMS: &[ClaimSpec] = &[
    ClaimSpec {
        claim_id: "remark-log",
        anchor: "unit box, local maximal function",
        statement: "‖M_R χ_[0,1]‖₁ = 1 + 1/R + 2 log R and |DM_R χ_[0,1]|(ℝ) = 2 for R ≥ 1",
        generator: "χ_[0,1] on [−12,12], R ∈ {1,2,4,8}",
        tolerance: 1e-6,
        bound: "1 + 1/R + 2 ln R",
    },
    ClaimSpec {
        claim_id: "bd-l1",
        anchor: "1D local L¹ and variation bound",
        statement: "‖M_R f‖₁ ≤ 3(1+2log⁺R)‖f‖₁ + 3|D|f||(I) and ‖DM_R f‖₁ ≤ |D|f||(I)",
        generator: "χ_[0,1] and 200 seeded step functions (≤ 20 pieces), R ∈ {1/4, 1, 4}",
        tolerance: 1e-6,
        bound: "3(1+2log⁺R)‖f‖₁ + 3V(|f|)",
    },
    ClaimSpec {
        claim_id: "weak-type",
        anchor: "weak type (1,1)",
        statement: "(Mf)*(t) ≤ 2‖f‖₁/t",
        generator: "χ_[0,1] on a 50-point t-grid and 50 seeded step functions at t ∈ {1/4,1,4}·‖f‖₁",
        tolerance: 1e-6,
        bound: "2‖f‖₁/t",
    },
    ClaimSpec {
        claim_id: "poincare",
        anchor: "Poincaré-type inequality",
        statement: "‖f‖₂² ≤ min{ (3(1+2log⁺R))²/λ(N(f,R)) ‖f‖²_BV + (λ(N(f,R))²/2)‖DM_R f‖₂², λ(N(f,R))² ‖DM_R f‖₂² }",
        generator: "χ_[0,1] with R = 1 and 50 seeded compactly supported step functions, R ∈ {1/2, 2}",
        tolerance: 1e-6,
        bound: "min{term1, term2}",
    },
    ClaimSpec {
        claim_id: "counterexample",
        anchor: "dyadic set outside BV",
        statement: "|DM_R f|(ℝ) ≤ 2 + 2(N+1) + Σ_{n>N} 2^{−n+2}/R with 2^{−N+1} < R",
        generator: "dyadic set truncated at n_max ∈ {10, 20}, R = 1/4",
        tolerance: 1e-3,
        bound: "2 + 2(N+1) + 2^{−N+2}/R",
    },
    ClaimSpec {
        claim_id: "charact-convergence",
        anchor: "differentiation and semicontinuity",
        statement: "‖M_{a_n} f − f‖₁ → 0 and |Df|(I) ≤ liminf_n |DM_{a_n} f|(I)",
        generator: "χ_[0,1] and 20 seeded step functions with unit-spaced breakpoints, a_k = 2^{−k}, k = 1..8",
        tolerance: 1e-9,
        bound: "non-increasing, final < 0.05‖f‖_BV",
    },
    ClaimSpec {
        claim_id: "convergence-2d",
        anchor: "differentiation by rectangles",
        statement: "‖S_{a_n} g − g‖₁ non-increasing as a_n ↓ 0",
        generator: "χ_{[0,1/8]²} on (−1/2,1/2)² at 64², a = 2^{−1}..2^{−4}",
        tolerance: 1e-9,
        bound: "non-increasing",
    },
    ClaimSpec {
        claim_id: "blowup",
        anchor: "strong and directional maximal functions unbounded on BV",
        statement: "|DM_R^1 f_δ|(ℝ²) = Θ(δ log 1/δ) while ‖f_δ‖_BV = δ² + 4δ",
        generator: "f_δ = χ_{[0,δ]²} on (−1/2,1/2)², δ = 2^{−3}..2^{−6}, R = 4, 8 cells per δ",
        tolerance: 0.2,
        bound: "tv/(δ ln 1/δ) within 20% of the closed form; tv/‖f_δ‖_BV increasing",
    },
    ClaimSpec {
        claim_id: "growth-1d",
        anchor: "logarithmic growth in R, d = 1",
        statement: "∫ M_R f ≤ c(‖f‖_BV + ‖f‖₁ log⁺R)",
        generator: "χ_[0,1] on [−80,80], R ∈ {1,4,16,64}",
        tolerance: 10.0,
        bound: "max/min of ‖M_R f‖₁/(1+log⁺R) < 10",
    },
    ClaimSpec {
        claim_id: "growth-2d",
        anchor: "logarithmic growth in R, d = 2",
        statement: "‖S_R f‖₁ ≤ c(‖f‖_BV + (log⁺R)^d ‖f‖₁)",
        generator: "two bumps on [−32,32]² at 256², R ∈ {1,4,16,64}",
        tolerance: 10.0,
        bound: "max/min of ‖S_R f‖₁/(1+(log⁺R)²) < 10",
    },
    ClaimSpec {
        claim_id: "orlicz-norm",
        anchor: "Luxemburg norm",
        statement: "‖g‖ = inf{ t > 0 : ∫ (|g|/t)(log⁺(|g|/t))^r ≤ 1 }",
        generator: "g ≡ 1 on measure 1, r = 1",
        tolerance: 1e-4,
        bound: "1/u with u ln u = 1",
    },
    ClaimSpec {
        claim_id: "orlicz-embedding",
        anchor: "embedding into L(log⁺L)^r",
        statement: "‖g‖_{L(log⁺L)^r} ≤ (r(d−1))^{r(d−1)/d} ‖g‖_{L^{d/(d−1)}}",
        generator: "100 seeded grid functions, r ∈ {1, 2}, d = 2",
        tolerance: 1e-8,
        bound: "r^{r/2}‖g‖₂",
    },
];

pub fn claim(id: &str) -> Option<&'static ClaimSpec> {
    CLAIMS.iter().find(|c| c.claim_id == id)
}

pub const SUITES: &[&str] = &[
    "remark-log",
    "bd",
    "weak-type",
    "poincare",
    "counterexample",
    "charact",
    "blowup",
    "growth",
    "orlicz",
    "all",
];

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite `{0}`; expected one of {SUITES:?}")]
    UnknownSuite(String),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error("cannot replay: {0}")]
    Replay(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub seed: u64,
    pub version: String,
    pub reports: Vec<CheckReport>,
    /// Not serialized, so that repeated runs produce identical JSON.
    #[serde(skip)]
    pub wall_time_ms: u128,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.reports.iter().filter(|r| !r.passed)
    }
}

/// Parameters of a seeded family of step functions. Breakpoints are drawn
/// from the lattice `domain.lo + breakpoint_step·ℤ` and values from
/// `value_step·ℤ` inside `value_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFamily {
    pub max_pieces: usize,
    pub value_range: (Rat, Rat),
    pub domain: Interval,
    pub breakpoint_step: Rat,
    pub value_step: Rat,
}

impl RandomFamily {
    pub fn new(max_pieces: usize, value_range: (Rat, Rat), domain: Interval) -> RandomFamily {
        RandomFamily {
            max_pieces,
            value_range,
            domain,
            breakpoint_step: Rat::new(1, 32),
            value_step: Rat::new(1, 8),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> StepFn {
        let slots = (self.domain.length() / &self.breakpoint_step).to_f64().floor() as usize;
        let interior = slots.saturating_sub(1);
        let pieces = rng.gen_range(1..=self.max_pieces.max(1)).min(interior + 1);
        let mut idx: Vec<usize> = rand::seq::index::sample(rng, interior, pieces - 1).into_vec();
        idx.sort_unstable();
        let bps: Vec<Rat> = idx
            .into_iter()
            .map(|k| self.domain.lo() + &(&self.breakpoint_step * &Rat::from_int(k as i64 + 1)))
            .collect();
        let lo = (&self.value_range.0 / &self.value_step).to_f64().ceil() as i64;
        let hi = (&self.value_range.1 / &self.value_step).to_f64().floor() as i64;
        let values: Vec<Rat> = (0..pieces)
            .map(|_| &self.value_step * &Rat::from_int(rng.gen_range(lo..=hi)))
            .collect();
        StepFn::new(self.domain.clone(), bps, values).expect("lattice breakpoints are valid")
    }
}

/// Reproducible dyadic step function with at most `max_pieces` pieces.
pub fn random_stepfn(seed: u64, max_pieces: usize, value_range: (Rat, Rat), domain: &Interval) -> StepFn {
    let fam = RandomFamily::new(max_pieces, value_range, domain.clone());
    fam.sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// One generator per (suite, instance) so suites do not share streams.
pub fn instance_rng(seed: u64, suite: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = suite.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    rng.set_stream(tag ^ index);
    rng
}

fn rat(s: &str) -> Rat {
    s.parse().expect("literal")
}

fn unit_box(lo: i64, hi: i64) -> StepFn {
    StepFn::indicator(Interval::int(lo, hi), Rat::zero(), Rat::one()).expect("unit box")
}

fn unit_box_l1(r: f64) -> f64 {
    1.0 + 1.0 / r + 2.0 * r.ln()
}

fn suite_remark_log() -> Result<Vec<CheckReport>, VerifyError> {
    let f = unit_box(-12, 12);
    let mut out = Vec::new();
    for r in [1i64, 2, 4, 8] {
        let p = maximal1d::maximal_profile(&f, &Radius::Finite(Rat::from_int(r)), 1e-7).map_err(CheckError::from)?;
        let want = unit_box_l1(r as f64);
        let (e1, e2) = ((p.l1_estimate - want).abs(), (p.variation_lower - 2.0).abs());
        let mut rep = CheckReport::new("remark-log");
        rep.measure("R", r as f64)
            .measure("l1_MRf", p.l1_estimate)
            .measure("l1_closed_form", want)
            .measure("variation_MRf", p.variation_lower)
            .measure("nodes", p.nodes.len() as f64)
            .headline(e1.max(e2), 1e-6)
            .require(e1 < 1e-6 && e2 < 1e-6)
            .tag("adaptive-profile")
            .tag("closed-form");
        out.push(rep);
    }
    Ok(out)
}

/// Seeded functions on `[0, 8]`, zero-extended to `[−6, 14]`.
pub fn bd_family() -> RandomFamily {
    RandomFamily::new(20, (rat("-2"), rat("2")), Interval::int(0, 8))
}

fn suite_bd(seed: u64) -> Result<Vec<CheckReport>, VerifyError> {
    let mut out = vec![maximal1d::check_bd_bound(&unit_box(-8, 8), &Rat::one(), 1e-6)?];
    let fam = bd_family();
    for k in 0..200 {
        let f = fam.sample(&mut instance_rng(seed, "bd", k)).extend_zero(Interval::int(-6, 14)).expect("window");
        for r in ["1/4", "1", "4"] {
            out.push(maximal1d::check_bd_bound(&f, &rat(r), 1e-6)?);
        }
    }
    Ok(out)
}

fn suite_weak(seed: u64) -> Result<Vec<CheckReport>, VerifyError> {
    let ts: Vec<Rat> = (1..=50).map(|k| Rat::new(k, 2)).collect();
    let mut out = vec![maximal1d::check_weak_type(&unit_box(-64, 64), &ts)?];
    let fam = RandomFamily::new(10, (rat("-2"), rat("2")), Interval::int(0, 4));
    for k in 0..50 {
        let f = fam.sample(&mut instance_rng(seed, "weak-type", k)).extend_zero(Interval::int(-40, 44)).expect("window");
        let l1 = f.l1_norm();
        if l1.is_zero() {
            out.push(maximal1d::check_weak_type(&f, &[Rat::one()])?);
            continue;
        }
        let ts: Vec<Rat> = ["1/4", "1", "4"].iter().map(|c| &rat(c) * &l1).collect();
        out.push(maximal1d::check_weak_type(&f, &ts)?);
    }
    Ok(out)
}

fn suite_poincare(seed: u64) -> Result<Vec<CheckReport>, VerifyError> {
    let mut out = vec![maximal1d::check_poincare(&unit_box(-4, 4), &Rat::one(), 1e-6)?];
    let fam = RandomFamily::new(10, (rat("-2"), rat("2")), Interval::int(0, 4));
    let mut k = 0;
    let mut made = 0;
    while made < 50 {
        let f = fam.sample(&mut instance_rng(seed, "poincare", k)).extend_zero(Interval::int(-4, 8)).expect("window");
        k += 1;
        if f.is_zero() {
            continue;
        }
        for r in ["1/2", "2"] {
            out.push(maximal1d::check_poincare(&f, &rat(r), 1e-6)?);
        }
        made += 1;
    }
    Ok(out)
}

fn suite_counterexample() -> Result<Vec<CheckReport>, VerifyError> {
    Ok(vec![maximal1d::check_counterexample(20, &rat("1/4"), 1e-3)?])
}

/// Unit-spaced breakpoints on `[0, 10]`, zero-extended to `[−2, 12]`.
pub fn charact_family() -> RandomFamily {
    RandomFamily {
        breakpoint_step: Rat::one(),
        ..RandomFamily::new(10, (rat("-2"), rat("2")), Interval::int(0, 10))
    }
}

pub fn dyadic_scales() -> Vec<Rat> {
    (1..=8).map(|k| Rat::pow2(-k)).collect()
}

fn suite_charact(seed: u64) -> Result<Vec<CheckReport>, VerifyError> {
    let scales = dyadic_scales();
    let mut out = vec![maximal1d::check_convergence(&unit_box(-2, 3), &scales)?];
    let fam = charact_family();
    for k in 0..20 {
        let f = fam.sample(&mut instance_rng(seed, "charact", k)).extend_zero(Interval::int(-2, 12)).expect("window");
        out.push(maximal1d::check_convergence(&f, &scales)?);
    }
    let g = grid2d::delta_box_grid(0.125, ResolutionPolicy::default())?;
    out.push(grid2d::convergence_2d(&g, &[0.5, 0.25, 0.125, 0.0625])?);
    Ok(out)
}

pub fn blowup_deltas() -> Vec<f64> {
    (3..=6).map(|k| 2f64.powi(-k)).collect()
}

fn suite_blowup() -> Result<Vec<CheckReport>, VerifyError> {
    let (_, rep) = grid2d::blowup_experiment(&blowup_deltas(), 4.0, ResolutionPolicy::default())?;
    Ok(vec![rep])
}

/// Value 1 on `[0,1]²` and 2 on `[3,5]×[2,3]`, on `[−32,32]²` with 256² cells.
pub fn two_bump_grid() -> GridFn2D {
    GridFn2D::constant([-32.0, 32.0, -32.0, 32.0], 256, 256, 0.0)
        .expect("grid")
        .with_box(0.0, 1.0, 0.0, 1.0, 1.0)
        .with_box(3.0, 5.0, 2.0, 3.0, 2.0)
}

fn suite_growth() -> Result<Vec<CheckReport>, VerifyError> {
    let rs: Vec<Rat> = [1, 4, 16, 64].iter().map(|r| Rat::from_int(*r)).collect();
    let (_, r1) = maximal1d::growth_table_1d(&unit_box(-80, 80), &rs)?;
    let (_, r2) = grid2d::growth_table_2d(&two_bump_grid(), &[1.0, 4.0, 16.0, 64.0])?;
    Ok(vec![r1, r2])
}

/// Seeded grid with dyadic values in `[−4, 4]` on a random rectangle.
pub fn random_grid(rng: &mut impl Rng) -> GridFn2D {
    let nx = rng.gen_range(2..=12);
    let ny = rng.gen_range(2..=12);
    let w = rng.gen_range(1..=16) as f64 / 4.0;
    let h = rng.gen_range(1..=16) as f64 / 4.0;
    let vals = (0..nx * ny).map(|_| rng.gen_range(-32..=32) as f64 / 8.0).collect();
    GridFn2D::new([0.0, w, 0.0, h], nx, ny, vals).expect("grid")
}

fn suite_orlicz(seed: u64) -> Result<Vec<CheckReport>, VerifyError> {
    let one = StepFn::constant(Interval::int(0, 1), Rat::one());
    let n = orlicz::luxemburg_norm(&one, 1.0, 1e-12)?;
    // root of u ln u = 1 by Newton's method
    let mut u = 1.7f64;
    for _ in 0..50 {
        u -= (u * u.ln() - 1.0) / (u.ln() + 1.0);
    }
    let mut rep = CheckReport::new("orlicz-norm");
    rep.measure("norm", n)
        .measure("oracle", 1.0 / u)
        .headline((n - 1.0 / u).abs(), 1e-4)
        .require((n - 1.0 / u).abs() < 1e-4)
        .tag("bisection");
    let mut out = vec![rep];
    for k in 0..100 {
        let g = random_grid(&mut instance_rng(seed, "orlicz", k));
        for r in [1.0, 2.0] {
            out.push(orlicz::check_embedding(&g, OrliczParams { r, d: 2 }, 1e-8)?);
        }
    }
    Ok(out)
}

/// Runs a named suite; output depends only on `(suite, seed)`.
pub fn run_suite(suite: &str, seed: u64) -> Result<SuiteResult, VerifyError> {
    let start = std::time::Instant::now();
    let reports = match suite {
        "remark-log" => suite_remark_log()?,
        "bd" => suite_bd(seed)?,
        "weak-type" => suite_weak(seed)?,
        "poincare" => suite_poincare(seed)?,
        "counterexample" => suite_counterexample()?,
        "charact" => suite_charact(seed)?,
        "blowup" => suite_blowup()?,
        "growth" => suite_growth()?,
        "orlicz" => suite_orlicz(seed)?,
        "all" => {
            let mut all = Vec::new();
            for s in SUITES.iter().filter(|s| **s != "all") {
                all.extend(run_suite(s, seed)?.reports);
            }
            all
        }
        other => return Err(VerifyError::UnknownSuite(other.to_string())),
    };
    Ok(SuiteResult {
        suite: suite.to_string(),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        reports,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

fn field<T: serde::de::DeserializeOwned>(v: &serde_json::Value, path: &[&str]) -> Result<T, VerifyError> {
    let mut cur = v;
    for p in path {
        cur = cur.get(p).ok_or_else(|| VerifyError::Replay(format!("missing field `{}`", path.join("."))))?;
    }
    serde_json::from_value(cur.clone()).map_err(|e| VerifyError::Replay(format!("{}: {e}", path.join("."))))
}

/// Re-runs the check recorded in a failing report from its embedded instance.
pub fn replay(report: &CheckReport) -> Result<CheckReport, VerifyError> {
    let inst = report
        .instance
        .as_ref()
        .ok_or_else(|| VerifyError::Replay("report carries no instance".into()))?;
    Ok(match report.claim_id.as_str() {
        "bd-l1" => maximal1d::check_bd_bound(&field(inst, &["f"])?, &field(inst, &["params", "R"])?, field(inst, &["params", "tol"])?)?,
        "poincare" => maximal1d::check_poincare(&field(inst, &["f"])?, &field(inst, &["params", "R"])?, field(inst, &["params", "tol"])?)?,
        "weak-type" => maximal1d::check_weak_type(&field(inst, &["f"])?, &field::<Vec<Rat>>(inst, &["params", "thresholds"])?)?,
        "charact-convergence" => {
            maximal1d::check_convergence(&field(inst, &["f"])?, &field::<Vec<Rat>>(inst, &["params", "scales"])?)?
        }
        "counterexample" => maximal1d::check_counterexample(field(inst, &["n_max"])?, &field(inst, &["R"])?, field(inst, &["tol"])?)?,
        "orlicz-embedding" => orlicz::check_embedding(
            &field(inst, &["g"])?,
            OrliczParams { r: field(inst, &["params", "r"])?, d: field(inst, &["params", "d"])? },
            field(inst, &["params", "tol"])?,
        )?,
        other => return Err(VerifyError::Replay(format!("claim `{other}` has no replayable instance"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_matches_manifest() {
        let manifest: toml::Table = MANIFEST.parse().expect("manifest parses");
        let mut seen = std::collections::HashSet::new();
        for c in CLAIMS {
            assert!(seen.insert(c.claim_id), "duplicate id {}", c.claim_id);
            assert!(c.tolerance > 0.0);
            assert!(!c.statement.is_empty());
            let entry = manifest.get(c.claim_id).unwrap_or_else(|| panic!("{} missing", c.claim_id));
            assert_eq!(entry["statement"].as_str(), Some(c.statement), "{}", c.claim_id);
            assert_eq!(entry["anchor"].as_str(), Some(c.anchor), "{}", c.claim_id);
        }
        assert_eq!(manifest.len(), CLAIMS.len());
    }

    #[test]
    fn random_functions_are_reproducible() {
        let dom = Interval::int(0, 4);
        let a = random_stepfn(9, 7, (rat("-1"), rat("1")), &dom);
        let b = random_stepfn(9, 7, (rat("-1"), rat("1")), &dom);
        assert_eq!(a, b);
        assert_eq!(random_stepfn(1, 1, (rat("-1"), rat("1")), &dom).breakpoints().len(), 0);
        for s in 0..200 {
            let f = random_stepfn(s, 6, (rat("-2"), rat("2")), &dom);
            assert!(f.num_pieces() <= 6);
            assert!(f.values().iter().all(|v| v.abs() <= rat("2") && (v * &rat("8")).is_integer()));
            assert!(f.breakpoints().iter().all(|b| (b * &rat("32")).is_integer()));
        }
    }

    #[test]
    fn streams_differ_between_suites() {
        let f = charact_family();
        let a = f.sample(&mut instance_rng(7, "charact", 0));
        let b = f.sample(&mut instance_rng(7, "bd", 0));
        let c = f.sample(&mut instance_rng(7, "charact", 1));
        assert!(a != b || a != c);
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite("nope", 1), Err(VerifyError::UnknownSuite(_))));
    }

    #[test]
    fn remark_log_suite() {
        let r = run_suite("remark-log", 3).unwrap();
        assert_eq!(r.reports.len(), 4);
        assert!(r.passed());
        assert!(r.reports.iter().all(|c| claim(&c.claim_id).is_some()));
    }

    #[test]
    fn replay_round_trip() {
        let f = unit_box(-8, 8);
        let mut rep = maximal1d::check_bd_bound(&f, &Rat::one(), 1e-6).unwrap();
        rep.instance = Some(serde_json::json!({ "f": f, "params": { "R": Rat::one(), "tol": 1e-6 } }));
        let again = replay(&rep).unwrap();
        assert_eq!(again.measured, rep.measured);
        assert!(replay(&CheckReport::new("bd-l1")).is_err());
    }
}
