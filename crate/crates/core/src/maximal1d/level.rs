//! Level sets of the unrestricted maximal function by a single sweep.
//!
//! With `G' = |f| − s`, a point `x` lies in `{Mf > s}` iff some interval
//! `[a, b] ∋ x` inside the domain has `G(b) > G(a)`, i.e. iff
//! `max_{b ≥ x} G(b) > min_{a ≤ x} G(a)`. On each piece `G` is linear, so
//! the set is read off from prefix minima and suffix maxima at the edges.

use crate::step::StepFn;

/// `λ{ x ∈ I : Mf(x) > s }` for the unrestricted operator on the domain `I`.
pub fn unrestricted_distribution(f: &StepFn, s: f64) -> f64 {
    let edges: Vec<f64> = f.edges().map(|e| e.to_f64()).collect();
    let slopes: Vec<f64> = f.values().iter().map(|v| v.abs().to_f64() - s).collect();
    distribution_from(&edges, &slopes)
}

fn distribution_from(edges: &[f64], slopes: &[f64]) -> f64 {
    let m = slopes.len();
    let mut g = vec![0.0; m + 1];
    for i in 0..m {
        g[i + 1] = g[i] + slopes[i] * (edges[i + 1] - edges[i]);
    }
    let mut pre = g.clone();
    for i in 1..=m {
        pre[i] = pre[i - 1].min(g[i]);
    }
    let mut suf = g.clone();
    for i in (0..m).rev() {
        suf[i] = suf[i + 1].max(g[i]);
    }
    let mut total = 0.0;
    for i in 0..m {
        let (len, c) = (edges[i + 1] - edges[i], slopes[i]);
        let (pl, sr) = (pre[i], suf[i + 1]);
        if c >= 0.0 {
            // min on the left is pl, max on the right is sr throughout the piece
            if sr > pl {
                total += len;
            }
        } else {
            // G falls from g[i] to g[i+1]: {G > pl} is a left part and
            // {G < sr} a right part of the piece
            let left = ((g[i] - pl) / -c).clamp(0.0, len);
            let right = ((sr - g[i + 1]) / -c).clamp(0.0, len);
            total += (left + right).min(len);
        }
    }
    total
}

/// `(Mf)*(t) = inf{ s ≥ 0 : λ{Mf > s} ≤ t }` for the unrestricted operator.
pub fn unrestricted_rearrangement(f: &StepFn, t: f64) -> f64 {
    let edges: Vec<f64> = f.edges().map(|e| e.to_f64()).collect();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs().to_f64()).collect();
    let lambda = |s: f64| {
        let slopes: Vec<f64> = abs.iter().map(|a| a - s).collect();
        distribution_from(&edges, &slopes)
    };
    if lambda(0.0) <= t {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, abs.iter().fold(0.0f64, |a, b| a.max(*b)));
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if lambda(mid) <= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximal1d::{maximal_eval, Radius};
    use crate::rat::Rat;
    use crate::step::Interval;
    use proptest::prelude::*;

    fn chi01(lo: i64, hi: i64) -> StepFn {
        StepFn::indicator(Interval::int(lo, hi), Rat::zero(), Rat::one()).unwrap()
    }

    #[test]
    fn unit_box_levels() {
        // M χ = 1 on [0,1], 1/(1+d) at distance d; {M > s} has measure 2/s − 1
        let f = chi01(-64, 64);
        for s in [0.05, 0.1, 0.25, 0.5, 0.9] {
            assert!((unrestricted_distribution(&f, s) - (2.0 / s - 1.0)).abs() < 1e-9, "s={s}");
        }
        assert_eq!(unrestricted_distribution(&f, 1.0), 0.0);
        for t in [1.0, 3.0, 10.0, 50.0] {
            assert!((unrestricted_rearrangement(&f, t) - 2.0 / (t + 1.0)).abs() < 1e-12);
        }
        assert!((unrestricted_rearrangement(&f, 0.5) - 1.0).abs() < 1e-12);
        assert_eq!(unrestricted_rearrangement(&f, 200.0), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn matches_pointwise_evaluation(
            vals in proptest::collection::vec(-8i64..8, 1..6),
            s in 1u32..40,
        ) {
            let n = vals.len() as i64;
            let f = StepFn::new(
                Interval::int(0, n),
                (1..n).map(Rat::from_int).collect(),
                vals.iter().map(|v| Rat::new(*v, 4)).collect(),
            ).unwrap().extend_zero(Interval::int(-4, n + 4)).unwrap();
            let s = s as f64 / 20.0;
            // midpoint rule on a fine grid, exact M at each sample
            let k = 512;
            let width = (n + 8) as f64 / k as f64;
            let hits = (0..k)
                .filter(|i| {
                    let x = Rat::new(-8 * k as i64 + (2 * i + 1) as i64 * (n + 8), 2 * k as i64);
                    maximal_eval(&f, &x, &Radius::Infinite).unwrap().value.to_f64() > s
                })
                .count();
            let sampled = hits as f64 * width;
            // each boundary point of the level set costs at most one cell
            let bound = 2.0 * (f.num_pieces() as f64 + 1.0) * width;
            prop_assert!((unrestricted_distribution(&f, s) - sampled).abs() <= bound);
        }
    }
}
