//! Vertex enumeration for sup-of-averages problems on step functions.
//!
//! For a query point `x` the average `(F(b) − F(a)) / (b − a)` over an
//! interval `[a, b] ∋ x` is a ratio of affine functions of `(a, b)` on every
//! cell where `a` and `b` stay inside fixed pieces. A linear-fractional
//! function with positive denominator attains its maximum over a polygon at
//! a vertex, so the supremum is found by enumerating the vertices of the
//! arrangement formed by the lines `a = edge`, `b = edge`, `a = x`, `b = x`
//! and `b − a = r`.
//!
//! Endpoints are described symbolically ([`End`]) so that the same candidate
//! list can be screened in binary64 and then re-evaluated exactly.

use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum End {
    Edge(usize),
    X,
    EdgePlusR(usize),
    EdgeMinusR(usize),
    XPlusR,
    XMinusR,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub a: End,
    pub b: End,
    pub value: f64,
    /// Bound on the rounding error of `value`; infinite when the interval is
    /// too short for binary64 to say anything useful.
    pub err: f64,
}

/// Binary64 view of a step function: piece edges, `|value|` per piece and
/// the antiderivative of `|f|` at every edge.
#[derive(Debug, Clone)]
pub(crate) struct Prepared64 {
    edges: Vec<f64>,
    weights: Vec<f64>,
    prefix: Vec<f64>,
    max_weight: f64,
}

const SLOP: f64 = 1e-12;

impl Prepared64 {
    /// `edges.len() == weights.len() + 1`; weights are taken in absolute value.
    pub fn new(edges: Vec<f64>, weights: Vec<f64>) -> Prepared64 {
        debug_assert_eq!(edges.len(), weights.len() + 1);
        let weights: Vec<f64> = weights.into_iter().map(f64::abs).collect();
        let mut prefix = Vec::with_capacity(edges.len());
        let mut acc = 0.0;
        prefix.push(0.0);
        for (k, w) in weights.iter().enumerate() {
            acc += w * (edges[k + 1] - edges[k]);
            prefix.push(acc);
        }
        let max_weight = weights.iter().cloned().fold(0.0, f64::max);
        Prepared64 {
            edges,
            weights,
            prefix,
            max_weight,
        }
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.max_weight == 0.0
    }

    fn scale(&self) -> f64 {
        self.lo().abs().max(self.hi().abs()).max(1.0)
    }

    fn antideriv(&self, t: f64) -> f64 {
        let n = self.weights.len();
        let k = self.edges.partition_point(|e| *e <= t).saturating_sub(1).min(n - 1);
        self.prefix[k] + self.weights[k] * (t - self.edges[k])
    }

    fn point(&self, end: End, x: f64, r: f64) -> f64 {
        match end {
            End::Edge(k) => self.edges[k],
            End::X => x,
            End::EdgePlusR(k) => self.edges[k] + r,
            End::EdgeMinusR(k) => self.edges[k] - r,
            End::XPlusR => x + r,
            End::XMinusR => x - r,
        }
    }

    fn antideriv_at(&self, end: End, t: f64) -> f64 {
        match end {
            End::Edge(k) => self.prefix[k],
            _ => self.antideriv(t),
        }
    }

    /// Range of edge indices with `lo <= edge <= hi`.
    fn edge_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let s = self.edges.partition_point(|e| *e < lo);
        let t = self.edges.partition_point(|e| *e <= hi);
        s..t.max(s)
    }

    fn candidate(&self, a: End, b: End, x: f64, r: f64) -> Option<Candidate> {
        let (pa, pb) = (self.point(a, x, r), self.point(b, x, r));
        let slop = SLOP * self.scale();
        if pa < self.lo() - slop || pb > self.hi() + slop || pa > x + slop || pb < x - slop {
            return None;
        }
        let len = pb - pa;
        if len < -slop || (r.is_finite() && len > r + slop * (1.0 + r)) {
            return None;
        }
        let (fa, fb) = (self.antideriv_at(a, pa), self.antideriv_at(b, pb));
        let eps = f64::EPSILON;
        let mass_err = 16.0 * eps * (fa.abs() + fb.abs() + self.max_weight * (pa.abs() + pb.abs() + r.min(1e300).abs()));
        let len_err = 16.0 * eps * (pa.abs() + pb.abs() + if r.is_finite() { r } else { 0.0 });
        if len <= 4.0 * len_err {
            return Some(Candidate {
                a,
                b,
                value: self.max_weight,
                err: f64::INFINITY,
            });
        }
        let value = (fb - fa) / len;
        let err = 2.0 * (mass_err + value.abs() * len_err) / len + 4.0 * eps * value.abs();
        Some(Candidate { a, b, value, err })
    }

    /// All vertex candidates for intervals `[a, b] ∋ x` with `0 < b − a ≤ r`
    /// (`r = ∞` for the unrestricted operator).
    pub fn candidates(&self, x: f64, r: f64, out: &mut Vec<Candidate>) {
        out.clear();
        let slop = SLOP * self.scale();
        let left = self.edge_range(if r.is_finite() { x - r - slop } else { f64::NEG_INFINITY }, x + slop);
        let right = self.edge_range(x - slop, if r.is_finite() { x + r + slop } else { f64::INFINITY });
        let a_ends = left.clone().map(End::Edge).chain(std::iter::once(End::X));
        let b_ends: Vec<End> = right.clone().map(End::Edge).chain(std::iter::once(End::X)).collect();
        for a in a_ends {
            for &b in &b_ends {
                if let Some(c) = self.candidate(a, b, x, r) {
                    out.push(c);
                }
            }
        }
        if r.is_finite() {
            for k in left {
                out.extend(self.candidate(End::Edge(k), End::EdgePlusR(k), x, r));
            }
            out.extend(self.candidate(End::X, End::XPlusR, x, r));
            for k in right {
                out.extend(self.candidate(End::EdgeMinusR(k), End::Edge(k), x, r));
            }
            out.extend(self.candidate(End::XMinusR, End::X, x, r));
        }
    }

    /// Binary64 supremum of averages over intervals containing `x` of length
    /// at most `r`. Used where exactness is not required (grid operators).
    pub fn sup_average(&self, x: f64, r: f64, buf: &mut Vec<Candidate>) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.candidates(x, r, buf);
        let point_value = self.point_value(x);
        buf.iter()
            .filter(|c| c.err.is_finite())
            .map(|c| c.value)
            .fold(point_value, f64::max)
    }

    /// Larger adjacent piece weight at `x` (the shrinking-interval limit).
    pub fn point_value(&self, x: f64) -> f64 {
        let n = self.weights.len();
        let k = self.edges.partition_point(|e| *e <= x).saturating_sub(1).min(n - 1);
        let mut v = self.weights[k];
        if k > 0 && self.edges[k] == x {
            v = v.max(self.weights[k - 1]);
        }
        v
    }

    /// Supremum of averages over intervals of length exactly `len` containing `x`.
    pub fn sup_fixed_length(&self, x: f64, len: f64) -> f64 {
        let (lo, hi) = (self.lo(), self.hi());
        if len > hi - lo + SLOP * self.scale() || self.is_zero() {
            return 0.0;
        }
        let amin = (x - len).max(lo);
        let amax = x.min(hi - len);
        if amin > amax {
            return 0.0;
        }
        let avg = |a: f64| (self.antideriv(a + len) - self.antideriv(a)) / len;
        let mut best = avg(amin).max(avg(amax));
        for k in self.edge_range(amin, amax) {
            best = best.max(avg(self.edges[k]));
        }
        for k in self.edge_range(amin + len, amax + len) {
            best = best.max(avg(self.edges[k] - len));
        }
        best
    }
}

/// Exact counterpart of [`Prepared64`].
#[derive(Debug, Clone)]
pub(crate) struct PreparedRat {
    edges: Vec<Rat>,
    weights: Vec<Rat>,
    prefix: Vec<Rat>,
}

impl PreparedRat {
    pub fn new(edges: Vec<Rat>, weights: Vec<Rat>) -> PreparedRat {
        let weights: Vec<Rat> = weights.into_iter().map(|w| w.abs()).collect();
        let mut prefix = Vec::with_capacity(edges.len());
        let mut acc = Rat::zero();
        prefix.push(acc.clone());
        for (k, w) in weights.iter().enumerate() {
            acc += w * &(&edges[k + 1] - &edges[k]);
            prefix.push(acc.clone());
        }
        PreparedRat { edges, weights, prefix }
    }

    pub fn to_f64(&self) -> Prepared64 {
        Prepared64::new(
            self.edges.iter().map(Rat::to_f64).collect(),
            self.weights.iter().map(Rat::to_f64).collect(),
        )
    }

    pub fn lo(&self) -> &Rat {
        &self.edges[0]
    }

    pub fn hi(&self) -> &Rat {
        self.edges.last().unwrap()
    }

    pub fn point(&self, end: End, x: &Rat, r: Option<&Rat>) -> Option<Rat> {
        Some(match end {
            End::Edge(k) => self.edges[k].clone(),
            End::X => x.clone(),
            End::EdgePlusR(k) => &self.edges[k] + r?,
            End::EdgeMinusR(k) => &self.edges[k] - r?,
            End::XPlusR => x + r?,
            End::XMinusR => x - r?,
        })
    }

    pub fn antideriv(&self, t: &Rat) -> Rat {
        let n = self.weights.len();
        let k = self.edges.partition_point(|e| e <= t).saturating_sub(1).min(n - 1);
        &self.prefix[k] + &(&self.weights[k] * &(t - &self.edges[k]))
    }

    pub fn antideriv_at(&self, end: End, t: &Rat) -> Rat {
        match end {
            End::Edge(k) => self.prefix[k].clone(),
            _ => self.antideriv(t),
        }
    }

    /// Exact average over `[a, b]` if the candidate is feasible.
    pub fn evaluate(&self, a: End, b: End, x: &Rat, r: Option<&Rat>) -> Option<(Rat, Rat, Rat)> {
        let pa = self.point(a, x, r)?;
        let pb = self.point(b, x, r)?;
        if &pa < self.lo() || &pb > self.hi() || &pa > x || &pb < x {
            return None;
        }
        let len = &pb - &pa;
        if !len.is_positive() || r.is_some_and(|r| &len > r) {
            return None;
        }
        let mass = self.antideriv_at(b, &pb) - self.antideriv_at(a, &pa);
        Some((mass / len, pa, pb))
    }

    /// Larger adjacent weight at `x`.
    pub fn point_value(&self, x: &Rat) -> Rat {
        let n = self.weights.len();
        let k = self.edges.partition_point(|e| e <= x).saturating_sub(1).min(n - 1);
        let mut v = self.weights[k].clone();
        if k > 0 && &self.edges[k] == x {
            v = v.max(self.weights[k - 1].clone());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi01() -> Prepared64 {
        Prepared64::new(vec![-8.0, 0.0, 1.0, 8.0], vec![0.0, 1.0, 0.0])
    }

    #[test]
    fn float_sup_matches_closed_form() {
        let p = chi01();
        let mut buf = Vec::new();
        assert!((p.sup_average(1.5, 1.0, &mut buf) - 0.5).abs() < 1e-15);
        assert!((p.sup_average(3.0, f64::INFINITY, &mut buf) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.sup_average(3.0, 1.0, &mut buf), 0.0);
        assert_eq!(p.sup_average(0.5, 0.25, &mut buf), 1.0);
    }

    #[test]
    fn fixed_length_windows() {
        let p = chi01();
        assert!((p.sup_fixed_length(1.5, 1.0) - 0.5).abs() < 1e-15);
        assert!((p.sup_fixed_length(0.5, 2.0) - 0.5).abs() < 1e-15);
        assert_eq!(p.sup_fixed_length(0.5, 1.0), 1.0);
        assert_eq!(p.sup_fixed_length(0.5, 20.0), 0.0);
    }

    #[test]
    fn exact_evaluation_checks_feasibility() {
        let p = PreparedRat::new(
            vec![Rat::from_int(-8), Rat::zero(), Rat::one(), Rat::from_int(8)],
            vec![Rat::zero(), Rat::one(), Rat::zero()],
        );
        let x = Rat::new(3, 2);
        let r = Rat::one();
        let (v, a, b) = p.evaluate(End::XMinusR, End::X, &x, Some(&r)).unwrap();
        assert_eq!((v, a, b), (Rat::new(1, 2), Rat::new(1, 2), x.clone()));
        // [0, 3/2] is longer than r
        assert!(p.evaluate(End::Edge(1), End::X, &x, Some(&r)).is_none());
        assert_eq!(p.point_value(&Rat::one()), Rat::one());
    }
}
