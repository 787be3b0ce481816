//! Directional, iterated, strong and square maximal operators on grids.
//!
//! All values are taken at cell centers. Directional passes lift each grid
//! line to an exact step function and use the exact 1D evaluator, rounding
//! once on store. Rectangle and square operators sweep over every vertical
//! window of whole rows, collapse it to its column averages and use the
//! binary64 instance of the same vertex enumeration.

use super::GridFn2D;
use crate::maximal1d::engine::Prepared64;
use crate::maximal1d::{MaximalOperator, Radius};
use crate::rat::Rat;
use crate::step::{Interval, StepFn};
use rayon::prelude::*;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    /// Segments parallel to the x axis.
    X,
    /// Segments parallel to the y axis.
    Y,
}

impl Axis {
    pub fn from_index(k: u8) -> Option<Axis> {
        match k {
            1 => Some(Axis::X),
            2 => Some(Axis::Y),
            _ => None,
        }
    }
}

fn exact(v: f64) -> Rat {
    Rat::from_f64(v).expect("grid values are finite")
}

/// Exact `M_T` of a normalized line at the given centers.
fn line_maximal(edges: &[Rat], values: &[Rat], centers: &[Rat], radius: &Radius) -> Vec<Rat> {
    let domain = Interval::new(edges[0].clone(), edges[edges.len() - 1].clone()).expect("ordered edges");
    let f = StepFn::new(domain, edges[1..edges.len() - 1].to_vec(), values.to_vec()).expect("valid line");
    let op = MaximalOperator::new(&f);
    centers
        .iter()
        .map(|x| op.eval(x, radius).expect("center inside domain").value)
        .collect()
}

/// `M_T^v g` for `v = e₁` or `e₂`; `t` may be `f64::INFINITY`.
pub fn directional_maximal(g: &GridFn2D, axis: Axis, t: f64) -> GridFn2D {
    assert!(t > 0.0, "segment length must be positive");
    let (n_line, n_along, lo, hi) = match axis {
        Axis::X => (g.ny, g.nx, g.rect[0], g.rect[1]),
        Axis::Y => (g.nx, g.ny, g.rect[2], g.rect[3]),
    };
    let at = |line: usize, k: usize| match axis {
        Axis::X => line * g.nx + k,
        Axis::Y => k * g.nx + line,
    };
    let (lo_r, hi_r) = (exact(lo), exact(hi));
    let h = (&hi_r - &lo_r) / Rat::from_int(n_along as i64);
    let edges: Vec<Rat> = (0..=n_along).map(|k| &lo_r + &(&h * &Rat::from_int(k as i64))).collect();
    let half = Rat::new(1, 2);
    let centers: Vec<Rat> = (0..n_along).map(|k| &edges[k] + &(&h * &half)).collect();
    let radius = if t.is_finite() { Radius::Finite(exact(t)) } else { Radius::Infinite };

    // M(c·u) = |c|·M(u): lines are normalized by their largest magnitude so
    // that rescaled copies share one evaluation.
    let mut scale = vec![Rat::zero(); n_line];
    let mut shape_of = vec![usize::MAX; n_line];
    let mut shapes: Vec<Vec<Rat>> = Vec::new();
    let mut index: HashMap<Vec<Rat>, usize> = HashMap::new();
    for line in 0..n_line {
        let raw: Vec<f64> = (0..n_along).map(|k| g.values[at(line, k)].abs()).collect();
        let top = raw.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            continue;
        }
        let c = exact(top);
        let u: Vec<Rat> = raw.iter().map(|v| exact(*v) / &c).collect();
        let next = shapes.len();
        let id = *index.entry(u.clone()).or_insert_with(|| {
            shapes.push(u);
            next
        });
        scale[line] = c;
        shape_of[line] = id;
    }
    let results: Vec<Vec<Rat>> = shapes
        .par_iter()
        .map(|u| line_maximal(&edges, u, &centers, &radius))
        .collect();

    let mut out = vec![0.0; g.values.len()];
    for line in 0..n_line {
        if shape_of[line] == usize::MAX {
            continue;
        }
        let m = &results[shape_of[line]];
        for k in 0..n_along {
            out[at(line, k)] = (&scale[line] * &m[k]).to_f64();
        }
    }
    g.with_values(out)
}

/// `M_T^2 ∘ M_T^1 g`.
pub fn iterated_maximal(g: &GridFn2D, t: f64) -> GridFn2D {
    directional_maximal(&directional_maximal(g, Axis::X, t), Axis::Y, t)
}

#[derive(Clone, Copy)]
enum Window {
    /// Rectangles of Euclidean diameter at most `T`.
    Strong(f64),
    /// Squares of side at most `R`.
    Square(f64),
}

const CACHE_LIMIT: usize = 1 << 14;

/// Binary64 step function with equal neighbouring cells merged.
fn merged_line(edges: &[f64], values: impl Iterator<Item = f64>) -> Prepared64 {
    let mut e = vec![edges[0]];
    let mut w: Vec<f64> = Vec::new();
    for (k, v) in values.enumerate() {
        if w.last() == Some(&v) {
            *e.last_mut().unwrap() = edges[k + 1];
        } else {
            w.push(v);
            e.push(edges[k + 1]);
        }
    }
    Prepared64::new(e, w)
}

/// Sweep over vertical windows `rows j0..=j1`: for each window the column
/// averages form a 1D function whose horizontal sup (subject to the window's
/// constraint) applies to every row of the window.
fn window_sweep(g: &GridFn2D, kind: Window) -> GridFn2D {
    let (nx, ny) = (g.nx, g.ny);
    let (hx, hy) = (g.hx(), g.hy());
    let width = g.rect[1] - g.rect[0];
    let edges: Vec<f64> = (0..=nx).map(|i| g.rect[0] + i as f64 * hx).collect();
    let centers: Vec<f64> = (0..nx).map(|i| g.center_x(i)).collect();

    let mut prefix = vec![0.0; (ny + 1) * nx];
    let mut mass = vec![0.0; ny + 1];
    for j in 0..ny {
        let mut row = 0.0;
        for i in 0..nx {
            let v = g.values[j * nx + i].abs();
            prefix[(j + 1) * nx + i] = prefix[j * nx + i] + v;
            row += v;
        }
        mass[j + 1] = mass[j] + row;
    }

    let mut cache: HashMap<(Vec<u64>, u64), Vec<f64>> = HashMap::new();
    let mut buf = Vec::new();
    let mut out = vec![0.0f64; nx * ny];
    let mut avg = vec![0.0f64; nx];
    let mut running = vec![0.0f64; nx];
    for j0 in 0..ny {
        running.iter_mut().for_each(|v| *v = 0.0);
        let mut live = false;
        for j1 in (j0..ny).rev() {
            let rows = (j1 - j0 + 1) as f64;
            let height = rows * hy;
            let param = match kind {
                Window::Strong(t) if height < t => {
                    let len = (t * t - height * height).sqrt();
                    Some(if len >= width { f64::INFINITY } else { len })
                }
                Window::Square(r) if height <= r && height <= width * (1.0 + 1e-12) => Some(height.min(width)),
                _ => None,
            };
            if let (Some(param), true) = (param, mass[j1 + 1] - mass[j0] > 0.0) {
                for i in 0..nx {
                    avg[i] = (prefix[(j1 + 1) * nx + i] - prefix[j0 * nx + i]) / rows;
                }
                let top = avg.iter().cloned().fold(0.0, f64::max);
                if top > 0.0 {
                    let key_vals: Vec<u64> = avg.iter().map(|v| (v / top).to_bits()).collect();
                    let key = (key_vals, param.to_bits());
                    if !cache.contains_key(&key) {
                        if cache.len() >= CACHE_LIMIT {
                            cache.clear();
                        }
                        let prep = merged_line(&edges, avg.iter().map(|v| v / top));
                        let m: Vec<f64> = centers
                            .iter()
                            .map(|&x| match kind {
                                Window::Strong(_) => prep.sup_average(x, param, &mut buf),
                                Window::Square(_) => prep.sup_fixed_length(x, param),
                            })
                            .collect();
                        cache.insert(key.clone(), m);
                    }
                    let m = &cache[&key];
                    for i in 0..nx {
                        running[i] = running[i].max(top * m[i]);
                    }
                    live = true;
                }
            }
            if live {
                let row = &mut out[j1 * nx..(j1 + 1) * nx];
                for i in 0..nx {
                    row[i] = row[i].max(running[i]);
                }
            }
        }
    }
    g.with_values(out)
}

/// `M_T^S g` over rectangles made of whole rows vertically and arbitrary
/// horizontal extent, with diameter at most `T`.
pub fn strong_maximal(g: &GridFn2D, t: f64) -> GridFn2D {
    assert!(t > 0.0, "diameter must be positive");
    window_sweep(g, Window::Strong(t))
}

/// Maximal operator over squares of side at most `r` (the ℓ∞ ball version):
/// whole rows vertically, equal horizontal length.
pub fn square_maximal(g: &GridFn2D, r: f64) -> GridFn2D {
    assert!(r > 0.0, "side must be positive");
    window_sweep(g, Window::Square(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize) -> GridFn2D {
        GridFn2D::constant([0.0, 1.0, 0.0, 1.0], n, n, 0.0).unwrap()
    }

    fn single_cell(n: usize, i: usize, j: usize) -> GridFn2D {
        let mut v = vec![0.0; n * n];
        v[j * n + i] = 1.0;
        GridFn2D::new([0.0, 1.0, 0.0, 1.0], n, n, v).unwrap()
    }

    fn close(a: &GridFn2D, b: &GridFn2D, tol: f64) -> bool {
        a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn constants_are_fixed_points() {
        let g = GridFn2D::constant([0.0, 2.0, 0.0, 1.0], 5, 4, -2.5).unwrap();
        let a = g.abs();
        for t in [0.3, 1.0, f64::INFINITY] {
            assert!(close(&directional_maximal(&g, Axis::X, t), &a, 0.0));
            assert!(close(&directional_maximal(&g, Axis::Y, t), &a, 0.0));
            assert!(close(&iterated_maximal(&g, t), &a, 0.0));
            assert!(close(&strong_maximal(&g, t), &a, 1e-15));
            assert!(close(&square_maximal(&g, t.min(5.0)), &a, 1e-15));
        }
    }

    #[test]
    fn column_constant_function_is_fixed_by_vertical_pass() {
        let g = GridFn2D::from_fn([0.0, 1.0, 0.0, 1.0], 6, 5, |x, _| (x * 7.0).floor()).unwrap();
        assert_eq!(directional_maximal(&g, Axis::Y, 0.25), g);
    }

    #[test]
    fn box_row_follows_inverse_distance() {
        // δ = 1/8 box in the corner of the unit square, cells of width 1/64
        let d = 0.125;
        let g = unit_grid(64).with_box(0.0, d, 0.0, d, 1.0);
        let m = directional_maximal(&g, Axis::X, f64::INFINITY);
        for i in 8..64 {
            let x = g.center_x(i);
            assert!((m.get(i, 3) - d / x).abs() < 1e-15);
            assert_eq!(m.get(i, 20), 0.0);
        }
        // the vertical pass adds nothing inside the strip
        let it = iterated_maximal(&g, f64::INFINITY);
        for i in 0..64 {
            for j in 0..8 {
                assert_eq!(it.get(i, j), m.get(i, j));
            }
        }
    }

    /// Sup over all rectangles with vertical extent a union of rows and
    /// horizontal endpoints on the half-cell lattice (every vertex of the
    /// horizontal problem lies there when the constraint is inactive).
    fn brute_rect(g: &GridFn2D, i: usize, j: usize, accept: impl Fn(f64, f64) -> bool) -> f64 {
        let (nx, ny) = (g.nx(), g.ny());
        let (hx, hy) = (g.hx(), g.hy());
        let mut best: f64 = 0.0;
        let cell_mass = |lo: usize, hi: usize, j0: usize, j1: usize| -> f64 {
            // lo, hi in half cells
            let mut s = 0.0;
            for jj in j0..=j1 {
                for k in lo..hi {
                    s += g.get(k / 2, jj).abs() * 0.5 * hx * hy;
                }
            }
            s
        };
        for j0 in 0..=j {
            for j1 in j..ny {
                for lo in 0..=2 * i + 1 {
                    for hi in (2 * i + 1).max(lo + 1)..=2 * nx {
                        let (w, h) = ((hi - lo) as f64 * 0.5 * hx, (j1 - j0 + 1) as f64 * hy);
                        if accept(w, h) {
                            best = best.max(cell_mass(lo, hi, j0, j1) / (w * h));
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn strong_matches_brute_force_when_unconstrained() {
        let g = single_cell(8, 2, 5);
        let s = strong_maximal(&g, f64::INFINITY);
        for (i, j) in [(7, 0), (2, 5), (0, 7), (5, 5), (2, 1)] {
            let b = brute_rect(&g, i, j, |_, _| true);
            assert!((s.get(i, j) - b).abs() < 1e-12, "({i},{j}) {} vs {b}", s.get(i, j));
        }
    }

    #[test]
    fn square_matches_brute_force() {
        let g = single_cell(8, 3, 3);
        let r = 0.5;
        let sq = square_maximal(&g, r);
        for (i, j) in [(3, 3), (5, 3), (4, 6), (0, 0), (6, 7)] {
            let b = brute_rect(&g, i, j, |w, h| (w - h).abs() < 1e-12 && h <= r + 1e-12);
            assert!((sq.get(i, j) - b).abs() < 1e-12, "({i},{j}) {} vs {b}", sq.get(i, j));
        }
    }

    #[test]
    fn operator_ordering() {
        let g = GridFn2D::from_fn([0.0, 1.0, 0.0, 1.0], 12, 12, |x, y| ((x * 9.0).sin() * (y * 5.0).cos()).max(0.0))
            .unwrap();
        for t in [0.2, 0.5, 2.0] {
            let s = strong_maximal(&g, t);
            let it = iterated_maximal(&g, t);
            let sq = square_maximal(&g, t / 2f64.sqrt());
            let d = directional_maximal(&g, Axis::X, t);
            for k in 0..g.values().len() {
                assert!(s.values()[k] <= it.values()[k] + 1e-9);
                assert!(sq.values()[k] <= s.values()[k] + 1e-9);
                assert!(g.values()[k].abs() <= d.values()[k] + 1e-12);
                assert!(g.values()[k].abs() <= sq.values()[k] + 1e-12);
            }
        }
    }
}
