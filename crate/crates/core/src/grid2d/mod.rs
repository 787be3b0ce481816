//! Cell-constant functions on uniform rectangular grids and the 2D maximal
//! operators built on the 1D engine.

mod experiments;
mod ops;
mod tv;

pub use experiments::{
    blowup_experiment, convergence_2d, delta_box_grid, delta_box_profile, delta_box_tv, growth_table_2d, BlowupRow,
    GrowthRow2d, ResolutionPolicy,
};
pub use ops::{directional_maximal, iterated_maximal, square_maximal, strong_maximal, Axis};
pub use tv::{discrete_tv, TVResult};

use crate::maximal1d::CheckError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("bad grid shape: {0}")]
    BadShape(String),
    #[error("non-finite value at cell ({i}, {j})")]
    NonFiniteValue { i: usize, j: usize },
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Check(#[from] CheckError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFn2D {
    /// `[x_lo, x_hi, y_lo, y_hi]`
    rect: [f64; 4],
    nx: usize,
    ny: usize,
    /// Row-major: the cell `(i, j)` is `values[j * nx + i]`.
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct GridRepr {
    rect: [f64; 4],
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl<'de> Deserialize<'de> for GridFn2D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<GridFn2D, D::Error> {
        let r = GridRepr::deserialize(d)?;
        GridFn2D::new(r.rect, r.nx, r.ny, r.values).map_err(serde::de::Error::custom)
    }
}

impl GridFn2D {
    pub fn new(rect: [f64; 4], nx: usize, ny: usize, values: Vec<f64>) -> Result<GridFn2D, GridError> {
        let [x_lo, x_hi, y_lo, y_hi] = rect;
        if nx < 2 || ny < 2 {
            return Err(GridError::BadShape(format!("need nx, ny ≥ 2, got {nx}×{ny}")));
        }
        if !(x_lo < x_hi && y_lo < y_hi) || rect.iter().any(|v| !v.is_finite()) {
            return Err(GridError::BadShape(format!("degenerate rectangle {rect:?}")));
        }
        if values.len() != nx * ny {
            return Err(GridError::BadShape(format!("expected {} values, got {}", nx * ny, values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue { i: k % nx, j: k / nx });
        }
        Ok(GridFn2D { rect, nx, ny, values })
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(rect: [f64; 4], nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Result<GridFn2D, GridError> {
        let mut g = GridFn2D::new(rect, nx, ny, vec![0.0; nx * ny])?;
        for j in 0..ny {
            for i in 0..nx {
                g.values[j * nx + i] = f(g.center_x(i), g.center_y(j));
            }
        }
        GridFn2D::new(rect, nx, ny, g.values)
    }

    pub fn constant(rect: [f64; 4], nx: usize, ny: usize, c: f64) -> Result<GridFn2D, GridError> {
        GridFn2D::new(rect, nx, ny, vec![c; nx * ny])
    }

    /// `value` on every cell whose center lies in `[x0, x1] × [y0, y1]`.
    pub fn with_box(mut self, x0: f64, x1: f64, y0: f64, y1: f64, value: f64) -> GridFn2D {
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = (self.center_x(i), self.center_y(j));
                if x0 <= x && x <= x1 && y0 <= y && y <= y1 {
                    self.values[j * self.nx + i] = value;
                }
            }
        }
        self
    }

    pub fn rect(&self) -> [f64; 4] {
        self.rect
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hx(&self) -> f64 {
        (self.rect[1] - self.rect[0]) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.rect[3] - self.rect[2]) / self.ny as f64
    }

    pub fn center_x(&self, i: usize) -> f64 {
        self.rect[0] + (i as f64 + 0.5) * self.hx()
    }

    pub fn center_y(&self, j: usize) -> f64 {
        self.rect[2] + (j as f64 + 0.5) * self.hy()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.hx() * self.hy()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.hx() * self.hy()).sqrt()
    }

    pub fn ess_sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> GridFn2D {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFn2D {
        GridFn2D {
            values: self.values.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }

    fn same_shape(&self, other: &GridFn2D) -> Result<(), GridError> {
        if self.rect != other.rect || self.nx != other.nx || self.ny != other.ny {
            return Err(GridError::BadShape("grids differ in shape".into()));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &GridFn2D, f: impl Fn(f64, f64) -> f64) -> Result<GridFn2D, GridError> {
        self.same_shape(other)?;
        Ok(GridFn2D {
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
            ..self.clone()
        })
    }

    /// `Σ |self − other| · cell area`.
    pub fn l1_distance(&self, other: &GridFn2D) -> Result<f64, GridError> {
        Ok(self.zip_with(other, |a, b| a - b)?.l1_norm())
    }

    /// Cell values with `|·|` applied.
    pub fn abs(&self) -> GridFn2D {
        self.map(f64::abs)
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> GridFn2D {
        debug_assert_eq!(values.len(), self.nx * self.ny);
        GridFn2D { values, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rules() {
        let mut v = vec![0.0; 4];
        v[0] = 1.0;
        assert!(GridFn2D::new([0.0, 1.0, 0.0, 1.0], 2, 2, v).is_ok());
        assert!(matches!(
            GridFn2D::new([0.0, 1.0, 0.0, 1.0], 1, 2, vec![0.0; 2]),
            Err(GridError::BadShape(_))
        ));
        assert!(matches!(
            GridFn2D::new([0.0, 1.0, 0.0, 1.0], 2, 2, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(GridError::NonFiniteValue { i: 1, j: 0 })
        ));
        assert!(GridFn2D::new([1.0, 0.0, 0.0, 1.0], 2, 2, vec![0.0; 4]).is_err());
    }

    #[test]
    fn aligned_box_is_exact() {
        // [0, 1/8]² on a grid of width 1/64 over (−1/2, 1/2)²
        let g = GridFn2D::constant([-0.5, 0.5, -0.5, 0.5], 64, 64, 0.0)
            .unwrap()
            .with_box(0.0, 0.125, 0.0, 0.125, 1.0);
        assert_eq!(g.values().iter().filter(|v| **v == 1.0).count(), 64);
        assert_eq!(g.l1_norm(), 1.0 / 64.0);
    }

    #[test]
    fn json_round_trip() {
        let g = GridFn2D::from_fn([0.0, 2.0, -1.0, 1.0], 3, 2, |x, y| x + 10.0 * y).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: GridFn2D = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GridFn2D>(r#"{"rect":[0,1,0,1],"nx":2,"ny":2,"values":[1]}"#).is_err());
    }
}
