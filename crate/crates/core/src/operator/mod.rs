//! Finite-difference discretization of `-h^2 d^2/dx^2 + V - z` on a
//! truncated interval with Dirichlet ends and a complex absorbing layer.

mod tridiag;

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::PotentialFn;
use crate::step::step_on;

pub use tridiag::{tridiag_solve, TridiagSolver, RESIDUAL_TOL};

/// Largest operator that [`DiscretizedOperator::write_csv`] will dump.
pub const MAX_DUMP: usize = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("grid under-resolved: dx = {dx:e} exceeds h/4 = {limit:e}")]
    UnderResolved { dx: f64, limit: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("absorbing layer fraction {0} below 0.1")]
    CapTooThin(f64),
    #[error("matrix singular to working precision (pivot {pivot:e} at row {index})")]
    Singular { index: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight plateau 2M + 1 = {needed} does not fit in [{x_min}, {x_max}]")]
    PlateauTooWide { needed: f64, x_min: f64, x_max: f64 },
    #[error("weight exponent s = {0} below 1")]
    InvalidWeight(f64),
    #[error("operator with n = {0} too large to dump")]
    TooLargeToDump(usize),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, OperatorError> {
        if !(x_min < 0.0 && x_max > 1.0) {
            return Err(OperatorError::InvalidGrid(format!(
                "[{x_min}, {x_max}] must contain [0, 1] in its interior"
            )));
        }
        if n < 16 {
            return Err(OperatorError::InvalidGrid(format!("n = {n} below 16")));
        }
        Ok(Grid { x_min, x_max, n })
    }

    /// Coarsest grid with `dx <= h / points_per_h`.
    pub fn for_h(x_min: f64, x_max: f64, h: f64, points_per_h: f64) -> Result<Self, OperatorError> {
        let cells = ((x_max - x_min) * points_per_h / h).ceil() as usize;
        Grid::new(x_min, x_max, (cells + 1).max(16))
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + self.dx() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn check_resolution(&self, h: f64) -> Result<(), OperatorError> {
        let limit = h / 4.0;
        if self.dx() > limit * (1.0 + 1e-12) {
            return Err(OperatorError::UnderResolved { dx: self.dx(), limit });
        }
        Ok(())
    }
}

/// Quadratic absorbing ramp on the outer `layer_fraction` of the domain at
/// each end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapConfig {
    pub strength: f64,
    pub layer_fraction: f64,
}

impl Default for CapConfig {
    fn default() -> Self {
        CapConfig {
            strength: 0.5,
            layer_fraction: 0.2,
        }
    }
}

impl CapConfig {
    pub fn none() -> Self {
        CapConfig {
            strength: 0.0,
            ..CapConfig::default()
        }
    }

    pub fn absorption(&self, grid: &Grid, x: f64) -> f64 {
        let width = self.layer_fraction * (grid.x_max - grid.x_min);
        let left = grid.x_min + width;
        let right = grid.x_max - width;
        let depth = if x < left {
            (left - x) / width
        } else if x > right {
            (x - right) / width
        } else {
            return 0.0;
        };
        self.strength * depth * depth
    }
}

/// `T = -h^2 D^2 + V - z - i W` in tridiagonal form.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub grid: Grid,
    pub diag: Vec<C64>,
    pub offdiag: Vec<C64>,
    pub h: f64,
    pub z: f64,
    pub cap_strength: f64,
}

pub fn discretize(v: &PotentialFn, grid: &Grid, h: f64, z: f64, cap: &CapConfig) -> Result<DiscretizedOperator, OperatorError> {
    grid.check_resolution(h)?;
    if cap.strength > 0.0 && cap.layer_fraction < 0.1 {
        return Err(OperatorError::CapTooThin(cap.layer_fraction));
    }
    let dx = grid.dx();
    let k = h * h / (dx * dx);
    let diag = (0..grid.n)
        .map(|j| {
            let x = grid.x(j);
            C64::new(2.0 * k + v.value(x) - z, -cap.absorption(grid, x))
        })
        .collect();
    Ok(DiscretizedOperator {
        grid: *grid,
        diag,
        offdiag: vec![C64::new(-k, 0.0); grid.n - 1],
        h,
        z,
        cap_strength: cap.strength,
    })
}

impl DiscretizedOperator {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        tridiag::apply_bands(&self.offdiag, &self.diag, &self.offdiag, x, out);
    }

    pub fn solver(&self) -> Result<TridiagSolver, OperatorError> {
        TridiagSolver::new(self)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i.abs_diff(j) == 1 {
                self.offdiag[i.min(j)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// One row per grid point: `j, x, diag_re, diag_im, off_re, off_im`,
    /// where the off-diagonal entry couples `j` and `j + 1`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), OperatorError> {
        if self.n() > MAX_DUMP {
            return Err(OperatorError::TooLargeToDump(self.n()));
        }
        let io = |e: csv::Error| OperatorError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "x", "diag_re", "diag_im", "off_re", "off_im"]).map_err(io)?;
        for j in 0..self.n() {
            let off = self.offdiag.get(j).copied().unwrap_or_default();
            w.write_record([
                j.to_string(),
                self.grid.x(j).to_string(),
                self.diag[j].re.to_string(),
                self.diag[j].im.to_string(),
                off.re.to_string(),
                off.im.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| OperatorError::Io(e.to_string()))
    }
}

/// `rho_-s` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub values: Vec<f64>,
    pub s: f64,
    pub plateau_radius: f64,
}

/// `rho_-s = 1` on `|x| <= 2M`, `<x>^-s` for `|x| >= 2M + 1`.
pub fn weight_at(x: f64, s: f64, m: f64) -> f64 {
    let r = x.abs();
    let w = step_on(r, 2.0 * m, 1.0).value;
    let tail = (1.0 + x * x).powf(-0.5 * s);
    w + (1.0 - w) * tail
}

pub fn weight_profile(grid: &Grid, s: f64, m: f64) -> Result<WeightProfile, OperatorError> {
    if !(s >= 1.0) {
        return Err(OperatorError::InvalidWeight(s));
    }
    let needed = 2.0 * m + 1.0;
    if !(needed < -grid.x_min && needed < grid.x_max) {
        return Err(OperatorError::PlateauTooWide {
            needed,
            x_min: grid.x_min,
            x_max: grid.x_max,
        });
    }
    Ok(WeightProfile {
        values: grid.points().iter().map(|&x| weight_at(x, s, m)).collect(),
        s,
        plateau_radius: 2.0 * m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{build_potential, make_family, FamilyVariant};

    /// Number of eigenvalues below `lambda` of a real symmetric tridiagonal.
    fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
        let mut count = 0;
        let mut q = diag[0] - lambda;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..diag.len() {
            let prev = if q == 0.0 { f64::EPSILON } else { q };
            q = diag[i] - lambda - off[i - 1] * off[i - 1] / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bisect_eigenvalue(diag: &[f64], off: &[f64], index: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sturm_count(diag, off, mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn free_operator() {
        let grid = Grid::new(-8.0, 12.0, 401).unwrap();
        let h = 0.2;
        let op = discretize(&PotentialFn::Constant(0.0), &grid, h, -1.0, &CapConfig::none()).unwrap();
        let k = h * h / (grid.dx() * grid.dx());
        for d in &op.diag {
            assert_eq!(*d, C64::new(2.0 * k + 1.0, 0.0));
        }
        let eig = op.to_dense().map(|c| c.re).symmetric_eigenvalues();
        assert!(eig.min() >= 1.0 - 1e-12);
    }

    #[test]
    fn diagonal_entries() {
        let spec = make_family(FamilyVariant::Dyadic { m: 3 }, 40, 2.0).unwrap();
        let v = build_potential(&spec).unwrap();
        let grid = Grid::for_h(-8.0, 12.0, 0.05, 4.0).unwrap();
        let op = discretize(&v, &grid, 0.05, 1.0, &CapConfig::default()).unwrap();
        let j = grid.n / 2;
        let x = grid.x(j);
        let k = 0.05 * 0.05 / (grid.dx() * grid.dx());
        assert_eq!(op.diag[j].im, 0.0);
        assert!((op.diag[j].re - (2.0 * k + v.value(x) - 1.0)).abs() < 1e-12);
        assert!(op.diag[0].im < 0.0 && op.diag[grid.n - 1].im < 0.0);
        assert!(op.diag.iter().all(|d| d.im <= 0.0));
    }

    #[test]
    fn rejects_under_resolved_and_thin_caps() {
        let grid = Grid::new(-8.0, 12.0, 100).unwrap();
        let r = discretize(&PotentialFn::Constant(0.0), &grid, 0.05, 1.0, &CapConfig::default());
        assert!(matches!(r, Err(OperatorError::UnderResolved { .. })));
        let grid = Grid::for_h(-8.0, 12.0, 0.5, 4.0).unwrap();
        let thin = CapConfig {
            strength: 0.5,
            layer_fraction: 0.05,
        };
        let r = discretize(&PotentialFn::Constant(0.0), &grid, 0.5, 1.0, &thin);
        assert!(matches!(r, Err(OperatorError::CapTooThin(_))));
        assert!(Grid::new(0.5, 12.0, 100).is_err());
        assert!(Grid::new(-1.0, 12.0, 8).is_err());
    }

    #[test]
    fn smallest_singular_value_matches_dense() {
        let spec = make_family(FamilyVariant::Dyadic { m: 3 }, 40, 2.0).unwrap();
        let v = build_potential(&spec).unwrap();
        let grid = Grid::new(-1.5, 2.0, 300).unwrap();
        let h = 0.05;
        let op = discretize(&v, &grid, h, 2.0, &CapConfig::default()).unwrap();
        let sv = op.to_dense().singular_values();
        let smin = sv.min();
        // ||T^-1||^-1 via the solver and power iteration on the inverse
        let solver = op.solver().unwrap();
        let mut x: Vec<C64> = (0..op.n()).map(|j| C64::new(1.0 + (j as f64).sin(), 0.0)).collect();
        let mut est = 0.0;
        for _ in 0..2000 {
            let y = solver.solve(&x).unwrap();
            let conj: Vec<C64> = y.iter().map(|c| c.conj()).collect();
            let w: Vec<C64> = solver.solve(&conj).unwrap().iter().map(|c| c.conj()).collect();
            let nrm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let prev = est;
            est = nrm / x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            x = w.iter().map(|c| c / nrm).collect();
            if (est - prev).abs() < 1e-15 * est {
                break;
            }
        }
        let smin_iter = est.powf(-0.5);
        assert!((smin_iter - smin).abs() / smin < 1e-8, "{smin_iter} vs {smin}");
    }

    #[test]
    fn dirichlet_eigenvalue_is_singular() {
        let spec = make_family(FamilyVariant::Dyadic { m: 3 }, 40, 2.0).unwrap();
        let v = build_potential(&spec).unwrap();
        let grid = Grid::new(-2.0, 3.0, 201).unwrap();
        let h = 0.1;
        let base = discretize(&v, &grid, h, 0.0, &CapConfig::none()).unwrap();
        let d: Vec<f64> = base.diag.iter().map(|c| c.re).collect();
        let o: Vec<f64> = base.offdiag.iter().map(|c| c.re).collect();
        let lam = bisect_eigenvalue(&d, &o, 10, -10.0, 1e3);
        let op = discretize(&v, &grid, h, lam, &CapConfig::none()).unwrap();
        let rhs = vec![C64::new(1.0, 0.0); op.n()];
        let r = tridiag_solve(&op, &rhs);
        assert!(matches!(r, Err(OperatorError::Singular { .. })), "{r:?}");
        // a nearby regular z solves fine
        let op = discretize(&v, &grid, h, lam + 1e-3, &CapConfig::none()).unwrap();
        let x = tridiag_solve(&op, &rhs).unwrap();
        assert!(op.solver().unwrap().relative_residual(&x, &rhs) < 1e-10);
    }

    #[test]
    fn identity_like_residual() {
        let grid = Grid::new(-8.0, 12.0, 401).unwrap();
        let op = discretize(&PotentialFn::Constant(0.0), &grid, 0.2, -1.0, &CapConfig::none()).unwrap();
        let mut rhs = vec![C64::new(0.0, 0.0); op.n()];
        rhs[0] = C64::new(1.0, 0.0);
        let s = op.solver().unwrap();
        let x = s.solve(&rhs).unwrap();
        assert!(s.relative_residual(&x, &rhs) <= 1e-12);
    }

    #[test]
    fn weights() {
        let grid = Grid::new(-8.0, 12.0, 2001).unwrap();
        let w = weight_profile(&grid, 1.0, 1.0).unwrap();
        assert_eq!(weight_at(0.0, 1.0, 1.0), 1.0);
        assert_eq!(weight_at(2.0, 1.0, 1.0), 1.0);
        assert!((weight_at(12.0, 1.0, 1.0) - 1.0 / 145f64.sqrt()).abs() < 1e-15);
        let mid = weight_at(2.5, 1.0, 1.0);
        assert!(mid > 1.0 / (1.0 + 6.25f64).sqrt() && mid < 1.0);
        let pts = grid.points();
        for (j, x) in pts.iter().enumerate().skip(1) {
            if *x > 0.0 {
                assert!(w.values[j] <= w.values[j - 1]);
            }
        }
        assert!(weight_profile(&grid, 0.5, 1.0).is_err());
        assert!(matches!(weight_profile(&grid, 1.0, 4.0), Err(OperatorError::PlateauTooWide { .. })));
    }

    #[test]
    fn csv_dump() {
        let grid = Grid::new(-1.0, 2.0, 20).unwrap();
        let op = discretize(&PotentialFn::Constant(1.0), &grid, 1.0, 0.0, &CapConfig::default()).unwrap();
        let mut buf = Vec::new();
        op.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 21);
        assert!(text.starts_with("j,x,diag_re,diag_im,off_re,off_im"));
        let big = Grid::new(-8.0, 12.0, 600).unwrap();
        let op = discretize(&PotentialFn::Constant(1.0), &big, 1.0, 0.0, &CapConfig::default()).unwrap();
        assert!(matches!(op.write_csv(Vec::new()), Err(OperatorError::TooLargeToDump(600))));
    }
}
