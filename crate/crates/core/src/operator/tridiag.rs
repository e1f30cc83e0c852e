use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use super::{DiscretizedOperator, OperatorError};

/// Relative residual above which an unpivoted solve is redone with pivoting.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Thomas {
    /// `l_i = a_i / p_{i-1}` for `i >= 1`.
    mult: Vec<C64>,
    inv_pivots: Vec<C64>,
}

/// Partial-pivoting LU in the LAPACK `gttrf` layout.
#[derive(Debug, Clone)]
struct Pivoted {
    dl: Vec<C64>,
    d: Vec<C64>,
    du: Vec<C64>,
    du2: Vec<C64>,
    swap: Vec<bool>,
}

/// Reusable factorization of a complex tridiagonal matrix.
#[derive(Debug)]
pub struct TridiagSolver {
    sub: Vec<C64>,
    diag: Vec<C64>,
    sup: Vec<C64>,
    scale: f64,
    thomas: Option<Thomas>,
    pivoted: OnceLock<Result<Pivoted, OperatorError>>,
}

impl TridiagSolver {
    pub fn new(op: &DiscretizedOperator) -> Result<Self, OperatorError> {
        Self::from_bands(op.offdiag.clone(), op.diag.clone(), op.offdiag.clone())
    }

    pub fn from_bands(sub: Vec<C64>, diag: Vec<C64>, sup: Vec<C64>) -> Result<Self, OperatorError> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(OperatorError::DimensionMismatch {
                expected: n.saturating_sub(1),
                got: sub.len(),
            });
        }
        let norm = (0..n)
            .map(|i| {
                diag[i].norm()
                    + if i > 0 { sub[i - 1].norm() } else { 0.0 }
                    + if i + 1 < n { sup[i].norm() } else { 0.0 }
            })
            .fold(0.0, f64::max);
        let scale = 64.0 * n as f64 * f64::EPSILON * norm.max(f64::MIN_POSITIVE);
        let mut s = TridiagSolver {
            sub,
            diag,
            sup,
            scale,
            thomas: None,
            pivoted: OnceLock::new(),
        };
        s.thomas = s.thomas_factor();
        if s.thomas.is_none() {
            s.pivoted()?;
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn thomas_factor(&self) -> Option<Thomas> {
        let n = self.diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut mult = vec![C64::new(0.0, 0.0); n];
        pivots.push(self.diag[0]);
        for i in 1..n {
            let p = pivots[i - 1];
            if p.norm() <= self.scale {
                return None;
            }
            let l = self.sub[i - 1] / p;
            mult[i] = l;
            pivots.push(self.diag[i] - l * self.sup[i - 1]);
        }
        if pivots[n - 1].norm() <= self.scale {
            return None;
        }
        let inv_pivots = pivots.iter().map(|p| p.inv()).collect();
        Some(Thomas { mult, inv_pivots })
    }

    fn pivoted(&self) -> Result<&Pivoted, OperatorError> {
        self.pivoted
            .get_or_init(|| gttrf(&self.sub, &self.diag, &self.sup, self.scale))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `T x`.
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        apply_bands(&self.sub, &self.diag, &self.sup, x, out);
    }

    /// Solves `T x = rhs`, falling back to the pivoted factorization when the
    /// unpivoted residual exceeds [`RESIDUAL_TOL`].
    pub fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>, OperatorError> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, b: &mut [C64]) -> Result<(), OperatorError> {
        let n = self.diag.len();
        if b.len() != n {
            return Err(OperatorError::DimensionMismatch { expected: n, got: b.len() });
        }
        if let Some(t) = &self.thomas {
            let rhs = b.to_vec();
            thomas_solve(t, &self.sup, b);
            if self.relative_residual(b, &rhs) <= RESIDUAL_TOL {
                return Ok(());
            }
            b.copy_from_slice(&rhs);
        }
        let p = self.pivoted()?;
        gttrs(p, b);
        Ok(())
    }

    /// Solves without the residual check. For repeated solves with a matrix
    /// whose first checked solve already passed.
    pub fn solve_unchecked_in_place(&self, b: &mut [C64]) -> Result<(), OperatorError> {
        let n = self.diag.len();
        if b.len() != n {
            return Err(OperatorError::DimensionMismatch { expected: n, got: b.len() });
        }
        match &self.thomas {
            Some(t) if self.pivoted.get().is_none() => thomas_solve(t, &self.sup, b),
            _ => gttrs(self.pivoted()?, b),
        }
        Ok(())
    }

    /// `||T x - rhs|| / ||rhs||`.
    pub fn relative_residual(&self, x: &[C64], rhs: &[C64]) -> f64 {
        let mut r = vec![C64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut r);
        let num: f64 = r.iter().zip(rhs).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = rhs.iter().map(|b| b.norm_sqr()).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

pub(crate) fn apply_bands(sub: &[C64], diag: &[C64], sup: &[C64], x: &[C64], out: &mut [C64]) {
    let n = diag.len();
    for i in 0..n {
        let mut acc = diag[i] * x[i];
        if i > 0 {
            acc += sub[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc += sup[i] * x[i + 1];
        }
        out[i] = acc;
    }
}

fn thomas_solve(t: &Thomas, sup: &[C64], b: &mut [C64]) {
    let n = b.len();
    // Decaying tails of the sweeps would otherwise run through subnormal
    // arithmetic, which is an order of magnitude slower.
    let floor = b.iter().map(|c| c.l1_norm()).fold(0.0, f64::max) * 1e-200;
    let flush = |c: &mut C64| {
        if c.re.abs() < floor {
            c.re = 0.0;
        }
        if c.im.abs() < floor {
            c.im = 0.0;
        }
    };
    for i in 1..n {
        let prev = b[i - 1];
        b[i] -= t.mult[i] * prev;
        flush(&mut b[i]);
    }
    b[n - 1] *= t.inv_pivots[n - 1];
    for i in (0..n - 1).rev() {
        b[i] = (b[i] - sup[i] * b[i + 1]) * t.inv_pivots[i];
        flush(&mut b[i]);
    }
}

fn gttrf(sub: &[C64], diag: &[C64], sup: &[C64], tiny: f64) -> Result<Pivoted, OperatorError> {
    let n = diag.len();
    let mut dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![C64::new(0.0, 0.0); n.saturating_sub(2)];
    let mut swap = vec![false; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        if d[i].l1_norm() >= dl[i].l1_norm() {
            if d[i].norm() > 0.0 {
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swap[i] = true;
        }
    }
    if let Some((index, p)) = d.iter().enumerate().find(|(_, p)| p.norm() <= tiny) {
        return Err(OperatorError::Singular { index, pivot: p.norm() });
    }
    Ok(Pivoted { dl, d, du, du2, swap })
}

fn gttrs(p: &Pivoted, b: &mut [C64]) {
    let n = b.len();
    for i in 0..n - 1 {
        if p.swap[i] {
            let temp = b[i] - p.dl[i] * b[i + 1];
            b[i] = b[i + 1];
            b[i + 1] = temp;
        } else {
            let bi = b[i];
            b[i + 1] -= p.dl[i] * bi;
        }
    }
    b[n - 1] /= p.d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - p.du[n - 2] * b[n - 1]) / p.d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - p.du[i] * b[i + 1] - p.du2[i] * b[i + 2]) / p.d[i];
    }
}

/// Solves `op u = rhs`.
pub fn tridiag_solve(op: &DiscretizedOperator, rhs: &[C64]) -> Result<Vec<C64>, OperatorError> {
    TridiagSolver::new(op)?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bands(n: usize, seed: u64) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let sub = (0..n - 1).map(|_| c()).collect();
        let diag = (0..n).map(|_| c()).collect();
        let sup = (0..n - 1).map(|_| c()).collect();
        (sub, diag, sup)
    }

    fn dense(sub: &[C64], diag: &[C64], sup: &[C64]) -> DMatrix<C64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i == j + 1 {
                sub[j]
            } else if j == i + 1 {
                sup[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn matches_dense_lu() {
        for seed in 0..5 {
            let n = 200;
            let (sub, diag, sup) = random_bands(n, seed);
            let a = dense(&sub, &diag, &sup);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let rhs: Vec<C64> = (0..n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
            let s = TridiagSolver::from_bands(sub, diag, sup).unwrap();
            let x = s.solve(&rhs).unwrap();
            let xd = a.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
            let err: f64 = x.iter().zip(xd.iter()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
            let nrm: f64 = xd.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
            assert!(err / nrm < 1e-10, "seed {seed}: {}", err / nrm);
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_pivot() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        // [[0, 1, 0], [1, 0, 1], [0, 1, 1]]
        let s = TridiagSolver::from_bands(vec![one, one], vec![zero, zero, one], vec![one, one]).unwrap();
        assert!(s.thomas.is_none());
        let rhs = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)];
        let x = s.solve(&rhs).unwrap();
        assert!(s.relative_residual(&x, &rhs) < 1e-15);
    }

    #[test]
    fn singular_detected() {
        let one = C64::new(1.0, 0.0);
        // [[1, 1], [1, 1]]
        let r = TridiagSolver::from_bands(vec![one], vec![one, one], vec![one]);
        assert!(matches!(r, Err(OperatorError::Singular { .. })));
    }
}
