use nalgebra::{DMatrix, DVector};

use super::DynError;
use crate::nonhol::NonholonomicSystem;
use crate::symexpr::{Expr, Tape};

/// Numeric values of everything the equations of motion need at one
/// configuration.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub g: DMatrix<f64>,
    /// `dg[k][(i, j)] = ∂_k g_ij`.
    pub dg: Vec<DMatrix<f64>>,
    pub potential: f64,
    pub grad_v: DVector<f64>,
    /// Constraint rows.
    pub a: DMatrix<f64>,
    /// `da[k][(alpha, i)] = ∂_k eta^alpha_i`.
    pub da: Vec<DMatrix<f64>>,
}

/// Compiled metric, potential and constraint data with first derivatives.
#[derive(Debug, Clone)]
pub struct Kernel {
    n: usize,
    m: usize,
    tape: Tape,
    params: Vec<f64>,
}

impl Kernel {
    pub fn new(sys: &NonholonomicSystem) -> Self {
        let n = sys.dim();
        let m = sys.n_constraints();
        let mut exprs: Vec<Expr> = Vec::new();
        for row in &sys.metric {
            exprs.extend(row.iter().cloned());
        }
        for k in 0..n {
            for row in &sys.metric {
                exprs.extend(row.iter().map(|e| e.diff(k)));
            }
        }
        exprs.push(sys.potential.clone());
        exprs.extend((0..n).map(|k| sys.potential.diff(k)));
        let rows: Vec<Vec<Expr>> = sys.constraints.iter().map(|c| c.components()).collect();
        for r in &rows {
            exprs.extend(r.iter().cloned());
        }
        for k in 0..n {
            for r in &rows {
                exprs.extend(r.iter().map(|e| e.diff(k)));
            }
        }
        Kernel {
            n,
            m,
            tape: Tape::new(&exprs),
            params: sys.params().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn n_constraints(&self) -> usize {
        self.m
    }

    pub fn snapshot(&self, q: &[f64]) -> Result<Snapshot, DynError> {
        let (n, m) = (self.n, self.m);
        let vals = self.tape.eval(q, &self.params)?;
        let mut at = 0;
        let mut take = |len: usize| {
            let s = &vals[at..at + len];
            at += len;
            s
        };
        let g = DMatrix::from_row_slice(n, n, take(n * n));
        let dg = (0..n).map(|_| DMatrix::from_row_slice(n, n, take(n * n))).collect();
        let potential = take(1)[0];
        let grad_v = DVector::from_column_slice(take(n));
        let a = DMatrix::from_row_slice(m, n, take(m * n));
        let da = (0..n).map(|_| DMatrix::from_row_slice(m, n, take(m * n))).collect();
        Ok(Snapshot {
            g,
            dg,
            potential,
            grad_v,
            a,
            da,
        })
    }
}

impl Snapshot {
    pub fn g_inv(&self) -> Result<DMatrix<f64>, DynError> {
        self.g
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or(DynError::Singular("metric"))
    }

    /// `(Γ v v)_i = Σ_jk (∂_j g_ik - ½ ∂_i g_jk) v^j v^k`.
    pub fn christoffel_term(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = v.len();
        let mut out = DVector::zeros(n);
        // Σ_j v^j ∂_j g, applied to v
        let mut dgv = DMatrix::zeros(n, n);
        for (j, d) in self.dg.iter().enumerate() {
            dgv += d * v[j];
        }
        out += &dgv * v;
        for i in 0..n {
            out[i] -= 0.5 * (v.transpose() * &self.dg[i] * v)[(0, 0)];
        }
        out
    }

    /// `Ȧ v` for `A = (eta^alpha_i)`.
    pub fn a_dot_v(&self, v: &DVector<f64>) -> DVector<f64> {
        let m = self.a.nrows();
        let mut out = DVector::zeros(m);
        for (k, d) in self.da.iter().enumerate() {
            out += d * v * v[k];
        }
        out
    }

    /// Acceleration and multipliers solving the Lagrange-d'Alembert equations.
    pub fn acceleration(&self, v: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>), DynError> {
        let ginv = self.g_inv()?;
        let f = self.christoffel_term(v) + &self.grad_v;
        let mmat = &self.a * &ginv * self.a.transpose();
        let rhs = -self.a_dot_v(v) + &self.a * &ginv * &f;
        let lam = mmat
            .cholesky()
            .ok_or(DynError::Singular("constraint mass matrix"))?
            .solve(&rhs);
        let qdd = &ginv * (self.a.transpose() * &lam - f);
        Ok((qdd, lam))
    }

    /// g-orthogonal projection of `v` onto the kernel of the constraints.
    pub fn project(&self, v: &DVector<f64>) -> Result<DVector<f64>, DynError> {
        let ginv = self.g_inv()?;
        let mmat = &self.a * &ginv * self.a.transpose();
        let lam = mmat
            .cholesky()
            .ok_or(DynError::Singular("constraint mass matrix"))?
            .solve(&(&self.a * v));
        Ok(v - ginv * self.a.transpose() * lam)
    }

    pub fn energy(&self, v: &DVector<f64>) -> f64 {
        0.5 * (v.transpose() * &self.g * v)[(0, 0)] + self.potential
    }

    pub fn constraint_residual(&self, v: &DVector<f64>) -> f64 {
        if self.a.nrows() == 0 {
            0.0
        } else {
            (&self.a * v).amax()
        }
    }
}
