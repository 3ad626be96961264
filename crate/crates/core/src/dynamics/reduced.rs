use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{DynError, Kernel};
use crate::nonhol::{Frame, NonholonomicSystem};
use crate::symexpr::{Domain, Expr, Tape};

/// Constrained motion written in the chart `(q, s)` where `qdot = E(q) s`
/// for the adapted frame `E`.
#[derive(Debug, Clone)]
pub struct ReducedChart {
    n: usize,
    k: usize,
    kernel: Kernel,
    frame: Frame,
    frame_tape: Tape,
    /// `∂_j E_a^i`, ordered by `j`, then `a`, then `i`.
    dframe_tape: Tape,
    /// `W^{a,i}` followed by `∂_j W^{a,i}` ordered by `j`, `a`, `i`.
    w_tape: Tape,
    theta: Tape,
    params: Vec<f64>,
    domain: Domain,
}

/// Numeric check of `sigma ∧ epsilon = Omega` at one point.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct WedgeCheck {
    /// `(sigma ∧ epsilon)(e_1, ..., e_2n)`, which should be 1.
    pub wedge_value: f64,
    /// `max |dP_{W^a}(U_b) - delta_ab|`.
    pub duality_residual: f64,
}

impl ReducedChart {
    pub fn new(sys: &NonholonomicSystem) -> Result<Self, DynError> {
        let n = sys.dim();
        let frame = sys.adapted_frame()?;
        let k = frame.fields.len();
        let frame_tape = frame.tape();
        let mut d = Vec::with_capacity(n * n * k);
        for j in 0..n {
            for f in &frame.fields {
                d.extend(f.comps.iter().map(|c| c.diff(j)));
            }
        }
        let w = sys.constraint_fields();
        let mut wexprs: Vec<Expr> = w.iter().flat_map(|f| f.comps.iter().cloned()).collect();
        for j in 0..n {
            for f in w {
                wexprs.extend(f.comps.iter().map(|c| c.diff(j)));
            }
        }
        let theta = sys.density_form()?;
        Ok(ReducedChart {
            n,
            k,
            kernel: Kernel::new(sys),
            frame,
            frame_tape,
            dframe_tape: Tape::new(&d),
            w_tape: Tape::new(&wexprs),
            theta: Tape::new(&theta.components()),
            params: sys.params().to_vec(),
            domain: sys.domain.clone(),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Dimension `2n - m` of the reduced phase space.
    pub fn dim(&self) -> usize {
        self.n + self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn frame_at(&self, q: &[f64]) -> Result<DMatrix<f64>, DynError> {
        let vals = self.frame_tape.eval(q, &self.params)?;
        Ok(DMatrix::from_column_slice(self.n, self.k, &vals))
    }

    fn dframe_at(&self, q: &[f64]) -> Result<Vec<DMatrix<f64>>, DynError> {
        let vals = self.dframe_tape.eval(q, &self.params)?;
        let blk = self.n * self.k;
        Ok((0..self.n)
            .map(|j| DMatrix::from_column_slice(self.n, self.k, &vals[j * blk..(j + 1) * blk]))
            .collect())
    }

    pub fn velocity(&self, q: &[f64], s: &[f64]) -> Result<Vec<f64>, DynError> {
        Ok((self.frame_at(q)? * DVector::from_column_slice(s)).as_slice().to_vec())
    }

    /// Frame coordinates of a velocity, `s = (E^T g E)^{-1} E^T g v`.
    pub fn frame_coords(&self, q: &[f64], v: &[f64]) -> Result<Vec<f64>, DynError> {
        let e = self.frame_at(q)?;
        let g = self.kernel.snapshot(q)?.g;
        let lhs = e.transpose() * &g * &e;
        let rhs = e.transpose() * g * DVector::from_column_slice(v);
        let s = lhs.cholesky().ok_or(DynError::Singular("frame Gram matrix"))?.solve(&rhs);
        Ok(s.as_slice().to_vec())
    }

    /// The vector field `Z(q, s) = (E s, sdot)` on the reduced space.
    pub fn field(&self, x: &[f64]) -> Result<Vec<f64>, DynError> {
        let (n, k) = (self.n, self.k);
        let (q, s) = x.split_at(n);
        let s = DVector::from_column_slice(s);
        let e = self.frame_at(q)?;
        let de = self.dframe_at(q)?;
        let snap = self.kernel.snapshot(q)?;
        let v = &e * &s;
        let (qdd, _) = snap.acceleration(&v)?;
        let mut edot = DMatrix::zeros(n, k);
        for (j, d) in de.iter().enumerate() {
            edot += d * v[j];
        }
        let lhs = e.transpose() * &snap.g * &e;
        let rhs = e.transpose() * &snap.g * (qdd - edot * &s);
        let sdot = lhs.cholesky().ok_or(DynError::Singular("frame Gram matrix"))?.solve(&rhs);
        let mut out = v.as_slice().to_vec();
        out.extend(sdot.iter());
        Ok(out)
    }

    /// `theta(qdot)` at a reduced state.
    pub fn theta_qdot(&self, x: &[f64]) -> Result<f64, DynError> {
        let (q, s) = x.split_at(self.n);
        let v = self.velocity(q, s)?;
        let th = self.theta.eval(q, &self.params)?;
        Ok(th.iter().zip(&v).map(|(a, b)| a * b).sum())
    }

    /// Vertical fields `U_b` (momentum parts `m_{bc} eta^c`) as columns.
    fn u_columns(&self, snap: &super::Snapshot) -> Result<DMatrix<f64>, DynError> {
        let ginv = snap.g_inv()?;
        let mass = &snap.a * &ginv * snap.a.transpose();
        let minv = mass.try_inverse().ok_or(DynError::Singular("constraint mass matrix"))?;
        Ok(snap.a.transpose() * minv)
    }

    /// Density `J(q)` of the pulled-back volume, `|det[U | g E]|`.
    pub fn mu_density(&self, q: &[f64]) -> Result<f64, DynError> {
        let snap = self.kernel.snapshot(q)?;
        let u = self.u_columns(&snap)?;
        let ge = &snap.g * self.frame_at(q)?;
        let mut mat = DMatrix::zeros(self.n, self.n);
        mat.columns_mut(0, u.ncols()).copy_from(&u);
        mat.columns_mut(u.ncols(), self.k).copy_from(&ge);
        Ok(mat.determinant().abs())
    }

    /// Same density from the full `2n x 2n` determinant
    /// `epsilon(∂_q Phi, ∂_s Phi)` with `Phi(q, s) = (q, g E s)`.
    pub fn mu_density_full(&self, q: &[f64], s: &[f64]) -> Result<f64, DynError> {
        let (n, k) = (self.n, self.k);
        let m = n - k;
        let snap = self.kernel.snapshot(q)?;
        let u = self.u_columns(&snap)?;
        let e = self.frame_at(q)?;
        let de = self.dframe_at(q)?;
        let s = DVector::from_column_slice(s);
        let mut mat = DMatrix::zeros(2 * n, 2 * n);
        mat.view_mut((n, 0), (n, m)).copy_from(&u);
        for i in 0..n {
            // ∂_i (g E s) = (∂_i g) E s + g (∂_i E) s
            let col = &snap.dg[i] * &e * &s + &snap.g * &de[i] * &s;
            mat[(i, m + i)] = 1.0;
            mat.view_mut((n, m + i), (n, 1)).copy_from(&col);
        }
        let ge = &snap.g * &e;
        mat.view_mut((n, m + n), (n, k)).copy_from(&ge);
        Ok(mat.determinant().abs())
    }

    /// Evaluate `sigma ∧ epsilon` on the standard basis of `T*Q` by the
    /// shuffle formula, with `sigma = dP_{W^1} ∧ ... ∧ dP_{W^m}` and
    /// `epsilon = i_{U_m} ... i_{U_1} Omega`.
    pub fn wedge_identity(&self, q: &[f64], p: &[f64]) -> Result<WedgeCheck, DynError> {
        let n = self.n;
        let m = n - self.k;
        let snap = self.kernel.snapshot(q)?;
        let u = self.u_columns(&snap)?;
        let wv = self.w_tape.eval(q, &self.params)?;
        // dP_{W^a} as rows over (dq, dp)
        let mut sigma = DMatrix::zeros(m, 2 * n);
        for a in 0..m {
            for j in 0..n {
                let off = m * n + j * m * n + a * n;
                sigma[(a, j)] = (0..n).map(|i| p[i] * wv[off + i]).sum();
            }
            for i in 0..n {
                sigma[(a, n + i)] = wv[a * n + i];
            }
        }
        let mut u_full = DMatrix::zeros(2 * n, m);
        u_full.view_mut((n, 0), (n, m)).copy_from(&u);
        let dual = &sigma * &u_full - DMatrix::identity(m, m);

        let mut total = 0.0;
        for subset in combinations(2 * n, m) {
            let rest: Vec<usize> = (0..2 * n).filter(|i| !subset.contains(i)).collect();
            let sig_s = DMatrix::from_fn(m, m, |a, b| sigma[(a, subset[b])]);
            let mut eps = DMatrix::zeros(2 * n, 2 * n);
            eps.columns_mut(0, m).copy_from(&u_full);
            for (c, &r) in rest.iter().enumerate() {
                eps[(r, m + c)] = 1.0;
            }
            total += shuffle_sign(&subset, &rest) * sig_s.determinant() * eps.determinant();
        }
        Ok(WedgeCheck {
            wedge_value: total,
            duality_residual: dual.amax(),
        })
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Sign of the permutation `(subset, rest)` of `0..n`.
fn shuffle_sign(subset: &[usize], rest: &[usize]) -> f64 {
    let inversions: usize = subset.iter().map(|&s| rest.iter().filter(|&&r| r < s).count()).sum();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
