//! Euler-Poincaré-Suslov systems on the dual of a Lie algebra.
//!
//! Conventions: `[e_i, e_j] = c^k_{ij} e_k`, `(ad*_xi p)_j = p_k c^k_{ij} xi^i`,
//! and the Hamiltonian is `h = ½ p·I^{-1} p`.

pub mod known;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LieError {
    #[error("antisymmetry violated: c^{k}_({i},{j}) != -c^{k}_({j},{i})")]
    Antisymmetry { i: usize, j: usize, k: usize },
    #[error("Jacobi identity violated for (e{i}, e{j}, e{k}) in component {l} (defect {defect:e})")]
    Jacobi {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        defect: f64,
    },
    #[error("inertia tensor is not positive definite")]
    NotPositiveDefinite,
    #[error("constraint covectors are linearly dependent")]
    RankDeficient,
    #[error("{0}")]
    Shape(String),
    #[error("momentum violates the constraints (residual {residual:e})")]
    ConstraintViolation { residual: f64 },
    #[error("Killing form is degenerate; the Kozlov criterion does not apply, use the membership test")]
    DegenerateKilling,
}

/// Structure constants `c^k_{ij}` of an `n`-dimensional algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    n: usize,
    data: Vec<f64>,
}

impl StructureConstants {
    pub fn zeros(n: usize) -> Self {
        StructureConstants {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// `c^k_{ij}`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let at = self.idx(i, j, k);
        self.data[at] = v;
    }

    /// Set `c^k_{ij} = v` and `c^k_{ji} = -v`.
    pub fn set_bracket(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.set(i, j, k, v);
        self.set(j, i, k, -v);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn validate(&self) -> Result<(), LieError> {
        let n = self.n;
        let scale = self.max_abs().max(1.0);
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    if (self.get(i, j, k) + self.get(j, i, k)).abs() > 1e-12 * scale {
                        return Err(LieError::Antisymmetry {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.get(i, j, m) * self.get(m, k, l)
                                + self.get(j, k, m) * self.get(m, i, l)
                                + self.get(k, i, m) * self.get(m, j, l);
                        }
                        if s.abs() > 1e-12 * scale * scale {
                            return Err(LieError::Jacobi {
                                i: i + 1,
                                j: j + 1,
                                k: k + 1,
                                l: l + 1,
                                defect: s,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    s += self.get(i, j, k) * x[i] * y[j];
                }
            }
            s
        })
    }

    /// `ad*_xi p`, with `<ad*_xi p, zeta> = <p, [xi, zeta]>`.
    pub fn ad_star(&self, xi: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |j, _| {
            let mut s = 0.0;
            for i in 0..n {
                if xi[i] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    s += p[k] * self.get(i, j, k) * xi[i];
                }
            }
            s
        })
    }

    /// `(tr ad)_j = Σ_i c^i_{ji}`.
    pub fn trace_ad(&self) -> DVector<f64> {
        DVector::from_fn(self.n, |j, _| (0..self.n).map(|i| self.get(j, i, i)).sum())
    }

    /// `κ_{ij} = Σ c^m_{ik} c^k_{jm}`.
    pub fn killing(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for m in 0..n {
                for k in 0..n {
                    s += self.get(i, k, m) * self.get(j, m, k);
                }
            }
            s
        })
    }

    /// Structure constants in the basis `e'_i = Σ_a t[(i, a)] e_a`.
    pub fn change_basis(&self, t: &DMatrix<f64>) -> Option<Self> {
        let n = self.n;
        let tinv = t.clone().try_inverse()?;
        let mut out = StructureConstants::zeros(n);
        for i in 0..n {
            for j in 0..n {
                // [e'_i, e'_j] in the old basis
                let xi = DVector::from_fn(n, |a, _| t[(i, a)]);
                let xj = DVector::from_fn(n, |a, _| t[(j, a)]);
                let b = self.bracket(&xi, &xj);
                // old e_k = Σ_l tinv[(k, l)] e'_l
                for l in 0..n {
                    let v: f64 = (0..n).map(|k| b[k] * tinv[(k, l)]).sum();
                    out.set(i, j, l, v);
                }
            }
        }
        Some(out)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let mut out = StructureConstants::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    out.set(i, j, k, self.get(i, j, k));
                }
            }
        }
        let o = self.n;
        for i in 0..other.n {
            for j in 0..other.n {
                for k in 0..other.n {
                    out.set(o + i, o + j, o + k, other.get(i, j, k));
                }
            }
        }
        out
    }
}

/// Least-squares membership of a covector in a span.
#[derive(Debug, Clone, Serialize)]
pub struct Membership {
    pub member: bool,
    /// Distance from the normalized covector to the normalized span.
    pub residual: f64,
}

/// Whether `theta` lies in the span of the rows of `eta`, judged after
/// scaling `theta` and each row to unit length.
pub fn membership(theta: &DVector<f64>, eta: &DMatrix<f64>) -> Membership {
    let norm = theta.norm();
    if norm < 1e-13 {
        return Membership {
            member: true,
            residual: 0.0,
        };
    }
    let t = theta / norm;
    if eta.nrows() == 0 {
        return Membership {
            member: false,
            residual: 1.0,
        };
    }
    let mut rows = eta.clone();
    for mut r in rows.row_iter_mut() {
        let nr = r.norm();
        if nr > 0.0 {
            r /= nr;
        }
    }
    let a = rows.transpose();
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&t, 1e-14).expect("svd computed with u and v");
    let residual = (&a * coef - &t).norm();
    Membership {
        member: residual < 1e-10,
        residual,
    }
}

/// Outcome of the Kozlov-type eigenvector test.
#[derive(Debug, Clone, Serialize)]
pub struct KozlovResult {
    pub holds: bool,
    /// Eigenvalue `a` in `[I^{-1} eta, κ♯eta] = a κ♯eta` (single constraint).
    pub eigenvalue: Option<f64>,
    pub residual: f64,
}

/// Lie algebra data of a constrained rigid-body-type system.
#[derive(Debug, Clone)]
pub struct LieAlgebraSystem {
    pub c: StructureConstants,
    pub inertia: DMatrix<f64>,
    pub inertia_inv: DMatrix<f64>,
    /// Constraint covectors as rows.
    pub eta: DMatrix<f64>,
    /// `W^a = I^{-1} eta^a` as columns.
    pub w: DMatrix<f64>,
    /// `m^{ab} = eta^a(W^b)`.
    pub mass: DMatrix<f64>,
    pub mass_inv: DMatrix<f64>,
}

impl LieAlgebraSystem {
    pub fn new(c: StructureConstants, inertia: DMatrix<f64>, eta: DMatrix<f64>) -> Result<Self, LieError> {
        let n = c.dim();
        if inertia.shape() != (n, n) {
            return Err(LieError::Shape(format!("inertia must be {n}x{n}")));
        }
        if eta.ncols() != n && eta.nrows() > 0 {
            return Err(LieError::Shape(format!("constraints must have {n} components")));
        }
        c.validate()?;
        let chol = inertia.clone().cholesky().ok_or(LieError::NotPositiveDefinite)?;
        let inertia_inv = chol.inverse();
        let eta = if eta.nrows() == 0 { DMatrix::zeros(0, n) } else { eta };
        let w = &inertia_inv * eta.transpose();
        let mass = &eta * &w;
        let mass_inv = if eta.nrows() == 0 {
            DMatrix::zeros(0, 0)
        } else {
            let svd = eta.clone().svd(false, false);
            let smax = svd.singular_values.max();
            if svd.singular_values.min() <= 1e-10 * smax.max(1e-300) {
                return Err(LieError::RankDeficient);
            }
            mass.clone().try_inverse().ok_or(LieError::RankDeficient)?
        };
        Ok(LieAlgebraSystem {
            c,
            inertia,
            inertia_inv,
            eta,
            w,
            mass,
            mass_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn n_constraints(&self) -> usize {
        self.eta.nrows()
    }

    pub fn trace_ad(&self) -> DVector<f64> {
        self.c.trace_ad()
    }

    /// `theta_j = (tr ad)_j + m_{ab} eta^b_k c^k_{ij} W^{a,i}`.
    pub fn eps_theta(&self) -> DVector<f64> {
        let n = self.dim();
        let mut theta = self.trace_ad();
        for a in 0..self.n_constraints() {
            for b in 0..self.n_constraints() {
                let mab = self.mass_inv[(a, b)];
                if mab == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let mut s = 0.0;
                    for i in 0..n {
                        for k in 0..n {
                            s += self.eta[(b, k)] * self.c.get(i, j, k) * self.w[(i, a)];
                        }
                    }
                    theta[j] += mab * s;
                }
            }
        }
        theta
    }

    pub fn membership(&self) -> Membership {
        membership(&self.eps_theta(), &self.eta)
    }

    /// Eigenvector test `m_{ab}[I^{-1}eta^a, κ♯eta^b] ∈ span{κ♯eta^a}`.
    pub fn kozlov_test(&self) -> Result<KozlovResult, LieError> {
        let n = self.dim();
        let kappa = self.c.killing();
        let kscale = kappa.amax();
        if kscale == 0.0 {
            return Err(LieError::DegenerateKilling);
        }
        let eig = kappa.clone().symmetric_eigenvalues();
        if eig.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min) <= 1e-10 * kscale {
            return Err(LieError::DegenerateKilling);
        }
        let kinv = kappa.try_inverse().ok_or(LieError::DegenerateKilling)?;
        let m = self.n_constraints();
        let ksharp: Vec<DVector<f64>> = (0..m).map(|a| &kinv * self.eta.row(a).transpose()).collect();
        let mut lhs = DVector::zeros(n);
        let mut scale: f64 = 0.0;
        for a in 0..m {
            let wa = self.w.column(a).into_owned();
            for b in 0..m {
                let br = self.c.bracket(&wa, &ksharp[b]);
                lhs += br * self.mass_inv[(a, b)];
                scale = scale.max(self.mass_inv[(a, b)].abs() * wa.norm() * ksharp[b].norm());
            }
        }
        let scale = scale * self.c.max_abs().max(1e-300);
        let span = DMatrix::from_fn(n, m, |i, a| ksharp[a][i]);
        let svd = span.clone().svd(true, true);
        let coef = svd.solve(&lhs, 1e-14).expect("svd computed with u and v");
        let residual = (&span * &coef - &lhs).norm() / scale.max(1e-300);
        let eigenvalue = if m == 1 {
            // undo the m_{11} factor so the value refers to the bare bracket
            Some(coef[0] / self.mass_inv[(0, 0)])
        } else {
            None
        };
        Ok(KozlovResult {
            holds: residual < 1e-10,
            eigenvalue,
            residual,
        })
    }

    /// Residual `max_a |eta^a(I^{-1} p)|`.
    pub fn constraint_residual(&self, p: &DVector<f64>) -> f64 {
        if self.n_constraints() == 0 {
            return 0.0;
        }
        (self.w.transpose() * p).amax()
    }

    /// Orthogonal projection of `p` onto the constrained momenta.
    pub fn project(&self, p: &DVector<f64>) -> DVector<f64> {
        if self.n_constraints() == 0 {
            return p.clone();
        }
        let lam = &self.mass_inv * (self.w.transpose() * p);
        p - self.eta.transpose() * lam
    }

    /// Unconstrained Lie-Poisson field `ad*_{I^{-1} p} p`.
    pub fn lie_poisson_field(&self, p: &DVector<f64>) -> DVector<f64> {
        let v = &self.inertia_inv * p;
        self.c.ad_star(&v, p)
    }

    /// Constrained equations `dp/dt = ad*_v p + λ_b eta^b` with the
    /// multipliers solved so the constraints are preserved.
    pub fn eps_field(&self, p: &DVector<f64>, project: bool) -> Result<DVector<f64>, LieError> {
        let p = if project {
            self.project(p)
        } else {
            let r = self.constraint_residual(p);
            if r > 1e-10 {
                return Err(LieError::ConstraintViolation { residual: r });
            }
            p.clone()
        };
        Ok(self.eps_rhs(&p))
    }

    /// The constrained right-hand side, defined on all of the dual space.
    pub fn eps_rhs(&self, p: &DVector<f64>) -> DVector<f64> {
        let f = self.lie_poisson_field(p);
        if self.n_constraints() == 0 {
            return f;
        }
        let lam = -(&self.mass_inv * (self.w.transpose() * &f));
        f + self.eta.transpose() * lam
    }

    /// Fixed-step RK4 flow of [`Self::eps_rhs`], returning `steps + 1` points.
    pub fn flow(&self, p0: &DVector<f64>, h: f64, steps: usize) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(steps + 1);
        let mut p = p0.clone();
        out.push(p.clone());
        for _ in 0..steps {
            let k1 = self.eps_rhs(&p);
            let k2 = self.eps_rhs(&(&p + &k1 * (h / 2.0)));
            let k3 = self.eps_rhs(&(&p + &k2 * (h / 2.0)));
            let k4 = self.eps_rhs(&(&p + &k3 * h));
            p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            out.push(p.clone());
        }
        out
    }
}

/// Central-difference divergence of `f` at `p`.
pub fn fd_divergence(f: impl Fn(&DVector<f64>) -> DVector<f64>, p: &DVector<f64>, h: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        let mut a = p.clone();
        let mut b = p.clone();
        a[i] += h;
        b[i] -= h;
        s += (f(&a)[i] - f(&b)[i]) / (2.0 * h);
    }
    s
}

/// Check `I([x, y]) · z = I(x) · [y, z]`-type invariance of a metric on
/// random triples, returning the largest defect.
pub fn ad_invariance_defect(c: &StructureConstants, metric: &DMatrix<f64>, samples: &[DVector<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in samples {
        for y in samples {
            for z in samples {
                let lhs = (metric * c.bracket(x, y)).dot(z);
                let rhs = (metric * x).dot(&c.bracket(y, z));
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use known::*;

    fn approx(a: &DVector<f64>, b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn validation() {
        assert!(so3().validate().is_ok());
        assert!(StructureConstants::zeros(3).validate().is_ok());
        let mut bad = StructureConstants::zeros(3);
        bad.set(0, 1, 2, 1.0);
        assert_eq!(bad.validate(), Err(LieError::Antisymmetry { i: 1, j: 2, k: 3 }));
        let mut nonjacobi = StructureConstants::zeros(3);
        nonjacobi.set_bracket(0, 1, 1, 1.0);
        nonjacobi.set_bracket(1, 2, 0, 1.0);
        assert!(matches!(nonjacobi.validate(), Err(LieError::Jacobi { .. })));
    }

    #[test]
    fn traces() {
        assert!(approx(&so3().trace_ad(), &[0.0; 3], 1e-15));
        assert!(approx(&se2().trace_ad(), &[0.0; 3], 1e-15));
        assert!(approx(&solvable2().trace_ad(), &[1.0, 0.0], 1e-15));
    }

    #[test]
    fn sleigh_theta() {
        let (m, a, i) = (2.0, 0.4, 0.7);
        let inertia = DMatrix::from_row_slice(3, 3, &[i + m * a * a, 0.0, -m * a, 0.0, m, 0.0, -m * a, 0.0, m]);
        let eta = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]);
        let sys = LieAlgebraSystem::new(se2(), inertia, eta).unwrap();
        let expect = -m * a / (i + m * a * a);
        assert!(approx(&sys.eps_theta(), &[0.0, expect, 0.0], 1e-14));
        assert!(!sys.membership().member);
        assert!(matches!(sys.kozlov_test(), Err(LieError::DegenerateKilling)));
    }

    #[test]
    fn so3_cases() {
        let inertia = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let e3 = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]);
        let sys = LieAlgebraSystem::new(so3(), inertia.clone(), e3).unwrap();
        assert!(sys.membership().member);
        let k = sys.kozlov_test().unwrap();
        assert!(k.holds && k.eigenvalue.unwrap().abs() < 1e-14);
        let e12 = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let sys = LieAlgebraSystem::new(so3(), inertia, e12).unwrap();
        assert!(!sys.kozlov_test().unwrap().holds);
        assert!(!sys.membership().member);
        let sys = LieAlgebraSystem::new(so3(), DMatrix::identity(3, 3), DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0])).unwrap();
        assert!(approx(&sys.eps_theta(), &[0.0; 3], 1e-15));
    }

    #[test]
    fn membership_cases() {
        let eta = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 0.0]);
        assert!(membership(&DVector::zeros(3), &eta).member);
        assert!(membership(&DVector::from_vec(vec![2.0, 4.0, 0.0]), &eta).member);
        assert!(!membership(&DVector::from_vec(vec![2.0, 4.0, 1e-6]), &eta).member);
    }

    #[test]
    fn abelian_field_vanishes() {
        let sys = LieAlgebraSystem::new(StructureConstants::zeros(3), DMatrix::identity(3, 3), DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 1.0])).unwrap();
        let p = sys.project(&DVector::from_vec(vec![0.3, -1.0, 2.0]));
        assert_eq!(sys.eps_field(&p, false).unwrap().amax(), 0.0);
        assert!(approx(&sys.eps_theta(), &[0.0; 3], 1e-300));
    }

    #[test]
    fn constrained_field_preserves_constraints() {
        let (m, a, i) = (2.0, 0.4, 0.7);
        let inertia = DMatrix::from_row_slice(3, 3, &[i + m * a * a, 0.0, -m * a, 0.0, m, 0.0, -m * a, 0.0, m]);
        let sys = LieAlgebraSystem::new(se2(), inertia, DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0])).unwrap();
        let p = sys.project(&DVector::from_vec(vec![0.5, 1.0, -0.3]));
        let f = sys.eps_field(&p, false).unwrap();
        assert!((sys.w.transpose() * f).amax() < 1e-14);
        assert!(sys.eps_field(&DVector::from_vec(vec![0.0, 0.0, 1.0]), false).is_err());
    }
}
