use nalgebra::DMatrix;

use super::{NonholError, NonholonomicSystem};
use crate::extalg::VectorField;
use crate::symexpr::{Expr, Tape};

/// Vector fields spanning the constraint distribution, built from the
/// g-orthogonal projections of coordinate fields.
///
/// Pivot coordinates are chosen greedily by residual norm at the domain
/// center and combined with constant coefficients that make the frame
/// g-orthonormal there.
#[derive(Debug, Clone)]
pub struct Frame {
    pub fields: Vec<VectorField>,
    pub pivots: Vec<usize>,
    /// `E_a = Σ_b P∂_{pivots[b]} * coeffs[(b, a)]`.
    pub coeffs: DMatrix<f64>,
    pub center: Vec<f64>,
}

/// `P∂_i = ∂_i - W^a m_{ab} eta^b_i` for every coordinate `i`.
pub(crate) fn projected_coordinate_fields(sys: &NonholonomicSystem) -> Vec<VectorField> {
    let n = sys.dim();
    let w = sys.constraint_fields();
    let lower = &sys.mass_matrix().lower;
    // weights[a][i] = m_{ab} eta^b_i
    let weights: Vec<Vec<Expr>> = (0..w.len())
        .map(|a| {
            (0..n)
                .map(|i| {
                    let terms: Vec<Expr> = sys
                        .constraints
                        .iter()
                        .enumerate()
                        .map(|(b, eb)| lower[a][b].mul(&eb.coeff(&[i])))
                        .collect();
                    Expr::sum(&terms)
                })
                .collect()
        })
        .collect();
    (0..n)
        .map(|i| {
            let comps = (0..n)
                .map(|j| {
                    let corr: Vec<Expr> = (0..w.len()).map(|a| w[a].comps[j].mul(&weights[a][i])).collect();
                    let base = if i == j { Expr::one() } else { Expr::zero() };
                    base.sub(&Expr::sum(&corr))
                })
                .collect();
            VectorField::new(comps)
        })
        .collect()
}

fn eval_fields(tape: &Tape, q: &[f64], params: &[f64], n: usize) -> Result<DMatrix<f64>, NonholError> {
    let vals = tape.eval(q, params)?;
    // column i holds field i
    Ok(DMatrix::from_column_slice(n, vals.len() / n, &vals))
}

impl Frame {
    pub(crate) fn build(sys: &NonholonomicSystem) -> Result<Frame, NonholError> {
        let n = sys.dim();
        let k = n - sys.n_constraints();
        let proj = projected_coordinate_fields(sys);
        let tape = Tape::new(&proj.iter().flat_map(|f| f.comps.iter().cloned()).collect::<Vec<_>>());
        let center = sys.domain.center()?;
        let p = eval_fields(&tape, &center, sys.params(), n)?;
        let (g, _) = sys.numeric_at(&center)?;
        let inner = |a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>| (a.transpose() * &g * b)[(0, 0)];

        let mut pivots = Vec::with_capacity(k);
        let mut ortho: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(k);
        for _ in 0..k {
            let mut best: Option<(usize, f64, nalgebra::DVector<f64>)> = None;
            for i in (0..n).filter(|i| !pivots.contains(i)) {
                let mut r = p.column(i).into_owned();
                for u in &ortho {
                    let c = inner(&r, u);
                    r -= u * c;
                }
                let norm = inner(&r, &r).max(0.0).sqrt();
                if best.as_ref().is_none_or(|b| norm > b.1) {
                    best = Some((i, norm, r));
                }
            }
            let (i, norm, r) = best.expect("candidates remain");
            if norm < 1e-8 {
                return Err(NonholError::Frame(format!(
                    "projected coordinate fields span fewer than {k} directions at the domain center"
                )));
            }
            pivots.push(i);
            ortho.push(r / norm);
        }

        let b = DMatrix::from_fn(n, k, |r, c| p[(r, pivots[c])]);
        let gram = b.transpose() * &g * &b;
        let chol = gram
            .cholesky()
            .ok_or_else(|| NonholError::Frame("frame Gram matrix is not positive definite".into()))?;
        let coeffs = chol
            .l()
            .transpose()
            .try_inverse()
            .ok_or_else(|| NonholError::Frame("singular Gram factor".into()))?;

        let fields: Vec<VectorField> = (0..k)
            .map(|a| {
                let comps = (0..n)
                    .map(|j| {
                        let terms: Vec<Expr> = (0..k)
                            .filter(|&bi| coeffs[(bi, a)] != 0.0)
                            .map(|bi| proj[pivots[bi]].comps[j].mul(&Expr::constant(coeffs[(bi, a)])))
                            .collect();
                        Expr::sum(&terms)
                    })
                    .collect();
                VectorField::new(comps)
            })
            .collect();

        let frame = Frame {
            fields,
            pivots,
            coeffs,
            center,
        };
        frame.check_rank(sys)?;
        Ok(frame)
    }

    fn check_rank(&self, sys: &NonholonomicSystem) -> Result<(), NonholError> {
        let n = sys.dim();
        let tape = self.tape();
        for q in sys.domain.samples(sys.opts.samples, sys.opts.seed)? {
            let e = match eval_fields(&tape, &q, sys.params(), n) {
                Ok(e) => e,
                Err(NonholError::Sym(crate::symexpr::SymError::Domain { .. })) => continue,
                Err(err) => return Err(err),
            };
            let (g, _) = sys.numeric_at(&q)?;
            let gram = e.transpose() * g * &e;
            let eig = gram.symmetric_eigenvalues();
            if eig.min() <= 1e-10 * eig.max().max(1.0) {
                return Err(NonholError::Frame(format!("frame loses rank at {q:?}")));
            }
        }
        Ok(())
    }

    /// Tape over all frame components, field by field.
    pub fn tape(&self) -> Tape {
        Tape::new(&self.fields.iter().flat_map(|f| f.comps.iter().cloned()).collect::<Vec<_>>())
    }

    /// Frame at `q` as an `n x k` matrix whose columns are the fields.
    pub fn eval(&self, tape: &Tape, q: &[f64], params: &[f64]) -> Result<DMatrix<f64>, NonholError> {
        eval_fields(tape, q, params, q.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extalg::KForm;
    use crate::symexpr::{Domain, Symbols};

    #[test]
    fn dz_frame_is_coordinate_fields() {
        let s = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
        let id = (0..3)
            .map(|i| (0..3).map(|j| Expr::constant(if i == j { 1.0 } else { 0.0 })).collect())
            .collect();
        let sys = NonholonomicSystem::new("dz", s, id, Expr::zero(), vec![KForm::dq(3, 2)], Domain::boxed(vec![(-1.0, 1.0); 3]))
            .unwrap();
        let f = sys.adapted_frame().unwrap();
        assert_eq!(f.pivots, vec![0, 1]);
        let e = f.eval(&f.tape(), &[0.1, 0.2, 0.3], &[]).unwrap();
        assert!((e - DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0])).amax() < 1e-15);
    }
}
