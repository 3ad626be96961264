//! Recognition of potentials of the form `w ln(P / Q)` where `P` and `Q`
//! are linear combinations of a small monomial dictionary.

use nalgebra::{DMatrix, DVector};

use crate::symexpr::Expr;

const WEIGHTS: [f64; 6] = [1.0, -1.0, 0.5, -0.5, 2.0, -2.0];
const FIT_TOL: f64 = 1e-9;

/// Dictionary terms: `1`, the squares `sin(q)^2` (angles) or `q^2`, and
/// optionally their pairwise products.
fn dictionary(angles: &[bool], active: &[usize], products: bool) -> Vec<Expr> {
    let singles: Vec<Expr> = active
        .iter()
        .map(|&i| {
            let q = Expr::var(i);
            if angles.get(i).copied().unwrap_or(false) {
                q.sin().square()
            } else {
                q.square()
            }
        })
        .collect();
    let mut out = vec![Expr::one()];
    out.extend(singles.iter().cloned());
    if products {
        for a in 0..singles.len() {
            for b in a..singles.len() {
                out.push(singles[a].mul(&singles[b]));
            }
        }
    }
    out
}

fn eval_all(terms: &[Expr], points: &[Vec<f64>], params: &[f64]) -> Option<DMatrix<f64>> {
    let mut m = DMatrix::zeros(points.len(), terms.len());
    for (r, p) in points.iter().enumerate() {
        for (c, t) in terms.iter().enumerate() {
            m[(r, c)] = t.eval(p, params).ok()?;
        }
    }
    Some(m)
}

fn combination(terms: &[Expr], coeffs: &[f64]) -> Expr {
    let big = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let parts: Vec<Expr> = terms
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| c.abs() > 1e-10 * big)
        .map(|(t, &c)| if (c - 1.0).abs() < 1e-15 { t.clone() } else { Expr::constant(c).mul(t) })
        .collect();
    Expr::sum(&parts)
}

/// Smallest right singular vector of `a`, with the ratio of the two smallest
/// singular values.
fn null_vector(a: &DMatrix<f64>) -> Option<(DVector<f64>, f64)> {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t?;
    let s = &svd.singular_values;
    let (imin, smin) = s.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    let smax = s.max();
    Some((vt.row(imin).transpose(), smin / smax.max(f64::MIN_POSITIVE)))
}

/// Try to express grid values `f(points) - f(base)` as `w ln(P/Q) + const`.
pub(crate) fn recognize(
    points: &[Vec<f64>],
    values: &[f64],
    params: &[f64],
    angles: &[bool],
    active: &[usize],
) -> Option<Expr> {
    if points.len() < 8 || active.is_empty() {
        return None;
    }
    let attempts = [(true, false), (false, true)];
    for (products, rational) in attempts {
        let dict = dictionary(angles, active, products);
        if 2 * dict.len() + 2 > points.len() {
            continue;
        }
        let t = eval_all(&dict, points, params)?;
        for w in WEIGHTS {
            let e: Vec<f64> = values.iter().map(|v| (v / w).exp()).collect();
            if e.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let k = dict.len();
            let (num, den) = if rational {
                // P(x) - e(x) Q(x) = 0
                let mut a = DMatrix::zeros(points.len(), 2 * k);
                for r in 0..points.len() {
                    for c in 0..k {
                        a[(r, c)] = t[(r, c)];
                        a[(r, k + c)] = -e[r] * t[(r, c)];
                    }
                }
                let (v, ratio) = null_vector(&a)?;
                if ratio > FIT_TOL {
                    continue;
                }
                (v.rows(0, k).into_owned(), Some(v.rows(k, k).into_owned()))
            } else {
                let svd = t.clone().svd(true, true);
                let c = svd.solve(&DVector::from_column_slice(&e), 1e-12).ok()?;
                let resid = (&t * &c - DVector::from_column_slice(&e)).amax();
                let scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if resid > FIT_TOL * scale {
                    continue;
                }
                (c, None)
            };
            let lead = num.iter().copied().find(|c| c.abs() > 1e-12)?;
            let p = combination(&dict, (num / lead).as_slice());
            let expr = match den {
                Some(d) => {
                    let dl = d.iter().copied().find(|c| c.abs() > 1e-12)?;
                    let q = combination(&dict, (d / dl).as_slice());
                    Expr::constant(w).mul(&p.ln().sub(&q.ln()))
                }
                None => Expr::constant(w).mul(&p.ln()),
            };
            if !verify(&expr, points, values, params) {
                continue;
            }
            let rounded = round_constants(&expr);
            if verify(&rounded, points, values, params) {
                return Some(rounded);
            }
            return Some(expr);
        }
    }
    None
}

/// Snap numeric constants to nine decimals.
fn round_constants(e: &Expr) -> Expr {
    use crate::symexpr::Node;
    match e.node() {
        Node::Const(c) => Expr::constant((c * 1e9).round() / 1e9),
        Node::Unary(op, a) => Expr::unary(*op, &round_constants(a)),
        Node::Binary(op, a, b) => {
            let (a, b) = (round_constants(a), round_constants(b));
            match op {
                crate::symexpr::BinaryOp::Add => a.add(&b),
                crate::symexpr::BinaryOp::Sub => a.sub(&b),
                crate::symexpr::BinaryOp::Mul => a.mul(&b),
                crate::symexpr::BinaryOp::Div => a.div(&b),
            }
        }
        Node::Pow(a, h) => round_constants(a).powh(*h),
        _ => e.clone(),
    }
}

fn verify(expr: &Expr, points: &[Vec<f64>], values: &[f64], params: &[f64]) -> bool {
    let mut diffs = Vec::with_capacity(points.len());
    for (p, v) in points.iter().zip(values) {
        match expr.eval(p, params) {
            Ok(x) if x.is_finite() => diffs.push(x - v),
            _ => return false,
        }
    }
    let c = diffs[0];
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    diffs.iter().all(|d| (d - c).abs() < 1e-7 * scale)
}
