//! Small symbolic linear algebra on expression matrices.

use crate::symexpr::Expr;

pub type SymMatrix = Vec<Vec<Expr>>;

/// Solve `a x = b` column by column with Gaussian elimination in natural
/// pivot order. Only valid when the leading principal minors never vanish,
/// which holds for positive-definite `a`.
pub fn solve_spd(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let n = a.len();
    let k = b.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Expr>> = a.to_vec();
    let mut r: Vec<Vec<Expr>> = b.to_vec();
    for p in 0..n {
        for i in p + 1..n {
            if m[i][p].is_const_zero() {
                continue;
            }
            let f = m[i][p].div(&m[p][p]);
            for j in p..n {
                let t = m[i][j].sub(&f.mul(&m[p][j]));
                m[i][j] = t;
            }
            for j in 0..k {
                let t = r[i][j].sub(&f.mul(&r[p][j]));
                r[i][j] = t;
            }
        }
    }
    let mut x = vec![vec![Expr::zero(); k]; n];
    for j in 0..k {
        for i in (0..n).rev() {
            let mut acc = r[i][j].clone();
            for l in i + 1..n {
                if !m[i][l].is_const_zero() {
                    acc = acc.sub(&m[i][l].mul(&x[l][j]));
                }
            }
            x[i][j] = acc.div(&m[i][i]);
        }
    }
    x
}

/// Determinant by cofactor expansion along the first row.
pub fn det(a: &SymMatrix) -> Expr {
    let n = a.len();
    match n {
        0 => Expr::one(),
        1 => a[0][0].clone(),
        2 => a[0][0].mul(&a[1][1]).sub(&a[0][1].mul(&a[1][0])),
        _ => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if a[0][j].is_const_zero() {
                    continue;
                }
                let t = a[0][j].mul(&det(&minor(a, 0, j)));
                acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
            acc
        }
    }
}

fn minor(a: &SymMatrix, row: usize, col: usize) -> SymMatrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

/// Inverse of a symmetric positive-definite matrix together with its
/// determinant. Uses the adjugate for sizes up to four and elimination
/// beyond.
pub fn inverse_spd(a: &SymMatrix) -> (SymMatrix, Expr) {
    let n = a.len();
    let d = det(a);
    if n <= 4 {
        let inv = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        // adj(a)_{ij} = (-1)^{i+j} det(minor(a, j, i))
                        let c = det(&minor(a, j, i));
                        let c = if (i + j) % 2 == 1 { c.neg() } else { c };
                        c.div(&d)
                    })
                    .collect()
            })
            .collect();
        (inv, d)
    } else {
        let id = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect())
            .collect();
        (solve_spd(a, &id), d)
    }
}
