//! A few standard algebras and a generator of random ones.

use nalgebra::DMatrix;
use rand::Rng;

use super::StructureConstants;

/// so(3): `[e_i, e_j] = ε_{ijk} e_k`.
pub fn so3() -> StructureConstants {
    let mut c = StructureConstants::zeros(3);
    c.set_bracket(0, 1, 2, 1.0);
    c.set_bracket(1, 2, 0, 1.0);
    c.set_bracket(2, 0, 1, 1.0);
    c
}

/// se(2) with rotation `e1` and translations `e2, e3`, in the sign
/// convention `[e1, e2] = -e3`, `[e1, e3] = e2`.
pub fn se2() -> StructureConstants {
    let mut c = StructureConstants::zeros(3);
    c.set_bracket(0, 1, 2, -1.0);
    c.set_bracket(0, 2, 1, 1.0);
    c
}

/// Heisenberg algebra: `[e1, e2] = e3`.
pub fn heisenberg() -> StructureConstants {
    let mut c = StructureConstants::zeros(3);
    c.set_bracket(0, 1, 2, 1.0);
    c
}

/// Two-dimensional non-abelian algebra: `[e1, e2] = e2`.
pub fn solvable2() -> StructureConstants {
    let mut c = StructureConstants::zeros(2);
    c.set_bracket(0, 1, 1, 1.0);
    c
}

/// Book algebra: `[e1, e2] = e2`, `[e1, e3] = e3`.
pub fn book() -> StructureConstants {
    let mut c = StructureConstants::zeros(3);
    c.set_bracket(0, 1, 1, 1.0);
    c.set_bracket(0, 2, 2, 1.0);
    c
}

/// sl(2) in the basis `h, e, f`.
pub fn sl2() -> StructureConstants {
    let mut c = StructureConstants::zeros(3);
    c.set_bracket(0, 1, 1, 2.0);
    c.set_bracket(0, 2, 2, -2.0);
    c.set_bracket(1, 2, 0, 1.0);
    c
}

pub fn abelian(n: usize) -> StructureConstants {
    StructureConstants::zeros(n)
}

/// A random algebra obtained from a standard one (possibly plus an abelian
/// summand) by a random change of basis. Returns the constants and a label.
pub fn random_algebra<R: Rng>(rng: &mut R) -> (StructureConstants, &'static str) {
    let (base, label) = match rng.random_range(0..8) {
        0 => (so3(), "so3"),
        1 => (se2(), "se2"),
        2 => (heisenberg(), "heisenberg"),
        3 => (sl2(), "sl2"),
        4 => (book(), "book"),
        5 => (solvable2().direct_sum(&abelian(1)), "solvable2+R"),
        6 => (solvable2().direct_sum(&solvable2()), "solvable2+solvable2"),
        _ => (so3().direct_sum(&abelian(1)), "so3+R"),
    };
    let n = base.dim();
    loop {
        let t = DMatrix::from_fn(n, n, |i, j| {
            let noise: f64 = rng.random_range(-0.5..0.5);
            if i == j {
                1.0 + noise
            } else {
                noise
            }
        });
        let svd = t.clone().svd(false, false);
        if svd.singular_values.min() > 0.2 {
            return (base.change_basis(&t).expect("well-conditioned"), label);
        }
    }
}

/// A random symmetric positive-definite matrix with eigenvalues in `[0.5, 3]`.
pub fn random_inertia<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(0.5..3.0)));
    let m = &q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}
