#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nhvol::cli::files::SystemFile;
use nhvol::extalg::KForm;
use nhvol::nonhol::NonholonomicSystem;
use nhvol::symexpr::{Expr, SampleOpts};
use rand::Rng;

pub const SYSTEMS: &[&str] = &[
    "vertical_disk",
    "falling_disk",
    "rolling_ball",
    "heisenberg",
    "chaplygin_sleigh",
    "chaplygin_sleigh_a0",
    "roller_racer",
    "chaplygin_sphere",
    "sleigh_oscillator",
    "mobius",
];

pub fn system_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("systems").join(format!("{name}.json"))
}

pub fn load(name: &str) -> NonholonomicSystem {
    SystemFile::load(system_path(name))
        .and_then(|f| f.to_system(SampleOpts::default()))
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn param(sys: &NonholonomicSystem, name: &str) -> f64 {
    let i = sys.symbols.param_index(name).unwrap_or_else(|| panic!("no parameter {name}"));
    sys.params()[i]
}

/// A random smooth function of `n` variables: a short sum of products of
/// elementary factors with random coefficients.
pub fn random_expr<R: Rng>(rng: &mut R, n: usize) -> Expr {
    let terms = rng.random_range(1..=3);
    let mut acc = Expr::zero();
    for _ in 0..terms {
        let mut t = Expr::constant(rng.random_range(-2.0..2.0));
        for _ in 0..rng.random_range(1..=2) {
            let x = Expr::var(rng.random_range(0..n));
            let f = match rng.random_range(0..6) {
                0 => x,
                1 => x.square(),
                2 => x.sin(),
                3 => x.cos(),
                4 => x.mul(&Expr::constant(0.3)).exp(),
                _ => Expr::one().add(&x.square()).ln(),
            };
            t = t.mul(&f);
        }
        acc = acc.add(&t);
    }
    acc
}

pub fn random_form<R: Rng>(rng: &mut R, n: usize, degree: usize) -> KForm {
    let mut out = KForm::zero(n, degree);
    for idx in index_sets(n, degree) {
        out = out.add(&KForm::from_terms(n, degree, vec![(idx, random_expr(rng, n))]));
    }
    out
}

/// Increasing index tuples of length `k` from `0..n`.
pub fn index_sets(n: usize, k: usize) -> Vec<Vec<usize>> {
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
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Numeric coefficient of `form` at index tuple `idx`.
pub fn coeff_at(form: &KForm, idx: &[usize], q: &[f64]) -> f64 {
    form.coeff(idx).eval(q, &[]).expect("finite")
}

/// Five-point central difference of `f` in direction `i`.
pub fn d5(f: &dyn Fn(&[f64]) -> f64, q: &[f64], i: usize, h: f64) -> f64 {
    let at = |t: f64| {
        let mut y = q.to_vec();
        y[i] += t;
        f(&y)
    };
    (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
