use serde::Serialize;

use super::MeasureError;
use crate::extalg::KForm;
use crate::symexpr::{Domain, Expr, Tape};

const NODES: usize = 32;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Line integrals of a closed 1-form along axis-aligned staircase paths.
#[derive(Debug, Clone)]
pub struct Staircase {
    tape: Tape,
    domain: Domain,
    base: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Staircase {
    pub fn new(form: &KForm, base: Vec<f64>, domain: Domain) -> Self {
        let (nodes, weights) = gauss_legendre(NODES);
        Staircase {
            tape: Tape::new(&form.components()),
            domain,
            base,
            nodes,
            weights,
        }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    fn segment(&self, from: &[f64], axis: usize, to: f64) -> Option<f64> {
        let a = from[axis];
        if a == to {
            return Some(0.0);
        }
        let (mid, half) = (0.5 * (a + to), 0.5 * (to - a));
        let mut p = from.to_vec();
        let mut acc = 0.0;
        // a guard changing sign between consecutive nodes means the segment
        // crosses an excluded hypersurface even if no node lands near it
        let mut last = self.domain.guard_values(&p)?;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            p[axis] = mid + half * x;
            if !self.domain.guards_ok(&p) {
                return None;
            }
            let g = self.domain.guard_values(&p)?;
            if g.iter().zip(&last).any(|(a, b)| a.signum() != b.signum()) {
                return None;
            }
            last = g;
            let v = self.tape.eval(&p, &self.domain.params).ok()?;
            if !v[axis].is_finite() {
                return None;
            }
            acc += w * v[axis];
        }
        p[axis] = to;
        let g = self.domain.guard_values(&p)?;
        if g.iter().zip(&last).any(|(a, b)| a.signum() != b.signum()) {
            return None;
        }
        Some(acc * half)
    }

    /// Integral from the base to `x` moving along the axes in `order`;
    /// `None` when a node lands on an excluded hypersurface.
    pub fn along(&self, x: &[f64], order: &[usize]) -> Option<f64> {
        let mut p = self.base.clone();
        let mut acc = 0.0;
        for &axis in order {
            acc += self.segment(&p, axis, x[axis])?;
            p[axis] = x[axis];
        }
        Some(acc)
    }

    fn orders(&self) -> Vec<Vec<usize>> {
        let n = self.base.len();
        let fwd: Vec<usize> = (0..n).collect();
        let mut out = vec![fwd.clone(), fwd.iter().rev().copied().collect()];
        for r in 1..n {
            let mut o = fwd.clone();
            o.rotate_left(r);
            if !out.contains(&o) {
                out.push(o);
            }
        }
        out
    }

    /// Potential at `x` with the discrepancy between the first two staircase
    /// orders that avoid every guard.
    pub fn value(&self, x: &[f64]) -> Result<(f64, Option<f64>), MeasureError> {
        let mut found = Vec::with_capacity(2);
        for o in self.orders() {
            if let Some(v) = self.along(x, &o) {
                found.push(v);
                if found.len() == 2 {
                    break;
                }
            }
        }
        match found.as_slice() {
            [] => Err(MeasureError::PathBlocked { target: x.to_vec() }),
            [v] => Ok((*v, None)),
            [a, b, ..] => Ok((*a, Some((a - b).abs()))),
        }
    }
}

/// Numeric potential on a sample grid, with an optional closed form.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialField {
    pub base: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// Largest disagreement between two staircase orders.
    pub path_discrepancy: f64,
    /// Points where only one order avoided the guards.
    pub single_path_points: usize,
    /// Largest `|df(∂_i) - a_i|` by central differences, relative to `max(1, |a|)`.
    pub gradient_residual: f64,
    #[serde(skip)]
    pub expr: Option<Expr>,
    #[serde(skip)]
    pub(crate) stairs: Option<Staircase>,
}

impl PotentialField {
    /// Potential at an arbitrary point of the domain.
    pub fn value_at(&self, x: &[f64]) -> Result<f64, MeasureError> {
        match &self.stairs {
            Some(s) => s.value(x).map(|v| v.0),
            None => Ok(0.0),
        }
    }

    /// `exp(f)` on the grid.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.exp()).collect()
    }
}

/// Potential of a 1-form that is known to be closed. `points` are the grid
/// nodes; the gradient check uses up to eight of them.
pub(crate) fn integrate(form: &KForm, base: Vec<f64>, domain: &Domain, points: Vec<Vec<f64>>) -> Result<PotentialField, MeasureError> {
    if form.is_structurally_zero() {
        return Ok(PotentialField {
            base,
            values: vec![0.0; points.len()],
            points,
            path_discrepancy: 0.0,
            single_path_points: 0,
            gradient_residual: 0.0,
            expr: Some(Expr::zero()),
            stairs: None,
        });
    }
    let stairs = Staircase::new(form, base.clone(), domain.clone());
    let mut values = Vec::with_capacity(points.len());
    let mut discrepancy = 0.0f64;
    let mut single = 0;
    for p in &points {
        let (v, d) = stairs.value(p)?;
        values.push(v);
        match d {
            Some(d) => discrepancy = discrepancy.max(d),
            None => single += 1,
        }
    }
    let comps = Tape::new(&form.components());
    let h = 1e-4;
    let mut grad = 0.0f64;
    for p in points.iter().take(8) {
        let a = comps.eval(p, &domain.params)?;
        for i in 0..p.len() {
            let mut lo = p.clone();
            let mut hi = p.clone();
            lo[i] -= h;
            hi[i] += h;
            let (Ok((fl, _)), Ok((fh, _))) = (stairs.value(&lo), stairs.value(&hi)) else {
                continue;
            };
            let r = ((fh - fl) / (2.0 * h) - a[i]).abs() / a[i].abs().max(1.0);
            grad = grad.max(r);
        }
    }
    Ok(PotentialField {
        base,
        points,
        values,
        path_discrepancy: discrepancy,
        single_path_points: single,
        gradient_residual: grad,
        expr: None,
        stairs: Some(stairs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(32);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^62 over [-1, 1] = 2/63
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(62)).sum();
        assert!((s - 2.0 / 63.0).abs() < 1e-14);
        let c: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        assert!((c - 2.0 * 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn staircase_reroutes_around_guards() {
        // a = d(x y); the x-first path crosses the guard line x - y = 0.5
        let s = crate::symexpr::Symbols::new(&["x", "y"], &[] as &[&str]);
        let p = |t: &str| crate::symexpr::parse(t, &s).unwrap();
        let form = KForm::one_form(2, vec![p("y"), p("x")]);
        let dom = Domain::new(vec![(-1.0, 1.0), (-1.0, 1.0)], vec![], vec![p("x - 0.5 - y")]).unwrap();
        let st = Staircase::new(&form, vec![0.0, 0.0], dom);
        // x-first from (0,0) to (0.9, 0.8) crosses x = 0.5; y-first does not
        assert!(st.along(&[0.9, 0.8], &[0, 1]).is_none());
        let (v, d) = st.value(&[0.9, 0.8]).unwrap();
        assert!((v - 0.72).abs() < 1e-14);
        assert!(d.is_none());
    }
}
