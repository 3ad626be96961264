//! Existence of configuration-dependent invariant densities: closedness and
//! exactness of the density form up to constraint multipliers, potential
//! reconstruction and a structured verdict.

mod pattern;
mod quad;

pub use quad::{gauss_legendre, PotentialField, Staircase};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::extalg::{FormError, KForm};
use crate::nonhol::{symlin, NonholError, NonholonomicSystem};
use crate::symexpr::{zero_test, Domain, Expr, SampleOpts, SymError, Symbols, Tape, ZeroReport};

const LSQ_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Nonhol(#[from] NonholError),
    #[error("no staircase path from the base to {target:?} avoids the excluded hypersurfaces")]
    PathBlocked { target: Vec<f64> },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown ansatz basis '{0}' (expected default, trig, poly, none)")]
    UnknownBasis(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    ExactNoMultiplier,
    ExactWithMultiplier,
    InconsistentOnAnsatz,
    NotClosedNoAnsatz,
}

impl Status {
    pub fn is_exact(self) -> bool {
        matches!(self, Status::ExactNoMultiplier | Status::ExactWithMultiplier)
    }
}

/// Functions `b_j` used to expand each multiplier `k_a = Σ c_aj b_j`.
#[derive(Debug, Clone)]
pub struct AnsatzBasis {
    pub label: String,
    pub functions: Vec<Expr>,
}

impl AnsatzBasis {
    /// `1`, `sin q`, `cos q` for every coordinate and `q` for non-angles.
    pub fn default_for(sys: &NonholonomicSystem) -> Self {
        let mut f = vec![Expr::one()];
        for i in 0..sys.dim() {
            let q = Expr::var(i);
            f.push(q.sin());
            f.push(q.cos());
            if !sys.angles[i] {
                f.push(q);
            }
        }
        AnsatzBasis {
            label: "default".into(),
            functions: f,
        }
    }

    /// Constants plus `sin q`, `cos q` of every coordinate.
    pub fn trig(n: usize) -> Self {
        let mut f = vec![Expr::one()];
        for i in 0..n {
            f.push(Expr::var(i).sin());
            f.push(Expr::var(i).cos());
        }
        AnsatzBasis {
            label: "trig".into(),
            functions: f,
        }
    }

    /// Monomials of total degree at most two.
    pub fn poly(n: usize) -> Self {
        let mut f = vec![Expr::one()];
        for i in 0..n {
            f.push(Expr::var(i));
        }
        for i in 0..n {
            for j in i..n {
                f.push(Expr::var(i).mul(&Expr::var(j)));
            }
        }
        AnsatzBasis {
            label: "poly".into(),
            functions: f,
        }
    }

    pub fn none() -> Self {
        AnsatzBasis {
            label: "none".into(),
            functions: Vec::new(),
        }
    }

    pub fn custom(label: impl Into<String>, functions: Vec<Expr>) -> Self {
        AnsatzBasis {
            label: label.into(),
            functions,
        }
    }

    /// Basis for `sys.rescaled(index, h)`. Rescaling shifts the multiplier
    /// of constraint `index` to `(k + Z(ln h)) / h` with `Z = m_{a,index} W^a`,
    /// so the basis gains `f / h` for every `f` and the function `Z(ln h) / h`.
    pub fn transported(&self, sys: &NonholonomicSystem, index: usize, h: &Expr) -> Self {
        let lower = &sys.mass_matrix().lower;
        let w = sys.constraint_fields();
        let lnh = h.ln();
        let z_lnh = Expr::sum(
            (0..w.len())
                .map(|a| lower[a][index].mul(&w[a].apply(&lnh)))
                .collect::<Vec<_>>()
                .iter(),
        );
        let mut functions = self.functions.clone();
        functions.extend(self.functions.iter().map(|f| f.div(h)));
        functions.push(z_lnh.div(h));
        AnsatzBasis {
            label: format!("{} (transported)", self.label),
            functions,
        }
    }

    pub fn by_name(name: &str, sys: &NonholonomicSystem) -> Result<Self, MeasureError> {
        match name {
            "default" => Ok(Self::default_for(sys)),
            "trig" => Ok(Self::trig(sys.dim())),
            "poly" => Ok(Self::poly(sys.dim())),
            "none" => Ok(Self::none()),
            other => Err(MeasureError::UnknownBasis(other.into())),
        }
    }
}

/// Outcome of the sampled least-squares solve for the ansatz coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct AnsatzFit {
    pub basis: String,
    pub unknowns: usize,
    pub samples: usize,
    pub equations: usize,
    pub rank: usize,
    /// Dimension of the coefficient nullspace, the freedom left by
    /// constants of motion.
    pub nullspace_dim: usize,
    pub residual: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemShape {
    Overdetermined,
    Determined,
    Underdetermined,
}

/// The pointwise system `dtheta(E_a, E_b) + Σ k_α deta^α(E_a, E_b) = 0`
/// obtained by restricting the closedness condition to the distribution.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureCertificate {
    pub equations: usize,
    pub unknowns: usize,
    pub shape: SystemShape,
    pub certified_no: Option<Witness>,
}

/// A sample where no multiplier can make the form closed.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub sample: Vec<f64>,
    pub residual: f64,
    pub reason: String,
}

/// A component `a_i dq^i` with `a_i` depending on `q^i` alone, integrated
/// on its own.
#[derive(Debug, Clone, Serialize)]
pub struct SeparablePart {
    pub coordinate: usize,
    pub base: f64,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub component: Expr,
    #[serde(skip)]
    pub expr: Option<Expr>,
    #[serde(skip)]
    params: Vec<f64>,
}

impl SeparablePart {
    /// `∫_base^t a_i`.
    pub fn value(&self, t: f64) -> Result<f64, MeasureError> {
        let (x, w) = gauss_legendre(32);
        let (mid, half) = (0.5 * (self.base + t), 0.5 * (t - self.base));
        let mut p = vec![0.0; self.coordinate + 1];
        let mut acc = 0.0;
        for (x, w) in x.iter().zip(&w) {
            p[self.coordinate] = mid + half * x;
            acc += w * self.component.eval(&p, &self.params)?;
        }
        Ok(acc * half)
    }
}

#[derive(Debug, Clone)]
pub struct MeasureVerdict {
    pub status: Status,
    pub theta: KForm,
    /// Zero test of `dtheta`.
    pub closedness: ZeroReport,
    pub multipliers: Option<Vec<Expr>>,
    /// `theta + Σ k_α eta^α` when it is closed.
    pub exact_form: Option<KForm>,
    pub ansatz: Option<AnsatzFit>,
    pub certificate: Option<CurvatureCertificate>,
    pub potential: Option<PotentialField>,
    pub separable: Vec<SeparablePart>,
    pub seed: u64,
}

impl MeasureVerdict {
    pub fn certified_no(&self) -> Option<&Witness> {
        self.certificate.as_ref().and_then(|c| c.certified_no.as_ref())
    }

    /// Density `exp(f)` at `q`, normalized to 1 at the base point.
    pub fn density_at(&self, q: &[f64]) -> Result<Option<f64>, MeasureError> {
        match &self.potential {
            Some(p) => Ok(Some(p.value_at(q)?.exp())),
            None => Ok(None),
        }
    }

    pub fn display_multipliers(&self, symbols: &Symbols) -> Option<Vec<String>> {
        self.multipliers
            .as_ref()
            .map(|ks| ks.iter().map(|k| k.display(symbols).to_string()).collect())
    }
}

/// Whether `d a` vanishes on the domain.
pub fn closedness(a: &KForm, dom: &Domain, opts: SampleOpts) -> Result<bool, MeasureError> {
    closedness_report(a, dom, opts).map(|r| r.is_zero)
}

pub fn closedness_report(a: &KForm, dom: &Domain, opts: SampleOpts) -> Result<ZeroReport, MeasureError> {
    if a.degree() != 1 {
        return Err(MeasureError::Precondition(format!("expected a 1-form, got degree {}", a.degree())));
    }
    Ok(a.d()?.zero_test(dom, opts)?)
}

/// Grid used for potentials: the base point followed by domain samples.
fn grid(dom: &Domain, base: &[f64], opts: SampleOpts) -> Result<Vec<Vec<f64>>, MeasureError> {
    let mut pts = vec![base.to_vec()];
    pts.extend(dom.samples(opts.samples, opts.seed ^ 0x6A09_E667)?);
    Ok(pts)
}

/// Potential of a closed 1-form by staircase quadrature from `base`.
pub fn potential(a: &KForm, base: &[f64], dom: &Domain, opts: SampleOpts) -> Result<PotentialField, MeasureError> {
    let rep = closedness_report(a, dom, opts)?;
    if !rep.is_zero {
        return Err(MeasureError::Precondition(format!(
            "form is not closed (residual {:e})",
            rep.max_residual
        )));
    }
    quad::integrate(a, base.to_vec(), dom, grid(dom, base, opts)?)
}

/// Attach a closed-form expression to a potential when one is recognized.
pub fn recognize_potential(field: &mut PotentialField, a: &KForm, params: &[f64], angles: &[bool]) {
    if field.expr.is_some() {
        return;
    }
    let active: Vec<usize> = (0..a.dim()).filter(|&i| !a.coeff(&[i]).is_const_zero()).collect();
    field.expr = pattern::recognize(&field.points, &field.values, params, angles, &active);
}

/// Density `det(m^{ab})` for holonomic constraints with closed `eta^a`.
pub fn holonomic_density(sys: &NonholonomicSystem) -> Result<Expr, MeasureError> {
    if !sys.frobenius_test()?.holonomic {
        return Err(MeasureError::Precondition("constraint distribution is not integrable".into()));
    }
    for (a, eta) in sys.constraints.iter().enumerate() {
        let rep = eta.d()?.zero_test(&sys.domain, sys.opts)?;
        if !rep.is_zero {
            return Err(MeasureError::Precondition(format!("constraint {a} is not closed")));
        }
    }
    Ok(sys.mass_matrix().det.clone())
}

/// Components of `a` that are not identically zero and depend only on their
/// own coordinate (tested numerically).
pub fn separable_components(a: &KForm, dom: &Domain, base: &[f64], angles: &[bool], opts: SampleOpts) -> Vec<SeparablePart> {
    let n = a.dim();
    let mut out = Vec::new();
    for i in 0..n {
        let c = a.coeff(&[i]);
        let others: Vec<Expr> = (0..n).filter(|&j| j != i).map(|j| c.diff(j)).collect();
        let vanishes = |es: &[Expr]| zero_test(es, dom, opts).map(|r| r.is_zero).unwrap_or(false);
        if c.is_const_zero() || vanishes(std::slice::from_ref(&c)) || !vanishes(&others) {
            continue;
        }
        // evaluate with the other coordinates at the base point
        let subs: Vec<Expr> = (0..n)
            .map(|j| if j == i { Expr::var(i) } else { Expr::constant(base[j]) })
            .collect();
        let c = c.substitute(&subs);
        let (lo, hi) = dom.intervals[i];
        let points: Vec<f64> = (0..=24).map(|k| lo + (hi - lo) * k as f64 / 24.0).collect();
        let mut part = SeparablePart {
            coordinate: i,
            base: base[i],
            points,
            values: Vec::new(),
            component: c,
            expr: None,
            params: dom.params.clone(),
        };
        let values: Result<Vec<f64>, _> = part.points.iter().map(|&t| part.value(t)).collect();
        let Ok(values) = values else { continue };
        part.values = values;
        let pts: Vec<Vec<f64>> = part
            .points
            .iter()
            .map(|&t| {
                let mut p = vec![0.0; n];
                p[i] = t;
                p
            })
            .collect();
        part.expr = pattern::recognize(&pts, &part.values, &dom.params, angles, &[i]);
        out.push(part);
    }
    out
}

fn two_form_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Solve `d(theta + Σ k_α eta^α) = 0` for `k` in the span of the basis at
/// sampled points.
fn ansatz_fit(sys: &NonholonomicSystem, dtheta: &KForm, basis: &AnsatzBasis) -> Result<(AnsatzFit, Vec<Expr>), MeasureError> {
    let n = sys.dim();
    let m = sys.n_constraints();
    let nb = basis.functions.len();
    let unknowns = m * nb;
    let pairs = two_form_pairs(n);
    let mut exprs: Vec<Expr> = pairs.iter().map(|&(i, j)| dtheta.coeff(&[i, j])).collect();
    for eta in &sys.constraints {
        for b in &basis.functions {
            let f = eta.scale(b).d()?;
            exprs.extend(pairs.iter().map(|&(i, j)| f.coeff(&[i, j])));
        }
    }
    let tape = Tape::new(&exprs);
    let wanted = (4 * unknowns).max(sys.opts.samples);
    let pts = sys.domain.samples(wanted, sys.opts.seed ^ 0xA5A5_0F0F)?;
    let np = pairs.len();
    let mut rows_a: Vec<Vec<f64>> = Vec::new();
    let mut rows_b: Vec<f64> = Vec::new();
    let mut row_scale: Vec<f64> = Vec::new();
    let mut used = 0;
    for p in &pts {
        let Ok(tv) = tape.eval_scaled(p, sys.params()) else { continue };
        let v = tv.values;
        if v.iter().any(|x| !x.is_finite()) {
            continue;
        }
        used += 1;
        for r in 0..np {
            rows_b.push(-v[r]);
            rows_a.push((0..unknowns).map(|u| v[np * (u + 1) + r]).collect());
            row_scale.push(tv.scale);
        }
    }
    if used == 0 {
        return Err(SymError::Undecidable("no ansatz sample could be evaluated".into()).into());
    }
    let a = DMatrix::from_fn(rows_a.len(), unknowns, |r, c| rows_a[r][c]);
    let b = DVector::from_column_slice(&rows_b);
    // rows evaluated through heavy cancellation are trusted less
    let median_scale = {
        let mut v = row_scale.clone();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2].max(1e-300)
    };
    let weight: Vec<f64> = row_scale.iter().map(|s| 1.0 / (1.0 + s / median_scale)).collect();
    // column scaling keeps the rank decision independent of basis units
    let scales: Vec<f64> = (0..unknowns).map(|c| a.column(c).amax().max(1e-300)).collect();
    let a_s = DMatrix::from_fn(a.nrows(), unknowns, |r, c| weight[r] * a[(r, c)] / scales[c]);
    let b_w = DVector::from_fn(b.len(), |r, _| weight[r] * b[r]);
    let svd = a_s.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax.max(1e-300)).count();
    let y = svd
        .solve(&b_w, RANK_TOL * smax.max(1e-300))
        .map_err(|e| MeasureError::Precondition(e.to_string()))?;
    let coeffs: Vec<f64> = (0..unknowns).map(|c| y[c] / scales[c]).collect();
    let big = coeffs.iter().fold(0.0f64, |s, c| s.max(c.abs()));
    let norm = b.amax().max(a.amax() * big).max(1.0);
    // and get a rounding floor in proportion to the largest operand the
    // tape saw
    let res = &a * DVector::from_column_slice(&coeffs) - &b;
    let floor = sys.opts.tol / LSQ_TOL * (1.0 + big);
    let residual = res
        .iter()
        .zip(&row_scale)
        .map(|(r, sc)| r.abs() / (norm + floor * sc))
        .fold(0.0, f64::max);
    let ks: Vec<Expr> = (0..m)
        .map(|al| {
            let terms: Vec<Expr> = (0..nb)
                .filter(|&j| coeffs[al * nb + j].abs() > 1e-10 * big.max(1e-300) && coeffs[al * nb + j] != 0.0)
                .map(|j| Expr::constant(coeffs[al * nb + j]).mul(&basis.functions[j]))
                .collect();
            Expr::sum(&terms)
        })
        .collect();
    Ok((
        AnsatzFit {
            basis: basis.label.clone(),
            unknowns,
            samples: used,
            equations: a.nrows(),
            rank,
            nullspace_dim: unknowns - rank,
            residual,
            coefficients: coeffs,
        },
        ks,
    ))
}

fn with_multipliers(theta: &KForm, sys: &NonholonomicSystem, ks: &[Expr]) -> KForm {
    let mut f = theta.clone();
    for (k, eta) in ks.iter().zip(&sys.constraints) {
        if !k.is_const_zero() {
            f = f.add(&eta.scale(k));
        }
    }
    f
}

/// Restrict closedness to the distribution and decide it pointwise.
/// Returns the certificate and, when `k` is determined, the symbolic
/// multipliers.
fn curvature_certificate(
    sys: &NonholonomicSystem,
    theta: &KForm,
    dtheta: &KForm,
) -> Result<(CurvatureCertificate, Option<Vec<Expr>>), MeasureError> {
    let m = sys.n_constraints();
    let frame = sys.adapted_frame()?;
    let e = &frame.fields;
    let pairs = two_form_pairs(e.len());
    let deta: Vec<KForm> = sys.constraints.iter().map(|c| c.d()).collect::<Result<_, _>>()?;
    // row r: coefficients M[r][α] and right-hand side -dtheta(E_a, E_b)
    let mut mat: Vec<Vec<Expr>> = Vec::with_capacity(pairs.len());
    let mut rhs: Vec<Expr> = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        mat.push(deta.iter().map(|d| d.apply(&[&e[a], &e[b]])).collect::<Result<_, _>>()?);
        rhs.push(dtheta.apply(&[&e[a], &e[b]])?.neg());
    }
    let eqs = pairs.len();
    let shape = match eqs.cmp(&m) {
        std::cmp::Ordering::Greater => SystemShape::Overdetermined,
        std::cmp::Ordering::Equal => SystemShape::Determined,
        std::cmp::Ordering::Less => SystemShape::Underdetermined,
    };
    let mut cert = CurvatureCertificate {
        equations: eqs,
        unknowns: m,
        shape,
        certified_no: None,
    };
    if shape == SystemShape::Underdetermined {
        return Ok((cert, None));
    }
    let mut flat: Vec<Expr> = mat.iter().flatten().cloned().collect();
    flat.extend(rhs.iter().cloned());
    let tape = Tape::new(&flat);
    let eval = |q: &[f64]| -> Option<(DMatrix<f64>, DVector<f64>)> {
        let v = tape.eval(q, sys.params()).ok()?;
        v.iter().all(|x| x.is_finite()).then(|| {
            (
                DMatrix::from_row_slice(eqs, m, &v[..eqs * m]),
                DVector::from_column_slice(&v[eqs * m..]),
            )
        })
    };
    let (m0, _) = eval(&frame.center).ok_or_else(|| MeasureError::Precondition("curvature system fails at the domain center".into()))?;
    let svd0 = m0.clone().svd(false, false);
    if svd0.singular_values.min() <= 1e-8 * svd0.singular_values.max().max(1.0) {
        // k is not pinned down by the distribution alone
        cert.shape = SystemShape::Underdetermined;
        return Ok((cert, None));
    }

    // pick m rows that are best conditioned at the center
    let mut rows: Vec<usize> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for r in (0..eqs).filter(|r| !rows.contains(r)) {
            let mut trial = rows.clone();
            trial.push(r);
            let sub = DMatrix::from_fn(trial.len(), m, |i, j| m0[(trial[i], j)]);
            let sv = sub.svd(false, false).singular_values;
            let score = sv.min();
            if best.is_none_or(|b| score > b.1) {
                best = Some((r, score));
            }
        }
        rows.push(best.expect("rows remain").0);
    }
    let sub: Vec<Vec<Expr>> = rows.iter().map(|&r| mat[r].clone()).collect();
    let det = symlin::det(&sub);
    let ks: Vec<Expr> = (0..m)
        .map(|al| {
            let mut repl = sub.clone();
            for (i, &r) in rows.iter().enumerate() {
                repl[i][al] = rhs[r].clone();
            }
            symlin::det(&repl).div(&det)
        })
        .collect();

    // pointwise consistency of the remaining equations
    if shape == SystemShape::Overdetermined {
        for q in sys.domain.samples(sys.opts.samples, sys.opts.seed ^ 0x3C3C)? {
            let Some((mq, bq)) = eval(&q) else { continue };
            let svd = mq.clone().svd(true, true);
            let Ok(k) = svd.solve(&bq, 1e-12) else { continue };
            let res = (&mq * k - &bq).amax();
            let scale = bq.amax().max(mq.amax()).max(1.0);
            if res > 1e-6 * scale {
                cert.certified_no = Some(Witness {
                    sample: q,
                    residual: res / scale,
                    reason: "restricted closedness equations are inconsistent".into(),
                });
                return Ok((cert, Some(ks)));
            }
        }
    }
    let form = with_multipliers(theta, sys, &ks);
    let rep = form.d()?.zero_test(&sys.domain, sys.opts)?;
    if !rep.is_zero {
        let (q, _) = rep.witness.expect("nonzero has witness");
        cert.certified_no = Some(Witness {
            sample: q,
            residual: rep.max_residual,
            reason: "the unique multiplier forced on the distribution leaves a non-closed form".into(),
        });
    }
    Ok((cert, Some(ks)))
}

/// Decide whether `theta + Σ k_α eta^α` can be made exact and reconstruct
/// the potential when it can.
pub fn exactify(sys: &NonholonomicSystem, basis: &AnsatzBasis) -> Result<MeasureVerdict, MeasureError> {
    let theta = sys.density_form()?;
    let dtheta = theta.d()?;
    let closed = dtheta.zero_test(&sys.domain, sys.opts)?;
    let base = sys.domain.center()?;
    let separable = separable_components(&theta, &sys.domain, &base, &sys.angles, sys.opts);
    let mut verdict = MeasureVerdict {
        status: Status::NotClosedNoAnsatz,
        theta: theta.clone(),
        closedness: closed.clone(),
        multipliers: None,
        exact_form: None,
        ansatz: None,
        certificate: None,
        potential: None,
        separable,
        seed: sys.opts.seed,
    };
    if closed.is_zero {
        verdict.status = Status::ExactNoMultiplier;
        verdict.exact_form = Some(theta);
    } else {
        if !basis.functions.is_empty() {
            let (fit, ks) = ansatz_fit(sys, &dtheta, basis)?;
            let ok = fit.residual < LSQ_TOL;
            verdict.ansatz = Some(fit);
            if ok {
                let form = with_multipliers(&theta, sys, &ks);
                if form.d()?.zero_test(&sys.domain, sys.opts)?.is_zero {
                    verdict.status = Status::ExactWithMultiplier;
                    verdict.multipliers = Some(ks);
                    verdict.exact_form = Some(form);
                }
            }
        }
        if verdict.exact_form.is_none() {
            let (cert, ks) = curvature_certificate(sys, &theta, &dtheta)?;
            match (cert.certified_no.is_none(), ks) {
                (true, Some(ks)) => {
                    verdict.status = Status::ExactWithMultiplier;
                    verdict.exact_form = Some(with_multipliers(&theta, sys, &ks));
                    verdict.multipliers = Some(ks);
                }
                _ => {
                    verdict.status = if basis.functions.is_empty() {
                        Status::NotClosedNoAnsatz
                    } else {
                        Status::InconsistentOnAnsatz
                    };
                }
            }
            verdict.certificate = Some(cert);
        }
    }
    if let Some(form) = &verdict.exact_form {
        let mut field = quad::integrate(form, base.clone(), &sys.domain, grid(&sys.domain, &base, sys.opts)?)?;
        recognize_potential(&mut field, form, sys.params(), &sys.angles);
        verdict.potential = Some(field);
    }
    Ok(verdict)
}
