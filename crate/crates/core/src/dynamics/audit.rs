use serde::Serialize;

use super::{DynError, ReducedChart};
use crate::nonhol::DIVERGENCE_FACTOR;

const FD_STEP: f64 = 1e-5;
const RICHARDSON_TRIGGER: f64 = 1e-6;
const CERTIFY_REL: f64 = 1e-4;
const FIT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RateSample {
    pub state: Vec<f64>,
    /// `tr DZ` in `(q, s)` coordinates.
    pub trace: f64,
    /// `Z · ∇ ln J`.
    pub advective_mu: f64,
    /// `Z · ∇ ln rho` (zero without a density).
    pub advective_rho: f64,
    /// Divergence of `Z` with respect to `rho mu`.
    pub total: f64,
    pub theta_qdot: f64,
    /// `-c theta(qdot)` with the configured factor.
    pub predicted: f64,
    /// Magnitude of the terms summed into `total`.
    pub scale: f64,
    pub richardson: bool,
}

/// Least-squares factor `c` in `div_mu Z = -c theta(qdot)`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FittedFactor {
    pub mean: f64,
    pub std: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RateAudit {
    pub samples: Vec<RateSample>,
    pub skipped: usize,
    pub max_abs_total: f64,
    pub field_scale: f64,
    /// Largest `|total| / scale` over the samples.
    pub max_relative: f64,
    pub certified: bool,
    /// Largest `|div_mu Z + c theta(qdot)|`.
    pub max_prediction_error: f64,
    pub fitted_factor: Option<FittedFactor>,
}

fn central(f: &dyn Fn(f64) -> Result<f64, DynError>, h: f64) -> Result<(f64, bool), DynError> {
    let d1 = (f(h)? - f(-h)?) / (2.0 * h);
    let h2 = 0.5 * h;
    let d2 = (f(h2)? - f(-h2)?) / (2.0 * h2);
    if (d1 - d2).abs() > RICHARDSON_TRIGGER * d1.abs().max(1.0) {
        Ok(((4.0 * d2 - d1) / 3.0, true))
    } else {
        Ok((d1, false))
    }
}

fn guard(chart: &ReducedChart, q: &[f64]) -> Result<(), DynError> {
    if chart.domain().guards_ok(q) {
        Ok(())
    } else {
        Err(DynError::Guard(q.to_vec()))
    }
}

fn sample(chart: &ReducedChart, log_rho: Option<LogDensity<'_>>, x: &[f64]) -> Result<RateSample, DynError> {
    let n = chart.n();
    let z = chart.field(x)?;
    let mut trace = 0.0;
    let mut scale = 0.0;
    let mut rich = false;
    for i in 0..x.len() {
        let h = FD_STEP * x[i].abs().max(1.0);
        let f = |t: f64| -> Result<f64, DynError> {
            let mut y = x.to_vec();
            y[i] += t;
            guard(chart, &y[..n])?;
            Ok(chart.field(&y)?[i])
        };
        let (d, r) = central(&f, h)?;
        trace += d;
        scale += d.abs();
        rich |= r;
    }
    let q = &x[..n];
    let qdot = &z[..n];
    let along = |g: &dyn Fn(&[f64]) -> Result<f64, DynError>| {
        let f = |t: f64| -> Result<f64, DynError> {
            let y: Vec<f64> = q.iter().zip(qdot).map(|(a, b)| a + t * b).collect();
            guard(chart, &y)?;
            g(&y)
        };
        central(&f, FD_STEP)
    };
    let (adv_mu, r1) = along(&|y| Ok(chart.mu_density(y)?.ln()))?;
    let (adv_rho, r2) = match log_rho {
        Some(f) => along(f)?,
        None => (0.0, false),
    };
    let theta_qdot = chart.theta_qdot(x)?;
    let zmax = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = zmax.max(scale + adv_mu.abs() + adv_rho.abs());
    Ok(RateSample {
        state: x.to_vec(),
        trace,
        advective_mu: adv_mu,
        advective_rho: adv_rho,
        total: trace + adv_mu + adv_rho,
        theta_qdot,
        predicted: -DIVERGENCE_FACTOR * theta_qdot,
        scale,
        richardson: rich || r1 || r2,
    })
}

/// `q -> ln rho(q)`.
pub type LogDensity<'a> = &'a dyn Fn(&[f64]) -> Result<f64, DynError>;

/// Finite-difference divergence of the reduced flow with respect to
/// `rho(q) mu` at the given `(q, s)` states. States where any evaluation
/// fails are skipped and counted.
pub fn volume_rate_audit(
    chart: &ReducedChart,
    states: &[Vec<f64>],
    log_rho: Option<LogDensity<'_>>,
) -> Result<RateAudit, DynError> {
    let mut samples = Vec::with_capacity(states.len());
    let mut skipped = 0;
    let mut field_scale = 0.0f64;
    for x in states {
        if x.len() != chart.dim() {
            return Err(DynError::Shape {
                expected: chart.dim(),
                found: x.len(),
            });
        }
        match sample(chart, log_rho, x) {
            Ok(s) if s.total.is_finite() => {
                field_scale = field_scale.max(s.scale);
                samples.push(s);
            }
            Ok(_) | Err(DynError::Sym(_)) | Err(DynError::Singular(_)) | Err(DynError::Density(_)) | Err(DynError::Guard(_)) => {
                skipped += 1
            }
            Err(e) => return Err(e),
        }
    }
    let max_abs_total = samples.iter().map(|s| s.total.abs()).fold(0.0, f64::max);
    let max_relative = samples
        .iter()
        .map(|s| s.total.abs() / s.scale.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let max_prediction_error = samples
        .iter()
        .map(|s| (s.trace + s.advective_mu - s.predicted).abs())
        .fold(0.0, f64::max);
    let ratios: Vec<f64> = samples
        .iter()
        .filter(|s| s.theta_qdot.abs() > FIT_THRESHOLD)
        .map(|s| -(s.trace + s.advective_mu) / s.theta_qdot)
        .collect();
    let fitted_factor = (!ratios.is_empty()).then(|| {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64;
        FittedFactor {
            mean,
            std: var.sqrt(),
            samples: ratios.len(),
        }
    });
    Ok(RateAudit {
        certified: !samples.is_empty() && max_relative < CERTIFY_REL,
        samples,
        skipped,
        max_abs_total,
        field_scale,
        max_relative,
        max_prediction_error,
        fitted_factor,
    })
}

impl ReducedChart {
    /// Reduced states with `q` drawn from the domain and `s` uniform in
    /// `[-1, 1]`.
    pub fn random_states(&self, domain: &crate::symexpr::Domain, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, DynError> {
        use rand::{Rng, SeedableRng};
        let qs = domain.samples(count, seed)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
        Ok(qs
            .into_iter()
            .map(|mut q| {
                q.extend((0..self.dim() - self.n()).map(|_| rng.random_range(-1.0..1.0)));
                q
            })
            .collect())
    }
}
