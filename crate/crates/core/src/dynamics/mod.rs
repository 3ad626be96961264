//! Constrained equations of motion, a projected RK4 integrator, the reduced
//! `(q, s)` chart and finite-difference audits of the phase-volume rate.

mod audit;
mod kernel;
mod reduced;

pub use audit::{volume_rate_audit, FittedFactor, LogDensity, RateAudit, RateSample};
pub use kernel::{Kernel, Snapshot};
pub use reduced::{ReducedChart, WedgeCheck};

pub use crate::nonhol::Frame;

use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::nonhol::{NonholError, NonholonomicSystem};
use crate::symexpr::{SymError, Tape};

#[derive(Debug, Error)]
pub enum DynError {
    #[error(transparent)]
    Nonhol(#[from] NonholError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("{0} is singular")]
    Singular(&'static str),
    #[error("state became non-finite after t = {t_last_good}")]
    NonFinite { t_last_good: f64, partial: Box<Trajectory> },
    #[error("evaluation failed after t = {t_last_good}: {source}")]
    Evaluation {
        t_last_good: f64,
        source: Box<DynError>,
        partial: Box<Trajectory>,
    },
    #[error("invalid integration settings: {0}")]
    Settings(String),
    #[error("initial state has {found} components, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("finite-difference stencil meets a domain guard at {0:?}")]
    Guard(Vec<f64>),
    #[error("density evaluation failed: {0}")]
    Density(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Lagrange-d'Alembert right-hand side: returns `(qdot, vdot)`.
pub fn eom(kernel: &Kernel, q: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>), DynError> {
    let snap = kernel.snapshot(q)?;
    let (qdd, _) = snap.acceleration(&DVector::from_column_slice(v))?;
    Ok((v.to_vec(), qdd.as_slice().to_vec()))
}

/// Sampled solution with per-step monitors.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub constraint_residual: Vec<f64>,
    /// `-c * theta(qdot)` along the solution.
    pub divergence: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    pub fn max_constraint_residual(&self) -> f64 {
        self.constraint_residual.iter().copied().fold(0.0, f64::max)
    }

    /// One row per sample: `t, q..., v..., energy, constraint_residual, divergence`.
    pub fn write_csv<W: Write>(&self, out: W, coords: &[String]) -> Result<(), DynError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(coords.iter().cloned());
        header.extend(coords.iter().map(|c| format!("d{c}")));
        header.extend(["energy", "constraint_residual", "divergence"].map(String::from));
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![self.t[k]];
            row.extend(&self.q[k]);
            row.extend(&self.v[k]);
            row.extend([self.energy[k], self.constraint_residual[k], self.divergence[k]]);
            w.write_record(row.iter().map(|&x| csv_number(x)))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Shortest round-trip text, in exponent form for very small or large values.
fn csv_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Fixed-step integrator for a constrained system.
#[derive(Debug, Clone)]
pub struct Integrator {
    kernel: Kernel,
    theta: Tape,
    params: Vec<f64>,
}

impl Integrator {
    pub fn new(sys: &NonholonomicSystem) -> Result<Self, DynError> {
        let theta = sys.density_form()?;
        Ok(Integrator {
            kernel: Kernel::new(sys),
            theta: Tape::new(&theta.components()),
            params: sys.params().to_vec(),
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    fn record(&self, traj: &mut Trajectory, t: f64, q: &[f64], v: &DVector<f64>) -> Result<(), DynError> {
        let snap = self.kernel.snapshot(q)?;
        let th = self.theta.eval(q, &self.params)?;
        let div: f64 = th.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        traj.t.push(t);
        traj.q.push(q.to_vec());
        traj.v.push(v.as_slice().to_vec());
        traj.energy.push(snap.energy(v));
        traj.constraint_residual.push(snap.constraint_residual(v));
        traj.divergence.push(-crate::nonhol::DIVERGENCE_FACTOR * div);
        Ok(())
    }

    fn rhs(&self, x: &DVector<f64>) -> Result<DVector<f64>, DynError> {
        let n = self.kernel.dim();
        let q = x.rows(0, n);
        let v = x.rows(n, n).into_owned();
        let snap = self.kernel.snapshot(q.as_slice())?;
        let (qdd, _) = snap.acceleration(&v)?;
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&v);
        out.rows_mut(n, n).copy_from(&qdd);
        Ok(out)
    }

    /// Integrate from `(q0, v0)` over `[t0, t0 + duration]` with step `h`.
    /// The initial velocity is projected onto the constraint distribution and
    /// the velocity is re-projected after every step.
    pub fn integrate(&self, q0: &[f64], v0: &[f64], t0: f64, duration: f64, h: f64) -> Result<Trajectory, DynError> {
        let n = self.kernel.dim();
        for x in [q0, v0] {
            if x.len() != n {
                return Err(DynError::Shape {
                    expected: n,
                    found: x.len(),
                });
            }
        }
        if !(h > 0.0 && h.is_finite()) || !(duration >= 0.0 && duration.is_finite()) || !t0.is_finite() {
            return Err(DynError::Settings(format!("need h > 0 and T >= 0, got h = {h}, T = {duration}")));
        }
        let steps = (duration / h).round() as usize;
        let mut traj = Trajectory::default();
        let snap = self.kernel.snapshot(q0)?;
        let v = snap.project(&DVector::from_column_slice(v0))?;
        let mut x = DVector::zeros(2 * n);
        x.rows_mut(0, n).copy_from_slice(q0);
        x.rows_mut(n, n).copy_from(&v);
        self.record(&mut traj, t0, q0, &v)?;

        for k in 0..steps {
            let t = t0 + k as f64 * h;
            let step = || -> Result<DVector<f64>, DynError> {
                let k1 = self.rhs(&x)?;
                let k2 = self.rhs(&(&x + &k1 * (0.5 * h)))?;
                let k3 = self.rhs(&(&x + &k2 * (0.5 * h)))?;
                let k4 = self.rhs(&(&x + &k3 * h))?;
                let mut next = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                let q = next.rows(0, n).into_owned();
                let snap = self.kernel.snapshot(q.as_slice())?;
                let v = snap.project(&next.rows(n, n).into_owned())?;
                next.rows_mut(n, n).copy_from(&v);
                Ok(next)
            };
            match step() {
                Ok(next) if next.iter().all(|c| c.is_finite()) => x = next,
                Ok(_) => {
                    return Err(DynError::NonFinite {
                        t_last_good: t,
                        partial: Box::new(traj),
                    })
                }
                Err(e) => {
                    return Err(DynError::Evaluation {
                        t_last_good: t,
                        source: Box::new(e),
                        partial: Box::new(traj),
                    })
                }
            }
            let q = x.rows(0, n).into_owned();
            let v = x.rows(n, n).into_owned();
            self.record(&mut traj, t0 + (k + 1) as f64 * h, q.as_slice(), &v)?;
        }
        Ok(traj)
    }
}
