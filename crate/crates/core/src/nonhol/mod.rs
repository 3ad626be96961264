//! Natural nonholonomic systems: metric, potential and linear constraints on
//! one chart, with the derived constraint fields, mass matrix, density form
//! and torsion trace.

mod frame;
pub mod symlin;

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::extalg::{FormError, KForm, VectorField};
use crate::symexpr::{zero_test, Domain, Expr, SampleOpts, SymError, Symbols, Tape};

pub use frame::Frame;
use symlin::SymMatrix;

/// Proportionality constant in `div = -c * theta(qdot)`, measured against
/// the finite-difference divergence of the reduced flow on the constrained
/// momentum space.
pub const DIVERGENCE_FACTOR: f64 = 1.0;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NonholError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("{0}")]
    Shape(String),
    #[error("metric is not symmetric: g[{i}][{j}] != g[{j}][{i}]")]
    NotSymmetric { i: usize, j: usize },
    #[error("metric is not positive definite at {sample:?}")]
    NotPositiveDefinite { sample: Vec<f64> },
    #[error("constraints are linearly dependent at {sample:?}")]
    RankDeficient { sample: Vec<f64> },
    #[error("velocity violates the constraints (residual {residual:e})")]
    ConstraintViolation { residual: f64 },
    #[error("frame construction failed: {0}")]
    Frame(String),
}

/// Mass matrix `m^{ab} = eta^a(W^b)`, its inverse `m_{ab}` and determinant.
#[derive(Debug, Clone)]
pub struct MassMatrix {
    pub upper: SymMatrix,
    pub lower: SymMatrix,
    pub det: Expr,
}

#[derive(Debug)]
struct Derived {
    w: Vec<VectorField>,
    mass: MassMatrix,
}

/// A natural mechanical system `L = ½ g(v, v) - V` with homogeneous linear
/// constraints `eta^a(v) = 0`.
#[derive(Debug, Clone)]
pub struct NonholonomicSystem {
    pub name: String,
    pub symbols: Symbols,
    pub metric: SymMatrix,
    pub potential: Expr,
    pub constraints: Vec<KForm>,
    pub domain: Domain,
    /// Coordinates treated as angles when building trigonometric bases.
    pub angles: Vec<bool>,
    pub opts: SampleOpts,
    derived: OnceLock<Arc<Derived>>,
    numeric: OnceLock<Arc<Tape>>,
}

/// Outcome of the involutivity check on the constraint distribution.
#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusReport {
    pub holonomic: bool,
    /// `(alpha, a, b)` with `eta^alpha([E_a, E_b]) != 0`, and the sample.
    pub witness: Option<(usize, usize, usize, Vec<f64>)>,
}

impl NonholonomicSystem {
    /// Assemble and validate a system. Parameter values live in `domain.params`.
    pub fn new(
        name: impl Into<String>,
        symbols: Symbols,
        metric: SymMatrix,
        potential: Expr,
        constraints: Vec<KForm>,
        domain: Domain,
    ) -> Result<Self, NonholError> {
        let n = symbols.dim();
        let sys = NonholonomicSystem {
            name: name.into(),
            angles: vec![false; n],
            symbols,
            metric,
            potential,
            constraints,
            domain,
            opts: SampleOpts::default(),
            derived: OnceLock::new(),
            numeric: OnceLock::new(),
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_angles(mut self, angles: Vec<bool>) -> Self {
        self.angles = angles;
        self
    }

    pub fn with_opts(mut self, opts: SampleOpts) -> Self {
        self.opts = opts;
        self
    }

    pub fn dim(&self) -> usize {
        self.symbols.dim()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.domain.params
    }

    fn validate(&self) -> Result<(), NonholError> {
        let n = self.dim();
        let m = self.n_constraints();
        if self.metric.len() != n || self.metric.iter().any(|r| r.len() != n) {
            return Err(NonholError::Shape(format!("metric must be {n}x{n}")));
        }
        if self.domain.dim() != n {
            return Err(NonholError::Shape(format!(
                "domain has {} intervals for {n} coordinates",
                self.domain.dim()
            )));
        }
        if m == 0 || m >= n {
            return Err(NonholError::Shape(format!(
                "need 0 < constraints < coordinates, got {m} constraints on {n} coordinates"
            )));
        }
        for c in &self.constraints {
            if c.degree() != 1 || c.dim() != n {
                return Err(NonholError::Shape("constraints must be 1-forms on the chart".into()));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let diff = self.metric[i][j].sub(&self.metric[j][i]);
                if !zero_test(&[diff], &self.domain, self.opts)?.is_zero {
                    return Err(NonholError::NotSymmetric { i, j });
                }
            }
        }
        for q in self.domain.samples(self.opts.samples, self.opts.seed)? {
            let (g, a) = match self.numeric_at(&q) {
                Ok(v) => v,
                Err(NonholError::Sym(SymError::Domain { .. })) => continue,
                Err(e) => return Err(e),
            };
            if g.clone().cholesky().is_none() {
                return Err(NonholError::NotPositiveDefinite { sample: q });
            }
            let gram = &a * a.transpose();
            let scale = gram.diagonal().max().max(1e-300);
            match gram.clone().cholesky() {
                Some(ch) if ch.l().diagonal().iter().all(|d| d * d > 1e-12 * scale) => {}
                _ => return Err(NonholError::RankDeficient { sample: q }),
            }
        }
        Ok(())
    }

    fn numeric_tape(&self) -> &Tape {
        self.numeric.get_or_init(|| {
            let mut exprs: Vec<Expr> = self.metric.iter().flatten().cloned().collect();
            for c in &self.constraints {
                exprs.extend(c.components());
            }
            Arc::new(Tape::new(&exprs))
        })
    }

    /// Metric and constraint matrix (rows `eta^a`) at `q`.
    pub fn numeric_at(&self, q: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), NonholError> {
        let n = self.dim();
        let m = self.n_constraints();
        let vals = self.numeric_tape().eval(q, self.params())?;
        let g = DMatrix::from_row_slice(n, n, &vals[..n * n]);
        let a = DMatrix::from_row_slice(m, n, &vals[n * n..]);
        Ok((g, a))
    }

    fn derived(&self) -> &Derived {
        self.derived.get_or_init(|| {
            let n = self.dim();
            let rhs: SymMatrix = (0..n)
                .map(|i| self.constraints.iter().map(|c| c.coeff(&[i])).collect())
                .collect();
            let sol = symlin::solve_spd(&self.metric, &rhs);
            let w: Vec<VectorField> = (0..self.n_constraints())
                .map(|a| VectorField::new((0..n).map(|i| sol[i][a].clone()).collect()))
                .collect();
            let upper: SymMatrix = self
                .constraints
                .iter()
                .map(|ea| {
                    w.iter()
                        .map(|wb| ea.contract(wb).expect("1-form").as_scalar())
                        .collect()
                })
                .collect();
            let (lower, det) = symlin::inverse_spd(&upper);
            Arc::new(Derived {
                w,
                mass: MassMatrix { upper, lower, det },
            })
        })
    }

    /// Metric dual `g^{-1} a` of a 1-form.
    pub fn sharp(&self, a: &KForm) -> VectorField {
        let n = self.dim();
        let rhs: SymMatrix = (0..n).map(|i| vec![a.coeff(&[i])]).collect();
        let sol = symlin::solve_spd(&self.metric, &rhs);
        VectorField::new(sol.into_iter().map(|mut r| r.remove(0)).collect())
    }

    /// The constraint fields `W^a = sharp(eta^a)`.
    pub fn constraint_fields(&self) -> &[VectorField] {
        &self.derived().w
    }

    pub fn mass_matrix(&self) -> &MassMatrix {
        &self.derived().mass
    }

    /// `theta = m_{ab} L_{W^a} eta^b`.
    pub fn density_form(&self) -> Result<KForm, NonholError> {
        let d = self.derived();
        let mut out = KForm::zero(self.dim(), 1);
        for (a, wa) in d.w.iter().enumerate() {
            for (b, eb) in self.constraints.iter().enumerate() {
                let lie = eb.lie_derivative(wa)?;
                out = out.add(&lie.scale(&d.mass.lower[a][b]));
            }
        }
        Ok(out)
    }

    /// `tr T = m_{ab} i_{W^a} d eta^b`.
    pub fn torsion_trace(&self) -> Result<KForm, NonholError> {
        let d = self.derived();
        let mut out = KForm::zero(self.dim(), 1);
        for (a, wa) in d.w.iter().enumerate() {
            for (b, eb) in self.constraints.iter().enumerate() {
                let t = eb.d()?.contract(wa)?;
                out = out.add(&t.scale(&d.mass.lower[a][b]));
            }
        }
        Ok(out)
    }

    /// A frame of the constraint distribution (see [`Frame`]).
    pub fn adapted_frame(&self) -> Result<Frame, NonholError> {
        Frame::build(self)
    }

    pub fn frobenius_test(&self) -> Result<FrobeniusReport, NonholError> {
        let frame = self.adapted_frame()?;
        let e = &frame.fields;
        for a in 0..e.len() {
            for b in a + 1..e.len() {
                let br = e[a].bracket(&e[b])?;
                for (alpha, eta) in self.constraints.iter().enumerate() {
                    let v = eta.contract(&br)?.as_scalar();
                    let rep = zero_test(&[v], &self.domain, self.opts)?;
                    if !rep.is_zero {
                        let (q, _) = rep.witness.expect("nonzero has witness");
                        return Ok(FrobeniusReport {
                            holonomic: false,
                            witness: Some((alpha, a, b, q)),
                        });
                    }
                }
            }
        }
        Ok(FrobeniusReport {
            holonomic: true,
            witness: None,
        })
    }

    /// Divergence of the constrained flow with respect to the nonholonomic
    /// volume, `-c * theta(qdot)` with `c = DIVERGENCE_FACTOR`.
    pub fn divergence(&self, theta: &KForm, q: &[f64], qdot: &[f64]) -> Result<f64, NonholError> {
        let (_, a) = self.numeric_at(q)?;
        let v = DVector::from_column_slice(qdot);
        let residual = (&a * &v).amax();
        if residual > 1e-10 {
            return Err(NonholError::ConstraintViolation { residual });
        }
        let th = theta.eval_components(q, self.params())?;
        let val: f64 = th.iter().zip(qdot).map(|(t, v)| t * v).sum();
        Ok(-DIVERGENCE_FACTOR * val)
    }

    /// Same system with constraint `index` multiplied by `h`.
    pub fn rescaled(&self, index: usize, h: &Expr) -> Result<Self, NonholError> {
        let mut constraints = self.constraints.clone();
        constraints[index] = constraints[index].scale(h);
        let mut sys = NonholonomicSystem::new(
            self.name.clone(),
            self.symbols.clone(),
            self.metric.clone(),
            self.potential.clone(),
            constraints,
            self.domain.clone(),
        )?;
        sys.angles = self.angles.clone();
        sys.opts = self.opts;
        Ok(sys)
    }

    /// Same system with the constraints listed in a different order.
    pub fn reordered(&self, order: &[usize]) -> Result<Self, NonholError> {
        let constraints = order.iter().map(|&i| self.constraints[i].clone()).collect();
        let mut sys = NonholonomicSystem::new(
            self.name.clone(),
            self.symbols.clone(),
            self.metric.clone(),
            self.potential.clone(),
            constraints,
            self.domain.clone(),
        )?;
        sys.angles = self.angles.clone();
        sys.opts = self.opts;
        Ok(sys)
    }
}
