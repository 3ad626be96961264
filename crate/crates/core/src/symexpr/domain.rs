use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expr, SymError, Tape};

/// A box in chart coordinates with parameter values bound and optional
/// `guard != 0` exclusions.
#[derive(Debug, Clone)]
pub struct Domain {
    pub intervals: Vec<(f64, f64)>,
    pub params: Vec<f64>,
    pub guards: Vec<Expr>,
    /// Samples with `|guard| < guard_margin` are rejected.
    pub guard_margin: f64,
    guard_tape: Tape,
}

impl Domain {
    pub fn new(
        intervals: Vec<(f64, f64)>,
        params: Vec<f64>,
        guards: Vec<Expr>,
    ) -> Result<Self, SymError> {
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(SymError::InvalidDomain(format!(
                    "interval #{i} [{lo}, {hi}] is empty or unbounded"
                )));
            }
        }
        let guard_tape = Tape::new(&guards);
        Ok(Domain {
            intervals,
            params,
            guards,
            guard_margin: 1e-2,
            guard_tape,
        })
    }

    /// Unguarded box with no parameters.
    pub fn boxed(intervals: Vec<(f64, f64)>) -> Self {
        Domain::new(intervals, Vec::new(), Vec::new()).expect("valid box")
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Self {
        self.params = params;
        self
    }

    pub fn in_box(&self, q: &[f64]) -> bool {
        q.len() == self.dim()
            && q
                .iter()
                .zip(&self.intervals)
                .all(|(x, &(lo, hi))| *x >= lo && *x <= hi)
    }

    /// Whether every guard is safely away from zero at `q`.
    pub fn guards_ok(&self, q: &[f64]) -> bool {
        if self.guards.is_empty() {
            return true;
        }
        match self.guard_tape.eval(q, &self.params) {
            Ok(vals) => vals.iter().all(|g| g.abs() >= self.guard_margin),
            Err(_) => false,
        }
    }

    /// Raw guard values at `q`, or `None` when they cannot be evaluated.
    pub fn guard_values(&self, q: &[f64]) -> Option<Vec<f64>> {
        self.guard_tape.eval(q, &self.params).ok()
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        self.in_box(q) && self.guards_ok(q)
    }

    /// Up to `n` guard-respecting points drawn uniformly from the box.
    /// Deterministic in `seed`.
    pub fn samples(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, SymError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        let max_tries = 200 * n.max(1);
        for _ in 0..max_tries {
            if out.len() == n {
                break;
            }
            let q = self.draw(&mut rng);
            if self.guards_ok(&q) {
                out.push(q);
            }
        }
        if out.is_empty() && n > 0 {
            return Err(SymError::Undecidable(
                "every sample was rejected by the domain guards".into(),
            ));
        }
        Ok(out)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo })
            .collect()
    }

    /// Midpoint of the box, or the admissible sample nearest to it when the
    /// midpoint sits on a guard.
    pub fn center(&self) -> Result<Vec<f64>, SymError> {
        let mid: Vec<f64> = self.intervals.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
        if self.guards_ok(&mid) {
            return Ok(mid);
        }
        let cands = self.samples(512, 0xC3_47E5)?;
        let dist = |q: &Vec<f64>| -> f64 {
            q.iter()
                .zip(&mid)
                .zip(&self.intervals)
                .map(|((x, m), &(lo, hi))| ((x - m) / (hi - lo).max(1e-12)).powi(2))
                .sum()
        };
        Ok(cands
            .into_iter()
            .min_by(|a, b| dist(a).total_cmp(&dist(b)))
            .expect("nonempty"))
    }
}
