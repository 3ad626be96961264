use serde::Serialize;

use super::{Domain, Expr, SymError, Tape};

/// Sampling controls for identity checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleOpts {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SampleOpts {
    fn default() -> Self {
        SampleOpts {
            samples: 64,
            tol: 1e-9,
            seed: 0x5EED_2024,
        }
    }
}

/// Outcome of a randomized zero test over a set of expressions.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroReport {
    pub is_zero: bool,
    /// Largest normalized residual seen.
    pub max_residual: f64,
    /// First sample where some expression was nonzero, and its index.
    pub witness: Option<(Vec<f64>, usize)>,
    pub samples_used: usize,
    /// Samples dropped because evaluation left the real domain.
    pub skipped: usize,
    pub seed: u64,
}

/// Test whether every expression vanishes on `dom`. A value counts as zero
/// when `|v| <= tol * max(1, s)` where `s` is the largest operand entering
/// an addition or subtraction, so cancellations between large terms are
/// judged relative to those terms.
pub fn zero_test(exprs: &[Expr], dom: &Domain, opts: SampleOpts) -> Result<ZeroReport, SymError> {
    if opts.samples < 32 {
        return Err(SymError::Undecidable(format!(
            "zero test needs at least 32 samples, got {}",
            opts.samples
        )));
    }
    let live: Vec<Expr> = exprs.iter().filter(|e| !e.is_const_zero()).cloned().collect();
    let mut report = ZeroReport {
        is_zero: true,
        max_residual: 0.0,
        witness: None,
        samples_used: 0,
        skipped: 0,
        seed: opts.seed,
    };
    if live.is_empty() {
        return Ok(report);
    }
    let tape = Tape::new(&live);
    for q in dom.samples(opts.samples, opts.seed)? {
        let out = match tape.eval_scaled(&q, &dom.params) {
            Ok(v) => v,
            Err(SymError::Domain { .. }) => {
                report.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        report.samples_used += 1;
        let norm = out.scale.max(1.0);
        for (k, v) in out.values.iter().enumerate() {
            let r = v.abs() / norm;
            if r > report.max_residual {
                report.max_residual = r;
            }
            if r > opts.tol && report.witness.is_none() {
                report.is_zero = false;
                report.witness = Some((q.clone(), k));
            }
        }
    }
    if report.samples_used == 0 {
        return Err(SymError::Undecidable(
            "no sample could be evaluated inside the real domain".into(),
        ));
    }
    Ok(report)
}

/// Single-expression convenience wrapper around [`zero_test`].
pub fn is_zero(e: &Expr, dom: &Domain, n_samples: usize, tol: f64) -> Result<bool, SymError> {
    let opts = SampleOpts {
        samples: n_samples,
        tol,
        ..SampleOpts::default()
    };
    zero_test(std::slice::from_ref(e), dom, opts).map(|r| r.is_zero)
}
