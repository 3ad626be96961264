//! Batch front end: input documents, reports and commands.

pub mod files;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::dynamics::{volume_rate_audit, DynError, Integrator, ReducedChart};
use crate::liealg::{fd_divergence, LieError};
use crate::measure::{exactify, AnsatzBasis};
use crate::nonhol::NonholonomicSystem;
use crate::symexpr::{parse, SampleOpts};
use files::{EpsFile, SystemFile};
use report::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nhvol", version, about = "Invariant volumes of nonholonomic systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Random samples for zero tests and grids.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Relative tolerance of zero tests.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = SampleOpts::default().seed)]
    pub seed: u64,
    /// Multiplier ansatz: default, trig, poly, none, or `custom:f1,f2,...`.
    #[arg(long, default_value = "default")]
    pub basis: String,
    /// Output file; `-` writes the machine-readable output to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Timing {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    #[arg(long = "T", default_value_t = 10.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Initial state `q=...;v=...` with comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a configuration-dependent invariant volume exists.
    Audit {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate the equations of motion and export the trajectory as CSV.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
    },
    /// Finite-difference divergence audit along a trajectory.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        /// Density `rho(q)` to test; defaults to 1.
        #[arg(long)]
        density: Option<String>,
    },
    /// Euler-Poincare-Suslov analysis on a Lie algebra.
    Eps {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct CliError(String);

fn err(e: impl std::fmt::Display) -> CliError {
    CliError(e.to_string())
}

fn settings(c: &Common) -> Settings {
    Settings {
        samples: c.samples,
        tol: c.tol,
        seed: c.seed,
        basis: c.basis.clone(),
    }
}

fn load_system(path: &Path, s: &Settings) -> Result<NonholonomicSystem, CliError> {
    let file = SystemFile::load(path).map_err(err)?;
    file.to_system(s.opts()).map_err(err)
}

fn basis_for(name: &str, sys: &NonholonomicSystem) -> Result<AnsatzBasis, CliError> {
    if let Some(list) = name.strip_prefix("custom:") {
        let fs = list
            .split(',')
            .map(|t| parse(t.trim(), &sys.symbols))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError(format!("--basis: {e}")))?;
        return Ok(AnsatzBasis::custom(name, fs));
    }
    AnsatzBasis::by_name(name, sys).map_err(err)
}

/// Write `text` to `--out` (or stdout for `-`). Returns whether stdout was used.
fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<bool, CliError> {
    match out {
        Some(p) if p.as_os_str() == "-" => {
            stdout.write_all(text.as_bytes()).map_err(err)?;
            Ok(true)
        }
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError(format!("{}: {e}", p.display())))?;
            Ok(false)
        }
        None => Ok(false),
    }
}

fn parse_init(text: &str, n: usize) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut q = None;
    let mut v = None;
    for part in text.split(';') {
        let (key, vals) = part
            .split_once('=')
            .ok_or_else(|| CliError(format!("--init: expected q=...;v=..., got '{part}'")))?;
        let nums = vals
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError(format!("--init: {e}")))?;
        if nums.len() != n {
            return Err(CliError(format!("--init: '{}' needs {n} values, got {}", key.trim(), nums.len())));
        }
        match key.trim() {
            "q" => q = Some(nums),
            "v" => v = Some(nums),
            other => return Err(CliError(format!("--init: unknown key '{other}'"))),
        }
    }
    Ok((
        q.ok_or_else(|| CliError("--init: missing q".into()))?,
        v.unwrap_or_else(|| vec![0.0; n]),
    ))
}

fn initial_state(path: &Path, timing: &Timing, sys: &NonholonomicSystem) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    if let Some(text) = &timing.init {
        return parse_init(text, sys.dim());
    }
    let file = SystemFile::load(path).map_err(err)?;
    match file.initial {
        Some(s) if s.q.len() == sys.dim() && s.v.len() == sys.dim() => Ok((s.q, s.v)),
        Some(_) => Err(CliError("initial: wrong number of components".into())),
        None => Ok((sys.domain.center().map_err(err)?, vec![0.0; sys.dim()])),
    }
}

fn audit(file: &Path, common: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let s = settings(common);
    let sys = load_system(file, &s)?;
    let basis = basis_for(&common.basis, &sys)?;
    let theta = sys.density_form().map_err(err)?;
    let frob = sys.frobenius_test().map_err(err)?;
    let verdict = exactify(&sys, &basis).map_err(err)?;
    let chart = ReducedChart::new(&sys).map_err(err)?;
    let states = chart
        .random_states(&sys.domain, (s.samples / 4).max(8), s.seed ^ 0x5A5A)
        .map_err(err)?;
    let log_rho = |q: &[f64]| -> Result<f64, DynError> {
        let p = verdict.potential.as_ref().expect("checked by caller");
        p.value_at(q).map_err(|e| DynError::Density(e.to_string()))
    };
    let with_density = verdict.potential.is_some();
    let rate = if with_density {
        volume_rate_audit(&chart, &states, Some(&log_rho))
    } else {
        volume_rate_audit(&chart, &states, None)
    }
    .map_err(err)?;
    let exit = if verdict.status.is_exact() && rate.certified {
        EXIT_OK
    } else {
        EXIT_REFUTED
    };
    let rep = report::audit_report(&report::AuditParts {
        sys: &sys,
        settings: &s,
        theta: &theta,
        frobenius: &frob,
        verdict: &verdict,
        rate: &rate,
        rate_with_density: with_density,
        exit_code: exit,
    });
    let to_stdout = emit(&common.out, &report::to_pretty(rep), stdout)?;
    if !to_stdout {
        let mut w = |line: String| writeln!(stdout, "{line}").map_err(err);
        w(format!("system        {}", sys.name))?;
        w(format!("verdict       {}", serde_json::to_value(verdict.status).map_err(err)?.as_str().unwrap_or("?")))?;
        w(format!("closed        {} (residual {:.3e})", verdict.closedness.is_zero, verdict.closedness.max_residual))?;
        if let Some(ks) = verdict.display_multipliers(&sys.symbols) {
            w(format!("multipliers   {}", ks.join(", ")))?;
        }
        if let Some(wit) = verdict.certified_no() {
            w(format!("certified no  at {:?}: {}", wit.sample, wit.reason))?;
        }
        if let Some(p) = &verdict.potential {
            let d = p.expr.as_ref().map_or("numeric only".to_string(), |e| format!("exp({})", e.display(&sys.symbols)));
            w(format!("density       {d}"))?;
            w(format!("path check    {:.3e}", p.path_discrepancy))?;
        }
        for part in &verdict.separable {
            if let Some(e) = &part.expr {
                w(format!("separable     d{}: {}", sys.symbols.coords[part.coordinate], e.display(&sys.symbols)))?;
            }
        }
        w(format!(
            "rate audit    certified={} max|rate|={:.3e} max relative={:.3e}",
            rate.certified, rate.max_abs_total, rate.max_relative
        ))?;
        if let Some(c) = &rate.fitted_factor {
            w(format!("fitted c      {:.9} (std {:.2e}, {} states)", c.mean, c.std, c.samples))?;
        }
        w(format!("seed          {}", s.seed))?;
    }
    Ok(exit)
}

fn simulate(file: &Path, common: &Common, timing: &Timing, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let s = settings(common);
    let sys = load_system(file, &s)?;
    let (q0, v0) = initial_state(file, timing, &sys)?;
    let integ = Integrator::new(&sys).map_err(err)?;
    let traj = integ.integrate(&q0, &v0, timing.t0, timing.duration, timing.h).map_err(err)?;
    let csv_to_stdout = matches!(&common.out, Some(p) if p.as_os_str() == "-");
    match &common.out {
        Some(p) if p.as_os_str() == "-" => traj.write_csv(&mut *stdout, &sys.symbols.coords).map_err(err)?,
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| CliError(format!("{}: {e}", p.display())))?;
            traj.write_csv(f, &sys.symbols.coords).map_err(err)?;
        }
        None => {}
    }
    let e0 = traj.energy[0];
    let drift = traj.energy_drift();
    if !csv_to_stdout {
        writeln!(stdout, "system          {}", sys.name).map_err(err)?;
        writeln!(stdout, "steps           {}", traj.len() - 1).map_err(err)?;
        writeln!(stdout, "energy drift    {drift:.3e} (relative {:.3e})", drift / e0.abs().max(1e-300)).map_err(err)?;
        writeln!(stdout, "constraint max  {:.3e}", traj.max_constraint_residual()).map_err(err)?;
        writeln!(stdout, "final q         {:?}", traj.q.last().expect("nonempty")).map_err(err)?;
    }
    Ok(EXIT_OK)
}

fn verify(file: &Path, common: &Common, timing: &Timing, density: Option<&str>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let s = settings(common);
    let sys = load_system(file, &s)?;
    let (q0, v0) = initial_state(file, timing, &sys)?;
    let integ = Integrator::new(&sys).map_err(err)?;
    let traj = integ.integrate(&q0, &v0, timing.t0, timing.duration, timing.h).map_err(err)?;
    let chart = ReducedChart::new(&sys).map_err(err)?;
    let count = s.samples.clamp(1, traj.len());
    let stride = (traj.len() / count).max(1);
    let states = (0..traj.len())
        .step_by(stride)
        .take(count)
        .map(|k| {
            let s = chart.frame_coords(&traj.q[k], &traj.v[k])?;
            let mut x = traj.q[k].clone();
            x.extend(s);
            Ok(x)
        })
        .collect::<Result<Vec<_>, DynError>>()
        .map_err(err)?;
    let rho = density
        .map(|d| parse(d, &sys.symbols).map_err(|e| CliError(format!("--density: {e}"))))
        .transpose()?;
    let params = sys.params().to_vec();
    let log_rho = |q: &[f64]| -> Result<f64, DynError> {
        let r = rho.as_ref().expect("checked by caller").eval(q, &params)?;
        Ok(r.abs().ln())
    };
    let rate = if rho.is_some() {
        volume_rate_audit(&chart, &states, Some(&log_rho))
    } else {
        volume_rate_audit(&chart, &states, None)
    }
    .map_err(err)?;
    let exit = if rate.certified { EXIT_OK } else { EXIT_REFUTED };
    let to_stdout = emit(&common.out, &report::to_pretty(report::verify_report(&sys, &s, &rate, density, exit)), stdout)?;
    if !to_stdout {
        writeln!(stdout, "system        {}", sys.name).map_err(err)?;
        writeln!(stdout, "density       {}", density.unwrap_or("1")).map_err(err)?;
        writeln!(
            stdout,
            "rate audit    certified={} max|rate|={:.3e} max relative={:.3e} skipped={}",
            rate.certified, rate.max_abs_total, rate.max_relative, rate.skipped
        )
        .map_err(err)?;
        if let Some(c) = &rate.fitted_factor {
            writeln!(stdout, "fitted c      {:.9} (std {:.2e})", c.mean, c.std).map_err(err)?;
        }
    }
    Ok(exit)
}

fn eps(file: &Path, common: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let s = settings(common);
    let f = EpsFile::load(file).map_err(err)?;
    let sys = f.to_system().map_err(err)?;
    let tr = sys.trace_ad();
    let theta = sys.eps_theta();
    let mem = sys.membership();
    let kozlov = match sys.kozlov_test() {
        Ok(k) => json!({"applicable": true, "holds": k.holds, "eigenvalue": k.eigenvalue, "residual": k.residual}),
        Err(LieError::DegenerateKilling) => json!({"applicable": false, "reason": "Killing form is degenerate"}),
        Err(e) => return Err(err(e)),
    };
    // divergence of the constrained field on all of g* against theta(I^{-1} p)
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s.seed);
    let mut fd_err: f64 = 0.0;
    for _ in 0..s.samples.min(64) {
        let p = DVector::from_fn(sys.dim(), |_, _| rng.random_range(-1.0..1.0));
        let fd = fd_divergence(|x| sys.eps_rhs(x), &p, 1e-5);
        let pred = theta.dot(&(&sys.inertia_inv * &p));
        fd_err = fd_err.max((fd - pred).abs());
    }
    let exit = if mem.member { EXIT_OK } else { EXIT_REFUTED };
    let body = json!({
        "system": {"name": f.name, "dimension": sys.dim(), "constraints": sys.n_constraints()},
        "trace_ad": tr.as_slice(),
        "unimodular": tr.amax() < 1e-12,
        "theta": theta.as_slice(),
        "membership": mem,
        "kozlov": kozlov,
        "divergence_check": {"max_error": fd_err, "samples": s.samples.min(64), "step": 1e-5},
        "exit_code": exit,
    });
    let to_stdout = emit(&common.out, &report::to_pretty(report::eps_report(&s, body)), stdout)?;
    if !to_stdout {
        writeln!(stdout, "system      {}", f.name).map_err(err)?;
        writeln!(stdout, "tr ad       {:?}", tr.as_slice()).map_err(err)?;
        writeln!(stdout, "theta       {:?}", theta.as_slice()).map_err(err)?;
        writeln!(stdout, "member      {} (residual {:.3e})", mem.member, mem.residual).map_err(err)?;
        writeln!(stdout, "kozlov      {kozlov}").map_err(err)?;
        writeln!(stdout, "fd check    {fd_err:.3e}").map_err(err)?;
    }
    Ok(exit)
}

/// Run a parsed command, writing human output to `stdout` and errors to
/// `stderr`. Returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Audit { file, common } => audit(file, common, stdout),
        Command::Simulate { file, common, timing } => simulate(file, common, timing, stdout),
        Command::Verify {
            file,
            common,
            timing,
            density,
        } => verify(file, common, timing, density.as_deref(), stdout),
        Command::Eps { file, common } => eps(file, common, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Parse arguments and run; argument errors map to exit code 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

/// Report JSON value for tests and tooling.
pub fn audit_value(file: &Path, common: &Common) -> Result<(i32, Value), CliError> {
    let mut buf = Vec::new();
    let mut c = common.clone();
    c.out = Some(PathBuf::from("-"));
    let code = audit(file, &c, &mut buf)?;
    let v = serde_json::from_slice(&buf).map_err(err)?;
    Ok((code, v))
}

impl Default for Common {
    fn default() -> Self {
        Common {
            samples: 64,
            tol: 1e-9,
            seed: SampleOpts::default().seed,
            basis: "default".into(),
            out: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_parsing() {
        let (q, v) = parse_init("q=1,2,3;v=0,-1,0.5", 3).unwrap();
        assert_eq!(q, vec![1.0, 2.0, 3.0]);
        assert_eq!(v, vec![0.0, -1.0, 0.5]);
        assert!(parse_init("q=1,2", 3).is_err());
        assert!(parse_init("x=1,2,3", 3).is_err());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["nhvol", "simulate", "f.json", "--T", "5", "--h", "0.01", "--t0", "-1", "--init", "q=0;v=1"]).unwrap();
        match cli.command {
            Command::Simulate { timing, .. } => {
                assert_eq!(timing.duration, 5.0);
                assert_eq!(timing.t0, -1.0);
            }
            _ => panic!(),
        }
        assert!(Cli::try_parse_from(["nhvol", "audit"]).is_err());
    }
}
