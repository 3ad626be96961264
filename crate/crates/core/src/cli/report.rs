//! Machine-readable reports.

use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::RateAudit;
use crate::extalg::KForm;
use crate::measure::{MeasureVerdict, PotentialField};
use crate::nonhol::{FrobeniusReport, NonholonomicSystem, DIVERGENCE_FACTOR};
use crate::symexpr::{zero_test, Domain, SampleOpts, Symbols};

pub const SCHEMA_VERSION: &str = "1.0";
/// Expressions larger than this many nodes are reported numerically only.
const EXPR_DISPLAY_LIMIT: usize = 160;

/// Settings echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub basis: String,
}

impl Settings {
    pub fn opts(&self) -> SampleOpts {
        SampleOpts {
            samples: self.samples,
            tol: self.tol,
            seed: self.seed,
        }
    }
}

fn header(command: &str, settings: &Settings) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")},
        "command": command,
        "settings": settings,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

/// Round every float to a multiple of 1e-9 so reports compare byte for byte.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            let r = (x * 1e9).round() / 1e9;
            let r = if r == 0.0 { 0.0 } else { r };
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn to_pretty(mut v: Value) -> String {
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
    s.push('\n');
    s
}

fn form_json(form: &KForm, symbols: &Symbols, domain: &Domain, opts: SampleOpts, params: &[f64]) -> Value {
    let samples = domain.samples(4, opts.seed).unwrap_or_default();
    let comps: Vec<Value> = form
        .components()
        .iter()
        .map(|e| {
            let vanishes = zero_test(std::slice::from_ref(e), domain, opts).is_ok_and(|r| r.is_zero);
            if vanishes {
                Value::String("0".into())
            } else if e.tree_size(EXPR_DISPLAY_LIMIT + 1) <= EXPR_DISPLAY_LIMIT {
                Value::String(e.display(symbols).to_string())
            } else {
                Value::Null
            }
        })
        .collect();
    let values: Vec<Value> = samples
        .iter()
        .map(|q| match form.eval_components(q, params) {
            Ok(v) => json!({"q": q, "components": v}),
            Err(e) => json!({"q": q, "error": e.to_string()}),
        })
        .collect();
    json!({"components": comps, "samples": values})
}

fn potential_json(p: &PotentialField, symbols: &Symbols) -> Value {
    let grid: Vec<Value> = p
        .points
        .iter()
        .zip(&p.values)
        .map(|(q, f)| json!({"q": q, "f": f, "rho": f.exp()}))
        .collect();
    json!({
        "expr": p.expr.as_ref().map(|e| e.display(symbols).to_string()),
        "density_expr": p.expr.as_ref().map(|e| format!("exp({})", e.display(symbols))),
        "base": p.base,
        "path_discrepancy": p.path_discrepancy,
        "single_path_points": p.single_path_points,
        "gradient_residual": p.gradient_residual,
        "grid": grid,
    })
}

pub fn verdict_json(v: &MeasureVerdict, sys: &NonholonomicSystem) -> Value {
    let symbols = &sys.symbols;
    let separable: Vec<Value> = v
        .separable
        .iter()
        .map(|s| {
            json!({
                "coordinate": symbols.coords[s.coordinate],
                "base": s.base,
                "expr": s.expr.as_ref().map(|e| e.display(symbols).to_string()),
                "points": s.points,
                "values": s.values,
            })
        })
        .collect();
    json!({
        "status": v.status,
        "closedness": {
            "closed": v.closedness.is_zero,
            "max_residual": v.closedness.max_residual,
            "samples_used": v.closedness.samples_used,
            "skipped": v.closedness.skipped,
        },
        "multipliers": v.display_multipliers(symbols),
        "ansatz": v.ansatz,
        "certificate": v.certificate,
        "certified_no": v.certified_no().is_some(),
        "potential": v.potential.as_ref().map(|p| potential_json(p, symbols)),
        "separable": separable,
        "seed": v.seed,
    })
}

pub fn rate_json(a: &RateAudit, with_density: bool) -> Value {
    json!({
        "density": if with_density { "verdict" } else { "one" },
        "certified": a.certified,
        "max_abs_rate": a.max_abs_total,
        "field_scale": a.field_scale,
        "max_relative_rate": a.max_relative,
        "relative_tolerance": 1e-4,
        "samples": a.samples.len(),
        "skipped": a.skipped,
        "divergence_factor": DIVERGENCE_FACTOR,
        "max_prediction_error": a.max_prediction_error,
        "fitted_factor": a.fitted_factor,
        "richardson_samples": a.samples.iter().filter(|s| s.richardson).count(),
        "states": a.samples.iter().map(|s| json!({
            "state": s.state, "rate": s.total, "theta_qdot": s.theta_qdot,
        })).collect::<Vec<_>>(),
    })
}

pub struct AuditParts<'a> {
    pub sys: &'a NonholonomicSystem,
    pub settings: &'a Settings,
    pub theta: &'a KForm,
    pub frobenius: &'a FrobeniusReport,
    pub verdict: &'a MeasureVerdict,
    pub rate: &'a RateAudit,
    pub rate_with_density: bool,
    pub exit_code: i32,
}

pub fn audit_report(p: &AuditParts<'_>) -> Value {
    let sys = p.sys;
    let params: serde_json::Map<String, Value> = sys
        .symbols
        .params
        .iter()
        .zip(sys.params())
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    merge(
        header("audit", p.settings),
        json!({
            "system": {"name": sys.name, "coordinates": sys.symbols.coords, "parameters": params, "constraints": sys.n_constraints()},
            "density_form": form_json(p.theta, &sys.symbols, &sys.domain, p.settings.opts(), sys.params()),
            "frobenius": {"holonomic": p.frobenius.holonomic, "witness": p.frobenius.witness},
            "verdict": verdict_json(p.verdict, sys),
            "rate_audit": rate_json(p.rate, p.rate_with_density),
            "exit_code": p.exit_code,
        }),
    )
}

pub fn verify_report(sys: &NonholonomicSystem, settings: &Settings, rate: &RateAudit, density: Option<&str>, exit_code: i32) -> Value {
    merge(
        header("verify", settings),
        json!({
            "system": {"name": sys.name, "coordinates": sys.symbols.coords},
            "density": density,
            "rate_audit": rate_json(rate, density.is_some()),
            "exit_code": exit_code,
        }),
    )
}

pub fn eps_report(settings: &Settings, body: Value) -> Value {
    merge(header("eps", settings), body)
}
