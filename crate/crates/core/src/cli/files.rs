//! JSON input documents.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extalg::KForm;
use crate::liealg::{LieAlgebraSystem, StructureConstants};
use crate::nonhol::{NonholError, NonholonomicSystem};
use crate::symexpr::{parse, Domain, Expr, SampleOpts, Symbols};

/// A load or validation failure, located by a JSON-style path.
#[derive(Debug, Error)]
#[error("{path}: {message}")]
pub struct FileError {
    pub path: String,
    pub message: String,
}

impl FileError {
    fn at(path: impl Into<String>, message: impl ToString) -> Self {
        FileError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub name: String,
    pub coordinates: Vec<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub metric: Vec<Vec<String>>,
    #[serde(default = "zero_potential")]
    pub potential: String,
    pub constraints: Vec<Vec<String>>,
    pub domain: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub guards: Vec<String>,
    /// Coordinates that are angles; they get only trigonometric basis terms.
    #[serde(default)]
    pub angles: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
    /// Only `"linear"` is accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_kind: Option<String>,
}

fn zero_potential() -> String {
    "0".into()
}

fn read(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|e| FileError::at(path.display().to_string(), e))
}

fn json_error(e: serde_json::Error) -> FileError {
    FileError::at(format!("$ (line {}, column {})", e.line(), e.column()), e)
}

impl SystemFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, FileError> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn from_json(text: &str) -> Result<Self, FileError> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn symbols(&self) -> Symbols {
        let params: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
        Symbols::new(&self.coordinates, &params.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    pub fn to_system(&self, opts: SampleOpts) -> Result<NonholonomicSystem, FileError> {
        if let Some(kind) = &self.constraint_kind {
            if kind != "linear" {
                return Err(FileError::at(
                    "constraint_kind",
                    format!("'{kind}' constraints are not supported; only linear (homogeneous, velocity-linear) constraints can be analysed"),
                ));
            }
        }
        let n = self.coordinates.len();
        if n == 0 {
            return Err(FileError::at("coordinates", "at least one coordinate is required"));
        }
        for (i, c) in self.coordinates.iter().enumerate() {
            if self.coordinates[..i].contains(c) || self.parameters.contains_key(c) {
                return Err(FileError::at(format!("coordinates[{i}]"), format!("name '{c}' is declared twice")));
            }
        }
        let symbols = self.symbols();
        let expr = |path: String, text: &str| -> Result<Expr, FileError> {
            parse(text, &symbols).map_err(|e| FileError::at(path, e))
        };
        if self.metric.len() != n {
            return Err(FileError::at("metric", format!("expected {n} rows, found {}", self.metric.len())));
        }
        let mut metric = Vec::with_capacity(n);
        for (i, row) in self.metric.iter().enumerate() {
            if row.len() != n {
                return Err(FileError::at(format!("metric[{i}]"), format!("expected {n} entries, found {}", row.len())));
            }
            metric.push(
                row.iter()
                    .enumerate()
                    .map(|(j, t)| expr(format!("metric[{i}][{j}]"), t))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        let potential = expr("potential".into(), &self.potential)?;
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (a, row) in self.constraints.iter().enumerate() {
            if row.len() != n {
                return Err(FileError::at(format!("constraints[{a}]"), format!("expected {n} components, found {}", row.len())));
            }
            let comps = row
                .iter()
                .enumerate()
                .map(|(j, t)| expr(format!("constraints[{a}][{j}]"), t))
                .collect::<Result<Vec<_>, _>>()?;
            constraints.push(KForm::one_form(n, comps));
        }
        let mut intervals = Vec::with_capacity(n);
        for c in &self.coordinates {
            let [lo, hi] = *self
                .domain
                .get(c)
                .ok_or_else(|| FileError::at(format!("domain.{c}"), "missing interval"))?;
            intervals.push((lo, hi));
        }
        for k in self.domain.keys() {
            if !self.coordinates.contains(k) {
                return Err(FileError::at(format!("domain.{k}"), "not a coordinate"));
            }
        }
        let guards = self
            .guards
            .iter()
            .enumerate()
            .map(|(i, t)| expr(format!("guards[{i}]"), t))
            .collect::<Result<Vec<_>, _>>()?;
        let params: Vec<f64> = self.parameters.values().copied().collect();
        let domain = Domain::new(intervals, params, guards).map_err(|e| FileError::at("domain", e))?;
        let mut angles = vec![false; n];
        for (i, name) in self.angles.iter().enumerate() {
            let k = symbols
                .coord_index(name)
                .ok_or_else(|| FileError::at(format!("angles[{i}]"), format!("'{name}' is not a coordinate")))?;
            angles[k] = true;
        }
        let sys = NonholonomicSystem::new(self.name.clone(), symbols, metric, potential, constraints, domain)
            .map_err(|e| FileError::at(nonhol_path(&e), e))?;
        Ok(sys.with_angles(angles).with_opts(opts))
    }
}

fn nonhol_path(e: &NonholError) -> &'static str {
    match e {
        NonholError::NotSymmetric { .. } | NonholError::NotPositiveDefinite { .. } => "metric",
        NonholError::RankDeficient { .. } => "constraints",
        _ => "$",
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EpsFile {
    #[serde(default)]
    pub name: String,
    pub dimension: usize,
    /// Entries `[i, j, k, c]` meaning `c^k_{ij} = c`, indices from 1.
    pub structure_constants: Vec<(usize, usize, usize, f64)>,
    pub inertia: Vec<Vec<f64>>,
    #[serde(default)]
    pub constraints: Vec<Vec<f64>>,
}

impl EpsFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, FileError> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn from_json(text: &str) -> Result<Self, FileError> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn to_system(&self) -> Result<LieAlgebraSystem, FileError> {
        let n = self.dimension;
        if n == 0 {
            return Err(FileError::at("dimension", "must be positive"));
        }
        let mut c = StructureConstants::zeros(n);
        for (t, &(i, j, k, v)) in self.structure_constants.iter().enumerate() {
            for (name, idx) in [("i", i), ("j", j), ("k", k)] {
                if idx == 0 || idx > n {
                    return Err(FileError::at(
                        format!("structure_constants[{t}]"),
                        format!("index {name} = {idx} outside 1..={n}"),
                    ));
                }
            }
            c.set(i - 1, j - 1, k - 1, v);
        }
        if self.inertia.len() != n || self.inertia.iter().any(|r| r.len() != n) {
            return Err(FileError::at("inertia", format!("must be {n}x{n}")));
        }
        let inertia = nalgebra::DMatrix::from_fn(n, n, |i, j| self.inertia[i][j]);
        if (&inertia - inertia.transpose()).amax() > 1e-12 * inertia.amax().max(1.0) {
            return Err(FileError::at("inertia", "must be symmetric"));
        }
        for (a, row) in self.constraints.iter().enumerate() {
            if row.len() != n {
                return Err(FileError::at(format!("constraints[{a}]"), format!("expected {n} components")));
            }
        }
        let eta = nalgebra::DMatrix::from_fn(self.constraints.len(), n, |a, i| self.constraints[a][i]);
        LieAlgebraSystem::new(c, inertia, eta).map_err(|e| FileError::at("$", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"{
        "name": "t", "coordinates": ["x", "y", "z"], "parameters": {},
        "metric": [["1","0","0"],["0","1","0"],["0","0","1"]],
        "constraints": [["y","-x","-1"]],
        "domain": {"x": [-1, 1], "y": [-1, 1], "z": [-1, 1]}
    }"#;

    #[test]
    fn loads_minimal_file() {
        let f = SystemFile::from_json(TINY).unwrap();
        let sys = f.to_system(SampleOpts::default()).unwrap();
        assert_eq!(sys.dim(), 3);
    }

    #[test]
    fn errors_carry_paths() {
        let bad = TINY.replace(r#"["y","-x","-1"]"#, r#"["y","-x","-1+"]"#);
        let err = SystemFile::from_json(&bad).unwrap().to_system(SampleOpts::default()).unwrap_err();
        assert_eq!(err.path, "constraints[0][2]");
        let bad = TINY.replace(r#""z": [-1, 1]"#, r#""w": [-1, 1]"#);
        let err = SystemFile::from_json(&bad).unwrap().to_system(SampleOpts::default()).unwrap_err();
        assert_eq!(err.path, "domain.z");
        let bad = TINY.replace(r#""name": "t","#, r#""name": "t", "constraint_kind": "chetaev","#);
        let err = SystemFile::from_json(&bad).unwrap().to_system(SampleOpts::default()).unwrap_err();
        assert_eq!(err.path, "constraint_kind");
        assert!(SystemFile::from_json("{").is_err());
    }
}
