//! Campaign configuration: JSON schema, defaults and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use symflow_core::{FluidParams, CATALOG_IDS};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config field `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("config field `{field}`: unknown catalog id '{id}'")]
    UnknownId { field: String, id: String },
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifySymmetries,
    Classify,
    Reduce,
    Invert,
    Simulate,
    Audit,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::VerifySymmetries => "verify-symmetries",
            Command::Classify => "classify",
            Command::Reduce => "reduce",
            Command::Invert => "invert",
            Command::Simulate => "simulate",
            Command::Audit => "audit",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Symmetry, determining-equation and linearized-system defects.
    pub defect: f64,
    /// Finite-difference residuals of computed fields.
    pub residual: f64,
    /// Newton inversion accuracy.
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            defect: 1e-7,
            residual: 1e-5,
            newton: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub cfl: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            t0: 1.0,
            t1: 2.0,
            x0: 0.0,
            x1: 1.0,
            nx: 400,
            cfl: 0.45,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceSpec {
    pub a: f64,
    pub p0: f64,
    pub state0: [f64; 2],
    pub p_end: f64,
}

impl Default for ReduceSpec {
    fn default() -> Self {
        Self {
            a: 1.0,
            p0: 0.0,
            state0: [0.0, 1.0],
            p_end: 0.5,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    defect: Option<f64>,
    residual: Option<f64>,
    newton: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    #[serde(rename = "H")]
    momentum: Option<f64>,
    gravity: Option<f64>,
    seed: Option<u64>,
    tolerances: Option<RawTolerances>,
    catalog: Option<Vec<String>>,
    grid: Option<Grid>,
    reduce: Option<ReduceSpec>,
}

/// A validated campaign with every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Campaign {
    pub command: Command,
    #[serde(rename = "H")]
    pub momentum: f64,
    pub gravity: f64,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub catalog: Vec<String>,
    pub grid: Grid,
    pub reduce: ReduceSpec,
}

impl Campaign {
    /// Defaults for `command`.
    pub fn new(command: Command) -> Self {
        Self {
            command,
            momentum: 1.0,
            gravity: 1.0,
            seed: 0,
            tolerances: Tolerances::default(),
            catalog: CATALOG_IDS.iter().map(|s| s.to_string()).collect(),
            grid: Grid::default(),
            reduce: ReduceSpec::default(),
        }
    }

    pub fn params(&self) -> FluidParams {
        FluidParams {
            momentum: self.momentum,
            gravity: self.gravity,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.momentum >= 0.0 && self.momentum.is_finite()) {
            return Err(invalid("H", format!("must be finite and non-negative, got {}", self.momentum)));
        }
        if !(self.gravity > 0.0 && self.gravity.is_finite()) {
            return Err(invalid("gravity", format!("must be positive, got {}", self.gravity)));
        }
        let t = &self.tolerances;
        for (name, v) in [("defect", t.defect), ("residual", t.residual), ("newton", t.newton)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(&format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        for (i, id) in self.catalog.iter().enumerate() {
            if !CATALOG_IDS.contains(&id.as_str()) {
                return Err(ConfigError::UnknownId {
                    field: format!("catalog[{i}]"),
                    id: id.clone(),
                });
            }
        }
        let g = &self.grid;
        if !(g.t1 > g.t0) {
            return Err(invalid("grid.t1", format!("must exceed grid.t0 = {}", g.t0)));
        }
        if !(g.x1 > g.x0) {
            return Err(invalid("grid.x1", format!("must exceed grid.x0 = {}", g.x0)));
        }
        if g.nx < 16 {
            return Err(invalid("grid.nx", format!("need at least 16 cells, got {}", g.nx)));
        }
        if !(g.cfl > 0.0 && g.cfl <= 0.9) {
            return Err(invalid("grid.cfl", format!("must lie in (0, 0.9], got {}", g.cfl)));
        }
        let r = &self.reduce;
        if !(r.state0[1] > 0.0) {
            return Err(invalid("reduce.state0[1]", format!("depth must be positive, got {}", r.state0[1])));
        }
        if !(r.a.is_finite() && r.p0.is_finite() && r.p_end.is_finite() && r.state0[0].is_finite()) {
            return Err(invalid("reduce", "values must be finite"));
        }
        Ok(())
    }
}

/// Parse a campaign from JSON text. `command` may be omitted when the
/// caller supplies it.
pub fn parse_config(text: &str, command: Option<Command>) -> Result<Campaign, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Schema {
            path: if path.is_empty() { ".".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    let command = match (raw.command, command) {
        (Some(a), Some(b)) if a != b => {
            return Err(invalid(
                "command",
                format!("'{a}' conflicts with the requested command '{b}'"),
            ))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(invalid("command", "missing")),
    };
    let mut c = Campaign::new(command);
    if let Some(v) = raw.momentum {
        c.momentum = v;
    }
    if let Some(v) = raw.gravity {
        c.gravity = v;
    }
    if let Some(v) = raw.seed {
        c.seed = v;
    }
    if let Some(t) = raw.tolerances {
        let d = Tolerances::default();
        c.tolerances = Tolerances {
            defect: t.defect.unwrap_or(d.defect),
            residual: t.residual.unwrap_or(d.residual),
            newton: t.newton.unwrap_or(d.newton),
        };
    }
    if let Some(ids) = raw.catalog {
        c.catalog = ids;
    }
    if let Some(g) = raw.grid {
        c.grid = g;
    }
    if let Some(r) = raw.reduce {
        c.reduce = r;
    }
    c.validate()?;
    Ok(c)
}

/// Read and validate a campaign file.
pub fn load_config(path: &Path, command: Option<Command>) -> Result<Campaign, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, command)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(r#"{"command": "verify-symmetries", "H": 1}"#, None).unwrap();
        assert_eq!(c.command, Command::VerifySymmetries);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.catalog.len(), CATALOG_IDS.len());
        let c = parse_config(r#"{"tolerances": {"newton": 1e-10}}"#, Some(Command::Audit)).unwrap();
        assert_eq!(c.tolerances.newton, 1e-10);
        assert_eq!(c.tolerances.defect, 1e-7);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_config(r#"{"command": "audit", "catalog": ["galilean", "nope"]}"#, None).unwrap_err();
        assert!(e.to_string().contains("'nope'") && e.to_string().contains("catalog[1]"), "{e}");
        let e = parse_config(r#"{"command": "audit", "tolerances": {"defect": -1}}"#, None).unwrap_err();
        assert!(e.to_string().contains("tolerances.defect"), "{e}");
        let e = parse_config(r#"{"command": "audit", "grid": {"t0": 0, "t1": 1, "x0": 0, "x1": 1, "nx": "many", "cfl": 0.4}}"#, None)
            .unwrap_err();
        assert!(e.to_string().contains("grid.nx"), "{e}");
        let e = parse_config(r#"{"command": "audit", "tolerances": {"defekt": 1}}"#, None).unwrap_err();
        assert!(e.to_string().contains("tolerances"), "{e}");
        let e = parse_config(r#"{"command": "fly"}"#, None).unwrap_err();
        assert!(e.to_string().contains("command"), "{e}");
        assert!(parse_config(r#"{"command": "audit"}"#, Some(Command::Reduce)).is_err());
        assert!(parse_config(r#"{"H": -1}"#, Some(Command::Audit)).is_err());
    }
}
