//! Suite configuration: JSON schema types, defaults and environment overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = include_str!("../schema/suite-config.schema.json");

pub const ENV_GRID_NODES: &str = "INFOGEOM_GRID_NODES";
pub const ENV_TOLERANCE_PREFIX: &str = "INFOGEOM_TOLERANCE_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Monotonicity,
    Sufficiency,
    Contraction,
    Chentsov,
    Uniqueness,
    Continuity,
    Integrability,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Monotonicity => "monotonicity",
            Suite::Sufficiency => "sufficiency",
            Suite::Contraction => "contraction",
            Suite::Chentsov => "chentsov",
            Suite::Uniqueness => "uniqueness",
            Suite::Continuity => "continuity",
            Suite::Integrability => "integrability",
        }
    }
}

/// A zoo model with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Bernoulli,
    Categorical {
        atoms: Option<usize>,
    },
    Factorized {
        q: Box<ModelSpec>,
        r: Vec<f64>,
        #[serde(default)]
        perturbation: Option<f64>,
    },
    HeavyTail {
        k: f64,
        #[serde(default)]
        panels: Option<usize>,
        #[serde(default)]
        order: Option<usize>,
        #[serde(default)]
        cutoff: Option<f64>,
    },
    Laplace {
        theta_min: f64,
        theta_max: f64,
        #[serde(default)]
        nodes: Option<usize>,
    },
    Expfam {
        reference: Vec<f64>,
        statistic: Vec<f64>,
    },
}

/// A bounded weight on the sample space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { value: f64 },
    Monomial { coefficient: f64, power: i32 },
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    Constant { value: f64 },
    MassPower { coefficient: f64, power: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TensorSpec {
    /// `T_{g,c}` of the given order.
    Tgc {
        order: usize,
        g: WeightSpec,
        c: FunctionalSpec,
    },
    /// `T_{[1],1}`.
    Canonical {
        order: usize,
    },
    Zero {
        order: usize,
    },
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StatisticSpec {
    /// A fresh surjective statistic per trial.
    Random {
        target_len: Option<usize>,
    },
    Identity,
    Table {
        table: Vec<usize>,
        target_len: usize,
    },
}

/// A path `from → to` with `steps + 1` equally spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteParams {
    pub max_atoms: Option<usize>,
    pub p: Option<Vec<u32>>,
    pub min_blocks: Option<usize>,
    pub f: Option<WeightSpec>,
    pub levels: Option<u32>,
    pub nodes: Option<usize>,
    pub length: Option<usize>,
    pub path: Option<PathSpec>,
    pub direction: Option<Vec<f64>>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub loss: f64,
    pub sufficiency: f64,
    pub contraction: f64,
    pub chentsov: f64,
    pub uniqueness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            loss: 1e-10,
            sufficiency: 1e-10,
            contraction: 1e-12,
            chentsov: 1e-10,
            uniqueness: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub suite: Option<Suite>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub statistic: Option<StatisticSpec>,
    #[serde(default)]
    pub tensor: Option<TensorSpec>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Option<serde_json::Map<String, serde_json::Value>>,
    #[serde(default)]
    pub params: SuiteParams,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_trials() -> u64 {
    1
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: SuiteConfig = serde_json::from_str(text).map_err(|e| err(format!("schema: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(err("schema: trials must be at least 1"));
        }
        self.resolved_tolerances()?;
        if let Some(p) = &self.params.p {
            if p.is_empty() || p.contains(&0) {
                return Err(err("schema: params.p must list exponents ≥ 1"));
            }
        }
        if let Some(m) = self.params.max_atoms {
            if m < 2 {
                return Err(err("schema: params.max_atoms must be at least 2"));
            }
        }
        Ok(())
    }

    /// Built-in tolerances, overridden by `INFOGEOM_TOLERANCE_<NAME>` and then
    /// by the config's `tolerances` object.
    pub fn resolved_tolerances(&self) -> Result<Tolerances, ConfigError> {
        let mut map = serde_json::to_value(Tolerances::default())
            .expect("tolerances serialize")
            .as_object()
            .cloned()
            .expect("object");
        let names: Vec<String> = map.keys().cloned().collect();
        for name in &names {
            let var = format!("{ENV_TOLERANCE_PREFIX}{}", name.to_uppercase());
            if let Ok(raw) = std::env::var(&var) {
                let v: f64 = raw.parse().map_err(|_| err(format!("{var}={raw:?} is not a number")))?;
                map.insert(name.clone(), v.into());
            }
        }
        if let Some(over) = &self.tolerances {
            for (k, v) in over {
                if !map.contains_key(k) {
                    return Err(err(format!(
                        "schema: unknown tolerance {k:?}; known: {}",
                        names.join(", ")
                    )));
                }
                map.insert(k.clone(), v.clone());
            }
        }
        let tol: Tolerances = serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| err(format!("schema: tolerances: {e}")))?;
        let all = [tol.loss, tol.sufficiency, tol.contraction, tol.chentsov, tol.uniqueness];
        if all.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(err("schema: tolerances must be finite and non-negative"));
        }
        Ok(tol)
    }
}

/// Default grid size for continuum suites, overridable by `INFOGEOM_GRID_NODES`.
pub fn default_grid_nodes(built_in: usize) -> Result<usize, ConfigError> {
    match std::env::var(ENV_GRID_NODES) {
        Ok(raw) => raw
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 2)
            .ok_or_else(|| err(format!("{ENV_GRID_NODES}={raw:?} must be an integer ≥ 2"))),
        Err(_) => Ok(built_in),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_a_schema_error() {
        let e = SuiteConfig::parse(r#"{"trials": 0}"#).unwrap_err();
        assert!(e.0.contains("trials"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(SuiteConfig::parse(r#"{"trials": 1, "colour": 3}"#).is_err());
        assert!(SuiteConfig::parse(r#"{"tolerances": {"nope": 1.0}}"#).is_err());
    }

    #[test]
    fn model_specs_parse() {
        let c = SuiteConfig::parse(
            r#"{"model": {"kind": "factorized", "params": {"q": {"kind": "bernoulli"}, "r": [0.5, 0.5]}},
                "tensor": {"kind": "tgc", "order": 2, "g": {"kind": "monomial", "coefficient": 1, "power": 1},
                           "c": {"kind": "constant", "value": 1}},
                "trials": 3, "seed": 9}"#,
        )
        .unwrap();
        assert!(matches!(c.model, Some(ModelSpec::Factorized { .. })));
        assert_eq!(c.trials, 3);
        let tol = c.resolved_tolerances().unwrap();
        assert_eq!(tol.loss, 1e-10);
    }

    #[test]
    fn schema_file_is_json() {
        let v: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(v["type"], "object");
    }
}
