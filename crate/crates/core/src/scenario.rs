//! Scenario files: a TOML document describing one outcome mapping, where its
//! deflections come from, and how to normalize or sweep it.
//!
//! ```toml
//! name = "hiring-revised"
//!
//! [[axes]]                  # exactly one protected axis (rows) and one
//! name = "gr"               # unprotected axis (columns)
//! values = ["w", "d"]
//! protected = true
//!
//! [[axes]]
//! name = "e"
//! values = ["m", "b"]
//! protected = false
//!
//! [mapping]
//! prob = [[0.9, 0.7], [0.6, 0.3]]
//! # populations = [[800, 200], [50, 200]]
//!
//! [deflections]
//! source = "fixture"                 # or "compute"
//! table = "hiring_deflections.csv"   # relative to the scenario, or builtin:<name>
//! success_behavior = "hire"
//! failure_behavior = "fire"          # needed for mode = "revised"
//! objects = [["saleslady", "student"], ["criminal", "delinquent"]]
//! # success = [[...]] / failure = [[...]] instead of table + labels
//!
//! [normalization]
//! mode = "revised"                   # or "simple"
//! alpha = 0.35
//!
//! [sweep]
//! metric = "kl"                      # or "variation"
//! marginal = false
//! alpha_start = 0.0
//! alpha_stop = 2.0
//! alpha_step = 0.01                  # or alphas = [0.1, 0.2, ...]
//! ```
//!
//! With `source = "compute"` the deflections section instead names a
//! `dictionary` and impression `equations` file plus an `actor`; each cell's
//! deflection is that of `actor behavior object`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fairness::{alpha_grid, default_alpha_grid, Metric, SweepSettings};
use crate::fixtures;
use crate::grid::Grid;
use crate::impression::{DeflectionTable, ImpressionModel};
use crate::normalize::{Deflections, FailureMode, NormalizationConfig, OutcomeMapping};
use crate::sentiment::SentimentDictionary;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub axes: Vec<AxisSpec>,
    pub mapping: MappingSpec,
    pub deflections: DeflectionSpec,
    #[serde(default)]
    pub normalization: NormalizationSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default)]
    pub protected: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSpec {
    pub prob: Vec<Vec<f64>>,
    #[serde(default)]
    pub populations: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeflectionSourceKind {
    Fixture,
    Compute,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeflectionSpec {
    pub source: DeflectionSourceKind,
    /// Fixture table (`behavior,object,deflection`).
    #[serde(default)]
    pub table: Option<String>,
    #[serde(default)]
    pub success: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub failure: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub dictionary: Option<String>,
    #[serde(default)]
    pub equations: Option<String>,
    #[serde(default)]
    pub actor: Option<String>,
    #[serde(default)]
    pub success_behavior: Option<String>,
    #[serde(default)]
    pub failure_behavior: Option<String>,
    /// Object label of every mapping cell.
    #[serde(default)]
    pub objects: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationSpec {
    #[serde(default)]
    pub mode: FailureMode,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub marginal: bool,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha_start: Option<f64>,
    #[serde(default)]
    pub alpha_stop: Option<f64>,
    #[serde(default)]
    pub alpha_step: Option<f64>,
}

/// A validated scenario with all referenced files loaded.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub protected_axis: String,
    pub unprotected_axis: String,
    pub mapping: OutcomeMapping,
    pub deflections: Deflections,
    pub mode: FailureMode,
    pub alpha: Option<f64>,
    pub sweep: Option<(SweepSettings, Vec<f64>)>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// A scenario bundled with the crate, e.g. `hiring_revised`.
    pub fn builtin(name: &str) -> Result<Self> {
        let text = fixtures::get(name).ok_or_else(|| Error::Scenario(format!("no builtin scenario `{name}`")))?;
        Self::parse(text, None)
    }

    /// Relative file references resolve against `base_dir`; with no base
    /// directory they resolve to bundled fixtures.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text)?;
        Self::resolve(spec, base_dir)
    }

    pub fn resolve(spec: ScenarioSpec, base_dir: Option<&Path>) -> Result<Self> {
        let bad = |msg: String| Error::Scenario(msg);
        if spec.axes.len() != 2 {
            return Err(bad(format!("expected 2 axes, found {}", spec.axes.len())));
        }
        let protected: Vec<&AxisSpec> = spec.axes.iter().filter(|a| a.protected).collect();
        if protected.len() != 1 {
            return Err(bad(format!("exactly one axis must be protected, found {}", protected.len())));
        }
        let rows_axis = protected[0];
        let cols_axis = spec.axes.iter().find(|a| !a.protected).expect("two axes, one protected");

        let prob = Grid::from_rows(spec.mapping.prob.clone())?;
        let mut mapping = OutcomeMapping::new(rows_axis.values.clone(), cols_axis.values.clone(), prob)?;
        if let Some(pop) = &spec.mapping.populations {
            mapping = mapping.with_populations(Grid::from_rows(pop.clone())?)?;
        }

        let mode = spec.normalization.mode;
        let deflections = resolve_deflections(&spec.deflections, mode, mapping.shape(), base_dir)?;
        // validates mode vs. failure deflections even when alpha is absent
        NormalizationConfig::new(spec.normalization.alpha.unwrap_or(0.0), mode, deflections.clone())?;

        let sweep = spec
            .sweep
            .as_ref()
            .map(|s| -> Result<_> {
                let alphas = match (&s.alphas, s.alpha_start, s.alpha_stop, s.alpha_step) {
                    (Some(a), None, None, None) => a.clone(),
                    (None, None, None, None) => default_alpha_grid(),
                    (None, start, Some(stop), Some(step)) => alpha_grid(start.unwrap_or(0.0), stop, step)?,
                    _ => return Err(bad("sweep: give either `alphas` or `alpha_stop` + `alpha_step`".into())),
                };
                let settings = SweepSettings {
                    mode,
                    metric: s.metric,
                    marginal: s.marginal,
                };
                Ok((settings, alphas))
            })
            .transpose()?;

        Ok(Scenario {
            name: spec.name,
            protected_axis: rows_axis.name.clone(),
            unprotected_axis: cols_axis.name.clone(),
            mapping,
            deflections,
            mode,
            alpha: spec.normalization.alpha,
            sweep,
        })
    }

    pub fn config(&self, alpha: f64) -> Result<NormalizationConfig> {
        NormalizationConfig::new(alpha, self.mode, self.deflections.clone())
    }
}

/// Reads a referenced file: `builtin:<name>`, a path relative to
/// `base_dir`, or (without a base directory) a bundled fixture name.
pub fn read_source(reference: &str, base_dir: Option<&Path>) -> Result<String> {
    if let Some(name) = reference.strip_prefix("builtin:") {
        return fixtures::get(name)
            .map(str::to_string)
            .ok_or_else(|| Error::Scenario(format!("no builtin fixture `{name}`")));
    }
    match base_dir {
        Some(dir) => {
            let path: PathBuf = dir.join(reference);
            fs::read_to_string(&path)
                .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))
        }
        None => fixtures::get(reference)
            .map(str::to_string)
            .or_else(|| fs::read_to_string(reference).ok())
            .ok_or_else(|| Error::Scenario(format!("cannot resolve `{reference}`"))),
    }
}

fn label_grid(spec: &DeflectionSpec, shape: (usize, usize)) -> Result<&Vec<Vec<String>>> {
    let objects = spec
        .objects
        .as_ref()
        .ok_or_else(|| Error::Scenario("deflections: `objects` labels are required".into()))?;
    if objects.len() != shape.0 || objects.iter().any(|r| r.len() != shape.1) {
        return Err(Error::DimensionMismatch {
            expected: shape,
            found: (objects.len(), objects.first().map_or(0, Vec::len)),
        });
    }
    Ok(objects)
}

fn grid_from(objects: &[Vec<String>], mut cell: impl FnMut(&str) -> Result<f64>) -> Result<Grid> {
    let rows = objects
        .iter()
        .map(|r| r.iter().map(|o| cell(o)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Grid::from_rows(rows)
}

fn resolve_deflections(
    spec: &DeflectionSpec,
    mode: FailureMode,
    shape: (usize, usize),
    base_dir: Option<&Path>,
) -> Result<Deflections> {
    let need_failure = mode == FailureMode::Revised;
    let (success, failure) = match spec.source {
        DeflectionSourceKind::Fixture => {
            if let Some(success) = &spec.success {
                let success = Grid::from_rows(success.clone())?;
                let failure = spec.failure.clone().map(Grid::from_rows).transpose()?;
                (success, failure)
            } else {
                let reference = spec.table.as_ref().ok_or_else(|| {
                    Error::Scenario("fixture deflections need `table` or inline `success`".into())
                })?;
                let table = DeflectionTable::from_csv_str(&read_source(reference, base_dir)?)?;
                let objects = label_grid(spec, shape)?;
                let lookup = |behavior: &str, object: &str| {
                    table.get(behavior, object).ok_or_else(|| {
                        Error::Scenario(format!("deflection table has no entry ({behavior}, {object})"))
                    })
                };
                let sb = spec
                    .success_behavior
                    .as_deref()
                    .ok_or_else(|| Error::Scenario("`success_behavior` is required".into()))?;
                let success = grid_from(objects, |o| lookup(sb, o))?;
                let failure = spec
                    .failure_behavior
                    .as_deref()
                    .map(|fb| grid_from(objects, |o| lookup(fb, o)))
                    .transpose()?;
                (success, failure)
            }
        }
        DeflectionSourceKind::Compute => {
            let need = |field: &Option<String>, name: &str| {
                field
                    .clone()
                    .ok_or_else(|| Error::Scenario(format!("computed deflections need `{name}`")))
            };
            let dict_ref = need(&spec.dictionary, "dictionary")?;
            let eq_ref = need(&spec.equations, "equations")?;
            let actor = need(&spec.actor, "actor")?;
            let sb = need(&spec.success_behavior, "success_behavior")?;
            let dict = SentimentDictionary::from_csv_str(&read_source(&dict_ref, base_dir)?, dict_ref.clone())?;
            let model = ImpressionModel::from_csv_str(&read_source(&eq_ref, base_dir)?, eq_ref.clone())?;
            let objects = label_grid(spec, shape)?;
            let deflect = |behavior: &str, object: &str| -> Result<f64> {
                Ok(model.deflection(&dict.build_event(&actor, behavior, object)?))
            };
            let success = grid_from(objects, |o| deflect(&sb, o))?;
            let failure = spec
                .failure_behavior
                .as_deref()
                .map(|fb| grid_from(objects, |o| deflect(fb, o)))
                .transpose()?;
            (success, failure)
        }
    };
    success.ensure_shape(shape)?;
    if let Some(f) = &failure {
        f.ensure_shape(shape)?;
    }
    if need_failure && failure.is_none() {
        return Err(Error::MissingFailureDeflections);
    }
    Deflections::new(success, failure)
}
