//! Affective normalization of outcome mappings.
//!
//! An observed probability of a positive outcome `p` is treated as the
//! product of a rational component and an affective weight
//! `w = exp(-alpha * deflection)`. Dividing the weights out of both the
//! success and failure outcomes and renormalizing over the two recovers the
//! rational component:
//!
//! ```text
//! p' = (p / w+) / (p / w+ + (1 - p) / w-)
//! ```
//!
//! `w-` is either `1 - w+` ([`FailureMode::Simple`]) or derived from a
//! separate failure-event deflection ([`FailureMode::Revised`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureMode {
    /// Failure weight is the complement of the success weight.
    #[default]
    Simple,
    /// Failure weight comes from its own deflection.
    Revised,
}

impl std::str::FromStr for FailureMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "simple" => Ok(FailureMode::Simple),
            "revised" => Ok(FailureMode::Revised),
            other => Err(format!("unknown failure mode `{other}`")),
        }
    }
}

/// Unnormalized probability weight `exp(-alpha * deflection)`.
pub fn affective_weight(deflection: f64, alpha: f64) -> f64 {
    (-alpha * deflection).exp()
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} must be finite and nonnegative, got {v}")))
    }
}

/// Normalizes one cell. `p = 0` and `p = 1` are fixed points; in simple mode
/// a zero success deflection (or `alpha = 0`) leaves `p` unchanged, which is
/// the limit of the quotient as `w+ → 1`.
pub fn normalize_cell(
    p: f64,
    d_success: f64,
    d_failure: Option<f64>,
    alpha: f64,
    mode: FailureMode,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    check_nonnegative("alpha", alpha)?;
    check_nonnegative("success deflection", d_success)?;
    // w+/w-, computed without forming either weight so large alpha·d stays finite.
    let weight_ratio = match mode {
        FailureMode::Simple => {
            let x = alpha * d_success;
            if x == 0.0 {
                return Ok(p);
            }
            1.0 / x.exp_m1()
        }
        FailureMode::Revised => {
            let d_failure = d_failure.ok_or(Error::MissingFailureDeflections)?;
            check_nonnegative("failure deflection", d_failure)?;
            (-alpha * (d_success - d_failure)).exp()
        }
    };
    if p == 0.0 || p == 1.0 {
        return Ok(p);
    }
    Ok(p / (p + (1.0 - p) * weight_ratio))
}

/// Positive-outcome probabilities indexed by protected (rows) and
/// unprotected (columns) attribute values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMapping {
    protected_values: Vec<String>,
    unprotected_values: Vec<String>,
    prob: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    populations: Option<Grid>,
}

impl OutcomeMapping {
    pub fn new(protected_values: Vec<String>, unprotected_values: Vec<String>, prob: Grid) -> Result<Self> {
        prob.ensure_shape((protected_values.len(), unprotected_values.len()))?;
        if let Some(&bad) = prob.values().iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbability(bad));
        }
        Ok(Self {
            protected_values,
            unprotected_values,
            prob,
            populations: None,
        })
    }

    /// Mapping with generated axis labels `p0, p1, …` and `u0, u1, …`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let prob = Grid::from_rows(rows)?;
        let protected = (0..prob.rows()).map(|i| format!("p{i}")).collect();
        let unprotected = (0..prob.cols()).map(|j| format!("u{j}")).collect();
        Self::new(protected, unprotected, prob)
    }

    pub fn with_populations(mut self, populations: Grid) -> Result<Self> {
        populations.ensure_shape(self.prob.shape())?;
        if let Some(&bad) = populations.values().iter().find(|n| **n < 0.0) {
            return Err(Error::validation(format!("negative population {bad}")));
        }
        self.populations = Some(populations);
        Ok(self)
    }

    pub fn protected_values(&self) -> &[String] {
        &self.protected_values
    }

    pub fn unprotected_values(&self) -> &[String] {
        &self.unprotected_values
    }

    pub fn prob(&self) -> &Grid {
        &self.prob
    }

    pub fn populations(&self) -> Option<&Grid> {
        self.populations.as_ref()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.prob.shape()
    }

    /// Same axes and populations, different probabilities.
    pub(crate) fn with_prob(&self, prob: Grid) -> Self {
        Self {
            protected_values: self.protected_values.clone(),
            unprotected_values: self.unprotected_values.clone(),
            prob,
            populations: self.populations.clone(),
        }
    }
}

/// Success and (optionally) failure deflections aligned with mapping cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deflections {
    pub success: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Grid>,
}

impl Deflections {
    pub fn new(success: Grid, failure: Option<Grid>) -> Result<Self> {
        let d = Self { success, failure };
        for g in std::iter::once(&d.success).chain(d.failure.as_ref()) {
            if let Some(&bad) = g.values().iter().find(|v| **v < 0.0) {
                return Err(Error::validation(format!("negative deflection {bad}")));
            }
        }
        if let Some(f) = &d.failure {
            f.ensure_shape(d.success.shape())?;
        }
        Ok(d)
    }

    pub fn success_only(success: Grid) -> Result<Self> {
        Self::new(success, None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub alpha: f64,
    pub mode: FailureMode,
    pub deflections: Deflections,
}

impl NormalizationConfig {
    pub fn new(alpha: f64, mode: FailureMode, deflections: Deflections) -> Result<Self> {
        check_nonnegative("alpha", alpha)?;
        if mode == FailureMode::Revised && deflections.failure.is_none() {
            return Err(Error::MissingFailureDeflections);
        }
        Ok(Self {
            alpha,
            mode,
            deflections,
        })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.mode, self.deflections.clone())
    }
}

/// Normalized mapping together with the configuration and per-cell weights
/// that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizedMapping {
    pub mapping: OutcomeMapping,
    pub config: NormalizationConfig,
    pub w_plus: Grid,
    pub w_minus: Grid,
}

impl NormalizedMapping {
    pub fn prob(&self) -> &Grid {
        self.mapping.prob()
    }
}

pub fn normalize_mapping(map: &OutcomeMapping, cfg: &NormalizationConfig) -> Result<NormalizedMapping> {
    let shape = map.shape();
    let defl = &cfg.deflections;
    defl.success.ensure_shape(shape)?;
    let failure = match cfg.mode {
        FailureMode::Revised => {
            let f = defl.failure.as_ref().ok_or(Error::MissingFailureDeflections)?;
            f.ensure_shape(shape)?;
            Some(f)
        }
        FailureMode::Simple => None,
    };

    let (rows, cols) = shape;
    let mut out = Vec::with_capacity(rows);
    let mut w_plus = Vec::with_capacity(rows);
    let mut w_minus = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut out_row = Vec::with_capacity(cols);
        let mut plus_row = Vec::with_capacity(cols);
        let mut minus_row = Vec::with_capacity(cols);
        for j in 0..cols {
            let ds = defl.success.get(i, j);
            let df = failure.map(|f| f.get(i, j));
            out_row.push(normalize_cell(map.prob().get(i, j), ds, df, cfg.alpha, cfg.mode)?);
            let wp = affective_weight(ds, cfg.alpha);
            plus_row.push(wp);
            minus_row.push(match df {
                Some(df) => affective_weight(df, cfg.alpha),
                None => 1.0 - wp,
            });
        }
        out.push(out_row);
        w_plus.push(plus_row);
        w_minus.push(minus_row);
    }

    Ok(NormalizedMapping {
        mapping: map.with_prob(Grid::from_rows(out)?),
        config: cfg.clone(),
        w_plus: Grid::from_rows(w_plus)?,
        w_minus: Grid::from_rows(w_minus)?,
    })
}
