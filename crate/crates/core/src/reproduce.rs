//! End-to-end reproduction of the bundled hiring and marketing examples
//! against their published outcome matrices.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fairness::{marginal_outcome, sweep_alpha};
use crate::grid::Grid;
use crate::normalize::normalize_mapping;
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    HiringSimple,
    HiringRevised,
    HiringVariation,
    MarketingBias,
    MarketingMarginal,
}

impl Example {
    pub const ALL: [Example; 5] = [
        Example::HiringSimple,
        Example::HiringRevised,
        Example::HiringVariation,
        Example::MarketingBias,
        Example::MarketingMarginal,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Example::HiringSimple => "hiring-simple",
            Example::HiringRevised => "hiring-revised",
            Example::HiringVariation => "hiring-variation",
            Example::MarketingBias => "marketing-bias",
            Example::MarketingMarginal => "marketing-marginal",
        }
    }

    fn scenario(self) -> &'static str {
        match self {
            Example::HiringSimple => "hiring_simple",
            Example::HiringRevised => "hiring_revised",
            Example::HiringVariation => "hiring_variation",
            Example::MarketingBias => "marketing_bias",
            Example::MarketingMarginal => "marketing_marginal",
        }
    }
}

impl std::str::FromStr for Example {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Example::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| format!("unknown example `{s}`"))
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn delta(&self) -> f64 {
        (self.actual - self.expected).abs()
    }

    pub fn passed(&self) -> bool {
        self.delta() <= self.tolerance
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub example: Example,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {} ==", self.example)?;
        writeln!(
            f,
            "{:<28} {:>9} {:>9} {:>9} {:>7}  result",
            "check", "expected", "actual", "|delta|", "tol"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<28} {:>9.4} {:>9.4} {:>9.4} {:>7.3}  {}",
                c.label,
                c.expected,
                c.actual,
                c.delta(),
                c.tolerance,
                if c.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        writeln!(f, "{}: {}", self.example, if self.passed() { "PASS" } else { "FAIL" })
    }
}

fn matrix_checks(prefix: &str, scenario: &Scenario, actual: &Grid, expected: &[[f64; 2]; 2], tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    for (i, row) in expected.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            out.push(Check {
                label: format!(
                    "{prefix} [{},{}]",
                    scenario.mapping.protected_values()[i],
                    scenario.mapping.unprotected_values()[j]
                ),
                expected: want,
                actual: actual.get(i, j),
                tolerance: tol,
            });
        }
    }
    out
}

fn normalized_at(scenario: &Scenario, alpha: f64) -> Result<Grid> {
    Ok(normalize_mapping(&scenario.mapping, &scenario.config(alpha)?)?
        .prob()
        .clone())
}

pub fn reproduce(example: Example) -> Result<Report> {
    let scenario = Scenario::builtin(example.scenario())?;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    match example {
        Example::HiringSimple => {
            let tables: [(f64, [[f64; 2]; 2]); 3] = [
                (0.5, [[0.87, 0.63], [0.91, 0.63]]),
                (1.0, [[0.95, 0.82], [0.99, 0.91]]),
                (1.3, [[0.97, 0.88], [0.997, 0.96]]),
            ];
            for (alpha, expected) in tables {
                let got = normalized_at(&scenario, alpha)?;
                checks.extend(matrix_checks(&format!("alpha={alpha}"), &scenario, &got, &expected, 0.01));
            }
        }
        Example::HiringRevised => {
            let got = normalized_at(&scenario, 0.35)?;
            checks.extend(matrix_checks("alpha=0.35", &scenario, &got, &[[0.81, 0.38], [0.73, 0.38]], 0.02));
            let (settings, alphas) = scenario
                .sweep
                .clone()
                .ok_or_else(|| Error::Scenario("hiring-revised has no sweep".into()))?;
            let curve = sweep_alpha(&scenario.mapping, &scenario.deflections, settings, &alphas)?;
            checks.push(Check {
                label: "sweep best alpha".into(),
                expected: 0.35,
                actual: curve.best_alpha,
                tolerance: 0.1,
            });
        }
        Example::HiringVariation => {
            let got = normalized_at(&scenario, 0.6)?;
            checks.extend(matrix_checks("alpha=0.6", &scenario, &got, &[[0.75, 0.26], [0.78, 0.41]], 0.08));
            warnings.push(format!(
                "published matrix was not computed from the one-decimal deflections; recomputed {:?}",
                got.to_rows()
                    .iter()
                    .map(|r| r.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            ));
        }
        Example::MarketingBias => {
            let got = normalized_at(&scenario, 0.2)?;
            checks.extend(matrix_checks("alpha=0.2", &scenario, &got, &[[0.76, 0.58], [0.76, 0.25]], 0.01));
        }
        Example::MarketingMarginal => {
            let normalized = normalize_mapping(&scenario.mapping, &scenario.config(0.4)?)?;
            checks.extend(matrix_checks(
                "alpha=0.4",
                &scenario,
                normalized.prob(),
                &[[0.54, 0.04], [0.54, 0.06]],
                0.01,
            ));
            for ((name, p), want) in marginal_outcome(&scenario.mapping)?.into_iter().zip([0.74, 0.26]) {
                checks.push(Check {
                    label: format!("original marginal {name}"),
                    expected: want,
                    actual: p,
                    tolerance: 1e-12,
                });
            }
            for ((name, p), want) in marginal_outcome(&normalized.mapping)?.into_iter().zip([0.44, 0.15]) {
                checks.push(Check {
                    label: format!("normalized marginal {name}"),
                    expected: want,
                    actual: p,
                    tolerance: 0.01,
                });
            }
        }
    }
    Ok(Report {
        example,
        checks,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for e in Example::ALL {
            assert_eq!(e.id().parse::<Example>().unwrap(), e);
        }
        assert!("hiring".parse::<Example>().is_err());
    }

    #[test]
    fn all_examples_pass() {
        for e in Example::ALL {
            let r = reproduce(e).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn variation_carries_warning() {
        let r = reproduce(Example::HiringVariation).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.to_string().contains("warning:"));
    }
}
