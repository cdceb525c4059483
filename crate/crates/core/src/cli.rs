//! Command-line front end. The `affnorm` binary is a thin wrapper around
//! [`run`], which writes to caller-supplied streams so it can be driven
//! in-process.
//!
//! Exit codes: 0 success, 1 reproduction outside tolerance, 2 usage or
//! validation error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fairness::{
    degenerate_check, lipschitz_gap, marginal_outcome, regress_check, sweep_alpha, Degeneracy, Metric,
    DEFAULT_DEGENERACY_FLOOR, DEFAULT_REGRESS_THRESHOLD,
};
use crate::grid::Grid;
use crate::impression::{DeflectionTable, ImpressionModel};
use crate::normalize::{normalize_mapping, FailureMode, NormalizedMapping};
use crate::reproduce::{reproduce, Example};
use crate::scenario::Scenario;
use crate::sentiment::SentimentDictionary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "affnorm", version, about = "Affective normalization of outcome mappings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the deflection of `actor behavior object` for every pair as CSV.
    Deflect {
        /// Sentiment dictionary CSV (label,category,e,p,a).
        #[arg(long)]
        dict: PathBuf,
        /// Impression equation CSV (term,Ae,...,Oa).
        #[arg(long = "eq")]
        equations: PathBuf,
        #[arg(long)]
        actor: String,
        /// Comma-separated behavior labels.
        #[arg(long)]
        behaviors: String,
        /// Comma-separated object labels.
        #[arg(long)]
        objects: String,
    },
    /// Normalize a scenario's mapping at one alpha and print a JSON report.
    Normalize {
        /// Scenario file, or builtin:<name>.
        scenario: String,
        /// Overrides the scenario's alpha.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Sweep alpha, write curve.csv and best.json, print the best alpha.
    Sweep {
        scenario: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Overrides the scenario's metric.
        #[arg(long)]
        metric: Option<Metric>,
    },
    /// Re-run a bundled example and compare with its published matrices.
    Reproduce {
        /// hiring-simple, hiring-revised, hiring-variation, marketing-bias,
        /// marketing-marginal, or all.
        example: String,
    },
    /// Decide whether a subgroup differs affectively from its supergroup.
    RegressCheck {
        /// Supergroup deflection table (behavior,object,deflection).
        #[arg(long = "super")]
        super_group: PathBuf,
        /// Subgroup deflection table.
        #[arg(long = "sub")]
        sub_group: PathBuf,
        #[arg(long, default_value_t = DEFAULT_REGRESS_THRESHOLD)]
        threshold: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let target: &mut dyn Write = if err.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", err.render());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            EXIT_INVALID
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Deflect {
            dict,
            equations,
            actor,
            behaviors,
            objects,
        } => {
            let table = cmd_deflect(&dict, &equations, &actor, &split_list(&behaviors), &split_list(&objects))?;
            out.write_all(table.to_csv().as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Normalize { scenario, alpha } => {
            let report = cmd_normalize(&load_scenario(&scenario)?, alpha)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            scenario,
            out_dir,
            metric,
        } => {
            let best = cmd_sweep(&load_scenario(&scenario)?, &out_dir, metric)?;
            writeln!(out, "best_alpha={}", best.best_alpha)?;
            if best.degenerate.flagged {
                writeln!(out, "warning: best mapping is degenerate (max probability {})", best.degenerate.max_probability)?;
            }
            Ok(EXIT_OK)
        }
        Command::Reproduce { example } => {
            let examples = if example == "all" {
                Example::ALL.to_vec()
            } else {
                vec![example.parse::<Example>().map_err(Error::Scenario)?]
            };
            let mut all_passed = true;
            for e in examples {
                let report = reproduce(e)?;
                write!(out, "{report}")?;
                all_passed &= report.passed();
            }
            Ok(if all_passed { EXIT_OK } else { EXIT_TOLERANCE })
        }
        Command::RegressCheck {
            super_group,
            sub_group,
            threshold,
        } => {
            let sup = DeflectionTable::from_csv_str(&fs::read_to_string(&super_group)?)?;
            let sub = DeflectionTable::from_csv_str(&fs::read_to_string(&sub_group)?)?;
            let verdict = regress_check(&sup, &sub, threshold)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&verdict)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn split_list(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn load_scenario(reference: &str) -> Result<Scenario> {
    match reference.strip_prefix("builtin:") {
        Some(name) => Scenario::builtin(name),
        None => Scenario::load(reference),
    }
}

pub fn cmd_deflect(
    dict: &Path,
    equations: &Path,
    actor: &str,
    behaviors: &[&str],
    objects: &[&str],
) -> Result<DeflectionTable> {
    let dictionary = SentimentDictionary::load(fs::File::open(dict)?, dict.display().to_string())?;
    let model = ImpressionModel::load(fs::File::open(equations)?, equations.display().to_string())?;
    model.deflection_table(&dictionary, actor, behaviors, objects)
}

#[derive(Debug, Serialize)]
pub struct NormalizeReport {
    pub scenario: String,
    pub alpha: f64,
    pub mode: FailureMode,
    pub protected_axis: String,
    pub unprotected_axis: String,
    pub protected_values: Vec<String>,
    pub unprotected_values: Vec<String>,
    pub original: Grid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub populations: Option<Grid>,
    pub success_deflections: Grid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_deflections: Option<Grid>,
    pub w_plus: Grid,
    pub w_minus: Grid,
    pub normalized: Grid,
    pub lipschitz_gap_before: f64,
    pub lipschitz_gap_after: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals_before: Option<Vec<(String, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals_after: Option<Vec<(String, f64)>>,
}

fn marginals_if_any(n: &crate::normalize::OutcomeMapping) -> Result<Option<Vec<(String, f64)>>> {
    n.populations().map(|_| marginal_outcome(n)).transpose()
}

pub fn cmd_normalize(scenario: &Scenario, alpha: Option<f64>) -> Result<NormalizeReport> {
    let alpha = alpha
        .or(scenario.alpha)
        .ok_or_else(|| Error::Scenario("no alpha given (set normalization.alpha or --alpha)".into()))?;
    let NormalizedMapping {
        mapping,
        config,
        w_plus,
        w_minus,
    } = normalize_mapping(&scenario.mapping, &scenario.config(alpha)?)?;
    let original = &scenario.mapping;
    Ok(NormalizeReport {
        scenario: scenario.name.clone(),
        alpha,
        mode: config.mode,
        protected_axis: scenario.protected_axis.clone(),
        unprotected_axis: scenario.unprotected_axis.clone(),
        protected_values: original.protected_values().to_vec(),
        unprotected_values: original.unprotected_values().to_vec(),
        original: original.prob().clone(),
        populations: original.populations().cloned(),
        success_deflections: config.deflections.success.clone(),
        failure_deflections: match config.mode {
            FailureMode::Revised => config.deflections.failure.clone(),
            FailureMode::Simple => None,
        },
        w_plus,
        w_minus,
        normalized: mapping.prob().clone(),
        lipschitz_gap_before: lipschitz_gap(original.prob()),
        lipschitz_gap_after: lipschitz_gap(mapping.prob()),
        marginals_before: marginals_if_any(original)?,
        marginals_after: marginals_if_any(&mapping)?,
    })
}

#[derive(Debug, Serialize)]
pub struct BestReport {
    pub scenario: String,
    pub metric: Metric,
    pub marginal: bool,
    pub mode: FailureMode,
    pub best_alpha: f64,
    pub discrimination: f64,
    pub divergence: f64,
    pub combined: f64,
    pub normalized: Grid,
    pub w_plus: Grid,
    pub w_minus: Grid,
    pub lipschitz_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals: Option<Vec<(String, f64)>>,
    pub degenerate: Degeneracy,
}

/// Runs the scenario's sweep, writing `curve.csv` and `best.json` to `out_dir`.
pub fn cmd_sweep(scenario: &Scenario, out_dir: &Path, metric: Option<Metric>) -> Result<BestReport> {
    let (mut settings, alphas) = scenario
        .sweep
        .clone()
        .ok_or_else(|| Error::Scenario("scenario has no [sweep] section".into()))?;
    if let Some(m) = metric {
        settings.metric = m;
    }
    let curve = sweep_alpha(&scenario.mapping, &scenario.deflections, settings, &alphas)?;
    let i = curve.best_index();
    let best = &curve.best_mapping;
    let report = BestReport {
        scenario: scenario.name.clone(),
        metric: settings.metric,
        marginal: settings.marginal,
        mode: settings.mode,
        best_alpha: curve.best_alpha,
        discrimination: curve.discrimination[i],
        divergence: curve.divergence[i],
        combined: curve.combined[i],
        normalized: best.prob().clone(),
        w_plus: best.w_plus.clone(),
        w_minus: best.w_minus.clone(),
        lipschitz_gap: lipschitz_gap(best.prob()),
        marginals: marginals_if_any(&best.mapping)?,
        degenerate: degenerate_check(&curve, DEFAULT_DEGENERACY_FLOOR),
    };
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("curve.csv"), curve.to_csv())?;
    fs::write(out_dir.join("best.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(report)
}
