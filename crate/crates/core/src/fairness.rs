//! Fairness and divergence metrics, the alpha sweep, marginals and the
//! intersectional regress check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::impression::DeflectionTable;
use crate::normalize::{
    normalize_mapping, Deflections, FailureMode, NormalizationConfig, NormalizedMapping, OutcomeMapping,
};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logarithms.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

fn clamp(p: f64) -> f64 {
    p.clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
}

/// KL(Bernoulli(p) ‖ Bernoulli(q)) on clamped probabilities.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let (p, q) = (clamp(p), clamp(q));
    // clamp away rounding noise when p == q
    (p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()).max(0.0)
}

/// Jeffreys divergence: KL(p‖q) + KL(q‖p).
pub fn bernoulli_jeffreys(p: f64, q: f64) -> f64 {
    bernoulli_kl(p, q) + bernoulli_kl(q, p)
}

/// ½[KL(p‖q) + KL(q‖p)].
pub fn bernoulli_symmetric_kl(p: f64, q: f64) -> f64 {
    0.5 * bernoulli_jeffreys(p, q)
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn row_pairs(rows: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..rows).flat_map(move |a| (a + 1..rows).map(move |b| (a, b)))
}

/// Mean over unordered protected-row pairs of the mean over columns of
/// `metric(row_a[j], row_b[j])`.
fn pairwise_row_metric(prob: &Grid, metric: impl Fn(f64, f64) -> f64) -> Result<f64> {
    if prob.rows() < 2 {
        return Err(Error::TooFewProtectedValues(prob.rows()));
    }
    Ok(mean(row_pairs(prob.rows()).map(|(a, b)| {
        mean((0..prob.cols()).map(|j| metric(prob.get(a, j), prob.get(b, j))))
    })))
}

fn pairwise_vector_metric(values: &[f64], metric: impl Fn(f64, f64) -> f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewProtectedValues(values.len()));
    }
    Ok(mean(row_pairs(values.len()).map(|(a, b)| metric(values[a], values[b]))))
}

/// Discrimination across the protected axis: Jeffreys divergence between
/// the protected rows, averaged over unprotected values (and over row pairs
/// when there are more than two protected values).
pub fn discrimination_kl(prob: &Grid) -> Result<f64> {
    pairwise_row_metric(prob, bernoulli_jeffreys)
}

/// Mean over all cells of the symmetric KL between normalized and original.
pub fn model_divergence_kl(normalized: &Grid, original: &Grid) -> Result<f64> {
    normalized.ensure_shape(original.shape())?;
    Ok(mean(
        normalized
            .values()
            .iter()
            .zip(original.values())
            .map(|(&a, &b)| bernoulli_symmetric_kl(a, b)),
    ))
}

/// Variation-norm analogues: (mean |row_a − row_b|, mean |normalized − original|).
pub fn variation_metric(normalized: &Grid, original: &Grid) -> Result<(f64, f64)> {
    normalized.ensure_shape(original.shape())?;
    let discrimination = pairwise_row_metric(normalized, |a, b| (a - b).abs())?;
    let divergence = mean(
        normalized
            .values()
            .iter()
            .zip(original.values())
            .map(|(a, b)| (a - b).abs()),
    );
    Ok((discrimination, divergence))
}

/// Largest spread of outcome probability among people who share an
/// unprotected value. Zero iff every protected row is identical.
pub fn lipschitz_gap(prob: &Grid) -> f64 {
    (0..prob.cols())
        .map(|j| {
            let (lo, hi) = prob
                .column(j)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if prob.rows() == 0 {
                0.0
            } else {
                hi - lo
            }
        })
        .fold(0.0, f64::max)
}

/// Population-weighted probability of a positive outcome per protected value.
pub fn marginal_outcome(map: &OutcomeMapping) -> Result<Vec<(String, f64)>> {
    let pop = map.populations().ok_or(Error::MissingPopulations)?;
    let prob = map.prob();
    map.protected_values()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let total: f64 = pop.row(i).iter().sum();
            if total <= 0.0 {
                return Err(Error::ZeroPopulation(name.clone()));
            }
            let weighted: f64 = pop.row(i).iter().zip(prob.row(i)).map(|(n, p)| n * p).sum();
            Ok((name.clone(), weighted / total))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Kl,
    Variation,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "kl" => Ok(Metric::Kl),
            "variation" => Ok(Metric::Variation),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// Discrimination and model divergence of one normalized mapping.
pub fn evaluate(
    normalized: &OutcomeMapping,
    original: &OutcomeMapping,
    metric: Metric,
    marginal: bool,
) -> Result<(f64, f64)> {
    let (norm, orig) = (normalized.prob(), original.prob());
    let divergence = match metric {
        Metric::Kl => model_divergence_kl(norm, orig)?,
        Metric::Variation => variation_metric(norm, orig)?.1,
    };
    let discrimination = if marginal {
        let m: Vec<f64> = marginal_outcome(normalized)?.into_iter().map(|(_, p)| p).collect();
        match metric {
            Metric::Kl => pairwise_vector_metric(&m, bernoulli_jeffreys)?,
            Metric::Variation => pairwise_vector_metric(&m, |a, b| (a - b).abs())?,
        }
    } else {
        match metric {
            Metric::Kl => discrimination_kl(norm)?,
            Metric::Variation => variation_metric(norm, orig)?.0,
        }
    };
    Ok((discrimination, divergence))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub mode: FailureMode,
    pub metric: Metric,
    /// Measure discrimination on population-weighted marginals.
    pub marginal: bool,
}

/// `start, start + step, …` up to and including `stop` (within 1e-9),
/// rounded to 12 decimals so grid points print cleanly.
pub fn alpha_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start >= 0.0 && stop >= start && stop.is_finite()) {
        return Err(Error::InvalidGrid(format!("start={start} stop={stop} step={step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Alphas 0.00 to 2.00 in steps of 0.01.
pub fn default_alpha_grid() -> Vec<f64> {
    alpha_grid(0.0, 2.0, 0.01).expect("valid default grid")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCurve {
    pub alphas: Vec<f64>,
    pub discrimination: Vec<f64>,
    pub divergence: Vec<f64>,
    pub combined: Vec<f64>,
    pub best_alpha: f64,
    pub best_mapping: NormalizedMapping,
}

impl SweepCurve {
    pub fn best_index(&self) -> usize {
        self.alphas
            .iter()
            .position(|&a| a == self.best_alpha)
            .expect("best alpha is on the grid")
    }

    /// `alpha,discrimination,divergence,combined` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,discrimination,divergence,combined\n");
        for i in 0..self.alphas.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.alphas[i], self.discrimination[i], self.divergence[i], self.combined[i]
            ));
        }
        out
    }
}

/// Normalizes at every alpha on the grid and picks the alpha minimizing
/// discrimination + divergence; ties go to the smallest alpha.
pub fn sweep_alpha(
    map: &OutcomeMapping,
    deflections: &Deflections,
    settings: SweepSettings,
    alphas: &[f64],
) -> Result<SweepCurve> {
    if alphas.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::InvalidGrid("alphas must be finite and nonnegative".into()));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("alphas must be strictly increasing".into()));
    }
    let base = NormalizationConfig::new(0.0, settings.mode, deflections.clone())?;

    let points = alphas
        .par_iter()
        .map(|&alpha| {
            let normalized = normalize_mapping(map, &base.with_alpha(alpha)?)?;
            let (disc, div) = evaluate(&normalized.mapping, map, settings.metric, settings.marginal)?;
            Ok((disc, div))
        })
        .collect::<Result<Vec<_>>>()?;

    let discrimination: Vec<f64> = points.iter().map(|p| p.0).collect();
    let divergence: Vec<f64> = points.iter().map(|p| p.1).collect();
    let combined: Vec<f64> = points.iter().map(|p| p.0 + p.1).collect();
    let best = combined
        .iter()
        .enumerate()
        .fold(0, |best, (i, &c)| if c < combined[best] { i } else { best });
    let best_alpha = alphas[best];
    let best_mapping = normalize_mapping(map, &base.with_alpha(best_alpha)?)?;

    Ok(SweepCurve {
        alphas: alphas.to_vec(),
        discrimination,
        divergence,
        combined,
        best_alpha,
        best_mapping,
    })
}

pub const DEFAULT_DEGENERACY_FLOOR: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Degeneracy {
    pub flagged: bool,
    pub max_probability: f64,
    pub floor: f64,
}

/// Flags a best mapping that has collapsed to (almost) never giving the
/// positive outcome.
pub fn degenerate_check(curve: &SweepCurve, floor: f64) -> Degeneracy {
    let max_probability = curve
        .best_mapping
        .prob()
        .values()
        .iter()
        .copied()
        .fold(0.0, f64::max);
    Degeneracy {
        flagged: max_probability < floor,
        max_probability,
        floor,
    }
}

pub const DEFAULT_REGRESS_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressDecision {
    /// Subgroup deflections differ materially; treat it as its own category.
    Differentiate,
    /// No material affective difference; stop subdividing.
    Cap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegressVerdict {
    pub max_gap: f64,
    pub threshold: f64,
    pub decision: RegressDecision,
}

/// Compares subgroup deflections with those of the supergroup it splits from.
pub fn regress_check(
    super_group: &DeflectionTable,
    sub_group: &DeflectionTable,
    threshold: f64,
) -> Result<RegressVerdict> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::validation(format!("invalid threshold {threshold}")));
    }
    if let Some((b, o, _)) = super_group.iter().find(|(b, o, _)| sub_group.get(b, o).is_none()) {
        return Err(Error::KeyMismatch(format!("({b}, {o}) missing from subgroup table")));
    }
    if let Some((b, o, _)) = sub_group.iter().find(|(b, o, _)| super_group.get(b, o).is_none()) {
        return Err(Error::KeyMismatch(format!("({b}, {o}) missing from supergroup table")));
    }
    let max_gap = super_group
        .iter()
        .map(|(b, o, d)| (sub_group.get(b, o).expect("checked") - d).abs())
        .fold(0.0, f64::max);
    Ok(RegressVerdict {
        max_gap,
        threshold,
        decision: if max_gap > threshold {
            RegressDecision::Differentiate
        } else {
            RegressDecision::Cap
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impression::Provenance;

    fn grid(rows: &[&[f64]]) -> Grid {
        Grid::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Direct Bernoulli KL, written out term by term.
    fn kl_oracle(p: f64, q: f64) -> f64 {
        p * (p.ln() - q.ln()) + (1.0 - p) * ((1.0 - p).ln() - (1.0 - q).ln())
    }

    #[test]
    fn discrimination_examples() {
        assert_eq!(discrimination_kl(&grid(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap(), 0.0);
        assert_eq!(discrimination_kl(&grid(&[&[1.0, 0.0], &[1.0, 0.0]])).unwrap(), 0.0);

        let got = discrimination_kl(&grid(&[&[0.9, 0.7], &[0.6, 0.3]])).unwrap();
        let col_m = kl_oracle(0.9, 0.6) + kl_oracle(0.6, 0.9);
        let col_b = kl_oracle(0.7, 0.3) + kl_oracle(0.3, 0.7);
        let want = (col_m + col_b) / 2.0;
        assert!((got - want).abs() < 1e-12);
        // frozen from an independent evaluation of the two Jeffreys sums
        assert!((col_m - 0.537_527_840_768_416_5).abs() < 1e-12, "{col_m}");
        assert!((col_b - 0.677_838_288_309_762_8).abs() < 1e-12, "{col_b}");
        assert!((got - 0.607_683_064_539_089_6).abs() < 1e-12);
        assert!(matches!(discrimination_kl(&grid(&[&[0.5]])), Err(Error::TooFewProtectedValues(1))));
    }

    #[test]
    fn discrimination_three_groups_is_pair_mean() {
        let g = grid(&[&[0.9], &[0.6], &[0.3]]);
        let want = (bernoulli_jeffreys(0.9, 0.6) + bernoulli_jeffreys(0.9, 0.3) + bernoulli_jeffreys(0.6, 0.3)) / 3.0;
        assert!((discrimination_kl(&g).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn divergence_examples() {
        let m = grid(&[&[0.9, 0.7], &[0.6, 0.3]]);
        assert_eq!(model_divergence_kl(&m, &m).unwrap(), 0.0);
        let n = grid(&[&[0.95, 0.82], &[0.99, 0.91]]);
        let want = [(0.95, 0.9), (0.82, 0.7), (0.99, 0.6), (0.91, 0.3)]
            .iter()
            .map(|&(a, b)| 0.5 * (kl_oracle(a, b) + kl_oracle(b, a)))
            .sum::<f64>()
            / 4.0;
        assert!((model_divergence_kl(&n, &m).unwrap() - want).abs() < 1e-12);
        assert!(model_divergence_kl(&n, &grid(&[&[0.5]])).is_err());
    }

    #[test]
    fn variation_examples() {
        let m = grid(&[&[0.9, 0.7], &[0.6, 0.3]]);
        let (disc, div) = variation_metric(&m, &m).unwrap();
        assert!((disc - 0.35).abs() < 1e-12);
        assert_eq!(div, 0.0);
        let same = grid(&[&[0.4, 0.2], &[0.4, 0.2]]);
        assert_eq!(variation_metric(&same, &m).unwrap().0, 0.0);
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_gap(&grid(&[&[0.8, 0.3], &[0.8, 0.3]])), 0.0);
        assert!((lipschitz_gap(&grid(&[&[0.9, 0.7], &[0.6, 0.3]])) - 0.4).abs() < 1e-12);
        assert_eq!(lipschitz_gap(&grid(&[&[0.9, 0.7]])), 0.0);
    }

    fn marketing(prob: Vec<Vec<f64>>) -> OutcomeMapping {
        OutcomeMapping::new(
            vec!["T".into(), "S".into()],
            vec!["G1".into(), "G0".into()],
            Grid::from_rows(prob).unwrap(),
        )
        .unwrap()
        .with_populations(grid(&[&[800.0, 200.0], &[50.0, 200.0]]))
        .unwrap()
    }

    #[test]
    fn marginal_examples() {
        let m = marginal_outcome(&marketing(vec![vec![0.9, 0.1], vec![0.9, 0.1]])).unwrap();
        assert_eq!(m[0].0, "T");
        assert!((m[0].1 - 0.74).abs() < 1e-12 && (m[1].1 - 0.26).abs() < 1e-12);
        let m = marginal_outcome(&marketing(vec![vec![0.54, 0.04], vec![0.54, 0.06]])).unwrap();
        assert!((m[0].1 - 0.44).abs() < 1e-12 && (m[1].1 - 0.156).abs() < 1e-12);
        let m = marginal_outcome(&marketing(vec![vec![0.3, 0.3], vec![0.3, 0.3]])).unwrap();
        assert!(m.iter().all(|(_, p)| (p - 0.3).abs() < 1e-12));
    }

    #[test]
    fn marginal_errors() {
        let no_pop = OutcomeMapping::from_rows(vec![vec![0.5]]).unwrap();
        assert!(matches!(marginal_outcome(&no_pop), Err(Error::MissingPopulations)));
        let zero = OutcomeMapping::from_rows(vec![vec![0.5], vec![0.5]])
            .unwrap()
            .with_populations(grid(&[&[1.0], &[0.0]]))
            .unwrap();
        assert!(matches!(marginal_outcome(&zero), Err(Error::ZeroPopulation(_))));
    }

    #[test]
    fn grid_construction() {
        let g = default_alpha_grid();
        assert_eq!(g.len(), 201);
        assert_eq!(g[35], 0.35);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert_eq!(alpha_grid(0.0, 0.0, 0.1).unwrap(), vec![0.0]);
        assert!(alpha_grid(0.0, 1.0, 0.0).is_err());
        assert!(alpha_grid(-1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn sweep_single_point_is_identity() {
        let map = OutcomeMapping::from_rows(vec![vec![0.9, 0.7], vec![0.6, 0.3]]).unwrap();
        let defl = Deflections::success_only(grid(&[&[1.1, 1.1], &[4.1, 3.2]])).unwrap();
        let settings = SweepSettings {
            mode: FailureMode::Simple,
            metric: Metric::Kl,
            marginal: false,
        };
        let curve = sweep_alpha(&map, &defl, settings, &[0.0]).unwrap();
        assert_eq!(curve.alphas.len(), 1);
        assert_eq!(curve.best_alpha, 0.0);
        assert_eq!(curve.best_mapping.prob(), map.prob());
        assert_eq!(curve.combined[0], discrimination_kl(map.prob()).unwrap());
        assert_eq!(curve.to_csv().lines().count(), 2);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let map = OutcomeMapping::from_rows(vec![vec![0.9], vec![0.6]]).unwrap();
        let defl = Deflections::success_only(grid(&[&[1.0], &[2.0]])).unwrap();
        let s = SweepSettings {
            mode: FailureMode::Simple,
            metric: Metric::Kl,
            marginal: false,
        };
        assert!(sweep_alpha(&map, &defl, s, &[]).is_err());
        assert!(sweep_alpha(&map, &defl, s, &[0.2, 0.1]).is_err());
        assert!(sweep_alpha(&map, &defl, s, &[-0.1, 0.1]).is_err());
        let revised = SweepSettings {
            mode: FailureMode::Revised,
            ..s
        };
        assert!(matches!(
            sweep_alpha(&map, &defl, revised, &[0.0]),
            Err(Error::MissingFailureDeflections)
        ));
        let marginal = SweepSettings { marginal: true, ..s };
        assert!(matches!(
            sweep_alpha(&map, &defl, marginal, &[0.0]),
            Err(Error::MissingPopulations)
        ));
    }

    #[test]
    fn sweep_ties_pick_smallest_alpha() {
        // zero deflections in revised mode: every alpha gives the original mapping
        let map = OutcomeMapping::from_rows(vec![vec![0.9], vec![0.6]]).unwrap();
        let zeros = grid(&[&[0.0], &[0.0]]);
        let defl = Deflections::new(zeros.clone(), Some(zeros)).unwrap();
        let s = SweepSettings {
            mode: FailureMode::Revised,
            metric: Metric::Variation,
            marginal: false,
        };
        let curve = sweep_alpha(&map, &defl, s, &[0.1, 0.5, 1.0]).unwrap();
        assert_eq!(curve.best_alpha, 0.1);
    }

    fn curve_with(prob: Vec<Vec<f64>>) -> SweepCurve {
        let map = OutcomeMapping::from_rows(prob).unwrap();
        let (r, c) = map.shape();
        let defl = Deflections::success_only(Grid::filled(r, c, 0.0)).unwrap();
        let s = SweepSettings {
            mode: FailureMode::Simple,
            metric: Metric::Kl,
            marginal: false,
        };
        sweep_alpha(&map, &defl, s, &[0.0]).unwrap()
    }

    #[test]
    fn degeneracy_examples() {
        let d = DEFAULT_DEGENERACY_FLOOR;
        assert!(degenerate_check(&curve_with(vec![vec![0.0, 0.0], vec![0.0, 0.0]]), d).flagged);
        assert!(!degenerate_check(&curve_with(vec![vec![0.54, 0.04], vec![0.54, 0.06]]), d).flagged);
        assert!(!degenerate_check(&curve_with(vec![vec![0.5, 0.5], vec![0.5, 0.5]]), d).flagged);
    }

    fn table(rows: &[(&str, &str, f64)]) -> DeflectionTable {
        let mut t = DeflectionTable::new(Provenance::Fixture);
        for (b, o, d) in rows {
            t.insert(*b, *o, *d).unwrap();
        }
        t
    }

    #[test]
    fn regress_examples() {
        let t = table(&[("hire", "applicant", 3.2), ("fire", "applicant", 2.2)]);
        let v = regress_check(&t, &t, 0.1).unwrap();
        assert_eq!(v.decision, RegressDecision::Cap);
        assert_eq!(v.max_gap, 0.0);

        let sup = table(&[("hire", "applicant", 3.2)]);
        let sub = table(&[("hire", "applicant", 4.1)]);
        let v = regress_check(&sup, &sub, 0.5).unwrap();
        assert_eq!(v.decision, RegressDecision::Differentiate);
        assert!((v.max_gap - 0.9).abs() < 1e-12);
        // equal to the threshold caps
        assert_eq!(regress_check(&sup, &sub, v.max_gap).unwrap().decision, RegressDecision::Cap);

        let wider = table(&[("hire", "applicant", 3.2), ("fire", "applicant", 1.0)]);
        assert!(matches!(regress_check(&wider, &sub, 0.5), Err(Error::KeyMismatch(_))));
        assert!(matches!(regress_check(&sub, &wider, 0.5), Err(Error::KeyMismatch(_))));
    }
}
