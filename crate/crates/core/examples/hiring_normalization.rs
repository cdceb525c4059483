//! Normalize the biased hiring mapping by hand, in both failure modes.

use affnorm::fairness::lipschitz_gap;
use affnorm::grid::Grid;
use affnorm::normalize::{normalize_mapping, Deflections, FailureMode, NormalizationConfig, OutcomeMapping};

fn main() -> affnorm::Result<()> {
    // rows: white women, delinquent men; columns: graduate, undergraduate
    let map = OutcomeMapping::new(
        vec!["w".into(), "d".into()],
        vec!["m".into(), "b".into()],
        Grid::from_rows(vec![vec![0.9, 0.7], vec![0.6, 0.3]])?,
    )?;
    let hire = Grid::from_rows(vec![vec![1.1, 1.1], vec![4.1, 3.2]])?;
    let fire = Grid::from_rows(vec![vec![3.1, 4.9], vec![2.5, 2.2]])?;

    let simple = NormalizationConfig::new(1.0, FailureMode::Simple, Deflections::success_only(hire.clone())?)?;
    let revised = NormalizationConfig::new(0.35, FailureMode::Revised, Deflections::new(hire, Some(fire))?)?;

    println!("original   {:?}  gap {:.3}", map.prob().to_rows(), lipschitz_gap(map.prob()));
    for (label, cfg) in [("simple", simple), ("revised", revised)] {
        let n = normalize_mapping(&map, &cfg)?;
        println!(
            "{label:<10} {:?}  gap {:.3}  (alpha {})",
            n.prob().map(|p| (p * 1000.0).round() / 1000.0).to_rows(),
            lipschitz_gap(n.prob()),
            cfg.alpha
        );
    }
    Ok(())
}
