//! Sweep alpha over the bundled hiring scenario and report the optimum.

use affnorm::fairness::{degenerate_check, sweep_alpha, DEFAULT_DEGENERACY_FLOOR};
use affnorm::scenario::Scenario;

fn main() -> affnorm::Result<()> {
    let scenario = Scenario::builtin("hiring_revised")?;
    let (settings, alphas) = scenario.sweep.clone().expect("scenario declares a sweep");
    let curve = sweep_alpha(&scenario.mapping, &scenario.deflections, settings, &alphas)?;

    for (i, alpha) in curve.alphas.iter().enumerate().step_by(10) {
        println!(
            "alpha {alpha:.2}  disc {:.4}  div {:.4}  combined {:.4}",
            curve.discrimination[i], curve.divergence[i], curve.combined[i]
        );
    }
    println!("best alpha {:.2}", curve.best_alpha);
    println!("normalized {:?}", curve.best_mapping.prob().to_rows());
    let check = degenerate_check(&curve, DEFAULT_DEGENERACY_FLOOR);
    if check.flagged {
        println!("warning: optimum collapses every probability below {}", check.floor);
    }
    Ok(())
}
