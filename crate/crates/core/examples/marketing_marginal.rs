//! Population-weighted marginals before and after normalizing the
//! marketing scenario.

use affnorm::fairness::marginal_outcome;
use affnorm::normalize::normalize_mapping;
use affnorm::scenario::Scenario;

fn main() -> affnorm::Result<()> {
    let scenario = Scenario::builtin("marketing_marginal")?;
    let alpha = scenario.alpha.unwrap_or(0.4);
    let normalized = normalize_mapping(&scenario.mapping, &scenario.config(alpha)?)?;

    println!("{} vs {}", scenario.protected_axis, scenario.unprotected_axis);
    let before = marginal_outcome(&scenario.mapping)?;
    let after = marginal_outcome(&normalized.mapping)?;
    for ((value, b), (_, a)) in before.iter().zip(&after) {
        println!("{value:<8} {b:.3} -> {a:.3}");
    }
    Ok(())
}
