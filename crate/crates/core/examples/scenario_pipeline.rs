//! Load a scenario file from disk (or a bundled one) and print the JSON
//! report the `normalize` subcommand would emit.
//!
//! ```text
//! cargo run --example scenario_pipeline -- fixtures/hiring_simple.toml
//! ```

use affnorm::cli::cmd_normalize;
use affnorm::reproduce::{reproduce, Example};
use affnorm::scenario::Scenario;

fn main() -> affnorm::Result<()> {
    let scenario = match std::env::args().nth(1) {
        Some(path) => Scenario::load(path)?,
        None => Scenario::builtin("marketing_bias")?,
    };
    let report = cmd_normalize(&scenario, None)?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    for example in Example::ALL {
        let r = reproduce(example)?;
        println!("{:<20} {}", example.id(), if r.passed() { "ok" } else { "off" });
    }
    Ok(())
}
