//! Decide whether a subgroup's deflections differ enough from its
//! supergroup's to be normalized separately.

use affnorm::fairness::{regress_check, DEFAULT_REGRESS_THRESHOLD};
use affnorm::fixtures;
use affnorm::impression::DeflectionTable;

fn main() -> affnorm::Result<()> {
    let supergroup = DeflectionTable::from_csv_str(fixtures::HIRING_DEFLECTIONS)?;
    for shift in [0.2, 0.8] {
        let mut subgroup = supergroup.clone();
        let base = supergroup.get("hire", "criminal").expect("fixture row");
        subgroup.insert("hire", "criminal", base + shift)?;
        let verdict = regress_check(&supergroup, &subgroup, DEFAULT_REGRESS_THRESHOLD)?;
        println!("shift {shift}: gap {:.2} -> {:?}", verdict.max_gap, verdict.decision);
    }
    Ok(())
}
