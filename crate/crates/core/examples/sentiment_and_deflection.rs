//! Look up EPA profiles, build an event and compute its deflection under a
//! small hand-written impression model.

use affnorm::fixtures;
use affnorm::impression::ImpressionModel;
use affnorm::sentiment::{Category, SentimentDictionary};

// Transients pull every factor halfway back to neutral, and the object's
// evaluation also drifts toward the behavior's.
const MODEL: &str = "term,Ae,Ap,Aa,Be,Bp,Ba,Oe,Op,Oa
1,0,0,0,0,0,0,0,0,0
Ae,0.5,0,0,0,0,0,0,0,0
Ap,0,0.5,0,0,0,0,0,0,0
Aa,0,0,0.5,0,0,0,0,0,0
Be,0,0,0,0.5,0,0,0.3,0,0
Bp,0,0,0,0,0.5,0,0,0,0
Ba,0,0,0,0,0,0.5,0,0,0
Oe,0,0,0,0,0,0,0.5,0,0
Op,0,0,0,0,0,0,0,0.5,0
Oa,0,0,0,0,0,0,0,0,0.5
";

fn main() -> affnorm::Result<()> {
    let dict = SentimentDictionary::from_csv_str(fixtures::EPA_INDIANA_2005, "builtin:epa_indiana2005.csv")?;
    println!("{} entries from {}", dict.len(), dict.provenance());
    println!("manager  {}", dict.lookup("manager", Category::Identity)?);
    println!("criminal {}", dict.lookup("criminal", Category::Identity)?);

    let model = ImpressionModel::from_csv_str(MODEL, "halfway")?;
    let event = dict.build_event("manager", "hire", "criminal")?;
    println!("fundamentals {:?}", event.fundamentals());
    println!("transients   {:?}", model.transients(&event));
    println!("deflection   {:.4}", model.deflection(&event));

    let table = model.deflection_table(&dict, "manager", &["hire", "fire-from-a-job"], &["saleslady", "criminal"])?;
    print!("{}", table.to_csv());
    Ok(())
}
