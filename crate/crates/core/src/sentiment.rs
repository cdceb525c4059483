//! EPA sentiments, label dictionaries and actor-behavior-object events.
//!
//! Dictionaries are CSV files with the header `label,category,e,p,a`, where
//! `category` is `identity` or `behavior`. Lines starting with `#` are
//! comments. Labels are case-sensitive and multiword labels are hyphenated
//! (`fire-from-a-job`).

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};

/// Largest magnitude a sentiment score may take on any dimension.
pub const EPA_BOUND: f64 = 4.3;
const BOUND_TOLERANCE: f64 = 1e-9;

/// A point in evaluation / potency / activity space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpaVector {
    e: f64,
    p: f64,
    a: f64,
}

impl EpaVector {
    pub fn new(e: f64, p: f64, a: f64) -> Result<Self> {
        for (name, v) in [("e", e), ("p", p), ("a", a)] {
            if !v.is_finite() {
                return Err(Error::validation(format!("EPA component {name} is not finite")));
            }
            if v.abs() > EPA_BOUND + BOUND_TOLERANCE {
                return Err(Error::validation(format!(
                    "EPA component {name}={v} outside [-{EPA_BOUND}, {EPA_BOUND}]"
                )));
            }
        }
        Ok(Self { e, p, a })
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.e, self.p, self.a]
    }
}

impl<'de> Deserialize<'de> for EpaVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            e: f64,
            p: f64,
            a: f64,
        }
        let raw = Raw::deserialize(de)?;
        EpaVector::new(raw.e, raw.p, raw.a).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for EpaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EPA:{},{},{}", self.e, self.p, self.a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Identity,
    Behavior,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Identity => "identity",
            Category::Behavior => "behavior",
        })
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "identity" => Ok(Category::Identity),
            "behavior" => Ok(Category::Behavior),
            other => Err(format!("unknown category `{other}`")),
        }
    }
}

/// Label → fundamental sentiment, for one surveyed population.
#[derive(Clone, Debug, PartialEq)]
pub struct SentimentDictionary {
    entries: IndexMap<(String, Category), EpaVector>,
    provenance: String,
}

const DICTIONARY_HEADER: [&str; 5] = ["label", "category", "e", "p", "a"];

impl SentimentDictionary {
    pub fn new(provenance: impl Into<String>) -> Self {
        Self {
            entries: IndexMap::new(),
            provenance: provenance.into(),
        }
    }

    /// Parses a dictionary CSV. Errors carry the offending line number.
    pub fn load<R: Read>(source: R, provenance: impl Into<String>) -> Result<Self> {
        let mut dict = Self::new(provenance);
        for row in csvio::records(source, &DICTIONARY_HEADER)? {
            let (line, rec) = row?;
            let label = &rec[0];
            if label.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty label".into(),
                });
            }
            let category: Category = rec[1]
                .parse()
                .map_err(|message| Error::Parse { line, message })?;
            let e = csvio::parse_real(&rec[2], line, "e")?;
            let p = csvio::parse_real(&rec[3], line, "p")?;
            let a = csvio::parse_real(&rec[4], line, "a")?;
            let epa = EpaVector::new(e, p, a).map_err(|err| match err {
                Error::Validation { message, .. } => Error::validation_at(line, message),
                other => other,
            })?;
            let key = (label.to_string(), category);
            if dict.entries.contains_key(&key) {
                return Err(Error::Duplicate {
                    line,
                    key: format!("{label} ({category})"),
                });
            }
            dict.entries.insert(key, epa);
        }
        Ok(dict)
    }

    pub fn from_csv_str(text: &str, provenance: impl Into<String>) -> Result<Self> {
        Self::load(text.as_bytes(), provenance)
    }

    /// Adds an entry; an existing `(label, category)` is a duplicate error.
    pub fn insert(&mut self, label: impl Into<String>, category: Category, epa: EpaVector) -> Result<()> {
        let label = label.into();
        if self.entries.contains_key(&(label.clone(), category)) {
            return Err(Error::Duplicate {
                line: 0,
                key: format!("{label} ({category})"),
            });
        }
        self.entries.insert((label, category), epa);
        Ok(())
    }

    pub fn lookup(&self, label: &str, category: Category) -> Result<EpaVector> {
        self.entries
            .get(&(label.to_string(), category))
            .copied()
            .ok_or_else(|| Error::NotFound {
                label: label.to_string(),
                category,
            })
    }

    pub fn build_event(&self, actor: &str, behavior: &str, object: &str) -> Result<AboEvent> {
        Ok(AboEvent {
            actor: self.lookup(actor, Category::Identity)?,
            behavior: self.lookup(behavior, Category::Behavior)?,
            object: self.lookup(object, Category::Identity)?,
            labels: Some([actor.to_string(), behavior.to_string(), object.to_string()]),
        })
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Category, EpaVector)> {
        self.entries
            .iter()
            .map(|((label, category), epa)| (label.as_str(), *category, *epa))
    }

    /// Serializes back to the CSV layout accepted by [`load`](Self::load).
    pub fn to_csv(&self) -> String {
        let mut out = DICTIONARY_HEADER.join(",");
        out.push('\n');
        for (label, category, epa) in self.iter() {
            out.push_str(&format!("{label},{category},{},{},{}\n", epa.e, epa.p, epa.a));
        }
        out
    }
}

/// An actor-behavior-object situation with the fundamentals of each element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AboEvent {
    pub actor: EpaVector,
    pub behavior: EpaVector,
    pub object: EpaVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<[String; 3]>,
}

impl AboEvent {
    pub fn new(actor: EpaVector, behavior: EpaVector, object: EpaVector) -> Self {
        Self {
            actor,
            behavior,
            object,
            labels: None,
        }
    }

    /// Concatenated fundamentals in the order Ae,Ap,Aa,Be,Bp,Ba,Oe,Op,Oa.
    pub fn fundamentals(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        out[..3].copy_from_slice(&self.actor.to_array());
        out[3..6].copy_from_slice(&self.behavior.to_array());
        out[6..].copy_from_slice(&self.object.to_array());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
label,category,e,p,a
# from the Indiana 2005 sentiment survey
manager,identity,1.0,1.6,1.3
student,identity,1.5,0.3,0.8
criminal,identity,-2.4,-0.8,0.8
hire,behavior,1.7,1.9,1.1
fire-from-a-job,behavior,-1.1,1.5,0.4
";

    fn epa(e: f64, p: f64, a: f64) -> EpaVector {
        EpaVector::new(e, p, a).unwrap()
    }

    #[test]
    fn loads_rows() {
        let dict = SentimentDictionary::from_csv_str(SAMPLE, "test").unwrap();
        assert_eq!(dict.len(), 5);
        assert_eq!(dict.lookup("manager", Category::Identity).unwrap(), epa(1.0, 1.6, 1.3));
        assert_eq!(dict.lookup("hire", Category::Behavior).unwrap(), epa(1.7, 1.9, 1.1));
        assert_eq!(dict.provenance(), "test");
    }

    #[test]
    fn lookup_examples() {
        let dict = SentimentDictionary::from_csv_str(SAMPLE, "test").unwrap();
        assert_eq!(dict.lookup("criminal", Category::Identity).unwrap(), epa(-2.4, -0.8, 0.8));
        assert_eq!(
            dict.lookup("fire-from-a-job", Category::Behavior).unwrap(),
            epa(-1.1, 1.5, 0.4)
        );
        match dict.lookup("unicorn", Category::Identity) {
            Err(Error::NotFound { label, category }) => {
                assert_eq!(label, "unicorn");
                assert_eq!(category, Category::Identity);
            }
            other => panic!("expected not-found, got {other:?}"),
        }
    }

    #[test]
    fn labels_are_case_sensitive() {
        let dict = SentimentDictionary::from_csv_str(SAMPLE, "test").unwrap();
        assert!(dict.lookup("Manager", Category::Identity).is_err());
    }

    #[test]
    fn out_of_range_rejected_with_line() {
        let err = SentimentDictionary::from_csv_str("label,category,e,p,a\nx,identity,9.9,0,0\n", "t")
            .unwrap_err();
        match err {
            Error::Validation { line, .. } => assert_eq!(line, Some(2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bound_is_closed() {
        assert!(EpaVector::new(4.3, -4.3, 0.0).is_ok());
        assert!(EpaVector::new(4.3 + 1e-10, 0.0, 0.0).is_ok());
        assert!(EpaVector::new(4.31, 0.0, 0.0).is_err());
        assert!(EpaVector::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn duplicate_rejected() {
        let text = "label,category,e,p,a\nx,identity,1,1,1\nx,behavior,1,1,1\nx,identity,0,0,0\n";
        match SentimentDictionary::from_csv_str(text, "t").unwrap_err() {
            Error::Duplicate { line, .. } => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_rows_report_line() {
        let short = "label,category,e,p,a\n# c\nx,identity,1,1\n";
        match SentimentDictionary::from_csv_str(short, "t").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let nan = "label,category,e,p,a\nx,identity,one,1,1\n";
        assert!(matches!(
            SentimentDictionary::from_csv_str(nan, "t").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        let cat = "label,category,e,p,a\nx,setting,1,1,1\n";
        assert!(matches!(
            SentimentDictionary::from_csv_str(cat, "t").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(SentimentDictionary::from_csv_str("label,e,p,a\n", "t").is_err());
    }

    #[test]
    fn build_event_examples() {
        let dict = SentimentDictionary::from_csv_str(SAMPLE, "test").unwrap();
        let ev = dict.build_event("manager", "hire", "student").unwrap();
        assert_eq!(ev.actor, epa(1.0, 1.6, 1.3));
        assert_eq!(ev.behavior, epa(1.7, 1.9, 1.1));
        assert_eq!(ev.object, epa(1.5, 0.3, 0.8));
        assert_eq!(ev.labels.as_ref().unwrap()[1], "hire");

        let selfref = dict.build_event("manager", "hire", "manager").unwrap();
        assert_eq!(selfref.actor, selfref.object);

        assert!(matches!(
            dict.build_event("manager", "student", "hire"),
            Err(Error::NotFound { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let dict = SentimentDictionary::from_csv_str(SAMPLE, "test").unwrap();
        let again = SentimentDictionary::from_csv_str(&dict.to_csv(), "test").unwrap();
        assert_eq!(dict, again);
    }
}
