//! Impression formation: transient impressions of an event and its deflection.
//!
//! An [`ImpressionModel`] is a polynomial in the nine event fundamentals.
//! Each row of the equation CSV names a term (`1` for the constant, or a
//! product of distinct factors such as `Ae`, `AeBe`, `BeOp`) and gives its
//! coefficient for each of the nine predicted transients:
//!
//! ```text
//! term,Ae,Ap,Aa,Be,Bp,Ba,Oe,Op,Oa
//! 1,-0.1,0.0,...
//! AeBe,0.05,...
//! ```

use std::fmt;
use std::io::Read;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};
use crate::sentiment::{AboEvent, SentimentDictionary};

pub const DIMENSIONS: usize = 9;

/// Factor names in fundamental order: actor, behavior, object × e, p, a.
pub const FACTOR_NAMES: [&str; DIMENSIONS] = ["Ae", "Ap", "Aa", "Be", "Bp", "Ba", "Oe", "Op", "Oa"];

/// A product of distinct fundamentals, stored as a bit set over
/// [`FACTOR_NAMES`]. The empty set is the constant term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(u16);

impl Term {
    pub const CONSTANT: Term = Term(0);

    pub fn linear(index: usize) -> Term {
        assert!(index < DIMENSIONS);
        Term(1 << index)
    }

    /// Parses a descriptor; factors may appear in any order but only once.
    pub fn parse(descriptor: &str) -> std::result::Result<Term, String> {
        if descriptor == "1" {
            return Ok(Term::CONSTANT);
        }
        if descriptor.is_empty() || !descriptor.is_ascii() {
            return Err(descriptor.to_string());
        }
        if !descriptor.len().is_multiple_of(2) {
            return Err(descriptor.to_string());
        }
        let mut mask = 0u16;
        for i in (0..descriptor.len()).step_by(2) {
            let token = &descriptor[i..i + 2];
            let idx = FACTOR_NAMES
                .iter()
                .position(|&f| f == token)
                .ok_or_else(|| token.to_string())?;
            if mask & (1 << idx) != 0 {
                return Err(format!("{token} (repeated)"));
            }
            mask |= 1 << idx;
        }
        Ok(Term(mask))
    }

    pub fn is_constant(self) -> bool {
        self.0 == 0
    }

    pub fn factors(self) -> impl Iterator<Item = usize> {
        (0..DIMENSIONS).filter(move |i| self.0 & (1 << i) != 0)
    }

    pub fn evaluate(self, fundamentals: &[f64; DIMENSIONS]) -> f64 {
        self.factors().map(|i| fundamentals[i]).product()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return f.write_str("1");
        }
        for i in self.factors() {
            f.write_str(FACTOR_NAMES[i])?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImpressionModel {
    name: String,
    terms: Vec<Term>,
    coefficients: Vec<[f64; DIMENSIONS]>,
}

const MODEL_HEADER: [&str; 10] = ["term", "Ae", "Ap", "Aa", "Be", "Bp", "Ba", "Oe", "Op", "Oa"];

impl ImpressionModel {
    pub fn new(
        name: impl Into<String>,
        terms: Vec<Term>,
        coefficients: Vec<[f64; DIMENSIONS]>,
    ) -> Result<Self> {
        if terms.len() != coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: (terms.len(), DIMENSIONS),
                found: (coefficients.len(), DIMENSIONS),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for t in &terms {
            if !seen.insert(*t) {
                return Err(Error::Duplicate { line: 0, key: t.to_string() });
            }
        }
        if !terms.iter().any(|t| t.is_constant()) {
            return Err(Error::validation("impression model has no constant term"));
        }
        if coefficients.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::validation("non-finite coefficient"));
        }
        Ok(Self {
            name: name.into(),
            terms,
            coefficients,
        })
    }

    /// Model whose transients reproduce the fundamentals.
    pub fn identity() -> Self {
        let mut terms = vec![Term::CONSTANT];
        let mut coefficients = vec![[0.0; DIMENSIONS]];
        for i in 0..DIMENSIONS {
            terms.push(Term::linear(i));
            let mut row = [0.0; DIMENSIONS];
            row[i] = 1.0;
            coefficients.push(row);
        }
        Self::new("identity", terms, coefficients).expect("identity model is valid")
    }

    /// Model whose transients are `value` regardless of the event.
    pub fn constant(value: [f64; DIMENSIONS]) -> Self {
        Self::new("constant", vec![Term::CONSTANT], vec![value]).expect("constant model is valid")
    }

    pub fn load<R: Read>(source: R, name: impl Into<String>) -> Result<Self> {
        let mut terms = Vec::new();
        let mut coefficients = Vec::new();
        let mut lines: IndexMap<Term, u64> = IndexMap::new();
        for row in csvio::records(source, &MODEL_HEADER)? {
            let (line, rec) = row?;
            let term = Term::parse(&rec[0]).map_err(|token| Error::UnknownFactor { line, token })?;
            if lines.insert(term, line).is_some() {
                return Err(Error::Duplicate {
                    line,
                    key: term.to_string(),
                });
            }
            let mut coeff = [0.0; DIMENSIONS];
            for (j, c) in coeff.iter_mut().enumerate() {
                *c = csvio::parse_real(&rec[j + 1], line, MODEL_HEADER[j + 1])?;
            }
            terms.push(term);
            coefficients.push(coeff);
        }
        Self::new(name, terms, coefficients)
    }

    pub fn from_csv_str(text: &str, name: impl Into<String>) -> Result<Self> {
        Self::load(text.as_bytes(), name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn coefficients(&self) -> &[[f64; DIMENSIONS]] {
        &self.coefficients
    }

    pub fn transients(&self, event: &AboEvent) -> [f64; DIMENSIONS] {
        let f = event.fundamentals();
        let mut out = [0.0; DIMENSIONS];
        for (term, coeff) in self.terms.iter().zip(&self.coefficients) {
            let x = term.evaluate(&f);
            for (o, c) in out.iter_mut().zip(coeff) {
                *o += c * x;
            }
        }
        out
    }

    /// Sum of squared fundamental − transient differences.
    pub fn deflection(&self, event: &AboEvent) -> f64 {
        self.deflection_weighted(event, &[1.0; DIMENSIONS])
    }

    pub fn deflection_weighted(&self, event: &AboEvent, weights: &[f64; DIMENSIONS]) -> f64 {
        let f = event.fundamentals();
        let t = self.transients(event);
        (0..DIMENSIONS).map(|i| weights[i] * (f[i] - t[i]).powi(2)).sum()
    }

    /// Deflections of `actor [behavior] object` for every behavior × object.
    pub fn deflection_table(
        &self,
        dict: &SentimentDictionary,
        actor: &str,
        behaviors: &[&str],
        objects: &[&str],
    ) -> Result<DeflectionTable> {
        let mut table = DeflectionTable::new(Provenance::Computed);
        table.actor = Some(actor.to_string());
        for behavior in behaviors {
            for object in objects {
                let event = dict.build_event(actor, behavior, object)?;
                table.insert(*behavior, *object, self.deflection(&event))?;
            }
        }
        Ok(table)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Computed,
    Fixture,
}

/// Deflections keyed by (behavior, object) for one fixed actor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeflectionTable {
    actor: Option<String>,
    #[serde(serialize_with = "serialize_rows")]
    rows: IndexMap<(String, String), f64>,
    provenance: Provenance,
}

fn serialize_rows<S: serde::Serializer>(
    rows: &IndexMap<(String, String), f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Row<'a> {
        behavior: &'a str,
        object: &'a str,
        deflection: f64,
    }
    s.collect_seq(rows.iter().map(|((b, o), d)| Row {
        behavior: b,
        object: o,
        deflection: *d,
    }))
}

const FIXTURE_HEADER: [&str; 3] = ["behavior", "object", "deflection"];

impl DeflectionTable {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            actor: None,
            rows: IndexMap::new(),
            provenance,
        }
    }

    /// Parses a `behavior,object,deflection` CSV.
    pub fn load_fixture<R: Read>(source: R) -> Result<Self> {
        let mut table = Self::new(Provenance::Fixture);
        for row in csvio::records(source, &FIXTURE_HEADER)? {
            let (line, rec) = row?;
            let d = csvio::parse_real(&rec[2], line, "deflection")?;
            if d < 0.0 {
                return Err(Error::validation_at(line, format!("negative deflection {d}")));
            }
            let key = (rec[0].to_string(), rec[1].to_string());
            if table.rows.contains_key(&key) {
                return Err(Error::Duplicate {
                    line,
                    key: format!("{},{}", key.0, key.1),
                });
            }
            table.rows.insert(key, d);
        }
        Ok(table)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::load_fixture(text.as_bytes())
    }

    pub fn insert(&mut self, behavior: impl Into<String>, object: impl Into<String>, deflection: f64) -> Result<()> {
        if !(deflection.is_finite() && deflection >= 0.0) {
            return Err(Error::validation(format!("invalid deflection {deflection}")));
        }
        self.rows.insert((behavior.into(), object.into()), deflection);
        Ok(())
    }

    pub fn get(&self, behavior: &str, object: &str) -> Option<f64> {
        self.rows.get(&(behavior.to_string(), object.to_string())).copied()
    }

    pub fn actor(&self) -> Option<&str> {
        self.actor.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.rows.iter().map(|((b, o), d)| (b.as_str(), o.as_str(), *d))
    }

    pub fn to_csv(&self) -> String {
        let mut out = FIXTURE_HEADER.join(",");
        out.push('\n');
        for (b, o, d) in self.iter() {
            out.push_str(&format!("{b},{o},{d}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentiment::EpaVector;

    fn epa(e: f64, p: f64, a: f64) -> EpaVector {
        EpaVector::new(e, p, a).unwrap()
    }

    fn manager_hire_student() -> AboEvent {
        AboEvent::new(epa(1.0, 1.6, 1.3), epa(1.7, 1.9, 1.1), epa(1.5, 0.3, 0.8))
    }

    const IDENTITY_CSV: &str = "\
term,Ae,Ap,Aa,Be,Bp,Ba,Oe,Op,Oa
1,0,0,0,0,0,0,0,0,0
Ae,1,0,0,0,0,0,0,0,0
Ap,0,1,0,0,0,0,0,0,0
Aa,0,0,1,0,0,0,0,0,0
Be,0,0,0,1,0,0,0,0,0
Bp,0,0,0,0,1,0,0,0,0
Ba,0,0,0,0,0,1,0,0,0
Oe,0,0,0,0,0,0,1,0,0
Op,0,0,0,0,0,0,0,1,0
Oa,0,0,0,0,0,0,0,0,1
";

    #[test]
    fn identity_file_copies_fundamentals() {
        let model = ImpressionModel::from_csv_str(IDENTITY_CSV, "id").unwrap();
        let ev = manager_hire_student();
        assert_eq!(model.transients(&ev), ev.fundamentals());
        assert_eq!(model.deflection(&ev), 0.0);
        assert_eq!(model, ImpressionModel { name: "id".into(), ..ImpressionModel::identity() });
    }

    #[test]
    fn descriptor_grammar() {
        assert_eq!(Term::parse("1").unwrap(), Term::CONSTANT);
        assert_eq!(Term::parse("AeBe").unwrap().to_string(), "AeBe");
        // factor order normalized
        assert_eq!(Term::parse("OpBe").unwrap().to_string(), "BeOp");
        assert_eq!(Term::parse("AaAe").unwrap(), Term::parse("AeAa").unwrap());
        assert!(Term::parse("Xe").is_err());
        assert!(Term::parse("AeAe").is_err());
        assert!(Term::parse("Aep").is_err());
        assert!(Term::parse("").is_err());
    }

    #[test]
    fn interaction_row_accepted() {
        let text = "term,Ae,Ap,Aa,Be,Bp,Ba,Oe,Op,Oa\n1,0,0,0,0,0,0,0,0,0\nAeBe,0.1,0,0,0,0,0,0,0,0\n";
        let model = ImpressionModel::from_csv_str(text, "m").unwrap();
        assert_eq!(model.terms()[1].to_string(), "AeBe");
    }

    #[test]
    fn load_errors() {
        let head = "term,Ae,Ap,Aa,Be,Bp,Ba,Oe,Op,Oa\n";
        let zeros = ",0,0,0,0,0,0,0,0,0\n";
        let unknown = format!("{head}1{zeros}Xe{zeros}");
        assert!(matches!(
            ImpressionModel::from_csv_str(&unknown, "m"),
            Err(Error::UnknownFactor { line: 3, .. })
        ));
        let dup = format!("{head}1{zeros}AeBe{zeros}BeAe{zeros}");
        assert!(matches!(
            ImpressionModel::from_csv_str(&dup, "m"),
            Err(Error::Duplicate { line: 4, .. })
        ));
        let no_const = format!("{head}Ae{zeros}");
        assert!(matches!(
            ImpressionModel::from_csv_str(&no_const, "m"),
            Err(Error::Validation { .. })
        ));
        let bad_num = format!("{head}1,x,0,0,0,0,0,0,0,0\n");
        assert!(matches!(
            ImpressionModel::from_csv_str(&bad_num, "m"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn constant_model_transients() {
        let c = [0.5, -1.0, 2.0, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
        let model = ImpressionModel::constant(c);
        assert_eq!(model.transients(&manager_hire_student()), c);
    }

    #[test]
    fn three_term_model_against_hand_expansion() {
        // Event ((1,0,0),(0,1,0),(0,0,1)): Ae = Bp = Oa = 1, every other factor 0.
        // Terms 1, Ae, BpOa with rows c0, c1, c2:
        //   transient_j = c0_j + c1_j·Ae + c2_j·Bp·Oa = c0_j + c1_j + c2_j.
        // A second event with Bp = 0.5 and Oa = -2 gives BpOa = -1:
        //   transient_j = c0_j + c1_j − c2_j.
        let c0 = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
        let c1 = [1.0, 0.0, -1.0, 2.0, 0.0, 0.0, 0.0, 0.5, 0.0];
        let c2 = [0.0, 3.0, 0.0, 0.0, -0.25, 0.0, 1.0, 0.0, 0.0];
        let model = ImpressionModel::new(
            "three",
            vec![Term::CONSTANT, Term::parse("Ae").unwrap(), Term::parse("BpOa").unwrap()],
            vec![c0, c1, c2],
        )
        .unwrap();
        let ev = AboEvent::new(epa(1.0, 0.0, 0.0), epa(0.0, 1.0, 0.0), epa(0.0, 0.0, 1.0));
        let expected = [1.1, 3.2, -0.7, 2.4, 0.25, 0.6, 1.7, 1.3, 0.9];
        for (got, want) in model.transients(&ev).iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let ev2 = AboEvent::new(epa(1.0, 0.0, 0.0), epa(0.0, 0.5, 0.0), epa(0.0, 0.0, -2.0));
        let expected2 = [1.1, -2.8, -0.7, 2.4, 0.75, 0.6, -0.3, 1.3, 0.9];
        for (got, want) in model.transients(&ev2).iter().zip(expected2) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn constant_zero_deflection_is_squared_norm() {
        // 1.0²+1.6²+1.3² = 5.25, 1.7²+1.9²+1.1² = 7.71, 1.5²+0.3²+0.8² = 2.98
        let d = ImpressionModel::constant([0.0; 9]).deflection(&manager_hire_student());
        assert!((d - 15.94).abs() < 1e-12, "{d}");
    }

    #[test]
    fn weighted_deflection() {
        let model = ImpressionModel::constant([0.0; 9]);
        let mut w = [0.0; 9];
        w[0] = 2.0;
        assert!((model.deflection_weighted(&manager_hire_student(), &w) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fixture_examples() {
        let t = DeflectionTable::from_csv_str("behavior,object,deflection\nhire,criminal,4.1\nfire,student,4.9\n")
            .unwrap();
        assert_eq!(t.get("hire", "criminal"), Some(4.1));
        assert_eq!(t.get("fire", "student"), Some(4.9));
        assert_eq!(t.provenance(), Provenance::Fixture);
        assert!(matches!(
            DeflectionTable::from_csv_str("behavior,object,deflection\nhire,x,-1.0\n"),
            Err(Error::Validation { line: Some(2), .. })
        ));
    }

    #[test]
    fn table_from_model() {
        let dict = SentimentDictionary::from_csv_str(
            "label,category,e,p,a\nmanager,identity,1,1.6,1.3\nstudent,identity,1.5,0.3,0.8\nhire,behavior,1.7,1.9,1.1\n",
            "t",
        )
        .unwrap();
        let model = ImpressionModel::identity();
        let t = model.deflection_table(&dict, "manager", &["hire"], &["student", "manager"]).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|(_, _, d)| d == 0.0));
        assert_eq!(t.provenance(), Provenance::Computed);
        assert!(model.deflection_table(&dict, "manager", &[], &["student"]).unwrap().is_empty());
        assert!(model.deflection_table(&dict, "manager", &["fire"], &["student"]).is_err());
    }
}
