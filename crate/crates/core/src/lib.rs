//! Measure the affective (stereotype-driven) component of a decision's
//! outcome mapping with Affect Control Theory deflections, and divide it
//! out to recover the rational component.
//!
//! The crate is organized bottom-up:
//!
//! - [`sentiment`]: EPA vectors, label dictionaries, actor-behavior-object events.
//! - [`impression`]: impression-formation models, deflections, deflection tables.
//! - [`normalize`]: affective weights and normalization of outcome mappings.
//! - [`fairness`]: discrimination/divergence metrics, marginals, the alpha
//!   sweep, degeneracy and intersectional regress checks.
//! - [`scenario`], [`reproduce`], [`cli`]: file formats, bundled examples and
//!   the command-line front end.
//!
//! ```
//! use affnorm::grid::Grid;
//! use affnorm::normalize::{normalize_mapping, Deflections, FailureMode, NormalizationConfig, OutcomeMapping};
//!
//! let map = OutcomeMapping::from_rows(vec![vec![0.9, 0.7], vec![0.6, 0.3]]).unwrap();
//! let hire = Grid::from_rows(vec![vec![1.1, 1.1], vec![4.1, 3.2]]).unwrap();
//! let cfg = NormalizationConfig::new(1.0, FailureMode::Simple, Deflections::success_only(hire).unwrap()).unwrap();
//! let normalized = normalize_mapping(&map, &cfg).unwrap();
//! assert!((normalized.prob().get(1, 0) - 0.99).abs() < 0.01);
//! ```

pub mod cli;
mod csvio;
pub mod error;
pub mod fairness;
pub mod fixtures;
pub mod grid;
pub mod impression;
pub mod normalize;
pub mod reproduce;
pub mod scenario;
pub mod sentiment;

pub use error::{Error, Result};
