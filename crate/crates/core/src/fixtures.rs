//! Data files bundled with the crate, addressable as `builtin:<name>`.

pub const EPA_INDIANA_2005: &str = include_str!("../fixtures/epa_indiana2005.csv");
pub const HIRING_DEFLECTIONS: &str = include_str!("../fixtures/hiring_deflections.csv");
pub const MARKETING_DEFLECTIONS: &str = include_str!("../fixtures/marketing_deflections.csv");

pub const HIRING_SIMPLE: &str = include_str!("../fixtures/hiring_simple.toml");
pub const HIRING_REVISED: &str = include_str!("../fixtures/hiring_revised.toml");
pub const HIRING_VARIATION: &str = include_str!("../fixtures/hiring_variation.toml");
pub const MARKETING_BIAS: &str = include_str!("../fixtures/marketing_bias.toml");
pub const MARKETING_MARGINAL: &str = include_str!("../fixtures/marketing_marginal.toml");

/// `(file name, contents)` of every bundled fixture.
pub const ALL: [(&str, &str); 8] = [
    ("epa_indiana2005.csv", EPA_INDIANA_2005),
    ("hiring_deflections.csv", HIRING_DEFLECTIONS),
    ("marketing_deflections.csv", MARKETING_DEFLECTIONS),
    ("hiring_simple.toml", HIRING_SIMPLE),
    ("hiring_revised.toml", HIRING_REVISED),
    ("hiring_variation.toml", HIRING_VARIATION),
    ("marketing_bias.toml", MARKETING_BIAS),
    ("marketing_marginal.toml", MARKETING_MARGINAL),
];

/// Looks a fixture up by file name, with or without the extension.
pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter()
        .find(|(file, _)| *file == name || file.rsplit_once('.').map(|(stem, _)| stem) == Some(name))
        .map(|(_, text)| *text)
}
