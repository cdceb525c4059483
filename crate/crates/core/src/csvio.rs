//! Shared CSV plumbing for the data-file loaders.

use std::io::Read;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::{Error, Result};

/// Iterates `(line, record)` pairs after checking the header matches `header`
/// exactly. Comment lines start with `#`.
pub(crate) fn records<R: Read>(
    mut source: R,
    header: &[&str],
) -> Result<impl Iterator<Item = Result<(u64, StringRecord)>>> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    // Drop comment and blank lines up front and remember where each kept
    // line came from; the reader's own line counter skips them.
    let (kept, origin): (Vec<&str>, Vec<u64>) = text
        .lines()
        .zip(1u64..)
        .filter(|(l, _)| !(l.trim().is_empty() || l.trim_start().starts_with('#')))
        .unzip();
    let text = kept.join("\n");
    let line_starts: Vec<u64> = std::iter::once(0)
        .chain(text.match_indices('\n').map(|(i, _)| i as u64 + 1))
        .collect();
    let line_of = move |byte: u64| {
        let idx = line_starts.partition_point(|&s| s <= byte).saturating_sub(1);
        origin.get(idx).copied().unwrap_or(1)
    };
    let mut reader = ReaderBuilder::new()
        .trim(Trim::All)
        .flexible(true)
        .from_reader(std::io::Cursor::new(text.into_bytes()));
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        let line = line_of(found.position().map_or(0, |p| p.byte()));
        return Err(Error::Parse {
            line,
            message: format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let width = header.len();
    Ok(reader.into_records().map(move |rec| {
        let rec = rec?;
        let line = line_of(rec.position().map_or(0, |p| p.byte()));
        if rec.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        Ok((line, rec))
    }))
}

pub(crate) fn parse_real(field: &str, line: u64, column: &str) -> Result<f64> {
    let value: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("column `{column}`: `{field}` is not a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::validation_at(
            line,
            format!("column `{column}`: non-finite value `{field}`"),
        ));
    }
    Ok(value)
}
