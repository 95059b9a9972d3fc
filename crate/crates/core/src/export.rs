//! Deterministic CSV and JSON rendering.
//!
//! Floats are written in their shortest round-trip decimal form, so output
//! is byte-identical across runs and re-parses to the same values.

use serde::Serialize;

use crate::catalog::CatalogEntry;
use crate::error::{MourreError, Result};
use crate::pingpong::ThresholdSolution;

/// Shortest decimal string that parses back to `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";")
}

fn csv_error(e: impl std::fmt::Display) -> MourreError {
    MourreError::InvalidInput(format!("csv: {e}"))
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(&r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

/// One row per solution; `omega` and `X` are `;`-separated lists.
pub fn thresholds_csv(solutions: &[ThresholdSolution]) -> Result<String> {
    write_csv(
        &["kappa", "n", "variant", "E", "order_m", "omega", "X"],
        solutions.iter().map(|s| {
            vec![
                s.kappa.to_string(),
                s.n.to_string(),
                s.variant.to_string(),
                fmt_f64(s.e),
                s.order_m.to_string(),
                join(&s.omega),
                join(&s.x),
            ]
        }),
    )
}

/// One row per catalog entry; provenances are `|`-separated labels and the
/// witness column holds the first recorded witness.
pub fn catalog_csv(entries: &[CatalogEntry]) -> Result<String> {
    write_csv(
        &["E", "kappa", "dim", "provenance", "order_m", "witness"],
        entries.iter().map(|c| {
            let witness = c
                .provenance
                .iter()
                .map(|p| p.witness())
                .find(|w| !w.is_empty())
                .unwrap_or_default();
            vec![
                fmt_f64(c.e),
                c.kappa.to_string(),
                c.dim.to_string(),
                c.provenance.iter().map(|p| p.label()).collect::<Vec<_>>().join("|"),
                c.order_m.map(|m| m.to_string()).unwrap_or_default(),
                join(&witness),
            ]
        }),
    )
}

/// Long-format `(E, x, G)` plot data.
pub fn plot_csv(rows: &[(f64, f64, f64)]) -> Result<String> {
    write_csv(
        &["E", "x", "G"],
        rows.iter().map(|(e, x, g)| vec![fmt_f64(*e), fmt_f64(*x), fmt_f64(*g)]),
    )
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| MourreError::InvalidInput(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}
