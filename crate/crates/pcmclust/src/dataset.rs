//! Dataset ingestion and export.
//!
//! Two on-disk formats are supported:
//!
//! * CSV: one matrix per block, blocks separated by blank lines. The first
//!   line of a block is `# label`, followed by `n` comma-separated rows; an
//!   empty cell is a missing comparison.
//! * JSON: an array of `{"label": ..., "n": ..., "entries": [[...]]}`
//!   objects with `null` for missing entries.
//!
//! Ingestion validates every matrix and runs repair mode, which rewrites
//! mirrored entries that are reciprocal only up to rounding (survey data is
//! routinely transcribed with three decimals); each rewrite is recorded as a
//! warning. Exports print floats with 17 significant digits (CSV) or
//! shortest round-trip form (JSON), so ingest -> export -> ingest is
//! bit-identical.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcm::Pcm;
use crate::textfmt::sig17;

/// On-disk dataset format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "json" => Ok(DataFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format '{other}', expected csv|json"
            ))),
        }
    }
}

/// A mirrored entry rewritten during ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    pub label: String,
    /// Entry `(row, col)` was replaced by the reciprocal of `(col, row)`.
    pub row: usize,
    pub col: usize,
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "matrix '{}': entry ({},{}) replaced by the reciprocal of ({},{})",
            self.label, self.row, self.col, self.col, self.row
        )
    }
}

/// A validated collection of matrices of uniform order with unique labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub pcms: Vec<Pcm>,
    pub n: usize,
    pub source: String,
    pub warnings: Vec<IngestWarning>,
}

impl Dataset {
    /// Wraps already-validated matrices, checking uniform order and label
    /// uniqueness.
    pub fn from_pcms(pcms: Vec<Pcm>, source: impl Into<String>) -> Result<Self> {
        let first = pcms.first().ok_or(Error::EmptyInput)?;
        let n = first.n();
        for p in &pcms {
            if p.n() != n {
                return Err(Error::OrderMismatch {
                    a: first.label().to_string(),
                    an: n,
                    b: p.label().to_string(),
                    bn: p.n(),
                });
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &pcms {
            if !seen.insert(p.label().to_string()) {
                return Err(Error::DuplicateLabel {
                    label: p.label().to_string(),
                });
            }
        }
        Ok(Self {
            pcms,
            n,
            source: source.into(),
            warnings: Vec::new(),
        })
    }

    pub fn m(&self) -> usize {
        self.pcms.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.pcms.iter().map(|p| p.label().to_string()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (b, pcm) in self.pcms.iter().enumerate() {
            if b > 0 {
                out.push('\n');
            }
            out.push_str("# ");
            out.push_str(pcm.label());
            out.push('\n');
            for row in pcm.rows() {
                let cells: Vec<String> = row
                    .iter()
                    .map(|c| c.map(sig17).unwrap_or_default())
                    .collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let records: Vec<JsonMatrix> = self
            .pcms
            .iter()
            .map(|p| JsonMatrix {
                label: p.label().to_string(),
                n: p.n(),
                entries: p.rows(),
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&records).expect("plain structs serialize");
        s.push('\n');
        s
    }
}

#[derive(Serialize, Deserialize)]
struct JsonMatrix {
    label: String,
    n: usize,
    entries: Vec<Vec<Option<f64>>>,
}

/// Reads and validates a dataset file.
pub fn ingest(path: &Path, format: DataFormat) -> Result<Dataset> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: display.clone(),
        line: 0,
        message: e.to_string(),
    })?;
    ingest_str(&text, format, &display)
}

/// Parses dataset text; `source` is used in error messages.
pub fn ingest_str(text: &str, format: DataFormat, source: &str) -> Result<Dataset> {
    let raw = match format {
        DataFormat::Csv => parse_csv(text, source)?,
        DataFormat::Json => parse_json(text, source)?,
    };
    if raw.is_empty() {
        return Err(Error::Parse {
            path: source.to_string(),
            line: 0,
            message: "no matrices found".to_string(),
        });
    }

    let mut pcms = Vec::with_capacity(raw.len());
    let mut warnings = Vec::new();
    for (label, grid) in raw {
        let (pcm, repairs) = Pcm::new_repaired(label, grid)?;
        warnings.extend(repairs.into_iter().map(|r| IngestWarning {
            label: pcm.label().to_string(),
            row: r.row,
            col: r.col,
        }));
        pcms.push(pcm);
    }
    let mut dataset = Dataset::from_pcms(pcms, source)?;
    dataset.warnings = warnings;
    Ok(dataset)
}

type RawMatrix = (String, Vec<Vec<Option<f64>>>);

fn parse_csv(text: &str, source: &str) -> Result<Vec<RawMatrix>> {
    let err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };

    let mut matrices = Vec::new();
    let mut label: Option<String> = None;
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut flush =
        |label: &mut Option<String>, rows: &mut Vec<Vec<Option<f64>>>, line: usize| -> Result<()> {
            if let Some(l) = label.take() {
                if rows.is_empty() {
                    return Err(err(line, format!("matrix '{l}' has no rows")));
                }
                matrices.push((l, std::mem::take(rows)));
            } else if !rows.is_empty() {
                return Err(err(line, "data rows before any '# label' line".to_string()));
            }
            Ok(())
        };

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim_end();
        if line.trim().is_empty() {
            flush(&mut label, &mut rows, lineno)?;
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if label.is_some() && !rows.is_empty() {
                flush(&mut label, &mut rows, lineno)?;
            } else if label.is_some() {
                return Err(err(lineno, "label line inside a matrix block".to_string()));
            }
            label = Some(rest.trim().to_string());
            continue;
        }
        if label.is_none() {
            return Err(err(
                lineno,
                "expected '# label' before matrix rows".to_string(),
            ));
        }
        let mut cells = Vec::new();
        for cell in line.split(',') {
            let cell = cell.trim();
            if cell.is_empty() {
                cells.push(None);
            } else {
                let value: f64 = cell
                    .parse()
                    .map_err(|_| err(lineno, format!("cannot parse '{cell}' as a number")))?;
                cells.push(Some(value));
            }
        }
        rows.push(cells);
    }
    flush(&mut label, &mut rows, text.lines().count())?;
    Ok(matrices)
}

fn parse_json(text: &str, source: &str) -> Result<Vec<RawMatrix>> {
    let records: Vec<JsonMatrix> = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: source.to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    records
        .into_iter()
        .map(|r| {
            if r.entries.len() != r.n {
                return Err(Error::Parse {
                    path: source.to_string(),
                    line: 0,
                    message: format!(
                        "matrix '{}' declares n = {} but has {} rows",
                        r.label,
                        r.n,
                        r.entries.len()
                    ),
                });
            }
            Ok((r.label, r.entries))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# first
1,2,4
0.5,1,2
0.25,0.5,1

# second
1,,3
,1,1
0.333333,1,1
";

    #[test]
    fn csv_parses_labels_blocks_and_missing_cells() {
        let ds = ingest_str(SAMPLE, DataFormat::Csv, "sample.csv").unwrap();
        assert_eq!(ds.m(), 2);
        assert_eq!(ds.labels(), vec!["first", "second"]);
        assert_eq!(ds.pcms[1].get(0, 1), None);
        assert_eq!(ds.pcms[1].get(0, 2), Some(3.0));
        // 0.333333 vs 1/3: repaired with a warning.
        assert_eq!(ds.warnings.len(), 1);
        assert_eq!(ds.warnings[0].label, "second");
        assert_eq!(ds.pcms[1].get(2, 0), Some(1.0 / 3.0));
    }

    #[test]
    fn single_matrix_file_gives_a_one_matrix_dataset() {
        let text = "\
# measured
1,1.691,0.282,0.770
0.591,1,0.167,0.455
3.544,5.991,1,2.725
1.300,2.198,0.367,1
";
        let ds = ingest_str(text, DataFormat::Csv, "measured.csv").unwrap();
        assert_eq!(ds.m(), 1);
        assert_eq!(ds.n, 4);
        // Printed three-decimal reciprocals get repaired with warnings.
        assert!(!ds.warnings.is_empty());
        assert!(ds.pcms[0].is_consistent(5e-3).unwrap());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "# m\n1,2\nx,1\n";
        match ingest_str(bad, DataFormat::Csv, "bad.csv").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
        let headerless = "1,2\n0.5,1\n";
        match ingest_str(headerless, DataFormat::Csv, "h.csv").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn validation_errors_name_the_matrix() {
        let bad = "# broken\n1,2\n3,1\n";
        match ingest_str(bad, DataFormat::Csv, "v.csv").unwrap_err() {
            Error::NonReciprocal { label, .. } => assert_eq!(label, "broken"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let dup = "# m\n1,2\n0.5,1\n\n# m\n1,3\n0.333333333333,1\n";
        assert!(matches!(
            ingest_str(dup, DataFormat::Csv, "d.csv").unwrap_err(),
            Error::DuplicateLabel { .. }
        ));
    }

    #[test]
    fn csv_round_trip_is_bit_identical() {
        let ds = ingest_str(SAMPLE, DataFormat::Csv, "sample.csv").unwrap();
        let exported = ds.to_csv();
        let again = ingest_str(&exported, DataFormat::Csv, "sample.csv").unwrap();
        assert_eq!(again.pcms, ds.pcms);
        assert_eq!(again.to_csv(), exported);
        // The re-ingest sees exact reciprocals, so no repair is needed.
        assert!(again.warnings.is_empty());
    }

    #[test]
    fn json_round_trip_is_bit_identical() {
        let ds = ingest_str(SAMPLE, DataFormat::Csv, "sample.csv").unwrap();
        let exported = ds.to_json();
        let again = ingest_str(&exported, DataFormat::Json, "sample.json").unwrap();
        assert_eq!(again.pcms, ds.pcms);
        assert_eq!(again.to_json(), exported);
    }

    #[test]
    fn json_rejects_mismatched_order() {
        let text = r#"[{"label": "m", "n": 3, "entries": [[1.0, 2.0], [0.5, 1.0]]}]"#;
        assert!(matches!(
            ingest_str(text, DataFormat::Json, "m.json").unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn mixed_orders_are_rejected() {
        let text = "# a\n1,2\n0.5,1\n\n# b\n1,2,3\n0.5,1,1\n0.333333333333,1,1\n";
        assert!(matches!(
            ingest_str(text, DataFormat::Csv, "mix.csv").unwrap_err(),
            Error::OrderMismatch { .. }
        ));
    }
}
