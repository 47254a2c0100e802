//! CSV ingestion and emission.
//!
//! Numeric cells are written with 17 significant digits, which round-trips
//! every f64 exactly through text. Files are comma-separated UTF-8; a header
//! row is optional on input and opt-in on output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use edgc_core::{ClassLabel, LabeledDataset};
use ndarray::Array2;

/// Feature matrix plus labels when a label column was named.
pub struct CsvData {
    pub features: Array2<f64>,
    pub labels: Option<Vec<ClassLabel>>,
}

/// Reads a numeric CSV. With `label_column` set, that 0-based column is
/// parsed as binary labels (0 = correct, 1 = error) and the remaining
/// columns, in order, become the features.
pub fn load_csv(path: &Path, label_column: Option<usize>, has_header: bool) -> Result<CsvData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;

    let mut rows: Vec<f64> = Vec::new();
    let mut labels: Vec<ClassLabel> = Vec::new();
    let mut width: Option<usize> = None;

    for record in reader.records() {
        let record = record.with_context(|| format!("malformed CSV in {}", path.display()))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                bail!(
                    "line {line}: expected {w} fields, found {}",
                    record.len()
                );
            }
            _ => {}
        }
        if let Some(col) = label_column {
            if col >= record.len() {
                bail!(
                    "line {line}: label column {col} out of range (row has {} fields)",
                    record.len()
                );
            }
        }
        for (idx, field) in record.iter().enumerate() {
            if Some(idx) == label_column {
                let label = match field {
                    "0" => ClassLabel::Correct,
                    "1" => ClassLabel::Error,
                    other => bail!("line {line}: label column must be 0 or 1, found {other:?}"),
                };
                labels.push(label);
            } else {
                let value: f64 = field
                    .parse()
                    .map_err(|_| anyhow::anyhow!("line {line}: cannot parse {field:?} as a number"))?;
                rows.push(value);
            }
        }
    }

    let n_rows = if label_column.is_some() {
        labels.len()
    } else {
        match width {
            Some(w) if w > 0 => rows.len() / w,
            _ => 0,
        }
    };
    if n_rows == 0 {
        bail!("{}: no data rows", path.display());
    }
    let n_cols = rows.len() / n_rows;
    if n_cols == 0 {
        bail!("{}: rows contain no feature columns", path.display());
    }
    let features = Array2::from_shape_vec((n_rows, n_cols), rows)
        .context("inconsistent row widths")?;
    Ok(CsvData {
        features,
        labels: label_column.map(|_| labels),
    })
}

/// Reads a CSV that must carry labels.
pub fn load_labeled_csv(path: &Path, label_column: usize, has_header: bool) -> Result<LabeledDataset> {
    let data = load_csv(path, Some(label_column), has_header)?;
    let labels = data.labels.expect("label column was requested");
    LabeledDataset::new(data.features, labels)
        .context("CSV did not form a valid labeled dataset")
}

/// Formats a float with 17 significant digits (lossless for f64).
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes features (and labels, when given, as the last column).
pub fn save_dataset(
    path: &Path,
    features: &Array2<f64>,
    labels: Option<&[ClassLabel]>,
    header: bool,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    let n = features.ncols();
    if header {
        let mut names: Vec<String> = (0..n).map(|j| format!("f{j}")).collect();
        if labels.is_some() {
            names.push("label".to_string());
        }
        writeln!(out, "{}", names.join(","))?;
    }
    for (i, row) in features.rows().into_iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        if let Some(ls) = labels {
            fields.push(ls[i].to_bit().to_string());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smoke_parse_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "1.0,2.0,0\n3.0,4.0,1\n5.0,6.0,0\n").unwrap();
        let ds = load_labeled_csv(&path, 2, false).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.class_counts(), (2, 1));
    }

    #[test]
    fn non_numeric_cell_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "1.0,0\n2.0,1\nfoo,0\n").unwrap();
        let err = load_labeled_csv(&path, 1, false).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn label_column_out_of_range_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "1.0,2.0\n").unwrap();
        let err = load_labeled_csv(&path, 5, false).unwrap_err();
        assert!(err.to_string().contains("label column 5"), "{err}");
    }

    #[test]
    fn non_binary_label_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "1.0,2\n").unwrap();
        let err = load_labeled_csv(&path, 1, false).unwrap_err();
        assert!(err.to_string().contains("0 or 1"), "{err}");
    }

    #[test]
    fn header_row_is_skipped_when_requested() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "f0,f1,label\n1.0,2.0,1\n").unwrap();
        let ds = load_labeled_csv(&path, 2, true).unwrap();
        assert_eq!(ds.n_samples(), 1);
    }

    /// Lossless round-trip: every f64 survives 17-digit text exactly.
    #[test]
    fn write_then_read_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let features = Array2::from_shape_fn((40, 7), |_| {
            // Mix magnitudes to exercise the exponent range.
            let exp = rng.random_range(-300..300);
            let mantissa: f64 = rng.random_range(-1.0..1.0);
            mantissa * 10f64.powi(exp)
        });
        let labels: Vec<ClassLabel> = (0..40)
            .map(|i| {
                if i % 3 == 0 {
                    ClassLabel::Error
                } else {
                    ClassLabel::Correct
                }
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        save_dataset(&path, &features, Some(&labels), false).unwrap();
        let back = load_labeled_csv(&path, 7, false).unwrap();
        assert_eq!(back.labels(), &labels[..]);
        for (a, b) in back.features().iter().zip(features.iter()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
        }
    }
}
