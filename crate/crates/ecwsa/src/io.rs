//! CSV ingestion.
//!
//! One instance per row, numeric feature cells, and a label column that can
//! hold anything (labels are encoded in order of first appearance). Rows
//! with a missing cell are dropped and their row numbers recorded; any other
//! unparseable cell is an error naming its row and column.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ecwsa_core::Dataset;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Whether the first row holds column names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// Treat the first row as a header when one of its feature cells is
    /// not a number.
    #[default]
    Auto,
    Present,
    Absent,
}

impl FromStr for HeaderMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(HeaderMode::Auto),
            "yes" | "true" | "present" => Ok(HeaderMode::Present),
            "no" | "false" | "absent" => Ok(HeaderMode::Absent),
            other => Err(format!("unknown header mode '{other}' (expected auto, yes or no)")),
        }
    }
}

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    /// Zero-based column index.
    Index(usize),
    /// Header name; implies a header row.
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty label column".into());
        }
        if s.eq_ignore_ascii_case("last") {
            return Ok(LabelColumn::Last);
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub header: HeaderMode,
    pub label: LabelColumn,
    /// Dataset name; defaults to the file stem.
    pub name: Option<String>,
}

/// A parsed file plus what the loader saw along the way.
#[derive(Debug, Clone)]
pub struct Loaded {
    /// Raw (not yet normalized) values.
    pub dataset: Dataset,
    /// Lowercase hex SHA-256 of the file bytes.
    pub sha256: String,
    pub had_header: bool,
    pub label_column: usize,
    /// One-based row numbers of rows dropped for missing cells.
    pub rejected_rows: Vec<usize>,
}

impl Loaded {
    /// `(features, instances, classes)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        let d = &self.dataset;
        (d.n_features(), d.n_instances(), d.n_classes())
    }
}

const MISSING: [&str; 6] = ["", "?", "na", "n/a", "nan", "null"];

fn is_missing(cell: &str) -> bool {
    MISSING.iter().any(|m| cell.eq_ignore_ascii_case(m))
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads and parses a CSV file.
pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Loaded> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut options = options.clone();
    if options.name.is_none() {
        options.name = Some(
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into()),
        );
    }
    parse_csv(&bytes, &options)
}

/// Parses CSV bytes. Row numbers in errors are one-based and count the
/// header row when there is one.
pub fn parse_csv(bytes: &[u8], options: &LoadOptions) -> Result<Loaded> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map_or(records.len() as u64 + 1, |p| p.line()) as usize;
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(Error::parse(1, 1, "file has no rows"));
    };
    let width = first.len();
    if width < 2 {
        return Err(Error::parse(1, 1, "need at least one feature column and a label column"));
    }

    let forced_header = matches!(options.label, LabelColumn::Name(_));
    let label_guess = match &options.label {
        LabelColumn::Index(i) => *i,
        _ => width - 1,
    };
    let had_header = match options.header {
        HeaderMode::Present => true,
        HeaderMode::Absent if forced_header => {
            return Err(Error::InvalidOptions(
                "a label column given by name needs a header row".into(),
            ))
        }
        HeaderMode::Absent => false,
        HeaderMode::Auto => {
            forced_header
                || first
                    .iter()
                    .enumerate()
                    .any(|(j, c)| j != label_guess && !is_missing(c) && parse_number(c).is_none())
        }
    };

    let label_column = match &options.label {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => {
            return Err(Error::InvalidOptions(format!(
                "label column {i} is out of range for {width} columns"
            )))
        }
        LabelColumn::Name(name) => first.iter().position(|c| c == name).ok_or_else(|| {
            Error::InvalidOptions(format!("no column named '{name}' in the header"))
        })?,
    };

    let feature_names: Vec<String> = (0..width)
        .filter(|&j| j != label_column)
        .map(|j| {
            if had_header {
                first[j].to_string()
            } else {
                format!("f{j}")
            }
        })
        .collect();

    let body = if had_header { &records[1..] } else { &records[..] };
    let mut values = Vec::with_capacity(body.len() * (width - 1));
    let mut labels = Vec::with_capacity(body.len());
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut rejected_rows = Vec::new();
    let mut row_values = Vec::with_capacity(width - 1);

    'rows: for (line, rec) in body {
        if rec.len() != width {
            return Err(Error::parse(
                *line,
                rec.len().min(width) + 1,
                format!("expected {width} cells, found {}", rec.len()),
            ));
        }
        row_values.clear();
        for (j, cell) in rec.iter().enumerate() {
            if is_missing(cell) {
                rejected_rows.push(*line);
                continue 'rows;
            }
            if j == label_column {
                continue;
            }
            match parse_number(cell) {
                Some(v) => row_values.push(v),
                None => {
                    return Err(Error::parse(
                        *line,
                        j + 1,
                        format!("'{cell}' is not a finite number"),
                    ))
                }
            }
        }
        let label = &rec[label_column];
        let next = class_names.len();
        let code = *class_index.entry(label.to_string()).or_insert_with(|| {
            class_names.push(label.to_string());
            next
        });
        values.extend_from_slice(&row_values);
        labels.push(code);
    }

    let name = options.name.clone().unwrap_or_else(|| "dataset".into());
    let dataset = Dataset::new(name, feature_names, values, labels, class_names)?;
    Ok(Loaded {
        dataset,
        sha256: sha256_hex(bytes),
        had_header,
        label_column,
        rejected_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, options: &LoadOptions) -> Result<Loaded> {
        parse_csv(text.as_bytes(), options)
    }

    #[test]
    fn header_detected_and_labels_encoded_by_first_appearance() {
        let l = parse("a,b,class\n1,2,yes\n3,4,no\n5,6,yes\n", &LoadOptions::default()).unwrap();
        assert!(l.had_header);
        assert_eq!(l.dataset.feature_names(), &["a", "b"]);
        assert_eq!(l.dataset.class_names(), &["yes", "no"]);
        assert_eq!(l.dataset.labels(), &[0, 1, 0]);
        assert_eq!(l.shape(), (2, 3, 2));
    }

    #[test]
    fn no_header_mode_fails_on_header_row() {
        let opts = LoadOptions {
            header: HeaderMode::Absent,
            ..LoadOptions::default()
        };
        match parse("a,b,class\n1,2,0\n3,4,1\n", &opts).unwrap_err() {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (1, 1)),
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn label_by_name_and_index() {
        let text = "class,x,y\nA,1,2\nB,3,4\n";
        let by_name = LoadOptions {
            label: "class".parse().unwrap(),
            ..LoadOptions::default()
        };
        let by_index = LoadOptions {
            label: "0".parse().unwrap(),
            ..LoadOptions::default()
        };
        for opts in [by_name, by_index] {
            let l = parse(text, &opts).unwrap();
            assert_eq!(l.label_column, 0);
            assert_eq!(l.dataset.values(), &[1.0, 2.0, 3.0, 4.0]);
        }
    }

    #[test]
    fn missing_cells_reject_rows() {
        let l = parse("x,y,c\n1,2,0\n?,4,1\n5,,0\n7,8,1\n", &LoadOptions::default()).unwrap();
        assert_eq!(l.rejected_rows, vec![3, 4]);
        assert_eq!(l.dataset.n_instances(), 2);
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let err = parse("1,2,0\n3,abc,1\n", &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, column: 2, .. }), "{err}");
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn crlf_and_blank_lines_tolerated() {
        let l = parse("1,2,0\r\n3,4,1\r\n\r\n", &LoadOptions::default()).unwrap();
        assert!(!l.had_header);
        assert_eq!(l.shape(), (2, 2, 2));
        assert_eq!(l.dataset.feature_names(), &["f0", "f1"]);
    }

    #[test]
    fn single_class_is_invalid() {
        let err = parse("1,0\n2,0\n", &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Core(ecwsa_core::Error::InvalidArgument(_))));
    }

    #[test]
    fn ragged_row_rejected() {
        assert!(parse("1,2,0\n3,1\n", &LoadOptions::default()).is_err());
    }

    #[test]
    fn checksum_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
