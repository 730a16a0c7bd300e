//! `label,f1,f2,...` CSV datasets.
//!
//! Labels may be `-1/+1` or `0/1` (mapped to `-1/+1` with a warning). A first
//! row whose cells are not all numeric is treated as a header. Lines starting
//! with `#` are comments.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use log::warn;

use crate::dataset::{FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};

/// Parsed rows before class checks: features and raw `-1/+1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub features: FeatureMatrix,
    pub labels: Vec<i8>,
}

fn parse_label(cell: &str, line: usize) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("label {cell:?} is not numeric"),
    })?;
    if v == 1.0 || v == -1.0 || v == 0.0 {
        Ok(v)
    } else {
        Err(Error::Parse {
            line,
            message: format!("label {cell:?} is not one of -1, +1, 0, 1"),
        })
    }
}

pub fn parse_csv<R: Read>(reader: R) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut raw_labels = Vec::new();
    let mut values = Vec::new();
    let mut dims: Option<usize> = None;
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        if first {
            first = false;
            if rec.iter().any(|c| c.parse::<f64>().is_err()) {
                continue;
            }
        }
        if rec.len() < 2 {
            return Err(Error::Parse {
                line,
                message: "row needs a label and at least one feature".into(),
            });
        }
        let d = rec.len() - 1;
        match dims {
            None => dims = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::Parse {
                    line,
                    message: format!("ragged row: {d} features, expected {expected}"),
                })
            }
            _ => {}
        }
        raw_labels.push(parse_label(&rec[0], line)?);
        for cell in rec.iter().skip(1) {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cell {cell:?} is not numeric"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("cell {cell:?} is not finite"),
                });
            }
            values.push(v);
        }
    }
    let dims = dims.ok_or(Error::Parse {
        line: 1,
        message: "no data rows".into(),
    })?;
    let has_zero = raw_labels.contains(&0.0);
    let has_neg = raw_labels.contains(&-1.0);
    if has_zero && has_neg {
        return Err(Error::Parse {
            line: 0,
            message: "labels mix 0 and -1".into(),
        });
    }
    if has_zero {
        warn!("0/1 labels mapped to -1/+1");
    }
    let labels = raw_labels
        .iter()
        .map(|&v| if v > 0.0 { 1 } else { -1 })
        .collect::<Vec<i8>>();
    Ok(RawDataset {
        features: FeatureMatrix::new(labels.len(), dims, values)?,
        labels,
    })
}

pub fn load_csv_raw(path: &Path) -> Result<RawDataset> {
    parse_csv(BufReader::new(File::open(path)?))
}

pub fn load_csv(path: &Path) -> Result<LabeledDataset> {
    let raw = load_csv_raw(path)?;
    LabeledDataset::new(raw.features, raw.labels)
}

/// Writes `label,x0,x1,...` with a header row; numbers round-trip exactly.
pub fn write_csv<W: Write>(mut out: W, features: &FeatureMatrix, labels: &[i8]) -> Result<()> {
    if labels.len() != features.rows() {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: features.rows(),
            got: labels.len(),
        });
    }
    let mut header = String::from("label");
    for d in 0..features.dims() {
        header.push_str(&format!(",x{d}"));
    }
    writeln!(out, "{header}")?;
    for (i, label) in labels.iter().enumerate() {
        let mut line = format!("{label:+}");
        for v in features.row(i) {
            line.push(',');
            line.push_str(&format!("{v:?}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_csv(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(File::create(path)?);
    write_csv(&mut f, dataset.features(), dataset.labels())?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_parse() {
        let raw = parse_csv("+1,0.5,0.2\n-1,0.1,0.9\n".as_bytes()).unwrap();
        assert_eq!(raw.labels, vec![1, -1]);
        assert_eq!(raw.features.dims(), 2);
        assert_eq!(raw.features.row(1), &[0.1, 0.9]);
    }

    #[test]
    fn header_and_zero_one() {
        let raw = parse_csv("label,a,b\n1,1,2\n0,3,4\n".as_bytes()).unwrap();
        assert_eq!(raw.labels, vec![1, -1]);
        assert_eq!(raw.features.rows(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_csv("1,2,3\n-1,4\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_csv("1,2\n-1,abc\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_csv("".as_bytes()).is_err());
        assert!(parse_csv("1,2\n-1,3\n0,4\n".as_bytes()).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let f = FeatureMatrix::from_rows(&[
            vec![0.1 + 0.2, -1e-300, std::f64::consts::PI],
            vec![1.0 / 3.0, 12345.678901234567, -0.0],
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &f, &[1, -1]).unwrap();
        let back = parse_csv(buf.as_slice()).unwrap();
        assert_eq!(back.features, f);
        assert_eq!(back.labels, vec![1, -1]);
    }
}
