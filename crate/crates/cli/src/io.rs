//! CSV ingestion and atomic file output.
//!
//! Input files have a header row `y,x1,...,xp` followed by one observation
//! per line.

use std::io::{Read, Write};
use std::path::Path;

use dcp::Dataset;

use crate::CliError;

pub fn read_dataset(reader: impl Read, time_ordered: bool) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("cannot read header: {e}")))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names.first() != Some(&"y") {
        return Err(CliError::Data(match names.iter().position(|n| *n == "y") {
            Some(i) => format!("column 'y' must come first, found at position {}", i + 1),
            None => "missing column 'y'".into(),
        }));
    }
    let p = names.len() - 1;
    for j in 1..=p {
        let want = format!("x{j}");
        if names[j] != want {
            return Err(CliError::Data(format!(
                "missing column '{want}' (header position {} is '{}')",
                j + 1,
                names[j]
            )));
        }
    }

    let (mut y, mut x) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |pos| pos.line());
            CliError::Data(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |pos| pos.line());
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Data(format!("line {line}: column '{}': cannot parse '{field}'", names[j]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "line {line}: column '{}': value must be finite",
                    names[j]
                )));
            }
            if j == 0 {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    Ok(Dataset::from_flat(y, x, p)
        .map_err(|e| CliError::Data(e.to_string()))?
        .with_time_order(time_ordered))
}

pub fn read_dataset_file(path: &Path, time_ordered: bool) -> Result<Dataset, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(file, time_ordered)
}

pub fn dataset_csv(data: &Dataset) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["y".to_string()];
    header.extend((1..=data.n_features()).map(|j| format!("x{j}")));
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for (row, y) in data.rows().zip(data.y()) {
        let mut rec = vec![y.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_rows() {
        let d = read_dataset("y,x1,x2\n1,2,3\n4, 5 ,6\n".as_bytes(), false).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.row(1), &[5.0, 6.0]);
    }

    #[test]
    fn names_missing_column() {
        let e = read_dataset("y,x2\n1,2\n3,4\n".as_bytes(), false).unwrap_err();
        assert!(e.to_string().contains("'x1'"), "{e}");
        let e = read_dataset("x1,x2\n1,2\n3,4\n".as_bytes(), false).unwrap_err();
        assert!(e.to_string().contains("'y'"), "{e}");
    }

    #[test]
    fn reports_line_numbers() {
        let e = read_dataset("y,x1\n1,2\n3,abc\n".as_bytes(), false).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = read_dataset("y,x1\n1,2\n3\n".as_bytes(), false).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = Dataset::new(vec![0.1, -1e-300, 7.0], vec![vec![1.0 / 3.0], vec![2.0], vec![1e10]]).unwrap();
        let bytes = dataset_csv(&d).unwrap();
        assert_eq!(read_dataset(bytes.as_slice(), false).unwrap(), d);
    }
}
