//! Regression data as CSV: a header row, numeric columns, the target last.

use std::path::Path;

use randnet_core::training::{Dataset, Role};
use randnet_core::Matrix;

use crate::error::{CliError, Result};

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn parse_row(path: &Path, line: u64, record: &csv::StringRecord) -> Result<Vec<f64>> {
    record
        .iter()
        .enumerate()
        .map(|(c, field)| {
            field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                CliError::format(
                    path,
                    format!("line {line}, column {}: {field:?} is not a finite number", c + 1),
                )
            })
        })
        .collect()
}

/// Numeric table with its header.
pub struct Table {
    pub header: Vec<String>,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CliError::format(path, "missing header row"));
    }
    let cols = header.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        data.extend(parse_row(path, i as u64 + 2, &rec)?);
        rows += 1;
    }
    Ok(Table {
        header,
        rows,
        cols,
        data,
    })
}

/// Reads a dataset; every column but the last is an input.
pub fn read_dataset(path: &Path, role: Role) -> Result<Dataset> {
    let t = read_table(path)?;
    if t.cols < 2 {
        return Err(CliError::format(
            path,
            "need at least one input column and a target column",
        ));
    }
    if t.rows == 0 {
        return Err(CliError::format(path, "no data rows"));
    }
    let q = t.cols - 1;
    let mut inputs = Vec::with_capacity(t.rows * q);
    let mut targets = Vec::with_capacity(t.rows);
    for row in t.data.chunks(t.cols) {
        inputs.extend_from_slice(&row[..q]);
        targets.push(row[q]);
    }
    let inputs = Matrix::from_vec(t.rows, q, inputs).expect("row length checked by the reader");
    Dataset::with_targets(inputs, &targets, role).map_err(|e| CliError::format(path, e.to_string()))
}

/// Reads prediction inputs: exactly `q` columns, or `q + 1` with a trailing
/// target column that is ignored.
pub fn read_inputs(path: &Path, q: usize) -> Result<Matrix> {
    let t = read_table(path)?;
    if t.cols != q && t.cols != q + 1 {
        return Err(CliError::format(
            path,
            format!("model expects {q} input columns, file has {}", t.cols),
        ));
    }
    let data: Vec<f64> = t
        .data
        .chunks(t.cols.max(1))
        .flat_map(|r| r[..q].iter().copied())
        .collect();
    Matrix::from_vec(t.rows, q, data).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut header: Vec<String> = (1..=data.n_inputs()).map(|i| format!("z{i}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(|e| csv_io(path, e))?;
    let y = data.target_vector();
    for (row, target) in data.inputs().row_iter().zip(y) {
        let fields: Vec<String> = row
            .iter()
            .chain(std::iter::once(&target))
            .map(|v| v.to_string())
            .collect();
        w.write_record(&fields).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub(crate) fn csv_io(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp(content: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), content).unwrap();
        f
    }

    #[test]
    fn last_column_is_the_target() {
        let f = temp("a,b,y\n1,2,3\n4,5,6\n");
        let d = read_dataset(f.path(), Role::Training).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.n_inputs(), 2);
        assert_eq!(d.target_vector(), [3.0, 6.0]);
        assert_eq!(d.inputs().row(1), [4.0, 5.0]);
    }

    #[test]
    fn rejects_non_numeric_fields() {
        let f = temp("a,y\n1,2\nx,3\n");
        let err = read_dataset(f.path(), Role::Training).err().unwrap();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_ragged_rows() {
        let f = temp("a,y\n1,2\n3\n");
        assert!(read_dataset(f.path(), Role::Training).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_dataset(Path::new("/nonexistent/x.csv"), Role::Training)
            .err()
            .unwrap();
        assert!(matches!(err, CliError::Io { .. }));
    }

    #[test]
    fn round_trip() {
        let f = temp("a,y\n0.1,2\n-3.5,1e-3\n");
        let d = read_dataset(f.path(), Role::Training).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_dataset(out.path(), &d).unwrap();
        assert_eq!(read_dataset(out.path(), Role::Training).unwrap(), d);
    }

    #[test]
    fn inputs_may_carry_a_target() {
        let f = temp("a,b,y\n1,2,3\n");
        assert_eq!(read_inputs(f.path(), 2).unwrap().row(0), [1.0, 2.0]);
        assert_eq!(read_inputs(f.path(), 3).unwrap().row(0), [1.0, 2.0, 3.0]);
        assert!(read_inputs(f.path(), 5).is_err());
    }
}
