//! Flat-file formats.
//!
//! Samples: CSV with header `x,value`, one row per grid point. Matrices:
//! row-major CSV without header. Vectors: one value per line. Floats are
//! written in scientific notation with 17 significant digits, which
//! round-trips every finite `f64` exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::frames::GramMatrix;
use crate::function::GridFunction;

/// `{:.16e}`: one digit before the point and sixteen after.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(field: &str, line: u64) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| invalid(format!("line {line}: '{field}' is not a number")))
}

pub fn write_samples<W: Write>(writer: W, xs: &[f64], values: &[f64]) -> Result<()> {
    if xs.len() != values.len() {
        return Err(Error::ShapeMismatch(format!("{} abscissae for {} values", xs.len(), values.len())));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "value"])?;
    for (x, v) in xs.iter().zip(values) {
        w.write_record([format_float(*x), format_float(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "value" {
        return Err(invalid(format!("expected header 'x,value', found '{}'", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(invalid(format!("line {line}: expected 2 fields, found {}", record.len())));
        }
        xs.push(parse_float(&record[0], line)?);
        vs.push(parse_float(&record[1], line)?);
    }
    Ok((xs, vs))
}

pub fn write_samples_file(path: &Path, g: &GridFunction) -> Result<()> {
    write_samples(File::create(path)?, g.grid().points(), g.values())
}

pub fn read_samples_file(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    read_samples(File::open(path)?)
}

pub fn write_matrix<W: Write>(writer: W, m: &GramMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in m.rows() {
        w.write_record(row.iter().map(|v| format_float(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(reader: R) -> Result<GramMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(record.iter().map(|f| parse_float(f, line)).collect::<Result<Vec<_>>>()?);
    }
    GramMatrix::from_rows(&rows)
}

pub fn write_vector<W: Write>(mut writer: W, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(writer, "{}", format_float(*v))?;
    }
    Ok(())
}

pub fn read_vector<R: Read>(mut reader: R) -> Result<Vec<f64>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_float(l, i as u64 + 1))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    Ok(())
}

/// `out.csv` → `out.json`
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        for v in [0.1, 1.0 / 3.0, f64::MAX, f64::MIN_POSITIVE, 5e-324, -7.25e100] {
            assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn samples_round_trip() {
        let xs = [0.0, 0.5, 1.0];
        let vs = [1.0 / 3.0, -0.0, 2.5e-17];
        let mut buf = Vec::new();
        write_samples(&mut buf, &xs, &vs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,value\n"));
        assert_eq!(text.lines().count(), 4);
        let (rx, rv) = read_samples(buf.as_slice()).unwrap();
        assert_eq!(rx, xs);
        assert_eq!(rv.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), vs.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn bad_samples() {
        assert!(read_samples("x,y\n1,2\n".as_bytes()).is_err());
        assert!(read_samples("x,value\n1,abc\n".as_bytes()).is_err());
        assert!(write_samples(Vec::new(), &[1.0], &[]).is_err());
    }

    #[test]
    fn matrix_and_vector_round_trip() {
        let m = GramMatrix::from_rows(&[vec![1.0, 0.25], vec![0.25, 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert!(!String::from_utf8(buf.clone()).unwrap().contains('x'));
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);

        let v = [0.5, 1e-300, -4.0];
        let mut buf = Vec::new();
        write_vector(&mut buf, &v).unwrap();
        assert_eq!(read_vector(buf.as_slice()).unwrap(), v);
    }

    #[test]
    fn sidecar_extension() {
        assert_eq!(sidecar_path(Path::new("out/fig1.csv")), PathBuf::from("out/fig1.json"));
    }
}
