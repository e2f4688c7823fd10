//! CSV output with a fixed number format and its reader.
//!
//! Floats are written with 17 significant digits in exponent form, which
//! parses back to the same bits, and rows end in a bare `\n`.

use std::io::{self, Read, Write};
use std::path::Path;

use anyhow::{Context, Result};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and rows to `out`, or to stdout when `out` is `None`.
pub fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            write_rows(io::BufWriter::new(file), header, rows)
                .with_context(|| format!("cannot write {}", path.display()))
        }
        None => write_rows(io::stdout().lock(), header, rows),
    }
}

pub fn write_rows<W: Write>(sink: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV produced by [`write_csv`], checking the header.
pub fn read_csv<R: Read>(source: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_reader(source);
    let found = r.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        anyhow::bail!("unexpected header {:?}, expected {:?}", found, header);
    }
    r.records().map(|rec| rec.map_err(Into::into)).collect()
}

/// One row of a matrix-element table: `c_ln = re + i im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixElementRow {
    pub l: usize,
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

pub const MATRIX_HEADER: [&str; 4] = ["l", "n", "re", "im"];

pub fn matrix_rows(rows: &[MatrixElementRow]) -> Vec<Vec<String>> {
    rows.iter().map(|r| vec![r.l.to_string(), r.n.to_string(), float(r.re), float(r.im)]).collect()
}

pub fn read_matrix_elements<R: Read>(source: R) -> Result<Vec<MatrixElementRow>> {
    read_csv(source, &MATRIX_HEADER)?
        .iter()
        .map(|rec| {
            Ok(MatrixElementRow { l: rec[0].parse()?, n: rec[1].parse()?, re: rec[2].parse()?, im: rec[3].parse()? })
        })
        .collect()
}

/// One point of a figure curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub a1: f64,
    pub curve: u32,
    pub value: f64,
}

pub const CURVE_HEADER: [&str; 3] = ["a1", "curve", "value"];

pub fn curve_rows(points: &[CurvePoint]) -> Vec<Vec<String>> {
    points.iter().map(|p| vec![float(p.a1), p.curve.to_string(), float(p.value)]).collect()
}

pub fn read_curves<R: Read>(source: R) -> Result<Vec<CurvePoint>> {
    read_csv(source, &CURVE_HEADER)?
        .iter()
        .map(|rec| Ok(CurvePoint { a1: rec[0].parse()?, curve: rec[1].parse()?, value: rec[2].parse()? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_to_the_bit() {
        for x in [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 0.99913, -2.5e-300, 0.0, 1e300, std::f64::consts::PI] {
            assert_eq!(float(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
        assert_eq!(float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn rows_end_in_newline() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(buf, b"a,b\n1,2\n");
    }

    #[test]
    fn header_is_checked() {
        assert!(read_curves("x,y,z\n1,2,3\n".as_bytes()).is_err());
        let pts = read_curves("a1,curve,value\n0.5,2,0.25\n".as_bytes()).unwrap();
        assert_eq!(pts, vec![CurvePoint { a1: 0.5, curve: 2, value: 0.25 }]);
    }
}
