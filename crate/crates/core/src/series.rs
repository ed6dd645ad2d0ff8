//! Time-series container and CSV ingestion.
//!
//! Observations are stored row-major in a flat buffer; a scalar series has
//! dimension 1. Indices are 0-based throughout the crate.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    dim: usize,
}

impl TimeSeries {
    /// Scalar series. Rejects empty input and non-finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(values, 1)
    }

    /// Vector series of dimension `dim`, `values` laid out observation by observation.
    pub fn from_flat(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("series dimension must be at least 1"));
        }
        if values.is_empty() {
            return Err(Error::invalid(
                "series must contain at least one observation",
            ));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} values do not split into observations of dimension {dim}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at observation {}",
                pos / dim
            )));
        }
        Ok(Self { values, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("rows have inconsistent dimension"));
        }
        Self::from_flat(rows.concat(), dim)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    /// Flat row-major buffer; for a scalar series this is the series itself.
    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn observation(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn observations(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    /// Max-norm of every observation (the identity for scalar series is |x|).
    pub fn norms(&self) -> Vec<f64> {
        self.observations()
            .map(|x| x.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_flat(self.values.iter().map(|v| v * c).collect(), self.dim)
    }

    /// Effective sample size `n = len - h_max` for lag analysis up to `h_max`.
    pub fn effective_len(&self, h_max: usize) -> Result<usize> {
        match self.len().checked_sub(h_max) {
            Some(n) if n >= 1 => Ok(n),
            _ => Err(Error::invalid(format!(
                "series of length {} too short for max lag {h_max}",
                self.len()
            ))),
        }
    }

    /// Reads one observation per row; `d` columns give a `d`-dimensional series.
    pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(reader);
        let mut flat = Vec::new();
        let mut dim = 0;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if row == 0 {
                dim = rec.len();
            }
            for field in rec.iter() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line: row + 1 + usize::from(has_header),
                    message: format!("`{field}` is not a number"),
                })?;
                flat.push(v);
            }
        }
        Self::from_flat(flat, dim.max(1))
    }

    pub fn read_csv_path(path: impl AsRef<Path>, has_header: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), has_header)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for obs in self.observations() {
            w.write_record(obs.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

impl AsRef<TimeSeries> for TimeSeries {
    fn as_ref(&self) -> &TimeSeries {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new(vec![f64::INFINITY]).is_err());
        assert!(TimeSeries::from_flat(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn effective_length() {
        let s = TimeSeries::new(vec![1.0; 12]).unwrap();
        assert_eq!(s.effective_len(10).unwrap(), 2);
        assert!(s.effective_len(12).is_err());
    }

    #[test]
    fn max_norm_for_vectors() {
        let s = TimeSeries::from_rows(&[vec![1.0, -3.0], vec![0.5, 0.25]]).unwrap();
        assert_eq!(s.norms(), vec![3.0, 0.5]);
    }

    #[test]
    fn csv_round_trip_with_header() {
        let text = "x,y\n1.5,2\n-0.25,3e2\n";
        let s = TimeSeries::read_csv(text.as_bytes(), true).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.observation(1), &[-0.25, 300.0]);
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        let back = TimeSeries::read_csv(out.as_slice(), false).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn csv_reports_bad_field() {
        let err = TimeSeries::read_csv("1\nabc\n".as_bytes(), false).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
