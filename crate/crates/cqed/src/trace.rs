//! Sampled measurement traces and their CSV schema.
//!
//! CSV input carries a header whose abscissa column name declares the unit
//! and the trace kind: `wavelength_nm` (spectrum), `detuning_GHz` (scan) or
//! `time_ns` (histogram), plus a `counts` column and an optional `weight`
//! column.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Spectrum,
    Scan,
    Histogram,
}

impl TraceKind {
    pub fn abscissa_header(&self) -> &'static str {
        match self {
            TraceKind::Spectrum => "wavelength_nm",
            TraceKind::Scan => "detuning_GHz",
            TraceKind::Histogram => "time_ns",
        }
    }

    fn from_header(h: &str) -> Option<TraceKind> {
        match h {
            "wavelength_nm" => Some(TraceKind::Spectrum),
            "detuning_GHz" => Some(TraceKind::Scan),
            "time_ns" => Some(TraceKind::Histogram),
            _ => None,
        }
    }
}

/// An ordered series of (abscissa, counts, optional weight) points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledTrace {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub w: Option<Vec<f64>>,
    pub kind: TraceKind,
}

impl SampledTrace {
    pub fn new(x: Vec<f64>, y: Vec<f64>, w: Option<Vec<f64>>, kind: TraceKind) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Data(format!(
                "abscissa length {} != counts length {}",
                x.len(),
                y.len()
            )));
        }
        if let Some(w) = &w {
            if w.len() != x.len() {
                return Err(Error::Data("weight length mismatch".into()));
            }
        }
        for pair in x.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Data(format!(
                    "abscissa not strictly increasing at x = {}",
                    pair[1]
                )));
            }
        }
        if let Some(bad) = y.iter().find(|v| **v < 0.0 || !v.is_finite()) {
            return Err(Error::Data(format!("counts must be finite and >= 0, got {bad}")));
        }
        Ok(SampledTrace { x, y, w, kind })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Poisson weights 1/max(y, 1); used when a fit requests weighting.
    pub fn poisson_weights(&self) -> Vec<f64> {
        self.y.iter().map(|&y| 1.0 / y.max(1.0)).collect()
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut x_col = None;
        let mut y_col = None;
        let mut w_col = None;
        let mut kind = None;
        for (i, h) in headers.iter().enumerate() {
            if let Some(k) = TraceKind::from_header(h) {
                x_col = Some(i);
                kind = Some(k);
            } else if h == "counts" {
                y_col = Some(i);
            } else if h == "weight" {
                w_col = Some(i);
            }
        }
        let (x_col, kind) = x_col.zip(kind).ok_or_else(|| {
            Error::Data("missing abscissa header: expected wavelength_nm, detuning_GHz or time_ns".into())
        })?;
        let y_col = y_col.ok_or_else(|| Error::Data("missing `counts` header".into()))?;

        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut w = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let row = line + 2; // 1-based, after header
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| Error::Data(format!("line {row}: missing field {i}")))?
                    .parse::<f64>()
                    .map_err(|e| Error::Data(format!("line {row}: {e}")))
            };
            let xv = parse(x_col)?;
            if let Some(prev) = x.last() {
                if xv <= *prev {
                    return Err(Error::Data(format!(
                        "line {row}: abscissa {xv} not greater than previous {prev}"
                    )));
                }
            }
            x.push(xv);
            y.push(parse(y_col)?);
            if let Some(wc) = w_col {
                w.push(parse(wc)?);
            }
        }
        SampledTrace::new(x, y, if w_col.is_some() { Some(w) } else { None }, kind)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(self.kind.abscissa_header());
        out.push_str(",counts");
        if self.w.is_some() {
            out.push_str(",weight");
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!("{:.8e},{:.8e}", self.x[i], self.y[i]));
            if let Some(w) = &self.w {
                out.push_str(&format!(",{:.8e}", w[i]));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spectrum_csv() {
        let csv = "wavelength_nm,counts\n619.0,10\n619.1,20\n619.2,15\n";
        let t = SampledTrace::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(t.kind, TraceKind::Spectrum);
        assert_eq!(t.len(), 3);
        assert_eq!(t.y[1], 20.0);
    }

    #[test]
    fn rejects_descending_abscissa_with_line_number() {
        let csv = "wavelength_nm,counts\n619.2,10\n619.1,20\n";
        let err = SampledTrace::from_csv_reader(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_missing_header() {
        let csv = "x,counts\n1,2\n";
        assert!(matches!(
            SampledTrace::from_csv_reader(csv.as_bytes()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn csv_roundtrip_is_stable() {
        let csv = "time_ns,counts,weight\n0.0,100,1\n0.5,50,1\n1.0,25,1\n";
        let t = SampledTrace::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(t.kind, TraceKind::Histogram);
        let s1 = t.to_csv_string();
        let t2 = SampledTrace::from_csv_reader(s1.as_bytes()).unwrap();
        assert_eq!(s1, t2.to_csv_string());
    }
}
