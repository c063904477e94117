//! JSON documents written and read by the CLI.
//!
//! Floats go through `serde_json`, which prints the shortest decimal that
//! round-trips.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizer::Factorization;
use crate::matrix::Matrix;
use crate::poly::Polynomial;
use crate::truepair::TraceEvent;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearDoc {
    pub root: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDoc {
    pub alpha: f64,
    pub beta: f64,
}

/// Result of one factorization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    /// Input coefficients, ascending.
    pub input: Vec<f64>,
    pub method: String,
    pub constant: f64,
    pub linear: Vec<LinearDoc>,
    pub quadratic: Vec<QuadraticDoc>,
    pub residual: f64,
    pub timing_ms: f64,
    /// Path of the trace file, if one was written.
    pub trace: Option<String>,
}

impl OutputDoc {
    pub fn new(input: &Polynomial, method: &str, f: &Factorization, timing_ms: f64) -> Self {
        OutputDoc {
            input: input.coeffs().to_vec(),
            method: method.to_string(),
            constant: f.constant,
            linear: f
                .linear_roots
                .iter()
                .map(|&root| LinearDoc { root })
                .collect(),
            quadratic: f
                .quad_pairs
                .iter()
                .map(|&(alpha, beta)| QuadraticDoc { alpha, beta })
                .collect(),
            residual: f.residual,
            timing_ms,
            trace: None,
        }
    }

    pub fn factorization(&self) -> Factorization {
        FactorsDoc {
            constant: self.constant,
            linear: self.linear.clone(),
            quadratic: self.quadratic.clone(),
        }
        .factorization()
    }
}

/// The factor part of an [`OutputDoc`]; other keys are ignored when reading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorsDoc {
    pub constant: f64,
    #[serde(default)]
    pub linear: Vec<LinearDoc>,
    #[serde(default)]
    pub quadratic: Vec<QuadraticDoc>,
}

impl FactorsDoc {
    pub fn factorization(&self) -> Factorization {
        Factorization {
            constant: self.constant,
            linear_roots: self.linear.iter().map(|l| l.root).collect(),
            quad_pairs: self.quadratic.iter().map(|q| (q.alpha, q.beta)).collect(),
            residual: f64::NAN,
        }
    }
}

/// Ordered trace events of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub events: Vec<TraceEvent>,
}

/// `{"coeffs": [a0, ..., an]}`, ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffFile {
    pub coeffs: Vec<f64>,
}

/// `{"matrix": [[row], ...]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub matrix: Vec<Vec<f64>>,
}

/// Contents of a file given where a polynomial or matrix is expected.
#[derive(Clone, Debug, PartialEq)]
pub enum InputFile {
    Coeffs(Polynomial),
    Matrix(Matrix),
}

pub fn read_input_file(path: &Path) -> Result<InputFile> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("coeffs").is_some() {
        let c: CoeffFile = serde_json::from_value(value)?;
        return Ok(InputFile::Coeffs(Polynomial::new(c.coeffs)));
    }
    let m: MatrixFile = serde_json::from_value(value)?;
    let n = m.matrix.len();
    if n == 0 || m.matrix.iter().any(|r| r.len() != n) {
        return Err(Error::contract(
            "matrix file must hold a nonempty square matrix",
        ));
    }
    Ok(InputFile::Matrix(Matrix::from_rows(&m.matrix)))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OutputDoc {
        let f = Factorization {
            constant: 1.0,
            linear_roots: vec![0.1],
            quad_pairs: vec![(0.0, 1.0), (1.0 / 3.0, 2.0)],
            residual: 1.2345678901234567e-17,
        };
        OutputDoc::new(&Polynomial::new(vec![1.0, 0.0, 1.0]), "paper", &f, 0.5)
    }

    #[test]
    fn keys_are_exact() {
        let v = serde_json::to_value(sample()).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        let mut expected = vec![
            "input",
            "method",
            "constant",
            "linear",
            "quadratic",
            "residual",
            "timing_ms",
            "trace",
        ];
        expected.sort();
        assert_eq!(keys, expected);
        assert!(v["trace"].is_null());
        assert_eq!(
            v["quadratic"][0],
            serde_json::json!({"alpha": 0.0, "beta": 1.0})
        );
    }

    #[test]
    fn round_trip_is_lossless() {
        let d = sample();
        let s = to_json(&d).unwrap();
        let back: OutputDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.quadratic[1].alpha.to_bits(), (1.0f64 / 3.0).to_bits());
    }

    #[test]
    fn factors_doc_reads_output_doc() {
        let s = to_json(&sample()).unwrap();
        let f: FactorsDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(f.factorization().quad_pairs.len(), 2);
    }

    #[test]
    fn input_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.json");
        std::fs::write(&p, r#"{"coeffs": [1, 0, 1]}"#).unwrap();
        assert_eq!(
            read_input_file(&p).unwrap(),
            InputFile::Coeffs(Polynomial::new(vec![1.0, 0.0, 1.0]))
        );
        let m = dir.path().join("m.json");
        std::fs::write(&m, r#"{"matrix": [[0, -1], [1, 0]]}"#).unwrap();
        assert!(matches!(read_input_file(&m).unwrap(), InputFile::Matrix(_)));
        std::fs::write(&m, r#"{"matrix": [[0, -1]]}"#).unwrap();
        assert!(read_input_file(&m).is_err());
    }
}
