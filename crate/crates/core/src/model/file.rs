//! JSON model schema.
//!
//! ```json
//! {
//!   "n": 1,
//!   "units": { "time": "us", "rate": "1/us", "frequency": "rad/us" },
//!   "hamiltonian": [ { "pauli": "X", "coeff": 0.2618, "label": "drive" } ],
//!   "lindblad": [
//!     { "pauli": "Z", "rate": 1e-4 },
//!     { "matrix": [[[0,0],[0,0]], [[1,0],[0,0]]], "rate": 1e-4, "label": "s+" }
//!   ]
//! }
//! ```
//!
//! Each term names its operator with exactly one of `pauli` (qubit 0 first)
//! or `matrix` (rows of `[re, im]` pairs). Coefficients are angular
//! frequencies, rates are inverse times; both are converted to SI using
//! `units` (defaults: `s`, `1/s`, `rad/s`).

use serde::{Deserialize, Serialize};

use super::{HamiltonianTerm, LindbladModel, LindbladTerm, PauliString};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Units {
    #[serde(default = "default_time")]
    pub time: String,
    #[serde(default = "default_rate")]
    pub rate: String,
    #[serde(default = "default_frequency")]
    pub frequency: String,
}

fn default_time() -> String {
    "s".into()
}
fn default_rate() -> String {
    "1/s".into()
}
fn default_frequency() -> String {
    "rad/s".into()
}

impl Default for Units {
    fn default() -> Self {
        Self {
            time: default_time(),
            rate: default_rate(),
            frequency: default_frequency(),
        }
    }
}

fn seconds_per(unit: &str) -> Option<f64> {
    match unit {
        "s" => Some(1.0),
        "ms" => Some(1e-3),
        "us" | "μs" | "µs" => Some(1e-6),
        "ns" => Some(1e-9),
        _ => None,
    }
}

impl Units {
    /// Seconds per configured time unit.
    pub fn time_scale(&self, path: &str) -> Result<f64> {
        seconds_per(&self.time)
            .ok_or_else(|| Error::config(format!("{path}.time"), format!("unknown time unit {:?}", self.time)))
    }

    /// Multiplier taking a configured rate to 1/s.
    pub fn rate_scale(&self, path: &str) -> Result<f64> {
        self.rate
            .strip_prefix("1/")
            .and_then(seconds_per)
            .map(|s| 1.0 / s)
            .ok_or_else(|| Error::config(format!("{path}.rate"), format!("unknown rate unit {:?}", self.rate)))
    }

    /// Multiplier taking a configured angular frequency to rad/s.
    pub fn frequency_scale(&self, path: &str) -> Result<f64> {
        self.frequency
            .strip_prefix("rad/")
            .and_then(seconds_per)
            .map(|s| 1.0 / s)
            .ok_or_else(|| {
                Error::config(
                    format!("{path}.frequency"),
                    format!("unknown frequency unit {:?}", self.frequency),
                )
            })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub hamiltonian: Vec<TermSpec>,
    #[serde(default)]
    pub lindblad: Vec<TermSpec>,
}

impl ModelFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(s);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    /// Builds the model, reporting problems under `prefix` (e.g. `model`).
    pub fn to_model(&self, prefix: &str) -> Result<LindbladModel> {
        let n = self.n;
        if n == 0 || n > 10 {
            return Err(Error::config(
                format!("{prefix}.n"),
                format!("qubit count must be in 1..=10, got {n}"),
            ));
        }
        let units_path = format!("{prefix}.units");
        self.units.time_scale(&units_path)?;
        let freq = self.units.frequency_scale(&units_path)?;
        let rate_scale = self.units.rate_scale(&units_path)?;

        let mut hamiltonian = Vec::with_capacity(self.hamiltonian.len());
        for (i, t) in self.hamiltonian.iter().enumerate() {
            let path = format!("{prefix}.hamiltonian[{i}]");
            if t.rate.is_some() {
                return Err(Error::config(
                    format!("{path}.rate"),
                    "Hamiltonian terms take `coeff`, not `rate`",
                ));
            }
            let coeff = t
                .coeff
                .ok_or_else(|| Error::config(format!("{path}.coeff"), "missing field `coeff`"))?;
            let (op, default_label) = operator(n, t, &path)?;
            let label = t.label.clone().unwrap_or(default_label);
            let term = HamiltonianTerm::new(n, coeff * freq, op, label)
                .map_err(|e| Error::config(path.clone(), e.to_string()))?;
            hamiltonian.push(term);
        }

        let mut lindblad = Vec::with_capacity(self.lindblad.len());
        for (i, t) in self.lindblad.iter().enumerate() {
            let path = format!("{prefix}.lindblad[{i}]");
            if t.coeff.is_some() {
                return Err(Error::config(
                    format!("{path}.coeff"),
                    "Lindblad terms take `rate`, not `coeff`",
                ));
            }
            let rate = t
                .rate
                .ok_or_else(|| Error::config(format!("{path}.rate"), "missing field `rate`"))?;
            if !(rate >= 0.0) {
                return Err(Error::config(
                    format!("{path}.rate"),
                    format!("rate must be >= 0, got {rate}"),
                ));
            }
            let (op, default_label) = operator(n, t, &path)?;
            let label = t.label.clone().unwrap_or(default_label);
            let term = LindbladTerm::new(n, rate * rate_scale, op, label)
                .map_err(|e| Error::config(path.clone(), e.to_string()))?;
            lindblad.push(term);
        }

        LindbladModel::new(n, hamiltonian, lindblad).map_err(|e| Error::config(prefix, e.to_string()))
    }
}

fn operator(n: usize, t: &TermSpec, path: &str) -> Result<(ComplexMatrix, String)> {
    match (&t.pauli, &t.matrix) {
        (Some(p), None) => {
            let ps: PauliString = p
                .parse()
                .map_err(|e: Error| Error::config(format!("{path}.pauli"), e.to_string()))?;
            if ps.n() != n {
                return Err(Error::config(
                    format!("{path}.pauli"),
                    format!("string {p:?} has length {}, expected {n}", ps.n()),
                ));
            }
            Ok((ps.matrix(), ps.to_string()))
        }
        (None, Some(rows)) => {
            let m = parse_matrix(rows, &format!("{path}.matrix"))?;
            let d = 1usize << n;
            if m.rows() != d || m.cols() != d {
                return Err(Error::config(
                    format!("{path}.matrix"),
                    format!("matrix is {}x{}, expected {d}x{d}", m.rows(), m.cols()),
                ));
            }
            Ok((m, format!("matrix{d}x{d}")))
        }
        (Some(_), Some(_)) => Err(Error::config(path, "give exactly one of `pauli` or `matrix`, not both")),
        (None, None) => Err(Error::config(path, "missing operator: give `pauli` or `matrix`")),
    }
}

/// Rows of `[re, im]` pairs into a matrix; rows must have equal length.
pub fn parse_matrix(rows: &[Vec<[f64; 2]>], path: &str) -> Result<ComplexMatrix> {
    let data: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    if let Some((i, _)) = data.iter().enumerate().find(|(_, r)| r.len() != data[0].len()) {
        return Err(Error::config(format!("{path}[{i}]"), "ragged matrix row"));
    }
    if data.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::config(path, "non-finite matrix entry"));
    }
    ComplexMatrix::from_rows(&data).map_err(|e| Error::config(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPIN: &str = r#"{
        "n": 1,
        "units": {"time": "us", "rate": "1/us", "frequency": "rad/us"},
        "hamiltonian": [{"pauli": "X", "coeff": 0.5}],
        "lindblad": [
            {"matrix": [[[0,0],[0,0]],[[1,0],[0,0]]], "rate": 1e-4, "label": "s+"},
            {"pauli": "Z", "rate": 2e-4}
        ]
    }"#;

    #[test]
    fn parses_and_scales_units() {
        let m = ModelFile::from_json_str(SPIN).unwrap().to_model("model").unwrap();
        assert_eq!(m.hamiltonian_terms()[0].coefficient, 0.5e6);
        assert!((m.lindblad_terms()[0].rate - 100.0).abs() < 1e-9);
        assert_eq!(m.lindblad_terms()[0].label, "s+");
        assert_eq!(m.lindblad_terms()[1].label, "Z");
    }

    fn err_path(json: &str) -> String {
        let r = ModelFile::from_json_str(json).and_then(|f| f.to_model("model"));
        match r {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_cite_field_paths() {
        assert_eq!(
            err_path(r#"{"n": 1, "hamiltonian": [{"pauli": "X", "coeff": "a"}]}"#),
            "hamiltonian[0].coeff"
        );
        assert_eq!(
            err_path(r#"{"n": 1, "lindblad": [{"pauli": "Z"}]}"#),
            "model.lindblad[0].rate"
        );
        assert_eq!(
            err_path(r#"{"n": 2, "lindblad": [{"pauli": "Z", "rate": 1}]}"#),
            "model.lindblad[0].pauli"
        );
        assert_eq!(
            err_path(r#"{"n": 1, "lindblad": [{"pauli": "Z", "rate": -1}]}"#),
            "model.lindblad[0].rate"
        );
        assert_eq!(
            err_path(r#"{"n": 1, "hamiltonian": [{"matrix": [[[0,0],[1,0]],[[0,0],[0,0]]], "coeff": 1}]}"#),
            "model.hamiltonian[0]"
        );
        assert_eq!(
            err_path(r#"{"n": 1, "units": {"time": "fortnight"}}"#),
            "model.units.time"
        );
        assert_eq!(err_path(r#"{"n": 1, "bogus": 3}"#), "bogus");
    }
}
