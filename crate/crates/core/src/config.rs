//! Run configuration documents.
//!
//! ```json
//! {
//!   "model": { "n": 1, "units": {...}, "hamiltonian": [...], "lindblad": [...] },
//!   "run": {
//!     "dt": 1.0, "n_steps": 30, "n_realizations": 1000, "seed": 7,
//!     "mode": "measure-reset", "substeps": 8, "trotter": "exact",
//!     "initial_state": { "basis": "0" },
//!     "observables": [ { "pauli": "Z" }, { "population": "1" } ],
//!     "record_rho": false, "threads": 4
//!   },
//!   "experiment": {
//!     "sweep_dt": { "total_time": 30, "gamma_dt_range": { "min": 1e-8, "max": 1e-4, "points": 12 } },
//!     "sampling_error": { "n_realizations": [100, 1000, 10000], "repetitions": 20, "observable": { "pauli": "Z" } },
//!     "bounds": { "target_eps": 1e-3 }
//!   }
//! }
//! ```
//!
//! Durations in `run` and `experiment` use the model's time unit. When
//! `observables` is omitted every computational-basis population is
//! recorded.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundOverrides;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::model::{parse_matrix, LindbladModel, ModelFile, PauliString};
use crate::noise_gate::DEFAULT_SUBSTEPS;
use crate::propagator::TrotterMode;
use crate::trajectory::{Observable, RunConfig, SimulationMode};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub model: ModelFile,
    pub run: RunSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: SimulationMode,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub trotter: TrotterMode,
    #[serde(default)]
    pub initial_state: Option<StateSpec>,
    #[serde(default)]
    pub observables: Option<Vec<ObservableSpec>>,
    #[serde(default)]
    pub record_rho: bool,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_realizations() -> usize {
    100
}
fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// Bitstring, qubit 0 first.
    #[serde(default)]
    pub basis: Option<String>,
    /// Amplitudes as `[re, im]` pairs.
    #[serde(default)]
    pub vector: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub pauli: Option<String>,
    #[serde(default)]
    pub population: Option<String>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub sweep_dt: Option<SweepSection>,
    #[serde(default)]
    pub sampling_error: Option<SamplingSection>,
    #[serde(default)]
    pub bounds: Option<BoundsSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub total_time: f64,
    #[serde(default)]
    pub gamma_dt: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma_dt_range: Option<RangeSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub n_realizations: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
}

fn default_repetitions() -> usize {
    20
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(default)]
    pub target_eps: Option<f64>,
    #[serde(default)]
    pub overrides: BoundOverrides,
}

/// Sweep over step sizes at fixed total time (SI units).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub total_time: f64,
    pub gamma_dt: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSpec {
    pub n_realizations: Vec<usize>,
    pub repetitions: usize,
    pub observable: Observable,
}

/// A validated document with everything converted to SI units.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub model: LindbladModel,
    pub run: RunConfig,
    pub sweep: Option<SweepSpec>,
    pub sampling: Option<SamplingSpec>,
    pub bounds: BoundsSection,
}

impl Document {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(s);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn resolve(&self) -> Result<Loaded> {
        let model = self.model.to_model("model")?;
        let time = self.model.units.time_scale("model.units")?;
        let run = self.resolve_run(&model, time)?;

        let sweep = match &self.experiment.sweep_dt {
            None => None,
            Some(s) => Some(resolve_sweep(s, time)?),
        };
        let sampling = match &self.experiment.sampling_error {
            None => None,
            Some(s) => {
                let path = "experiment.sampling_error";
                if s.n_realizations.is_empty() || s.n_realizations.contains(&0) {
                    return Err(Error::config(
                        format!("{path}.n_realizations"),
                        "need a non-empty list of positive counts",
                    ));
                }
                if s.repetitions == 0 {
                    return Err(Error::config(format!("{path}.repetitions"), "must be >= 1"));
                }
                let observable = match &s.observable {
                    Some(o) => resolve_observable(o, model.n(), &format!("{path}.observable"))?,
                    None => Observable::pauli(&PauliString::new(vec![crate::model::Pauli::Z; model.n()])?),
                };
                Some(SamplingSpec {
                    n_realizations: s.n_realizations.clone(),
                    repetitions: s.repetitions,
                    observable,
                })
            }
        };
        let bounds = self.experiment.bounds.clone().unwrap_or_default();
        if let Some(t) = bounds.target_eps {
            if !(t > 0.0) {
                return Err(Error::config("experiment.bounds.target_eps", "must be > 0"));
            }
        }
        Ok(Loaded {
            model,
            run,
            sweep,
            sampling,
            bounds,
        })
    }

    fn resolve_run(&self, model: &LindbladModel, time: f64) -> Result<RunConfig> {
        let r = &self.run;
        if !(r.dt > 0.0) || !r.dt.is_finite() {
            return Err(Error::config("run.dt", format!("must be > 0, got {}", r.dt)));
        }
        if r.n_steps == 0 {
            return Err(Error::config("run.n_steps", "must be >= 1"));
        }
        if r.n_realizations == 0 {
            return Err(Error::config("run.n_realizations", "must be >= 1"));
        }
        if r.substeps == 0 {
            return Err(Error::config("run.substeps", "must be >= 1"));
        }
        if r.threads == Some(0) {
            return Err(Error::config("run.threads", "must be >= 1"));
        }
        let n = model.n();
        let mut cfg = RunConfig::new(model, r.dt * time, r.n_steps, r.n_realizations, r.seed);
        cfg.mode = r.mode;
        cfg.substeps = r.substeps;
        cfg.trotter = r.trotter;
        cfg.record_rho = r.record_rho;
        cfg.threads = r.threads;
        if let Some(s) = &r.initial_state {
            cfg.initial_state = resolve_state(s, n, "run.initial_state")?;
        }
        cfg.observables = match &r.observables {
            None => Observable::populations(n),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, o)| resolve_observable(o, n, &format!("run.observables[{i}]")))
                .collect::<Result<_>>()?,
        };
        cfg.validate(model).map_err(|e| Error::config("run", e.to_string()))?;
        Ok(cfg)
    }
}

fn resolve_sweep(s: &SweepSection, time: f64) -> Result<SweepSpec> {
    let path = "experiment.sweep_dt";
    if !(s.total_time > 0.0) {
        return Err(Error::config(format!("{path}.total_time"), "must be > 0"));
    }
    let gamma_dt = match (&s.gamma_dt, &s.gamma_dt_range) {
        (Some(list), None) => list.clone(),
        (None, Some(r)) => {
            if !(r.min > 0.0 && r.max >= r.min) || r.points == 0 {
                return Err(Error::config(
                    format!("{path}.gamma_dt_range"),
                    "need 0 < min <= max and points >= 1",
                ));
            }
            log_space(r.min, r.max, r.points)
        }
        _ => {
            return Err(Error::config(
                path,
                "give exactly one of `gamma_dt` or `gamma_dt_range`",
            ))
        }
    };
    if gamma_dt.is_empty() || gamma_dt.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::config(format!("{path}.gamma_dt"), "values must be positive"));
    }
    Ok(SweepSpec {
        total_time: s.total_time * time,
        gamma_dt,
    })
}

/// `points` values spaced evenly in log between `min` and `max`.
pub fn log_space(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn resolve_state(s: &StateSpec, n: usize, path: &str) -> Result<Vec<C64>> {
    let d = 1usize << n;
    match (&s.basis, &s.vector) {
        (Some(bits), None) => {
            let index = parse_bits(bits, n).map_err(|m| Error::config(format!("{path}.basis"), m))?;
            let mut v = vec![ZERO; d];
            v[index] = ONE;
            Ok(v)
        }
        (None, Some(v)) => {
            if v.len() != d {
                return Err(Error::config(
                    format!("{path}.vector"),
                    format!("expected {d} amplitudes, got {}", v.len()),
                ));
            }
            let v: Vec<C64> = v.iter().map(|&[re, im]| C64::new(re, im)).collect();
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::config(format!("{path}.vector"), "zero or non-finite norm"));
            }
            Ok(v)
        }
        _ => Err(Error::config(path, "give exactly one of `basis` or `vector`")),
    }
}

fn parse_bits(bits: &str, n: usize) -> std::result::Result<usize, String> {
    if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(format!("expected a {n}-character bitstring, got {bits:?}"));
    }
    Ok(usize::from_str_radix(bits, 2).expect("validated bitstring"))
}

fn resolve_observable(o: &ObservableSpec, n: usize, path: &str) -> Result<Observable> {
    let given = [o.pauli.is_some(), o.population.is_some(), o.matrix.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(Error::config(
            path,
            "give exactly one of `pauli`, `population` or `matrix`",
        ));
    }
    let mut obs = if let Some(p) = &o.pauli {
        let ps: PauliString = p
            .parse()
            .map_err(|e: Error| Error::config(format!("{path}.pauli"), e.to_string()))?;
        if ps.n() != n {
            return Err(Error::config(format!("{path}.pauli"), format!("expected {n} letters")));
        }
        Observable::pauli(&ps)
    } else if let Some(bits) = &o.population {
        let index = parse_bits(bits, n).map_err(|m| Error::config(format!("{path}.population"), m))?;
        Observable::population(n, index)
    } else {
        let rows = o.matrix.as_ref().expect("checked above");
        let m: ComplexMatrix = parse_matrix(rows, &format!("{path}.matrix"))?;
        let d = 1usize << n;
        if m.rows() != d || m.cols() != d {
            return Err(Error::config(format!("{path}.matrix"), format!("expected {d}x{d}")));
        }
        Observable::new("matrix", m).map_err(|e| Error::config(format!("{path}.matrix"), e.to_string()))?
    };
    if let Some(l) = &o.label {
        obs.label = l.clone();
    }
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "model": {"n": 2, "hamiltonian": [{"pauli": "ZI", "coeff": 1.0}], "lindblad": [{"pauli": "IZ", "rate": 0.1}]},
        "run": {"dt": 0.05, "n_steps": 4, "initial_state": {"basis": "10"}},
        "experiment": {"sweep_dt": {"total_time": 1.0, "gamma_dt_range": {"min": 1e-3, "max": 1e-1, "points": 3}}}
    }"#;

    #[test]
    fn defaults_and_resolution() {
        let l = Document::from_json_str(DOC).unwrap().resolve().unwrap();
        assert_eq!(l.run.initial_state[2], ONE);
        assert_eq!(l.run.observables.len(), 4);
        assert_eq!(l.run.observables[2].label, "P10");
        assert_eq!(l.run.substeps, DEFAULT_SUBSTEPS);
        assert_eq!(l.run.n_realizations, 100);
        let s = l.sweep.unwrap();
        assert_eq!(s.gamma_dt.len(), 3);
        assert!((s.gamma_dt[1] - 1e-2).abs() < 1e-15);
        assert!(l.sampling.is_none());
    }

    fn err_path(json: &str) -> String {
        match Document::from_json_str(json).and_then(|d| d.resolve()) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn field_paths() {
        let m = r#""model": {"n": 1}"#;
        assert_eq!(
            err_path(&format!(r#"{{{m}, "run": {{"dt": -1, "n_steps": 3}}}}"#)),
            "run.dt"
        );
        assert_eq!(
            err_path(&format!(r#"{{{m}, "run": {{"dt": 1, "n_steps": 3, "mode": "x"}}}}"#)),
            "run.mode"
        );
        assert_eq!(
            err_path(&format!(
                r#"{{{m}, "run": {{"dt": 1, "n_steps": 3, "initial_state": {{"basis": "11"}}}}}}"#
            )),
            "run.initial_state.basis"
        );
        assert_eq!(
            err_path(&format!(
                r#"{{{m}, "run": {{"dt": 1, "n_steps": 3, "observables": [{{"pauli": "Z"}}, {{"pauli": "ZZ"}}]}}}}"#
            )),
            "run.observables[1].pauli"
        );
        assert_eq!(
            err_path(&format!(
                r#"{{{m}, "run": {{"dt": 1, "n_steps": 3}}, "experiment": {{"sampling_error": {{"n_realizations": []}}}}}}"#
            )),
            "experiment.sampling_error.n_realizations"
        );
        assert_eq!(err_path(r#"{"run": {"dt": 1, "n_steps": 3}}"#), ".");
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-4, 1e-1, 12);
        assert_eq!(v.len(), 12);
        assert!((v[0] - 1e-4).abs() < 1e-18);
        assert!((v[11] - 1e-1).abs() < 1e-15);
    }
}
