//! Repeated noisy gates with ancilla reset, averaged over many stochastic
//! realizations.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expectation, ComplexMatrix, DensityMatrix, C64, ZERO};
use crate::model::{LindbladModel, PauliString};
use crate::noise_gate::{NoiseGatePlan, DEFAULT_SUBSTEPS};
use crate::propagator::TrotterMode;
use crate::rng::trajectory_rngs;

/// Trajectories per work item. Fixed so the reduction order never depends on
/// the thread count.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    /// Statevector on system + ancilla; the ancilla is measured and flipped
    /// back to |0> after every step.
    #[default]
    MeasureReset,
    /// Density matrix on system + ancilla; the ancilla is traced out and
    /// re-prepared in |0> after every step.
    PartialTrace,
}

impl FromStr for SimulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measure-reset" => Ok(SimulationMode::MeasureReset),
            "partial-trace" => Ok(SimulationMode::PartialTrace),
            _ => Err(Error::InvalidArgument(format!(
                "unknown mode {s:?} (expected measure-reset or partial-trace)"
            ))),
        }
    }
}

impl fmt::Display for SimulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimulationMode::MeasureReset => "measure-reset",
            SimulationMode::PartialTrace => "partial-trace",
        })
    }
}

/// A labelled Hermitian operator on the system.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub label: String,
    pub matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(label: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        let label = label.into();
        if !matrix.is_hermitian(1e-12) {
            return Err(Error::InvalidArgument(format!("observable {label} is not Hermitian")));
        }
        Ok(Self { label, matrix })
    }

    pub fn pauli(p: &PauliString) -> Self {
        Self {
            label: p.to_string(),
            matrix: p.matrix(),
        }
    }

    /// Projector on basis state `index` of `n` qubits, labelled `P<bits>`.
    pub fn population(n: usize, index: usize) -> Self {
        let d = 1 << n;
        let mut m = ComplexMatrix::zeros(d, d);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self {
            label: format!("P{index:0n$b}"),
            matrix: m,
        }
    }

    pub fn populations(n: usize) -> Vec<Self> {
        (0..1 << n).map(|i| Self::population(n, i)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub mode: SimulationMode,
    pub substeps: usize,
    pub trotter: TrotterMode,
    pub observables: Vec<Observable>,
    pub record_rho: bool,
    /// Pure initial system state; normalized on use.
    pub initial_state: Vec<C64>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Defaults: `M = 8`, exact propagator, measure-reset, no observables,
    /// initial state |0...0>.
    pub fn new(model: &LindbladModel, dt: f64, n_steps: usize, n_realizations: usize, master_seed: u64) -> Self {
        let mut initial_state = vec![ZERO; model.dim()];
        initial_state[0] = C64::new(1.0, 0.0);
        Self {
            dt,
            n_steps,
            n_realizations,
            master_seed,
            mode: SimulationMode::default(),
            substeps: DEFAULT_SUBSTEPS,
            trotter: TrotterMode::default(),
            observables: Vec::new(),
            record_rho: false,
            initial_state,
            threads: None,
        }
    }

    pub fn validate(&self, model: &LindbladModel) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidArgument("n_steps must be >= 1".into()));
        }
        if self.n_realizations == 0 {
            return Err(Error::InvalidArgument("n_realizations must be >= 1".into()));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidArgument("substeps must be >= 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("threads must be >= 1".into()));
        }
        let d = model.dim();
        if self.initial_state.len() != d {
            return Err(Error::DimensionMismatch {
                op: "initial_state",
                expected: d,
                found: self.initial_state.len(),
            });
        }
        let norm: f64 = self.initial_state.iter().map(|z| z.norm_sqr()).sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "initial state has zero or non-finite norm".into(),
            ));
        }
        for o in &self.observables {
            if o.matrix.rows() != d || o.matrix.cols() != d {
                return Err(Error::DimensionMismatch {
                    op: "observable",
                    expected: d,
                    found: o.matrix.rows(),
                });
            }
        }
        Ok(())
    }

    fn normalized_initial(&self) -> Vec<C64> {
        let norm = self.initial_state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        self.initial_state.iter().map(|z| z / norm).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|j| j as f64 * self.dt).collect()
    }
}

/// Result of measuring the ancilla and flipping it back to |0>.
#[derive(Debug, Clone)]
pub struct ResetOutcome {
    /// Normalized state on system + ancilla with the ancilla in |0>.
    pub state: Vec<C64>,
    pub outcome: u8,
    /// Born probability of the observed outcome.
    pub probability: f64,
}

/// Measures the last qubit of `state` and maps the post-measurement state to
/// ancilla |0>.
pub fn reset_ancilla_measure<R: Rng + ?Sized>(state: &[C64], rng: &mut R) -> Result<ResetOutcome> {
    if state.len() < 2 || !state.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "state length {} is not system x ancilla",
            state.len()
        )));
    }
    let (sys, outcome, probability) = measure_split(state, rng.random::<f64>())?;
    let mut full = vec![ZERO; state.len()];
    for (i, z) in sys.into_iter().enumerate() {
        full[2 * i] = z;
    }
    Ok(ResetOutcome {
        state: full,
        outcome,
        probability,
    })
}

// Returns the normalized system branch for the sampled outcome.
fn measure_split(state: &[C64], u: f64) -> Result<(Vec<C64>, u8, f64)> {
    let p0: f64 = state.iter().step_by(2).map(|z| z.norm_sqr()).sum();
    let p1: f64 = state.iter().skip(1).step_by(2).map(|z| z.norm_sqr()).sum();
    let total = p0 + p1;
    let outcome = if u * total < p0 { 0u8 } else { 1u8 };
    let p = if outcome == 0 { p0 } else { p1 };
    if !(p > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateState {
            outcome,
            probability: p / total,
        });
    }
    let scale = 1.0 / p.sqrt();
    let sys = state
        .iter()
        .skip(outcome as usize)
        .step_by(2)
        .map(|z| z * scale)
        .collect();
    Ok((sys, outcome, p / total))
}

/// `N (psi ⊗ |0>)`, touching only the even columns of `N`.
fn apply_to_ground(n: &ComplexMatrix, psi: &[C64]) -> Vec<C64> {
    let cols = n.cols();
    let data = n.as_slice();
    (0..n.rows())
        .map(|a| {
            let row = &data[a * cols..(a + 1) * cols];
            psi.iter().enumerate().map(|(j, p)| row[2 * j] * p).sum()
        })
        .collect()
}

/// `Tr_E[N (rho ⊗ |0><0|) N†]`.
fn channel_on_ground(n: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.rows();
    let full = 2 * d;
    // N0 = N restricted to ancilla-|0> columns: (2d) x d.
    let mut n0 = ComplexMatrix::zeros(full, d);
    for a in 0..full {
        for j in 0..d {
            n0[(a, j)] = n[(a, 2 * j)];
        }
    }
    let x = n0.matmul(rho).matmul(&n0.adjoint());
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = x[(2 * i, 2 * j)] + x[(2 * i + 1, 2 * j + 1)];
        }
    }
    out
}

enum State {
    Pure(Vec<C64>),
    Mixed(ComplexMatrix),
}

impl State {
    fn rho(&self) -> ComplexMatrix {
        match self {
            State::Pure(psi) => ComplexMatrix::outer(psi, psi),
            State::Mixed(r) => r.clone(),
        }
    }

    fn expect(&self, op: &ComplexMatrix) -> f64 {
        match self {
            State::Pure(psi) => {
                let opsi = op.matvec(psi);
                psi.iter().zip(&opsi).map(|(a, b)| a.conj() * b).sum::<C64>().re
            }
            State::Mixed(r) => expectation(r, op),
        }
    }
}

// Drives one trajectory, handing the system state at every step to `visit`.
fn walk(plan: &NoiseGatePlan, config: &RunConfig, index: u64, mut visit: impl FnMut(usize, &State)) -> Result<()> {
    let (mut noise, mut measure) = trajectory_rngs(config.master_seed, index);
    let psi0 = config.normalized_initial();
    let mut state = match config.mode {
        SimulationMode::MeasureReset => State::Pure(psi0),
        SimulationMode::PartialTrace => State::Mixed(ComplexMatrix::outer(&psi0, &psi0)),
    };
    visit(0, &state);
    for step in 1..=config.n_steps {
        let gate = plan.sample_gate(&mut noise)?.matrix;
        state = match state {
            State::Pure(psi) => {
                let out = apply_to_ground(&gate, &psi);
                let (sys, _, _) = measure_split(&out, measure.random::<f64>())?;
                State::Pure(sys)
            }
            State::Mixed(rho) => State::Mixed(channel_on_ground(&gate, &rho)),
        };
        visit(step, &state);
    }
    Ok(())
}

/// System density matrices at steps `0..=n_steps` of realization `index`.
/// Rank one in measure-reset mode.
pub fn run_trajectory(model: &LindbladModel, config: &RunConfig, index: u64) -> Result<Vec<ComplexMatrix>> {
    config.validate(model)?;
    let plan = NoiseGatePlan::build(model, config.dt, config.trotter, config.substeps)?;
    run_trajectory_with_plan(&plan, config, index)
}

pub fn run_trajectory_with_plan(plan: &NoiseGatePlan, config: &RunConfig, index: u64) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::with_capacity(config.n_steps + 1);
    walk(plan, config, index, |_, s| out.push(s.rho()))?;
    Ok(out)
}

/// Streaming mean and squared deviation (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        if self.count == 0.0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count / n;
        self.m2 += other.m2 + delta * delta * self.count * other.count / n;
        self.count = n;
    }

    /// Sample standard deviation over `sqrt(count)`; zero for one sample.
    fn stderr(&self) -> f64 {
        if self.count < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.count - 1.0)).max(0.0).sqrt() / self.count.sqrt()
    }
}

struct Accumulator {
    /// `[observable][step]`.
    obs: Vec<Vec<Moments>>,
    /// `[step][entry]` for real and imaginary parts.
    rho_re: Vec<Vec<Moments>>,
    rho_im: Vec<Vec<Moments>>,
}

impl Accumulator {
    fn new(config: &RunConfig, dim: usize) -> Self {
        let steps = config.n_steps + 1;
        let rho = |on: bool| {
            if on {
                vec![vec![Moments::default(); dim * dim]; steps]
            } else {
                Vec::new()
            }
        };
        Self {
            obs: vec![vec![Moments::default(); steps]; config.observables.len()],
            rho_re: rho(config.record_rho),
            rho_im: rho(config.record_rho),
        }
    }

    fn visit(&mut self, config: &RunConfig, step: usize, state: &State) {
        for (o, acc) in config.observables.iter().zip(&mut self.obs) {
            acc[step].push(state.expect(&o.matrix));
        }
        if config.record_rho {
            let rho = state.rho();
            for (k, z) in rho.as_slice().iter().enumerate() {
                self.rho_re[step][k].push(z.re);
                self.rho_im[step][k].push(z.im);
            }
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        let pairs = [
            (&mut self.obs, &other.obs),
            (&mut self.rho_re, &other.rho_re),
            (&mut self.rho_im, &other.rho_im),
        ];
        for (mine, theirs) in pairs {
            for (a, b) in mine.iter_mut().zip(theirs) {
                for (x, y) in a.iter_mut().zip(b) {
                    x.merge(y);
                }
            }
        }
    }
}

/// Per-step statistics of one observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub label: String,
    pub matrix: ComplexMatrix,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub observables: Vec<ObservableSeries>,
    /// Averaged system state per step, when recorded.
    pub rho_mean: Option<Vec<ComplexMatrix>>,
    /// Entry-wise standard errors of `rho_mean` (real and imaginary parts
    /// separately), when recorded.
    pub rho_stderr: Option<Vec<ComplexMatrix>>,
    pub master_seed: u64,
    pub n_realizations: usize,
    pub mode: SimulationMode,
    pub trotter: TrotterMode,
    pub substeps: usize,
    pub dt: f64,
}

impl EnsembleResult {
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn observable(&self, label: &str) -> Option<&ObservableSeries> {
        self.observables.iter().find(|o| o.label == label)
    }

    /// Averaged state at `step` as a validated density matrix.
    pub fn density(&self, step: usize) -> Result<DensityMatrix> {
        let rho = self
            .rho_mean
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("density matrices were not recorded".into()))?
            .get(step)
            .ok_or_else(|| Error::InvalidArgument(format!("step {step} out of range")))?;
        DensityMatrix::new(rho.clone())
    }
}

/// Runs `n_realizations` trajectories and averages them. Output is
/// bit-identical for a given seed regardless of thread count.
pub fn run_ensemble(model: &LindbladModel, config: &RunConfig) -> Result<EnsembleResult> {
    config.validate(model)?;
    let plan = NoiseGatePlan::build(model, config.dt, config.trotter, config.substeps)?;
    run_ensemble_with_plan(&plan, config)
}

pub fn run_ensemble_with_plan(plan: &NoiseGatePlan, config: &RunConfig) -> Result<EnsembleResult> {
    let dim = plan.system_dim();
    let n = config.n_realizations;
    let chunks = n.div_ceil(CHUNK);
    let work = |c: usize| -> Result<Accumulator> {
        let mut acc = Accumulator::new(config, dim);
        for index in c * CHUNK..((c + 1) * CHUNK).min(n) {
            walk(plan, config, index as u64, |step, s| acc.visit(config, step, s))?;
        }
        Ok(acc)
    };
    let partials: Vec<Result<Accumulator>> = match config.threads {
        Some(1) => (0..chunks).map(work).collect(),
        threads => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                builder = builder.num_threads(t);
            }
            let pool = builder
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| (0..chunks).into_par_iter().map(work).collect())
        }
    };

    let mut total = Accumulator::new(config, dim);
    for p in partials {
        total.merge(&p?);
    }

    let observables = config
        .observables
        .iter()
        .zip(&total.obs)
        .map(|(o, m)| ObservableSeries {
            label: o.label.clone(),
            matrix: o.matrix.clone(),
            mean: m.iter().map(|x| x.mean).collect(),
            stderr: m.iter().map(Moments::stderr).collect(),
        })
        .collect();

    let collect = |f: &dyn Fn(&Moments, &Moments) -> C64| -> Vec<ComplexMatrix> {
        total
            .rho_re
            .iter()
            .zip(&total.rho_im)
            .map(|(re, im)| {
                let data = re.iter().zip(im).map(|(a, b)| f(a, b)).collect();
                ComplexMatrix::from_vec(dim, dim, data).expect("dim*dim entries")
            })
            .collect()
    };
    let (rho_mean, rho_stderr) = if config.record_rho {
        (
            Some(collect(&|a, b| C64::new(a.mean, b.mean))),
            Some(collect(&|a, b| C64::new(a.stderr(), b.stderr()))),
        )
    } else {
        (None, None)
    };

    Ok(EnsembleResult {
        times: config.times(),
        observables,
        rho_mean,
        rho_stderr,
        master_seed: config.master_seed,
        n_realizations: n,
        mode: config.mode,
        trotter: config.trotter,
        substeps: config.substeps,
        dt: config.dt,
    })
}

/// Mean and standard error of `op` at `step`. Recorded observables give both;
/// otherwise the mean comes from the averaged state and no error is known.
pub fn estimate_observable(result: &EnsembleResult, op: &ComplexMatrix, step: usize) -> Result<(f64, Option<f64>)> {
    if step > result.n_steps() {
        return Err(Error::InvalidArgument(format!(
            "step {step} out of range 0..={}",
            result.n_steps()
        )));
    }
    if let Some(s) = result.observables.iter().find(|o| &o.matrix == op) {
        return Ok((s.mean[step], Some(s.stderr[step])));
    }
    match &result.rho_mean {
        Some(rhos) => {
            if op.rows() != rhos[step].rows() {
                return Err(Error::DimensionMismatch {
                    op: "estimate_observable",
                    expected: rhos[step].rows(),
                    found: op.rows(),
                });
            }
            Ok((expectation(&rhos[step], op), None))
        }
        None => Err(Error::InvalidArgument(
            "observable was not recorded and density matrices were not stored".into(),
        )),
    }
}
