//! Experiment drivers: step-size sweep, sampling-error scaling, exact
//! reference series and bound reports.

use log::warn;
use serde::Serialize;

use crate::bounds::{epsilon_p_bound, BoundInputs, BoundReport};
use crate::config::{BoundsSection, SamplingSpec, SweepSpec};
use crate::error::{Error, Result};
use crate::exact::ExactPropagator;
use crate::linalg::{expectation, trace_distance_raw, unvectorize, vectorize, ComplexMatrix, DensityMatrix};
use crate::model::LindbladModel;
use crate::noise_gate::NoiseGatePlan;
use crate::propagator::TrotterMode;
use crate::rng::derive_seed;
use crate::trajectory::{run_ensemble_with_plan, RunConfig};

/// Initial density matrix of a run.
pub fn initial_density(config: &RunConfig) -> Result<DensityMatrix> {
    DensityMatrix::pure(&config.initial_state)
}

/// Exact expectation of each configured observable at steps `0..=n_steps`,
/// indexed `[observable][step]`.
pub fn exact_series(model: &LindbladModel, config: &RunConfig) -> Result<Vec<Vec<f64>>> {
    let step = ExactPropagator::new(model, config.dt)?;
    let mut rho = initial_density(config)?.into_matrix();
    let mut out = vec![Vec::with_capacity(config.n_steps + 1); config.observables.len()];
    for s in 0..=config.n_steps {
        if s > 0 {
            rho = step.apply_raw(&rho)?;
        }
        for (o, series) in config.observables.iter().zip(out.iter_mut()) {
            series.push(expectation(&rho, &o.matrix));
        }
    }
    Ok(out)
}

/// Number of steps covering `total_time`. Warns when `dt` does not divide it.
pub fn steps_for(total_time: f64, dt: f64) -> usize {
    let ratio = total_time / dt;
    let n = (ratio.round() as usize).max(1);
    if (n as f64 - ratio).abs() > 1e-9 * ratio.max(1.0) {
        warn!(
            "total time {total_time:e} is not a multiple of dt {dt:e}; using {n} steps (T = {:e})",
            n as f64 * dt
        );
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub gamma_dt: f64,
    pub dt: f64,
    pub n_steps: usize,
    /// `n_steps * dt`, the time both schemes are compared at.
    pub total_time: f64,
    pub t_qn: f64,
    pub t_sa: f64,
    pub bound_qn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Rate used to convert `gamma_dt` into `dt`.
    pub gamma: f64,
    pub points: Vec<SweepPoint>,
    pub slope_qn: Option<f64>,
    pub slope_sa: Option<f64>,
}

fn iterate(superop: &ComplexMatrix, rho: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let d = rho.rows();
    let mut v = vectorize(rho);
    for _ in 0..n {
        v = superop.matvec(&v);
    }
    unvectorize(&v, d)
}

/// Trace distance to the exact solution of the deterministic expected channel
/// (QN) and of the Euler step (SA), for each `gamma_dt` in the sweep.
pub fn sweep_dt(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    spec: &SweepSpec,
    trotter: TrotterMode,
    substeps: usize,
) -> Result<SweepResult> {
    let gamma = model.active_lindblad().map(|(_, t)| t.rate).fold(0.0, f64::max);
    if gamma <= 0.0 {
        return Err(Error::InvalidModel(
            "sweep_dt needs at least one channel with a positive rate".into(),
        ));
    }
    let d2 = model.dim() * model.dim();
    let lv = model.liouvillian();
    let mut points = Vec::with_capacity(spec.gamma_dt.len());
    for &gdt in &spec.gamma_dt {
        let dt = gdt / gamma;
        let n = steps_for(spec.total_time, dt);
        let t = n as f64 * dt;

        let exact = ExactPropagator::new(model, t)?.apply_raw(rho0.matrix())?;
        let plan = NoiseGatePlan::build(model, dt, trotter, substeps)?;
        let qn = iterate(&plan.expected_channel().superoperator(), rho0.matrix(), n);
        let mut sa_op = ComplexMatrix::identity(d2);
        sa_op.add_scaled_real(&lv, dt);
        let sa = iterate(&sa_op, rho0.matrix(), n);

        let inputs = BoundInputs::from_model(model, dt, n as u64, trotter)?;
        points.push(SweepPoint {
            gamma_dt: gdt,
            dt,
            n_steps: n,
            total_time: t,
            t_qn: trace_distance_raw(&qn, &exact)?,
            t_sa: trace_distance_raw(&sa, &exact)?,
            bound_qn: n as f64 * epsilon_p_bound(&inputs),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.gamma_dt).collect();
    let slope_qn = loglog_slope(&xs, &points.iter().map(|p| p.t_qn).collect::<Vec<_>>());
    let slope_sa = loglog_slope(&xs, &points.iter().map(|p| p.t_sa).collect::<Vec<_>>());
    Ok(SweepResult {
        gamma,
        points,
        slope_qn,
        slope_sa,
    })
}

/// Least-squares slope of `ln y` against `ln x`, skipping non-positive
/// entries. `None` with fewer than two usable points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    linear_slope(&pts)
}

fn linear_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingRow {
    pub n_realizations: usize,
    pub mean_eta: f64,
    /// Sample standard deviation of `eta` over repetitions.
    pub std_eta: f64,
    /// Mean of the per-ensemble standard errors, `ΔO/√N_r`.
    pub mean_stderr: f64,
    pub etas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingResult {
    pub observable: String,
    pub step: usize,
    pub exact: f64,
    pub rows: Vec<SamplingRow>,
    pub slope: Option<f64>,
}

/// `R` independent ensembles per `N_r`; `eta = |<O>_exact - <O>_{N_r}|` at the
/// final step of `base`. Ensemble `(a, r)` uses seed
/// `derive_seed(master, [a, r])`.
pub fn sampling_error(model: &LindbladModel, base: &RunConfig, spec: &SamplingSpec) -> Result<SamplingResult> {
    let mut cfg = base.clone();
    cfg.observables = vec![spec.observable.clone()];
    cfg.record_rho = false;
    cfg.validate(model)?;
    let step = cfg.n_steps;
    let exact = exact_series(model, &cfg)?[0][step];
    let plan = NoiseGatePlan::build(model, cfg.dt, cfg.trotter, cfg.substeps)?;

    let mut rows = Vec::with_capacity(spec.n_realizations.len());
    for (a, &nr) in spec.n_realizations.iter().enumerate() {
        let mut etas = Vec::with_capacity(spec.repetitions);
        let mut stderr_sum = 0.0;
        for r in 0..spec.repetitions {
            cfg.n_realizations = nr;
            cfg.master_seed = derive_seed(base.master_seed, &[a as u64, r as u64]);
            let res = run_ensemble_with_plan(&plan, &cfg)?;
            let series = &res.observables[0];
            etas.push((exact - series.mean[step]).abs());
            stderr_sum += series.stderr[step];
        }
        let k = etas.len() as f64;
        let mean_eta = etas.iter().sum::<f64>() / k;
        let std_eta = if etas.len() > 1 {
            (etas.iter().map(|e| (e - mean_eta).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        rows.push(SamplingRow {
            n_realizations: nr,
            mean_eta,
            std_eta,
            mean_stderr: stderr_sum / k,
            etas,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n_realizations as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_eta).collect();
    Ok(SamplingResult {
        observable: spec.observable.label.clone(),
        step,
        exact,
        slope: loglog_slope(&xs, &ys),
        rows,
    })
}

/// Bound report for the run's step size and step count.
pub fn bounds_report(model: &LindbladModel, run: &RunConfig, section: &BoundsSection) -> Result<BoundReport> {
    let inputs =
        BoundInputs::from_model(model, run.dt, run.n_steps as u64, run.trotter)?.with_overrides(&section.overrides);
    BoundReport::new(inputs, section.target_eps)
}

/// Largest deviation `|mean - exact|` over all steps for each observable.
pub fn max_deviation(mean: &[Vec<f64>], exact: &[Vec<f64>]) -> Vec<f64> {
    mean.iter()
        .zip(exact)
        .map(|(m, e)| m.iter().zip(e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect()
}
