//! Analytic error bounds and gate-count estimates.
//!
//! * per-step perturbative error `ε_p = 2e (K (4^m − 1) ‖L‖² γ Δt)²`
//! * per-step Trotter error `ε_T = (K J ‖h‖ ω Δt)^(κ+1)`, zero for the exact propagator
//! * global error (κ = 1) `T² K² / N · (J² ω² ‖h‖² + (4^m − 1)² γ² ‖L‖⁴)`
//! * gate count `N_G = ⌈(K J + K (4^m − 1) + 1) T² K² (γ² + ω²) / ε⌉`
//!
//! The gate count is an order-of-magnitude estimate; its proportionality
//! constant is fixed to 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::model::LindbladModel;
use crate::propagator::TrotterMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Number of maximal dissipator supports.
    pub k: f64,
    /// Dissipator locality.
    pub m: u32,
    pub n: u32,
    /// Largest rate, 1/s.
    pub gamma: f64,
    /// Largest Hamiltonian coefficient, rad/s.
    pub omega: f64,
    /// Largest number of Hamiltonian terms on one maximal support.
    pub j: f64,
    pub max_h_norm: f64,
    pub max_l_norm: f64,
    pub dt: f64,
    pub n_steps: u64,
    /// Product-formula order κ; `None` for the exact propagator.
    pub trotter_order: Option<u32>,
}

/// Optional replacements for model-derived inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundOverrides {
    pub k: Option<f64>,
    pub m: Option<u32>,
    pub gamma: Option<f64>,
    pub omega: Option<f64>,
    pub j: Option<f64>,
    pub max_h_norm: Option<f64>,
    pub max_l_norm: Option<f64>,
}

impl BoundInputs {
    /// Extracts locality data, scales and norms from `model`.
    pub fn from_model(model: &LindbladModel, dt: f64, n_steps: u64, trotter: TrotterMode) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidArgument("n_steps must be >= 1".into()));
        }
        let active: Vec<_> = model.active_lindblad().map(|(_, t)| t).collect();
        let hterms: Vec<_> = model
            .hamiltonian_terms()
            .iter()
            .filter(|t| t.coefficient != 0.0)
            .collect();
        Ok(Self {
            k: model.dissipator_supports().len() as f64,
            m: model.dissipator_locality() as u32,
            n: model.n() as u32,
            gamma: active.iter().map(|t| t.rate).fold(0.0, f64::max),
            omega: hterms.iter().map(|t| t.coefficient.abs()).fold(0.0, f64::max),
            j: model.hamiltonian_group_size() as f64,
            max_h_norm: hterms.iter().map(|t| spectral_norm(&t.operator)).fold(0.0, f64::max),
            max_l_norm: active.iter().map(|t| spectral_norm(&t.operator)).fold(0.0, f64::max),
            dt,
            n_steps,
            trotter_order: trotter.order(),
        })
    }

    pub fn with_overrides(mut self, o: &BoundOverrides) -> Self {
        if let Some(v) = o.k {
            self.k = v;
        }
        if let Some(v) = o.m {
            self.m = v;
        }
        if let Some(v) = o.gamma {
            self.gamma = v;
        }
        if let Some(v) = o.omega {
            self.omega = v;
        }
        if let Some(v) = o.j {
            self.j = v;
        }
        if let Some(v) = o.max_h_norm {
            self.max_h_norm = v;
        }
        if let Some(v) = o.max_l_norm {
            self.max_l_norm = v;
        }
        self
    }

    pub fn total_time(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// `4^m − 1`, the number of non-identity Pauli strings on `m` qubits.
    fn pauli_count(&self) -> f64 {
        4f64.powi(self.m as i32) - 1.0
    }
}

pub fn epsilon_p_bound(i: &BoundInputs) -> f64 {
    let x = i.k * i.pauli_count() * i.max_l_norm.powi(2) * i.gamma * i.dt;
    2.0 * std::f64::consts::E * x * x
}

/// Per-step Trotter error with exponent `κ + 1`; zero without Trotterization.
pub fn epsilon_t_bound(i: &BoundInputs) -> f64 {
    match i.trotter_order {
        None => 0.0,
        Some(kappa) => (i.k * i.j * i.max_h_norm * i.omega * i.dt).powi(kappa as i32 + 1),
    }
}

/// Closed-form global bound for κ = 1, evaluated as printed (no `e` factor).
pub fn epsilon_global_printed(i: &BoundInputs) -> f64 {
    let t = i.total_time();
    let h = i.j * i.omega * i.max_h_norm;
    let l = i.pauli_count() * i.gamma * i.max_l_norm.powi(2);
    t * t * i.k * i.k / i.n_steps as f64 * (h * h + l * l)
}

/// `N (ε_p + ε_T)`.
pub fn epsilon_per_step_sum(i: &BoundInputs) -> f64 {
    i.n_steps as f64 * (epsilon_p_bound(i) + epsilon_t_bound(i))
}

/// Global bound for the configured propagator: `N ε_p` when exact, the
/// closed form for κ = 1, and `N (ε_p + ε_T)` for κ ≥ 2.
pub fn epsilon_global_bound(i: &BoundInputs) -> f64 {
    match i.trotter_order {
        None => i.n_steps as f64 * epsilon_p_bound(i),
        Some(1) => epsilon_global_printed(i),
        Some(_) => epsilon_per_step_sum(i),
    }
}

pub fn gate_count_estimate(i: &BoundInputs, eps_target: f64) -> Result<f64> {
    if !(eps_target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target error must be > 0, got {eps_target}"
        )));
    }
    let t = i.total_time();
    let per_group = i.k * i.j + i.k * i.pauli_count() + 1.0;
    Ok((per_group * t * t * i.k * i.k * (i.gamma * i.gamma + i.omega * i.omega) / eps_target).ceil())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub total_time: f64,
    pub eps_p: f64,
    pub eps_t: f64,
    /// Per-step total `ε_p + ε_T`.
    pub eps_step: f64,
    pub eps_global: f64,
    pub eps_global_printed: f64,
    pub eps_per_step_sum: f64,
    pub gate_count_target: f64,
    pub gate_count: f64,
}

impl BoundReport {
    /// `target` defaults to the computed global bound when absent.
    pub fn new(inputs: BoundInputs, target: Option<f64>) -> Result<Self> {
        let eps_p = epsilon_p_bound(&inputs);
        let eps_t = epsilon_t_bound(&inputs);
        let eps_global = epsilon_global_bound(&inputs);
        let gate_count_target = target.unwrap_or(eps_global);
        let gate_count = if gate_count_target > 0.0 {
            gate_count_estimate(&inputs, gate_count_target)?
        } else {
            0.0
        };
        Ok(Self {
            total_time: inputs.total_time(),
            eps_p,
            eps_t,
            eps_step: eps_p + eps_t,
            eps_global,
            eps_global_printed: epsilon_global_printed(&inputs),
            eps_per_step_sum: epsilon_per_step_sum(&inputs),
            gate_count_target,
            gate_count,
            inputs,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = &self.inputs;
        let trotter = match i.trotter_order {
            None => "exact".to_string(),
            Some(k) => format!("order-{k}"),
        };
        let rows: [(&str, String); 20] = [
            ("n", i.n.to_string()),
            ("K (maximal supports)", i.k.to_string()),
            ("m (locality)", i.m.to_string()),
            ("J (terms per group)", i.j.to_string()),
            ("gamma", format!("{:e}", i.gamma)),
            ("omega", format!("{:e}", i.omega)),
            ("max |h|", format!("{:e}", i.max_h_norm)),
            ("max |L|", format!("{:e}", i.max_l_norm)),
            ("dt", format!("{:e}", i.dt)),
            ("n_steps", i.n_steps.to_string()),
            ("T", format!("{:e}", self.total_time)),
            ("trotter", trotter),
            ("eps_p (per step)", format!("{:e}", self.eps_p)),
            ("eps_T (per step)", format!("{:e}", self.eps_t)),
            ("eps per step", format!("{:e}", self.eps_step)),
            ("eps_global", format!("{:e}", self.eps_global)),
            ("eps_global closed form", format!("{:e}", self.eps_global_printed)),
            ("N (eps_p + eps_T)", format!("{:e}", self.eps_per_step_sum)),
            ("gate count target eps", format!("{:e}", self.gate_count_target)),
            ("gate count N_G", format!("{:e}", self.gate_count)),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            writeln!(f, "{k:<width$}  {v}")?;
        }
        Ok(())
    }
}
