//! The stochastic noisy gate `N(Δt) = U(Δt) ∏_k exp(√γ_k S_k)` acting on
//! system ⊗ ancilla, and its noise-averaged channel.
//!
//! `S_k = Σ_r J_k(s_r) ΔW_r` with `J_k(s) = L_k(s) ⊗ σ⁺ − L_k(s)† ⊗ σ⁻`,
//! `L_k(s) = U(s)† L_k U(s)`, left-endpoint nodes `s_r = r Δt / M` and
//! independent increments `ΔW_r ~ N(0, Δt/M)`. The second-order commutator
//! correction to the exponent is dropped; its noise average vanishes.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eigh, kron, ComplexMatrix, DensityMatrix, C64, ONE, ZERO};
use crate::model::{add_dissipator, sigma_minus, sigma_plus, LindbladModel};
use crate::propagator::{Propagator, TrotterMode};

pub const DEFAULT_SUBSTEPS: usize = 8;

/// Single-qubit bath: `σ⁻ = |0><1|`, `σ⁺ = |1><0|`, placed as the last
/// tensor factor.
#[derive(Debug, Clone)]
pub struct BathRepresentation {
    pub sigma_minus: ComplexMatrix,
    pub sigma_plus: ComplexMatrix,
}

impl Default for BathRepresentation {
    fn default() -> Self {
        Self {
            sigma_minus: sigma_minus(),
            sigma_plus: sigma_plus(),
        }
    }
}

impl BathRepresentation {
    /// `L ⊗ σ⁺ − L† ⊗ σ⁻`.
    pub fn coupling(&self, l: &ComplexMatrix) -> ComplexMatrix {
        &kron(l, &self.sigma_plus) - &kron(&l.adjoint(), &self.sigma_minus)
    }

    /// `A ⊗ I₂`.
    pub fn embed_system(&self, a: &ComplexMatrix) -> ComplexMatrix {
        kron(a, &ComplexMatrix::identity(2))
    }
}

/// `L_k(s) = U(s)† L_k U(s)` under the chosen propagator.
pub fn interaction_picture_l(model: &LindbladModel, k: usize, s: f64, trotter: TrotterMode) -> Result<ComplexMatrix> {
    let term = model
        .lindblad_terms()
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("Lindblad index {k} out of range")))?;
    let u = Propagator::new(model, trotter)?.at(s);
    Ok(u.adjoint().matmul(&term.operator).matmul(&u))
}

/// Integrand tables for one Lindblad channel.
#[derive(Debug, Clone)]
pub struct ChannelPlan {
    /// Index into the model's Lindblad terms.
    pub index: usize,
    pub label: String,
    pub rate: f64,
    /// `L_k(s_r)`, `r = 0..=M`.
    pub l_nodes: Vec<ComplexMatrix>,
    /// `J_k(s_r)`, `r = 0..=M`.
    pub j_nodes: Vec<ComplexMatrix>,
}

/// Everything needed to sample gates for one step size. Zero-rate channels
/// are omitted since their factor is the identity.
#[derive(Debug, Clone)]
pub struct NoiseGatePlan {
    pub dt: f64,
    pub trotter: TrotterMode,
    pub substeps: usize,
    /// `s_r = r Δt / M`, `r = 0..=M`.
    pub nodes: Vec<f64>,
    pub channels: Vec<ChannelPlan>,
    system_dim: usize,
    u_dt: ComplexMatrix,
    u_full: ComplexMatrix,
}

impl NoiseGatePlan {
    pub fn build(model: &LindbladModel, dt: f64, trotter: TrotterMode, substeps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        if substeps == 0 {
            return Err(Error::InvalidArgument("sub-step count M must be >= 1".into()));
        }
        let bath = BathRepresentation::default();
        let prop = Propagator::new(model, trotter)?;
        let nodes: Vec<f64> = (0..=substeps).map(|r| r as f64 * dt / substeps as f64).collect();
        let us: Vec<ComplexMatrix> = nodes.iter().map(|&s| prop.at(s)).collect();

        let channels = model
            .active_lindblad()
            .map(|(index, term)| {
                let l_nodes: Vec<ComplexMatrix> = us
                    .iter()
                    .map(|u| u.adjoint().matmul(&term.operator).matmul(u))
                    .collect();
                let j_nodes = l_nodes.iter().map(|l| bath.coupling(l)).collect();
                ChannelPlan {
                    index,
                    label: term.label.clone(),
                    rate: term.rate,
                    l_nodes,
                    j_nodes,
                }
            })
            .collect();

        let u_dt = prop.at(dt);
        let u_full = bath.embed_system(&u_dt);
        Ok(Self {
            dt,
            trotter,
            substeps,
            nodes,
            channels,
            system_dim: model.dim(),
            u_dt,
            u_full,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    /// `U(Δt)` on the system.
    pub fn step_unitary(&self) -> &ComplexMatrix {
        &self.u_dt
    }

    /// Draws the `M` Wiener increments of one channel.
    pub fn sample_increments<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let sd = (self.dt / self.substeps as f64).sqrt();
        (0..self.substeps)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// `Σ_r L_k(s_r) ΔW_r` for channel position `c`.
    fn weighted_l(&self, c: usize, increments: &[f64]) -> ComplexMatrix {
        let ch = &self.channels[c];
        let mut b = ComplexMatrix::zeros(self.system_dim, self.system_dim);
        for (l, &dw) in ch.l_nodes.iter().zip(increments) {
            b.add_scaled_real(l, dw);
        }
        b
    }

    /// `S_k` for channel position `c` from explicit increments.
    pub fn sk_from_increments(&self, c: usize, increments: &[f64]) -> Result<ComplexMatrix> {
        self.check_channel(c, increments)?;
        let ch = &self.channels[c];
        let d = 2 * self.system_dim;
        let mut s = ComplexMatrix::zeros(d, d);
        for (j, &dw) in ch.j_nodes.iter().zip(increments) {
            s.add_scaled_real(j, dw);
        }
        Ok(s)
    }

    /// Samples `S_k` for channel position `c`, returning the increments too.
    pub fn sample_sk<R: Rng + ?Sized>(&self, c: usize, rng: &mut R) -> Result<(ComplexMatrix, Vec<f64>)> {
        let inc = self.sample_increments(rng);
        Ok((self.sk_from_increments(c, &inc)?, inc))
    }

    fn check_channel(&self, c: usize, increments: &[f64]) -> Result<()> {
        if c >= self.channels.len() {
            return Err(Error::InvalidArgument(format!("channel position {c} out of range")));
        }
        if increments.len() != self.substeps {
            return Err(Error::DimensionMismatch {
                op: "noise increments",
                expected: self.substeps,
                found: increments.len(),
            });
        }
        Ok(())
    }

    /// `exp(√γ_k S_k)` for channel position `c`.
    pub fn channel_factor(&self, c: usize, increments: &[f64]) -> Result<ComplexMatrix> {
        self.check_channel(c, increments)?;
        let b = self.weighted_l(c, increments).scale_real(self.channels[c].rate.sqrt());
        exp_coupling(&b)
    }

    /// Gate from explicit increments, one vector per channel.
    pub fn gate_from_increments(&self, increments: &[Vec<f64>]) -> Result<ComplexMatrix> {
        if increments.len() != self.channels.len() {
            return Err(Error::DimensionMismatch {
                op: "gate increments",
                expected: self.channels.len(),
                found: increments.len(),
            });
        }
        let mut n = self.u_full.clone();
        for (c, inc) in increments.iter().enumerate() {
            n = n.matmul(&self.channel_factor(c, inc)?);
        }
        Ok(n)
    }

    /// Samples one realization of `N(Δt)`.
    pub fn sample_gate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<NoiseGateRealization> {
        let increments: Vec<Vec<f64>> = self.channels.iter().map(|_| self.sample_increments(rng)).collect();
        let matrix = self.gate_from_increments(&increments)?;
        Ok(NoiseGateRealization { matrix, increments })
    }

    pub fn expected_channel(&self) -> ExpectedChannel<'_> {
        ExpectedChannel { plan: self }
    }
}

/// One sampled gate and the increments that produced it.
#[derive(Debug, Clone)]
pub struct NoiseGateRealization {
    pub matrix: ComplexMatrix,
    pub increments: Vec<Vec<f64>>,
}

/// `exp(A ⊗ σ⁺ − A† ⊗ σ⁻)` via one eigendecomposition of `A†A`.
///
/// In ancilla-major block form the exponent is `[[0, −A†], [A, 0]]`, so the
/// exponential is `[[cos√(A†A), −(A f)†], [A f, I − A g A†]]` with
/// `f = sinc√(A†A)` and `g = (1 − cos√(A†A)) / (A†A)`.
pub fn exp_coupling(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = a.square_dim("exp_coupling")?;
    let e = eigh(&a.adjoint().matmul(a))?;
    let cos = e.map_values(|mu| C64::new(mu.max(0.0).sqrt().cos(), 0.0));
    let sinc = e.map_values(|mu| C64::new(sinc_sqrt(mu.max(0.0)), 0.0));
    let g = e.map_values(|mu| C64::new(one_minus_cos_sqrt_over(mu.max(0.0)), 0.0));
    let af = a.matmul(&sinc);
    let agad = a.matmul(&g).matmul(&a.adjoint());

    let n = 2 * d;
    let mut out = ComplexMatrix::zeros(n, n);
    let o = out.as_mut_slice();
    for i in 0..d {
        for j in 0..d {
            o[(2 * i) * n + 2 * j] = cos[(i, j)];
            o[(2 * i + 1) * n + 2 * j] = af[(i, j)];
            o[(2 * i) * n + 2 * j + 1] = -af[(j, i)].conj();
            let id = if i == j { ONE } else { ZERO };
            o[(2 * i + 1) * n + 2 * j + 1] = id - agad[(i, j)];
        }
    }
    Ok(out)
}

// sin(√μ)/√μ
fn sinc_sqrt(mu: f64) -> f64 {
    if mu < 1e-4 {
        1.0 - mu / 6.0 + mu * mu / 120.0
    } else {
        let s = mu.sqrt();
        s.sin() / s
    }
}

// (1 − cos√μ)/μ
fn one_minus_cos_sqrt_over(mu: f64) -> f64 {
    if mu < 1e-4 {
        0.5 - mu / 24.0 + mu * mu / 720.0 - mu * mu * mu / 40320.0
    } else {
        // 2 sin²(√μ/2) avoids cancellation in 1 − cos.
        let h = 0.5 * mu.sqrt();
        2.0 * h.sin() * h.sin() / mu
    }
}

/// Noise average of one gate step traced over the ancilla:
/// `rho -> U(Δt) (rho + Σ_r (Δt/M) D(s_r) rho) U(Δt)†`.
#[derive(Debug, Clone, Copy)]
pub struct ExpectedChannel<'a> {
    plan: &'a NoiseGatePlan,
}

impl ExpectedChannel<'_> {
    pub fn apply_raw(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let p = self.plan;
        let w = p.dt / p.substeps as f64;
        let mut acc = rho.clone();
        for r in 0..p.substeps {
            for ch in &p.channels {
                add_dissipator(&mut acc, &ch.l_nodes[r], ch.rate * w, rho);
            }
        }
        acc.conjugate_by(&p.u_dt)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_raw(rho.matrix()))
    }

    /// Superoperator on column-stacked vectors.
    pub fn superoperator(&self) -> ComplexMatrix {
        let d = self.plan.system_dim;
        let mut out = ComplexMatrix::zeros(d * d, d * d);
        for j in 0..d {
            for i in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(i, j)] = ONE;
                let img = self.apply_raw(&e);
                let col = j * d + i;
                for q in 0..d {
                    for p in 0..d {
                        out[(q * d + p, col)] = img[(p, q)];
                    }
                }
            }
        }
        out
    }
}
