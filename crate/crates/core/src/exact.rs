//! Reference propagators: Liouvillian exponential, fixed-step RK4, and the
//! first-order Euler step used as the comparison baseline.

use crate::error::{Error, Result};
use crate::linalg::{expm_pade, unvectorize, vectorize, ComplexMatrix, DensityMatrix};
use crate::model::LindbladModel;

/// `exp(L t)` as a reusable superoperator.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    dim: usize,
    superop: ComplexMatrix,
}

impl ExactPropagator {
    pub fn new(model: &LindbladModel, t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("evolution time must be >= 0, got {t}")));
        }
        let superop = expm_pade(&model.liouvillian().scale_real(t))?;
        Ok(Self {
            dim: model.dim(),
            superop,
        })
    }

    pub fn superoperator(&self) -> &ComplexMatrix {
        &self.superop
    }

    pub fn apply_raw(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                op: "evolve_exact",
                expected: self.dim,
                found: rho.rows(),
            });
        }
        Ok(unvectorize(&self.superop.matvec(&vectorize(rho)), self.dim))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_raw(rho.matrix())?)
    }
}

/// `rho(t) = exp(L t) rho0`.
pub fn evolve_exact(model: &LindbladModel, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    ExactPropagator::new(model, t)?.apply(rho0)
}

/// Classical RK4 on the matrix form of the master equation.
pub fn evolve_rk4(model: &LindbladModel, rho0: &DensityMatrix, t: f64, steps: usize) -> Result<DensityMatrix> {
    if steps == 0 {
        return Err(Error::InvalidArgument("evolve_rk4 needs steps >= 1".into()));
    }
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            op: "evolve_rk4",
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let h = model.total_hamiltonian();
    let dt = t / steps as f64;
    let f = |r: &ComplexMatrix| model.rhs(&h, r);
    let mut rho = rho0.matrix().clone();
    for _ in 0..steps {
        let k1 = f(&rho);
        let mut tmp = rho.clone();
        tmp.add_scaled_real(&k1, 0.5 * dt);
        let k2 = f(&tmp);
        let mut tmp = rho.clone();
        tmp.add_scaled_real(&k2, 0.5 * dt);
        let k3 = f(&tmp);
        let mut tmp = rho.clone();
        tmp.add_scaled_real(&k3, dt);
        let k4 = f(&tmp);
        rho.add_scaled_real(&k1, dt / 6.0);
        rho.add_scaled_real(&k2, dt / 3.0);
        rho.add_scaled_real(&k3, dt / 3.0);
        rho.add_scaled_real(&k4, dt / 6.0);
    }
    DensityMatrix::new(rho)
}

/// Euler stepper `rho + (-i[H, rho] + D rho) dt`. Works on raw matrices and
/// applies no positivity repair.
#[derive(Debug, Clone)]
pub struct SaStepper<'a> {
    model: &'a LindbladModel,
    h: ComplexMatrix,
    dt: f64,
}

impl<'a> SaStepper<'a> {
    pub fn new(model: &'a LindbladModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self {
            model,
            h: model.total_hamiltonian(),
            dt,
        })
    }

    pub fn step(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = rho.clone();
        out.add_scaled_real(&self.model.rhs(&self.h, rho), self.dt);
        out
    }
}

/// One Euler step; see [`SaStepper`].
pub fn step_sa(model: &LindbladModel, rho: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    Ok(SaStepper::new(model, dt)?.step(rho))
}
