//! Closed-system propagators `U(s)`, exact or Trotterized.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, HermitianEigen, C64};
use crate::model::LindbladModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrotterMode {
    /// `e^{-iHs}` from one eigendecomposition of `H`.
    #[default]
    Exact,
    /// `∏_α e^{-i H_α s}` in term order.
    Order1,
    /// Symmetric (Strang) splitting.
    Order2,
}

impl TrotterMode {
    /// Product-formula order κ, or `None` for the exact propagator.
    pub fn order(self) -> Option<u32> {
        match self {
            TrotterMode::Exact => None,
            TrotterMode::Order1 => Some(1),
            TrotterMode::Order2 => Some(2),
        }
    }
}

impl FromStr for TrotterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(TrotterMode::Exact),
            "order-1" => Ok(TrotterMode::Order1),
            "order-2" => Ok(TrotterMode::Order2),
            _ => Err(Error::InvalidArgument(format!(
                "unknown trotter mode {s:?} (expected exact, order-1, order-2)"
            ))),
        }
    }
}

impl fmt::Display for TrotterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrotterMode::Exact => "exact",
            TrotterMode::Order1 => "order-1",
            TrotterMode::Order2 => "order-2",
        })
    }
}

/// Precomputed spectral data for evaluating `U(s)` at arbitrary `s`.
#[derive(Debug, Clone)]
pub struct Propagator {
    mode: TrotterMode,
    dim: usize,
    factors: Vec<HermitianEigen>,
}

impl Propagator {
    pub fn new(model: &LindbladModel, mode: TrotterMode) -> Result<Self> {
        let dim = model.dim();
        let factors = match mode {
            TrotterMode::Exact => vec![eigh(&model.total_hamiltonian())?],
            TrotterMode::Order1 | TrotterMode::Order2 => model
                .hamiltonian_terms()
                .iter()
                .filter(|t| t.coefficient != 0.0)
                .map(|t| eigh(&t.matrix()))
                .collect::<Result<_>>()?,
        };
        Ok(Self { mode, dim, factors })
    }

    pub fn mode(&self) -> TrotterMode {
        self.mode
    }

    /// `U(s)`; the identity when the Hamiltonian is empty.
    pub fn at(&self, s: f64) -> ComplexMatrix {
        if s == 0.0 {
            return ComplexMatrix::identity(self.dim);
        }
        let phase = |tau: f64| move |x: f64| C64::new(0.0, -x * tau).exp();
        let exps = |tau: f64| -> Vec<ComplexMatrix> { self.factors.iter().map(|e| e.map_values(phase(tau))).collect() };
        let ident = ComplexMatrix::identity(self.dim);
        match self.mode {
            TrotterMode::Exact | TrotterMode::Order1 => exps(s).iter().fold(ident, |acc, u| acc.matmul(u)),
            TrotterMode::Order2 => {
                let half = exps(0.5 * s);
                let Some((last, rest)) = self.factors.split_last() else {
                    return ident;
                };
                let mut u = ident;
                for h in &half[..rest.len()] {
                    u = u.matmul(h);
                }
                u = u.matmul(&last.map_values(phase(s)));
                for h in half[..rest.len()].iter().rev() {
                    u = u.matmul(h);
                }
                u
            }
        }
    }
}
