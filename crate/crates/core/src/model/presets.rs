//! Built-in models used by the experiments and tests.

use std::f64::consts::PI;

use super::{sigma_minus, sigma_plus, HamiltonianTerm, LindbladModel, LindbladTerm, PauliString};
use crate::error::Result;

/// Rabi frequency of the driven spin, rad/s.
pub const SPIN_OMEGA: f64 = PI / 6.0 * 1e6;
/// Common rate of the three spin channels, 1/s.
pub const SPIN_GAMMA: f64 = 100.0;
/// Total evolution time of the spin experiment, s.
pub const SPIN_TIME: f64 = 30e-6;

pub const MOLECULE_E0: f64 = 773.5;
pub const MOLECULE_E1: f64 = 770.3;
pub const MOLECULE_J: f64 = 3.2;

/// Two-qubit Pauli-string dissipator rates for the molecule chain.
pub const MOLECULE_RATES: [(&str, f64); 15] = [
    ("IX", 0.005),
    ("IY", 0.034),
    ("IZ", 0.300),
    ("XI", 0.250),
    ("YI", 0.096),
    ("ZI", 0.280),
    ("XX", 0.044),
    ("XY", 0.099),
    ("XZ", 0.040),
    ("YX", 0.030),
    ("YY", 0.060),
    ("YZ", 0.084),
    ("ZX", 0.000),
    ("ZY", 0.000),
    ("ZZ", 0.099),
];

/// `H = (omega/2) X` with jumps `σ⁺, σ⁻, Z`, each at rate `gamma`.
pub fn single_spin(omega: f64, gamma: f64) -> Result<LindbladModel> {
    let x: PauliString = "X".parse()?;
    let z: PauliString = "Z".parse()?;
    LindbladModel::new(
        1,
        vec![HamiltonianTerm::pauli(omega / 2.0, &x)?],
        vec![
            LindbladTerm::new(1, gamma, sigma_plus(), "s+")?,
            LindbladTerm::new(1, gamma, sigma_minus(), "s-")?,
            LindbladTerm::pauli(gamma, &z)?,
        ],
    )
}

pub fn single_spin_default() -> Result<LindbladModel> {
    single_spin(SPIN_OMEGA, SPIN_GAMMA)
}

/// `H = -E0/2 ZI - E1/2 IZ + J/2 (XX + YY)` with the fifteen Pauli-string
/// dissipators of [`MOLECULE_RATES`]. Dimensionless units.
pub fn two_molecule() -> Result<LindbladModel> {
    let h = [
        ("ZI", -MOLECULE_E0 / 2.0),
        ("IZ", -MOLECULE_E1 / 2.0),
        ("XX", MOLECULE_J / 2.0),
        ("YY", MOLECULE_J / 2.0),
    ]
    .iter()
    .map(|(p, c)| HamiltonianTerm::pauli(*c, &p.parse()?))
    .collect::<Result<Vec<_>>>()?;
    let l = MOLECULE_RATES
        .iter()
        .map(|(p, r)| LindbladTerm::pauli(*r, &p.parse()?))
        .collect::<Result<Vec<_>>>()?;
    LindbladModel::new(2, h, l)
}

/// Pure dephasing `L = Z` at rate `gamma`, optional `H = (omega/2) Z`.
pub fn dephasing(gamma: f64, omega: f64) -> Result<LindbladModel> {
    let z: PauliString = "Z".parse()?;
    let h = if omega == 0.0 {
        vec![]
    } else {
        vec![HamiltonianTerm::pauli(omega / 2.0, &z)?]
    };
    LindbladModel::new(1, h, vec![LindbladTerm::pauli(gamma, &z)?])
}
