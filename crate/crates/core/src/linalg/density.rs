use super::eigen::eigvalsh;
use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_FLOOR: f64 = -1e-8;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// up to the tolerances above.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate_density(&matrix)?;
        Ok(Self { matrix })
    }

    /// Wraps without checking. Callers own the invariants.
    pub fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|psi><psi|` after normalizing `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDensityMatrix("zero or non-finite state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            matrix: ComplexMatrix::outer(&v, &v),
        })
    }

    /// Computational basis projector `|index><index|`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Diagonal entries as real populations.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `Tr(O rho)`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        expectation(&self.matrix, op)
    }
}

/// `Re Tr(O rho)` without forming the product.
pub fn expectation(rho: &ComplexMatrix, op: &ComplexMatrix) -> f64 {
    let n = rho.rows();
    assert_eq!(op.rows(), n);
    let (r, o) = (rho.as_slice(), op.as_slice());
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += o[i * n + j] * r[j * n + i];
        }
    }
    acc.re
}

/// Checks the density-matrix invariants, describing the first failure.
pub fn validate_density(m: &ComplexMatrix) -> Result<()> {
    let n = m.square_dim("DensityMatrix")?;
    if n == 0 {
        return Err(Error::InvalidDensityMatrix("empty matrix".into()));
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
    }
    if !m.is_hermitian(HERMITIAN_TOL) {
        let dev = m.max_abs_diff(&m.adjoint());
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (max |A - A^dagger| = {dev:e})"
        )));
    }
    let tr = m.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "trace {:e}{:+e}i differs from 1",
            tr.re, tr.im
        )));
    }
    let min = eigvalsh(m)?.first().copied().unwrap_or(0.0);
    if min < PSD_FLOOR {
        return Err(Error::InvalidDensityMatrix(format!(
            "minimum eigenvalue {min:e} below floor {PSD_FLOOR:e}"
        )));
    }
    Ok(())
}

/// Traces out the last (two-dimensional) tensor factor.
pub fn partial_trace_ancilla_raw(rho: &ComplexMatrix, system_dim: usize) -> Result<ComplexMatrix> {
    let n = rho.square_dim("partial_trace_ancilla")?;
    if n != 2 * system_dim {
        return Err(Error::DimensionMismatch {
            op: "partial_trace_ancilla",
            expected: 2 * system_dim,
            found: n,
        });
    }
    let r = rho.as_slice();
    let mut out = ComplexMatrix::zeros(system_dim, system_dim);
    let o = out.as_mut_slice();
    for i in 0..system_dim {
        for j in 0..system_dim {
            o[i * system_dim + j] = r[(2 * i) * n + 2 * j] + r[(2 * i + 1) * n + 2 * j + 1];
        }
    }
    Ok(out)
}

pub fn partial_trace_ancilla(rho_full: &DensityMatrix, system_dim: usize) -> Result<DensityMatrix> {
    let m = partial_trace_ancilla_raw(rho_full.matrix(), system_dim)?;
    DensityMatrix::new(m)
}

/// `rho ⊗ |0><0|` with the ancilla as last factor.
pub fn append_ancilla_ground(rho: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.rows();
    let n = 2 * d;
    let mut out = ComplexMatrix::zeros(n, n);
    let (r, o) = (rho.as_slice(), out.as_mut_slice());
    for i in 0..d {
        for j in 0..d {
            o[(2 * i) * n + 2 * j] = r[i * d + j];
        }
    }
    out
}

/// `½ Σ|λ(A - B)|` on the Hermitian part of the difference. Accepts
/// unphysical inputs.
pub fn trace_distance_raw(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let n = a.square_dim("trace_distance")?;
    if b.rows() != n || b.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "trace_distance",
            expected: n,
            found: b.rows(),
        });
    }
    let diff = a - b;
    Ok(0.5 * eigvalsh(&diff)?.iter().map(|x| x.abs()).sum::<f64>())
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    trace_distance_raw(rho.matrix(), sigma.matrix())
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let gram = a.adjoint().matmul(a);
    match eigvalsh(&gram) {
        Ok(v) => v.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(e) => {
            log::warn!("spectral_norm: {e}; falling back to the Frobenius upper bound");
            a.frobenius_norm()
        }
    }
}
