//! Dense complex linear algebra sized for a handful of qubits.

mod density;
mod eigen;
mod expm;
mod matrix;

pub use density::{
    append_ancilla_ground, expectation, partial_trace_ancilla, partial_trace_ancilla_raw, spectral_norm,
    trace_distance, trace_distance_raw, validate_density, DensityMatrix, HERMITIAN_TOL, PSD_FLOOR, TRACE_TOL,
};
pub use eigen::{eigh, eigvalsh, HermitianEigen};
pub use expm::{expm_anti_hermitian, expm_pade, matexp, solve};
pub use matrix::{kron, ComplexMatrix, C64, I, ONE, ZERO};

/// Column-stacking vectorization: `vec(A)[j*n + i] = A[i, j]`.
pub fn vectorize(a: &ComplexMatrix) -> Vec<C64> {
    let (r, c) = (a.rows(), a.cols());
    let mut out = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            out.push(a[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vectorize`] for a square `dim x dim` matrix.
pub fn unvectorize(v: &[C64], dim: usize) -> ComplexMatrix {
    assert_eq!(v.len(), dim * dim);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            m[(i, j)] = v[j * dim + i];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_roundtrip() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let v = vectorize(&a);
        assert_eq!(v[1], C64::new(3.0, 0.0));
        assert_eq!(unvectorize(&v, 2), a);
    }
}
