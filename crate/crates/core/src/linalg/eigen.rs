//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition `A = V diag(values) V^dagger`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V f(diag) V^dagger`.
    pub fn map_values(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let v = self.vectors.as_slice();
        let mut out = ComplexMatrix::zeros(n, n);
        let o = out.as_mut_slice();
        for i in 0..n {
            for k in 0..n {
                let w = v[i * n + k] * fv[k];
                if w == ZERO {
                    continue;
                }
                for j in 0..n {
                    o[i * n + j] += w * v[j * n + k].conj();
                }
            }
        }
        out
    }
}

/// Diagonalizes a Hermitian matrix. Only the Hermitian part of `a` is used.
pub fn eigh(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.square_dim("eigh")?;
    let mut m = a.hermitian_part().into_vec();
    let mut v = ComplexMatrix::identity(n).into_vec();

    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[x * n + x].re.total_cmp(&m[y * n + y].re));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_col)] = v[i * n + old_col];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(eigh(a)?.values)
}

// Zeroes m[p][q] with the unitary G = diag-phase * real rotation, m <- G^dagger m G, v <- v G.
fn rotate(m: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;

    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // e^{-i phi}
    let ph = phase.conj();

    for i in 0..n {
        let x = m[i * n + p];
        let y = m[i * n + q];
        m[i * n + p] = x * c - y * ph * s;
        m[i * n + q] = x * s + y * ph * c;
    }
    for j in 0..n {
        let x = m[p * n + j];
        let y = m[q * n + j];
        m[p * n + j] = x * c - y * phase * s;
        m[q * n + j] = x * s + y * phase * c;
    }
    m[p * n + q] = ZERO;
    m[q * n + p] = ZERO;
    m[p * n + p] = C64::new(app - t * mag, 0.0);
    m[q * n + q] = C64::new(aqq + t * mag, 0.0);

    for i in 0..n {
        let x = v[i * n + p];
        let y = v[i * n + q];
        v[i * n + p] = x * c - y * ph * s;
        v[i * n + q] = x * s + y * ph * c;
    }
}
