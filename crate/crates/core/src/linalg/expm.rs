//! Matrix exponential.
//!
//! Hermitian and anti-Hermitian inputs go through the eigensolver. Everything
//! else uses scaling and squaring with a diagonal Padé approximant whose degree
//! is picked from the 1-norm (Higham 2005).

use super::eigen::eigh;
use super::matrix::{ComplexMatrix, C64, I};
use crate::error::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.53939833006323e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

/// `e^A`. Dispatches to the eigen path when `A` is (anti-)Hermitian to
/// round-off, otherwise Padé.
pub fn matexp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.square_dim("matexp")?;
    let tol = 64.0 * f64::EPSILON * a.max_abs().max(1.0);
    if a.is_anti_hermitian(tol) {
        return expm_anti_hermitian(a);
    }
    if a.is_hermitian(tol) {
        let e = eigh(a)?;
        return Ok(e.map_values(|x| C64::new(x.exp(), 0.0)));
    }
    expm_pade(a)
}

/// `e^A` for anti-Hermitian `A`; the result is unitary to round-off.
pub fn expm_anti_hermitian(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    // A = -iH with H = iA Hermitian.
    let h = a.scale(I);
    let e = eigh(&h)?;
    Ok(e.map_values(|x| C64::new(0.0, -x).exp()))
}

/// Scaling-and-squaring Padé exponential for general square matrices.
pub fn expm_pade(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.square_dim("expm_pade")?;
    let ident = ComplexMatrix::identity(n);
    let norm = a.norm_1();
    if norm == 0.0 {
        return Ok(ident);
    }

    let a2 = a.matmul(a);
    if norm <= THETA9 {
        let (u, v) = if norm <= THETA3 {
            pade_low(a, &a2, &ident, &PADE3)
        } else if norm <= THETA5 {
            pade_low(a, &a2, &ident, &PADE5)
        } else if norm <= THETA7 {
            pade_low(a, &a2, &ident, &PADE7)
        } else {
            pade_low(a, &a2, &ident, &PADE9)
        };
        return solve_pade(&u, &v);
    }

    let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
    let factor = 0.5f64.powi(s);
    let a = a.scale_real(factor);
    let a2 = a2.scale_real(factor * factor);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = &PADE13;

    let mut inner = a6.scale_real(b[13]);
    inner.add_scaled_real(&a4, b[11]);
    inner.add_scaled_real(&a2, b[9]);
    let mut u = a6.matmul(&inner);
    u.add_scaled_real(&a6, b[7]);
    u.add_scaled_real(&a4, b[5]);
    u.add_scaled_real(&a2, b[3]);
    u.add_scaled_real(&ident, b[1]);
    let u = a.matmul(&u);

    let mut inner = a6.scale_real(b[12]);
    inner.add_scaled_real(&a4, b[10]);
    inner.add_scaled_real(&a2, b[8]);
    let mut v = a6.matmul(&inner);
    v.add_scaled_real(&a6, b[6]);
    v.add_scaled_real(&a4, b[4]);
    v.add_scaled_real(&a2, b[2]);
    v.add_scaled_real(&ident, b[0]);

    let mut r = solve_pade(&u, &v)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn pade_low(a: &ComplexMatrix, a2: &ComplexMatrix, ident: &ComplexMatrix, b: &[f64]) -> (ComplexMatrix, ComplexMatrix) {
    let mut u = ident.scale_real(b[1]);
    let mut v = ident.scale_real(b[0]);
    let mut power = ident.clone();
    for k in (2..b.len()).step_by(2) {
        power = power.matmul(a2);
        v.add_scaled_real(&power, b[k]);
        if k + 1 < b.len() {
            u.add_scaled_real(&power, b[k + 1]);
        }
    }
    (a.matmul(&u), v)
}

// Solves (V - U) X = (V + U).
fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v - u;
    let q = v + u;
    solve(&p, &q)
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.square_dim("solve")?;
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            op: "solve",
            expected: n,
            found: b.rows(),
        });
    }
    let m = b.cols();
    let mut lu = a.clone().into_vec();
    let mut x = b.clone().into_vec();

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[i * n + col].norm().total_cmp(&lu[j * n + col].norm()))
            .unwrap_or(col);
        if lu[pivot * n + col].norm() == 0.0 {
            return Err(Error::InvalidArgument("singular matrix in solve".into()));
        }
        if pivot != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot * n + j);
            }
            for j in 0..m {
                x.swap(col * m + j, pivot * m + j);
            }
        }
        let d = lu[col * n + col];
        for i in col + 1..n {
            let f = lu[i * n + col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            lu[i * n + col] = f;
            for j in col + 1..n {
                let t = lu[col * n + j];
                lu[i * n + j] -= f * t;
            }
            for j in 0..m {
                let t = x[col * m + j];
                x[i * m + j] -= f * t;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[col * n + col];
        for j in 0..m {
            let mut acc = x[col * m + j];
            for k in col + 1..n {
                acc -= lu[col * n + k] * x[k * m + j];
            }
            x[col * m + j] = acc / d;
        }
    }
    ComplexMatrix::from_vec(n, m, x)
}
