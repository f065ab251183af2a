//! Lindblad problems: Hamiltonian terms, jump operators with rates, and the
//! generators built from them. Units are fixed to ħ = 1.

mod file;
mod pauli;
pub mod presets;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, I};

pub use file::{parse_matrix, ModelFile, TermSpec, Units};
pub use pauli::{embed_single, operator_support, sigma_minus, sigma_plus, Pauli, PauliString};

const SUPPORT_TOL: f64 = 1e-12;

/// `coefficient * operator`, with `operator` Hermitian.
#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub coefficient: f64,
    pub operator: ComplexMatrix,
    pub label: String,
    support: Vec<usize>,
}

impl HamiltonianTerm {
    pub fn new(n: usize, coefficient: f64, operator: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        check_dim(n, &operator, &label)?;
        if !coefficient.is_finite() {
            return Err(Error::InvalidModel(format!("{label}: non-finite coefficient")));
        }
        if !operator.is_hermitian(1e-12) {
            return Err(Error::InvalidModel(format!(
                "{label}: Hamiltonian operator is not Hermitian"
            )));
        }
        let support = operator_support(n, &operator, SUPPORT_TOL);
        Ok(Self {
            coefficient,
            operator,
            label,
            support,
        })
    }

    pub fn pauli(coefficient: f64, p: &PauliString) -> Result<Self> {
        Self::new(p.n(), coefficient, p.matrix(), p.to_string())
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.operator.scale_real(self.coefficient)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn locality(&self) -> usize {
        self.support.len()
    }
}

/// Jump operator `operator` with rate `rate >= 0`.
#[derive(Debug, Clone)]
pub struct LindbladTerm {
    pub rate: f64,
    pub operator: ComplexMatrix,
    pub label: String,
    support: Vec<usize>,
}

impl LindbladTerm {
    pub fn new(n: usize, rate: f64, operator: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        check_dim(n, &operator, &label)?;
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidModel(format!(
                "{label}: rate must be finite and >= 0, got {rate}"
            )));
        }
        let support = operator_support(n, &operator, SUPPORT_TOL);
        Ok(Self {
            rate,
            operator,
            label,
            support,
        })
    }

    pub fn pauli(rate: f64, p: &PauliString) -> Result<Self> {
        Self::new(p.n(), rate, p.matrix(), p.to_string())
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn locality(&self) -> usize {
        self.support.len()
    }
}

fn check_dim(n: usize, op: &ComplexMatrix, label: &str) -> Result<()> {
    let d = 1usize << n;
    if op.rows() != d || op.cols() != d {
        return Err(Error::InvalidModel(format!(
            "{label}: operator is {}x{}, expected {d}x{d} for n={n}",
            op.rows(),
            op.cols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    n: usize,
    hamiltonian: Vec<HamiltonianTerm>,
    lindblad: Vec<LindbladTerm>,
}

impl LindbladModel {
    pub fn new(n: usize, hamiltonian: Vec<HamiltonianTerm>, lindblad: Vec<LindbladTerm>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("qubit count must be >= 1".into()));
        }
        if n > 10 {
            return Err(Error::InvalidModel(format!(
                "n={n} exceeds the dense-simulation limit of 10"
            )));
        }
        for t in &hamiltonian {
            check_dim(n, &t.operator, &t.label)?;
        }
        for t in &lindblad {
            check_dim(n, &t.operator, &t.label)?;
        }
        Ok(Self {
            n,
            hamiltonian,
            lindblad,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn hamiltonian_terms(&self) -> &[HamiltonianTerm] {
        &self.hamiltonian
    }

    pub fn lindblad_terms(&self) -> &[LindbladTerm] {
        &self.lindblad
    }

    /// Lindblad terms with nonzero rate; zero-rate terms are inert.
    pub fn active_lindblad(&self) -> impl Iterator<Item = (usize, &LindbladTerm)> {
        self.lindblad.iter().enumerate().filter(|(_, t)| t.rate > 0.0)
    }

    /// Copy with every rate multiplied by `factor`.
    pub fn with_rates_scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        for t in &mut m.lindblad {
            t.rate *= factor;
        }
        m
    }

    pub fn total_hamiltonian(&self) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(self.dim(), self.dim());
        for t in &self.hamiltonian {
            h.add_scaled_real(&t.operator, t.coefficient);
        }
        h
    }

    /// Superoperator on column-stacked `vec(rho)`.
    pub fn liouvillian(&self) -> ComplexMatrix {
        let d = self.dim();
        let id = ComplexMatrix::identity(d);
        let h = self.total_hamiltonian();
        let mut l = &kron(&id, &h) - &kron(&h.transpose(), &id);
        l = l.scale(-I);
        for (_, t) in self.active_lindblad() {
            let op = &t.operator;
            let ldl = op.adjoint().matmul(op);
            let mut term = kron(&op.conj(), op);
            term.add_scaled_real(&kron(&id, &ldl), -0.5);
            term.add_scaled_real(&kron(&ldl.transpose(), &id), -0.5);
            l.add_scaled_real(&term, t.rate);
        }
        l
    }

    /// Dissipator `D(rho)` in matrix form.
    pub fn dissipator(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
        for (_, t) in self.active_lindblad() {
            add_dissipator(&mut out, &t.operator, t.rate, rho);
        }
        out
    }

    /// `-i[H, rho] + D(rho)`.
    pub fn rhs(&self, h: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = h.commutator(rho).scale(-I);
        out += &self.dissipator(rho);
        out
    }

    /// Supports of nonzero-rate dissipators that are not strictly contained in
    /// another one, sorted.
    pub fn dissipator_supports(&self) -> Vec<Vec<usize>> {
        maximal_supports(self.active_lindblad().map(|(_, t)| t.support()))
    }

    pub fn hamiltonian_supports(&self) -> Vec<Vec<usize>> {
        maximal_supports(
            self.hamiltonian
                .iter()
                .filter(|t| t.coefficient != 0.0)
                .map(|t| t.support()),
        )
    }

    /// Locality `m`: the largest dissipator support.
    pub fn dissipator_locality(&self) -> usize {
        self.active_lindblad().map(|(_, t)| t.locality()).max().unwrap_or(0)
    }

    /// Largest number of Hamiltonian terms sharing one maximal support.
    pub fn hamiltonian_group_size(&self) -> usize {
        let groups = self.hamiltonian_supports();
        let mut counts = vec![0usize; groups.len()];
        for t in self.hamiltonian.iter().filter(|t| t.coefficient != 0.0) {
            let s: BTreeSet<usize> = t.support().iter().copied().collect();
            if let Some(g) = groups.iter().position(|g| s.is_subset(&g.iter().copied().collect())) {
                counts[g] += 1;
            }
        }
        counts.into_iter().max().unwrap_or(0)
    }
}

pub(crate) fn add_dissipator(out: &mut ComplexMatrix, l: &ComplexMatrix, rate: f64, rho: &ComplexMatrix) {
    let ld = l.adjoint();
    let ldl = ld.matmul(l);
    out.add_scaled_real(&l.matmul(rho).matmul(&ld), rate);
    out.add_scaled_real(&ldl.matmul(rho), -0.5 * rate);
    out.add_scaled_real(&rho.matmul(&ldl), -0.5 * rate);
}

fn maximal_supports<'a>(supports: impl Iterator<Item = &'a [usize]>) -> Vec<Vec<usize>> {
    let distinct: BTreeSet<Vec<usize>> = supports.filter(|s| !s.is_empty()).map(|s| s.to_vec()).collect();
    let sets: Vec<BTreeSet<usize>> = distinct.iter().map(|s| s.iter().copied().collect()).collect();
    distinct
        .iter()
        .zip(&sets)
        .filter(|(_, s)| !sets.iter().any(|o| s.is_subset(o) && s.len() < o.len()))
        .map(|(v, _)| v.clone())
        .collect()
}

/// Number of distinct `m`-qubit supports among `n` qubits, `C(n, m)`.
pub fn k_local_count(n: u64, m: u64) -> Result<u64> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "k_local_count requires 1 <= m <= n, got n={n}, m={m}"
        )));
    }
    let m = m.min(n - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::InvalidArgument(format!("C({n}, {m}) overflows u64")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{unvectorize, vectorize, DensityMatrix, C64};

    fn real(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn dephasing(gamma: f64) -> LindbladModel {
        let z: PauliString = "Z".parse().unwrap();
        LindbladModel::new(1, vec![], vec![LindbladTerm::pauli(gamma, &z).unwrap()]).unwrap()
    }

    #[test]
    fn empty_hamiltonian_is_zero() {
        let m = LindbladModel::new(2, vec![], vec![]).unwrap();
        assert_eq!(m.total_hamiltonian(), ComplexMatrix::zeros(4, 4));
    }

    #[test]
    fn rejects_bad_terms() {
        let sp = sigma_plus();
        assert!(HamiltonianTerm::new(1, 1.0, sp.clone(), "s+").is_err());
        assert!(LindbladTerm::new(1, -1.0, sp.clone(), "s+").is_err());
        assert!(LindbladTerm::new(2, 1.0, sp, "s+").is_err());
        assert!(LindbladModel::new(0, vec![], vec![]).is_err());
    }

    #[test]
    fn liouvillian_matches_matrix_form() {
        let m = presets::two_molecule().unwrap();
        let rho = DensityMatrix::pure(&[real(0.3), C64::new(0.1, 0.4), real(-0.5), C64::new(0.2, 0.2)]).unwrap();
        let lv = m.liouvillian().matvec(&vectorize(rho.matrix()));
        let want = m.rhs(&m.total_hamiltonian(), rho.matrix());
        assert!(unvectorize(&lv, 4).max_abs_diff(&want) < 1e-9);
    }

    #[test]
    fn dephasing_generator_rate() {
        let gamma = 0.7;
        let l = dephasing(gamma).liouvillian();
        // vec index of rho_01 is column 1, row 0 -> 2.
        assert!((l[(2, 2)] - real(-2.0 * gamma)).norm() < 1e-15);
        assert!((l[(1, 1)] - real(-2.0 * gamma)).norm() < 1e-15);
        assert_eq!(l[(0, 0)], real(0.0));
    }

    #[test]
    fn k_local_count_values() {
        assert_eq!(k_local_count(2, 2).unwrap(), 1);
        assert_eq!(k_local_count(4, 2).unwrap(), 6);
        let fact = |k: u64| (1..=k).map(u128::from).product::<u128>().max(1);
        let oracle = fact(20) / (fact(3) * fact(17));
        assert_eq!(u128::from(k_local_count(20, 3).unwrap()), oracle);
        assert!(k_local_count(2, 3).is_err());
        assert!(k_local_count(2, 0).is_err());
    }

    #[test]
    fn supports_and_groups() {
        let m = presets::two_molecule().unwrap();
        assert_eq!(m.dissipator_supports(), vec![vec![0, 1]]);
        assert_eq!(m.dissipator_locality(), 2);
        assert_eq!(m.hamiltonian_supports(), vec![vec![0, 1]]);
        assert_eq!(m.hamiltonian_group_size(), 4);

        let s = presets::single_spin_default().unwrap();
        assert_eq!(s.dissipator_supports(), vec![vec![0]]);
        assert_eq!(s.dissipator_locality(), 1);
        assert_eq!(s.hamiltonian_group_size(), 1);
    }

    #[test]
    fn disjoint_supports_counted_separately() {
        let terms = ["ZII", "IZI", "IIZ", "XXI"]
            .iter()
            .map(|s| LindbladTerm::pauli(1.0, &s.parse().unwrap()).unwrap())
            .collect();
        let m = LindbladModel::new(3, vec![], terms).unwrap();
        assert_eq!(m.dissipator_supports(), vec![vec![0, 1], vec![2]]);
        assert_eq!(m.dissipator_locality(), 2);
    }
}
