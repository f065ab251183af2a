use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let rows = match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        ComplexMatrix::from_rows(&rows).expect("2x2 literal")
    }

    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis. `letters[0]` acts on qubit 0, the
/// most significant factor of the Kronecker product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }

    /// Single non-identity letter `p` on qubit `q` of `n`.
    pub fn single(n: usize, q: usize, p: Pauli) -> Result<Self> {
        if q >= n {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range for n={n}")));
        }
        let mut letters = vec![Pauli::I; n];
        letters[q] = p;
        Self::new(letters)
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.letters
            .iter()
            .fold(ComplexMatrix::identity(1), |acc, p| kron(&acc, &p.matrix()))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("invalid Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.letters.iter().try_for_each(|p| write!(f, "{}", p.as_char()))
    }
}

/// Ancilla-style ladder operators on one qubit in the computational basis.
pub fn sigma_minus() -> ComplexMatrix {
    // |0><1|
    ComplexMatrix::from_rows(&[[ZERO, ONE], [ZERO, ZERO]]).expect("2x2 literal")
}

pub fn sigma_plus() -> ComplexMatrix {
    // |1><0|
    ComplexMatrix::from_rows(&[[ZERO, ZERO], [ONE, ZERO]]).expect("2x2 literal")
}

/// Embeds a single-qubit operator on qubit `q` of `n`.
pub fn embed_single(n: usize, q: usize, op: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(1);
    for i in 0..n {
        if i == q {
            acc = kron(&acc, op);
        } else {
            acc = kron(&acc, &ComplexMatrix::identity(2));
        }
    }
    acc
}

/// Qubits on which `op` acts nontrivially. A qubit is trivial when `op`
/// commutes with both X and Z on it.
pub fn operator_support(n: usize, op: &ComplexMatrix, tol: f64) -> Vec<usize> {
    let scale = op.max_abs().max(1.0);
    (0..n)
        .filter(|&q| {
            [Pauli::X, Pauli::Z].iter().any(|p| {
                let e = embed_single(n, q, &p.matrix());
                op.commutator(&e).max_abs() > tol * scale
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: PauliString = "xIz".parse().unwrap();
        assert_eq!(p.to_string(), "XIZ");
        assert_eq!(p.weight(), 2);
        assert_eq!(p.support(), vec![0, 2]);
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let zi: PauliString = "ZI".parse().unwrap();
        assert_eq!(zi.matrix(), ComplexMatrix::real_diag(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn ladder_relations() {
        let (sm, sp) = (sigma_minus(), sigma_plus());
        assert_eq!(sm.matmul(&sm), ComplexMatrix::zeros(2, 2));
        assert_eq!(sp.matmul(&sp), ComplexMatrix::zeros(2, 2));
        assert_eq!(sm.matmul(&sp), ComplexMatrix::real_diag(&[1.0, 0.0]));
        assert_eq!(sm.adjoint(), sp);
    }

    #[test]
    fn support_of_raw_operators() {
        let op = kron(&sigma_plus(), &ComplexMatrix::identity(2));
        assert_eq!(operator_support(2, &op, 1e-12), vec![0]);
        let zz: PauliString = "ZZ".parse().unwrap();
        assert_eq!(operator_support(2, &zz.matrix(), 1e-12), vec![0, 1]);
        assert!(operator_support(2, &ComplexMatrix::identity(4), 1e-12).is_empty());
    }
}
