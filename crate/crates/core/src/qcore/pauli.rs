use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::state::{C64, StateVector};
use crate::{Error, Result};

/// Largest qubit count for which dense `2^n x 2^n` realizations are allowed.
pub const DENSE_QUBIT_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Action on a single basis bit: returns the output bit and the factor,
    /// with `|0>` the sigma_z = +1 state.
    fn map_bit(self, bit: u8) -> (u8, C64) {
        match (self, bit) {
            (Pauli::I, b) => (b, C64::new(1.0, 0.0)),
            (Pauli::X, b) => (1 - b, C64::new(1.0, 0.0)),
            (Pauli::Y, 0) => (1, C64::new(0.0, 1.0)),
            (Pauli::Y, _) => (0, C64::new(0.0, -1.0)),
            (Pauli::Z, 0) => (0, C64::new(1.0, 0.0)),
            (Pauli::Z, _) => (1, C64::new(-1.0, 0.0)),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; `ops[q]` acts on qubit `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            ops: vec![Pauli::I; n_qubits],
        }
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.ops[qubit] = p;
        s
    }

    pub fn with(mut self, qubit: usize, p: Pauli) -> Self {
        self.ops[qubit] = p;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn op(&self, qubit: usize) -> Pauli {
        self.ops[qubit]
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn y_count(&self) -> usize {
        self.ops.iter().filter(|p| **p == Pauli::Y).count()
    }

    /// Pauli strings are generalized permutations: column `basis` has a single
    /// nonzero entry. Returns `(row, factor)` with `P |basis> = factor |row>`.
    pub fn map_basis(&self, basis: usize) -> (usize, C64) {
        let mut out = basis;
        let mut factor = C64::new(1.0, 0.0);
        for (q, p) in self.ops.iter().enumerate() {
            if *p == Pauli::I {
                continue;
            }
            let bit = ((basis >> q) & 1) as u8;
            let (nb, f) = p.map_bit(bit);
            factor *= f;
            if nb != bit {
                out ^= 1 << q;
            }
        }
        (out, factor)
    }
}

impl fmt::Display for PauliString {
    /// Compact token form, e.g. `X0 Z3`; the identity prints as `I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (q, p) in self.ops.iter().enumerate() {
            if *p == Pauli::I {
                continue;
            }
            if wrote {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.letter(), q)?;
            wrote = true;
        }
        if !wrote {
            write!(f, "I")?;
        }
        Ok(())
    }
}

/// Real linear combination of Pauli strings. Real coefficients keep the
/// operator Hermitian by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn add_term(&mut self, coeff: f64, string: PauliString) {
        assert_eq!(
            string.n_qubits(),
            self.n_qubits,
            "term qubit count must match the sum"
        );
        self.terms.push((coeff, string));
    }

    pub fn with_term(mut self, coeff: f64, string: PauliString) -> Self {
        self.add_term(coeff, string);
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for (c, _) in &mut self.terms {
            *c *= factor;
        }
        self
    }

    /// Appends all terms of `other` (coefficients scaled by `scale`).
    pub fn add_scaled(&mut self, scale: f64, other: &PauliSum) {
        assert_eq!(other.n_qubits, self.n_qubits);
        for (c, s) in &other.terms {
            self.terms.push((scale * c, s.clone()));
        }
    }

    /// Merges duplicate strings and drops terms with negligible coefficients.
    pub fn canonicalized(&self) -> Self {
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        for (c, s) in &self.terms {
            if let Some((mc, _)) = merged.iter_mut().find(|(_, ms)| ms == s) {
                *mc += c;
            } else {
                merged.push((*c, s.clone()));
            }
        }
        merged.retain(|(c, _)| c.abs() > 1e-14);
        Self {
            n_qubits: self.n_qubits,
            terms: merged,
        }
    }

    /// `P |psi>`.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        let mut out = StateVector::from_dvector(
            self.n_qubits,
            nalgebra::DVector::from_element(self.dim(), C64::new(0.0, 0.0)),
        );
        for (coeff, string) in &self.terms {
            let c = C64::new(*coeff, 0.0);
            for b in 0..self.dim() {
                let a = psi.amplitude(b);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let (row, f) = string.map_basis(b);
                out.amplitudes_mut()[row] += c * f * a;
            }
        }
        Ok(out)
    }

    /// `<psi| P |psi>`, real for the Hermitian operators this type encodes.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let applied = self.apply(psi)?;
        let v = psi.inner(&applied)?;
        debug_assert!(
            v.im.abs() < 1e-9 * (1.0 + v.re.abs()),
            "expectation of a Hermitian operator came out complex: {v}"
        );
        Ok(v.re)
    }

    /// Dense `2^n x 2^n` realization. Refuses above [`DENSE_QUBIT_CAP`].
    pub fn dense_matrix(&self) -> Result<DMatrix<C64>> {
        self.dense_matrix_capped(DENSE_QUBIT_CAP)
    }

    pub fn dense_matrix_capped(&self, cap: usize) -> Result<DMatrix<C64>> {
        if self.n_qubits > cap {
            return Err(Error::ResourceLimit {
                n_qubits: self.n_qubits,
                cap,
            });
        }
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for (coeff, string) in &self.terms {
            let c = C64::new(*coeff, 0.0);
            for col in 0..dim {
                let (row, f) = string.map_basis(col);
                m[(row, col)] += c * f;
            }
        }
        Ok(m)
    }

    /// Precomputes the permutation action of every term so optimizer inner
    /// loops can apply the operator without re-walking the Pauli letters.
    /// Memory is one `(index, factor)` pair per term per basis state, so the
    /// dense cap applies.
    pub fn compile(&self) -> Result<CompiledPauliSum> {
        if self.n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::ResourceLimit {
                n_qubits: self.n_qubits,
                cap: DENSE_QUBIT_CAP,
            });
        }
        let dim = self.dim();
        let terms = self
            .terms
            .iter()
            .map(|(coeff, string)| {
                let mut perm = Vec::with_capacity(dim);
                let mut fac = Vec::with_capacity(dim);
                for b in 0..dim {
                    let (row, f) = string.map_basis(b);
                    perm.push(row as u32);
                    fac.push(f * C64::new(*coeff, 0.0));
                }
                CompiledTerm { perm, fac }
            })
            .collect();
        Ok(CompiledPauliSum { dim, terms })
    }
}

struct CompiledTerm {
    perm: Vec<u32>,
    /// Column factor with the term coefficient folded in.
    fac: Vec<C64>,
}

/// Hot-loop form of [`PauliSum::compile`].
pub struct CompiledPauliSum {
    dim: usize,
    terms: Vec<CompiledTerm>,
}

impl CompiledPauliSum {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = P src`. Both vectors must have the compiled dimension.
    pub fn apply_into(
        &self,
        src: &nalgebra::DVector<C64>,
        out: &mut nalgebra::DVector<C64>,
    ) {
        debug_assert_eq!(src.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        out.fill(C64::new(0.0, 0.0));
        for term in &self.terms {
            for b in 0..self.dim {
                let a = src[b];
                if a.re != 0.0 || a.im != 0.0 {
                    out[term.perm[b] as usize] += term.fac[b] * a;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(sum: &PauliSum) -> DMatrix<C64> {
        sum.dense_matrix().unwrap()
    }

    #[test]
    fn zz_dense_matrix_is_diag_1_m1_m1_1() {
        let zz = PauliSum::new(2).with_term(
            1.0,
            PauliString::identity(2).with(0, Pauli::Z).with(1, Pauli::Z),
        );
        let m = mat(&zz);
        let expect = [1.0, -1.0, -1.0, 1.0];
        for (i, e) in expect.iter().enumerate() {
            for j in 0..4 {
                let want = if i == j { *e } else { 0.0 };
                assert!((m[(i, j)] - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn single_qubit_paulis_match_their_matrices() {
        // On one qubit: X, Y, Z in the |0>, |1> ordering.
        let x = mat(&PauliSum::new(1).with_term(1.0, PauliString::single(1, 0, Pauli::X)));
        assert!((x[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let y = mat(&PauliSum::new(1).with_term(1.0, PauliString::single(1, 0, Pauli::Y)));
        assert!((y[(0, 1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((y[(1, 0)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        let z = mat(&PauliSum::new(1).with_term(1.0, PauliString::single(1, 0, Pauli::Z)));
        assert!((z[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((z[(1, 1)] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn qubit_zero_is_least_significant() {
        // X on qubit 0 of two qubits must swap |00> <-> |01>, i.e. indices 0 and 1.
        let x0 = PauliSum::new(2).with_term(1.0, PauliString::single(2, 0, Pauli::X));
        let m = mat(&x0);
        assert!((m[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(3, 2)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dense_realization_is_hermitian() {
        let mut sum = PauliSum::new(3);
        sum.add_term(0.7, PauliString::single(3, 0, Pauli::X));
        sum.add_term(-1.3, PauliString::identity(3).with(1, Pauli::Y).with(2, Pauli::X));
        sum.add_term(0.25, PauliString::identity(3).with(0, Pauli::Z).with(2, Pauli::Y));
        let m = mat(&sum);
        let dev = (&m - m.adjoint()).norm();
        assert!(dev < 1e-12, "hermiticity deviation {dev}");
    }

    #[test]
    fn apply_matches_dense_matrix() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        let mut sum = PauliSum::new(4);
        sum.add_term(0.4, PauliString::identity(4).with(0, Pauli::Y).with(3, Pauli::Y));
        sum.add_term(-0.9, PauliString::identity(4).with(1, Pauli::X).with(2, Pauli::Z));
        sum.add_term(1.7, PauliString::single(4, 2, Pauli::Z));
        let psi = StateVector::random(4, &mut rng);
        let direct = sum.apply(&psi).unwrap();
        let via_dense = mat(&sum) * psi.amplitudes();
        assert!((direct.amplitudes() - via_dense).norm() < 1e-12);
    }

    #[test]
    fn expectation_on_basis_state() {
        let zz = PauliSum::new(2).with_term(
            2.0,
            PauliString::identity(2).with(0, Pauli::Z).with(1, Pauli::Z),
        );
        let s01 = StateVector::basis_state(2, 1).unwrap();
        assert!((zz.expectation(&s01).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn dense_matrix_respects_qubit_cap() {
        let sum = PauliSum::new(15);
        assert!(matches!(
            sum.dense_matrix(),
            Err(Error::ResourceLimit { n_qubits: 15, cap: 14 })
        ));
        let sum4 = PauliSum::new(4);
        assert!(matches!(
            sum4.dense_matrix_capped(3),
            Err(Error::ResourceLimit { n_qubits: 4, cap: 3 })
        ));
    }

    #[test]
    fn canonicalize_merges_duplicates() {
        let s = PauliString::single(2, 0, Pauli::X);
        let sum = PauliSum::new(2)
            .with_term(0.5, s.clone())
            .with_term(0.25, s.clone())
            .with_term(-0.75, s.clone());
        assert!(sum.canonicalized().terms().is_empty());
    }

    #[test]
    fn compiled_apply_matches_plain_apply() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(14);
        let mut sum = PauliSum::new(5);
        sum.add_term(0.3, PauliString::identity(5).with(0, Pauli::X).with(4, Pauli::Y));
        sum.add_term(-1.1, PauliString::identity(5).with(2, Pauli::Z).with(3, Pauli::Y));
        sum.add_term(0.9, PauliString::single(5, 1, Pauli::Z));
        let compiled = sum.compile().unwrap();
        let psi = StateVector::random(5, &mut rng);
        let plain = sum.apply(&psi).unwrap();
        let mut fast = nalgebra::DVector::from_element(32, C64::new(0.0, 0.0));
        compiled.apply_into(psi.amplitudes(), &mut fast);
        assert!((plain.amplitudes() - fast).norm() < 1e-13);
    }

    #[test]
    fn display_formats_are_compact() {
        let s = PauliString::identity(4).with(0, Pauli::X).with(3, Pauli::Z);
        assert_eq!(s.to_string(), "X0 Z3");
        assert_eq!(PauliString::identity(2).to_string(), "I");
    }
}
