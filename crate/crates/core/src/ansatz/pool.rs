use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::qcore::{Pauli, PauliString, PauliSum, StateVector};
use crate::Result;

/// One candidate generator for the adaptive ansatz. The rotation generated is
/// `exp(i theta P)` where `P` is the stored real Pauli sum; `i P` is the
/// anti-Hermitian generator. Every pool constructor produces `P` with
/// `P^3 = P` (eigenvalues in {-1, 0, 1}), which gives the closed-form action
/// used by [`PoolOperator::apply_rotation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolOperator {
    pub label: String,
    pub sz_preserving: bool,
    generator: PauliSum,
}

impl PoolOperator {
    pub fn new(label: String, generator: PauliSum, sz_preserving: bool) -> Self {
        Self {
            label,
            sz_preserving,
            generator,
        }
    }

    /// The real Pauli sum `P` with the imaginary unit factored out.
    pub fn generator(&self) -> &PauliSum {
        &self.generator
    }

    pub fn n_qubits(&self) -> usize {
        self.generator.n_qubits()
    }

    /// `exp(i theta P)|psi> = |psi> + i sin(theta) P|psi>
    ///                      + (cos(theta) - 1) P^2|psi>`,
    /// exact because `P^3 = P`.
    pub fn apply_rotation(&self, theta: f64, psi: &StateVector) -> Result<StateVector> {
        let p1 = self.generator.apply(psi)?;
        let p2 = self.generator.apply(&p1)?;
        let mut out = psi.clone();
        out.add_scaled(C64::new(0.0, theta.sin()), &p1);
        out.add_scaled(C64::new(theta.cos() - 1.0, 0.0), &p2);
        Ok(out)
    }

    /// `i P |psi>` (the anti-Hermitian generator applied to the state).
    pub fn apply_generator(&self, psi: &StateVector) -> Result<StateVector> {
        Ok(self.generator.apply(psi)?.scaled(C64::new(0.0, 1.0)))
    }
}

/// Stable identifier for a pool: hash of every label and generator term.
/// Stored next to serialized ansatzes so a reloaded model can verify it was
/// trained against the same pool definition.
pub fn pool_hash(pool: &[PoolOperator]) -> String {
    let mut h = Sha256::new();
    for op in pool {
        h.update(op.label.as_bytes());
        h.update([0u8]);
        for (c, s) in op.generator.terms() {
            h.update(c.to_le_bytes());
            h.update(s.to_string().as_bytes());
            h.update([0u8]);
        }
        h.update([op.sz_preserving as u8, 0xff]);
    }
    hex_digest(&h.finalize())
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy)]
enum Ladder {
    /// `|1><0|`
    Raise,
    /// `|0><1|`
    Lower,
}

/// Expands a product of ladder operators on distinct qubits into Pauli terms,
/// takes the anti-Hermitian part `A - A^dag`, and returns `(A - A^dag) / i`
/// as a real Pauli sum.
fn excitation_generator(n_qubits: usize, ladders: &[(usize, Ladder)]) -> PauliSum {
    // |1><0| = (X - iY)/2, |0><1| = (X + iY)/2
    let mut terms: Vec<(C64, PauliString)> = vec![(C64::new(1.0, 0.0), PauliString::identity(n_qubits))];
    for &(q, kind) in ladders {
        let y_sign = match kind {
            Ladder::Raise => -0.5,
            Ladder::Lower => 0.5,
        };
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (c, s) in &terms {
            next.push((c * C64::new(0.5, 0.0), s.clone().with(q, Pauli::X)));
            next.push((c * C64::new(0.0, y_sign), s.clone().with(q, Pauli::Y)));
        }
        terms = next;
    }
    // A - A^dag: the Pauli words are Hermitian, so the coefficient of each
    // word becomes c - conj(c) = 2i Im c; dividing by i leaves 2 Im c.
    let mut p = PauliSum::new(n_qubits);
    for (c, s) in terms {
        let coeff = 2.0 * c.im;
        if coeff.abs() > 1e-15 {
            p.add_term(coeff, s);
        }
    }
    p
}

/// Qubit-excitation pool: single excitations on every qubit pair and double
/// excitations on every disjoint pair of pairs. All operators preserve `S_z`.
pub fn qeb_pool(n_qubits: usize) -> Vec<PoolOperator> {
    assert!(n_qubits >= 2, "excitations need at least two qubits");
    let mut pool = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..n_qubits {
        for j in (i + 1)..n_qubits {
            pairs.push((i, j));
            let gen = excitation_generator(n_qubits, &[(i, Ladder::Raise), (j, Ladder::Lower)]);
            pool.push(PoolOperator::new(format!("s({i},{j})"), gen, true));
        }
    }
    for (pi, &(a, b)) in pairs.iter().enumerate() {
        for &(c, d) in pairs.iter().skip(pi + 1) {
            if a == c || a == d || b == c || b == d {
                continue;
            }
            let gen = excitation_generator(
                n_qubits,
                &[
                    (a, Ladder::Raise),
                    (b, Ladder::Raise),
                    (c, Ladder::Lower),
                    (d, Ladder::Lower),
                ],
            );
            pool.push(PoolOperator::new(format!("d({a},{b}|{c},{d})"), gen, true));
        }
    }
    pool
}

/// Generic qubit pool: all Pauli strings of weight 1 to 3 with an odd number
/// of Ys (the real anti-Hermitian generators `i P`). Does not preserve `S_z`;
/// used when the target subspace has no symmetry restriction. Weight-2 alone
/// is not enough: the pool gradient of `P` is the coefficient of `P` in
/// `i[H, rho]`, and partially trained ensembles routinely park the whole
/// commutator on weight-3 strings, stalling the scan far from the optimum.
pub fn pauli_pool(n_qubits: usize) -> Vec<PoolOperator> {
    let mut pool = Vec::new();
    let push = |pool: &mut Vec<PoolOperator>, s: PauliString| {
        let label = s.to_string();
        pool.push(PoolOperator::new(
            label,
            PauliSum::new(n_qubits).with_term(1.0, s),
            false,
        ));
    };
    const LETTERS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    for q in 0..n_qubits {
        push(&mut pool, PauliString::single(n_qubits, q, Pauli::Y));
    }
    for p in 0..n_qubits {
        for q in (p + 1)..n_qubits {
            for a in LETTERS {
                for b in LETTERS {
                    if (usize::from(a == Pauli::Y) + usize::from(b == Pauli::Y)) % 2 == 1 {
                        let s = PauliString::identity(n_qubits).with(p, a).with(q, b);
                        push(&mut pool, s);
                    }
                }
            }
        }
    }
    for p in 0..n_qubits {
        for q in (p + 1)..n_qubits {
            for r in (q + 1)..n_qubits {
                for a in LETTERS {
                    for b in LETTERS {
                        for c in LETTERS {
                            let ys = usize::from(a == Pauli::Y)
                                + usize::from(b == Pauli::Y)
                                + usize::from(c == Pauli::Y);
                            if ys % 2 == 1 {
                                let s = PauliString::identity(n_qubits)
                                    .with(p, a)
                                    .with(q, b)
                                    .with(r, c);
                                push(&mut pool, s);
                            }
                        }
                    }
                }
            }
        }
    }
    pool
}
