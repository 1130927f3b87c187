//! Pauli strings: every gamma-matrix product in the model is one, so the
//! oracle multiplies them symbolically and only densifies at the end.

use ndarray::Array2;
use num_complex::Complex64 as C64;

pub const I: u8 = 0;
pub const X: u8 = 1;
pub const Y: u8 = 2;
pub const Z: u8 = 3;

/// `i^phase · P₀ ⊗ P₁ ⊗ …`, qubit 0 being the most significant tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: u8,
    ops: Vec<u8>,
}

fn mul_single(a: u8, b: u8) -> (u8, u8) {
    match (a, b) {
        (I, _) => (0, b),
        (_, I) => (0, a),
        _ if a == b => (0, I),
        (X, Y) | (Y, Z) | (Z, X) => (1, 6 - a - b),
        _ => (3, 6 - a - b),
    }
}

impl PauliString {
    pub fn identity(qubits: usize) -> Self {
        PauliString { phase: 0, ops: vec![I; qubits] }
    }

    pub fn single(qubits: usize, at: usize, op: u8) -> Self {
        let mut s = Self::identity(qubits);
        s.ops[at] = op;
        s
    }

    pub fn from_ops(phase: u8, ops: Vec<u8>) -> Self {
        PauliString { phase: phase % 4, ops }
    }

    pub fn qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[u8] {
        &self.ops
    }

    pub fn coefficient(&self) -> C64 {
        C64::i().powi(i32::from(self.phase))
    }

    pub fn scaled(mut self, quarter_turns: u8) -> Self {
        self.phase = (self.phase + quarter_turns) % 4;
        self
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        debug_assert_eq!(self.ops.len(), other.ops.len());
        let mut phase = self.phase + other.phase;
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (p, c) = mul_single(a, b);
                phase += p;
                c
            })
            .collect();
        PauliString { phase: phase % 4, ops }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let clashes = self.ops.iter().zip(&other.ops).filter(|&(&a, &b)| a != I && b != I && a != b).count();
        clashes % 2 == 0
    }

    pub fn adjoint(&self) -> PauliString {
        PauliString { phase: (4 - self.phase) % 4, ops: self.ops.clone() }
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Action on a computational basis state: `P|b⟩ = c|b'⟩`.
    pub fn apply_basis(&self, b: usize) -> (usize, C64) {
        let n = self.ops.len();
        let mut out = b;
        let mut quarter = u32::from(self.phase);
        let mut negative = false;
        for (q, &op) in self.ops.iter().enumerate() {
            let bit = (b >> (n - 1 - q)) & 1;
            match op {
                X => out ^= 1 << (n - 1 - q),
                Y => {
                    out ^= 1 << (n - 1 - q);
                    quarter += 1;
                    negative ^= bit == 1;
                }
                Z => negative ^= bit == 1,
                _ => {}
            }
        }
        let c = C64::i().powu(quarter % 4);
        (out, if negative { -c } else { c })
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let d = 1usize << self.ops.len();
        let mut m = Array2::zeros((d, d));
        for b in 0..d {
            let (r, c) = self.apply_basis(b);
            m[[r, b]] = c;
        }
        m
    }

    /// The string as a monomial map on basis states: `(images, factors)`.
    pub fn monomial(&self) -> (Vec<usize>, Vec<C64>) {
        (0..1usize << self.ops.len()).map(|b| self.apply_basis(b)).unzip()
    }
}
