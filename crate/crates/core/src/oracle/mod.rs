//! Brute-force many-body ground truth for tiny graphs: explicit gamma
//! matrices, Hamiltonian, jump operators and the vectorized Lindbladian.
//!
//! Each site `j` of valence `z` carries `k = ⌈z/2⌉` qubits. Its incident
//! colors, sorted, are relabeled `1..z` locally and mapped to the Clifford
//! generators `Z^{⊗(m−1)} ⊗ X` and `Z^{⊗(m−1)} ⊗ Y` on qubit `m`; the chiral
//! element is `i^k Γ¹⋯Γ^{2k} = (−1)^k Z^{⊗k}`.

mod logical;
mod pauli;
mod sectors;

pub use logical::{logical_x, renyi_correlators, string_action_tests, DualPath, Endpoint, StringActionReport};
pub use pauli::PauliString;
pub use sectors::{
    free_fermion_spectrum, free_fermion_union, full_spectrum, oracle_sectors, sector_spectrum, steady_space,
    steady_state, OracleSector, SteadySpace,
};

use crate::error::{Error, Result};
use crate::graph::{check_closed, ColoredGraph, Cycle, Step};
use ndarray::linalg::kron;
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Operators are built up to this many qubits (dimension 256).
pub const MAX_OPERATOR_QUBITS: usize = 8;
/// Superoperator spectra are computed up to this many qubits (4096×4096).
pub const MAX_SUPEROPERATOR_QUBITS: usize = 6;

/// What terminates an open string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringEnd {
    Identity,
    Color(u32),
    Chiral,
}

#[derive(Debug, Clone)]
pub struct ManyBodyModel {
    graph: ColoredGraph,
    gamma: Vec<f64>,
    offset: Vec<usize>,
    colors: Vec<Vec<u32>>,
    qubits: usize,
    edge_ops: Vec<PauliString>,
    hamiltonian: Array2<C64>,
}

pub fn build_model(g: &ColoredGraph, gamma: &[f64]) -> Result<ManyBodyModel> {
    if gamma.len() != g.n() {
        return Err(Error::Config(format!("{} dissipation rates for {} sites", gamma.len(), g.n())));
    }
    let mut offset = Vec::with_capacity(g.n());
    let mut colors = Vec::with_capacity(g.n());
    let mut qubits = 0;
    for j in 0..g.n() {
        offset.push(qubits);
        let mut c: Vec<u32> = g.incident(j).iter().map(|&e| g.edge(e).color).collect();
        c.sort_unstable();
        qubits += c.len().div_ceil(2);
        colors.push(c);
    }
    if qubits > MAX_OPERATOR_QUBITS {
        return Err(Error::OracleLimit(format!(
            "{qubits} qubits exceed the operator limit of {MAX_OPERATOR_QUBITS}"
        )));
    }
    let mut model = ManyBodyModel {
        graph: g.clone(),
        gamma: gamma.to_vec(),
        offset,
        colors,
        qubits,
        edge_ops: Vec::new(),
        hamiltonian: Array2::zeros((0, 0)),
    };
    model.edge_ops = g
        .edges()
        .iter()
        .map(|e| Ok(model.gamma_matrix(e.i, e.color)?.mul(&model.gamma_matrix(e.j, e.color)?)))
        .collect::<Result<_>>()?;
    let d = model.dim();
    let mut h = Array2::<C64>::zeros((d, d));
    for (edge, k) in g.edges().iter().zip(&model.edge_ops) {
        h.scaled_add(C64::from(-edge.coupling), &k.to_dense());
    }
    model.hamiltonian = h;
    Ok(model)
}

impl ManyBodyModel {
    pub fn graph(&self) -> &ColoredGraph {
        &self.graph
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn site_qubits(&self, j: usize) -> usize {
        self.colors[j].len().div_ceil(2)
    }

    /// Local generator `Γ^{r+1}` of site `j`, `r < 2k`.
    pub fn generator(&self, j: usize, r: usize) -> PauliString {
        let mut ops = vec![pauli::I; self.qubits];
        let m = r / 2;
        for q in 0..m {
            ops[self.offset[j] + q] = pauli::Z;
        }
        ops[self.offset[j] + m] = if r % 2 == 0 { pauli::X } else { pauli::Y };
        PauliString::from_ops(0, ops)
    }

    /// The generator paired with `color` at site `j`.
    pub fn gamma_matrix(&self, j: usize, color: u32) -> Result<PauliString> {
        let r = self.colors[j]
            .iter()
            .position(|&c| c == color)
            .ok_or_else(|| Error::Graph(format!("no edge of color {color} at site {j}")))?;
        Ok(self.generator(j, r))
    }

    pub fn chiral(&self, j: usize) -> PauliString {
        let k = self.site_qubits(j);
        let mut ops = vec![pauli::I; self.qubits];
        for q in 0..k {
            ops[self.offset[j] + q] = pauli::Z;
        }
        PauliString::from_ops(if k % 2 == 1 { 2 } else { 0 }, ops)
    }

    pub fn edge_operator(&self, e: usize) -> &PauliString {
        &self.edge_ops[e]
    }

    pub fn hamiltonian(&self) -> &Array2<C64> {
        &self.hamiltonian
    }

    /// `W_C`: edge operators multiplied in walk order.
    pub fn closed_string(&self, steps: &[Step]) -> Result<PauliString> {
        check_closed(&self.graph, steps)?;
        Ok(self.product(steps))
    }

    fn product(&self, steps: &[Step]) -> PauliString {
        steps.iter().fold(PauliString::identity(self.qubits), |acc, s| acc.mul(&self.edge_ops[s.edge]))
    }

    fn end_operator(&self, j: usize, end: StringEnd) -> Result<PauliString> {
        match end {
            StringEnd::Identity => Ok(PauliString::identity(self.qubits)),
            StringEnd::Color(c) => self.gamma_matrix(j, c),
            StringEnd::Chiral => Ok(self.chiral(j)),
        }
    }

    /// `W_P^{μν} = Γ^μ_{start} K⋯K Γ^ν_{end}` along a connected walk.
    pub fn open_string(&self, steps: &[Step], start: StringEnd, end: StringEnd) -> Result<PauliString> {
        let (first, last) = match (steps.first(), steps.last()) {
            (Some(f), Some(l)) => (f.tail(&self.graph), l.head(&self.graph)),
            _ => return Err(Error::Graph("an open string needs at least one step".into())),
        };
        for w in steps.windows(2) {
            if w[0].head(&self.graph) != w[1].tail(&self.graph) {
                return Err(Error::Graph(format!("steps on edges {} and {} do not connect", w[0].edge, w[1].edge)));
            }
        }
        let body = self.product(steps);
        Ok(self.end_operator(first, start)?.mul(&body).mul(&self.end_operator(last, end)?))
    }

    /// Weak-symmetry generator on one edge, `Γ_i^ch K_ij Γ_j^ch`.
    pub fn weak_string(&self, e: usize) -> PauliString {
        let edge = self.graph.edge(e);
        self.chiral(edge.i).mul(&self.edge_ops[e]).mul(&self.chiral(edge.j))
    }

    /// Plaquettes (the last one dropped on closed surfaces) followed by
    /// noncontractible loops: an independent basis of the cycle space.
    pub fn cycle_basis(&self) -> Vec<&Cycle> {
        let g = &self.graph;
        let mut p: Vec<&Cycle> = g.plaquettes().iter().collect();
        if g.surface().is_closed() {
            p.pop();
        }
        p.extend(g.loops());
        p
    }

    /// `𝓛(ρ) = −i[H, ρ] + Σ γ_j (Γ_j^ch ρ Γ_j^ch − ρ)` on a density matrix.
    pub fn apply_lindbladian(&self, rho: &Array2<C64>) -> Array2<C64> {
        let h = &self.hamiltonian;
        let mut out = (h.dot(rho) - rho.dot(h)).mapv(|z| z * C64::new(0.0, -1.0));
        for (j, &g) in self.gamma.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let conj = conjugate_by(&self.chiral(j), rho);
            out.scaled_add(C64::from(g), &(conj - rho));
        }
        out
    }

    /// Row-major vectorized Lindbladian,
    /// `−i(H⊗1 − 1⊗Hᵀ) + Σ (L⊗L̄ − ½L†L⊗1 − ½1⊗(L†L)ᵀ)`.
    pub fn superoperator(&self) -> Result<Array2<C64>> {
        if self.qubits > MAX_SUPEROPERATOR_QUBITS {
            return Err(Error::OracleLimit(format!(
                "superoperator of {} qubits exceeds the limit of {MAX_SUPEROPERATOR_QUBITS}",
                self.qubits
            )));
        }
        let d = self.dim();
        let id = Array2::<C64>::eye(d);
        let h = &self.hamiltonian;
        let mut s = (kron(h, &id) - kron(&id, &h.t())).mapv(|z| z * C64::new(0.0, -1.0));
        for (j, &g) in self.gamma.iter().enumerate() {
            let l = self.chiral(j).to_dense().mapv(|z| z * g.sqrt());
            let ldl = l.t().mapv(|z| z.conj()).dot(&l);
            s = s + kron(&l, &l.mapv(|z| z.conj())) - kron(&ldl, &id) * 0.5 - kron(&id, &ldl.t()) * 0.5;
        }
        Ok(s)
    }
}

/// `P ρ P†` for a Pauli string `P`, done as a signed permutation.
pub(crate) fn conjugate_by(p: &PauliString, rho: &Array2<C64>) -> Array2<C64> {
    let (image, factor) = p.monomial();
    let d = image.len();
    let mut out = Array2::zeros((d, d));
    for m in 0..d {
        for n in 0..d {
            out[[image[m], image[n]]] = factor[m] * factor[n].conj() * rho[[m, n]];
        }
    }
    out
}

/// `P ρ` for a Pauli string `P`.
pub(crate) fn left_multiply(p: &PauliString, rho: &Array2<C64>) -> Array2<C64> {
    let (image, factor) = p.monomial();
    let mut out = Array2::zeros(rho.raw_dim());
    for (m, row) in rho.rows().into_iter().enumerate() {
        out.row_mut(image[m]).assign(&row.mapv(|z| z * factor[m]));
    }
    out
}

/// `ρ P` for a Pauli string `P`.
pub(crate) fn right_multiply(p: &PauliString, rho: &Array2<C64>) -> Array2<C64> {
    // (ρP)ᵢⱼ = Σₖ ρᵢₖ Pₖⱼ and P|j⟩ = f_j |image_j⟩.
    let (image, factor) = p.monomial();
    let mut out = Array2::zeros(rho.raw_dim());
    for (j, (&k, &f)) in image.iter().zip(&factor).enumerate() {
        out.column_mut(j).assign(&rho.column(k).mapv(|z| z * f));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice, ring, LatticeKind};

    fn anticommute(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        (a.dot(b) + b.dot(a)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn triangle_is_spin_half() {
        let m = build_model(&ring(3).unwrap(), &[1.0; 3]).unwrap();
        assert_eq!(m.dim(), 8);
        for j in 0..3 {
            let (g1, g2, ch) = (m.generator(j, 0).to_dense(), m.generator(j, 1).to_dense(), m.chiral(j).to_dense());
            assert!(anticommute(&g1, &g2) < 1e-15);
            assert!(anticommute(&g1, &ch) < 1e-15 && anticommute(&g2, &ch) < 1e-15);
            let prod = g1.dot(&g2).mapv(|z| z * C64::i());
            assert!((prod - &ch).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn clifford_relations_at_valence_four() {
        let g = build_lattice(LatticeKind::Square, 2, 2, true).unwrap();
        let m = build_model(&g, &[1.0; 4]).unwrap();
        assert_eq!(m.qubits(), 8);
        let gens: Vec<PauliString> = (0..4).map(|r| m.generator(1, r)).collect();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(gens[a].commutes_with(&gens[b]), a == b);
            }
            assert!(!gens[a].commutes_with(&m.chiral(1)));
            assert!(gens[a].commutes_with(&m.generator(2, a)));
        }
        let all = gens.iter().fold(PauliString::identity(8), |acc, x| acc.mul(x)).scaled(2);
        assert_eq!(all, m.chiral(1));
    }

    #[test]
    fn edge_operator_sign_rule() {
        let g = build_lattice(LatticeKind::Square, 2, 2, true).unwrap();
        let m = build_model(&g, &[1.0; 4]).unwrap();
        for a in 0..g.num_edges() {
            for b in 0..g.num_edges() {
                let (ea, eb) = (g.edge(a), g.edge(b));
                let shared = usize::from(ea.i == eb.i) + usize::from(ea.j == eb.j)
                    + usize::from(ea.i == eb.j) + usize::from(ea.j == eb.i);
                let expect = a == b || shared % 2 == 0;
                assert_eq!(m.edge_operator(a).commutes_with(m.edge_operator(b)), expect, "{a} {b}");
            }
        }
    }

    #[test]
    fn closed_strings_commute_with_everything() {
        let g = ring(4).unwrap();
        let m = build_model(&g, &[0.5; 4]).unwrap();
        let w = m.closed_string(g.plaquettes()[0].steps()).unwrap();
        for e in 0..4 {
            assert!(w.commutes_with(m.edge_operator(e)));
        }
        for j in 0..4 {
            assert!(w.commutes_with(&m.chiral(j)));
        }
        let h = m.hamiltonian();
        let wd = w.to_dense();
        assert!((h.dot(&wd) - wd.dot(h)).iter().all(|z| z.norm() < 1e-12));
        let open = m.open_string(&g.plaquettes()[0].steps()[..2], StringEnd::Identity, StringEnd::Identity).unwrap();
        let od = open.to_dense();
        assert!((h.dot(&od) - od.dot(h)).iter().any(|z| z.norm() > 1e-3));
        let chiral = m.open_string(&g.plaquettes()[0].steps()[..2], StringEnd::Chiral, StringEnd::Chiral).unwrap();
        assert!((0..4).all(|e| chiral.commutes_with(m.edge_operator(e))));
    }

    #[test]
    fn hamiltonian_hermitian_and_superoperator_trace_preserving() {
        let g = ring(4).unwrap();
        let m = build_model(&g, &[0.3, 1.0, 3.0, 0.3]).unwrap();
        let h = m.hamiltonian();
        assert!((h - &h.t().mapv(|z| z.conj())).iter().all(|z| z.norm() < 1e-14));
        let s = m.superoperator().unwrap();
        let d = m.dim();
        for col in 0..d * d {
            let tr: C64 = (0..d).map(|k| s[[k * d + k, col]]).sum();
            assert!(tr.norm() < 1e-12);
        }
        let rho = Array2::from_shape_fn((d, d), |(a, b)| C64::new((a * 3 + b) as f64 % 5.0, (a as f64 - b as f64) * 0.1));
        let vec_rho = Array2::from_shape_vec((d * d, 1), rho.iter().copied().collect()).unwrap();
        let via_super = s.dot(&vec_rho);
        let direct = m.apply_lindbladian(&rho);
        let diff = direct.iter().zip(via_super.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
    }

    #[test]
    fn monomial_products_match_dense() {
        let g = ring(3).unwrap();
        let m = build_model(&g, &[1.0; 3]).unwrap();
        let p = m.edge_operator(1).mul(&m.chiral(0));
        let pd = p.to_dense();
        let rho = Array2::from_shape_fn((8, 8), |(a, b)| C64::new(a as f64, b as f64 * 0.5));
        let close = |a: &Array2<C64>, b: &Array2<C64>| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12);
        assert!(close(&left_multiply(&p, &rho), &pd.dot(&rho)));
        assert!(close(&right_multiply(&p, &rho), &rho.dot(&pd)));
        let pdag = pd.t().mapv(|z| z.conj());
        assert!(close(&conjugate_by(&p, &rho), &pd.dot(&rho).dot(&pdag)));
    }

    #[test]
    fn rejects_large_graphs() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, true).unwrap();
        assert!(matches!(build_model(&g, &[1.0; 8]), Err(Error::OracleLimit(_))));
    }
}
