//! Single-particle matrices of the fermionized Lindbladian in one sector.

use crate::error::{Error, Result};
use crate::gauge::GaugeConfig;
use crate::graph::ColoredGraph;
use crate::linalg::compensated_sum;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::fmt::Write as _;

/// Hopping amplitude per unit coupling and gauge field.
///
/// With `H = −Σ J K_ij` and `K_ij = −i u_ij c_i c_j`, the coherent part
/// `−i[H, ·]` acts on each layer as `Σ J u_ij c_i c_j = ¼ Σ 𝔸_ij c_i c_j`
/// over ordered pairs, so `𝔸_ij = 2 J_ij u_ij`. Brute-force superoperator
/// spectra agree with this normalization sector by sector.
pub const HOPPING_SCALE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Parity,
    Number,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "parity" => Ok(Mode::Parity),
            "number" => Ok(Mode::Number),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Parity => "parity",
            Mode::Number => "number",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SingleParticleProblem {
    hopping: Array2<f64>,
    hopping_tilde: Array2<f64>,
    /// Diagonal of 𝔻: `2 γ_j v_j`.
    dissipation: Array1<f64>,
    gamma: Vec<f64>,
    interlayer: Vec<bool>,
    flips_u: usize,
    flips_v: usize,
    inert_twist: bool,
}

impl SingleParticleProblem {
    pub fn new(g: &ColoredGraph, gauge: &GaugeConfig, gamma: &[f64]) -> Result<Self> {
        let n = g.n();
        if gamma.len() != n {
            return Err(Error::Config(format!("{} dissipation rates for {n} sites", gamma.len())));
        }
        if let Some(bad) = gamma.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::Config(format!("dissipation rates must be finite and >= 0 (got {bad})")));
        }
        let mut hopping = Array2::zeros((n, n));
        let mut hopping_tilde = Array2::zeros((n, n));
        for (e, edge) in g.edges().iter().enumerate() {
            let a = HOPPING_SCALE * edge.coupling * f64::from(gauge.u(e));
            let at = HOPPING_SCALE * edge.coupling * f64::from(gauge.u_tilde(e));
            // parallel edges add up
            hopping[[edge.i, edge.j]] += a;
            hopping[[edge.j, edge.i]] -= a;
            hopping_tilde[[edge.i, edge.j]] += at;
            hopping_tilde[[edge.j, edge.i]] -= at;
        }
        let dissipation = Array1::from_shape_fn(n, |j| 2.0 * gamma[j] * f64::from(gauge.v(j)));
        Ok(SingleParticleProblem {
            hopping,
            hopping_tilde,
            dissipation,
            gamma: gamma.to_vec(),
            interlayer: (0..n).map(|j| gauge.v(j) > 0).collect(),
            flips_u: gauge.flips_u().len(),
            flips_v: gauge.flips_v().len(),
            inert_twist: gauge.inert_twist(),
        })
    }

    pub fn uniform(g: &ColoredGraph, gauge: &GaugeConfig, gamma: f64) -> Result<Self> {
        Self::new(g, gauge, &vec![gamma; g.n()])
    }

    pub fn n(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn hopping(&self) -> &Array2<f64> {
        &self.hopping
    }

    pub fn hopping_tilde(&self) -> &Array2<f64> {
        &self.hopping_tilde
    }

    pub fn dissipation(&self) -> &Array1<f64> {
        &self.dissipation
    }

    /// Which vertices carry an interlayer flip (`v_j = +1`).
    pub fn interlayer(&self) -> &[bool] {
        &self.interlayer
    }

    pub fn flip_counts(&self) -> (usize, usize) {
        (self.flips_u, self.flips_v)
    }

    pub fn inert_twist(&self) -> bool {
        self.inert_twist
    }

    /// `A₀ = Σ γ_j`.
    pub fn a0(&self) -> f64 {
        compensated_sum(self.gamma.iter().copied())
    }

    /// `L₀ = 2 Σ_{j ∈ 𝔙} γ_j`.
    pub fn l0(&self) -> f64 {
        2.0 * compensated_sum(self.gamma.iter().zip(&self.interlayer).filter(|(_, &f)| f).map(|(g, _)| *g))
    }

    pub fn number_conserving(&self) -> bool {
        self.flips_u == 0
    }

    /// The 2N×2N antisymmetric matrix in interleaved Majorana order
    /// `(c₁, c̃₁, …, c_N, c̃_N)`: blocks `𝔸`, `Ã` on the diagonal and
    /// `±i𝔻` coupling the layers.
    pub fn parity_matrix(&self) -> Array2<C64> {
        let n = self.n();
        let mut a = Array2::<C64>::zeros((2 * n, 2 * n));
        for i in 0..n {
            for j in 0..n {
                a[[2 * i, 2 * j]] = C64::from(self.hopping[[i, j]]);
                a[[2 * i + 1, 2 * j + 1]] = C64::from(self.hopping_tilde[[i, j]]);
            }
            let d = self.dissipation[i];
            a[[2 * i, 2 * i + 1]] = C64::new(0.0, d);
            a[[2 * i + 1, 2 * i]] = C64::new(0.0, -d);
        }
        a
    }

    /// Real matrix `[[𝔸, −𝔻], [−𝔻, Ã]]`, similar to the parity matrix via
    /// `diag(1, i)` on the layers and a permutation, so it has the same
    /// spectrum at the price of a real eigensolve.
    pub fn parity_real_form(&self) -> Array2<f64> {
        let n = self.n();
        let mut r = Array2::zeros((2 * n, 2 * n));
        r.slice_mut(ndarray::s![..n, ..n]).assign(&self.hopping);
        r.slice_mut(ndarray::s![n.., n..]).assign(&self.hopping_tilde);
        for j in 0..n {
            r[[j, n + j]] = -self.dissipation[j];
            r[[n + j, j]] = -self.dissipation[j];
        }
        r
    }

    /// The real form rotated by `(e_j ± s_j ẽ_j)/√2` with `s_j = −v_j`:
    /// `[[T, B], [B, W]]` with `T = ½(𝔸 + v vᵀ∘Ã) + diag(2γ)`,
    /// `W = ½(𝔸 + v vᵀ∘Ã) − diag(2γ)` and `B = ½(𝔸 − v vᵀ∘Ã)`. `B` lives
    /// on edges with weak flux `−1`, and `tr T = 2 Σ γ` exactly.
    pub fn parity_split_form(&self) -> Array2<f64> {
        let n = self.n();
        let v: Vec<f64> = self.interlayer.iter().map(|&f| if f { 1.0 } else { -1.0 }).collect();
        let mut m = Array2::zeros((2 * n, 2 * n));
        for i in 0..n {
            for j in 0..n {
                let (a, at) = (self.hopping[[i, j]], v[i] * v[j] * self.hopping_tilde[[i, j]]);
                let even = 0.5 * (a + at);
                let odd = 0.5 * (a - at);
                m[[i, j]] = even;
                m[[n + i, n + j]] = even;
                m[[i, n + j]] = odd;
                m[[n + i, j]] = odd;
            }
            m[[i, i]] = 2.0 * self.gamma[i];
            m[[n + i, n + i]] = -2.0 * self.gamma[i];
        }
        m
    }

    /// `𝕃 = 𝔸 + 𝔻`; only defined without intralayer flips.
    pub fn number_matrix(&self) -> Result<Array2<f64>> {
        if !self.number_conserving() {
            return Err(Error::Mode(self.flips_u));
        }
        let mut l = self.hopping.clone();
        for j in 0..self.n() {
            l[[j, j]] += self.dissipation[j];
        }
        Ok(l)
    }
}

/// Dumps a real matrix as CSV for debugging.
pub fn matrix_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Dumps a complex matrix as CSV with `re+imj` cells.
pub fn complex_matrix_csv(m: &Array2<C64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|z| format!("{}{:+}j", z.re, z.im)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GaugeConfig;
    use crate::graph::{build_lattice, ColoredGraph, LatticeKind};
    use crate::linalg::{eigvals_complex, eigvals_real, multiset_distance};
    use ndarray::array;

    fn dimer() -> ColoredGraph {
        ColoredGraph::from_pairs(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn dimer_number_matrix() {
        let g = dimer();
        let p = SingleParticleProblem::uniform(&g, &GaugeConfig::uniform(&g), 1.0).unwrap();
        let l = p.number_matrix().unwrap();
        assert_eq!(l, array![[-2.0, 2.0], [-2.0, -2.0]]);
        let ev = eigvals_real(&l).unwrap();
        assert!(multiset_distance(&ev, &[C64::new(-2.0, 2.0), C64::new(-2.0, -2.0)]) < 1e-12);
    }

    #[test]
    fn zero_coupling_is_pure_decay() {
        let g = build_lattice(LatticeKind::Square, 2, 4, true).unwrap().with_couplings(&[0.0; 16]).unwrap();
        let p = SingleParticleProblem::uniform(&g, &GaugeConfig::uniform(&g), 0.7).unwrap();
        let l = p.number_matrix().unwrap();
        assert_eq!(l, Array2::<f64>::eye(8) * -1.4);
    }

    #[test]
    fn interlayer_flip_sign() {
        let g = dimer();
        let gauge = GaugeConfig::from_parts(&g, vec![1], [].into(), [1].into(), false).unwrap();
        let p = SingleParticleProblem::new(&g, &gauge, &[0.5, 0.25]).unwrap();
        assert_eq!(p.dissipation()[1], 0.5);
        assert_eq!(p.dissipation()[0], -1.0);
        assert_eq!(p.l0(), 0.5);
    }

    #[test]
    fn intralayer_flips_forbid_number_mode() {
        let g = dimer();
        let gauge = GaugeConfig::from_parts(&g, vec![1], [0].into(), [].into(), false).unwrap();
        let p = SingleParticleProblem::uniform(&g, &gauge, 1.0).unwrap();
        assert!(matches!(p.number_matrix(), Err(Error::Mode(1))));
    }

    #[test]
    fn parity_matrix_structure() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, true).unwrap();
        let gauge = GaugeConfig::from_parts(&g, vec![1; 12], [3].into(), [2].into(), false).unwrap();
        let p = SingleParticleProblem::new(&g, &gauge, &[0.3, 1.0, 3.0, 0.1, 0.0, 2.0, 0.5, 0.7]).unwrap();
        let a = p.parity_matrix();
        assert_eq!(a.t().mapv(|z| -z), a);
        let ev_a = eigvals_complex(&a).unwrap();
        let ev_r = eigvals_real(&p.parity_real_form()).unwrap();
        assert!(multiset_distance(&ev_a, &ev_r) < 1e-10);

        let g0 = SingleParticleProblem::uniform(&g, &GaugeConfig::uniform(&g), 0.0).unwrap();
        assert!(g0.parity_matrix().iter().all(|z| z.im == 0.0));
    }
}
