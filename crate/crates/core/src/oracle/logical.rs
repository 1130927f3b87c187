//! Logical operators, Rényi correlators and the action of open strings on
//! steady states.

use super::sectors::{steady_residual, steady_state};
use super::{conjugate_by, left_multiply, right_multiply, ManyBodyModel, PauliString, StringEnd};
use crate::error::{Error, Result};
use crate::gauge::Flux;
use crate::graph::{ColoredGraph, Step};
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Which endpoint of a crossed edge carries the gamma matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Lower,
    Upper,
}

/// A path on the dual graph: the crossed edges, each with the site whose
/// gamma matrix enters `Z̄`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualPath {
    pub crossings: Vec<(usize, usize)>,
}

impl DualPath {
    pub fn along(g: &ColoredGraph, edges: &[usize], side: Endpoint) -> Self {
        let crossings = edges
            .iter()
            .map(|&e| {
                let edge = g.edge(e);
                (e, if side == Endpoint::Lower { edge.i } else { edge.j })
            })
            .collect();
        DualPath { crossings }
    }

    /// `Z̄ = Π Γ_i^{α(e)}` over the crossings.
    pub fn operator(&self, model: &ManyBodyModel) -> Result<PauliString> {
        let g = model.graph();
        self.crossings.iter().try_fold(PauliString::identity(model.qubits()), |acc, &(e, v)| {
            if !g.edge(e).touches(v) {
                return Err(Error::Graph(format!("site {v} is not an endpoint of edge {e}")));
            }
            Ok(acc.mul(&model.gamma_matrix(v, g.edge(e).color)?))
        })
    }

    /// Crossing parity with each noncontractible loop.
    fn homology(&self, g: &ColoredGraph) -> Vec<usize> {
        g.loops()
            .iter()
            .map(|l| self.crossings.iter().map(|&(e, _)| l.uses_edge(e)).sum::<usize>() % 2)
            .collect()
    }
}

/// `X̄_a = W_{ℓ_a}`.
pub fn logical_x(model: &ManyBodyModel, a: usize) -> Result<PauliString> {
    let l = model
        .graph()
        .loops()
        .get(a)
        .ok_or_else(|| Error::Graph(format!("no noncontractible loop #{a}")))?;
    model.closed_string(l.steps())
}

fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// `(Tr[ρ Z̄(x) Z̄(y)], Tr[ρ Z̄(x)Z̄(y) ρ Z̄(y)Z̄(x)] / Tr[ρ²])`.
pub fn renyi_correlators(model: &ManyBodyModel, rho: &Array2<C64>, x: &DualPath, y: &DualPath) -> Result<(C64, C64)> {
    let g = model.graph();
    if x.homology(g) != y.homology(g) {
        return Err(Error::Graph("dual paths are not homologous".into()));
    }
    let zx = x.operator(model)?;
    let zy = y.operator(model)?;
    let pair = zx.mul(&zy);
    let reverse = zy.mul(&zx);
    let charged = left_multiply(&pair, rho);
    let r1 = trace(&charged);
    let numerator = trace(&right_multiply(&reverse, &charged.dot(rho)));
    let r2 = numerator / trace(&rho.dot(rho));
    Ok((r1, r2))
}

/// Outcome of the operator-level checks of how strings act on a steady
/// state; every field is a residual or a pass flag.
#[derive(Debug, Clone, PartialEq)]
pub struct StringActionReport {
    /// `‖W_C ρ − w_C ρ‖` and `‖ρ W_C − w_C ρ‖`, worst over basis cycles.
    pub closed_string_residual: f64,
    /// `W^{μ0} ρ W^{μ0†}` is the steady state with the fluxes predicted by
    /// commutation, and at least one flux changed.
    pub adjoint_open_residual: f64,
    pub adjoint_open_flips: usize,
    /// Right multiplication keeps left fluxes but changes some right flux.
    pub right_action_splits: bool,
    /// Chiral strings flip the weak flux of exactly the edges at an odd
    /// number of their endpoints.
    pub chiral_weak_flips_match: bool,
    /// Pure strings keep every flux label and decay under `𝓛`.
    pub pure_string_same_sector: bool,
    pub pure_string_decay_rate: f64,
    /// Site dissipator applied to `Γ_j^ch ρ`.
    pub chiral_site_dissipator: f64,
}

fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalue of `σ ↦ Wσ` (or `σW`) if `σ` is an eigenoperator.
fn eigen_factor(sigma: &Array2<C64>, moved: &Array2<C64>) -> Option<C64> {
    let (k, _) = sigma.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    let f = moved.iter().nth(k)? / sigma.iter().nth(k)?;
    let scale = max_abs(sigma).max(f64::MIN_POSITIVE);
    let residual = moved.iter().zip(sigma).map(|(m, s)| (m - f * s).norm()).fold(0.0, f64::max);
    (residual <= 1e-10 * scale).then_some(f)
}

/// Operator-level checks on the steady state `ρ_w`, using the open walk
/// `path` (at least one step, endpoints of valence two or more).
pub fn string_action_tests(model: &ManyBodyModel, cycle_flux: &[Flux], path: &[Step]) -> Result<StringActionReport> {
    let g = model.graph();
    let rho = steady_state(model, cycle_flux)?;
    let basis: Vec<PauliString> =
        model.cycle_basis().iter().map(|c| model.closed_string(c.steps())).collect::<Result<_>>()?;

    let mut closed_string_residual = 0.0f64;
    for (w, wc) in cycle_flux.iter().zip(&basis) {
        let target = rho.mapv(|z| z * w.to_complex());
        closed_string_residual = closed_string_residual
            .max(max_abs(&(left_multiply(wc, &rho) - &target)))
            .max(max_abs(&(right_multiply(wc, &rho) - &target)));
    }

    let start = path.first().ok_or_else(|| Error::Graph("empty path".into()))?.tail(g);
    let end = path.last().expect("non-empty").head(g);
    let other_color = |v: usize, step: &Step| {
        g.incident(v)
            .iter()
            .map(|&e| g.edge(e).color)
            .find(|&c| c != g.edge(step.edge).color)
            .ok_or_else(|| Error::Graph(format!("site {v} has no second color for a string end")))
    };
    let mu = other_color(start, &path[0])?;

    // A second colored end can close the string into a loop on small
    // graphs, so the far end carries the identity.
    let open = model.open_string(path, StringEnd::Color(mu), StringEnd::Identity)?;
    let flipped: Vec<Flux> = cycle_flux
        .iter()
        .zip(&basis)
        .map(|(&w, wc)| if open.commutes_with(wc) { w } else { w.neg() })
        .collect();
    let adjoint_open_flips = flipped.iter().zip(cycle_flux).filter(|(a, b)| a != b).count();
    let moved = conjugate_by(&open, &rho);
    let adjoint_open_residual = max_abs(&(&moved - &steady_state(model, &flipped)?)).max(steady_residual(model, &moved));

    let right = right_multiply(&open, &rho);
    let mut left_kept = true;
    let mut right_changed = false;
    for (w, wc) in cycle_flux.iter().zip(&basis) {
        left_kept &= eigen_factor(&right, &left_multiply(wc, &right)).is_some_and(|f| (f - w.to_complex()).norm() < 1e-10);
        right_changed |= eigen_factor(&right, &right_multiply(wc, &right)).is_some_and(|f| (f - w.to_complex()).norm() > 1e-6);
    }

    let chiral = model.open_string(path, StringEnd::Chiral, StringEnd::Chiral)?;
    let excited = left_multiply(&chiral, &rho);
    let mut chiral_weak_flips_match = true;
    for q in 0..g.num_edges() {
        let edge = g.edge(q);
        let ends = [start, end];
        let touches = ends.iter().filter(|&&v| edge.touches(v)).count()
            - usize::from(start == end && edge.touches(start));
        let expect = if touches % 2 == 1 { -1.0 } else { 1.0 };
        let f = eigen_factor(&excited, &conjugate_by(&model.weak_string(q), &excited));
        chiral_weak_flips_match &= f.is_some_and(|f| (f - C64::from(expect)).norm() < 1e-10);
    }

    let pure = model.open_string(path, StringEnd::Identity, StringEnd::Identity)?;
    let sigma = left_multiply(&pure, &rho);
    let mut same = true;
    for (w, wc) in cycle_flux.iter().zip(&basis) {
        same &= eigen_factor(&sigma, &left_multiply(wc, &sigma)).is_some_and(|f| (f - w.to_complex()).norm() < 1e-10);
    }
    for q in 0..g.num_edges() {
        same &= eigen_factor(&sigma, &conjugate_by(&model.weak_string(q), &sigma))
            .is_some_and(|f| (f - C64::from(1.0)).norm() < 1e-10);
    }
    let l_sigma = model.apply_lindbladian(&sigma);
    let overlap: C64 = sigma.iter().zip(&l_sigma).map(|(a, b)| a.conj() * b).sum();
    let norm: f64 = sigma.iter().map(|z| z.norm_sqr()).sum();
    let pure_string_decay_rate = -overlap.re / norm;

    let site = start;
    let ch = model.chiral(site);
    let tau = left_multiply(&ch, &rho);
    let site_term = (conjugate_by(&ch, &tau) - &tau).mapv(|z| z * model.gamma()[site]);

    Ok(StringActionReport {
        closed_string_residual,
        adjoint_open_residual,
        adjoint_open_flips,
        right_action_splits: left_kept && right_changed,
        chiral_weak_flips_match,
        pure_string_same_sector: same,
        pure_string_decay_rate,
        chiral_site_dissipator: max_abs(&site_term),
    })
}
