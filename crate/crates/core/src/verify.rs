//! Self-checks behind the CLI's `verify` command.
//!
//! The measurement functions return raw statistics and leave thresholds to
//! the caller, so the acceptance suite can pin its own tolerances on the
//! same measurements.

use crate::error::{Error, Result};
use crate::gauge::{random_sector, realize_fluxes, Flux, GaugeConfig};
use crate::graph::{build_lattice, ring, ColoredGraph, LatticeKind};
use crate::linalg::{clustered_multiset_distance, multiset_distance};
use crate::number::{bendixson_bounds, flipset_upper_bound, solve_number};
use crate::oracle::{
    build_model, free_fermion_union, full_spectrum, renyi_correlators, steady_space, steady_state, DualPath,
    Endpoint,
};
use crate::parity::{solve_parity, SolveOptions};
use crate::pfaffian::pfaffian;
use crate::quadratic::SingleParticleProblem;
use ndarray::Array2;
use ndarray_linalg::{Determinant, Scalar};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::Config(format!("unknown verify level '{other}' (fast or full)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Cluster width for comparing spectra with defective eigenvalues.
pub const ORACLE_CLUSTER: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct OracleCase {
    pub sites: usize,
    pub gamma: Vec<f64>,
    pub counts_match: bool,
    /// Worst difference of cluster means.
    pub clustered: f64,
    /// Greedy nearest-neighbour matching of raw eigenvalues.
    pub raw: f64,
}

/// Triangle and 4-cycle with uniform rates 0.3, 1 and 3 and one mixed
/// assignment each.
pub fn standard_oracle_cases() -> Vec<(usize, Vec<f64>)> {
    let mut cases = Vec::new();
    for sites in [3, 4] {
        for gamma in [0.3, 1.0, 3.0] {
            cases.push((sites, vec![gamma; sites]));
        }
        cases.push((sites, [0.3, 1.0, 3.0, 1.0][..sites].to_vec()));
    }
    cases
}

/// Brute-force superoperator spectrum against the union of free-fermion
/// sector spectra, on rings.
pub fn oracle_cases(cases: &[(usize, Vec<f64>)], cluster_tol: f64) -> Result<Vec<OracleCase>> {
    cases
        .iter()
        .map(|(sites, gamma)| {
            let g = ring(*sites)?;
            let model = build_model(&g, gamma)?;
            let brute = full_spectrum(&model)?;
            let free = free_fermion_union(&model)?;
            Ok(OracleCase {
                sites: *sites,
                gamma: gamma.clone(),
                counts_match: brute.len() == free.len(),
                clustered: clustered_multiset_distance(&brute, &free, cluster_tol),
                raw: multiset_distance(&brute, &free),
            })
        })
        .collect()
}

/// Connected graph: a random spanning tree plus up to `n` extra edges,
/// valence capped at `max_degree`, couplings uniform in `[−2, 2]`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, max_degree: usize) -> Result<ColoredGraph> {
    if n < 2 || max_degree < 2 {
        return Err(Error::Graph(format!("need n >= 2 and max_degree >= 2 (got {n}, {max_degree})")));
    }
    let mut deg = vec![0usize; n];
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    let mut add = |i: usize, j: usize, deg: &mut [usize], rng: &mut R| {
        let key = (i.min(j), i.max(j));
        if i != j && deg[i] < max_degree && deg[j] < max_degree && seen.insert(key) {
            deg[i] += 1;
            deg[j] += 1;
            pairs.push((key.0, key.1, rng.gen_range(-2.0..2.0)));
        }
    };
    for v in 1..n {
        let open: Vec<usize> = (0..v).filter(|&w| deg[w] < max_degree).collect();
        let w = open[rng.gen_range(0..open.len())];
        add(v, w, &mut deg, rng);
    }
    for _ in 0..n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        add(i, j, &mut deg, rng);
    }
    ColoredGraph::from_pairs(n, &pairs)
}

#[derive(Debug, Clone, Copy)]
pub struct SumRuleStats {
    pub graphs: usize,
    pub odd_valence: usize,
    pub sectors: usize,
    /// Worst `|Σβ/2 − Σγ| / Σγ`.
    pub max_rel: f64,
    /// Worst `|gap| / Σγ`.
    pub max_gap_rel: f64,
    pub all_physical: bool,
}

/// Steady-state sectors (no flips, random gauge field) on random graphs
/// with 4 to `max_sites` vertices and random rates.
pub fn sum_rule_stats(graphs: usize, max_sites: usize, sectors_per_graph: usize, seed: u64) -> Result<SumRuleStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st =
        SumRuleStats { graphs, odd_valence: 0, sectors: 0, max_rel: 0.0, max_gap_rel: 0.0, all_physical: true };
    for _ in 0..graphs {
        let n = rng.gen_range(4..=max_sites.max(4));
        let max_degree = rng.gen_range(2..=5);
        let g = random_connected_graph(&mut rng, n, max_degree)?;
        st.odd_valence += usize::from((0..n).any(|v| g.degree(v) % 2 == 1));
        let gamma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..3.0)).collect();
        let total: f64 = gamma.iter().sum();
        for _ in 0..sectors_per_graph {
            let u: Vec<i8> = (0..g.num_edges()).map(|_| if rng.gen() { 1 } else { -1 }).collect();
            let gauge = GaugeConfig::from_parts(&g, u, BTreeSet::new(), BTreeSet::new(), false)?;
            let p = SingleParticleProblem::new(&g, &gauge, &gamma)?;
            let sol = solve_parity(&p, &SolveOptions::default())?;
            let half_sum: C64 = sol.spectrum.beta.iter().sum::<C64>() / 2.0;
            st.max_rel = st.max_rel.max((half_sum.re - total).abs() / total);
            st.max_gap_rel = st.max_gap_rel.max(sol.gap.abs() / total);
            st.all_physical &= sol.verdict.vacuum_physical;
            st.sectors += 1;
        }
    }
    Ok(st)
}

fn random_antisymmetric<T: Scalar>(rng: &mut ChaCha8Rng, dim: usize, mut draw: impl FnMut(&mut ChaCha8Rng) -> T) -> Array2<T> {
    let mut m = Array2::from_elem((dim, dim), T::zero());
    for i in 0..dim {
        for j in i + 1..dim {
            let x = draw(rng);
            m[[i, j]] = x;
            m[[j, i]] = -x;
        }
    }
    m
}

/// Worst `|Pf² − det| / |det|` over `count` random antisymmetric matrices
/// of even dimension 4 to 16, alternating real and complex entries.
pub fn pfaffian_square_error(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..count {
        let dim = 2 * rng.gen_range(2..=8);
        let rel = if k % 2 == 0 {
            let m = random_antisymmetric(&mut rng, dim, |r| r.gen_range(-1.0..1.0));
            let (pf, det) = (pfaffian(&m)?, m.det()?);
            (pf * pf - det).abs() / det.abs()
        } else {
            let m = random_antisymmetric(&mut rng, dim, |r| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            let (pf, det) = (pfaffian(&m)?, m.det()?);
            (pf * pf - det).norm() / det.norm()
        };
        worst = worst.max(rel);
    }
    Ok(worst)
}

pub fn odd_pfaffian_rejected() -> bool {
    matches!(pfaffian(&Array2::<f64>::zeros((5, 5))), Err(Error::OddDimension(5)))
}

#[derive(Debug, Clone, Copy)]
pub struct RenyiStats {
    pub states: usize,
    pub max_r1: f64,
    /// Worst `|r2 − 1|`.
    pub max_r2_dev: f64,
}

/// Rényi-1 and Rényi-2 correlators between homologous dual loops, along
/// both axes of the 2×2 square torus, for every steady state.
pub fn torus_renyi_stats() -> Result<RenyiStats> {
    let g = build_lattice(LatticeKind::Square, 2, 2, true)?;
    let model = build_model(&g, &[1.0; 4])?;
    let geo = g.geometry().ok_or_else(|| Error::Lattice("built-in lattice without geometry".into()))?;
    let basis = model.cycle_basis().len();
    let mut st = RenyiStats { states: 0, max_r1: 0.0, max_r2_dev: 0.0 };
    for bits in 0..1u32 << basis {
        let fluxes: Vec<Flux> =
            (0..basis).map(|k| if bits >> k & 1 == 1 { Flux::MINUS_ONE } else { Flux::ONE }).collect();
        let rho = steady_state(&model, &fluxes)?;
        for axis in 0..2 {
            let x = DualPath::along(&g, &geo.seam(axis, 0), Endpoint::Lower);
            let y = DualPath::along(&g, &geo.seam(axis, 1), Endpoint::Upper);
            let (r1, r2) = renyi_correlators(&model, &rho, &x, &y)?;
            st.max_r1 = st.max_r1.max(r1.norm());
            st.max_r2_dev = st.max_r2_dev.max((r2 - 1.0).norm());
        }
        st.states += 1;
    }
    Ok(st)
}

/// `(sites, null-space dimension, 2^{E−N+1})` for the triangle and 4-cycle.
pub fn steady_counts() -> Result<Vec<(usize, usize, usize)>> {
    [3usize, 4]
        .iter()
        .map(|&n| {
            let g = ring(n)?;
            let model = build_model(&g, &vec![0.7; n])?;
            Ok((n, steady_space(&model)?.dimension, 1usize << (g.num_edges() + 1 - g.n())))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ContainmentStats {
    pub points: usize,
    /// Gaps outside the Bendixson bounds by more than the slack.
    pub outside: usize,
    pub worst_excess: f64,
    /// Same against the upper bound that maximizes over flipped sites only.
    pub outside_flipset: usize,
    pub worst_flipset_excess: f64,
}

/// Number-mode gaps for `n ∈ {1, 3}` with random flux, couplings uniform in
/// `[−2, 2]`, rates `γ X_j` with `X_j` uniform in `[0, 2]` and one or three
/// interlayer flips. `slack` is relative to `max(γ, 1)`.
pub fn bendixson_containment(
    lattices: &[ColoredGraph],
    samples_per_lattice: usize,
    gammas: &[f64],
    slack: f64,
    seed: u64,
) -> Result<ContainmentStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = ContainmentStats::default();
    let opts = SolveOptions::without_conditioning();
    for g in lattices {
        let n_sites = g.n();
        for _ in 0..samples_per_lattice {
            let flips = if rng.gen() { 1 } else { 3 };
            let mut flips_v = BTreeSet::new();
            while flips_v.len() < flips.min(n_sites) {
                flips_v.insert(rng.gen_range(0..n_sites));
            }
            let couplings: Vec<f64> = (0..g.num_edges()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let gd = g.clone().with_couplings(&couplings)?;
            let gauge = realize_fluxes(&gd, &random_sector(&gd, rng.gen(), [], flips_v.iter().copied()))?;
            let disorder: Vec<f64> = (0..n_sites).map(|_| rng.gen_range(0.0..2.0)).collect();
            for &gamma in gammas {
                let rates: Vec<f64> = disorder.iter().map(|x| gamma * x).collect();
                let p = SingleParticleProblem::new(&gd, &gauge, &rates)?;
                let spec = solve_number(&p, &opts)?;
                let tol = slack * gamma.max(1.0);
                for n in [1, 3].into_iter().filter(|&n| spec.admissible(n)) {
                    let gap = spec.gap(n)?;
                    let (lo, hi) = bendixson_bounds(&rates, p.interlayer(), n);
                    let excess = (lo - gap).max(gap - hi);
                    st.worst_excess = st.worst_excess.max(excess);
                    st.outside += usize::from(excess > tol);
                    let stated = (lo - gap).max(gap - flipset_upper_bound(&rates, p.interlayer(), n));
                    st.worst_flipset_excess = st.worst_flipset_excess.max(stated);
                    st.outside_flipset += usize::from(stated > tol);
                    st.points += 1;
                }
            }
        }
    }
    Ok(st)
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult { name, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

/// `Fast`: oracle equivalence on the triangle and 4-cycle, Pfaffian
/// properties and the steady-sector sum rule. `Full` adds the torus
/// correlators, steady-state counts and disordered Bendixson containment.
pub fn run(level: Level) -> Report {
    let mut checks = vec![
        timed("oracle equivalence", || {
            let cases = oracle_cases(&standard_oracle_cases(), ORACLE_CLUSTER)?;
            let worst = cases.iter().map(|c| c.clustered).fold(0.0, f64::max);
            let counts = cases.iter().all(|c| c.counts_match);
            Ok((counts && worst <= 1e-8, format!("{} cases, cluster means within {worst:.1e}", cases.len())))
        }),
        timed("pfaffian", || {
            let err = pfaffian_square_error(100, 1)?;
            let odd = odd_pfaffian_rejected();
            Ok((err <= 1e-8 && odd, format!("Pf² = det within {err:.1e}, odd dimension rejected: {odd}")))
        }),
        timed("sum rule", || {
            let st = sum_rule_stats(24, 20, 2, 3)?;
            Ok((
                st.all_physical && st.max_rel <= 1e-8 && st.max_gap_rel <= 1e-8,
                format!("{} sectors, max relative defect {:.1e}", st.sectors, st.max_rel),
            ))
        }),
    ];
    if level == Level::Full {
        checks.push(timed("renyi correlators", || {
            let st = torus_renyi_stats()?;
            Ok((
                st.max_r1 <= 1e-12 && st.max_r2_dev <= 1e-12,
                format!("{} steady states: |r1| ≤ {:.1e}, |r2 − 1| ≤ {:.1e}", st.states, st.max_r1, st.max_r2_dev),
            ))
        }));
        checks.push(timed("steady-state counts", || {
            let counts = steady_counts()?;
            let ok = counts.iter().all(|&(_, d, e)| d == e);
            let text: Vec<String> = counts.iter().map(|(n, d, e)| format!("{n}-cycle {d}/{e}")).collect();
            Ok((ok, text.join(", ")))
        }));
        checks.push(timed("bendixson containment", || {
            let lattices = [
                build_lattice(LatticeKind::Honeycomb, 6, 6, true)?,
                build_lattice(LatticeKind::Triangular, 8, 8, true)?,
            ];
            let st = bendixson_containment(&lattices, 50, &[0.01, 1.0, 100.0], 1e-10, 5)?;
            Ok((st.outside == 0, format!("{} gaps, {} outside, worst excess {:.1e}", st.points, st.outside, st.worst_excess)))
        }));
    }
    Report { checks }
}
