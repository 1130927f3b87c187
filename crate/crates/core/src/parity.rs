//! Parity-conserving sectors: pairing of the 2N×2N spectrum, the Pfaffian
//! parity rule and the sector gap.

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, eig_real, eigvals_real, max_cluster_condition, norm_scale};
use crate::pfaffian::pfaffian_log;
use crate::quadratic::SingleParticleProblem;
use ndarray::{s, Array1, Array2};
use ndarray_linalg::{FactorizeInto, Solve};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative tolerance for matching `z` with `−z`. Loose on purpose:
    /// a defective cluster of size m scatters by about `ε^{1/m}`.
    pub pair_tol: f64,
    /// Relative pairing residual above which the point is flagged as
    /// exceptional even without conditioning.
    pub defect_tol: f64,
    /// Relative size below which `β` counts as a zero mode.
    pub zero_tol: f64,
    /// Relative tolerance below which `Re β` counts as zero.
    pub imag_tol: f64,
    /// Compute eigenvectors: enables condition numbers and the
    /// cancellation-free `B₀`, roughly doubling the eigensolve cost.
    pub conditioning: bool,
    /// Condition number above which a result is flagged as sitting at an
    /// exceptional point.
    pub ep_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            pair_tol: 1e-4,
            defect_tol: 1e-8,
            zero_tol: 1e-6,
            imag_tol: 1e-8,
            conditioning: true,
            ep_threshold: 1e8,
        }
    }
}

impl SolveOptions {
    pub fn without_conditioning() -> Self {
        SolveOptions { conditioning: false, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectralDiagnostics {
    /// Worst `|z + z'|` over matched pairs.
    pub pair_residual: f64,
    /// Smallest `|z − z'|` within a pair, i.e. `2 min |β|`.
    pub min_pair_distance: f64,
    /// Worst clustered eigenvalue condition number, when computed.
    pub condition: Option<f64>,
    pub exceptional: bool,
    /// Distance of the Pfaffian phase from ±1; large values mean the
    /// imaginary-β count is unreliable.
    pub pf_phase_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParitySpectrum {
    /// Representatives sorted by `Re β` ascending (ties: `Im β` descending).
    pub beta: Vec<C64>,
    pub b0: C64,
    pub a0: f64,
    pub n_imaginary: usize,
    /// `±1`, or `0` when a zero mode leaves the parity undetermined.
    pub pf_sign: i8,
    pub scale: f64,
    pub diagnostics: SpectralDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParityVerdict {
    pub vacuum_physical: bool,
    /// `+1`: physical states have an even number of occupied modes.
    pub required_parity: i8,
    /// Slowest mode has `Re β₁ ≈ 0`, so both parities decay alike.
    pub parity_ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParitySolution {
    pub spectrum: ParitySpectrum,
    pub verdict: ParityVerdict,
    pub gap: f64,
}

fn order_key(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
}

struct Pairing {
    /// Representatives in pairing order, with the index of the eigenvalue
    /// each one stands for.
    beta: Vec<C64>,
    reps: Vec<usize>,
    residual: f64,
    min_dist: f64,
}

fn pair_up(eigs: &[C64], scale: f64, opts: &SolveOptions) -> Result<Pairing> {
    if eigs.len() % 2 == 1 {
        return Err(Error::OddDimension(eigs.len()));
    }
    let tol_pair = opts.pair_tol * scale;
    let tol_im = opts.imag_tol * scale;
    let mut order: Vec<usize> = (0..eigs.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (eigs[a], eigs[b]);
        y.re.abs().partial_cmp(&x.re.abs()).unwrap_or(std::cmp::Ordering::Equal).then(
            y.im.abs().partial_cmp(&x.im.abs()).unwrap_or(std::cmp::Ordering::Equal),
        )
    });
    let mut used = vec![false; eigs.len()];
    let mut out = Pairing {
        beta: Vec::with_capacity(eigs.len() / 2),
        reps: Vec::with_capacity(eigs.len() / 2),
        residual: 0.0,
        min_dist: f64::INFINITY,
    };
    for &i in &order {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = eigs[i];
        let mut best = (f64::INFINITY, usize::MAX);
        for &j in &order {
            if !used[j] {
                let d = (z + eigs[j]).norm();
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        if best.1 == usize::MAX || best.0 > tol_pair {
            return Err(Error::Unpaired { value: format!("{z}"), tol: tol_pair, miss: best.0 });
        }
        used[best.1] = true;
        out.residual = out.residual.max(best.0);
        let mut r = (z - eigs[best.1]) / 2.0;
        let flip = if r.re.abs() > tol_im { r.re < 0.0 } else { r.im < 0.0 };
        if flip {
            r = -r;
        }
        out.min_dist = out.min_dist.min(2.0 * r.norm());
        out.beta.push(r);
        out.reps.push(if flip { best.1 } else { i });
    }
    Ok(out)
}

/// Matches eigenvalues into `(z, −z)` pairs and returns one representative
/// per pair (`Re > 0`, or `Im > 0` when `Re ≈ 0`), sorted by real part,
/// together with the worst pairing residual and smallest pair separation.
pub fn pair_spectrum(eigs: &[C64], scale: f64, opts: &SolveOptions) -> Result<(Vec<C64>, f64, f64)> {
    let mut p = pair_up(eigs, scale, opts)?;
    p.beta.sort_by(order_key);
    Ok((p.beta, p.residual, p.min_dist))
}

/// `B₀ = Σγ − ½ Σβ` without the cancellation: with `[V₁; V₂]` spanning the
/// representatives' invariant subspace of the split form `[[T, B], [B, W]]`,
/// `Σβ = tr T + tr(B V₂ V₁⁻¹)` and `tr T = 2Σγ`, so `B₀ = −½ tr(B X)`.
/// Only rows of `X = V₂ V₁⁻¹` that meet a nonzero column of `B` are needed.
fn subspace_b0(split: &Array2<f64>, vecs: &Array2<C64>, reps: &[usize]) -> Option<C64> {
    let n = reps.len();
    let v1t = Array2::from_shape_fn((n, n), |(k, i)| vecs[[i, reps[k]]]);
    let lu = v1t.factorize_into().ok()?;
    let mut trace = C64::from(0.0);
    for j in 0..n {
        let column: Vec<(usize, f64)> = (0..n).map(|i| (i, split[[i, n + j]])).filter(|&(_, b)| b != 0.0).collect();
        if column.is_empty() {
            continue;
        }
        // Row j of X solves V₁ᵀ xⱼ = (row j of V₂).
        let rhs = Array1::from_shape_fn(n, |k| vecs[[n + j, reps[k]]]);
        let x_row = lu.solve(&rhs).ok()?;
        trace += column.iter().map(|&(i, b)| x_row[i] * b).sum::<C64>();
    }
    let b0 = -trace / 2.0;
    (b0.re.is_finite() && b0.im.is_finite()).then_some(b0)
}

/// Diagonalizes the parity matrix of a problem and evaluates the Pfaffian
/// sign `sgn((−i)^{|𝕀|} Pf(iA))`.
pub fn parity_spectrum(problem: &SingleParticleProblem, opts: &SolveOptions) -> Result<ParitySpectrum> {
    let split = problem.parity_split_form();
    let scale = norm_scale(&split).max(f64::MIN_POSITIVE);
    let n = problem.n();
    let (eigs, vecs, condition) = if opts.conditioning {
        let (vals, vecs) = eig_real(&split)?;
        // Mᵀ = −K M K with K swapping the two halves, so K x̄ is a left
        // eigenvector for −λ whenever x is a right one for λ.
        let mut left = Array2::zeros(vecs.raw_dim());
        left.slice_mut(s![..n, ..]).assign(&vecs.slice(s![n.., ..]).mapv(|z| z.conj()));
        left.slice_mut(s![n.., ..]).assign(&vecs.slice(s![..n, ..]).mapv(|z| z.conj()));
        let left_vals: Vec<C64> = vals.iter().map(|z| -z).collect();
        let kappa = max_cluster_condition(&vals, &vecs, &left_vals, &left, 1e-10 * scale)?;
        (vals, Some(vecs), Some(kappa))
    } else {
        (eigvals_real(&split)?, None, None)
    };
    let pairing = pair_up(&eigs, scale, opts)?;
    let (residual, min_dist) = (pairing.residual, pairing.min_dist);
    let a0 = problem.a0();
    let naive_b0 = C64::new(
        compensated_sum(problem.gamma().iter().copied().chain(pairing.beta.iter().map(|b| -b.re / 2.0))),
        -compensated_sum(pairing.beta.iter().map(|b| b.im)) / 2.0,
    );
    // The subspace formula needs a well-conditioned V₁; near exceptional
    // points it can drift, so it must agree with the direct sum.
    let b0 = vecs
        .as_ref()
        .and_then(|v| subspace_b0(&split, v, &pairing.reps))
        .filter(|b| (b - naive_b0).norm() <= 1e-8 * (a0 + scale))
        .unwrap_or(naive_b0);
    let mut beta = pairing.beta;
    beta.sort_by(order_key);
    let smallest = beta.iter().map(|b| b.norm()).fold(f64::INFINITY, f64::min);
    let tol_im = opts.imag_tol * scale;
    let n_imaginary = beta.iter().filter(|b| b.re.abs() <= tol_im).count();

    // A zero mode makes Pf(iA) vanish; occupying it flips the parity at no
    // cost, so both parity classes carry the same rates.
    let (pf_sign, pf_phase_error) = if smallest <= opts.zero_tol * scale {
        (0, 0.0)
    } else {
        let ia: Array2<C64> = problem.parity_matrix().mapv(|z| z * C64::i());
        let lp = pfaffian_log(&ia)?;
        let phase = lp.phase * C64::new(0.0, -1.0).powi(n_imaginary as i32);
        let sign: i8 = if phase.re >= 0.0 { 1 } else { -1 };
        (sign, (phase - C64::from(f64::from(sign))).norm())
    };

    let exceptional = condition.is_some_and(|k| k > opts.ep_threshold) || residual > opts.defect_tol * scale;
    Ok(ParitySpectrum {
        b0,
        beta,
        a0,
        n_imaginary,
        pf_sign,
        scale,
        diagnostics: SpectralDiagnostics {
            pair_residual: residual,
            min_pair_distance: min_dist,
            condition,
            exceptional,
            pf_phase_error,
        },
    })
}

/// Physical fermion parity: even occupations are physical iff
/// `pf_sign · (−1)^{|𝔘| + |𝔙| + twist} = +1`.
pub fn parity_verdict(spec: &ParitySpectrum, flips_u: usize, flips_v: usize, inert_twist: bool) -> ParityVerdict {
    let flips = flips_u + flips_v + usize::from(inert_twist);
    if spec.pf_sign == 0 {
        return ParityVerdict { vacuum_physical: true, required_parity: 1, parity_ambiguous: true };
    }
    let required = spec.pf_sign * if flips % 2 == 0 { 1 } else { -1 };
    let ambiguous = spec.beta.first().is_some_and(|b| b.re.abs() <= spec.scale * 1e-8);
    ParityVerdict { vacuum_physical: required == 1, required_parity: required, parity_ambiguous: ambiguous }
}

/// Slowest physical decay rate: `Re B₀`, plus `Re β₁` when the vacuum has
/// the wrong parity.
pub fn gap_parity(spec: &ParitySpectrum, verdict: &ParityVerdict) -> f64 {
    let base = spec.b0.re;
    if verdict.vacuum_physical {
        base
    } else {
        base + spec.beta.first().map_or(0.0, |b| b.re)
    }
}

/// Every physical many-body eigenvalue `Λ_ν = −Σ β_k ν_k − B₀`
/// (exponential in N; meant for small graphs).
pub fn many_body_eigenvalues(spec: &ParitySpectrum, verdict: &ParityVerdict) -> Result<Vec<C64>> {
    let n = spec.beta.len();
    if n > 22 {
        return Err(Error::OracleLimit(format!("2^{n} occupation patterns")));
    }
    let want_odd = verdict.required_parity < 0;
    let mut out = Vec::with_capacity(1 << n.saturating_sub(1));
    for mask in 0u64..(1u64 << n) {
        if (mask.count_ones() % 2 == 1) != want_odd {
            continue;
        }
        let mut lam = -spec.b0;
        for (k, b) in spec.beta.iter().enumerate() {
            if mask >> k & 1 == 1 {
                lam -= b;
            }
        }
        out.push(lam);
    }
    Ok(out)
}

pub fn solve_parity(problem: &SingleParticleProblem, opts: &SolveOptions) -> Result<ParitySolution> {
    let spectrum = parity_spectrum(problem, opts)?;
    let (fu, fv) = problem.flip_counts();
    let verdict = parity_verdict(&spectrum, fu, fv, problem.inert_twist());
    let gap = gap_parity(&spectrum, &verdict);
    Ok(ParitySolution { spectrum, verdict, gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{realize_fluxes, random_sector, GaugeConfig, SectorSpec};
    use crate::graph::{build_lattice, ColoredGraph, LatticeKind};
    use crate::linalg::{eigvals_complex, multiset_distance};
    use crate::pfaffian::pfaffian;

    fn dimer() -> ColoredGraph {
        ColoredGraph::from_pairs(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn dimer_steady_sector() {
        let g = dimer();
        let p = SingleParticleProblem::uniform(&g, &GaugeConfig::uniform(&g), 1.0).unwrap();
        let sol = solve_parity(&p, &SolveOptions::default()).unwrap();
        let sum: C64 = sol.spectrum.beta.iter().sum();
        assert!((sum / 2.0 - 2.0).norm() < 1e-12);
        assert!(sol.verdict.vacuum_physical);
        assert!(sol.gap.abs() < 1e-12);
    }

    #[test]
    fn dimer_pfaffian_closed_form() {
        let g = dimer();
        let p = SingleParticleProblem::uniform(&g, &GaugeConfig::uniform(&g), 1.0).unwrap();
        let ia = p.parity_matrix().mapv(|z| z * C64::i());
        let a = |i: usize, j: usize| ia[[i, j]];
        let want = a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
        assert!((pfaffian(&ia).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn undamped_spectrum_is_imaginary() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, true).unwrap();
        let s = random_sector(&g, 4, [], []);
        let gauge = realize_fluxes(&g, &s).unwrap();
        let p = SingleParticleProblem::uniform(&g, &gauge, 0.0).unwrap();
        match parity_spectrum(&p, &SolveOptions::default()) {
            Ok(spec) => {
                assert_eq!(spec.n_imaginary, g.n());
                assert!(spec.diagnostics.pf_phase_error < 1e-8);
            }
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn pairs_reproduce_spectrum() {
        let g = build_lattice(LatticeKind::Triangular, 4, 4, true).unwrap();
        for seed in 0..5 {
            let s = random_sector(&g, seed, [1, 7], [3]);
            let gauge = realize_fluxes(&g, &s).unwrap();
            let gamma: Vec<f64> = (0..g.n()).map(|j| 0.2 + 0.1 * (j % 5) as f64).collect();
            let p = SingleParticleProblem::new(&g, &gauge, &gamma).unwrap();
            let spec = parity_spectrum(&p, &SolveOptions::default()).unwrap();
            let mut both: Vec<C64> = spec.beta.clone();
            both.extend(spec.beta.iter().map(|b| -b));
            let direct = eigvals_complex(&p.parity_matrix()).unwrap();
            assert!(multiset_distance(&both, &direct) < 1e-10 * spec.scale);
            assert!(spec.b0.re > -1e-10);
            assert!(spec.diagnostics.pf_phase_error < 1e-6);
        }
    }

    #[test]
    fn gauge_transformation_keeps_verdict() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 4, true).unwrap();
        let s = random_sector(&g, 2, [5], []);
        let mut gauge = realize_fluxes(&g, &s).unwrap();
        let solve = |gauge: &GaugeConfig| {
            let p = SingleParticleProblem::uniform(&g, gauge, 0.4).unwrap();
            solve_parity(&p, &SolveOptions::default()).unwrap()
        };
        let before = solve(&gauge);
        for j in [0, 5, 11] {
            gauge.transform_vertex(&g, j);
        }
        let after = solve(&gauge);
        assert_eq!(before.spectrum.pf_sign, after.spectrum.pf_sign);
        assert!((before.gap - after.gap).abs() < 1e-10);
    }

    #[test]
    fn single_intralayer_flip_needs_an_excitation() {
        let g = build_lattice(LatticeKind::Honeycomb, 4, 4, true).unwrap();
        let gauge = realize_fluxes(&g, &SectorSpec::trivial(&g).with_flips([0], [])).unwrap();
        let p = SingleParticleProblem::uniform(&g, &gauge, 0.05).unwrap();
        let sol = solve_parity(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.spectrum.pf_sign, 1);
        assert!(!sol.verdict.vacuum_physical);
        assert!(sol.gap >= sol.spectrum.b0.re);
        assert!(sol.gap > 0.0);
    }
    #[test]
    fn zero_modes_leave_parity_open() {
        let mut zero_modes = 0;
        for len in [3, 4] {
            let g = crate::graph::ring(len).unwrap();
            for gamma in [0.3, 1.0, 3.0] {
                for bits in 0..1u32 << (3 * len) {
                    let bit = |k: usize| bits >> k & 1 == 1;
                    let u: Vec<i8> = (0..len).map(|k| if bit(k) { -1 } else { 1 }).collect();
                    let fu = (0..len).filter(|&k| bit(len + k)).collect();
                    let fv = (0..len).filter(|&k| bit(2 * len + k)).collect();
                    let gauge = GaugeConfig::from_parts(&g, u, fu, fv, false).unwrap();
                    let p = SingleParticleProblem::uniform(&g, &gauge, gamma).unwrap();
                    let sol = solve_parity(&p, &SolveOptions::default()).unwrap();
                    if sol.spectrum.pf_sign == 0 {
                        zero_modes += 1;
                        assert!(sol.verdict.parity_ambiguous);
                        assert!(sol.spectrum.beta[0].norm() < 1e-8);
                    }
                }
            }
        }
        assert!(zero_modes > 0);
    }
}
