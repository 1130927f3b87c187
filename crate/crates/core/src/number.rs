//! Number-conserving sectors (`𝔘 = ∅`): spectrum of the real N×N matrix
//! `𝕃 = 𝔸 + 𝔻`, per-occupation gaps and Bendixson bounds.

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, eig_real, eigvals_real, max_cluster_condition, norm_scale};
use crate::parity::{SolveOptions, SpectralDiagnostics};
use crate::quadratic::SingleParticleProblem;
use ndarray::Array2;
use ndarray_linalg::{EigValsh, UPLO};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct NumberSpectrum {
    /// Sorted by `Re λ` descending, ties by `Im λ` descending.
    pub lambda: Vec<C64>,
    pub l0: f64,
    pub flips_v: usize,
    pub inert_twist: bool,
    gamma: Vec<f64>,
    interlayer: Vec<bool>,
    pub diagnostics: SpectralDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberGap {
    pub n: usize,
    pub gap: f64,
    pub lower: f64,
    pub upper: f64,
}

fn sort_descending(vals: &mut [C64]) {
    vals.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

pub fn solve_number(problem: &SingleParticleProblem, opts: &SolveOptions) -> Result<NumberSpectrum> {
    let m = problem.number_matrix()?;
    let scale = norm_scale(&m);
    let (mut lambda, condition) = if opts.conditioning {
        let (vals, vecs) = eig_real(&m)?;
        // Left eigenvectors of a real matrix: eigenvectors of 𝕃ᵀ, conjugated.
        let (lvals, lvecs) = eig_real(&m.t().to_owned())?;
        let kappa = max_cluster_condition(&vals, &vecs, &lvals, &lvecs.mapv(|z| z.conj()), 1e-10 * scale)?;
        (vals, Some(kappa))
    } else {
        (eigvals_real(&m)?, None)
    };
    sort_descending(&mut lambda);
    let (_, flips_v) = problem.flip_counts();
    Ok(NumberSpectrum {
        lambda,
        l0: problem.l0(),
        flips_v,
        inert_twist: problem.inert_twist(),
        gamma: problem.gamma().to_vec(),
        interlayer: problem.interlayer().to_vec(),
        diagnostics: SpectralDiagnostics {
            condition,
            exceptional: condition.is_some_and(|k| k > opts.ep_threshold),
            ..Default::default()
        },
    })
}

impl NumberSpectrum {
    pub fn n_modes(&self) -> usize {
        self.lambda.len()
    }

    /// `(−1)^n` must match `(−1)^{|𝔙| + twist}`.
    pub fn admissible(&self, n: usize) -> bool {
        n <= self.lambda.len() && (n + self.flips_v + usize::from(self.inert_twist)) % 2 == 0
    }

    pub fn default_n_max(&self) -> usize {
        self.lambda.len().min(self.flips_v + 4)
    }

    pub fn gap(&self, n: usize) -> Result<f64> {
        if !self.admissible(n) {
            let parity = if (self.flips_v + usize::from(self.inert_twist)) % 2 == 0 { "even" } else { "odd" };
            return Err(Error::Inadmissible { n, parity });
        }
        Ok(compensated_sum(std::iter::once(self.l0).chain(self.lambda[..n].iter().map(|z| -z.re))))
    }

    /// Every admissible `n ≤ n_max` with its gap and bounds.
    pub fn gaps(&self, n_max: usize) -> Vec<NumberGap> {
        (0..=n_max.min(self.lambda.len()))
            .filter(|&n| self.admissible(n))
            .map(|n| {
                let (lower, upper) = bendixson_bounds(&self.gamma, &self.interlayer, n);
                NumberGap { n, gap: self.gap(n).expect("admissible"), lower, upper }
            })
            .collect()
    }

    pub fn bounds(&self, n: usize) -> (f64, f64) {
        bendixson_bounds(&self.gamma, &self.interlayer, n)
    }
}

fn flipped_stats(gamma: &[f64], interlayer: &[bool]) -> (usize, f64, f64) {
    let mut count = 0;
    let (mut sum, mut max) = (0.0, 0.0f64);
    for (g, _) in gamma.iter().zip(interlayer).filter(|(_, &f)| f) {
        count += 1;
        sum += g;
        max = max.max(*g);
    }
    (count, sum, max)
}

/// Bounds on `Δₙ` from the symmetric part of `𝕃`, which is `𝔻 = diag(2γ_j v_j)`.
///
/// Every `Re λ` lies between the extreme diagonal entries, so
/// `L0 − n·max d ≤ Δₙ ≤ L0 − n·min d`. The minimum sits on an unflipped
/// vertex whenever there is one, not necessarily on a flipped one.
pub fn bendixson_bounds(gamma: &[f64], interlayer: &[bool], n: usize) -> (f64, f64) {
    let nf = n as f64;
    let (mut l0, mut d_min, mut d_max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
    for (&g, &flipped) in gamma.iter().zip(interlayer) {
        let d = if flipped { 2.0 * g } else { -2.0 * g };
        if flipped {
            l0 += 2.0 * g;
        }
        d_min = d_min.min(d);
        d_max = d_max.max(d);
    }
    if gamma.is_empty() {
        return (0.0, 0.0);
    }
    ((l0 - nf * d_max).max(0.0), l0 - nf * d_min)
}

/// Upper bound with the maximum taken over flipped vertices only. Exact
/// for homogeneous rates but not a bound once the rates are disordered;
/// kept so the two can be compared.
pub fn flipset_upper_bound(gamma: &[f64], interlayer: &[bool], n: usize) -> f64 {
    let (count, sum, max_v) = flipped_stats(gamma, interlayer);
    if count == 0 {
        bendixson_bounds(gamma, interlayer, n).1
    } else {
        2.0 * (sum + n as f64 * max_v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendixsonReport {
    pub sym_min: f64,
    pub sym_max: f64,
    pub re_min: f64,
    pub re_max: f64,
    /// How far any `Re z` escapes `[sym_min, sym_max]` (0 when contained).
    pub excess: f64,
}

/// Compares eigenvalue real parts of a real matrix with the spectrum of
/// its symmetric part.
pub fn bendixson_theorem_check(m: &Array2<f64>) -> Result<BendixsonReport> {
    let sym = (m + &m.t()) / 2.0;
    let sym_eigs = sym.eigvalsh(UPLO::Upper)?;
    let eigs = eigvals_real(m)?;
    let sym_min = sym_eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let sym_max = sym_eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let re_min = eigs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let re_max = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let excess = (sym_min - re_min).max(re_max - sym_max).max(0.0);
    Ok(BendixsonReport { sym_min, sym_max, re_min, re_max, excess })
}
