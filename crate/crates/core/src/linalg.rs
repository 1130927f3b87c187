//! Thin wrappers over LAPACK eigensolvers plus spectrum comparison helpers.

use crate::error::{Error, Result};
use ndarray::{Array2, ArrayView2, Axis};
use ndarray_linalg::{Eig, EigVals, OperationNorm, Scalar, SVD};
use num_complex::Complex64 as C64;

pub fn eigvals_real(m: &Array2<f64>) -> Result<Vec<C64>> {
    Ok(m.eigvals()?.to_vec())
}

pub fn eig_real(m: &Array2<f64>) -> Result<(Vec<C64>, Array2<C64>)> {
    let (vals, vecs) = m.eig()?;
    Ok((vals.to_vec(), vecs))
}

pub fn eigvals_complex(m: &Array2<C64>) -> Result<Vec<C64>> {
    Ok(m.eigvals()?.to_vec())
}

/// `sqrt(‖M‖₁ ‖M‖∞)`, a cheap upper bound on the spectral norm used to
/// scale tolerances.
pub fn norm_scale<A: Scalar<Real = f64> + ndarray_linalg::Lapack>(m: &Array2<A>) -> f64 {
    let one = m.opnorm_one().unwrap_or(0.0);
    let inf = m.opnorm_inf().unwrap_or(0.0);
    (one * inf).sqrt()
}

/// Largest entry of `|M + Mᵀ|`.
pub fn antisymmetry_defect<A: Scalar<Real = f64>>(m: &ArrayView2<A>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[[i, j]] + m[[j, i]]).abs();
            worst = worst.max(d);
        }
    }
    worst
}

/// Greedy nearest-neighbour matching of two spectra; returns the largest
/// matched distance, or infinity when the sizes differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let key = |z: &C64| (z.re, z.im);
    a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal));
    b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal));
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in &a {
        let mut best = (f64::INFINITY, usize::MAX);
        for (k, y) in b.iter().enumerate() {
            if !used[k] {
                let d = (x - y).norm();
                if d < best.0 {
                    best = (d, k);
                }
            }
        }
        used[best.1] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// Neumaier-compensated sum; gap formulas subtract sums of O(N·γ) terms.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

/// Spectrum comparison that tolerates defective eigenvalues: points of
/// both sets closer than `cluster_tol` are merged (single linkage), each
/// cluster must hold as many points from `a` as from `b`, and the result
/// is the largest difference of per-set cluster means. A k-fold Jordan
/// eigenvalue scatters its computed copies by about `ε^{1/k}`, while their
/// mean stays accurate to roundoff.
pub fn clustered_multiset_distance(a: &[C64], b: &[C64], cluster_tol: f64) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let all: Vec<C64> = a.iter().chain(b).copied().collect();
    let mut parent: Vec<usize> = (0..all.len()).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if (all[i] - all[j]).norm() <= cluster_tol {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut sums: std::collections::HashMap<usize, (C64, usize, C64, usize)> = std::collections::HashMap::new();
    for (k, z) in all.iter().enumerate() {
        let r = root(&mut parent, k);
        let entry = sums.entry(r).or_insert((C64::from(0.0), 0, C64::from(0.0), 0));
        if k < a.len() {
            entry.0 += z;
            entry.1 += 1;
        } else {
            entry.2 += z;
            entry.3 += 1;
        }
    }
    let mut worst = 0.0f64;
    for (sa, na, sb, nb) in sums.into_values() {
        if na != nb {
            return f64::INFINITY;
        }
        worst = worst.max((sa / na as f64 - sb / nb as f64).norm());
    }
    worst
}

fn orthonormal_columns(cols: &[ndarray::Array1<C64>]) -> Vec<ndarray::Array1<C64>> {
    let mut out: Vec<ndarray::Array1<C64>> = Vec::with_capacity(cols.len());
    for c in cols {
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &out {
                let proj: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                v.zip_mut_with(q, |x, y| *x -= proj * y);
            }
        }
        let nrm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            v.mapv_inplace(|x| x / nrm);
        }
        out.push(v);
    }
    out
}

/// Worst eigenvalue condition number over clusters of nearby eigenvalues.
///
/// `right[:, k]` is a right eigenvector for `vals[k]`; `left[:, k]` satisfies
/// `yᴴ M = left_vals[k] yᴴ`. Eigenvalues closer than `cluster_tol` are
/// grouped so exact degeneracies (common on symmetric lattices) are judged
/// by their invariant subspace rather than by LAPACK's arbitrary basis:
/// the cluster condition is `1/σ_min(Q_Lᴴ Q_R)` with orthonormal bases.
/// Keep `cluster_tol` at roundoff scale: eigenvalue pairs split by an
/// exceptional point sit ~sqrt(ε)‖M‖ apart and must stay in separate
/// clusters, where their left and right vectors are nearly orthogonal.
pub fn max_cluster_condition(
    vals: &[C64],
    right: &Array2<C64>,
    left_vals: &[C64],
    left: &Array2<C64>,
    cluster_tol: f64,
) -> Result<f64> {
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].re.partial_cmp(&vals[b].re).unwrap_or(std::cmp::Ordering::Equal));
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if vals[b].re - vals[a].re > cluster_tol {
                break;
            }
            if (vals[a] - vals[b]).norm() <= cluster_tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in 0..n {
        let r = find(&mut parent, k);
        clusters.entry(r).or_default().push(k);
    }

    let mut worst = 1.0f64;
    let mut left_used = vec![false; left_vals.len()];
    for members in clusters.values() {
        let lefts: Vec<usize> = (0..left_vals.len())
            .filter(|&k| !left_used[k] && members.iter().any(|&m| (left_vals[k] - vals[m]).norm() <= cluster_tol))
            .take(members.len())
            .collect();
        if lefts.len() != members.len() {
            return Ok(f64::INFINITY);
        }
        for &k in &lefts {
            left_used[k] = true;
        }
        let qr = orthonormal_columns(&members.iter().map(|&k| right.column(k).to_owned()).collect::<Vec<_>>());
        let ql = orthonormal_columns(&lefts.iter().map(|&k| left.column(k).to_owned()).collect::<Vec<_>>());
        let m = members.len();
        let mut gram = Array2::<C64>::zeros((m, m));
        for a in 0..m {
            for b in 0..m {
                gram[[a, b]] = ql[a].iter().zip(qr[b].iter()).map(|(x, y)| x.conj() * y).sum();
            }
        }
        let smin = if m == 1 {
            gram[[0, 0]].norm()
        } else {
            let (_, s, _) = gram.svd(false, false).map_err(|e| Error::Linalg(e.to_string()))?;
            s.iter().copied().fold(f64::INFINITY, f64::min)
        };
        worst = worst.max(if smin > 0.0 { 1.0 / smin } else { f64::INFINITY });
    }
    Ok(worst)
}

/// Elementwise conjugate of every column, a helper for building left
/// eigenvector sets from transposed problems.
pub fn conj(m: &Array2<C64>) -> Array2<C64> {
    m.mapv(|z| z.conj())
}

pub fn column_norms(m: &Array2<C64>) -> Vec<f64> {
    m.axis_iter(Axis(1)).map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect()
}
