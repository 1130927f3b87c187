//! Symmetry sectors of the explicit superoperator and their free-fermion
//! counterparts.

use super::{left_multiply, ManyBodyModel, PauliString, MAX_SUPEROPERATOR_QUBITS};
use crate::error::{Error, Result};
use crate::gauge::{realize_fluxes, Flux, SectorSpec};
use crate::linalg::eigvals_complex;
use crate::parity::{many_body_eigenvalues, solve_parity, SolveOptions};
use crate::quadratic::SingleParticleProblem;
use ndarray::{Array2, Axis};
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;
use std::collections::{BTreeMap, BTreeSet};

/// Left strong fluxes on the independent cycle basis plus the edges whose
/// weak flux is `−1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSector {
    pub cycle_flux: Vec<Flux>,
    pub weak_flips: BTreeSet<usize>,
}

impl OracleSector {
    /// Sector description for the free-fermion solvers; on closed surfaces
    /// the dropped plaquette takes the value fixed by the product rule.
    pub fn to_sector_spec(&self, model: &ManyBodyModel) -> SectorSpec {
        let g = model.graph();
        let np = g.plaquettes().len();
        let closed = g.surface().is_closed() && np > 0;
        let free = if closed { np - 1 } else { np };
        let mut plaquette_flux = self.cycle_flux[..free].to_vec();
        if closed {
            plaquette_flux.push(plaquette_flux.iter().fold(Flux::ONE, |a, &b| a * b).conj());
        }
        SectorSpec {
            plaquette_flux,
            loop_flux: self.cycle_flux[free..].to_vec(),
            flips_u: self.weak_flips.clone(),
            flips_v: BTreeSet::new(),
            inert_twist: false,
            seed: None,
        }
    }
}

/// Every label combination: two flux values per basis cycle and a sign per
/// edge. Labels forbidden by the operator algebra give empty blocks.
pub fn oracle_sectors(model: &ManyBodyModel) -> Vec<OracleSector> {
    let basis = model.cycle_basis();
    let e = model.graph().num_edges();
    let mut out = Vec::new();
    for fmask in 0u64..(1 << basis.len()) {
        let cycle_flux: Vec<Flux> = basis
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let base = if c.len() % 2 == 0 { Flux::ONE } else { Flux::I };
                if fmask >> k & 1 == 1 {
                    base.neg()
                } else {
                    base
                }
            })
            .collect();
        for wmask in 0u64..(1 << e) {
            let weak_flips = (0..e).filter(|q| wmask >> q & 1 == 1).collect();
            out.push(OracleSector { cycle_flux: cycle_flux.clone(), weak_flips });
        }
    }
    out
}

/// One symmetry acting on row-major vectorized operators as a monomial.
struct Monomial {
    image: Vec<usize>,
    factor: Vec<C64>,
    /// Projector `(1 + weight · M)/2` keeps the wanted eigenvalue.
    weight: C64,
}

impl Monomial {
    fn left(p: &PauliString, weight: C64) -> Self {
        let (img, f) = p.monomial();
        let d = img.len();
        let mut image = Vec::with_capacity(d * d);
        let mut factor = Vec::with_capacity(d * d);
        for m in 0..d {
            for n in 0..d {
                image.push(img[m] * d + n);
                factor.push(f[m]);
            }
        }
        Monomial { image, factor, weight }
    }

    /// `ρ ↦ PρP†`.
    fn adjoint(p: &PauliString, weight: C64) -> Self {
        let (img, f) = p.monomial();
        let d = img.len();
        let mut image = Vec::with_capacity(d * d);
        let mut factor = Vec::with_capacity(d * d);
        for m in 0..d {
            for n in 0..d {
                image.push(img[m] * d + img[n]);
                factor.push(f[m] * f[n].conj());
            }
        }
        Monomial { image, factor, weight }
    }

    fn project(&self, v: &BTreeMap<usize, C64>) -> BTreeMap<usize, C64> {
        let mut out = BTreeMap::new();
        for (&k, &a) in v {
            *out.entry(k).or_insert(C64::from(0.0)) += a * 0.5;
            *out.entry(self.image[k]).or_insert(C64::from(0.0)) += self.weight * self.factor[k] * a * 0.5;
        }
        out.retain(|_, z| z.norm() > 1e-13);
        out
    }
}

fn sector_projectors(model: &ManyBodyModel, sector: &OracleSector) -> Result<Vec<Monomial>> {
    let basis = model.cycle_basis();
    if sector.cycle_flux.len() != basis.len() {
        return Err(Error::Sector(format!(
            "{} cycle fluxes for a basis of {} cycles",
            sector.cycle_flux.len(),
            basis.len()
        )));
    }
    let mut out = Vec::new();
    for (c, w) in basis.iter().zip(&sector.cycle_flux) {
        out.push(Monomial::left(&model.closed_string(c.steps())?, w.conj().to_complex()));
    }
    for q in 0..model.graph().num_edges() {
        let sign = if sector.weak_flips.contains(&q) { -1.0 } else { 1.0 };
        out.push(Monomial::adjoint(&model.weak_string(q), C64::from(sign)));
    }
    Ok(out)
}

/// Orthonormal basis of a sector, as columns over row-major vectorized
/// operators. Matrix units in one orbit of the symmetry group project onto
/// parallel vectors, and distinct orbits have disjoint supports.
fn sector_basis(model: &ManyBodyModel, sector: &OracleSector) -> Result<Array2<C64>> {
    let projectors = sector_projectors(model, sector)?;
    let d2 = model.dim() * model.dim();
    let mut seen = vec![false; d2];
    let mut columns: Vec<BTreeMap<usize, C64>> = Vec::new();
    for k in 0..d2 {
        if seen[k] {
            continue;
        }
        let mut v = BTreeMap::from([(k, C64::from(1.0))]);
        let mut orbit = vec![k];
        for p in &projectors {
            let mut next = Vec::with_capacity(orbit.len() * 2);
            for &o in &orbit {
                next.push(o);
                next.push(p.image[o]);
            }
            next.sort_unstable();
            next.dedup();
            orbit = next;
            v = p.project(&v);
        }
        for o in orbit {
            seen[o] = true;
        }
        let norm = v.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-9 {
            v.values_mut().for_each(|z| *z /= norm);
            columns.push(v);
        }
    }
    let mut q = Array2::zeros((d2, columns.len()));
    for (c, v) in columns.iter().enumerate() {
        for (&k, &z) in v {
            q[[k, c]] = z;
        }
    }
    Ok(q)
}

fn check_spectral_limit(model: &ManyBodyModel) -> Result<()> {
    if model.qubits() > MAX_SUPEROPERATOR_QUBITS {
        return Err(Error::OracleLimit(format!(
            "spectral work on {} qubits exceeds the limit of {MAX_SUPEROPERATOR_QUBITS}",
            model.qubits()
        )));
    }
    Ok(())
}

/// Eigenvalues of the Lindbladian restricted to one sector; empty for
/// labels the operator algebra forbids.
pub fn sector_spectrum(model: &ManyBodyModel, sector: &OracleSector) -> Result<Vec<C64>> {
    check_spectral_limit(model)?;
    let q = sector_basis(model, sector)?;
    if q.ncols() == 0 {
        return Ok(Vec::new());
    }
    let d = model.dim();
    let mut image = Array2::<C64>::zeros(q.raw_dim());
    for (c, col) in q.axis_iter(Axis(1)).enumerate() {
        let rho = col.to_owned().into_shape_with_order((d, d)).expect("d×d");
        let out = model.apply_lindbladian(&rho);
        image.column_mut(c).assign(&ndarray::Array1::from_iter(out.iter().copied()));
    }
    let block = q.t().mapv(|z| z.conj()).dot(&image);
    eigvals_complex(&block)
}

pub fn full_spectrum(model: &ManyBodyModel) -> Result<Vec<C64>> {
    eigvals_complex(&model.superoperator()?)
}

#[derive(Debug, Clone)]
pub struct SteadySpace {
    pub dimension: usize,
    /// Null vectors of the superoperator as columns.
    pub basis: Array2<C64>,
}

pub fn steady_space(model: &ManyBodyModel) -> Result<SteadySpace> {
    let s = model.superoperator()?;
    let (_, sigma, vt) = s.svd(false, true)?;
    let vt = vt.expect("requested right singular vectors");
    let tol = 1e-9 * sigma.first().copied().unwrap_or(0.0).max(1.0);
    let null: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] <= tol).collect();
    let mut basis = Array2::zeros((s.nrows(), null.len()));
    for (c, &k) in null.iter().enumerate() {
        basis.column_mut(c).assign(&vt.row(k).mapv(|z| z.conj()));
    }
    Ok(SteadySpace { dimension: null.len(), basis })
}

/// `ρ_w = P_w / Tr P_w` for left fluxes on the cycle basis.
pub fn steady_state(model: &ManyBodyModel, cycle_flux: &[Flux]) -> Result<Array2<C64>> {
    let basis = model.cycle_basis();
    if cycle_flux.len() != basis.len() {
        return Err(Error::Sector(format!("{} fluxes for {} basis cycles", cycle_flux.len(), basis.len())));
    }
    let d = model.dim();
    let mut p = Array2::<C64>::eye(d);
    for (c, w) in basis.iter().zip(cycle_flux) {
        let moved = left_multiply(&model.closed_string(c.steps())?, &p);
        p = (&p + &moved.mapv(|z| z * w.conj().to_complex())) * 0.5;
    }
    let trace: C64 = p.diag().sum();
    if trace.norm() < 0.5 {
        return Err(Error::InconsistentFlux("flux labels select an empty sector".into()));
    }
    Ok(p / trace)
}

/// Physical many-body eigenvalues of one sector from the parity solver.
pub fn free_fermion_spectrum(model: &ManyBodyModel, sector: &OracleSector) -> Result<Vec<C64>> {
    let g = model.graph();
    let spec = sector.to_sector_spec(model);
    let gauge = realize_fluxes(g, &spec)?;
    let problem = SingleParticleProblem::new(g, &gauge, model.gamma())?;
    let sol = solve_parity(&problem, &SolveOptions::without_conditioning())?;
    many_body_eigenvalues(&sol.spectrum, &sol.verdict)
}

/// Union of [`free_fermion_spectrum`] over every realizable sector.
pub fn free_fermion_union(model: &ManyBodyModel) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    for sector in oracle_sectors(model) {
        match free_fermion_spectrum(model, &sector) {
            Ok(v) => out.extend(v),
            Err(Error::InconsistentFlux(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Residual `‖𝓛 ρ‖` of a candidate steady state.
pub fn steady_residual(model: &ManyBodyModel, rho: &Array2<C64>) -> f64 {
    model.apply_lindbladian(rho).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
