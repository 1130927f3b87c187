//! Z2 gauge fields, fluxes and symmetry sectors.
//!
//! The first-layer field `u` lives on canonical edges (`u_ji = -u_ij`). The
//! second-layer field is never stored: it equals `u` except on the intralayer
//! flip set, and the interlayer field `v` is `-1` except on the interlayer
//! flip set.

mod realize;
mod sector_io;

pub use realize::realize_fluxes;
pub use sector_io::{parse_sector, write_sector};

use crate::error::{Error, Result};
use crate::graph::{check_closed, ColoredGraph, Cycle, Step};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// A fourth root of unity `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flux(u8);

impl Flux {
    pub const ONE: Flux = Flux(0);
    pub const I: Flux = Flux(1);
    pub const MINUS_ONE: Flux = Flux(2);
    pub const MINUS_I: Flux = Flux(3);

    pub fn from_exponent(k: i64) -> Flux {
        Flux(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn conj(self) -> Flux {
        Flux((4 - self.0) % 4)
    }

    pub fn neg(self) -> Flux {
        Flux((self.0 + 2) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Whether this value is allowed on a boundary of the given length.
    pub fn allowed_for_length(self, len: usize) -> bool {
        self.is_real() == (len % 2 == 0)
    }
}

impl std::ops::Mul for Flux {
    type Output = Flux;
    fn mul(self, rhs: Flux) -> Flux {
        Flux((self.0 + rhs.0) % 4)
    }
}

impl std::fmt::Display for Flux {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(["+1", "+i", "-1", "-i"][self.0 as usize])
    }
}

impl std::str::FromStr for Flux {
    type Err = Error;
    fn from_str(s: &str) -> Result<Flux> {
        match s.trim() {
            "1" | "+1" => Ok(Flux::ONE),
            "-1" => Ok(Flux::MINUS_ONE),
            "i" | "+i" => Ok(Flux::I),
            "-i" => Ok(Flux::MINUS_I),
            other => Err(Error::Sector(format!("'{other}' is not one of +1, -1, +i, -i"))),
        }
    }
}

/// `(-i)^{|C|} Π (±u)` along a closed walk, `+u` for steps in canonical
/// direction and `-u` against it.
pub fn flux_of(g: &ColoredGraph, u: &[i8], steps: &[Step]) -> Result<Flux> {
    check_closed(g, steps)?;
    let mut k = 3 * steps.len() as i64;
    for s in steps {
        let sign = if s.forward { u[s.edge] } else { -u[s.edge] };
        if sign < 0 {
            k += 2;
        }
    }
    Ok(Flux::from_exponent(k))
}

pub fn flux(g: &ColoredGraph, gauge: &GaugeConfig, steps: &[Step]) -> Result<Flux> {
    flux_of(g, &gauge.u, steps)
}

/// Realized gauge field plus the two flip sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeConfig {
    u: Vec<i8>,
    flips_u: BTreeSet<usize>,
    flips_v: BTreeSet<usize>,
    inert_twist: bool,
}

impl GaugeConfig {
    /// `u ≡ +1`, no flips.
    pub fn uniform(g: &ColoredGraph) -> Self {
        GaugeConfig {
            u: vec![1; g.num_edges()],
            flips_u: BTreeSet::new(),
            flips_v: BTreeSet::new(),
            inert_twist: false,
        }
    }

    pub fn from_parts(
        g: &ColoredGraph,
        u: Vec<i8>,
        flips_u: BTreeSet<usize>,
        flips_v: BTreeSet<usize>,
        inert_twist: bool,
    ) -> Result<Self> {
        if u.len() != g.num_edges() || u.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::Sector("gauge field must be ±1 on every edge".into()));
        }
        check_flip_sets(g, &flips_u, &flips_v)?;
        Ok(GaugeConfig { u, flips_u, flips_v, inert_twist })
    }

    pub fn u(&self, e: usize) -> i8 {
        self.u[e]
    }

    pub fn u_all(&self) -> &[i8] {
        &self.u
    }

    pub fn u_tilde(&self, e: usize) -> i8 {
        if self.flips_u.contains(&e) {
            -self.u[e]
        } else {
            self.u[e]
        }
    }

    pub fn v(&self, j: usize) -> i8 {
        if self.flips_v.contains(&j) {
            1
        } else {
            -1
        }
    }

    pub fn flips_u(&self) -> &BTreeSet<usize> {
        &self.flips_u
    }

    pub fn flips_v(&self) -> &BTreeSet<usize> {
        &self.flips_v
    }

    pub fn inert_twist(&self) -> bool {
        self.inert_twist
    }

    /// Weak flux on the interlayer plaquette of edge `e`: `u ũ v_i v_j`.
    pub fn weak_flux(&self, g: &ColoredGraph, e: usize) -> i8 {
        let ed = g.edge(e);
        self.u[e] * self.u_tilde(e) * self.v(ed.i) * self.v(ed.j)
    }

    /// Vertex gauge transformation applied to both layers: flips `u` on every
    /// edge at `j`. Fluxes and flip sets are unchanged.
    pub fn transform_vertex(&mut self, g: &ColoredGraph, j: usize) {
        for &e in g.incident(j) {
            self.u[e] = -self.u[e];
        }
    }
}

fn check_flip_sets(g: &ColoredGraph, fu: &BTreeSet<usize>, fv: &BTreeSet<usize>) -> Result<()> {
    if let Some(&e) = fu.iter().find(|&&e| e >= g.num_edges()) {
        return Err(Error::Sector(format!("flipped edge {e} out of range (E = {})", g.num_edges())));
    }
    if let Some(&v) = fv.iter().find(|&&v| v >= g.n()) {
        return Err(Error::Sector(format!("flipped vertex {v} out of range (N = {})", g.n())));
    }
    Ok(())
}

/// Uniform flux choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxPreset {
    /// Whatever `u ≡ +1` produces with the graph's orientation.
    Trivial,
    /// `+1` on every (even) cycle.
    Zero,
    /// `-1` on every (even) cycle.
    Pi,
    /// `+i` on odd cycles, `+1` on even ones.
    PlusHalfPi,
    /// `-i` on odd cycles, `+1` on even ones.
    MinusHalfPi,
}

impl std::str::FromStr for FluxPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "trivial" => Ok(FluxPreset::Trivial),
            "zero" | "0" => Ok(FluxPreset::Zero),
            "pi" => Ok(FluxPreset::Pi),
            "+pi/2" | "pi/2" => Ok(FluxPreset::PlusHalfPi),
            "-pi/2" => Ok(FluxPreset::MinusHalfPi),
            other => Err(Error::Sector(format!("unknown flux preset '{other}'"))),
        }
    }
}

impl FluxPreset {
    fn value(self, g: &ColoredGraph, c: &Cycle) -> Result<Flux> {
        let even = c.len() % 2 == 0;
        match self {
            FluxPreset::Trivial => flux_of(g, &vec![1; g.num_edges()], c.steps()),
            FluxPreset::Zero | FluxPreset::Pi if !even => Err(Error::Sector(format!(
                "{self:?} flux needs even cycles; found length {}",
                c.len()
            ))),
            FluxPreset::Zero => Ok(Flux::ONE),
            FluxPreset::Pi => Ok(Flux::MINUS_ONE),
            FluxPreset::PlusHalfPi => Ok(if even { Flux::ONE } else { Flux::I }),
            FluxPreset::MinusHalfPi => Ok(if even { Flux::ONE } else { Flux::MINUS_I }),
        }
    }
}

/// Strong-flux targets plus gauge-flip sets selecting one symmetry sector.
///
/// `inert_twist` records an odd number of second-layer gauge transformations
/// at odd-valence vertices: each one trades an interlayer flip for flips on
/// the incident edges but also negates the unused gamma generator's Majorana,
/// which shifts the physical fermion parity by one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorSpec {
    pub plaquette_flux: Vec<Flux>,
    pub loop_flux: Vec<Flux>,
    pub flips_u: BTreeSet<usize>,
    pub flips_v: BTreeSet<usize>,
    pub inert_twist: bool,
    pub seed: Option<u64>,
}

impl SectorSpec {
    pub fn preset(g: &ColoredGraph, preset: FluxPreset) -> Result<Self> {
        Ok(SectorSpec {
            plaquette_flux: g.plaquettes().iter().map(|c| preset.value(g, c)).collect::<Result<_>>()?,
            loop_flux: g.loops().iter().map(|c| preset.value(g, c)).collect::<Result<_>>()?,
            flips_u: BTreeSet::new(),
            flips_v: BTreeSet::new(),
            inert_twist: false,
            seed: None,
        })
    }

    pub fn trivial(g: &ColoredGraph) -> Self {
        Self::preset(g, FluxPreset::Trivial).expect("trivial preset is always valid")
    }

    pub fn with_flips(mut self, flips_u: impl IntoIterator<Item = usize>, flips_v: impl IntoIterator<Item = usize>) -> Self {
        self.flips_u = flips_u.into_iter().collect();
        self.flips_v = flips_v.into_iter().collect();
        self
    }

    /// Intralayer flips on every edge at `j`, the image of an interlayer flip
    /// at `j` under a second-layer gauge transformation.
    pub fn with_star_flip(mut self, g: &ColoredGraph, j: usize) -> Self {
        for &e in g.incident(j) {
            if !self.flips_u.remove(&e) {
                self.flips_u.insert(e);
            }
        }
        if g.degree(j) % 2 == 1 {
            self.inert_twist = !self.inert_twist;
        }
        self
    }

    /// Gauge-equivalent sector with no intralayer flips, if the flip set is
    /// a cut (every cycle crosses it an even number of times).
    pub fn interlayer_form(&self, g: &ColoredGraph) -> Result<SectorSpec> {
        let mut side = vec![None::<bool>; g.n()];
        for s in 0..g.n() {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                let sx = side[x].unwrap();
                for &e in g.incident(x) {
                    let y = g.edge(e).other(x);
                    let want = sx ^ self.flips_u.contains(&e);
                    match side[y] {
                        None => {
                            side[y] = Some(want);
                            stack.push(y);
                        }
                        Some(sy) if sy != want => {
                            return Err(Error::Sector(
                                "intralayer flips are not gauge-equivalent to an empty set".into(),
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
        let mut out = self.clone();
        out.flips_u.clear();
        for v in (0..g.n()).filter(|&v| side[v] == Some(true)) {
            if !out.flips_v.remove(&v) {
                out.flips_v.insert(v);
            }
            if g.degree(v) % 2 == 1 {
                out.inert_twist = !out.inert_twist;
            }
        }
        Ok(out)
    }

    /// Checks lengths, allowed values, the closed-surface product rule and
    /// flip-set ranges.
    pub fn validate(&self, g: &ColoredGraph) -> Result<()> {
        if self.plaquette_flux.len() != g.plaquettes().len() {
            return Err(Error::Sector(format!(
                "{} plaquette fluxes for {} plaquettes",
                self.plaquette_flux.len(),
                g.plaquettes().len()
            )));
        }
        if self.loop_flux.len() != g.loops().len() {
            return Err(Error::Sector(format!(
                "{} loop fluxes for {} loops",
                self.loop_flux.len(),
                g.loops().len()
            )));
        }
        let cycles = g.plaquettes().iter().zip(&self.plaquette_flux).map(|(c, w)| ("plaquette", c, w));
        let loops = g.loops().iter().zip(&self.loop_flux).map(|(c, w)| ("loop", c, w));
        for (k, (what, c, w)) in cycles.chain(loops).enumerate() {
            if !w.allowed_for_length(c.len()) {
                return Err(Error::Sector(format!(
                    "{what} #{k} has length {} but flux {w}",
                    c.len()
                )));
            }
        }
        if g.surface().is_closed() && !self.plaquette_flux.is_empty() {
            let prod = self.plaquette_flux.iter().fold(Flux::ONE, |a, &b| a * b);
            if prod != Flux::ONE {
                return Err(Error::InconsistentFlux(format!(
                    "product of plaquette fluxes on a closed surface is {prod}, must be +1"
                )));
            }
        }
        check_flip_sets(g, &self.flips_u, &self.flips_v)
    }

    pub fn weak_flux_count(&self) -> (usize, usize) {
        (self.flips_u.len(), self.flips_v.len())
    }
}

/// Independent flux counts: `(strong, weak, total)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FluxCount {
    pub strong: usize,
    pub weak: usize,
    pub total: usize,
}

/// Strong fluxes are the cycle-space dimension `E − N + c` (c components, so
/// `E − N + 1` for a connected graph); weak fluxes are one per edge.
pub fn count_independent_fluxes(g: &ColoredGraph) -> FluxCount {
    let strong = g.num_edges() + g.num_components() - g.n();
    FluxCount { strong, weak: g.num_edges(), total: strong + g.num_edges() }
}

/// Uniformly random plaquette and loop fluxes; on closed surfaces the last
/// plaquette absorbs the product constraint.
pub fn random_sector(
    g: &ColoredGraph,
    seed: u64,
    flips_u: impl IntoIterator<Item = usize>,
    flips_v: impl IntoIterator<Item = usize>,
) -> SectorSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |c: &Cycle| {
        let base = if c.len() % 2 == 0 { Flux::ONE } else { Flux::I };
        if rng.gen::<bool>() {
            base.neg()
        } else {
            base
        }
    };
    let mut plaquette_flux: Vec<Flux> = g.plaquettes().iter().map(&mut draw).collect();
    let loop_flux = g.loops().iter().map(&mut draw).collect();
    if g.surface().is_closed() && !plaquette_flux.is_empty() {
        let last = plaquette_flux.len() - 1;
        let others = plaquette_flux[..last].iter().fold(Flux::ONE, |a, &b| a * b);
        plaquette_flux[last] = others.conj();
    }
    SectorSpec {
        plaquette_flux,
        loop_flux,
        flips_u: flips_u.into_iter().collect(),
        flips_v: flips_v.into_iter().collect(),
        inert_twist: false,
        seed: Some(seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice, ring, LatticeKind};

    #[test]
    fn hexagon_zero_flux_from_uniform_field() {
        let g = build_lattice(LatticeKind::Honeycomb, 4, 4, true).unwrap();
        let gauge = GaugeConfig::uniform(&g);
        for p in g.plaquettes() {
            assert_eq!(flux(&g, &gauge, p.steps()).unwrap(), Flux::ONE);
        }
        for l in g.loops() {
            assert_eq!(flux(&g, &gauge, l.steps()).unwrap(), Flux::ONE);
        }
    }

    #[test]
    fn triangle_flux_is_imaginary() {
        let g = ring(3).unwrap();
        for bits in 0..8u8 {
            let u: Vec<i8> = (0..3).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect();
            let w = flux_of(&g, &u, g.plaquettes()[0].steps()).unwrap();
            assert!(!w.is_real());
        }
    }

    #[test]
    fn square_with_two_backward_steps() {
        // 0-1, 1-3, 2-3, 0-2; walk 0→1→3→2→0
        let g = ColoredGraph::from_pairs(4, &[(0, 1, 1.0), (1, 3, 1.0), (2, 3, 1.0), (0, 2, 1.0)]).unwrap();
        let walk = Cycle::from_vertices(&g, &[0, 1, 3, 2]).unwrap();
        let back = walk.steps().iter().filter(|s| !s.forward).count();
        assert_eq!(back, 2);
        assert_eq!(flux_of(&g, &[1, 1, 1, 1], walk.steps()).unwrap(), Flux::ONE);
    }

    #[test]
    fn open_path_rejected() {
        let g = ring(4).unwrap();
        let steps = &g.plaquettes()[0].steps()[..3];
        assert!(matches!(flux_of(&g, &[1; 4], steps), Err(Error::OpenPath { .. })));
    }

    #[test]
    fn flux_counts() {
        let t = ring(3).unwrap();
        assert_eq!(count_independent_fluxes(&t), FluxCount { strong: 1, weak: 3, total: 4 });
        let sq = build_lattice(LatticeKind::Square, 2, 2, true).unwrap();
        let c = count_independent_fluxes(&sq);
        assert_eq!(c, FluxCount { strong: 5, weak: 8, total: 13 });
        let s = sq.surface();
        assert_eq!(c.strong, sq.plaquettes().len() - s.betti2() + s.betti1());
        let h = build_lattice(LatticeKind::Honeycomb, 4, 6, true).unwrap();
        assert_eq!(count_independent_fluxes(&h).strong, h.n() / 2 + 1);
    }

    #[test]
    fn random_sectors_reproducible_and_constrained() {
        let g = build_lattice(LatticeKind::Triangular, 4, 4, true).unwrap();
        for seed in 0..50 {
            let a = random_sector(&g, seed, [], []);
            assert_eq!(a, random_sector(&g, seed, [], []));
            a.validate(&g).unwrap();
        }
    }

    #[test]
    fn random_flux_histogram_is_flat() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, true).unwrap();
        let samples = 10_000;
        let mut plus = vec![0usize; g.plaquettes().len()];
        for seed in 0..samples {
            let s = random_sector(&g, seed as u64, [], []);
            for (k, w) in s.plaquette_flux.iter().enumerate() {
                if *w == Flux::ONE {
                    plus[k] += 1;
                }
            }
        }
        for c in plus {
            let f = c as f64 / samples as f64;
            assert!((f - 0.5).abs() < 0.02, "frequency {f}");
        }
    }

    #[test]
    fn interlayer_form_of_star_flip() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, true).unwrap();
        let s = SectorSpec::trivial(&g).with_star_flip(&g, 4);
        assert!(s.inert_twist);
        let v = s.interlayer_form(&g).unwrap();
        assert!(v.flips_u.is_empty());
        assert!(!v.inert_twist);
        assert!(v.flips_v == [4].into() || v.flips_v.len() == g.n() - 1);
        let bad = SectorSpec::trivial(&g).with_flips([0], []);
        assert!(bad.interlayer_form(&g).is_err());
    }

    #[test]
    fn presets_respect_parity() {
        let tri = build_lattice(LatticeKind::Triangular, 4, 4, true).unwrap();
        assert!(SectorSpec::preset(&tri, FluxPreset::Pi).is_err());
        let s = SectorSpec::preset(&tri, FluxPreset::PlusHalfPi).unwrap();
        s.validate(&tri).unwrap();
        let h = build_lattice(LatticeKind::Honeycomb, 4, 4, true).unwrap();
        assert_eq!(SectorSpec::preset(&h, FluxPreset::Zero).unwrap(), SectorSpec::trivial(&h));
    }
}
