use super::{flux_of, Flux, GaugeConfig, SectorSpec};
use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Cycle};
use std::collections::VecDeque;

/// Finds a gauge field whose plaquette and loop fluxes match the sector.
///
/// Breadth-first spanning forest from vertex 0 with `u = +1` on tree edges;
/// non-tree edges are solved for by elimination over GF(2), one equation per
/// plaquette and loop. Redundant equations must agree, which is where a
/// violated closed-surface constraint surfaces.
pub fn realize_fluxes(g: &ColoredGraph, sector: &SectorSpec) -> Result<GaugeConfig> {
    sector.validate(g)?;
    let tree = bfs_tree(g);
    let free: Vec<usize> = (0..g.num_edges()).filter(|&e| !tree[e]).collect();
    let mut column = vec![usize::MAX; g.num_edges()];
    for (k, &e) in free.iter().enumerate() {
        column[e] = k;
    }

    let targets: Vec<(&Cycle, Flux)> = g
        .plaquettes()
        .iter()
        .zip(sector.plaquette_flux.iter().copied())
        .chain(g.loops().iter().zip(sector.loop_flux.iter().copied()))
        .collect();

    let mut rows = Vec::with_capacity(targets.len());
    for (c, w) in &targets {
        let mut row = BitRow::new(free.len());
        let backward = c.steps().iter().filter(|s| !s.forward).count() as i64;
        // (−i)^{|C|} (−1)^{backward} (−1)^{Σ x} = w
        let k = w.exponent() as i64 - 3 * c.len() as i64 - 2 * backward;
        match k.rem_euclid(4) {
            0 => {}
            2 => row.rhs = true,
            _ => return Err(Error::Sector(format!("flux {w} impossible on a cycle of length {}", c.len()))),
        }
        for s in c.steps() {
            if column[s.edge] != usize::MAX {
                row.toggle(column[s.edge]);
            }
        }
        rows.push(row);
    }

    let solution = solve_gf2(rows, free.len())?;
    let mut u = vec![1i8; g.num_edges()];
    for (k, &e) in free.iter().enumerate() {
        if solution[k] {
            u[e] = -1;
        }
    }
    for (idx, (c, w)) in targets.iter().enumerate() {
        let got = flux_of(g, &u, c.steps())?;
        if got != *w {
            return Err(Error::InconsistentFlux(format!("cycle #{idx}: realized {got}, wanted {w}")));
        }
    }
    GaugeConfig::from_parts(g, u, sector.flips_u.clone(), sector.flips_v.clone(), sector.inert_twist)
}

fn bfs_tree(g: &ColoredGraph) -> Vec<bool> {
    let mut tree = vec![false; g.num_edges()];
    let mut seen = vec![false; g.n()];
    for root in 0..g.n() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &e in g.incident(x) {
                let y = g.edge(e).other(x);
                if !seen[y] {
                    seen[y] = true;
                    tree[e] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    tree
}

#[derive(Clone)]
struct BitRow {
    bits: Vec<u64>,
    rhs: bool,
}

impl BitRow {
    fn new(n: usize) -> Self {
        BitRow { bits: vec![0; n.div_ceil(64)], rhs: false }
    }

    fn get(&self, k: usize) -> bool {
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }

    fn toggle(&mut self, k: usize) {
        self.bits[k / 64] ^= 1 << (k % 64);
    }

    fn xor_with(&mut self, other: &BitRow) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
        self.rhs ^= other.rhs;
    }
}

/// Reduced row echelon over GF(2); free variables are set to 0.
fn solve_gf2(mut rows: Vec<BitRow>, nvars: usize) -> Result<Vec<bool>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..nvars {
        let Some(p) = (r..rows.len()).find(|&k| rows[k].get(col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && row.get(col) {
                row.xor_with(&pivot);
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| row.rhs) {
        return Err(Error::InconsistentFlux(
            "targets violate a dependency among cycles (closed-surface product rule)".into(),
        ));
    }
    let mut x = vec![false; nvars];
    for (k, &col) in pivots.iter().enumerate() {
        x[col] = rows[k].rhs;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{flux, random_sector};
    use crate::graph::{build_lattice, ring, LatticeKind};

    #[test]
    fn trivial_sector_gives_uniform_field() {
        let g = build_lattice(LatticeKind::Honeycomb, 4, 4, true).unwrap();
        let gauge = realize_fluxes(&g, &SectorSpec::trivial(&g)).unwrap();
        assert_eq!(gauge, GaugeConfig::uniform(&g));
    }

    #[test]
    fn vortex_pair() {
        let g = build_lattice(LatticeKind::Honeycomb, 4, 4, true).unwrap();
        let mut s = SectorSpec::trivial(&g);
        s.plaquette_flux[3] = Flux::MINUS_ONE;
        s.plaquette_flux[9] = Flux::MINUS_ONE;
        let gauge = realize_fluxes(&g, &s).unwrap();
        for (p, w) in g.plaquettes().iter().zip(&s.plaquette_flux) {
            assert_eq!(flux(&g, &gauge, p.steps()).unwrap(), *w);
        }
    }

    #[test]
    fn single_vortex_on_torus_rejected() {
        let g = build_lattice(LatticeKind::Honeycomb, 4, 4, true).unwrap();
        let mut s = SectorSpec::trivial(&g);
        s.plaquette_flux[0] = Flux::MINUS_ONE;
        assert!(matches!(realize_fluxes(&g, &s), Err(Error::InconsistentFlux(_))));
    }

    #[test]
    fn random_sectors_realize() {
        for kind in [LatticeKind::Honeycomb, LatticeKind::Square, LatticeKind::Triangular] {
            let g = build_lattice(kind, 4, 4, true).unwrap();
            for seed in 0..100 {
                let s = random_sector(&g, seed, [], []);
                let gauge = realize_fluxes(&g, &s).unwrap();
                for (c, w) in g.plaquettes().iter().zip(&s.plaquette_flux) {
                    assert_eq!(flux(&g, &gauge, c.steps()).unwrap(), *w);
                }
                for (c, w) in g.loops().iter().zip(&s.loop_flux) {
                    assert_eq!(flux(&g, &gauge, c.steps()).unwrap(), *w);
                }
            }
        }
    }

    #[test]
    fn triangle_both_values() {
        let g = ring(3).unwrap();
        for w in [Flux::I, Flux::MINUS_I] {
            let mut s = SectorSpec::trivial(&g);
            s.plaquette_flux[0] = w;
            let gauge = realize_fluxes(&g, &s).unwrap();
            assert_eq!(flux(&g, &gauge, g.plaquettes()[0].steps()).unwrap(), w);
        }
        let mut s = SectorSpec::trivial(&g);
        s.plaquette_flux[0] = Flux::ONE;
        assert!(realize_fluxes(&g, &s).is_err());
    }
}
