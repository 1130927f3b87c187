//! Randomized invariants over graphs, gauges and sectors.

use gammalind::gauge::{parse_sector, random_sector, realize_fluxes, write_sector, GaugeConfig};
use gammalind::graph::{parse_graph, write_graph};
use gammalind::number::bendixson_bounds;
use gammalind::sweep::{csv_string, gamma_grid, run_sweep, GridScale, SweepConfig};
use gammalind::verify::random_connected_graph;
use gammalind::{build_lattice, solve_number, solve_parity, ColoredGraph, LatticeKind, SingleParticleProblem, SolveOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::path::Path;

fn random_graph(seed: u64, max_sites: usize) -> (ColoredGraph, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=max_sites);
    let max_degree = rng.gen_range(2..=5);
    let g = random_connected_graph(&mut rng, n, max_degree).unwrap();
    (g, rng)
}

fn small_lattice(pick: u8) -> ColoredGraph {
    match pick % 3 {
        0 => build_lattice(LatticeKind::Honeycomb, 2, 3, true),
        1 => build_lattice(LatticeKind::Square, 4, 2, true),
        _ => build_lattice(LatticeKind::Triangular, 3, 3, false),
    }
    .unwrap()
}

fn sorted(mut v: Vec<num_complex::Complex64>) -> Vec<num_complex::Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Flipping `u` on every edge at a set of vertices leaves all fluxes, and
    /// so every spectrum, unchanged.
    #[test]
    fn vertex_gauge_transformations_preserve_spectra(seed in any::<u64>(), flip_v in any::<bool>()) {
        let (g, mut rng) = random_graph(seed, 12);
        let gamma: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(0.1..3.0)).collect();
        let u: Vec<i8> = (0..g.num_edges()).map(|_| if rng.gen() { 1 } else { -1 }).collect();
        let fv: BTreeSet<usize> = if flip_v { [0].into() } else { BTreeSet::new() };
        let a = GaugeConfig::from_parts(&g, u, BTreeSet::new(), fv, false).unwrap();
        let mut b = a.clone();
        for j in 0..g.n() {
            if rng.gen() {
                b.transform_vertex(&g, j);
            }
        }
        let opts = SolveOptions::without_conditioning();
        let (pa, pb) = (SingleParticleProblem::new(&g, &a, &gamma).unwrap(), SingleParticleProblem::new(&g, &b, &gamma).unwrap());
        let (sa, sb) = (solve_number(&pa, &opts).unwrap(), solve_number(&pb, &opts).unwrap());
        let scale = gamma.iter().sum::<f64>() + 2.0 * g.num_edges() as f64;
        for (x, y) in sorted(sa.lambda.clone()).iter().zip(sorted(sb.lambda.clone())) {
            prop_assert!((x - y).norm() < 1e-9 * scale, "{x} vs {y}");
        }
        let (ga, gb) = (solve_parity(&pa, &opts).unwrap().gap, solve_parity(&pb, &opts).unwrap().gap);
        prop_assert!((ga - gb).abs() < 1e-9 * scale);
    }

    /// Every number-mode gap lies inside the field-of-values bounds.
    #[test]
    fn number_gaps_respect_bendixson_bounds(seed in any::<u64>()) {
        let (g, mut rng) = random_graph(seed, 14);
        let gamma: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(0.0..2.0) * 10f64.powf(rng.gen_range(-2.0..2.0))).collect();
        let u: Vec<i8> = (0..g.num_edges()).map(|_| if rng.gen() { 1 } else { -1 }).collect();
        let fv: BTreeSet<usize> = (0..g.n()).filter(|_| rng.gen_bool(0.3)).collect();
        let gauge = GaugeConfig::from_parts(&g, u, BTreeSet::new(), fv.clone(), false).unwrap();
        let p = SingleParticleProblem::new(&g, &gauge, &gamma).unwrap();
        let spec = solve_number(&p, &SolveOptions::without_conditioning()).unwrap();
        let interlayer: Vec<bool> = (0..g.n()).map(|j| fv.contains(&j)).collect();
        let slack = 1e-10 * gamma.iter().cloned().fold(1.0, f64::max) * g.n() as f64;
        for n in (0..=g.n().min(5)).filter(|&n| spec.admissible(n)) {
            let gap = spec.gap(n).unwrap();
            let (lo, hi) = bendixson_bounds(&gamma, &interlayer, n);
            prop_assert_eq!((lo, hi), spec.bounds(n));
            prop_assert!(lo - slack <= gap && gap <= hi + slack, "n = {}: {} outside [{}, {}]", n, gap, lo, hi);
        }
    }

    #[test]
    fn graph_files_round_trip(seed in any::<u64>(), lattice in any::<Option<u8>>()) {
        let g = match lattice {
            Some(pick) => small_lattice(pick),
            None => random_graph(seed, 16).0,
        };
        let text = write_graph(&g);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.surface(), g.surface());
        prop_assert_eq!(back.plaquettes().len(), g.plaquettes().len());
        prop_assert_eq!(write_graph(&back), text);
    }

    #[test]
    fn sector_files_round_trip(pick in any::<u8>(), seed in any::<u64>(), star in any::<bool>()) {
        let g = small_lattice(pick);
        let mut spec = random_sector(&g, seed, [seed as usize % g.num_edges()], [seed as usize % g.n()]);
        if star {
            spec = spec.with_star_flip(&g, (seed as usize / 7) % g.n());
        }
        let back = parse_sector(&write_sector(&spec), &g).unwrap();
        prop_assert_eq!(&back, &spec);
        realize_fluxes(&g, &back).unwrap();
    }

    #[test]
    fn grids_are_monotone_with_exact_ends(lo in 1e-4f64..1.0, span in 1.0f64..1e6, points in 1usize..80, log in any::<bool>()) {
        let scale = if log { GridScale::Log } else { GridScale::Linear };
        let hi = lo * span;
        let grid = gamma_grid(lo, hi, points, scale);
        prop_assert_eq!(grid.len(), points);
        prop_assert_eq!(grid[0], lo);
        if points > 1 {
            prop_assert_eq!(grid[points - 1], hi);
        }
        prop_assert!(grid.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Same config and seeds give the same bytes.
    #[test]
    fn sweep_csv_is_reproducible(seed in any::<u32>(), spread in 0.0f64..0.9, parity in any::<bool>()) {
        let sector = if parity { "U = [3]" } else { "V = [1]" };
        let text = format!(
            "[graph]\nlattice = \"honeycomb\"\nnx = 3\nny = 2\ncoupling_range = [-2.0, 2.0]\ncoupling_seed = {seed}\n\
             [sector]\nflux = \"random\"\nseed = {seed}\n{sector}\n\
             [sweep]\ngamma_min = 0.01\ngamma_max = 100.0\npoints = 9\nn = [1]\ngamma_spread = {spread}\ndisorder_seed = {seed}\n"
        );
        let cfg = SweepConfig::from_toml(&text).unwrap();
        let plan = cfg.plan(&text, Path::new(".")).unwrap();
        let first = csv_string(&run_sweep(&plan).unwrap()).unwrap();
        let again = SweepConfig::from_toml(&text).unwrap().plan(&text, Path::new(".")).unwrap();
        let second = csv_string(&run_sweep(&again).unwrap()).unwrap();
        prop_assert_eq!(first, second);
    }
}
