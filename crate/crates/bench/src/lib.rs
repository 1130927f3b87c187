//! Fixtures shared by the solver benchmarks.

use gammalind::gauge::{random_sector, realize_fluxes};
use gammalind::{build_lattice, LatticeKind, SingleParticleProblem};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random-flux honeycomb torus with `flips_u` intralayer and `flips_v`
/// interlayer flips, uniform rate `gamma`.
pub fn honeycomb_problem(nx: usize, ny: usize, gamma: f64, flips_u: &[usize], flips_v: &[usize]) -> SingleParticleProblem {
    let g = build_lattice(LatticeKind::Honeycomb, nx, ny, true).expect("valid lattice");
    let sector = random_sector(&g, 7, flips_u.iter().copied(), flips_v.iter().copied());
    let gauge = realize_fluxes(&g, &sector).expect("consistent sector");
    SingleParticleProblem::uniform(&g, &gauge, gamma).expect("valid problem")
}

pub fn antisymmetric_real(dim: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    antisymmetric(dim, || rng.gen_range(-1.0..1.0))
}

pub fn antisymmetric_complex(dim: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    antisymmetric(dim, || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn antisymmetric<T: Copy + Default + std::ops::Neg<Output = T>>(dim: usize, mut draw: impl FnMut() -> T) -> Array2<T> {
    let mut m = Array2::from_elem((dim, dim), T::default());
    for i in 0..dim {
        for j in i + 1..dim {
            let x = draw();
            m[[i, j]] = x;
            m[[j, i]] = -x;
        }
    }
    m
}
