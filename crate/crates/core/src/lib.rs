//! Dissipative gamma-matrix Lindbladians on properly edge-colored graphs.
//!
//! Each strong/weak symmetry sector reduces to a quadratic problem of
//! Majorana fermions hopping in a static Z2 gauge field. The crate builds
//! those problems, diagonalizes them in the parity- or number-conserving
//! form, and checks the result against brute-force many-body superoperators
//! on small graphs.

pub mod error;
pub mod gauge;
pub mod graph;
pub mod linalg;
pub mod number;
pub mod oracle;
pub mod parity;
pub mod pfaffian;
pub mod quadratic;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use gauge::{
    count_independent_fluxes, flux, random_sector, realize_fluxes, Flux, FluxCount, FluxPreset, GaugeConfig,
    SectorSpec,
};
pub use graph::{build_lattice, validate, ColoredGraph, Cycle, Diagnostics, Edge, LatticeKind, Step, Surface};
pub use number::{bendixson_bounds, solve_number, NumberGap, NumberSpectrum};
pub use parity::{solve_parity, ParitySolution, ParitySpectrum, ParityVerdict, SolveOptions};
pub use pfaffian::{pfaffian, pfaffian_log, LogPfaffian};
pub use sweep::{run_sweep, SweepConfig, SweepPlan, SweepRow};
pub use quadratic::{Mode, SingleParticleProblem, HOPPING_SCALE};
