//! Shared inputs for the kernel benchmarks in `benches/`.

use vll_core::init::{random_smooth, RandomSpectrum};
use vll_core::{make_grid, ScalarField};

/// Seeded smooth vorticity on an n² grid.
pub fn vorticity(n: usize) -> ScalarField {
    let grid = make_grid(n).expect("valid grid");
    random_smooth(&grid, &RandomSpectrum { seed: 3, ..RandomSpectrum::default() }).expect("n resolves kmax")
}
