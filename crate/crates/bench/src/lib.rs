//! Fixtures shared by the solver benchmarks.

use mfsc::linalg::SymMatrix;
use mfsc::{Amplitude, ForcingSpec, InitialCondition, Mesh1D, RandomPoint, SolverConfig};

pub fn solver(intervals: usize, steps: usize, d: usize) -> SolverConfig {
    SolverConfig {
        mesh: Mesh1D::uniform(intervals).expect("valid mesh"),
        mu: 0.01,
        steps,
        u0: InitialCondition::Standard,
        forcing: ForcingSpec::new(Amplitude::Standard, 0.8, d).expect("valid forcing"),
    }
}

pub fn point(d: usize) -> RandomPoint {
    RandomPoint::new((0..d).map(|k| 0.5 - 0.1 * k as f64).collect()).expect("finite")
}

/// Symmetric test matrix with a well separated spectrum.
pub fn sym_matrix(order: usize) -> SymMatrix {
    SymMatrix::from_lower_fn(order, |i, j| {
        if i == j {
            (order - i) as f64
        } else {
            1.0 / (1.0 + (i + j) as f64)
        }
    })
}
