//! Multi-fidelity sparse-grid stochastic collocation for the viscous Burgers
//! equation driven by truncated Brownian forcing.

pub mod error;
pub mod fem;
pub mod forcing;
pub mod linalg;
pub mod mc;
pub mod multifid;
pub mod quadrature;
pub mod rom;
pub mod sensitivity;
pub mod sparse_grid;

pub use error::{Error, Result};
pub use fem::{assemble, solve_gfe, solve_gfe_with, FemOperators, InitialCondition, Mesh1D, SolverConfig, Trajectory};
pub use forcing::{Amplitude, ForcingSpec, RandomPoint};
pub use mc::{mc_moments, sample_point, McConfig, McMoments};
pub use multifid::{reference_full_run, run_multifid, MomentErrors, MultifidConfig, RunReport, SolveCache, SolverTag};
pub use rom::{relative_mass_error, solve_rom, PodBasis, RomOperators, RomSolution};
pub use sensitivity::{improve_basis, BasisKind, ImprovedBasis, SensitivityBundle};
pub use sparse_grid::{level_convention, smolyak_plan, SparseGridPlan};
