//! Multi-fidelity collocation: each node either reuses a nearby cached
//! high-fidelity solve through an improved reduced model, or runs the
//! high-fidelity solver and joins the cache.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{assemble, solve_gfe_with, FemOperators, SolverConfig, Trajectory};
use crate::forcing::RandomPoint;
use crate::rom::{relative_mass_error, solve_rom, PodBasis};
use crate::sensitivity::{improve_basis, BasisKind, ImprovedBasis, SensitivityBundle};
use crate::sparse_grid::{moment_field, SparseGridPlan};

#[derive(Clone, Debug, PartialEq)]
pub struct MultifidConfig {
    pub solver: SolverConfig,
    /// Snapshots per cached trajectory; must divide the step count.
    pub snapshots: usize,
    /// Requested modes; fewer are used when the snapshot rank is lower.
    pub modes: usize,
    pub kind: BasisKind,
    pub extrapolate_mean: bool,
}

impl MultifidConfig {
    pub fn new(solver: SolverConfig, snapshots: usize, modes: usize) -> Self {
        MultifidConfig {
            solver,
            snapshots,
            modes,
            kind: BasisKind::Extrapolated,
            extrapolate_mean: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CacheEntry {
    pub point: RandomPoint,
    pub trajectory: Trajectory,
    pub basis: PodBasis,
    /// Plan node that produced the entry.
    pub node: usize,
}

#[derive(Clone, Debug)]
pub struct SolveCache {
    pub eta: f64,
    entries: Vec<CacheEntry>,
}

impl SolveCache {
    pub fn new(eta: f64) -> Self {
        SolveCache { eta, entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CacheEntry] {
        &self.entries
    }

    pub fn insert(&mut self, entry: CacheEntry) {
        self.entries.push(entry);
    }

    /// Index of the nearest entry (Euclidean) among those with `‖ξ - ζ‖_∞ < η`;
    /// earlier entries win ties.
    pub fn lookup(&self, zeta: &RandomPoint) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if !(e.point.dist_inf(zeta) < self.eta) {
                continue;
            }
            let d = e.point.dist2(zeta);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }
}

pub fn neighborhood_lookup<'a>(cache: &'a SolveCache, zeta: &RandomPoint) -> Option<&'a CacheEntry> {
    cache.lookup(zeta).map(|i| &cache.entries[i])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverTag {
    HighFidelity,
    Reduced,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub eta: f64,
    pub fe_calls: usize,
    pub rom_calls: usize,
    pub tags: Vec<SolverTag>,
    /// Donor node of each reduced solve.
    pub donors: Vec<Option<usize>>,
    /// Modes actually used by each reduced solve.
    pub rom_modes: Vec<usize>,
    /// Column `j` is `u(T)` at node `j`.
    pub final_states: DMatrix<f64>,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub variance: Vec<f64>,
    pub elapsed: Duration,
    pub convention: String,
}

/// Relative mass-norm errors of one report against another.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentErrors {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

impl RunReport {
    fn assemble(plan: &SparseGridPlan, eta: f64, tags: Vec<SolverTag>, donors: Vec<Option<usize>>, rom_modes: Vec<usize>, finals: DMatrix<f64>, start: Instant) -> Result<Self> {
        let mean = moment_field(plan, &finals, 1)?;
        let second_moment = moment_field(plan, &finals, 2)?;
        let variance = mean.iter().zip(&second_moment).map(|(m, s)| s - m * m).collect();
        let fe_calls = tags.iter().filter(|t| **t == SolverTag::HighFidelity).count();
        Ok(RunReport {
            eta,
            fe_calls,
            rom_calls: tags.len() - fe_calls,
            tags,
            donors,
            rom_modes,
            final_states: finals,
            mean,
            second_moment,
            variance,
            elapsed: start.elapsed(),
            convention: plan.convention(),
        })
    }

    pub fn errors_against(&self, reference: &RunReport, fem: &FemOperators) -> MomentErrors {
        MomentErrors {
            mean: relative_mass_error(fem, &self.mean, &reference.mean),
            second_moment: relative_mass_error(fem, &self.second_moment, &reference.second_moment),
            variance: relative_mass_error(fem, &self.variance, &reference.variance),
        }
    }
}

/// Basis for a reduced solve at `zeta` from a cached entry. Modes whose
/// eigenvalue is too close to another are dropped before differentiating.
pub fn donor_basis(entry: &CacheEntry, zeta: &RandomPoint, cfg: &MultifidConfig, fem: &FemOperators) -> Result<ImprovedBasis> {
    let mut basis = entry.basis.clone();
    if cfg.kind == BasisKind::Plain {
        return Ok(ImprovedBasis::plain(&basis));
    }
    loop {
        match SensitivityBundle::toward(&basis, &entry.trajectory, zeta, &cfg.solver, fem) {
            Ok(bundle) => {
                return match improve_basis(&basis, &bundle, cfg.kind, 1.0, fem, cfg.extrapolate_mean) {
                    Ok(b) => Ok(b),
                    Err(Error::DegenerateBasis) => {
                        log::warn!("improved basis degenerate toward {:?}; using plain modes", zeta.coords());
                        Ok(ImprovedBasis::plain(&basis))
                    }
                    Err(e) => Err(e),
                };
            }
            Err(Error::NearDegenerateEigenvalue { k, j, gap }) => {
                log::warn!("eigenvalues {k} and {j} within {gap:e}; keeping {k} modes");
                if k == 0 {
                    return Ok(ImprovedBasis::plain(&entry.basis));
                }
                basis = basis.truncated(k);
            }
            Err(e) => return Err(e),
        }
    }
}

fn high_fidelity(zeta: &RandomPoint, cfg: &MultifidConfig, fem: &FemOperators) -> Result<(Trajectory, PodBasis)> {
    let traj = solve_gfe_with(zeta, &cfg.solver, fem)?;
    let basis = PodBasis::build_up_to(&traj, fem, cfg.snapshots, cfg.modes)?;
    Ok((traj, basis))
}

/// Visits plan nodes in order, switching fidelity by cache coverage.
pub fn run_multifid(plan: &SparseGridPlan, eta: f64, cfg: &MultifidConfig) -> Result<RunReport> {
    if plan.dim != cfg.solver.forcing.dim {
        return Err(Error::DimMismatch {
            expected: cfg.solver.forcing.dim,
            found: plan.dim,
        });
    }
    let start = Instant::now();
    let fem = assemble(&cfg.solver.mesh, cfg.solver.mu)?;
    let n = cfg.solver.mesh.n_interior();
    let mut cache = SolveCache::new(eta);
    let mut tags = Vec::with_capacity(plan.len());
    let mut donors = Vec::with_capacity(plan.len());
    let mut rom_modes = Vec::with_capacity(plan.len());
    let mut finals = DMatrix::zeros(n, plan.len());
    for (j, zeta) in plan.nodes.iter().enumerate() {
        match cache.lookup(zeta) {
            Some(i) => {
                let entry = &cache.entries[i];
                let fin = (|| {
                    let improved = donor_basis(entry, zeta, cfg, &fem)?;
                    let ops = improved.rom_operators(&fem, &cfg.solver)?;
                    let sol = solve_rom(zeta, &ops, &cfg.solver, &fem)?;
                    Ok((sol.lifted.final_state().to_vec(), improved.n_modes()))
                })()
                .map_err(|e| Error::at_node(j, e))?;
                finals.set_column(j, &DVector::from_vec(fin.0));
                tags.push(SolverTag::Reduced);
                donors.push(Some(entry.node));
                rom_modes.push(fin.1);
            }
            None => {
                let (traj, basis) = high_fidelity(zeta, cfg, &fem).map_err(|e| Error::at_node(j, e))?;
                finals.set_column(j, &DVector::from_column_slice(traj.final_state()));
                cache.insert(CacheEntry {
                    point: zeta.clone(),
                    trajectory: traj,
                    basis,
                    node: j,
                });
                tags.push(SolverTag::HighFidelity);
                donors.push(None);
                rom_modes.push(0);
            }
        }
    }
    RunReport::assemble(plan, eta, tags, donors, rom_modes, finals, start)
}

/// High-fidelity solve at every node, in parallel.
pub fn reference_full_run(plan: &SparseGridPlan, cfg: &SolverConfig) -> Result<RunReport> {
    if plan.dim != cfg.forcing.dim {
        return Err(Error::DimMismatch {
            expected: cfg.forcing.dim,
            found: plan.dim,
        });
    }
    let start = Instant::now();
    let fem = assemble(&cfg.mesh, cfg.mu)?;
    let results: Vec<Result<Vec<f64>>> = plan
        .nodes
        .par_iter()
        .enumerate()
        .map(|(j, z)| {
            solve_gfe_with(z, cfg, &fem)
                .map(|t| t.final_state().to_vec())
                .map_err(|e| Error::at_node(j, e))
        })
        .collect();
    let n = cfg.mesh.n_interior();
    let mut finals = DMatrix::zeros(n, plan.len());
    for (j, r) in results.into_iter().enumerate() {
        finals.set_column(j, &DVector::from_vec(r?));
    }
    let len = plan.len();
    RunReport::assemble(plan, 0.0, vec![SolverTag::HighFidelity; len], vec![None; len], vec![0; len], finals, start)
}
