//! Sensitivity of the POD basis along `θ ↦ ξ + θ d` and the improved bases it yields.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::{sigma_load, CnStepper, FemOperators, SolverConfig, Trajectory};
use crate::forcing::RandomPoint;
use crate::linalg::{gram_schmidt, BidiagonalFactor, EigDecomposition, SymMatrix, DEFAULT_NULL_TOL};
use crate::rom::{assemble_rom, numerical_rank, PodBasis, RomOperators};

/// A retained `λ_k` within `GAP_TOL * λ_k` of another eigenvalue is rejected.
pub const GAP_TOL: f64 = 1e-6;
/// Gram–Schmidt drop tolerance in the mass norm.
pub const DROP_TOL: f64 = 1e-10;

/// Solves the linearized equation for `z = ∂α/∂θ` along `direction`, with
/// `α` read from `traj` at each level. Returns all `K + 1` levels.
pub fn solve_sensitivity_pde(
    direction: &RandomPoint,
    traj: &Trajectory,
    cfg: &SolverConfig,
    fem: &FemOperators,
) -> Result<DMatrix<f64>> {
    let n = cfg.mesh.n_interior();
    if fem.mesh != cfg.mesh || traj.states.nrows() != n {
        return Err(Error::GridMismatch(format!(
            "trajectory has {} unknowns, mesh has {n}",
            traj.states.nrows()
        )));
    }
    let times = cfg.times();
    if traj.times.len() != times.len() || traj.times.iter().zip(&times).any(|(a, b)| (a - b).abs() > 1e-12 * cfg.horizon()) {
        return Err(Error::GridMismatch(format!(
            "trajectory has {} levels, time grid has {}",
            traj.times.len(),
            times.len()
        )));
    }
    if direction.dim() != cfg.forcing.dim {
        return Err(Error::DimMismatch {
            expected: cfg.forcing.dim,
            found: direction.dim(),
        });
    }
    let b = sigma_load(&cfg.forcing, &cfg.mesh);
    let stepper = CnStepper::new(fem, cfg.dt());
    let mut out = DMatrix::zeros(n, cfg.steps + 1);
    let mut z = vec![0.0; n];
    let mut c_prev = cfg.forcing.temporal_coefficient(direction, times[0])?;
    let mut src = vec![0.0; n];
    for k in 0..cfg.steps {
        let c_next = cfg.forcing.temporal_coefficient(direction, times[k + 1])?;
        let c_mid = 0.5 * (c_prev + c_next);
        for i in 0..n {
            src[i] = c_mid * b[i];
        }
        z = stepper.linearized_step(&z, traj.state(k), traj.state(k + 1), &src)?;
        out.set_column(k + 1, &DVector::from_column_slice(&z));
        c_prev = c_next;
    }
    Ok(out)
}

/// Columns of `z` at the given levels.
pub fn sample_levels(z: &DMatrix<f64>, levels: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(z.nrows(), levels.len());
    for (c, &l) in levels.iter().enumerate() {
        out.set_column(c, &z.column(l));
    }
    out
}

/// `K^θ = (1/S)(Ỹ^θᵀ Ỹ + Ỹᵀ Ỹ^θ)` with `Ỹ = LᵀY`.
pub fn correlation_sensitivity(y: &DMatrix<f64>, y_theta: &DMatrix<f64>, chol: &BidiagonalFactor) -> Result<SymMatrix> {
    if y.shape() != y_theta.shape() {
        return Err(Error::DimMismatch {
            expected: y.ncols(),
            found: y_theta.ncols(),
        });
    }
    if y.nrows() != chol.diag.len() {
        return Err(Error::DimMismatch {
            expected: chol.diag.len(),
            found: y.nrows(),
        });
    }
    let w = chol.transpose_mul(y);
    let wt = chol.transpose_mul(y_theta);
    let cross = wt.transpose() * &w;
    let s = y.ncols() as f64;
    Ok(SymMatrix::from_lower_fn(y.ncols(), |i, j| (cross[(i, j)] + cross[(j, i)]) / s))
}

/// Sensitivities of the leading `modes` eigenpairs of `K`, given `eig = eig_sym(K)`.
pub fn eigen_sensitivity(
    k_theta: &SymMatrix,
    eig: &EigDecomposition,
    modes: usize,
    null_tol: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let s = eig.len();
    if k_theta.order() != s {
        return Err(Error::DimMismatch {
            expected: s,
            found: k_theta.order(),
        });
    }
    if modes > s {
        return Err(Error::BadCount {
            requested: modes,
            available: s,
        });
    }
    for k in 0..modes {
        let gap_tol = GAP_TOL * eig.values[k].abs();
        for j in 0..s {
            if j == k {
                continue;
            }
            let gap = (eig.values[k] - eig.values[j]).abs();
            if gap <= gap_tol {
                return Err(Error::NearDegenerateEigenvalue { k, j, gap });
            }
        }
    }
    let kt = k_theta.as_matrix();
    let mut lam_theta = DVector::zeros(modes);
    let mut z_theta = DMatrix::zeros(s, modes);
    for k in 0..modes {
        let zk = eig.vectors.column(k).into_owned();
        let kz = kt * &zk;
        let lt = zk.dot(&kz);
        lam_theta[k] = lt;
        let rhs = -(kz - &zk * lt);
        let sk = eig.shifted_pseudo_solve(eig.values[k], &rhs, null_tol);
        let free = zk.dot(&sk);
        z_theta.set_column(k, &(sk - &zk * free));
    }
    Ok((lam_theta, z_theta))
}

/// `ψ^θ = Y^θ Z (SΛ)^{-1/2} + Y Z^θ (SΛ)^{-1/2} - ½ ψ Λ^θ Λ^{-1}`.
pub fn mode_sensitivity(
    basis: &PodBasis,
    y_theta: &DMatrix<f64>,
    lam_theta: &DVector<f64>,
    z_theta: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let m = z_theta.ncols();
    let rank = numerical_rank(&basis.spectrum);
    if m > rank || m > basis.n_modes() {
        return Err(Error::RankDeficient { requested: m, rank });
    }
    let y = &basis.snapshots.matrix;
    let s = y.ncols() as f64;
    let z = basis.spectrum.vectors.columns(0, m);
    let mut psi_theta = y_theta * z + y * z_theta;
    for k in 0..m {
        let lam = basis.spectrum.values[k];
        let scale = 1.0 / (s * lam).sqrt();
        let mut col = psi_theta.column_mut(k);
        col.scale_mut(scale);
        col.axpy(-0.5 * lam_theta[k] / lam, &basis.modes.column(k), 1.0);
    }
    Ok(psi_theta)
}

/// Every derivative along one direction for one cached basis.
#[derive(Clone, Debug)]
pub struct SensitivityBundle {
    /// `N × S`, sampled at the snapshot levels.
    pub y_theta: DMatrix<f64>,
    pub k_theta: SymMatrix,
    pub lam_theta: DVector<f64>,
    pub z_theta: DMatrix<f64>,
    pub psi_theta: DMatrix<f64>,
    pub direction: RandomPoint,
    pub base_point: RandomPoint,
}

impl SensitivityBundle {
    /// Sensitivities of `basis` (built from `traj`) along `direction`.
    pub fn compute(
        basis: &PodBasis,
        traj: &Trajectory,
        direction: &RandomPoint,
        cfg: &SolverConfig,
        fem: &FemOperators,
    ) -> Result<Self> {
        let z = solve_sensitivity_pde(direction, traj, cfg, fem)?;
        let y_theta = sample_levels(&z, &basis.snapshots.levels);
        let k_theta = correlation_sensitivity(&basis.snapshots.matrix, &y_theta, &fem.chol)?;
        let (lam_theta, z_theta) = eigen_sensitivity(&k_theta, &basis.spectrum, basis.n_modes(), DEFAULT_NULL_TOL)?;
        let psi_theta = mode_sensitivity(basis, &y_theta, &lam_theta, &z_theta)?;
        Ok(SensitivityBundle {
            y_theta,
            k_theta,
            lam_theta,
            z_theta,
            psi_theta,
            direction: direction.clone(),
            base_point: traj.point.clone(),
        })
    }

    /// Direction `ζ - ξ` from the basis source point.
    pub fn toward(basis: &PodBasis, traj: &Trajectory, zeta: &RandomPoint, cfg: &SolverConfig, fem: &FemOperators) -> Result<Self> {
        let dir = traj.point.direction_to(zeta)?;
        Self::compute(basis, traj, &dir, cfg, fem)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Plain,
    Extrapolated,
    Expanded,
}

#[derive(Clone, Debug)]
pub struct ImprovedBasis {
    pub kind: BasisKind,
    /// M-orthonormal columns.
    pub modes: DMatrix<f64>,
    pub mean_flow: Vec<f64>,
    pub delta_theta: f64,
    /// Set when every sensitivity column was dropped from an expanded basis.
    pub sensitivity_dropped: bool,
}

impl ImprovedBasis {
    pub fn plain(basis: &PodBasis) -> Self {
        ImprovedBasis {
            kind: BasisKind::Plain,
            modes: basis.modes.clone(),
            mean_flow: basis.mean_flow.clone(),
            delta_theta: 0.0,
            sensitivity_dropped: false,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.ncols()
    }

    pub fn rom_operators(&self, fem: &FemOperators, cfg: &SolverConfig) -> Result<RomOperators> {
        assemble_rom(&self.modes, &self.mean_flow, &cfg.mesh, fem, &cfg.forcing)
    }
}

/// Extrapolated (`ψ + Δθ ψ^θ`) or expanded (`[ψ | Δθ ψ^θ]`) basis, M-orthonormalized.
///
/// `extrapolate_mean` also moves the mean flow by `Δθ` times the mean of the
/// snapshot sensitivities.
pub fn improve_basis(
    basis: &PodBasis,
    bundle: &SensitivityBundle,
    kind: BasisKind,
    delta_theta: f64,
    fem: &FemOperators,
    extrapolate_mean: bool,
) -> Result<ImprovedBasis> {
    let m = bundle.psi_theta.ncols();
    let psi = basis.modes.columns(0, m);
    let mut mean_flow = basis.mean_flow.clone();
    if extrapolate_mean {
        let s = bundle.y_theta.ncols() as f64;
        for (i, u) in mean_flow.iter_mut().enumerate() {
            *u += delta_theta * bundle.y_theta.row(i).sum() / s;
        }
    }
    match kind {
        BasisKind::Plain => Ok(ImprovedBasis {
            kind,
            modes: psi.into_owned(),
            mean_flow,
            delta_theta,
            sensitivity_dropped: false,
        }),
        BasisKind::Extrapolated => {
            let cols = psi + &bundle.psi_theta * delta_theta;
            let (q, kept) = gram_schmidt(&cols, &fem.mass, DROP_TOL);
            if kept.len() < m {
                return Err(Error::DegenerateBasis);
            }
            Ok(ImprovedBasis {
                kind,
                modes: q,
                mean_flow,
                delta_theta,
                sensitivity_dropped: false,
            })
        }
        BasisKind::Expanded => {
            let n = psi.nrows();
            let mut cols = DMatrix::zeros(n, 2 * m);
            cols.columns_mut(0, m).copy_from(&psi);
            cols.columns_mut(m, m).copy_from(&(&bundle.psi_theta * delta_theta));
            let (q, kept) = gram_schmidt(&cols, &fem.mass, DROP_TOL);
            if kept.iter().filter(|&&j| j < m).count() < m {
                return Err(Error::DegenerateBasis);
            }
            if kept.len() == m {
                log::warn!("expanded basis: every sensitivity column was dropped");
                return Ok(ImprovedBasis {
                    kind,
                    modes: psi.into_owned(),
                    mean_flow,
                    delta_theta,
                    sensitivity_dropped: true,
                });
            }
            Ok(ImprovedBasis {
                kind,
                modes: q,
                mean_flow,
                delta_theta,
                sensitivity_dropped: false,
            })
        }
    }
}
