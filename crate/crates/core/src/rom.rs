//! Group-POD reduced model.
//!
//! A GFE trajectory at `ξ` supplies snapshots; the eigenvectors of their
//! mass-weighted correlation matrix give the POD modes `ψ`. The reduced model
//! evolves the fluctuation `v = u - U` around the snapshot mean `U` in the span
//! of `ψ`. The quadratic term is grouped through the node values `Γ` of the
//! modes so that `N̂ = Γᵀ N Γ̂` is assembled once.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::{initial_state, sigma_load, FemOperators, Mesh1D, SolverConfig, Trajectory, NEWTON_MAX_ITER, NEWTON_TOL};
use crate::forcing::{ForcingSpec, RandomPoint};
use crate::linalg::{eig_sym, BidiagonalFactor, EigDecomposition, SymMatrix};

/// Eigenvalues at or below `MODE_TOL * λ_1` are treated as numerically zero.
pub const MODE_TOL: f64 = 1e-12;

/// Snapshot matrix together with where its columns came from.
#[derive(Clone, Debug)]
pub struct Snapshots {
    /// Column `i` is `α(t_i)`.
    pub matrix: DMatrix<f64>,
    pub times: Vec<f64>,
    /// Trajectory level of each column.
    pub levels: Vec<usize>,
}

/// The initial state plus `count` equally spaced levels `t_1 = T/S, …, t_S = T`,
/// so `count + 1` columns in all.
pub fn build_snapshots(traj: &Trajectory, count: usize) -> Result<Snapshots> {
    let steps = traj.levels() - 1;
    if count == 0 || count > steps || !steps.is_multiple_of(count) {
        return Err(Error::BadCount {
            requested: count,
            available: steps,
        });
    }
    let stride = steps / count;
    let levels: Vec<usize> = (0..=count).map(|i| i * stride).collect();
    let n = traj.states.nrows();
    let mut matrix = DMatrix::zeros(n, levels.len());
    for (c, &l) in levels.iter().enumerate() {
        matrix.set_column(c, &traj.states.column(l));
    }
    Ok(Snapshots {
        matrix,
        times: levels.iter().map(|&l| traj.times[l]).collect(),
        levels,
    })
}

/// `K = (1/S) Ỹᵀ Ỹ` with `Ỹ = Lᵀ Y`; entry `(i, j)` is `(w_i, w_j)/S`.
pub fn correlation(y: &DMatrix<f64>, chol: &BidiagonalFactor) -> Result<SymMatrix> {
    if y.nrows() != chol.diag.len() {
        return Err(Error::DimMismatch {
            expected: chol.diag.len(),
            found: y.nrows(),
        });
    }
    let weighted = chol.transpose_mul(y);
    let s = y.ncols() as f64;
    let gram = weighted.transpose() * &weighted;
    Ok(SymMatrix::from_lower_fn(y.ncols(), |i, j| gram[(i, j)] / s))
}

/// Count of eigenvalues above `MODE_TOL * λ_1`.
pub fn numerical_rank(eig: &EigDecomposition) -> usize {
    if eig.is_empty() || !(eig.values[0] > 0.0) {
        return 0;
    }
    let cutoff = MODE_TOL * eig.values[0];
    eig.values.iter().take_while(|&&l| l > cutoff).count()
}

/// `ψ = Y Z (SΛ)^{-1/2}`, first `modes` columns.
pub fn pod_modes(y: &DMatrix<f64>, eig: &EigDecomposition, modes: usize) -> Result<DMatrix<f64>> {
    let rank = numerical_rank(eig);
    if modes > rank {
        return Err(Error::RankDeficient {
            requested: modes,
            rank,
        });
    }
    let s = y.ncols() as f64;
    let z = eig.vectors.columns(0, modes);
    let mut psi = y * z;
    for k in 0..modes {
        let scale = 1.0 / (s * eig.values[k]).sqrt();
        psi.column_mut(k).scale_mut(scale);
    }
    Ok(psi)
}

/// Arithmetic mean of the snapshot columns.
pub fn mean_flow(y: &DMatrix<f64>) -> Vec<f64> {
    let s = y.ncols() as f64;
    (0..y.nrows()).map(|i| y.row(i).sum() / s).collect()
}

/// POD basis built from one high-fidelity trajectory.
#[derive(Clone, Debug)]
pub struct PodBasis {
    /// `N × M` mode coefficients in the hat basis.
    pub modes: DMatrix<f64>,
    /// Full spectrum of the correlation matrix; the first `M` pairs are retained.
    pub spectrum: EigDecomposition,
    pub mean_flow: Vec<f64>,
    pub snapshots: Snapshots,
    pub source_point: RandomPoint,
    pub mesh: Mesh1D,
}

impl PodBasis {
    pub fn build(traj: &Trajectory, ops: &FemOperators, snapshot_count: usize, modes: usize) -> Result<Self> {
        let snapshots = build_snapshots(traj, snapshot_count)?;
        let k = correlation(&snapshots.matrix, &ops.chol)?;
        let spectrum = eig_sym(&k)?;
        let psi = pod_modes(&snapshots.matrix, &spectrum, modes)?;
        Ok(PodBasis {
            modes: psi,
            mean_flow: mean_flow(&snapshots.matrix),
            spectrum,
            snapshots,
            source_point: traj.point.clone(),
            mesh: ops.mesh,
        })
    }

    /// Like [`PodBasis::build`] but keeps `min(modes, numerical rank)` modes.
    pub fn build_up_to(traj: &Trajectory, ops: &FemOperators, snapshot_count: usize, modes: usize) -> Result<Self> {
        let snapshots = build_snapshots(traj, snapshot_count)?;
        let k = correlation(&snapshots.matrix, &ops.chol)?;
        let spectrum = eig_sym(&k)?;
        let m = modes.min(numerical_rank(&spectrum));
        let psi = pod_modes(&snapshots.matrix, &spectrum, m)?;
        Ok(PodBasis {
            modes: psi,
            mean_flow: mean_flow(&snapshots.matrix),
            spectrum,
            snapshots,
            source_point: traj.point.clone(),
            mesh: ops.mesh,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.ncols()
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshots.matrix.ncols()
    }

    pub fn eigvals(&self) -> &[f64] {
        &self.spectrum.values.as_slice()[..self.n_modes()]
    }

    /// Retained eigenvectors `Z` (`S × M`).
    pub fn eigvecs(&self) -> DMatrix<f64> {
        self.spectrum.vectors.columns(0, self.n_modes()).into_owned()
    }

    /// Drops all but the leading `m` modes.
    pub fn truncated(&self, m: usize) -> PodBasis {
        let mut b = self.clone();
        b.modes = self.modes.columns(0, m.min(self.n_modes())).into_owned();
        b
    }
}

/// `[a1a1, a1a2, …, a1aM, a2a2, …, aMaM]`.
pub fn quad_pack(a: &[f64]) -> Vec<f64> {
    let m = a.len();
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for j in 0..m {
        for l in j..m {
            out.push(a[j] * a[l]);
        }
    }
    out
}

/// Derivative of [`quad_pack`] with respect to `a` (`P × M`).
pub fn quad_pack_jacobian(a: &[f64]) -> DMatrix<f64> {
    let m = a.len();
    let mut jac = DMatrix::zeros(m * (m + 1) / 2, m);
    let mut row = 0;
    for j in 0..m {
        for l in j..m {
            jac[(row, j)] += a[l];
            jac[(row, l)] += a[j];
            row += 1;
        }
    }
    jac
}

/// Rows `γ̂_n = [γ_n1², 2γ_n1γ_n2, …, γ_nM²]`, so that `Γ̂ â = (Γa) ⊙ (Γa)`.
pub fn gamma_hat(gamma: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = gamma.shape();
    let mut out = DMatrix::zeros(n, m * (m + 1) / 2);
    for r in 0..n {
        let mut c = 0;
        for j in 0..m {
            for l in j..m {
                let f = if j == l { 1.0 } else { 2.0 };
                out[(r, c)] = f * gamma[(r, j)] * gamma[(r, l)];
                c += 1;
            }
        }
    }
    out
}

/// Reduced operators for `mass_r ȧ = -lin_r a - ½ N̂ â - V(t)`,
/// `V(t) = load_const - c(t) load_sigma` where `c(t) = Σ ζ_k h_k(t)`.
#[derive(Clone, Debug)]
pub struct RomOperators {
    /// `(ψ_j, ψ_i)`.
    pub mass_r: DMatrix<f64>,
    /// `μ(ψ'_j, ψ'_i) + (Uψ'_j + U'ψ_j, ψ_i)`, the advective part in grouped form.
    pub lin_r: DMatrix<f64>,
    /// `Γᵀ N Γ̂`.
    pub nhat: DMatrix<f64>,
    /// `γ_nj = ψ_j(x_n)`.
    pub gamma: DMatrix<f64>,
    pub gamma_hat: DMatrix<f64>,
    /// `(UU', ψ_i) + μ(U', ψ'_i)`, grouped like the high-fidelity flux.
    pub load_const: DVector<f64>,
    /// `(σ, ψ_i)`.
    pub load_sigma: DVector<f64>,
    pub modes: DMatrix<f64>,
    pub mean_flow: Vec<f64>,
    pub mesh: Mesh1D,
}

fn tri_mul_cols(t: &crate::linalg::Tridiagonal, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        let col = t.mul_vec(m.column(c).as_slice());
        out.set_column(c, &DVector::from_vec(col));
    }
    out
}

/// Assembles the reduced system for the basis `modes` around `mean_flow`.
pub fn assemble_rom(
    modes: &DMatrix<f64>,
    mean_flow: &[f64],
    mesh: &Mesh1D,
    fem: &FemOperators,
    forcing: &ForcingSpec,
) -> Result<RomOperators> {
    let n = fem.mesh.n_interior();
    if *mesh != fem.mesh || modes.nrows() != n || mean_flow.len() != n {
        return Err(Error::MeshMismatch);
    }
    let psi = modes;
    let psi_t = psi.transpose();
    // hat functions interpolate, so node values are the coefficients
    let gamma = psi.clone();
    let ghat = gamma_hat(&gamma);
    let nhat = &psi_t * tri_mul_cols(&fem.advection, &ghat);

    let mass_r = &psi_t * tri_mul_cols(&fem.mass, psi);
    let stiff_r = &psi_t * tri_mul_cols(&fem.stiffness, psi);
    let u_adv = fem.advection.scale_columns(mean_flow);
    let conv_r = &psi_t * tri_mul_cols(&u_adv, psi);
    let lin_r = stiff_r * fem.mu + conv_r;

    let uu: Vec<f64> = mean_flow.iter().map(|u| u * u).collect();
    let flux = DVector::from_vec(fem.advection.mul_vec(&uu));
    let diff = DVector::from_vec(fem.stiffness.mul_vec(mean_flow));
    let load_const = &psi_t * (flux * 0.5 + diff * fem.mu);
    let load_sigma = &psi_t * DVector::from_vec(sigma_load(forcing, mesh));

    Ok(RomOperators {
        mass_r,
        lin_r,
        nhat,
        gamma,
        gamma_hat: ghat,
        load_const,
        load_sigma,
        modes: psi.clone(),
        mean_flow: mean_flow.to_vec(),
        mesh: *mesh,
    })
}

impl RomOperators {
    pub fn from_pod(basis: &PodBasis, fem: &FemOperators, forcing: &ForcingSpec) -> Result<Self> {
        assemble_rom(&basis.modes, &basis.mean_flow, &basis.mesh, fem, forcing)
    }

    pub fn n_modes(&self) -> usize {
        self.modes.ncols()
    }

    /// Lifts reduced coefficients to FE coefficients `U + ψ a`.
    pub fn lift(&self, a: &[f64]) -> Vec<f64> {
        let v = &self.modes * DVector::from_column_slice(a);
        self.mean_flow.iter().zip(v.iter()).map(|(u, v)| u + v).collect()
    }
}

/// Reduced trajectory and its lift to the FE space.
#[derive(Clone, Debug)]
pub struct RomSolution {
    /// Column `k` holds `a(t_k)`.
    pub coeffs: DMatrix<f64>,
    pub lifted: Trajectory,
}

/// Solves the reduced model at `zeta` with the same Crank–Nicolson/Newton
/// scheme and time grid as the high-fidelity solver.
pub fn solve_rom(zeta: &RandomPoint, rom: &RomOperators, cfg: &SolverConfig, fem: &FemOperators) -> Result<RomSolution> {
    if zeta.dim() != cfg.forcing.dim {
        return Err(Error::DimMismatch {
            expected: cfg.forcing.dim,
            found: zeta.dim(),
        });
    }
    if rom.mesh != cfg.mesh || fem.mesh != cfg.mesh {
        return Err(Error::MeshMismatch);
    }
    let m = rom.n_modes();
    let dt = cfg.dt();
    let times = cfg.times();

    let alpha0 = initial_state(&cfg.u0, fem, &cfg.mesh)?;
    let v0: Vec<f64> = alpha0.iter().zip(&rom.mean_flow).map(|(a, u)| a - u).collect();
    let proj = rom.modes.transpose() * DVector::from_vec(fem.mass.mul_vec(&v0));
    let mass_lu = rom.mass_r.clone().lu();
    let mut a = mass_lu.solve(&proj).ok_or(Error::SingularMass)?;

    let mut coeffs = DMatrix::zeros(m, cfg.steps + 1);
    coeffs.set_column(0, &a);

    let lhs_linear = &rom.mass_r / dt + &rom.lin_r * 0.5;
    let rhs_linear = &rom.mass_r / dt - &rom.lin_r * 0.5;
    let load = |t: f64| -> Result<DVector<f64>> {
        let c = cfg.forcing.temporal_coefficient(zeta, t)?;
        Ok(&rom.load_const - &rom.load_sigma * c)
    };
    let mut v_prev = load(times[0])?;
    for k in 0..cfg.steps {
        let v_next = load(times[k + 1])?;
        let ahat = DVector::from_vec(quad_pack(a.as_slice()));
        let known = &rhs_linear * &a - &rom.nhat * ahat * 0.25 - (&v_prev + &v_next) * 0.5;
        let mut next = a.clone();
        for iter in 0..=NEWTON_MAX_ITER {
            let nhat_term = &rom.nhat * DVector::from_vec(quad_pack(next.as_slice()));
            let residual = &lhs_linear * &next + nhat_term * 0.25 - &known;
            let rnorm = residual.amax();
            if !rnorm.is_finite() {
                return Err(Error::NewtonDivergence { step: k, residual: rnorm });
            }
            if rnorm <= NEWTON_TOL {
                break;
            }
            if iter == NEWTON_MAX_ITER {
                return Err(Error::NewtonDivergence { step: k, residual: rnorm });
            }
            let jac = &lhs_linear + &rom.nhat * quad_pack_jacobian(next.as_slice()) * 0.25;
            let delta = jac
                .lu()
                .solve(&residual)
                .ok_or(Error::NewtonDivergence { step: k, residual: rnorm })?;
            next -= delta;
        }
        a = next;
        coeffs.set_column(k + 1, &a);
        v_prev = v_next;
    }

    let n = cfg.mesh.n_interior();
    let mut states = &rom.modes * &coeffs;
    for c in 0..states.ncols() {
        for i in 0..n {
            states[(i, c)] += rom.mean_flow[i];
        }
    }
    Ok(RomSolution {
        coeffs,
        lifted: Trajectory {
            times,
            states,
            point: zeta.clone(),
        },
    })
}

/// `‖approx - reference‖_M / ‖reference‖_M`.
pub fn relative_mass_error(fem: &FemOperators, approx: &[f64], reference: &[f64]) -> f64 {
    let diff: Vec<f64> = approx.iter().zip(reference).map(|(a, b)| a - b).collect();
    let den = fem.mass_norm_sq(reference).sqrt();
    let num = fem.mass_norm_sq(&diff).sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Relative mass-weighted error accumulated over the given trajectory levels.
pub fn relative_trajectory_error(fem: &FemOperators, approx: &Trajectory, reference: &Trajectory, levels: &[usize]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &l in levels {
        let diff: Vec<f64> = approx.state(l).iter().zip(reference.state(l)).map(|(a, b)| a - b).collect();
        num += fem.mass_norm_sq(&diff);
        den += fem.mass_norm_sq(reference.state(l));
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}
