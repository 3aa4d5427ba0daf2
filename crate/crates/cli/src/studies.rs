//! Experiment drivers shared by the commands and the acceptance suite.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use mfsc::rom::relative_trajectory_error;
use mfsc::{
    assemble, improve_basis, reference_full_run, relative_mass_error, run_multifid, sample_point, smolyak_plan, solve_gfe_with,
    solve_rom, BasisKind, FemOperators, ImprovedBasis, PodBasis, RandomPoint, Result, RunReport, SensitivityBundle,
    SolverConfig, SparseGridPlan,
};

use crate::config::StudyConfig;

/// Endpoints `ξ` and `ζ` of the sensitivity segment, drawn from the study seed.
pub fn segment_endpoints(cfg: &StudyConfig) -> (RandomPoint, RandomPoint) {
    let d = cfg.problem.d;
    (
        sample_point(cfg.sensitivity.seed, 0, d),
        sample_point(cfg.sensitivity.seed, 1, d),
    )
}

/// Unit vector from `xi` toward `zeta`.
pub fn unit_direction(xi: &RandomPoint, zeta: &RandomPoint) -> Result<RandomPoint> {
    let dir = xi.direction_to(zeta)?;
    let n = dir.norm();
    Ok(if n > 0.0 { dir.scaled(1.0 / n) } else { dir })
}

pub fn theta_grid(points: usize, half_width: f64) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    (0..points)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
        .collect()
}

/// Relative mass errors of each reduced model against the GFE at `ξ + θu`.
#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub theta: f64,
    pub plain: f64,
    pub extrapolated: f64,
    pub expanded: f64,
    pub pod_double: f64,
    pub plain_trajectory: f64,
    pub extrapolated_trajectory: f64,
    pub expanded_trajectory: f64,
    pub pod_double_trajectory: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub modes: usize,
    pub rows: Vec<StudyRow>,
}

fn rom_errors(basis: &ImprovedBasis, p: &RandomPoint, reference: &mfsc::Trajectory, cfg: &SolverConfig, fem: &FemOperators) -> Result<(f64, f64)> {
    let rom = basis.rom_operators(fem, cfg)?;
    let sol = solve_rom(p, &rom, cfg, fem)?;
    let levels: Vec<usize> = (0..reference.levels()).collect();
    Ok((
        relative_mass_error(fem, sol.lifted.final_state(), reference.final_state()),
        relative_trajectory_error(fem, &sol.lifted, reference, &levels),
    ))
}

/// Plain, extrapolated and expanded `M`-mode bases built at `ξ`, plus a plain
/// `2M`-mode basis, evaluated along the unit segment `ξ + θu`.
pub fn basis_study(cfg: &StudyConfig, thetas: &[f64]) -> Result<StudyReport> {
    let solver = cfg.solver().expect("validated config");
    let fem = assemble(&solver.mesh, solver.mu)?;
    let (xi, zeta) = segment_endpoints(cfg);
    let dir = unit_direction(&xi, &zeta)?;
    let m = cfg.discretization.modes;
    let s = cfg.discretization.snapshots;

    let traj = solve_gfe_with(&xi, &solver, &fem)?;
    let basis = PodBasis::build(&traj, &fem, s, m)?;
    let double = ImprovedBasis::plain(&PodBasis::build(&traj, &fem, s, 2 * m)?);
    let plain = ImprovedBasis::plain(&basis);
    let bundle = SensitivityBundle::compute(&basis, &traj, &dir, &solver, &fem)?;

    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let p = xi.offset(&dir, theta)?;
        let reference = solve_gfe_with(&p, &solver, &fem)?;
        let extrapolated = improve_basis(&basis, &bundle, BasisKind::Extrapolated, theta, &fem, false)?;
        let expanded = improve_basis(&basis, &bundle, BasisKind::Expanded, theta, &fem, false)?;
        let e_plain = rom_errors(&plain, &p, &reference, &solver, &fem)?;
        let e_extra = rom_errors(&extrapolated, &p, &reference, &solver, &fem)?;
        let e_expand = rom_errors(&expanded, &p, &reference, &solver, &fem)?;
        let e_double = rom_errors(&double, &p, &reference, &solver, &fem)?;
        rows.push(StudyRow {
            theta,
            plain: e_plain.0,
            extrapolated: e_extra.0,
            expanded: e_expand.0,
            pod_double: e_double.0,
            plain_trajectory: e_plain.1,
            extrapolated_trajectory: e_extra.1,
            expanded_trajectory: e_expand.1,
            pod_double_trajectory: e_double.1,
        });
    }
    Ok(StudyReport {
        xi: xi.coords().to_vec(),
        zeta: zeta.coords().to_vec(),
        modes: m,
        rows,
    })
}

/// Relative distance of analytic sensitivities from central differences, per mode.
#[derive(Clone, Debug, Serialize)]
pub struct FdRow {
    pub mode: usize,
    pub eigenvalue: f64,
    pub lambda: f64,
    pub eigenvector: f64,
    pub basis: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FdReport {
    pub step: f64,
    /// Relative Frobenius error of the snapshot sensitivities.
    pub snapshots: f64,
    pub rows: Vec<FdRow>,
}

impl FdReport {
    pub fn worst(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| [r.lambda, r.eigenvector, r.basis])
            .fold(self.snapshots, f64::max)
    }
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Analytic `Y^θ`, `λ^θ`, `Z^θ`, `ψ^θ` at `ξ` along the unit direction to `ζ`
/// against central differences of the POD pipeline with sign alignment.
pub fn fd_check(cfg: &StudyConfig) -> Result<FdReport> {
    let solver = cfg.solver().expect("validated config");
    let fem = assemble(&solver.mesh, solver.mu)?;
    let (xi, zeta) = segment_endpoints(cfg);
    let dir = unit_direction(&xi, &zeta)?;
    let m = cfg.discretization.modes;
    let s = cfg.discretization.snapshots;
    let h = cfg.sensitivity.fd_step;

    let traj = solve_gfe_with(&xi, &solver, &fem)?;
    let basis = PodBasis::build(&traj, &fem, s, m)?;
    let bundle = SensitivityBundle::compute(&basis, &traj, &dir, &solver, &fem)?;
    let side = |t: f64| -> Result<PodBasis> {
        let tr = solve_gfe_with(&xi.offset(&dir, t)?, &solver, &fem)?;
        PodBasis::build(&tr, &fem, s, m)
    };
    let plus = side(h)?;
    let minus = side(-h)?;

    let y_fd = (&plus.snapshots.matrix - &minus.snapshots.matrix) / (2.0 * h);
    let snapshots = rel(bundle.y_theta.as_slice(), y_fd.as_slice());

    let z0 = basis.eigvecs();
    let align = |b: &PodBasis| -> (DMatrix<f64>, DMatrix<f64>) {
        let mut z = b.eigvecs();
        let mut psi = b.modes.clone();
        for k in 0..m {
            if z.column(k).dot(&z0.column(k)) < 0.0 {
                z.column_mut(k).neg_mut();
                psi.column_mut(k).neg_mut();
            }
        }
        (z, psi)
    };
    let (zp, psip) = align(&plus);
    let (zm, psim) = align(&minus);

    let rows = (0..m)
        .map(|k| {
            let lam_fd = (plus.eigvals()[k] - minus.eigvals()[k]) / (2.0 * h);
            let z_fd: Vec<f64> = zp.column(k).iter().zip(zm.column(k).iter()).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let psi_fd: Vec<f64> = psip.column(k).iter().zip(psim.column(k).iter()).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let psi_an: Vec<f64> = bundle.psi_theta.column(k).iter().copied().collect();
            FdRow {
                mode: k + 1,
                eigenvalue: basis.eigvals()[k],
                lambda: rel(&[bundle.lam_theta[k]], &[lam_fd]),
                eigenvector: rel(bundle.z_theta.column(k).as_slice(), &z_fd),
                basis: relative_mass_error(&fem, &psi_an, &psi_fd),
            }
        })
        .collect();
    Ok(FdReport { step: h, snapshots, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub eta: f64,
    pub fe_calls: usize,
    pub rom_calls: usize,
    pub mean_error: f64,
    pub second_moment_error: f64,
    pub variance_error: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub convention: String,
    pub nodes: usize,
    pub reference_seconds: f64,
    pub rows: Vec<SweepRow>,
}

pub fn plan(cfg: &StudyConfig) -> Result<SparseGridPlan> {
    smolyak_plan(cfg.problem.d, cfg.collocation.level, cfg.collocation.bound)
}

pub fn sweep_row(report: &RunReport, reference: &RunReport, fem: &FemOperators) -> SweepRow {
    let e = report.errors_against(reference, fem);
    SweepRow {
        eta: report.eta,
        fe_calls: report.fe_calls,
        rom_calls: report.rom_calls,
        mean_error: e.mean,
        second_moment_error: e.second_moment,
        variance_error: e.variance,
        seconds: report.elapsed.as_secs_f64(),
    }
}

/// Multifidelity runs over `etas`, each compared with the all-GFE reference.
pub fn sweep(cfg: &StudyConfig, etas: &[f64]) -> Result<SweepReport> {
    let plan = plan(cfg)?;
    let mf = cfg.multifid().expect("validated config");
    let fem = assemble(&mf.solver.mesh, mf.solver.mu)?;
    let start = Instant::now();
    let reference = reference_full_run(&plan, &mf.solver)?;
    let reference_seconds = start.elapsed().as_secs_f64();
    let mut rows = Vec::with_capacity(etas.len());
    for &eta in etas {
        let r = run_multifid(&plan, eta, &mf)?;
        rows.push(sweep_row(&r, &reference, &fem));
    }
    Ok(SweepReport {
        convention: plan.convention(),
        nodes: plan.len(),
        reference_seconds,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> StudyConfig {
        let mut c = StudyConfig::default();
        c.problem.d = 2;
        c.discretization.intervals = 16;
        c.discretization.steps = 10;
        c.discretization.snapshots = 10;
        c.discretization.modes = 3;
        c.collocation.level = 3;
        c
    }

    #[test]
    fn theta_grid_is_symmetric() {
        let g = theta_grid(5, 0.5);
        assert_eq!(g, vec![-0.5, -0.25, 0.0, 0.25, 0.5]);
        assert_eq!(theta_grid(1, 0.5), vec![0.0]);
    }

    #[test]
    fn variants_coincide_at_the_origin() {
        let r = basis_study(&small(), &[0.0, 0.5]).unwrap();
        let o = &r.rows[0];
        assert!((o.plain - o.extrapolated).abs() <= 1e-10 * o.plain);
        assert_eq!(o.plain, o.expanded);
        assert!(o.pod_double <= o.plain);
    }

    #[test]
    fn small_fd_check_agrees() {
        let r = fd_check(&small()).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.worst() < 1e-3, "{r:?}");
    }

    #[test]
    fn tiny_eta_sweep_matches_reference() {
        let c = small();
        let r = sweep(&c, &[1e-3, 16.0]).unwrap();
        assert_eq!(r.rows[0].fe_calls, r.nodes);
        assert!(r.rows[0].mean_error <= 1e-12);
        assert_eq!(r.rows[1].fe_calls, 1);
    }
}
