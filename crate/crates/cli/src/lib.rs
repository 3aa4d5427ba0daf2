//! Batch driver for the stochastic Burgers experiments.
//!
//! Every command reads one JSON [`StudyConfig`], applies flag overrides and
//! writes CSV tables and JSON summaries into the output directory.

pub mod config;
pub mod output;
pub mod studies;

use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use mfsc::fem::energy;
use mfsc::multifid::{donor_basis, CacheEntry};
use mfsc::rom::relative_trajectory_error;
use mfsc::{
    assemble, mc_moments, reference_full_run, relative_mass_error, run_multifid, sample_point, solve_gfe_with, solve_rom,
    ImprovedBasis, PodBasis, RandomPoint, Trajectory,
};

pub use config::{ConfigError, StudyConfig};
use output::{num, numbered, nums, write_csv, write_json};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] mfsc::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// One-line JSON description for stderr.
    pub fn error_line(&self) -> String {
        let v = match self {
            CliError::Config(e) => json!({"error": "config", "field": e.field, "message": e.message}),
            CliError::Numerical(e) => json!({"error": "numerical", "message": e.to_string()}),
            CliError::Io(e) => json!({"error": "io", "message": e.to_string()}),
        };
        v.to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "mfsc", version, about = "Multi-fidelity sparse-grid collocation for stochastic Burgers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON study configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `outputs.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `mc.seed` and `sensitivity.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replaces the `collocation.eta` list by one value.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Comma-separated random point; sampled from the seed when absent.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
    /// Evaluation point of `rom`; defaults to `--xi`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub zeta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// High-fidelity trajectory at one random point.
    Gfe,
    /// POD basis at `--xi` and reduced solve at `--zeta`.
    Rom,
    /// Sensitivity finite-difference check and the basis-improvement study.
    SensCheck,
    /// Full sparse-grid moments with a GFE solve at every node.
    Collocate,
    /// Multifidelity moments for the first `eta`.
    Multifid,
    /// Monte Carlo moments.
    Mc,
    /// Sweep over every `eta` against the full sparse-grid reference.
    Table1,
}

impl Cli {
    pub fn study_config(&self) -> CliResult<StudyConfig> {
        let mut cfg = match &self.config {
            Some(p) => StudyConfig::load(p)?,
            None => StudyConfig::default(),
        };
        if let Some(dir) = &self.out {
            cfg.outputs.directory = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.mc.seed = seed;
            cfg.sensitivity.seed = seed;
        }
        if let Some(eta) = self.eta {
            cfg.collocation.eta = vec![eta];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn point_arg(field: &str, coords: &Option<Vec<f64>>, d: usize) -> CliResult<Option<RandomPoint>> {
    match coords {
        None => Ok(None),
        Some(c) if c.len() != d => Err(ConfigError::new(field, format!("expected {d} coordinates, got {}", c.len())).into()),
        Some(c) => RandomPoint::new(c.clone())
            .map(Some)
            .map_err(|e| ConfigError::new(field, e.to_string()).into()),
    }
}

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    (0..traj.levels())
        .map(|k| {
            let mut row = vec![num(traj.times[k])];
            row.extend(nums(traj.state(k)));
            row
        })
        .collect()
}

fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(numbered("x", n));
    h
}

fn moment_rows(x: &[f64], cols: &[&[f64]]) -> Vec<Vec<String>> {
    (0..x.len())
        .map(|i| {
            let mut row = vec![num(x[i])];
            row.extend(cols.iter().map(|c| num(c[i])));
            row
        })
        .collect()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

struct Sink<'a> {
    dir: &'a Path,
    csv: bool,
    json: bool,
}

impl Sink<'_> {
    fn csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> io::Result<()> {
        if self.csv {
            write_csv(&self.dir.join(name), header, rows)?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> io::Result<()> {
        if self.json {
            write_json(&self.dir.join(name), value)?;
        }
        Ok(())
    }
}

/// Runs one command; progress lines go to stdout.
pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = cli.study_config()?;
    let sink = Sink {
        dir: &cfg.outputs.directory,
        csv: cfg.outputs.csv(),
        json: cfg.outputs.json(),
    };
    let d = cfg.problem.d;
    let solver = cfg.solver()?;
    let x = solver.mesh.interior_nodes();
    let fem = assemble(&solver.mesh, solver.mu)?;
    let xi = point_arg("xi", &cli.xi, d)?.unwrap_or_else(|| sample_point(cfg.mc.seed, 0, d));

    match cli.command {
        Command::Gfe => {
            let traj = solve_gfe_with(&xi, &solver, &fem)?;
            let energies: Vec<f64> = (0..traj.levels()).map(|k| energy(traj.state(k), &fem)).collect();
            sink.csv("trajectory.csv", &trajectory_header(x.len()), &trajectory_rows(&traj))?;
            sink.json(
                "gfe.json",
                &json!({"xi": xi.coords(), "intervals": solver.mesh.intervals(), "steps": solver.steps, "energy": energies}),
            )?;
            println!("gfe: {} steps, final energy {}", solver.steps, num(energies[energies.len() - 1]));
        }
        Command::Rom => {
            let zeta = point_arg("zeta", &cli.zeta, d)?.unwrap_or_else(|| xi.clone());
            let mf = cfg.multifid()?;
            let traj = solve_gfe_with(&xi, &solver, &fem)?;
            let basis = PodBasis::build_up_to(&traj, &fem, mf.snapshots, mf.modes)?;
            let improved = if zeta == xi {
                ImprovedBasis::plain(&basis)
            } else {
                let entry = CacheEntry {
                    point: xi.clone(),
                    trajectory: traj,
                    basis: basis.clone(),
                    node: 0,
                };
                donor_basis(&entry, &zeta, &mf, &fem)?
            };
            let rom = improved.rom_operators(&fem, &solver)?;
            let sol = solve_rom(&zeta, &rom, &solver, &fem)?;
            let reference = solve_gfe_with(&zeta, &solver, &fem)?;
            let levels: Vec<usize> = (0..reference.levels()).collect();
            let final_error = relative_mass_error(&fem, sol.lifted.final_state(), reference.final_state());
            let trajectory_error = relative_trajectory_error(&fem, &sol.lifted, &reference, &levels);

            let m = improved.n_modes();
            let mut h = vec!["x".to_string()];
            h.extend(numbered("psi", m));
            h.push("U".into());
            let rows: Vec<Vec<String>> = (0..x.len())
                .map(|i| {
                    let mut row = vec![num(x[i])];
                    row.extend((0..m).map(|k| num(improved.modes[(i, k)])));
                    row.push(num(improved.mean_flow[i]));
                    row
                })
                .collect();
            sink.csv("modes.csv", &h, &rows)?;
            sink.csv("rom_trajectory.csv", &trajectory_header(x.len()), &trajectory_rows(&sol.lifted))?;
            sink.json(
                "rom.json",
                &json!({
                    "xi": xi.coords(), "zeta": zeta.coords(), "modes": m,
                    "kind": format!("{:?}", improved.kind),
                    "eigenvalues": basis.eigvals(),
                    "final_error": final_error, "trajectory_error": trajectory_error,
                }),
            )?;
            println!("rom: {m} modes, relative error at T {}", num(final_error));
        }
        Command::SensCheck => {
            let fd = studies::fd_check(&cfg)?;
            let thetas = studies::theta_grid(cfg.sensitivity.points, cfg.sensitivity.half_width);
            let fig = studies::basis_study(&cfg, &thetas)?;
            let fd_rows: Vec<Vec<String>> = fd
                .rows
                .iter()
                .map(|r| vec![r.mode.to_string(), num(r.eigenvalue), num(r.lambda), num(r.eigenvector), num(r.basis)])
                .collect();
            sink.csv("sensitivity_fd.csv", &header(&["mode", "eigenvalue", "lambda", "eigenvector", "basis"]), &fd_rows)?;
            let fig_rows: Vec<Vec<String>> = fig
                .rows
                .iter()
                .map(|r| {
                    nums(&[
                        r.theta,
                        r.plain,
                        r.extrapolated,
                        r.expanded,
                        r.pod_double,
                        r.plain_trajectory,
                        r.extrapolated_trajectory,
                        r.expanded_trajectory,
                        r.pod_double_trajectory,
                    ])
                })
                .collect();
            sink.csv(
                "basis_study.csv",
                &header(&[
                    "theta",
                    "plain",
                    "extrapolated",
                    "expanded",
                    "pod_double",
                    "plain_trajectory",
                    "extrapolated_trajectory",
                    "expanded_trajectory",
                    "pod_double_trajectory",
                ]),
                &fig_rows,
            )?;
            sink.json("sens_check.json", &json!({"fd": fd, "study": fig}))?;
            println!("sens-check: worst finite-difference discrepancy {}", num(fd.worst()));
        }
        Command::Collocate => {
            let plan = studies::plan(&cfg)?;
            println!("convention: {}", plan.convention());
            let r = reference_full_run(&plan, &solver)?;
            let mut h = vec!["node_index".to_string()];
            h.extend(numbered("xi", d));
            h.push("weight".into());
            let rows: Vec<Vec<String>> = plan
                .nodes
                .iter()
                .zip(&plan.weights)
                .enumerate()
                .map(|(j, (p, w))| {
                    let mut row = vec![j.to_string()];
                    row.extend(nums(p.coords()));
                    row.push(num(*w));
                    row
                })
                .collect();
            sink.csv("plan.csv", &h, &rows)?;
            sink.csv(
                "moments.csv",
                &header(&["x", "mean", "second_moment"]),
                &moment_rows(&x, &[&r.mean, &r.second_moment]),
            )?;
            sink.json(
                "collocate.json",
                &json!({"convention": r.convention, "nodes": plan.len(), "seconds": r.elapsed.as_secs_f64()}),
            )?;
            println!("collocate: {} GFE solves", r.fe_calls);
        }
        Command::Multifid => {
            let plan = studies::plan(&cfg)?;
            println!("convention: {}", plan.convention());
            let eta = cfg.collocation.eta[0];
            let mf = cfg.multifid()?;
            let r = run_multifid(&plan, eta, &mf)?;
            let reference = reference_full_run(&plan, &solver)?;
            let row = studies::sweep_row(&r, &reference, &fem);
            sink.csv(
                "moments.csv",
                &header(&["x", "mean", "second_moment"]),
                &moment_rows(&x, &[&r.mean, &r.second_moment]),
            )?;
            sink.json("multifid.json", &json!({"convention": r.convention, "nodes": plan.len(), "run": row}))?;
            println!(
                "multifid: eta {eta}, {} GFE and {} ROM solves, mean error {}",
                r.fe_calls,
                r.rom_calls,
                num(row.mean_error)
            );
        }
        Command::Mc => {
            let start = Instant::now();
            let r = mc_moments(&cfg.monte_carlo()?)?;
            sink.csv(
                "mc.csv",
                &header(&["x", "mean", "second_moment", "se_mean"]),
                &moment_rows(&x, &[&r.mean, &r.second_moment, &r.se_mean]),
            )?;
            sink.json(
                "mc.json",
                &json!({"samples": r.samples, "seed": cfg.mc.seed, "seconds": start.elapsed().as_secs_f64()}),
            )?;
            println!("mc: {} samples", r.samples);
        }
        Command::Table1 => {
            let rep = studies::sweep(&cfg, &cfg.collocation.eta)?;
            println!("convention: {}", rep.convention);
            let rows: Vec<Vec<String>> = rep
                .rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.eta),
                        r.fe_calls.to_string(),
                        r.rom_calls.to_string(),
                        num(r.mean_error),
                        num(r.second_moment_error),
                        num(r.variance_error),
                    ]
                })
                .collect();
            sink.csv(
                "table1.csv",
                &header(&["eta", "fe_calls", "rom_calls", "mean_error", "second_moment_error", "variance_error"]),
                &rows,
            )?;
            sink.json("table1.json", &rep)?;
            for r in &rep.rows {
                println!(
                    "eta {:>6}  fe_calls {:>5}  mean error {:.3e}  second moment error {:.3e}",
                    r.eta, r.fe_calls, r.mean_error, r.second_moment_error
                );
            }
        }
    }
    Ok(())
}
