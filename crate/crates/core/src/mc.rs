//! Monte Carlo moments of `u(T, ·)`.
//!
//! Sample `i` draws its coordinates from a ChaCha8 stream keyed by `(seed, i)`,
//! so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{assemble, solve_gfe_with, SolverConfig};
use crate::forcing::RandomPoint;

#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

/// Independent standard normal coordinates for sample `index`.
pub fn sample_point(seed: u64, index: u64, d: usize) -> RandomPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let coords: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    RandomPoint::new(coords).expect("normal samples are finite")
}

#[derive(Clone, Debug)]
pub struct McMoments {
    pub samples: usize,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    /// Standard error of `mean`, from the unbiased sample variance.
    pub se_mean: Vec<f64>,
    pub se_second_moment: Vec<f64>,
}

pub fn mc_moments(cfg: &McConfig) -> Result<McMoments> {
    if cfg.samples == 0 {
        return Err(Error::OutOfRange("need at least one sample".into()));
    }
    let fem = assemble(&cfg.solver.mesh, cfg.solver.mu)?;
    let d = cfg.solver.forcing.dim;
    let finals: Vec<Result<Vec<f64>>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = sample_point(cfg.seed, i, d);
            solve_gfe_with(&p, &cfg.solver, &fem)
                .map(|t| t.final_state().to_vec())
                .map_err(|e| Error::at_sample(i, e))
        })
        .collect();
    let finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let n = cfg.solver.mesh.n_interior();
    let count = cfg.samples as f64;
    // moments of the data shifted by the first sample
    let first = &finals[0];
    let first_sq: Vec<f64> = first.iter().map(|v| v * v).collect();
    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    let mut ss1 = vec![0.0; n];
    let mut ss2 = vec![0.0; n];
    for f in &finals {
        for i in 0..n {
            let a = f[i] - first[i];
            let b = f[i] * f[i] - first_sq[i];
            s1[i] += a;
            s2[i] += b;
            ss1[i] += a * a;
            ss2[i] += b * b;
        }
    }
    let mean: Vec<f64> = (0..n).map(|i| first[i] + s1[i] / count).collect();
    let second: Vec<f64> = (0..n).map(|i| first_sq[i] + s2[i] / count).collect();
    let se = |sum: &[f64], sumsq: &[f64]| -> Vec<f64> {
        if cfg.samples < 2 {
            return vec![0.0; n];
        }
        (0..n)
            .map(|i| {
                let var = ((sumsq[i] - sum[i] * sum[i] / count) / (count - 1.0)).max(0.0);
                (var / count).sqrt()
            })
            .collect()
    };
    let se_mean = se(&s1, &ss1);
    let se_second_moment = se(&s2, &ss2);
    Ok(McMoments {
        samples: cfg.samples,
        se_mean,
        se_second_moment,
        mean,
        second_moment: second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{solve_gfe, InitialCondition, Mesh1D};
    use crate::forcing::{Amplitude, ForcingSpec};

    fn solver(sigma: Amplitude) -> SolverConfig {
        SolverConfig {
            mesh: Mesh1D::uniform(16).unwrap(),
            mu: 0.01,
            steps: 10,
            u0: InitialCondition::Standard,
            forcing: ForcingSpec::new(sigma, 0.8, 3).unwrap(),
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_point(7, 3, 4), sample_point(7, 3, 4));
        assert_ne!(sample_point(7, 3, 4), sample_point(7, 4, 4));
        assert_ne!(sample_point(7, 3, 4), sample_point(8, 3, 4));
    }

    #[test]
    fn sample_statistics() {
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|i| sample_point(99, i, 1).coords()[0]).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!(m.abs() <= 4.0 / (n as f64).sqrt());
        assert!((v - 1.0).abs() < 0.05);

        let pairs = 10_000;
        let a: Vec<f64> = (0..pairs).map(|i| sample_point(5, 2 * i, 1).coords()[0]).collect();
        let b: Vec<f64> = (0..pairs).map(|i| sample_point(5, 2 * i + 1, 1).coords()[0]).collect();
        let ma = a.iter().sum::<f64>() / pairs as f64;
        let mb = b.iter().sum::<f64>() / pairs as f64;
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        assert!((cov / (va * vb).sqrt()).abs() <= 0.02);
    }

    #[test]
    fn zero_amplitude_has_zero_error() {
        let cfg = McConfig {
            samples: 16,
            seed: 1,
            solver: solver(Amplitude::Constant(0.0)),
        };
        let r = mc_moments(&cfg).unwrap();
        assert!(r.se_mean.iter().all(|&s| s == 0.0));
        let det = solve_gfe(&RandomPoint::zeros(3), &cfg.solver).unwrap();
        for (a, b) in r.mean.iter().zip(det.final_state()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn single_sample() {
        let cfg = McConfig {
            samples: 1,
            seed: 42,
            solver: solver(Amplitude::Standard),
        };
        let r = mc_moments(&cfg).unwrap();
        let t = solve_gfe(&sample_point(42, 0, 3), &cfg.solver).unwrap();
        assert_eq!(r.mean, t.final_state());
        assert!(mc_moments(&McConfig { samples: 0, ..cfg }).is_err());
    }

    #[test]
    fn standard_error_scales_with_sample_count() {
        let base = McConfig {
            samples: 400,
            seed: 3,
            solver: solver(Amplitude::Standard),
        };
        let small = mc_moments(&base).unwrap();
        let large = mc_moments(&McConfig { samples: 1600, ..base.clone() }).unwrap();
        let s: f64 = small.se_mean.iter().sum();
        let l: f64 = large.se_mean.iter().sum();
        let ratio = l / s;
        assert!((0.4..=0.6).contains(&ratio), "{ratio}");
        assert_eq!(mc_moments(&base).unwrap().mean, small.mean);
    }
}
