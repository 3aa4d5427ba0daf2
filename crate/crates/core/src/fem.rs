//! Group finite element (GFE) solver for the deterministic viscous Burgers
//! problem `u_t + ½(u²)_x = μ u_xx + f_d(t, x)` on `[0, 1]` with homogeneous
//! Dirichlet boundaries.
//!
//! The quadratic flux is grouped: `u²` is replaced by its nodal interpolant, so
//! the nonlinearity becomes `N (α ⊙ α)` with a constant advection matrix `N`.
//! Time integration is Crank–Nicolson with a Newton solve per step; every
//! matrix involved is tridiagonal.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forcing::{forcing_eval, ForcingSpec, RandomPoint};
use crate::linalg::{BidiagonalFactor, Tridiagonal};
use crate::quadrature::{GAUSS3_NODES, GAUSS3_WEIGHTS};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 25;

/// Uniform mesh of `[0, 1]`; only interior nodes carry unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mesh1D {
    intervals: usize,
}

impl Mesh1D {
    /// Mesh with `intervals` equal cells (`intervals - 1` interior nodes, at least two).
    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals < 3 {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 interior nodes, got {} intervals",
                intervals
            )));
        }
        Ok(Mesh1D { intervals })
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn n_interior(&self) -> usize {
        self.intervals - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    /// Node `i` for `i` in `0..=intervals`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.intervals as f64
    }

    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.intervals).map(|i| self.node(i)).collect()
    }

    /// Integrates `g(x) * β_i(x)` for every interior hat `β_i` with three-point
    /// Gauss on each of its two elements.
    pub fn hat_load(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.n_interior();
        let h = self.h();
        let mut load = vec![0.0; n];
        for e in 0..self.intervals {
            let left = self.node(e);
            for (q, w) in GAUSS3_NODES.iter().zip(&GAUSS3_WEIGHTS) {
                let s = 0.5 * (q + 1.0);
                let x = left + s * h;
                let gx = g(x) * 0.5 * h * w;
                // hat of node e lives on the left end, hat of node e+1 on the right end
                if e >= 1 {
                    load[e - 1] += gx * (1.0 - s);
                }
                if e < n {
                    load[e] += gx * s;
                }
            }
        }
        load
    }
}

/// Initial condition `u_0`.
#[derive(Clone, Debug)]
pub enum InitialCondition {
    /// `(e^{cos 5πx} - 3/2) sin πx`.
    Standard,
    Zero,
    Function(fn(f64) -> f64),
}

impl PartialEq for InitialCondition {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (InitialCondition::Standard, InitialCondition::Standard) | (InitialCondition::Zero, InitialCondition::Zero) => true,
            (InitialCondition::Function(a), InitialCondition::Function(b)) => std::ptr::fn_addr_eq(*a, *b),
            _ => false,
        }
    }
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialCondition::Standard => ((5.0 * PI * x).cos().exp() - 1.5) * (PI * x).sin(),
            InitialCondition::Zero => 0.0,
            InitialCondition::Function(f) => f(x),
        }
    }
}

/// Assembled piecewise-linear operators on the interior nodes.
#[derive(Clone, Debug)]
pub struct FemOperators {
    pub mesh: Mesh1D,
    pub mu: f64,
    /// `(β_j, β_i)`.
    pub mass: Tridiagonal,
    /// `(β'_j, β'_i)`.
    pub stiffness: Tridiagonal,
    /// `(β'_j, β_i)`.
    pub advection: Tridiagonal,
    /// Lower bidiagonal `L` with `mass = L Lᵀ`.
    pub chol: BidiagonalFactor,
}

pub fn assemble(mesh: &Mesh1D, mu: f64) -> Result<FemOperators> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::OutOfRange(format!("viscosity must be positive, got {mu}")));
    }
    let n = mesh.n_interior();
    if n < 2 {
        return Err(Error::InvalidMesh(format!("need at least 2 interior nodes, got {n}")));
    }
    let h = mesh.h();
    let mass = Tridiagonal::toeplitz(n, h / 6.0, 2.0 * h / 3.0, h / 6.0);
    let stiffness = Tridiagonal::toeplitz(n, -1.0 / h, 2.0 / h, -1.0 / h);
    let advection = Tridiagonal::toeplitz(n, -0.5, 0.0, 0.5);
    let chol = BidiagonalFactor::new(&mass)?;
    Ok(FemOperators {
        mesh: *mesh,
        mu,
        mass,
        stiffness,
        advection,
        chol,
    })
}

impl FemOperators {
    /// Squared mass norm `αᵀ M α`.
    pub fn mass_norm_sq(&self, alpha: &[f64]) -> f64 {
        let m = self.mass.mul_vec(alpha);
        m.iter().zip(alpha).map(|(a, b)| a * b).sum()
    }

    pub fn mass_dense(&self) -> DMatrix<f64> {
        self.mass.to_dense()
    }
}

/// Grouped nonlinearity `G(α) = N (α ⊙ α)`.
pub fn group_nonlinearity(alpha: &[f64], ops: &FemOperators) -> Vec<f64> {
    let sq: Vec<f64> = alpha.iter().map(|a| a * a).collect();
    ops.advection.mul_vec(&sq)
}

/// L2 projection of `u0` onto the interior hat functions.
pub fn initial_state(u0: &InitialCondition, ops: &FemOperators, mesh: &Mesh1D) -> Result<Vec<f64>> {
    let load = mesh.hat_load(|x| u0.eval(x));
    ops.mass.solve(&load).map_err(|_| Error::SingularMass)
}

/// `[V(t)]_i = (f_d(t, ·), β_i)` by three-point Gauss per element.
pub fn load_vector(point: &RandomPoint, spec: &ForcingSpec, t: f64, mesh: &Mesh1D) -> Result<Vec<f64>> {
    if point.dim() != spec.dim {
        return Err(Error::DimMismatch {
            expected: spec.dim,
            found: point.dim(),
        });
    }
    Ok(mesh.hat_load(|x| forcing_eval(point, spec, t, x).expect("dimension checked above")))
}

/// `(σ, β_i)`. The forcing separates as `σ(x) c(t)`, so `V(t) = c(t) * sigma_load`.
pub fn sigma_load(spec: &ForcingSpec, mesh: &Mesh1D) -> Vec<f64> {
    mesh.hat_load(|x| spec.sigma.eval(x))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub mesh: Mesh1D,
    pub mu: f64,
    /// Number of time steps `K` over `[0, T]`.
    pub steps: usize,
    pub u0: InitialCondition,
    pub forcing: ForcingSpec,
}

impl SolverConfig {
    pub fn horizon(&self) -> f64 {
        self.forcing.horizon
    }

    pub fn dt(&self) -> f64 {
        self.forcing.horizon / self.steps as f64
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.forcing.horizon / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// FE coefficient vectors at equally spaced time levels `t_0 = 0, …, t_K = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Column `k` holds `α(t_k)`.
    pub states: DMatrix<f64>,
    pub point: RandomPoint,
}

impl Trajectory {
    pub fn levels(&self) -> usize {
        self.times.len()
    }

    pub fn state(&self, level: usize) -> &[f64] {
        let n = self.states.nrows();
        &self.states.as_slice()[level * n..(level + 1) * n]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.levels() - 1)
    }
}

/// Linear and grouped-quadratic parts of a Crank–Nicolson step
/// `M (α⁺ - α)/Δt = ½[F(α⁺, t⁺) + F(α, t)]` with
/// `F(α, t) = -μAα - ½N(α⊙α) + c(t) b`.
pub(crate) struct CnStepper<'a> {
    ops: &'a FemOperators,
    /// `M/Δt + ½μA`.
    lhs_linear: Tridiagonal,
    /// `M/Δt - ½μA`.
    rhs_linear: Tridiagonal,
}

impl<'a> CnStepper<'a> {
    pub(crate) fn new(ops: &'a FemOperators, dt: f64) -> Self {
        let lhs_linear = ops.mass.lincomb(1.0 / dt, &ops.stiffness, 0.5 * ops.mu);
        let rhs_linear = ops.mass.lincomb(1.0 / dt, &ops.stiffness, -0.5 * ops.mu);
        CnStepper {
            ops,
            lhs_linear,
            rhs_linear,
        }
    }

    /// Newton solve for `α⁺`; `load_mid` is `½(V(t) + V(t⁺))`.
    pub(crate) fn step(&self, alpha: &[f64], load_mid: &[f64], step_index: usize) -> Result<Vec<f64>> {
        let n = alpha.len();
        let g0 = group_nonlinearity(alpha, self.ops);
        let mut known = self.rhs_linear.mul_vec(alpha);
        for i in 0..n {
            known[i] += -0.25 * g0[i] + load_mid[i];
        }
        let mut next = alpha.to_vec();
        let mut residual = vec![0.0; n];
        for iter in 0..=NEWTON_MAX_ITER {
            self.lhs_linear.mul_vec_into(&next, &mut residual);
            let g = group_nonlinearity(&next, self.ops);
            let mut rnorm = 0.0_f64;
            for i in 0..n {
                residual[i] += 0.25 * g[i] - known[i];
                rnorm = rnorm.max(residual[i].abs());
            }
            if !rnorm.is_finite() {
                return Err(Error::NewtonDivergence {
                    step: step_index,
                    residual: rnorm,
                });
            }
            if rnorm <= NEWTON_TOL {
                return Ok(next);
            }
            if iter == NEWTON_MAX_ITER {
                return Err(Error::NewtonDivergence {
                    step: step_index,
                    residual: rnorm,
                });
            }
            let jac = self.lhs_linear.lincomb(1.0, &self.ops.advection.scale_columns(&next), 0.5);
            let delta = jac.solve(&residual).map_err(|_| Error::NewtonDivergence {
                step: step_index,
                residual: rnorm,
            })?;
            for i in 0..n {
                next[i] -= delta[i];
            }
        }
        unreachable!("Newton loop returns on every path")
    }

    /// Crank–Nicolson step of the linearized (sensitivity) equation
    /// `M ż = -μAz - N diag(α(t)) z + s(t)` with `α` frozen at the two levels.
    pub(crate) fn linearized_step(
        &self,
        z: &[f64],
        alpha: &[f64],
        alpha_next: &[f64],
        source_mid: &[f64],
    ) -> Result<Vec<f64>> {
        let explicit = self.rhs_linear.lincomb(1.0, &self.ops.advection.scale_columns(alpha), -0.5);
        let mut rhs = explicit.mul_vec(z);
        for (r, s) in rhs.iter_mut().zip(source_mid) {
            *r += s;
        }
        let implicit = self.lhs_linear.lincomb(1.0, &self.ops.advection.scale_columns(alpha_next), 0.5);
        implicit.solve(&rhs)
    }
}

/// High-fidelity solve at `point`; returns all `K + 1` time levels.
pub fn solve_gfe(point: &RandomPoint, cfg: &SolverConfig) -> Result<Trajectory> {
    let ops = assemble(&cfg.mesh, cfg.mu)?;
    solve_gfe_with(point, cfg, &ops)
}

/// As [`solve_gfe`] with pre-assembled operators.
pub fn solve_gfe_with(point: &RandomPoint, cfg: &SolverConfig, ops: &FemOperators) -> Result<Trajectory> {
    if cfg.steps == 0 {
        return Err(Error::OutOfRange("need at least one time step".into()));
    }
    if point.dim() != cfg.forcing.dim {
        return Err(Error::DimMismatch {
            expected: cfg.forcing.dim,
            found: point.dim(),
        });
    }
    let n = cfg.mesh.n_interior();
    let b = sigma_load(&cfg.forcing, &cfg.mesh);
    let stepper = CnStepper::new(ops, cfg.dt());
    let times = cfg.times();
    let mut states = DMatrix::zeros(n, cfg.steps + 1);
    let mut alpha = initial_state(&cfg.u0, ops, &cfg.mesh)?;
    states.set_column(0, &DVector::from_column_slice(&alpha));
    let mut c_prev = cfg.forcing.temporal_coefficient(point, times[0])?;
    let mut load_mid = vec![0.0; n];
    for k in 0..cfg.steps {
        let c_next = cfg.forcing.temporal_coefficient(point, times[k + 1])?;
        let c_mid = 0.5 * (c_prev + c_next);
        for i in 0..n {
            load_mid[i] = c_mid * b[i];
        }
        alpha = stepper.step(&alpha, &load_mid, k)?;
        states.set_column(k + 1, &DVector::from_column_slice(&alpha));
        c_prev = c_next;
    }
    Ok(Trajectory {
        times,
        states,
        point: point.clone(),
    })
}

/// Kinetic energy `½ αᵀ M α`.
pub fn energy(alpha: &[f64], ops: &FemOperators) -> f64 {
    0.5 * ops.mass_norm_sq(alpha)
}

/// Semi-discrete right-hand side `-μAα - ½G(α) + V(t)`.
pub fn semi_discrete_rhs(alpha: &[f64], point: &RandomPoint, cfg: &SolverConfig, ops: &FemOperators, t: f64) -> Result<Vec<f64>> {
    let b = sigma_load(&cfg.forcing, &cfg.mesh);
    let c = cfg.forcing.temporal_coefficient(point, t)?;
    let a = ops.stiffness.mul_vec(alpha);
    let g = group_nonlinearity(alpha, ops);
    Ok((0..alpha.len())
        .map(|i| -ops.mu * a[i] - 0.5 * g[i] + c * b[i])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::Amplitude;
    use crate::quadrature::CompositeRule;
    use approx::assert_relative_eq;

    fn baseline_cfg(intervals: usize, steps: usize, dim: usize) -> SolverConfig {
        SolverConfig {
            mesh: Mesh1D::uniform(intervals).unwrap(),
            mu: 0.01,
            steps,
            u0: InitialCondition::Standard,
            forcing: ForcingSpec::new(Amplitude::Standard, 0.8, dim).unwrap(),
        }
    }

    #[test]
    fn assembly_entries() {
        let mesh = Mesh1D::uniform(32).unwrap();
        let ops = assemble(&mesh, 0.01).unwrap();
        assert_relative_eq!(ops.mass.diag[3], 1.0 / 48.0, epsilon = 1e-17);
        assert_relative_eq!(ops.mass.sub[3], 1.0 / 192.0, epsilon = 1e-17);
        assert_relative_eq!(ops.stiffness.diag[3], 64.0, epsilon = 1e-12);
        assert_relative_eq!(ops.stiffness.sup[3], -32.0, epsilon = 1e-12);
        for mesh in [Mesh1D::uniform(5).unwrap(), Mesh1D::uniform(77).unwrap()] {
            let ops = assemble(&mesh, 1.0).unwrap();
            assert_eq!((ops.advection.sub[1], ops.advection.diag[1], ops.advection.sup[1]), (-0.5, 0.0, 0.5));
        }
    }

    #[test]
    fn assembly_errors() {
        assert!(matches!(Mesh1D::uniform(2), Err(Error::InvalidMesh(_))));
        let mesh = Mesh1D::uniform(8).unwrap();
        assert!(assemble(&mesh, 0.0).is_err());
    }

    #[test]
    fn mass_matches_quadrature_of_hats() {
        let mesh = Mesh1D::uniform(6).unwrap();
        let ops = assemble(&mesh, 1.0).unwrap();
        let hat = |i: usize, x: f64| (1.0 - ((x - mesh.node(i)) / mesh.h()).abs()).max(0.0);
        let rule = CompositeRule::new(0.0, 1.0, 6, 4);
        for i in 1..6 {
            for j in 1..6 {
                let q = rule.integrate(|x| hat(i, x) * hat(j, x));
                assert_relative_eq!(ops.mass.to_dense()[(i - 1, j - 1)], q, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn group_nonlinearity_examples() {
        let mesh = Mesh1D::uniform(8).unwrap();
        let ops = assemble(&mesh, 0.01).unwrap();
        assert!(group_nonlinearity(&[0.0; 7], &ops).iter().all(|&v| v == 0.0));

        let c = 1.5;
        let g = group_nonlinearity(&[c; 7], &ops);
        assert_relative_eq!(g[0], c * c / 2.0);
        assert_relative_eq!(g[6], -c * c / 2.0);
        assert!(g[1..6].iter().all(|&v| v == 0.0));

        let mesh = Mesh1D::uniform(5).unwrap();
        let ops = assemble(&mesh, 0.01).unwrap();
        let alpha = [0.3, -1.1, 0.7, 2.0];
        let dense = ops.advection.to_dense() * DMatrix::from_diagonal(&DVector::from_column_slice(&alpha)) * DVector::from_column_slice(&alpha);
        let g = group_nonlinearity(&alpha, &ops);
        for i in 0..4 {
            assert_relative_eq!(g[i], dense[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn initial_state_examples() {
        let mesh = Mesh1D::uniform(16).unwrap();
        let ops = assemble(&mesh, 0.01).unwrap();
        assert!(initial_state(&InitialCondition::Zero, &ops, &mesh).unwrap().iter().all(|&v| v == 0.0));

        fn hat5(x: f64) -> f64 {
            (1.0 - ((x - 5.0 / 16.0) * 16.0).abs()).max(0.0)
        }
        let a = initial_state(&InitialCondition::Function(hat5), &ops, &mesh).unwrap();
        for (i, v) in a.iter().enumerate() {
            let e = if i == 4 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-12, "{i}: {v}");
        }
    }

    fn projection_error(intervals: usize) -> f64 {
        let mesh = Mesh1D::uniform(intervals).unwrap();
        let ops = assemble(&mesh, 0.01).unwrap();
        let a = initial_state(&InitialCondition::Standard, &ops, &mesh).unwrap();
        let uh = |x: f64| {
            let s = x * intervals as f64;
            let e = (s.floor() as usize).min(intervals - 1);
            let frac = s - e as f64;
            let left = if e == 0 { 0.0 } else { a[e - 1] };
            let right = if e + 1 == intervals { 0.0 } else { a[e] };
            left * (1.0 - frac) + right * frac
        };
        let rule = CompositeRule::new(0.0, 1.0, intervals * 4, 8);
        rule.integrate(|x| (InitialCondition::Standard.eval(x) - uh(x)).powi(2)).sqrt()
    }

    #[test]
    fn initial_projection_converges_second_order() {
        let e: Vec<f64> = [32, 64, 128, 256].iter().map(|&n| projection_error(n)).collect();
        for w in e.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((1.8..2.2).contains(&rate), "rate {rate} from {e:?}");
        }
    }

    #[test]
    fn load_vector_examples() {
        let mesh = Mesh1D::uniform(10).unwrap();
        let spec = ForcingSpec::new(Amplitude::Standard, 0.8, 2).unwrap();
        let zero = RandomPoint::zeros(2);
        assert!(load_vector(&zero, &spec, 0.3, &mesh).unwrap().iter().all(|&v| v == 0.0));

        let one = ForcingSpec::new(Amplitude::Constant(1.0), 0.8, 1).unwrap();
        let p = RandomPoint::new(vec![1.0]).unwrap();
        let v = load_vector(&p, &one, 0.3, &mesh).unwrap();
        for vi in v {
            assert_relative_eq!(vi, mesh.h() / 0.8f64.sqrt(), epsilon = 1e-15);
        }

        // quadrature oracle with 10x the points per element
        let p = RandomPoint::new(vec![0.7, -1.3]).unwrap();
        let v = load_vector(&p, &spec, 0.25, &mesh).unwrap();
        let rule = CompositeRule::new(0.0, 1.0, 100, 3);
        for i in 1..10 {
            let xi = mesh.node(i);
            let oracle = rule.integrate(|x| {
                forcing_eval(&p, &spec, 0.25, x).unwrap() * (1.0 - ((x - xi) / mesh.h()).abs()).max(0.0)
            });
            assert!((v[i - 1] - oracle).abs() < 1e-6, "{i}: {} vs {oracle}", v[i - 1]);
        }
        // sign pattern follows cos(4πx) at the nodes
        let c = spec.temporal_coefficient(&p, 0.25).unwrap();
        for i in 1..10 {
            let s = (4.0 * PI * mesh.node(i)).cos();
            assert_eq!((v[i - 1] / c).signum(), s.signum(), "node {i}");
        }

        assert!(matches!(load_vector(&p, &one, 0.1, &mesh), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn separable_load_matches_direct_load() {
        let mesh = Mesh1D::uniform(20).unwrap();
        let spec = ForcingSpec::new(Amplitude::Standard, 0.8, 3).unwrap();
        let p = RandomPoint::new(vec![0.4, -2.0, 1.1]).unwrap();
        let b = sigma_load(&spec, &mesh);
        let c = spec.temporal_coefficient(&p, 0.33).unwrap();
        let v = load_vector(&p, &spec, 0.33, &mesh).unwrap();
        for i in 0..b.len() {
            assert_relative_eq!(c * b[i], v[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let mut cfg = baseline_cfg(16, 10, 2);
        cfg.u0 = InitialCondition::Zero;
        let t = solve_gfe(&RandomPoint::zeros(2), &cfg).unwrap();
        assert_eq!(t.levels(), 11);
        assert!(t.states.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unforced_energy_decays() {
        let cfg = baseline_cfg(32, 20, 3);
        let ops = assemble(&cfg.mesh, cfg.mu).unwrap();
        let t = solve_gfe(&RandomPoint::zeros(3), &cfg).unwrap();
        let e: Vec<f64> = (0..t.levels()).map(|k| energy(t.state(k), &ops)).collect();
        for w in e.windows(2) {
            assert!(w[1] < w[0], "{e:?}");
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let cfg = baseline_cfg(32, 20, 3);
        let p = RandomPoint::new(vec![1.2, -0.4, 2.5]).unwrap();
        let a = solve_gfe(&p, &cfg).unwrap();
        let b = solve_gfe(&p, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn centered_difference_residual_shrinks_second_order() {
        let p = RandomPoint::new(vec![0.8, -0.5, 0.3]).unwrap();
        let mut errs = Vec::new();
        for steps in [40, 80, 160] {
            let cfg = baseline_cfg(32, steps, 3);
            let ops = assemble(&cfg.mesh, cfg.mu).unwrap();
            let t = solve_gfe(&p, &cfg).unwrap();
            let dt = cfg.dt();
            // compare at the fixed physical time T/2
            let k = steps / 2;
            let f = semi_discrete_rhs(t.state(k), &p, &cfg, &ops, t.times[k]).unwrap();
            let diff: Vec<f64> = (0..t.state(k).len())
                .map(|i| (t.state(k + 1)[i] - t.state(k - 1)[i]) / (2.0 * dt))
                .collect();
            let m = ops.mass.mul_vec(&diff);
            let r = m.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            errs.push(r);
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.7, "{errs:?}");
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let cfg = baseline_cfg(16, 4, 3);
        assert!(matches!(
            solve_gfe(&RandomPoint::zeros(2), &cfg),
            Err(Error::DimMismatch { expected: 3, found: 2 })
        ));
    }
}
