//! Truncated spectral representation of the Brownian forcing
//! `f_d(t, x) = σ(x) Σ_{k≤d} ξ_k h_k(t)` on the trigonometric basis of `L2([0, T])`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One realization of the `d` standard-normal coordinates driving the forcing.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomPoint {
    coords: Vec<f64>,
}

impl RandomPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::OutOfRange("random point needs at least one coordinate".into()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::OutOfRange(format!("coordinate {i} is not finite")));
        }
        Ok(RandomPoint { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        RandomPoint {
            coords: vec![0.0; dim.max(1)],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `other - self`, the direction from `self` toward `other`.
    pub fn direction_to(&self, other: &RandomPoint) -> Result<RandomPoint> {
        check_dim(self.dim(), other.dim())?;
        Ok(RandomPoint {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| b - a).collect(),
        })
    }

    /// `self + t * dir`.
    pub fn offset(&self, dir: &RandomPoint, t: f64) -> Result<RandomPoint> {
        check_dim(self.dim(), dir.dim())?;
        Ok(RandomPoint {
            coords: self.coords.iter().zip(&dir.coords).map(|(a, d)| a + t * d).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> RandomPoint {
        RandomPoint {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Max-coordinate distance.
    pub fn dist_inf(&self, other: &RandomPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn dist2(&self, other: &RandomPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Spatial amplitude `σ(x)` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Amplitude {
    /// `0.1 cos(4πx)`.
    Standard,
    Constant(f64),
    /// Values on a uniform grid over `[0, 1]` (at least two), linearly interpolated.
    Tabulated(Vec<f64>),
}

impl Amplitude {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Amplitude::Standard => 0.1 * (4.0 * PI * x).cos(),
            Amplitude::Constant(c) => *c,
            Amplitude::Tabulated(v) => {
                let n = v.len() - 1;
                let s = (x.clamp(0.0, 1.0) * n as f64).min(n as f64);
                let i = (s.floor() as usize).min(n - 1);
                let frac = s - i as f64;
                v[i] * (1.0 - frac) + v[i + 1] * frac
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Amplitude::Standard => false,
            Amplitude::Constant(c) => *c == 0.0,
            Amplitude::Tabulated(v) => v.iter().all(|&c| c == 0.0),
        }
    }
}

/// Temporal basis family. Only the cosine family is provided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TemporalBasis {
    #[default]
    Trigonometric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForcingSpec {
    pub sigma: Amplitude,
    pub horizon: f64,
    pub dim: usize,
    pub basis: TemporalBasis,
}

impl ForcingSpec {
    pub fn new(sigma: Amplitude, horizon: f64, dim: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::OutOfRange(format!("horizon must be positive, got {horizon}")));
        }
        if dim == 0 {
            return Err(Error::OutOfRange("forcing dimension must be at least 1".into()));
        }
        if let Amplitude::Tabulated(v) = &sigma {
            if v.len() < 2 {
                return Err(Error::OutOfRange("tabulated amplitude needs at least two values".into()));
            }
        }
        Ok(ForcingSpec {
            sigma,
            horizon,
            dim,
            basis: TemporalBasis::Trigonometric,
        })
    }

    /// `Σ_k c_k h_k(t)` for the coefficient vector of `point`.
    pub fn temporal_coefficient(&self, point: &RandomPoint, t: f64) -> Result<f64> {
        check_dim(self.dim, point.dim())?;
        Ok(point
            .coords()
            .iter()
            .enumerate()
            .map(|(i, c)| c * basis_value(i + 1, t, self.horizon))
            .sum())
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}

#[inline]
pub(crate) fn basis_value(k: usize, t: f64, horizon: f64) -> f64 {
    if k == 1 {
        1.0 / horizon.sqrt()
    } else {
        (2.0 / horizon).sqrt() * ((k - 1) as f64 * PI * t / horizon).cos()
    }
}

/// `h_1 = 1/√T`, `h_k = √(2/T) cos((k-1)πt/T)`.
pub fn basis_eval(k: usize, t: f64, spec: &ForcingSpec) -> Result<f64> {
    if k == 0 || k > spec.dim {
        return Err(Error::OutOfRange(format!("basis index {k} outside 1..={}", spec.dim)));
    }
    if !(0.0..=spec.horizon).contains(&t) {
        return Err(Error::OutOfRange(format!("time {t} outside [0, {}]", spec.horizon)));
    }
    Ok(basis_value(k, t, spec.horizon))
}

pub fn forcing_eval(point: &RandomPoint, spec: &ForcingSpec, t: f64, x: f64) -> Result<f64> {
    Ok(spec.sigma.eval(x) * spec.temporal_coefficient(point, t)?)
}

/// `∂_θ f_d` along `ξ + θ(ζ - ξ)`; independent of `θ` since `f_d` is linear in the point.
pub fn forcing_theta_derivative(
    xi: &RandomPoint,
    zeta: &RandomPoint,
    spec: &ForcingSpec,
    t: f64,
    x: f64,
) -> Result<f64> {
    let dir = xi.direction_to(zeta)?;
    forcing_eval(&dir, spec, t, x)
}

/// `∫_0^s h_k(τ) dτ` in closed form.
pub fn basis_antiderivative(k: usize, s: f64, horizon: f64) -> f64 {
    if k == 1 {
        s / horizon.sqrt()
    } else {
        let w = (k - 1) as f64 * PI / horizon;
        (2.0 / horizon).sqrt() * (w * s).sin() / w
    }
}

/// Mean-square error `E[W(s) - W_d(s)]² = s - Σ_{k≤d} (∫_0^s h_k)²` of the truncated expansion.
pub fn truncation_variance(d: usize, s: f64, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::OutOfRange(format!("horizon must be positive, got {horizon}")));
    }
    if !(0.0..=horizon).contains(&s) {
        return Err(Error::OutOfRange(format!("time {s} outside [0, {horizon}]")));
    }
    let captured: f64 = (1..=d).map(|k| basis_antiderivative(k, s, horizon).powi(2)).sum();
    Ok((s - captured).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::CompositeRule;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(dim: usize) -> ForcingSpec {
        ForcingSpec::new(Amplitude::Standard, 0.8, dim).unwrap()
    }

    #[test]
    fn basis_values() {
        let s = spec(3);
        assert_relative_eq!(basis_eval(1, 0.3, &s).unwrap(), 1.118_033_988_749_895, epsilon = 1e-12);
        assert_relative_eq!(basis_eval(2, 0.0, &s).unwrap(), 1.581_138_830_084_19, epsilon = 1e-12);
        assert_relative_eq!(basis_eval(3, 0.4, &s).unwrap(), -1.581_138_830_084_19, epsilon = 1e-12);
    }

    #[test]
    fn basis_range_errors() {
        let s = spec(3);
        assert!(matches!(basis_eval(0, 0.1, &s), Err(Error::OutOfRange(_))));
        assert!(matches!(basis_eval(4, 0.1, &s), Err(Error::OutOfRange(_))));
        assert!(matches!(basis_eval(1, 0.9, &s), Err(Error::OutOfRange(_))));
        assert!(matches!(basis_eval(1, -0.1, &s), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn forcing_examples() {
        let s = spec(3);
        let zero = RandomPoint::zeros(3);
        assert_eq!(forcing_eval(&zero, &s, 0.37, 0.61).unwrap(), 0.0);

        let s1 = spec(1);
        let e1 = RandomPoint::new(vec![1.0]).unwrap();
        let v = forcing_eval(&e1, &s1, 0.55, 0.0).unwrap();
        assert_relative_eq!(v, 0.1 / 0.8f64.sqrt(), epsilon = 1e-15);

        let p = RandomPoint::new(vec![0.3, -1.2, 2.0]).unwrap();
        assert!(forcing_eval(&p, &s, 0.2, 0.125).unwrap().abs() < 1e-16);

        assert!(matches!(
            forcing_eval(&e1, &s, 0.2, 0.3),
            Err(Error::DimMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn theta_derivative_examples() {
        let s = spec(2);
        let xi = RandomPoint::new(vec![0.4, -0.9]).unwrap();
        assert_eq!(forcing_theta_derivative(&xi, &xi, &s, 0.3, 0.2).unwrap(), 0.0);
        let zeta = RandomPoint::new(vec![1.4, -0.9]).unwrap();
        let d = forcing_theta_derivative(&xi, &zeta, &s, 0.3, 0.2).unwrap();
        assert_relative_eq!(d, s.sigma.eval(0.2) * basis_value(1, 0.3, 0.8), epsilon = 1e-16);

        // f is linear in the point, so a one-sided difference is exact up to roundoff
        let u = RandomPoint::new(vec![0.6, -0.8]).unwrap();
        let zeta = xi.offset(&u, 1.0).unwrap();
        let h = 1e-3;
        let fd = (forcing_eval(&xi.offset(&u, h).unwrap(), &s, 0.5, 0.3).unwrap()
            - forcing_eval(&xi, &s, 0.5, 0.3).unwrap())
            / h;
        let an = forcing_theta_derivative(&xi, &zeta, &s, 0.5, 0.3).unwrap();
        assert_relative_eq!(fd, an, max_relative = 1e-10);
    }

    #[test]
    fn temporal_basis_is_orthonormal() {
        let horizon = 0.8;
        let rule = CompositeRule::new(0.0, horizon, 40, 12);
        for j in 1..=8 {
            for k in 1..=8 {
                let ip = rule.integrate(|t| basis_value(j, t, horizon) * basis_value(k, t, horizon));
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-10, "({j},{k}) -> {ip}");
            }
        }
    }

    #[test]
    fn truncation_variance_empty_interval_and_endpoint() {
        for d in 1..10 {
            assert_eq!(truncation_variance(d, 0.0, 0.8).unwrap(), 0.0);
            assert!(truncation_variance(d, 0.8, 0.8).unwrap() < 1e-14);
        }
        assert!(truncation_variance(3, 0.9, 0.8).is_err());
    }

    #[test]
    fn truncation_variance_matches_quadrature_and_decreases() {
        let horizon = 0.8;
        let s = horizon / 2.0;
        let rule = CompositeRule::new(0.0, s, 64, 16);
        let mut captured = 0.0;
        let mut prev = f64::INFINITY;
        for d in 1..=64 {
            let c = rule.integrate(|t| basis_value(d, t, horizon));
            captured += c * c;
            let oracle = s - captured;
            let v = truncation_variance(d, s, horizon).unwrap();
            assert!((v - oracle.max(0.0)).abs() < 1e-12, "d={d}: {v} vs {oracle}");
            assert!(v <= prev);
            // even-index terms vanish at s = T/2, so strict decrease happens every other step
            if d % 2 == 0 {
                assert!(v < prev || v == 0.0);
            }
            prev = v;
        }
        assert!(prev < 0.4 / 64.0);
    }

    #[test]
    fn tabulated_amplitude_interpolates() {
        let a = Amplitude::Tabulated(vec![0.0, 1.0, 0.0]);
        assert_eq!(a.eval(0.25), 0.5);
        assert_eq!(a.eval(0.5), 1.0);
        assert_eq!(a.eval(1.0), 0.0);
    }

    proptest! {
        #[test]
        fn forcing_is_linear_in_point(
            a in -3.0f64..3.0, b in -3.0f64..3.0,
            xi in proptest::collection::vec(-4.0f64..4.0, 3),
            zeta in proptest::collection::vec(-4.0f64..4.0, 3),
            t in 0.0f64..0.8, x in 0.0f64..1.0,
        ) {
            let s = spec(3);
            let p = RandomPoint::new(xi.clone()).unwrap();
            let q = RandomPoint::new(zeta.clone()).unwrap();
            let comb = RandomPoint::new(xi.iter().zip(&zeta).map(|(u, v)| a * u + b * v).collect()).unwrap();
            let lhs = forcing_eval(&comb, &s, t, x).unwrap();
            let fp = forcing_eval(&p, &s, t, x).unwrap();
            let fq = forcing_eval(&q, &s, t, x).unwrap();
            let rhs = a * fp + b * fq;
            let scale = (a * fp).abs() + (b * fq).abs();
            prop_assert!((lhs - rhs).abs() <= 1e-14 * scale.max(1.0));
        }

        #[test]
        fn truncation_variance_nonincreasing(s in 0.0f64..0.8, d in 1usize..40) {
            let a = truncation_variance(d, s, 0.8).unwrap();
            let b = truncation_variance(d + 1, s, 0.8).unwrap();
            prop_assert!(a >= 0.0 && b <= a + 1e-15);
        }
    }
}
