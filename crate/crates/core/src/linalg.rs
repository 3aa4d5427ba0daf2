//! Small dense and banded linear-algebra kernels.
//!
//! Everything here works on matrices of at most a few hundred rows: the
//! snapshot correlation matrices of the POD stage and the tridiagonal
//! finite element operators. Storage is `nalgebra`; the algorithms are
//! written out so that their tolerances are explicit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative cutoff used by [`minnorm_solve`] to declare a direction null.
pub const DEFAULT_NULL_TOL: f64 = 1e-8;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Dense symmetric matrix. Entry `(i, j)` and `(j, i)` are bit-identical.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Builds the matrix from its lower triangle; `f(i, j)` is called for `j <= i` only.
    pub fn from_lower_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(order, order);
        for i in 0..order {
            for j in 0..=i {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    /// Wraps a dense matrix, rejecting anything that is not exactly symmetric.
    pub fn from_dense(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        for j in 0..m.ncols() {
            for i in j + 1..m.nrows() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymMatrix(m))
    }

    /// Mirrors the lower triangle of `m` onto the upper one.
    pub fn from_lower_of(m: &DMatrix<f64>) -> Self {
        Self::from_lower_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn identity(order: usize) -> Self {
        SymMatrix(DMatrix::identity(order, order))
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `self - shift * I`, still exactly symmetric.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= shift;
        }
        SymMatrix(m)
    }
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub values: DVector<f64>,
    /// Column `k` is the unit eigenvector paired with `values[k]`.
    pub vectors: DMatrix<f64>,
}

impl EigDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Minimum-norm least-squares solution of `(A - shift I) x = rhs`, where `A`
    /// is the matrix this decomposition came from.
    ///
    /// Components along eigenvalues with `|λ - shift| <= null_tol * max |λ - shift|`
    /// are zeroed.
    pub fn shifted_pseudo_solve(&self, shift: f64, rhs: &DVector<f64>, null_tol: f64) -> DVector<f64> {
        let n = self.values.len();
        let scale = self
            .values
            .iter()
            .map(|l| (l - shift).abs())
            .fold(0.0_f64, f64::max);
        let cutoff = null_tol * scale;
        let mut x = DVector::zeros(n);
        if scale == 0.0 {
            return x;
        }
        for k in 0..n {
            let lam = self.values[k] - shift;
            if lam.abs() <= cutoff {
                continue;
            }
            let v = self.vectors.column(k);
            let coef = v.dot(rhs) / lam;
            x.axpy(coef, &v, 1.0);
        }
        x
    }
}

/// Cholesky factor `L` (lower triangular) with `A = L L^T`.
pub fn cholesky_spd(a: &SymMatrix) -> Result<DMatrix<f64>> {
    let n = a.order();
    let m = a.as_matrix();
    let max_diag = (0..n).map(|i| m[(i, i)].abs()).fold(0.0_f64, f64::max);
    let tol = 1e-14 * max_diag;
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(Error::NonPositiveDefinite { row: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Eigendecomposition by cyclic Jacobi rotations.
///
/// Values come back in descending order; ties keep the lower original index
/// first. Each eigenvector is signed so that its largest-magnitude entry is
/// positive (first such entry on ties).
pub fn eig_sym(a: &SymMatrix) -> Result<EigDecomposition> {
    let n = a.order();
    let mut m = a.as_matrix().clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let eps = f64::EPSILON;
    let floor = eps * eps * m.norm();

    let mut converged = n < 2;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                if apq.abs() <= floor || apq.abs() <= eps * (app * aqq).abs().sqrt() {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: MAX_JACOBI_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort: equal eigenvalues keep ascending original index
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));

    let values = DVector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = v.column(i).clone_owned();
        let mut best = 0;
        for r in 1..n {
            if col[r].abs() > col[best].abs() {
                best = r;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    Ok(EigDecomposition { values, vectors })
}

/// Minimum-norm least-squares solution of `A x = rhs` for symmetric, possibly singular `A`.
pub fn minnorm_solve(a: &SymMatrix, rhs: &DVector<f64>, null_tol: f64) -> Result<DVector<f64>> {
    if rhs.len() != a.order() {
        return Err(Error::DimMismatch {
            expected: a.order(),
            found: rhs.len(),
        });
    }
    let eig = eig_sym(a)?;
    Ok(eig.shifted_pseudo_solve(0.0, rhs, null_tol))
}

/// Tridiagonal matrix stored by bands.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    /// `sub[i]` sits at `(i + 1, i)`.
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    /// `sup[i]` sits at `(i, i + 1)`.
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        let off = n.saturating_sub(1);
        if sub.len() != off {
            return Err(Error::DimMismatch {
                expected: off,
                found: sub.len(),
            });
        }
        if sup.len() != off {
            return Err(Error::DimMismatch {
                expected: off,
                found: sup.len(),
            });
        }
        Ok(Tridiagonal { sub, diag, sup })
    }

    /// Constant-band Toeplitz matrix.
    pub fn toeplitz(n: usize, lower: f64, main: f64, upper: f64) -> Self {
        let off = n.saturating_sub(1);
        Tridiagonal {
            sub: vec![lower; off],
            diag: vec![main; n],
            sup: vec![upper; off],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::toeplitz(n, 0.0, 1.0, 0.0)
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.order()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.order();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.sup[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &Tridiagonal, b: f64) -> Tridiagonal {
        let zip = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| a * p + b * q).collect();
        Tridiagonal {
            sub: zip(&self.sub, &other.sub),
            diag: zip(&self.diag, &other.diag),
            sup: zip(&self.sup, &other.sup),
        }
    }

    /// `self * diag(d)`: column `j` scaled by `d[j]`.
    pub fn scale_columns(&self, d: &[f64]) -> Tridiagonal {
        Tridiagonal {
            sub: self.sub.iter().enumerate().map(|(i, v)| v * d[i]).collect(),
            diag: self.diag.iter().enumerate().map(|(i, v)| v * d[i]).collect(),
            sup: self.sup.iter().enumerate().map(|(i, v)| v * d[i + 1]).collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = self.sub[i];
                m[(i, i + 1)] = self.sup[i];
            }
        }
        m
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        tridiag_solve(self, rhs)
    }
}

/// Thomas algorithm. Fails with [`Error::SingularPivot`] when a pivot vanishes
/// relative to its row.
pub fn tridiag_solve(t: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = t.order();
    if rhs.len() != n {
        return Err(Error::DimMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = t.diag[0];
    let row_scale = |i: usize| {
        let mut s = t.diag[i].abs();
        if i > 0 {
            s += t.sub[i - 1].abs();
        }
        if i + 1 < n {
            s += t.sup[i].abs();
        }
        s
    };
    let check = |i: usize, p: f64| {
        if !p.is_finite() || p.abs() <= 1e-14 * row_scale(i) || p == 0.0 {
            Err(Error::SingularPivot { row: i })
        } else {
            Ok(())
        }
    };
    check(0, pivot)?;
    if n > 1 {
        c[0] = t.sup[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = t.diag[i] - t.sub[i - 1] * c[i - 1];
        check(i, pivot)?;
        if i + 1 < n {
            c[i] = t.sup[i] / pivot;
        }
        d[i] = (rhs[i] - t.sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Lower bidiagonal Cholesky factor of an SPD tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BidiagonalFactor {
    pub diag: Vec<f64>,
    /// `sub[i]` sits at `(i + 1, i)`.
    pub sub: Vec<f64>,
}

impl BidiagonalFactor {
    pub fn new(t: &Tridiagonal) -> Result<Self> {
        let n = t.order();
        let max_diag = t.diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = 1e-14 * max_diag;
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut d = t.diag[i];
            if i > 0 {
                d -= sub[i - 1] * sub[i - 1];
            }
            if !(d > tol) {
                return Err(Error::NonPositiveDefinite { row: i, pivot: d });
            }
            diag[i] = d.sqrt();
            if i + 1 < n {
                sub[i] = t.sub[i] / diag[i];
            }
        }
        Ok(BidiagonalFactor { diag, sub })
    }

    /// `L^T Y`, applied column by column.
    pub fn transpose_mul(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut out = DMatrix::zeros(n, y.ncols());
        for c in 0..y.ncols() {
            for i in 0..n {
                let mut s = self.diag[i] * y[(i, c)];
                if i + 1 < n {
                    s += self.sub[i] * y[(i + 1, c)];
                }
                out[(i, c)] = s;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = self.sub[i];
            }
        }
        m
    }
}

/// Modified Gram–Schmidt in the inner product `<x, y> = x^T G y`.
///
/// Columns whose norm after projection falls below `drop_tol` are discarded;
/// returns the orthonormal columns and the indices of the kept input columns.
pub fn gram_schmidt(cols: &DMatrix<f64>, gram: &Tridiagonal, drop_tol: f64) -> (DMatrix<f64>, Vec<usize>) {
    let mut kept: Vec<DVector<f64>> = Vec::new();
    let mut idx = Vec::new();
    for j in 0..cols.ncols() {
        let mut v = cols.column(j).clone_owned();
        // two passes keep orthogonality at roundoff level
        for _ in 0..2 {
            for q in &kept {
                let gv = DVector::from_vec(gram.mul_vec(v.as_slice()));
                let r = q.dot(&gv);
                v.axpy(-r, q, 1.0);
            }
        }
        let gv = DVector::from_vec(gram.mul_vec(v.as_slice()));
        let norm = v.dot(&gv).max(0.0).sqrt();
        if norm < drop_tol {
            continue;
        }
        v /= norm;
        kept.push(v);
        idx.push(j);
    }
    let n = cols.nrows();
    let mut out = DMatrix::zeros(n, kept.len());
    for (j, v) in kept.iter().enumerate() {
        out.set_column(j, v);
    }
    (out, idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn random_sym(n: usize, seed: u64) -> SymMatrix {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        SymMatrix::from_lower_fn(n, |_, _| next())
    }

    #[test]
    fn cholesky_identity() {
        let l = cholesky_spd(&SymMatrix::identity(3)).unwrap();
        assert_eq!(l, DMatrix::identity(3, 3));
    }

    #[test]
    fn cholesky_two_by_two() {
        let a = SymMatrix::from_dense(DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0])).unwrap();
        let l = cholesky_spd(&a).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2.0]);
        assert_relative_eq!(l, expected, epsilon = 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(cholesky_spd(&a), Err(Error::NonPositiveDefinite { row: 1, .. })));
    }

    #[test]
    fn bidiagonal_matches_dense_cholesky_on_mass_matrix() {
        let h = 1.0 / 32.0;
        let mass = Tridiagonal::toeplitz(31, h / 6.0, 2.0 * h / 3.0, h / 6.0);
        let dense = cholesky_spd(&SymMatrix::from_dense(mass.to_dense()).unwrap()).unwrap();
        let banded = BidiagonalFactor::new(&mass).unwrap();
        assert_relative_eq!(banded.to_dense(), dense, epsilon = 1e-15);
        let rebuilt = &dense * dense.transpose();
        let rel = (&rebuilt - mass.to_dense()).norm() / mass.to_dense().norm();
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn eig_diagonal() {
        let e = eig_sym(&SymMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values.as_slice(), &[3.0, 2.0, 1.0]);
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(e.vectors, expected);
    }

    #[test]
    fn eig_two_by_two_closed_form() {
        let a = SymMatrix::from_dense(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let e = eig_sym(&a).unwrap();
        assert_relative_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vectors.column(0);
        let v1 = e.vectors.column(1);
        assert_relative_eq!(v0[0], r, epsilon = 1e-14);
        assert_relative_eq!(v0[1], r, epsilon = 1e-14);
        // second vector is ±(1, -1)/√2
        assert_relative_eq!(v1[0].abs(), r, epsilon = 1e-14);
        assert_relative_eq!(v1[0] + v1[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_rank_one() {
        let w = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let a = SymMatrix::from_lower_of(&(&w * w.transpose()));
        let e = eig_sym(&a).unwrap();
        assert_relative_eq!(e.values[0], w.norm_squared(), epsilon = 1e-12);
        for k in 1..4 {
            assert!(e.values[k].abs() <= 1e-12);
        }
    }

    #[test]
    fn eig_ties_keep_original_order() {
        let e = eig_sym(&SymMatrix::from_diagonal(&[1.0, 2.0, 1.0])).unwrap();
        assert_eq!(e.vectors.column(1).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(e.vectors.column(2).as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn minnorm_invertible_and_null_direction() {
        let b = DVector::from_vec(vec![1.5, -2.0, 0.25]);
        let x = minnorm_solve(&SymMatrix::identity(3), &b, DEFAULT_NULL_TOL).unwrap();
        assert_relative_eq!(x, b, epsilon = 1e-15);

        let a = SymMatrix::from_diagonal(&[1.0, 0.0]);
        let x = minnorm_solve(&a, &DVector::from_vec(vec![2.0, 5.0]), DEFAULT_NULL_TOL).unwrap();
        assert_eq!(x.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn minnorm_is_smallest_least_squares_solution() {
        // rank-2 matrix in R^3; null space spanned by w1 × w2
        let w1 = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let w2 = DVector::from_vec(vec![0.5, -1.0, 3.0]);
        let dense = &w1 * w1.transpose() + 2.0 * &w2 * w2.transpose();
        let a = SymMatrix::from_lower_of(&dense);
        let null = w1.cross(&w2).normalize();
        let b = DVector::from_vec(vec![0.3, -0.7, 1.1]);
        let x = minnorm_solve(&a, &b, DEFAULT_NULL_TOL).unwrap();

        // normal equations
        let grad = dense.transpose() * (&dense * &x - &b);
        assert!(grad.norm() < 1e-12);
        assert!(x.dot(&null).abs() < 1e-12);
        // every other least-squares solution x + c n is longer
        for i in -50..=50 {
            let c = i as f64 * 0.02;
            if i == 0 {
                continue;
            }
            let y = &x + c * &null;
            assert!(y.norm() > x.norm());
        }
    }

    #[test]
    fn shifted_pseudo_solve_matches_direct_minnorm() {
        let a = random_sym(6, 7);
        let e = eig_sym(&a).unwrap();
        let shift = e.values[2];
        let rhs = DVector::from_fn(6, |i, _| (i as f64 + 1.0).sin());
        let via_shift = e.shifted_pseudo_solve(shift, &rhs, DEFAULT_NULL_TOL);
        let direct = minnorm_solve(&a.shifted(shift), &rhs, DEFAULT_NULL_TOL).unwrap();
        assert_relative_eq!(via_shift, direct, epsilon = 1e-10);
    }

    #[test]
    fn tridiag_identity_and_dense_oracle() {
        let rhs = vec![1.0, -3.0, 2.5];
        assert_eq!(tridiag_solve(&Tridiagonal::identity(3), &rhs).unwrap(), rhs);

        let h = 1.0 / 16.0;
        let mass = Tridiagonal::toeplitz(15, h / 6.0, 2.0 * h / 3.0, h / 6.0);
        let b: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).cos()).collect();
        let x = mass.solve(&b).unwrap();
        let dense = mass.to_dense().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for i in 0..15 {
            assert_relative_eq!(x[i], dense[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn tridiag_round_trip() {
        let t = Tridiagonal::new(vec![0.3, -0.2, 0.1, 0.5], vec![2.0, 3.0, -2.5, 4.0, 1.5], vec![1.0, 0.4, -0.6, 0.2]).unwrap();
        let x = vec![1.0, -2.0, 0.5, 3.0, -1.0];
        let b = t.mul_vec(&x);
        let back = t.solve(&b).unwrap();
        for i in 0..5 {
            assert_relative_eq!(back[i], x[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn tridiag_singular() {
        let t = Tridiagonal::new(vec![1.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(t.solve(&[1.0, 1.0]), Err(Error::SingularPivot { row: 1 })));
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let gram = Tridiagonal::identity(3);
        let cols = DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let (q, idx) = gram_schmidt(&cols, &gram, 1e-10);
        assert_eq!(idx, vec![0, 2]);
        assert_relative_eq!((q.transpose() * &q), DMatrix::identity(2, 2), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn eig_trace_orthonormality_and_residual(n in 1usize..12, seed in any::<u64>()) {
            let a = random_sym(n, seed);
            let e = eig_sym(&a).unwrap();
            let trace: f64 = (0..n).map(|i| a.get(i, i)).sum();
            let sum: f64 = e.values.iter().sum();
            let norm = a.as_matrix().norm();
            prop_assert!((trace - sum).abs() <= 1e-10 * trace.abs().max(norm));
            let gram = e.vectors.transpose() * &e.vectors;
            prop_assert!((gram - DMatrix::identity(n, n)).amax() <= 1e-12);
            for k in 0..n {
                let v = e.vectors.column(k);
                let r = a.as_matrix() * v - e.values[k] * v;
                prop_assert!(r.norm() <= 1e-10 * norm);
            }
            for k in 1..n {
                prop_assert!(e.values[k - 1] >= e.values[k]);
            }
        }

        #[test]
        fn cholesky_reconstructs_spd(n in 1usize..10, seed in any::<u64>()) {
            let b = random_sym(n, seed).into_matrix();
            let spd = &b * b.transpose() + DMatrix::identity(n, n) * 0.5;
            let a = SymMatrix::from_lower_of(&spd);
            let l = cholesky_spd(&a).unwrap();
            let rel = (&l * l.transpose() - a.as_matrix()).norm() / a.as_matrix().norm();
            prop_assert!(rel <= 1e-12);
            for i in 0..n {
                for j in i + 1..n {
                    prop_assert_eq!(l[(i, j)], 0.0);
                }
            }
        }
    }
}
