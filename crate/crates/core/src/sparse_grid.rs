//! Isotropic Smolyak grids on nested Clenshaw–Curtis rules, mapped to `[-L, L]^d`
//! and weighted by the truncated standard normal density.
//!
//! Level convention: 1D levels are 1-based (`m_1 = 1`, `m_i = 2^{i-1} + 1`) and a
//! level-`q` grid in `d` dimensions uses multi-indices with `|i| <= q + d`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::forcing::RandomPoint;
use crate::quadrature::CompositeRule;

pub const DEFAULT_BOUND: f64 = 4.0;
pub const DEFAULT_NODE_CAP: usize = 2_000_000;

/// Text printed with every report that depends on the grid level.
pub fn level_convention(d: usize, q: usize) -> String {
    format!("Smolyak level q={q} in d={d}: 1-based Clenshaw-Curtis levels, m_1=1, m_i=2^(i-1)+1, multi-indices |i| <= q+d")
}

/// Number of points of the level-`level` rule.
pub fn cc_count(level: usize) -> usize {
    match level {
        0 => 0,
        1 => 1,
        l => (1usize << (l - 1)) + 1,
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Nested Clenshaw–Curtis rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule1D {
    pub level: usize,
    /// `cos(jπ/(m-1))`, `j = 0..m`; descending.
    pub points: Vec<f64>,
    /// Barycentric weights of the points.
    bary: Vec<f64>,
}

impl Rule1D {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Values of every Lagrange cardinal at `x`.
    pub fn cardinals(&self, x: f64, out: &mut [f64]) {
        let m = self.points.len();
        if m == 1 {
            out[0] = 1.0;
            return;
        }
        if let Some(hit) = self.points.iter().position(|&p| p == x) {
            out[..m].fill(0.0);
            out[hit] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for j in 0..m {
            let t = self.bary[j] / (x - self.points[j]);
            out[j] = t;
            denom += t;
        }
        for v in &mut out[..m] {
            *v /= denom;
        }
    }
}

/// Clenshaw–Curtis points for `level >= 1`; nested levels share bit-identical values.
pub fn cc_rule(level: usize) -> Result<Rule1D> {
    if level == 0 {
        return Err(Error::OutOfRange("rule level must be at least 1".into()));
    }
    let m = cc_count(level);
    if m == 1 {
        return Ok(Rule1D {
            level,
            points: vec![0.0],
            bary: vec![1.0],
        });
    }
    let n = m - 1;
    let points = (0..m)
        .map(|j| {
            // sin(π(n - 2j)/(2n)) = cos(jπ/n), with the fraction reduced so shared
            // nodes of different levels are computed from identical operands
            let num = n as i64 - 2 * j as i64;
            if num == 0 {
                return 0.0;
            }
            let den = 2 * n;
            let g = gcd(num.unsigned_abs() as usize, den);
            (PI * (num / g as i64) as f64 / (den / g) as f64).sin()
        })
        .collect();
    let bary = (0..m)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    Ok(Rule1D { level, points, bary })
}

/// `φ(x)` of the standard normal.
fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `∫ ℓ_j ρ` for the normal density truncated to `[-L, L]` and renormalized,
/// with the nodes mapped by `ξ = L x`.
pub fn rule_weights(rule: &Rule1D, bound: f64) -> Vec<f64> {
    let m = rule.count();
    if m == 1 {
        return vec![1.0];
    }
    // x = cos θ turns each cardinal into a trigonometric polynomial of degree m - 1
    let quad = CompositeRule::new(0.0, PI, 2 * m, 16);
    let mut w = vec![0.0; m];
    let mut card = vec![0.0; m];
    let mut total = 0.0;
    for (&th, &qw) in quad.points.iter().zip(&quad.weights) {
        let x = th.cos();
        let dens = qw * normal_pdf(bound * x) * th.sin();
        total += dens;
        rule.cardinals(x, &mut card);
        for j in 0..m {
            w[j] += card[j] * dens;
        }
    }
    for v in &mut w {
        *v /= total;
    }
    (0..m).map(|j| 0.5 * (w[j] + w[m - 1 - j])).collect()
}

/// One tensor term of the combination formula.
#[derive(Clone, Debug)]
pub struct SmolyakTerm {
    /// 1-based level per dimension.
    pub index: Vec<usize>,
    pub coef: f64,
    /// Plan node index of each tensor point, last dimension fastest.
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SparseGridPlan {
    pub dim: usize,
    pub level: usize,
    pub bound: f64,
    /// Mapped coordinates, in visit order.
    pub nodes: Vec<RandomPoint>,
    pub weights: Vec<f64>,
    /// Sum over dimensions of the level at which each coordinate first appears.
    pub birth_levels: Vec<usize>,
    pub terms: Vec<SmolyakTerm>,
    /// Rules for levels `1..=q+1`, index `level - 1`.
    pub rules: Vec<Rule1D>,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

/// Multi-indices `i >= 1` with `lo <= |i| <= hi`, lexicographic.
fn multi_indices(d: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, prefix: &mut Vec<usize>, lo: usize, hi: usize, out: &mut Vec<Vec<usize>>) {
        let used: usize = prefix.iter().sum();
        if prefix.len() == d {
            if used >= lo && used <= hi {
                out.push(prefix.clone());
            }
            return;
        }
        let left = d - prefix.len() - 1;
        let max_here = hi.saturating_sub(used + left);
        for v in 1..=max_here {
            prefix.push(v);
            rec(d, prefix, lo, hi, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, &mut Vec::new(), lo, hi, &mut out);
    out
}

pub fn smolyak_plan(d: usize, q: usize, bound: f64) -> Result<SparseGridPlan> {
    smolyak_plan_with_cap(d, q, bound, DEFAULT_NODE_CAP)
}

/// Combination-form Smolyak grid; fails with `Overflow` past `cap` distinct nodes.
pub fn smolyak_plan_with_cap(d: usize, q: usize, bound: f64, cap: usize) -> Result<SparseGridPlan> {
    if d == 0 {
        return Err(Error::OutOfRange("dimension must be at least 1".into()));
    }
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::OutOfRange(format!("bound must be positive, got {bound}")));
    }
    let top = q + 1;
    if top >= 40 {
        return Err(Error::Overflow { nodes: usize::MAX, cap });
    }
    let rules: Vec<Rule1D> = (1..=top).map(cc_rule).collect::<Result<_>>()?;
    let weights_1d: Vec<Vec<f64>> = rules.iter().map(|r| rule_weights(r, bound)).collect();

    // birth level of each unit coordinate, keyed by bits
    let mut birth: HashMap<u64, usize> = HashMap::new();
    for r in &rules {
        for &p in &r.points {
            birth.entry(p.to_bits()).or_insert(r.level);
        }
    }

    let lo = (q + 1).max(d);
    let hi = q + d;
    let mut index_of: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut unit_nodes: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut terms = Vec::new();
    for idx in multi_indices(d, lo, hi) {
        let s: usize = idx.iter().sum();
        let coef = if (hi - s).is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(d - 1, hi - s);
        if coef == 0.0 {
            continue;
        }
        let counts: Vec<usize> = idx.iter().map(|&i| cc_count(i)).collect();
        let total: usize = counts.iter().product();
        let mut nodes = Vec::with_capacity(total);
        let mut j = vec![0usize; d];
        for _ in 0..total {
            let coords: Vec<f64> = (0..d).map(|k| rules[idx[k] - 1].points[j[k]]).collect();
            let w: f64 = (0..d).map(|k| weights_1d[idx[k] - 1][j[k]]).product();
            let key: Vec<u64> = coords.iter().map(|c| c.to_bits()).collect();
            let id = match index_of.get(&key) {
                Some(&id) => id,
                None => {
                    let id = unit_nodes.len();
                    if id >= cap {
                        return Err(Error::Overflow { nodes: id + 1, cap });
                    }
                    index_of.insert(key, id);
                    unit_nodes.push(coords);
                    weights.push(0.0);
                    id
                }
            };
            weights[id] += coef * w;
            nodes.push(id);
            for k in (0..d).rev() {
                j[k] += 1;
                if j[k] < counts[k] {
                    break;
                }
                j[k] = 0;
            }
        }
        terms.push(SmolyakTerm { index: idx, coef, nodes });
    }

    let mapped: Vec<Vec<f64>> = unit_nodes.iter().map(|c| c.iter().map(|x| bound * x).collect()).collect();
    let births: Vec<usize> = unit_nodes.iter().map(|c| c.iter().map(|x| birth[&x.to_bits()]).sum()).collect();
    let mut order: Vec<usize> = (0..unit_nodes.len()).collect();
    order.sort_by(|&a, &b| {
        births[a].cmp(&births[b]).then_with(|| {
            mapped[a]
                .iter()
                .zip(&mapped[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    let mut rank = vec![0usize; order.len()];
    for (r, &old) in order.iter().enumerate() {
        rank[old] = r;
    }
    for t in &mut terms {
        for n in &mut t.nodes {
            *n = rank[*n];
        }
    }
    let nodes = order
        .iter()
        .map(|&o| RandomPoint::new(mapped[o].clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseGridPlan {
        dim: d,
        level: q,
        bound,
        nodes,
        weights: order.iter().map(|&o| weights[o]).collect(),
        birth_levels: order.iter().map(|&o| births[o]).collect(),
        terms,
        rules,
    })
}

impl SparseGridPlan {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn convention(&self) -> String {
        level_convention(self.dim, self.level)
    }

    /// `c_j(ζ)` such that the interpolant is `Σ_j c_j(ζ) v_j`.
    pub fn interpolation_coefficients(&self, zeta: &RandomPoint) -> Result<Vec<f64>> {
        if zeta.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: zeta.dim(),
            });
        }
        let d = self.dim;
        let unit: Vec<f64> = zeta.coords().iter().map(|z| z / self.bound).collect();
        let card: Vec<Vec<Vec<f64>>> = (0..d)
            .map(|k| {
                self.rules
                    .iter()
                    .map(|r| {
                        let mut v = vec![0.0; r.count()];
                        // exact hits compare against the mapped coordinates
                        let hit = r.points.iter().position(|&p| self.bound * p == zeta.coords()[k]);
                        match hit {
                            Some(h) => v[h] = 1.0,
                            None => r.cardinals(unit[k], &mut v),
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        let mut c = vec![0.0; self.len()];
        let mut j = vec![0usize; d];
        for t in &self.terms {
            j.fill(0);
            let counts: Vec<usize> = t.index.iter().map(|&i| cc_count(i)).collect();
            for &node in &t.nodes {
                let mut p = t.coef;
                for k in 0..d {
                    p *= card[k][t.index[k] - 1][j[k]];
                }
                c[node] += p;
                for k in (0..d).rev() {
                    j[k] += 1;
                    if j[k] < counts[k] {
                        break;
                    }
                    j[k] = 0;
                }
            }
        }
        Ok(c)
    }

    pub fn interpolate(&self, node_values: &[f64], zeta: &RandomPoint) -> Result<f64> {
        if node_values.len() != self.len() {
            return Err(Error::DimMismatch {
                expected: self.len(),
                found: node_values.len(),
            });
        }
        let c = self.interpolation_coefficients(zeta)?;
        Ok(c.iter().zip(node_values).map(|(c, v)| c * v).sum())
    }

    /// Interpolates a field; column `j` of `fields` holds the values at node `j`.
    pub fn interpolate_field(&self, fields: &DMatrix<f64>, zeta: &RandomPoint) -> Result<Vec<f64>> {
        if fields.ncols() != self.len() {
            return Err(Error::DimMismatch {
                expected: self.len(),
                found: fields.ncols(),
            });
        }
        let c = self.interpolation_coefficients(zeta)?;
        let mut out = vec![0.0; fields.nrows()];
        for (j, cj) in c.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += cj * fields[(i, j)];
            }
        }
        Ok(out)
    }

    /// Smallest max-norm distance between two distinct nodes.
    pub fn min_pairwise_inf_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                best = best.min(self.nodes[a].dist_inf(&self.nodes[b]));
            }
        }
        best
    }
}

/// `Σ_j w_j v_j^k`.
pub fn moments(plan: &SparseGridPlan, node_values: &[f64], k: i32) -> Result<f64> {
    if k < 1 {
        return Err(Error::OutOfRange(format!("moment order must be at least 1, got {k}")));
    }
    if node_values.len() != plan.len() {
        return Err(Error::DimMismatch {
            expected: plan.len(),
            found: node_values.len(),
        });
    }
    Ok(plan.weights.iter().zip(node_values).map(|(w, v)| w * v.powi(k)).sum())
}

/// Pointwise moments of fields; column `j` holds the field at node `j`.
pub fn moment_field(plan: &SparseGridPlan, fields: &DMatrix<f64>, k: i32) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::OutOfRange(format!("moment order must be at least 1, got {k}")));
    }
    if fields.ncols() != plan.len() {
        return Err(Error::DimMismatch {
            expected: plan.len(),
            found: fields.ncols(),
        });
    }
    let mut out = vec![0.0; fields.nrows()];
    for (j, w) in plan.weights.iter().enumerate() {
        for (i, o) in out.iter_mut().enumerate() {
            *o += w * fields[(i, j)].powi(k);
        }
    }
    Ok(out)
}
