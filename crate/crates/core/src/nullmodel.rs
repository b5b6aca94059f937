//! Bipartite configuration model and Monte-Carlo link validation.
//!
//! The ensemble fixes the expected job and skill degrees. Each cell is an
//! independent Bernoulli variable with
//!
//! ```text
//! p_js = 1 / (exp(theta_j + mu_s) + 1)
//! ```
//!
//! and the multipliers solve `d_j = sum_s p_js`, `u_s = sum_j p_js`.
//! Rows and columns whose degree is 0 or maximal (possibly only after other
//! lines have been fixed) are pinned to probability 0 or 1 and removed
//! before solving. Lines with equal degree share one multiplier, so the
//! numerical system has one unknown per distinct degree.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    link_probability, BicmSolution, BinaryBipartiteMatrix, ProjectionKind, ValidatedEdge,
    ValidatedNetwork,
};
use crate::projection::{self, ProjectionError};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NullModelError {
    #[error("null model did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
    #[error("invalid validation configuration: {0}")]
    InvalidConfig(String),
    #[error("solution shape {solution:?} does not match matrix shape {matrix:?}")]
    ShapeMismatch {
        solution: (usize, usize),
        matrix: (usize, usize),
    },
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicmOptions {
    /// Largest accepted absolute degree residual.
    pub tolerance: f64,
    /// Budget of fixed-point sweeps before the bisection fallback.
    pub fixed_point_sweeps: usize,
    /// Budget of bisection sweeps before the Newton fallback.
    pub bisection_sweeps: usize,
    pub newton_steps: usize,
}

impl Default for BicmOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            fixed_point_sweeps: 10_000,
            bisection_sweeps: 50,
            newton_steps: 500,
        }
    }
}

pub fn solve_bicm(m: &BinaryBipartiteMatrix, tolerance: f64) -> Result<BicmSolution, NullModelError> {
    solve_bicm_with(
        m,
        &BicmOptions {
            tolerance,
            ..BicmOptions::default()
        },
    )
}

pub fn solve_bicm_with(m: &BinaryBipartiteMatrix, options: &BicmOptions) -> Result<BicmSolution, NullModelError> {
    let (nj, ns) = (m.n_jobs(), m.n_skills());
    let mut solution = BicmSolution {
        job_ids: m.job_ids().to_vec(),
        skill_ids: m.skill_ids().to_vec(),
        theta: vec![f64::NAN; nj],
        mu: vec![f64::NAN; ns],
        probabilities: vec![f64::NAN; nj * ns],
        residual: f64::NAN,
    };
    let block = Block {
        rows: (0..nj).collect(),
        cols: (0..ns).collect(),
        row_target: m.diversification().to_vec(),
        col_target: m.ubiquity().to_vec(),
    };
    block.solve(&mut solution, options)?;

    let residual = degree_residual(m, &solution.probabilities);
    if !(residual <= options.tolerance) {
        return Err(NullModelError::NotConverged {
            residual,
            iterations: options.fixed_point_sweeps + options.bisection_sweeps + options.newton_steps,
        });
    }
    solution.residual = residual;
    Ok(solution)
}

/// A sub-matrix whose cells are still free, with the degrees its cells
/// must supply.
struct Block {
    rows: Vec<usize>,
    cols: Vec<usize>,
    row_target: Vec<usize>,
    col_target: Vec<usize>,
}

impl Block {
    fn solve(mut self, out: &mut BicmSolution, options: &BicmOptions) -> Result<(), NullModelError> {
        let ns = out.skill_ids.len();
        let set = |out: &mut BicmSolution, j: usize, s: usize, v: f64| out.probabilities[j * ns + s] = v;

        // Lines that are empty or full, possibly only after other lines
        // have been fixed.
        loop {
            let mut changed = false;
            let width = self.cols.len();
            let mut k = 0;
            while k < self.rows.len() {
                let t = self.row_target[k];
                if t != 0 && t != width {
                    k += 1;
                    continue;
                }
                let j = self.rows.swap_remove(k);
                self.row_target.swap_remove(k);
                let full = t != 0;
                out.theta[j] = if full { f64::NEG_INFINITY } else { f64::INFINITY };
                for (c, &s) in self.cols.iter().enumerate() {
                    set(out, j, s, f64::from(u8::from(full)));
                    self.col_target[c] -= usize::from(full);
                }
                changed = true;
            }
            let height = self.rows.len();
            let mut k = 0;
            while k < self.cols.len() {
                let t = self.col_target[k];
                if t != 0 && t != height {
                    k += 1;
                    continue;
                }
                let s = self.cols.swap_remove(k);
                self.col_target.swap_remove(k);
                let full = t != 0;
                out.mu[s] = if full { f64::NEG_INFINITY } else { f64::INFINITY };
                for (r, &j) in self.rows.iter().enumerate() {
                    set(out, j, s, f64::from(u8::from(full)));
                    self.row_target[r] -= usize::from(full);
                }
                changed = true;
            }
            if !changed {
                break;
            }
        }
        if self.rows.is_empty() || self.cols.is_empty() {
            return Ok(());
        }

        if let Some((top, bottom)) = self.split(out) {
            top.solve(out, options)?;
            return bottom.solve(out, options);
        }

        // Irreducible block: lines with equal degree share one multiplier.
        let mut row_classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&j, &t) in self.rows.iter().zip(&self.row_target) {
            row_classes.entry(t).or_default().push(j);
        }
        let mut col_classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&s, &t) in self.cols.iter().zip(&self.col_target) {
            col_classes.entry(t).or_default().push(s);
        }
        let system = ClassSystem {
            row_target: row_classes.keys().map(|&k| k as f64).collect(),
            row_count: row_classes.values().map(|v| v.len() as f64).collect(),
            col_target: col_classes.keys().map(|&k| k as f64).collect(),
            col_count: col_classes.values().map(|v| v.len() as f64).collect(),
        };
        let (row_theta, col_mu) = system.solve(options)?;
        for (members, &t) in row_classes.values().zip(&row_theta) {
            for &j in members {
                out.theta[j] = t;
            }
        }
        for (members, &v) in col_classes.values().zip(&col_mu) {
            for &s in members {
                out.mu[s] = v;
            }
        }
        for &j in &self.rows {
            for &s in &self.cols {
                set(out, j, s, link_probability(out.theta[j], out.mu[s]));
            }
        }
        Ok(())
    }

    /// Looks for a tight Gale-Ryser cut: the `k` largest rows carry exactly
    /// `sum_s min(c_s, k)` links. Every matrix with these degrees then has
    /// ones in the top rows of columns with `c_s >= k` and zeros in the
    /// other rows of columns with `c_s <= k`, and the remaining cells form
    /// two independent blocks.
    fn split(&self, out: &mut BicmSolution) -> Option<(Block, Block)> {
        let ns = out.skill_ids.len();
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by(|&a, &b| self.row_target[b].cmp(&self.row_target[a]));
        let mut prefix = 0;
        let k = (1..self.rows.len()).find(|&k| {
            prefix += self.row_target[order[k - 1]];
            prefix == self.col_target.iter().map(|&c| c.min(k)).sum::<usize>()
        })?;
        let wide = self.col_target.iter().filter(|&&c| c >= k).count();
        let mut top = Block {
            rows: Vec::new(),
            cols: Vec::new(),
            row_target: Vec::new(),
            col_target: Vec::new(),
        };
        let mut bottom = Block {
            rows: Vec::new(),
            cols: Vec::new(),
            row_target: Vec::new(),
            col_target: Vec::new(),
        };
        for (pos, &r) in order.iter().enumerate() {
            if pos < k {
                top.rows.push(self.rows[r]);
                top.row_target.push(self.row_target[r] - wide);
            } else {
                bottom.rows.push(self.rows[r]);
                bottom.row_target.push(self.row_target[r]);
            }
        }
        for (&s, &c) in self.cols.iter().zip(&self.col_target) {
            for (pos, &r) in order.iter().enumerate() {
                let j = self.rows[r];
                if pos < k && c >= k {
                    out.probabilities[j * ns + s] = 1.0;
                } else if pos >= k && c <= k {
                    out.probabilities[j * ns + s] = 0.0;
                }
            }
            if c < k {
                top.cols.push(s);
                top.col_target.push(c);
            } else if c > k {
                bottom.cols.push(s);
                bottom.col_target.push(c - k);
            }
        }
        Some((top, bottom))
    }
}

/// Largest absolute gap between observed degrees and expected degrees under
/// `p` (row-major, same shape as `m`).
pub fn degree_residual(m: &BinaryBipartiteMatrix, p: &[f64]) -> f64 {
    let ns = m.n_skills();
    let mut worst: f64 = 0.0;
    let mut col_sums = vec![0.0; ns];
    for j in 0..m.n_jobs() {
        let row = &p[j * ns..(j + 1) * ns];
        let sum: f64 = row.iter().sum();
        worst = worst.max((m.diversification()[j] as f64 - sum).abs());
        for (acc, &v) in col_sums.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for (s, sum) in col_sums.into_iter().enumerate() {
        worst = worst.max((m.ubiquity()[s] as f64 - sum).abs());
    }
    worst
}

/// Degree-class reduction of the free part of the system. Every row class
/// has target degree `row_target[r]` and `row_count[r]` members, likewise
/// for columns; all targets are strictly between 0 and the opposite side's
/// total size.
struct ClassSystem {
    row_target: Vec<f64>,
    row_count: Vec<f64>,
    col_target: Vec<f64>,
    col_count: Vec<f64>,
}

impl ClassSystem {
    /// Returns class multipliers `(theta, mu)`.
    fn solve(&self, options: &BicmOptions) -> Result<(Vec<f64>, Vec<f64>), NullModelError> {
        // Work with x = exp(-theta), y = exp(-mu) so p = xy / (1 + xy).
        let links: f64 = self.row_target.iter().zip(&self.row_count).map(|(a, m)| a * m).sum();
        let scale = links.sqrt();
        let mut x: Vec<f64> = self.row_target.iter().map(|a| a / scale).collect();
        let mut y: Vec<f64> = self.col_target.iter().map(|b| b / scale).collect();
        // Solver residual is checked with headroom so the full-matrix
        // residual, summed in a different order, stays inside tolerance.
        let target = 0.25 * options.tolerance;

        let mut best = f64::INFINITY;
        let mut since_best = 0usize;
        let mut done = false;
        for _ in 0..options.fixed_point_sweeps {
            self.fixed_point_sweep(&mut x, &mut y);
            let r = self.residual(&x, &y);
            if r <= target {
                done = true;
                break;
            }
            if !r.is_finite() {
                break;
            }
            if r < best * (1.0 - 1e-6) {
                best = r;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best > 500 {
                    break;
                }
            }
        }

        // Fallback: exact one-dimensional solves by bisection, alternating
        // rows and columns, from wherever the fixed point got to.
        if !done {
            if !x.iter().chain(&y).all(|v| v.is_finite() && *v > 0.0) {
                x = self.row_target.iter().map(|a| a / scale).collect();
                y = self.col_target.iter().map(|b| b / scale).collect();
            }
            let mut theta: Vec<f64> = x.iter().map(|v| -v.ln()).collect();
            let mut mu: Vec<f64> = y.iter().map(|v| -v.ln()).collect();
            let mut last = f64::INFINITY;
            for _ in 0..options.bisection_sweeps {
                for (r, t) in theta.iter_mut().enumerate() {
                    *t = solve_line(self.row_target[r], &mu, &self.col_count, *t);
                }
                for (c, v) in mu.iter_mut().enumerate() {
                    *v = solve_line(self.col_target[c], &theta, &self.row_count, *v);
                }
                let r = self.residual_log(&theta, &mu);
                if r <= target || r >= last {
                    last = r;
                    break;
                }
                last = r;
            }
            if last <= target {
                return Ok((theta, mu));
            }
            // Last resort: damped Newton on the reduced system.
            let residual = self.newton(&mut theta, &mut mu, target, options.newton_steps);
            if !(residual <= target) {
                return Err(NullModelError::NotConverged {
                    residual,
                    iterations: options.fixed_point_sweeps + options.bisection_sweeps + options.newton_steps,
                });
            }
            return Ok((theta, mu));
        }
        let theta = x.iter().map(|v| -v.ln()).collect();
        let mu = y.iter().map(|v| -v.ln()).collect();
        Ok((theta, mu))
    }

    fn fixed_point_sweep(&self, x: &mut [f64], y: &mut [f64]) {
        for (r, xr) in x.iter_mut().enumerate() {
            let denom: f64 = y
                .iter()
                .zip(&self.col_count)
                .map(|(&yc, &n)| n * yc / (1.0 + *xr * yc))
                .sum();
            *xr = self.row_target[r] / denom;
        }
        for (c, yc) in y.iter_mut().enumerate() {
            let denom: f64 = x
                .iter()
                .zip(&self.row_count)
                .map(|(&xr, &m)| m * xr / (1.0 + xr * *yc))
                .sum();
            *yc = self.col_target[c] / denom;
        }
    }

    fn residual(&self, x: &[f64], y: &[f64]) -> f64 {
        let p = |xr: f64, yc: f64| {
            let z = xr * yc;
            z / (1.0 + z)
        };
        let mut worst: f64 = 0.0;
        for (r, &xr) in x.iter().enumerate() {
            let s: f64 = y.iter().zip(&self.col_count).map(|(&yc, &n)| n * p(xr, yc)).sum();
            worst = worst.max((s - self.row_target[r]).abs());
        }
        for (c, &yc) in y.iter().enumerate() {
            let s: f64 = x.iter().zip(&self.row_count).map(|(&xr, &m)| m * p(xr, yc)).sum();
            worst = worst.max((s - self.col_target[c]).abs());
        }
        if worst.is_nan() {
            f64::INFINITY
        } else {
            worst
        }
    }

    fn residual_log(&self, theta: &[f64], mu: &[f64]) -> f64 {
        let x: Vec<f64> = theta.iter().map(|t| (-t).exp()).collect();
        let y: Vec<f64> = mu.iter().map(|t| (-t).exp()).collect();
        self.residual(&x, &y)
    }

    /// Negative log-likelihood of the class system; convex in `(theta, mu)`.
    fn objective(&self, theta: &[f64], mu: &[f64]) -> f64 {
        let mut total = 0.0;
        for (r, &t) in theta.iter().enumerate() {
            total += self.row_count[r] * self.row_target[r] * t;
            for (c, &v) in mu.iter().enumerate() {
                total += self.row_count[r] * self.col_count[c] * softplus(-(t + v));
            }
        }
        for (c, &v) in mu.iter().enumerate() {
            total += self.col_count[c] * self.col_target[c] * v;
        }
        total
    }

    /// Damped Newton iterations on the objective. Returns the
    /// final residual.
    fn newton(&self, theta: &mut [f64], mu: &mut [f64], target: f64, steps: usize) -> f64 {
        let (nr, nc) = (theta.len(), mu.len());
        let dim = nr + nc;
        let mut residual = self.residual_log(theta, mu);
        for _ in 0..steps {
            if residual <= target {
                break;
            }
            let mut grad: Vec<f64> = self
                .row_count
                .iter()
                .zip(&self.row_target)
                .chain(self.col_count.iter().zip(&self.col_target))
                .map(|(n, k)| n * k)
                .collect();
            let mut hess = vec![0.0; dim * dim];
            for r in 0..nr {
                for c in 0..nc {
                    let w = self.row_count[r] * self.col_count[c];
                    let p = link_probability(theta[r], mu[c]);
                    let v = w * p * (1.0 - p);
                    grad[r] -= w * p;
                    grad[nr + c] -= w * p;
                    hess[r * dim + r] += v;
                    hess[(nr + c) * dim + nr + c] += v;
                    hess[r * dim + nr + c] += v;
                    hess[(nr + c) * dim + r] += v;
                }
            }
            // The shift theta + t, mu - t leaves the model unchanged; a tiny
            // ridge fixes that direction.
            let ridge = 1e-12 * (0..dim).map(|i| hess[i * dim + i]).fold(0.0, f64::max).max(1e-300);
            for i in 0..dim {
                hess[i * dim + i] += ridge;
            }
            let Some(mut step) = cholesky_solve(&mut hess, &grad, dim) else {
                break;
            };
            step.iter_mut().for_each(|d| *d = -*d);
            // Near the solution objective changes fall below rounding, so
            // steps are also accepted when they shrink the residual.
            let base = self.objective(theta, mu);
            let slope: f64 = step.iter().zip(&grad).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let th: Vec<f64> = theta.iter().zip(&step).map(|(a, d)| a + t * d).collect();
                let mv: Vec<f64> = mu.iter().zip(&step[nr..]).map(|(a, d)| a + t * d).collect();
                let r = self.residual_log(&th, &mv);
                if r.is_finite() && (r < residual || self.objective(&th, &mv) <= base + 1e-4 * t * slope) {
                    theta.copy_from_slice(&th);
                    mu.copy_from_slice(&mv);
                    residual = r;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        residual
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Solves `a x = b` in place for symmetric positive definite `a`.
fn cholesky_solve(a: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) {
            return None;
        }
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / diag;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= a[i * n + k] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= a[k * n + i] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    Some(x)
}

/// Solves `sum_k count_k * p(t + other_k) = target` for `t`. The left side
/// is strictly decreasing in `t`, so bracket and bisect.
fn solve_line(target: f64, other: &[f64], count: &[f64], start: f64) -> f64 {
    let f = |t: f64| -> f64 {
        other
            .iter()
            .zip(count)
            .map(|(&o, &n)| n * link_probability(t, o))
            .sum::<f64>()
            - target
    };
    let start = if start.is_finite() { start } else { 0.0 };
    let (mut lo, mut hi) = (start - 1.0, start + 1.0);
    let mut step = 1.0;
    while f(lo) < 0.0 {
        step *= 2.0;
        lo = start - step;
    }
    step = 1.0;
    while f(hi) > 0.0 {
        step *= 2.0;
        hi = start + step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` determined only by `(seed, sample, job, skill)`.
#[inline]
pub fn cell_uniform(seed: u64, sample: u64, job: usize, skill: usize) -> f64 {
    let stream = splitmix64(splitmix64(seed) ^ sample);
    let cell = ((job as u64) << 32) ^ (skill as u64);
    let bits = splitmix64(stream ^ splitmix64(cell));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws one matrix from the ensemble. A cell is 1 when its uniform draw is
/// below `p_js`, so `p = 0` never fires and `p = 1` always does.
pub fn sample_bipartite(solution: &BicmSolution, sample_index: u64, seed: u64) -> BinaryBipartiteMatrix {
    let ns = solution.skill_ids.len();
    let entries = solution
        .probabilities
        .iter()
        .enumerate()
        .map(|(idx, &p)| u8::from(cell_uniform(seed, sample_index, idx / ns, idx % ns) < p))
        .collect();
    BinaryBipartiteMatrix::from_trusted(solution.job_ids.clone(), solution.skill_ids.clone(), entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub sample_count: usize,
    /// A link is validated when it beats the null model in at least this
    /// fraction of samples. Beating means strictly larger; ties count
    /// against the link.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            sample_count: 1000,
            threshold: 0.95,
            seed: 0,
        }
    }
}

impl ValidationConfig {
    pub fn validate(&self) -> Result<(), NullModelError> {
        if self.sample_count == 0 {
            return Err(NullModelError::InvalidConfig("sample_count must be positive".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(NullModelError::InvalidConfig(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Solves the null model for `m` and validates its `kind` projection.
pub fn validate_projection(
    m: &BinaryBipartiteMatrix,
    kind: ProjectionKind,
    config: &ValidationConfig,
) -> Result<ValidatedNetwork, NullModelError> {
    config.validate()?;
    projection::project(m, kind)?;
    let solution = solve_bicm(m, DEFAULT_TOLERANCE)?;
    validate_with_solution(m, kind, &solution, config)
}

const SAMPLE_BLOCK: usize = 16;

/// Validates the projection of `m` against samples drawn from `solution`.
pub fn validate_with_solution(
    m: &BinaryBipartiteMatrix,
    kind: ProjectionKind,
    solution: &BicmSolution,
    config: &ValidationConfig,
) -> Result<ValidatedNetwork, NullModelError> {
    config.validate()?;
    if (solution.job_ids.len(), solution.skill_ids.len()) != (m.n_jobs(), m.n_skills()) {
        return Err(NullModelError::ShapeMismatch {
            solution: (solution.job_ids.len(), solution.skill_ids.len()),
            matrix: (m.n_jobs(), m.n_skills()),
        });
    }
    let observed = projection::project(m, kind)?;
    let n = observed.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();

    // Integer counts make the reduction exact, so the result is independent
    // of scheduling.
    let survivals = (0..config.sample_count.div_ceil(SAMPLE_BLOCK))
        .into_par_iter()
        .map(|block| {
            let mut counts = vec![0u32; pairs.len()];
            let end = ((block + 1) * SAMPLE_BLOCK).min(config.sample_count);
            for sample in block * SAMPLE_BLOCK..end {
                let drawn = sample_bipartite(solution, sample as u64, config.seed);
                let null = projection::projection_weights(&drawn, kind);
                for (count, &(a, b)) in counts.iter_mut().zip(&pairs) {
                    if observed.get(a, b) > null[a * n + b] {
                        *count += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u32; pairs.len()],
            |mut acc, part| {
                acc.iter_mut().zip(part).for_each(|(a, p)| *a += p);
                acc
            },
        );

    let edges = pairs
        .iter()
        .zip(survivals)
        .map(|(&(a, b), count)| {
            let survival_fraction = count as f64 / config.sample_count as f64;
            ValidatedEdge {
                a,
                b,
                raw_weight: observed.get(a, b),
                survival_fraction,
                validated: survival_fraction >= config.threshold,
            }
        })
        .collect();
    Ok(ValidatedNetwork {
        node_ids: observed.node_ids().to_vec(),
        kind,
        edges,
        threshold: config.threshold,
        sample_count: config.sample_count,
        seed: config.seed,
    })
}
