//! The transfer operator of the Farey map acting on Taylor coefficients about
//! `x = 1`, and its leading eigenvalue.
//!
//! For `phi(x) = sum_m a_m (1 - x)^m` the operator
//! `(K phi)(x) = (1 + x)^(-2 beta) [phi(x / (1 + x)) + phi(1 / (1 + x))]`
//! maps the coefficient vector `a` to `C^T a`, where row `i` of `C` holds the
//! coefficients of `(2 - t)^(-2 beta - i) [1 + (1 - t)^i]` in `t = 1 - x`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{ChunkRunner, Serial};
use crate::partition::even_sums_with;
use crate::sum::CompensatedSum;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4096;
pub const DEFAULT_DIM: usize = 256;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Generalized binomial `a (a - 1) ... (a - b + 1) / b!`, zero for `b < 0`.
pub fn gen_binomial(a: f64, b: i64) -> f64 {
    if b < 0 {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..b {
        acc *= (a - i as f64) / (i + 1) as f64;
    }
    acc
}

/// Matrix entry `(i, j)` from the closed binomial formula.
///
/// The terms alternate in sign and cancel badly once `i + j` grows past a few
/// dozen; [`build_matrix`] does not use this.
pub fn entry_direct(beta: f64, i: usize, j: usize) -> f64 {
    let a = -2.0 * beta - i as f64;
    let mut bracket = CompensatedSum::new();
    bracket.add(gen_binomial(a, j as i64));
    for s in 0..=i {
        let weight = libm::ldexp(gen_binomial(i as f64, s as i64), s as i32);
        bracket.add(weight * gen_binomial(a, j as i64 - s as i64));
    }
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    sign * libm::pow(2.0, a - j as f64) * bracket.value()
}

/// Dense row-major truncation of the operator to the first `dim` Taylor
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub beta: f64,
    pub dim: usize,
    pub entries: Vec<f64>,
}

impl TransferMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    /// `out = C^T v`.
    pub fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|w| *w = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (w, &c) in out.iter_mut().zip(self.row(i)) {
                *w += vi * c;
            }
        }
    }
}

/// Builds the `dim x dim` truncation for any finite `beta`.
///
/// Row `i` is `P_i + G_i` with `P_i = (2 - t)^(-2 beta - i)` and
/// `G_i = (2 - t)^(-2 beta) ((1 - t) / (2 - t))^i`. Both follow from the row
/// before by a division by `2 - t` (a running average) and, for `G`, one
/// multiplication by `1 - t`. Every step is lower triangular, so truncating
/// the series loses nothing in the retained coefficients.
pub fn build_matrix(beta: f64, dim: usize) -> Result<TransferMatrix> {
    if !beta.is_finite() {
        return Err(Error::Domain { what: "transfer matrix beta", value: beta });
    }
    if !(MIN_DIM..=MAX_DIM).contains(&dim) {
        return Err(Error::Invalid("truncation dimension must lie in 2..=4096"));
    }
    let two_beta = 2.0 * beta;
    let mut p = vec![0.0; dim];
    p[0] = libm::pow(2.0, -two_beta);
    for j in 1..dim {
        p[j] = p[j - 1] * (two_beta + j as f64 - 1.0) / (2 * j) as f64;
    }
    let mut g = p.clone();
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        entries.extend(p.iter().zip(&g).map(|(a, b)| a + b));
        if i + 1 == dim {
            break;
        }
        divide_by_two_minus_t(&mut p);
        for j in (1..dim).rev() {
            g[j] -= g[j - 1];
        }
        divide_by_two_minus_t(&mut g);
    }
    Ok(TransferMatrix { beta, dim, entries })
}

fn divide_by_two_minus_t(series: &mut [f64]) {
    let mut prev = 0.0;
    for c in series.iter_mut() {
        prev = 0.5 * (*c + prev);
        *c = prev;
    }
}

/// Leading eigenpair of `C^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub beta: f64,
    pub lambda: f64,
    /// Taylor coefficients `a_m`, unit Euclidean norm, positive first entry.
    pub eigvec: Vec<f64>,
    /// `|C^T v - lambda v| / |v|`.
    pub residual: f64,
    pub iterations: usize,
    pub dim: usize,
    /// `|lambda(dim) - lambda(dim / 2)|` when both were computed.
    pub truncation_uncertainty: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Acceleration {
    /// Plain power iteration.
    Power,
    /// Chebyshev filter that damps the spectrum inside `[0, damp_upper]`,
    /// restarted every `degree` steps. The leading eigenvalue must lie above
    /// `damp_upper`; other eigenvalues above it only slow convergence.
    Chebyshev { damp_upper: f64, degree: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub acceleration: Acceleration,
    /// Starting coefficients, truncated or zero-padded to the matrix size.
    pub start: Option<Vec<f64>>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, acceleration: Acceleration::Power, start: None }
    }
}

impl EigenOptions {
    /// Chebyshev filtering over `[0, 1]`, suited to `beta` near 1.
    pub fn near_transition() -> Self {
        EigenOptions { acceleration: Acceleration::Chebyshev { damp_upper: 1.0, degree: 128 }, ..Self::default() }
    }
}

pub fn leading_eigen(matrix: &TransferMatrix, tol: f64, max_iter: usize) -> Result<SpectralResult> {
    leading_eigen_with(matrix, &EigenOptions { tol, max_iter, ..EigenOptions::default() })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// Rayleigh quotient and residual of `v` (unit norm); `w` receives `C^T v`.
fn rayleigh(matrix: &TransferMatrix, v: &[f64], w: &mut [f64]) -> (f64, f64) {
    matrix.apply_transpose(v, w);
    let lambda = dot(v, w);
    let r = libm::sqrt(v.iter().zip(w.iter()).map(|(x, y)| (y - lambda * x) * (y - lambda * x)).sum());
    (lambda, r)
}

fn start_vector(dim: usize, start: Option<&[f64]>) -> Result<Vec<f64>> {
    let mut v = vec![0.0; dim];
    match start {
        Some(s) => {
            if s.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::Invalid("start vector must be finite and nonnegative"));
            }
            for (dst, src) in v.iter_mut().zip(s) {
                *dst = *src;
            }
        }
        None => v.iter_mut().enumerate().for_each(|(m, x)| *x = 1.0 / (m + 1) as f64),
    }
    let n = norm(&v);
    if n == 0.0 {
        return Err(Error::Invalid("start vector has no nonzero entry within the truncation"));
    }
    scale(&mut v, 1.0 / n);
    Ok(v)
}

pub fn leading_eigen_with(matrix: &TransferMatrix, opts: &EigenOptions) -> Result<SpectralResult> {
    let beta = matrix.beta;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain { what: "spectral beta (needs 0 < beta < 1)", value: beta });
    }
    let dim = matrix.dim;
    let mut v = start_vector(dim, opts.start.as_deref())?;
    let mut w = vec![0.0; dim];
    let mut iterations = 0;
    let (mut lambda, mut residual) = rayleigh(matrix, &v, &mut w);
    iterations += 1;
    let mut acceleration = opts.acceleration;
    while residual > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual });
        }
        if let Acceleration::Chebyshev { damp_upper, .. } = acceleration {
            // a coarse truncation can put the leading eigenvalue inside the
            // damped interval, where the filter no longer separates it
            if iterations > 1 && lambda <= damp_upper {
                acceleration = Acceleration::Power;
            }
        }
        match acceleration {
            Acceleration::Power => {
                // w already holds C^T v
                let n = norm(&w);
                v.copy_from_slice(&w);
                scale(&mut v, 1.0 / n);
                (lambda, residual) = rayleigh(matrix, &v, &mut w);
                iterations += 1;
            }
            Acceleration::Chebyshev { damp_upper, degree } => {
                let steps = degree.max(1).min(opts.max_iter - iterations);
                chebyshev_cycle(matrix, &mut v, lambda, damp_upper, steps);
                iterations += steps;
                (lambda, residual) = rayleigh(matrix, &v, &mut w);
                iterations += 1;
            }
        }
    }
    if v[0] < 0.0 {
        scale(&mut v, -1.0);
    }
    Ok(SpectralResult { beta, lambda, eigvec: v, residual, iterations, dim, truncation_uncertainty: None })
}

/// Runs `steps` steps of the three-term Chebyshev recurrence for
/// `[0, upper]`, scaled so the component along an eigenvalue near `target`
/// stays of order one. Leaves `v` at unit norm.
fn chebyshev_cycle(matrix: &TransferMatrix, v: &mut [f64], target: f64, upper: f64, steps: usize) {
    let dim = matrix.dim;
    let centre = 0.5 * upper;
    let half = 0.5 * upper;
    let sigma1 = half / (target - centre);
    let mut prev = v.to_vec();
    let mut cur = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    matrix.apply_transpose(&prev, &mut cur);
    for (c, p) in cur.iter_mut().zip(&prev) {
        *c = (sigma1 / half) * (*c - centre * p);
    }
    let mut sigma = sigma1;
    for _ in 1..steps {
        let sigma_next = 1.0 / (2.0 / sigma1 - sigma);
        matrix.apply_transpose(&cur, &mut next);
        let a = 2.0 * sigma_next / half;
        let b = sigma * sigma_next;
        for ((n, c), p) in next.iter_mut().zip(&cur).zip(&prev) {
            *n = a * (*n - centre * c) - b * p;
        }
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
        sigma = sigma_next;
        // the recurrence is linear, so a common rescale keeps it exact
        let n = norm(&cur);
        if !(1e-100..=1e100).contains(&n) {
            scale(&mut cur, 1.0 / n);
            scale(&mut prev, 1.0 / n);
        }
    }
    let n = norm(&cur);
    v.copy_from_slice(&cur);
    scale(v, 1.0 / n);
}

/// Leading eigenpair at `dim` with the truncation uncertainty
/// `|lambda(dim) - lambda(dim / 2)|` attached. The half-size solve warm starts
/// the full one.
pub fn leading_eigen_checked(beta: f64, dim: usize, opts: &EigenOptions) -> Result<SpectralResult> {
    if dim < 2 * MIN_DIM {
        return Err(Error::Invalid("truncation check needs dimension at least 4"));
    }
    let coarse = leading_eigen_with(&build_matrix(beta, dim / 2)?, opts)?;
    let fine_opts = EigenOptions { start: Some(coarse.eigvec.iter().map(|x| x.max(0.0)).collect()), ..opts.clone() };
    let mut fine = leading_eigen_with(&build_matrix(beta, dim)?, &fine_opts)?;
    fine.truncation_uncertainty = Some(libm::fabs(fine.lambda - coarse.lambda));
    Ok(fine)
}

/// `Z_{k,e}(2 beta) / Z_{k-1,e}(2 beta)` from direct enumeration. At
/// `beta = 0` this is exactly 2.
pub fn lambda_from_ratio(beta: f64, k: u32) -> Result<f64> {
    lambda_from_ratio_with(&Serial, beta, k)
}

pub fn lambda_from_ratio_with<R: ChunkRunner>(runner: &R, beta: f64, k: u32) -> Result<f64> {
    if !(beta >= 0.0 && beta < 1.0) {
        return Err(Error::Domain { what: "ratio beta (needs 0 <= beta < 1)", value: beta });
    }
    if k < 3 {
        return Err(Error::LevelTooSmall { level: k, min: 3 });
    }
    let even = even_sums_with(runner, k, 2.0 * beta)?;
    Ok(even[k as usize - 1] / even[k as usize - 2])
}

/// Repeated application of `C^T` from a given start.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `|C^T v_n| / |v_n|` for each step.
    pub norm_ratios: Vec<f64>,
    /// Final vector, unit norm (or the unchanged start when `steps = 0`).
    pub vector: Vec<f64>,
}

pub fn iterate_functional(beta: f64, dim: usize, steps: usize, start: &[f64]) -> Result<Trajectory> {
    if steps == 0 {
        return Ok(Trajectory { norm_ratios: Vec::new(), vector: start.to_vec() });
    }
    let matrix = build_matrix(beta, dim)?;
    let mut v = start_vector(dim, Some(start))?;
    let mut w = vec![0.0; dim];
    let mut norm_ratios = Vec::with_capacity(steps);
    for _ in 0..steps {
        matrix.apply_transpose(&v, &mut w);
        let n = norm(&w);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NoConvergence { iterations: norm_ratios.len(), residual: n });
        }
        norm_ratios.push(n);
        v.copy_from_slice(&w);
        scale(&mut v, 1.0 / n);
    }
    Ok(Trajectory { norm_ratios, vector: v })
}

/// `sum_m a_m (1 - x)^m` for `x` in `[0, 1]`.
pub fn eigenfunction_eval(result: &SpectralResult, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain { what: "eigenfunction argument", value: x });
    }
    let t = 1.0 - x;
    Ok(result.eigvec.iter().rev().fold(0.0, |acc, a| acc * t + a))
}

/// Relative residual of `lambda phi(x) = (1 + x)^(-2 beta) [phi(x / (1 + x)) + phi(1 / (1 + x))]`.
pub fn fixed_point_residual(result: &SpectralResult, x: f64) -> Result<f64> {
    let lhs = result.lambda * eigenfunction_eval(result, x)?;
    let rhs = libm::pow(1.0 + x, -2.0 * result.beta)
        * (eigenfunction_eval(result, x / (1.0 + x))? + eigenfunction_eval(result, 1.0 / (1.0 + x))?);
    Ok(libm::fabs(lhs - rhs) / libm::fabs(lhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(gen_binomial(2.5, -1), 0.0);
        assert_eq!(gen_binomial(-3.0, 2), 6.0);
        assert_eq!(gen_binomial(0.7, 0), 1.0);
        assert_eq!(gen_binomial(5.0, 2), 10.0);
        assert_eq!(gen_binomial(5.0, 7), 0.0);
        assert_eq!(gen_binomial(-1.0, 5), -1.0);
    }

    #[test]
    fn entry_examples() {
        for beta in [0.0, 0.3, 0.5, 1.7] {
            let m = build_matrix(beta, 4).unwrap();
            let expect = libm::pow(2.0, 1.0 - 2.0 * beta);
            assert!((m.get(0, 0) - expect).abs() < 1e-15);
            assert!((entry_direct(beta, 0, 0) - expect).abs() < 1e-15);
        }
        assert_eq!(build_matrix(0.0, 2).unwrap().get(0, 0), 2.0);
        assert!((build_matrix(0.5, 2).unwrap().get(0, 1) - 0.5).abs() < 1e-15);
        assert!((entry_direct(0.5, 0, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn recurrence_matches_closed_formula() {
        for beta in [0.1, 0.5, 0.9, 1.3] {
            let m = build_matrix(beta, 16).unwrap();
            for i in 0..16 {
                for j in 0..16 {
                    let d = entry_direct(beta, i, j);
                    let r = m.get(i, j);
                    assert!((d - r).abs() <= 1e-11 * (1.0 + r.abs()), "beta={beta} ({i},{j}) {d} vs {r}");
                }
            }
        }
    }

    #[test]
    fn power_iteration_at_half() {
        let m = build_matrix(0.5, 256).unwrap();
        let r = leading_eigen(&m, 1e-10, 100_000).unwrap();
        assert!((r.lambda - 1.365_112_276_778_7).abs() < 1e-8, "{}", r.lambda);
        assert!(r.residual <= 1e-10);
        assert!(r.eigvec.iter().all(|a| *a > 0.0));
        assert!(leading_eigen(&build_matrix(1.0, 8).unwrap(), 1e-10, 10).is_err());
        assert!(leading_eigen(&build_matrix(0.0, 8).unwrap(), 1e-10, 10).is_err());
    }

    #[test]
    fn chebyshev_agrees_with_power() {
        let m = build_matrix(0.9, 256).unwrap();
        let p = leading_eigen(&m, 1e-11, 100_000).unwrap();
        let c = leading_eigen_with(&m, &EigenOptions { tol: 1e-11, ..EigenOptions::near_transition() }).unwrap();
        assert!((p.lambda - c.lambda).abs() < 1e-10);
        assert!(c.iterations < p.iterations);
    }

    #[test]
    fn chebyshev_falls_back_below_the_damped_interval() {
        // truncation this coarse puts lambda(0.999) under 1
        let m = build_matrix(0.999, 64).unwrap();
        let p = leading_eigen(&m, 1e-10, 100_000).unwrap();
        assert!(p.lambda < 1.0);
        let c = leading_eigen_with(&m, &EigenOptions::near_transition()).unwrap();
        assert!((p.lambda - c.lambda).abs() < 1e-9);
    }

    #[test]
    fn no_convergence_reports_residual() {
        let m = build_matrix(0.5, 64).unwrap();
        match leading_eigen(&m, 1e-14, 3) {
            Err(Error::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ratio_at_zero_is_two() {
        for k in 3..10 {
            assert_eq!(lambda_from_ratio(0.0, k).unwrap(), 2.0);
        }
        assert!(lambda_from_ratio(0.5, 2).is_err());
        assert!(lambda_from_ratio(1.0, 5).is_err());
    }

    #[test]
    fn functional_iteration() {
        let t = iterate_functional(0.5, 64, 0, &[1.0]).unwrap();
        assert_eq!(t.vector, vec![1.0]);
        assert!(t.norm_ratios.is_empty());
        assert!(iterate_functional(0.5, 64, 3, &[0.0, 0.0]).is_err());
        assert!(iterate_functional(0.5, 64, 3, &[-1.0]).is_err());
    }

    #[test]
    fn eigenfunction_at_one_is_leading_coefficient() {
        let r = leading_eigen(&build_matrix(0.5, 128).unwrap(), 1e-10, 100_000).unwrap();
        assert_eq!(eigenfunction_eval(&r, 1.0).unwrap(), r.eigvec[0]);
        assert!(eigenfunction_eval(&r, 1.5).is_err());
    }
}
