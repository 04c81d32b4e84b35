//! Free energy, internal energy and specific heat from the leading eigenvalue,
//! and the logarithmic form of the transition at `beta = 1`.
//!
//! All quantities use the tree temperature, where the transition sits at
//! `beta = 1`: `f(beta) = -ln lambda(beta) / beta` below it and `0` above.
//! The spin chains see the same curve at twice the temperature,
//! `f_chain(beta) = f(beta / 2)`. Derivatives are taken of
//! `phi(beta) = beta f(beta) = -ln lambda(beta)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{ChunkRunner, Serial};
use crate::partition::{evaluate_with, Model};
use crate::transfer::{build_matrix, lambda_from_ratio_with, leading_eigen_with, EigenOptions, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Farey tree and transfer operator; transition at `beta = 1`.
    Tree,
    /// Farey and Knauf spin chains; transition at `beta = 2`.
    Chain,
}

impl Convention {
    /// The tree temperature for a temperature given in this convention.
    pub fn to_tree(self, beta: f64) -> f64 {
        match self {
            Convention::Tree => beta,
            Convention::Chain => 0.5 * beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaSource {
    /// Truncated transfer matrix, escalating the dimension as needed.
    Matrix,
    /// Ratio of successive even Knauf sums at a fixed level.
    Ratio { level: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoOptions {
    pub source: LambdaSource,
    /// First truncation tried.
    pub min_dim: usize,
    /// Escalation stops here even if the target is missed.
    pub max_dim: usize,
    /// Escalation target for `|lambda(M) - lambda(M/2)| / |ln lambda|`.
    pub relative_target: f64,
    pub eigen: EigenOptions,
    /// Also difference the specific heat at half the truncation.
    pub heat_truncation_check: bool,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        ThermoOptions {
            source: LambdaSource::Matrix,
            min_dim: 256,
            max_dim: MAX_DIM,
            relative_target: 0.1,
            eigen: EigenOptions::near_transition(),
            heat_truncation_check: true,
        }
    }
}

/// `lambda(beta)` with the truncation it took.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaEstimate {
    pub beta: f64,
    pub lambda: f64,
    /// Matrix dimension, or the enumeration level for the ratio source.
    pub size: usize,
    /// `|lambda(M) - lambda(M/2)|`, or `|r_k - r_(k-1)|` for the ratio source.
    pub uncertainty: f64,
    /// Eigenvector at `size`, for warm starts.
    pub eigvec: Vec<f64>,
}

impl LambdaEstimate {
    pub fn phi(&self) -> f64 {
        -libm::log(self.lambda)
    }

    /// The escalation target was met.
    pub fn within(&self, relative: f64) -> bool {
        self.uncertainty <= relative * libm::fabs(self.phi())
    }
}

fn matrix_lambda(beta: f64, dim: usize, opts: &ThermoOptions, start: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
    let eo = EigenOptions { start: start.map(|s| s.iter().map(|x| x.max(0.0)).collect()), ..opts.eigen.clone() };
    let r = leading_eigen_with(&build_matrix(beta, dim)?, &eo)?;
    Ok((r.lambda, r.eigvec))
}

fn check_open_unit(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what: "beta (needs 0 < beta < 1)", value: beta })
    }
}

/// `lambda(beta)` for `0 < beta < 1`. The matrix source doubles the
/// dimension from `min_dim` until the relative target is met or `max_dim` is
/// reached; the result carries the last uncertainty either way.
pub fn estimate_lambda(beta: f64, opts: &ThermoOptions) -> Result<LambdaEstimate> {
    check_open_unit(beta)?;
    match opts.source {
        LambdaSource::Ratio { level } => {
            let cur = lambda_from_ratio_with(&Serial, beta, level)?;
            let prev = lambda_from_ratio_with(&Serial, beta, level - 1)?;
            Ok(LambdaEstimate { beta, lambda: cur, size: level as usize, uncertainty: libm::fabs(cur - prev), eigvec: Vec::new() })
        }
        LambdaSource::Matrix => {
            if opts.min_dim < 4 || opts.min_dim > opts.max_dim {
                return Err(Error::Invalid("matrix escalation needs 4 <= min_dim <= max_dim"));
            }
            let (mut coarse, mut vec) = matrix_lambda(beta, opts.min_dim / 2, opts, None)?;
            let mut dim = opts.min_dim;
            loop {
                let (lambda, v) = matrix_lambda(beta, dim, opts, Some(&vec))?;
                let est = LambdaEstimate { beta, lambda, size: dim, uncertainty: libm::fabs(lambda - coarse), eigvec: v };
                if est.within(opts.relative_target) || 2 * dim > opts.max_dim {
                    return Ok(est);
                }
                coarse = est.lambda;
                vec = est.eigvec;
                dim *= 2;
            }
        }
    }
}

/// `phi` at a fixed truncation, warm started.
fn phi_at(beta: f64, size: usize, opts: &ThermoOptions, start: &mut Vec<f64>) -> Result<f64> {
    match opts.source {
        LambdaSource::Ratio { .. } => Ok(-libm::log(lambda_from_ratio_with(&Serial, beta, size as u32)?)),
        LambdaSource::Matrix => {
            let (lambda, v) = matrix_lambda(beta, size, opts, (!start.is_empty()).then_some(start.as_slice()))?;
            *start = v;
            Ok(-libm::log(lambda))
        }
    }
}

/// Free energy per site. `beta` is read in the given convention.
pub fn free_energy(beta: f64, convention: Convention, opts: &ThermoOptions) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain { what: "free energy beta (needs beta > 0)", value: beta });
    }
    let b = convention.to_tree(beta);
    if b >= 1.0 {
        return Ok(0.0);
    }
    Ok(estimate_lambda(b, opts)?.phi() / b)
}

/// `-ln Z_k / (beta k)` normalised so that it approaches [`free_energy`] in
/// the same convention: the Farey tree is summed at the tree temperature, the
/// chains at twice it.
pub fn finite_size_free_energy(model: Model, k: u32, beta: f64, convention: Convention) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain { what: "free energy beta (needs beta > 0)", value: beta });
    }
    let b = convention.to_tree(beta);
    let arg = match model {
        Model::FareyTree => b,
        Model::FareyChain | Model::Knauf => 2.0 * b,
        Model::KnaufEven | Model::KnaufOdd => {
            return Err(Error::Invalid("finite-size free energy needs farey-chain, knauf or farey-tree"));
        }
    };
    let z = evaluate_with(&Serial, model, k, arg)?.value;
    if k == 0 {
        return Err(Error::LevelTooSmall { level: k, min: 1 });
    }
    Ok(-libm::log(z) / (b * f64::from(k)))
}

/// Second and first derivatives of `phi` by central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecificHeat {
    pub beta: f64,
    /// Step `h`; the extrapolation also uses `h / 2`.
    pub step: f64,
    pub phi: f64,
    /// `d phi / d beta`, extrapolated.
    pub internal_energy: f64,
    /// `-beta^2 d^2 phi / d beta^2`, extrapolated.
    pub value: f64,
    /// `|C(h/2) - C(h)| / 3`.
    pub richardson_error: f64,
    /// Matrix dimension or ratio level used for every stencil point.
    pub size: usize,
    /// `|lambda(M) - lambda(M/2)|` at `beta`.
    pub lambda_uncertainty: f64,
    /// `|C(M) - C(M/2)|` when requested.
    pub truncation_spread: Option<f64>,
}

pub fn default_step(beta: f64) -> f64 {
    ((1.0 - beta) / 10.0).min(1e-3).min(beta / 2.0)
}

struct Stencil {
    phi: f64,
    u: f64,
    c: f64,
    c_err: f64,
}

fn stencil(beta: f64, h: f64, size: usize, opts: &ThermoOptions, start: &mut Vec<f64>) -> Result<Stencil> {
    let p0 = phi_at(beta, size, opts, start)?;
    let mut at = |x: f64| phi_at(x, size, opts, start);
    let (p1, m1) = (at(beta + h)?, at(beta - h)?);
    let (p2, m2) = (at(beta + 0.5 * h)?, at(beta - 0.5 * h)?);
    let second = |p: f64, m: f64, s: f64| (p - 2.0 * p0 + m) / (s * s);
    let first = |p: f64, m: f64, s: f64| (p - m) / (2.0 * s);
    let (c1, c2) = (-beta * beta * second(p1, m1, h), -beta * beta * second(p2, m2, 0.5 * h));
    let (u1, u2) = (first(p1, m1, h), first(p2, m2, 0.5 * h));
    Ok(Stencil { phi: p0, u: u2 + (u2 - u1) / 3.0, c: c2 + (c2 - c1) / 3.0, c_err: libm::fabs(c2 - c1) / 3.0 })
}

/// Specific heat at `0 < beta < 1` with step `h` (default [`default_step`]).
/// Every stencil point uses the truncation chosen at `beta` itself.
pub fn specific_heat(beta: f64, h: Option<f64>, opts: &ThermoOptions) -> Result<SpecificHeat> {
    check_open_unit(beta)?;
    let step = h.unwrap_or_else(|| default_step(beta));
    if !(step > 0.0) || beta - step <= 0.0 || beta + step >= 1.0 {
        return Err(Error::StepCollision { beta, step });
    }
    let est = estimate_lambda(beta, opts)?;
    let mut start = est.eigvec.clone();
    let s = stencil(beta, step, est.size, opts, &mut start)?;
    let truncation_spread = match opts.source {
        LambdaSource::Matrix if opts.heat_truncation_check && est.size / 2 >= 2 => {
            let mut coarse_start = Vec::new();
            let c = stencil(beta, step, est.size / 2, opts, &mut coarse_start)?;
            Some(libm::fabs(s.c - c.c))
        }
        _ => None,
    };
    Ok(SpecificHeat {
        beta,
        step,
        phi: s.phi,
        internal_energy: s.u,
        value: s.c,
        richardson_error: s.c_err,
        size: est.size,
        lambda_uncertainty: est.uncertainty,
        truncation_spread,
    })
}

/// One row of a thermodynamic curve (tree temperature).
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoPoint {
    pub beta: f64,
    pub f: f64,
    pub u: f64,
    pub c: f64,
    pub lambda: f64,
    pub source: LambdaSource,
    pub size: usize,
    pub uncertainty: f64,
    pub c_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoCurve {
    pub points: Vec<ThermoPoint>,
}

pub fn thermo_point(beta: f64, opts: &ThermoOptions) -> Result<ThermoPoint> {
    if !(beta > 0.0) {
        return Err(Error::Domain { what: "curve beta (needs beta > 0)", value: beta });
    }
    if beta >= 1.0 {
        return Ok(ThermoPoint {
            beta,
            f: 0.0,
            u: 0.0,
            c: 0.0,
            lambda: 1.0,
            source: opts.source,
            size: 0,
            uncertainty: 0.0,
            c_error: 0.0,
        });
    }
    let sh = specific_heat(beta, None, opts)?;
    Ok(ThermoPoint {
        beta,
        f: sh.phi / beta,
        u: sh.internal_energy,
        c: sh.value,
        lambda: libm::exp(-sh.phi),
        source: opts.source,
        size: sh.size,
        uncertainty: sh.lambda_uncertainty,
        c_error: sh.richardson_error + sh.truncation_spread.unwrap_or(0.0),
    })
}

pub fn thermo_curve(grid: &[f64], opts: &ThermoOptions) -> Result<ThermoCurve> {
    thermo_curve_with(&Serial, grid, opts)
}

/// Grid points are independent; results come back in grid order.
pub fn thermo_curve_with<R: ChunkRunner>(runner: &R, grid: &[f64], opts: &ThermoOptions) -> Result<ThermoCurve> {
    let points = runner.map_ordered(grid.len(), |i| thermo_point(grid[i], opts));
    Ok(ThermoCurve { points: points.into_iter().collect::<Result<Vec<_>>>()? })
}

/// One point of the logarithmic fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitPoint {
    pub eps: f64,
    pub phi: f64,
    /// `phi ln(eps) / eps`.
    pub c_eps: f64,
    pub size: usize,
    pub uncertainty: f64,
    /// Specific heat and `C eps ln^2 eps`, when requested.
    pub heat: Option<f64>,
    pub heat_scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionFit {
    /// Median of `c(eps)`.
    pub c_hat: f64,
    pub window: (f64, f64),
    /// `max |c(eps) / c_hat - 1|`.
    pub stability: f64,
    /// `max / min` of `C eps ln^2 eps`, when the heat was computed.
    pub heat_ratio: Option<f64>,
    pub points: Vec<FitPoint>,
}

pub const FIT_EPS_MIN: f64 = 1e-3;
pub const FIT_EPS_MAX: f64 = 1e-1;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fits `beta f(beta) = c eps / ln eps` with `eps = 1 - beta` pointwise.
///
/// Refuses when the truncation uncertainty of `lambda` at any point exceeds
/// 10% of `|beta f|` after escalation.
pub fn transition_fit(eps_grid: &[f64], with_heat: bool, opts: &ThermoOptions) -> Result<TransitionFit> {
    transition_fit_with(&Serial, eps_grid, with_heat, opts)
}

pub fn transition_fit_with<R: ChunkRunner>(
    runner: &R,
    eps_grid: &[f64],
    with_heat: bool,
    opts: &ThermoOptions,
) -> Result<TransitionFit> {
    if eps_grid.is_empty() {
        return Err(Error::Invalid("empty fit window"));
    }
    if let Some(e) = eps_grid.iter().find(|e| !(FIT_EPS_MIN..=FIT_EPS_MAX).contains(*e)) {
        return Err(Error::Domain { what: "fit eps (needs 1e-3 <= eps <= 1e-1)", value: *e });
    }
    let points = runner.map_ordered(eps_grid.len(), |i| -> Result<FitPoint> {
        let eps = eps_grid[i];
        let beta = 1.0 - eps;
        let est = estimate_lambda(beta, opts)?;
        let phi = est.phi();
        if !est.within(0.1) {
            return Err(Error::TruncationTooCoarse { beta, dim: est.size, uncertainty: est.uncertainty, signal: libm::fabs(phi) });
        }
        let heat = if with_heat { Some(specific_heat(beta, None, opts)?.value) } else { None };
        let ln = libm::log(eps);
        Ok(FitPoint {
            eps,
            phi,
            c_eps: phi * ln / eps,
            size: est.size,
            uncertainty: est.uncertainty,
            heat,
            heat_scaled: heat.map(|c| c * eps * ln * ln),
        })
    });
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    let mut cs: Vec<f64> = points.iter().map(|p| p.c_eps).collect();
    let c_hat = median(&mut cs);
    let stability = points.iter().map(|p| libm::fabs(p.c_eps / c_hat - 1.0)).fold(0.0, f64::max);
    let heat_ratio = with_heat.then(|| {
        let scaled = points.iter().filter_map(|p| p.heat_scaled);
        let (lo, hi) = scaled.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi / lo
    });
    let lo = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eps_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TransitionFit { c_hat, window: (lo, hi), stability, heat_ratio, points })
}

/// `Z_k^F(beta)` over a grid bracketing `beta = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HausdorffReport {
    /// `(beta, k, Z_k^F(beta))`, betas outer, levels inner, both ascending.
    pub rows: Vec<(f64, u32, f64)>,
    /// For each `beta < 1`: `Z` at the largest level exceeds `Z` at the smallest.
    pub grows_below: bool,
    /// For each `beta > 1`: `Z` at the largest level is below `Z` at the smallest.
    pub shrinks_above: bool,
    /// Every value at `beta = 1` lies in `(0, 1)`.
    pub unit_in_range: bool,
}

impl HausdorffReport {
    pub fn holds(&self) -> bool {
        self.grows_below && self.shrinks_above && self.unit_in_range
    }
}

pub fn hausdorff_check(betas: &[f64], levels: &[u32]) -> Result<HausdorffReport> {
    hausdorff_check_with(&Serial, betas, levels)
}

pub fn hausdorff_check_with<R: ChunkRunner>(runner: &R, betas: &[f64], levels: &[u32]) -> Result<HausdorffReport> {
    let mut betas = betas.to_vec();
    betas.sort_by(f64::total_cmp);
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < 2 {
        return Err(Error::Invalid("the level grid needs at least two levels"));
    }
    if !(betas.first().is_some_and(|b| *b < 1.0) && betas.last().is_some_and(|b| *b > 1.0)) {
        return Err(Error::Invalid("the beta grid must bracket 1"));
    }
    let mut rows = Vec::with_capacity(betas.len() * levels.len());
    let (mut grows_below, mut shrinks_above, mut unit_in_range) = (true, true, true);
    for &beta in &betas {
        let zs = levels
            .iter()
            .map(|&k| evaluate_with(runner, Model::FareyTree, k, beta).map(|p| p.value))
            .collect::<Result<Vec<_>>>()?;
        let (first, last) = (zs[0], zs[zs.len() - 1]);
        if beta < 1.0 {
            grows_below &= last > first;
        } else if beta > 1.0 {
            shrinks_above &= last < first;
        } else {
            unit_in_range &= zs.iter().all(|z| *z > 0.0 && *z < 1.0);
        }
        rows.extend(levels.iter().zip(&zs).map(|(&k, &z)| (beta, k, z)));
    }
    Ok(HausdorffReport { rows, grows_below, shrinks_above, unit_in_range })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ThermoOptions {
        ThermoOptions { min_dim: 64, max_dim: 512, ..ThermoOptions::default() }
    }

    #[test]
    fn free_energy_conventions() {
        let o = quick();
        assert_eq!(free_energy(1.5, Convention::Tree, &o).unwrap(), 0.0);
        assert_eq!(free_energy(1.0, Convention::Tree, &o).unwrap(), 0.0);
        assert_eq!(free_energy(2.5, Convention::Chain, &o).unwrap(), 0.0);
        let f = free_energy(0.5, Convention::Tree, &o).unwrap();
        let e = estimate_lambda(0.5, &o).unwrap();
        assert!((f + 2.0 * libm::log(1.365_112_276_778_7)).abs() < 2.0 * e.uncertainty + 1e-9);
        assert_eq!(free_energy(1.0, Convention::Chain, &o).unwrap(), f);
        let small = 1e-4;
        assert!((free_energy(small, Convention::Tree, &o).unwrap() * small + core::f64::consts::LN_2).abs() < 1e-3);
        assert!(free_energy(0.0, Convention::Tree, &o).is_err());
        assert!(free_energy(-1.0, Convention::Tree, &o).is_err());
    }

    #[test]
    fn finite_size_examples() {
        for k in [2, 5, 9] {
            assert!(finite_size_free_energy(Model::FareyTree, k, 1.0, Convention::Tree).unwrap() > 0.0);
        }
        // Z_k grows only polynomially at the transition, so the value decays like ln k / k
        let at = |k| finite_size_free_energy(Model::Knauf, k, 2.0, Convention::Chain).unwrap();
        let (a, b) = (at(10), at(20));
        assert!(a < 0.0 && b < 0.0 && b.abs() < a.abs());
        let cold = finite_size_free_energy(Model::Knauf, 20, 4.0, Convention::Chain).unwrap();
        assert!(cold.abs() < 0.01);
        assert!(finite_size_free_energy(Model::KnaufEven, 4, 1.0, Convention::Tree).is_err());
    }

    #[test]
    fn heat_is_positive_and_stable_under_halving() {
        let o = quick();
        let a = specific_heat(0.5, None, &o).unwrap();
        assert!(a.value > 0.0);
        let b = specific_heat(0.5, Some(a.step / 2.0), &o).unwrap();
        assert!((a.value - b.value).abs() <= 10.0 * (a.richardson_error + b.richardson_error) + 1e-6);
        assert!(matches!(specific_heat(0.5, Some(0.6), &o), Err(Error::StepCollision { .. })));
        assert!(specific_heat(1.0, None, &o).is_err());
    }

    #[test]
    fn escalation_reports_uncertainty() {
        let e = estimate_lambda(0.5, &quick()).unwrap();
        assert_eq!(e.size, 64);
        assert!(e.within(0.1));
        let e = estimate_lambda(0.99, &quick()).unwrap();
        assert!(e.size >= 128 && e.size <= 512);
    }

    #[test]
    fn fit_rejects_out_of_window() {
        assert!(transition_fit(&[0.5], false, &quick()).is_err());
        assert!(transition_fit(&[], false, &quick()).is_err());
    }

    #[test]
    fn hausdorff_small_levels() {
        let r = hausdorff_check(&[0.9, 1.0, 1.1], &[6, 12]).unwrap();
        assert!(r.unit_in_range);
        assert_eq!(r.rows.len(), 6);
        assert!(hausdorff_check(&[0.9, 0.95], &[4, 8]).is_err());
    }
}
