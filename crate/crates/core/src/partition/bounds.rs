//! The two-sided bound of the Farey-tree sum by even Knauf parts, and the
//! telescoping identity of the Knauf sum.

use alloc::vec::Vec;

use super::{evaluate_with, even_sums_with, Model};
use crate::error::{Error, Result};
use crate::exec::{ChunkRunner, Serial};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SandwichSide {
    Lower,
    Upper,
}

/// `lower < value < upper` for the Farey-tree sum at `(k, beta)`.
///
/// For `beta > 0` the bounds are `Z_{k,e}(2 beta) / 2` and
/// `2^beta Z_{k-1,e}(2 beta)`; for `beta < 0` they swap roles. At `beta = 0`
/// both bounds are `Z_k^K(0) / 4` and the check is exact equality.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub level: u32,
    pub beta: f64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub holds: bool,
    /// Sides that failed, with both numbers available in the report.
    pub failed: Vec<SandwichSide>,
}

pub fn verify_sandwich(k: u32, beta: f64) -> Result<SandwichReport> {
    verify_sandwich_with(&Serial, k, beta)
}

pub fn verify_sandwich_with<R: ChunkRunner>(runner: &R, k: u32, beta: f64) -> Result<SandwichReport> {
    if k < 2 {
        return Err(Error::LevelTooSmall { level: k, min: 2 });
    }
    let value = evaluate_with(runner, Model::FareyTree, k, beta)?.value;
    let (lower, upper) = if beta == 0.0 {
        let quarter = evaluate_with(runner, Model::Knauf, k, 0.0)?.value / 4.0;
        (quarter, quarter)
    } else {
        let even = even_sums_with(runner, k, 2.0 * beta)?;
        let half_cur = 0.5 * even[k as usize - 1];
        let scaled_prev = libm::pow(2.0, beta) * even[k as usize - 2];
        if beta > 0.0 { (half_cur, scaled_prev) } else { (scaled_prev, half_cur) }
    };
    let mut failed = Vec::new();
    if beta == 0.0 {
        if value != lower {
            failed.push(SandwichSide::Lower);
            failed.push(SandwichSide::Upper);
        }
    } else {
        if !(lower < value) {
            failed.push(SandwichSide::Lower);
        }
        if !(value < upper) {
            failed.push(SandwichSide::Upper);
        }
    }
    Ok(SandwichReport { level: k, beta, lower, value, upper, holds: failed.is_empty(), failed })
}

/// Residual of `Z_k^K(2 beta) = 1 + sum_{j<=k} Z_{j,e}(2 beta)` and the
/// level-to-level growth of the even parts.
#[derive(Debug, Clone, PartialEq)]
pub struct TelescopeReport {
    pub level: u32,
    pub beta: f64,
    /// `Z_k^K(2 beta)` summed in index order.
    pub knauf: f64,
    /// `1 + sum_j Z_{j,e}(2 beta)` summed level by level.
    pub telescoped: f64,
    /// `|knauf - telescoped| / knauf`.
    pub residual: f64,
    /// `Z_{k-1,e}(2 beta) / Z_{k,e}(2 beta)`, or `None` at `k = 1`.
    pub last_ratio: Option<f64>,
    /// For `0 < beta < 1`: whether `Z_{j,e}(beta) > 2^(1-beta) Z_{j-1,e}(beta)`
    /// for every `2 <= j <= k`.
    pub growth_holds: Option<bool>,
}

pub fn verify_telescope(k: u32, beta: f64) -> Result<TelescopeReport> {
    verify_telescope_with(&Serial, k, beta)
}

pub fn verify_telescope_with<R: ChunkRunner>(runner: &R, k: u32, beta: f64) -> Result<TelescopeReport> {
    if k < 1 {
        return Err(Error::LevelTooSmall { level: k, min: 1 });
    }
    let knauf = evaluate_with(runner, Model::Knauf, k, 2.0 * beta)?.value;
    let even = even_sums_with(runner, k, 2.0 * beta)?;
    let mut acc = crate::sum::CompensatedSum::new();
    acc.add(1.0);
    for v in &even {
        acc.add(*v);
    }
    let telescoped = acc.value();
    let residual = libm::fabs(knauf - telescoped) / knauf;
    let last_ratio = (k >= 2).then(|| even[k as usize - 2] / even[k as usize - 1]);

    let growth_holds = if beta > 0.0 && beta < 1.0 {
        let raw = even_sums_with(runner, k, beta)?;
        let factor = libm::pow(2.0, 1.0 - beta);
        Some(raw.windows(2).all(|w| w[1] > factor * w[0]))
    } else {
        None
    };
    Ok(TelescopeReport { level: k, beta, knauf, telescoped, residual, last_ratio, growth_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sandwich_level_three() {
        let r = verify_sandwich(3, 1.0).unwrap();
        let lower = 0.5 * (1.0 / 16.0 + 1.0 / 25.0 + 1.0 / 25.0 + 1.0 / 16.0);
        assert!((r.lower - lower).abs() < 1e-15);
        assert!((r.lower - 0.1025).abs() < 1e-15);
        assert!((r.value - 0.3).abs() < 1e-15);
        assert!((r.upper - 4.0 / 9.0).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn sandwich_zero_and_negative() {
        let r = verify_sandwich(2, 0.0).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.lower, 1.0);
        assert!(r.holds);
        let r = verify_sandwich(3, -1.0).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.lower < r.value && r.value < r.upper);
        assert!(verify_sandwich(1, 1.0).is_err());
    }

    #[test]
    fn telescope_examples() {
        let r = verify_telescope(3, 1.0).unwrap();
        assert!(r.residual < 1e-15);
        let r = verify_telescope(5, 0.5).unwrap();
        assert_eq!(r.growth_holds, Some(true));
        let r = verify_telescope(5, 0.0).unwrap();
        assert_eq!(r.last_ratio, Some(0.5));
        assert_eq!(r.growth_holds, None);
    }
}
