//! Ball diameters of the Farey tree.
//!
//! Ball `n` of level `k` (`1 <= n <= 2^(k-2)`) is the interval between the two
//! level-`k` neighbours of the `n`-th fraction that is new at level `k - 1`.
//! The balls are also the images of `[1/3, 2/3] = [F_0(1/2), F_1(1/2)]` under
//! the compositions `F_e1 o ... o F_em`, `m = k - 2`. Because `F_1` reverses
//! orientation, the symbol string of ball `n` is the binary reflected Gray code
//! of `n - 1`, most significant bit first.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::farey::{check_level, walk_unchecked, Branch, Fraction, MediantFrame, NewPair};
use crate::partition::{check_beta, even_sums, z_farey_tree};
use crate::sum::CompensatedSum;

pub const MAX_APPROX_LEVEL: u32 = 20;

/// One ball with its three diameter estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct BallRecord {
    pub level: u32,
    pub index: u64,
    /// From the exact integer denominators of the endpoints.
    pub exact_diameter: f64,
    /// From composing the presentation functions on exact fractions.
    pub composed_diameter: f64,
    pub symbol_sequence: Vec<Branch>,
    /// `|(F_e1 o ... o F_em)'(1/2)|`.
    pub approx_diameter: f64,
}

fn check_ball(k: u32, n: u64) -> Result<()> {
    if k < 2 {
        return Err(Error::LevelTooSmall { level: k, min: 2 });
    }
    check_level(k)?;
    let count = 1u64 << (k - 2).min(63);
    if n == 0 || n > count {
        return Err(Error::IndexOutOfRange { index: n, len: count });
    }
    Ok(())
}

/// Diameter from the endpoint denominators: with centre `c` and endpoints
/// `l < c < r`, `1/(d_r d_c) + 1/(d_c d_l)`.
fn diameter_from_denominators(dl: u64, dc: u64, dr: u64) -> f64 {
    let (dl, dc, dr) = (dl as f64, dc as f64, dr as f64);
    1.0 / (dr * dc) + 1.0 / (dc * dl)
}

fn diameter_of(p: &NewPair) -> f64 {
    let dl = p.left.den + p.new.den;
    let dr = p.new.den + p.right.den;
    diameter_from_denominators(dl, p.new.den, dr)
}

pub fn ball_exact(k: u32, n: u64) -> Result<f64> {
    check_ball(k, n)?;
    // descend to the frame whose mediant is the ball centre
    let mut frame = MediantFrame::root();
    let pos = n - 1;
    for d in (0..k - 2).rev() {
        let (l, r) = frame.children().ok_or(Error::Overflow { level: k })?;
        frame = if (pos >> d) & 1 == 0 { l } else { r };
    }
    let centre = frame.mediant().ok_or(Error::Overflow { level: k })?;
    let dl = frame.left.den + centre.den;
    let dr = centre.den + frame.right.den;
    Ok(diameter_from_denominators(dl, centre.den, dr))
}

/// All `2^(k-2)` exact diameters of level `k` in ball order.
pub fn exact_diameters(k: u32) -> Result<Vec<f64>> {
    if k > MAX_APPROX_LEVEL + 4 {
        return Err(Error::LevelTooLarge { level: k, max: MAX_APPROX_LEVEL + 4, hint: "use the partition sums instead" });
    }
    check_ball(k, 1)?;
    let mut out = Vec::with_capacity(1 << (k - 2));
    walk_unchecked(&MediantFrame::root(), k - 1, k - 1, u64::MAX, &mut |p: &NewPair| out.push(diameter_of(p)));
    Ok(out)
}

fn compose_exact(symbols: &[Branch], x: Fraction) -> Fraction {
    symbols.iter().rev().fold(x, |acc, b| b.apply_exact(acc))
}

fn check_symbols(symbols: &[Branch]) -> Result<()> {
    check_level(symbols.len() as u32 + 2)
}

/// `|G(1/3) - G(2/3)|` for `G = F_e1 o ... o F_em`, in exact arithmetic up to
/// the final division.
pub fn ball_by_composition(symbols: &[Branch]) -> Result<f64> {
    check_symbols(symbols)?;
    let a = compose_exact(symbols, Fraction::new(1, 3));
    let b = compose_exact(symbols, Fraction::new(2, 3));
    let cross = a.cross(b).unsigned_abs() as f64;
    Ok(cross / (a.den as f64 * b.den as f64))
}

/// Chain-rule product `prod_i |F'_ei(x_i)|` with `x_m = 1/2` and
/// `x_(i-1) = F_ei(x_i)`.
pub fn ball_derivative_approx(symbols: &[Branch]) -> f64 {
    let mut x = 0.5;
    let mut prod = 1.0;
    for b in symbols.iter().rev() {
        prod /= (1.0 + x) * (1.0 + x);
        x = match b {
            Branch::Zero => x / (1.0 + x),
            Branch::One => 1.0 / (1.0 + x),
        };
    }
    prod
}

pub fn symbols_for_ball(k: u32, n: u64) -> Result<Vec<Branch>> {
    check_ball(k, n)?;
    let m = k - 2;
    let gray = (n - 1) ^ ((n - 1) >> 1);
    Ok((0..m)
        .rev()
        .map(|d| if (gray >> d) & 1 == 0 { Branch::Zero } else { Branch::One })
        .collect())
}

/// Inverse of [`symbols_for_ball`]: `(k, n)` for a symbol string.
pub fn ball_index(symbols: &[Branch]) -> Result<(u32, u64)> {
    check_symbols(symbols)?;
    let mut pos = 0u64;
    let mut parity = 0u64;
    for b in symbols {
        parity ^= b.bit() as u64;
        pos = (pos << 1) | parity;
    }
    Ok((symbols.len() as u32 + 2, pos + 1))
}

pub fn ball_record(k: u32, n: u64) -> Result<BallRecord> {
    let exact_diameter = ball_exact(k, n)?;
    let symbol_sequence = symbols_for_ball(k, n)?;
    Ok(BallRecord {
        level: k,
        index: n,
        exact_diameter,
        composed_diameter: ball_by_composition(&symbol_sequence)?,
        approx_diameter: ball_derivative_approx(&symbol_sequence),
        symbol_sequence,
    })
}

/// The derivative-approximated partition sum next to the exact one.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub level: u32,
    pub beta: f64,
    pub approx: f64,
    /// `z_farey_tree(k, beta)`.
    pub exact: f64,
    /// `(approx - exact) / exact`.
    pub relative_error: f64,
    /// `ln(approx / exact) / k`.
    pub log_ratio_per_level: f64,
}

/// `sum_balls ball_derivative_approx^beta` over the `2^(k-2)` symbol strings
/// of length `k - 2`, for `2 <= k <= 20`.
pub fn approx_partition(k: u32, beta: f64) -> Result<ApproxReport> {
    if k > MAX_APPROX_LEVEL {
        return Err(Error::LevelTooLarge { level: k, max: MAX_APPROX_LEVEL, hint: "ball enumeration cap" });
    }
    check_ball(k, 1)?;
    check_beta(beta)?;
    let m = (k - 2) as usize;
    // depth-first over tails: the product only depends on the suffix so far
    let mut acc = CompensatedSum::new();
    let mut stack: Vec<(usize, f64, f64)> = Vec::with_capacity(2 * m + 1);
    stack.push((0, 0.5, 1.0));
    while let Some((len, x, prod)) = stack.pop() {
        if len == m {
            acc.add(if beta == 0.0 { 1.0 } else { libm::pow(prod, beta) });
            continue;
        }
        let p = prod / ((1.0 + x) * (1.0 + x));
        stack.push((len + 1, 1.0 / (1.0 + x), p));
        stack.push((len + 1, x / (1.0 + x), p));
    }
    let approx = acc.value();
    let exact = z_farey_tree(k, beta)?.value;
    Ok(ApproxReport {
        level: k,
        beta,
        approx,
        exact,
        relative_error: (approx - exact) / exact,
        log_ratio_per_level: libm::log(approx / exact) / k as f64,
    })
}

/// Closed form of [`approx_partition`]: the chain-rule product telescopes to
/// `4 / d^2` with `d` the denominator of the ball centre, so the sum is
/// `4^beta Z_{k-1,e}(2 beta)`.
pub fn approx_partition_closed(k: u32, beta: f64) -> Result<f64> {
    check_ball(k, 1)?;
    let even = even_sums(k - 1, 2.0 * beta)?;
    Ok(libm::pow(4.0, beta) * even[k as usize - 2])
}
