//! Partition functions of the Farey chain, the Knauf chain (with its even
//! and odd parts) and the Farey-tree model.
//!
//! Every sum runs over a fixed split of the mediant tree into subtrees at a
//! depth that depends on the level only. Each subtree yields a compensated
//! partial sum; partials are folded left to right. The result is therefore
//! the same bit pattern whatever [`ChunkRunner`] executes the subtrees.

mod bounds;
mod dirichlet;

pub use bounds::{verify_sandwich, verify_sandwich_with, verify_telescope, verify_telescope_with};
pub use bounds::{SandwichReport, SandwichSide, TelescopeReport};
pub use dirichlet::{dirichlet_coefficients, euler_totient, zeta, zeta_ratio, DirichletTable};

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::{ChunkRunner, Serial};
use crate::farey::{check_level, frames_at_depth, walk_unchecked, MediantFrame, NewPair};
use crate::sum::CompensatedSum;

/// Largest level accepted by the partition sums (cost grows as `2^k`).
pub const MAX_SUM_LEVEL: u32 = 60;

/// Subtrees are cut at most this deep: up to 1024 chunks per sum.
pub const MAX_SPLIT_DEPTH: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    FareyChain,
    Knauf,
    KnaufEven,
    KnaufOdd,
    FareyTree,
}

impl Model {
    pub const ALL: [Model; 5] =
        [Model::FareyChain, Model::Knauf, Model::KnaufEven, Model::KnaufOdd, Model::FareyTree];

    pub fn name(self) -> &'static str {
        match self {
            Model::FareyChain => "farey-chain",
            Model::Knauf => "knauf",
            Model::KnaufEven => "knauf-even",
            Model::KnaufOdd => "knauf-odd",
            Model::FareyTree => "farey-tree",
        }
    }

    pub fn min_level(self) -> u32 {
        match self {
            Model::Knauf => 0,
            Model::FareyChain | Model::KnaufEven | Model::KnaufOdd => 1,
            Model::FareyTree => 2,
        }
    }

    /// Number of states summed at level `k`.
    pub fn terms(self, k: u32) -> u64 {
        match self {
            Model::FareyChain | Model::Knauf => 1u64 << k,
            Model::KnaufEven | Model::KnaufOdd => 1u64 << (k - 1),
            Model::FareyTree => 1u64 << (k - 2),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or(Error::Invalid("unknown model (farey-chain, knauf, knauf-even, knauf-odd, farey-tree)"))
    }
}

/// One partition-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionValue {
    pub model: Model,
    pub beta: f64,
    pub level: u32,
    pub value: f64,
    pub terms: u64,
}

/// `d^(-beta)` with an exact-power fast path for small integer exponents.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NegPow {
    beta: f64,
    int: Option<i32>,
}

impl NegPow {
    pub(crate) fn new(beta: f64) -> Self {
        let int = (beta == libm::trunc(beta) && libm::fabs(beta) <= 16.0).then_some(beta as i32);
        Self { beta, int }
    }

    #[inline]
    pub(crate) fn of(&self, d: f64) -> f64 {
        match self.int {
            Some(0) => 1.0,
            Some(n) if n > 0 => 1.0 / powi(d, n as u32),
            Some(n) => powi(d, n.unsigned_abs()),
            None => libm::pow(d, -self.beta),
        }
    }
}

#[inline]
fn powi(mut x: f64, mut n: u32) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= x;
        }
        x *= x;
        n >>= 1;
    }
    acc
}

/// Split depth for a traversal that reaches `max_level`.
pub fn split_depth(max_level: u32) -> u32 {
    max_level.saturating_sub(1).min(MAX_SPLIT_DEPTH)
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "beta", value: beta })
    }
}

fn check_sum_level(model: Model, k: u32) -> Result<()> {
    if k < model.min_level() {
        return Err(Error::LevelTooSmall { level: k, min: model.min_level() });
    }
    check_level(k)?;
    if k > MAX_SUM_LEVEL {
        return Err(Error::LevelTooLarge { level: k, max: MAX_SUM_LEVEL, hint: "" });
    }
    Ok(())
}

/// Sums `term` over the pairs new at `level`, split into ordered subtrees.
fn level_sum<R, F>(runner: &R, level: u32, term: F) -> Result<f64>
where
    R: ChunkRunner,
    F: Fn(&NewPair, &mut CompensatedSum) + Sync + Send,
{
    let frames = frames_at_depth(split_depth(level))?;
    let partials = runner.map_ordered(frames.len(), |i| {
        let mut acc = CompensatedSum::new();
        walk_unchecked(&frames[i], level, level, u64::MAX, &mut |p: &NewPair| term(p, &mut acc));
        acc
    });
    Ok(fold(&partials))
}

fn fold(partials: &[CompensatedSum]) -> f64 {
    let mut total = CompensatedSum::new();
    for p in partials {
        total.merge(p);
    }
    total.value()
}

/// Knauf sum `sum_{n=1}^{2^k} d_k^(n)^(-beta)` in index order.
fn knauf_inorder<R: ChunkRunner>(runner: &R, k: u32, beta: f64) -> Result<f64> {
    let w = NegPow::new(beta);
    if k == 0 {
        return Ok(w.of(1.0));
    }
    let frames = frames_at_depth(split_depth(k))?;
    let partials = runner.map_ordered(frames.len(), |i| {
        let f: &MediantFrame = &frames[i];
        let mut acc = CompensatedSum::new();
        acc.add(w.of(f.left.den as f64));
        walk_unchecked(f, f.depth + 1, k, u64::MAX, &mut |p: &NewPair| acc.add(w.of(p.new.den as f64)));
        acc
    });
    Ok(fold(&partials))
}

/// Evaluates `model` at level `k` on the calling thread.
pub fn evaluate(model: Model, k: u32, beta: f64) -> Result<PartitionValue> {
    evaluate_with(&Serial, model, k, beta)
}

/// Evaluates `model` at level `k`, running subtrees on `runner`.
pub fn evaluate_with<R: ChunkRunner>(runner: &R, model: Model, k: u32, beta: f64) -> Result<PartitionValue> {
    check_beta(beta)?;
    check_sum_level(model, k)?;
    let w = NegPow::new(beta);
    let value = match model {
        Model::Knauf => knauf_inorder(runner, k, beta)?,
        Model::KnaufEven => level_sum(runner, k, |p, acc| acc.add(w.of(p.new.den as f64)))?,
        Model::KnaufOdd => level_sum(runner, k, |p, acc| acc.add(w.of(p.left.den as f64)))?,
        Model::FareyChain => level_sum(runner, k, |p, acc| {
            // pairs (left, new) and (new, right) sit at indices 2n-1 and 2n
            acc.add(w.of((p.left.den + p.new.num) as f64));
            acc.add(w.of((p.new.den + p.right.num) as f64));
        })?,
        Model::FareyTree => tree_sum(runner, k, beta, TreeForm::Difference)?,
    };
    Ok(PartitionValue { model, beta, level: k, value, terms: model.terms(k) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TreeForm {
    /// `r^(4n) - r^(4n-2)` from the exact integer cross product.
    Difference,
    /// `3 / (d^(4n) d^(4n-2))`.
    Denominators,
}

fn tree_sum<R: ChunkRunner>(runner: &R, k: u32, beta: f64, form: TreeForm) -> Result<f64> {
    // balls at level k are the two children of each fraction new at level k-1
    level_sum(runner, k - 1, |p, acc| {
        let lo = p.left.mediant_in_range(p.new);
        let hi = p.new.mediant_in_range(p.right);
        let dd = lo.den as f64 * hi.den as f64;
        let diam = match form {
            TreeForm::Difference => lo.cross(hi) as f64 / dd,
            TreeForm::Denominators => 3.0 / dd,
        };
        acc.add(libm::pow(diam, beta));
    })
}

pub fn z_knauf(k: u32, beta: f64) -> Result<PartitionValue> {
    evaluate(Model::Knauf, k, beta)
}

pub fn z_knauf_even(k: u32, beta: f64) -> Result<PartitionValue> {
    evaluate(Model::KnaufEven, k, beta)
}

pub fn z_knauf_odd(k: u32, beta: f64) -> Result<PartitionValue> {
    evaluate(Model::KnaufOdd, k, beta)
}

pub fn z_farey_chain(k: u32, beta: f64) -> Result<PartitionValue> {
    evaluate(Model::FareyChain, k, beta)
}

pub fn z_farey_tree(k: u32, beta: f64) -> Result<PartitionValue> {
    evaluate(Model::FareyTree, k, beta)
}

/// The Farey-tree sum evaluated from denominators only, `sum (3/(d d'))^beta`.
pub fn z_farey_tree_denominator_form(k: u32, beta: f64) -> Result<PartitionValue> {
    z_farey_tree_denominator_form_with(&Serial, k, beta)
}

pub fn z_farey_tree_denominator_form_with<R: ChunkRunner>(
    runner: &R,
    k: u32,
    beta: f64,
) -> Result<PartitionValue> {
    check_beta(beta)?;
    check_sum_level(Model::FareyTree, k)?;
    let value = tree_sum(runner, k, beta, TreeForm::Denominators)?;
    Ok(PartitionValue { model: Model::FareyTree, beta, level: k, value, terms: Model::FareyTree.terms(k) })
}

/// Even Knauf parts `Z_{j,e}(beta)` for every `j = 1..=k` from one traversal.
///
/// Entry `j - 1` holds level `j`.
pub fn even_sums(k: u32, beta: f64) -> Result<Vec<f64>> {
    even_sums_with(&Serial, k, beta)
}

pub fn even_sums_with<R: ChunkRunner>(runner: &R, k: u32, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    check_sum_level(Model::KnaufEven, k)?;
    let w = NegPow::new(beta);
    let j = split_depth(k);
    let mut levels = alloc::vec![CompensatedSum::new(); k as usize];
    // levels 1..=j lie above the cut
    walk_unchecked(&MediantFrame::root(), 1, j, u64::MAX, &mut |p: &NewPair| {
        levels[p.level as usize - 1].add(w.of(p.new.den as f64));
    });
    let frames = frames_at_depth(j)?;
    let partials = runner.map_ordered(frames.len(), |i| {
        let mut acc = alloc::vec![CompensatedSum::new(); (k - j) as usize];
        walk_unchecked(&frames[i], j + 1, k, u64::MAX, &mut |p: &NewPair| {
            acc[(p.level - j - 1) as usize].add(w.of(p.new.den as f64));
        });
        acc
    });
    for part in &partials {
        for (slot, s) in levels[j as usize..].iter_mut().zip(part) {
            slot.merge(s);
        }
    }
    Ok(levels.iter().map(CompensatedSum::value).collect())
}

/// `-ln Z_k / (beta k)` for a partition value.
pub fn finite_size_free_energy(pv: &PartitionValue) -> f64 {
    -libm::log(pv.value) / (pv.beta * f64::from(pv.level))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn knauf_examples() {
        for beta in [0.3, 1.0, 2.5, -1.0] {
            let v = z_knauf(1, beta).unwrap().value;
            assert!(close(v, 1.0 + libm::pow(2.0, -beta), 1e-15));
        }
        let v = z_knauf(2, 2.0).unwrap();
        assert!(close(v.value, 1.0 + 1.0 / 9.0 + 0.25 + 1.0 / 9.0, 1e-15));
        assert_eq!(v.terms, 4);
        for k in 0..=12 {
            assert_eq!(z_knauf(k, 0.0).unwrap().value, (1u64 << k) as f64);
        }
    }

    #[test]
    fn even_odd_examples() {
        assert!(close(z_knauf_even(2, 2.0).unwrap().value, 2.0 / 9.0, 1e-15));
        assert!(close(z_knauf_odd(2, 2.0).unwrap().value, z_knauf(1, 2.0).unwrap().value, 1e-15));
        assert_eq!(z_knauf_even(1, 0.0).unwrap().value, 1.0);
        assert!(z_knauf_even(0, 1.0).is_err());
    }

    #[test]
    fn farey_chain_examples() {
        for beta in [0.5, 1.0, 3.0] {
            let v = z_farey_chain(1, beta).unwrap().value;
            assert!(close(v, libm::pow(2.0, -beta) + libm::pow(3.0, -beta), 1e-15));
        }
        // energies ln(d_n + n_{n+1}) over {0/1, 1/3, 1/2, 2/3, 1/1}: 2, 4, 4, 4
        assert!(close(z_farey_chain(2, 1.0).unwrap().value, 1.25, 1e-15));
        assert_eq!(z_farey_chain(1, 0.0).unwrap().value, 2.0);
    }

    #[test]
    fn farey_tree_examples() {
        assert!(close(z_farey_tree(2, 1.0).unwrap().value, 1.0 / 3.0, 1e-15));
        assert!(close(z_farey_tree(3, 1.0).unwrap().value, 0.3, 1e-15));
        assert!(close(z_farey_tree_denominator_form(3, 1.0).unwrap().value, 0.3, 1e-15));
        assert_eq!(z_farey_tree(5, 0.0).unwrap().terms, 8);
        assert!(z_farey_tree(1, 1.0).is_err());
    }

    #[test]
    fn level_limits() {
        assert!(matches!(z_knauf(61, 1.0), Err(Error::LevelTooLarge { .. })));
        assert!(matches!(z_knauf(89, 1.0), Err(Error::Overflow { level: 89 })));
        assert!(z_knauf(3, f64::NAN).is_err());
    }

    #[test]
    fn negpow_paths_agree() {
        for d in [1.0, 2.0, 7.0, 1234567.0] {
            for beta in [-3.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
                let fast = NegPow::new(beta).of(d);
                let slow = libm::pow(d, -beta);
                assert!(close(fast, slow, 4e-16), "d={d} beta={beta}");
            }
        }
    }

    #[test]
    fn even_sums_match_individual_levels() {
        let all = even_sums(14, 1.3).unwrap();
        for k in 1..=14 {
            let single = z_knauf_even(k, 1.3).unwrap().value;
            assert!(close(all[k as usize - 1], single, 1e-14), "k={k}");
        }
    }

    #[test]
    fn model_names_round_trip() {
        for m in Model::ALL {
            assert_eq!(m.name().parse::<Model>().unwrap(), m);
        }
        assert!("ising".parse::<Model>().is_err());
    }
}
