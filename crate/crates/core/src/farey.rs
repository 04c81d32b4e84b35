//! Farey levels built by mediant insertion, and the Farey map with its two
//! inverse branches.
//!
//! Level 0 is `{0/1, 1/1}`; level `k + 1` keeps every fraction of level `k`
//! and inserts the mediant of each adjacent pair. The new fractions form a
//! binary tree: a [`MediantFrame`] at depth `j` is a pair of level-`j`
//! neighbours, its mediant is new at level `j + 1`, and its two children are
//! the frames on either side of that mediant.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Deepest level whose mediants are guaranteed to fit in `u64`.
///
/// Denominators at level `k` are bounded by `Fibonacci(k + 2)`, and the
/// spin-chain energies add a numerator and a denominator, bounded by
/// `Fibonacci(k + 3)`; both stay below `2^64` up to this level.
pub const MAX_LEVEL: u32 = 88;

/// Largest level [`level_fractions`] will materialize (2^24 + 1 entries).
pub const LIST_CAP: u32 = 24;

/// A reduced fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    pub const fn new(num: u64, den: u64) -> Self {
        Self { num, den }
    }

    /// Checked mediant `(a + c)/(b + d)`.
    pub fn mediant(self, other: Fraction) -> Option<Fraction> {
        Some(Fraction {
            num: self.num.checked_add(other.num)?,
            den: self.den.checked_add(other.den)?,
        })
    }

    #[inline]
    pub(crate) fn mediant_in_range(self, other: Fraction) -> Fraction {
        // callers have validated the level against MAX_LEVEL
        Fraction { num: self.num + other.num, den: self.den + other.den }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `other - self` as an exact integer cross product over `self.den * other.den`.
    pub fn cross(self, other: Fraction) -> i128 {
        i128::from(other.num) * i128::from(self.den) - i128::from(self.num) * i128::from(other.den)
    }

    /// True when `self < other` are Farey neighbours (`cross == 1`).
    pub fn is_neighbor_of(self, other: Fraction) -> bool {
        self.cross(other) == 1
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A fraction at a given level together with its 1-based position `index`
/// in `[1, 2^level + 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FareyFraction {
    pub fraction: Fraction,
    pub level: u32,
    pub index: u64,
}

impl FareyFraction {
    pub fn numerator(&self) -> u64 {
        self.fraction.num
    }

    pub fn denominator(&self) -> u64 {
        self.fraction.den
    }
}

/// A pair of neighbouring fractions at level `depth`.
///
/// `position` is the 0-based rank of the frame among the `2^depth` frames of
/// its depth, counted left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MediantFrame {
    pub left: Fraction,
    pub right: Fraction,
    pub depth: u32,
    pub position: u64,
}

impl MediantFrame {
    pub const fn root() -> Self {
        Self { left: Fraction::ZERO, right: Fraction::ONE, depth: 0, position: 0 }
    }

    /// The fraction this frame contributes at level `depth + 1`.
    pub fn mediant(&self) -> Option<Fraction> {
        self.left.mediant(self.right)
    }

    pub fn children(&self) -> Option<(MediantFrame, MediantFrame)> {
        let m = self.mediant()?;
        Some((
            MediantFrame { left: self.left, right: m, depth: self.depth + 1, position: 2 * self.position },
            MediantFrame { left: m, right: self.right, depth: self.depth + 1, position: 2 * self.position + 1 },
        ))
    }

    pub fn is_unimodular(&self) -> bool {
        self.left.is_neighbor_of(self.right)
    }

    #[inline]
    fn split(&self, m: Fraction) -> (MediantFrame, MediantFrame) {
        (
            MediantFrame { left: self.left, right: m, depth: self.depth + 1, position: 2 * self.position },
            MediantFrame { left: m, right: self.right, depth: self.depth + 1, position: 2 * self.position + 1 },
        )
    }
}

/// A fraction that is new at `level`, with its two neighbours there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NewPair {
    pub left: Fraction,
    pub new: Fraction,
    pub right: Fraction,
    pub level: u32,
    /// 0-based rank among the `2^(level-1)` new fractions of the level.
    pub position: u64,
}

impl NewPair {
    /// 1-based index of the new fraction within its level (always even).
    pub fn index(&self) -> u64 {
        2 * (self.position + 1)
    }
}

/// Rejects levels whose mediants could overflow `u64`.
pub fn check_level(k: u32) -> Result<()> {
    if k > MAX_LEVEL {
        Err(Error::Overflow { level: k })
    } else {
        Ok(())
    }
}

/// All `2^k + 1` fractions of level `k` in ascending order.
pub fn level_fractions(k: u32) -> Result<Vec<FareyFraction>> {
    if k > LIST_CAP {
        return Err(Error::LevelTooLarge {
            level: k,
            max: LIST_CAP,
            hint: "use traverse_new_pairs to stream larger levels",
        });
    }
    let mut row: Vec<Fraction> = alloc::vec![Fraction::ZERO, Fraction::ONE];
    for _ in 0..k {
        let mut next = Vec::with_capacity(2 * row.len() - 1);
        for w in row.windows(2) {
            next.push(w[0]);
            next.push(w[0].mediant_in_range(w[1]));
        }
        next.push(Fraction::ONE);
        row = next;
    }
    Ok(row
        .into_iter()
        .enumerate()
        .map(|(i, fraction)| FareyFraction { fraction, level: k, index: i as u64 + 1 })
        .collect())
}

/// The `2^depth` frames at `depth`, left to right.
pub fn frames_at_depth(depth: u32) -> Result<Vec<MediantFrame>> {
    if depth > LIST_CAP {
        return Err(Error::LevelTooLarge { level: depth, max: LIST_CAP, hint: "" });
    }
    let mut frames = alloc::vec![MediantFrame::root()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frames.len() * 2);
        for f in &frames {
            let (l, r) = f.split(f.left.mediant_in_range(f.right));
            next.push(l);
            next.push(r);
        }
        frames = next;
    }
    Ok(frames)
}

/// Visits every fraction strictly inside `frame` that is new at a level in
/// `min_level..=max_level`, in ascending order.
///
/// The traversal is an in-order walk with an explicit stack of at most
/// `2 (max_level - frame.depth) + 1` entries. Subtrees whose mediant
/// denominator exceeds `max_den` are skipped entirely; denominators grow
/// strictly down the tree, so nothing below such a mediant can be at or
/// under the bound either.
pub fn walk<F: FnMut(&NewPair)>(
    frame: &MediantFrame,
    min_level: u32,
    max_level: u32,
    max_den: u64,
    mut visit: F,
) -> Result<()> {
    check_level(max_level)?;
    walk_unchecked(frame, min_level, max_level, max_den, &mut visit);
    Ok(())
}

#[derive(Clone, Copy)]
struct Entry {
    frame: MediantFrame,
    mediant: Fraction,
    expanded: bool,
}

pub(crate) fn walk_unchecked<F: FnMut(&NewPair)>(
    frame: &MediantFrame,
    min_level: u32,
    max_level: u32,
    max_den: u64,
    visit: &mut F,
) {
    if frame.depth >= max_level {
        return;
    }
    let cap = 2 * (max_level - frame.depth) as usize + 2;
    let mut stack: Vec<Entry> = Vec::with_capacity(cap);

    let push = |stack: &mut Vec<Entry>, f: MediantFrame| {
        let m = f.left.mediant_in_range(f.right);
        if m.den <= max_den {
            stack.push(Entry { frame: f, mediant: m, expanded: false });
        }
    };
    push(&mut stack, *frame);

    while let Some(e) = stack.pop() {
        let level = e.frame.depth + 1;
        if e.expanded {
            visit(&NewPair {
                left: e.frame.left,
                new: e.mediant,
                right: e.frame.right,
                level,
                position: e.frame.position,
            });
            continue;
        }
        let (l, r) = e.frame.split(e.mediant);
        if level < max_level {
            push(&mut stack, r);
        }
        if level >= min_level {
            stack.push(Entry { expanded: true, ..e });
        }
        if level < max_level {
            push(&mut stack, l);
        }
    }
}

/// Streams the `2^(k-1)` fractions that are new at level `k`, in ascending
/// order, using `O(k)` memory.
pub fn traverse_new_pairs<F: FnMut(&NewPair)>(k: u32, visit: F) -> Result<()> {
    if k == 0 {
        return Err(Error::LevelTooSmall { level: k, min: 1 });
    }
    walk(&MediantFrame::root(), k, k, u64::MAX, visit)
}

/// Which inverse branch of the Farey map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `x / (1 + x)`, onto `[0, 1/2]`, orientation preserving.
    Zero,
    /// `1 / (1 + x)`, onto `[1/2, 1]`, orientation reversing.
    One,
}

impl Branch {
    pub fn from_bit(bit: u8) -> Option<Branch> {
        match bit {
            0 => Some(Branch::Zero),
            1 => Some(Branch::One),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Branch::Zero => 0,
            Branch::One => 1,
        }
    }

    /// Applies the branch to an exact fraction.
    pub fn apply_exact(self, x: Fraction) -> Fraction {
        match self {
            Branch::Zero => Fraction { num: x.num, den: x.num + x.den },
            Branch::One => Fraction { num: x.den, den: x.num + x.den },
        }
    }
}

fn check_unit(what: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

/// The Farey map: `x/(1-x)` on `[0, 1/2]`, `(1-x)/x` on `(1/2, 1]`.
pub fn farey_map(x: f64) -> Result<f64> {
    check_unit("farey_map argument", x)?;
    Ok(if x <= 0.5 { x / (1.0 - x) } else { (1.0 - x) / x })
}

/// Presentation function `F_0(x) = x/(1+x)` or `F_1(x) = 1/(1+x)`.
pub fn presentation(branch: Branch, x: f64) -> Result<f64> {
    check_unit("presentation argument", x)?;
    Ok(match branch {
        Branch::Zero => x / (1.0 + x),
        Branch::One => 1.0 / (1.0 + x),
    })
}

/// `F'_0(x) = 1/(1+x)^2`, `F'_1(x) = -1/(1+x)^2`.
pub fn presentation_derivative(branch: Branch, x: f64) -> f64 {
    let d = 1.0 / ((1.0 + x) * (1.0 + x));
    match branch {
        Branch::Zero => d,
        Branch::One => -d,
    }
}

/// `Fibonacci(n)` with `Fibonacci(1) = Fibonacci(2) = 1`; `None` on overflow.
pub fn fibonacci(n: u32) -> Option<u64> {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        let c = a.checked_add(b)?;
        a = b;
        b = c;
    }
    Some(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn row(k: u32) -> Vec<(u64, u64)> {
        level_fractions(k).unwrap().iter().map(|f| (f.numerator(), f.denominator())).collect()
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    #[test]
    fn small_levels_match_listing() {
        assert_eq!(row(0), [(0, 1), (1, 1)]);
        assert_eq!(row(1), [(0, 1), (1, 2), (1, 1)]);
        assert_eq!(row(2), [(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)]);
        assert_eq!(
            row(3),
            [(0, 1), (1, 4), (1, 3), (2, 5), (1, 2), (3, 5), (2, 3), (3, 4), (1, 1)]
        );
    }

    #[test]
    fn level_cap_is_enforced() {
        assert!(level_fractions(24).is_ok());
        match level_fractions(25) {
            Err(Error::LevelTooLarge { level: 25, max: 24, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rows_are_reduced_sorted_unimodular() {
        for k in 0..=16 {
            let r = level_fractions(k).unwrap();
            assert_eq!(r.len() as u64, (1u64 << k) + 1);
            let bound = fibonacci(k + 2).unwrap();
            for (i, f) in r.iter().enumerate() {
                assert_eq!(f.index, i as u64 + 1);
                assert_eq!(gcd(f.numerator(), f.denominator()), 1);
                assert!(f.denominator() <= bound);
            }
            for w in r.windows(2) {
                assert!(w[0].fraction.is_neighbor_of(w[1].fraction));
            }
        }
    }

    #[test]
    fn mediant_recursions_hold() {
        for k in 1..=16u32 {
            let cur = level_fractions(k).unwrap();
            let prev = level_fractions(k - 1).unwrap();
            let d = |n: usize| cur[n - 1].denominator();
            for n in 1..=(1usize << (k - 1)) {
                assert_eq!(d(2 * n), d(2 * n - 1) + d(2 * n + 1));
                assert_eq!(d(2 * n - 1), prev[n - 1].denominator());
            }
        }
    }

    #[test]
    fn traversal_small_levels() {
        let dens = |k| {
            let mut v = Vec::new();
            traverse_new_pairs(k, |p| v.push(p.new.den)).unwrap();
            v
        };
        assert_eq!(dens(1), [2]);
        assert_eq!(dens(2), [3, 3]);
        assert_eq!(dens(3), [4, 5, 5, 4]);
        assert!(traverse_new_pairs(0, |_| {}).is_err());
        assert_eq!(traverse_new_pairs(89, |_| {}), Err(Error::Overflow { level: 89 }));
    }

    #[test]
    fn traversal_matches_even_indices() {
        for k in 1..=18u32 {
            let r = level_fractions(k).unwrap();
            let mut seen = Vec::new();
            traverse_new_pairs(k, |p| {
                assert_eq!(p.level, k);
                assert_eq!(r[p.index() as usize - 1].fraction, p.new);
                assert_eq!(r[p.index() as usize - 2].fraction, p.left);
                assert_eq!(r[p.index() as usize].fraction, p.right);
                seen.push(p.index());
            })
            .unwrap();
            let expected: Vec<u64> = (1..=(1u64 << (k - 1))).map(|n| 2 * n).collect();
            assert_eq!(seen, expected);
        }
    }

    #[test]
    fn split_traversal_concatenates_in_order() {
        let k = 12;
        let mut whole = Vec::new();
        traverse_new_pairs(k, |p| whole.push(p.new)).unwrap();
        for j in 0..k {
            let mut parts = Vec::new();
            for f in frames_at_depth(j).unwrap() {
                walk(&f, k, k, u64::MAX, |p| parts.push(p.new)).unwrap();
            }
            assert_eq!(parts, whole, "split depth {j}");
        }
    }

    #[test]
    fn inorder_walk_lists_the_level() {
        let k = 10;
        let r = level_fractions(k).unwrap();
        let mut inner = Vec::new();
        walk(&MediantFrame::root(), 1, k, u64::MAX, |p| inner.push(p.new)).unwrap();
        let expected: Vec<Fraction> = r[1..r.len() - 1].iter().map(|f| f.fraction).collect();
        assert_eq!(inner, expected);
    }

    #[test]
    fn pruned_walk_keeps_small_denominators() {
        let mut v = Vec::new();
        walk(&MediantFrame::root(), 1, 40, 5, |p| v.push(p.new)).unwrap();
        let s: Vec<_> = v.iter().map(|f| f.to_string()).collect();
        assert_eq!(
            s,
            ["1/5", "1/4", "1/3", "2/5", "1/2", "3/5", "2/3", "3/4", "4/5"]
        );
    }

    #[test]
    fn maps_and_branches() {
        assert_eq!(farey_map(0.5).unwrap(), 1.0);
        assert!((farey_map(0.4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(farey_map(0.0).unwrap(), 0.0);
        assert!(farey_map(1.5).is_err());
        assert!(farey_map(-0.1).is_err());

        let p = presentation(Branch::Zero, presentation(Branch::One, 0.5).unwrap()).unwrap();
        assert!((p - 0.4).abs() < 1e-16);
        assert_eq!(presentation(Branch::Zero, 0.0).unwrap(), 0.0);
        assert_eq!(presentation(Branch::One, 1.0).unwrap(), 0.5);
        assert!(presentation(Branch::One, 2.0).is_err());

        let half = Fraction::new(1, 2);
        let two_fifths = Branch::Zero.apply_exact(Branch::One.apply_exact(half));
        assert_eq!(two_fifths, Fraction::new(2, 5));
    }

    #[test]
    fn fibonacci_bound() {
        assert_eq!(fibonacci(1), Some(1));
        assert_eq!(fibonacci(2), Some(1));
        assert_eq!(fibonacci(10), Some(55));
        assert!(fibonacci(MAX_LEVEL + 3).is_some());
        assert!(fibonacci(94).is_none());
    }
}
