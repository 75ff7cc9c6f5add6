//! Lubell mass `L(S) = sum_i |S ∩ A_i| / |A_i|` over the rank levels of a
//! grid, the LYM check, the log k construction for K-free sets and the lower
//! half block decomposition.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::extremal::is_p_free;
use crate::grid::{level_profile, GridShape, LevelProfile, Subset};
use crate::poset::Poset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMass {
    pub level: usize,
    pub count: usize,
    pub level_size: BigUint,
    pub contribution: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMass {
    pub block: usize,
    pub count: usize,
    pub mass: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MassReport {
    pub total: BigRational,
    pub per_level: Vec<LevelMass>,
    pub per_block: Option<Vec<BlockMass>>,
}

impl MassReport {
    /// Tab-separated table: level, count, level size, numerator, denominator.
    pub fn to_table(&self) -> String {
        let mut out = String::from("level\tcount\tlevel_size\tnumerator\tdenominator\n");
        for l in &self.per_level {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                l.level,
                l.count,
                l.level_size,
                l.contribution.numer(),
                l.contribution.denom()
            )
            .unwrap();
        }
        out
    }

    pub fn is_consistent(&self) -> bool {
        let sum: BigRational = self.per_level.iter().map(|l| l.contribution.clone()).sum();
        sum == self.total
            && self.per_level.iter().all(|l| {
                !l.level_size.is_zero()
                    && l.contribution == ratio(BigUint::from(l.count), l.level_size.clone())
            })
    }
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn level_counts(s: &Subset) -> Vec<usize> {
    let shape = s.shape();
    let mut counts = vec![0usize; shape.max_rank() + 1];
    for i in s.iter() {
        counts[shape.rank_of(i)] += 1;
    }
    counts
}

pub fn lubell_mass(s: &Subset) -> MassReport {
    mass_with_profile(s, &level_profile(s.shape()))
}

fn mass_with_profile(s: &Subset, profile: &LevelProfile) -> MassReport {
    let per_level: Vec<LevelMass> = level_counts(s)
        .into_iter()
        .enumerate()
        .map(|(level, count)| {
            let level_size = profile.sizes[level].clone();
            let contribution = ratio(BigUint::from(count), level_size.clone());
            LevelMass { level, count, level_size, contribution }
        })
        .collect();
    let total = per_level.iter().map(|l| l.contribution.clone()).sum();
    MassReport { total, per_level, per_block: None }
}

/// Mass with contributions also grouped by the given blocks of points.
pub fn lubell_mass_blocks(s: &Subset, blocks: &[Vec<usize>]) -> MassReport {
    let profile = level_profile(s.shape());
    let mut report = mass_with_profile(s, &profile);
    let shape = s.shape();
    let per_block = blocks
        .iter()
        .enumerate()
        .map(|(block, pts)| {
            let members: Vec<usize> = pts.iter().copied().filter(|&i| s.contains(i)).collect();
            let mass = members
                .iter()
                .map(|&i| ratio(BigUint::one(), profile.sizes[shape.rank_of(i)].clone()))
                .sum();
            BlockMass { block, count: members.len(), mass }
        })
        .collect();
    report.per_block = Some(per_block);
    report
}

/// `1/k + 2 H_{k-1}`, the mass of a maximal chain in `[k]^2`.
pub fn chain_mass_formula(k: usize) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    let big = |x: usize| BigInt::from(x);
    let harmonic: BigRational = (1..k).map(|i| BigRational::new(big(1), big(i))).sum();
    Ok(BigRational::new(big(1), big(k)) + harmonic * big(2))
}

/// A maximal chain of the grid: raise the first coordinate to the top, then
/// the next, and so on.
pub fn maximal_chain(shape: &GridShape) -> Result<Subset> {
    let mut digits = vec![0usize; shape.dim()];
    let mut pts = vec![shape.index_of_digits(&digits)];
    for (axis, &side) in shape.sides().iter().enumerate() {
        for v in 1..side {
            digits[axis] = v;
            pts.push(shape.index_of_digits(&digits));
        }
    }
    Subset::from_indices(shape, pts)
}

/// LYM: an antichain has mass at most 1.
pub fn lym_check(s: &Subset) -> Result<bool> {
    if let Err((x, y)) = s.is_antichain() {
        return Err(Error::NotAntichain(x, y));
    }
    Ok(lubell_mass(s).total <= BigRational::one())
}

// ---------------------------------------------------------- construction

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim1Block {
    pub i: usize,
    /// Coordinate sum `r_i = floor((3 * 2^i - 1) n / 2)`.
    pub r: usize,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim1Construction {
    pub s: usize,
    pub subset: Subset,
    pub blocks: Vec<Claim1Block>,
}

impl Claim1Construction {
    pub fn mass(&self) -> MassReport {
        let blocks: Vec<Vec<usize>> = self.blocks.iter().map(|b| b.points.clone()).collect();
        lubell_mass_blocks(&self.subset, &blocks)
    }
}

/// K-free subset of `[k]^n` with Lubell mass growing like `log k`: for
/// `i < s = floor(log2 k) - 1`, the points with every coordinate in
/// `[2^i, 2^(i+1))` and coordinate sum `r_i`.
pub fn claim1_construct(k: usize, n: usize) -> Result<Claim1Construction> {
    if n < 2 || k < 2 {
        return Err(Error::Domain("the construction needs n >= 2 and k >= 2".into()));
    }
    let shape = GridShape::uniform(k, n)?;
    let s = k.ilog2() as usize - 1;
    let mut blocks = Vec::with_capacity(s);
    let mut all = Vec::new();
    for i in 0..s {
        let lo = 1usize << i;
        let hi = (1usize << (i + 1)) - 1;
        let r = (3 * lo - 1) * n / 2;
        let mut points = Vec::new();
        let mut coords = vec![0usize; n];
        fixed_sum(&mut coords, 0, r, lo, hi, &mut |c| {
            let digits: Vec<usize> = c.iter().map(|&x| x - 1).collect();
            points.push(shape.index_of_digits(&digits));
        });
        points.sort_unstable();
        all.extend_from_slice(&points);
        blocks.push(Claim1Block { i, r, points });
    }
    let subset = Subset::from_indices(&shape, all)?;
    Ok(Claim1Construction { s, subset, blocks })
}

/// Calls `f` on every tuple with entries in `[lo, hi]` summing to `sum`.
fn fixed_sum(coords: &mut [usize], at: usize, sum: usize, lo: usize, hi: usize, f: &mut impl FnMut(&[usize])) {
    let left = coords.len() - at;
    if left == 0 {
        if sum == 0 {
            f(coords);
        }
        return;
    }
    if sum < lo * left || sum > hi * left {
        return;
    }
    for v in lo..=hi.min(sum) {
        coords[at] = v;
        fixed_sum(coords, at + 1, sum - v, lo, hi, f);
    }
}

// ------------------------------------------------------ lower half blocks

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBound {
    /// Level whose size is compared, `2^i - n` or the lowest level of the block.
    pub level: usize,
    pub level_size: BigUint,
    /// `(2^i / (2 n^2))^(n-1)`.
    pub bound: BigRational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperBound {
    /// Coordinate sum `r`.
    pub r: usize,
    pub level_size: BigUint,
    /// `C(r, n - 1)`.
    pub binomial: BigUint,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim2Block {
    pub i: usize,
    /// Coordinate sums `[2^i, 2^(i+1))`, cut to the lower half.
    pub sum_low: usize,
    pub sum_high: usize,
    /// Rank levels inside the block, `None` when the block is empty.
    pub levels: Option<(usize, usize)>,
    pub size: BigUint,
    pub lower: Option<LowerBound>,
    pub upper: Vec<UpperBound>,
    pub mass: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim2Report {
    /// Largest coordinate sum in the lower half, `floor((k+1) n / 2)`.
    pub half_sum: usize,
    pub s: usize,
    pub lower_half_size: BigUint,
    pub blocks: Vec<Claim2Block>,
    /// Sums of the lower half no block covers, `[2^s, half_sum]`.
    pub uncovered: Option<(usize, usize)>,
    pub uncovered_size: BigUint,
}

impl Claim2Report {
    pub fn inequalities_hold(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.lower.as_ref().is_none_or(|l| l.holds) && b.upper.iter().all(|u| u.holds))
    }
}

/// Splits the lower half of `[k]^n` (coordinate sum at most `(k+1)n/2`) into
/// blocks `C_i` of sums in `[2^i, 2^(i+1))` for `i < s = floor(log2((k+1)n/2))`
/// and checks the two level-size inequalities on every block. With `subset`
/// given, also reports its mass inside each block.
pub fn claim2_blocks(k: usize, n: usize, subset: Option<&Subset>) -> Result<Claim2Report> {
    if n < 2 || k < 2 {
        return Err(Error::Domain("the decomposition needs n >= 2 and k >= 2".into()));
    }
    let shape = GridShape::uniform(k, n)?;
    if let Some(sub) = subset {
        if sub.shape() != &shape {
            return Err(Error::ShapeMismatch);
        }
    }
    let profile = level_profile(&shape);
    // coordinate sum t sits on rank t - n
    let level_of_sum = |t: usize| -> BigUint { t.checked_sub(n).map_or_else(BigUint::zero, |r| profile.size_at(r)) };
    let half_sum = (k + 1) * n / 2;
    let s = ((k + 1) * n).ilog2() as usize - 1;
    let masses = subset.map(|sub| {
        let mut by_sum = vec![BigRational::zero(); shape.max_rank() + n + 1];
        for (level, l) in mass_with_profile(sub, &profile).per_level.into_iter().enumerate() {
            by_sum[level + n] = l.contribution;
        }
        by_sum
    });

    let mut blocks = Vec::with_capacity(s);
    for i in 0..s {
        let sum_low = 1usize << i;
        let sum_high = ((1usize << (i + 1)) - 1).min(half_sum);
        let first = sum_low.max(n);
        let levels = (first <= sum_high).then(|| (first - n, sum_high - n));
        let size = (sum_low..=sum_high).map(level_of_sum).sum();
        let lower = levels.map(|(lo, _)| {
            let level_size = profile.size_at(lo);
            let base = BigRational::new(BigInt::from(sum_low), BigInt::from(2 * n * n));
            let bound = num_traits::pow(base, n - 1);
            let holds = BigRational::from_integer(BigInt::from(level_size.clone())) >= bound;
            LowerBound { level: lo, level_size, bound, holds }
        });
        let upper = (first..=sum_high)
            .map(|r| {
                let level_size = level_of_sum(r);
                let binom = binomial(BigUint::from(r), BigUint::from(n - 1));
                let holds = level_size <= binom;
                UpperBound { r, level_size, binomial: binom, holds }
            })
            .collect();
        let mass = masses.as_ref().map(|m| (first..=sum_high).map(|t| m[t].clone()).sum());
        blocks.push(Claim2Block { i, sum_low, sum_high, levels, size, lower, upper, mass });
    }
    let lower_half_size = (n..=half_sum).map(level_of_sum).sum();
    let covered_to = 1usize << s;
    let uncovered = (covered_to <= half_sum).then_some((covered_to, half_sum));
    let uncovered_size = uncovered.map_or_else(BigUint::zero, |(a, b)| (a..=b).map(level_of_sum).sum());
    Ok(Claim2Report { half_sum, s, lower_half_size, blocks, uncovered, uncovered_size })
}

// ------------------------------------------------------------- conjecture

#[derive(Debug, Clone, PartialEq)]
pub enum Ratio {
    /// `k` is a power of two, so `log2 k` is an integer.
    Exact(BigRational),
    Approximate(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub mass: BigRational,
    pub ratio: Ratio,
}

/// `L(S)` next to `L(S) / log2 k` for a P-free subset of `[k]^n`.
pub fn conjecture_ratio(p: &Poset, k: usize, n: usize, s: &Subset) -> Result<RatioReport> {
    if k < 2 {
        return Err(Error::Domain("log2 k vanishes for k < 2".into()));
    }
    if s.shape() != &GridShape::uniform(k, n)? {
        return Err(Error::ShapeMismatch);
    }
    if !is_p_free(s, p)? {
        return Err(Error::NotPFree);
    }
    let mass = lubell_mass(s).total;
    let ratio = if k.is_power_of_two() {
        Ratio::Exact(&mass / BigRational::from_integer(BigInt::from(k.ilog2())))
    } else {
        let m = mass.numer().to_f64().unwrap_or(f64::NAN) / mass.denom().to_f64().unwrap_or(f64::NAN);
        Ratio::Approximate(if mass.is_zero() { 0.0 } else { m / (k as f64).log2() })
    };
    Ok(RatioReport { mass, ratio })
}
