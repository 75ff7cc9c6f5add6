//! The grid poset `[k_1] x ... x [k_n]` under the pointwise order.
//!
//! Points are encoded in mixed radix, first coordinate most significant, with
//! coordinate value 1 mapped to digit 0. Iteration over indices is therefore
//! lexicographic in the coordinates, and `p < q` implies `index(p) < index(q)`.

use std::fmt;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poset::{Order, Poset};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridShape {
    sides: Vec<usize>,
}

impl GridShape {
    pub fn new(sides: Vec<usize>) -> Result<GridShape> {
        if sides.is_empty() {
            return Err(Error::Domain("grid needs at least one axis".into()));
        }
        if sides.contains(&0) {
            return Err(Error::Domain("grid sides must be positive".into()));
        }
        Ok(GridShape { sides })
    }

    /// `[k]^n`.
    pub fn uniform(k: usize, n: usize) -> Result<GridShape> {
        GridShape::new(vec![k; n])
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    /// Number of axes `n`.
    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    /// `Some((k, n))` when every side equals `k`.
    pub fn as_uniform(&self) -> Option<(usize, usize)> {
        let k = self.sides[0];
        self.sides.iter().all(|&s| s == k).then_some((k, self.sides.len()))
    }

    /// Exact number of points.
    pub fn size_big(&self) -> BigUint {
        self.sides.iter().fold(BigUint::one(), |acc, &k| acc * k)
    }

    /// Number of points, if it fits in `usize`.
    pub fn checked_len(&self) -> Option<usize> {
        self.sides.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k))
    }

    /// Number of points; errors when the grid is too large to index. A grid
    /// always has a point, so there is no `is_empty`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Result<usize> {
        self.checked_len()
            .ok_or_else(|| Error::BudgetExceeded(format!("grid {self} too large to enumerate")))
    }

    /// Largest rank `N = sum (k_i - 1)`.
    pub fn max_rank(&self) -> usize {
        self.sides.iter().map(|k| k - 1).sum()
    }

    /// Writes the 0-based digits of `index` into `out`.
    #[inline]
    pub fn digits_into(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &k) in out.iter_mut().zip(&self.sides).rev() {
            *slot = index % k;
            index /= k;
        }
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        self.digits_into(index, &mut out);
        out
    }

    /// Index of 0-based digits.
    pub fn index_of_digits(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.sides).fold(0, |acc, (&d, &k)| acc * k + d)
    }

    pub fn point(&self, index: usize) -> GridPoint {
        GridPoint { coords: self.digits(index).into_iter().map(|d| d + 1).collect() }
    }

    pub fn index(&self, p: &GridPoint) -> Result<usize> {
        self.check_point(p)?;
        Ok(p.coords.iter().zip(&self.sides).fold(0, |acc, (&c, &k)| acc * k + (c - 1)))
    }

    pub fn check_point(&self, p: &GridPoint) -> Result<()> {
        if p.coords.len() != self.dim()
            || p.coords.iter().zip(&self.sides).any(|(&c, &k)| c == 0 || c > k)
        {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }

    /// Rank of an encoded point.
    #[inline]
    pub fn rank_of(&self, mut index: usize) -> usize {
        let mut r = 0;
        for &k in self.sides.iter().rev() {
            r += index % k;
            index /= k;
        }
        r
    }

    /// `a < b` in the pointwise order (strict).
    pub fn less_index(&self, a: usize, b: usize) -> bool {
        a != b && self.leq_index(a, b)
    }

    pub fn leq_index(&self, mut a: usize, mut b: usize) -> bool {
        if a > b {
            return false;
        }
        for &k in self.sides.iter().rev() {
            if a % k > b % k {
                return false;
            }
            a /= k;
            b /= k;
        }
        true
    }

    pub fn compare_index(&self, a: usize, b: usize) -> GridOrdering {
        if a == b {
            GridOrdering::Equal
        } else if self.leq_index(a, b) {
            GridOrdering::Less
        } else if self.leq_index(b, a) {
            GridOrdering::Greater
        } else {
            GridOrdering::Incomparable
        }
    }

    /// The whole grid as an abstract poset.
    pub fn to_poset(&self) -> Result<Poset> {
        let view = GridView { shape: self, points: (0..self.len()?).collect() };
        Poset::from_order(&view)
    }

    /// Indices of all points at rank `r`, ascending.
    pub fn level_points(&self, r: usize) -> Result<Vec<usize>> {
        let len = self.len()?;
        Ok((0..len).filter(|&i| self.rank_of(i) == r).collect())
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sides.iter().map(|k| format!("[{k}]")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// A grid point with 1-based coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub coords: Vec<usize>,
}

impl GridPoint {
    pub fn new(coords: Vec<usize>) -> GridPoint {
        GridPoint { coords }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridOrdering {
    Less,
    Greater,
    Equal,
    Incomparable,
}

/// Pointwise comparison of two points of the same shape.
pub fn compare(p: &GridPoint, q: &GridPoint) -> Result<GridOrdering> {
    if p.coords.len() != q.coords.len() {
        return Err(Error::ShapeMismatch);
    }
    let le = p.coords.iter().zip(&q.coords).all(|(a, b)| a <= b);
    let ge = p.coords.iter().zip(&q.coords).all(|(a, b)| a >= b);
    Ok(match (le, ge) {
        (true, true) => GridOrdering::Equal,
        (true, false) => GridOrdering::Less,
        (false, true) => GridOrdering::Greater,
        (false, false) => GridOrdering::Incomparable,
    })
}

/// `sum a_j - n`.
pub fn rank(p: &GridPoint) -> usize {
    p.coords.iter().map(|c| c - 1).sum()
}

/// A set of grid points viewed as a poset, in the listed order.
#[derive(Debug, Clone)]
pub struct GridView<'a> {
    pub shape: &'a GridShape,
    pub points: Vec<usize>,
}

impl Order for GridView<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    fn less(&self, i: usize, j: usize) -> bool {
        self.shape.less_index(self.points[i], self.points[j])
    }
}

// --------------------------------------------------------------- levels

/// Exact sizes of the rank levels `A_0, ..., A_N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub sizes: Vec<BigUint>,
    pub width: BigUint,
    pub width_rank: usize,
}

impl LevelProfile {
    /// Sum equals the grid size, symmetric, unimodal.
    pub fn is_consistent(&self, shape: &GridShape) -> bool {
        let total: BigUint = self.sizes.iter().sum();
        let n = self.sizes.len();
        let symmetric = (0..n).all(|i| self.sizes[i] == self.sizes[n - 1 - i]);
        let peak = self.width_rank;
        let unimodal = self.sizes[..=peak].windows(2).all(|w| w[0] <= w[1])
            && self.sizes[peak..].windows(2).all(|w| w[0] >= w[1]);
        total == shape.size_big() && symmetric && unimodal
    }

    pub fn size_at(&self, level: usize) -> BigUint {
        self.sizes.get(level).cloned().unwrap_or_default()
    }
}

/// Level sizes by convolving the polynomials `1 + x + ... + x^(k_i - 1)`.
pub fn level_profile(shape: &GridShape) -> LevelProfile {
    let mut coeffs = vec![BigUint::one()];
    for &k in shape.sides() {
        let mut next = vec![BigUint::zero(); coeffs.len() + k - 1];
        // sliding window sum of width k
        let mut window = BigUint::zero();
        for (i, slot) in next.iter_mut().enumerate() {
            if i < coeffs.len() {
                window += &coeffs[i];
            }
            if i >= k {
                window -= &coeffs[i - k];
            }
            *slot = window.clone();
        }
        coeffs = next;
    }
    let mut width_rank = 0;
    for (i, c) in coeffs.iter().enumerate() {
        if *c > coeffs[width_rank] {
            width_rank = i;
        }
    }
    let width = coeffs[width_rank].clone();
    let profile = LevelProfile { sizes: coeffs, width, width_rank };
    debug_assert!(profile.is_consistent(shape));
    profile
}

/// Width of the grid: the largest level size.
pub fn width_grid(shape: &GridShape) -> BigUint {
    level_profile(shape).width
}

/// `w([k]^n)^2 * n / k^(2(n-1))`, the square of `w sqrt(n) / k^(n-1)`.
pub fn theta_ratio(k: usize, n: usize) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::Domain("theta ratio needs k >= 2".into()));
    }
    if n == 0 {
        return Err(Error::Domain("theta ratio needs n >= 1".into()));
    }
    let w = width_grid(&GridShape::uniform(k, n)?);
    let num = &w * &w * BigUint::from(n);
    let den = BigUint::from(k).pow(2 * (n as u32 - 1));
    Ok(BigRational::new(num.into(), den.into()))
}

// --------------------------------------------------------- factorization

/// `[k]^n` written as `[k]^(n_1) x ... x [k]^(n_d)`, larger parts first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub shape: GridShape,
    pub factors: Vec<GridShape>,
}

/// Splits `[k]^n` into `d` uniform factors with exponents in
/// `{floor(n/d), ceil(n/d)}`.
pub fn factor(shape: &GridShape, d: usize) -> Result<Factorization> {
    let (k, n) = shape
        .as_uniform()
        .ok_or_else(|| Error::Domain("factorization needs a uniform grid".into()))?;
    if d == 0 || d > n {
        return Err(Error::Domain(format!("cannot split n = {n} into d = {d} positive parts")));
    }
    let (q, r) = (n / d, n % d);
    let factors = (0..d)
        .map(|i| GridShape::uniform(k, if i < r { q + 1 } else { q }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Factorization { shape: shape.clone(), factors })
}

impl Factorization {
    /// Factor indices of a point of the product (coordinate blocks in order).
    pub fn split(&self, index: usize) -> Vec<usize> {
        let digits = self.shape.digits(index);
        let mut out = Vec::with_capacity(self.factors.len());
        let mut at = 0;
        for f in &self.factors {
            out.push(f.index_of_digits(&digits[at..at + f.dim()]));
            at += f.dim();
        }
        out
    }

    /// Inverse of [`Factorization::split`].
    pub fn join(&self, parts: &[usize]) -> usize {
        let mut digits = Vec::with_capacity(self.shape.dim());
        for (f, &p) in self.factors.iter().zip(parts) {
            digits.extend(f.digits(p));
        }
        self.shape.index_of_digits(&digits)
    }
}

// ------------------------------------------------- normalized matching

/// Default cap on `|A_i|` for the exhaustive normalized matching check.
pub const DEFAULT_MATCHING_BUDGET: usize = 15;

/// Checks `|X| / |A_i| <= |Gamma(X)| / |A_j|` for every `X` in `A_i`, where
/// `Gamma(X)` is the set of points of `A_j` comparable to some point of `X`.
pub fn check_normalized_matching(shape: &GridShape, i: usize, j: usize) -> Result<bool> {
    check_normalized_matching_with_budget(shape, i, j, DEFAULT_MATCHING_BUDGET)
}

pub fn check_normalized_matching_with_budget(
    shape: &GridShape,
    i: usize,
    j: usize,
    budget: usize,
) -> Result<bool> {
    let top = shape.max_rank();
    if i > top || j > top {
        return Err(Error::Domain(format!("levels must lie in 0..={top}")));
    }
    if i == j {
        return Ok(true);
    }
    let a_i = shape.level_points(i)?;
    if a_i.len() > budget || a_i.len() >= 63 {
        return Err(Error::BudgetExceeded(format!(
            "level {i} has {} points, budget {budget}",
            a_i.len()
        )));
    }
    let a_j = shape.level_points(j)?;
    let neighbours: Vec<FixedBitSet> = a_i
        .iter()
        .map(|&x| {
            let mut row = FixedBitSet::with_capacity(a_j.len());
            for (t, &y) in a_j.iter().enumerate() {
                if shape.compare_index(x, y) != GridOrdering::Incomparable {
                    row.insert(t);
                }
            }
            row
        })
        .collect();
    let (ni, nj) = (a_i.len(), a_j.len());
    for mask in 1u64..(1u64 << ni) {
        let mut gamma = FixedBitSet::with_capacity(nj);
        for (t, row) in neighbours.iter().enumerate() {
            if mask >> t & 1 == 1 {
                gamma.union_with(row);
            }
        }
        let x = mask.count_ones() as usize;
        if x * nj > gamma.count_ones(..) * ni {
            return Ok(false);
        }
    }
    Ok(true)
}

// --------------------------------------------------------------- subsets

/// A subset `S` of a grid, as a bitmap over point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subset {
    shape: GridShape,
    members: FixedBitSet,
    count: usize,
}

impl Subset {
    pub fn empty(shape: &GridShape) -> Result<Subset> {
        Ok(Subset { shape: shape.clone(), members: FixedBitSet::with_capacity(shape.len()?), count: 0 })
    }

    pub fn full(shape: &GridShape) -> Result<Subset> {
        let mut s = Subset::empty(shape)?;
        s.members.insert_range(..);
        s.count = s.members.len();
        Ok(s)
    }

    pub fn from_indices(shape: &GridShape, indices: impl IntoIterator<Item = usize>) -> Result<Subset> {
        let mut s = Subset::empty(shape)?;
        for i in indices {
            s.insert(i)?;
        }
        Ok(s)
    }

    pub fn from_points(shape: &GridShape, points: &[GridPoint]) -> Result<Subset> {
        let idx = points.iter().map(|p| shape.index(p)).collect::<Result<Vec<_>>>()?;
        Subset::from_indices(shape, idx)
    }

    /// Inserts a point; returns whether it was new.
    pub fn insert(&mut self, index: usize) -> Result<bool> {
        if index >= self.members.len() {
            return Err(Error::Index { index, size: self.members.len() });
        }
        let fresh = !self.members.put(index);
        if fresh {
            self.count += 1;
        }
        Ok(fresh)
    }

    pub fn remove(&mut self, index: usize) -> bool {
        if index < self.members.len() && self.members.contains(index) {
            self.members.set(index, false);
            self.count -= 1;
            true
        } else {
            false
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.contains(index)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    /// Member indices, ascending.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// The subset as a poset view (members in ascending index order).
    pub fn view(&self) -> GridView<'_> {
        GridView { shape: &self.shape, points: self.indices() }
    }

    pub fn is_antichain(&self) -> std::result::Result<(), (usize, usize)> {
        let pts = self.indices();
        for (a, &x) in pts.iter().enumerate() {
            for &y in &pts[a + 1..] {
                if self.shape.leq_index(x, y) {
                    return Err((x, y));
                }
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> SubsetFile {
        SubsetFile { sides: self.shape.sides().to_vec(), points: self.indices() }
    }
}

/// On-disk subset document: `{"sides": [...], "points": [ascending indices]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetFile {
    pub sides: Vec<usize>,
    pub points: Vec<usize>,
}

impl SubsetFile {
    pub fn to_subset(&self) -> Result<Subset> {
        if self.points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("subset points must be strictly ascending".into()));
        }
        Subset::from_indices(&GridShape::new(self.sides.clone())?, self.points.iter().copied())
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<SubsetFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `BigUint` to `usize`, for sizes known to be small.
pub fn small(n: &BigUint) -> Result<usize> {
    n.to_usize().ok_or_else(|| Error::BudgetExceeded(format!("{n} does not fit in usize")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[usize]) -> GridPoint {
        GridPoint::new(c.to_vec())
    }

    fn enumerated_levels(shape: &GridShape) -> Vec<usize> {
        let mut out = vec![0; shape.max_rank() + 1];
        for i in 0..shape.len().unwrap() {
            out[shape.rank_of(i)] += 1;
        }
        out
    }

    fn as_usizes(v: &[BigUint]) -> Vec<usize> {
        v.iter().map(|x| x.to_usize().unwrap()).collect()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&p(&[1, 1]), &p(&[2, 3])).unwrap(), GridOrdering::Less);
        assert_eq!(compare(&p(&[1, 3]), &p(&[2, 2])).unwrap(), GridOrdering::Incomparable);
        assert_eq!(compare(&p(&[2, 2]), &p(&[2, 2])).unwrap(), GridOrdering::Equal);
        assert_eq!(compare(&p(&[3, 2]), &p(&[2, 2])).unwrap(), GridOrdering::Greater);
        assert!(compare(&p(&[1]), &p(&[1, 1])).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&p(&[1, 1, 1])), 0);
        assert_eq!(rank(&p(&[2, 3])), 3);
        assert_eq!(rank(&p(&[4, 4, 4])), 9);
    }

    #[test]
    fn index_round_trip_and_order() {
        let s = GridShape::new(vec![2, 3, 4]).unwrap();
        for i in 0..24 {
            let pt = s.point(i);
            assert_eq!(s.index(&pt).unwrap(), i);
            assert_eq!(s.rank_of(i), rank(&pt));
            for j in 0..24 {
                let expect = compare(&pt, &s.point(j)).unwrap();
                assert_eq!(s.compare_index(i, j), expect);
            }
        }
        assert_eq!(s.point(0), p(&[1, 1, 1]));
        assert_eq!(s.point(1), p(&[1, 1, 2]));
    }

    #[test]
    fn level_profile_examples() {
        let a = level_profile(&GridShape::uniform(3, 2).unwrap());
        assert_eq!(as_usizes(&a.sizes), vec![1, 2, 3, 2, 1]);
        assert_eq!(a.width, BigUint::from(3u32));
        let b = level_profile(&GridShape::uniform(3, 3).unwrap());
        assert_eq!(as_usizes(&b.sizes), vec![1, 3, 6, 7, 6, 3, 1]);
        assert_eq!(width_grid(&GridShape::uniform(2, 4).unwrap()), BigUint::from(6u32));
    }

    #[test]
    fn level_profile_matches_enumeration() {
        for sides in [vec![3, 3], vec![3, 3, 3], vec![2, 5, 3], vec![1, 4], vec![6, 2, 2, 3]] {
            let s = GridShape::new(sides).unwrap();
            let prof = level_profile(&s);
            assert_eq!(as_usizes(&prof.sizes), enumerated_levels(&s));
            assert!(prof.is_consistent(&s));
        }
    }

    #[test]
    fn width_examples() {
        assert_eq!(width_grid(&GridShape::uniform(2, 10).unwrap()), BigUint::from(252u32));
        assert_eq!(width_grid(&GridShape::uniform(1, 7).unwrap()), BigUint::one());
        assert_eq!(width_grid(&GridShape::uniform(4, 2).unwrap()), BigUint::from(4u32));
    }

    #[test]
    fn theta_ratio_examples() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(theta_ratio(2, 2).unwrap(), r(2, 1));
        assert_eq!(theta_ratio(2, 4).unwrap(), r(9, 4));
        assert_eq!(theta_ratio(3, 2).unwrap(), r(2, 1));
        assert_eq!(theta_ratio(3, 3).unwrap(), r(49 * 3, 81));
        assert!(theta_ratio(1, 3).is_err());
    }

    #[test]
    fn factor_examples() {
        let sides = |f: &Factorization| f.factors.iter().map(|s| s.dim()).collect::<Vec<_>>();
        let f = factor(&GridShape::uniform(3, 5).unwrap(), 2).unwrap();
        assert_eq!(sides(&f), vec![3, 2]);
        let f = factor(&GridShape::uniform(3, 4).unwrap(), 4).unwrap();
        assert_eq!(sides(&f), vec![1, 1, 1, 1]);
        let f = factor(&GridShape::uniform(2, 6).unwrap(), 1).unwrap();
        assert_eq!(sides(&f), vec![6]);
        assert!(factor(&GridShape::uniform(2, 2).unwrap(), 3).is_err());
        assert!(factor(&GridShape::new(vec![2, 3]).unwrap(), 1).is_err());
    }

    #[test]
    fn factor_split_join_is_identity() {
        let s = GridShape::uniform(3, 5).unwrap();
        let f = factor(&s, 3).unwrap();
        for i in 0..s.len().unwrap() {
            assert_eq!(f.join(&f.split(i)), i);
        }
    }

    #[test]
    fn normalized_matching_examples() {
        let s22 = GridShape::uniform(2, 2).unwrap();
        assert!(check_normalized_matching(&s22, 0, 1).unwrap());
        let s32 = GridShape::uniform(3, 2).unwrap();
        assert!(check_normalized_matching(&s32, 1, 2).unwrap());
        assert!(check_normalized_matching(&s32, 2, 2).unwrap());
        assert!(check_normalized_matching(&s32, 3, 0).unwrap());
        let big = GridShape::uniform(2, 8).unwrap();
        assert!(matches!(
            check_normalized_matching(&big, 4, 3),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn subset_basics() {
        let s = GridShape::uniform(3, 2).unwrap();
        let mut sub = Subset::empty(&s).unwrap();
        assert!(sub.insert(4).unwrap());
        assert!(!sub.insert(4).unwrap());
        assert!(sub.insert(2).is_ok());
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.indices(), vec![2, 4]);
        assert!(sub.insert(9).is_err());
        let text = sub.to_file().to_text();
        assert_eq!(SubsetFile::from_text(&text).unwrap().to_subset().unwrap(), sub);
    }
}
