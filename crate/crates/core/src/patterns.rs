//! d-dimensional 0-1 patterns and submatrix containment.
//!
//! A host `M` of size `m_1 x ... x m_d` contains `A` of size
//! `a_1 x ... x a_d` when strictly increasing index rows
//! `i_{x,1} < ... < i_{x,a_x}` can be chosen on every axis so that each 1 of
//! `A` lands on a 1 of `M`. Coordinates are 1-based throughout.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Subset;
use crate::par::Exec;
use crate::poset::{realizer_valid, Poset, Realizer};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    dims: Vec<usize>,
    ones: BTreeSet<Vec<usize>>,
}

impl Pattern {
    pub fn new(dims: Vec<usize>, ones: impl IntoIterator<Item = Vec<usize>>) -> Result<Pattern> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Domain("pattern sides must be positive".into()));
        }
        let mut set = BTreeSet::new();
        for one in ones {
            if one.len() != dims.len() || one.iter().zip(&dims).any(|(&c, &m)| c == 0 || c > m) {
                return Err(Error::Domain(format!("coordinate {one:?} outside {dims:?}")));
            }
            if !set.insert(one.clone()) {
                return Err(Error::Domain(format!("duplicate one at {one:?}")));
            }
        }
        Ok(Pattern { dims, ones: set })
    }

    /// The `k x k` identity pattern.
    pub fn identity(k: usize, d: usize) -> Result<Pattern> {
        Pattern::new(vec![k; d], (1..=k).map(|i| vec![i; d]))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.ones.len()
    }

    pub fn ones(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.ones.iter()
    }

    pub fn get(&self, coords: &[usize]) -> bool {
        self.ones.contains(coords)
    }

    pub fn to_file(&self) -> PatternFile {
        PatternFile { dims: self.dims.clone(), ones: self.ones.iter().cloned().collect() }
    }

    /// Parses the inline form `"1,2;2,3;3,1"` with dims `"3,3"`.
    pub fn parse_inline(dims: &str, ones: &str) -> Result<Pattern> {
        let list = |s: &str| -> Result<Vec<usize>> {
            s.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
                .collect()
        };
        let dims = list(dims)?;
        let ones = ones
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(list)
            .collect::<Result<Vec<_>>>()?;
        Pattern::new(dims, ones)
    }
}

/// On-disk pattern document: `{"dims": [...], "ones": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternFile {
    pub dims: Vec<usize>,
    pub ones: Vec<Vec<usize>>,
}

impl PatternFile {
    pub fn to_pattern(&self) -> Result<Pattern> {
        Pattern::new(self.dims.clone(), self.ones.iter().cloned())
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<PatternFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Index rows selecting the submatrix, one strictly increasing row per axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentWitness {
    pub index_rows: Vec<Vec<usize>>,
}

impl ContainmentWitness {
    pub fn is_valid(&self, host: &Pattern, a: &Pattern) -> bool {
        self.index_rows.len() == a.dim()
            && self.index_rows.iter().zip(a.dims()).zip(host.dims()).all(|((row, &ax), &mx)| {
                row.len() == ax && row.windows(2).all(|w| w[0] < w[1]) && row.iter().all(|&i| i >= 1 && i <= mx)
            })
            && a.ones().all(|y| {
                let img: Vec<usize> = y.iter().enumerate().map(|(x, &c)| self.index_rows[x][c - 1]).collect();
                host.get(&img)
            })
    }
}

/// Lexicographically first witness that `host` contains `a`.
pub fn contains_pattern(host: &Pattern, a: &Pattern) -> Result<Option<ContainmentWitness>> {
    if host.dim() != a.dim() {
        return Err(Error::DimensionMismatch { host: host.dim(), pattern: a.dim() });
    }
    Ok(Containment::new(host, a).search())
}

struct Containment<'a> {
    host: &'a Pattern,
    a: &'a Pattern,
    /// `prefixes[t]` holds the projections of host ones onto axes `0..=t`.
    prefixes: Vec<HashSet<Vec<usize>>>,
    a_ones: Vec<Vec<usize>>,
}

impl<'a> Containment<'a> {
    fn new(host: &'a Pattern, a: &'a Pattern) -> Self {
        let d = host.dim();
        let prefixes = (0..d)
            .map(|t| host.ones().map(|h| h[..=t].to_vec()).collect())
            .collect();
        Containment { host, a, prefixes, a_ones: a.ones().cloned().collect() }
    }

    fn search(&self) -> Option<ContainmentWitness> {
        if self.a.dims().iter().zip(self.host.dims()).any(|(a, m)| a > m) {
            return None;
        }
        if self.a.weight() > self.host.weight() {
            return None;
        }
        let mut rows = Vec::with_capacity(self.a.dim());
        self.axis(0, &mut rows).then_some(ContainmentWitness { index_rows: rows })
    }

    fn axis(&self, x: usize, rows: &mut Vec<Vec<usize>>) -> bool {
        if x == self.a.dim() {
            return true;
        }
        let (need, avail) = (self.a.dims()[x], self.host.dims()[x]);
        let mut combo: Vec<usize> = (1..=need).collect();
        loop {
            rows.push(combo.clone());
            if self.prefix_ok(x, rows) && self.axis(x + 1, rows) {
                return true;
            }
            rows.pop();
            if !next_combination(&mut combo, avail) {
                return false;
            }
        }
    }

    /// Every one of `a` still has a host one agreeing on the fixed axes.
    fn prefix_ok(&self, x: usize, rows: &[Vec<usize>]) -> bool {
        let mut key = Vec::with_capacity(x + 1);
        self.a_ones.iter().all(|y| {
            key.clear();
            key.extend((0..=x).map(|t| rows[t][y[t] - 1]));
            self.prefixes[x].contains(&key)
        })
    }
}

/// Advances a strictly increasing selection from `1..=n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let r = combo.len();
    for i in (0..r).rev() {
        if combo[i] < n - (r - 1 - i) {
            combo[i] += 1;
            for j in i + 1..r {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Equal sides and at most one 1 in every axis-parallel hyperplane.
pub fn is_permutation_pattern(a: &Pattern) -> bool {
    let k = a.dims()[0];
    a.dims().iter().all(|&m| m == k)
        && (0..a.dim()).all(|x| {
            let mut seen = BTreeSet::new();
            a.ones().all(|y| seen.insert(y[x]))
        })
}

/// Permutation pattern with exactly one 1 in every hyperplane.
pub fn is_strict_permutation_pattern(a: &Pattern) -> bool {
    is_permutation_pattern(a) && a.weight() == a.dims()[0]
}

/// The `|P| x ... x |P|` pattern with a 1 at `(L_1(p), ..., L_d(p))` for
/// every element `p`.
pub fn poset_to_pattern(p: &Poset, r: &Realizer) -> Result<Pattern> {
    if !realizer_valid(p, r).unwrap_or(false) {
        return Err(Error::InvalidRealizer);
    }
    let n = p.size();
    let ones = (0..n).map(|e| r.orders.iter().map(|o| o[e] + 1).collect());
    Pattern::new(vec![n; r.order_count()], ones)
}

/// The 0-1 array of a grid subset: a 1 at every member's coordinates.
pub fn subset_to_pattern(s: &Subset) -> Pattern {
    let shape = s.shape();
    let ones = s.iter().map(|i| shape.point(i).coords);
    Pattern::new(shape.sides().to_vec(), ones).expect("subset points lie in the grid")
}

// ------------------------------------------------------------- extremal

/// Default cap on `m^d` for [`extremal_weight`].
pub const DEFAULT_EXTREMAL_BUDGET: usize = 25;
const EXTREMAL_NODE_LIMIT: u64 = 200_000_000;

pub fn extremal_weight(m: usize, a: &Pattern) -> Result<(usize, Pattern)> {
    extremal_weight_with(m, a, DEFAULT_EXTREMAL_BUDGET, Exec::default())
}

/// Maximum weight of an `m x ... x m` pattern avoiding `a`, with a witness.
///
/// Branch and bound over cells in lexicographic order, trying 1 before 0.
/// A branch is cut when the partial host already contains `a` (containment
/// only grows with more ones) or when filling every remaining cell cannot
/// beat the best weight found. The witness is the first optimum in that
/// search order; parallel subtrees merge to the same answer.
pub fn extremal_weight_with(m: usize, a: &Pattern, budget: usize, exec: Exec) -> Result<(usize, Pattern)> {
    if a.weight() == 0 {
        return Err(Error::Domain("avoidance target must have at least one 1".into()));
    }
    if m == 0 {
        return Err(Error::Domain("host side must be positive".into()));
    }
    let d = a.dim();
    let cells = m
        .checked_pow(d as u32)
        .filter(|&c| c <= budget)
        .ok_or_else(|| Error::BudgetExceeded(format!("{m}^{d} cells exceed budget {budget}")))?;
    let coords: Vec<Vec<usize>> = (0..cells)
        .map(|mut i| {
            let mut c = vec![0; d];
            for slot in c.iter_mut().rev() {
                *slot = i % m + 1;
                i /= m;
            }
            c
        })
        .collect();
    let search = Extremal { m, d, a, coords: &coords };

    // fixed-depth frontier in search order, then independent subtrees
    let depth = if exec.is_parallel() { cells.min(10) } else { 0 };
    let mut frontier = Vec::new();
    search.frontier(0, depth, &mut Vec::new(), &mut frontier);
    let results = exec.map(&frontier, |prefix| {
        let mut state = SubtreeState { best: None, nodes: 0 };
        let mut chosen = prefix.clone();
        search.dfs(prefix.len(), &mut chosen, &mut state).map(|_| state.best)
    });
    let mut best: Option<(usize, Vec<bool>)> = None;
    for r in results {
        if let Some((w, bits)) = r? {
            if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                best = Some((w, bits));
            }
        }
    }
    let (w, bits) = best.expect("the all-zero host avoids any nonempty pattern");
    let ones = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| coords[i].clone());
    Ok((w, Pattern::new(vec![m; d], ones)?))
}

struct Extremal<'a> {
    m: usize,
    d: usize,
    a: &'a Pattern,
    coords: &'a [Vec<usize>],
}

struct SubtreeState {
    best: Option<(usize, Vec<bool>)>,
    nodes: u64,
}

impl Extremal<'_> {
    fn host(&self, chosen: &[bool]) -> Pattern {
        let ones = chosen.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.coords[i].clone());
        Pattern::new(vec![self.m; self.d], ones).expect("in range")
    }

    fn avoids(&self, chosen: &[bool]) -> bool {
        Containment::new(&self.host(chosen), self.a).search().is_none()
    }

    fn frontier(&self, at: usize, depth: usize, chosen: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if at == depth {
            out.push(chosen.clone());
            return;
        }
        for bit in [true, false] {
            chosen.push(bit);
            if !bit || self.avoids(chosen) {
                self.frontier(at + 1, depth, chosen, out);
            }
            chosen.pop();
        }
    }

    fn dfs(&self, at: usize, chosen: &mut Vec<bool>, st: &mut SubtreeState) -> Result<()> {
        st.nodes += 1;
        if st.nodes > EXTREMAL_NODE_LIMIT {
            return Err(Error::BudgetExceeded("extremal search node limit".into()));
        }
        let weight = chosen.iter().filter(|&&b| b).count();
        let remaining = self.coords.len() - at;
        if let Some((bw, _)) = &st.best {
            if weight + remaining <= *bw {
                return Ok(());
            }
        }
        if at == self.coords.len() {
            st.best = Some((weight, chosen.clone()));
            return Ok(());
        }
        chosen.push(true);
        if self.avoids(chosen) {
            self.dfs(at + 1, chosen, st)?;
        }
        chosen.pop();
        chosen.push(false);
        self.dfs(at + 1, chosen, st)?;
        chosen.pop();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridPoint, GridShape};

    fn pat(dims: &[usize], ones: &[&[usize]]) -> Pattern {
        Pattern::new(dims.to_vec(), ones.iter().map(|o| o.to_vec())).unwrap()
    }

    /// Brute force over all index selections, independent of the search.
    fn brute_contains(host: &Pattern, a: &Pattern) -> bool {
        fn combos(n: usize, r: usize) -> Vec<Vec<usize>> {
            let mut out = Vec::new();
            let mut c: Vec<usize> = (1..=r).collect();
            if r > n {
                return out;
            }
            loop {
                out.push(c.clone());
                if !next_combination(&mut c, n) {
                    return out;
                }
            }
        }
        let axes: Vec<Vec<Vec<usize>>> =
            (0..a.dim()).map(|x| combos(host.dims()[x], a.dims()[x])).collect();
        let mut idx = vec![0usize; a.dim()];
        if axes.iter().any(Vec::is_empty) {
            return false;
        }
        loop {
            let rows: Vec<&Vec<usize>> = idx.iter().enumerate().map(|(x, &i)| &axes[x][i]).collect();
            if a.ones().all(|y| host.get(&y.iter().enumerate().map(|(x, &c)| rows[x][c - 1]).collect::<Vec<_>>())) {
                return true;
            }
            let mut x = 0;
            loop {
                if x == idx.len() {
                    return false;
                }
                idx[x] += 1;
                if idx[x] < axes[x].len() {
                    break;
                }
                idx[x] = 0;
                x += 1;
            }
        }
    }

    #[test]
    fn containment_examples() {
        let id3 = Pattern::identity(3, 2).unwrap();
        let id2 = Pattern::identity(2, 2).unwrap();
        let w = contains_pattern(&id3, &id2).unwrap().unwrap();
        assert_eq!(w.index_rows, vec![vec![1, 2], vec![1, 2]]);

        let row = pat(&[3, 3], &[&[1, 1], &[1, 2], &[1, 3]]);
        assert!(contains_pattern(&row, &id2).unwrap().is_none());

        let diag3 = pat(&[2, 2, 2], &[&[1, 1, 1], &[2, 2, 2]]);
        let w = contains_pattern(&diag3, &Pattern::identity(2, 3).unwrap()).unwrap().unwrap();
        assert_eq!(w.index_rows, vec![vec![1, 2]; 3]);

        assert!(matches!(
            contains_pattern(&diag3, &id2),
            Err(Error::DimensionMismatch { host: 3, pattern: 2 })
        ));
    }

    #[test]
    fn containment_agrees_with_brute_force() {
        let anti = pat(&[2, 2], &[&[1, 2], &[2, 1]]);
        let id2 = Pattern::identity(2, 2).unwrap();
        let l = pat(&[2, 2], &[&[1, 1], &[1, 2], &[2, 2]]);
        for mask in 0u32..1 << 9 {
            let ones = (0..9).filter(|b| mask >> b & 1 == 1).map(|b| vec![b / 3 + 1, b % 3 + 1]);
            let host = Pattern::new(vec![3, 3], ones).unwrap();
            for a in [&anti, &id2, &l] {
                let w = contains_pattern(&host, a).unwrap();
                assert_eq!(w.is_some(), brute_contains(&host, a));
                if let Some(w) = w {
                    assert!(w.is_valid(&host, a));
                }
            }
        }
    }

    #[test]
    fn permutation_pattern_examples() {
        assert!(is_permutation_pattern(&Pattern::identity(2, 2).unwrap()));
        let full = pat(&[2, 2], &[&[1, 1], &[1, 2], &[2, 1], &[2, 2]]);
        assert!(!is_permutation_pattern(&full));
        let cyc = pat(&[3, 3, 3], &[&[1, 2, 3], &[2, 3, 1], &[3, 1, 2]]);
        assert!(is_permutation_pattern(&cyc));
        assert!(is_strict_permutation_pattern(&cyc));
        let partial = pat(&[3, 3], &[&[1, 2]]);
        assert!(is_permutation_pattern(&partial));
        assert!(!is_strict_permutation_pattern(&partial));
        assert!(!is_permutation_pattern(&pat(&[2, 3], &[&[1, 1]])));
    }

    #[test]
    fn poset_to_pattern_examples() {
        let k = Poset::k();
        let r = Realizer::from_sequences(&[vec![0, 1, 2], vec![2, 0, 1]]);
        let a = poset_to_pattern(&k, &r).unwrap();
        assert_eq!(a, pat(&[3, 3], &[&[1, 2], &[2, 3], &[3, 1]]));

        let c2 = Poset::chain(2).unwrap();
        let a = poset_to_pattern(&c2, &Realizer::from_sequences(&[vec![0, 1]])).unwrap();
        assert_eq!(a, pat(&[2], &[&[1], &[2]]));

        let anti = Poset::antichain(2).unwrap();
        let a = poset_to_pattern(&anti, &Realizer::from_sequences(&[vec![0, 1], vec![1, 0]])).unwrap();
        assert_eq!(a, pat(&[2, 2], &[&[1, 2], &[2, 1]]));

        let bad = Realizer::from_sequences(&[vec![0, 1], vec![0, 1]]);
        assert_eq!(poset_to_pattern(&anti, &bad), Err(Error::InvalidRealizer));
    }

    #[test]
    fn extremal_examples() {
        let id2 = Pattern::identity(2, 2).unwrap();
        let (w, witness) = extremal_weight(3, &id2).unwrap();
        assert_eq!(w, 5);
        assert_eq!(witness, pat(&[3, 3], &[&[1, 1], &[1, 2], &[1, 3], &[2, 1], &[3, 1]]));
        assert!(contains_pattern(&witness, &id2).unwrap().is_none());
        assert_eq!(extremal_weight(2, &id2).unwrap().0, 3);
        let empty = Pattern::new(vec![2, 2], vec![]).unwrap();
        assert!(matches!(extremal_weight(2, &empty), Err(Error::Domain(_))));
        assert!(matches!(extremal_weight(6, &id2), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn extremal_matches_exhaustive_and_is_strategy_independent() {
        // exhaustive over all 2^9 hosts
        let anti = pat(&[2, 2], &[&[1, 2], &[2, 1]]);
        let best = (0u32..1 << 9)
            .filter_map(|mask| {
                let ones = (0..9).filter(|b| mask >> b & 1 == 1).map(|b| vec![b / 3 + 1, b % 3 + 1]);
                let host = Pattern::new(vec![3, 3], ones).unwrap();
                (!brute_contains(&host, &anti)).then_some(host.weight())
            })
            .max()
            .unwrap();
        let seq = extremal_weight_with(3, &anti, 25, Exec::Sequential).unwrap();
        let par = extremal_weight_with(3, &anti, 25, Exec::Parallel).unwrap();
        assert_eq!(seq.0, best);
        assert_eq!(seq, par);
    }

    #[test]
    fn subset_to_pattern_examples() {
        let s = GridShape::uniform(2, 2).unwrap();
        let one = Subset::from_points(&s, &[GridPoint::new(vec![1, 1])]).unwrap();
        assert_eq!(subset_to_pattern(&one), pat(&[2, 2], &[&[1, 1]]));
        let full = Subset::full(&s).unwrap();
        assert_eq!(subset_to_pattern(&full).weight(), 4);
        let s3 = GridShape::uniform(3, 2).unwrap();
        let anti = Subset::from_points(
            &s3,
            &[GridPoint::new(vec![1, 3]), GridPoint::new(vec![2, 2]), GridPoint::new(vec![3, 1])],
        )
        .unwrap();
        assert_eq!(subset_to_pattern(&anti), pat(&[3, 3], &[&[1, 3], &[2, 2], &[3, 1]]));
    }

    #[test]
    fn inline_and_file_forms() {
        let a = Pattern::parse_inline("3,3", "1,2;2,3;3,1").unwrap();
        assert_eq!(a, pat(&[3, 3], &[&[1, 2], &[2, 3], &[3, 1]]));
        let text = a.to_file().to_text();
        assert_eq!(PatternFile::from_text(&text).unwrap().to_pattern().unwrap(), a);
        assert!(Pattern::parse_inline("2,2", "3,1").is_err());
    }
}
