//! Chain decompositions of grids.
//!
//! [`scd`] builds the classical symmetric chain decomposition of a product of
//! chains. [`balanced_partition`] turns it into a partition of `[k]^n` whose
//! chain sizes all lie in `[ceil(k^n / 4w), floor(k^n / w)]`, and
//! [`verify_partition`] checks any claimed partition independently.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{small, width_grid, GridShape};
use crate::matching::max_matching;
use crate::par::Exec;

/// Point indices, strictly increasing in the grid order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Chain {
    pub points: Vec<usize>,
}

impl Chain {
    pub fn new(points: Vec<usize>) -> Chain {
        Chain { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bottom(&self) -> usize {
        self.points[0]
    }

    pub fn top(&self) -> usize {
        *self.points.last().expect("nonempty chain")
    }

    /// Consecutive points strictly increase.
    pub fn is_valid(&self, shape: &GridShape) -> bool {
        !self.points.is_empty()
            && self.points.windows(2).all(|w| shape.less_index(w[0], w[1]))
    }

    /// Consecutive points differ by exactly one rank.
    pub fn is_saturated(&self, shape: &GridShape) -> bool {
        self.points
            .windows(2)
            .all(|w| shape.rank_of(w[1]) == shape.rank_of(w[0]) + 1)
    }

    /// Spans ranks `[i, N - i]` for some `i`.
    pub fn is_symmetric(&self, shape: &GridShape) -> bool {
        !self.points.is_empty()
            && shape.rank_of(self.bottom()) + shape.rank_of(self.top()) == shape.max_rank()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPartition {
    pub shape: GridShape,
    pub chains: Vec<Chain>,
}

impl ChainPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.chains.iter().map(Chain::len).collect()
    }
}

// ------------------------------------------------------------------- SCD

/// Symmetric chain decomposition of `[k_1] x ... x [k_n]`.
///
/// Inductive on the axes: a chain `C` of length `c` in the current product,
/// times the next axis `[k]`, is a `c x k` rectangle split into `min(c, k)`
/// hooks. Hook `t` climbs axis `k` from `(C[t], 0)` to `(C[t], k-1-t)` and
/// then runs along `C` to `(C[c-1], k-1-t)`.
pub fn scd(shape: &GridShape) -> Result<ChainPartition> {
    shape.len()?;
    let sides = shape.sides();
    let mut chains: Vec<Vec<usize>> = vec![(0..sides[0]).collect()];
    for &k in &sides[1..] {
        let mut next = Vec::new();
        for c in &chains {
            for t in 0..c.len().min(k) {
                let mut hook = Vec::with_capacity(c.len() + k - 1 - 2 * t);
                for j in 0..k - t {
                    hook.push(c[t] * k + j);
                }
                for &x in &c[t + 1..] {
                    hook.push(x * k + (k - 1 - t));
                }
                next.push(hook);
            }
        }
        chains = next;
    }
    Ok(ChainPartition {
        shape: shape.clone(),
        chains: chains.into_iter().map(Chain::new).collect(),
    })
}

// ------------------------------------------------------------------- cut

/// Whether `len` splits into parts with sizes in `[low, high]`.
pub fn cut_feasible(len: usize, low: usize, high: usize) -> bool {
    low >= 1 && high >= low && len >= low && len <= high * (len / low)
}

/// Cuts a chain into contiguous pieces with sizes in `[low, high]`: full
/// pieces of size `high`, then the remainder, topped up from the preceding
/// pieces when it falls short of `low`.
pub fn cut_chain(c: &Chain, low: usize, high: usize) -> Result<Vec<Chain>> {
    let len = c.len();
    if !cut_feasible(len, low, high) {
        return Err(Error::InfeasibleCut { len, low, high });
    }
    let mut sizes = vec![high; len / high];
    let rest = len % high;
    if rest > 0 {
        sizes.push(rest);
    }
    let last = sizes.len() - 1;
    let mut deficit = low.saturating_sub(sizes[last]);
    for i in (0..last).rev() {
        if deficit == 0 {
            break;
        }
        let give = deficit.min(sizes[i] - low);
        sizes[i] -= give;
        sizes[last] += give;
        deficit -= give;
    }
    debug_assert_eq!(deficit, 0);
    let mut pieces = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for s in sizes {
        pieces.push(Chain::new(c.points[at..at + s].to_vec()));
        at += s;
    }
    Ok(pieces)
}

// -------------------------------------------------------------- balanced

/// The size window `(low, high)` for `[k]^n`: `low = ceil(k^n / 4w)`,
/// `high = floor(k^n / w)`, each at least 1, and `low` relaxed to 1 when the
/// two cross.
pub fn balanced_window(shape: &GridShape) -> Result<(usize, usize)> {
    let total = shape.len()?;
    let w = small(&width_grid(shape))?;
    let high = (total / w).max(1);
    let low = total.div_ceil(4 * w).max(1);
    Ok(if low > high { (1, high) } else { (low, high) })
}

/// Grids up to this many points fall back to exact merge search.
pub const EXACT_FALLBACK_POINTS: usize = 4096;
const FALLBACK_NODE_LIMIT: u64 = 2_000_000;

pub fn balanced_partition(shape: &GridShape) -> Result<ChainPartition> {
    balanced_partition_with(shape, Exec::default())
}

/// Partition of the uniform grid `[k]^n` into chains whose sizes lie in
/// [`balanced_window`].
///
/// Starting from [`scd`], each undersized chain `u` absorbs the part of a
/// longer chain lying below a lower cover of `u`'s bottom (or above an upper
/// cover of its top); donors are assigned by maximum bipartite matching.
/// Oversized chains are then cut into window-sized pieces. Any chain still
/// undersized is merged with a partner whose union with it is again a chain,
/// re-cutting on overflow. If that stalls and the window admits chains of
/// size `k`, the grid is split into its lines along the last axis; otherwise
/// small grids get an exact backtracking search over merge choices.
pub fn balanced_partition_with(shape: &GridShape, exec: Exec) -> Result<ChainPartition> {
    if shape.as_uniform().is_none() {
        return Err(Error::Domain("balanced partition needs a uniform grid [k]^n".into()));
    }
    let (low, high) = balanced_window(shape)?;
    let mut chains = scd(shape)?.chains;
    while steal_round(shape, &mut chains, low, high, exec)? {}
    chains = cut_oversized(chains, low, high)?;

    loop {
        let undersized: Vec<usize> = (0..chains.len()).filter(|&i| chains[i].len() < low).collect();
        if undersized.is_empty() {
            break;
        }
        if !merge_round(shape, &mut chains, &undersized, low, high, exec)? {
            break;
        }
    }

    if chains.iter().any(|c| c.len() < low || c.len() > high) {
        let (k, _) = shape.as_uniform().expect("checked above");
        let total = shape.len()?;
        if (low..=high).contains(&k) {
            chains = line_partition(shape)?;
        } else if total <= EXACT_FALLBACK_POINTS {
            let mut nodes = 0;
            chains = exact_merge(shape, chains, low, high, &mut nodes)?.ok_or_else(|| {
                Error::ConstructionFailed(format!("no merge sequence reaches the window on {shape}"))
            })?;
        } else {
            return Err(Error::ConstructionFailed(format!(
                "merging stalled on {shape} and the grid exceeds {EXACT_FALLBACK_POINTS} points"
            )));
        }
    }

    chains.sort();
    let partition = ChainPartition { shape: shape.clone(), chains };
    let report = verify_partition(shape, &partition, low, high);
    if !report.ok() {
        return Err(Error::ConstructionFailed(format!("internal verification failed: {report:?}")));
    }
    Ok(partition)
}

/// The `k^(n-1)` lines of `[k]^n` along the last axis.
pub fn line_partition(shape: &GridShape) -> Result<Vec<Chain>> {
    let total = shape.len()?;
    let k = *shape.sides().last().expect("nonempty shape");
    Ok((0..total / k).map(|i| Chain::new((i * k..(i + 1) * k).collect())).collect())
}

fn cut_oversized(chains: Vec<Chain>, low: usize, high: usize) -> Result<Vec<Chain>> {
    let mut out = Vec::with_capacity(chains.len());
    for c in chains {
        if c.len() > high && cut_feasible(c.len(), low, high) {
            out.extend(cut_chain(&c, low, high)?);
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

/// A donor split: the undersized chain takes `donor[..cut]` (below it) or
/// `donor[cut..]` (above it).
#[derive(Debug, Clone, Copy)]
struct Steal {
    donor: usize,
    cut: usize,
    below: bool,
}

fn covers(shape: &GridShape, x: usize, lower: bool) -> Vec<usize> {
    let mut digits = shape.digits(x);
    let mut out = Vec::new();
    for axis in 0..digits.len() {
        let d = digits[axis];
        if lower && d > 0 {
            digits[axis] = d - 1;
            out.push(shape.index_of_digits(&digits));
            digits[axis] = d;
        } else if !lower && d + 1 < shape.sides()[axis] {
            digits[axis] = d + 1;
            out.push(shape.index_of_digits(&digits));
            digits[axis] = d;
        }
    }
    out
}

fn steal_round(
    shape: &GridShape,
    chains: &mut Vec<Chain>,
    low: usize,
    high: usize,
    exec: Exec,
) -> Result<bool> {
    let undersized: Vec<usize> = (0..chains.len()).filter(|&i| chains[i].len() < low).collect();
    if undersized.is_empty() {
        return Ok(false);
    }
    let mut owner = vec![(usize::MAX, 0usize); shape.len()?];
    for (ci, c) in chains.iter().enumerate() {
        for (pos, &x) in c.points.iter().enumerate() {
            owner[x] = (ci, pos);
        }
    }
    let snapshot: &Vec<Chain> = chains;
    let options: Vec<Vec<Steal>> = exec.map(&undersized, |&u| {
        let chain = &snapshot[u];
        let mut opts = Vec::new();
        for y in covers(shape, chain.bottom(), true) {
            let (donor, pos) = owner[y];
            let (taken, kept) = (pos + 1, snapshot[donor].len() - pos - 1);
            if donor != u && taken + chain.len() >= low && (kept == 0 || kept >= low) {
                opts.push(Steal { donor, cut: pos + 1, below: true });
            }
        }
        for z in covers(shape, chain.top(), false) {
            let (donor, pos) = owner[z];
            let (taken, kept) = (snapshot[donor].len() - pos, pos);
            if donor != u && taken + chain.len() >= low && (kept == 0 || kept >= low) {
                opts.push(Steal { donor, cut: pos, below: false });
            }
        }
        // smallest resulting chain first, then donor order
        opts.sort_by_key(|s| {
            let d = snapshot[s.donor].len();
            let taken = if s.below { s.cut } else { d - s.cut };
            (taken + chain.len() > high, taken, s.donor, s.cut)
        });
        opts.dedup_by_key(|s| s.donor);
        opts
    });
    let adj: Vec<Vec<usize>> = options
        .iter()
        .map(|opts| opts.iter().map(|s| s.donor).filter(|d| !undersized.contains(d)).collect())
        .collect();
    let m = max_matching(&adj, chains.len());
    let mut changed = false;
    for (slot, &u) in undersized.iter().enumerate() {
        let Some(donor) = m.left_to_right[slot] else { continue };
        let steal = options[slot].iter().find(|s| s.donor == donor).copied().expect("edge");
        let d = std::mem::take(&mut chains[donor].points);
        let mine = std::mem::take(&mut chains[u].points);
        let (merged, rest) = if steal.below {
            let mut merged = d[..steal.cut].to_vec();
            merged.extend(mine);
            (merged, d[steal.cut..].to_vec())
        } else {
            let mut merged = mine;
            merged.extend_from_slice(&d[steal.cut..]);
            (merged, d[..steal.cut].to_vec())
        };
        chains[u].points = merged;
        chains[donor].points = rest;
        changed = true;
    }
    chains.retain(|c| !c.is_empty());
    Ok(changed)
}

/// Union of two chains if it is again a chain.
fn merge_chains(shape: &GridShape, a: &Chain, b: &Chain) -> Option<Chain> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a.points[i] < b.points[j]);
        let next = if take_a {
            i += 1;
            a.points[i - 1]
        } else {
            j += 1;
            b.points[j - 1]
        };
        if let Some(&prev) = out.last() {
            if !shape.less_index(prev, next) {
                return None;
            }
        }
        out.push(next);
    }
    Some(Chain::new(out))
}

/// Merged chain re-cut into the window when it overflows.
fn settle(merged: Chain, low: usize, high: usize) -> Option<Vec<Chain>> {
    if merged.len() <= high {
        Some(vec![merged])
    } else if cut_feasible(merged.len(), low, high) {
        cut_chain(&merged, low, high).ok()
    } else {
        None
    }
}

fn merge_round(
    shape: &GridShape,
    chains: &mut Vec<Chain>,
    undersized: &[usize],
    low: usize,
    high: usize,
    exec: Exec,
) -> Result<bool> {
    let is_small: BTreeSet<usize> = undersized.iter().copied().collect();
    let snapshot: &Vec<Chain> = chains;
    // partners: non-undersized chains first, fitting merges before overflowing ones
    let adj: Vec<Vec<usize>> = exec.map(undersized, |&u| {
        let mut cands: Vec<(bool, usize)> = (0..snapshot.len())
            .filter(|v| !is_small.contains(v))
            .filter_map(|v| {
                let merged = merge_chains(shape, &snapshot[u], &snapshot[v])?;
                let len = merged.len();
                (len <= high || cut_feasible(len, low, high)).then_some((len > high, v))
            })
            .collect();
        cands.sort();
        cands.into_iter().map(|(_, v)| v).collect()
    });
    let m = max_matching(&adj, chains.len());

    let mut consumed = vec![false; chains.len()];
    let mut produced = Vec::new();
    for (slot, &u) in undersized.iter().enumerate() {
        if let Some(v) = m.left_to_right[slot] {
            let merged = merge_chains(shape, &chains[u], &chains[v]).expect("edge implies chain");
            if let Some(pieces) = settle(merged, low, high) {
                consumed[u] = true;
                consumed[v] = true;
                produced.extend(pieces);
            }
        }
    }

    // undersized chains left over may still pair up among themselves
    let mut left: Vec<usize> = undersized.iter().copied().filter(|&u| !consumed[u]).collect();
    let mut i = 0;
    while i < left.len() {
        let u = left[i];
        let partner = left[i + 1..].iter().position(|&v| {
            merge_chains(shape, &chains[u], &chains[v])
                .is_some_and(|m| m.len() <= high || cut_feasible(m.len(), low, high))
        });
        if let Some(off) = partner {
            let v = left.remove(i + 1 + off);
            let merged = merge_chains(shape, &chains[u], &chains[v]).expect("checked");
            if let Some(pieces) = settle(merged, low, high) {
                consumed[u] = true;
                consumed[v] = true;
                produced.extend(pieces);
            }
        }
        i += 1;
    }

    if produced.is_empty() {
        return Ok(false);
    }
    let mut next: Vec<Chain> = chains
        .drain(..)
        .enumerate()
        .filter_map(|(i, c)| (!consumed[i]).then_some(c))
        .collect();
    next.extend(produced);
    *chains = next;
    Ok(true)
}

fn exact_merge(
    shape: &GridShape,
    chains: Vec<Chain>,
    low: usize,
    high: usize,
    nodes: &mut u64,
) -> Result<Option<Vec<Chain>>> {
    *nodes += 1;
    if *nodes > FALLBACK_NODE_LIMIT {
        return Err(Error::ConstructionFailed("exact merge search exceeded its budget".into()));
    }
    let Some(u) = chains.iter().position(|c| c.len() < low) else {
        if chains.iter().all(|c| c.len() <= high) {
            return Ok(Some(chains));
        }
        return Ok(None);
    };
    for v in 0..chains.len() {
        if v == u {
            continue;
        }
        let Some(merged) = merge_chains(shape, &chains[u], &chains[v]) else {
            continue;
        };
        let Some(pieces) = settle(merged, low, high) else {
            continue;
        };
        let mut next: Vec<Chain> = chains
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != u && i != v)
            .map(|(_, c)| c.clone())
            .collect();
        next.extend(pieces);
        if let Some(done) = exact_merge(shape, next, low, high, nodes)? {
            return Ok(Some(done));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------- verify

/// Outcome of [`verify_partition`]; failures carry the offending indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub is_partition: bool,
    pub chains_valid: bool,
    pub sizes_in_window: bool,
    /// Grid points covered by no chain.
    pub missing: Vec<usize>,
    /// Grid points covered more than once.
    pub duplicated: Vec<usize>,
    /// Listed indices outside the grid.
    pub out_of_range: Vec<usize>,
    /// Chains (by position) that are not strictly increasing.
    pub invalid_chains: Vec<usize>,
    /// Chains (by position) whose size is outside the window.
    pub bad_sizes: Vec<usize>,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.is_partition && self.chains_valid && self.sizes_in_window
    }
}

pub fn verify_partition(shape: &GridShape, p: &ChainPartition, low: usize, high: usize) -> PartitionReport {
    let mut report = PartitionReport::default();
    let total = match shape.len() {
        Ok(t) => t,
        Err(_) => return report,
    };
    let mut hits = vec![0u32; total];
    for (ci, chain) in p.chains.iter().enumerate() {
        for &x in &chain.points {
            if x >= total {
                report.out_of_range.push(x);
            } else {
                hits[x] += 1;
            }
        }
        if !chain.points.iter().all(|&x| x < total) || !chain.is_valid(shape) {
            report.invalid_chains.push(ci);
        }
        if chain.len() < low || chain.len() > high {
            report.bad_sizes.push(ci);
        }
    }
    for (x, &h) in hits.iter().enumerate() {
        match h {
            0 => report.missing.push(x),
            1 => {}
            _ => report.duplicated.push(x),
        }
    }
    report.is_partition = p.shape == *shape
        && report.missing.is_empty()
        && report.duplicated.is_empty()
        && report.out_of_range.is_empty();
    report.chains_valid = report.invalid_chains.is_empty();
    report.sizes_in_window = report.bad_sizes.is_empty();
    report
}

// ----------------------------------------------------------- certificate

/// Chain partition certificate: shape, size window and one line of ascending
/// point indices per chain.
///
/// ```text
/// chain-partition
/// sides 2 2
/// window 1 2
/// 0 1
/// 3
/// 2
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionCertificate {
    pub partition: ChainPartition,
    pub low: usize,
    pub high: usize,
}

const CERT_HEADER: &str = "chain-partition";

impl PartitionCertificate {
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        writeln!(out, "{CERT_HEADER}").unwrap();
        writeln!(out, "sides {}", join(self.partition.shape.sides())).unwrap();
        writeln!(out, "window {} {}", self.low, self.high).unwrap();
        for c in &self.partition.chains {
            writeln!(out, "{}", join(&c.points)).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PartitionCertificate> {
        let bad = |msg: &str| Error::Parse(format!("chain certificate: {msg}"));
        let nums = |s: &str| -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| bad(&format!("bad number `{t}`"))))
                .collect()
        };
        let mut lines = text.lines();
        if lines.next() != Some(CERT_HEADER) {
            return Err(bad("missing header"));
        }
        let sides = lines
            .next()
            .and_then(|l| l.strip_prefix("sides "))
            .ok_or_else(|| bad("missing sides"))?;
        let shape = GridShape::new(nums(sides)?)?;
        let window = lines
            .next()
            .and_then(|l| l.strip_prefix("window "))
            .ok_or_else(|| bad("missing window"))?;
        let w = nums(window)?;
        if w.len() != 2 {
            return Err(bad("window needs two numbers"));
        }
        let chains = lines
            .map(|l| nums(l).map(Chain::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(PartitionCertificate { partition: ChainPartition { shape, chains }, low: w[0], high: w[1] })
    }

    pub fn verify(&self) -> PartitionReport {
        verify_partition(&self.partition.shape, &self.partition, self.low, self.high)
    }
}
