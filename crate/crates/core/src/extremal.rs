//! P-free subsets of grids: freeness checks, the exact maximum, the block
//! bound pipeline and the l-chain-free bound.

use std::collections::{BTreeMap, HashSet};
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::chains::{balanced_partition_with, balanced_window, verify_partition, Chain, ChainPartition};
use crate::error::{Error, Result};
use crate::grid::{factor, level_profile, small, GridShape, GridView, Subset};
use crate::par::Exec;
use crate::poset::{contains_induced_copy, dimension, for_each_induced_copy, Poset, PosetFile, DEFAULT_COPY_NODE_LIMIT};

/// True iff `s` holds no induced copy of `p` under the grid order.
pub fn is_p_free(s: &Subset, p: &Poset) -> Result<bool> {
    Ok(contains_induced_copy(&s.view(), p)?.is_none())
}

// ------------------------------------------------------------ max_p_free

/// Default cap on grid size for [`max_p_free`].
pub const DEFAULT_FREE_BUDGET: usize = 64;
const MAX_FREE_POINTS: usize = 128;
const FREE_NODE_LIMIT: u64 = 500_000_000;

pub fn max_p_free(shape: &GridShape, p: &Poset) -> Result<(usize, Subset)> {
    max_p_free_with(shape, p, DEFAULT_FREE_BUDGET, Exec::default())
}

/// Exact maximum size of a P-free subset of the grid, with a witness.
///
/// Every induced copy of `p` becomes a hyperedge over the grid points; the
/// search picks a maximum set containing no whole hyperedge. Points are
/// taken in index order (a linear extension of the grid) and the optimum of
/// every suffix is found from the back: stage `i` only asks whether a set
/// starting at point `i` beats the suffix after it, and the suffix optima
/// bound every later stage. The witness is the first hit of the deciding stage in
/// include-first order, the same under either strategy.
pub fn max_p_free_with(shape: &GridShape, p: &Poset, budget: usize, exec: Exec) -> Result<(usize, Subset)> {
    let total = shape.len()?;
    if total > budget.min(MAX_FREE_POINTS) {
        return Err(Error::BudgetExceeded(format!(
            "grid {shape} has {total} points, budget is {}",
            budget.min(MAX_FREE_POINTS)
        )));
    }
    let hyper = Hypergraph::new(shape, p)?;

    // c[i]: exact optimum on the suffix of the order starting at i
    let mut c = vec![0usize; total + 1];
    let mut best = 0u128;
    for i in (0..total).rev() {
        c[i] = c[i + 1];
        if let Some(mask) = hyper.stage(i, c[i + 1] + 1, &c, exec)? {
            c[i] += 1;
            best = mask;
        }
    }
    let (size, mask) = (c[0], best);
    let witness = Subset::from_indices(shape, (0..total).filter(|&v| mask >> v & 1 == 1))?;
    Ok((size, witness))
}

#[inline]
fn bit(v: usize) -> u128 {
    1u128 << v
}

struct Hypergraph {
    n: usize,
    /// Size of every hyperedge.
    t: usize,
    edges: Vec<u128>,
    incident: Vec<Vec<usize>>,
    edge_set: HashSet<u128>,
    /// `t = 2`: neighbours; `t = 3`: `pair[a * n + b]` closes a triple.
    adj: Vec<u128>,
    pair: Vec<u128>,
    groups: Vec<Group>,
}

/// A small subgrid with the exact P-free maximum tabulated for every
/// assignment of its points to excluded (0), free (1) or included (2).
struct Group {
    verts: Vec<usize>,
    table: Vec<u8>,
}

const GROUP_POINTS: usize = 9;

impl Group {
    fn new(verts: Vec<usize>, edges: &[u128]) -> Group {
        let local: Vec<u32> = edges
            .iter()
            .filter_map(|&e| {
                let mut m = 0u32;
                let mut rest = e;
                for (i, &v) in verts.iter().enumerate() {
                    if e >> v & 1 == 1 {
                        m |= 1 << i;
                        rest &= !bit(v);
                    }
                }
                (rest == 0).then_some(m)
            })
            .collect();
        let g = verts.len();
        let states = 3usize.pow(g as u32);
        let mut table = vec![0u8; states];
        // states in increasing order: setting a free digit to 0 or 2 moves
        // to an index that differs by 3^i, so process by free count
        let mut by_free: Vec<Vec<usize>> = vec![Vec::new(); g + 1];
        for st in 0..states {
            let free = digits(st, g).filter(|&d| d == 1).count();
            by_free[free].push(st);
        }
        for (f, list) in by_free.iter().enumerate() {
            for &st in list {
                table[st] = if f == 0 {
                    let incl = digits(st, g).enumerate().filter(|&(_, d)| d == 2).fold(0u32, |m, (i, _)| m | 1 << i);
                    if local.iter().any(|&e| e & !incl == 0) {
                        0
                    } else {
                        incl.count_ones() as u8
                    }
                } else {
                    let i = digits(st, g).position(|d| d == 1).expect("a free digit");
                    let p = 3usize.pow(i as u32);
                    table[st - p].max(table[st + p])
                };
            }
        }
        Group { verts, table }
    }

    fn bound(&self, incl: u128, free: u128) -> usize {
        let mut st = 0usize;
        for &v in self.verts.iter().rev() {
            st = st * 3 + if incl >> v & 1 == 1 { 2 } else { (free >> v & 1) as usize };
        }
        self.table[st] as usize
    }
}

fn digits(mut st: usize, g: usize) -> impl Iterator<Item = usize> {
    (0..g).map(move |_| {
        let d = st % 3;
        st /= 3;
        d
    })
}

/// Partitions the grid into subgrids of at most [`GROUP_POINTS`] points by
/// fixing leading coordinates, or into short runs along the last axis.
fn group_points(shape: &GridShape) -> Vec<Vec<usize>> {
    let sides = shape.sides();
    let mut q = 1;
    for &s in sides.iter().rev() {
        if q * s > GROUP_POINTS {
            break;
        }
        q *= s;
    }
    let total = shape.checked_len().expect("budgeted grid");
    let key = |i: usize| -> usize {
        if q > 1 {
            i / q
        } else {
            let last = *sides.last().expect("n >= 1");
            let runs = last.div_ceil(GROUP_POINTS);
            (i / last) * runs + (i % last) / GROUP_POINTS
        }
    };
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..total {
        groups.entry(key(i)).or_default().push(i);
    }
    groups.into_values().collect()
}

#[derive(Clone, Copy)]
struct Node {
    at: usize,
    incl: u128,
    excl: u128,
}

/// Extra points decided before a stage splits across workers.
const STAGE_SPLIT: usize = 10;

impl Hypergraph {
    fn new(shape: &GridShape, p: &Poset) -> Result<Hypergraph> {
        let n = shape.len()?;
        let t = p.size();
        let view = GridView { shape, points: (0..n).collect() };
        let mut edge_set = HashSet::new();
        let mut edges = Vec::new();
        for_each_induced_copy(&view, p, DEFAULT_COPY_NODE_LIMIT, |map| {
            let mask = map.iter().fold(0u128, |m, &v| m | bit(v));
            if edge_set.insert(mask) {
                edges.push(mask);
            }
            ControlFlow::Continue(())
        })?;
        let mut incident = vec![Vec::new(); n];
        for (e, &mask) in edges.iter().enumerate() {
            for (v, list) in incident.iter_mut().enumerate() {
                if mask >> v & 1 == 1 {
                    list.push(e);
                }
            }
        }
        let mut adj = Vec::new();
        let mut pair = Vec::new();
        if t == 2 {
            adj = vec![0; n];
            for &e in &edges {
                let a = e.trailing_zeros() as usize;
                let b = 127 - e.leading_zeros() as usize;
                adj[a] |= bit(b);
                adj[b] |= bit(a);
            }
        } else if t == 3 {
            pair = vec![0; n * n];
            for &e in &edges {
                let vs: Vec<usize> = (0..n).filter(|&v| e >> v & 1 == 1).collect();
                for (x, y, z) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
                    pair[vs[x] * n + vs[y]] |= bit(vs[z]);
                    pair[vs[y] * n + vs[x]] |= bit(vs[z]);
                }
            }
        }
        let groups = group_points(shape).into_iter().map(|pts| Group::new(pts, &edges)).collect();
        Ok(Hypergraph { n, t, edges, incident, edge_set, adj, pair, groups })
    }

    /// Tries to add `v`; on success returns the exclusions it forces.
    fn include(&self, v: usize, incl: u128) -> Option<u128> {
        let with = incl | bit(v);
        let mut forced = 0;
        for &e in &self.incident[v] {
            let rest = self.edges[e] & !with;
            match rest.count_ones() {
                0 => return None,
                1 => forced |= rest,
                _ => {}
            }
        }
        Some(forced)
    }

    /// Upper bound on how many of `free` can still be added: greedy cover by
    /// sets whose every `t`-subset is a hyperedge, each contributing `t - 1`.
    fn cover_bound(&self, free: u128) -> usize {
        let cap = self.t - 1;
        if cap == 0 {
            return 0;
        }
        let mut rest = free;
        let mut total = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= !bit(v);
            let mut group = vec![v];
            let mut cand = match self.t {
                2 => rest & self.adj[v],
                _ => rest,
            };
            while cand != 0 {
                let u = cand.trailing_zeros() as usize;
                cand &= !bit(u);
                // for t <= 3 the candidate mask already encodes the condition
                let joins = self.t <= 3 || self.closes(&group, u);
                if joins {
                    match self.t {
                        2 => cand &= self.adj[u],
                        3 => {
                            for &g in &group {
                                cand &= self.pair[g * self.n + u];
                            }
                        }
                        _ => {}
                    }
                    group.push(u);
                    rest &= !bit(u);
                }
            }
            total += group.len().min(cap);
        }
        total
    }

    /// Every `t`-subset of `group + u` that contains `u` is a hyperedge.
    fn closes(&self, group: &[usize], u: usize) -> bool {
        let r = self.t - 1;
        if group.len() < r {
            return true;
        }
        let mut idx: Vec<usize> = (0..r).collect();
        loop {
            let mask = idx.iter().fold(bit(u), |m, &i| m | bit(group[i]));
            if !self.edge_set.contains(&mask) {
                return false;
            }
            let Some(i) = (0..r).rev().find(|&i| idx[i] < group.len() - r + i) else {
                return true;
            };
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    fn skip_excluded(&self, mut node: Node) -> Node {
        while node.at < self.n && node.excl >> node.at & 1 == 1 {
            node.at += 1;
        }
        node
    }

    /// Looks for a P-free set of size `target` whose first point is `i`.
    fn stage(&self, i: usize, target: usize, c: &[usize], exec: Exec) -> Result<Option<u128>> {
        let Some(forced) = self.include(i, 0) else {
            return Ok(None);
        };
        let root = Node { at: i + 1, incl: bit(i), excl: forced };
        let depth = if exec.is_parallel() { (i + 1 + STAGE_SPLIT).min(self.n) } else { 0 };
        let mut frontier = Vec::new();
        self.frontier(root, depth, target, &mut frontier);
        let found = exec.find_map_first(&frontier, |&node| {
            let mut nodes = 0u64;
            self.dfs(node, target, c, &mut nodes).transpose()
        });
        found.transpose()
    }

    fn frontier(&self, node: Node, depth: usize, target: usize, out: &mut Vec<Node>) {
        let node = self.skip_excluded(node);
        if node.at >= depth || node.at == self.n || node.incl.count_ones() as usize == target {
            out.push(node);
            return;
        }
        let v = node.at;
        if let Some(forced) = self.include(v, node.incl) {
            self.frontier(Node { at: v + 1, incl: node.incl | bit(v), excl: node.excl | forced }, depth, target, out);
        }
        self.frontier(Node { at: v + 1, incl: node.incl, excl: node.excl | bit(v) }, depth, target, out);
    }

    fn dfs(&self, node: Node, target: usize, c: &[usize], nodes: &mut u64) -> Result<Option<u128>> {
        *nodes += 1;
        if *nodes > FREE_NODE_LIMIT {
            return Err(Error::BudgetExceeded("P-free search node limit".into()));
        }
        let node = self.skip_excluded(node);
        let have = node.incl.count_ones() as usize;
        if have == target {
            return Ok(Some(node.incl));
        }
        if node.at == self.n || have + c[node.at] < target {
            return Ok(None);
        }
        let free = !node.excl & !node.incl & (u128::MAX << node.at) & low_mask(self.n);
        if have + self.cover_bound(free) < target
            || self.groups.iter().map(|g| g.bound(node.incl, free)).sum::<usize>() < target
        {
            return Ok(None);
        }
        let v = node.at;
        if let Some(forced) = self.include(v, node.incl) {
            let hit = self.dfs(Node { at: v + 1, incl: node.incl | bit(v), excl: node.excl | forced }, target, c, nodes)?;
            if hit.is_some() {
                return Ok(hit);
            }
        }
        self.dfs(Node { at: v + 1, incl: node.incl, excl: node.excl | bit(v) }, target, c, nodes)
    }
}

fn low_mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        bit(n) - 1
    }
}

// ------------------------------------------------------------- pipeline

/// How each block of the pipeline is capped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "c_p")]
pub enum CapMode {
    /// Exact maximum P-free size of the block grid.
    ExactSearch,
    /// `min(block size, c_P * m^(d-1))` with `m` the longest block side.
    PatternCap(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapMethod {
    ExactSearch,
    PatternCap,
}

/// One product of factor chains `C_{1,j_1} x ... x C_{d,j_d}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCap {
    /// Chain index `j_i` in each factor partition.
    pub chains: Vec<usize>,
    /// Chain sizes `l_i`.
    pub sides: Vec<usize>,
    pub size: u64,
    /// `m = max l_i`.
    pub max_side: usize,
    pub cap: u64,
    pub method: CapMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorPartition {
    pub sides: Vec<usize>,
    pub low: usize,
    pub high: usize,
    pub chains: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub sides: Vec<usize>,
    pub poset: PosetFile,
    pub dimension: usize,
    pub cap_mode: CapMode,
    pub factors: Vec<FactorPartition>,
    pub blocks: Vec<BlockCap>,
    pub total: u64,
}

/// Upper bound on the largest P-free subset of `[k]^n`, built by splitting
/// the grid into `d = dim P` factors, partitioning each factor into
/// balanced chains and capping every product of chains separately.
pub fn pipeline_bound(shape: &GridShape, p: &Poset, mode: CapMode) -> Result<BoundCertificate> {
    pipeline_bound_with(shape, p, mode, DEFAULT_FREE_BUDGET, Exec::default())
}

pub fn pipeline_bound_with(
    shape: &GridShape,
    p: &Poset,
    mode: CapMode,
    budget: usize,
    exec: Exec,
) -> Result<BoundCertificate> {
    let (k, n) = shape
        .as_uniform()
        .ok_or_else(|| Error::Domain("the pipeline needs a uniform grid [k]^n".into()))?;
    let (d, _) = dimension(p)?;
    if n < d {
        return Err(Error::Domain(format!("n = {n} is below dim P = {d}")));
    }
    let fz = factor(shape, d)?;
    let mut factors = Vec::with_capacity(d);
    for f in &fz.factors {
        let (low, high) = balanced_window(f)?;
        let part = if k == 1 {
            ChainPartition { shape: f.clone(), chains: vec![Chain::new(vec![0])] }
        } else {
            balanced_partition_with(f, exec)?
        };
        factors.push(FactorPartition {
            sides: f.sides().to_vec(),
            low,
            high,
            chains: part.chains.into_iter().map(|c| c.points).collect(),
        });
    }

    let counts: Vec<usize> = factors.iter().map(|f| f.chains.len()).collect();
    let mut tuples = Vec::new();
    let mut j = vec![0usize; d];
    'outer: loop {
        tuples.push(j.clone());
        for axis in (0..d).rev() {
            j[axis] += 1;
            if j[axis] < counts[axis] {
                continue 'outer;
            }
            j[axis] = 0;
        }
        break;
    }
    let sides_of = |j: &[usize]| -> Vec<usize> { j.iter().zip(&factors).map(|(&c, f)| f.chains[c].len()).collect() };

    let mut caps: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    if mode == CapMode::ExactSearch {
        let mut keys: Vec<Vec<usize>> = tuples.iter().map(|j| sorted(sides_of(j))).collect();
        keys.sort();
        keys.dedup();
        let values = exec.try_map(&keys, |key| {
            let block = GridShape::new(key.clone())?;
            max_p_free_with(&block, p, budget, Exec::Sequential).map(|(c, _)| c as u64)
        })?;
        caps.extend(keys.into_iter().zip(values));
    }

    let mut blocks = Vec::with_capacity(tuples.len());
    for j in tuples {
        let sides = sides_of(&j);
        let size = sides.iter().map(|&s| s as u64).product::<u64>();
        let max_side = *sides.iter().max().expect("d >= 1");
        let (cap, method) = match mode {
            CapMode::ExactSearch => (caps[&sorted(sides.clone())], CapMethod::ExactSearch),
            CapMode::PatternCap(c) => (pattern_cap(c, max_side, d, size), CapMethod::PatternCap),
        };
        blocks.push(BlockCap { chains: j, sides, size, max_side, cap, method });
    }
    let total = blocks.iter().map(|b| b.cap).sum();
    Ok(BoundCertificate {
        sides: shape.sides().to_vec(),
        poset: p.to_file(),
        dimension: d,
        cap_mode: mode,
        factors,
        blocks,
        total,
    })
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn pattern_cap(c: u64, m: usize, d: usize, size: u64) -> u64 {
    let bound = (m as u128).checked_pow(d as u32 - 1).and_then(|x| x.checked_mul(c as u128));
    bound.map_or(size, |b| b.min(size as u128) as u64)
}

/// Outcome of re-checking a stored certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub ok: bool,
    pub problems: Vec<String>,
}

impl BoundCertificate {
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<BoundCertificate> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Structural re-check: factors, chain partitions, the block bijection
    /// and the cap arithmetic. Exact caps are trusted, not recomputed.
    pub fn verify(&self) -> CertificateReport {
        let mut problems = Vec::new();
        if let Err(e) = self.check(&mut problems) {
            problems.push(e.to_string());
        }
        CertificateReport { ok: problems.is_empty(), problems }
    }

    fn check(&self, problems: &mut Vec<String>) -> Result<()> {
        let shape = GridShape::new(self.sides.clone())?;
        self.poset.to_poset()?;
        let d = self.dimension;
        let fz = factor(&shape, d)?;
        if self.factors.len() != d {
            problems.push(format!("expected {d} factors, found {}", self.factors.len()));
            return Ok(());
        }
        for (i, (f, want)) in self.factors.iter().zip(&fz.factors).enumerate() {
            if f.sides != want.sides() {
                problems.push(format!("factor {i} has sides {:?}, expected {:?}", f.sides, want.sides()));
                return Ok(());
            }
            let part = ChainPartition {
                shape: want.clone(),
                chains: f.chains.iter().cloned().map(Chain::new).collect(),
            };
            let report = verify_partition(want, &part, f.low, f.high);
            if !report.ok() {
                problems.push(format!("factor {i} chain partition fails verification"));
            }
            if balanced_window(want)? != (f.low, f.high) && shape.as_uniform().is_some_and(|(k, _)| k > 1) {
                problems.push(format!("factor {i} window differs from the balanced window"));
            }
        }
        if !problems.is_empty() {
            return Ok(());
        }

        let total_points = shape.len()?;
        let mut seen = FixedBitSet::with_capacity(total_points);
        let mut tuples = HashSet::new();
        let mut sum = 0u64;
        let mut sizes = 0u64;
        for (b, block) in self.blocks.iter().enumerate() {
            if block.chains.len() != d || !tuples.insert(block.chains.clone()) {
                problems.push(format!("block {b} has a bad or repeated chain tuple"));
                continue;
            }
            let Some(chains) = block
                .chains
                .iter()
                .zip(&self.factors)
                .map(|(&j, f)| f.chains.get(j))
                .collect::<Option<Vec<_>>>()
            else {
                problems.push(format!("block {b} names a missing chain"));
                continue;
            };
            let sides: Vec<usize> = chains.iter().map(|c| c.len()).collect();
            let size = sides.iter().map(|&s| s as u64).product::<u64>();
            if sides != block.sides || size != block.size || sides.iter().max() != Some(&block.max_side) {
                problems.push(format!("block {b} records wrong sides"));
            }
            if block.cap > size {
                problems.push(format!("block {b} cap {} exceeds its size {size}", block.cap));
            }
            match (self.cap_mode, block.method) {
                (CapMode::PatternCap(c), CapMethod::PatternCap) => {
                    if block.cap != pattern_cap(c, block.max_side, d, size) {
                        problems.push(format!("block {b} pattern cap is miscomputed"));
                    }
                }
                (CapMode::ExactSearch, CapMethod::ExactSearch) => {}
                _ => problems.push(format!("block {b} method does not match the cap mode")),
            }
            // every point of the block lands on a fresh grid point
            let mut pos = vec![0usize; d];
            'points: loop {
                let parts: Vec<usize> = (0..d).map(|i| chains[i][pos[i]]).collect();
                let g = fz.join(&parts);
                if g >= total_points || seen.put(g) {
                    problems.push(format!("block {b} overlaps another block"));
                    break;
                }
                for i in (0..d).rev() {
                    pos[i] += 1;
                    if pos[i] < sides[i] {
                        continue 'points;
                    }
                    pos[i] = 0;
                }
                break;
            }
            sum += block.cap;
            sizes += size;
        }
        if sizes != total_points as u64 || seen.count_ones(..) != total_points {
            problems.push("blocks do not cover the grid".into());
        }
        if sum != self.total {
            problems.push(format!("total {} differs from the sum of caps {sum}", self.total));
        }
        Ok(())
    }
}

// -------------------------------------------------------- l-chain-free

/// Largest subset with no chain of size `l` (sum of the `l-1` largest
/// levels) next to the weaker `(l-1) w` bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainFreeBound {
    pub exact: BigUint,
    pub width_bound: BigUint,
}

pub fn max_l_chain_free(shape: &GridShape, l: usize) -> Result<ChainFreeBound> {
    if l < 2 {
        return Err(Error::Domain("chain length l must be at least 2".into()));
    }
    let profile = level_profile(shape);
    let mut sizes = profile.sizes.clone();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let exact = sizes.iter().take(l - 1).sum();
    Ok(ChainFreeBound { exact, width_bound: profile.width * BigUint::from(l - 1) })
}

/// Convenience for small grids: the exact value as a machine integer.
pub fn max_l_chain_free_small(shape: &GridShape, l: usize) -> Result<usize> {
    small(&max_l_chain_free(shape, l)?.exact)
}
