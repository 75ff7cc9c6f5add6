//! Finite abstract posets: closure, width, height, order dimension and
//! induced-copy search.

use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{konig_cover, max_matching};
use crate::par::Exec;

/// Anything that can answer strict-order queries over `0..len()`.
pub trait Order {
    fn len(&self) -> usize;
    /// `i < j` in the order.
    fn less(&self, i: usize, j: usize) -> bool;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn comparable(&self, i: usize, j: usize) -> bool {
        i == j || self.less(i, j) || self.less(j, i)
    }
}

/// A finite poset on elements `0..size`, stored as its closed strict order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    /// `above[i]` holds every `j` with `i < j`.
    above: Vec<FixedBitSet>,
    /// `below[j]` holds every `i` with `i < j`.
    below: Vec<FixedBitSet>,
}

impl Order for Poset {
    fn len(&self) -> usize {
        self.above.len()
    }

    #[inline]
    fn less(&self, i: usize, j: usize) -> bool {
        self.above[i].contains(j)
    }
}

/// Builds a poset from `p < q` pairs, taking the transitive closure.
pub fn make_poset(size: usize, covers: &[(usize, usize)]) -> Result<Poset> {
    if size == 0 {
        return Err(Error::Domain("poset must have at least one element".into()));
    }
    let mut above = vec![FixedBitSet::with_capacity(size); size];
    for &(p, q) in covers {
        for x in [p, q] {
            if x >= size {
                return Err(Error::Index { index: x, size });
            }
        }
        if p == q {
            return Err(Error::Cycle(format!("{p} < {p}")));
        }
        above[p].insert(q);
    }
    // Warshall over bit rows
    for k in 0..size {
        let row_k = above[k].clone();
        for i in 0..size {
            if above[i].contains(k) {
                above[i].union_with(&row_k);
            }
        }
    }
    if let Some(i) = (0..size).find(|&i| above[i].contains(i)) {
        return Err(Error::Cycle(format!("element {i} lies on a cycle")));
    }
    Ok(Poset::from_above(above))
}

impl Poset {
    fn from_above(above: Vec<FixedBitSet>) -> Self {
        let n = above.len();
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in above.iter().enumerate() {
            for j in row.ones() {
                below[j].insert(i);
            }
        }
        Poset { above, below }
    }

    /// Materializes any strict order. The relation is checked to be
    /// irreflexive and transitive.
    pub fn from_order<O: Order + ?Sized>(order: &O) -> Result<Poset> {
        let n = order.len();
        if n == 0 {
            return Err(Error::Domain("poset must have at least one element".into()));
        }
        let mut above = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in above.iter_mut().enumerate() {
            for j in 0..n {
                if order.less(i, j) {
                    row.insert(j);
                }
            }
        }
        for i in 0..n {
            if above[i].contains(i) {
                return Err(Error::Cycle(format!("{i} < {i}")));
            }
            for j in above[i].ones() {
                if !above[j].is_subset(&above[i]) {
                    return Err(Error::Cycle(format!("relation not transitive at {i} < {j}")));
                }
            }
        }
        Ok(Poset::from_above(above))
    }

    pub fn chain(len: usize) -> Result<Poset> {
        let covers: Vec<_> = (1..len).map(|i| (i - 1, i)).collect();
        make_poset(len, &covers)
    }

    pub fn antichain(len: usize) -> Result<Poset> {
        make_poset(len, &[])
    }

    /// Three elements `a < b` with `c` incomparable to both.
    pub fn k() -> Poset {
        make_poset(3, &[(0, 1)]).expect("valid")
    }

    /// One minimum below two incomparable elements.
    pub fn v() -> Poset {
        make_poset(3, &[(0, 1), (0, 2)]).expect("valid")
    }

    /// The standard example: singletons `0..n` below co-singletons `n..2n`,
    /// with `i < n + j` iff `i != j`.
    pub fn standard(n: usize) -> Result<Poset> {
        if n < 2 {
            return Err(Error::Domain("standard example needs n >= 2".into()));
        }
        let covers: Vec<_> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, n + j)))
            .collect();
        make_poset(2 * n, &covers)
    }

    /// Parses the built-in names `chain<l>`, `antichain<a>`, `K`, `V`,
    /// `standard<n>`.
    pub fn named(name: &str) -> Result<Poset> {
        let num = |prefix: &str| -> Option<Result<usize>> {
            name.strip_prefix(prefix).map(|rest| {
                rest.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad poset name `{name}`")))
            })
        };
        match name {
            "K" => Ok(Poset::k()),
            "V" => Ok(Poset::v()),
            _ => {
                if let Some(n) = num("antichain") {
                    Poset::antichain(n?)
                } else if let Some(n) = num("chain") {
                    Poset::chain(n?)
                } else if let Some(n) = num("standard") {
                    Poset::standard(n?)
                } else {
                    Err(Error::Parse(format!("unknown poset `{name}`")))
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        self.above.len()
    }

    pub fn up_set(&self, i: usize) -> &FixedBitSet {
        &self.above[i]
    }

    pub fn down_set(&self, i: usize) -> &FixedBitSet {
        &self.below[i]
    }

    /// Cover pairs (transitive reduction) in lexicographic order.
    pub fn cover_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.size();
        let mut out = Vec::new();
        for i in 0..n {
            for j in self.above[i].ones() {
                let mut between = self.above[i].clone();
                between.intersect_with(&self.below[j]);
                if between.is_clear() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// All comparable pairs `(i, j)` with `i < j` in the order.
    pub fn relations(&self) -> Vec<(usize, usize)> {
        (0..self.size())
            .flat_map(|i| self.above[i].ones().map(move |j| (i, j)))
            .collect()
    }

    pub fn is_chain(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (i + 1..n).all(|j| self.comparable(i, j)))
    }

    /// Lexicographically smallest linear extension (as an element sequence).
    pub fn first_linear_extension(&self) -> Vec<usize> {
        linear_extension_of(&self.above)
    }

    /// The induced subposet on `elements` (re-indexed in the given order).
    pub fn induced(&self, elements: &[usize]) -> Result<Poset> {
        let view = InducedView { base: self, elements };
        Poset::from_order(&view)
    }

    pub fn to_file(&self) -> PosetFile {
        PosetFile {
            size: self.size(),
            covers: self.cover_pairs().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

struct InducedView<'a, O: Order + ?Sized> {
    base: &'a O,
    elements: &'a [usize],
}

impl<O: Order + ?Sized> Order for InducedView<'_, O> {
    fn len(&self) -> usize {
        self.elements.len()
    }
    fn less(&self, i: usize, j: usize) -> bool {
        self.base.less(self.elements[i], self.elements[j])
    }
}

/// On-disk poset document: `{"size": n, "covers": [[p, q], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetFile {
    pub size: usize,
    pub covers: Vec<[usize; 2]>,
}

impl PosetFile {
    pub fn to_poset(&self) -> Result<Poset> {
        let pairs: Vec<_> = self.covers.iter().map(|&[a, b]| (a, b)).collect();
        make_poset(self.size, &pairs)
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<PosetFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn linear_extension_of(above: &[FixedBitSet]) -> Vec<usize> {
    let n = above.len();
    let mut indeg = vec![0usize; n];
    for row in above {
        for j in row.ones() {
            indeg[j] += 1;
        }
    }
    // smallest available element first
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        out.push(i);
        for j in above[i].ones() {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.insert(j);
            }
        }
    }
    out
}

// ---------------------------------------------------------------- width

/// Maximum antichain together with a minimum chain cover of equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilworthCertificate {
    pub antichain: Vec<usize>,
    pub chains: Vec<Vec<usize>>,
}

/// Dilworth decomposition via maximum matching on the comparability split.
pub fn dilworth<O: Order + ?Sized>(p: &O) -> DilworthCertificate {
    let n = p.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| p.less(i, j)).collect())
        .collect();
    let m = max_matching(&adj, n);
    let (cover_l, cover_r) = konig_cover(&adj, n, &m);
    let antichain: Vec<usize> = (0..n).filter(|&x| !cover_l[x] && !cover_r[x]).collect();

    let mut chains = Vec::new();
    for start in (0..n).filter(|&x| m.right_to_left[x].is_none()) {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(next) = m.left_to_right[cur] {
            chain.push(next);
            cur = next;
        }
        chains.push(chain);
    }
    assert_eq!(antichain.len(), chains.len(), "Dilworth certificate mismatch");
    DilworthCertificate { antichain, chains }
}

/// Size of the largest antichain.
pub fn width_poset<O: Order + ?Sized>(p: &O) -> usize {
    dilworth(p).antichain.len()
}

/// Size of the longest chain.
pub fn height<O: Order + ?Sized>(p: &O) -> usize {
    let n = p.len();
    if n == 0 {
        return 0;
    }
    // elements sorted by down-degree form a linear extension
    let down: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| p.less(i, j)).count()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (down[i], i));
    let mut best = vec![1usize; n];
    for (pos, &j) in order.iter().enumerate() {
        for &i in &order[..pos] {
            if p.less(i, j) {
                best[j] = best[j].max(best[i] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

// ------------------------------------------------------------ dimension

/// `d` linear orders given as positions: `orders[i][p] = L_i(p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realizer {
    pub orders: Vec<Vec<usize>>,
}

impl Realizer {
    /// Builds a realizer from element sequences (first = smallest).
    pub fn from_sequences(seqs: &[Vec<usize>]) -> Realizer {
        let orders = seqs
            .iter()
            .map(|seq| {
                let mut pos = vec![usize::MAX; seq.len()];
                for (k, &e) in seq.iter().enumerate() {
                    if e < pos.len() {
                        pos[e] = k;
                    }
                }
                pos
            })
            .collect();
        Realizer { orders }
    }

    pub fn order_count(&self) -> usize {
        self.orders.len()
    }

    /// Elements of order `i`, smallest first.
    pub fn sequence(&self, i: usize) -> Vec<usize> {
        let mut seq: Vec<usize> = (0..self.orders[i].len()).collect();
        seq.sort_by_key(|&e| self.orders[i][e]);
        seq
    }
}

/// True iff every order is a linear extension and their intersection is
/// exactly the relation of `p`.
pub fn realizer_valid(p: &Poset, r: &Realizer) -> Result<bool> {
    let n = p.size();
    for order in &r.orders {
        if order.len() != n {
            return Err(Error::SizeMismatch { expected: n, found: order.len() });
        }
    }
    if r.orders.is_empty() {
        return Ok(false);
    }
    for order in &r.orders {
        let mut seen = vec![false; n];
        for &pos in order {
            if pos >= n || seen[pos] {
                return Ok(false);
            }
            seen[pos] = true;
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let all_below = r.orders.iter().all(|o| o[a] < o[b]);
            if all_below != p.less(a, b) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Default cap on `|P|` for exact dimension search.
pub const DEFAULT_DIMENSION_BUDGET: usize = 10;
const DIMENSION_NODE_LIMIT: u64 = 50_000_000;

/// Upper bound on `dim P`: `min(floor(|P|/2), w(P))` for `|P| >= 4`,
/// `min(2, w(P))` below that.
pub fn hiraguchi_cap(p: &Poset) -> usize {
    let n = p.size();
    let w = width_poset(p);
    if n <= 3 {
        w.min(2)
    } else {
        w.min(n / 2)
    }
}

/// Pairs `(a, b)` with `a || b`, everything below `a` below `b`, and
/// everything above `b` above `a`. A family of linear extensions realizes the
/// poset iff each such pair has `b` before `a` in some member.
pub fn critical_pairs(p: &Poset) -> Vec<(usize, usize)> {
    let n = p.size();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b
                && !p.comparable(a, b)
                && p.down_set(a).is_subset(p.down_set(b))
                && p.up_set(b).is_subset(p.up_set(a))
            {
                out.push((a, b));
            }
        }
    }
    out
}

/// Order dimension with a witness realizer, using the default budget.
pub fn dimension(p: &Poset) -> Result<(usize, Realizer)> {
    dimension_with_budget(p, DEFAULT_DIMENSION_BUDGET)
}

/// Exact order dimension for posets with at most `max_size` elements.
///
/// Iterates `d = 1, 2, ...` up to the Hiraguchi cap. For each `d` the critical
/// pairs are distributed over `d` partial orders extending `p`, each kept
/// transitively closed; a branch dies as soon as a reversal would close a
/// cycle. Each surviving colour class is then linearized lexicographically.
pub fn dimension_with_budget(p: &Poset, max_size: usize) -> Result<(usize, Realizer)> {
    let n = p.size();
    if n > max_size || n > 64 {
        return Err(Error::BudgetExceeded(format!(
            "dimension search limited to {} elements, poset has {n}",
            max_size.min(64)
        )));
    }
    if p.is_chain() {
        return Ok((1, Realizer::from_sequences(&[p.first_linear_extension()])));
    }
    let base: Vec<u64> = (0..n)
        .map(|i| p.up_set(i).ones().fold(0u64, |acc, j| acc | (1 << j)))
        .collect();
    let pairs = critical_pairs(p);
    let cap = hiraguchi_cap(p);
    let mut nodes = 0u64;
    for d in 2..=cap {
        let mut colours = vec![base.clone(); d];
        match colour_search(&pairs, 0, &mut colours, 1, &mut nodes)? {
            true => {
                let mut seqs: Vec<Vec<usize>> = colours
                    .iter()
                    .map(|rows| {
                        let above: Vec<FixedBitSet> = rows.iter().map(|&r| bits_to_set(r, n)).collect();
                        linear_extension_of(&above)
                    })
                    .collect();
                seqs.sort();
                let realizer = Realizer::from_sequences(&seqs);
                debug_assert!(realizer_valid(p, &realizer).unwrap_or(false));
                return Ok((d, realizer));
            }
            false => continue,
        }
    }
    Err(Error::Domain(format!("no realizer within the Hiraguchi cap {cap}")))
}

fn bits_to_set(bits: u64, n: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for j in 0..n {
        if bits >> j & 1 == 1 {
            s.insert(j);
        }
    }
    s
}

/// Adds `x < y` to a closed relation; `false` if that would create a cycle.
fn add_relation(rows: &mut [u64], x: usize, y: usize) -> bool {
    if x == y || rows[y] >> x & 1 == 1 {
        return false;
    }
    let up_y = rows[y] | (1 << y);
    for u in 0..rows.len() {
        if u == x || rows[u] >> x & 1 == 1 {
            rows[u] |= up_y;
        }
    }
    true
}

fn colour_search(
    pairs: &[(usize, usize)],
    from: usize,
    colours: &mut [Vec<u64>],
    used: usize,
    nodes: &mut u64,
) -> Result<bool> {
    *nodes += 1;
    if *nodes > DIMENSION_NODE_LIMIT {
        return Err(Error::BudgetExceeded("dimension search node limit".into()));
    }
    // next pair not yet reversed by any colour
    let next = (from..pairs.len()).find(|&k| {
        let (a, b) = pairs[k];
        !colours.iter().any(|rows| rows[b] >> a & 1 == 1)
    });
    let Some(k) = next else {
        return Ok(true);
    };
    let (a, b) = pairs[k];
    let limit = (used + 1).min(colours.len());
    for c in 0..limit {
        if colours[c][a] >> b & 1 == 1 {
            continue;
        }
        let saved = colours[c].clone();
        if add_relation(&mut colours[c], b, a) {
            let used_next = used.max(c + 1);
            if colour_search(pairs, k + 1, colours, used_next, nodes)? {
                return Ok(true);
            }
        }
        colours[c] = saved;
    }
    Ok(false)
}

// ---------------------------------------------------------- induced copy

/// Injective map from pattern elements to host elements (`map[p]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    /// Checks the induced-copy condition against both orders.
    pub fn is_valid<H: Order + ?Sized>(&self, host: &H, pattern: &Poset) -> bool {
        let a = pattern.size();
        if self.map.len() != a || self.map.iter().any(|&x| x >= host.len()) {
            return false;
        }
        for p in 0..a {
            for q in 0..a {
                if p == q {
                    continue;
                }
                if self.map[p] == self.map[q] {
                    return false;
                }
                if pattern.less(p, q) != host.less(self.map[p], self.map[q]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Default node limit for induced-copy backtracking.
pub const DEFAULT_COPY_NODE_LIMIT: u64 = 200_000_000;

/// Lexicographically first induced copy of `pattern` in `host`.
pub fn contains_induced_copy<H: Order + Sync + ?Sized>(
    host: &H,
    pattern: &Poset,
) -> Result<Option<Embedding>> {
    find_induced_copy(host, pattern, DEFAULT_COPY_NODE_LIMIT, Exec::default())
}

/// Budgeted induced-copy search. Each branch on the image of element 0 gets
/// its own node budget, so the outcome does not depend on `exec`.
pub fn find_induced_copy<H: Order + Sync + ?Sized>(
    host: &H,
    pattern: &Poset,
    node_limit: u64,
    exec: Exec,
) -> Result<Option<Embedding>> {
    let search = CopySearch::new(host, pattern);
    let roots: Vec<usize> = (0..host.len()).filter(|&h| search.candidate(0, h)).collect();
    let outcome = exec.find_map_first(&roots, |&root| {
        let mut map = vec![root];
        let mut nodes = 0u64;
        let mut found = None;
        let r = search.extend(&mut map, &mut nodes, node_limit, &mut |m| {
            found = Some(m.to_vec());
            ControlFlow::Break(())
        });
        match r {
            Err(e) => Some(Err(e)),
            Ok(()) => found.map(|m| Ok(Embedding { map: m })),
        }
    });
    outcome.transpose()
}

/// Calls `visit` on every induced copy (as an injective map) in
/// lexicographic order until it breaks.
pub fn for_each_induced_copy<H, F>(host: &H, pattern: &Poset, node_limit: u64, mut visit: F) -> Result<()>
where
    H: Order + ?Sized,
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let search = CopySearch::new(host, pattern);
    let mut nodes = 0u64;
    let mut map = Vec::with_capacity(pattern.size());
    for root in 0..host.len() {
        if !search.candidate(0, root) {
            continue;
        }
        map.clear();
        map.push(root);
        let mut stop = false;
        search.extend(&mut map, &mut nodes, node_limit, &mut |m| {
            let flow = visit(m);
            stop = flow.is_break();
            flow
        })?;
        if stop {
            break;
        }
    }
    Ok(())
}

/// Shared state of the induced-copy backtracking.
struct CopySearch<'a, H: Order + ?Sized> {
    host: &'a H,
    pattern: &'a Poset,
    host_down: Vec<usize>,
    host_up: Vec<usize>,
    pat_down: Vec<usize>,
    pat_up: Vec<usize>,
}

impl<'a, H: Order + ?Sized> CopySearch<'a, H> {
    fn new(host: &'a H, pattern: &'a Poset) -> Self {
        let n = host.len();
        let mut host_down = vec![0; n];
        let mut host_up = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                if host.less(i, j) {
                    host_up[i] += 1;
                    host_down[j] += 1;
                }
            }
        }
        let a = pattern.size();
        let pat_down = (0..a).map(|p| pattern.down_set(p).count_ones(..)).collect();
        let pat_up = (0..a).map(|p| pattern.up_set(p).count_ones(..)).collect();
        CopySearch { host, pattern, host_down, host_up, pat_down, pat_up }
    }

    /// Degree pruning: an image needs at least as many elements below and
    /// above it as its preimage.
    #[inline]
    fn candidate(&self, p: usize, h: usize) -> bool {
        self.host_down[h] >= self.pat_down[p] && self.host_up[h] >= self.pat_up[p]
    }

    fn extend(
        &self,
        map: &mut Vec<usize>,
        nodes: &mut u64,
        limit: u64,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> Result<()> {
        self.extend_inner(map, nodes, limit, visit).map(|_| ())
    }

    fn extend_inner(
        &self,
        map: &mut Vec<usize>,
        nodes: &mut u64,
        limit: u64,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>> {
        *nodes += 1;
        if *nodes > limit {
            return Err(Error::BudgetExceeded("induced-copy search node limit".into()));
        }
        let p = map.len();
        if p == self.pattern.size() {
            return Ok(visit(map));
        }
        'cand: for h in 0..self.host.len() {
            if !self.candidate(p, h) {
                continue;
            }
            for (q, &hq) in map.iter().enumerate() {
                if hq == h
                    || self.pattern.less(q, p) != self.host.less(hq, h)
                    || self.pattern.less(p, q) != self.host.less(h, hq)
                {
                    continue 'cand;
                }
            }
            map.push(h);
            let flow = self.extend_inner(map, nodes, limit, visit)?;
            map.pop();
            if flow.is_break() {
                return Ok(flow);
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_width(p: &Poset) -> usize {
        let n = p.size();
        (0u32..1 << n)
            .filter(|&mask| {
                (0..n).all(|i| {
                    (0..n).all(|j| {
                        i == j || mask >> i & 1 == 0 || mask >> j & 1 == 0 || !p.comparable(i, j)
                    })
                })
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn make_poset_examples() {
        let k = make_poset(3, &[(0, 1)]).unwrap();
        assert!(k.less(0, 1));
        assert!(!k.comparable(0, 2) && !k.comparable(1, 2));
        let c = make_poset(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(c.less(0, 2));
        assert!(matches!(make_poset(2, &[(0, 1), (1, 0)]), Err(Error::Cycle(_))));
        assert!(matches!(make_poset(2, &[(0, 2)]), Err(Error::Index { index: 2, size: 2 })));
        assert!(make_poset(0, &[]).is_err());
    }

    #[test]
    fn width_and_height_examples() {
        let chain5 = Poset::chain(5).unwrap();
        let anti4 = Poset::antichain(4).unwrap();
        let k = Poset::k();
        assert_eq!(width_poset(&chain5), 1);
        assert_eq!(width_poset(&anti4), 4);
        assert_eq!(width_poset(&k), brute_width(&k));
        assert_eq!(width_poset(&k), 2);
        assert_eq!(height(&chain5), 5);
        assert_eq!(height(&anti4), 1);
        assert_eq!(height(&k), 2);
    }

    #[test]
    fn dilworth_certificate_is_consistent() {
        let s3 = Poset::standard(3).unwrap();
        let cert = dilworth(&s3);
        assert_eq!(cert.antichain.len(), 3);
        for &a in &cert.antichain {
            for &b in &cert.antichain {
                assert!(a == b || !s3.comparable(a, b));
            }
        }
        let covered: usize = cert.chains.iter().map(Vec::len).sum();
        assert_eq!(covered, 6);
    }

    #[test]
    fn dimension_examples() {
        let (d, r) = dimension(&Poset::chain(5).unwrap()).unwrap();
        assert_eq!(d, 1);
        assert_eq!(r.sequence(0), vec![0, 1, 2, 3, 4]);

        let k = Poset::k();
        let (d, r) = dimension(&k).unwrap();
        assert_eq!(d, 2);
        assert!(realizer_valid(&k, &r).unwrap());
        assert_eq!(r.sequence(0), vec![0, 1, 2]);
        assert_eq!(r.sequence(1), vec![2, 0, 1]);

        let s3 = Poset::standard(3).unwrap();
        let (d, r) = dimension(&s3).unwrap();
        assert_eq!(d, 3);
        assert!(realizer_valid(&s3, &r).unwrap());
    }

    #[test]
    fn standard_example_needs_more_than_two_orders() {
        // every pair of linear extensions of S_3 fails to realize it
        let s3 = Poset::standard(3).unwrap();
        let exts = all_linear_extensions(&s3);
        for a in &exts {
            for b in &exts {
                let r = Realizer::from_sequences(&[a.clone(), b.clone()]);
                assert!(!realizer_valid(&s3, &r).unwrap());
            }
        }
    }

    fn all_linear_extensions(p: &Poset) -> Vec<Vec<usize>> {
        fn go(p: &Poset, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            let n = p.size();
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            for e in 0..n {
                if !used[e] && p.down_set(e).ones().all(|d| used[d]) {
                    used[e] = true;
                    cur.push(e);
                    go(p, cur, used, out);
                    cur.pop();
                    used[e] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(p, &mut Vec::new(), &mut vec![false; p.size()], &mut out);
        out
    }

    #[test]
    fn realizer_valid_examples() {
        let k = Poset::k();
        let r = Realizer::from_sequences(&[vec![0, 1, 2], vec![2, 0, 1]]);
        assert!(realizer_valid(&k, &r).unwrap());
        let anti = Poset::antichain(2).unwrap();
        let same = Realizer::from_sequences(&[vec![0, 1], vec![0, 1]]);
        assert!(!realizer_valid(&anti, &same).unwrap());
        let c3 = Poset::chain(3).unwrap();
        assert!(realizer_valid(&c3, &Realizer::from_sequences(&[vec![0, 1, 2]])).unwrap());
        let short = Realizer::from_sequences(&[vec![0, 1]]);
        assert!(matches!(realizer_valid(&c3, &short), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn induced_copy_of_self_is_identity() {
        for p in [Poset::k(), Poset::v(), Poset::standard(3).unwrap(), Poset::chain(4).unwrap()] {
            let e = contains_induced_copy(&p, &p).unwrap().unwrap();
            assert_eq!(e.map, (0..p.size()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn single_element_pattern_maps_to_first_element() {
        let host = Poset::standard(3).unwrap();
        let one = Poset::chain(1).unwrap();
        assert_eq!(contains_induced_copy(&host, &one).unwrap().unwrap().map, vec![0]);
    }

    #[test]
    fn budget_is_reported() {
        let host = Poset::antichain(12).unwrap();
        let pat = Poset::antichain(3).unwrap();
        let r = find_induced_copy(&host, &pat, 2, Exec::Sequential);
        assert!(matches!(r, Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn named_posets() {
        assert_eq!(Poset::named("K").unwrap(), Poset::k());
        assert_eq!(Poset::named("chain3").unwrap().size(), 3);
        assert_eq!(Poset::named("antichain2").unwrap().size(), 2);
        assert_eq!(Poset::named("standard4").unwrap().size(), 8);
        assert!(Poset::named("blob").is_err());
    }

    #[test]
    fn poset_file_round_trip() {
        let p = Poset::standard(3).unwrap();
        let text = p.to_file().to_text();
        let back = PosetFile::from_text(&text).unwrap().to_poset().unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_file().to_text(), text);
    }
}
