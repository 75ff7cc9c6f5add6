//! Maximum bipartite matching (Hopcroft–Karp) with deterministic output.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// Result of a maximum matching between `left` and `right` vertex sets.
#[derive(Debug, Clone)]
pub struct Matching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left_to_right.iter().filter(|m| m.is_some()).count()
    }
}

/// Maximum matching of the bipartite graph given by adjacency lists of the
/// left side. Adjacency order is respected, so equal inputs give equal
/// matchings.
pub fn max_matching(adj: &[Vec<usize>], right: usize) -> Matching {
    let left = adj.len();
    let mut pair_l = vec![NIL; left];
    let mut pair_r = vec![NIL; right];
    let mut dist = vec![0usize; left];

    loop {
        // layered BFS from free left vertices
        let mut queue = VecDeque::new();
        let mut found = false;
        for u in 0..left {
            if pair_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = NIL;
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = pair_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == NIL {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut augmented = false;
        for u in 0..left {
            if pair_l[u] == NIL && augment(u, adj, &mut pair_l, &mut pair_r, &mut dist) {
                augmented = true;
            }
        }
        if !augmented {
            break;
        }
    }

    Matching {
        left_to_right: pair_l.iter().map(|&v| (v != NIL).then_some(v)).collect(),
        right_to_left: pair_r.iter().map(|&u| (u != NIL).then_some(u)).collect(),
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    pair_l: &mut [usize],
    pair_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &v in &adj[u] {
        let w = pair_r[v];
        if w == NIL || (dist[w] == dist[u] + 1 && augment(w, adj, pair_l, pair_r, dist)) {
            pair_l[u] = v;
            pair_r[v] = u;
            return true;
        }
    }
    dist[u] = NIL;
    false
}

/// Minimum vertex cover from a maximum matching (König's construction).
/// Returns `(left_in_cover, right_in_cover)`.
pub fn konig_cover(adj: &[Vec<usize>], right: usize, m: &Matching) -> (Vec<bool>, Vec<bool>) {
    let left = adj.len();
    let mut vis_l = vec![false; left];
    let mut vis_r = vec![false; right];
    let mut stack: Vec<usize> = (0..left).filter(|&u| m.left_to_right[u].is_none()).collect();
    for &u in &stack {
        vis_l[u] = true;
    }
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if vis_r[v] {
                continue;
            }
            vis_r[v] = true;
            if let Some(w) = m.right_to_left[v] {
                if !vis_l[w] {
                    vis_l[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    let cover_l = vis_l.iter().map(|&x| !x).collect();
    (cover_l, vis_r)
}
