//! Exact decision oracles: Hamilton cycles in small graphs by backtracking
//! with forcing and connectivity pruning, an exhaustive DP cross-check, a
//! spanning-cycle validator for hypercube subgraphs of any supported size,
//! and perfect matchings via the hypercube bipartition.

use crate::cube::{SubgraphOfQn, Vertex};
use crate::matching::{self, Bipartite};
use crate::{Error, Result};

/// Maximum vertex count of the backtracking solver (two 64-bit words).
pub const SOLVER_CAP: usize = 128;

/// A small undirected graph over at most `SOLVER_CAP` vertices.
#[derive(Clone, Debug)]
pub struct SmallGraph {
    pub n: usize,
    adj: Vec<u128>,
}

impl SmallGraph {
    pub fn new(n: usize) -> Result<SmallGraph> {
        if n > SOLVER_CAP {
            return Err(Error::CapExceeded(format!(
                "small-graph solver supports up to {SOLVER_CAP} vertices, got {n}"
            )));
        }
        Ok(SmallGraph {
            n,
            adj: vec![0; n],
        })
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b);
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    pub fn from_qn(g: &SubgraphOfQn) -> Result<SmallGraph> {
        let mut out = SmallGraph::new(g.num_vertices())?;
        for v in g.vertices() {
            for u in g.neighbors(v) {
                if u.0 > v.0 {
                    out.add_edge(v.0 as usize, u.0 as usize);
                }
            }
        }
        Ok(out)
    }

    fn full_mask(&self) -> u128 {
        if self.n == 128 {
            !0
        } else {
            (1u128 << self.n) - 1
        }
    }

    fn connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen: u128 = 1;
        let mut frontier: u128 = 1;
        while frontier != 0 {
            let mut next = 0u128;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.adj[v] & !seen;
            }
            seen |= next;
            frontier = next;
        }
        seen == self.full_mask()
    }
}

/// Outcome of an exact search: a verified object, a proof of exhaustion, or
/// an exhausted node budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    Unsat,
    Timeout,
}

/// Finds a Hamilton cycle of `g`, or proves there is none, within `budget`
/// search-node expansions (None = unbounded). The returned cycle is a vertex
/// sequence of length n whose consecutive entries (cyclically) are edges.
pub fn exact_hamilton_cycle(g: &SmallGraph, budget: Option<u64>) -> SearchOutcome<Vec<usize>> {
    let n = g.n;
    if n < 3 {
        return SearchOutcome::Unsat;
    }
    if (0..n).any(|v| g.degree(v) < 2) || !g.connected() {
        return SearchOutcome::Unsat;
    }
    let mut path = Vec::with_capacity(n);
    path.push(0usize);
    let mut visited: u128 = 1;
    let mut nodes: u64 = 0;
    let result = dfs_ham(g, &mut path, &mut visited, &mut nodes, budget);
    match result {
        Some(true) => SearchOutcome::Found(path),
        Some(false) => SearchOutcome::Unsat,
        None => SearchOutcome::Timeout,
    }
}

/// Returns Some(true) found, Some(false) exhausted, None budget hit.
fn dfs_ham(
    g: &SmallGraph,
    path: &mut Vec<usize>,
    visited: &mut u128,
    nodes: &mut u64,
    budget: Option<u64>,
) -> Option<bool> {
    *nodes += 1;
    if let Some(b) = budget {
        if *nodes > b {
            return None;
        }
    }
    let cur = *path.last().unwrap();
    if path.len() == g.n {
        return Some(g.has_edge(cur, 0));
    }

    // Prune: every unvisited vertex needs two usable links (to unvisited
    // vertices, the current endpoint, or the anchor 0); the unvisited region
    // must be reachable from the current endpoint.
    let unvisited = g.full_mask() & !*visited;
    {
        let usable = unvisited | (1 << cur) | 1;
        let mut m = unvisited;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            if (g.adj[v] & usable).count_ones() < 2 {
                return Some(false);
            }
        }
        // connectivity of unvisited from cur
        let mut seen = g.adj[cur] & unvisited;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0u128;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= g.adj[v] & unvisited & !seen;
            }
            seen |= next;
            frontier = next;
        }
        if seen != unvisited {
            return Some(false);
        }
    }

    let mut cands = g.adj[cur] & unvisited;
    while cands != 0 {
        let v = cands.trailing_zeros() as usize;
        cands &= cands - 1;
        path.push(v);
        *visited |= 1 << v;
        match dfs_ham(g, path, visited, nodes, budget) {
            Some(true) => return Some(true),
            Some(false) => {}
            None => return None,
        }
        path.pop();
        *visited &= !(1u128 << v);
    }
    Some(false)
}

/// Exhaustive Hamilton-cycle count by subset DP (Held-Karp style); intended
/// as an independent cross-check for graphs of at most ~20 vertices.
pub fn count_hamilton_cycles_dp(g: &SmallGraph) -> Result<u64> {
    let n = g.n;
    if n > 20 {
        return Err(Error::CapExceeded(format!(
            "DP cross-check supports up to 20 vertices, got {n}"
        )));
    }
    if n < 3 {
        return Ok(0);
    }
    // paths start at 0; dp[mask][v] = number of simple paths 0 -> v on mask
    let mut dp = vec![vec![0u64; n]; 1 << n];
    dp[1][0] = 1;
    for mask in 1usize..1 << n {
        if mask & 1 == 0 {
            continue;
        }
        for v in 0..n {
            let paths = dp[mask][v];
            if paths == 0 {
                continue;
            }
            let mut cands = g.adj[v] as u64 & !(mask as u64) & ((1u64 << n) - 1);
            while cands != 0 {
                let u = cands.trailing_zeros() as usize;
                cands &= cands - 1;
                dp[mask | 1 << u][u] += paths;
            }
        }
    }
    let full = (1usize << n) - 1;
    let mut cycles = 0u64;
    for v in 1..n {
        if g.has_edge(v, 0) {
            cycles += dp[full][v];
        }
    }
    Ok(cycles / 2)
}

/// Validates a spanning cycle of a hypercube subgraph: correct length,
/// distinct vertices, consecutive adjacency in G (cyclically).
pub fn validate_cycle_qn(g: &SubgraphOfQn, cycle: &[Vertex]) -> Result<()> {
    if cycle.len() != g.num_vertices() {
        return Err(Error::Failed(format!(
            "cycle covers {} of {} vertices",
            cycle.len(),
            g.num_vertices()
        )));
    }
    let mut seen = vec![false; g.num_vertices()];
    for &v in cycle {
        if seen[v.0 as usize] {
            return Err(Error::Failed(format!("vertex {v:?} repeated")));
        }
        seen[v.0 as usize] = true;
    }
    for i in 0..cycle.len() {
        let a = cycle[i];
        let b = cycle[(i + 1) % cycle.len()];
        if a.dist(b) != 1 {
            return Err(Error::Failed(format!("{a:?} and {b:?} are not adjacent")));
        }
        let d = crate::cube::differing_directions(a, b).iter().next().unwrap();
        if !g.has_edge(a, d) {
            return Err(Error::Failed(format!("edge {a:?}-{b:?} missing from host")));
        }
    }
    Ok(())
}

/// Maximum matching across the parity bipartition; perfect iff it covers
/// all 2^(n-1) even vertices.
pub fn exact_perfect_matching(g: &SubgraphOfQn) -> Option<Vec<(Vertex, Vertex)>> {
    let (bg, evens, odd_idx) = parity_bipartite(g);
    let m = matching::hopcroft_karp(&bg);
    if matching::matching_size(&m) != evens.len() {
        return None;
    }
    Some(
        m.iter()
            .enumerate()
            .map(|(l, r)| (evens[l], odd_idx[r.unwrap()]))
            .collect(),
    )
}

/// Maximum-matching size by the independent Kuhn implementation.
pub fn matching_size_independent(g: &SubgraphOfQn) -> usize {
    let (bg, _, _) = parity_bipartite(g);
    matching::matching_size(&matching::kuhn(&bg))
}

pub fn matching_size_primary(g: &SubgraphOfQn) -> usize {
    let (bg, _, _) = parity_bipartite(g);
    matching::matching_size(&matching::hopcroft_karp(&bg))
}

fn parity_bipartite(g: &SubgraphOfQn) -> (Bipartite, Vec<Vertex>, Vec<Vertex>) {
    let mut evens = Vec::new();
    let mut odds = Vec::new();
    let mut right_index = vec![usize::MAX; g.num_vertices()];
    for v in g.vertices() {
        if v.parity() {
            right_index[v.0 as usize] = odds.len();
            odds.push(v);
        } else {
            evens.push(v);
        }
    }
    let mut bg = Bipartite::new(evens.len(), odds.len());
    for (l, &v) in evens.iter().enumerate() {
        for u in g.neighbors(v) {
            bg.add_edge(l, right_index[u.0 as usize]);
        }
    }
    (bg, evens, odds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Direction;

    #[test]
    fn q2_has_the_four_cycle() {
        let g = SmallGraph::from_qn(&SubgraphOfQn::full(2).unwrap()).unwrap();
        match exact_hamilton_cycle(&g, None) {
            SearchOutcome::Found(c) => assert_eq!(c.len(), 4),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn full_cubes_are_hamiltonian() {
        for n in 2..=6 {
            let q = SubgraphOfQn::full(n).unwrap();
            let g = SmallGraph::from_qn(&q).unwrap();
            match exact_hamilton_cycle(&g, None) {
                SearchOutcome::Found(c) => {
                    let cycle: Vec<Vertex> = c.iter().map(|&v| Vertex(v as u64)).collect();
                    validate_cycle_qn(&q, &cycle).unwrap();
                }
                other => panic!("Q^{n}: {other:?}"),
            }
        }
    }

    #[test]
    fn degree_one_vertex_is_unsat() {
        // Q^4 minus all but one edge at a vertex
        let mut q = SubgraphOfQn::full(4).unwrap();
        for d in 2..=4 {
            q.remove_edge(Vertex(0), Direction(d));
        }
        let g = SmallGraph::from_qn(&q).unwrap();
        assert_eq!(exact_hamilton_cycle(&g, None), SearchOutcome::Unsat);
    }

    #[test]
    fn solver_agrees_with_dp_on_q3_subgraphs() {
        use rand::Rng;
        let mut r = crate::rng::stream(17, crate::rng::Purpose::Instance, 0);
        for _ in 0..300 {
            let mut q = SubgraphOfQn::empty(3).unwrap();
            for v in 0..8u64 {
                for d in 1..=3u8 {
                    if v & Direction(d).bit() == 0 && r.gen::<f64>() < 0.6 {
                        q.add_edge(Vertex(v), Direction(d));
                    }
                }
            }
            let g = SmallGraph::from_qn(&q).unwrap();
            let dp = count_hamilton_cycles_dp(&g).unwrap();
            match exact_hamilton_cycle(&g, None) {
                SearchOutcome::Found(c) => {
                    assert!(dp > 0);
                    let cycle: Vec<Vertex> = c.iter().map(|&v| Vertex(v as u64)).collect();
                    validate_cycle_qn(&q, &cycle).unwrap();
                }
                SearchOutcome::Unsat => assert_eq!(dp, 0),
                SearchOutcome::Timeout => panic!("unbounded search timed out"),
            }
        }
    }

    #[test]
    fn perfect_matching_on_full_and_broken() {
        let q = SubgraphOfQn::full(5).unwrap();
        let m = exact_perfect_matching(&q).unwrap();
        assert_eq!(m.len(), 16);
        let mut seen = std::collections::HashSet::new();
        for (a, b) in &m {
            assert_eq!(a.dist(*b), 1);
            assert!(seen.insert(*a) && seen.insert(*b));
        }
        // isolated vertex kills it
        let mut q = SubgraphOfQn::full(3).unwrap();
        for d in 1..=3 {
            q.remove_edge(Vertex(0), Direction(d));
        }
        assert!(exact_perfect_matching(&q).is_none());
    }

    #[test]
    fn matching_implementations_agree() {
        use rand::Rng;
        let mut r = crate::rng::stream(23, crate::rng::Purpose::Instance, 0);
        for _ in 0..50 {
            let mut q = SubgraphOfQn::empty(5).unwrap();
            for v in 0..32u64 {
                for d in 1..=5u8 {
                    if v & Direction(d).bit() == 0 && r.gen::<f64>() < 0.5 {
                        q.add_edge(Vertex(v), Direction(d));
                    }
                }
            }
            assert_eq!(matching_size_primary(&q), matching_size_independent(&q));
        }
    }
}
