//! Bipartite maximum matching: Hopcroft-Karp as the primary matcher, Kuhn's
//! augmenting-path search as an independent cross-check, and a Hall
//! deficiency witness for failed perfect matchings.

use std::collections::VecDeque;

/// A bipartite graph with `left` and `right` vertex counts and adjacency
/// from left vertices to right vertices.
#[derive(Clone, Debug)]
pub struct Bipartite {
    pub left: usize,
    pub right: usize,
    pub adj: Vec<Vec<usize>>,
}

impl Bipartite {
    pub fn new(left: usize, right: usize) -> Bipartite {
        Bipartite {
            left,
            right,
            adj: vec![Vec::new(); left],
        }
    }

    pub fn add_edge(&mut self, l: usize, r: usize) {
        self.adj[l].push(r);
    }
}

/// Hopcroft-Karp; returns the right-partner of each left vertex.
pub fn hopcroft_karp(g: &Bipartite) -> Vec<Option<usize>> {
    const INF: u32 = u32::MAX;
    let mut match_l: Vec<Option<usize>> = vec![None; g.left];
    let mut match_r: Vec<Option<usize>> = vec![None; g.right];
    let mut dist = vec![INF; g.left];

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..g.left {
            if match_l[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = INF;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &g.adj[l] {
                match match_r[r] {
                    None => found = true,
                    Some(l2) => {
                        if dist[l2] == INF {
                            dist[l2] = dist[l] + 1;
                            queue.push_back(l2);
                        }
                    }
                }
            }
        }
        if !found {
            break;
        }
        fn dfs(
            l: usize,
            g: &Bipartite,
            dist: &mut [u32],
            match_l: &mut [Option<usize>],
            match_r: &mut [Option<usize>],
        ) -> bool {
            let d = dist[l];
            dist[l] = u32::MAX;
            for &r in &g.adj[l] {
                let ok = match match_r[r] {
                    None => true,
                    Some(l2) => dist[l2] == d + 1 && dfs(l2, g, dist, match_l, match_r),
                };
                if ok {
                    match_l[l] = Some(r);
                    match_r[r] = Some(l);
                    return true;
                }
            }
            false
        }
        for l in 0..g.left {
            if match_l[l].is_none() && dist[l] == 0 {
                dfs(l, g, &mut dist, &mut match_l, &mut match_r);
            }
        }
    }
    match_l
}

/// Kuhn's algorithm: an independent maximum-matching implementation.
pub fn kuhn(g: &Bipartite) -> Vec<Option<usize>> {
    let mut match_r: Vec<Option<usize>> = vec![None; g.right];
    fn try_augment(
        l: usize,
        g: &Bipartite,
        seen: &mut [bool],
        match_r: &mut [Option<usize>],
    ) -> bool {
        for &r in &g.adj[l] {
            if !seen[r] {
                seen[r] = true;
                if match_r[r].is_none()
                    || try_augment(match_r[r].unwrap(), g, seen, match_r)
                {
                    match_r[r] = Some(l);
                    return true;
                }
            }
        }
        false
    }
    for l in 0..g.left {
        let mut seen = vec![false; g.right];
        try_augment(l, g, &mut seen, &mut match_r);
    }
    let mut match_l = vec![None; g.left];
    for (r, l) in match_r.iter().enumerate() {
        if let Some(l) = l {
            match_l[*l] = Some(r);
        }
    }
    match_l
}

pub fn matching_size(match_l: &[Option<usize>]) -> usize {
    match_l.iter().filter(|m| m.is_some()).count()
}

/// When the matching misses some left vertex, returns a Hall-deficient set:
/// left vertices S with |N(S)| < |S| (the alternating-tree reachable set
/// from an unmatched left vertex).
pub fn hall_witness(g: &Bipartite, match_l: &[Option<usize>]) -> Option<Vec<usize>> {
    let free = (0..g.left).find(|&l| match_l[l].is_none())?;
    let mut match_r = vec![None; g.right];
    for (l, r) in match_l.iter().enumerate() {
        if let Some(r) = r {
            match_r[*r] = Some(l);
        }
    }
    let mut in_s = vec![false; g.left];
    let mut seen_r = vec![false; g.right];
    in_s[free] = true;
    let mut queue = VecDeque::from([free]);
    while let Some(l) = queue.pop_front() {
        for &r in &g.adj[l] {
            if !seen_r[r] {
                seen_r[r] = true;
                if let Some(l2) = match_r[r] {
                    if !in_s[l2] {
                        in_s[l2] = true;
                        queue.push_back(l2);
                    }
                }
            }
        }
    }
    Some((0..g.left).filter(|&l| in_s[l]).collect())
}
