//! Chain-counting oracles. A chain is a monotone shortest path between
//! comparable vertices (one level per step, with respect to a root); in the
//! full cube the number of x-y chains is dist(x,y)!. These oracles count
//! chains in arbitrary hosts, chains avoiding another chain family, the
//! per-level intersection formula, and admissible run patterns.

use crate::cube::{binomial, DirSet, Direction, SubgraphOfQn, Vertex};
use crate::{Error, Result};

/// Explicit enumeration is attempted when the count stays below this bound.
pub const EXPLICIT_LIST_CAP: u128 = 200_000;
/// Distance cap for the subset DP (2^dist states).
pub const DP_DIST_CAP: u32 = 20;

#[derive(Clone, Debug)]
pub struct ChainFamily {
    pub count: u128,
    /// Explicit chains when the family is small enough to list.
    pub chains: Option<Vec<Vec<Vertex>>>,
}

fn check_comparable(x: Vertex, y: Vertex, root: Vertex) -> Result<u64> {
    if !x.below(y, root) {
        return Err(Error::Precondition(format!(
            "{x:?} is not below {y:?} with respect to root {root:?}"
        )));
    }
    Ok((x.0 ^ y.0) & !0)
}

/// All monotone shortest x-y paths (with respect to `root`) inside G whose
/// interior vertices avoid `avoid`. Counts are exact; the explicit list is
/// included when small enough.
pub fn enumerate_chains(
    x: Vertex,
    y: Vertex,
    root: Vertex,
    g: &SubgraphOfQn,
    avoid: &[bool],
) -> Result<ChainFamily> {
    check_comparable(x, y, root)?;
    let allowed = |v: Vertex| v == x || v == y || !avoid[v.0 as usize];
    let count = count_chains(x, y, g, &allowed)?;
    let chains = if count > 0 && count <= EXPLICIT_LIST_CAP && x.dist(y) <= 10 {
        Some(list_chains(x, y, g, &allowed))
    } else {
        None
    };
    Ok(ChainFamily { count, chains })
}

/// Subset DP over the differing directions: f[S] counts monotone sequences
/// from x to x + S whose vertices are allowed and whose edges lie in G.
fn count_chains(
    x: Vertex,
    y: Vertex,
    g: &SubgraphOfQn,
    allowed: &dyn Fn(Vertex) -> bool,
) -> Result<u128> {
    let diff = DirSet(x.0 ^ y.0);
    let k = diff.len();
    if k > DP_DIST_CAP {
        return Err(Error::CapExceeded(format!(
            "chain DP supports dist <= {DP_DIST_CAP}, got {k}"
        )));
    }
    if !allowed(x) || !allowed(y) {
        return Ok(0);
    }
    let dirs: Vec<Direction> = diff.iter().collect();
    let mut f = vec![0u128; 1 << k];
    f[0] = 1;
    for s in 1usize..1 << k {
        let v = Vertex(x.0 ^ scatter(s as u64, &dirs));
        if !allowed(v) {
            continue;
        }
        let mut total = 0u128;
        for (j, d) in dirs.iter().enumerate() {
            if s >> j & 1 == 1 {
                let prev = s ^ (1 << j);
                if f[prev] > 0 {
                    let u = Vertex(x.0 ^ scatter(prev as u64, &dirs));
                    if g.has_edge(u, *d) {
                        total += f[prev];
                    }
                }
            }
        }
        f[s] = total;
    }
    Ok(f[(1usize << k) - 1])
}

fn scatter(mask: u64, dirs: &[Direction]) -> u64 {
    let mut out = 0u64;
    for (j, d) in dirs.iter().enumerate() {
        if mask >> j & 1 == 1 {
            out |= d.bit();
        }
    }
    out
}

fn list_chains(
    x: Vertex,
    y: Vertex,
    g: &SubgraphOfQn,
    allowed: &dyn Fn(Vertex) -> bool,
) -> Vec<Vec<Vertex>> {
    let dirs: Vec<Direction> = DirSet(x.0 ^ y.0).iter().collect();
    let mut out = Vec::new();
    let mut path = vec![x];
    let mut used = vec![false; dirs.len()];
    fn rec(
        g: &SubgraphOfQn,
        dirs: &[Direction],
        used: &mut [bool],
        path: &mut Vec<Vertex>,
        allowed: &dyn Fn(Vertex) -> bool,
        out: &mut Vec<Vec<Vertex>>,
    ) {
        if used.iter().all(|&u| u) {
            out.push(path.clone());
            return;
        }
        let cur = *path.last().unwrap();
        for j in 0..dirs.len() {
            if used[j] || !g.has_edge(cur, dirs[j]) {
                continue;
            }
            let next = cur.flip(dirs[j]);
            if !allowed(next) {
                continue;
            }
            used[j] = true;
            path.push(next);
            rec(g, dirs, used, path, allowed, out);
            path.pop();
            used[j] = false;
        }
    }
    rec(g, &dirs, &mut used, &mut path, allowed, &mut out);
    out
}

/// Vertices lying on at least one monotone x-y chain of G (computed by
/// forward and backward reachability over the comparability interval).
pub fn chain_support(x: Vertex, y: Vertex, g: &SubgraphOfQn) -> Vec<Vertex> {
    let diff: Vec<Direction> = DirSet(x.0 ^ y.0).iter().collect();
    let k = diff.len();
    let mut up = vec![false; 1 << k];
    let mut down = vec![false; 1 << k];
    up[0] = true;
    for s in 1usize..1 << k {
        for (j, d) in diff.iter().enumerate() {
            if s >> j & 1 == 1 {
                let prev = s ^ (1 << j);
                if up[prev] && g.has_edge(Vertex(x.0 ^ scatter(prev as u64, &diff)), *d) {
                    up[s] = true;
                    break;
                }
            }
        }
    }
    down[(1 << k) - 1] = true;
    for s in (0..(1usize << k) - 1).rev() {
        for (j, d) in diff.iter().enumerate() {
            if s >> j & 1 == 0 {
                let next = s | (1 << j);
                if down[next] && g.has_edge(Vertex(x.0 ^ scatter(s as u64, &diff)), *d) {
                    down[s] = true;
                    break;
                }
            }
        }
    }
    (0..1usize << k)
        .filter(|&s| up[s] && down[s])
        .map(|s| Vertex(x.0 ^ scatter(s as u64, &diff)))
        .collect()
}

/// |X_{x,y}^{not x',y'}|: the number of x-y chains that meet no x'-y' chain.
pub fn chains_disjoint_from(
    x: Vertex,
    y: Vertex,
    x2: Vertex,
    y2: Vertex,
    root: Vertex,
    g: &SubgraphOfQn,
) -> Result<u128> {
    check_comparable(x, y, root)?;
    check_comparable(x2, y2, root)?;
    let mut blocked = vec![false; g.num_vertices()];
    for v in chain_support(x2, y2, g) {
        blocked[v.0 as usize] = true;
    }
    if blocked[x.0 as usize] || blocked[y.0 as usize] {
        return Ok(0);
    }
    count_chains(x, y, g, &|v: Vertex| !blocked[v.0 as usize])
}

/// |X^i_{x,y}| = C(b-m-1, i-m-1) (m'-i)! (i-m)!: the number of x-y chains
/// meeting level i of the auxiliary cube H spanning the chain overlap
/// region, where x sits at level m, y at level m', and H's top at level b.
/// Zero outside m < i <= b.
pub fn level_intersection_count(m: usize, m_prime: usize, b: usize, i: usize) -> u128 {
    if i <= m || i > b || m_prime < i {
        return 0;
    }
    binomial((b - m - 1) as u64, (i - m - 1) as u64)
        * factorial((m_prime - i) as u64)
        * factorial((i - m) as u64)
}

pub fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

/// C_{i,l,s}: the number of sets A of i agreement indices inside [k-2] whose
/// complement has exactly s maximal runs of consecutive elements, the
/// longest of which has exactly l elements. The empty complement (i = k-2)
/// is counted once, under (l,s) = (0,0).
pub fn admissible_pattern_count(k: usize, i: usize, l: usize, s: usize) -> Result<u128> {
    if k < 3 {
        return Err(Error::Precondition(format!("need k >= 3, got {k}")));
    }
    let m = k - 2;
    if i > m {
        return Ok(0);
    }
    let c = m - i;
    if c == 0 {
        return Ok(if l == 0 && s == 0 { 1 } else { 0 });
    }
    if l == 0 || s == 0 {
        return Ok(0);
    }
    // s runs of total size c, each part in [1, l] with at least one part = l,
    // interleaved among the i chosen elements: C(i+1, s) placements.
    let with_cap = |cap: usize| -> u128 { compositions_bounded(c, s, cap) };
    let exact = with_cap(l) - with_cap(l.saturating_sub(1));
    Ok(binomial((i + 1) as u64, s as u64) * exact)
}

/// Number of compositions of c into exactly s parts, each in [1, cap].
fn compositions_bounded(c: usize, s: usize, cap: usize) -> u128 {
    if cap == 0 {
        return if c == 0 && s == 0 { 1 } else { 0 };
    }
    let mut f = vec![0u128; c + 1];
    f[0] = 1;
    for _ in 0..s {
        let mut g = vec![0u128; c + 1];
        for total in 1..=c {
            let lo = total.saturating_sub(cap);
            for prev in lo..total {
                g[total] += f[prev];
            }
        }
        f = g;
    }
    f[c]
}

/// Brute-force admissible pattern count for cross-checking (k <= 22).
pub fn admissible_pattern_count_bruteforce(k: usize, i: usize, l: usize, s: usize) -> u128 {
    let m = k - 2;
    let mut count = 0u128;
    for mask in 0u64..1 << m {
        if mask.count_ones() as usize != i {
            continue;
        }
        let comp = !mask & ((1 << m) - 1);
        let (mut runs, mut longest) = (0usize, 0usize);
        let mut run = 0usize;
        for j in 0..=m {
            if j < m && comp >> j & 1 == 1 {
                run += 1;
            } else {
                if run > 0 {
                    runs += 1;
                    longest = longest.max(run);
                }
                run = 0;
            }
        }
        if runs == s && longest == l {
            count += 1;
        }
    }
    count
}
