//! Random generation: binomial subgraphs, vertex reservoirs, level-biased
//! subgraphs and bounded-branching percolation graphs, together with the
//! level probability function f_i and the feasible-tuple solver that pins
//! every level's edge probability to a common target.

use crate::cube::{DirSet, Direction, SubgraphOfQn, Vertex};
use crate::rng::{self, Purpose};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One probability per level gap, p_0..p_{n-1}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbVector(pub Vec<f64>);

impl ProbVector {
    pub fn constant(n: usize, p: f64) -> ProbVector {
        ProbVector(vec![p; n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Invalid("probability outside [0,1]".into()));
        }
        Ok(())
    }

    pub fn max(&self) -> f64 {
        self.0.iter().cloned().fold(0.0, f64::max)
    }
}

/// A solved tuple: every edge in levels <= 9n/10 has probability t/n = m of
/// appearing in the percolation graph before reservoir removal applies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibleTuple {
    pub n: usize,
    #[serde(rename = "M")]
    pub branching: usize,
    pub t: f64,
    pub m: f64,
    pub pvec: Vec<f64>,
}

/// Each of the n 2^(n-1) edges independently with probability p.
pub fn sample_binomial(n: usize, p: f64, seed: u64, trial: u64) -> Result<SubgraphOfQn> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("p = {p} outside [0,1]")));
    }
    let mut g = SubgraphOfQn::empty(n)?;
    let mut r = rng::stream(seed, Purpose::EdgeSample, trial);
    for v in 0..1u64 << n {
        for d in 1..=n {
            let d = Direction(d as u8);
            if v & d.bit() == 0 && r.gen::<f64>() < p {
                g.add_edge(Vertex(v), d);
            }
        }
    }
    Ok(g)
}

/// Independent per-vertex inclusion with probability delta.
pub fn sample_reservoir(n: usize, delta: f64, seed: u64, trial: u64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Invalid(format!("delta = {delta} outside [0,1]")));
    }
    let mut r = rng::stream(seed, Purpose::VertexSample, trial);
    Ok((0..1u64 << n).map(|_| r.gen::<f64>() < delta).collect())
}

/// Each edge of E(L_i(root), L_{i+1}(root)) independently with probability
/// p_i, where L_i(root) is the set of vertices at distance i from root.
pub fn sample_level_biased(
    n: usize,
    pvec: &ProbVector,
    root: Vertex,
    seed: u64,
    trial: u64,
) -> Result<SubgraphOfQn> {
    pvec.validate()?;
    if pvec.0.len() != n {
        return Err(Error::Invalid(format!(
            "pvec has {} components, expected {n}",
            pvec.0.len()
        )));
    }
    let mut g = SubgraphOfQn::empty(n)?;
    let mut r = rng::stream(seed, Purpose::EdgeSample, trial);
    for v in 0..1u64 << n {
        let rel = v ^ root.0;
        let level = rel.count_ones() as usize;
        for d in 1..=n {
            let d = Direction(d as u8);
            // up-edge from v with respect to root
            if rel & d.bit() == 0 && r.gen::<f64>() < pvec.0[level] {
                g.add_edge(Vertex(v), d);
            }
        }
    }
    Ok(g)
}

/// Outcome of one percolation sample, per the bounded-branching model:
/// `w` is level-biased, `w_prime` keeps for each vertex with at least M
/// up-neighbours a uniform M-subset of its up-edges, `reservoir` is an
/// independent 1/100 vertex set, and `p = w_prime - reservoir`.
pub struct PercolationSample {
    pub w: SubgraphOfQn,
    pub w_prime: SubgraphOfQn,
    pub reservoir: Vec<bool>,
    pub p: SubgraphOfQn,
}

pub fn sample_percolation(
    n: usize,
    pvec: &ProbVector,
    branching: usize,
    root: Vertex,
    seed: u64,
    trial: u64,
) -> Result<PercolationSample> {
    if branching == 0 {
        return Err(Error::Precondition("branching cap M must be >= 1".into()));
    }
    let w = sample_level_biased(n, pvec, root, seed, trial)?;
    let mut w_prime = SubgraphOfQn::empty(n)?;
    let mut r = rng::stream(seed, Purpose::Percolation, trial);
    for v in 0..1u64 << n {
        let rel = v ^ root.0;
        let up: Vec<Direction> = DirSet(w.adj_mask(Vertex(v)) & !rel).iter().collect();
        if up.len() >= branching {
            let chosen = {
                let mut dirs = up;
                dirs.shuffle(&mut r);
                dirs.truncate(branching);
                dirs
            };
            for d in chosen {
                w_prime.add_edge(Vertex(v), d);
            }
        }
    }
    let reservoir = sample_reservoir(n, 0.01, seed ^ 0x5eed, trial)?;
    let mut p = w_prime.clone();
    for v in 0..1u64 << n {
        if reservoir[v as usize] {
            for d in DirSet(p.adj_mask(Vertex(v))).iter().collect::<Vec<_>>() {
                p.remove_edge(Vertex(v), d);
            }
        }
    }
    Ok(PercolationSample {
        w,
        w_prime,
        reservoir,
        p,
    })
}

/// f_i(y) = (99/100)^2 (M/(n-i)) sum_{k=M}^{n-i} C(n-i,k) y^k (1-y)^{n-i-k}.
///
/// This equals the probability that a fixed edge of E(L_i, L_{i+1}) lies in
/// the percolation graph P when p_i = y. The binomial tail is evaluated by
/// an upward term recurrence started in log space.
pub fn f_level(i: usize, y: f64, n: usize, branching: usize) -> Result<f64> {
    if i + branching > n {
        return Err(Error::Precondition(format!(
            "f_level needs i <= n - M (i={i}, n={n}, M={branching})"
        )));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Invalid(format!("y = {y} outside [0,1]")));
    }
    let big_n = n - i;
    let scale = 0.99f64 * 0.99 * branching as f64 / big_n as f64;
    if y == 0.0 {
        return Ok(if branching == 0 { scale } else { 0.0 });
    }
    if y == 1.0 {
        return Ok(scale);
    }
    Ok(scale * binomial_tail(big_n, branching, y))
}

/// P[Bin(n, y) >= m], stable for n up to a few thousand.
fn binomial_tail(n: usize, m: usize, y: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    // log of the first term C(n,m) y^m (1-y)^(n-m)
    let ln_term = ln_binomial(n, m) + m as f64 * y.ln() + (n - m) as f64 * (1.0 - y).ln_1p_safe();
    let mut term = ln_term.exp();
    let mut total = term;
    let ratio_base = y / (1.0 - y);
    for k in m..n {
        term *= (n - k) as f64 / (k + 1) as f64 * ratio_base;
        total += term;
        if term < total * 1e-18 {
            break;
        }
    }
    total.min(1.0)
}

trait Ln1pSafe {
    fn ln_1p_safe(self) -> f64;
}

impl Ln1pSafe for f64 {
    /// ln(self) computed as ln1p(self - 1) for better accuracy near 1.
    fn ln_1p_safe(self) -> f64 {
        (self - 1.0).ln_1p()
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Required accuracy of the per-level solves.
pub const FEASIBLE_RESIDUAL: f64 = 1e-12;

/// Solves for a probability vector with f_i(p_i) = m := min_i f_i(eps) on
/// every level i <= min(9n/10, n-M), by bisection. Levels above 9n/10 (and
/// the few below n-M where the branching event is impossible) get p_i = 0.
///
/// In strict mode the constants of the source construction are asserted:
/// M > 1600 and 600 < t < 100 M where t = m n. Non-strict mode accepts any
/// caller-supplied eps and reports t as solved.
pub fn solve_feasible_tuple(
    n: usize,
    branching: usize,
    eps: f64,
    strict: bool,
) -> Result<FeasibleTuple> {
    if !(0.0..=1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::Invalid(format!("eps = {eps} outside (0,1]")));
    }
    if branching == 0 || branching >= n {
        return Err(Error::Precondition(format!(
            "need 1 <= M < n (M={branching}, n={n})"
        )));
    }
    let imax = (9 * n / 10).min(n - branching);
    let f_at_eps: Vec<f64> = (0..=imax)
        .map(|i| f_level(i, eps, n, branching))
        .collect::<Result<_>>()?;
    let m = f_at_eps.iter().cloned().fold(f64::INFINITY, f64::min);
    if m <= 0.0 {
        return Err(Error::Failed(
            "target m = 0: branching cap unreachable at every level".into(),
        ));
    }

    let mut pvec = vec![0.0f64; n];
    for i in 0..=imax {
        if f_at_eps[i] <= m {
            pvec[i] = eps;
            continue;
        }
        // f_i is monotone nondecreasing in y with f_i(0) = 0 <= m <= f_i(eps)
        let (mut lo, mut hi) = (0.0f64, eps);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f_level(i, mid, n, branching)? < m {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = if (f_level(i, hi, n, branching)? - m).abs()
            < (f_level(i, lo, n, branching)? - m).abs()
        {
            hi
        } else {
            lo
        };
        let residual = (f_level(i, p, n, branching)? - m).abs();
        if residual > FEASIBLE_RESIDUAL {
            return Err(Error::Failed(format!(
                "bisection residual {residual:.3e} at level {i} exceeds {FEASIBLE_RESIDUAL:.0e}"
            )));
        }
        pvec[i] = p;
    }

    let t = m * n as f64;
    if strict {
        if branching <= 1600 {
            return Err(Error::Precondition(format!(
                "strict mode requires M > 1600, got {branching}"
            )));
        }
        if !(600.0 < t && t < 100.0 * branching as f64) {
            return Err(Error::Precondition(format!(
                "strict mode requires 600 < t < 100M, got t = {t:.3}"
            )));
        }
        if pvec.iter().cloned().fold(0.0, f64::max) >= 0.1 {
            return Err(Error::Precondition(
                "strict mode requires max p_i < 1/10".into(),
            ));
        }
    }
    Ok(FeasibleTuple {
        n,
        branching,
        t,
        m,
        pvec,
    })
}

/// Monte Carlo estimate, by local simulation, of the probability that a
/// fixed edge of E(L_i, L_{i+1}) belongs to W'. The event depends only on
/// the up-edges at the lower endpoint, so one trial samples the edge itself,
/// the Bin(n-i-1, p_i) other up-edges, and the uniform M-subset choice.
pub fn simulate_edge_in_w_prime(
    n: usize,
    pvec: &ProbVector,
    branching: usize,
    level: usize,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    if level + 1 > n {
        return Err(Error::Precondition(format!("level {level} >= n = {n}")));
    }
    let p = pvec.0[level];
    let mut hits = 0u64;
    for trial in 0..trials {
        let mut r = rng::stream(seed, Purpose::Percolation, trial);
        if r.gen::<f64>() >= p {
            continue;
        }
        let mut others = 0usize;
        for _ in 0..n - level - 1 {
            if r.gen::<f64>() < p {
                others += 1;
            }
        }
        let deg = others + 1;
        if deg >= branching && r.gen::<f64>() < branching as f64 / deg as f64 {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}
