//! Exact hypercube geometry: vertices, directions, subcubes, balls and the
//! adjacency-mask representation of spanning subgraphs of Q^n.
//!
//! A vertex of Q^n is a packed 0-1 word; direction `d` (1-based, following
//! the on-disk format where bit 0 is direction 1) flips bit `d-1`. All
//! geometry below derives from xor and popcount on these words.

use crate::{Error, Result};
use std::fmt;
use std::io::{BufRead, Write};

/// Hard cap on the dimension for word-packed vertices.
pub const MAX_DIM: usize = 62;
/// Cap on dimensions for which a full adjacency table is materialised.
pub const MAX_EXPLICIT_DIM: usize = 22;

/// A vertex of Q^n, packed into a single word. Only the low n bits may be set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub u64);

impl Vertex {
    pub const ZERO: Vertex = Vertex(0);

    pub fn level(self) -> u32 {
        self.0.count_ones()
    }

    /// Parity: popcount mod 2. `true` means odd.
    pub fn parity(self) -> bool {
        self.level() % 2 == 1
    }

    pub fn flip(self, d: Direction) -> Vertex {
        Vertex(self.0 ^ d.bit())
    }

    /// Hamming distance.
    pub fn dist(self, other: Vertex) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    /// True if `self` is below `other` in the subset order rebased at `root`.
    pub fn below(self, other: Vertex, root: Vertex) -> bool {
        let a = self.0 ^ root.0;
        let b = other.0 ^ root.0;
        a & b == a
    }

    pub fn in_range(self, n: usize) -> bool {
        n <= MAX_DIM && self.0 >> n == 0
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{:b}", self.0)
    }
}

/// A direction of Q^n: the unit vector flipping one coordinate.
/// Indices are 1-based; direction d corresponds to bit d-1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction(pub u8);

impl Direction {
    pub fn new(index: usize, n: usize) -> Result<Direction> {
        if index == 0 || index > n {
            return Err(Error::Invalid(format!("direction {index} out of [1,{n}]")));
        }
        Ok(Direction(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn bit(self) -> u64 {
        1u64 << (self.0 - 1)
    }

    pub fn from_bit(bit: u64) -> Direction {
        debug_assert_eq!(bit.count_ones(), 1);
        Direction((bit.trailing_zeros() + 1) as u8)
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

/// A set of directions as a bitmask (bit d-1 for direction d).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct DirSet(pub u64);

impl DirSet {
    pub fn empty() -> DirSet {
        DirSet(0)
    }

    pub fn all(n: usize) -> DirSet {
        DirSet(if n == 64 { !0 } else { (1u64 << n) - 1 })
    }

    pub fn from_dirs(dirs: &[Direction]) -> DirSet {
        DirSet(dirs.iter().fold(0, |m, d| m | d.bit()))
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, d: Direction) -> bool {
        self.0 & d.bit() != 0
    }

    pub fn insert(&mut self, d: Direction) {
        self.0 |= d.bit();
    }

    pub fn inter(self, other: DirSet) -> DirSet {
        DirSet(self.0 & other.0)
    }

    pub fn union(self, other: DirSet) -> DirSet {
        DirSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Direction> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let b = m & m.wrapping_neg();
                m ^= b;
                Some(Direction::from_bit(b))
            }
        })
    }
}

impl fmt::Debug for DirSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The differing directions of two vertices; its size is their distance.
pub fn differing_directions(u: Vertex, v: Vertex) -> DirSet {
    DirSet(u.0 ^ v.0)
}

/// A subcube of Q^n in canonical form: the base has bit 0 on every free
/// direction, so each subcube has exactly one spec.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubcubeSpec {
    pub base: Vertex,
    pub dirs: DirSet,
}

impl SubcubeSpec {
    /// Canonicalises by clearing the base bits on the free directions.
    pub fn new(base: Vertex, dirs: DirSet) -> SubcubeSpec {
        SubcubeSpec {
            base: Vertex(base.0 & !dirs.0),
            dirs,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.base.0 & self.dirs.0 == 0
    }

    pub fn dim(&self) -> u32 {
        self.dirs.len()
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        v.0 & !self.dirs.0 == self.base.0
    }

    /// All 2^|dirs| vertices of the subcube.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(1 << self.dim());
        let mut sub = 0u64;
        loop {
            out.push(Vertex(self.base.0 | sub));
            if sub == self.dirs.0 {
                break;
            }
            sub = (sub.wrapping_sub(self.dirs.0)) & self.dirs.0;
        }
        out
    }

    /// The smallest subcube containing both u and v.
    pub fn spanned(u: Vertex, v: Vertex) -> SubcubeSpec {
        SubcubeSpec::new(u, differing_directions(u, v))
    }

    /// Translate by a vertex (F_2 sum); dirs inside the free set are absorbed.
    pub fn translate(&self, by: u64) -> SubcubeSpec {
        SubcubeSpec::new(Vertex(self.base.0 ^ by), self.dirs)
    }
}

impl fmt::Debug for SubcubeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q({:?},{:?})", self.base, self.dirs)
    }
}

/// A spanning subgraph of Q^n stored as one direction mask per vertex:
/// bit d-1 of `adj[v]` is set iff the edge {v, v+d} is present.
#[derive(Clone, PartialEq, Eq)]
pub struct SubgraphOfQn {
    n: usize,
    adj: Vec<u64>,
}

impl SubgraphOfQn {
    pub fn empty(n: usize) -> Result<SubgraphOfQn> {
        if n == 0 || n > MAX_EXPLICIT_DIM {
            return Err(Error::CapExceeded(format!(
                "explicit subgraphs support 1..={MAX_EXPLICIT_DIM} dimensions, got {n}"
            )));
        }
        Ok(SubgraphOfQn {
            n,
            adj: vec![0; 1 << n],
        })
    }

    pub fn full(n: usize) -> Result<SubgraphOfQn> {
        let mut g = SubgraphOfQn::empty(n)?;
        let all = DirSet::all(n).0;
        for m in g.adj.iter_mut() {
            *m = all;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        1 << self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..1u64 << self.n).map(Vertex)
    }

    pub fn adj_mask(&self, v: Vertex) -> u64 {
        self.adj[v.0 as usize]
    }

    pub fn degree(&self, v: Vertex) -> u32 {
        self.adj[v.0 as usize].count_ones()
    }

    pub fn has_edge(&self, v: Vertex, d: Direction) -> bool {
        self.adj[v.0 as usize] & d.bit() != 0
    }

    pub fn add_edge(&mut self, v: Vertex, d: Direction) {
        self.adj[v.0 as usize] |= d.bit();
        self.adj[(v.0 ^ d.bit()) as usize] |= d.bit();
    }

    pub fn remove_edge(&mut self, v: Vertex, d: Direction) {
        self.adj[v.0 as usize] &= !d.bit();
        self.adj[(v.0 ^ d.bit()) as usize] &= !d.bit();
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        DirSet(self.adj[v.0 as usize])
            .iter()
            .map(move |d| v.flip(d))
    }

    pub fn edge_count(&self) -> u64 {
        self.adj.iter().map(|m| m.count_ones() as u64).sum::<u64>() / 2
    }

    /// Union of edge sets; dimensions must agree.
    pub fn union(&self, other: &SubgraphOfQn) -> Result<SubgraphOfQn> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut g = self.clone();
        for (a, b) in g.adj.iter_mut().zip(other.adj.iter()) {
            *a |= b;
        }
        Ok(g)
    }

    /// Edge set difference (self minus other).
    pub fn minus(&self, other: &SubgraphOfQn) -> Result<SubgraphOfQn> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut g = self.clone();
        for (a, b) in g.adj.iter_mut().zip(other.adj.iter()) {
            *a &= !b;
        }
        Ok(g)
    }

    /// Symmetry invariant: d in adj(v) iff d in adj(v+d).
    pub fn check_symmetry(&self) -> bool {
        self.vertices().all(|v| {
            DirSet(self.adj[v.0 as usize])
                .iter()
                .all(|d| self.adj[(v.0 ^ d.bit()) as usize] & d.bit() != 0)
        })
    }

    /// Vertices at graph distance at most r from `center` (BFS).
    pub fn ball(&self, center: Vertex, r: u32) -> Vec<Vertex> {
        let mut seen = vec![false; 1 << self.n];
        let mut frontier = vec![center];
        seen[center.0 as usize] = true;
        let mut out = vec![center];
        for _ in 0..r {
            let mut next = Vec::new();
            for &v in &frontier {
                for u in self.neighbors(v) {
                    if !seen[u.0 as usize] {
                        seen[u.0 as usize] = true;
                        next.push(u);
                        out.push(u);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    /// All components via union over balls; returns component id per vertex.
    pub fn components(&self) -> Vec<u32> {
        let mut comp = vec![u32::MAX; 1 << self.n];
        let mut next_id = 0;
        for start in 0..(1u64 << self.n) {
            if comp[start as usize] != u32::MAX {
                continue;
            }
            let id = next_id;
            next_id += 1;
            let mut stack = vec![Vertex(start)];
            comp[start as usize] = id;
            while let Some(v) = stack.pop() {
                for u in self.neighbors(v) {
                    if comp[u.0 as usize] == u32::MAX {
                        comp[u.0 as usize] = id;
                        stack.push(u);
                    }
                }
            }
        }
        comp
    }

    /// True iff the whole subcube (all its edges) is present.
    pub fn contains_subcube(&self, c: &SubcubeSpec) -> bool {
        c.vertices()
            .iter()
            .all(|&v| self.adj[v.0 as usize] & c.dirs.0 == c.dirs.0)
    }

    /// d^l_G(v): the number of l-subcubes of G containing v.
    pub fn count_subcubes_at(&self, v: Vertex, l: u32) -> u64 {
        let mut count = 0;
        for dirs in k_subsets(DirSet::all(self.n).0, l) {
            if self.contains_subcube(&SubcubeSpec::new(v, DirSet(dirs))) {
                count += 1;
            }
        }
        count
    }

    /// d^l_G(u,v): the number of l-subcubes of G containing both u and v.
    /// Zero when dist(u,v) > l; every counted cube's direction set contains
    /// the differing directions of u and v.
    pub fn count_subcubes_at_pair(&self, u: Vertex, v: Vertex, l: u32) -> u64 {
        let diff = differing_directions(u, v);
        if diff.len() > l {
            return 0;
        }
        let free = DirSet::all(self.n).0 & !diff.0;
        let mut count = 0;
        for extra in k_subsets(free, l - diff.len()) {
            if self.contains_subcube(&SubcubeSpec::new(u, DirSet(diff.0 | extra))) {
                count += 1;
            }
        }
        count
    }

    /// Writes the on-disk format: header `qn <n> <edge-count>`, then one edge
    /// per line as `<vertex> <direction>` where the stored endpoint has bit
    /// d-1 equal to 0.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "qn {} {}", self.n, self.edge_count())?;
        for v in self.vertices() {
            for d in DirSet(self.adj[v.0 as usize]).iter() {
                if v.0 & d.bit() == 0 {
                    writeln!(w, "{} {}", v.0, d.index())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: &mut R) -> Result<SubgraphOfQn> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let mut it = header.split_whitespace();
        if it.next() != Some("qn") {
            return Err(Error::Parse("expected 'qn <n> <edges>' header".into()));
        }
        let n: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("bad dimension in header".into()))?;
        let declared: u64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("bad edge count in header".into()))?;
        let mut g = SubgraphOfQn::empty(n)?;
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let v: u64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad edge line: {line}")))?;
            let d: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad edge line: {line}")))?;
            let d = Direction::new(d, n)?;
            if !Vertex(v).in_range(n) {
                return Err(Error::Parse(format!("vertex {v} out of range for n={n}")));
            }
            if v & d.bit() != 0 {
                return Err(Error::Parse(format!(
                    "non-canonical edge endpoint {v} for direction {}",
                    d.index()
                )));
            }
            g.add_edge(Vertex(v), d);
        }
        if g.edge_count() != declared {
            return Err(Error::Parse(format!(
                "edge count mismatch: header {declared}, body {}",
                g.edge_count()
            )));
        }
        Ok(g)
    }
}

impl fmt::Debug for SubgraphOfQn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubgraphOfQn(n={}, |E|={})", self.n, self.edge_count())
    }
}

/// Iterates over all k-subsets of the set bitmask `mask` (as masks).
pub fn k_subsets(mask: u64, k: u32) -> impl Iterator<Item = u64> {
    let bits: Vec<u64> = DirSet(mask).iter().map(|d| d.bit()).collect();
    let m = bits.len();
    let mut idx: Vec<usize> = (0..k as usize).collect();
    let mut done = (k as usize) > m;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = idx.iter().fold(0u64, |acc, &i| acc | bits[i]);
        // advance combination
        let k = idx.len();
        if k == 0 {
            done = true;
            return Some(out);
        }
        let mut i = k;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if idx[i] + 1 <= m - (k - i) {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// Binomial coefficient, exact in u128 for the ranges used here.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_basics() {
        assert_eq!(Vertex(0b000).dist(Vertex(0b111)), 3);
        assert_eq!(Vertex(0b0101).dist(Vertex(0b0101)), 0);
        assert_eq!(Vertex(0b0101).dist(Vertex(0b0110)), 2);
        // symmetry and triangle inequality on a sample
        for a in 0..16u64 {
            for b in 0..16u64 {
                assert_eq!(Vertex(a).dist(Vertex(b)), Vertex(b).dist(Vertex(a)));
                for c in 0..16u64 {
                    assert!(
                        Vertex(a).dist(Vertex(c))
                            <= Vertex(a).dist(Vertex(b)) + Vertex(b).dist(Vertex(c))
                    );
                }
            }
        }
    }

    #[test]
    fn parity_matches_distance_parity() {
        for a in 0..64u64 {
            for b in 0..64u64 {
                let d = Vertex(a).dist(Vertex(b));
                assert_eq!(
                    Vertex(a).parity() != Vertex(b).parity(),
                    d % 2 == 1,
                    "a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn subcube_vertices_enumerate_subsets() {
        let c = SubcubeSpec::new(Vertex(0), DirSet::empty());
        assert_eq!(c.vertices(), vec![Vertex(0)]);

        let dirs = DirSet::from_dirs(&[Direction(1), Direction(2)]);
        let c = SubcubeSpec::new(Vertex(0), dirs);
        let mut vs = c.vertices();
        vs.sort();
        assert_eq!(vs, vec![Vertex(0), Vertex(1), Vertex(2), Vertex(3)]);
        assert_eq!(c.vertices().len(), 1 << c.dim());

        // closure under adding any free direction
        for v in c.vertices() {
            for d in dirs.iter() {
                assert!(c.contains_vertex(v.flip(d)));
            }
        }
    }

    #[test]
    fn canonicalisation_gives_unique_spec() {
        let dirs = DirSet::from_dirs(&[Direction(1), Direction(3)]);
        let a = SubcubeSpec::new(Vertex(0b101), dirs);
        let b = SubcubeSpec::new(Vertex(0b001), dirs);
        assert_eq!(a, b);
        assert!(a.is_canonical());
    }

    #[test]
    fn differing_directions_match_distance() {
        let u = Vertex(0b000);
        let v = Vertex(0b110);
        let d = differing_directions(u, v);
        assert_eq!(d.len(), 2);
        let got: Vec<usize> = d.iter().map(|x| x.index()).collect();
        assert_eq!(got, vec![2, 3]);
        assert!(differing_directions(u, u).is_empty());
        // smallest containing subcube contains both endpoints
        let span = SubcubeSpec::spanned(u, v);
        assert!(span.contains_vertex(u) && span.contains_vertex(v));
    }

    #[test]
    fn balls_in_full_cubes() {
        let g4 = SubgraphOfQn::full(4).unwrap();
        assert_eq!(g4.ball(Vertex(3), 0), vec![Vertex(3)]);
        assert_eq!(g4.ball(Vertex(3), 1).len(), 5);
        let g5 = SubgraphOfQn::full(5).unwrap();
        assert_eq!(g5.ball(Vertex(0), 2).len(), 16); // 1 + 5 + 10
    }

    #[test]
    fn subcube_counts_on_small_cubes() {
        let g = SubgraphOfQn::full(4).unwrap();
        for v in g.vertices() {
            assert_eq!(g.count_subcubes_at(v, 2), 6); // C(4,2)
        }
        let e = SubgraphOfQn::empty(4).unwrap();
        assert_eq!(e.count_subcubes_at(Vertex(0), 1), 0);

        let g5 = SubgraphOfQn::full(5).unwrap();
        // dist 2, l=2: the unique spanned square
        assert_eq!(g5.count_subcubes_at_pair(Vertex(0), Vertex(0b11), 2), 1);
        // dist 1, l=2: C(4,1)
        assert_eq!(g5.count_subcubes_at_pair(Vertex(0), Vertex(1), 2), 4);
        // dist > l: zero
        assert_eq!(g5.count_subcubes_at_pair(Vertex(0), Vertex(0b111), 2), 0);
    }

    #[test]
    fn degree_bound_binom_n_l() {
        // any G: d^l(v) <= C(n,l)
        let g = SubgraphOfQn::full(5).unwrap();
        for v in [Vertex(0), Vertex(7), Vertex(21)] {
            for l in 0..=3 {
                assert!(g.count_subcubes_at(v, l) as u128 <= binomial(5, l as u64));
            }
        }
    }

    #[test]
    fn total_subcube_count_identity() {
        // sum_v d^l(Q^n, v) = 2^l * C(n,l) * 2^(n-l), verified n <= 6, l <= 3
        for n in 2..=6usize {
            let g = SubgraphOfQn::full(n).unwrap();
            for l in 1..=3u32.min(n as u32) {
                let total: u64 = g.vertices().map(|v| g.count_subcubes_at(v, l)).sum();
                let expect =
                    (1u128 << l) * binomial(n as u64, l as u64) * (1u128 << (n as u32 - l));
                assert_eq!(total as u128, expect, "n={n} l={l}");
            }
        }
    }

    #[test]
    fn file_roundtrip() {
        let mut g = SubgraphOfQn::empty(4).unwrap();
        g.add_edge(Vertex(0), Direction(1));
        g.add_edge(Vertex(5), Direction(2));
        g.add_edge(Vertex(10), Direction(3));
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("qn 4 3"));
        let h = SubgraphOfQn::read_from(&mut &buf[..]).unwrap();
        assert_eq!(g, h);
        assert!(h.check_symmetry());
    }

    #[test]
    fn k_subsets_counts() {
        let n = 6;
        for k in 0..=6u32 {
            let cnt = k_subsets(DirSet::all(n).0, k).count();
            assert_eq!(cnt as u128, binomial(n as u64, k as u64));
        }
    }
}
