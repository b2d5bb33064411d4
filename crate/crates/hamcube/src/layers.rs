//! The s-layer decomposition of Q^n: a Gray-code Hamilton cycle on the first
//! s coordinates splits Q^n into 2^s cyclically ordered copies of Q^{n-s}
//! ("layers"). Cubes of the projected graph lift to molecules (one atom per
//! layer); runs of q consecutive atoms form slices.

use crate::cube::{DirSet, Direction, SubcubeSpec, SubgraphOfQn, Vertex};
use crate::{Error, Result};

/// Binary reflected Gray code on s bits: g(0), g(1), ... g(2^s - 1).
pub fn gray_code(s: usize) -> Vec<u64> {
    (0..1u64 << s).map(|i| i ^ (i >> 1)).collect()
}

#[derive(Clone, Debug)]
pub struct LayerDecomposition {
    n: usize,
    s: usize,
    /// Cyclic layer order: the i-th layer (0-based) has prefix `order[i]`.
    order: Vec<u64>,
    /// Inverse of `order`.
    index_of: Vec<usize>,
    /// Slice length; `q * t = 2^s`.
    q: usize,
    t: usize,
}

impl LayerDecomposition {
    pub fn new(n: usize, s: usize, q: usize) -> Result<LayerDecomposition> {
        if s == 0 || s >= n {
            return Err(Error::Precondition(format!("need 0 < s < n, got s={s} n={n}")));
        }
        let layers = 1usize << s;
        if q == 0 || layers % q != 0 {
            return Err(Error::Precondition(format!(
                "slice length {q} must divide 2^s = {layers}"
            )));
        }
        let order = gray_code(s);
        let mut index_of = vec![0usize; layers];
        for (i, &a) in order.iter().enumerate() {
            index_of[a as usize] = i;
        }
        Ok(LayerDecomposition {
            n,
            s,
            order,
            index_of,
            q,
            t: layers / q,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn inner_dim(&self) -> usize {
        self.n - self.s
    }

    pub fn layer_count(&self) -> usize {
        1 << self.s
    }

    pub fn slice_len(&self) -> usize {
        self.q
    }

    pub fn slice_count(&self) -> usize {
        self.t
    }

    pub fn prefix(&self, layer: usize) -> u64 {
        self.order[layer]
    }

    /// The i-th clone (0-based layer position) of a projected vertex.
    pub fn clone_of(&self, proj: u64, layer: usize) -> Vertex {
        Vertex((proj << self.s) | self.order[layer])
    }

    /// Projection of a Q^n vertex to the intersection graph Q^{n-s}.
    pub fn project(&self, x: Vertex) -> u64 {
        x.0 >> self.s
    }

    /// The layer position (0-based in the cyclic order) of a Q^n vertex.
    pub fn layer_of(&self, x: Vertex) -> usize {
        self.index_of[(x.0 & ((1 << self.s) - 1)) as usize]
    }

    pub fn slice_of_layer(&self, layer: usize) -> usize {
        layer / self.q
    }

    /// Direction of the matching between layer i and layer i+1 (cyclic).
    pub fn cross_dir(&self, layer: usize) -> Direction {
        let next = (layer + 1) % self.layer_count();
        Direction::from_bit(self.order[layer] ^ self.order[next])
    }

    /// True for directions that move between layers (the first s coordinates).
    pub fn is_s_direction(&self, d: Direction) -> bool {
        d.index() <= self.s
    }

    /// Map a direction of the intersection graph to a direction of Q^n.
    pub fn lift_dir(&self, d: Direction) -> Direction {
        Direction((d.0 as usize + self.s) as u8)
    }

    /// Map a subcube of the intersection graph into layer `layer`.
    pub fn atom(&self, c: &SubcubeSpec, layer: usize) -> SubcubeSpec {
        SubcubeSpec::new(
            self.clone_of(c.base.0, layer),
            DirSet(c.dirs.0 << self.s),
        )
    }

    /// All atoms of the molecule of an I-cube, in cyclic layer order.
    pub fn molecule(&self, c: &SubcubeSpec) -> Vec<SubcubeSpec> {
        (0..self.layer_count()).map(|i| self.atom(c, i)).collect()
    }

    /// The intersection graph I(G) on Q^{n-s}: an edge is present iff all
    /// 2^s clones are edges of G.
    pub fn intersection_graph(&self, g: &SubgraphOfQn) -> Result<SubgraphOfQn> {
        self.project_graph(g, true)
    }

    /// The union graph G_I on Q^{n-s}: an edge is present iff some clone is.
    pub fn union_graph(&self, g: &SubgraphOfQn) -> Result<SubgraphOfQn> {
        self.project_graph(g, false)
    }

    fn project_graph(&self, g: &SubgraphOfQn, all: bool) -> Result<SubgraphOfQn> {
        if g.n() != self.n {
            return Err(Error::DimensionMismatch(g.n(), self.n));
        }
        let m = self.inner_dim();
        let mut out = SubgraphOfQn::empty(m)?;
        for proj in 0..1u64 << m {
            for di in 1..=m {
                let d_i = Direction(di as u8);
                if proj & d_i.bit() != 0 {
                    continue;
                }
                let dq = self.lift_dir(d_i);
                let mut any = false;
                let mut every = true;
                for layer in 0..self.layer_count() {
                    let present = g.has_edge(self.clone_of(proj, layer), dq);
                    any |= present;
                    every &= present;
                }
                if if all { every } else { any } {
                    out.add_edge(Vertex(proj), d_i);
                }
            }
        }
        Ok(out)
    }

    /// The graph induced by G on layer `layer`, projected to Q^{n-s}.
    pub fn layer_graph(&self, g: &SubgraphOfQn, layer: usize) -> Result<SubgraphOfQn> {
        if g.n() != self.n {
            return Err(Error::DimensionMismatch(g.n(), self.n));
        }
        let m = self.inner_dim();
        let mut out = SubgraphOfQn::empty(m)?;
        for proj in 0..1u64 << m {
            for di in 1..=m {
                let d_i = Direction(di as u8);
                if proj & d_i.bit() != 0 {
                    continue;
                }
                if g.has_edge(self.clone_of(proj, layer), self.lift_dir(d_i)) {
                    out.add_edge(Vertex(proj), d_i);
                }
            }
        }
        Ok(out)
    }

    /// Count of inter-layer clone edges of `proj` present in G between
    /// layers i and i+1 is either 0 or 1; this returns presence.
    pub fn has_cross_edge(&self, g: &SubgraphOfQn, proj: u64, layer: usize) -> bool {
        g.has_edge(self.clone_of(proj, layer), self.cross_dir(layer))
    }

    /// Bondedness of the molecule of I-cube `c` in G at threshold `b`:
    /// between every cyclically consecutive atom pair, G must contain at
    /// least `b` matching edges whose endpoint in the lower atom has even
    /// parity and at least `b` whose endpoint is odd.
    pub fn is_bonded(&self, g: &SubgraphOfQn, c: &SubcubeSpec, b: u32) -> Result<bool> {
        if b as u64 > 1u64 << c.dim().saturating_sub(1) {
            return Err(Error::Precondition(format!(
                "bond threshold {b} exceeds per-parity capacity 2^(l-1) = {}",
                1u64 << c.dim().saturating_sub(1)
            )));
        }
        for layer in 0..self.layer_count() {
            let (mut even, mut odd) = (0u32, 0u32);
            for w in c.vertices() {
                if self.has_cross_edge(g, w.0, layer) {
                    if self.clone_of(w.0, layer).parity() {
                        odd += 1;
                    } else {
                        even += 1;
                    }
                }
            }
            if even < b || odd < b {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Direction;

    #[test]
    fn gray_code_is_hamilton_cycle() {
        for s in 1..=6 {
            let g = gray_code(s);
            assert_eq!(g.len(), 1 << s);
            for i in 0..g.len() {
                let j = (i + 1) % g.len();
                assert_eq!((g[i] ^ g[j]).count_ones(), 1, "s={s} i={i}");
            }
            let mut sorted = g.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..1u64 << s).collect::<Vec<_>>());
        }
    }

    #[test]
    fn clone_project_roundtrip() {
        let l = LayerDecomposition::new(8, 3, 4).unwrap();
        for proj in 0..1u64 << 5 {
            for i in 0..l.layer_count() {
                let x = l.clone_of(proj, i);
                assert_eq!(l.project(x), proj);
                assert_eq!(l.layer_of(x), i);
            }
        }
    }

    #[test]
    fn intersection_of_full_cube_is_full() {
        let l = LayerDecomposition::new(6, 2, 4).unwrap();
        let g = SubgraphOfQn::full(6).unwrap();
        let i = l.intersection_graph(&g).unwrap();
        assert_eq!(i, SubgraphOfQn::full(4).unwrap());
    }

    #[test]
    fn missing_clone_drops_edge_from_i_but_not_union() {
        let l = LayerDecomposition::new(6, 2, 4).unwrap();
        let mut g = SubgraphOfQn::full(6).unwrap();
        // remove one clone of the I-edge (proj 0, I-direction 1)
        let v = l.clone_of(0, 2);
        g.remove_edge(v, l.lift_dir(Direction(1)));
        let i = l.intersection_graph(&g).unwrap();
        let u = l.union_graph(&g).unwrap();
        assert!(!i.has_edge(Vertex(0), Direction(1)));
        assert!(u.has_edge(Vertex(0), Direction(1)));
        // I(G) is contained in every layer graph's projection; G_I contains them
        for layer in 0..l.layer_count() {
            let lg = l.layer_graph(&g, layer).unwrap();
            assert_eq!(i.minus(&lg).unwrap().edge_count(), 0);
            assert_eq!(lg.minus(&u).unwrap().edge_count(), 0);
        }
    }

    #[test]
    fn bondedness_full_and_broken() {
        let l = LayerDecomposition::new(7, 2, 4).unwrap();
        let g = SubgraphOfQn::full(7).unwrap();
        let c = SubcubeSpec::new(Vertex(0), DirSet::from_dirs(&[Direction(1), Direction(2)]));
        // full graph: bonded even at the maximum threshold 2^(l-1)
        assert!(l.is_bonded(&g, &c, 2).unwrap());
        assert!(l.is_bonded(&g, &c, 1).unwrap());
        // exceeding capacity is a configuration error
        assert!(l.is_bonded(&g, &c, 3).is_err());

        // remove all cross edges between atoms 2 and 3
        let mut h = g.clone();
        for w in c.vertices() {
            h.remove_edge(l.clone_of(w.0, 2), l.cross_dir(2));
        }
        assert!(!l.is_bonded(&h, &c, 1).unwrap());
    }

    #[test]
    fn bonded_at_capacity_has_exact_parity_split() {
        // b = 2^(l-1) with a full graph: equality in each parity class
        let l = LayerDecomposition::new(7, 2, 4).unwrap();
        let g = SubgraphOfQn::full(7).unwrap();
        let c = SubcubeSpec::new(Vertex(0), DirSet::from_dirs(&[Direction(1), Direction(2)]));
        for layer in 0..l.layer_count() {
            let (mut even, mut odd) = (0, 0);
            for w in c.vertices() {
                if l.has_cross_edge(&g, w.0, layer) {
                    if l.clone_of(w.0, layer).parity() {
                        odd += 1;
                    } else {
                        even += 1;
                    }
                }
            }
            assert_eq!(even, 2);
            assert_eq!(odd, 2);
        }
    }

    #[test]
    fn consecutive_layers_differ_in_one_coordinate() {
        let l = LayerDecomposition::new(9, 3, 2).unwrap();
        for i in 0..l.layer_count() {
            let d = l.cross_dir(i);
            assert!(d.index() <= 3);
            let j = (i + 1) % l.layer_count();
            assert_eq!(l.prefix(i) ^ l.prefix(j), d.bit());
        }
        // slices partition layers into t consecutive runs of length q
        assert_eq!(l.slice_count() * l.slice_len(), l.layer_count());
        for i in 0..l.layer_count() {
            assert_eq!(l.slice_of_layer(i), i / l.slice_len());
        }
    }
}
