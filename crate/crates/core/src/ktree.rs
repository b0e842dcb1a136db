//! Index arithmetic for complete k-ary trees.
//!
//! Vertices are addressed by `(level, offset)` where the root is `(0, 1)` and
//! the vertices of level `j` carry offsets `1..=k^j` from left to right. The
//! global id is the breadth-first number, with the root as vertex 1:
//!
//! ```text
//! id = (k^level - 1) / (k - 1) + offset
//! ```
//!
//! Nothing is stored per vertex. An edge is named by its deeper endpoint, so
//! the edge set is exactly the ids `2..=n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A complete k-tree of height `r`: every internal vertex has exactly `k`
/// children and every leaf sits on level `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompleteKTree {
    k: u64,
    r: u32,
    n: u64,
    // powers[j] = k^j, j in 0..=r
    powers: Vec<u64>,
    // level_base[j] = number of vertices above level j
    level_base: Vec<u64>,
}

/// A vertex of a [`CompleteKTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef {
    level: u32,
    offset: u64,
    id: u64,
}

impl VertexRef {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// 1-based position within the level, left to right.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn id(&self) -> u64 {
        self.id
    }
}

/// A tree edge, named by the id of its child endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Edge(pub u64);

impl Edge {
    pub fn child(&self) -> u64 {
        self.0
    }
}

impl CompleteKTree {
    pub fn new(k: u64, r: u32) -> Result<Self> {
        if k < 2 || r < 1 {
            return Err(Error::InvalidParams { k, r });
        }
        let mut powers = Vec::with_capacity(r as usize + 1);
        let mut level_base = Vec::with_capacity(r as usize + 1);
        let mut pow = 1u64;
        let mut base = 0u64;
        for j in 0..=r {
            if j > 0 {
                pow = pow.checked_mul(k).ok_or(Error::Overflow { k, r })?;
            }
            powers.push(pow);
            level_base.push(base);
            base = base.checked_add(pow).ok_or(Error::Overflow { k, r })?;
        }
        Ok(Self {
            k,
            r,
            n: base,
            powers,
            level_base,
        })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Number of vertices, `(k^(r+1) - 1) / (k - 1)`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `k^j`, the number of vertices on level `j`.
    pub fn level_size(&self, j: u32) -> u64 {
        self.powers[j as usize]
    }

    pub fn root(&self) -> VertexRef {
        VertexRef {
            level: 0,
            offset: 1,
            id: 1,
        }
    }

    pub fn is_leaf(&self, v: VertexRef) -> bool {
        v.level == self.r
    }

    pub fn vertex(&self, level: u32, offset: u64) -> Result<VertexRef> {
        if level > self.r {
            return Err(Error::OutOfRange(format!(
                "level {level} exceeds height {}",
                self.r
            )));
        }
        let size = self.level_size(level);
        if offset == 0 || offset > size {
            return Err(Error::OutOfRange(format!(
                "offset {offset} not in 1..={size} on level {level}"
            )));
        }
        Ok(VertexRef {
            level,
            offset,
            id: self.level_base[level as usize] + offset,
        })
    }

    pub fn vertex_id(&self, level: u32, offset: u64) -> Result<u64> {
        self.vertex(level, offset).map(|v| v.id)
    }

    /// Inverse of [`vertex_id`](Self::vertex_id).
    pub fn locate(&self, id: u64) -> Result<(u32, u64)> {
        if id == 0 || id > self.n {
            return Err(Error::OutOfRange(format!(
                "vertex id {id} not in 1..={}",
                self.n
            )));
        }
        // level_base is strictly increasing; find the last base below id.
        let level = self.level_base.partition_point(|&b| b < id) - 1;
        Ok((level as u32, id - self.level_base[level]))
    }

    pub fn vertex_by_id(&self, id: u64) -> Result<VertexRef> {
        let (level, offset) = self.locate(id)?;
        Ok(VertexRef { level, offset, id })
    }

    pub fn parent(&self, v: VertexRef) -> Result<VertexRef> {
        if v.level == 0 {
            return Err(Error::RootHasNoParent);
        }
        Ok(self.up(v, 1))
    }

    pub fn children(&self, v: VertexRef) -> Result<Vec<VertexRef>> {
        if v.level >= self.r {
            return Err(Error::LeafHasNoChildren(v.id));
        }
        let level = v.level + 1;
        let first = (v.offset - 1) * self.k + 1;
        let base = self.level_base[level as usize];
        Ok((first..first + self.k)
            .map(|offset| VertexRef {
                level,
                offset,
                id: base + offset,
            })
            .collect())
    }

    pub fn ancestor_at_level(&self, v: VertexRef, target_level: u32) -> Result<VertexRef> {
        if target_level > v.level {
            return Err(Error::OutOfRange(format!(
                "target level {target_level} is below vertex {} on level {}",
                v.id, v.level
            )));
        }
        Ok(self.up(v, v.level - target_level))
    }

    /// True when `a` lies on the path from the root to `d` (a vertex is its
    /// own ancestor).
    pub fn is_ancestor(&self, a: VertexRef, d: VertexRef) -> bool {
        a.level <= d.level && self.up(d, d.level - a.level) == a
    }

    pub fn lca(&self, a: VertexRef, b: VertexRef) -> VertexRef {
        let (mut a, mut b) = (a, b);
        if a.level > b.level {
            a = self.up(a, a.level - b.level);
        } else if b.level > a.level {
            b = self.up(b, b.level - a.level);
        }
        while a != b {
            a = self.up(a, 1);
            b = self.up(b, 1);
        }
        a
    }

    pub fn distance(&self, a: VertexRef, b: VertexRef) -> u64 {
        let c = self.lca(a, b);
        u64::from(a.level + b.level - 2 * c.level)
    }

    /// Edges of the unique path from `a` to `b`, in traversal order.
    pub fn path(&self, a: VertexRef, b: VertexRef) -> Result<Vec<Edge>> {
        if a == b {
            return Err(Error::SameVertex(a.id));
        }
        let c = self.lca(a, b);
        let mut edges = Vec::with_capacity((a.level + b.level - 2 * c.level) as usize);
        let mut x = a;
        while x.level > c.level {
            edges.push(Edge(x.id));
            x = self.up(x, 1);
        }
        let split = edges.len();
        let mut y = b;
        while y.level > c.level {
            edges.push(Edge(y.id));
            y = self.up(y, 1);
        }
        edges[split..].reverse();
        Ok(edges)
    }

    pub fn level_vertices(&self, j: u32) -> Result<Vec<VertexRef>> {
        if j > self.r {
            return Err(Error::OutOfRange(format!(
                "level {j} exceeds height {}",
                self.r
            )));
        }
        let base = self.level_base[j as usize];
        Ok((1..=self.level_size(j))
            .map(|offset| VertexRef {
                level: j,
                offset,
                id: base + offset,
            })
            .collect())
    }

    // Ancestor `steps` levels up; caller guarantees steps <= v.level.
    fn up(&self, v: VertexRef, steps: u32) -> VertexRef {
        if steps == 0 {
            return v;
        }
        let level = v.level - steps;
        let offset = (v.offset - 1) / self.powers[steps as usize] + 1;
        VertexRef {
            level,
            offset,
            id: self.level_base[level as usize] + offset,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(vs: &[VertexRef]) -> Vec<u64> {
        vs.iter().map(|v| v.id()).collect()
    }

    fn edges(es: &[Edge]) -> Vec<u64> {
        es.iter().map(|e| e.child()).collect()
    }

    #[test]
    fn vertex_counts() {
        assert_eq!(CompleteKTree::new(2, 2).unwrap().n(), 7);
        assert_eq!(CompleteKTree::new(3, 2).unwrap().n(), 13);
        assert_eq!(CompleteKTree::new(2, 1).unwrap().n(), 3);
    }

    #[test]
    fn rejects_bad_params() {
        assert_eq!(
            CompleteKTree::new(1, 2),
            Err(Error::InvalidParams { k: 1, r: 2 })
        );
        assert_eq!(
            CompleteKTree::new(2, 0),
            Err(Error::InvalidParams { k: 2, r: 0 })
        );
        assert_eq!(CompleteKTree::new(2, 64), Err(Error::Overflow { k: 2, r: 64 }));
        // 2^63 + ... + 1 = 2^64 - 1 still fits
        assert_eq!(CompleteKTree::new(2, 63).unwrap().n(), u64::MAX);
    }

    #[test]
    fn ids_and_locate() {
        let t2 = CompleteKTree::new(2, 2).unwrap();
        let t3 = CompleteKTree::new(3, 2).unwrap();
        assert_eq!(t2.vertex_id(2, 3), Ok(6));
        assert_eq!(t2.vertex_id(0, 1), Ok(1));
        assert_eq!(t3.vertex_id(1, 2), Ok(3));
        assert!(t2.vertex_id(2, 5).is_err());
        assert!(t2.vertex_id(3, 1).is_err());

        assert_eq!(t2.locate(6), Ok((2, 3)));
        assert_eq!(t2.locate(1), Ok((0, 1)));
        assert_eq!(t2.locate(7), Ok((2, 4)));
        assert!(t2.locate(0).is_err());
        assert!(t2.locate(8).is_err());
    }

    #[test]
    fn parents_and_children() {
        let t2 = CompleteKTree::new(2, 2).unwrap();
        let t3 = CompleteKTree::new(3, 2).unwrap();
        let v = |t: &CompleteKTree, id| t.vertex_by_id(id).unwrap();

        assert_eq!(t2.parent(v(&t2, 6)).unwrap().id(), 3);
        assert_eq!(t3.parent(v(&t3, 4)).unwrap().id(), 1);
        assert_eq!(t2.parent(t2.root()), Err(Error::RootHasNoParent));

        assert_eq!(ids(&t3.children(t3.root()).unwrap()), vec![2, 3, 4]);
        assert_eq!(ids(&t2.children(v(&t2, 2)).unwrap()), vec![4, 5]);
        assert_eq!(t2.children(v(&t2, 4)), Err(Error::LeafHasNoChildren(4)));
    }

    #[test]
    fn ancestors() {
        let t2 = CompleteKTree::new(2, 2).unwrap();
        let t3 = CompleteKTree::new(3, 2).unwrap();
        let seven = t2.vertex_by_id(7).unwrap();
        assert_eq!(t2.ancestor_at_level(seven, 0).unwrap().id(), 1);
        assert_eq!(t2.ancestor_at_level(seven, 1).unwrap().id(), 3);
        assert_eq!(t2.ancestor_at_level(seven, 2).unwrap(), seven);
        assert!(t2.ancestor_at_level(t2.root(), 1).is_err());
        let five = t3.vertex_by_id(5).unwrap();
        assert_eq!(t3.ancestor_at_level(five, 1).unwrap().id(), 2);
    }

    #[test]
    fn paths() {
        let t = CompleteKTree::new(2, 2).unwrap();
        let v = |id| t.vertex_by_id(id).unwrap();
        assert_eq!(edges(&t.path(v(4), v(5)).unwrap()), vec![4, 5]);
        assert_eq!(edges(&t.path(v(1), v(7)).unwrap()), vec![3, 7]);
        assert_eq!(edges(&t.path(v(4), v(7)).unwrap()), vec![4, 2, 3, 7]);
        assert_eq!(edges(&t.path(v(7), v(1)).unwrap()), vec![7, 3]);
        assert_eq!(t.path(v(3), v(3)), Err(Error::SameVertex(3)));
    }

    #[test]
    fn levels() {
        let t2 = CompleteKTree::new(2, 2).unwrap();
        let t3 = CompleteKTree::new(3, 2).unwrap();
        assert_eq!(ids(&t2.level_vertices(2).unwrap()), vec![4, 5, 6, 7]);
        assert_eq!(ids(&t2.level_vertices(0).unwrap()), vec![1]);
        assert_eq!(ids(&t3.level_vertices(1).unwrap()), vec![2, 3, 4]);
        assert!(t3.level_vertices(3).is_err());
    }

    fn tree_and_two_ids() -> impl Strategy<Value = (CompleteKTree, u64, u64)> {
        (2u64..=6, 1u32..=4).prop_flat_map(|(k, r)| {
            let t = CompleteKTree::new(k, r).unwrap();
            let n = t.n();
            (Just(t), 1..=n, 1..=n)
        })
    }

    proptest! {
        #[test]
        fn locate_inverts_vertex_id((t, a, _b) in tree_and_two_ids()) {
            let (level, offset) = t.locate(a).unwrap();
            prop_assert_eq!(t.vertex_id(level, offset).unwrap(), a);
        }

        #[test]
        fn parent_child_consistent((t, a, _b) in tree_and_two_ids()) {
            let v = t.vertex_by_id(a).unwrap();
            if v.level() > 0 {
                let p = t.parent(v).unwrap();
                prop_assert_eq!(p.level() + 1, v.level());
                prop_assert!(t.children(p).unwrap().contains(&v));
            }
        }

        #[test]
        fn path_reverses_and_has_lca_length((t, a, b) in tree_and_two_ids()) {
            prop_assume!(a != b);
            let (va, vb) = (t.vertex_by_id(a).unwrap(), t.vertex_by_id(b).unwrap());
            let mut ab = t.path(va, vb).unwrap();
            let ba = t.path(vb, va).unwrap();
            let c = t.lca(va, vb);
            prop_assert_eq!(ab.len() as u32, va.level() + vb.level() - 2 * c.level());
            ab.reverse();
            prop_assert_eq!(ab, ba);
        }
    }

    #[test]
    fn level_sizes_sum_to_n() {
        for k in 2..=8 {
            for r in 1..=5 {
                let t = CompleteKTree::new(k, r).unwrap();
                let total: usize = (0..=r).map(|j| t.level_vertices(j).unwrap().len()).sum();
                assert_eq!(total as u64, t.n());
            }
        }
    }
}
