//! Sampled-graph adjacency and enumeration of triangles closed by an arriving
//! edge.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph_stream::{Edge, EdgeId, VertexId};

/// Symmetric neighbor index over the edges currently held in a sample.
#[derive(Clone, Debug, Default)]
pub struct AdjacencyIndex {
    adj: HashMap<VertexId, HashMap<VertexId, EdgeId>>,
    edges: usize,
}

impl AdjacencyIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_edge(&mut self, e: &Edge) -> Result<()> {
        if self.contains(e.a, e.b) {
            return Err(Error::invariant(format!(
                "edge ({}, {}) already indexed",
                e.a, e.b
            )));
        }
        self.adj.entry(e.a).or_default().insert(e.b, e.arrival);
        self.adj.entry(e.b).or_default().insert(e.a, e.arrival);
        self.edges += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, e: &Edge) -> Result<()> {
        let missing = || Error::invariant(format!("edge ({}, {}) not indexed", e.a, e.b));
        remove_half(&mut self.adj, e.a, e.b).ok_or_else(missing)?;
        remove_half(&mut self.adj, e.b, e.a).ok_or_else(missing)?;
        self.edges -= 1;
        Ok(())
    }

    pub fn contains(&self, a: VertexId, b: VertexId) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains_key(&b))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(&v).map_or(0, HashMap::len)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        self.adj
            .get(&v)
            .into_iter()
            .flat_map(|n| n.iter().map(|(&w, &id)| (w, id)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges == 0
    }
}

fn remove_half(
    adj: &mut HashMap<VertexId, HashMap<VertexId, EdgeId>>,
    from: VertexId,
    to: VertexId,
) -> Option<EdgeId> {
    let nbrs = adj.get_mut(&from)?;
    let id = nbrs.remove(&to)?;
    if nbrs.is_empty() {
        adj.remove(&from);
    }
    Some(id)
}

/// A triangle completed by `closing`. `first` arrived before `second`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub first: EdgeId,
    pub second: EdgeId,
    pub closing: EdgeId,
    /// The vertex opposite the closing edge.
    pub apex: VertexId,
}

impl Triangle {
    pub fn edges(&self) -> [EdgeId; 3] {
        [self.first, self.second, self.closing]
    }
}

#[derive(Clone, Debug, Default)]
pub struct TriangleSet {
    /// Ascending by apex vertex id.
    pub triangles: Vec<Triangle>,
    /// Number of neighbor lookups made against the larger side.
    pub probes: usize,
}

impl TriangleSet {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

/// Triangles formed by `k` with edges already in `index`. `k` itself must not
/// be indexed yet.
///
/// Scans the smaller of the two endpoint neighborhoods and probes the other,
/// so the cost is O(min(deg a, deg b)) expected.
pub fn find_completed_triangles(index: &AdjacencyIndex, k: &Edge) -> TriangleSet {
    let (small, large) = if index.degree(k.a) <= index.degree(k.b) {
        (k.a, k.b)
    } else {
        (k.b, k.a)
    };
    let Some(large_nbrs) = index.adj.get(&large) else {
        return TriangleSet::default();
    };
    let mut set = TriangleSet::default();
    for (apex, id_small) in index.neighbors(small) {
        set.probes += 1;
        if let Some(&id_large) = large_nbrs.get(&apex) {
            let (first, second) = if id_small < id_large {
                (id_small, id_large)
            } else {
                (id_large, id_small)
            };
            set.triangles.push(Triangle {
                first,
                second,
                closing: k.arrival,
                apex,
            });
        }
    }
    set.triangles.sort_unstable_by_key(|t| t.apex);
    set
}

/// Extension point for motif classes other than triangles. Only the triangle
/// pattern is implemented; every estimator update downstream is specific to
/// it.
pub trait MotifPattern {
    type Instance;

    fn completed_by(&self, index: &AdjacencyIndex, arriving: &Edge) -> Vec<Self::Instance>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TrianglePattern;

impl MotifPattern for TrianglePattern {
    type Instance = Triangle;

    fn completed_by(&self, index: &AdjacencyIndex, arriving: &Edge) -> Vec<Triangle> {
        find_completed_triangles(index, arriving).triangles
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn edge(a: u64, b: u64, t: u64) -> Edge {
        Edge::new(a, b, t).unwrap()
    }

    fn k4() -> Vec<Edge> {
        [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| edge(a, b, i as u64 + 1))
            .collect()
    }

    #[test]
    fn insert_is_symmetric() {
        let mut idx = AdjacencyIndex::new();
        idx.insert_edge(&edge(1, 2, 1)).unwrap();
        assert!(idx.contains(VertexId(1), VertexId(2)));
        assert!(idx.contains(VertexId(2), VertexId(1)));
        assert_eq!(idx.degree(VertexId(1)), 1);
        assert_eq!(idx.edge_count(), 1);
    }

    #[test]
    fn insert_then_remove_is_empty() {
        let mut idx = AdjacencyIndex::new();
        let e = edge(1, 2, 1);
        idx.insert_edge(&e).unwrap();
        idx.remove_edge(&e).unwrap();
        assert!(idx.is_empty());
        assert_eq!(idx.degree(VertexId(1)), 0);
        assert!(idx.adj.is_empty());
    }

    #[test]
    fn duplicate_and_missing_are_errors() {
        let mut idx = AdjacencyIndex::new();
        let e = edge(1, 2, 1);
        idx.insert_edge(&e).unwrap();
        assert!(matches!(
            idx.insert_edge(&edge(2, 1, 5)),
            Err(Error::Invariant(_))
        ));
        assert!(matches!(
            idx.remove_edge(&edge(3, 4, 2)),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn k4_degrees() {
        let mut idx = AdjacencyIndex::new();
        for e in k4() {
            idx.insert_edge(&e).unwrap();
        }
        for v in 1..=4 {
            assert_eq!(idx.degree(VertexId(v)), 3);
        }
    }

    #[test]
    fn single_closure() {
        let mut idx = AdjacencyIndex::new();
        idx.insert_edge(&edge(1, 2, 1)).unwrap();
        idx.insert_edge(&edge(1, 3, 2)).unwrap();
        let set = find_completed_triangles(&idx, &edge(2, 3, 3));
        assert_eq!(
            set.triangles,
            vec![Triangle {
                first: EdgeId(1),
                second: EdgeId(2),
                closing: EdgeId(3),
                apex: VertexId(1),
            }]
        );
    }

    #[test]
    fn disjoint_edge_closes_nothing() {
        let mut idx = AdjacencyIndex::new();
        idx.insert_edge(&edge(1, 2, 1)).unwrap();
        assert!(find_completed_triangles(&idx, &edge(3, 4, 2)).is_empty());
    }

    #[test]
    fn k4_minus_edge_closes_two() {
        let mut idx = AdjacencyIndex::new();
        for e in k4().iter().take(5) {
            idx.insert_edge(e).unwrap();
        }
        let set = find_completed_triangles(&idx, &edge(3, 4, 6));
        let apices: Vec<u64> = set.triangles.iter().map(|t| t.apex.0).collect();
        assert_eq!(apices, vec![1, 2]);
        // Apex 1: edges (1,3)=2 and (1,4)=3. Apex 2: (2,3)=4, (2,4)=5.
        assert_eq!(
            (set.triangles[0].first, set.triangles[0].second),
            (EdgeId(2), EdgeId(3))
        );
        assert_eq!(
            (set.triangles[1].first, set.triangles[1].second),
            (EdgeId(4), EdgeId(5))
        );
    }

    #[test]
    fn probes_scan_smaller_side() {
        let mut idx = AdjacencyIndex::new();
        let mut t = 0;
        for w in 10..40 {
            t += 1;
            idx.insert_edge(&edge(1, w, t)).unwrap();
        }
        t += 1;
        idx.insert_edge(&edge(2, 10, t)).unwrap();
        t += 1;
        idx.insert_edge(&edge(2, 11, t)).unwrap();
        let set = find_completed_triangles(&idx, &edge(1, 2, t + 1));
        assert_eq!(set.len(), 2);
        assert_eq!(set.probes, 2);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pairs in proptest::collection::vec((0u64..50, 0u64..50), 0..200),
            qa in 0u64..50,
            qb in 0u64..50,
        ) {
            prop_assume!(qa != qb);
            let mut idx = AdjacencyIndex::new();
            let mut edges = Vec::new();
            for (i, &(x, y)) in pairs.iter().enumerate() {
                if let Some(e) = Edge::new(x, y, i as u64 + 1) {
                    if (e.a.0 == qa.min(qb) && e.b.0 == qa.max(qb)) || idx.contains(e.a, e.b) {
                        continue;
                    }
                    idx.insert_edge(&e).unwrap();
                    edges.push(e);
                }
            }
            let k = Edge::new(qa, qb, 10_000).unwrap();
            let has = |x: u64, y: u64| edges.iter().any(|e| e.a.0 == x.min(y) && e.b.0 == x.max(y));
            let brute = (0..50u64)
                .filter(|&w| w != qa && w != qb && has(qa, w) && has(qb, w))
                .count();
            let set = find_completed_triangles(&idx, &k);
            prop_assert_eq!(set.len(), brute);
            let min_deg = idx.degree(VertexId(qa)).min(idx.degree(VertexId(qb)));
            prop_assert!(set.probes <= min_deg);
        }
    }
}
