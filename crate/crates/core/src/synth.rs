//! Small synthetic graphs. All generators are deterministic in their seed
//! (ChaCha8) and return streams in generation order.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph_stream::EdgeStream;

pub fn complete_graph(n: u64) -> EdgeStream {
    EdgeStream::from_pairs((0..n).flat_map(|a| (a + 1..n).map(move |b| (a + 1, b + 1))))
}

pub fn path_graph(n: u64) -> EdgeStream {
    EdgeStream::from_pairs((1..n).map(|a| (a, a + 1)))
}

/// Two triangles sharing vertex 3 but no edge, plus a separate triangle.
pub fn bowtie_plus_triangle() -> EdgeStream {
    EdgeStream::from_pairs([
        (1, 2),
        (2, 3),
        (1, 3),
        (3, 4),
        (4, 5),
        (3, 5),
        (10, 11),
        (11, 12),
        (10, 12),
    ])
}

/// G(n, p): every pair independently with probability `p`.
pub fn erdos_renyi(n: u64, p: f64, seed: u64) -> EdgeStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen::<f64>() < p {
                pairs.push((a, b));
            }
        }
    }
    EdgeStream::from_pairs(pairs)
}

/// Preferential attachment with triad formation (Holme-Kim). Starts from a
/// clique on `per_vertex + 1` vertices; each later vertex attaches
/// `per_vertex` edges, the first by degree-proportional choice, each further
/// one closing a triangle with a neighbor of the previous target with
/// probability `triad_p` and otherwise by degree-proportional choice.
/// `triad_p = 0` is plain Barabasi-Albert.
pub fn preferential_attachment(n: u64, per_vertex: u64, triad_p: f64, seed: u64) -> EdgeStream {
    assert!(per_vertex >= 1 && n > per_vertex);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut endpoints: Vec<u64> = Vec::new();
    let mut adj: Vec<Vec<u64>> = vec![Vec::new(); n as usize];
    let mut link = |a: u64, b: u64, adj: &mut Vec<Vec<u64>>| {
        pairs.push((a, b));
        endpoints.push(a);
        endpoints.push(b);
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    };
    let seed_size = per_vertex + 1;
    for a in 0..seed_size {
        for b in a + 1..seed_size {
            link(a, b, &mut adj);
        }
    }
    for v in seed_size..n {
        let mut chosen: HashSet<u64> = HashSet::new();
        let mut last: Option<u64> = None;
        while (chosen.len() as u64) < per_vertex {
            let mut target = None;
            if let Some(prev) = last {
                if rng.gen::<f64>() < triad_p {
                    let candidates: Vec<u64> = adj[prev as usize]
                        .iter()
                        .copied()
                        .filter(|&x| x != v && !chosen.contains(&x))
                        .collect();
                    if !candidates.is_empty() {
                        target = Some(candidates[rng.gen_range(0..candidates.len())]);
                    }
                }
            }
            let target = match target {
                Some(t) => t,
                None => {
                    let t = endpoints[rng.gen_range(0..endpoints.len())];
                    if chosen.contains(&t) {
                        continue;
                    }
                    t
                }
            };
            chosen.insert(target);
            last = Some(target);
            pairs.push((target, v));
            endpoints.push(target);
            endpoints.push(v);
            adj[target as usize].push(v);
            adj[v as usize].push(target);
        }
    }
    EdgeStream::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(complete_graph(4).len(), 6);
        assert_eq!(path_graph(5).len(), 4);
        assert_eq!(bowtie_plus_triangle().len(), 9);
        let pa = preferential_attachment(200, 4, 0.5, 1);
        assert_eq!(pa.len() as u64, 10 + (200 - 5) * 4);
        assert_eq!(pa.vertices().len(), 200);
    }

    #[test]
    fn deterministic() {
        assert_eq!(erdos_renyi(30, 0.3, 4), erdos_renyi(30, 0.3, 4));
        assert_eq!(
            preferential_attachment(100, 3, 0.4, 2),
            preferential_attachment(100, 3, 0.4, 2)
        );
    }
}
