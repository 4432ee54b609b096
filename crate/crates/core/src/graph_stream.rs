//! Edge-list ingestion and the canonical edge representation.
//!
//! Every downstream module consumes an [`EdgeStream`]: undirected, simple
//! (no self-loops, no repeated pairs), endpoints stored as `a < b`, and each
//! edge labelled by its 1-based arrival position.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Arrival position of an edge in the processed stream, starting at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u64);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub arrival: EdgeId,
}

impl Edge {
    /// Canonicalizes the endpoints. Returns `None` for a self-loop.
    pub fn new(x: u64, y: u64, arrival: u64) -> Option<Edge> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(Edge {
                a: VertexId(x),
                b: VertexId(y),
                arrival: EdgeId(arrival),
            }),
            std::cmp::Ordering::Greater => Some(Edge {
                a: VertexId(y),
                b: VertexId(x),
                arrival: EdgeId(arrival),
            }),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// The unordered vertex pair, used as the edge's identity across runs
    /// and permutations.
    pub fn key(&self) -> (VertexId, VertexId) {
        (self.a, self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamOrder {
    Native,
    Permuted { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamSource {
    pub path: Option<PathBuf>,
    pub order: StreamOrder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeStream {
    edges: Vec<Edge>,
    pub source: StreamSource,
    pub duplicates_dropped: usize,
    pub self_loops_dropped: usize,
}

impl EdgeStream {
    /// Builds a stream from raw vertex pairs with the same normalization as
    /// [`load_edge_list`]: self-loops and repeated undirected pairs dropped,
    /// first occurrence kept.
    pub fn from_pairs<I>(pairs: I) -> EdgeStream
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut builder = StreamBuilder::default();
        for (x, y) in pairs {
            builder.push(x, y);
        }
        builder.finish(None)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Edge> {
        self.edges.iter()
    }

    /// Distinct vertices touched by the stream, ascending.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = self.edges.iter().flat_map(|e| [e.a, e.b]).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

impl<'a> IntoIterator for &'a EdgeStream {
    type Item = &'a Edge;
    type IntoIter = std::slice::Iter<'a, Edge>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter()
    }
}

#[derive(Default)]
struct StreamBuilder {
    edges: Vec<Edge>,
    seen: HashSet<(VertexId, VertexId)>,
    duplicates: usize,
    self_loops: usize,
}

impl StreamBuilder {
    fn push(&mut self, x: u64, y: u64) {
        let arrival = self.edges.len() as u64 + 1;
        match Edge::new(x, y, arrival) {
            None => self.self_loops += 1,
            Some(e) => {
                if self.seen.insert(e.key()) {
                    self.edges.push(e);
                } else {
                    self.duplicates += 1;
                }
            }
        }
    }

    fn finish(self, path: Option<PathBuf>) -> EdgeStream {
        EdgeStream {
            edges: self.edges,
            source: StreamSource {
                path,
                order: StreamOrder::Native,
            },
            duplicates_dropped: self.duplicates,
            self_loops_dropped: self.self_loops,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    /// A line whose first non-blank character is one of these is skipped.
    pub comment_prefixes: Vec<char>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            comment_prefixes: vec!['#', '%'],
        }
    }
}

/// Parses a whitespace-separated edge list. Tokens after the first two on a
/// line are ignored.
pub fn load_edge_list<R: BufRead>(reader: R, opts: &ParseOptions) -> Result<EdgeStream> {
    let mut builder = StreamBuilder::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed
            .chars()
            .next()
            .is_some_and(|c| opts.comment_prefixes.contains(&c))
        {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let x = parse_vertex(tokens.next(), lineno)?;
        let y = parse_vertex(tokens.next(), lineno)?;
        builder.push(x, y);
    }
    Ok(builder.finish(None))
}

fn parse_vertex(token: Option<&str>, line: usize) -> Result<u64> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: "expected two vertex ids".to_string(),
    })?;
    token.parse::<u64>().map_err(|_| Error::Parse {
        line,
        message: format!("not a non-negative integer: {token:?}"),
    })
}

pub fn load_path(path: &Path, opts: &ParseOptions) -> Result<EdgeStream> {
    let file = File::open(path)?;
    let mut stream = load_edge_list(BufReader::new(file), opts)?;
    stream.source.path = Some(path.to_path_buf());
    Ok(stream)
}

/// Uniformly random reordering of the stream.
///
/// The shuffle is Fisher-Yates driven by ChaCha8 seeded through
/// `SeedableRng::seed_from_u64(seed)`, so a `(stream, seed)` pair always
/// yields the same order. Arrival indices are reassigned to the new
/// positions.
pub fn permute(stream: &EdgeStream, seed: u64) -> EdgeStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = stream.edges.clone();
    edges.shuffle(&mut rng);
    for (pos, e) in edges.iter_mut().enumerate() {
        e.arrival = EdgeId(pos as u64 + 1);
    }
    EdgeStream {
        edges,
        source: StreamSource {
            path: stream.source.path.clone(),
            order: StreamOrder::Permuted { seed },
        },
        duplicates_dropped: stream.duplicates_dropped,
        self_loops_dropped: stream.self_loops_dropped,
    }
}
