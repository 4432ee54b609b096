//! Ground truth: exact local triangle counts and a Monte-Carlo harness for
//! the sampler's estimators.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;

use crate::baselines;
use crate::error::{Error, Result};
use crate::graph_stream::{EdgeStream, VertexId};
use crate::method::Method;
use crate::sampler::{self, SamplerConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ExactCounts {
    /// Local count per edge, keyed by vertex pair.
    pub counts: BTreeMap<(VertexId, VertexId), u64>,
    pub triangles: u64,
    pub max_count: u64,
}

impl ExactCounts {
    pub fn get(&self, key: (VertexId, VertexId)) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Common-neighbor count of every edge over the full graph.
pub fn exact_local_counts(stream: &EdgeStream) -> ExactCounts {
    let mut adj: HashMap<VertexId, HashSet<VertexId>> = HashMap::new();
    for e in stream {
        adj.entry(e.a).or_default().insert(e.b);
        adj.entry(e.b).or_default().insert(e.a);
    }
    let counts: BTreeMap<_, _> = stream
        .iter()
        .map(|e| {
            let (na, nb) = (&adj[&e.a], &adj[&e.b]);
            let (small, large) = if na.len() <= nb.len() {
                (na, nb)
            } else {
                (nb, na)
            };
            (
                e.key(),
                small.iter().filter(|v| large.contains(v)).count() as u64,
            )
        })
        .collect();
    let sum: u64 = counts.values().sum();
    assert_eq!(sum % 3, 0, "local counts sum to {sum}, not a multiple of 3");
    ExactCounts {
        triangles: sum / 3,
        max_count: counts.values().copied().max().unwrap_or(0),
        counts,
    }
}

/// One-pass mean, variance and co-moment with a second variable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    m2_x: f64,
    m2_y: f64,
    c_xy: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / n;
        let dy = y - self.mean_y;
        self.mean_y += dy / n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        self.m2_x += other.m2_x + dx * dx * na * nb / n;
        self.m2_y += other.m2_y + dy * dy * na * nb / n;
        self.c_xy += other.c_xy + dx * dy * na * nb / n;
        self.mean_x += dx * nb / n;
        self.mean_y += dy * nb / n;
        self.n += other.n;
    }

    /// Sample variance of x (n - 1 denominator).
    pub fn var_x(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2_x / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn var_y(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2_y / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn cov_xy(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.c_xy / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean of x.
    pub fn se_x(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.var_x() / self.n as f64).sqrt()
        }
    }
}

/// What one run reports about one edge.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeObservation {
    /// Count estimate accumulated over the edge's whole stay in the sample,
    /// frozen if it was evicted.
    pub n_hat: f64,
    /// Sampling weight at the same moment (APS only; 0 otherwise).
    pub w: f64,
    pub var_acc: f64,
    pub cov_acc: f64,
    /// Whether the edge is in the final sample.
    pub resident: bool,
}

/// Per-edge statistics over `runs` runs.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSummary {
    pub key: (VertexId, VertexId),
    pub true_n: u64,
    /// (lifetime n_hat, lifetime w) over all runs.
    pub lifetime: Moments,
    /// (var_acc, cov_acc) over all runs.
    pub accumulators: Moments,
    /// (n_hat if resident else 0, unused) over all runs.
    pub entry_zero: Moments,
    /// Lifetime n_hat over the runs in which the edge is resident.
    pub resident: Moments,
}

impl EdgeSummary {
    fn new(key: (VertexId, VertexId), true_n: u64) -> Self {
        EdgeSummary {
            key,
            true_n,
            lifetime: Moments::default(),
            accumulators: Moments::default(),
            entry_zero: Moments::default(),
            resident: Moments::default(),
        }
    }

    fn push(&mut self, o: &EdgeObservation) {
        self.lifetime.push(o.n_hat, o.w);
        self.accumulators.push(o.var_acc, o.cov_acc);
        self.entry_zero
            .push(if o.resident { o.n_hat } else { 0.0 }, 0.0);
        if o.resident {
            self.resident.push(o.n_hat, o.w);
        }
    }

    fn merge(&mut self, other: &EdgeSummary) {
        self.lifetime.merge(&other.lifetime);
        self.accumulators.merge(&other.accumulators);
        self.entry_zero.merge(&other.entry_zero);
        self.resident.merge(&other.resident);
    }

    pub fn mc_mean(&self) -> f64 {
        self.lifetime.mean_x
    }

    pub fn mc_se(&self) -> f64 {
        self.lifetime.se_x()
    }

    pub fn empirical_var(&self) -> f64 {
        self.lifetime.var_x()
    }

    pub fn empirical_cov(&self) -> f64 {
        self.lifetime.cov_xy()
    }

    pub fn mean_var_acc(&self) -> f64 {
        self.accumulators.mean_x
    }

    pub fn mean_cov_acc(&self) -> f64 {
        self.accumulators.mean_y
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McSummary {
    /// One entry per stream edge, in arrival order.
    pub edges: Vec<EdgeSummary>,
    pub runs: u64,
    pub base_seed: u64,
}

/// Runs per rayon task; blocks are merged in block order.
const BLOCK: u64 = 256;

/// Generic harness: `observe(seed)` returns one observation per stream edge,
/// in arrival order. Seeds are `base_seed + i` for `i in 0..runs`.
pub fn monte_carlo_with<F>(
    stream: &EdgeStream,
    runs: u64,
    base_seed: u64,
    observe: F,
) -> Result<McSummary>
where
    F: Fn(u64) -> Result<Vec<EdgeObservation>> + Sync,
{
    if runs < 2 {
        return Err(Error::Config(format!("need at least 2 runs, got {runs}")));
    }
    let exact = exact_local_counts(stream);
    let fresh = || -> Vec<EdgeSummary> {
        stream
            .iter()
            .map(|e| EdgeSummary::new(e.key(), exact.get(e.key())))
            .collect()
    };
    let blocks: Vec<u64> = (0..runs.div_ceil(BLOCK)).collect();
    let partials: Vec<Vec<EdgeSummary>> = blocks
        .par_iter()
        .map(|&b| {
            let mut acc = fresh();
            for i in b * BLOCK..((b + 1) * BLOCK).min(runs) {
                let obs = observe(base_seed.wrapping_add(i))?;
                if obs.len() != acc.len() {
                    return Err(Error::invariant(
                        "observation count differs from stream length",
                    ));
                }
                for (s, o) in acc.iter_mut().zip(&obs) {
                    s.push(o);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut edges = fresh();
    for part in &partials {
        for (s, p) in edges.iter_mut().zip(part) {
            s.merge(p);
        }
    }
    Ok(McSummary {
        edges,
        runs,
        base_seed,
    })
}

/// Monte-Carlo summary of the adaptive sampler. Evicted records are kept
/// frozen so every edge's lifetime estimate is observed; edges that were
/// never sampled into a triangle report zeros.
pub fn monte_carlo(
    config: &SamplerConfig,
    stream: &EdgeStream,
    runs: u64,
    base_seed: u64,
) -> Result<McSummary> {
    let n = stream.len();
    monte_carlo_with(stream, runs, base_seed, |seed| {
        let cfg = SamplerConfig {
            seed,
            keep_evicted: true,
            ..config.clone()
        };
        let res = sampler::run(stream, &cfg)?;
        let mut obs = vec![EdgeObservation::default(); n];
        for (r, resident) in res
            .records
            .iter()
            .map(|r| (r, true))
            .chain(res.evicted.iter().map(|r| (r, false)))
        {
            obs[r.edge.arrival.0 as usize - 1] = EdgeObservation {
                n_hat: r.acc.n_hat,
                w: r.w,
                var_acc: r.acc.var,
                cov_acc: r.acc.cov,
                resident,
            };
        }
        Ok(obs)
    })
}

/// Monte-Carlo summary of a uniform-reservoir baseline.
pub fn monte_carlo_baseline(
    method: Method,
    capacity: usize,
    stream: &EdgeStream,
    runs: u64,
    base_seed: u64,
) -> Result<McSummary> {
    let n = stream.len();
    monte_carlo_with(stream, runs, base_seed, |seed| {
        let res = baselines::run_keeping_evicted(method, stream, capacity, seed)?;
        let mut obs = vec![EdgeObservation::default(); n];
        for (r, resident) in res
            .rows
            .iter()
            .map(|r| (r, true))
            .chain(res.evicted.iter().map(|r| (r, false)))
        {
            obs[r.edge.arrival.0 as usize - 1] = EdgeObservation {
                n_hat: r.n_hat,
                resident,
                ..EdgeObservation::default()
            };
        }
        Ok(obs)
    })
}
