//! Uniform-reservoir baselines.
//!
//! Both keep a classic reservoir: arrival `t <= m` is always kept, later
//! arrivals are kept with probability `m / t` and replace a uniformly chosen
//! resident. Triangles are detected against the reservoir as it stood before
//! the arrival. At that moment any fixed pair of older edges is co-resident
//! with probability `q(t) = min(1, m (m - 1) / ((t - 1) (t - 2)))`.
//!
//! * [`triest_run`] adds `1 / q(t)` to all three edges of every detected
//!   triangle, whether or not the arriving edge is kept.
//! * [`uniform_ht_run`] counts a triangle only when the arriving edge is kept
//!   as well, an event of probability `q(t) * min(1, m / t)`, and adds the
//!   inverse of that.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph_stream::{Edge, EdgeId, EdgeStream};
use crate::method::Method;
use crate::motif_detect::{find_completed_triangles, AdjacencyIndex};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineRow {
    pub edge: Edge,
    pub n_hat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineResult {
    /// Final reservoir, ascending by arrival.
    pub rows: Vec<BaselineRow>,
    pub method: Method,
    pub seed: u64,
    /// Rows that left the reservoir (or never entered it) with a nonzero
    /// estimate, frozen at that moment. Filled only when requested.
    pub evicted: Vec<BaselineRow>,
}

/// Joint residence probability of two fixed older edges at arrival `t`.
pub fn pair_inclusion(m: usize, t: u64) -> f64 {
    if t <= m as u64 + 1 {
        return 1.0;
    }
    let (m, t) = (m as f64, t as f64);
    ((m * (m - 1.0)) / ((t - 1.0) * (t - 2.0))).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Discipline {
    Uniform,
    Triest,
}

struct UniformReservoir {
    capacity: usize,
    rows: Vec<BaselineRow>,
    slot_of: HashMap<EdgeId, usize>,
    adjacency: AdjacencyIndex,
    rng: ChaCha8Rng,
    keep_evicted: bool,
    evicted: Vec<BaselineRow>,
}

impl UniformReservoir {
    fn new(capacity: usize, seed: u64, keep_evicted: bool) -> Result<Self> {
        if capacity < 3 {
            return Err(Error::Config(format!(
                "sample size {capacity} too small: a triangle needs 3 co-resident edges"
            )));
        }
        Ok(UniformReservoir {
            capacity,
            rows: Vec::with_capacity(capacity),
            slot_of: HashMap::with_capacity(capacity),
            adjacency: AdjacencyIndex::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            keep_evicted,
            evicted: Vec::new(),
        })
    }

    fn process(&mut self, e: &Edge, discipline: Discipline) -> Result<()> {
        let t = e.arrival.0;
        let m = self.capacity;
        let found = find_completed_triangles(&self.adjacency, e);

        // Slot the arrival takes, if kept. Drawn before any update so both
        // disciplines consume the generator identically.
        let victim = if self.rows.len() < m {
            Some(None)
        } else if self.rng.gen_range(0..t) < m as u64 {
            Some(Some(self.rng.gen_range(0..m)))
        } else {
            None
        };

        let q = pair_inclusion(m, t);
        let increment = match discipline {
            Discipline::Triest => Some(1.0 / q),
            Discipline::Uniform => victim.map(|_| 1.0 / (q * (m as f64 / t as f64).min(1.0))),
        };

        let mut closing = BaselineRow {
            edge: *e,
            n_hat: 0.0,
        };
        if let Some(inc) = increment {
            for tri in &found.triangles {
                for id in [tri.first, tri.second] {
                    let slot = self.slot_of[&id];
                    self.rows[slot].n_hat += inc;
                }
                closing.n_hat += inc;
            }
        }

        match victim {
            None => {
                if self.keep_evicted && closing.n_hat != 0.0 {
                    self.evicted.push(closing);
                }
            }
            Some(None) => {
                self.slot_of.insert(e.arrival, self.rows.len());
                self.rows.push(closing);
                self.adjacency.insert_edge(e)?;
            }
            Some(Some(slot)) => {
                let gone = std::mem::replace(&mut self.rows[slot], closing);
                self.slot_of.remove(&gone.edge.arrival);
                self.adjacency.remove_edge(&gone.edge)?;
                if self.keep_evicted {
                    self.evicted.push(gone);
                }
                self.slot_of.insert(e.arrival, slot);
                self.adjacency.insert_edge(e)?;
            }
        }
        Ok(())
    }

    fn finish(mut self, method: Method, seed: u64) -> BaselineResult {
        self.rows.sort_by_key(|r| r.edge.arrival);
        BaselineResult {
            rows: self.rows,
            method,
            seed,
            evicted: self.evicted,
        }
    }
}

fn run_discipline(
    stream: &EdgeStream,
    m: usize,
    seed: u64,
    keep_evicted: bool,
    discipline: Discipline,
) -> Result<BaselineResult> {
    let mut r = UniformReservoir::new(m, seed, keep_evicted)?;
    for e in stream {
        r.process(e, discipline)?;
    }
    let method = match discipline {
        Discipline::Uniform => Method::Uniform,
        Discipline::Triest => Method::Triest,
    };
    Ok(r.finish(method, seed))
}

pub fn uniform_ht_run(stream: &EdgeStream, m: usize, seed: u64) -> Result<BaselineResult> {
    run_discipline(stream, m, seed, false, Discipline::Uniform)
}

pub fn triest_run(stream: &EdgeStream, m: usize, seed: u64) -> Result<BaselineResult> {
    run_discipline(stream, m, seed, false, Discipline::Triest)
}

/// Like [`uniform_ht_run`] / [`triest_run`] but keeping evicted rows, for
/// Monte-Carlo checks of the lifetime estimates.
pub fn run_keeping_evicted(
    method: Method,
    stream: &EdgeStream,
    m: usize,
    seed: u64,
) -> Result<BaselineResult> {
    let discipline = match method {
        Method::Uniform => Discipline::Uniform,
        Method::Triest => Discipline::Triest,
        other => return Err(Error::Config(format!("{other} is not a baseline"))),
    };
    run_discipline(stream, m, seed, true, discipline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn pair_inclusion_values() {
        assert_eq!(pair_inclusion(4, 3), 1.0);
        assert_eq!(pair_inclusion(4, 5), 1.0);
        assert_eq!(pair_inclusion(4, 6), 12.0 / 20.0);
        assert_eq!(pair_inclusion(10, 102), 90.0 / (101.0 * 100.0));
    }

    #[test]
    fn full_sample_is_exact() {
        let s = synth::complete_graph(6);
        for f in [uniform_ht_run, triest_run] {
            let res = f(&s, s.len(), 1).unwrap();
            assert_eq!(res.rows.len(), 15);
            assert!(res.rows.iter().all(|r| r.n_hat == 4.0));
        }
    }

    #[test]
    fn triangle_free_is_zero() {
        let s = synth::path_graph(50);
        for f in [uniform_ht_run, triest_run] {
            let res = f(&s, 10, 4).unwrap();
            assert_eq!(res.rows.len(), 10);
            assert!(res.rows.iter().all(|r| r.n_hat == 0.0));
        }
    }

    #[test]
    fn occupancy_and_errors() {
        let s = synth::erdos_renyi(30, 0.3, 1);
        let res = triest_run(&s, 20, 2).unwrap();
        assert_eq!(res.rows.len(), 20);
        assert!(res
            .rows
            .windows(2)
            .all(|w| w[0].edge.arrival < w[1].edge.arrival));
        assert!(matches!(uniform_ht_run(&s, 2, 0), Err(Error::Config(_))));
        assert!(run_keeping_evicted(Method::Aps, &s, 5, 0).is_err());
    }

    #[test]
    fn same_seed_same_result() {
        let s = synth::erdos_renyi(40, 0.2, 3);
        assert_eq!(
            uniform_ht_run(&s, 25, 9).unwrap(),
            uniform_ht_run(&s, 25, 9).unwrap()
        );
    }

    /// Lifetime estimates averaged over runs, per arrival index.
    fn lifetime_means(method: Method, s: &EdgeStream, m: usize, runs: u64) -> Vec<f64> {
        let mut sums = vec![0.0; s.len()];
        for seed in 0..runs {
            let res = run_keeping_evicted(method, s, m, seed).unwrap();
            for r in res.rows.iter().chain(&res.evicted) {
                sums[r.edge.arrival.0 as usize - 1] += r.n_hat;
            }
        }
        sums.iter().map(|x| x / runs as f64).collect()
    }

    #[test]
    fn k4_lifetime_means_near_two() {
        let s = synth::complete_graph(4);
        for method in [Method::Uniform, Method::Triest] {
            let means = lifetime_means(method, &s, 4, 20_000);
            for (i, mean) in means.iter().enumerate() {
                assert!((mean - 2.0).abs() < 0.1, "{method} edge {i}: {mean}");
            }
        }
    }
}
