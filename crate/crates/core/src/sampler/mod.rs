//! Adaptive priority sampling.
//!
//! Each arriving edge draws `u` uniform on (0, 1] and starts with weight
//! `phi`. It is provisionally added to the reservoir; every sampled triangle
//! it closes bumps the weight of all three edges by one and feeds the
//! estimators. Ranks are `w / u`, and whenever the reservoir holds `m + 1`
//! edges the minimum-rank edge is discarded and the threshold
//! `z* = max(z*, discarded rank)` is raised.
//!
//! Inclusion probabilities `p = min(p, w / z*)` are refreshed lazily: right
//! before a resident edge's weight is incremented, and once more when the
//! result is emitted. Because weights never decrease, this yields the same
//! values as refreshing every resident edge at every step against the
//! per-step minimum rank, which [`eager_probability_trace`] computes for
//! testing.

mod heap;

use std::collections::HashMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use heap::{IndexedMinHeap, RankKey};

use crate::error::{Error, Result};
use crate::estimators::{apply_triangle_updates, Accumulators, CompletedTriangle};
use crate::graph_stream::{Edge, EdgeId, EdgeStream};
use crate::motif_detect::{find_completed_triangles, AdjacencyIndex};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Adaptive,
    /// Resident edges keep the weight they were given on arrival.
    NonAdaptive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub capacity: usize,
    pub phi: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Keep evicted records (frozen at eviction) in the result.
    pub keep_evicted: bool,
    /// Record every detected triangle with the probabilities it used.
    pub log_triangles: bool,
}

impl SamplerConfig {
    pub fn new(capacity: usize, seed: u64) -> Self {
        SamplerConfig {
            capacity,
            phi: 1.0,
            mode: Mode::Adaptive,
            seed,
            keep_evicted: false,
            log_triangles: false,
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn keep_evicted(mut self, keep: bool) -> Self {
        self.keep_evicted = keep;
        self
    }

    pub fn log_triangles(mut self, log: bool) -> Self {
        self.log_triangles = log;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRecord {
    pub edge: Edge,
    pub u: f64,
    pub w: f64,
    pub p: f64,
    pub rank: f64,
    pub acc: Accumulators,
}

impl EdgeRecord {
    pub fn n_hat(&self) -> f64 {
        self.acc.n_hat
    }

    pub fn var_acc(&self) -> f64 {
        self.acc.var
    }

    pub fn cov_acc(&self) -> f64 {
        self.acc.cov
    }

    fn refresh_probability(&mut self, z_star: f64) {
        if z_star > 0.0 {
            self.p = self.p.min(self.w / z_star);
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub edges_seen: u64,
    pub triangles_detected: u64,
    pub evictions: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrivalReport {
    pub triangles: usize,
    pub evicted: Option<EdgeId>,
    /// Minimum rank over the provisional sample, when an eviction happened.
    pub min_rank: Option<f64>,
}

/// Draws from (0, 1]: a 64-bit integer `x` maps to `(x + 1) / 2^64`.
fn draw_unit(rng: &mut ChaCha8Rng) -> f64 {
    const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;
    (rng.next_u64() as f64 + 1.0) / TWO_POW_64
}

#[derive(Clone, Debug)]
pub struct Reservoir {
    config: SamplerConfig,
    slots: Vec<Option<EdgeRecord>>,
    free: Vec<usize>,
    slot_of: HashMap<EdgeId, usize>,
    heap: IndexedMinHeap,
    z_star: f64,
    adjacency: AdjacencyIndex,
    clock: u64,
    rng: ChaCha8Rng,
    counters: Counters,
    evicted: Vec<EdgeRecord>,
    triangle_log: Vec<CompletedTriangle>,
}

impl Reservoir {
    /// Empty reservoir. The `u` draws come from ChaCha8 seeded with
    /// `seed_from_u64(config.seed)`, one draw per arrival.
    pub fn new(config: SamplerConfig) -> Result<Self> {
        if config.capacity < 3 {
            return Err(Error::Config(format!(
                "sample size {} too small: a triangle needs 3 co-resident edges",
                config.capacity
            )));
        }
        if !(config.phi > 0.0 && config.phi.is_finite()) {
            return Err(Error::Config(format!(
                "initial weight {} must be positive",
                config.phi
            )));
        }
        let slots = config.capacity + 1;
        Ok(Reservoir {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            slots: vec![None; slots],
            free: (0..slots).rev().collect(),
            slot_of: HashMap::with_capacity(slots),
            heap: IndexedMinHeap::with_slots(slots),
            z_star: 0.0,
            adjacency: AdjacencyIndex::new(),
            clock: 0,
            counters: Counters::default(),
            evicted: Vec::new(),
            triangle_log: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn z_star(&self) -> f64 {
        self.z_star
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.slot_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot_of.is_empty()
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn adjacency(&self) -> &AdjacencyIndex {
        &self.adjacency
    }

    pub fn records(&self) -> impl Iterator<Item = &EdgeRecord> {
        self.slots.iter().flatten()
    }

    pub fn record(&self, id: EdgeId) -> Option<&EdgeRecord> {
        self.slot_of.get(&id).and_then(|&s| self.slots[s].as_ref())
    }

    /// The heap's minimum agrees with a scan of all records and the heap keys
    /// agree with the records' ranks.
    pub fn heap_is_consistent(&self) -> bool {
        if !self.heap.is_consistent() || self.heap.len() != self.len() {
            return false;
        }
        let keys_match = self
            .slot_of
            .values()
            .all(|&s| self.slots[s].as_ref().map(|r| r.rank) == Some(self.heap.key(s).rank));
        let scan_min = self.records().map(|r| r.rank).fold(f64::INFINITY, f64::min);
        let heap_min = self.heap.peek().map_or(f64::INFINITY, |(_, k)| k.rank);
        keys_match && scan_min == heap_min
    }

    pub fn process_edge(&mut self, e: &Edge) -> Result<ArrivalReport> {
        let triangles = self.admit(e)?;
        let evicted = self.evict_if_over()?;
        Ok(ArrivalReport {
            triangles,
            evicted: evicted.map(|(id, _)| id),
            min_rank: evicted.map(|(_, rank)| rank),
        })
    }

    /// Provisional insertion and all triangle-driven updates, without the
    /// eviction.
    fn admit(&mut self, e: &Edge) -> Result<usize> {
        if e.arrival.0 != self.clock + 1 {
            return Err(Error::invariant(format!(
                "edge arrived at {} but clock is {}",
                e.arrival, self.clock
            )));
        }
        if self.adjacency.contains(e.a, e.b) {
            return Err(Error::invariant(format!(
                "duplicate arrival of ({}, {})",
                e.a, e.b
            )));
        }
        self.clock += 1;
        self.counters.edges_seen += 1;

        let u = draw_unit(&mut self.rng);
        let phi = self.config.phi;
        let delta = find_completed_triangles(&self.adjacency, e);

        let slot = self
            .free
            .pop()
            .ok_or_else(|| Error::invariant("no free reservoir slot"))?;
        self.slots[slot] = Some(EdgeRecord {
            edge: *e,
            u,
            w: phi,
            p: 1.0,
            rank: phi / u,
            acc: Accumulators::default(),
        });
        self.slot_of.insert(e.arrival, slot);
        self.adjacency.insert_edge(e)?;

        let adaptive = self.config.mode == Mode::Adaptive;
        for tri in &delta.triangles {
            let s_first = self.slot_of[&tri.first];
            let s_second = self.slot_of[&tri.second];
            let [first, second, closing] =
                self.slots
                    .get_disjoint_mut([s_first, s_second, slot])
                    .map_err(|_| Error::invariant("triangle edges share a slot"))?;
            let (first, second, closing) = (
                first.as_mut().expect("resident slot"),
                second.as_mut().expect("resident slot"),
                closing.as_mut().expect("resident slot"),
            );

            first.refresh_probability(self.z_star);
            second.refresh_probability(self.z_star);
            if adaptive {
                first.w += 1.0;
                second.w += 1.0;
            }
            closing.w += 1.0;

            apply_triangle_updates(
                &mut first.acc,
                first.p,
                &mut second.acc,
                second.p,
                &mut closing.acc,
            )?;
            if self.config.log_triangles {
                self.triangle_log.push(CompletedTriangle {
                    triangle: *tri,
                    p_first: first.p,
                    p_second: second.p,
                });
            }

            if adaptive {
                first.rank = first.w / first.u;
                second.rank = second.w / second.u;
                self.heap.increase_rank(s_first, first.rank);
                self.heap.increase_rank(s_second, second.rank);
            }
        }
        self.counters.triangles_detected += delta.len() as u64;

        let rec = self.slots[slot].as_mut().expect("just inserted");
        rec.rank = rec.w / rec.u;
        self.heap.push(
            slot,
            RankKey {
                rank: rec.rank,
                arrival: e.arrival.0,
            },
        );
        Ok(delta.len())
    }

    /// Discards the minimum-rank edge once the provisional sample exceeds
    /// capacity, returning its id and rank.
    fn evict_if_over(&mut self) -> Result<Option<(EdgeId, f64)>> {
        if self.len() <= self.config.capacity {
            return Ok(None);
        }
        let (slot, key) = self
            .heap
            .pop()
            .ok_or_else(|| Error::invariant("heap empty while over capacity"))?;
        self.z_star = self.z_star.max(key.rank);
        let rec = self.slots[slot]
            .take()
            .ok_or_else(|| Error::invariant("heap pointed at an empty slot"))?;
        self.slot_of.remove(&rec.edge.arrival);
        self.adjacency.remove_edge(&rec.edge)?;
        self.free.push(slot);
        self.counters.evictions += 1;
        let id = rec.edge.arrival;
        if self.config.keep_evicted {
            self.evicted.push(rec);
        }
        Ok(Some((id, key.rank)))
    }

    /// Final lazy probability refresh and hand-off of the sample.
    pub fn finish(mut self) -> SampleResult {
        let z_star = self.z_star;
        let mut records: Vec<EdgeRecord> = self.slots.drain(..).flatten().collect();
        for r in &mut records {
            r.refresh_probability(z_star);
        }
        records.sort_by_key(|r| r.edge.arrival);
        SampleResult {
            records,
            z_star,
            counters: self.counters,
            seed: self.config.seed,
            mode: self.config.mode,
            evicted: self.evicted,
            triangle_log: self.triangle_log,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleResult {
    /// Resident edges, ascending by arrival.
    pub records: Vec<EdgeRecord>,
    pub z_star: f64,
    pub counters: Counters,
    pub seed: u64,
    pub mode: Mode,
    /// Populated only with [`SamplerConfig::keep_evicted`], in eviction order.
    pub evicted: Vec<EdgeRecord>,
    /// Populated only with [`SamplerConfig::log_triangles`], in detection order.
    pub triangle_log: Vec<CompletedTriangle>,
}

pub fn run(stream: &EdgeStream, config: &SamplerConfig) -> Result<SampleResult> {
    let mut reservoir = Reservoir::new(config.clone())?;
    for e in stream {
        reservoir.process_edge(e)?;
    }
    Ok(reservoir.finish())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EagerStep {
    pub t: u64,
    /// Minimum rank over the provisional sample; 0 while under capacity.
    pub z: f64,
    /// Cumulative threshold after this step.
    pub z_star: f64,
    /// Probability of every edge resident after this step, by arrival.
    pub probabilities: Vec<(EdgeId, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EagerTrace {
    pub steps: Vec<EagerStep>,
}

impl EagerTrace {
    pub fn final_probabilities(&self) -> &[(EdgeId, f64)] {
        self.steps.last().map_or(&[], |s| &s.probabilities)
    }
}

/// Reference probabilities from the per-step recursion
/// `p(i, t) = min(p(i, t-1), w(i, t) / z_t)`, with `z_t` found by scanning
/// every provisional record. O(m) per arrival; intended for tests.
pub fn eager_probability_trace(stream: &EdgeStream, config: &SamplerConfig) -> Result<EagerTrace> {
    let mut reservoir = Reservoir::new(config.clone())?;
    let mut eager: HashMap<EdgeId, f64> = HashMap::new();
    let mut steps = Vec::with_capacity(stream.len());
    for e in stream {
        reservoir.admit(e)?;
        eager.insert(e.arrival, 1.0);
        let mut z = 0.0;
        if reservoir.len() > reservoir.config.capacity {
            z = reservoir
                .records()
                .map(|r| r.rank)
                .fold(f64::INFINITY, f64::min);
            for r in reservoir.records() {
                let p = eager.get_mut(&r.edge.arrival).expect("tracked");
                *p = p.min(r.w / z);
            }
            let (gone, rank) = reservoir.evict_if_over()?.expect("over capacity");
            debug_assert_eq!(rank, z);
            eager.remove(&gone);
        }
        let mut probabilities: Vec<(EdgeId, f64)> = eager.iter().map(|(&id, &p)| (id, p)).collect();
        probabilities.sort_by_key(|&(id, _)| id);
        steps.push(EagerStep {
            t: e.arrival.0,
            z,
            z_star: reservoir.z_star,
            probabilities,
        });
    }
    Ok(EagerTrace { steps })
}
