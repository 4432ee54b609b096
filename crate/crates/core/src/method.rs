//! Uniform per-edge output across the sampler and the baselines.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::baselines::{self, BaselineResult};
use crate::error::{Error, Result};
use crate::estimators::{shrinkage, ShrinkageInput};
use crate::graph_stream::{Edge, EdgeStream, VertexId};
use crate::sampler::{self, EdgeRecord, Mode, SampleResult, SamplerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Adaptive priority sampling, raw inverse-probability estimate.
    Aps,
    /// Adaptive priority sampling with the shrinkage estimate.
    ApsJs,
    /// Uniform reservoir with Horvitz-Thompson weights.
    Uniform,
    Triest,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Aps, Method::ApsJs, Method::Uniform, Method::Triest];

    pub fn name(self) -> &'static str {
        match self {
            Method::Aps => "aps",
            Method::ApsJs => "aps-js",
            Method::Uniform => "uniform",
            Method::Triest => "triest",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// One output row. The APS-only columns are `None` for baselines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateRow {
    pub edge: Edge,
    pub n_hat: f64,
    pub w: Option<f64>,
    pub var: Option<f64>,
    pub cov: Option<f64>,
    pub lambda: Option<f64>,
    /// Shrinkage estimate for APS rows; equal to `n_hat` for baselines.
    pub eta: f64,
}

impl EstimateRow {
    /// Shrinks a finished record toward its weight.
    pub fn from_record(r: &EdgeRecord) -> EstimateRow {
        let out = shrinkage(ShrinkageInput {
            n_hat: r.acc.n_hat,
            w: r.w,
            var_n: r.acc.var,
            cov_nw: r.acc.cov,
        });
        EstimateRow {
            edge: r.edge,
            n_hat: r.acc.n_hat,
            w: Some(r.w),
            var: Some(r.acc.var),
            cov: Some(r.acc.cov),
            lambda: Some(out.lambda),
            eta: out.eta,
        }
    }
}

/// Final estimates of one run, ascending by arrival.
#[derive(Clone, Debug, PartialEq)]
pub struct MotifEstimateTable {
    pub method: Method,
    pub seed: u64,
    pub rows: Vec<EstimateRow>,
}

impl MotifEstimateTable {
    /// `method` picks which column [`Self::estimate`] reports; it must be
    /// `Aps` or `ApsJs`.
    pub fn from_sample(result: &SampleResult, method: Method) -> MotifEstimateTable {
        debug_assert!(matches!(method, Method::Aps | Method::ApsJs));
        MotifEstimateTable {
            method,
            seed: result.seed,
            rows: result
                .records
                .iter()
                .map(EstimateRow::from_record)
                .collect(),
        }
    }

    pub fn from_baseline(result: &BaselineResult) -> MotifEstimateTable {
        MotifEstimateTable {
            method: result.method,
            seed: result.seed,
            rows: result
                .rows
                .iter()
                .map(|r| EstimateRow {
                    edge: r.edge,
                    n_hat: r.n_hat,
                    w: None,
                    var: None,
                    cov: None,
                    lambda: None,
                    eta: r.n_hat,
                })
                .collect(),
        }
    }

    /// The value the method reports for a row.
    pub fn estimate(&self, row: &EstimateRow) -> f64 {
        match self.method {
            Method::ApsJs => row.eta,
            _ => row.n_hat,
        }
    }

    /// Reported estimate per vertex pair.
    pub fn by_key(&self) -> HashMap<(VertexId, VertexId), f64> {
        self.rows
            .iter()
            .map(|r| (r.edge.key(), self.estimate(r)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Everything needed to produce one run's table, apart from the stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSpec {
    pub method: Method,
    pub capacity: usize,
    pub phi: f64,
    pub mode: Mode,
}

impl RunSpec {
    pub fn new(method: Method, capacity: usize) -> RunSpec {
        RunSpec {
            method,
            capacity,
            phi: 1.0,
            mode: Mode::Adaptive,
        }
    }

    pub fn sampler_config(&self, seed: u64) -> SamplerConfig {
        SamplerConfig::new(self.capacity, seed)
            .with_phi(self.phi)
            .with_mode(self.mode)
    }

    pub fn run(&self, stream: &EdgeStream, seed: u64) -> Result<MotifEstimateTable> {
        match self.method {
            Method::Aps | Method::ApsJs => {
                let res = sampler::run(stream, &self.sampler_config(seed))?;
                Ok(MotifEstimateTable::from_sample(&res, self.method))
            }
            Method::Uniform => Ok(MotifEstimateTable::from_baseline(
                &baselines::uniform_ht_run(stream, self.capacity, seed)?,
            )),
            Method::Triest => Ok(MotifEstimateTable::from_baseline(&baselines::triest_run(
                stream,
                self.capacity,
                seed,
            )?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("aps_js".parse::<Method>(), Err(Error::Config(_))));
    }

    #[test]
    fn full_sample_rows_are_exact() {
        let s = synth::complete_graph(5);
        for m in Method::ALL {
            let t = RunSpec::new(m, s.len()).run(&s, 3).unwrap();
            assert_eq!(t.len(), 10);
            for r in &t.rows {
                assert_eq!(t.estimate(r), 3.0, "{m}");
                assert_eq!(r.eta, 3.0);
            }
        }
    }

    #[test]
    fn baseline_rows_have_no_moments() {
        let s = synth::complete_graph(4);
        let t = RunSpec::new(Method::Triest, 6).run(&s, 0).unwrap();
        assert!(t.rows.iter().all(|r| r.w.is_none() && r.lambda.is_none()));
    }
}
