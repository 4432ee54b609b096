//! Adaptive priority sampling over edge streams.
//!
//! A fixed-size reservoir keeps edges with probability proportional to the
//! number of sampled triangles they close, and every retained edge carries an
//! unbiased inverse-probability estimate of its local triangle count together
//! with running estimates of that count's variance and of its covariance with
//! the sampling weight. Those two moments feed a shrinkage combination of the
//! estimate and the raw weight.
//!
//! Module map:
//!
//! * [`graph_stream`]: edge-list parsing, canonical edges, seeded permutation.
//! * [`motif_detect`]: sampled adjacency and triangle enumeration.
//! * [`sampler`]: the reservoir, its rank heap and the per-arrival update.
//! * [`estimators`]: count/variance/covariance increments and shrinkage.
//! * [`baselines`]: uniform reservoir (Horvitz-Thompson) and Triest-style runs.
//! * [`oracle`]: exact local counts and the Monte-Carlo harness.
//! * [`eval`]: MSE, relative spectral norm and top-k curves.
//! * [`synth`]: small synthetic graph generators used by tests and sweeps.

pub mod baselines;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod graph_stream;
pub mod method;
pub mod motif_detect;
pub mod oracle;
pub mod sampler;
pub mod synth;

pub use error::{Error, Result};
pub use graph_stream::{Edge, EdgeId, EdgeStream, VertexId};
pub use method::{EstimateRow, Method, MotifEstimateTable};
