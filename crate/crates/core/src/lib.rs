//! Bayesian spatio-temporal product partition model for seasonal count data.
//!
//! Partitions of a fixed map are generated season by season by cutting
//! edges of random spanning trees; edge-removal probabilities follow a
//! beta-binomial autoregression. Counts are Poisson, optionally with
//! inverse-Gaussian heterogeneity.

pub mod dist;
pub mod error;
pub mod graph;
pub mod likelihood;
pub mod logprob;
pub mod mcmc;
pub mod postprocess;
pub mod prior;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{EdgeIndicators, Partition, SpanningTree, SpatialGraph};
pub use likelihood::{Dataset, DatasetParts};
pub use logprob::LogProb;
pub use mcmc::{Family, SampleStore, SamplerConfig, StoreShape, WaicLikelihood};
pub use postprocess::{PosteriorSummary, SummaryOptions, Waic};
pub use synthetic::{ScenarioSpec, Truth};

/// Engine version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
