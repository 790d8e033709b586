//! Metropolis-within-Gibbs sampler over trees, partitions, cluster levels,
//! heterogeneity, regression coefficients and the latent autoregressive
//! series.

mod chain;
mod config;
mod gig;
mod kernel;
mod state;
mod store;

pub use chain::{chain_rng, pointwise_loglik, run_chain, run_chain_from};
pub use config::{Block, Family, SamplerConfig, WaicLikelihood};
pub use gig::sample_gig;
pub use kernel::{
    log_target_beta, log_target_c, log_target_delta, log_target_kappa, log_target_u, log_target_upsilon,
    update_rho, update_w, update_zeta, Acceptance, AcceptanceReport, Kernel, MhBlock,
};
pub use state::{ChainState, SeasonState};
pub use store::{
    read_loglik, write_loglik, SampleStore, StoreShape, AREA_FILE, LATENT_FILE, LOGLIK_CONDITIONAL_FILE,
    LOGLIK_FILE, LOGLIK_MAGIC, PARTITIONS_FILE, SCALARS_FILE,
};
