use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Family, SamplerConfig};
use super::kernel::Kernel;
use super::state::ChainState;
use super::store::{SampleStore, StoreShape};
use crate::error::{Error, Result};
use crate::graph::SpatialGraph;
use crate::likelihood::{conditional_poisson_loglik, marginal_pig_loglik, Dataset};

/// Generator for chain `chain` of a run: the config seed picks the key, the
/// chain index the stream, so chains never share draws.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Runs `cfg.n_iter` sweeps from the default initial state and keeps every
/// `thin`-th post-burn-in draw.
pub fn run_chain<R: Rng + ?Sized>(
    graph: &SpatialGraph,
    data: &Dataset,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<SampleStore> {
    cfg.validate()?;
    let state = ChainState::initial(graph, data, cfg, rng)?;
    run_chain_from(graph, data, cfg, state, rng)
}

/// As [`run_chain`] starting from a caller-supplied state.
pub fn run_chain_from<R: Rng + ?Sized>(
    graph: &SpatialGraph,
    data: &Dataset,
    cfg: &SamplerConfig,
    mut state: ChainState,
    rng: &mut R,
) -> Result<SampleStore> {
    cfg.validate()?;
    state.check_invariants()?;
    let mut store = SampleStore::new(StoreShape {
        n_areas: data.n_areas(),
        n_seasons: data.n_seasons(),
        q: cfg.effective_q(),
        n_weeks: data.n_weeks(),
        p_mean: data.p_mean(),
        p_disp: data.p_disp(),
    });
    let mut kernel = Kernel::new(graph, data, cfg, &state);
    let n_burn = cfg.n_burn();
    if n_burn == 0 {
        kernel.end_burn_in();
    }
    for m in 0..cfg.n_iter {
        kernel.sweep(&mut state, rng).map_err(|e| annotate(e, m, &state))?;
        if cfg.check_invariants {
            state.check_invariants().map_err(|e| annotate(e, m, &state))?;
        }
        if m + 1 == n_burn {
            kernel.end_burn_in();
        }
        if cfg.is_retained(m) {
            let (marginal, conditional) = if cfg.store_loglik {
                pointwise_loglik(data, cfg, &state)?
            } else {
                (Vec::new(), Vec::new())
            };
            store.push(&state, marginal, conditional);
        }
    }
    store.acceptance = kernel.acceptance();
    Ok(store)
}

/// Pointwise log-likelihoods of the current state: marginal (heterogeneity
/// integrated out) and conditional on `z`.
pub fn pointwise_loglik(data: &Dataset, cfg: &SamplerConfig, st: &ChainState) -> Result<(Vec<f64>, Vec<f64>)> {
    let theta = st.theta_area();
    let conditional = conditional_poisson_loglik(data, &st.beta, &theta, &st.z);
    let marginal = match cfg.family {
        Family::Pig => marginal_pig_loglik(data, &st.beta, &theta, &st.delta)?,
        Family::Poisson => conditional.clone(),
    };
    Ok((marginal, conditional))
}

fn annotate(e: Error, sweep: usize, st: &ChainState) -> Error {
    match e {
        Error::Invariant(msg) => Error::Invariant(format!("sweep {sweep}: {msg}")),
        Error::NonFinite(what) => {
            Error::Invariant(format!("sweep {sweep}: non-finite {what}\n{}", st.diagnostic()))
        }
        other => other,
    }
}
