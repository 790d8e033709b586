//! Fixtures shared by the criterion benches.

use rand_chacha::ChaCha8Rng;
use stppm_core::mcmc::{chain_rng, ChainState, Family, Kernel, SamplerConfig};
use stppm_core::synthetic::{builtin_scenario, generate_dataset};
use stppm_core::{Dataset, SpatialGraph};

/// Overdispersed 6×6 grid, three seasons of 13 weeks.
pub fn grid_fixture() -> (SpatialGraph, Dataset) {
    let spec = builtin_scenario("sim1-sce1-over").expect("builtin").with_seasons(3);
    let (graph, data, _) = generate_dataset(&spec, &mut chain_rng(7, 0)).expect("generate");
    (graph, data)
}

pub fn config(family: Family) -> SamplerConfig {
    SamplerConfig {
        family,
        store_loglik: false,
        check_invariants: false,
        ..Default::default()
    }
}

/// A state after 200 warm-up sweeps, so partitions are no longer trivial.
pub fn warm_state(graph: &SpatialGraph, data: &Dataset, cfg: &SamplerConfig) -> (ChainState, ChaCha8Rng) {
    let mut rng = chain_rng(3, 0);
    let mut st = ChainState::initial(graph, data, cfg, &mut rng).expect("initial state");
    let mut kernel = Kernel::new(graph, data, cfg, &st);
    for _ in 0..200 {
        kernel.sweep(&mut st, &mut rng).expect("sweep");
    }
    (st, rng)
}
