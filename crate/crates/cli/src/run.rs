use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stppm_core::likelihood::{load_data_dir, LoadOptions};
use stppm_core::mcmc::{AcceptanceReport, SampleStore, SamplerConfig, StoreShape};
use stppm_core::{Dataset, SpatialGraph};

use crate::failure::{CliResult, Failure};
use crate::output::read_json;

pub const META_FILE: &str = "meta.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub chain: usize,
    pub dir: String,
    pub n_draws: usize,
    pub wall_seconds: f64,
    pub acceptance: AcceptanceReport,
}

/// Everything needed to reload a fitted run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub engine_version: String,
    pub data_dir: PathBuf,
    pub seed: u64,
    pub config: SamplerConfig,
    pub shape: StoreShape,
    pub chains: Vec<ChainMeta>,
}

pub fn chain_dir_name(chain: usize) -> String {
    format!("chain_{chain}")
}

pub struct LoadedRun {
    pub meta: RunMeta,
    pub graph: SpatialGraph,
    pub data: Dataset,
    /// Draws of all chains pooled in chain order.
    pub store: SampleStore,
}

pub fn load_data(dir: &Path, cfg: &SamplerConfig) -> CliResult<(SpatialGraph, Dataset)> {
    Ok(load_data_dir(
        dir,
        LoadOptions {
            disp_intercept: cfg.disp_intercept,
        },
    )?)
}

pub fn load_run(run_dir: &Path, data_dir: Option<&Path>) -> CliResult<LoadedRun> {
    if !run_dir.is_dir() {
        return Err(Failure::validation(format!("{}: run directory not found", run_dir.display())));
    }
    let meta: RunMeta = read_json(&run_dir.join(META_FILE))?;
    let data_dir = data_dir.unwrap_or(&meta.data_dir);
    let (graph, data) = load_data(data_dir, &meta.config)?;
    if data.n_areas() != meta.shape.n_areas || data.n_weeks() != meta.shape.n_weeks {
        return Err(Failure::validation(format!(
            "{}: data has {} areas x {} weeks but the run was fitted on {} x {}",
            data_dir.display(),
            data.n_areas(),
            data.n_weeks(),
            meta.shape.n_areas,
            meta.shape.n_weeks
        )));
    }
    let mut pooled: Option<SampleStore> = None;
    for chain in &meta.chains {
        let mut store = SampleStore::read_dir(&run_dir.join(&chain.dir), meta.shape)?;
        store.acceptance = chain.acceptance.clone();
        match pooled.as_mut() {
            None => pooled = Some(store),
            Some(p) => {
                add_acceptance(&mut p.acceptance, &store.acceptance);
                p.append(store)?;
            }
        }
    }
    let store = pooled.ok_or_else(|| Failure::validation(format!("{}: run has no chains", run_dir.display())))?;
    Ok(LoadedRun {
        meta,
        graph,
        data,
        store,
    })
}

/// Sums tallies; scales keep the first chain's values.
fn add_acceptance(into: &mut AcceptanceReport, other: &AcceptanceReport) {
    for (a, b) in [
        (&mut into.upsilon, &other.upsilon),
        (&mut into.kappa, &other.kappa),
        (&mut into.beta, &other.beta),
        (&mut into.delta, &other.delta),
        (&mut into.c, &other.c),
        (&mut into.u, &other.u),
    ] {
        a.proposed += b.proposed;
        a.accepted += b.accepted;
    }
}
