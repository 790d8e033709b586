use std::fmt::Write as _;

use rand::Rng;

use super::config::SamplerConfig;
use crate::error::{Error, Result};
use crate::graph::{
    is_compatible, partition_from_indicators, random_spanning_tree, EdgeIndicators, Partition,
    SpanningTree, SpatialGraph,
};
use crate::likelihood::Dataset;
use crate::prior::LatentSeries;

/// Tree, edge bits, induced partition and cluster levels of one season slot.
/// Horizon slots carry no `θ*`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeasonState {
    pub tree: SpanningTree,
    pub bits: EdgeIndicators,
    pub partition: Partition,
    pub theta: Vec<f64>,
}

impl SeasonState {
    fn single_cluster(tree: SpanningTree, theta: Vec<f64>) -> Self {
        let n = tree.n_areas();
        let bits = EdgeIndicators::all_kept(tree.n_tree_edges());
        SeasonState {
            tree,
            bits,
            partition: Partition::single(n),
            theta,
        }
    }

    /// Rebuilds the partition after the bits changed.
    pub fn sync_partition(&mut self) {
        self.partition = partition_from_indicators(&self.tree, &self.bits);
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }
}

/// Complete parameter vector of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    /// `S + q` slots; the first `S` carry data.
    pub seasons: Vec<SeasonState>,
    /// `z_is`, area-major (`i * S + s`).
    pub z: Vec<f64>,
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
    pub latent: LatentSeries,
}

impl ChainState {
    /// One cluster per season with `θ* = 1`, `z ≡ 1`, `β = δ = 0`, hyper
    /// parameters at their prior means and trees drawn at random; config
    /// overrides take precedence.
    pub fn initial<R: Rng + ?Sized>(
        graph: &SpatialGraph,
        data: &Dataset,
        cfg: &SamplerConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if graph.n_areas() != data.n_areas() {
            return Err(Error::Dimension {
                what: "areas in graph and dataset",
                expected: graph.n_areas(),
                got: data.n_areas(),
            });
        }
        let q = cfg.effective_q();
        let n_seasons = data.n_seasons();
        let upsilon = cfg.init_upsilon.unwrap_or(cfg.a_upsilon / cfg.b_upsilon);
        let kappa = cfg.init_kappa.unwrap_or(cfg.a_kappa / cfg.b_kappa);
        let zeta = cfg.init_zeta.unwrap_or(cfg.a_zeta / cfg.b_zeta);
        let mut latent = LatentSeries::initial(n_seasons, q, upsilon, kappa, zeta);
        if let Some(rho) = cfg.init_rho {
            latent.rho.fill(rho);
        }
        if let Some(w) = cfg.init_w {
            latent.w = w;
        }

        let seasons = (0..n_seasons + q)
            .map(|j| {
                let theta = if j < n_seasons { vec![1.0] } else { Vec::new() };
                SeasonState::single_cluster(random_spanning_tree(graph, rng), theta)
            })
            .collect();

        let beta = init_vector("init_beta", cfg.init_beta.as_deref(), data.p_mean())?;
        let delta = init_vector("init_delta", cfg.init_delta.as_deref(), data.p_disp())?;
        let state = ChainState {
            seasons,
            z: vec![1.0; data.n_areas() * n_seasons],
            beta,
            delta,
            latent,
        };
        state.check_invariants()?;
        Ok(state)
    }

    pub fn n_data_seasons(&self) -> usize {
        self.latent.n_seasons
    }

    /// `θ*` of each area's cluster, area-major over data seasons.
    pub fn theta_area(&self) -> Vec<f64> {
        let s_len = self.n_data_seasons();
        let n = self.seasons.first().map_or(0, |s| s.partition.n_areas());
        let mut out = vec![0.0; n * s_len];
        for (s, season) in self.seasons[..s_len].iter().enumerate() {
            for i in 0..n {
                out[i * s_len + s] = season.theta[season.partition.label(i)];
            }
        }
        out
    }

    /// Compatibility of every (tree, partition) pair, bits consistent with
    /// the partition, one `θ*` per cluster, latent constraints.
    pub fn check_invariants(&self) -> Result<()> {
        for (j, season) in self.seasons.iter().enumerate() {
            if !is_compatible(&season.tree, &season.partition) {
                return Err(Error::Invariant(format!(
                    "slot {j}: partition is not compatible with its tree\n{}",
                    self.diagnostic()
                )));
            }
            if partition_from_indicators(&season.tree, &season.bits) != season.partition {
                return Err(Error::Invariant(format!(
                    "slot {j}: edge bits disagree with the partition\n{}",
                    self.diagnostic()
                )));
            }
            if j < self.n_data_seasons() && season.theta.len() != season.k() {
                return Err(Error::Invariant(format!(
                    "slot {j}: {} cluster levels for {} clusters\n{}",
                    season.theta.len(),
                    season.k(),
                    self.diagnostic()
                )));
            }
        }
        if let Some(k) = self.z.iter().position(|&z| !(z > 0.0 && z.is_finite())) {
            return Err(Error::Invariant(format!("z[{k}] = {} is not positive", self.z[k])));
        }
        self.latent.validate().map_err(|e| {
            Error::Invariant(format!("latent series: {e}\n{}", self.diagnostic()))
        })
    }

    /// Human-readable dump for invariant failures.
    pub fn diagnostic(&self) -> String {
        let mut out = String::new();
        let l = &self.latent;
        let _ = writeln!(
            out,
            "upsilon={} kappa={} zeta={} w={} beta={:?} delta={:?}",
            l.upsilon, l.kappa, l.zeta, l.w, self.beta, self.delta
        );
        for (j, season) in self.seasons.iter().enumerate() {
            let _ = writeln!(
                out,
                "slot {j}: rho={} u={} c={} tree={:?} bits={:?} labels={:?} theta={:?}",
                l.rho.get(j).copied().unwrap_or(f64::NAN),
                l.u.get(j).copied().unwrap_or(0),
                l.c.get(j).copied().unwrap_or(0),
                season.tree.edges(),
                season.bits.bits(),
                season.partition.labels(),
                season.theta
            );
        }
        out
    }
}

fn init_vector(name: &'static str, given: Option<&[f64]>, len: usize) -> Result<Vec<f64>> {
    match given {
        None => Ok(vec![0.0; len]),
        Some(v) if v.len() != len => Err(Error::Dimension {
            what: name,
            expected: len,
            got: v.len(),
        }),
        Some(v) if v.iter().any(|x| !x.is_finite()) => Err(Error::NonFinite(name)),
        Some(v) => Ok(v.to_vec()),
    }
}
