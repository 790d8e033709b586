//! Spanning-tree partition prior and the beta-autoregressive chain on the
//! per-season edge-removal probabilities.
//!
//! Seasons are indexed from zero here; slot `j` of a [`LatentSeries`] is
//! season `j + 1` in one-based notation. Windows reaching before the first
//! season read zeros.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};
use crate::graph::{
    is_compatible, partition_from_indicators, random_spanning_tree, EdgeIndicators, Partition,
    SpanningTree, SpatialGraph,
};
use crate::logprob::LogProb;

/// Gamma hyperpriors (shape, rate) for `υ`, `κ`, `ζ`, plus the
/// autoregressive order `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionPriorHyper {
    pub a_upsilon: f64,
    pub b_upsilon: f64,
    pub a_kappa: f64,
    pub b_kappa: f64,
    pub a_zeta: f64,
    pub b_zeta: f64,
    pub q: usize,
}

impl Default for PartitionPriorHyper {
    fn default() -> Self {
        PartitionPriorHyper {
            a_upsilon: 10.0,
            b_upsilon: 1.0,
            a_kappa: 100.0,
            b_kappa: 1.0,
            a_zeta: 1.0,
            b_zeta: 1.0,
            q: 1,
        }
    }
}

impl PartitionPriorHyper {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("a_upsilon", self.a_upsilon),
            ("b_upsilon", self.b_upsilon),
            ("a_kappa", self.a_kappa),
            ("b_kappa", self.b_kappa),
            ("a_zeta", self.a_zeta),
            ("b_zeta", self.b_zeta),
        ];
        for (name, v) in checks {
            positive(name, v)?;
        }
        Ok(())
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// Latent variables of the autoregressive chain over `S + q` season slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentSeries {
    pub n_seasons: usize,
    pub q: usize,
    pub rho: Vec<f64>,
    pub u: Vec<u64>,
    pub c: Vec<u64>,
    pub w: f64,
    pub zeta: f64,
    pub upsilon: f64,
    pub kappa: f64,
}

impl LatentSeries {
    /// Deterministic starting point: `ρ` at `υ / (υ + κ)`, no latent counts,
    /// `w = 1/2`.
    pub fn initial(n_seasons: usize, q: usize, upsilon: f64, kappa: f64, zeta: f64) -> Self {
        let len = n_seasons + q;
        LatentSeries {
            n_seasons,
            q,
            rho: vec![upsilon / (upsilon + kappa); len],
            u: vec![0; len],
            c: vec![0; len],
            w: 0.5,
            zeta,
            upsilon,
            kappa,
        }
    }

    /// Number of slots, `S + q`.
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.n_seasons + self.q;
        for (what, got) in [("rho", self.rho.len()), ("u", self.u.len()), ("c", self.c.len())] {
            if got != len {
                return Err(Error::Dimension {
                    what,
                    expected: len,
                    got,
                });
            }
        }
        if let Some(j) = (0..len).find(|&j| self.u[j] > self.c[j]) {
            return Err(Error::Invariant(format!(
                "u[{j}] = {} exceeds c[{j}] = {}",
                self.u[j], self.c[j]
            )));
        }
        if self.rho.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::param("rho", "entries must lie in (0, 1)"));
        }
        if !(self.w > 0.0 && self.w < 1.0) {
            return Err(Error::param("w", "must lie in (0, 1)"));
        }
        positive("zeta", self.zeta)?;
        positive("upsilon", self.upsilon)?;
        positive("kappa", self.kappa)
    }

    /// `(Σ u, Σ c)` over slots `j - q ..= j` (slots before 0 read as zero).
    pub fn window_sums(&self, j: usize) -> (u64, u64) {
        let lo = j.saturating_sub(self.q);
        (self.u[lo..=j].iter().sum(), self.c[lo..=j].iter().sum())
    }

    /// Beta parameters of `ρ_j` given the latent counts.
    pub fn rho_beta_params(&self, j: usize) -> (f64, f64) {
        let (su, sc) = self.window_sums(j);
        (self.upsilon + su as f64, self.kappa + (sc - su) as f64)
    }

    /// Redraws `w`, then `u | c, w`, then `ρ | u, c`, keeping `υ`, `κ` and
    /// the counts `c`.
    pub fn redraw_given_counts<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.w = dist::beta(rng, self.upsilon, self.kappa);
        for j in 0..self.len() {
            self.u[j] = dist::binomial(rng, self.c[j], self.w);
        }
        for j in 0..self.len() {
            let (a, b) = self.rho_beta_params(j);
            self.rho[j] = dist::beta(rng, a, b);
        }
    }
}

/// `log P(π | T, ρ)`: `(k-1) log ρ + (n-k) log(1-ρ)` for compatible pairs.
pub fn log_partition_prior(
    partition: &Partition,
    tree: &SpanningTree,
    rho: f64,
) -> Result<LogProb> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", format!("must lie in (0, 1), got {rho}")));
    }
    if !is_compatible(tree, partition) {
        return Ok(LogProb::Impossible);
    }
    let n = partition.n_areas() as f64;
    let k = partition.k() as f64;
    Ok(LogProb::Finite((k - 1.0) * rho.ln() + (n - k) * (-rho).ln_1p()))
}

/// Mean and variance of the number of clusters when `ρ ~ Be(υ, κ)` and each
/// of the `n - 1` tree edges is removed independently with probability `ρ`.
pub fn cluster_count_prior_moments(n: usize, upsilon: f64, kappa: f64) -> (f64, f64) {
    let m = (n - 1) as f64;
    let s = upsilon + kappa;
    let mean = m * upsilon / s + 1.0;
    let var = m * upsilon * kappa * (s + m) / (s * s * (s + 1.0));
    (mean, var)
}

/// One cell of a prior-elicitation grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElicitationCell {
    pub upsilon: f64,
    pub kappa: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Cluster-count moments for every `(υ, κ)` combination, `υ` varying slowest.
pub fn elicitation_grid(n: usize, upsilons: &[f64], kappas: &[f64]) -> Vec<ElicitationCell> {
    let mut cells = Vec::with_capacity(upsilons.len() * kappas.len());
    for &upsilon in upsilons {
        for &kappa in kappas {
            let (mean, variance) = cluster_count_prior_moments(n, upsilon, kappa);
            cells.push(ElicitationCell {
                upsilon,
                kappa,
                mean,
                variance,
            });
        }
    }
    cells
}

/// Closed-form `corr(ρ_s, ρ_{s+l})` given fixed latent counts.
///
/// `s` is one-based and `c[0]` holds `c_1`; `c` must cover season `s + l`.
/// Counts shared by both windows are `c_{s-h}` for `h = 0 ..= q - l`, an
/// empty set once `l > q`.
pub fn rho_autocorrelation(
    s: usize,
    l: usize,
    q: usize,
    upsilon: f64,
    kappa: f64,
    c: &[u64],
) -> f64 {
    assert!(s >= 1 && l >= 1, "season and lag are one-based");
    assert!(s + l <= c.len(), "count vector must cover season s + l");
    let at = |t: isize| -> f64 {
        if t >= 1 {
            c[t as usize - 1] as f64
        } else {
            0.0
        }
    };
    let window = |t: usize| -> f64 { (0..=q).map(|h| at(t as isize - h as isize)).sum() };
    let shared: f64 = if l <= q {
        (0..=(q - l)).map(|h| at(s as isize - h as isize)).sum()
    } else {
        0.0
    };
    let ab = upsilon + kappa;
    let (cs, csl) = (window(s), window(s + l));
    (ab * shared + cs * csl) / ((ab + cs) * (ab + csl))
}

/// Draws `w`, `c`, `u` and `ρ` for fixed `υ`, `κ`, `ζ`.
pub fn sample_latents_given<R: Rng + ?Sized>(
    upsilon: f64,
    kappa: f64,
    zeta: f64,
    n_seasons: usize,
    q: usize,
    rng: &mut R,
) -> LatentSeries {
    let mut series = LatentSeries::initial(n_seasons, q, upsilon, kappa, zeta);
    for c in series.c.iter_mut() {
        *c = dist::poisson(rng, zeta);
    }
    series.redraw_given_counts(rng);
    series
}

/// Full hierarchical draw: `υ`, `κ`, `ζ` from their gamma hyperpriors, then
/// [`sample_latents_given`].
pub fn sample_prior_latents<R: Rng + ?Sized>(
    hyper: &PartitionPriorHyper,
    n_seasons: usize,
    rng: &mut R,
) -> LatentSeries {
    let upsilon = dist::gamma_rate(rng, hyper.a_upsilon, hyper.b_upsilon);
    let kappa = dist::gamma_rate(rng, hyper.a_kappa, hyper.b_kappa);
    let zeta = dist::gamma_rate(rng, hyper.a_zeta, hyper.b_zeta);
    sample_latents_given(upsilon, kappa, zeta, n_seasons, hyper.q, rng)
}

/// Removes each tree edge independently with probability `rho`.
pub fn prune_with_probability<R: Rng + ?Sized>(
    tree: &SpanningTree,
    rho: f64,
    rng: &mut R,
) -> EdgeIndicators {
    EdgeIndicators::new(
        (0..tree.n_tree_edges())
            .map(|_| dist::uniform(rng) >= rho)
            .collect(),
    )
}

/// Partitions drawn from the prior: per draw, fresh latents, then per season
/// a random spanning tree pruned with that season's `ρ`.
pub fn prior_predictive_partitions<R: Rng + ?Sized>(
    hyper: &PartitionPriorHyper,
    graph: &SpatialGraph,
    n_seasons: usize,
    n_draws: usize,
    rng: &mut R,
) -> Vec<Vec<Partition>> {
    (0..n_draws)
        .map(|_| {
            let latents = sample_prior_latents(hyper, n_seasons, rng);
            partitions_for(graph, &latents.rho[..n_seasons], rng)
        })
        .collect()
}

/// As [`prior_predictive_partitions`] with `υ`, `κ`, `ζ` held fixed.
#[allow(clippy::too_many_arguments)]
pub fn prior_predictive_partitions_given<R: Rng + ?Sized>(
    upsilon: f64,
    kappa: f64,
    zeta: f64,
    q: usize,
    graph: &SpatialGraph,
    n_seasons: usize,
    n_draws: usize,
    rng: &mut R,
) -> Vec<Vec<Partition>> {
    (0..n_draws)
        .map(|_| {
            let latents = sample_latents_given(upsilon, kappa, zeta, n_seasons, q, rng);
            partitions_for(graph, &latents.rho[..n_seasons], rng)
        })
        .collect()
}

fn partitions_for<R: Rng + ?Sized>(
    graph: &SpatialGraph,
    rho: &[f64],
    rng: &mut R,
) -> Vec<Partition> {
    rho.iter()
        .map(|&r| {
            let tree = random_spanning_tree(graph, rng);
            let bits = prune_with_probability(&tree, r, rng);
            partition_from_indicators(&tree, &bits)
        })
        .collect()
}
