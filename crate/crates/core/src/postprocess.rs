//! Posterior summaries: WAIC, Rand indices, loss-based point estimates of
//! the seasonal partitions, dispersion flags and moment ratios.

use std::collections::HashMap;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Partition, SpatialGraph};
use crate::likelihood::{dispersion_param, Dataset};
use crate::mcmc::{AcceptanceReport, Family, SampleStore, WaicLikelihood};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waic {
    /// `-2 (lppd - p_waic)`.
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
}

/// WAIC on the deviance scale from a `draws × observations` matrix of
/// pointwise log-likelihoods. The penalty uses the sample variance.
pub fn waic(loglik: &[Vec<f64>]) -> Result<Waic> {
    let n_draws = loglik.len();
    if n_draws < 2 {
        return Err(Error::param("loglik", format!("WAIC needs at least 2 draws, got {n_draws}")));
    }
    let n_obs = loglik[0].len();
    if let Some(bad) = loglik.iter().find(|r| r.len() != n_obs) {
        return Err(Error::Dimension {
            what: "log-likelihood row",
            expected: n_obs,
            got: bad.len(),
        });
    }
    let mut lppd = 0.0;
    let mut p_waic = 0.0;
    let mut col = vec![0.0; n_draws];
    for t in 0..n_obs {
        for (d, row) in loglik.iter().enumerate() {
            col[d] = row[t];
        }
        let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::NonFinite("pointwise log-likelihood"));
        }
        let sum_exp: f64 = col.iter().map(|v| (v - max).exp()).sum();
        lppd += max + (sum_exp / n_draws as f64).ln();
        let mean = col.iter().sum::<f64>() / n_draws as f64;
        p_waic += col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_draws - 1) as f64;
    }
    Ok(Waic {
        waic: -2.0 * (lppd - p_waic),
        lppd,
        p_waic,
    })
}

fn contingency(a: &Partition, b: &Partition) -> Result<Vec<Vec<usize>>> {
    if a.n_areas() != b.n_areas() {
        return Err(Error::Dimension {
            what: "partition size",
            expected: a.n_areas(),
            got: b.n_areas(),
        });
    }
    let mut table = vec![vec![0usize; b.k()]; a.k()];
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        table[la][lb] += 1;
    }
    Ok(table)
}

fn pairs(m: usize) -> f64 {
    (m * m.saturating_sub(1)) as f64 / 2.0
}

/// Share of area pairs on which the two partitions agree.
pub fn rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    let n = a.n_areas();
    if n < 2 {
        return Err(Error::param("partition", "Rand index needs at least 2 areas"));
    }
    let table = contingency(a, b)?;
    let both: f64 = table.iter().flatten().map(|&m| pairs(m)).sum();
    let in_a: f64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let in_b: f64 = (0..b.k()).map(|j| pairs(table.iter().map(|r| r[j]).sum())).sum();
    let total = pairs(n);
    Ok((total + 2.0 * both - in_a - in_b) / total)
}

/// Hubert-Arabie adjusted Rand index; 1 when both partitions are trivial
/// and equal.
pub fn adjusted_rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    let n = a.n_areas();
    if n < 2 {
        return Err(Error::param("partition", "Rand index needs at least 2 areas"));
    }
    let table = contingency(a, b)?;
    let both: f64 = table.iter().flatten().map(|&m| pairs(m)).sum();
    let in_a: f64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let in_b: f64 = (0..b.k()).map(|j| pairs(table.iter().map(|r| r[j]).sum())).sum();
    let expected = in_a * in_b / pairs(n);
    let max = 0.5 * (in_a + in_b);
    if (max - expected).abs() < 1e-12 {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    Ok((both - expected) / (max - expected))
}

/// Variation of information in bits.
pub fn variation_of_information(a: &Partition, b: &Partition) -> Result<f64> {
    let table = contingency(a, b)?;
    Ok(vi_from_table(&table, a.n_areas()))
}

fn xlog2x(m: usize) -> f64 {
    if m == 0 {
        0.0
    } else {
        let m = m as f64;
        m * m.log2()
    }
}

fn vi_from_table(table: &[Vec<usize>], n: usize) -> f64 {
    let rows: f64 = table.iter().map(|r| xlog2x(r.iter().sum())).sum();
    let cols: f64 = (0..table.first().map_or(0, Vec::len))
        .map(|j| xlog2x(table.iter().map(|r| r[j]).sum()))
        .sum();
    let cells: f64 = table.iter().flatten().map(|&m| xlog2x(m)).sum();
    ((rows + cols - 2.0 * cells) / n as f64).max(0.0)
}

/// Number of area pairs clustered together in one partition and apart in
/// the other.
pub fn binder_distance(a: &Partition, b: &Partition) -> Result<f64> {
    let n = a.n_areas();
    let ri = if n < 2 { 1.0 } else { rand_index(a, b)? };
    Ok((1.0 - ri) * pairs(n))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionLoss {
    #[default]
    Vi,
    Binder,
}

/// Posterior co-clustering probabilities, row-major `n × n`.
pub fn co_clustering(draws: &[Partition]) -> Vec<f64> {
    let n = draws.first().map_or(0, Partition::n_areas);
    let mut pi = vec![0.0; n * n];
    for p in draws {
        for cluster in p.clusters() {
            for &i in cluster {
                for &j in cluster {
                    pi[i * n + j] += 1.0;
                }
            }
        }
    }
    let m = draws.len().max(1) as f64;
    pi.iter_mut().for_each(|v| *v /= m);
    pi
}

/// Expected loss of `candidate` under the empirical posterior `draws`.
pub fn expected_loss(candidate: &Partition, draws: &[Partition], loss: PartitionLoss) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::param("draws", "need at least one partition draw"));
    }
    let mut total = 0.0;
    for d in draws {
        total += match loss {
            PartitionLoss::Vi => variation_of_information(candidate, d)?,
            PartitionLoss::Binder => binder_distance(candidate, d)?,
        };
    }
    Ok(total / draws.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointEstimate {
    pub partition: Partition,
    pub expected_loss: f64,
}

/// Above this many distinct sampled partitions only the best ones under the
/// surrogate are scored exactly.
const MAX_EXACT_CANDIDATES: usize = 2000;

/// Partition minimizing the posterior expected loss. Greedy single-area
/// moves on a surrogate objective (the Jensen lower bound for VI, the exact
/// pairwise form for Binder) are run from `restarts` random labelings and
/// from the best sampled draw; those optima and the distinct sampled
/// partitions are then scored with the exact loss.
pub fn point_estimate_partition<R: Rng + ?Sized>(
    draws: &[Partition],
    loss: PartitionLoss,
    restarts: usize,
    rng: &mut R,
) -> Result<PointEstimate> {
    let Some(first) = draws.first() else {
        return Err(Error::param("draws", "need at least one partition draw"));
    };
    let n = first.n_areas();
    if let Some(bad) = draws.iter().find(|p| p.n_areas() != n) {
        return Err(Error::Dimension {
            what: "partition size",
            expected: n,
            got: bad.n_areas(),
        });
    }

    // distinct draws with multiplicities, in order of first appearance
    let mut index: HashMap<&[usize], usize> = HashMap::new();
    let mut unique: Vec<(Partition, f64)> = Vec::new();
    for p in draws {
        match index.get(p.labels()) {
            Some(&u) => unique[u].1 += 1.0,
            None => {
                index.insert(p.labels(), unique.len());
                unique.push((p.clone(), 1.0));
            }
        }
    }
    let pi = co_clustering(draws);
    let surrogate = Surrogate { n, pi: &pi, loss };

    let mut sampled: Vec<(f64, Partition)> =
        unique.iter().map(|(p, _)| (surrogate.value(p.labels()), p.clone())).collect();
    sampled.sort_by(|a, b| a.0.total_cmp(&b.0));
    sampled.truncate(MAX_EXACT_CANDIDATES);

    let mut candidates: Vec<Partition> = sampled.iter().map(|(_, p)| p.clone()).collect();
    let mut starts: Vec<Vec<usize>> = vec![sampled[0].1.labels().to_vec()];
    for _ in 0..restarts {
        let k = rng.random_range(1..=n.max(1));
        starts.push((0..n).map(|_| rng.random_range(0..k)).collect());
    }
    for labels in starts {
        candidates.push(Partition::from_labels(&surrogate.descend(labels, rng)));
    }

    let exact = |c: &Partition| -> Result<f64> {
        let mut total = 0.0;
        for (d, weight) in &unique {
            let v = match loss {
                PartitionLoss::Vi => variation_of_information(c, d)?,
                PartitionLoss::Binder => binder_distance(c, d)?,
            };
            total += weight * v;
        }
        Ok(total / draws.len() as f64)
    };
    let mut best: Option<PointEstimate> = None;
    for c in candidates {
        let value = exact(&c)?;
        if best.as_ref().is_none_or(|b| value < b.expected_loss - 1e-12) {
            best = Some(PointEstimate {
                partition: c,
                expected_loss: value,
            });
        }
    }
    Ok(best.expect("at least one candidate"))
}

struct Surrogate<'a> {
    n: usize,
    pi: &'a [f64],
    loss: PartitionLoss,
}

impl Surrogate<'_> {
    fn p(&self, i: usize, j: usize) -> f64 {
        self.pi[i * self.n + j]
    }

    /// Contribution of one cluster: `Σ_l [log2|K| - 2 log2 Σ_{m∈K} π_lm]`
    /// for VI, `Σ_{l<m∈K} (1 - 2π_lm)` for Binder.
    fn cluster(&self, members: &[usize]) -> f64 {
        match self.loss {
            PartitionLoss::Vi => {
                let size = (members.len() as f64).log2();
                members
                    .iter()
                    .map(|&l| size - 2.0 * members.iter().map(|&m| self.p(l, m)).sum::<f64>().log2())
                    .sum()
            }
            PartitionLoss::Binder => {
                let mut v = 0.0;
                for (x, &l) in members.iter().enumerate() {
                    for &m in &members[x + 1..] {
                        v += 1.0 - 2.0 * self.p(l, m);
                    }
                }
                v
            }
        }
    }

    fn value(&self, labels: &[usize]) -> f64 {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        members.iter().filter(|m| !m.is_empty()).map(|m| self.cluster(m)).sum()
    }

    /// Cost of adding area `i` to the cluster `members`, given the row sums
    /// `rows[l] = Σ_{m∈K} π_lm` of its current members.
    fn insertion(&self, i: usize, members: &[usize], rows: &[f64]) -> f64 {
        match self.loss {
            PartitionLoss::Vi => {
                let size = members.len() as f64;
                let grown = (size + 1.0).log2();
                let mut before = 0.0;
                let mut after = 0.0;
                let mut own = self.p(i, i);
                for &l in members {
                    let pil = self.p(l, i);
                    before += size.log2() - 2.0 * rows[l].log2();
                    after += grown - 2.0 * (rows[l] + pil).log2();
                    own += pil;
                }
                after += grown - 2.0 * own.log2();
                after - before
            }
            PartitionLoss::Binder => members.iter().map(|&l| 1.0 - 2.0 * self.p(i, l)).sum(),
        }
    }

    fn descend<R: Rng + ?Sized>(&self, labels: Vec<usize>, rng: &mut R) -> Vec<usize> {
        let n = self.n;
        let canon = Partition::from_labels(&labels);
        let mut label: Vec<usize> = canon.labels().to_vec();
        let mut members: Vec<Vec<usize>> = canon.clusters().to_vec();
        let mut rows = vec![0.0; n];
        for cluster in &members {
            for &l in cluster {
                rows[l] = cluster.iter().map(|&m| self.p(l, m)).sum();
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        for _sweep in 0..100 {
            for a in (1..n).rev() {
                order.swap(a, rng.random_range(0..=a));
            }
            let mut moved = false;
            for &i in &order {
                let from = label[i];
                members[from].retain(|&m| m != i);
                for &l in &members[from] {
                    rows[l] -= self.p(l, i);
                }
                let stay = self.insertion(i, &members[from], &rows);
                let mut best = (stay, from);
                for (c, cluster) in members.iter().enumerate() {
                    if c == from || cluster.is_empty() {
                        continue;
                    }
                    let cost = self.insertion(i, cluster, &rows);
                    if cost < best.0 - 1e-12 {
                        best = (cost, c);
                    }
                }
                if !members[from].is_empty() {
                    let alone = self.insertion(i, &[], &rows);
                    if alone < best.0 - 1e-12 {
                        let fresh = members.iter().position(Vec::is_empty).unwrap_or(members.len());
                        if fresh == members.len() {
                            members.push(Vec::new());
                        }
                        best = (alone, fresh);
                    }
                }
                let to = best.1;
                moved |= to != from;
                let mut own = self.p(i, i);
                for &l in &members[to] {
                    let pil = self.p(l, i);
                    rows[l] += pil;
                    own += pil;
                }
                rows[i] = own;
                members[to].push(i);
                label[i] = to;
            }
            if !moved {
                break;
            }
        }
        label
    }
}

/// Type-7 sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        m => {
            let h = (m - 1) as f64 * p.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(m - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Equal-tailed interval at `level`.
pub fn credible_interval(xs: &[f64], level: f64) -> (f64, f64) {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile_sorted(&sorted, tail), quantile_sorted(&sorted, 1.0 - tail))
}

/// Monte Carlo standard error of the mean by non-overlapping batch means
/// with `floor(sqrt(n))` batches. NaN below 4 draws.
pub fn batch_means_mcse(xs: &[f64]) -> f64 {
    let n_batches = (xs.len() as f64).sqrt().floor() as usize;
    if n_batches < 2 {
        return f64::NAN;
    }
    let size = xs.len() / n_batches;
    let means: Vec<f64> = xs
        .chunks_exact(size)
        .take(n_batches)
        .map(|b| b.iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / n_batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (n_batches - 1) as f64;
    (var / n_batches as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
    pub mcse: f64,
}

pub fn summarize_series(name: &str, xs: &[f64], level: f64) -> ParameterSummary {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let (lower, upper) = credible_interval(xs, level);
    ParameterSummary {
        name: name.to_string(),
        mean,
        sd,
        lower,
        upper,
        mcse: batch_means_mcse(xs),
    }
}

/// Per cell of a `draws × cells` matrix of `z` draws: true when the
/// equal-tailed interval at `level` excludes 1.
pub fn dispersion_indicators(z_draws: &[Vec<f64>], level: f64) -> Vec<bool> {
    let cells = z_draws.first().map_or(0, Vec::len);
    (0..cells)
        .map(|k| {
            let col: Vec<f64> = z_draws.iter().map(|d| d[k]).collect();
            let (lo, hi) = credible_interval(&col, level);
            lo > 1.0 || hi < 1.0
        })
        .collect()
}

/// Posterior mean of `E/V = μ / (μ + μ²/ψ)` per area-week, from draws of
/// the mean `μ = Oλ` (`draws × (n·T)`, area-major) and of `ψ`
/// (`draws × (n·S)`, area-major).
pub fn mean_variance_ratio(
    mu_draws: &[Vec<f64>],
    psi_draws: &[Vec<f64>],
    n_areas: usize,
    season_of_week: &[usize],
) -> Result<Vec<f64>> {
    if mu_draws.len() != psi_draws.len() || mu_draws.is_empty() {
        return Err(Error::Dimension {
            what: "dispersion draws",
            expected: mu_draws.len(),
            got: psi_draws.len(),
        });
    }
    let t_len = season_of_week.len();
    let s_len = season_of_week.last().map_or(0, |s| s + 1);
    let mut out = vec![0.0; n_areas * t_len];
    for (mu, psi) in mu_draws.iter().zip(psi_draws) {
        if mu.len() != n_areas * t_len || psi.len() < n_areas * s_len {
            return Err(Error::Dimension {
                what: "dispersion draw",
                expected: n_areas * t_len,
                got: mu.len(),
            });
        }
        for i in 0..n_areas {
            for (t, &s) in season_of_week.iter().enumerate() {
                let m = mu[i * t_len + t];
                out[i * t_len + t] += 1.0 / (1.0 + m / psi[i * s_len + s]);
            }
        }
    }
    let d = mu_draws.len() as f64;
    out.iter_mut().for_each(|v| *v /= d);
    Ok(out)
}

/// [`mean_variance_ratio`] from stored `β`, `θ` and `δ` draws. Poisson fits
/// have no extra variance, so every ratio is 1.
pub fn mean_variance_ratio_from_store(data: &Dataset, store: &SampleStore, family: Family) -> Result<Vec<f64>> {
    let n = data.n_areas();
    let t_len = data.n_weeks();
    if family == Family::Poisson {
        return Ok(vec![1.0; n * t_len]);
    }
    let s_len = data.n_seasons();
    let mut mu_draws = Vec::with_capacity(store.n_draws());
    let mut psi_draws = Vec::with_capacity(store.n_draws());
    for d in 0..store.n_draws() {
        let beta = &store.beta[d];
        let theta = &store.theta_area[d];
        let mut mu = Vec::with_capacity(n * t_len);
        for i in 0..n {
            for t in 0..t_len {
                let eta: f64 = data.x_row(i, t).iter().zip(beta).map(|(x, b)| x * b).sum();
                mu.push(data.offset(i, t) * eta.exp() * theta[i * s_len + data.season_of(t)]);
            }
        }
        let mut psi = Vec::with_capacity(n * s_len);
        for i in 0..n {
            for s in 0..s_len {
                psi.push(dispersion_param(data, i, s, &store.delta[d]));
            }
        }
        mu_draws.push(mu);
        psi_draws.push(psi);
    }
    mean_variance_ratio(&mu_draws, &psi_draws, n, data.season_of_week())
}

/// Pairwise Rand indices between seasonal partitions.
pub fn lagged_ri_matrix(partitions: &[Partition]) -> Result<Vec<Vec<f64>>> {
    let s = partitions.len();
    let mut m = vec![vec![1.0; s]; s];
    for a in 0..s {
        for b in a + 1..s {
            let ri = rand_index(&partitions[a], &partitions[b])?;
            m[a][b] = ri;
            m[b][a] = ri;
        }
    }
    Ok(m)
}

/// `(draw, season)` pairs whose sampled partition has a cluster that is not
/// connected in `graph`.
pub fn contiguity_violations(graph: &SpatialGraph, store: &SampleStore) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (d, draw) in store.partitions.iter().enumerate() {
        for (s, p) in draw.iter().enumerate() {
            if !graph.is_contiguous(p) {
                out.push((d, s));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SummaryOptions {
    pub level: f64,
    pub loss: PartitionLoss,
    pub restarts: usize,
    pub seed: u64,
    pub family: Family,
    pub waic_likelihood: WaicLikelihood,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions {
            level: 0.95,
            loss: PartitionLoss::Vi,
            restarts: 10,
            seed: 1,
            family: Family::Pig,
            waic_likelihood: WaicLikelihood::Marginal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeasonEstimate {
    pub season: usize,
    pub k: usize,
    pub expected_loss: f64,
    /// False when the loss-optimal partition has a disconnected cluster.
    pub contiguous: bool,
    pub labels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub n_draws: usize,
    pub level: f64,
    pub loss: PartitionLoss,
    pub parameters: Vec<ParameterSummary>,
    /// Posterior of `ρ_j` and `k_j` for every slot, horizon included.
    pub latent: Vec<ParameterSummary>,
    pub partitions: Vec<SeasonEstimate>,
    pub ri_matrix: Vec<Vec<f64>>,
    /// Which pointwise likelihood `waic` is computed from.
    pub waic_likelihood: WaicLikelihood,
    pub waic: Option<Waic>,
    pub waic_marginal: Option<Waic>,
    pub waic_conditional: Option<Waic>,
    /// Sampled partitions with a disconnected cluster (should be 0).
    pub contiguity_violations: usize,
    pub acceptance: AcceptanceReport,
}

impl PosteriorSummary {
    pub fn point_estimates(&self) -> Vec<Partition> {
        self.partitions.iter().map(|e| Partition::from_labels(&e.labels)).collect()
    }
}

pub fn summarize<R: Rng + ?Sized>(
    graph: &SpatialGraph,
    store: &SampleStore,
    opts: &SummaryOptions,
    rng: &mut R,
) -> Result<PosteriorSummary> {
    if store.n_draws() == 0 {
        return Err(Error::InvalidData("no retained draws to summarize".into()));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::param("level", format!("must lie in (0, 1), got {}", opts.level)));
    }
    let parameters = store
        .scalar_names()
        .iter()
        .map(|name| summarize_series(name, &store.series(name).expect("known series"), opts.level))
        .collect();
    let mut latent = Vec::new();
    for j in 1..=store.shape.n_slots() {
        for head in ["rho", "k"] {
            let name = format!("{head}_{j}");
            latent.push(summarize_series(&name, &store.series(&name).expect("known series"), opts.level));
        }
    }

    let mut partitions = Vec::with_capacity(store.shape.n_seasons);
    for s in 0..store.shape.n_seasons {
        let draws: Vec<Partition> = store.partitions.iter().map(|d| d[s].clone()).collect();
        let est = point_estimate_partition(&draws, opts.loss, opts.restarts, rng)?;
        partitions.push(SeasonEstimate {
            season: s,
            k: est.partition.k(),
            expected_loss: est.expected_loss,
            contiguous: graph.is_contiguous(&est.partition),
            labels: est.partition.labels().to_vec(),
        });
    }
    let estimates: Vec<Partition> = partitions.iter().map(|e| Partition::from_labels(&e.labels)).collect();
    let ri_matrix = lagged_ri_matrix(&estimates)?;

    let stored = |rows: &[Vec<f64>]| -> Result<Option<Waic>> {
        if rows.len() >= 2 && rows.iter().all(|r| !r.is_empty()) {
            waic(rows).map(Some)
        } else {
            Ok(None)
        }
    };
    let waic_marginal = stored(&store.loglik)?;
    let waic_conditional = stored(&store.loglik_conditional)?;
    let waic = match opts.waic_likelihood {
        WaicLikelihood::Marginal => waic_marginal,
        WaicLikelihood::Conditional => waic_conditional,
    };

    Ok(PosteriorSummary {
        n_draws: store.n_draws(),
        level: opts.level,
        loss: opts.loss,
        parameters,
        latent,
        partitions,
        ri_matrix,
        waic_likelihood: opts.waic_likelihood,
        waic,
        waic_marginal,
        waic_conditional,
        contiguity_violations: contiguity_violations(graph, store).len(),
        acceptance: store.acceptance.clone(),
    })
}
