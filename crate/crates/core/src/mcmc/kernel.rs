use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use super::config::{Block, SamplerConfig};
use super::gig::sample_gig;
use super::state::ChainState;
use crate::dist::{self, ln_binomial, ln_factorial, ln_gamma};
use crate::error::Result;
use crate::graph::{indicators_for, random_spanning_tree, sample_compatible_tree, SpatialGraph};
use crate::likelihood::{dispersion_param, exposures, log_cluster_marginal, season_exposures, Dataset};
use crate::prior::{prune_with_probability, LatentSeries};

const BATCH: u64 = 50;

/// Proposal and acceptance tallies of one Metropolis–Hastings block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub proposed: u64,
    pub accepted: u64,
}

impl Acceptance {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }
}

/// Random-walk scale with batch adaptation on the log scale.
#[derive(Clone, Debug, PartialEq)]
pub struct MhBlock {
    pub scale: f64,
    pub total: Acceptance,
    batch: Acceptance,
    batches: u32,
}

impl MhBlock {
    fn new(scale: f64) -> Self {
        MhBlock {
            scale,
            total: Acceptance::default(),
            batch: Acceptance::default(),
            batches: 0,
        }
    }

    fn record(&mut self, accepted: bool, adapt: Option<f64>) {
        self.total.record(accepted);
        let Some(target) = adapt else { return };
        self.batch.record(accepted);
        if self.batch.proposed == BATCH {
            self.batches += 1;
            let step = 1.0 / f64::from(self.batches).sqrt();
            self.scale *= ((self.batch.rate() - target) * step).exp();
            self.batch = Acceptance::default();
        }
    }
}

/// Acceptance summary per MH block, as reported in run metadata.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub upsilon: Acceptance,
    pub kappa: Acceptance,
    pub beta: Acceptance,
    pub delta: Acceptance,
    pub c: Acceptance,
    pub u: Acceptance,
    pub scale_upsilon: f64,
    pub scale_kappa: f64,
    pub scale_beta: f64,
    pub scale_delta: f64,
}

/// One Metropolis-within-Gibbs sweep over a [`ChainState`], with cached
/// exposures and dispersions for the current `β` and `δ`.
pub struct Kernel<'a> {
    graph: &'a SpatialGraph,
    data: &'a Dataset,
    cfg: &'a SamplerConfig,
    exposure: Vec<f64>,
    season_exposure: Vec<f64>,
    psi: Vec<f64>,
    adapting: bool,
    pub upsilon: MhBlock,
    pub kappa: MhBlock,
    pub beta: MhBlock,
    pub delta: MhBlock,
    pub c: Acceptance,
    pub u: Acceptance,
    visited: Vec<bool>,
    stack: Vec<usize>,
}

impl<'a> Kernel<'a> {
    pub fn new(
        graph: &'a SpatialGraph,
        data: &'a Dataset,
        cfg: &'a SamplerConfig,
        state: &ChainState,
    ) -> Self {
        let exposure = exposures(data, &state.beta);
        let season_exposure = season_exposures(data, &exposure);
        let psi = dispersions(data, &state.delta);
        Kernel {
            graph,
            data,
            cfg,
            exposure,
            season_exposure,
            psi,
            adapting: cfg.adapt,
            upsilon: MhBlock::new(cfg.scale_upsilon),
            kappa: MhBlock::new(cfg.scale_kappa),
            beta: MhBlock::new(cfg.scale_beta),
            delta: MhBlock::new(cfg.scale_delta),
            c: Acceptance::default(),
            u: Acceptance::default(),
            visited: vec![false; graph.n_areas()],
            stack: Vec::new(),
        }
    }

    /// Freezes the proposal scales and restarts the acceptance tallies.
    pub fn end_burn_in(&mut self) {
        self.adapting = false;
        for block in [&mut self.upsilon, &mut self.kappa, &mut self.beta, &mut self.delta] {
            block.total = Acceptance::default();
        }
        self.c = Acceptance::default();
        self.u = Acceptance::default();
    }

    pub fn acceptance(&self) -> AcceptanceReport {
        AcceptanceReport {
            upsilon: self.upsilon.total,
            kappa: self.kappa.total,
            beta: self.beta.total,
            delta: self.delta.total,
            c: self.c,
            u: self.u,
            scale_upsilon: self.upsilon.scale,
            scale_kappa: self.kappa.scale,
            scale_beta: self.beta.scale,
            scale_delta: self.delta.scale,
        }
    }

    fn adapt_target(&self) -> Option<f64> {
        self.adapting.then_some(self.cfg.target_acceptance)
    }

    /// `E_is = Σ_{t ∈ s} O_it exp(X_it β)` for the current `β`.
    pub fn season_exposure(&self) -> &[f64] {
        &self.season_exposure
    }

    /// Full sweep: hyper parameters, then each data season (tree, partition,
    /// `ρ`, `c`, `u`, `θ*`, `z`), then the horizon slots, then `β` and `δ`.
    pub fn sweep<R: Rng + ?Sized>(&mut self, st: &mut ChainState, rng: &mut R) -> Result<()> {
        let cfg = self.cfg;
        if cfg.updates(Block::Upsilon) {
            self.update_upsilon(st, rng);
        }
        if cfg.updates(Block::Kappa) {
            self.update_kappa(st, rng);
        }
        if cfg.updates(Block::Zeta) {
            update_zeta(&mut st.latent, cfg, rng);
        }
        if cfg.updates(Block::W) {
            update_w(&mut st.latent, rng);
        }
        for s in 0..st.n_data_seasons() {
            if cfg.updates(Block::Tree) {
                self.update_tree(st, s, rng)?;
            }
            if cfg.updates(Block::Partition) {
                self.update_partition(st, s, rng);
            }
            if cfg.updates(Block::Rho) {
                update_rho(st, s, rng);
            }
            if cfg.updates(Block::C) {
                self.update_c(&mut st.latent, s, rng);
            }
            if cfg.updates(Block::U) {
                self.update_u(&mut st.latent, s, rng);
            }
            if cfg.updates(Block::Theta) || st.seasons[s].theta.len() != st.seasons[s].k() {
                self.update_theta(st, s, rng);
            }
            if cfg.updates(Block::Z) {
                self.update_z(st, s, rng)?;
            }
        }
        self.extend_horizon(st, rng)?;
        if cfg.updates(Block::Beta) {
            self.update_beta(st, rng);
        }
        if cfg.updates(Block::Delta) {
            self.update_delta(st, rng);
        }
        Ok(())
    }

    pub fn update_upsilon<R: Rng + ?Sized>(&mut self, st: &mut ChainState, rng: &mut R) {
        let include_w = !self.cfg.independent;
        let (a, b) = (self.cfg.a_upsilon, self.cfg.b_upsilon);
        let l = &st.latent;
        let cur = l.upsilon;
        let prop = cur * (self.upsilon.scale * dist::std_normal(rng)).exp();
        let log_r = log_target_upsilon(l, prop, a, b, include_w) - log_target_upsilon(l, cur, a, b, include_w)
            + prop.ln()
            - cur.ln();
        let accept = log_r >= 0.0 || dist::open01(rng).ln() < log_r;
        if accept {
            st.latent.upsilon = prop;
        }
        let target = self.adapt_target();
        self.upsilon.record(accept, target);
    }

    pub fn update_kappa<R: Rng + ?Sized>(&mut self, st: &mut ChainState, rng: &mut R) {
        let include_w = !self.cfg.independent;
        let (a, b) = (self.cfg.a_kappa, self.cfg.b_kappa);
        let l = &st.latent;
        let cur = l.kappa;
        let prop = cur * (self.kappa.scale * dist::std_normal(rng)).exp();
        let log_r = log_target_kappa(l, prop, a, b, include_w) - log_target_kappa(l, cur, a, b, include_w)
            + prop.ln()
            - cur.ln();
        let accept = log_r >= 0.0 || dist::open01(rng).ln() < log_r;
        if accept {
            st.latent.kappa = prop;
        }
        let target = self.adapt_target();
        self.kappa.record(accept, target);
    }

    /// New tree compatible with the current partition of season `s`.
    pub fn update_tree<R: Rng + ?Sized>(&mut self, st: &mut ChainState, s: usize, rng: &mut R) -> Result<()> {
        let season = &mut st.seasons[s];
        season.tree = sample_compatible_tree(self.graph, &season.partition, rng)?;
        season.bits = indicators_for(&season.tree, &season.partition);
        Ok(())
    }

    /// Edge-by-edge sweep with `θ*` and `ρ_s` integrated out.
    pub fn update_partition<R: Rng + ?Sized>(&mut self, st: &mut ChainState, s: usize, rng: &mut R) {
        let n = self.data.n_areas();
        let s_len = self.data.n_seasons();
        let (a_theta, b_theta) = (self.cfg.a_theta, self.cfg.b_theta);
        let (big_a, big_b) = st.latent.rho_beta_params(s);
        let y: Vec<u64> = (0..n).map(|i| self.data.y_season(i, s)).collect();
        let e: Vec<f64> = (0..n)
            .map(|i| st.z[i * s_len + s] * self.season_exposure[i * s_len + s])
            .collect();
        let log_const = ln_gamma(a_theta) - a_theta * b_theta.ln();
        let nf = n as f64;

        let season = &mut st.seasons[s];
        let mut removed = season.bits.removed();
        for l in 0..season.tree.n_tree_edges() {
            let others_removed = removed - usize::from(!season.bits.get(l));
            let k = (others_removed + 1) as f64;
            let (ea, eb) = season.tree.endpoints(l);
            let (ya, xa) = self.component_sums(season, l, ea, &y, &e);
            let (yb, xb) = self.component_sums(season, l, eb, &y, &e);
            let log_r = (big_b + nf - k - 1.0).ln() - (big_a + k - 1.0).ln()
                + log_const
                + log_cluster_marginal(ya + yb, xa + xb, a_theta, b_theta)
                - log_cluster_marginal(ya, xa, a_theta, b_theta)
                - log_cluster_marginal(yb, xb, a_theta, b_theta);
            let u = dist::open01(rng);
            let remove = log_r < u.ln() - (-u).ln_1p();
            season.bits.set(l, !remove);
            removed = others_removed + usize::from(remove);
        }
        season.sync_partition();
    }

    /// Count and exposure totals of the component holding `start` once tree
    /// edge `skip` is cut, walking only kept edges.
    fn component_sums(
        &mut self,
        season: &super::state::SeasonState,
        skip: usize,
        start: usize,
        y: &[u64],
        e: &[f64],
    ) -> (u64, f64) {
        self.visited.fill(false);
        self.stack.clear();
        self.stack.push(start);
        self.visited[start] = true;
        let (mut ys, mut es) = (0, 0.0);
        while let Some(v) = self.stack.pop() {
            ys += y[v];
            es += e[v];
            for &(w, pos) in season.tree.neighbors(v) {
                if pos != skip && season.bits.get(pos) && !self.visited[w] {
                    self.visited[w] = true;
                    self.stack.push(w);
                }
            }
        }
        (ys, es)
    }

    pub fn update_c<R: Rng + ?Sized>(&mut self, latent: &mut LatentSeries, j: usize, rng: &mut R) {
        let cur = latent.c[j];
        let prop = if rng.random::<bool>() { cur.checked_add(1) } else { cur.checked_sub(1) };
        let accept = match prop {
            Some(p) if p >= latent.u[j] => {
                let log_r = log_target_c(latent, j, p) - log_target_c(latent, j, cur);
                log_r >= 0.0 || dist::open01(rng).ln() < log_r
            }
            _ => false,
        };
        if accept {
            latent.c[j] = prop.expect("accepted proposals exist");
        }
        self.c.record(accept);
    }

    pub fn update_u<R: Rng + ?Sized>(&mut self, latent: &mut LatentSeries, j: usize, rng: &mut R) {
        let cur = latent.u[j];
        let prop = if rng.random::<bool>() { cur.checked_add(1) } else { cur.checked_sub(1) };
        let accept = match prop {
            Some(p) if p <= latent.c[j] => {
                let log_r = log_target_u(latent, j, p) - log_target_u(latent, j, cur);
                log_r >= 0.0 || dist::open01(rng).ln() < log_r
            }
            _ => false,
        };
        if accept {
            latent.u[j] = prop.expect("accepted proposals exist");
        }
        self.u.record(accept);
    }

    /// Fresh `Ga(a + Y, b + Σ z E)` level for every cluster of season `s`.
    pub fn update_theta<R: Rng + ?Sized>(&mut self, st: &mut ChainState, s: usize, rng: &mut R) {
        let s_len = self.data.n_seasons();
        let season = &mut st.seasons[s];
        season.theta = season
            .partition
            .clusters()
            .iter()
            .map(|members| {
                let mut y = 0;
                let mut e = 0.0;
                for &i in members {
                    y += self.data.y_season(i, s);
                    e += st.z[i * s_len + s] * self.season_exposure[i * s_len + s];
                }
                dist::gamma_rate(rng, self.cfg.a_theta + y as f64, self.cfg.b_theta + e)
            })
            .collect();
    }

    /// `z_is ~ GIG(Y_is - 1/2, 2 θ E_is + ψ_is, ψ_is)` for each area.
    pub fn update_z<R: Rng + ?Sized>(&mut self, st: &mut ChainState, s: usize, rng: &mut R) -> Result<()> {
        let s_len = self.data.n_seasons();
        let season = &st.seasons[s];
        for i in 0..self.data.n_areas() {
            let k = i * s_len + s;
            let theta = season.theta[season.partition.label(i)];
            let psi = self.psi[k];
            let p = self.data.y_season(i, s) as f64 - 0.5;
            st.z[k] = sample_gig(p, 2.0 * theta * self.season_exposure[k] + psi, psi, rng)?;
        }
        Ok(())
    }

    /// Horizon slots: random tree, each edge cut with probability `ρ_j`,
    /// then `c`, `u` and `ρ`.
    pub fn extend_horizon<R: Rng + ?Sized>(&mut self, st: &mut ChainState, rng: &mut R) -> Result<()> {
        let cfg = self.cfg;
        for j in st.n_data_seasons()..st.seasons.len() {
            let season = &mut st.seasons[j];
            if cfg.updates(Block::Partition) {
                if cfg.updates(Block::Tree) {
                    season.tree = random_spanning_tree(self.graph, rng);
                }
                season.bits = prune_with_probability(&season.tree, st.latent.rho[j], rng);
                season.sync_partition();
            } else if cfg.updates(Block::Tree) {
                season.tree = sample_compatible_tree(self.graph, &season.partition, rng)?;
                season.bits = indicators_for(&season.tree, &season.partition);
            }
            if cfg.updates(Block::C) {
                self.update_c(&mut st.latent, j, rng);
            }
            if cfg.updates(Block::U) {
                self.update_u(&mut st.latent, j, rng);
            }
            if cfg.updates(Block::Rho) {
                update_rho(st, j, rng);
            }
        }
        Ok(())
    }

    pub fn update_beta<R: Rng + ?Sized>(&mut self, st: &mut ChainState, rng: &mut R) {
        if st.beta.is_empty() {
            return;
        }
        let theta = st.theta_area();
        let prop: Vec<f64> = st
            .beta
            .iter()
            .map(|b| b + self.beta.scale * dist::std_normal(rng))
            .collect();
        let log_r = log_target_beta(self.data, self.cfg, &theta, &st.z, &prop)
            - log_target_beta(self.data, self.cfg, &theta, &st.z, &st.beta);
        let accept = log_r >= 0.0 || dist::open01(rng).ln() < log_r;
        if accept {
            st.beta = prop;
            self.exposure = exposures(self.data, &st.beta);
            self.season_exposure = season_exposures(self.data, &self.exposure);
        }
        let target = self.adapt_target();
        self.beta.record(accept, target);
    }

    pub fn update_delta<R: Rng + ?Sized>(&mut self, st: &mut ChainState, rng: &mut R) {
        if st.delta.is_empty() {
            return;
        }
        let prop: Vec<f64> = st
            .delta
            .iter()
            .map(|d| d + self.delta.scale * dist::std_normal(rng))
            .collect();
        let log_r = log_target_delta(self.data, self.cfg, &st.z, &prop)
            - log_target_delta(self.data, self.cfg, &st.z, &st.delta);
        let accept = log_r >= 0.0 || dist::open01(rng).ln() < log_r;
        if accept {
            st.delta = prop;
            self.psi = dispersions(self.data, &st.delta);
        }
        let target = self.adapt_target();
        self.delta.record(accept, target);
    }
}

fn dispersions(data: &Dataset, delta: &[f64]) -> Vec<f64> {
    let s_len = data.n_seasons();
    (0..data.n_areas() * s_len)
        .map(|k| {
            if delta.is_empty() {
                1.0
            } else {
                dispersion_param(data, k / s_len, k % s_len, delta)
            }
        })
        .collect()
}

/// `ζ ~ Ga(a_ζ + Σ c, b_ζ + number of slots)`.
pub fn update_zeta<R: Rng + ?Sized>(latent: &mut LatentSeries, cfg: &SamplerConfig, rng: &mut R) {
    let sum_c: u64 = latent.c.iter().sum();
    latent.zeta = dist::gamma_rate(rng, cfg.a_zeta + sum_c as f64, cfg.b_zeta + latent.len() as f64);
}

/// `w ~ Be(υ + Σ u, κ + Σ (c - u))`.
pub fn update_w<R: Rng + ?Sized>(latent: &mut LatentSeries, rng: &mut R) {
    let sum_u: u64 = latent.u.iter().sum();
    let sum_c: u64 = latent.c.iter().sum();
    latent.w = dist::beta(rng, latent.upsilon + sum_u as f64, latent.kappa + (sum_c - sum_u) as f64);
}

/// `ρ_j ~ Be(k + A - 1, n - k + B)` with `(A, B)` the windowed beta
/// parameters of slot `j`.
pub fn update_rho<R: Rng + ?Sized>(st: &mut ChainState, j: usize, rng: &mut R) {
    let season = &st.seasons[j];
    let n = season.partition.n_areas() as f64;
    let k = season.k() as f64;
    let (a, b) = st.latent.rho_beta_params(j);
    st.latent.rho[j] = dist::beta(rng, k + a - 1.0, n - k + b);
}

/// Log full conditional of `υ` up to a constant.
pub fn log_target_upsilon(l: &LatentSeries, upsilon: f64, a: f64, b: f64, include_w: bool) -> f64 {
    let mut lp = (a - 1.0) * upsilon.ln() - b * upsilon;
    for j in 0..l.len() {
        let (su, sc) = l.window_sums(j);
        lp += ln_gamma(upsilon + l.kappa + sc as f64) - ln_gamma(upsilon + su as f64)
            + upsilon * l.rho[j].ln();
    }
    if include_w {
        lp += ln_gamma(upsilon + l.kappa) - ln_gamma(upsilon) + upsilon * l.w.ln();
    }
    lp
}

/// Log full conditional of `κ` up to a constant.
pub fn log_target_kappa(l: &LatentSeries, kappa: f64, a: f64, b: f64, include_w: bool) -> f64 {
    let mut lp = (a - 1.0) * kappa.ln() - b * kappa;
    for j in 0..l.len() {
        let (su, sc) = l.window_sums(j);
        lp += ln_gamma(l.upsilon + kappa + sc as f64) - ln_gamma(kappa + (sc - su) as f64)
            + kappa * (-l.rho[j]).ln_1p();
    }
    if include_w {
        lp += ln_gamma(l.upsilon + kappa) - ln_gamma(kappa) + kappa * (-l.w).ln_1p();
    }
    lp
}

/// Log full conditional of `c_j` evaluated at `c` (must be `≥ u_j`).
pub fn log_target_c(l: &LatentSeries, j: usize, c: u64) -> f64 {
    let u = l.u[j];
    let cf = c as f64;
    let mut lp = -ln_factorial(c - u) + cf * (l.zeta * (1.0 - l.w)).ln();
    for m in j..(j + l.q + 1).min(l.len()) {
        let (su, sc) = l.window_sums(m);
        let sc = (sc - l.c[j] + c) as f64;
        let su = su as f64;
        lp += ln_gamma(l.upsilon + l.kappa + sc) - ln_gamma(l.kappa + sc - su) + cf * (-l.rho[m]).ln_1p();
    }
    lp
}

/// Log full conditional of `u_j` evaluated at `u` (must be `≤ c_j`).
pub fn log_target_u(l: &LatentSeries, j: usize, u: u64) -> f64 {
    let c = l.c[j];
    let uf = u as f64;
    let mut lp = ln_binomial(c, u) + uf * (l.w / (1.0 - l.w)).ln();
    for m in j..(j + l.q + 1).min(l.len()) {
        let (su, sc) = l.window_sums(m);
        let su = (su - l.u[j] + u) as f64;
        let sc = sc as f64;
        lp += -ln_gamma(l.upsilon + su) - ln_gamma(l.kappa + sc - su)
            + uf * (l.rho[m].ln() - (-l.rho[m]).ln_1p());
    }
    lp
}

/// `Σ y X β - Σ O e^{Xβ} z θ - |β - μ|² / (2 v)`.
pub fn log_target_beta(data: &Dataset, cfg: &SamplerConfig, theta_area: &[f64], z: &[f64], beta: &[f64]) -> f64 {
    let s_len = data.n_seasons();
    let mut lp = 0.0;
    for i in 0..data.n_areas() {
        for t in 0..data.n_weeks() {
            let eta: f64 = data.x_row(i, t).iter().zip(beta).map(|(x, b)| x * b).sum();
            let k = i * s_len + data.season_of(t);
            lp += data.y(i, t) as f64 * eta - data.offset(i, t) * eta.exp() * z[k] * theta_area[k];
        }
    }
    lp - beta.iter().map(|b| (b - cfg.mu_beta).powi(2)).sum::<f64>() / (2.0 * cfg.var_beta)
}

/// `Σ_{i,s} [V δ / 2 - e^{Vδ} (z - 1)² / (2 z)] - |δ - μ|² / (2 v)`.
pub fn log_target_delta(data: &Dataset, cfg: &SamplerConfig, z: &[f64], delta: &[f64]) -> f64 {
    let s_len = data.n_seasons();
    let mut lp = 0.0;
    for i in 0..data.n_areas() {
        for s in 0..s_len {
            let eta: f64 = data.v_row(i, s).iter().zip(delta).map(|(v, d)| v * d).sum();
            let zk = z[i * s_len + s];
            lp += 0.5 * eta - eta.exp() * (zk - 1.0).powi(2) / (2.0 * zk);
        }
    }
    lp - delta.iter().map(|d| (d - cfg.mu_delta).powi(2)).sum::<f64>() / (2.0 * cfg.var_delta)
}
