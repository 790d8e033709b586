use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::{positive, PartitionPriorHyper};

/// Observation family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Poisson with inverse-Gaussian heterogeneity.
    #[default]
    Pig,
    /// Plain Poisson: `z ≡ 1`, `δ` unused.
    Poisson,
}

/// Pointwise likelihood used for WAIC.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaicLikelihood {
    /// Heterogeneity integrated out (PIG mass; Poisson mass for the Poisson
    /// family).
    #[default]
    Marginal,
    /// Poisson mass given the sampled `z`.
    Conditional,
}

/// Parameter blocks of one sweep; listed in `freeze` to hold them at their
/// initial values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Upsilon,
    Kappa,
    Zeta,
    W,
    Tree,
    Partition,
    Rho,
    C,
    U,
    Theta,
    Z,
    Beta,
    Delta,
}

/// Flat sampler configuration, read from JSON. Every field has a default so
/// a config file only needs the keys it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub n_iter: usize,
    /// Fraction of iterations discarded, in `[0, 1)`.
    pub burn_in: f64,
    pub thin: usize,
    pub q: usize,
    pub seed: u64,
    pub family: Family,
    /// Freeze `u ≡ c ≡ 0` so the `ρ_s` are iid `Be(υ, κ)`.
    pub independent: bool,

    pub scale_beta: f64,
    pub scale_delta: f64,
    pub scale_upsilon: f64,
    pub scale_kappa: f64,
    /// Tune the four scales above during burn-in.
    pub adapt: bool,
    pub target_acceptance: f64,

    pub mu_beta: f64,
    pub var_beta: f64,
    pub mu_delta: f64,
    pub var_delta: f64,
    pub a_theta: f64,
    pub b_theta: f64,
    pub a_upsilon: f64,
    pub b_upsilon: f64,
    pub a_kappa: f64,
    pub b_kappa: f64,
    pub a_zeta: f64,
    pub b_zeta: f64,

    pub freeze: Vec<Block>,
    pub init_upsilon: Option<f64>,
    pub init_kappa: Option<f64>,
    pub init_zeta: Option<f64>,
    pub init_w: Option<f64>,
    pub init_rho: Option<f64>,
    pub init_beta: Option<Vec<f64>>,
    pub init_delta: Option<Vec<f64>>,

    pub waic_likelihood: WaicLikelihood,
    pub store_loglik: bool,
    /// Prepend an intercept to the dispersion design when loading data.
    pub disp_intercept: bool,
    /// Check tree/partition compatibility and `u ≤ c` after every sweep.
    pub check_invariants: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_iter: 10_000,
            burn_in: 0.7,
            thin: 3,
            q: 1,
            seed: 1,
            family: Family::Pig,
            independent: false,
            scale_beta: 0.02,
            scale_delta: 0.1,
            scale_upsilon: 0.3,
            scale_kappa: 0.1,
            adapt: true,
            target_acceptance: 0.3,
            mu_beta: 0.0,
            var_beta: 10.0,
            mu_delta: 0.0,
            var_delta: 10.0,
            a_theta: 1.0,
            b_theta: 1.0,
            a_upsilon: 10.0,
            b_upsilon: 1.0,
            a_kappa: 100.0,
            b_kappa: 1.0,
            a_zeta: 1.0,
            b_zeta: 1.0,
            freeze: Vec::new(),
            init_upsilon: None,
            init_kappa: None,
            init_zeta: None,
            init_w: None,
            init_rho: None,
            init_beta: None,
            init_delta: None,
            waic_likelihood: WaicLikelihood::Marginal,
            store_loglik: true,
            disp_intercept: true,
            check_invariants: true,
        }
    }
}

impl SamplerConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::param("n_iter", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::param("burn_in", format!("must lie in [0, 1), got {}", self.burn_in)));
        }
        if self.thin == 0 {
            return Err(Error::param("thin", "must be at least 1"));
        }
        for (name, v) in [
            ("scale_beta", self.scale_beta),
            ("scale_delta", self.scale_delta),
            ("scale_upsilon", self.scale_upsilon),
            ("scale_kappa", self.scale_kappa),
            ("var_beta", self.var_beta),
            ("var_delta", self.var_delta),
            ("a_theta", self.a_theta),
            ("b_theta", self.b_theta),
        ] {
            positive(name, v)?;
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::param("target_acceptance", "must lie in (0, 1)"));
        }
        if !(self.mu_beta.is_finite() && self.mu_delta.is_finite()) {
            return Err(Error::NonFinite("prior means"));
        }
        self.hyper().validate()?;
        for (name, v) in [
            ("init_upsilon", self.init_upsilon),
            ("init_kappa", self.init_kappa),
            ("init_zeta", self.init_zeta),
        ] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        for (name, v) in [("init_w", self.init_w), ("init_rho", self.init_rho)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::param(name, format!("must lie in (0, 1), got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Autoregressive order actually used: zero in independence mode.
    pub fn effective_q(&self) -> usize {
        if self.independent {
            0
        } else {
            self.q
        }
    }

    pub fn hyper(&self) -> PartitionPriorHyper {
        PartitionPriorHyper {
            a_upsilon: self.a_upsilon,
            b_upsilon: self.b_upsilon,
            a_kappa: self.a_kappa,
            b_kappa: self.b_kappa,
            a_zeta: self.a_zeta,
            b_zeta: self.b_zeta,
            q: self.effective_q(),
        }
    }

    /// Whether `block` is sampled, accounting for family and independence
    /// mode as well as the explicit freeze list.
    pub fn updates(&self, block: Block) -> bool {
        if self.freeze.contains(&block) {
            return false;
        }
        match block {
            Block::Z | Block::Delta => self.family == Family::Pig,
            Block::Zeta | Block::W | Block::C | Block::U => !self.independent,
            _ => true,
        }
    }

    /// Number of leading sweeps discarded.
    pub fn n_burn(&self) -> usize {
        self.n_iter - self.retained_window()
    }

    fn retained_window(&self) -> usize {
        (((1.0 - self.burn_in) * self.n_iter as f64) + 1e-9).floor() as usize
    }

    /// `floor((1 - burn_in) n_iter / thin)`.
    pub fn n_draws(&self) -> usize {
        self.retained_window() / self.thin
    }

    /// True when sweep `m` (zero-based) is stored.
    pub fn is_retained(&self, m: usize) -> bool {
        let burn = self.n_burn();
        m >= burn && (m - burn) % self.thin == self.thin - 1
    }
}
