//! Poisson-inverse-Gaussian observation model.
//!
//! Per-(area, week) arrays are area-major (`i * T + t`); per-(area, season)
//! arrays likewise (`i * S + s`).

mod io;
mod pig;

use std::ops::Range;

pub use pig::pig_log_pmf;
pub use io::{load_data_dir, write_data_dir, LoadOptions, ADJACENCY, CASES, COVARIATES_DISP, COVARIATES_MEAN, SEASONS};

/// File names making up a data directory, required ones first.
pub const DATA_FILES: [&str; 5] = [ADJACENCY, CASES, SEASONS, COVARIATES_MEAN, COVARIATES_DISP];

use crate::dist::{ln_factorial, ln_gamma};
use crate::error::{Error, Result};
use crate::logprob::LogProb;

/// Raw inputs for [`Dataset::new`].
#[derive(Clone, Debug, Default)]
pub struct DatasetParts {
    pub n_areas: usize,
    /// Needed when there are no weeks; otherwise must match the season map.
    pub n_seasons: usize,
    /// Non-decreasing season id per week.
    pub season_of_week: Vec<usize>,
    pub y: Vec<u64>,
    pub offset: Vec<f64>,
    /// Number of mean covariates.
    pub p_mean: usize,
    /// `n_areas * n_weeks * p_mean`, area-major then week.
    pub x: Vec<f64>,
    /// Number of dispersion covariates, intercept included.
    pub p_disp: usize,
    /// `n_areas * n_seasons * p_disp`.
    pub v: Vec<f64>,
}

/// Validated weekly counts with offsets and covariates.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n_areas: usize,
    n_weeks: usize,
    n_seasons: usize,
    p_mean: usize,
    p_disp: usize,
    y: Vec<u64>,
    offset: Vec<f64>,
    x: Vec<f64>,
    v: Vec<f64>,
    season_of_week: Vec<usize>,
    season_weeks: Vec<Range<usize>>,
    y_season: Vec<u64>,
}

impl Dataset {
    pub fn new(parts: DatasetParts) -> Result<Self> {
        let DatasetParts {
            n_areas,
            n_seasons,
            season_of_week,
            y,
            offset,
            p_mean,
            x,
            p_disp,
            v,
        } = parts;
        if n_areas == 0 {
            return Err(Error::InvalidData("no areas".into()));
        }
        let n_weeks = season_of_week.len();
        let mut season_weeks: Vec<Range<usize>> = Vec::new();
        for (t, &s) in season_of_week.iter().enumerate() {
            match season_weeks.len() {
                len if s + 1 == len => season_weeks[s].end = t + 1,
                len if s == len => season_weeks.push(t..t + 1),
                _ => {
                    return Err(Error::InvalidData(format!(
                        "week {t} maps to season {s}; seasons must cover 0..S in contiguous, ordered blocks"
                    )))
                }
            }
        }
        if n_weeks > 0 && season_weeks.len() != n_seasons {
            return Err(Error::Dimension {
                what: "seasons in the week map",
                expected: n_seasons,
                got: season_weeks.len(),
            });
        }
        season_weeks.resize(n_seasons, 0..0);
        if n_seasons == 0 {
            return Err(Error::InvalidData("no seasons".into()));
        }
        let obs = n_areas * n_weeks;
        for (what, expected, got) in [
            ("counts", obs, y.len()),
            ("offsets", obs, offset.len()),
            ("mean covariates", obs * p_mean, x.len()),
            ("dispersion covariates", n_areas * n_seasons * p_disp, v.len()),
        ] {
            if expected != got {
                return Err(Error::Dimension {
                    what,
                    expected,
                    got,
                });
            }
        }
        if p_disp == 0 {
            return Err(Error::InvalidData(
                "dispersion design needs at least the intercept column".into(),
            ));
        }
        if let Some(k) = offset.iter().position(|&o| !(o > 0.0 && o.is_finite())) {
            return Err(Error::InvalidData(format!(
                "offset for area {} week {} must be positive, got {}",
                k / n_weeks,
                k % n_weeks,
                offset[k]
            )));
        }
        if x.iter().chain(v.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidData("covariates must be finite".into()));
        }
        let mut y_season = vec![0u64; n_areas * n_seasons];
        for i in 0..n_areas {
            for (s, weeks) in season_weeks.iter().enumerate() {
                y_season[i * n_seasons + s] = y[i * n_weeks + weeks.start..i * n_weeks + weeks.end]
                    .iter()
                    .sum();
            }
        }
        Ok(Dataset {
            n_areas,
            n_weeks,
            n_seasons,
            p_mean,
            p_disp,
            y,
            offset,
            x,
            v,
            season_of_week,
            season_weeks,
            y_season,
        })
    }

    pub fn n_areas(&self) -> usize {
        self.n_areas
    }

    pub fn n_weeks(&self) -> usize {
        self.n_weeks
    }

    pub fn n_seasons(&self) -> usize {
        self.n_seasons
    }

    pub fn n_obs(&self) -> usize {
        self.n_areas * self.n_weeks
    }

    pub fn p_mean(&self) -> usize {
        self.p_mean
    }

    pub fn p_disp(&self) -> usize {
        self.p_disp
    }

    pub fn y(&self, i: usize, t: usize) -> u64 {
        self.y[i * self.n_weeks + t]
    }

    pub fn counts(&self) -> &[u64] {
        &self.y
    }

    pub fn offset(&self, i: usize, t: usize) -> f64 {
        self.offset[i * self.n_weeks + t]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offset
    }

    pub fn x_row(&self, i: usize, t: usize) -> &[f64] {
        let k = (i * self.n_weeks + t) * self.p_mean;
        &self.x[k..k + self.p_mean]
    }

    pub fn v_row(&self, i: usize, s: usize) -> &[f64] {
        let k = (i * self.n_seasons + s) * self.p_disp;
        &self.v[k..k + self.p_disp]
    }

    pub fn season_of(&self, t: usize) -> usize {
        self.season_of_week[t]
    }

    pub fn season_of_week(&self) -> &[usize] {
        &self.season_of_week
    }

    pub fn season_weeks(&self, s: usize) -> Range<usize> {
        self.season_weeks[s].clone()
    }

    /// `Σ_{t ∈ s} y_it`.
    pub fn y_season(&self, i: usize, s: usize) -> u64 {
        self.y_season[i * self.n_seasons + s]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `λ_it = exp(X_it β) θ`, where `θ` is the cluster level of area `i` in the
/// season of week `t`. The Poisson rate is `O_it λ_it z_is`.
pub fn mean_rate(data: &Dataset, i: usize, t: usize, beta: &[f64], theta: f64) -> f64 {
    dot(data.x_row(i, t), beta).exp() * theta
}

/// `ψ_is = exp(V_is δ)`.
pub fn dispersion_param(data: &Dataset, i: usize, s: usize, delta: &[f64]) -> f64 {
    dot(data.v_row(i, s), delta).exp()
}

/// `O_it exp(X_it β)` for every observation.
pub fn exposures(data: &Dataset, beta: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(data.n_obs());
    for i in 0..data.n_areas() {
        for t in 0..data.n_weeks() {
            out.push(data.offset(i, t) * dot(data.x_row(i, t), beta).exp());
        }
    }
    out
}

/// Season totals `E_is = Σ_{t ∈ s} O_it exp(X_it β)` from [`exposures`].
pub fn season_exposures(data: &Dataset, exposure: &[f64]) -> Vec<f64> {
    let (t_len, s_len) = (data.n_weeks(), data.n_seasons());
    let mut out = vec![0.0; data.n_areas() * s_len];
    for i in 0..data.n_areas() {
        for s in 0..s_len {
            let weeks = data.season_weeks(s);
            out[i * s_len + s] = exposure[i * t_len + weeks.start..i * t_len + weeks.end]
                .iter()
                .sum();
        }
    }
    out
}

/// `log f = log Γ(a + Y) - (a + Y) log(b + E)` for a block with total count
/// `Y` and heterogeneity-weighted exposure `E`.
pub fn log_cluster_marginal(y_sum: u64, exposure: f64, a: f64, b: f64) -> f64 {
    let shape = a + y_sum as f64;
    ln_gamma(shape) - shape * (b + exposure).ln()
}

/// Collapsed marginal of a cluster in one season, `θ*` integrated out up to
/// the `b^a / Γ(a)` prior constant. `z_season[i]` is `z_is` for this season.
pub fn collapsed_cluster_marginal(
    members: &[usize],
    season: usize,
    data: &Dataset,
    beta: &[f64],
    z_season: &[f64],
    a_theta: f64,
    b_theta: f64,
) -> f64 {
    let weeks = data.season_weeks(season);
    let mut y_sum = 0;
    let mut exposure = 0.0;
    for &i in members {
        y_sum += data.y_season(i, season);
        let e: f64 = weeks
            .clone()
            .map(|t| data.offset(i, t) * dot(data.x_row(i, t), beta).exp())
            .sum();
        exposure += z_season[i] * e;
    }
    log_cluster_marginal(y_sum, exposure, a_theta, b_theta)
}

pub fn poisson_log_pmf(y: u64, rate: f64) -> LogProb {
    if rate > 0.0 {
        LogProb::Finite(y as f64 * rate.ln() - rate - ln_factorial(y))
    } else if y == 0 {
        LogProb::ONE
    } else {
        LogProb::Impossible
    }
}

/// Pointwise `log Poi(y_it; O_it λ_it z_is)`; `theta_area` and `z` are
/// per-(area, season). Zero-mass points come back as `-inf`.
pub fn conditional_poisson_loglik(
    data: &Dataset,
    beta: &[f64],
    theta_area: &[f64],
    z: &[f64],
) -> Vec<f64> {
    let s_len = data.n_seasons();
    let mut out = Vec::with_capacity(data.n_obs());
    for i in 0..data.n_areas() {
        for t in 0..data.n_weeks() {
            let k = i * s_len + data.season_of(t);
            let rate = data.offset(i, t) * mean_rate(data, i, t, beta, theta_area[k]) * z[k];
            out.push(poisson_log_pmf(data.y(i, t), rate).to_f64());
        }
    }
    out
}

/// Pointwise marginal `log PIG(y_it; O_it λ_it, ψ_is)` with `z` integrated
/// out.
pub fn marginal_pig_loglik(
    data: &Dataset,
    beta: &[f64],
    theta_area: &[f64],
    delta: &[f64],
) -> Result<Vec<f64>> {
    let s_len = data.n_seasons();
    let psi: Vec<f64> = (0..data.n_areas() * s_len)
        .map(|k| dispersion_param(data, k / s_len, k % s_len, delta))
        .collect();
    let mut out = Vec::with_capacity(data.n_obs());
    for i in 0..data.n_areas() {
        for t in 0..data.n_weeks() {
            let k = i * s_len + data.season_of(t);
            let mu = data.offset(i, t) * mean_rate(data, i, t, beta, theta_area[k]);
            out.push(pig_log_pmf(data.y(i, t), mu, psi[k])?);
        }
    }
    Ok(out)
}

/// Standardized incidence ratios `Y_i / E_i`.
pub fn compute_sir(y_totals: &[f64], expected_totals: &[f64]) -> Result<Vec<f64>> {
    if y_totals.len() != expected_totals.len() {
        return Err(Error::Dimension {
            what: "expected totals",
            expected: y_totals.len(),
            got: expected_totals.len(),
        });
    }
    y_totals
        .iter()
        .zip(expected_totals)
        .enumerate()
        .map(|(i, (&y, &e))| {
            if e > 0.0 && e.is_finite() {
                Ok(y / e)
            } else {
                Err(Error::InvalidData(format!(
                    "expected count for area {i} must be positive, got {e}"
                )))
            }
        })
        .collect()
}
