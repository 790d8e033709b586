//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use statrs::distribution::{Beta, Binomial, Continuous, Discrete, Gamma, Normal, Poisson};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;
use stppm_core::likelihood::{Dataset, DatasetParts};
use stppm_core::mcmc::{ChainState, Family, SamplerConfig};

/// Full joint log density of the model at `st`, written from the generative
/// description without touching the sampler's conditionals. Trees enter only
/// through the compatibility indicator, which the state guarantees.
pub fn joint_log_density(data: &Dataset, cfg: &SamplerConfig, st: &ChainState) -> f64 {
    let l = &st.latent;
    let gamma = |x: f64, shape: f64, rate: f64| Gamma::new(shape, rate).unwrap().ln_pdf(x);
    let mut lp = gamma(l.upsilon, cfg.a_upsilon, cfg.b_upsilon) + gamma(l.kappa, cfg.a_kappa, cfg.b_kappa);
    let slots = l.rho.len();
    if !cfg.independent {
        lp += gamma(l.zeta, cfg.a_zeta, cfg.b_zeta);
        lp += Beta::new(l.upsilon, l.kappa).unwrap().ln_pdf(l.w);
        for j in 0..slots {
            lp += Poisson::new(l.zeta).unwrap().ln_pmf(l.c[j]);
            lp += Binomial::new(l.w, l.c[j]).unwrap().ln_pmf(l.u[j]);
        }
    }
    let n = data.n_areas() as f64;
    for j in 0..slots {
        let mut su = 0u64;
        let mut sc = 0u64;
        for h in 0..=l.q {
            if h <= j {
                su += l.u[j - h];
                sc += l.c[j - h];
            }
        }
        let (a, b) = (l.upsilon + su as f64, l.kappa + (sc - su) as f64);
        lp += (a - 1.0) * l.rho[j].ln() + (b - 1.0) * (1.0 - l.rho[j]).ln() - ln_beta(a, b);
        let k = st.seasons[j].partition.k() as f64;
        lp += (k - 1.0) * l.rho[j].ln() + (n - k) * (1.0 - l.rho[j]).ln();
    }
    let s_len = data.n_seasons();
    for s in 0..s_len {
        for &theta in &st.seasons[s].theta {
            lp += gamma(theta, cfg.a_theta, cfg.b_theta);
        }
    }
    let normal = |x: f64, mu: f64, var: f64| Normal::new(mu, var.sqrt()).unwrap().ln_pdf(x);
    for &b in &st.beta {
        lp += normal(b, cfg.mu_beta, cfg.var_beta);
    }
    if cfg.family == Family::Pig {
        for &d in &st.delta {
            lp += normal(d, cfg.mu_delta, cfg.var_delta);
        }
        for i in 0..data.n_areas() {
            for s in 0..s_len {
                let psi: f64 = data.v_row(i, s).iter().zip(&st.delta).map(|(v, d)| v * d).sum::<f64>().exp();
                let z = st.z[i * s_len + s];
                lp += 0.5 * psi.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 1.5 * z.ln()
                    - psi * (z - 1.0).powi(2) / (2.0 * z);
            }
        }
    }
    for i in 0..data.n_areas() {
        for t in 0..data.n_weeks() {
            let s = data.season_of(t);
            let season = &st.seasons[s];
            let theta = season.theta[season.partition.label(i)];
            let eta: f64 = data.x_row(i, t).iter().zip(&st.beta).map(|(x, b)| x * b).sum();
            let rate = data.offset(i, t) * eta.exp() * theta * st.z[i * s_len + s];
            lp += Poisson::new(rate).unwrap().ln_pmf(data.y(i, t));
        }
    }
    lp
}

/// Connected components of a path-shaped tree given edge bits over
/// consecutive pairs `(i, i + 1)`.
pub fn path_blocks(n: usize, mask: u32) -> Vec<Vec<usize>> {
    let mut blocks = vec![vec![0]];
    for i in 1..n {
        if mask >> (i - 1) & 1 == 1 {
            blocks.last_mut().unwrap().push(i);
        } else {
            blocks.push(vec![i]);
        }
    }
    blocks
}

/// Exact posterior over the `2^(n-1)` keep/cut vectors of a fixed path tree
/// with `θ*` and `ρ` integrated analytically: beta-binomial cut weight times
/// a gamma-Poisson block marginal. `y[i]` and `e[i]` are season totals of
/// counts and exposures; bit `l` of the index keeps edge `(l, l + 1)`.
pub fn enumerate_path_posterior(y: &[u64], e: &[f64], upsilon: f64, kappa: f64, a: f64, b: f64) -> Vec<f64> {
    let n = y.len();
    let masks = 1u32 << (n - 1);
    let mut logp = Vec::with_capacity(masks as usize);
    for mask in 0..masks {
        let blocks = path_blocks(n, mask);
        let k = blocks.len() as f64;
        let mut lp = ln_beta(upsilon + k - 1.0, kappa + n as f64 - k) - ln_beta(upsilon, kappa);
        for block in &blocks {
            let ys: u64 = block.iter().map(|&i| y[i]).sum();
            let es: f64 = block.iter().map(|&i| e[i]).sum();
            lp += a * b.ln() - ln_gamma(a) + ln_gamma(a + ys as f64) - (a + ys as f64) * (b + es).ln();
        }
        logp.push(lp);
    }
    let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logp.iter().map(|v| (v - max).exp()).sum();
    logp.iter().map(|v| (v - max).exp() / total).collect()
}

/// Dataset with `n` areas, no weeks and `s` seasons: every likelihood term
/// vanishes and the sampler targets the prior.
pub fn data_free(n: usize, s: usize, p_mean: usize, v: Vec<f64>) -> Dataset {
    let p_disp = v.len() / (n * s);
    Dataset::new(DatasetParts {
        n_areas: n,
        n_seasons: s,
        season_of_week: vec![],
        y: vec![],
        offset: vec![],
        p_mean,
        x: vec![],
        p_disp,
        v,
    })
    .unwrap()
}

/// Batch-means Monte Carlo standard error of the mean.
pub fn batch_mcse(xs: &[f64]) -> f64 {
    let n_batches = (xs.len() as f64).sqrt().floor() as usize;
    let size = xs.len() / n_batches;
    let means: Vec<f64> = (0..n_batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / n_batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (n_batches - 1) as f64;
    (var / n_batches as f64).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(ν t) dt` by the trapezoid rule.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    let h: f64 = 1e-3;
    let mut sum = 0.5 * (-x).exp();
    let mut t = h;
    loop {
        let term = (-x * t.cosh()).exp() * (nu * t).cosh();
        sum += term;
        if term < 1e-300 || t > 50.0 {
            break;
        }
        t += h;
    }
    sum * h
}

/// Mean of the GIG law with density `∝ x^{p-1} exp(-(a x + b / x) / 2)`.
pub fn gig_mean(p: f64, a: f64, b: f64) -> f64 {
    let w = (a * b).sqrt();
    (b / a).sqrt() * bessel_k(p + 1.0, w) / bessel_k(p, w)
}

/// `P(Y = 0)` for `Y | z ~ Poi(μ z)`, `z ~ IG(1, ψ)`, integrating over
/// `log z` with the trapezoid rule.
pub fn pig_zero_quadrature(mu: f64, psi: f64) -> f64 {
    let h = 1e-3;
    let (lo, hi) = (-60.0, 12.0);
    let steps = ((hi - lo) / h) as usize;
    let mut sum = 0.0;
    for k in 0..=steps {
        let t = lo + k as f64 * h;
        let z = f64::exp(t);
        let log_ig = 0.5 * psi.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 1.5 * t - psi * (z - 1.0).powi(2) / (2.0 * z);
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        // dz = z dt
        sum += w * (log_ig - mu * z + t).exp();
    }
    sum * h
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against `cdf`.
pub fn ks_statistic(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Pairwise-agreement Rand index from label vectors.
pub fn rand_index_labels(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut agree = 0usize;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            agree += usize::from((a[i] == a[j]) == (b[i] == b[j]));
            pairs += 1;
        }
    }
    agree as f64 / pairs as f64
}
