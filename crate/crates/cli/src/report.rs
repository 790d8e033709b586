use std::path::{Path, PathBuf};

use clap::Args;
use stppm_core::likelihood::mean_rate;
use stppm_core::postprocess::{credible_interval, mean_variance_ratio_from_store};
use stppm_core::prior::rho_autocorrelation;

use crate::failure::CliResult;
use crate::manifest::ManifestBuilder;
use crate::output::{create_dir, num, write_csv};
use crate::run::{LoadedRun, META_FILE};
use crate::summarize::{
    load_and_summarize, write_flags, write_partitions, write_ri_matrix, SummaryFlags, FLAGS_FILE, PARTITIONS_FILE,
    RI_MATRIX_FILE,
};

pub const TRACE_FILE: &str = "trace.csv";
pub const RHO_FILE: &str = "rho_series.csv";
pub const K_FILE: &str = "k_series.csv";
pub const EV_RATIO_FILE: &str = "ev_ratio.csv";
pub const RHO_ACF_FILE: &str = "rho_acf.csv";
pub const RATE_FIT_FILE: &str = "rate_fit.csv";

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `fit`.
    #[arg(long)]
    run: PathBuf,
    /// Output directory for the plot-ready CSVs.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    flags: SummaryFlags,
}

pub fn run(args: ReportArgs, argv: &[String]) -> CliResult {
    let (run, summary) = load_and_summarize(&args.run, &args.flags)?;
    let manifest = ManifestBuilder::start("report-data", argv)
        .input(&args.run.join(META_FILE))
        .data_dir(&run.meta.data_dir);
    let level = summary.level;
    create_dir(&args.out)?;
    let out = |f: &str| args.out.join(f);
    write_trace(&out(TRACE_FILE), &run)?;
    write_slot_series(&out(RHO_FILE), &run, level, |d, j| run.store.rho[d][j])?;
    write_slot_series(&out(K_FILE), &run, level, |d, j| run.store.k[d][j] as f64)?;
    write_ri_matrix(&out(RI_MATRIX_FILE), &summary)?;
    write_partitions(&out(PARTITIONS_FILE), &summary)?;
    write_flags(&out(FLAGS_FILE), &run, level)?;
    write_ev_ratio(&out(EV_RATIO_FILE), &run)?;
    write_rho_acf(&out(RHO_ACF_FILE), &run, level)?;
    write_rate_fit(&out(RATE_FIT_FILE), &run, level)?;
    manifest.finish(&args.out)?;
    Ok(())
}

fn write_trace(path: &Path, run: &LoadedRun) -> CliResult {
    let store = &run.store;
    let names = store.scalar_names();
    let series: Vec<Vec<f64>> = names.iter().map(|n| store.series(n).expect("known series")).collect();
    let mut header = vec!["chain".to_string(), "draw".to_string()];
    header.extend(names.iter().cloned());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(store.n_draws());
    let mut d = 0;
    for chain in &run.meta.chains {
        for local in 0..chain.n_draws {
            let mut row = vec![chain.chain.to_string(), local.to_string()];
            row.extend(series.iter().map(|s| num(s[d])));
            rows.push(row);
            d += 1;
        }
    }
    write_csv(path, &header, rows)
}

/// One row per slot (data seasons then horizon) with posterior mean and
/// equal-tailed interval of `value(draw, slot)`.
fn write_slot_series(path: &Path, run: &LoadedRun, level: f64, value: impl Fn(usize, usize) -> f64) -> CliResult {
    let shape = run.store.shape;
    let rows = (0..shape.n_slots()).map(|j| {
        let xs: Vec<f64> = (0..run.store.n_draws()).map(|d| value(d, j)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let (lo, hi) = credible_interval(&xs, level);
        vec![
            (j + 1).to_string(),
            if j < shape.n_seasons { "data" } else { "horizon" }.to_string(),
            num(mean),
            num(lo),
            num(hi),
        ]
    });
    write_csv(path, &["slot", "kind", "mean", "lower", "upper"], rows)
}

fn write_ev_ratio(path: &Path, run: &LoadedRun) -> CliResult {
    let data = &run.data;
    let ratio = mean_variance_ratio_from_store(data, &run.store, run.meta.config.family)?;
    let t_len = data.n_weeks();
    let rows = ratio.iter().enumerate().map(|(k, r)| {
        let (i, t) = (k / t_len, k % t_len);
        vec![i.to_string(), t.to_string(), data.season_of(t).to_string(), num(*r)]
    });
    write_csv(path, &["area", "week", "season", "ratio"], rows)
}

/// Posterior of `corr(ρ_s, ρ_{s+l})` given the sampled latent counts, for
/// lags up to `q + 1`. Empty for time-independent fits.
fn write_rho_acf(path: &Path, run: &LoadedRun, level: f64) -> CliResult {
    let store = &run.store;
    let s_len = store.shape.n_seasons;
    let q = store.shape.q;
    let mut rows = Vec::new();
    if !run.meta.config.independent {
        for s in 1..=s_len {
            for l in 1..=q + 1 {
                if s + l > store.shape.n_slots() {
                    continue;
                }
                let xs: Vec<f64> = (0..store.n_draws())
                    .map(|d| rho_autocorrelation(s, l, q, store.upsilon[d], store.kappa[d], &store.c[d]))
                    .collect();
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                let (lo, hi) = credible_interval(&xs, level);
                rows.push(vec![s.to_string(), l.to_string(), num(mean), num(lo), num(hi)]);
            }
        }
    }
    write_csv(path, &["season", "lag", "mean", "lower", "upper"], rows)
}

/// Observed counts beside the posterior of the expected count `O λ`.
fn write_rate_fit(path: &Path, run: &LoadedRun, level: f64) -> CliResult {
    let data = &run.data;
    let store = &run.store;
    let (n, t_len, s_len) = (data.n_areas(), data.n_weeks(), data.n_seasons());
    let mut draws = vec![Vec::with_capacity(store.n_draws()); n * t_len];
    for d in 0..store.n_draws() {
        for i in 0..n {
            for t in 0..t_len {
                let theta = store.theta_area[d][i * s_len + data.season_of(t)];
                draws[i * t_len + t].push(data.offset(i, t) * mean_rate(data, i, t, &store.beta[d], theta));
            }
        }
    }
    let rows = draws.iter().enumerate().map(|(k, xs)| {
        let (i, t) = (k / t_len, k % t_len);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let (lo, hi) = credible_interval(xs, level);
        vec![
            i.to_string(),
            t.to_string(),
            data.season_of(t).to_string(),
            data.y(i, t).to_string(),
            num(mean),
            num(lo),
            num(hi),
        ]
    });
    write_csv(path, &["area", "week", "season", "y", "mean", "lower", "upper"], rows)
}
