use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use stppm_core::mcmc::{chain_rng, WaicLikelihood};
use stppm_core::postprocess::{credible_interval, dispersion_indicators, summarize, PartitionLoss, SummaryOptions};
use stppm_core::{PosteriorSummary, Waic};

use crate::failure::{CliResult, Failure};
use crate::manifest::ManifestBuilder;
use crate::output::{create_dir, num, write_csv, write_json};
use crate::run::{load_run, LoadedRun, META_FILE};

pub const SUMMARY_FILE: &str = "summary.json";
pub const PARTITIONS_FILE: &str = "partitions.csv";
pub const RI_MATRIX_FILE: &str = "ri_matrix.csv";
pub const FLAGS_FILE: &str = "dispersion_flags.csv";
pub const WAIC_FILE: &str = "waic.txt";

#[derive(Debug, Clone, Args)]
pub struct SummaryFlags {
    /// Credible level for intervals and dispersion flags.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Partition loss: vi or binder.
    #[arg(long, default_value = "vi", value_parser = parse_loss)]
    loss: PartitionLoss,
    /// Random restarts of the point-estimate search.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Seed of the point-estimate search.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// WAIC headline likelihood (marginal or conditional); defaults to the
    /// fitted config's choice.
    #[arg(long, value_parser = parse_waic)]
    waic_likelihood: Option<WaicLikelihood>,
    /// Data directory, when it moved since fitting.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Directory written by `fit` (the one holding meta.json).
    #[arg(long)]
    run: PathBuf,
    /// Output directory; defaults to RUN/summary.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: SummaryFlags,
}

fn parse_loss(s: &str) -> Result<PartitionLoss, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase()))
        .map_err(|_| format!("unknown loss `{s}` (expected vi or binder)"))
}

fn parse_waic(s: &str) -> Result<WaicLikelihood, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase()))
        .map_err(|_| format!("unknown WAIC likelihood `{s}` (expected marginal or conditional)"))
}

/// Loads a run and summarizes it with the given flags.
pub fn load_and_summarize(run_dir: &Path, flags: &SummaryFlags) -> CliResult<(LoadedRun, PosteriorSummary)> {
    let run = load_run(run_dir, flags.data_dir.as_deref())?;
    let opts = SummaryOptions {
        level: flags.level,
        loss: flags.loss,
        restarts: flags.restarts,
        seed: flags.seed,
        family: run.meta.config.family,
        waic_likelihood: flags.waic_likelihood.unwrap_or(run.meta.config.waic_likelihood),
    };
    let summary = summarize(&run.graph, &run.store, &opts, &mut chain_rng(flags.seed, 0))?;
    Ok((run, summary))
}

pub fn run(args: SummarizeArgs, argv: &[String]) -> CliResult {
    let out = args.out.clone().unwrap_or_else(|| args.run.join("summary"));
    let manifest = ManifestBuilder::start("summarize", argv)
        .seeds(vec![args.flags.seed])
        .input(&args.run.join(META_FILE));
    let (run, summary) = load_and_summarize(&args.run, &args.flags)?;
    create_dir(&out)?;
    write_summary_files(&out, &run, &summary)?;
    manifest.data_dir(&run.meta.data_dir).finish(&out)?;
    print!("{}", waic_text(&summary));
    if summary.contiguity_violations > 0 {
        eprintln!(
            "warning: {} sampled partitions have a disconnected cluster",
            summary.contiguity_violations
        );
    }
    Ok(())
}

pub fn write_summary_files(out: &Path, run: &LoadedRun, summary: &PosteriorSummary) -> CliResult {
    write_json(&out.join(SUMMARY_FILE), summary)?;
    write_partitions(&out.join(PARTITIONS_FILE), summary)?;
    write_ri_matrix(&out.join(RI_MATRIX_FILE), summary)?;
    write_flags(&out.join(FLAGS_FILE), run, summary.level)?;
    std::fs::write(out.join(WAIC_FILE), waic_text(summary)).map_err(|e| Failure::io(&out.join(WAIC_FILE), e))
}

pub fn write_partitions(path: &Path, summary: &PosteriorSummary) -> CliResult {
    write_csv(
        path,
        &["season", "area", "cluster"],
        summary.partitions.iter().flat_map(|e| {
            e.labels
                .iter()
                .enumerate()
                .map(move |(i, l)| vec![e.season.to_string(), i.to_string(), l.to_string()])
        }),
    )
}

pub fn write_ri_matrix(path: &Path, summary: &PosteriorSummary) -> CliResult {
    write_csv(
        path,
        &["season_a", "season_b", "ri"],
        summary.ri_matrix.iter().enumerate().flat_map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(move |(b, v)| vec![a.to_string(), b.to_string(), num(*v)])
        }),
    )
}

pub fn write_flags(path: &Path, run: &LoadedRun, level: f64) -> CliResult {
    let store = &run.store;
    let flags = dispersion_indicators(&store.z, level);
    let s_len = store.shape.n_seasons;
    let mut rows = Vec::with_capacity(flags.len());
    for (k, flag) in flags.iter().enumerate() {
        let col: Vec<f64> = store.z.iter().map(|d| d[k]).collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let (lo, hi) = credible_interval(&col, level);
        rows.push(vec![
            (k / s_len).to_string(),
            (k % s_len).to_string(),
            u8::from(*flag).to_string(),
            num(mean),
            num(lo),
            num(hi),
        ]);
    }
    write_csv(path, &["area", "season", "overdispersed", "z_mean", "z_lower", "z_upper"], rows)
}

pub fn waic_text(summary: &PosteriorSummary) -> String {
    let mut s = String::new();
    let which = match summary.waic_likelihood {
        WaicLikelihood::Marginal => "marginal",
        WaicLikelihood::Conditional => "conditional",
    };
    let line = |s: &mut String, name: &str, w: Option<Waic>| {
        match w {
            Some(w) => writeln!(s, "{name}\twaic={}\tlppd={}\tp_waic={}", w.waic, w.lppd, w.p_waic),
            None => writeln!(s, "{name}\tunavailable"),
        }
        .expect("string write");
    };
    writeln!(s, "likelihood\t{which}").expect("string write");
    line(&mut s, "waic", summary.waic);
    line(&mut s, "marginal", summary.waic_marginal);
    line(&mut s, "conditional", summary.waic_conditional);
    s
}
