use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use stppm_core::mcmc::{chain_rng, run_chain, Family, SampleStore, SamplerConfig, StoreShape, WaicLikelihood};
use stppm_core::postprocess::waic;
use stppm_core::{Dataset, SpatialGraph};

use crate::failure::{CliResult, Failure};
use crate::manifest::ManifestBuilder;
use crate::output::{create_dir, num, write_csv, write_json};
use crate::run::{chain_dir_name, load_data, ChainMeta, RunMeta, META_FILE};

pub const WAIC_TABLE_FILE: &str = "waic_table.csv";

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Directory with adjacency.csv, cases.csv, seasons.csv and optional
    /// covariate files.
    #[arg(long)]
    data_dir: PathBuf,
    /// Sampler config JSON; defaults apply to absent fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Independent chains, run in parallel; chain c uses RNG stream c.
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Overrides the config order; 0 fits time-independent partitions.
    #[arg(long)]
    q: Option<usize>,
    /// Fit once per listed order (comma separated, 0 = independent) and
    /// write a WAIC comparison table.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    q_scan: Vec<usize>,
    /// Overrides the config sweep count.
    #[arg(long)]
    iter: Option<usize>,
    /// Overrides the config family: pig or poisson.
    #[arg(long, value_parser = parse_family)]
    family: Option<Family>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase()))
        .map_err(|_| format!("unknown family `{s}` (expected pig or poisson)"))
}

/// Sets the order, mapping 0 to independence mode.
pub fn with_order(mut cfg: SamplerConfig, q: usize) -> SamplerConfig {
    if q == 0 {
        cfg.independent = true;
    } else {
        cfg.independent = false;
        cfg.q = q;
    }
    cfg
}

pub fn run(args: FitArgs, argv: &[String]) -> CliResult {
    if args.chains == 0 {
        return Err(Failure::validation("--chains must be at least 1"));
    }
    let mut cfg = match &args.config {
        Some(path) => SamplerConfig::from_json_file(path)?,
        None => SamplerConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.iter {
        cfg.n_iter = n;
    }
    if let Some(f) = args.family {
        cfg.family = f;
    }
    if let Some(q) = args.q {
        cfg = with_order(cfg, q);
    }
    cfg.validate()?;
    let (graph, data) = load_data(&args.data_dir, &cfg)?;
    let data_dir = std::fs::canonicalize(&args.data_dir).map_err(|e| Failure::io(&args.data_dir, e))?;

    let mut manifest = ManifestBuilder::start("fit", argv)
        .seeds(vec![cfg.seed])
        .config(&cfg)
        .data_dir(&data_dir);
    if let Some(path) = &args.config {
        manifest = manifest.input(path);
    }
    create_dir(&args.out)?;

    if args.q_scan.is_empty() {
        let stores = fit_run(&graph, &data, &cfg, args.chains, &data_dir, &args.out)?;
        report_chains(&stores);
    } else {
        let mut rows = Vec::new();
        for &q in &args.q_scan {
            let cfg_q = with_order(cfg.clone(), q);
            cfg_q.validate()?;
            let dir = args.out.join(format!("q{q}"));
            eprintln!("fitting q = {q}");
            let stores = fit_run(&graph, &data, &cfg_q, args.chains, &data_dir, &dir)?;
            rows.push(waic_row(q, &stores)?);
        }
        write_waic_table(&args.out.join(WAIC_TABLE_FILE), &rows, cfg.waic_likelihood)?;
        print_waic_table(&rows, cfg.waic_likelihood);
    }
    manifest.finish(&args.out)?;
    Ok(())
}

/// Runs `n_chains` chains in parallel and writes `chain_c/` directories plus
/// `meta.json` under `out`.
pub fn fit_run(
    graph: &SpatialGraph,
    data: &Dataset,
    cfg: &SamplerConfig,
    n_chains: usize,
    data_dir: &Path,
    out: &Path,
) -> CliResult<Vec<SampleStore>> {
    create_dir(out)?;
    let results: Vec<(stppm_core::Result<SampleStore>, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n_chains)
            .map(|c| {
                scope.spawn(move || {
                    let clock = Instant::now();
                    let store = run_chain(graph, data, cfg, &mut chain_rng(cfg.seed, c as u64));
                    (store, clock.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });
    let mut stores = Vec::with_capacity(n_chains);
    let mut chains = Vec::with_capacity(n_chains);
    for (c, (result, wall_seconds)) in results.into_iter().enumerate() {
        let store = result.map_err(|e| Failure::runtime(format!("chain {c}: {e}")))?;
        let dir = chain_dir_name(c);
        store.write_dir(&out.join(&dir))?;
        chains.push(ChainMeta {
            chain: c,
            dir,
            n_draws: store.n_draws(),
            wall_seconds,
            acceptance: store.acceptance.clone(),
        });
        stores.push(store);
    }
    let meta = RunMeta {
        engine_version: stppm_core::VERSION.to_string(),
        data_dir: data_dir.to_path_buf(),
        seed: cfg.seed,
        config: cfg.clone(),
        shape: StoreShape {
            n_areas: data.n_areas(),
            n_seasons: data.n_seasons(),
            q: cfg.effective_q(),
            n_weeks: data.n_weeks(),
            p_mean: data.p_mean(),
            p_disp: data.p_disp(),
        },
        chains,
    };
    write_json(&out.join(META_FILE), &meta)?;
    Ok(stores)
}

fn report_chains(stores: &[SampleStore]) {
    for (c, s) in stores.iter().enumerate() {
        let a = &s.acceptance;
        eprintln!(
            "chain {c}: {} draws; acceptance upsilon {:.2} kappa {:.2} beta {:.2} delta {:.2} c {:.2} u {:.2}",
            s.n_draws(),
            a.upsilon.rate(),
            a.kappa.rate(),
            a.beta.rate(),
            a.delta.rate(),
            a.c.rate(),
            a.u.rate()
        );
    }
}

#[derive(Clone, Debug)]
pub struct WaicRow {
    pub q: usize,
    pub marginal: Option<stppm_core::Waic>,
    pub conditional: Option<stppm_core::Waic>,
}

impl WaicRow {
    pub fn value(&self, which: WaicLikelihood) -> Option<f64> {
        match which {
            WaicLikelihood::Marginal => self.marginal.map(|w| w.waic),
            WaicLikelihood::Conditional => self.conditional.map(|w| w.waic),
        }
    }
}

fn waic_row(q: usize, stores: &[SampleStore]) -> CliResult<WaicRow> {
    let pooled = |pick: fn(&SampleStore) -> &Vec<Vec<f64>>| -> CliResult<Option<stppm_core::Waic>> {
        let rows: Vec<Vec<f64>> = stores.iter().flat_map(|s| pick(s).iter().cloned()).collect();
        if rows.len() < 2 || rows.iter().any(Vec::is_empty) {
            return Ok(None);
        }
        Ok(Some(waic(&rows)?))
    };
    Ok(WaicRow {
        q,
        marginal: pooled(|s| &s.loglik)?,
        conditional: pooled(|s| &s.loglik_conditional)?,
    })
}

fn label(q: usize) -> String {
    if q == 0 {
        "iid".into()
    } else {
        format!("q={q}")
    }
}

fn best(rows: &[WaicRow], which: WaicLikelihood) -> Option<usize> {
    rows.iter()
        .enumerate()
        .filter_map(|(i, r)| r.value(which).map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

fn write_waic_table(path: &Path, rows: &[WaicRow], which: WaicLikelihood) -> CliResult {
    let chosen = best(rows, which);
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    write_csv(
        path,
        &[
            "q",
            "model",
            "waic_marginal",
            "p_waic_marginal",
            "waic_conditional",
            "p_waic_conditional",
            "lowest",
        ],
        rows.iter().enumerate().map(|(i, r)| {
            vec![
                r.q.to_string(),
                label(r.q),
                opt(r.marginal.map(|w| w.waic)),
                opt(r.marginal.map(|w| w.p_waic)),
                opt(r.conditional.map(|w| w.waic)),
                opt(r.conditional.map(|w| w.p_waic)),
                (Some(i) == chosen).to_string(),
            ]
        }),
    )
}

fn print_waic_table(rows: &[WaicRow], which: WaicLikelihood) {
    let chosen = best(rows, which);
    println!("{:<6} {:>14} {:>14}", "model", "WAIC(marg)", "WAIC(cond)");
    for (i, r) in rows.iter().enumerate() {
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
        println!(
            "{:<6} {:>14} {:>14}{}",
            label(r.q),
            cell(r.marginal.map(|w| w.waic)),
            cell(r.conditional.map(|w| w.waic)),
            if Some(i) == chosen { "  *" } else { "" }
        );
    }
}
