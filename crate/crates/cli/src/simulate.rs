use std::path::PathBuf;

use clap::{ArgGroup, Args};
use stppm_core::likelihood::write_data_dir;
use stppm_core::mcmc::chain_rng;
use stppm_core::synthetic::{builtin_scenario, builtin_scenarios, generate_dataset, ScenarioSpec, TRUTH_FILE};

use crate::failure::{CliResult, Failure};
use crate::manifest::ManifestBuilder;
use crate::output::{create_dir, write_json};

pub const SCENARIO_FILE: &str = "scenario.json";

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["scenario", "spec"])))]
pub struct SimulateArgs {
    /// Built-in scenario name, e.g. sim1-sce1-over or sim2-sce2.
    #[arg(long)]
    scenario: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output data directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Replace the scenario graph with a rows x cols grid (needs --cols).
    #[arg(long, requires = "cols")]
    rows: Option<usize>,
    #[arg(long, requires = "rows")]
    cols: Option<usize>,
    /// Number of seasons to generate.
    #[arg(long)]
    seasons: Option<usize>,
    #[arg(long)]
    weeks_per_season: Option<usize>,
}

pub fn run(args: SimulateArgs, argv: &[String]) -> CliResult {
    let manifest = ManifestBuilder::start("simulate", argv).seeds(vec![args.seed]);
    let mut spec = match (&args.scenario, &args.spec) {
        (Some(name), _) => builtin_scenario(name).ok_or_else(|| {
            let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
            Failure::validation(format!("unknown scenario `{name}`; available: {}", names.join(", ")))
        })?,
        (None, Some(path)) => ScenarioSpec::from_json_file(path)?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    if let (Some(rows), Some(cols)) = (args.rows, args.cols) {
        spec = spec.with_grid(rows, cols);
    }
    if let Some(s) = args.seasons {
        spec = spec.with_seasons(s);
    }
    if let Some(w) = args.weeks_per_season {
        spec = spec.with_weeks(w);
    }
    let manifest = match &args.spec {
        Some(path) => manifest.input(path),
        None => manifest,
    }
    .config(&spec);

    let (graph, data, truth) = generate_dataset(&spec, &mut chain_rng(args.seed, 0))?;
    create_dir(&args.out)?;
    write_data_dir(&args.out, &graph, &data)?;
    truth.write_json(&args.out.join(TRUTH_FILE))?;
    write_json(&args.out.join(SCENARIO_FILE), &spec)?;
    manifest.finish(&args.out)?;
    eprintln!(
        "wrote {} ({} areas, {} seasons, {} weeks) to {}",
        spec.name,
        data.n_areas(),
        data.n_seasons(),
        data.n_weeks(),
        args.out.display()
    );
    Ok(())
}
