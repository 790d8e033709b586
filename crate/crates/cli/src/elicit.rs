use std::path::PathBuf;

use clap::Args;
use stppm_core::prior::elicitation_grid;

use crate::failure::{CliResult, Failure};
use crate::manifest::ManifestBuilder;
use crate::output::{create_dir, num, write_csv};

pub const ELICIT_FILE: &str = "elicitation.csv";

const DEFAULT_UPSILON: &[f64] = &[0.01, 1.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
const DEFAULT_KAPPA: &[f64] = &[
    0.01, 1.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0, 150.0,
];

#[derive(Debug, Args)]
pub struct ElicitArgs {
    /// Number of areas.
    #[arg(long)]
    n: usize,
    /// Comma-separated υ values.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    upsilon: Vec<f64>,
    /// Comma-separated κ values.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    kappa: Vec<f64>,
    /// Write elicitation.csv and a manifest here instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: ElicitArgs, argv: &[String]) -> CliResult {
    if args.n < 1 {
        return Err(Failure::validation("--n must be at least 1"));
    }
    let ups = if args.upsilon.is_empty() { DEFAULT_UPSILON.to_vec() } else { args.upsilon };
    let kaps = if args.kappa.is_empty() { DEFAULT_KAPPA.to_vec() } else { args.kappa };
    if let Some(v) = ups.iter().chain(&kaps).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Failure::validation(format!("upsilon and kappa must be positive, got {v}")));
    }
    let cells = elicitation_grid(args.n, &ups, &kaps);
    match &args.out {
        Some(dir) => {
            let manifest = ManifestBuilder::start("elicit", argv);
            create_dir(dir)?;
            write_csv(
                &dir.join(ELICIT_FILE),
                &["upsilon", "kappa", "mean", "variance", "mean_rounded", "variance_rounded"],
                cells.iter().map(|c| {
                    vec![
                        num(c.upsilon),
                        num(c.kappa),
                        num(c.mean),
                        num(c.variance),
                        num(c.mean.round_ties_even()),
                        num(c.variance.round_ties_even()),
                    ]
                }),
            )?;
            manifest.finish(dir)?;
        }
        None => {
            print!("{:>8}", "k \\ u");
            for u in &ups {
                print!(" {u:>10}");
            }
            println!();
            for k in &kaps {
                print!("{k:>8}");
                for u in &ups {
                    let c = cells
                        .iter()
                        .find(|c| c.upsilon == *u && c.kappa == *k)
                        .expect("grid cell");
                    print!(
                        " {:>10}",
                        format!("{} / {}", c.mean.round_ties_even(), c.variance.round_ties_even())
                    );
                }
                println!();
            }
        }
    }
    Ok(())
}
