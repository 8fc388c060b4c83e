use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use swimrom::commands::{self, Verify};
use swimrom::io::{ExperimentConfig, ResolutionPreset};

#[derive(Parser, Debug)]
#[command(name = "swimrom", version, about = "Boundary element and reduced-order solver for Stokes micro-swimmers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Mesh resolution preset, overriding the configuration.
    #[arg(long, global = true, value_enum)]
    resolution: Option<Resolution>,

    /// Seed for random held-out queries, overriding the configuration.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    seed: Option<u64>,

    /// Check reduced results against full-order solves.
    #[arg(long, global = true, value_enum, default_value = "fom")]
    verify: VerifyArg,

    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Sphere drag and torque checks and split/monolithic agreement.
    Validate,
    /// Snapshots, operator interpolation and reduced bases.
    Offline,
    /// Reduced solves at the configured queries.
    Online,
    /// Two-step efficiency optimization of the bacterium.
    Optimize,
    /// Stroke reconstruction of the eukaryote.
    Stroke,
    /// Surface tractions as VTK files.
    Export,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Resolution {
    Desk,
    Paper,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum VerifyArg {
    Fom,
    None,
}

impl Cli {
    fn verify(&self) -> Verify {
        match self.verify {
            VerifyArg::Fom => Verify::Fom,
            VerifyArg::None => Verify::None,
        }
    }

    fn resolution(&self) -> Option<ResolutionPreset> {
        self.resolution.map(|r| match r {
            Resolution::Desk => ResolutionPreset::Desk,
            Resolution::Paper => ResolutionPreset::Paper,
        })
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        let Some(path) = &self.config else {
            bail!("this command needs --config <file>");
        };
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(r) = self.resolution() {
            cfg.resolution = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let verify = cli.verify();
    match cli.command {
        Command::Validate => {
            let resolution = match (cli.resolution(), &cli.config) {
                (Some(r), _) => r,
                (None, Some(_)) => cli.experiment()?.resolution,
                (None, None) => ResolutionPreset::Desk,
            };
            let outcome = commands::validate(&commands::validation_options(resolution), cli.out.as_deref())?;
            for c in &outcome.checks {
                let status = if c.passed() { "ok" } else { "FAILED" };
                println!(
                    "{status:>6}  {:<24} value {:.6e}  reference {:.6e}  error {:.3e}  tolerance {:.1e}",
                    c.name, c.value, c.reference, c.error, c.tolerance
                );
                if let Some(f) = &c.failure {
                    println!("        {f}");
                }
            }
            if !outcome.passed() {
                let failed: Vec<&str> = outcome.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
                eprintln!("validation failed: {}", failed.join(", "));
            }
            Ok(outcome.passed())
        }
        Command::Offline => {
            let cfg = cli.experiment()?;
            let o = commands::offline(&cfg)?;
            println!(
                "{} snapshots, velocity modes {}, traction modes {:?}; model in {}",
                o.snapshot_count,
                o.rom.velocity_modes(),
                o.rom.traction_modes(),
                cfg.out.join(commands::MODEL_SUBDIR).display()
            );
            Ok(true)
        }
        Command::Online => {
            let cfg = cli.experiment()?;
            let o = commands::online(&cfg, verify)?;
            println!("{} queries written to {}", o.results.len(), cfg.out.join("online.csv").display());
            if let Some(t) = &o.errors {
                println!("{:>6} {:>12} {:>12} {:>12}", "modes", "min", "mean", "max");
                for r in &t.rows {
                    println!("{:>6} {:>12} {:>12} {:>12}", r[0], r[1], r[2], r[3]);
                }
            }
            Ok(true)
        }
        Command::Optimize => {
            let cfg = cli.experiment()?;
            let o = commands::optimize(&cfg, verify)?;
            for w in &o.report.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", o.comparison.header.join("  "));
            for r in &o.comparison.rows {
                println!("{}", r.join("  "));
            }
            Ok(true)
        }
        Command::Stroke => {
            let cfg = cli.experiment()?;
            let o = commands::stroke(&cfg, verify)?;
            for r in &o.rows {
                let err = r.l2_error.map_or("-".to_string(), |e| format!("{e:.3e}"));
                println!("N_training {:>4}  L2 error {err}  net displacement {:?}", r.n_training, r.displacement);
            }
            Ok(true)
        }
        Command::Export => {
            let cfg = cli.experiment()?;
            let m = commands::export(&cfg, verify)?;
            println!("{} files written to {}", m.files.len(), cfg.out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).with_context(|| format!("{:?} failed", cli.command).to_lowercase()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
