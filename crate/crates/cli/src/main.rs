//! Command-line driver: separation sweeps, meta-distribution studies, the
//! optimal Aloha probability and the validation report.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use v2v_meta::harness::{DEFAULT_FADING_DRAWS, DEFAULT_REALIZATIONS};
use v2v_meta::output::{fmt_sig, write_meta_csv, write_scatter_csv, write_sweep_csv};
use v2v_meta::{
    run_meta_study, run_separation_sweep, run_validation, ChannelModel, MetaSummary, PiChoice, Scenario,
    ScenarioBuilder,
};

#[derive(Parser)]
#[command(version, about = "V2V intersection reliability simulator", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average and meta reliability along the TX trajectory
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Separation grid as min:step:max, in metres
        #[arg(long, default_value = "1:1:140")]
        separations: Separations,
        /// Interferer realizations per separation
        #[arg(long, default_value_t = DEFAULT_REALIZATIONS)]
        realizations: usize,
    },
    /// Meta distribution and Beta fit at one separation
    Meta {
        #[command(flatten)]
        common: Common,
        /// TX/RX separation in metres [default: d_target]
        #[arg(long)]
        separation: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_REALIZATIONS)]
        realizations: usize,
    },
    /// Largest Aloha probability meeting the design target
    SolvePi {
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check closed forms against Monte Carlo
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        realizations: usize,
        /// Fading draws per configuration
        #[arg(long, default_value_t = DEFAULT_FADING_DRAWS)]
        fading: usize,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_parser = parse_model)]
    model: Option<ChannelModel>,
    /// Road half-length R in metres
    #[arg(long)]
    road_length: Option<f64>,
    /// Aloha probability, or `auto` for the design optimum
    #[arg(long, value_parser = parse_pi)]
    pi: Option<PiChoice>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Flat `key = value` scenario file
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
struct Separations {
    min: f64,
    step: f64,
    max: f64,
}

impl std::str::FromStr for Separations {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, step, max] = parts[..] else {
            return Err(format!("expected min:step:max, got '{s}'"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number"));
        Ok(Separations {
            min: num(min)?,
            step: num(step)?,
            max: num(max)?,
        })
    }
}

fn parse_model(s: &str) -> Result<ChannelModel, String> {
    s.parse().map_err(|e: v2v_meta::Error| e.to_string())
}

fn parse_pi(s: &str) -> Result<PiChoice, String> {
    s.parse().map_err(|e: v2v_meta::Error| e.to_string())
}

impl Common {
    /// Defaults, then the config file, then command-line flags.
    fn scenario(&self) -> anyhow::Result<Scenario> {
        let mut builder = ScenarioBuilder::default();
        if let Some(path) = &self.config {
            builder
                .apply_config_file(path)
                .with_context(|| format!("reading config {}", path.display()))?;
        }
        builder.merge(&ScenarioBuilder {
            model: self.model,
            r: self.road_length,
            p_i: self.pi,
            ..Default::default()
        });
        Ok(builder.build()?)
    }

    fn create(&self, name: &str) -> anyhow::Result<BufWriter<File>> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(file))
    }
}

fn announce(path: &Path) {
    eprintln!("wrote {}", path.display());
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Sweep {
            common,
            separations,
            realizations,
        } => {
            let scenario = common.scenario()?;
            eprintln!("{}", scenario.summary());
            let sweep = run_separation_sweep(
                &scenario,
                separations.min,
                separations.max,
                separations.step,
                realizations,
                common.seed,
            )?;
            write_sweep_csv(common.create("sweep.csv")?, &sweep)?;
            announce(&common.out.join("sweep.csv"));
            write_scatter_csv(common.create("scatter.csv")?, &sweep)?;
            announce(&common.out.join("scatter.csv"));
        }
        Command::Meta {
            common,
            separation,
            realizations,
        } => {
            let scenario = common.scenario()?;
            eprintln!("{}", scenario.summary());
            let separation = separation.unwrap_or(scenario.design.d_target);
            let study = run_meta_study(&scenario, separation, realizations, common.seed)?;
            if let Err(reason) = &study.fit {
                eprintln!("warning: Beta fit failed: {reason}");
            }
            write_meta_csv(common.create("meta.csv")?, &study.meta)?;
            announce(&common.out.join("meta.csv"));
            MetaSummary::from_study(&study)?.write_json(common.create("meta_summary.json")?)?;
            announce(&common.out.join("meta_summary.json"));
        }
        Command::SolvePi { common } => {
            if common.pi.is_some() {
                bail!("solve-pi computes p_I itself; drop --pi");
            }
            let mut common = common;
            common.pi = Some(PiChoice::Auto);
            let scenario = common.scenario()?;
            let design = scenario.design;
            let avg = v2v_meta::average_success(&design.tx_at_target, &scenario.rx, &scenario)?;
            println!("p_I* = {}", fmt_sig(scenario.traffic.p_i));
            println!(
                "average success at {} (d_target = {} m): {}",
                design.tx_at_target,
                fmt_sig(design.d_target),
                fmt_sig(avg.value)
            );
        }
        Command::Validate {
            common,
            realizations,
            fading,
        } => {
            let scenario = common.scenario()?;
            eprintln!("{}", scenario.summary());
            let report = run_validation(&scenario, realizations, fading, common.seed)?;
            print!("{}", report.to_text());
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
