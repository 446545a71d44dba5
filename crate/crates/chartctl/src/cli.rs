use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::config::{Emit, FileConfig, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "chartctl", version, about = "Isothermal charts of small geodesic discs: bounds, verification, sweeps and figures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every closed-form bound for a curvature budget (δ, κ).
    Bounds(BoundsArgs),
    /// Build the chart for a metric and check every bound on it.
    Verify(RunArgs),
    /// Measure log φ and the pairwise distortion on model metrics with δ = 1, κ = t.
    Sweep(RunArgs),
    /// Draw a heatmap of log φ from an exported chart.json.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// TOML file; only [metric] delta and kappa are read.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for bounds.json when `--emit json` is given.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub emit: Vec<Emit>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML file with [metric], [run] and [output] sections; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = ["flat", "sphere", "hyperbolic", "custom"])]
    pub metric: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Bump amplitude of the custom metric.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_parser = ["gaussian", "cosine"])]
    pub bump: Option<String>,
    /// Mesh spacing on the unit background disc.
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Interior pairs for the distance-ratio checks.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub boundary_pairs: Option<usize>,
    #[arg(long)]
    pub interior_samples: Option<usize>,
    /// Curvature levels for `sweep`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub emit: Option<Vec<Emit>>,
}

impl RunArgs {
    fn overrides(&self) -> FileConfig {
        let mut f = FileConfig::default();
        f.metric.kind = self.metric.clone();
        f.metric.delta = self.delta;
        f.metric.kappa = self.kappa;
        f.metric.epsilon = self.epsilon;
        f.metric.bump = self.bump.clone();
        f.run.resolution = self.resolution;
        f.run.seed = self.seed;
        f.run.pairs = self.pairs;
        f.run.boundary_pairs = self.boundary_pairs;
        f.run.interior_samples = self.interior_samples;
        f.run.t = self.t.clone();
        f.output.dir = self.out.clone();
        f.output.emit = self.emit.clone();
        f
    }

    /// Config file (if any) overlaid with the flags, then validated.
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        RunConfig::resolve(file.merge(self.overrides()))
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Chart file written by `verify --emit json`.
    pub chart: PathBuf,
    /// Output .svg file or directory; defaults to logphi.svg next to the chart.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "chartctl", "verify", "--metric", "custom", "--epsilon", "0.1", "--bump", "cosine", "--emit", "json,svg",
        ])
        .unwrap();
        let Command::Verify(args) = cli.command else { panic!() };
        let run = args.resolve().unwrap();
        assert_eq!(run.metric.epsilon, 0.1);
        assert_eq!(run.emit, vec![Emit::Json, Emit::Svg]);
        assert!(Cli::try_parse_from(["chartctl", "verify", "--metric", "torus"]).is_err());
    }
}
