use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use isoflat::bounds::CurvatureBudget;
use isoflat::metric::MetricSpec;
use serde::{Deserialize, Serialize};

pub const DEFAULT_RESOLUTION: f64 = 0.01;
pub const DEFAULT_PAIRS: usize = 1000;
pub const DEFAULT_BOUNDARY_PAIRS: usize = 1000;
pub const DEFAULT_INTERIOR_SAMPLES: usize = 400;
pub const DEFAULT_SWEEP: [f64; 3] = [0.04, 0.09, 0.16];

/// Files a run may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    /// report.json and chart.json
    Json,
    /// report.csv (or sweep.csv)
    Csv,
    /// logphi.svg heatmap
    Svg,
    /// chart.bin sidecar
    Bin,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub kind: Option<String>,
    pub delta: Option<f64>,
    pub kappa: Option<f64>,
    pub epsilon: Option<f64>,
    pub bump: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub resolution: Option<f64>,
    pub seed: Option<u64>,
    pub pairs: Option<usize>,
    pub boundary_pairs: Option<usize>,
    pub interior_samples: Option<usize>,
    /// Curvature levels δ²κ for `sweep`.
    pub t: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub emit: Option<Vec<Emit>>,
}

/// Contents of a TOML config file; every field is optional so that flags can fill gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub metric: MetricSection,
    pub run: RunSection,
    pub output: OutputSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Overlays `other` on `self`: fields set in `other` win.
    pub fn merge(mut self, other: FileConfig) -> Self {
        macro_rules! take {
            ($($sec:ident.$f:ident),*) => { $( if other.$sec.$f.is_some() { self.$sec.$f = other.$sec.$f; } )* };
        }
        take!(
            metric.kind, metric.delta, metric.kappa, metric.epsilon, metric.bump,
            run.resolution, run.seed, run.pairs, run.boundary_pairs, run.interior_samples, run.t,
            output.dir, output.emit
        );
        self
    }
}

/// A fully resolved and validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub metric: MetricSpec,
    pub resolution: f64,
    pub seed: u64,
    pub pairs: usize,
    pub boundary_pairs: usize,
    pub interior_samples: usize,
    pub t_values: Vec<f64>,
    pub out: PathBuf,
    pub emit: Vec<Emit>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if !(v.is_finite() && v > 0.0) {
        bail!("{name} must be positive and finite, got {v}");
    }
    Ok(v)
}

impl RunConfig {
    pub fn resolve(file: FileConfig) -> Result<Self> {
        let m = file.metric;
        let kind = m.kind.unwrap_or_else(|| "sphere".into());
        let delta = positive("delta", m.delta.unwrap_or(1.0))?;
        let metric = match kind.as_str() {
            "flat" => MetricSpec { kind, delta, kappa: 0.0, epsilon: 0.0, bump: "gaussian".into() },
            "sphere" | "hyperbolic" => {
                let kappa = positive("kappa", m.kappa.unwrap_or(1.0))?;
                // Rejects δ²κ ≥ π²/4 before anything is meshed.
                CurvatureBudget::new(delta, kappa)?;
                MetricSpec { kind, delta, kappa, epsilon: 0.0, bump: "gaussian".into() }
            }
            "custom" => {
                let epsilon = m.epsilon.unwrap_or(0.1);
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    bail!("epsilon must be non-negative, got {epsilon}");
                }
                MetricSpec::custom(delta, epsilon, m.bump.as_deref().unwrap_or("gaussian"))
            }
            other => bail!("unknown metric kind {other:?}; expected flat, sphere, hyperbolic or custom"),
        };
        let r = file.run;
        let resolution = positive("resolution", r.resolution.unwrap_or(DEFAULT_RESOLUTION))?;
        if resolution > 0.25 {
            bail!("resolution {resolution} is too coarse for the unit background disc");
        }
        let counts = [
            ("pairs", r.pairs.unwrap_or(DEFAULT_PAIRS)),
            ("boundary_pairs", r.boundary_pairs.unwrap_or(DEFAULT_BOUNDARY_PAIRS)),
            ("interior_samples", r.interior_samples.unwrap_or(DEFAULT_INTERIOR_SAMPLES)),
        ];
        for (name, n) in counts {
            if n == 0 {
                bail!("{name} must be positive");
            }
        }
        let t_values = r.t.unwrap_or_else(|| DEFAULT_SWEEP.to_vec());
        for &t in &t_values {
            positive("t", t)?;
        }
        let mut emit = file.output.emit.unwrap_or_else(|| vec![Emit::Json, Emit::Csv]);
        emit.sort();
        emit.dedup();
        Ok(Self {
            metric,
            resolution,
            seed: r.seed.unwrap_or(0),
            pairs: counts[0].1,
            boundary_pairs: counts[1].1,
            interior_samples: counts[2].1,
            t_values,
            out: file.output.dir.unwrap_or_else(|| PathBuf::from(".")),
            emit,
        })
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_sections() {
        let cfg = FileConfig::parse(
            r#"
            [metric]
            kind = "custom"
            delta = 1.0
            epsilon = 0.05
            bump = "cosine"
            [run]
            resolution = 0.02
            seed = 7
            t = [0.04, 0.09]
            [output]
            dir = "out"
            emit = ["json", "svg"]
            "#,
        )
        .unwrap();
        let run = RunConfig::resolve(cfg).unwrap();
        assert_eq!(run.metric.kind, "custom");
        assert_eq!(run.metric.bump, "cosine");
        assert_eq!(run.seed, 7);
        assert_eq!(run.t_values, vec![0.04, 0.09]);
        assert!(run.emits(Emit::Svg) && !run.emits(Emit::Csv));
    }

    #[test]
    fn later_values_override() {
        let file = FileConfig::parse("[metric]\nkind = \"sphere\"\nkappa = 1.0\n[run]\nseed = 3").unwrap();
        let mut flags = FileConfig::default();
        flags.metric.kappa = Some(0.5);
        let run = RunConfig::resolve(file.merge(flags)).unwrap();
        assert_eq!(run.metric.kappa, 0.5);
        assert_eq!(run.seed, 3);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            "[metric]\nkind = \"sphere\"\nkappa = 2.5",
            "[metric]\nkind = \"torus\"",
            "[metric]\ndelta = -1.0",
            "[run]\nresolution = 0.0",
            "[run]\npairs = 0",
            "[run]\nt = [0.1, -0.2]",
            "[metric]\nunknown = 1",
        ];
        for text in bad {
            let r = FileConfig::parse(text).and_then(RunConfig::resolve);
            assert!(r.is_err(), "{text}");
        }
    }
}
