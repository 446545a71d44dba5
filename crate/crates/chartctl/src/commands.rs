use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isoflat::bounds::{BoundSummary, CurvatureBudget};
use isoflat::distortion::{budget_for, sharpness_sweep, verify_chart, SweepTable, VerifyOptions};
use isoflat::metric::{MetricRegistry, ModelKind};
use isoflat::report::{Sense, VerificationReport};
use isoflat::uniformize::ChartExport;

use crate::cli::{BoundsArgs, RenderArgs, RunArgs};
use crate::config::{Emit, FileConfig, RunConfig};
use crate::output::{sig12, write_atomic, write_text};
use crate::render::render_log_factor_svg;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAILED_CHECK: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Rows of the `bounds` table: label and value.
pub fn bounds_table(summary: &BoundSummary) -> Vec<(String, String)> {
    let b = &summary.budget;
    let mut rows: Vec<(&str, String)> = vec![
        ("delta", sig12(b.delta())),
        ("kappa", sig12(b.kappa())),
        ("t = delta^2 kappa", sig12(b.product())),
        ("x = delta sqrt(kappa)", sig12(b.angle())),
        ("theorem bound on sup|log phi|", sig12(summary.theorem_bound)),
    ];
    match &summary.corollary {
        Some((linear, ratio)) => {
            rows.push(("corollary bound 8t", sig12(*linear)));
            rows.push(("corollary ratio lower exp(-4t)", sig12(ratio.lower)));
            rows.push(("corollary ratio upper exp(4t)", sig12(ratio.upper)));
        }
        None => rows.push(("corollary bound 8t", "n/a (t >= pi^2/8)".into())),
    }
    let pairs = [
        ("barrier constant C_h", summary.barrier_constants.c_h),
        ("barrier constant C_s", summary.barrier_constants.c_s),
        ("center factor lower", summary.center_factor.lower),
        ("center factor upper", summary.center_factor.upper),
        ("boundary factor lower", summary.boundary_factor.lower),
        ("boundary factor upper", summary.boundary_factor.upper),
        ("interior distance ratio lower", summary.distance_ratio.lower),
        ("interior distance ratio upper", summary.distance_ratio.upper),
        ("boundary distance ratio lower", summary.boundary_distance_ratio.lower),
        ("boundary distance ratio upper", summary.boundary_distance_ratio.upper),
        ("arc ratio lower", summary.arc_ratio.lower),
        ("arc ratio upper", summary.arc_ratio.upper),
        ("angle/distance bound", summary.angle_distance),
    ];
    rows.extend(pairs.iter().map(|(k, v)| (*k, sig12(*v))));
    rows.push(("near degenerate", summary.near_degenerate.to_string()));
    rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn print_rows(out: &mut dyn Write, rows: &[(String, String)]) -> Result<()> {
    let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(out, "{k:<w$}  {v:>20}")?;
    }
    Ok(())
}

pub fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> Result<u8> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let delta = args.delta.or(file.metric.delta).unwrap_or(1.0);
    let Some(kappa) = args.kappa.or(file.metric.kappa) else {
        bail!("--kappa is required");
    };
    let budget = CurvatureBudget::new(delta, kappa)?;
    let summary = BoundSummary::for_budget(&budget);
    print_rows(out, &bounds_table(&summary))?;
    if args.emit.contains(&Emit::Json) {
        let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
        write_text(&dir.join("bounds.json"), &serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(EXIT_PASS)
}

pub fn print_report(out: &mut dyn Write, report: &VerificationReport) -> Result<()> {
    let w = report.records.iter().map(|r| r.name.len()).max().unwrap_or(0);
    writeln!(out, "{:<w$}  {:>20}  {:>2}  {:>20}  {:>20}  result", "check", "measured", "", "bound", "tolerance")?;
    for r in &report.records {
        let rel = match r.sense {
            Sense::Upper => "<=",
            Sense::Lower => ">=",
        };
        writeln!(
            out,
            "{:<w$}  {:>20}  {rel}  {:>20}  {:>20}  {}",
            r.name,
            sig12(r.measured),
            sig12(r.bound),
            sig12(r.tolerance),
            if r.passed { "pass" } else { "FAIL" }
        )?;
    }
    let passed = report.records.iter().filter(|r| r.passed).count();
    writeln!(out, "{passed}/{} checks passed", report.records.len())?;
    Ok(())
}

fn write_chart(cfg: &RunConfig, export: &ChartExport) -> Result<()> {
    if cfg.emits(Emit::Json) {
        write_text(&cfg.out.join("chart.json"), &export.to_json()?)?;
    }
    if cfg.emits(Emit::Bin) {
        write_atomic(&cfg.out.join("chart.bin"), |w| Ok(export.write_binary(w)?))?;
    }
    if cfg.emits(Emit::Svg) {
        write_text(&cfg.out.join("logphi.svg"), &render_log_factor_svg(export))?;
    }
    Ok(())
}

/// Runs the full verification; the report's timestamp is set to `timestamp`.
pub fn run_verify(cfg: &RunConfig, timestamp: Option<String>) -> Result<(VerificationReport, ChartExport)> {
    let metric = MetricRegistry::default().build(&cfg.metric)?;
    let budget = budget_for(metric.as_ref())?;
    let options = VerifyOptions {
        h: cfg.resolution,
        seed: cfg.seed,
        pairs: cfg.pairs,
        boundary_pairs: cfg.boundary_pairs,
        interior_samples: cfg.interior_samples,
    };
    let (mut report, chart) = verify_chart(metric, &budget, &options)?;
    report.meta.timestamp = timestamp;
    Ok((report, ChartExport::from_chart(&chart)))
}

pub fn cmd_verify(args: &RunArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = args.resolve()?;
    let (report, export) = run_verify(&cfg, Some(chrono::Utc::now().to_rfc3339()))?;
    print_report(out, &report)?;
    if cfg.emits(Emit::Json) {
        write_text(&cfg.out.join("report.json"), &report.to_json()?)?;
    }
    if cfg.emits(Emit::Csv) {
        write_atomic(&cfg.out.join("report.csv"), |w| Ok(report.write_csv(w)?))?;
    }
    write_chart(&cfg, &export)?;
    Ok(if report.all_passed() { EXIT_PASS } else { EXIT_FAILED_CHECK })
}

pub fn print_sweep(out: &mut dyn Write, table: &SweepTable) -> Result<()> {
    let head = ["t", "sup|log phi|", "sup/t", "series/t", "theorem bound/t", "distortion/t", "result"];
    writeln!(out, "{}", head.map(|h| format!("{h:>20}")).join(""))?;
    for r in &table.rows {
        let cells = [r.t, r.sup_log_factor, r.log_factor_ratio, r.series / r.t, r.theorem_bound / r.t, r.distortion_ratio];
        let ok = if r.theorem_passed && r.distortion_in_range { "pass" } else { "FAIL" };
        writeln!(out, "{}{ok:>20}", cells.map(|v| format!("{:>20}", sig12(v))).join(""))?;
    }
    if let Some(limit) = table.theorem_ratio_limit {
        writeln!(out, "theorem bound/t extrapolated to t = 0: {}", sig12(limit))?;
    }
    Ok(())
}

pub fn cmd_sweep(args: &RunArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = args.resolve()?;
    let kind = match cfg.metric.kind.as_str() {
        "sphere" => ModelKind::Sphere,
        "hyperbolic" => ModelKind::Hyperbolic,
        other => bail!("sweep runs on the sphere or hyperbolic model, not {other:?}"),
    };
    let table = sharpness_sweep(kind, &cfg.t_values, cfg.resolution, cfg.pairs, cfg.seed)?;
    print_sweep(out, &table)?;
    if cfg.emits(Emit::Csv) {
        write_atomic(&cfg.out.join("sweep.csv"), |w| Ok(table.write_csv(w)?))?;
    }
    if cfg.emits(Emit::Json) {
        write_text(&cfg.out.join("sweep.json"), &serde_json::to_string_pretty(&table)?)?;
    }
    Ok(if table.all_passed() { EXIT_PASS } else { EXIT_FAILED_CHECK })
}

fn render_target(chart: &Path, out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) if p.extension().is_some_and(|e| e == "svg") => p.to_path_buf(),
        Some(dir) => dir.join("logphi.svg"),
        None => chart.with_file_name("logphi.svg"),
    }
}

pub fn cmd_render(args: &RenderArgs, out: &mut dyn Write) -> Result<u8> {
    let text = std::fs::read_to_string(&args.chart).with_context(|| format!("reading {}", args.chart.display()))?;
    let chart = ChartExport::from_json(&text).with_context(|| format!("loading {}", args.chart.display()))?;
    let target = render_target(&args.chart, args.out.as_deref());
    write_text(&target, &render_log_factor_svg(&chart))?;
    writeln!(out, "wrote {}", target.display())?;
    Ok(EXIT_PASS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_table_has_theorem_row() {
        let b = CurvatureBudget::new(1.0, 0.5).unwrap();
        let rows = bounds_table(&BoundSummary::for_budget(&b));
        let theorem = rows.iter().find(|r| r.0.starts_with("theorem")).unwrap();
        let v: f64 = theorem.1.parse().unwrap();
        assert!((v - isoflat::bounds::theorem_bound(&b)).abs() < 1e-11 * v);
        let corollary = rows.iter().find(|r| r.0 == "corollary bound 8t").unwrap();
        assert_eq!(corollary.1.parse::<f64>().unwrap(), 4.0);
    }

    #[test]
    fn render_target_defaults_next_to_chart() {
        let c = Path::new("/tmp/run/chart.json");
        assert_eq!(render_target(c, None), Path::new("/tmp/run/logphi.svg"));
        assert_eq!(render_target(c, Some(Path::new("/x/a.svg"))), Path::new("/x/a.svg"));
        assert_eq!(render_target(c, Some(Path::new("/x"))), Path::new("/x/logphi.svg"));
    }
}
