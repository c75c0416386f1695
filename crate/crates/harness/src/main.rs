use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use inexact_harness::csv_io::{summary_path, write_experiment};
use inexact_harness::demo::{run_demo, DEMOS};
use inexact_harness::plot::{emit_plot, PlotKind};
use inexact_harness::sweep::{sweep, write_sweep, Axis, SweepSpec};
use inexact_harness::verify::{audit, verify_file, VerifyReport};
use inexact_harness::{run_experiment, ExperimentConfig, TransferMode};

/// Overrides the directory every output file is written to.
const OUTPUT_DIR_ENV: &str = "INEXACT_OUTPUT_DIR";
const DEFAULT_DIR: &str = "out";

#[derive(Parser)]
#[command(name = "inexact", version, about = "Run exact-oracle optimisers on inexact oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, write its trace and summary, and audit it.
    Run { config: PathBuf },
    /// Vary one parameter and aggregate the final gaps.
    Sweep {
        config: PathBuf,
        /// `eta=v1,v2,…` or `T=v1,v2,…`.
        #[arg(long)]
        vary: String,
        /// Comma-separated transfer modes to run at every grid point.
        #[arg(long, value_delimiter = ',')]
        transfers: Vec<String>,
        /// On a T axis, set ε = MR/√T and η = ε³/(M²R²).
        #[arg(long)]
        recipe: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and run every invariant suite.
    Verify {
        trace: PathBuf,
        /// Config to replay; defaults to the one stored in the summary sidecar.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Draw a sweep CSV as an SVG.
    Plot {
        csv: PathBuf,
        /// `gap-vs-T` or `gap-vs-eta`.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a canned scenario.
    Demo {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(DEMOS))]
        name: String,
    },
}

fn output_dir() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from)
}

/// `preferred` if given, else `DEFAULT_DIR/default_name`; the environment override replaces the directory.
fn output_path(preferred: Option<&Path>, default_name: &str) -> PathBuf {
    let path = preferred.map_or_else(|| Path::new(DEFAULT_DIR).join(default_name), Path::to_path_buf);
    match output_dir() {
        Some(dir) => dir.join(path.file_name().expect("output paths name a file")),
        None => path,
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned())
}

fn print_report(report: &VerifyReport) {
    for s in &report.suites {
        let mark = if s.passed { "pass" } else { "FAIL" };
        println!("  {mark} {:<18} checks={:<7} worst_margin={:.3e}", s.name, s.checks, s.worst_margin);
    }
}

fn run(config: &Path) -> Result<bool> {
    let cfg = ExperimentConfig::load(config)?;
    let exp = run_experiment(&cfg)?;
    let report = audit(&cfg, &exp)?;
    let out = output_path(
        cfg.output.as_ref().and_then(|o| o.trace.as_deref()),
        &format!("{}.csv", stem(config)),
    );
    write_experiment(&out, &exp)?;
    let s = &exp.summary;
    println!("trace    {}", out.display());
    println!("summary  {}", summary_path(&out).display());
    println!("gap      {:.6e} (reference {:?})", s.final_gap, s.reference.source);
    if let Some(b) = s.bound {
        println!("bound    {:.6e} satisfied={}", b.total, s.bound_satisfied == Some(true));
    }
    println!(
        "extensible raw={} repaired={}",
        s.raw_extensibility.extensible, s.repaired_extensibility.extensible
    );
    print_report(&report);
    Ok(s.audits_passed && report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = (|| -> Result<bool> {
        match cli.command {
            Command::Run { config } => run(&config),
            Command::Sweep {
                config,
                vary,
                transfers,
                recipe,
                out,
            } => {
                let cfg = ExperimentConfig::load(&config)?;
                let spec = SweepSpec {
                    axis: Axis::parse(&vary)?,
                    transfers: transfers
                        .iter()
                        .map(|t| t.parse::<TransferMode>())
                        .collect::<Result<_, _>>()?,
                    recipe,
                };
                let rows = sweep(&cfg, &spec)?;
                let path = output_path(out.as_deref(), &format!("{}.sweep.csv", stem(&config)));
                write_sweep(&path, &rows)?;
                println!("sweep    {}", path.display());
                let ok = rows.iter().all(|r| r.bound_satisfied != Some(false));
                for r in &rows {
                    println!(
                        "  {} {}={:<10} gap={:.4e} bound={}",
                        r.transfer.as_str(),
                        r.axis,
                        r.axis_value,
                        r.final_gap,
                        r.bound.map_or("-".into(), |b| format!("{b:.4e}"))
                    );
                }
                Ok(ok)
            }
            Command::Verify { trace, config } => {
                let report = verify_file(&trace, config.as_deref())?;
                print_report(&report);
                Ok(report.passed())
            }
            Command::Plot { csv, kind, out } => {
                let kind: PlotKind = kind.parse()?;
                let default = csv.with_extension("svg");
                let path = output_path(Some(out.as_deref().unwrap_or(&default)), "plot.svg");
                emit_plot(&csv, kind, &path).with_context(|| format!("plotting {}", csv.display()))?;
                println!("plot     {}", path.display());
                Ok(true)
            }
            Command::Demo { name } => {
                let d = run_demo(&name)?;
                let path = output_path(None, &format!("demo-{name}.csv"));
                write_experiment(&path, &d.experiment)?;
                let s = &d.experiment.summary;
                println!("demo     {name}");
                println!("trace    {}", path.display());
                println!("gap      {:.6e}", s.final_gap);
                if let Some(b) = s.bound {
                    println!("bound    {:.6e}", b.total);
                }
                println!(
                    "extensible raw={} repaired={}",
                    s.raw_extensibility.extensible, s.repaired_extensibility.extensible
                );
                print_report(&d.report);
                Ok(d.passed)
            }
        }
    })();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("audits failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
