use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use recirc::pipeline::{self, compare_runs, feedback_update, ImprovementReport, Mode, PipelineError};
use recirc::report::{
    latest_framework_manifest, load_models, load_run, load_table3_fixture, persist_run, render_chart,
    render_csv, render_markdown, render_table3, ChartKind, MeasuredValues, ReportError,
};
use recirc::scenario::{load_scenario, parse_scenario, save_scenario, validate_scenario, ScenarioError};
use recirc::twin::{calibrate_scenario, TwinError};
use recirc::fixtures;
use recirc::{Classify, ErrorKind};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  other failure
  2  usage error
  3  file missing or unreadable
  4  malformed scenario or artifact
  5  scenario validation failed
  6  solver or pipeline stage failed
  7  mode or scenario family mismatch
  8  chart or report metric missing";

#[derive(Parser)]
#[command(name = "recirc", version, about = "Circular-economy scenario runner and report generator", after_help = EXIT_CODES)]
struct Cli {
    /// Override the scenario's rng_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Table format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and persist the result under --out.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
    },
    /// Compare a baseline run with a framework run.
    Compare {
        /// Baseline manifest or run directory.
        #[arg(long)]
        baseline: PathBuf,
        /// Framework manifest or run directory.
        #[arg(long)]
        framework: PathBuf,
    },
    /// Render a grouped bar chart as SVG.
    Chart {
        /// recovery, energy, carbon, waste or comparison.
        #[arg(long, value_parser = parse_chart)]
        kind: ChartKind,
        /// A comparison.json written by `compare`.
        #[arg(long, conflicts_with_all = ["baseline", "framework"])]
        comparison: Option<PathBuf>,
        /// Baseline run, compared on the fly with --framework.
        #[arg(long, requires = "framework")]
        baseline: Option<PathBuf>,
        #[arg(long, requires = "baseline")]
        framework: Option<PathBuf>,
        /// Defaults to <out>/chart-<kind>.svg.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render the methods comparison table.
    Table3 {
        /// Reference-values fixture; defaults to the bundled one.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Defaults to <out>/table3.md.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a scenario file and list every problem found.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Fit facility parameters to the scenario's calibration targets.
    Calibrate {
        #[arg(long)]
        scenario: PathBuf,
        /// Defaults to <out>/<stem>.calibrated.json.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Retrain a run's models on fresh events.
    Feedback {
        #[arg(long)]
        scenario: PathBuf,
        /// Run directory (or manifest) holding the prior models.
        #[arg(long)]
        run: PathBuf,
    },
    /// Write the bundled scenario fixtures to --out.
    Fixtures,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_chart(s: &str) -> Result<ChartKind, String> {
    s.parse()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ReportError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| ReportError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn comparison_of(baseline: &Path, framework: &Path) -> Result<ImprovementReport> {
    let (_, b) = load_run(baseline)?;
    let (_, f) = load_run(framework)?;
    Ok(compare_runs(&b, &f)?)
}

fn cmd_run(cli: &Cli, scenario: &Path, mode: Mode) -> Result<()> {
    let spec = load_scenario(scenario)?;
    let output = pipeline::run(&spec, mode, cli.seed)?;
    let (manifest, path) = persist_run(&cli.out, Some(scenario), &spec, &output)?;
    println!("{} {} -> {}", manifest.run_id, manifest.mode, path.display());
    Ok(())
}

fn cmd_compare(cli: &Cli, baseline: &Path, framework: &Path) -> Result<()> {
    let report = comparison_of(baseline, framework)?;
    let (name, table) = match cli.format {
        Format::Md => ("comparison.md", render_markdown(&report)),
        Format::Csv => ("comparison.csv", render_csv(&report)?),
    };
    let table_path = cli.out.join(name);
    write_file(&table_path, &table)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_file(&cli.out.join("comparison.json"), &json)?;
    print!("{table}");
    Ok(())
}

fn cmd_chart(
    cli: &Cli,
    kind: ChartKind,
    comparison: Option<&Path>,
    runs: Option<(&Path, &Path)>,
    output: Option<&Path>,
) -> Result<()> {
    let report = match (comparison, runs) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).map_err(|e| ReportError::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            serde_json::from_str(&text).map_err(|e| ReportError::Json {
                path: p.to_path_buf(),
                message: e.to_string(),
            })?
        }
        (None, Some((b, f))) => comparison_of(b, f)?,
        (None, None) => anyhow::bail!(Usage("chart needs --comparison or --baseline and --framework".into())),
    };
    let svg = render_chart(&report, kind)?;
    let path = output.map_or_else(|| cli.out.join(format!("chart-{kind}.svg")), Path::to_path_buf);
    write_file(&path, &svg)?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_table3(cli: &Cli, fixture: Option<&Path>, output: Option<&Path>) -> Result<()> {
    let table = match fixture {
        Some(p) => load_table3_fixture(p)?,
        None => fixtures::table3(),
    };
    let measured = latest_framework_manifest(&cli.out).map(|(f, b)| MeasuredValues::from_manifests(&f, b.as_ref()));
    let md = render_table3(&table, measured.as_ref());
    let path = output.map_or_else(|| cli.out.join("table3.md"), Path::to_path_buf);
    write_file(&path, &md)?;
    print!("{md}");
    Ok(())
}

fn cmd_validate(scenario: &Path) -> Result<()> {
    let text = fs::read_to_string(scenario).map_err(|e| ScenarioError::Io {
        path: scenario.to_path_buf(),
        source: e,
    })?;
    let diags = match parse_scenario(&text, &scenario.display().to_string()) {
        Ok(spec) => validate_scenario(&spec),
        Err(ScenarioError::Validation(diags)) => diags,
        Err(e) => return Err(e.into()),
    };
    if diags.is_empty() {
        println!("{}: ok", scenario.display());
        return Ok(());
    }
    for d in &diags {
        println!("{}: {d}", scenario.display());
    }
    Err(ScenarioError::Validation(diags).into())
}

fn cmd_calibrate(cli: &Cli, scenario: &Path, output: Option<&Path>) -> Result<()> {
    let spec = load_scenario(scenario)?;
    let (calibrated, report) = calibrate_scenario(&spec)?;
    let stem = scenario.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    let path = output.map_or_else(|| cli.out.join(format!("{stem}.calibrated.json")), Path::to_path_buf);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    }
    save_scenario(&calibrated, &path)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!("{}", path.display());
    Ok(())
}

fn cmd_feedback(cli: &Cli, scenario: &Path, run: &Path) -> Result<()> {
    let spec = load_scenario(scenario)?;
    let prior = load_models(run)?;
    let outcome = feedback_update(&spec, cli.seed, &prior)?;
    let run_name = run
        .canonicalize()
        .ok()
        .and_then(|p| {
            let dir = if p.is_dir() { p } else { p.parent()?.to_path_buf() };
            dir.file_name().map(|n| n.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| "run".into());
    let dir = cli.out.join(format!("{run_name}-feedback-v{}", outcome.artifacts.version));
    let mut json = serde_json::to_string_pretty(&outcome.artifacts)?;
    json.push('\n');
    write_file(&dir.join("models.json"), &json)?;
    let mut json = serde_json::to_string_pretty(&outcome)?;
    json.push('\n');
    write_file(&dir.join("feedback.json"), &json)?;
    for d in &outcome.diagnostics {
        eprintln!("warning: {d}");
    }
    println!(
        "version {} accuracy {:?} -> {:?} ({} new events) -> {}",
        outcome.artifacts.version,
        outcome.accuracy_before,
        outcome.accuracy_after,
        outcome.new_events,
        dir.display()
    );
    Ok(())
}

fn cmd_fixtures(cli: &Cli) -> Result<()> {
    for name in fixtures::SCENARIOS {
        let path = cli.out.join(format!("{name}.json"));
        write_file(&path, fixtures::scenario_text(name).expect("listed fixture"))?;
        println!("{}", path.display());
    }
    let path = cli.out.join("table3.json");
    write_file(&path, fixtures::TABLE3)?;
    println!("{}", path.display());
    Ok(())
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn exit_code(err: &anyhow::Error) -> u8 {
    let kind = if let Some(e) = err.downcast_ref::<ScenarioError>() {
        e.kind()
    } else if let Some(e) = err.downcast_ref::<PipelineError>() {
        e.kind()
    } else if let Some(e) = err.downcast_ref::<ReportError>() {
        e.kind()
    } else if let Some(e) = err.downcast_ref::<TwinError>() {
        e.kind()
    } else if err.downcast_ref::<Usage>().is_some() {
        ErrorKind::Usage
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        ErrorKind::Io
    } else {
        ErrorKind::Other
    };
    kind.code()
}

fn one_line(err: &anyhow::Error) -> String {
    if let Some(ScenarioError::Validation(diags)) = err.downcast_ref::<ScenarioError>() {
        return format!("{} validation problem(s); first: {}", diags.len(), diags[0]);
    }
    let mut msg = err.to_string();
    for cause in err.chain().skip(1) {
        let cause = cause.to_string();
        if msg.contains(&cause) {
            continue;
        }
        msg.push_str(": ");
        msg.push_str(&cause);
    }
    msg.replace('\n', " ")
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { scenario, mode } => cmd_run(cli, scenario, *mode),
        Command::Compare { baseline, framework } => cmd_compare(cli, baseline, framework),
        Command::Chart {
            kind,
            comparison,
            baseline,
            framework,
            output,
        } => cmd_chart(
            cli,
            *kind,
            comparison.as_deref(),
            baseline.as_deref().zip(framework.as_deref()),
            output.as_deref(),
        ),
        Command::Table3 { fixture, output } => cmd_table3(cli, fixture.as_deref(), output.as_deref()),
        Command::Validate { scenario } => cmd_validate(scenario),
        Command::Calibrate { scenario, output } => cmd_calibrate(cli, scenario, output.as_deref()),
        Command::Feedback { scenario, run } => cmd_feedback(cli, scenario, run),
        Command::Fixtures => cmd_fixtures(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", one_line(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
