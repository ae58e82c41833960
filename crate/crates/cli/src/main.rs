mod cli;
mod experiments;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command, Format, Output};
use experiments::{ellipsoid, polygon, tube};
use report::{write_atomic, Outcome};

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("GEOLAB_THREADS") else { return Ok(()) };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| format!("GEOLAB_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn render(outcome: &Outcome, format: Format) -> Result<String, String> {
    let name = outcome.report.experiment;
    match format {
        Format::Json => serde_json::to_string_pretty(&outcome.report).map(|s| s + "\n").map_err(|e| e.to_string()),
        Format::Csv => outcome.csv.clone().ok_or_else(|| format!("{name} has no CSV output")),
        Format::Svg => outcome.svg.clone().ok_or_else(|| format!("{name} has no SVG output")),
    }
}

fn emit(outcome: &Outcome, output: &Output) -> Result<(), String> {
    let text = render(outcome, output.format)?;
    match &output.out {
        Some(path) => write_atomic(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (outcome, output) = match &cli.command {
        Command::PolygonClassify(a) => (polygon::classify(a), &a.output),
        Command::PolygonDistance(a) => (polygon::distance(a), &a.output),
        Command::PolygonEnumerate(a) => (polygon::enumerate(a), &a.output),
        Command::TubeVerify(a) => (tube::verify(a), &a.output),
        Command::TubeGh(a) => (tube::gh(a), &a.output),
        Command::TubeSystole(a) => (tube::systole(a), &a.output),
        Command::EllipsoidClassify(a) => (ellipsoid::classify(a), &a.output),
        Command::EllipsoidSearch(a) => (ellipsoid::search(a), &a.output),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&outcome, output) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let s = &outcome.report.summary;
    eprintln!("{}: {} (expected: {})", outcome.report.experiment, s.observed, s.expected);
    if let Some(c) = &s.caveat {
        eprintln!("note: {c}");
    }
    if outcome.incomplete {
        eprintln!("budget exhausted before the search completed");
        ExitCode::from(2)
    } else if s.holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
