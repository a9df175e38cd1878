//! `holoflow analyze`: equilibria, orbit classification and reports for
//! `ż = F(z)` over a rectangle.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holoflow::expr::FunctionModel;
use holoflow::flow::IntegrationConfig;
use holoflow::report::{analyze, parse_box, render_svg, AnalysisInput, SeedSpec};
use holoflow::Region;

#[derive(Parser)]
#[command(name = "holoflow", version, about = "Phase portraits of holomorphic flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a function over a rectangle and emit a JSON report.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Expression in `z`, e.g. "z^3*(z-1)^3".
    #[arg(long)]
    function: String,
    /// Analysis rectangle as x0,y0,x1,y1.
    #[arg(long = "box", value_name = "x0,y0,x1,y1", allow_hyphen_values = true, value_parser = parse_box)]
    region: Region,
    /// `grid:N`, `grid:N@x0,y0,x1,y1` or `list:z1;z2;...`.
    #[arg(long, default_value = "grid:10", allow_hyphen_values = true, value_parser = SeedSpec::parse)]
    seeds: SeedSpec,
    /// Write the report here instead of standard output.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write an SVG phase portrait.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 200.0)]
    max_time: f64,
    #[arg(long, default_value_t = 10.0)]
    escape_radius: f64,
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
}

enum Failure {
    Usage(String),
    Analysis(String),
}

fn run(args: AnalyzeArgs) -> Result<(), Failure> {
    FunctionModel::<f64>::parse(&args.function).map_err(|e| Failure::Usage(format!("invalid value for '--function': {e}")))?;
    let config = IntegrationConfig {
        max_time: args.max_time,
        escape_radius: args.escape_radius,
        rel_tol: args.rel_tol,
        ..IntegrationConfig::default()
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(format!("invalid integration flags: {e}")))?;
    let input = AnalysisInput {
        function: args.function,
        region: args.region,
        seeds: args.seeds,
        config,
    };
    let failed = |e: &dyn std::fmt::Display| Failure::Analysis(e.to_string());
    let analysis = analyze(&input).map_err(|e| failed(&e))?;
    let json = analysis.report.to_json().map_err(|e| failed(&e))?;
    match &args.json {
        Some(path) => std::fs::write(path, format!("{json}\n")).map_err(|e| failed(&format!("{}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.svg {
        render_svg(&analysis.report, &analysis.orbits, path).map_err(|e| failed(&format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let Command::Analyze(args) = cli.command;
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("holoflow: {e}");
            ExitCode::from(2)
        }
    }
}
