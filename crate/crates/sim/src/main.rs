use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use se23_sim::plot;
use se23_sim::{run_mode, Mode, Result, RunOutput, Scenario, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare classical and log-error propagation
    Validate,
    /// Check the gravity mismatch against its bounds
    Bound,
    /// Run gravity cancellation and stabilizing feedback
    Stabilize,
    /// Run all three modes concurrently
    All,
}

#[derive(Debug, Parser)]
#[command(name = "se23sim", version, about = "Formation log-error simulator on SE2(3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file; the built-in Molniya scenario when omitted
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Per-sample table format
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Skip SVG rendering
    #[arg(long, global = true)]
    no_plots: bool,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

fn emit(mode: Mode, out: &RunOutput, dir: &Path, format: Format, plots: bool) -> Result<()> {
    let dir = dir.join(mode.name());
    std::fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
    match format {
        Format::Csv => write_file(&dir.join("samples.csv"), &out.table.to_csv())?,
        Format::Json => write_file(&dir.join("samples.json"), &out.table.to_json())?,
    }
    write_file(&dir.join("summary.json"), &out.summary.to_json())?;
    if plots {
        match mode {
            Mode::Validate => {
                plot::write(&dir.join("error_components.svg"), &plot::error_components(&out.table)?)?;
                plot::write(&dir.join("residuals.svg"), &plot::residuals(&out.table)?)?;
            }
            Mode::Bound => plot::write(&dir.join("bound_ratio.svg"), &plot::bound_ratio(&out.table)?)?,
            Mode::Stabilize => plot::write(&dir.join("stabilization.svg"), &plot::stabilization(&out.table)?)?,
        }
    }
    Ok(())
}

fn report(mode: Mode, out: &RunOutput) {
    let s = &out.summary;
    let wall = s.wall_time_s.map_or(String::new(), |w| format!(" in {w:.2} s"));
    println!("{}: {} samples over {:.0} s{}", mode.name(), s.samples, s.duration_s, wall);
    for c in &s.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("  [{tag}] {} = {:.6e} (limit {:.6e})", c.name, c.value, c.limit);
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let base = match &cli.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::molniya(),
    };
    let modes: Vec<Mode> = match cli.command {
        Command::Validate => vec![Mode::Validate],
        Command::Bound => vec![Mode::Bound],
        Command::Stabilize => vec![Mode::Stabilize],
        Command::All => vec![Mode::Validate, Mode::Bound, Mode::Stabilize],
    };
    let results: Vec<(Mode, Result<RunOutput>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = modes
            .iter()
            .map(|&mode| {
                let sc = Scenario { mode, ..base.clone() };
                (mode, scope.spawn(move || run_mode(mode, &sc)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(mode, h)| (mode, h.join().expect("simulation thread panicked")))
            .collect()
    });
    let mut passed = true;
    for (mode, result) in results {
        let out = result?;
        report(mode, &out);
        emit(mode, &out, &cli.out, cli.format, !cli.no_plots)?;
        passed &= out.summary.passed();
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(1)
        }
    }
}
