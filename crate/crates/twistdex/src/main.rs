use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use twistdex::{checks, examples, report, runner, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// Run twisted spectral triple check suites from scenario files.
#[derive(Parser, Debug)]
#[command(name = "twistdex", version, about)]
struct Args {
    /// Scenario file; repeat for several.
    #[arg(long = "scenario", value_name = "PATH")]
    scenarios: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Relative singular-value cutoff for ranks and kernels.
    #[arg(long, value_name = "FLOAT")]
    tolerance: Option<f64>,

    /// Replaces the seed of every scenario.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Print the suite-to-operation traceability table.
    #[arg(long)]
    list_checks: bool,

    /// Write the example corpus into DIR.
    #[arg(long, value_name = "DIR")]
    emit_examples: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn main() -> ExitCode {
    let args = Args::parse();

    if let Some(t) = args.tolerance {
        if !(t.is_finite() && t > 0.0 && t < 1.0) {
            eprintln!("error: --tolerance must lie in (0, 1), got {t}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    if args.list_checks {
        print!("{}", checks::traceability_table());
    }
    if let Some(dir) = &args.emit_examples {
        match examples::emit(dir) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: cannot write examples to {}: {e}", dir.display());
                return ExitCode::from(EXIT_FAIL);
            }
        }
    }
    if args.scenarios.is_empty() {
        if args.list_checks || args.emit_examples.is_some() {
            return ExitCode::SUCCESS;
        }
        eprintln!("error: nothing to do; pass --scenario, --list-checks or --emit-examples");
        return ExitCode::from(EXIT_INPUT);
    }

    let threads = match runner::threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };

    let mut scenarios = Vec::with_capacity(args.scenarios.len());
    for path in &args.scenarios {
        match Scenario::load(path) {
            Ok(s) => scenarios.push(s),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
        }
    }

    let overrides = runner::Overrides { seed: args.seed, rank_tolerance: args.tolerance };
    let reports = runner::with_threads(threads, || runner::run_all(&scenarios, overrides));
    let body = match args.format {
        Format::Json => report::to_json_lines(&reports),
        Format::Table => report::to_table(&reports),
    };
    let written = match &args.output {
        Some(path) => std::fs::write(path, &body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_FAIL);
    }

    if report::passed(&reports) {
        ExitCode::SUCCESS
    } else {
        for r in &reports {
            for f in r.failures() {
                eprintln!(
                    "FAIL {} {} {}: residual {:.3e}, scale {:.3e}{}",
                    f.scenario,
                    f.check,
                    f.subject,
                    f.residual,
                    f.scale,
                    f.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()
                );
            }
        }
        ExitCode::from(EXIT_FAIL)
    }
}
