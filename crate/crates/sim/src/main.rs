use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cdts_sim::{compare_stacked_vs_cooperative, export_csv, run_scenario, RunLog, RunOptions, Setup, SimError, SimResult};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cdts", version, about = "Run cooperative dual-arm scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write `<name>.csv` and `<name>.meta.json`.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Solve a reach_plane scenario with stacked and cooperative residuals.
    Compare {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Parse and validate a scenario without solving it.
    Validate { scenario: PathBuf },
}

fn create_dir(out: &Path) -> SimResult<()> {
    std::fs::create_dir_all(out).map_err(|e| SimError::io(out, e))
}

fn print_log(log: &RunLog) {
    println!("{} ({}): {}, {} rows", log.scenario, log.kind, log.status, log.records.len());
    for c in &log.checks {
        println!("  {c}");
    }
}

fn exit(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run(command: Command) -> SimResult<ExitCode> {
    match command {
        Command::Run { scenario, out, seed, max_iter, quiet } => {
            let setup = Setup::load(&scenario)?;
            let log = run_scenario(&setup, &RunOptions { seed, max_iter })?;
            create_dir(&out)?;
            let path = out.join(format!("{}.csv", log.scenario));
            export_csv(&log, &path)?;
            if !quiet {
                print_log(&log);
                println!("wrote {}", path.display());
            }
            Ok(exit(log.passed()))
        }
        Command::Compare { scenario, out } => {
            let setup = Setup::load(&scenario)?;
            let report = compare_stacked_vs_cooperative(&setup, &RunOptions::default())?;
            create_dir(&out)?;
            let name = &setup.scenario.name;
            export_csv(&report.cooperative, &out.join(format!("{name}_cooperative.csv")))?;
            export_csv(&report.stacked, &out.join(format!("{name}_stacked.csv")))?;
            let path = out.join(format!("{name}_compare.json"));
            let text = serde_json::to_string_pretty(&report.summary()).expect("report serializes");
            std::fs::write(&path, text + "\n").map_err(|e| SimError::io(&path, e))?;
            print_log(&report.cooperative);
            print_log(&report.stacked);
            println!("joint-configuration difference {:.6e}", report.difference);
            for c in &report.checks {
                println!("  {c}");
            }
            Ok(exit(report.passed()))
        }
        Command::Validate { scenario } => {
            let setup = Setup::load(&scenario)?;
            println!("{}: valid {} scenario, hash {}", setup.scenario.name, setup.scenario.task.kind(), setup.hash);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
