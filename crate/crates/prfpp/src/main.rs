//! Thin command-line front end over the library: scenario in, solution
//! record / sweep CSV / verification report out.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use prfpp::runner::{self, SolverOverrides, VerifyCheck};
use prfpp::scenario::{load_scenario, Scenario};

#[derive(Parser)]
#[command(
    name = "prfpp",
    about = "Forward performance processes and equilibrium strategies for competing CARA agents \
             in regime-switching binomial markets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file path or bundled scenario name.
    #[arg(long)]
    scenario: String,
    /// Write the result (JSON, or CSV for sweeps) to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the population sample size M.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the solver iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Worker threads for sweep evaluation (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and print the solution record.
    Solve(CommonArgs),
    /// Run the scenario's sweep panels and emit CSV rows.
    Sweep(CommonArgs),
    /// Run one verification check against a scenario.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Which check to run: martingale, contraction, or n-to-mfe.
        #[arg(long)]
        check: String,
    },
    /// Solve plus every verification check applicable to the scenario.
    Report(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> prfpp::Result<ExitCode> {
    let common = match &cli.command {
        Command::Solve(c) | Command::Sweep(c) | Command::Report(c) => c,
        Command::Verify { common, .. } => common,
    };
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| prfpp::Error::Domain(format!("thread pool: {e}")))?;
    }
    let scenario = load_scenario(&common.scenario)?;
    let overrides = SolverOverrides {
        seed: common.seed,
        samples: common.samples,
        tol: common.tol,
        max_iter: common.max_iter,
    };

    match &cli.command {
        Command::Solve(args) => {
            let record = runner::run_solve_with(&scenario, &overrides)?;
            emit_json(args, &record)?;
            print_solve_summary(&scenario, &record);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let table = runner::run_sweep_with(&scenario, &overrides)?;
            match &args.out {
                Some(path) => {
                    let file = std::fs::File::create(path)?;
                    table.write_csv(file)?;
                    println!("wrote {} rows to {}", table.rows.len(), path.display());
                }
                None => print!("{}", table.to_csv_string()?),
            }
            let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} of {} grid points failed; see the error column", table.rows.len());
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common, check } => {
            let check: VerifyCheck = check.parse()?;
            let report = runner::run_verify_with(&scenario, check, &overrides)?;
            emit_json(common, &report)?;
            println!(
                "{}: {} - {}",
                report.check,
                if report.pass { "PASS" } else { "FAIL" },
                report.summary
            );
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(4) })
        }
        Command::Report(args) => {
            let bundle = runner::run_report(&scenario, &overrides)?;
            emit_json(args, &bundle)?;
            print_solve_summary(&scenario, &bundle.solution);
            for check in &bundle.checks {
                println!(
                    "{}: {} - {}",
                    check.check,
                    if check.pass { "PASS" } else { "FAIL" },
                    check.summary
                );
            }
            for note in &bundle.skipped {
                println!("skipped {note}");
            }
            Ok(if bundle.pass { ExitCode::SUCCESS } else { ExitCode::from(4) })
        }
    }
}

fn emit_json<T: serde::Serialize>(args: &CommonArgs, value: &T) -> prfpp::Result<()> {
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(value)
            .map_err(|e| prfpp::Error::Domain(format!("serialize record: {e}")))?;
        let mut file = std::fs::File::create(path)?;
        file.write_all(json.as_bytes())?;
        file.write_all(b"\n")?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_solve_summary(scenario: &Scenario, record: &runner::SolutionRecord) {
    println!(
        "{} [{}] solved in {:.3} ms",
        record.scenario, record.mode, record.wall_time_ms
    );
    if let Some(y) = record.y_star {
        println!("  fixed point y* = {y:.12}");
    }
    if let Some(pi) = record.fixed_agent_strategy {
        println!("  fixed agent strategy = {pi:.12}");
    }
    if let Some(pi) = record.mfe_strategy {
        println!("  mean-field strategy = {pi:.12}");
    }
    match record.strategies.len() {
        0 => {}
        1..=4 => println!("  strategies = {:?}", record.strategies),
        m => {
            let mean = record.strategies.iter().sum::<f64>() / m as f64;
            println!("  {m} strategies, mean = {mean:.6}");
        }
    }
    if let (Some(iters), Some(residual)) = (record.iterations, record.residual) {
        println!("  {iters} iterations, residual {residual:.3e}");
    }
    let _ = scenario;
}
