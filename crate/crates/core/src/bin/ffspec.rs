use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ffspec::cli::{run_config_file, run_corpus, RunReport, Status, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "ffspec",
    version,
    about = "Far-field operator spectra and phaseless retrieval"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config or the bundled corpus.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config (JSON).
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    config: Option<PathBuf>,
    /// Run every bundled scenario.
    #[arg(long)]
    corpus: bool,
    /// Output directory; the corpus writes one subdirectory per scenario.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads for the numerical kernels.
    #[arg(long)]
    jobs: Option<usize>,
}

fn summarize(report: &RunReport) {
    let status = match report.status {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Error => "ERROR",
    };
    println!(
        "{status:5} {} ({:.2} s) -> {}",
        report.scenario, report.wall_time_s, report.output_dir
    );
    for t in &report.tasks {
        for c in t.checks.iter().filter(|c| !c.passed) {
            println!(
                "      {}: {} = {:.3e} violates {:?} {:.3e}",
                t.task, c.name, c.value, c.relation, c.bound
            );
        }
        if let Some(e) = &t.error {
            println!("      {}: error: {e}", t.task);
        }
    }
    for e in &report.config_errors {
        println!("      config: {e}");
    }
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            eprintln!("--jobs must be at least 1");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    // sequential dense kernels keep reruns bit-identical
    faer::set_global_parallelism(faer::Par::Seq);
    let code = if args.corpus {
        let root = args
            .output_dir
            .unwrap_or_else(|| PathBuf::from("ffspec-out"));
        let (code, reports) = run_corpus(&root);
        reports.iter().for_each(summarize);
        code
    } else {
        let path = args.config.expect("clap enforces --config or --corpus");
        let (code, report, errors) = run_config_file(&path, args.output_dir.as_deref());
        for e in &errors {
            eprintln!("config error: {e}");
        }
        if let Some(r) = &report {
            summarize(r);
        }
        code
    };
    ExitCode::from(code as u8)
}
