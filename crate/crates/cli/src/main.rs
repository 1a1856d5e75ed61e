use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use superkvn_cli::config::Exact;
use superkvn_cli::{emit_plot_data, run_suite, CliError, EmitKind, Status, Suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "superkvn", version, about = "Verification harness for the superfield KvN toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write a JSON report.
    Verify {
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
        /// `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, env = "SUPERKVN_OUT")]
        out: Option<PathBuf>,
        /// Time slices for the discretized kernel.
        #[arg(long)]
        slices: Option<usize>,
        /// Comma-separated ε values for the quantum vierbein family.
        #[arg(long)]
        epsilon: Option<String>,
        /// Only print failures and the summary line.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Write CSV plot data from a previous `verify` run in the output directory.
    Emit {
        kind: EmitKind,
        #[arg(long, env = "SUPERKVN_OUT")]
        out: PathBuf,
    },
}

fn verify(
    suite: Suite,
    seed: Option<u64>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    slices: Option<usize>,
    epsilon: Option<String>,
    quiet: bool,
) -> Result<bool, CliError> {
    let mut cfg = match &config {
        Some(p) => SuiteConfig::load(p, suite)?,
        None => SuiteConfig::new(suite),
    };
    cfg.suite = suite;
    let mut overrides = std::collections::BTreeMap::new();
    if let Some(s) = seed {
        overrides.insert("seed".to_string(), s.to_string());
    }
    if let Some(n) = slices {
        overrides.insert("slices".to_string(), n.to_string());
    }
    if let Some(e) = &epsilon {
        e.split(',').try_for_each(|x| Exact::parse(x).map(drop))?;
        overrides.insert("epsilon".to_string(), e.clone());
    }
    cfg.apply(&overrides)?;
    if let Some(o) = out {
        cfg.out = o;
    }

    let report = run_suite(&cfg)?;
    for c in &report.body.checks {
        if quiet && c.status == Status::Pass {
            continue;
        }
        let verdict = if c.status == Status::Pass { "PASS" } else { "FAIL" };
        let residual = c.residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
        let tol = c.tolerance.map_or("exact".to_string(), |t| format!("≤ {t:e}"));
        print!("{verdict} {}/{} residual {residual} ({tol})", c.suite, c.name);
        match &c.detail {
            Some(d) => println!(": {d}"),
            None => println!(),
        }
    }
    let failed = report.failures().count();
    println!(
        "{}: {} checks, {failed} failed, {:.1}s; report in {}",
        report.body.suite,
        report.body.checks.len(),
        report.wall_time_s,
        cfg.out.display()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify {
            suite,
            seed,
            config,
            out,
            slices,
            epsilon,
            quiet,
        } => verify(suite, seed, config, out, slices, epsilon, quiet),
        Command::Emit { kind, out } => emit_plot_data(kind, &out).map(|p| {
            println!("wrote {}", p.display());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("superkvn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
