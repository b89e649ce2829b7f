use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use lacg::bench;
use lacg::cg::CgConfig;
use lacg::dssr::CycleRule;
use lacg::instance::Instance;
use lacg::Error;

#[derive(Parser)]
#[command(name = "lacg", version, about = "CVRP column generation with LA-route pricing")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write one of the two generated datasets as instance files.
    Gen {
        #[arg(long)]
        dataset: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the LP relaxation of one instance and record CSV traces.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 10)]
        la_neighbors: usize,
        #[arg(long, value_enum, default_value_t = Rule::MinNodes)]
        cycle_rule: Rule,
        #[arg(long)]
        single_column: bool,
        /// Stop pricing with "time_limit" status after this many seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Factor speed-ups of every arm in DIR against la0.
    Speedup {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        min_baseline_secs: f64,
        #[arg(long, default_value = "la0")]
        baseline: String,
    },
    /// Cross-check the solver against brute-force enumeration.
    OracleSuite {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    MinNodes,
    Shortest,
}

fn run(cmd: Cmd) -> lacg::Result<()> {
    match cmd {
        Cmd::Gen { dataset, out } => {
            let names = bench::write_dataset(dataset, &out)?;
            println!("wrote {} instances to {}", names.len(), out.display());
        }
        Cmd::Solve {
            instance,
            la_neighbors,
            cycle_rule,
            single_column,
            time_limit,
            out,
        } => {
            if !matches!(la_neighbors, 0 | 5 | 10) {
                return Err(Error::Validation("--la-neighbors must be 0, 5 or 10".into()));
            }
            let time_limit = match time_limit {
                Some(s) if !(s.is_finite() && s > 0.0) => {
                    return Err(Error::Validation("--time-limit must be positive".into()))
                }
                s => s.map(Duration::from_secs_f64),
            };
            let inst = Instance::read(&instance)?;
            let cfg = CgConfig {
                la_k: la_neighbors,
                cycle_rule: match cycle_rule {
                    Rule::MinNodes => CycleRule::MinNodesAdded,
                    Rule::Shortest => CycleRule::ShortestCycle,
                },
                single_column,
                time_limit,
                ..Default::default()
            };
            std::fs::create_dir_all(&out)?;
            let s = bench::run_and_record(&inst, &cfg, &out)?;
            println!(
                "{} {} status={} objective={:.6} iterations={} total={:.3}s pricing={:.3}s rmp={:.3}s",
                s.instance, s.arm, s.status, s.objective, s.iterations, s.total_secs, s.pricing_secs, s.rmp_secs
            );
        }
        Cmd::Speedup {
            dir,
            min_baseline_secs,
            baseline,
        } => {
            let runs = bench::read_summaries(&dir)?;
            let per = bench::instance_speedups(&runs, &baseline)?;
            let table = bench::speedup_table(&per, min_baseline_secs);
            bench::write_instance_speedups(std::fs::File::create(dir.join("speedup_instances.csv"))?, &per)?;
            bench::write_speedup_table(std::fs::File::create(dir.join("speedup_table.csv"))?, &table)?;
            if table.counted == 0 {
                eprintln!("warning: no instance has a baseline time of at least {min_baseline_secs}s");
            }
            bench::write_speedup_table(std::io::stdout().lock(), &table)?;
        }
        Cmd::OracleSuite { max_n, seed } => {
            let rows = bench::oracle_suite(max_n, seed)?;
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            if rows.iter().any(|r| r.failures > 0) {
                return Err(Error::Internal("oracle suite found mismatches".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Parse { .. } | Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
