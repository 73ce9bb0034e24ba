use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use ttplan::harness::io;
use ttplan::harness::{
    run_batches, run_scenario, write_metrics_csv, Algorithm, Batch, DynamicConfig, MetricsRow,
    ScenarioConfig,
};
use ttplan::{
    format_mbps, generate, generate_streams, validate, Error, TopologyKind, TopologySpec,
};

#[derive(Parser)]
#[command(
    name = "ttplan",
    version,
    about = "Time-triggered stream scheduling and routing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated topology file.
    GenTopology {
        #[command(flatten)]
        topo: TopoArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write random streams between the hosts of a topology file.
    GenStreams {
        #[arg(long)]
        topology_file: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan the streams of a streams file and write the port tables.
    Schedule {
        #[arg(long)]
        topology_file: PathBuf,
        #[arg(long)]
        streams_file: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
        /// Port table output; printed to stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Check exported port tables; exits with 1 on any violation.
    Verify {
        #[arg(long)]
        topology_file: PathBuf,
        #[arg(long)]
        streams_file: PathBuf,
        #[arg(long)]
        schedule_file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generated scenarios over several seeds; writes metrics CSV.
    Bench {
        #[command(flatten)]
        topo: TopoArgs,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value_t = 2500)]
        n: usize,
        /// Number of seeds, starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Streams leave and enter over several steps; writes metrics CSV.
    Dynamic {
        #[command(flatten)]
        topo: TopoArgs,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value_t = 1500)]
        initial: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        leave: usize,
        #[arg(long, default_value_t = 200)]
        enter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TopoArgs {
    /// random-N, ring-N, grid-RxC, tree-N or line-N.
    #[arg(long, default_value = "random-25")]
    topology: String,
    #[arg(long, default_value_t = 1)]
    hosts_per_bridge: usize,
    /// Loads the topology from a file instead.
    #[arg(long)]
    topology_file: Option<PathBuf>,
}

impl TopoArgs {
    fn spec(&self, seed: u64) -> Result<TopologySpec, Error> {
        let kind = match &self.topology_file {
            Some(p) => TopologyKind::External(p.clone()),
            None => self.topology.parse()?,
        };
        Ok(TopologySpec {
            kind,
            hosts_per_bridge: self.hosts_per_bridge,
            seed,
        })
    }
}

#[derive(Args)]
struct PlanArgs {
    /// h2s, celf, ff, edf (comma separated for bench).
    #[arg(long, default_value = "h2s")]
    algo: String,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long, default_value_t = ttplan::routing::DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    offensive: bool,
}

impl PlanArgs {
    fn algorithms(&self) -> Result<Vec<Algorithm>, Error> {
        self.algo
            .split(',')
            .map(|a| {
                let a: Algorithm = a.trim().parse()?;
                if self.offensive {
                    a.offensive()
                } else {
                    Ok(a)
                }
            })
            .collect()
    }

    fn config(
        &self,
        topology: TopologySpec,
        n: usize,
        algorithm: Algorithm,
        seed: u64,
    ) -> ScenarioConfig {
        ScenarioConfig {
            batch_size: self.batch_size,
            k_candidates: self.k,
            ..ScenarioConfig::new(topology, n, algorithm, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Error::Validation(v)) => {
            eprint!("{}", io::format_violations(&v));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::GenTopology { topo, out } => {
            let graph = generate(&topo.spec(0)?)?;
            io::save_topology(&graph, &out)?;
            println!(
                "{} bridges, {} hosts, {} links -> {}",
                graph.bridges().len(),
                graph.end_stations().len(),
                graph.link_count(),
                out.display()
            );
        }
        Command::GenStreams {
            topology_file,
            n,
            seed,
            out,
        } => {
            let graph = io::load_topology(&topology_file)?;
            io::save_streams(&generate_streams(&graph, n, seed)?, &out)?;
            println!("{n} streams -> {}", out.display());
        }
        Command::Schedule {
            topology_file,
            streams_file,
            plan,
            out,
            metrics,
        } => {
            let graph = Arc::new(io::load_topology(&topology_file)?);
            let streams = io::load_streams(&streams_file, &graph)?;
            let [algorithm] = plan.algorithms()?[..] else {
                return Err(Error::Config("schedule takes exactly one algorithm".into()));
            };
            let topology = TopologySpec::new(TopologyKind::External(topology_file), 0);
            let cfg = plan.config(topology, streams.len(), algorithm, plan.seed);
            let size = cfg.batch_size.unwrap_or(streams.len()).max(1);
            let batches = streams.chunks(size).map(|c| Ok(Batch::Add(c.to_vec())));
            let run = run_batches(&cfg, graph, batches)?;
            let tables = io::format_tables(&run.state);
            match out {
                Some(p) => std::fs::write(p, tables)?,
                None => print!("{tables}"),
            }
            if let Some(p) = metrics {
                write_metrics_csv(&run.rows, p)?;
            }
            let rejected: usize = run.rows.iter().map(|r| r.rejected_count).sum();
            eprintln!(
                "{algorithm}: admitted {} of {}, {} Mbit/s",
                run.state.admitted_count(),
                streams.len(),
                format_mbps(run.state.aggregated_throughput())
            );
            if rejected > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify {
            topology_file,
            streams_file,
            schedule_file,
            json,
        } => {
            let graph = Arc::new(io::load_topology(&topology_file)?);
            let streams = io::load_streams(&streams_file, &graph)?;
            let state = io::import_schedule(&schedule_file, graph, &streams)?;
            let violations = validate(&state);
            if json {
                println!("{}", io::violations_json(&violations)?);
            } else {
                print!("{}", io::format_violations(&violations));
            }
            if !violations.is_empty() {
                return Ok(ExitCode::from(1));
            }
            eprintln!("valid: {} streams", state.admitted_count());
        }
        Command::Bench {
            topo,
            plan,
            n,
            seeds,
            out,
        } => {
            let mut rows = Vec::new();
            for algorithm in plan.algorithms()? {
                for seed in plan.seed..plan.seed + seeds {
                    let cfg = plan.config(topo.spec(seed)?, n, algorithm, seed);
                    rows.extend(run_scenario(&cfg)?.rows);
                }
            }
            print_summary(&rows);
            write_rows(&rows, out.as_deref())?;
        }
        Command::Dynamic {
            topo,
            plan,
            initial,
            steps,
            leave,
            enter,
            out,
        } => {
            let dynamic = DynamicConfig {
                initial_n: initial,
                steps,
                leave_per_step: leave,
                enter_per_step: enter,
            };
            let mut rows = Vec::new();
            for algorithm in plan.algorithms()? {
                let cfg = plan
                    .config(topo.spec(plan.seed)?, 0, algorithm, plan.seed)
                    .with_dynamic(dynamic);
                rows.extend(run_scenario(&cfg)?.rows);
            }
            for r in &rows {
                println!(
                    "{:>14} step {:>3}: {:>10} Mbit/s, {:>6} streams",
                    r.algorithm,
                    r.step,
                    format_mbps(r.aggregated_throughput),
                    r.admitted_count
                );
            }
            write_rows(&rows, out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(rows: &[MetricsRow]) {
    let mut algos: Vec<&str> = rows.iter().map(|r| r.algorithm.as_str()).collect();
    algos.dedup();
    for algo in algos {
        let mine: Vec<&MetricsRow> = rows.iter().filter(|r| r.algorithm == algo).collect();
        let n = mine.len() as f64;
        let thr = mine.iter().map(|r| r.throughput_mbps()).sum::<f64>() / n;
        let admitted = mine.iter().map(|r| r.admitted_count as f64).sum::<f64>() / n;
        let secs = mine.iter().map(|r| r.solving_time_seconds).sum::<f64>() / n;
        println!("{algo:>14}: mean {thr:.3} Mbit/s, {admitted:.1} admitted, {secs:.4} s per step");
    }
}

fn write_rows(rows: &[MetricsRow], out: Option<&Path>) -> Result<(), Error> {
    if let Some(p) = out {
        write_metrics_csv(rows, p)?;
        eprintln!("{} rows -> {}", rows.len(), p.display());
    }
    Ok(())
}
