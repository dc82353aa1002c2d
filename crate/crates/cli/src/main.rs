use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use crewpair::experiment::{run_experiment, ExperimentConfig, RunSelection};
use crewpair::lp::{costs_match, read_instance, solve_ip, solve_lp, DEFAULT_NODE_BUDGET};
use crewpair::netgen::generate_network;
use crewpair::network::NetworkConfig;
use crewpair::pairing::PairingEngine;
use crewpair_oracle::crew::{all_pairings, RawFlight, RawRules};

#[derive(Parser)]
#[command(
    name = "crewpair",
    version,
    about = "Crew pairing optimisation with learnt pricing subsets"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic hub-and-spoke network.
    Gen {
        /// Experiment config supplying [netgen], [rules] and [cost].
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the paired experiment described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Only the run without learning.
        #[arg(long)]
        no_learning: bool,
        /// Output directory.
        #[arg(short, long, env = "CREWPAIR_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Check the solvers against brute force on small inputs.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// LP and IP optimum of a set-cover instance dump.
    Cover { instance: PathBuf },
    /// Pairing enumeration on a network file (at most 20 flights).
    Pairings { network: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Gen { config, seed, out } => gen(config.as_deref(), seed, out.as_deref()),
        Command::Run {
            config,
            seed,
            no_learning,
            out,
        } => run(&config, seed, no_learning, &out),
        Command::Oracle(OracleCommand::Cover { instance }) => oracle_cover(&instance),
        Command::Oracle(OracleCommand::Pairings { network }) => oracle_pairings(&network),
    }
}

fn gen(config: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<bool> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.netgen.seed = s;
    }
    let g = generate_network(&cfg.netgen, &cfg.rules, &cfg.cost)?;
    let text = g.config.to_toml()?;
    match out {
        Some(p) => {
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("{} flights written to {}", g.network.len(), p.display());
        }
        None => print!("{text}"),
    }
    Ok(true)
}

fn run(config: &Path, seed: Option<u64>, no_learning: bool, out: &Path) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    let selection = RunSelection {
        with_learning: !no_learning,
        without_learning: true,
    };
    let report = run_experiment(&cfg, selection, out)?;
    println!("{} flights", report.network.flights.len());
    for (label, trace) in [("with", &report.with_learning), ("without", &report.without_learning)] {
        let Some(t) = trace else { continue };
        println!(
            "{label:>8} learning: final {:.2}  z {}  loops {}  {:.1}s",
            t.final_cost(),
            t.total_iterations(),
            t.loops.len(),
            t.wall_time.as_secs_f64()
        );
    }
    if let (Some(a), Some(b)) = (&report.with_learning, &report.without_learning) {
        println!("   delta: {:.2}", a.final_cost() - b.final_cost());
    }
    for f in &report.files {
        log::info!("wrote {}", f.display());
    }
    Ok(true)
}

fn oracle_cover(path: &Path) -> Result<bool> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let inst = read_instance(BufReader::new(file))?;
    if inst.columns.len() > 25 {
        bail!(
            "exhaustive oracle limited to 25 columns, instance has {}",
            inst.columns.len()
        );
    }
    let cols: Vec<(Vec<usize>, f64)> = inst.columns.iter().map(|c| (c.rows.clone(), c.cost)).collect();
    let lp = solve_lp(&inst)?;
    let ip = solve_ip(&inst, DEFAULT_NODE_BUDGET)?;
    let lp_ref = crewpair_oracle::cover::lp_vertex_optimum(inst.num_flights, &cols);
    let ip_ref = crewpair_oracle::cover::ip_exhaustive(inst.num_flights, &cols);
    let lp_ok = lp_ref.is_some_and(|r| costs_match(r, lp.cost));
    let ip_ok = ip_ref.as_ref().is_some_and(|r| costs_match(r.0, ip.cost));
    println!("lp {} oracle {:?} {}", lp.cost, lp_ref, verdict(lp_ok));
    println!("ip {} oracle {:?} {}", ip.cost, ip_ref.map(|r| r.0), verdict(ip_ok));
    Ok(lp_ok && ip_ok)
}

fn oracle_pairings(path: &Path) -> Result<bool> {
    let cfg = NetworkConfig::load(path)?;
    let net = cfg.build()?;
    if net.len() > 20 {
        bail!("exhaustive oracle limited to 20 flights, network has {}", net.len());
    }
    let all: Vec<usize> = (0..net.len()).collect();
    let engine = PairingEngine::new(&net, cfg.rules, cfg.cost);
    let mut ours: Vec<Vec<usize>> = engine
        .enumerate_pairings(&all)
        .iter()
        .map(|p| p.flight_sequence())
        .collect();
    ours.sort();
    let flights: Vec<RawFlight> = net
        .flights()
        .iter()
        .map(|f| RawFlight {
            origin: f.origin.0,
            destination: f.destination.0,
            dep: f.dep_time,
            arr: f.arr_time,
        })
        .collect();
    let bases: Vec<u32> = net.bases().iter().map(|b| b.airport.0).collect();
    let r = &cfg.rules;
    let rules = RawRules {
        sit_min: r.sit_min,
        sit_max: r.sit_max,
        duty_max_flying: r.duty_max_flying,
        duty_max_elapsed: r.duty_max_elapsed,
        duty_max_flights: r.duty_max_flights,
        rest_min: r.rest_min,
        rest_max: r.rest_max,
        pairing_max_duties: r.pairing_max_duties,
        tafb_max: r.tafb_max,
        brief: r.brief,
        debrief: r.debrief,
    };
    let reference = all_pairings(&flights, &all, &bases, &rules);
    let ok = ours == reference;
    println!("pairings {} oracle {} {}", ours.len(), reference.len(), verdict(ok));
    Ok(ok)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISMATCH"
    }
}
