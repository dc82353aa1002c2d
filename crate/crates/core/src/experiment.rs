//! Paired runs with and without learning, and the CSV files they leave
//! behind.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgen::{generate_network, NetGenConfig, NetGenError};
use crate::network::{CostRules, FlightNetwork, LegalityRules, NetworkConfig, NetworkError};
use crate::orchestrator::{run, RunConfig, RunError, RunTrace};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("parsing {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    NetGen(#[from] NetGenError),
    #[error("run {label}: {source}")]
    Run { label: &'static str, source: RunError },
    #[error("writing {path}: {source}")]
    Csv { path: String, source: csv::Error },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Write `vgae_epochs.csv` from the learning run.
    pub epoch_log: bool,
    /// Write `combiner_audit.csv` from the learning run.
    pub combiner_audit: bool,
}

/// An experiment: a network (from file or generated) and the run settings
/// shared by both runs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Overrides both the generator and the run seed.
    pub seed: Option<u64>,
    /// A network file; relative paths resolve against the config file.
    pub network_file: Option<PathBuf>,
    pub netgen: NetGenConfig,
    pub rules: LegalityRules,
    pub cost: CostRules,
    pub run: RunConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|source| ExperimentError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        if let (Some(f), Some(dir)) = (&cfg.network_file, path.parent()) {
            if f.is_relative() {
                cfg.network_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    fn effective(&self) -> (NetGenConfig, RunConfig) {
        let mut gen = self.netgen.clone();
        let mut run = self.run.clone();
        if let Some(s) = self.seed {
            gen.seed = s;
            run.seed = s;
        }
        (gen, run)
    }

    /// Loads or generates the network with the rules and costs to use.
    pub fn network(&self) -> Result<NetworkConfig, ExperimentError> {
        match &self.network_file {
            Some(path) => Ok(NetworkConfig::load(path)?),
            None => {
                let (gen, _) = self.effective();
                Ok(generate_network(&gen, &self.rules, &self.cost)?.config)
            }
        }
    }
}

/// Which of the paired runs to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSelection {
    pub with_learning: bool,
    pub without_learning: bool,
}

impl Default for RunSelection {
    fn default() -> Self {
        Self {
            with_learning: true,
            without_learning: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub network: NetworkConfig,
    pub with_learning: Option<RunTrace>,
    pub without_learning: Option<RunTrace>,
    pub files: Vec<PathBuf>,
}

/// Runs the selected runs side by side on one network.
pub fn run_pair(
    network: &FlightNetwork,
    rules: &LegalityRules,
    cost: &CostRules,
    config: &RunConfig,
    selection: RunSelection,
) -> Result<(Option<RunTrace>, Option<RunTrace>), ExperimentError> {
    let with_cfg = RunConfig {
        learning_enabled: true,
        ..config.clone()
    };
    let without_cfg = RunConfig {
        learning_enabled: false,
        ..config.clone()
    };
    let (with, without) = std::thread::scope(|s| {
        let w = selection
            .with_learning
            .then(|| s.spawn(|| run(network, rules, cost, &with_cfg)));
        let wo = selection
            .without_learning
            .then(|| s.spawn(|| run(network, rules, cost, &without_cfg)));
        let join = |h: std::thread::ScopedJoinHandle<'_, _>| h.join().expect("optimizer run panicked");
        (w.map(join), wo.map(join))
    });
    let with = with.transpose().map_err(|source| ExperimentError::Run {
        label: "with learning",
        source,
    })?;
    let without = without.transpose().map_err(|source| ExperimentError::Run {
        label: "without learning",
        source,
    })?;
    Ok((with, without))
}

/// Executes the experiment and writes every output file into `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    selection: RunSelection,
    out_dir: &Path,
) -> Result<ExperimentReport, ExperimentError> {
    if !selection.with_learning && !selection.without_learning {
        return Err(ExperimentError::Config("nothing to run".into()));
    }
    let netcfg = config.network()?;
    let network = netcfg.build()?;
    let (_, run_cfg) = config.effective();
    log::info!("network: {} flights, {} bases", network.len(), network.bases().len());
    let (with, without) = run_pair(&network, &netcfg.rules, &netcfg.cost, &run_cfg, selection)?;

    std::fs::create_dir_all(out_dir).map_err(|source| ExperimentError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut files = Vec::new();
    let network_path = out_dir.join("network.toml");
    std::fs::write(&network_path, netcfg.to_toml()?).map_err(|source| ExperimentError::Io {
        path: network_path.display().to_string(),
        source,
    })?;
    files.push(network_path);
    if let Some(t) = &with {
        files.push(write_file(out_dir, "trace_with.csv", |w| t.write_csv(w))?);
    }
    if let Some(t) = &without {
        files.push(write_file(out_dir, "trace_without.csv", |w| t.write_csv(w))?);
    }
    files.push(write_file(out_dir, "summary.csv", |w| {
        write_summary(w, with.as_ref(), without.as_ref())
    })?);
    files.push(write_file(out_dir, "curves.csv", |w| {
        write_curves(w, with.as_ref(), without.as_ref())
    })?);
    if let Some(t) = &with {
        if config.output.epoch_log {
            files.push(write_file(out_dir, "vgae_epochs.csv", |w| write_epoch_log(w, t))?);
        }
        if config.output.combiner_audit {
            files.push(write_file(out_dir, "combiner_audit.csv", |w| {
                write_combiner_audit(w, t)
            })?);
        }
    }
    Ok(ExperimentReport {
        network: netcfg,
        with_learning: with,
        without_learning: without,
        files,
    })
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> csv::Result<()>,
) -> Result<PathBuf, ExperimentError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush().map_err(csv::Error::from))
        .map_err(|source| ExperimentError::Csv {
            path: path.display().to_string(),
            source,
        })?;
    Ok(path)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn secs(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64())
}

/// One row per loop, then a `final` row:
/// `loop,phase,lp_with,ip_with,z_with,lp_without,ip_without,z_without,delta_lp,delta_ip,seconds_with,seconds_without`.
/// Deltas are with minus without. The final row carries final costs, total
/// iterations and wall time.
pub fn write_summary<W: Write>(out: W, with: Option<&RunTrace>, without: Option<&RunTrace>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "loop",
        "phase",
        "lp_with",
        "ip_with",
        "z_with",
        "lp_without",
        "ip_without",
        "z_without",
        "delta_lp",
        "delta_ip",
        "seconds_with",
        "seconds_without",
    ])?;
    let loops = with
        .map_or(0, |t| t.loops.len())
        .max(without.map_or(0, |t| t.loops.len()));
    for k in 0..loops {
        let a = with.and_then(|t| t.loops.get(k));
        let b = without.and_then(|t| t.loops.get(k));
        let delta = |f: fn(&crate::orchestrator::LoopSummary) -> f64| match (a, b) {
            (Some(x), Some(y)) => Some(f(x) - f(y)),
            _ => None,
        };
        w.write_record([
            k.to_string(),
            RunTrace::phase_label(k),
            opt(a.map(|l| l.lp_cost)),
            opt(a.map(|l| l.ip_cost)),
            a.map(|l| l.cg_iterations.to_string()).unwrap_or_default(),
            opt(b.map(|l| l.lp_cost)),
            opt(b.map(|l| l.ip_cost)),
            b.map(|l| l.cg_iterations.to_string()).unwrap_or_default(),
            opt(delta(|l| l.lp_cost)),
            opt(delta(|l| l.ip_cost)),
            a.map(|l| secs(l.cg_time + l.ip_time)).unwrap_or_default(),
            b.map(|l| secs(l.cg_time + l.ip_time)).unwrap_or_default(),
        ])?;
    }
    let last_lp = |t: &RunTrace| t.loops.last().map(|l| l.lp_cost);
    let final_delta = match (with, without) {
        (Some(a), Some(b)) => Some(a.final_cost() - b.final_cost()),
        _ => None,
    };
    let lp_delta = match (with.and_then(last_lp), without.and_then(last_lp)) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    w.write_record([
        String::new(),
        "final".to_string(),
        opt(with.and_then(last_lp)),
        opt(with.map(RunTrace::final_cost)),
        with.map(|t| t.total_iterations().to_string()).unwrap_or_default(),
        opt(without.and_then(last_lp)),
        opt(without.map(RunTrace::final_cost)),
        without.map(|t| t.total_iterations().to_string()).unwrap_or_default(),
        opt(lp_delta),
        opt(final_delta),
        with.map(|t| secs(t.wall_time)).unwrap_or_default(),
        without.map(|t| secs(t.wall_time)).unwrap_or_default(),
    ])?;
    w.flush()?;
    Ok(())
}

/// LP cost against cumulative CG iteration for both runs:
/// `iteration,cost_with,cost_without`.
pub fn write_curves<W: Write>(out: W, with: Option<&RunTrace>, without: Option<&RunTrace>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "cost_with", "cost_without"])?;
    let len = with
        .map_or(0, |t| t.iterations.len())
        .max(without.map_or(0, |t| t.iterations.len()));
    let at = |t: Option<&RunTrace>, k: usize| t.and_then(|t| t.iterations.get(k)).map(|r| r.lp_cost);
    for k in 0..len {
        w.write_record([(k + 1).to_string(), opt(at(with, k)), opt(at(without, k))])?;
    }
    w.flush()?;
    Ok(())
}

/// `iteration,epoch,loss,roc` for every learning iteration.
pub fn write_epoch_log<W: Write>(out: W, trace: &RunTrace) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "epoch", "loss", "roc"])?;
    for ev in &trace.learning {
        for e in &ev.epochs {
            w.write_record([
                ev.cumulative.to_string(),
                e.epoch.to_string(),
                e.loss.to_string(),
                e.roc.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `iteration,roc,learnt,random,pairs_consumed,columns,learnt_flights`, the
/// flights space-separated in selection order.
pub fn write_combiner_audit<W: Write>(out: W, trace: &RunTrace) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iteration",
        "roc",
        "learnt",
        "random",
        "pairs_consumed",
        "columns",
        "learnt_flights",
    ])?;
    for ev in &trace.learning {
        let flights: Vec<String> = ev.selection.learnt.iter().map(|f| f.to_string()).collect();
        w.write_record([
            ev.cumulative.to_string(),
            ev.roc.to_string(),
            ev.selection.learnt_count().to_string(),
            ev.selection.random_count().to_string(),
            ev.selection.pairs_consumed.to_string(),
            ev.columns_found.to_string(),
            flights.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}
