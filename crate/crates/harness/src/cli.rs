use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use radionet::analysis::cprop_experiment;
use radionet::netmodel::{build_topology, NodeId, Topology};
use radionet::radio::Fidelity;

use crate::analyze::{cprop_csv, diametral_pair, mc_campaign, shortest_path, subpath_campaign, subpath_csv};
use crate::calibrate::{calibrate, BatterySize};
use crate::campaign::execute;
use crate::config::{Calibrated, Profile};
use crate::error::{config_err, Result};
use crate::spec::{
    default_c_cand, default_id_bits, load_network, ConfigChoice, ExperimentSpec, NetworkSpec, ProtocolSpec, Seeds,
};
use crate::verify::{parse_claim, verify};

#[derive(Debug, Parser)]
#[command(
    name = "radionet",
    version,
    about = "Radio network broadcast and leader election experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a network and write its canonical JSON.
    Gen(GenArgs),
    /// Run a campaign and append result rows as CSV.
    Run(Box<RunArgs>),
    /// Monte Carlo and subpath analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Fuzz the layer-vector claims and emit a JSON report.
    Verify(VerifyArgs),
    /// Run the calibration battery and write the constants file.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Path,
    Cycle,
    Grid,
    RandomTree,
    Star,
    Gnp,
}

#[derive(Debug, Args)]
struct TopologyArgs {
    /// Topology family.
    #[arg(long, value_enum)]
    topology: Option<Family>,
    /// Node count (all families except grid).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Edge probability for gnp.
    #[arg(long)]
    p: Option<f64>,
}

impl TopologyArgs {
    fn topology(&self) -> Result<Option<Topology>> {
        let Some(family) = self.topology else {
            return Ok(None);
        };
        let need = |v: Option<usize>, name: &str| match v {
            Some(x) => Ok(x),
            None => config_err(format!("--{name} is required for this topology")),
        };
        Ok(Some(match family {
            Family::Path => Topology::Path { n: need(self.n, "n")? },
            Family::Cycle => Topology::Cycle { n: need(self.n, "n")? },
            Family::RandomTree => Topology::RandomTree { n: need(self.n, "n")? },
            Family::Star => Topology::Star { n: need(self.n, "n")? },
            Family::Grid => Topology::Grid {
                rows: need(self.rows, "rows")?,
                cols: need(self.cols, "cols")?,
            },
            Family::Gnp => Topology::GnpConnected {
                n: need(self.n, "n")?,
                p: self.p.map_or_else(|| config_err("--p is required for gnp"), Ok)?,
            },
        }))
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    topo: TopologyArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolName {
    Broadcast,
    Compete,
    Election,
    Baseline,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Faithful,
    Charged,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment spec file; other experiment flags must be absent.
    #[arg(long, conflicts_with_all = ["protocol", "net", "topology", "seeds", "seed_list"])]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    protocol: Option<ProtocolName>,
    /// Network JSON file.
    #[arg(long, conflicts_with = "topology")]
    net: Option<PathBuf>,
    #[command(flatten)]
    topo: TopologyArgs,
    /// Generator seed for --topology.
    #[arg(long, default_value_t = 0)]
    net_seed: u64,
    /// Regenerate the network from each run seed.
    #[arg(long)]
    per_seed_network: bool,
    #[arg(long, default_value_t = 0)]
    source: NodeId,
    #[arg(long, default_value_t = 1)]
    value: u64,
    /// Number of random sources for compete.
    #[arg(long, default_value_t = 2)]
    sources: usize,
    #[arg(long, default_value_t = default_c_cand())]
    c_cand: f64,
    #[arg(long, default_value_t = default_id_bits())]
    id_bits: u32,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Run seeds 0..N.
    #[arg(long, conflicts_with = "seed_list")]
    seeds: Option<u64>,
    /// Comma-separated run seeds.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    #[arg(long, value_enum, conflicts_with = "config")]
    profile: Option<Profile>,
    /// Versioned Compete config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    round_cap: Option<u64>,
    /// CSV file to append rows to; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON lines file for trace summaries.
    #[arg(long)]
    summaries: Option<PathBuf>,
    /// Also write the effective spec here.
    #[arg(long)]
    save_spec: Option<PathBuf>,
}

impl RunArgs {
    fn to_spec(&self) -> Result<ExperimentSpec> {
        if let Some(path) = &self.spec {
            let mut spec = ExperimentSpec::load(path)?;
            if self.out.is_some() {
                spec.output.rows = self.out.clone();
            }
            if self.summaries.is_some() {
                spec.output.summaries = self.summaries.clone();
            }
            return Ok(spec);
        }
        let network = match (&self.net, self.topo.topology()?) {
            (Some(path), None) => NetworkSpec::File { path: path.clone() },
            (None, Some(topology)) => NetworkSpec::Generate {
                topology,
                seed: self.net_seed,
                per_seed: self.per_seed_network,
            },
            _ => return config_err("give exactly one of --net, --topology or --spec"),
        };
        let protocol = match self.protocol {
            None => return config_err("--protocol is required without --spec"),
            Some(ProtocolName::Broadcast) => ProtocolSpec::Broadcast {
                source: self.source,
                value: self.value,
            },
            Some(ProtocolName::Baseline) => ProtocolSpec::Baseline {
                source: self.source,
                value: self.value,
            },
            Some(ProtocolName::Compete) => ProtocolSpec::Compete { sources: self.sources },
            Some(ProtocolName::Election) => ProtocolSpec::Election {
                c_cand: self.c_cand,
                id_bits: self.id_bits,
            },
        };
        let seeds = match (&self.seed_list, self.seeds) {
            (Some(list), _) => Seeds::List(list.clone()),
            (None, Some(n)) => Seeds::Count(n),
            (None, None) => Seeds::Count(1),
        };
        let mut spec = ExperimentSpec::new(network, protocol, seeds);
        spec.config = match (&self.config, self.profile) {
            (Some(path), _) => ConfigChoice::File(path.clone()),
            (None, Some(p)) => ConfigChoice::Profile(p),
            (None, None) => ConfigChoice::default(),
        };
        spec.mode = self.mode.map(|m| match m {
            ModeArg::Faithful => Fidelity::Faithful,
            ModeArg::Charged => Fidelity::Charged,
        });
        spec.round_cap = self.round_cap;
        spec.output.rows = self.out.clone();
        spec.output.summaries = self.summaries.clone();
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Subcommand)]
enum AnalyzeCmd {
    /// Mean distance to the cluster center at one or more rates (JSON).
    Mc {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        node: NodeId,
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Center distances across scales against the calibrated envelope (CSV).
    Cprop {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        node: NodeId,
        #[arg(long)]
        j_lo: u32,
        #[arg(long)]
        j_hi: u32,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        /// Envelope constant; the frozen value when absent.
        #[arg(long)]
        c_cp: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bad subpath counts along a shortest path (CSV).
    Subpaths {
        #[arg(long)]
        net: PathBuf,
        /// Path start; a diametral pair when both ends are absent.
        #[arg(long, requires = "to")]
        from: Option<NodeId>,
        #[arg(long, requires = "from")]
        to: Option<NodeId>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Comma-separated claims: trans1, trans2, goodj, goodjcond.
    #[arg(long, value_delimiter = ',', default_value = "trans1,trans2,goodj,goodjcond")]
    claims: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Constants file to write; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Small battery for smoke runs.
    #[arg(long)]
    quick: bool,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code: 0 ok, 1 runtime failure or claim violation,
/// 2 usage error, 3 validation or configuration error.
pub fn cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(parsed.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Gen(a) => {
            let Some(top) = a.topo.topology()? else {
                return config_err("--topology is required");
            };
            let net = build_topology(&top, a.seed)?;
            emit(a.out.as_deref(), &format!("{}\n", net.to_json()))?;
            Ok(0)
        }
        Command::Run(a) => {
            let spec = a.to_spec()?;
            if let Some(p) = &a.save_spec {
                std::fs::write(p, spec.to_json())?;
            }
            let rows = execute(&spec)?;
            let ok = rows.iter().filter(|r| r.success).count();
            log::info!("{ok}/{} runs succeeded", rows.len());
            Ok(0)
        }
        Command::Analyze(cmd) => analyze(cmd),
        Command::Verify(a) => {
            let claims = a.claims.iter().map(|c| parse_claim(c)).collect::<Result<Vec<_>>>()?;
            let report = verify(&claims, a.samples, a.seed)?;
            emit(
                a.out.as_deref(),
                &format!("{}\n", serde_json::to_string_pretty(&report)?),
            )?;
            Ok(if report.violations == 0 { 0 } else { 1 })
        }
        Command::Calibrate(a) => {
            let size = if a.quick {
                BatterySize::quick()
            } else {
                BatterySize::full()
            };
            let c = calibrate(size)?;
            emit(a.out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&c)?))?;
            Ok(0)
        }
    }
}

fn analyze(cmd: AnalyzeCmd) -> Result<i32> {
    match cmd {
        AnalyzeCmd::Mc {
            net,
            node,
            beta,
            trials,
            seed,
            out,
        } => {
            let net = load_network(&net)?;
            let rows = mc_campaign(&net, node, &beta, trials, seed)?;
            let json: Vec<serde_json::Value> = rows
                .iter()
                .map(|(b, e)| serde_json::json!({"beta": b, "mean": e.mean, "stderr": e.stderr, "trials": e.trials}))
                .collect();
            emit(out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&json)?))?;
        }
        AnalyzeCmd::Cprop {
            net,
            node,
            j_lo,
            j_hi,
            trials,
            c_cp,
            seed,
            out,
        } => {
            let net = load_network(&net)?;
            let c_cp = match c_cp {
                Some(c) => c,
                None => Calibrated::frozen()?.c_cp,
            };
            let rep = cprop_experiment(&net, node, j_lo, j_hi, trials, c_cp, seed)?;
            log::info!("fraction of scales within the envelope: {:.3}", rep.fraction);
            emit(out.as_deref(), &cprop_csv(&rep.rows)?)?;
        }
        AnalyzeCmd::Subpaths {
            net,
            from,
            to,
            seeds,
            out,
        } => {
            let net = load_network(&net)?;
            let (a, b) = match (from, to) {
                (Some(a), Some(b)) => (a, b),
                _ => diametral_pair(&net),
            };
            let path = shortest_path(&net, a, b)?;
            let seeds: Vec<u64> = (0..seeds).collect();
            let rows = subpath_campaign(&net, &path, &seeds)?;
            emit(out.as_deref(), &subpath_csv(&rows)?)?;
        }
    }
    Ok(0)
}
