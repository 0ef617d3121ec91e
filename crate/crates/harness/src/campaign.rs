use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use radionet::netmodel::{Network, NodeId, Purpose, RandomStream};
use radionet::primitives::Packet;
use radionet::protocols::{broadcast, compete, decay_broadcast_baseline, leader_election, CompeteConfig};
use radionet::radio::{Fidelity, RunStatus, Trace, TraceSummary};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::spec::{ExperimentSpec, NetworkSpec, ProtocolSpec};

/// One CSV row per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub topology: String,
    pub n: usize,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub protocol: String,
    pub mode: String,
    /// Simulated rounds.
    pub rounds: u64,
    /// Simulated plus charged rounds.
    pub charged_rounds: u64,
    pub success: bool,
    /// Nodes that output the maximum source message.
    pub informed: usize,
    /// Agreed leader id, elections only.
    pub leader: Option<u64>,
    /// `completed`, `timed_out` or `error`.
    pub status: String,
    pub error: String,
}

/// CSV header, in column order.
pub const COLUMNS: [&str; 13] = [
    "seed",
    "topology",
    "n",
    "D",
    "protocol",
    "mode",
    "rounds",
    "charged_rounds",
    "success",
    "informed",
    "leader",
    "status",
    "error",
];

/// Trace summary persisted next to a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub seed: u64,
    pub n: usize,
    pub informed: usize,
    /// Nodes that flagged themselves as leader, elections only.
    pub self_flags: Option<usize>,
    pub trace: Option<TraceSummary>,
}

impl SummaryLine {
    /// Success as implied by the counts alone.
    pub fn recomputed_success(&self) -> bool {
        self.trace.is_some() && self.informed == self.n && self.self_flags.is_none_or(|f| f == 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub row: ResultRow,
    pub summary: SummaryLine,
}

/// Worker pool honoring `RADIONET_THREADS`.
pub fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var("RADIONET_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// Runs every seed of `spec`, one row per seed in ascending seed order.
/// Spec-level problems are errors; per-seed failures become error rows.
pub fn campaign(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    Ok(campaign_records(spec)?.into_iter().map(|r| r.row).collect())
}

pub fn campaign_records(spec: &ExperimentSpec) -> Result<Vec<Record>> {
    spec.validate()?;
    let cfg = spec.compete_config()?;
    let seeds = spec.seeds.resolve();
    let fixed = match &spec.network {
        NetworkSpec::Generate { per_seed: true, .. } => None,
        _ => Some(spec.network_for(0)?),
    };
    let probe = match &fixed {
        Some(net) => Some(net.clone()),
        None => seeds.first().map(|&s| spec.network_for(s)).transpose()?,
    };
    if let Some(net) = &probe {
        check_feasible(spec, &cfg, net)?;
    }
    let label = topology_label(spec);
    let records = thread_pool().install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let net = match &fixed {
                    Some(n) => Ok(n.clone()),
                    None => spec.network_for(seed),
                };
                match net {
                    Ok(net) => run_seed(spec, &cfg, &net, &label, seed),
                    Err(e) => error_record(spec, &cfg, &label, seed, e.to_string()),
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(records)
}

fn check_feasible(spec: &ExperimentSpec, cfg: &CompeteConfig, net: &Network) -> Result<()> {
    match spec.protocol {
        ProtocolSpec::Broadcast { source, .. } | ProtocolSpec::Baseline { source, .. } => net.check_node(source)?,
        ProtocolSpec::Compete { sources } if sources > net.n() => {
            return config_err(format!("{sources} sources on a {}-node network", net.n()));
        }
        _ => {}
    }
    if !matches!(spec.protocol, ProtocolSpec::Baseline { .. }) {
        cfg.derive(net.n(), net.diameter())?;
    }
    Ok(())
}

fn topology_label(spec: &ExperimentSpec) -> String {
    match &spec.network {
        NetworkSpec::Generate { topology, .. } => topology.label(),
        NetworkSpec::File { path } => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "file".into()),
    }
}

fn mode_name(spec: &ExperimentSpec, cfg: &CompeteConfig) -> &'static str {
    let mode = match spec.protocol {
        ProtocolSpec::Baseline { .. } => Fidelity::Faithful,
        _ => cfg.mode,
    };
    match mode {
        Fidelity::Faithful => "faithful",
        Fidelity::Charged => "charged",
    }
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Completed => "completed",
        RunStatus::TimedOut => "timed_out",
    }
}

/// `k` distinct nodes with random 32-bit values, keyed by `seed`.
pub fn pick_sources(n: usize, k: usize, seed: u64) -> Vec<(NodeId, u64)> {
    let mut stream = RandomStream::new(seed, Purpose::Derive, u64::MAX, 0);
    let mut nodes: Vec<NodeId> = (0..n).collect();
    let k = k.min(n);
    for i in 0..k {
        let j = i + stream.below((n - i) as u64) as usize;
        nodes.swap(i, j);
    }
    nodes[..k]
        .iter()
        .map(|&v| (v, stream.next_word() & 0xffff_ffff))
        .collect()
}

struct Outcome {
    trace: TraceSummary,
    informed: usize,
    leader: Option<u64>,
    self_flags: Option<usize>,
    status: RunStatus,
}

impl Outcome {
    fn plain(trace: &Trace<Packet>, success: bool, informed: usize, status: RunStatus) -> Self {
        Outcome {
            trace: trace.summary(success),
            informed,
            leader: None,
            self_flags: None,
            status,
        }
    }
}

fn run_seed(spec: &ExperimentSpec, cfg: &CompeteConfig, net: &Network, label: &str, seed: u64) -> Record {
    let mut row = ResultRow {
        seed,
        topology: label.to_string(),
        n: net.n(),
        diameter: net.diameter(),
        protocol: spec.protocol.name().into(),
        mode: mode_name(spec, cfg).into(),
        rounds: 0,
        charged_rounds: 0,
        success: false,
        informed: 0,
        leader: None,
        status: String::new(),
        error: String::new(),
    };
    let mut summary = SummaryLine {
        seed,
        n: net.n(),
        informed: 0,
        self_flags: None,
        trace: None,
    };
    let result = match spec.protocol {
        ProtocolSpec::Broadcast { source, value } => broadcast(net, source, value, cfg, seed)
            .map(|o| Outcome::plain(&o.trace, o.success, o.informed(), o.status)),
        ProtocolSpec::Compete { sources } => compete(net, &pick_sources(net.n(), sources, seed), cfg, seed)
            .map(|o| Outcome::plain(&o.trace, o.success, o.informed(), o.status)),
        ProtocolSpec::Election { c_cand, id_bits } => leader_election(net, cfg, c_cand, id_bits, seed).map(|o| {
            let mut out = Outcome::plain(&o.compete.trace, o.success, o.compete.informed(), o.compete.status);
            out.leader = o.leader_node.and(o.leader[0]);
            out.self_flags = Some(o.self_flag.iter().filter(|&&f| f).count());
            out
        }),
        ProtocolSpec::Baseline { source, value } => decay_broadcast_baseline(net, source, value, seed, spec.round_cap)
            .map(|o| Outcome::plain(&o.trace, o.success, o.informed(), o.status)),
    };
    match result {
        Ok(out) => {
            row.rounds = out.trace.rounds;
            row.charged_rounds = out.trace.charged_rounds;
            row.success = out.trace.success;
            row.informed = out.informed;
            row.leader = out.leader;
            row.status = status_name(out.status).into();
            summary.informed = out.informed;
            summary.self_flags = out.self_flags;
            summary.trace = Some(out.trace);
        }
        Err(e) => {
            row.status = "error".into();
            row.error = e.to_string();
        }
    }
    Record { row, summary }
}

fn error_record(spec: &ExperimentSpec, cfg: &CompeteConfig, label: &str, seed: u64, error: String) -> Record {
    Record {
        row: ResultRow {
            seed,
            topology: label.into(),
            n: 0,
            diameter: 0,
            protocol: spec.protocol.name().into(),
            mode: mode_name(spec, cfg).into(),
            rounds: 0,
            charged_rounds: 0,
            success: false,
            informed: 0,
            leader: None,
            status: "error".into(),
            error,
        },
        summary: SummaryLine {
            seed,
            n: 0,
            informed: 0,
            self_flags: None,
            trace: None,
        },
    }
}

/// Serializes rows as CSV with the header.
pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Appends rows to `path`, writing the header only when the file is new or empty.
/// An existing file must start with the same header.
pub fn append_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let has_content = path.exists() && std::fs::metadata(path)?.len() > 0;
    if has_content {
        let mut first = String::new();
        BufReader::new(std::fs::File::open(path)?).read_line(&mut first)?;
        if first.trim_end() != COLUMNS.join(",") {
            return config_err(format!("{} has a different header", path.display()));
        }
    }
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(!has_content).from_writer(file);
    if !has_content && rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Appends one JSON line per summary.
pub fn append_summaries(path: &Path, lines: &[SummaryLine]) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    for l in lines {
        writeln!(file, "{}", serde_json::to_string(l)?)?;
    }
    Ok(())
}

pub fn read_summaries(path: &Path) -> Result<Vec<SummaryLine>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Runs `spec` and writes its outputs. Returns the rows.
pub fn execute(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let records = campaign_records(spec)?;
    let rows: Vec<ResultRow> = records.iter().map(|r| r.row.clone()).collect();
    match &spec.output.rows {
        Some(path) => append_rows(path, &rows)?,
        None => print!("{}", rows_to_csv(&rows)?),
    }
    if let Some(path) = &spec.output.summaries {
        let lines: Vec<SummaryLine> = records.into_iter().map(|r| r.summary).collect();
        append_summaries(path, &lines)?;
    }
    Ok(rows)
}
