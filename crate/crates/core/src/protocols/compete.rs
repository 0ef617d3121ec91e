use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::config::{CompeteConfig, Derived, Termination};
use super::icp::{charged_phase, sequence_entry, Chooser, Fine, IcpLane, Knowledge, Layout, Propagation, PHASES};
use crate::error::{invalid, Result};
use crate::netmodel::{derive_seed, Network, NodeId, Purpose, RandomStream, UNREACHED};
use crate::primitives::{
    build_schedules, decay_coin, decay_len, partition, partition_within, Clustering, Packet, ScheduleParams, Schedules,
};
use crate::radio::{run, Fidelity, Lane, LaneOp, Message, Protocol, RunStatus, Trace, Via};

/// Everything Compete computes before propagation starts.
pub struct Plan {
    pub derived: Derived,
    pub coarse: Clustering,
    pub coarse_schedules: Schedules,
    /// Coarse cluster index of every node.
    pub group_of: Vec<u32>,
    /// Members of every coarse cluster.
    pub groups: Vec<Vec<NodeId>>,
    /// Fine clusterings indexed by `j_index·copies + copy`.
    pub main: Vec<Fine>,
    pub background: Vec<Fine>,
    /// Sequence seed chosen by each coarse center.
    pub seq_seeds: Vec<u64>,
    /// Whether each node received its coarse cluster's sequence seed.
    pub knows_sequence: Vec<bool>,
}

impl Plan {
    pub fn coarse_centers(&self) -> Vec<NodeId> {
        self.coarse.clusters().iter().map(|c| c.center).collect()
    }

    /// Fine clustering used by coarse cluster `group` at sequence position `p`.
    pub fn sequence_entry(&self, group: usize, p: u64) -> usize {
        let center = self.coarse.clusters()[group].center;
        sequence_entry(
            self.seq_seeds[group],
            center,
            p % self.derived.seq_len as u64,
            self.derived.js.len(),
            self.derived.copies,
        )
    }
}

fn partition_cost(cfg: &CompeteConfig, d: &Derived, beta: f64) -> u64 {
    (cfg.c_part * d.log_n.powi(3) / beta).ceil() as u64
}

fn account(trace: &mut Trace<Packet>, mode: Fidelity, rounds: u64, tag: &'static str) -> Result<()> {
    match mode {
        Fidelity::Charged => trace.charge(rounds, tag),
        Fidelity::Faithful => {
            trace.record_modelled(rounds, tag);
            Ok(())
        }
    }
}

/// Runs the precomputation: coarse clustering and schedules, fine clusterings
/// per scale inside coarse clusters, background clusterings, and sequence
/// seed dissemination.
pub fn precompute(net: &Network, cfg: &CompeteConfig, seed: u64, trace: &mut Trace<Packet>) -> Result<Plan> {
    let n = net.n();
    let derived = cfg.derive(n, net.diameter())?;
    let mode = cfg.mode;
    let sp = cfg.schedule_params();

    let coarse = partition(net, derived.beta_coarse, derive_seed(seed, Purpose::Derive, 1, 0))?;
    account(
        trace,
        mode,
        partition_cost(cfg, &derived, derived.beta_coarse),
        "pre-partition",
    )?;
    let coarse_schedules = build_schedules(net, &coarse, mode, &sp, derive_seed(seed, Purpose::Derive, 2, 0), trace)?;
    let group_of: Vec<u32> = (0..n).map(|v| coarse.cluster_index(v) as u32).collect();
    let groups: Vec<Vec<NodeId>> = coarse.clusters().iter().map(|c| c.members.clone()).collect();

    let mut main = Vec::with_capacity(derived.js.len() * derived.copies);
    for (ji, &j) in derived.js.iter().enumerate() {
        let beta = 0.5f64.powi(j as i32);
        for copy in 0..derived.copies {
            let label = (ji * 4096 + copy) as u64;
            let clustering = partition_within(net, beta, derive_seed(seed, Purpose::Derive, 3, label), &group_of)?;
            account(trace, mode, partition_cost(cfg, &derived, beta), "pre-partition")?;
            let schedules = build_schedules(
                net,
                &clustering,
                mode,
                &sp,
                derive_seed(seed, Purpose::Derive, 4, label),
                trace,
            )?;
            let layouts = Layout::by_group(&schedules, &group_of, groups.len());
            main.push(Fine {
                clustering,
                schedules,
                ell: derived.ell_main(j),
                layouts,
            });
        }
    }

    let seq_seeds: Vec<u64> = coarse
        .clusters()
        .iter()
        .map(|c| RandomStream::first(seed, Purpose::Sequence, c.center as u64, u64::MAX))
        .collect();
    let knows_sequence = match mode {
        Fidelity::Charged => {
            let cost = coarse.max_strong_diameter(net) as u64 + sp.period(n) as u64;
            trace.charge(cost, "pre-sequence")?;
            vec![true; n]
        }
        Fidelity::Faithful => disseminate_seeds(
            net,
            &coarse_schedules,
            &sp,
            derive_seed(seed, Purpose::Derive, 5, 0),
            trace,
        )?,
    };

    let single = vec![0u32; n];
    let mut background = Vec::with_capacity(derived.bg_count);
    for k in 0..derived.bg_count as u64 {
        let clustering = partition(net, derived.beta_bg, derive_seed(seed, Purpose::Derive, 6, k))?;
        account(
            trace,
            mode,
            partition_cost(cfg, &derived, derived.beta_bg),
            "pre-partition",
        )?;
        let schedules = build_schedules(
            net,
            &clustering,
            mode,
            &sp,
            derive_seed(seed, Purpose::Derive, 7, k),
            trace,
        )?;
        let layouts = Layout::by_group(&schedules, &single, 1);
        background.push(Fine {
            clustering,
            schedules,
            ell: derived.ell_bg,
            layouts,
        });
    }

    Ok(Plan {
        derived,
        coarse,
        coarse_schedules,
        group_of,
        groups,
        main,
        background,
        seq_seeds,
        knows_sequence,
    })
}

/// Layered Decay wave carrying each coarse center's seed down its tree.
struct SeedWave<'a> {
    schedules: &'a Schedules,
    knows: Vec<bool>,
    by_depth: Vec<Vec<NodeId>>,
    steps: u32,
    reps: u32,
    seed: u64,
    step: u64,
}

fn disseminate_seeds(
    net: &Network,
    schedules: &Schedules,
    sp: &ScheduleParams,
    seed: u64,
    trace: &mut Trace<Packet>,
) -> Result<Vec<bool>> {
    let n = net.n();
    let mut by_depth: Vec<Vec<NodeId>> = vec![Vec::new(); schedules.max_depth() as usize + 1];
    let mut knows = vec![false; n];
    for v in 0..n {
        if let Some(d) = schedules.depth(v) {
            by_depth[d as usize].push(v);
            knows[v] = d == 0;
        }
    }
    let mut wave = SeedWave {
        schedules,
        knows,
        by_depth,
        steps: decay_len(n),
        reps: sp.layer_rounds(n),
        seed,
        step: 0,
    };
    let total = wave.total();
    if total > 0 {
        run(net, &mut wave, total, trace)?;
    }
    Ok(wave.knows)
}

impl SeedWave<'_> {
    fn layer_len(&self) -> u64 {
        self.steps as u64 * self.reps as u64
    }

    fn total(&self) -> u64 {
        (self.by_depth.len() as u64 - 1) * self.layer_len()
    }
}

impl Protocol for SeedWave<'_> {
    type Payload = Packet;

    fn transmit(&mut self, _round: u64, tx: &mut Vec<(NodeId, Packet)>) -> Lane {
        let layer = (self.step / self.layer_len()) as usize;
        let i = (self.step % self.steps as u64) as u32 + 1;
        let epoch = self.step / self.steps as u64;
        for &v in &self.by_depth[layer] {
            if self.knows[v] && decay_coin(self.seed, v, epoch, i) {
                let cluster = self.schedules.center(v);
                tx.push((v, Packet::Seed { cluster, seed: 0 }));
            }
        }
        Lane::Precompute
    }

    fn receive(&mut self, _round: u64, tx: &[(NodeId, Packet)], rx: &[(NodeId, u32)], _: &mut Trace<Packet>) {
        let layer = (self.step / self.layer_len()) as u32;
        for &(w, idx) in rx {
            if let (_, Packet::Seed { cluster, .. }) = tx[idx as usize] {
                if cluster == self.schedules.center(w) && self.schedules.depth(w) == Some(layer + 1) {
                    self.knows[w] = true;
                }
            }
        }
        self.step += 1;
    }

    fn finished(&self) -> bool {
        self.step >= self.total()
    }
}

/// Result of a Compete run.
#[derive(Debug)]
pub struct CompeteOutcome {
    /// Highest message known to each node at the end.
    pub outputs: Vec<Option<Message>>,
    pub trace: Trace<Packet>,
    pub status: RunStatus,
    /// Every node output the maximum source message.
    pub success: bool,
    /// Rounds (simulated or charged) spent before propagation.
    pub precompute_rounds: u64,
    /// Rounds elapsed in the propagation phase.
    pub propagation_rounds: u64,
    pub sources: Vec<(NodeId, Message)>,
}

impl CompeteOutcome {
    pub fn informed(&self) -> usize {
        let target = self.sources.iter().map(|s| s.1).max();
        self.outputs.iter().filter(|o| **o == target).count()
    }
}

/// Propagates the highest of the source messages to every node. Each source
/// value is paired with its node id, so messages are distinct.
pub fn compete(net: &Network, sources: &[(NodeId, u64)], cfg: &CompeteConfig, seed: u64) -> Result<CompeteOutcome> {
    let msgs: Vec<(NodeId, Message)> = sources
        .iter()
        .map(|&(v, value)| (v, Message { value, origin: v }))
        .collect();
    compete_messages(net, &msgs, cfg, seed)
}

pub(crate) fn compete_messages(
    net: &Network,
    sources: &[(NodeId, Message)],
    cfg: &CompeteConfig,
    seed: u64,
) -> Result<CompeteOutcome> {
    if sources.is_empty() {
        return invalid("compete needs at least one source");
    }
    let mut seen = vec![false; net.n()];
    for &(v, _) in sources {
        net.check_node(v)?;
        if std::mem::replace(&mut seen[v], true) {
            return invalid(format!("node {v} listed twice as a source"));
        }
    }
    cfg.validate()?;
    let d = net.diameter().max(1) as f64;
    if sources.len() as f64 > d.powf(0.875) {
        log::warn!("{} sources exceed D^0.875 = {:.1}", sources.len(), d.powf(0.875));
    }
    let mut trace = Trace::new(cfg.mode);
    let plan = precompute(net, cfg, seed, &mut trace)?;
    let precompute_rounds = match cfg.mode {
        Fidelity::Charged => trace.charged_rounds(),
        Fidelity::Faithful => trace.rounds(),
    };
    let target = sources.iter().map(|s| s.1).max();
    let mut know = Knowledge::new(net.n(), target);
    let origin_round = match cfg.mode {
        Fidelity::Charged => trace.charged_rounds(),
        Fidelity::Faithful => trace.rounds(),
    };
    for &(v, m) in sources {
        know.offer(v, m, origin_round, Via::Origin, &mut trace);
    }
    let prop_seed = derive_seed(seed, Purpose::Derive, 8, 0);
    let (know, status, propagation_rounds) = match cfg.mode {
        Fidelity::Charged => propagate_charged(&plan, cfg, know, prop_seed, &mut trace)?,
        Fidelity::Faithful => propagate_faithful(net, &plan, cfg, know, prop_seed, &mut trace)?,
    };
    let success = know.all_informed();
    Ok(CompeteOutcome {
        outputs: know.best,
        trace,
        status,
        success,
        precompute_rounds,
        propagation_rounds,
        sources: sources.to_vec(),
    })
}

/// Broadcast from one source: Compete with a single message.
pub fn broadcast(net: &Network, source: NodeId, value: u64, cfg: &CompeteConfig, seed: u64) -> Result<CompeteOutcome> {
    compete(net, &[(source, value)], cfg, seed)
}

struct Timeline {
    lane: Lane,
    group: usize,
    fine: usize,
    count: u64,
    phase: u8,
    start: u64,
}

fn propagate_charged(
    plan: &Plan,
    cfg: &CompeteConfig,
    mut know: Knowledge,
    _seed: u64,
    trace: &mut Trace<Packet>,
) -> Result<(Knowledge, RunStatus, u64)> {
    let n = know.best.len();
    let base = trace.charged_rounds();
    let cap = plan.derived.cap;
    let period = cfg.schedule_params().period(n) as u64;
    let phase_steps = |ell: u32| 2 * (ell as u64 + period);
    let parity = |lane: Lane| lane.parity().unwrap_or(0);
    let end_round = |lane: Lane, end: u64| 2 * (end - 1) + parity(lane);

    let mut timelines = Vec::new();
    for g in 0..plan.groups.len() {
        timelines.push(Timeline {
            lane: Lane::Main,
            group: g,
            fine: plan.sequence_entry(g, 0),
            count: 0,
            phase: 0,
            start: 0,
        });
    }
    if !plan.background.is_empty() {
        timelines.push(Timeline {
            lane: Lane::Background,
            group: 0,
            fine: 0,
            count: 0,
            phase: 0,
            start: 0,
        });
    }
    let fines = |t: &Timeline| -> &Fine {
        if t.lane == Lane::Main {
            &plan.main[t.fine]
        } else {
            &plan.background[t.fine]
        }
    };
    let mut heap = BinaryHeap::new();
    for (idx, t) in timelines.iter().enumerate() {
        let end = t.start + phase_steps(fines(t).ell);
        heap.push(Reverse((end_round(t.lane, end), idx)));
    }
    let mut heard_main = vec![None; n];
    let mut heard_bg = vec![None; n];
    let mut gather = vec![None; n];
    let oracle = cfg.termination == Termination::Oracle;
    let mut elapsed = 0u64;
    let mut status = RunStatus::TimedOut;
    if oracle && know.all_informed() {
        status = RunStatus::Completed;
    } else {
        while let Some(Reverse((round, idx))) = heap.pop() {
            if round >= cap {
                elapsed = cap;
                status = if oracle {
                    RunStatus::TimedOut
                } else {
                    RunStatus::Completed
                };
                break;
            }
            let t = &mut timelines[idx];
            let fine = if t.lane == Lane::Main {
                &plan.main[t.fine]
            } else {
                &plan.background[t.fine]
            };
            let steps = phase_steps(fine.ell);
            let heard = if t.lane == Lane::Main {
                &mut heard_main
            } else {
                &mut heard_bg
            };
            charged_phase(
                &fine.layouts[t.group],
                &fine.schedules,
                fine.ell,
                t.phase,
                heard,
                &mut gather,
                &mut know,
                base + round,
                trace,
            );
            trace.record_lane_op(LaneOp {
                tag: if t.phase == 1 { "icp-in" } else { "icp-out" },
                lane: t.lane,
                start_round: 2 * t.start + parity(t.lane),
                steps,
            });
            t.start += steps;
            t.phase += 1;
            if t.phase == PHASES {
                t.phase = 0;
                t.count += 1;
                t.fine = if t.lane == Lane::Main {
                    plan.sequence_entry(t.group, t.count)
                } else {
                    (t.count % plan.background.len() as u64) as usize
                };
            }
            let next_ell = if t.lane == Lane::Main {
                plan.main[t.fine].ell
            } else {
                plan.background[t.fine].ell
            };
            heap.push(Reverse((end_round(t.lane, t.start + phase_steps(next_ell)), idx)));
            if oracle && know.all_informed() {
                elapsed = round + 1;
                status = RunStatus::Completed;
                break;
            }
        }
    }
    trace.charge(elapsed, "propagation")?;
    Ok((know, status, elapsed))
}

fn propagate_faithful(
    net: &Network,
    plan: &Plan,
    cfg: &CompeteConfig,
    know: Knowledge,
    seed: u64,
    trace: &mut Trace<Packet>,
) -> Result<(Knowledge, RunStatus, u64)> {
    let n = net.n();
    let chooser = Chooser::Sequence {
        seeds: plan.seq_seeds.clone(),
        centers: plan.coarse_centers(),
        len: plan.derived.seq_len,
        js: plan.derived.js.len(),
        copies: plan.derived.copies,
    };
    let main = IcpLane::new(
        &plan.main,
        chooser,
        cfg.icp_layer_reps,
        n,
        &plan.group_of,
        &plan.groups,
        Some(&plan.knows_sequence),
        derive_seed(seed, Purpose::Derive, 1, 0),
        1,
    );
    let single = vec![0u32; n];
    let everyone = vec![(0..n).collect::<Vec<_>>()];
    let bg = (!plan.background.is_empty()).then(|| {
        IcpLane::new(
            &plan.background,
            Chooser::RoundRobin,
            cfg.icp_layer_reps,
            n,
            &single,
            &everyone,
            None,
            derive_seed(seed, Purpose::Derive, 2, 0),
            2,
        )
    });
    let oracle = cfg.termination == Termination::Oracle;
    let start = trace.rounds();
    let mut prop = Propagation::new([Some(main), bg], know, start, n, Some(oracle));
    let budget = plan.derived.cap + (prop.first_round() - start);
    let status = run(net, &mut prop, budget, trace)?;
    let status = if oracle { status } else { RunStatus::Completed };
    Ok((prop.know, status, trace.rounds() - start))
}

/// Fraction of nodes attached to fine trees, averaged over fine clusterings.
pub fn attachment_rate(plan: &Plan) -> f64 {
    let all: Vec<&Fine> = plan.main.iter().chain(&plan.background).collect();
    let n = plan.group_of.len() as f64;
    all.iter()
        .map(|f| f.schedules.depths().iter().filter(|&&d| d != UNREACHED).count() as f64 / n)
        .sum::<f64>()
        / all.len().max(1) as f64
}
