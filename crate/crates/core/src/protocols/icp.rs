use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::netmodel::{halving_coin, mix64, Network, NodeId, Purpose, RandomStream, UNREACHED};
use crate::primitives::{decay_coin, decay_len, Clustering, Packet, ScheduleParams, Schedules};
use crate::radio::{run, Fidelity, Lane, Message, Protocol, Trace, Via};

/// Nodes of one group (for instance one coarse cluster) attached to the
/// trees of one clustering, sorted by tree depth.
#[derive(Debug, Clone, Default)]
pub struct Layout {
    nodes: Vec<NodeId>,
    offsets: Vec<u32>,
    centers: Vec<NodeId>,
}

impl Layout {
    /// One layout per group; `group_of[v]` is `v`'s group in `0..groups`.
    pub fn by_group(schedules: &Schedules, group_of: &[u32], groups: usize) -> Vec<Layout> {
        let mut buckets: Vec<Vec<Vec<NodeId>>> = vec![Vec::new(); groups];
        for (v, &d) in schedules.depths().iter().enumerate() {
            if d == UNREACHED {
                continue;
            }
            let b = &mut buckets[group_of[v] as usize];
            if b.len() <= d as usize {
                b.resize(d as usize + 1, Vec::new());
            }
            b[d as usize].push(v);
        }
        buckets
            .into_iter()
            .map(|layers| {
                let mut nodes = Vec::new();
                let mut offsets = vec![0u32];
                for layer in &layers {
                    nodes.extend_from_slice(layer);
                    offsets.push(nodes.len() as u32);
                }
                let centers = layers.first().cloned().unwrap_or_default();
                Layout {
                    nodes,
                    offsets,
                    centers,
                }
            })
            .collect()
    }

    /// Nodes at depth `d`.
    pub fn layer(&self, d: u32) -> &[NodeId] {
        let d = d as usize;
        if d + 1 >= self.offsets.len() {
            return &[];
        }
        &self.nodes[self.offsets[d] as usize..self.offsets[d + 1] as usize]
    }

    /// Nodes at depth `≤ ell`, centers first.
    pub fn within(&self, ell: u32) -> &[NodeId] {
        let end = self.offsets[(ell as usize + 1).min(self.offsets.len() - 1)] as usize;
        &self.nodes[..end]
    }

    pub fn centers(&self) -> &[NodeId] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Best message per node, with an informed counter against the target message.
#[derive(Debug, Clone)]
pub(crate) struct Knowledge {
    pub best: Vec<Option<Message>>,
    target: Option<Message>,
    informed: usize,
}

impl Knowledge {
    pub fn new(n: usize, target: Option<Message>) -> Self {
        Knowledge {
            best: vec![None; n],
            target,
            informed: 0,
        }
    }

    pub fn from_states(best: Vec<Option<Message>>) -> Self {
        Knowledge {
            best,
            target: None,
            informed: 0,
        }
    }

    /// Raises `v`'s best message to `msg` if higher, logging the event.
    #[inline]
    pub fn offer<P: crate::radio::Payload>(
        &mut self,
        v: NodeId,
        msg: Message,
        round: u64,
        via: Via,
        trace: &mut Trace<P>,
    ) -> bool {
        if Some(msg) > self.best[v] {
            self.best[v] = Some(msg);
            if Some(msg) == self.target {
                self.informed += 1;
            }
            trace.learn(round, v, msg, via);
            true
        } else {
            false
        }
    }

    pub fn all_informed(&self) -> bool {
        self.target.is_some() && self.informed == self.best.len()
    }
}

/// A clustering prepared for propagation: trees, radius and per-group layouts.
#[derive(Debug, Clone)]
pub struct Fine {
    pub clustering: Clustering,
    pub schedules: Schedules,
    pub ell: u32,
    pub layouts: Vec<Layout>,
}

/// ICP phases: 0 and 2 outward, 1 inward.
pub(crate) const PHASES: u8 = 3;

/// Applies one ICP phase as a charged-mode oracle on one layout.
#[allow(clippy::too_many_arguments)]
pub(crate) fn charged_phase<P: crate::radio::Payload>(
    layout: &Layout,
    schedules: &Schedules,
    ell: u32,
    phase: u8,
    heard: &mut [Option<Message>],
    gather: &mut [Option<(Message, NodeId)>],
    know: &mut Knowledge,
    round: u64,
    trace: &mut Trace<P>,
) {
    let members = layout.within(ell);
    if phase == 1 {
        for &v in members {
            if let Some(m) = know.best[v] {
                if Some(m) > heard[v] {
                    let c = schedules.center(v);
                    if gather[c].is_none_or(|(g, _)| m > g) {
                        gather[c] = Some((m, v));
                    }
                }
            }
        }
        for &c in layout.centers() {
            if let Some((m, from)) = gather[c].take() {
                know.offer(c, m, round, Via::Oracle { from }, trace);
            }
        }
    } else {
        for &v in members {
            let c = schedules.center(v);
            let m = know.best[c];
            if phase == 0 {
                heard[v] = m;
            }
            if let Some(m) = m {
                know.offer(v, m, round, Via::Oracle { from: c }, trace);
            }
        }
    }
}

/// Constants for a standalone ICP call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcpParams {
    pub schedule: ScheduleParams,
    /// Decay rounds per tree layer in faithful mode.
    pub layer_reps: u32,
}

impl Default for IcpParams {
    fn default() -> Self {
        IcpParams {
            schedule: ScheduleParams::default(),
            layer_reps: 2,
        }
    }
}

/// Runs one Intra-Cluster Propagation with radius `ell` in every cluster,
/// updating `best` in place and returning the rounds it consumed.
///
/// Charged mode runs the out/in/out phases as oracles and charges each phase
/// plus its interleaved background share. Faithful mode simulates the phases
/// layer by layer together with the coordinated background Decay lane.
#[allow(clippy::too_many_arguments)]
pub fn intra_cluster_propagation(
    net: &Network,
    clustering: &Clustering,
    schedules: &Schedules,
    ell: u32,
    best: &mut Vec<Option<Message>>,
    mode: Fidelity,
    params: &IcpParams,
    seed: u64,
    trace: &mut Trace<Packet>,
) -> Result<u64> {
    let n = net.n();
    if best.len() != n || schedules.depths().len() != n {
        return invalid("state and schedules must cover every node");
    }
    let group_of = vec![0u32; n];
    let layouts = Layout::by_group(schedules, &group_of, 1);
    let mut know = Knowledge::from_states(std::mem::take(best));
    let result = match mode {
        Fidelity::Charged => {
            let cost = params.schedule.broadcast_cost(n, ell);
            let mut heard = vec![None; n];
            let mut gather = vec![None; n];
            for (phase, tag) in [(0u8, "icp-out"), (1, "icp-in"), (2, "icp-out")] {
                trace.charge(cost, tag)?;
                trace.charge(cost, "icp-background")?;
                let round = trace.charged_rounds();
                charged_phase(
                    &layouts[0],
                    schedules,
                    ell,
                    phase,
                    &mut heard,
                    &mut gather,
                    &mut know,
                    round,
                    trace,
                );
            }
            Ok(6 * cost)
        }
        Fidelity::Faithful => {
            let fine = [Fine {
                clustering: clustering.clone(),
                schedules: schedules.clone(),
                ell,
                layouts,
            }];
            let groups = vec![(0..n).collect::<Vec<_>>()];
            let lane = IcpLane::new(
                &fine,
                Chooser::Fixed(0),
                params.layer_reps,
                n,
                &group_of,
                &groups,
                None,
                seed,
                1,
            );
            let start = trace.rounds();
            let len = lane.instance_slots(0) * decay_len(n) as u64 * 4;
            let mut prop = Propagation::new([Some(lane), None], know, start, n, None);
            prop.end_after = Some(len);
            run(net, &mut prop, len.max(1), trace)?;
            know = prop.know;
            Ok(trace.rounds() - start)
        }
    };
    *best = know.best;
    result
}

/// How a lane picks the clustering for its next ICP instance.
#[derive(Debug, Clone)]
pub(crate) enum Chooser {
    /// Per-group pseudo-random sequence regenerated from a disseminated seed.
    Sequence {
        seeds: Vec<u64>,
        centers: Vec<NodeId>,
        len: usize,
        js: usize,
        copies: usize,
    },
    /// Cycle through all clusterings.
    RoundRobin,
    /// One instance of the given clustering, then stop.
    Fixed(usize),
}

/// Entry `p` of a coarse cluster's sequence, as an index into the fine list.
pub(crate) fn sequence_entry(seed: u64, center: NodeId, p: u64, js: usize, copies: usize) -> usize {
    let mut s = RandomStream::new(seed, Purpose::Sequence, center as u64, p);
    let j = s.below(js as u64) as usize;
    let copy = s.below(copies as u64) as usize;
    j * copies + copy
}

impl Chooser {
    fn pick(&self, group: usize, k: u64, count: usize) -> Option<usize> {
        match self {
            Chooser::Sequence {
                seeds,
                centers,
                len,
                js,
                copies,
            } => Some(sequence_entry(
                seeds[group],
                centers[group],
                k % *len as u64,
                *js,
                *copies,
            )),
            Chooser::RoundRobin => Some((k % count as u64) as usize),
            Chooser::Fixed(f) => (k == 0).then_some(*f),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Inst {
    alive: bool,
    fine: usize,
    start: u64,
    len: u64,
    count: u64,
    key: u64,
    phase: u8,
    layer: u32,
}

/// Faithful ICP lane: every group runs its own sequence of ICP instances,
/// each phase layer lasting `reps` Decay rounds, with the coordinated
/// background Decay sublane alongside.
pub(crate) struct IcpLane<'a> {
    fines: &'a [Fine],
    chooser: Chooser,
    reps: u32,
    steps: u32,
    group_of: &'a [u32],
    groups: &'a [Vec<NodeId>],
    allowed: Option<&'a [bool]>,
    seed: u64,
    tag: u64,
    insts: Vec<Inst>,
    active: Vec<bool>,
    reached: Vec<bool>,
    heard: Vec<Option<Message>>,
    coin_on: Vec<bool>,
    icp_tx: Vec<NodeId>,
    bg_tx: Vec<NodeId>,
}

impl<'a> IcpLane<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fines: &'a [Fine],
        chooser: Chooser,
        reps: u32,
        n: usize,
        group_of: &'a [u32],
        groups: &'a [Vec<NodeId>],
        allowed: Option<&'a [bool]>,
        seed: u64,
        tag: u64,
    ) -> Self {
        IcpLane {
            fines,
            chooser,
            reps,
            steps: decay_len(n),
            group_of,
            groups,
            allowed,
            seed,
            tag,
            insts: vec![Inst::default(); groups.len()],
            active: vec![false; n],
            reached: vec![false; n],
            heard: vec![None; n],
            coin_on: vec![false; n],
            icp_tx: Vec::new(),
            bg_tx: Vec::new(),
        }
    }

    pub fn instance_slots(&self, fine: usize) -> u64 {
        PHASES as u64 * self.fines[fine].ell as u64 * self.reps as u64
    }

    fn allowed(&self, v: NodeId) -> bool {
        self.allowed.is_none_or(|a| a[v])
    }

    /// Sets up slot `slot`: advances instances, resets phase state and takes
    /// the transmitter snapshots for both sublanes.
    fn begin_slot(&mut self, slot: u64, know: &Knowledge) {
        self.icp_tx.clear();
        self.bg_tx.clear();
        let fines = self.fines;
        for g in 0..self.groups.len() {
            let mut inst = self.insts[g];
            if !inst.alive || slot >= inst.start + inst.len {
                if inst.alive || inst.count == 0 {
                    match self.chooser.pick(g, inst.count, self.fines.len()) {
                        Some(f) => {
                            inst = Inst {
                                alive: true,
                                fine: f,
                                start: slot,
                                len: self.instance_slots(f),
                                count: inst.count + 1,
                                key: mix64(self.tag ^ mix64((g as u64) << 32 ^ inst.count)),
                                phase: 0,
                                layer: 0,
                            };
                            self.reset_group(g, f, true);
                        }
                        None => inst.alive = false,
                    }
                }
                if !inst.alive {
                    self.insts[g] = inst;
                    continue;
                }
            }
            let fine = &fines[inst.fine];
            let per = fine.ell as u64 * self.reps as u64;
            let r = slot - inst.start;
            inst.phase = (r / per) as u8;
            inst.layer = ((r % per) / self.reps as u64) as u32;
            if r == 2 * per {
                self.reset_group(g, inst.fine, false);
            }
            self.insts[g] = inst;
            let layout = &fine.layouts[g];
            if inst.phase == 1 {
                for &v in layout.layer(fine.ell - inst.layer) {
                    if let Some(m) = know.best[v] {
                        if Some(m) > self.heard[v] && self.allowed(v) {
                            self.icp_tx.push(v);
                        }
                    }
                }
            } else {
                for &v in layout.layer(inst.layer) {
                    if self.active[v] && know.best[v].is_some() && self.allowed(v) {
                        self.icp_tx.push(v);
                    }
                }
            }
            let mut any = false;
            for &c in layout.centers() {
                let on = self.cluster_coin(c, inst.key, r);
                self.coin_on[c] = on;
                any |= on;
            }
            if any {
                for &v in layout.within(fine.ell) {
                    if self.coin_on[fine.schedules.center(v)]
                        && self.reached[v]
                        && know.best[v].is_some()
                        && self.allowed(v)
                    {
                        self.bg_tx.push(v);
                    }
                }
            }
        }
    }

    fn reset_group(&mut self, g: usize, f: usize, full: bool) {
        for &v in &self.groups[g] {
            self.active[v] = false;
            if full {
                self.reached[v] = false;
                self.heard[v] = None;
            }
        }
        for &c in self.fines[f].layouts[g].centers() {
            if self.allowed(c) {
                self.active[c] = true;
                self.reached[c] = true;
            }
        }
    }

    /// Whether cluster `center` performs the background Decay round at
    /// iteration `r` of instance `key`. Every member derives the same value.
    pub fn cluster_coin(&self, center: NodeId, key: u64, r: u64) -> bool {
        let iter = (r % self.steps as u64) as u32 + 1;
        halving_coin(
            RandomStream::first(self.seed, Purpose::ClusterCoin, center as u64, key ^ r),
            iter,
        )
    }

    fn transmit(&self, background: bool, epoch: u64, i: u32, know: &Knowledge, tx: &mut Vec<(NodeId, Packet)>) {
        let list = if background { &self.bg_tx } else { &self.icp_tx };
        for &v in list {
            if decay_coin(self.seed, v, epoch, i) {
                let inst = &self.insts[self.group_of[v] as usize];
                let msg = know.best[v].expect("eligible nodes hold a message");
                tx.push((
                    v,
                    Packet::Data {
                        msg,
                        cluster: self.fines[inst.fine].schedules.center(v),
                    },
                ));
            }
        }
    }

    fn on_reception(&mut self, background: bool, w: NodeId, msg: Message, cluster: NodeId) {
        let inst = self.insts[self.group_of[w] as usize];
        if !inst.alive || !self.allowed(w) {
            return;
        }
        let fine = &self.fines[inst.fine];
        if fine.schedules.center(w) != cluster {
            return;
        }
        let Some(depth) = fine.schedules.depth(w) else {
            return;
        };
        if background {
            if depth <= fine.ell {
                self.reached[w] = true;
                if inst.phase != 1 {
                    self.active[w] = true;
                }
                if inst.phase == 0 {
                    self.heard[w] = self.heard[w].max(Some(msg));
                }
            }
        } else if inst.phase != 1 && depth == inst.layer + 1 {
            self.active[w] = true;
            self.reached[w] = true;
            if inst.phase == 0 {
                self.heard[w] = self.heard[w].max(Some(msg));
            }
        }
    }

    fn exhausted(&self) -> bool {
        self.insts.iter().all(|i| !i.alive && i.count > 0)
    }
}

/// Faithful propagation driver. Global rounds cycle through four sublanes:
/// main ICP, background ICP, main Decay lane, background Decay lane. Main
/// sublanes fall on even rounds and background sublanes on odd rounds.
pub(crate) struct Propagation<'a> {
    lanes: [Option<IcpLane<'a>>; 2],
    pub know: Knowledge,
    t0: u64,
    steps: u32,
    done_rounds: u64,
    pub end_after: Option<u64>,
    stop_when_informed: bool,
}

impl<'a> Propagation<'a> {
    pub fn new(
        lanes: [Option<IcpLane<'a>>; 2],
        know: Knowledge,
        start_round: u64,
        n: usize,
        stop_when_informed: Option<bool>,
    ) -> Self {
        Propagation {
            lanes,
            know,
            t0: start_round.div_ceil(4) * 4,
            steps: decay_len(n),
            done_rounds: 0,
            end_after: None,
            stop_when_informed: stop_when_informed.unwrap_or(false),
        }
    }

    /// Round at which the first slot begins.
    pub fn first_round(&self) -> u64 {
        self.t0
    }
}

impl Protocol for Propagation<'_> {
    type Payload = Packet;

    fn transmit(&mut self, round: u64, tx: &mut Vec<(NodeId, Packet)>) -> Lane {
        if round < self.t0 {
            return Lane::Single;
        }
        let u = round - self.t0;
        let sub = u % 4;
        let s = u / 4;
        let slot = s / self.steps as u64;
        let i = (s % self.steps as u64) as u32 + 1;
        if sub == 0 && i == 1 {
            for lane in self.lanes.iter_mut().flatten() {
                lane.begin_slot(slot, &self.know);
            }
        }
        let background = sub >= 2;
        if let Some(lane) = &self.lanes[(sub % 2) as usize] {
            lane.transmit(background, slot * 4 + sub, i, &self.know, tx);
        }
        match sub {
            0 => Lane::Main,
            1 => Lane::Background,
            2 => Lane::MainDecay,
            _ => Lane::BackgroundDecay,
        }
    }

    fn receive(&mut self, round: u64, tx: &[(NodeId, Packet)], rx: &[(NodeId, u32)], trace: &mut Trace<Packet>) {
        self.done_rounds += 1;
        if round < self.t0 {
            return;
        }
        let sub = (round - self.t0) % 4;
        for &(w, idx) in rx {
            let (s, p) = tx[idx as usize];
            if let Packet::Data { msg, cluster } = p {
                self.know.offer(w, msg, round, Via::Reception { from: s }, trace);
                if let Some(lane) = &mut self.lanes[(sub % 2) as usize] {
                    lane.on_reception(sub >= 2, w, msg, cluster);
                }
            }
        }
    }

    fn finished(&self) -> bool {
        if self.stop_when_informed && self.know.all_informed() {
            return true;
        }
        if let Some(end) = self.end_after {
            return self.done_rounds >= end;
        }
        self.lanes.iter().flatten().all(|l| l.exhausted()) && self.done_rounds > 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_topology, Topology};
    use crate::primitives::build_schedules;

    fn msg(value: u64, origin: NodeId) -> Option<Message> {
        Some(Message { value, origin })
    }

    fn setup(mode: Fidelity) -> (Network, Clustering, Schedules, Trace<Packet>) {
        let net = build_topology(&Topology::Path { n: 9 }, 0).unwrap();
        let c = Clustering::from_centers(&net, vec![2, 2, 2, 2, 2, 7, 7, 7, 7]).unwrap();
        let mut t = Trace::new(mode);
        let s = build_schedules(&net, &c, mode, &ScheduleParams::default(), 5, &mut t).unwrap();
        (net, c, s, t)
    }

    #[test]
    fn layout_layers() {
        let (_, _, s, _) = setup(Fidelity::Charged);
        let l = &Layout::by_group(&s, &[0; 9], 1)[0];
        assert_eq!(l.centers(), &[2, 7]);
        assert_eq!(l.layer(1), &[1, 3, 6, 8]);
        assert_eq!(l.within(1).len(), 6);
        assert_eq!(l.layer(9), &[] as &[NodeId]);
        assert_eq!(l.within(50).len(), 9);
    }

    #[test]
    fn center_value_reaches_members() {
        let (net, c, s, mut t) = setup(Fidelity::Charged);
        let mut best = vec![None; 9];
        best[2] = msg(7, 2);
        best[0] = msg(3, 0);
        let rounds = intra_cluster_propagation(
            &net,
            &c,
            &s,
            2,
            &mut best,
            Fidelity::Charged,
            &IcpParams::default(),
            0,
            &mut t,
        )
        .unwrap();
        assert_eq!(rounds, 6 * (2 + 4));
        assert!((0..5).all(|v| best[v] == msg(7, 2)));
        assert!((5..9).all(|v| best[v].is_none()));
    }

    #[test]
    fn member_maximum_spreads_through_center() {
        let (net, c, s, mut t) = setup(Fidelity::Charged);
        let mut best = vec![None; 9];
        best[2] = msg(7, 2);
        best[4] = msg(9, 4);
        intra_cluster_propagation(
            &net,
            &c,
            &s,
            2,
            &mut best,
            Fidelity::Charged,
            &IcpParams::default(),
            0,
            &mut t,
        )
        .unwrap();
        assert!((0..5).all(|v| best[v] == msg(9, 4)));
    }

    #[test]
    fn equal_states_unchanged_but_cost_paid() {
        let (net, c, s, mut t) = setup(Fidelity::Charged);
        let mut best = vec![msg(4, 0); 9];
        let before = t.charged_rounds();
        intra_cluster_propagation(
            &net,
            &c,
            &s,
            3,
            &mut best,
            Fidelity::Charged,
            &IcpParams::default(),
            0,
            &mut t,
        )
        .unwrap();
        assert!(best.iter().all(|b| *b == msg(4, 0)));
        assert_eq!(t.charged_rounds() - before, 6 * (3 + 4));
    }

    #[test]
    fn faithful_icp_spreads_member_maximum() {
        let (net, c, s, mut t) = setup(Fidelity::Faithful);
        let params = IcpParams {
            layer_reps: 4,
            ..IcpParams::default()
        };
        let mut best = vec![None; 9];
        best[2] = msg(7, 2);
        best[4] = msg(9, 4);
        best[7] = msg(1, 7);
        let rounds =
            intra_cluster_propagation(&net, &c, &s, 2, &mut best, Fidelity::Faithful, &params, 3, &mut t).unwrap();
        assert!(rounds >= 3 * 2 * 4 * 4 * 4);
        assert!((0..5).all(|v| best[v] == msg(9, 4)), "{best:?}");
        for r in t.iter_rounds() {
            if let Some(p) = r.lane.parity() {
                assert!(r.transmitters.is_empty() || r.round % 2 == p);
            }
        }
    }
}
