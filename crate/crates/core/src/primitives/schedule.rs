use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::decay::{decay_coin, decay_len};
use super::packet::Packet;
use super::partition::Clustering;
use crate::error::{invalid, Error, Result};
use crate::netmodel::{Network, NodeId, UNREACHED};
use crate::radio::{run, Fidelity, Lane, Message, Protocol, RunStatus, Trace};

/// Constants of the schedule abstraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    /// Period is `⌈c_sched·⌈log n⌉⌉` slots; also the additive term of a charged broadcast.
    pub c_sched: f64,
    /// Charged construction cost is `c_pre·(strong diameter + log³ n)`.
    pub c_pre: f64,
    /// Faithful layer steps use `⌈decay_reps·⌈log n⌉⌉` Decay rounds.
    pub decay_reps: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            c_sched: 1.0,
            c_pre: 1.0,
            decay_reps: 1.0,
        }
    }
}

impl ScheduleParams {
    pub fn period(&self, n: usize) -> u32 {
        ((self.c_sched * decay_len(n) as f64).ceil() as u32).max(1)
    }

    pub fn layer_rounds(&self, n: usize) -> u32 {
        ((self.decay_reps * decay_len(n) as f64).ceil() as u32).max(1)
    }

    /// Charged cost of one broadcast over radius `ell`.
    pub fn broadcast_cost(&self, n: usize, ell: u32) -> u64 {
        ell as u64 + self.period(n) as u64
    }
}

/// BFS trees of every cluster of a clustering.
#[derive(Debug, Clone)]
pub struct Schedules {
    period: u32,
    center: Vec<NodeId>,
    parent: Vec<Option<NodeId>>,
    depth: Vec<u32>,
    cost: u64,
}

impl Schedules {
    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn center(&self, v: NodeId) -> NodeId {
        self.center[v]
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    /// Tree depth, or `None` for a node the construction failed to attach.
    pub fn depth(&self, v: NodeId) -> Option<u32> {
        (self.depth[v] != UNREACHED).then_some(self.depth[v])
    }

    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    /// Slot of `v` within the period.
    pub fn slot(&self, v: NodeId) -> Option<u32> {
        self.depth(v).map(|d| d % self.period)
    }

    /// Rounds spent building (faithful) or charged (charged).
    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn attached(&self) -> usize {
        self.depth.iter().filter(|&&d| d != UNREACHED).count()
    }

    pub fn max_depth(&self) -> u32 {
        self.depth
            .iter()
            .copied()
            .filter(|&d| d != UNREACHED)
            .max()
            .unwrap_or(0)
    }
}

/// Builds a BFS tree inside every cluster. Faithful mode simulates layered
/// Decay rounds; charged mode computes the trees directly and charges the
/// construction cost.
pub fn build_schedules(
    net: &Network,
    clustering: &Clustering,
    mode: Fidelity,
    params: &ScheduleParams,
    seed: u64,
    trace: &mut Trace<Packet>,
) -> Result<Schedules> {
    let n = net.n();
    let period = params.period(n);
    match mode {
        Fidelity::Charged => {
            let depth = clustering.distances().to_vec();
            let mut parent = vec![None; n];
            for v in 0..n {
                if depth[v] == UNREACHED {
                    return Err(Error::Internal(format!("node {v} detached from its cluster")));
                }
                if depth[v] > 0 {
                    parent[v] = net
                        .neighbors(v)
                        .iter()
                        .copied()
                        .find(|&w| clustering.center(w) == clustering.center(v) && depth[w] + 1 == depth[v]);
                    if parent[v].is_none() {
                        return Err(Error::Internal(format!("node {v} has no parent in its cluster")));
                    }
                }
            }
            let ln = crate::log2_n(n);
            let cost = (params.c_pre * (clustering.max_strong_diameter(net) as f64 + ln.powi(3))).ceil() as u64;
            trace.charge(cost, "pre-schedule")?;
            Ok(Schedules {
                period,
                center: clustering.centers().to_vec(),
                parent,
                depth,
                cost,
            })
        }
        Fidelity::Faithful => {
            let start = trace.rounds();
            let mut proto = TreeBuild::new(net, clustering, params.layer_rounds(n), seed);
            let cap = (clustering.max_radius() as u64 + 2) * proto.layer_len * 4 + 1;
            if run(net, &mut proto, cap, trace)? != RunStatus::Completed {
                return Err(Error::Internal("tree construction did not settle".into()));
            }
            Ok(Schedules {
                period,
                center: clustering.centers().to_vec(),
                parent: proto.parent,
                depth: proto.depth,
                cost: trace.rounds() - start,
            })
        }
    }
}

struct TreeBuild<'a> {
    clustering: &'a Clustering,
    seed: u64,
    steps: u32,
    reps: u32,
    layer_len: u64,
    depth: Vec<u32>,
    parent: Vec<Option<NodeId>>,
    frontier: Vec<NodeId>,
    next: Vec<NodeId>,
    layer: u32,
    step: u64,
    done: bool,
}

impl<'a> TreeBuild<'a> {
    fn new(net: &Network, clustering: &'a Clustering, reps: u32, seed: u64) -> Self {
        let n = net.n();
        let mut depth = vec![UNREACHED; n];
        let frontier: Vec<NodeId> = clustering.clusters().iter().map(|c| c.center).collect();
        for &c in &frontier {
            depth[c] = 0;
        }
        let steps = decay_len(n);
        TreeBuild {
            clustering,
            seed,
            steps,
            reps,
            layer_len: steps as u64 * reps as u64,
            depth,
            parent: vec![None; n],
            done: frontier.len() == n,
            frontier,
            next: Vec::new(),
            layer: 0,
            step: 0,
        }
    }
}

impl Protocol for TreeBuild<'_> {
    type Payload = Packet;

    fn transmit(&mut self, _round: u64, tx: &mut Vec<(NodeId, Packet)>) -> Lane {
        let i = (self.step % self.steps as u64) as u32 + 1;
        let epoch = self.layer as u64 * self.reps as u64 + self.step / self.steps as u64;
        for &v in &self.frontier {
            if decay_coin(self.seed, v, epoch, i) {
                tx.push((
                    v,
                    Packet::Join {
                        cluster: self.clustering.center(v),
                        depth: self.layer,
                    },
                ));
            }
        }
        Lane::Precompute
    }

    fn receive(&mut self, _round: u64, tx: &[(NodeId, Packet)], rx: &[(NodeId, u32)], _: &mut Trace<Packet>) {
        for &(w, idx) in rx {
            let (s, p) = tx[idx as usize];
            if let Packet::Join { cluster, depth } = p {
                if self.depth[w] == UNREACHED && self.clustering.center(w) == cluster {
                    self.depth[w] = depth + 1;
                    self.parent[w] = Some(s);
                    self.next.push(w);
                }
            }
        }
        self.step += 1;
        if self.step == self.layer_len {
            self.step = 0;
            self.layer += 1;
            self.frontier = std::mem::take(&mut self.next);
            self.done = self.frontier.is_empty();
        }
    }

    fn finished(&self) -> bool {
        self.done
    }
}

/// Direction of a schedule broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Outward,
    Inward,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outward" | "out" => Ok(Direction::Outward),
            "inward" | "in" => Ok(Direction::Inward),
            other => invalid(format!("unknown broadcast direction '{other}'")),
        }
    }
}

/// Broadcast inside every cluster at once, limited to tree depth `ell`.
///
/// Outward: members at depth `≤ ell` receive their center's payload.
/// Inward: each center receives the maximum payload held by members at
/// depth `≤ ell` (its own included). Returns what each node received.
#[allow(clippy::too_many_arguments)]
pub fn schedule_broadcast(
    net: &Network,
    schedules: &Schedules,
    direction: Direction,
    ell: u32,
    payloads: &[Option<Message>],
    mode: Fidelity,
    params: &ScheduleParams,
    seed: u64,
    trace: &mut Trace<Packet>,
) -> Result<Vec<Option<Message>>> {
    let n = net.n();
    if payloads.len() != n {
        return invalid("one payload slot per node");
    }
    match mode {
        Fidelity::Charged => {
            let mut out = vec![None; n];
            match direction {
                Direction::Outward => {
                    for v in 0..n {
                        if schedules.depth(v).is_some_and(|d| d <= ell) {
                            out[v] = payloads[schedules.center(v)];
                        }
                    }
                }
                Direction::Inward => {
                    for v in 0..n {
                        if schedules.depth(v).is_some_and(|d| d <= ell) {
                            let c = schedules.center(v);
                            out[c] = out[c].max(payloads[v]);
                        }
                    }
                }
            }
            let tag = match direction {
                Direction::Outward => "broadcast-out",
                Direction::Inward => "broadcast-in",
            };
            trace.charge(params.broadcast_cost(n, ell), tag)?;
            Ok(out)
        }
        Fidelity::Faithful => {
            let mut wave = Wave::new(n, schedules, direction, ell, payloads, params.layer_rounds(n), seed);
            let cap = wave.total_rounds().max(1);
            run(net, &mut wave, cap, trace)?;
            Ok(wave.value)
        }
    }
}

/// Layer-by-layer Decay wave over cluster trees.
struct Wave<'a> {
    schedules: &'a Schedules,
    direction: Direction,
    ell: u32,
    value: Vec<Option<Message>>,
    steps: u32,
    reps: u32,
    seed: u64,
    step: u64,
}

impl<'a> Wave<'a> {
    fn new(
        n: usize,
        schedules: &'a Schedules,
        direction: Direction,
        ell: u32,
        payloads: &[Option<Message>],
        reps: u32,
        seed: u64,
    ) -> Self {
        let mut value = vec![None; n];
        for v in 0..n {
            match direction {
                Direction::Outward if schedules.depth(v) == Some(0) => value[v] = payloads[v],
                Direction::Inward if schedules.depth(v).is_some_and(|d| d <= ell) => value[v] = payloads[v],
                _ => {}
            }
        }
        Wave {
            schedules,
            direction,
            ell,
            value,
            steps: decay_len(n),
            reps,
            seed,
            step: 0,
        }
    }

    fn layer_len(&self) -> u64 {
        self.steps as u64 * self.reps as u64
    }

    fn total_rounds(&self) -> u64 {
        self.ell as u64 * self.layer_len()
    }

    fn layer(&self) -> u32 {
        (self.step / self.layer_len()) as u32
    }

    /// Depth of the transmitting layer.
    fn sending_depth(&self) -> u32 {
        match self.direction {
            Direction::Outward => self.layer(),
            Direction::Inward => self.ell - self.layer(),
        }
    }
}

impl Protocol for Wave<'_> {
    type Payload = Packet;

    fn transmit(&mut self, _round: u64, tx: &mut Vec<(NodeId, Packet)>) -> Lane {
        let d = self.sending_depth();
        let i = (self.step % self.steps as u64) as u32 + 1;
        let epoch = self.step / self.steps as u64;
        for v in 0..self.value.len() {
            if self.schedules.depth(v) == Some(d) {
                if let Some(msg) = self.value[v] {
                    if decay_coin(self.seed, v, epoch, i) {
                        tx.push((
                            v,
                            Packet::Data {
                                msg,
                                cluster: self.schedules.center(v),
                            },
                        ));
                    }
                }
            }
        }
        Lane::Single
    }

    fn receive(&mut self, _round: u64, tx: &[(NodeId, Packet)], rx: &[(NodeId, u32)], _: &mut Trace<Packet>) {
        let d = self.sending_depth();
        let want = match self.direction {
            Direction::Outward => d + 1,
            Direction::Inward => d.wrapping_sub(1),
        };
        for &(w, idx) in rx {
            if let (_, Packet::Data { msg, cluster }) = tx[idx as usize] {
                if cluster == self.schedules.center(w) && self.schedules.depth(w) == Some(want) {
                    self.value[w] = match self.direction {
                        Direction::Outward => self.value[w].or(Some(msg)),
                        Direction::Inward => self.value[w].max(Some(msg)),
                    };
                }
            }
        }
        self.step += 1;
    }

    fn finished(&self) -> bool {
        self.step >= self.total_rounds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_topology, Topology};

    fn msg(value: u64, origin: NodeId) -> Option<Message> {
        Some(Message { value, origin })
    }

    #[test]
    fn singleton_cluster_has_depth_zero() {
        let net = build_topology(&Topology::Path { n: 1 }, 0).unwrap();
        let c = Clustering::single(&net, 0);
        let mut t = Trace::new(Fidelity::Charged);
        let s = build_schedules(&net, &c, Fidelity::Charged, &ScheduleParams::default(), 0, &mut t).unwrap();
        assert_eq!(s.depth(0), Some(0));
        assert_eq!(s.parent(0), None);
    }

    #[test]
    fn path_cluster_tree_points_to_center() {
        let net = build_topology(&Topology::Path { n: 6 }, 0).unwrap();
        let c = Clustering::single(&net, 0);
        for mode in [Fidelity::Charged, Fidelity::Faithful] {
            let mut t = Trace::new(mode);
            let s = build_schedules(&net, &c, mode, &ScheduleParams::default(), 3, &mut t).unwrap();
            assert_eq!(s.max_depth(), 5);
            for v in 1..6 {
                assert_eq!(s.parent(v), Some(v - 1));
                assert_eq!(s.depth(v), Some(v as u32));
            }
        }
    }

    #[test]
    fn charged_broadcast_respects_radius() {
        let net = build_topology(&Topology::Path { n: 7 }, 0).unwrap();
        let c = Clustering::single(&net, 0);
        let p = ScheduleParams::default();
        let mut t = Trace::new(Fidelity::Charged);
        let s = build_schedules(&net, &c, Fidelity::Charged, &p, 0, &mut t).unwrap();
        let before = t.charged_rounds();
        let mut payloads = vec![None; 7];
        payloads[0] = msg(5, 0);
        let out = schedule_broadcast(
            &net,
            &s,
            Direction::Outward,
            4,
            &payloads,
            Fidelity::Charged,
            &p,
            0,
            &mut t,
        )
        .unwrap();
        let informed: Vec<usize> = (0..7).filter(|&v| out[v].is_some()).collect();
        assert_eq!(informed, vec![0, 1, 2, 3, 4]);
        assert_eq!(t.charged_rounds() - before, 4 + 3);

        let out0 = schedule_broadcast(
            &net,
            &s,
            Direction::Outward,
            0,
            &payloads,
            Fidelity::Charged,
            &p,
            0,
            &mut t,
        )
        .unwrap();
        assert_eq!((0..7).filter(|&v| out0[v].is_some()).count(), 1);

        let mut inward = vec![None; 7];
        inward[2] = msg(3, 2);
        inward[4] = msg(9, 4);
        inward[6] = msg(11, 6);
        let got = schedule_broadcast(
            &net,
            &s,
            Direction::Inward,
            4,
            &inward,
            Fidelity::Charged,
            &p,
            0,
            &mut t,
        )
        .unwrap();
        assert_eq!(got[0], msg(9, 4));
    }

    #[test]
    fn faithful_broadcast_round_trip_on_path() {
        let net = build_topology(&Topology::Path { n: 6 }, 0).unwrap();
        let c = Clustering::single(&net, 0);
        let p = ScheduleParams {
            decay_reps: 3.0,
            ..ScheduleParams::default()
        };
        let mut t = Trace::new(Fidelity::Faithful);
        let s = build_schedules(&net, &c, Fidelity::Faithful, &p, 1, &mut t).unwrap();
        let mut payloads = vec![None; 6];
        payloads[0] = msg(5, 0);
        let out = schedule_broadcast(
            &net,
            &s,
            Direction::Outward,
            5,
            &payloads,
            Fidelity::Faithful,
            &p,
            2,
            &mut t,
        )
        .unwrap();
        assert!(out.iter().all(|m| *m == msg(5, 0)));
        let mut inward = vec![None; 6];
        inward[5] = msg(8, 5);
        let back = schedule_broadcast(
            &net,
            &s,
            Direction::Inward,
            5,
            &inward,
            Fidelity::Faithful,
            &p,
            3,
            &mut t,
        )
        .unwrap();
        assert_eq!(back[0], msg(8, 5));
        assert!("sideways".parse::<Direction>().is_err());
    }
}
