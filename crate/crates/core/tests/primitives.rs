use proptest::prelude::*;
use radionet::netmodel::{build_topology, Network, Topology};
use radionet::primitives::{
    build_schedules, decay_round, decay_success_probability, edge_cut_rate, partition, Clustering, Packet,
    ScheduleParams,
};
use radionet::radio::{Fidelity, Trace};

/// Probability that exactly one of `k` nodes transmits in some step, by
/// enumerating every transmit pattern of every step.
fn decay_by_enumeration(k: u32, steps: u32) -> f64 {
    let mut miss = 1.0;
    for i in 1..=steps {
        let p = 0.5f64.powi(i as i32);
        let mut one = 0.0;
        for pattern in 0u32..1 << k {
            let on = pattern.count_ones();
            if on == 1 {
                one += p.powi(on as i32) * (1.0 - p).powi((k - on) as i32);
            }
        }
        miss *= 1.0 - one;
    }
    1.0 - miss
}

#[test]
fn decay_closed_form_against_enumeration() {
    assert!((decay_by_enumeration(1, 4) - 709.0 / 1024.0).abs() < 1e-15);
    for k in 1..=8 {
        for steps in 1..=12 {
            let a = decay_success_probability(k as u64, steps);
            assert!((a - decay_by_enumeration(k, steps)).abs() < 1e-12);
        }
    }
}

#[test]
fn decay_single_participant_frequency() {
    let net = build_topology(&Topology::Path { n: 16 }, 0).unwrap();
    let trials = 100_000u64;
    let mut heard = 0u64;
    let mut trace = Trace::new(Fidelity::Faithful);
    for t in 0..trials {
        let out = decay_round(&net, &[(0, 1u64)], &[1], t, 0, &mut trace).unwrap();
        heard += out.heard.len() as u64;
    }
    let freq = heard as f64 / trials as f64;
    assert!((freq - 709.0 / 1024.0).abs() < 0.01, "{freq}");
}

#[test]
fn decay_frequency_by_neighbor_count() {
    let net = build_topology(&Topology::Star { n: 9 }, 0).unwrap();
    let trials = 20_000u64;
    for k in 1..=8usize {
        let parts: Vec<(usize, u64)> = (1..=k).map(|v| (v, v as u64)).collect();
        let mut heard = 0;
        let mut trace = Trace::new(Fidelity::Faithful);
        for t in 0..trials {
            heard += decay_round(&net, &parts, &[0], t, 3, &mut trace).unwrap().heard.len();
        }
        let p = decay_by_enumeration(k as u32, 4);
        let freq = heard as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * sigma, "k={k} freq={freq} p={p}");
    }
}

/// Exponential CDF and density.
fn cdf(x: f64, b: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-b * x).exp()
    }
}

fn pdf(x: f64, b: f64) -> f64 {
    b * (-b * x).exp()
}

/// Probability that the edge between the star center and one leaf is cut,
/// for a star with four leaves: one minus the probability that both ends
/// choose the center, that leaf, or one of the other three leaves.
fn star5_cut_probability(b: f64) -> f64 {
    let upper = 60.0 / b;
    let steps = 2_000_000;
    let h = upper / steps as f64;
    let mut same = 0.0;
    for s in 0..=steps {
        let x = s as f64 * h;
        let w = if s == 0 || s == steps { 0.5 } else { 1.0 };
        let center = pdf(x, b) * cdf(x - 1.0, b) * cdf(x + 1.0, b).powi(3);
        let leaf = pdf(x, b) * cdf(x - 1.0, b) * cdf(x, b).powi(3);
        let other = 3.0 * pdf(x, b) * cdf(x - 1.0, b) * cdf(x - 2.0, b) * cdf(x, b).powi(2);
        same += w * h * (center + leaf + other);
    }
    1.0 - same
}

#[test]
fn star_cut_rate_matches_integral() {
    let net = build_topology(&Topology::Star { n: 5 }, 0).unwrap();
    for b in [0.1, 0.5] {
        let want = star5_cut_probability(b);
        let got = edge_cut_rate(&net, b, 100_000, 17).unwrap();
        assert!((got - want).abs() < 0.01, "beta {b}: {got} vs {want}");
    }
}

#[test]
fn two_node_closed_forms() {
    let net = build_topology(&Topology::Path { n: 2 }, 0).unwrap();
    for b in [0.1, 0.5, 1.0] {
        let cut = edge_cut_rate(&net, b, 100_000, 5).unwrap();
        assert!((cut - (1.0 - (-b).exp())).abs() < 0.01);
    }
}

/// Brute-force center: the maximizer of `δ_u - d(u, v)` scanning nodes in
/// `order`, with ties going to the smaller id.
fn brute_center(delta: &[f64], dist_from_v: &[u32], order: &[usize]) -> usize {
    let mut best: Option<(f64, usize)> = None;
    for &u in order {
        let val = delta[u] - dist_from_v[u] as f64;
        best = match best {
            Some((bv, bu)) if bv > val || (bv == val && bu < u) => Some((bv, bu)),
            _ => Some((val, u)),
        };
    }
    best.unwrap().1
}

fn connected_within(net: &Network, members: &[usize]) -> bool {
    let mut inside = vec![false; net.n()];
    members.iter().for_each(|&v| inside[v] = true);
    let mut seen = vec![false; net.n()];
    let mut stack = vec![members[0]];
    seen[members[0]] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in net.neighbors(v) {
            if inside[w] && !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == members.len()
}

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![
        (1usize..=60).prop_map(|n| Topology::Path { n }),
        (3usize..=60).prop_map(|n| Topology::Cycle { n }),
        (1usize..=7, 1usize..=7).prop_map(|(rows, cols)| Topology::Grid { rows, cols }),
        (1usize..=60).prop_map(|n| Topology::RandomTree { n }),
        (1usize..=40).prop_map(|n| Topology::Star { n }),
        (2usize..=50, 0.08f64..0.4).prop_map(|(n, p)| Topology::GnpConnected { n, p }),
    ]
}

fn check_clustering(net: &Network, c: &Clustering) -> Result<(), TestCaseError> {
    let n = net.n();
    let mut owner = vec![usize::MAX; n];
    for (idx, cl) in c.clusters().iter().enumerate() {
        prop_assert_eq!(c.center(cl.center), cl.center);
        prop_assert!(connected_within(net, &cl.members));
        for &v in &cl.members {
            prop_assert_eq!(owner[v], usize::MAX);
            owner[v] = idx;
            prop_assert_eq!(c.center(v), cl.center);
        }
    }
    prop_assert!(owner.iter().all(|&o| o != usize::MAX));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn partition_invariants(topo in topology(), tseed in any::<u64>(), seed in any::<u64>(), beta in 0.01f64..=1.0) {
        let Ok(net) = build_topology(&topo, tseed) else { return Ok(()) };
        let c = partition(&net, beta, seed).unwrap();
        check_clustering(&net, &c)?;
        let mut order: Vec<usize> = (0..net.n()).rev().collect();
        order.rotate_left(seed as usize % net.n());
        for v in 0..net.n() {
            let d = net.bfs_distances(v);
            let want = brute_center(c.delta(), &d, &order);
            prop_assert_eq!(c.center(v), want);
            prop_assert_eq!(c.dist_to_center(v), d[want]);
        }
    }

    #[test]
    fn charged_schedules_follow_cluster_distance(topo in topology(), tseed in any::<u64>(), seed in any::<u64>(), beta in 0.05f64..=1.0) {
        let Ok(net) = build_topology(&topo, tseed) else { return Ok(()) };
        let c = partition(&net, beta, seed).unwrap();
        let mut trace = Trace::new(Fidelity::Charged);
        let s = build_schedules(&net, &c, Fidelity::Charged, &ScheduleParams::default(), seed, &mut trace).unwrap();
        for cl in c.clusters() {
            let mut inside = vec![false; net.n()];
            cl.members.iter().for_each(|&v| inside[v] = true);
            let mut dist = vec![u32::MAX; net.n()];
            dist[cl.center] = 0;
            let mut queue = std::collections::VecDeque::from([cl.center]);
            while let Some(v) = queue.pop_front() {
                for &w in net.neighbors(v) {
                    if inside[w] && dist[w] == u32::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            for &v in &cl.members {
                prop_assert_eq!(s.depth(v), Some(dist[v]));
                if let Some(p) = s.parent(v) {
                    prop_assert!(inside[p] && dist[p] + 1 == dist[v]);
                } else {
                    prop_assert_eq!(v, cl.center);
                }
            }
        }
    }
}

#[test]
fn faithful_grid_tree_parents_are_closer() {
    let net = build_topology(&Topology::Grid { rows: 4, cols: 4 }, 0).unwrap();
    let c = Clustering::single(&net, 5);
    let dist = net.bfs_distances(5);
    for seed in 0..20 {
        let mut trace: Trace<Packet> = Trace::new(Fidelity::Faithful);
        let s = build_schedules(
            &net,
            &c,
            Fidelity::Faithful,
            &ScheduleParams::default(),
            seed,
            &mut trace,
        )
        .unwrap();
        assert!(trace.rounds() > 0);
        for v in 0..16 {
            if let Some(p) = s.parent(v) {
                assert!(dist[p] < dist[v]);
                assert!(net.neighbors(v).contains(&p));
            }
        }
    }
}
