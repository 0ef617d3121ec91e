use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use radionet::netmodel::{build_topology, Topology};
use radionet::primitives::partition;
use radionet::protocols::{
    classify_subpaths, compete, decay_broadcast_baseline, elect_among, leader_election, CompeteConfig, SubpathParams,
};
use radionet::radio::{audit, Fidelity, Message, RunStatus};

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![
        (1usize..=80).prop_map(|n| Topology::Path { n }),
        (3usize..=80).prop_map(|n| Topology::Cycle { n }),
        (1usize..=8, 1usize..=8).prop_map(|(rows, cols)| Topology::Grid { rows, cols }),
        (1usize..=80).prop_map(|n| Topology::RandomTree { n }),
        (2usize..=60, 0.05f64..0.3).prop_map(|(n, p)| Topology::GnpConnected { n, p }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 40,
        rng_seed: RngSeed::Fixed(0x5eed),
        ..ProptestConfig::default()
    })]

    #[test]
    fn compete_is_safe_and_completes(
        topo in topology(),
        tseed in any::<u64>(),
        seed in any::<u64>(),
        picks in prop::collection::vec((any::<prop::sample::Index>(), 0u64..1000), 1..5),
        faithful in any::<bool>(),
    ) {
        let Ok(net) = build_topology(&topo, tseed) else { return Ok(()) };
        let mut sources: Vec<(usize, u64)> = Vec::new();
        for (idx, value) in picks {
            let v = idx.index(net.n());
            if sources.iter().all(|s| s.0 != v) {
                sources.push((v, value));
            }
        }
        let mode = if faithful { Fidelity::Faithful } else { Fidelity::Charged };
        let out = compete(&net, &sources, &CompeteConfig::desk().with_mode(mode), seed).unwrap();
        let want = sources.iter().map(|&(v, value)| Message { value, origin: v }).max();
        prop_assert!(out.success, "{:?} informed {}", out.status, out.informed());
        prop_assert_eq!(out.status, RunStatus::Completed);
        prop_assert!(out.outputs.iter().all(|o| *o == want));
        audit::audit_monotone(&out.trace).unwrap();
        audit::audit_conservation(&out.trace, &out.sources).unwrap();
        audit::audit_outputs(&out.trace, &out.outputs).unwrap();
        audit::audit_lanes(&out.trace).unwrap();
        audit::audit_receptions(&net, &out.trace).unwrap();
    }
}

#[test]
fn election_examples() {
    let one = build_topology(&Topology::Path { n: 1 }, 0).unwrap();
    let e = leader_election(&one, &CompeteConfig::desk(), 2.0, 32, 0).unwrap();
    assert!(e.success && e.self_flag[0]);

    let net = build_topology(&Topology::Grid { rows: 5, cols: 5 }, 0).unwrap();
    let e = elect_among(&net, &CompeteConfig::desk(), &[(3, 5), (17, 12)], 4).unwrap();
    assert!(e.leader.iter().all(|l| *l == Some(12)));
    assert_eq!(e.self_flag.iter().filter(|&&f| f).count(), 1);
    assert!(e.self_flag[17]);

    let big = build_topology(&Topology::RandomTree { n: 256 }, 1).unwrap();
    let log_n = 8.0;
    for seed in 0..10 {
        let e = leader_election(&big, &CompeteConfig::desk(), 2.0, 32, seed).unwrap();
        assert!(e.success);
        assert!(!e.candidates.is_empty() && e.candidates.len() as f64 <= 12.0 * log_n);
    }
}

#[test]
fn baseline_on_two_nodes() {
    let net = build_topology(&Topology::Path { n: 2 }, 0).unwrap();
    let ok = (0..1000)
        .filter(|&s| decay_broadcast_baseline(&net, 0, 1, s, Some(20)).unwrap().success)
        .count();
    assert!(ok >= 990, "{ok}");
}

#[test]
fn subpath_examples() {
    let net = build_topology(&Topology::Path { n: 500 }, 0).unwrap();
    let path: Vec<usize> = (0..500).collect();
    let p = SubpathParams::default();
    let coarse = partition(&net, 1e-9, 1).unwrap();
    assert_eq!(coarse.clusters().len(), 1);
    assert!(classify_subpaths(&net, &coarse, &path, &p).unwrap().iter().all(|&g| g));
    let fine = partition(&net, 1.0, 1).unwrap();
    let labels = classify_subpaths(&net, &fine, &path, &p).unwrap();
    assert!(labels.iter().filter(|&&g| !g).count() > labels.len() / 2);
}
