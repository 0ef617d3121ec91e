use radionet::netmodel::{build_topology, Topology};
use radionet::primitives::{decay_round, edge_cut_rate};
use radionet::radio::{Fidelity, Trace};
use radionet_harness::calibrate::{calibrate, BatterySize};
use radionet_harness::campaign::{campaign_records, rows_to_csv};
use radionet_harness::{campaign, Calibrated, ExperimentSpec, NetworkSpec, ProtocolSpec, Seeds};

fn path_spec(n: usize, protocol: ProtocolSpec, seeds: Seeds) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(
        NetworkSpec::Generate {
            topology: Topology::Path { n },
            seed: 0,
            per_seed: false,
        },
        protocol,
        seeds,
    );
    spec.mode = Some(Fidelity::Charged);
    spec
}

#[test]
fn charged_rounds_grow_with_diameter() {
    let mut last = 0.0;
    for n in [256usize, 512, 1024, 2048, 4096] {
        let rows = campaign(&path_spec(
            n,
            ProtocolSpec::Broadcast { source: 0, value: 1 },
            Seeds::Count(3),
        ))
        .unwrap();
        assert!(rows.iter().all(|r| r.success));
        let mean = rows.iter().map(|r| r.charged_rounds as f64).sum::<f64>() / rows.len() as f64;
        assert!(mean > last, "n={n}: {mean} after {last}");
        last = mean;
    }
}

#[test]
fn campaigns_are_reproducible_and_self_consistent() {
    let mut spec = ExperimentSpec::new(
        NetworkSpec::Generate {
            topology: Topology::RandomTree { n: 200 },
            seed: 0,
            per_seed: true,
        },
        ProtocolSpec::Compete { sources: 4 },
        Seeds::Count(8),
    );
    spec.mode = Some(Fidelity::Faithful);
    let a = campaign_records(&spec).unwrap();
    let b = campaign_records(&spec).unwrap();
    assert_eq!(a, b);
    let rows: Vec<_> = a.iter().map(|r| r.row.clone()).collect();
    assert_eq!(
        rows_to_csv(&rows).unwrap(),
        rows_to_csv(&campaign(&spec).unwrap()).unwrap()
    );
    for r in &a {
        assert_eq!(r.row.success, r.summary.recomputed_success());
        if r.row.success {
            assert_eq!(r.row.informed, r.row.n);
        }
    }
}

#[test]
fn frozen_cut_and_decay_constants_hold_at_acceptance_sizes() {
    let cal = Calibrated::frozen().unwrap();
    for t in [
        Topology::Path { n: 1024 },
        Topology::Grid { rows: 32, cols: 32 },
        Topology::RandomTree { n: 1024 },
    ] {
        let net = build_topology(&t, 3).unwrap();
        for beta in [0.02, 0.05, 0.1] {
            let rate = edge_cut_rate(&net, beta, 100, 77).unwrap();
            assert!(rate <= cal.c_cut * beta, "{} beta {beta}: {rate}", t.label());
        }
    }
    let star = build_topology(&Topology::Star { n: 257 }, 0).unwrap();
    for k in [1usize, 2, 9, 40, 256] {
        let parts: Vec<(usize, u64)> = (1..=k).map(|v| (v, 0)).collect();
        let mut heard = 0;
        for t in 0..2000 {
            let mut trace = Trace::new(Fidelity::Faithful);
            heard += decay_round(&star, &parts, &[0], 5, t, &mut trace).unwrap().heard.len();
        }
        let f = heard as f64 / 2000.0;
        assert!(f >= cal.p0, "k={k}: {f} < {}", cal.p0);
    }
}

#[test]
fn frozen_constants_reproduce() {
    let fresh = calibrate(BatterySize::full()).unwrap();
    let frozen = Calibrated::frozen().unwrap();
    let consts = |c: &Calibrated| [c.c_diam, c.c_cut, c.c_cp, c.c_bad, c.p0, c.margin];
    assert_eq!(
        consts(&fresh),
        consts(&frozen),
        "calibration drifted; review before refreezing"
    );
    let obs = |c: &Calibrated| {
        let o = &c.observed;
        [o.diam_ratio, o.cut_ratio, o.cp_ratio, o.bad_ratio, o.decay_min]
    };
    for (a, b) in obs(&fresh).iter().zip(obs(&frozen)) {
        assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
    }
    assert_eq!(fresh.battery, frozen.battery);
}
