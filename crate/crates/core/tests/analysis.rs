use proptest::prelude::*;
use radionet::analysis::{
    check_trans1, check_trans2, k_sequence, mc_center_distance, s_quantities, transform_f, transform_g, transform_gf,
};
use radionet::netmodel::{bfs_layers, build_topology, Topology};

fn vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![3 => Just(0.0), 5 => 0.0f64..100.0], 2..300)
        .prop_filter("needs a positive entry", |x| x.iter().any(|&v| v > 0.0))
}

fn power_supported() -> impl Strategy<Value = Vec<f64>> {
    vector().prop_map(|mut x| {
        for (i, v) in x.iter_mut().enumerate() {
            if !i.is_power_of_two() {
                *v = 0.0;
            }
        }
        if x.iter().all(|&v| v == 0.0) {
            x[1] = 1.0;
        }
        x
    })
}

fn l1(x: &[f64]) -> f64 {
    x.iter().sum()
}

proptest! {
    #[test]
    fn s_is_scale_invariant(x in vector(), c in 1e-3f64..1e3, beta in 1e-3f64..2.0) {
        let a = s_quantities(&x, beta).unwrap().s;
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let b = s_quantities(&scaled, beta).unwrap().s;
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn s_is_a_weighted_average_of_indices(x in vector(), beta in 1e-3f64..2.0) {
        let q = s_quantities(&x, beta).unwrap();
        let lo = x.iter().position(|&v| v > 0.0).unwrap() as f64;
        let hi = x.iter().rposition(|&v| v > 0.0).unwrap() as f64;
        prop_assert!(q.s >= lo - 1e-9 && q.s <= hi + 1e-9);
        prop_assert!(q.b > 0.0 || lo * beta > 700.0);
    }

    #[test]
    fn f_does_not_add_mass(x in vector()) {
        let f = transform_f(&x);
        prop_assert!(l1(&f) <= l1(&x) * (1.0 + 1e-12));
        prop_assert!(f.iter().enumerate().all(|(i, &v)| v == 0.0 || i.is_power_of_two()));
    }

    #[test]
    fn g_at_most_doubles_mass_and_halves_slowly(x in power_supported()) {
        let g = transform_g(&x).unwrap();
        prop_assert!(l1(&g) <= 2.0 * l1(&x) * (1.0 + 1e-12));
        let mut i = 1;
        while 2 * i < g.len() {
            prop_assert!(2.0 * g[2 * i] >= g[i] * (1.0 - 1e-12));
            i *= 2;
        }
    }

    #[test]
    fn transformations_keep_s_within_constant_factors(x in vector(), beta in 0.01f64..1.0) {
        prop_assert!(check_trans1(&x, beta).unwrap().holds);
        let f = transform_f(&x);
        if f.iter().any(|&v| v > 0.0) {
            prop_assert!(check_trans2(&f, beta).unwrap().holds);
        }
    }
}

#[test]
fn transformed_layer_vectors_have_the_stated_properties() {
    let tops = [
        Topology::Path { n: 300 },
        Topology::Grid { rows: 12, cols: 20 },
        Topology::RandomTree { n: 400 },
        Topology::Cycle { n: 100 },
    ];
    for (s, topo) in tops.iter().enumerate() {
        let net = build_topology(topo, s as u64).unwrap();
        for v in (0..net.n()).step_by(17) {
            let lv = bfs_layers(&net, v).unwrap();
            let x = lv.to_f64(net.diameter() + 1);
            if x.len() < 4 || x[2] + x[3] < 2.0 {
                continue;
            }
            let xp = transform_gf(&x).unwrap();
            assert!(xp[1] >= x[2] + x[3]);
            assert!(l1(&xp) <= 2.0 * net.n() as f64);
            let k = k_sequence(&xp, net.n()).unwrap();
            assert!(k.k.iter().all(|&ki| ki >= -1.0 - 1e-12));
        }
    }
}

#[test]
fn two_node_center_distance() {
    let net = build_topology(&Topology::Path { n: 2 }, 0).unwrap();
    for beta in [0.1, 0.5, 1.0] {
        let e = mc_center_distance(&net, 0, beta, 100_000, 11).unwrap();
        let want = (-beta).exp() / 2.0;
        assert!(
            (e.mean - want).abs() <= 3.0 * e.stderr,
            "beta {beta}: {} vs {want}",
            e.mean
        );
    }
}

#[test]
fn center_distance_below_five_s_on_small_path() {
    let net = build_topology(&Topology::Path { n: 201 }, 0).unwrap();
    let x = bfs_layers(&net, 100).unwrap().to_f64(net.diameter() + 1);
    let d = net.diameter() as f64;
    for beta in [d.powf(-0.1), d.powf(-0.05), d.powf(-0.01)] {
        let e = mc_center_distance(&net, 100, beta, 2000, 3).unwrap();
        let s = s_quantities(&x, beta).unwrap().s;
        assert!(e.mean + 3.0 * e.stderr <= 5.0 * s);
    }
}
