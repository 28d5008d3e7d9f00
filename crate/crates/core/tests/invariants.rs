//! Property tests over the public API.

use horoflow::bundle::{foliated_horocycle, BundlePoint};
use horoflow::catalog::{rank2_group, rank2_sym2};
use horoflow::representation::{lorentz_embed, lorentz_q, sym_power, veronese};
use horoflow::{delta, BoundaryPoint, FreeWord, ProjPoint, Psl2Element};
use proptest::prelude::*;

fn frame() -> impl Strategy<Value = Psl2Element> {
    (0.0..std::f64::consts::TAU, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(th, t, s)| {
        Psl2Element::rotation(th)
            .compose(&Psl2Element::diagonal_flow(t))
            .compose(&Psl2Element::unipotent(s))
    })
}

fn letters(max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(prop_oneof![Just(1), Just(-1), Just(2), Just(-2)], 0..=max_len)
}

fn proj3() -> impl Strategy<Value = ProjPoint> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
        .prop_map(|v| ProjPoint::from_slice(&v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn horocycle_flow_is_additive(u in frame(), s in -10.0..10.0f64, t in -10.0..10.0f64) {
        let lhs = u.horocycle_flow(s).horocycle_flow(t);
        prop_assert!(lhs.distance(&u.horocycle_flow(s + t)) < 1e-10);
    }

    #[test]
    fn geodesic_flow_renormalizes_horocycles(u in frame(), s in -5.0..5.0f64, t in -3.0..3.0f64) {
        // u a_t h_s = u h_(e^t s) a_t
        let lhs = u.geodesic_flow(t).horocycle_flow(s);
        let rhs = u.horocycle_flow(t.exp() * s).geodesic_flow(t);
        prop_assert!(lhs.distance(&rhs) < 1e-9);
    }

    #[test]
    fn reduction_lands_in_the_fundamental_domain(u in frame()) {
        let g = rank2_group().unwrap();
        let red = g.reduce(&u).unwrap();
        prop_assert!(g.in_fundamental_domain(&red.reduced.basepoint()));
        let moved = g.evaluate(&red.word).unwrap() * u;
        prop_assert!(moved.distance(&red.reduced) < 1e-8 * (1.0 + red.word.len() as f64).powi(2));
    }

    #[test]
    fn inverse_words_cancel(l in letters(12)) {
        let w = FreeWord::from_letters(&l).unwrap();
        prop_assert!(w.is_reduced());
        prop_assert!(w.concat(&w.inverse()).is_empty());
        prop_assert_eq!(w.inverse().inverse(), w);
    }

    #[test]
    fn veronese_is_equivariant(u in frame(), t in -5.0..5.0f64, n in 1usize..=4) {
        let xi = BoundaryPoint::finite(t);
        let lhs = veronese(&u.mobius_boundary(&xi), n);
        let rhs = sym_power(&u, n).unwrap().act(&veronese(&xi, n)).unwrap();
        prop_assert!(delta(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn lorentz_embedding_preserves_q(u in frame(), x in prop::array::uniform3(-1.0..1.0f64)) {
        let m = lorentz_embed(&u);
        let y: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| m.matrix()[(i, j)] * x[j]).sum());
        let scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
        prop_assert!((lorentz_q(&y) - lorentz_q(&x)).abs() / scale < 1e-10);
    }

    #[test]
    fn sine_distance_is_a_metric(p in proj3(), q in proj3(), r in proj3()) {
        prop_assert!((delta(&p, &q) - delta(&q, &p)).abs() < 1e-15);
        prop_assert!(delta(&p, &p) < 1e-7);
        prop_assert!(delta(&p, &r) <= delta(&p, &q) + delta(&q, &r) + 1e-12);
    }

    #[test]
    fn foliated_horocycle_keeps_the_graph(u in frame(), s in -20.0..20.0f64) {
        // the graph of the Veronese map is invariant, so distance stays 0
        let rho = rank2_sym2().unwrap();
        let phi = horoflow::LimitMap::veronese(2);
        let y = BundlePoint::new(u, phi.eval(&u.endpoint_plus()));
        let z = foliated_horocycle(&y, s, &rho).unwrap();
        prop_assert!(z.graph_distance(&phi) < 1e-8);
    }
}
