//! Closed-form values checked through the public API.

use horoflow::bundle::{key_lemma_trace, minimal_set_sample};
use horoflow::catalog::{rank2_group, rank2_inclusion};
use horoflow::hausdorff::hausdorff;
use horoflow::representation::{
    boundary_of_isotropic, h1_lines, lorentz_dual, lorentz_embed, lorentz_isotropic, lorentz_q, sym_power, veronese,
};
use horoflow::{
    busemann, delta, BoundaryPoint, FreeWord, HPoint, IsometryClass, ProjMat, ProjPoint, Psl2Element, SchottkyGroup,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn schottky_generator_from_its_axis() {
    // fixed points -1, 1 and multiplier 9: (x-1)/(x+1) scales by 1/9
    let g = SchottkyGroup::from_axes(&[(-1.0, 1.0, 9.0), (-4.0, 3.0, 100.0)]).unwrap();
    let a = g.generators()[0];
    assert!(close(
        a.mobius_boundary(&BoundaryPoint::finite(0.0)).as_real().unwrap(),
        0.8,
        1e-14
    ));
    let IsometryClass::Hyperbolic {
        lambda,
        fix_plus,
        fix_minus,
    } = a.classify()
    else {
        panic!("generator is not hyperbolic");
    };
    assert!(close(lambda, 3.0, 1e-14));
    assert!(close(fix_plus.as_real().unwrap(), 1.0, 1e-14));
    assert!(close(fix_minus.as_real().unwrap(), -1.0, 1e-14));
}

#[test]
fn word_and_limit_set_counts() {
    let g = rank2_group().unwrap();
    // 1 + 4 + 4*3 + 4*9
    assert_eq!(g.words_up_to(3).count(), 53);
    assert!(g.limit_set_sample(6).unwrap().len() >= 4 * 3usize.pow(5));
}

#[test]
fn busemann_at_infinity_is_log_height() {
    let inf = BoundaryPoint::infinity();
    for (y1, y2) in [(1.0, 2.0), (0.5, 3.0), (4.0, 0.25)] {
        let b = busemann(&inf, &HPoint::new(0.3, y1).unwrap(), &HPoint::new(-2.0, y2).unwrap());
        assert!(close(b, (y2 / y1).ln(), 1e-14), "{y1} {y2}");
    }
}

#[test]
fn horocycle_and_geodesic_flows_of_the_identity() {
    let u = Psl2Element::identity();
    assert_eq!(u.horocycle_flow(2.5).entries(), [1.0, 2.5, 0.0, 1.0]);
    let e = u.geodesic_flow(2.0_f64.ln() * 2.0).entries();
    assert!(close(e[0], 2.0, 1e-15) && close(e[3], 0.5, 1e-15));
    // a_t h_s a_-t = h_(e^t s)
    let t = 0.7;
    let lhs = Psl2Element::diagonal_flow(t) * Psl2Element::unipotent(1.3) * Psl2Element::diagonal_flow(-t);
    assert!(lhs.distance(&Psl2Element::unipotent(t.exp() * 1.3)) < 1e-14);
}

#[test]
fn key_lemma_on_the_diagonal_model() {
    let gamma = Psl2Element::new(2.0, 0.0, 0.0, 0.5).unwrap();
    let a = ProjMat::diagonal(&[4.0, 1.0, 0.25]).unwrap();
    let chi = ProjPoint::from_slice(&[1.0, 1.0, 1.0]).unwrap();
    let tr = key_lemma_trace(&gamma, &a, &BoundaryPoint::finite(1.0), &chi, 12, 1e-3).unwrap();
    assert!(close(tr.lambda, 2.0, 1e-14));
    assert!(close(tr.gap, 0.25, 1e-14));
    for st in &tr.steps {
        // gamma^k(1) = 4^k; A^k chi = (4^k, 1, 4^-k)
        let sixteen_k = 16f64.powi(st.k as i32);
        let base = 1.0 / (1.0 + sixteen_k).sqrt();
        let fiber = ((1.0 + 1.0 / sixteen_k) / (sixteen_k + 1.0 + 1.0 / sixteen_k)).sqrt();
        assert!(close(st.base, base, 1e-12), "k = {}", st.k);
        assert!(close(st.fiber, fiber, 1e-12), "k = {}", st.k);
    }
}

#[test]
fn symmetric_square_of_a_diagonal() {
    let g = Psl2Element::new(2.0, 0.0, 0.0, 0.5).unwrap();
    let s = sym_power(&g, 2).unwrap();
    assert!(s.distance(&ProjMat::diagonal(&[4.0, 1.0, 0.25]).unwrap()) < 1e-14);
    // the Veronese curve is carried along
    let xi = BoundaryPoint::finite(0.5);
    let moved = s.act(&veronese(&xi, 2)).unwrap();
    assert!(delta(&moved, &veronese(&g.mobius_boundary(&xi), 2)) < 1e-14);
}

#[test]
fn lorentz_model_oracles() {
    // the stabilizer of i fixes the timelike axis
    let axis = ProjPoint::from_slice(&[0.0, 0.0, 1.0]).unwrap();
    let r = lorentz_embed(&Psl2Element::rotation(1.1));
    assert!(delta(&r.act(&axis).unwrap(), &axis) < 1e-14);
    for t in [-3.0, 0.0, 0.5, 7.0] {
        let xi = BoundaryPoint::finite(t);
        let v = lorentz_isotropic(&xi);
        let s = v.as_slice();
        assert!(lorentz_q(&[s[0], s[1], s[2]]).abs() < 1e-15);
        assert!(boundary_of_isotropic(&[s[0], s[1], s[2]]).unwrap().dist(&xi) < 1e-14);
    }
    // the q-orthogonal plane of the dual vector meets the cone in the two points
    let (p, q) = (BoundaryPoint::finite(-1.0), BoundaryPoint::finite(2.0));
    let x = lorentz_dual(&p, &q).unwrap();
    assert!(close(lorentz_q(&x), 1.0, 1e-14));
    let (d1, d2) = h1_lines(&x).unwrap();
    let (ip, iq) = (lorentz_isotropic(&p), lorentz_isotropic(&q));
    let matched =
        (delta(&d1, &ip) < 1e-12 && delta(&d2, &iq) < 1e-12) || (delta(&d1, &iq) < 1e-12 && delta(&d2, &ip) < 1e-12);
    assert!(matched);
}

#[test]
fn inclusion_minimal_set_is_the_diagonal() {
    let rho = rank2_inclusion().unwrap();
    let s = minimal_set_sample(&rho, 5, 1e-3).unwrap();
    assert!(!s.is_empty());
    for p in &s.pairs {
        let (x, y) = p.xi.direction();
        assert!(delta(&p.chi, &ProjPoint::from_slice(&[x, y]).unwrap()) < 1e-12);
    }
}

#[test]
fn free_word_display_and_inverse() {
    // construction reduces freely
    assert_eq!(FreeWord::from_letters(&[1, -2, 2]).unwrap().to_string(), "a");
    let w = FreeWord::from_letters(&[1, -2]).unwrap();
    assert_eq!(w.to_string(), "aB");
    assert_eq!(w.inverse().to_string(), "bA");
    assert!(w.concat(&w.inverse()).is_empty());
}

#[test]
fn hausdorff_of_shifted_grids() {
    let a = [0.0, 1.0, 2.0];
    let b = [0.25, 1.25, 2.25];
    let h = hausdorff(&a, &b, |x: &f64, y: &f64| (x - y).abs()).unwrap();
    assert!(close(h.max, 0.25, 1e-15));
    let h = hausdorff(&a, &b[..1], |x: &f64, y: &f64| (x - y).abs()).unwrap();
    assert!(close(h.a_to_b, 1.75, 1e-15) && close(h.b_to_a, 0.25, 1e-15));
}
