//! Worked examples with closed-form answers.

mod common;

use std::f64::consts::SQRT_2;

use common::{max_abs, rng};
use hyperreal::circuits::{analyze, synthesize};
use hyperreal::classify::{
    classify_prs, composition_eta, eta_of, eta_pointwise, hb_membership, ClassifyOptions, Witness,
};
use hyperreal::kyp::{plemma_residual, qmi_residual, search_h, verify, Verdict};
use hyperreal::matcore::{real_matrix, spectral_norm, spectral_radius, CMatrix, Definiteness, HermitianMatrix};
use hyperreal::rational::{Realization, SisoRational};
use hyperreal::sets::{product_contract_eta, stein_residual, lyap_residual, EtaParam, LyapSetSpec, SteinSetSpec};
use hyperreal::stability::{
    circle_transform, circle_transform_eta, criterion, CriterionRoute, Sector,
};
use hyperreal::{Error, Tolerances};
use num_complex::Complex64;
use rand::Rng;

fn opts() -> ClassifyOptions {
    ClassifyOptions::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rf1() -> Realization {
    let s6 = 6f64.sqrt();
    Realization::from_real(
        2,
        1,
        &[-0.2, -4.0 / 15.0, 4.0 / 15.0, -0.2],
        &[4.0 / (5.0 * s6), 8.0 / (5.0 * s6)],
        &[8.0 / (5.0 * s6), 4.0 / (5.0 * s6)],
        &[0.6],
    )
    .unwrap()
}

fn f1() -> SisoRational {
    SisoRational::from_coeffs(&[1.0 / 15.0, 2.0 / 3.0, 0.6], &[1.0 / 9.0, 0.4, 1.0]).unwrap()
}

fn assert_same_transfer(a: &Realization, b: &Realization, tol: f64) {
    for s in [c(0.0, 0.0), c(0.0, 0.3), c(0.5, -2.0), c(2.0, 7.0), c(0.01, 1.0 / 3.0)] {
        let d = max_abs(&(a.eval(s).unwrap() - b.eval(s).unwrap()));
        assert!(d <= tol, "transfer mismatch {d:e} at {s}");
    }
}

#[test]
fn quadratic_residual_of_worked_example_is_definite() {
    let t = 2.0 / 6f64.sqrt();
    let q = real_matrix(3, 3, &[1.0, 0.0, t, 0.0, 1.0, -t, t, -t, 3.0]) * c(0.4, 0.0);
    let h = HermitianMatrix::new(q).unwrap();
    assert_eq!(h.classify(1e-10), Definiteness::PositiveDefinite);
    assert_eq!(HermitianMatrix::identity(2).classify(1e-10), Definiteness::PositiveDefinite);
    assert_eq!(HermitianMatrix::from_diagonal(&[1.0, -1.0]).classify(1e-10), Definiteness::Indefinite);
}

#[test]
fn norms_and_radii_of_small_matrices() {
    assert_eq!(spectral_norm(&CMatrix::zeros(3, 3)), 0.0);
    assert!((spectral_norm(&real_matrix(2, 2, &[3.0, 0.0, 0.0, -4.0])) - 4.0).abs() < 1e-14);
    assert!((spectral_radius(&CMatrix::identity(3, 3)).unwrap() - 1.0).abs() < 1e-14);
    assert!(spectral_radius(&real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap() < 1e-12);
}

#[test]
fn degree_one_values_on_the_axis() {
    let mut g = rng(11);
    for _ in 0..10 {
        let eta = g.random_range(1.01..6.0);
        let a = g.random_range(0.05..20.0);
        let f = hyperreal::stability::degree_one_representative(eta, a);
        let r = (eta * eta - 1.0).sqrt();
        assert!((f.eval(c(0.0, 0.0)).unwrap() - (eta + r)).norm() < 1e-12);
        assert!((f.eval(c(0.0, a)).unwrap() - c(eta, -r)).norm() < 1e-12);
        let rep = eta_of(&f.to_realization().unwrap(), &opts()).unwrap();
        assert!((rep.eta_star.unwrap() - eta).abs() < 1e-8);
    }
}

#[test]
fn worked_example_values() {
    let f = f1();
    for s in [c(0.0, 1.0 / 3.0), c(0.0, -1.0 / 3.0)] {
        assert!((f.eval(s).unwrap() - 5.0 / 3.0).norm() < 1e-12);
    }
    assert!((f.eval(c(0.0, 0.0)).unwrap() - 0.6).norm() < 1e-12);
    assert!((f.value_at_infinity().unwrap() - 0.6).abs() < 1e-15);
    // 3/5 + (32/75) s/(s² + (2/5)s + 1/9)
    let other = SisoRational::constant(0.6)
        .add(&SisoRational::from_coeffs(&[0.0, 32.0 / 75.0], &[1.0 / 9.0, 0.4, 1.0]).unwrap())
        .unwrap();
    for w in [0.0, 0.2, 1.0, 5.0] {
        let s = c(0.1, w);
        assert!((f.eval(s).unwrap() - other.eval(s).unwrap()).norm() < 1e-12);
    }
    assert_same_transfer(&f.to_realization().unwrap(), &rf1(), 1e-12);
}

#[test]
fn worked_example_cayley_image() {
    let s3 = 3f64.sqrt();
    let want = Realization::from_real(
        2,
        1,
        &[-1.0 / 3.0, -1.0 / 3.0, 0.0, -1.0 / 3.0],
        &[-1.0 / (2.0 * s3), -1.0 / s3],
        &[1.0 / s3, 1.0 / (2.0 * s3)],
        &[0.25],
    )
    .unwrap();
    let got = rf1().cayley().unwrap();
    assert_same_transfer(&got, &want, 1e-12);
    // C(f1) = g² with g = ½(s − 1/3)/(s + 1/3)
    for w in [0.0, 0.3, 2.0] {
        let s = c(0.0, w);
        let g = 0.5 * (s - 1.0 / 3.0) / (s + 1.0 / 3.0);
        assert!((got.eval(s).unwrap()[(0, 0)] - g * g).norm() < 1e-12);
    }
    let hb = hb_membership(&got, EtaParam::finite(17.0 / 15.0).unwrap(), 1e-9).unwrap();
    assert!(hb.member);
    assert!((hb.sup_norm - 0.25).abs() < 1e-9);
    assert!(!hb_membership(&got, EtaParam::finite(1.1).unwrap(), 1e-9).unwrap().member);
}

#[test]
fn worked_example_certificates() {
    let r = rf1();
    let q = plemma_residual(&r, &HermitianMatrix::identity(2)).unwrap();
    assert!(q.is_positive_definite(0.0));
    let cert = verify(&r, &HermitianMatrix::identity(2), EtaParam::Infinity, &Tolerances::default()).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiesHP);
    let w = qmi_residual(&r, &HermitianMatrix::from_diagonal(&[8.0, 2.0]), EtaParam::finite(17.0 / 15.0).unwrap())
        .unwrap();
    assert!(max_abs(w.matrix()) <= 1e-9);
    let near = EtaParam::finite(17.0 / 15.0 * (1.0 + 1e-6)).unwrap();
    let found = search_h(&r, near, &opts()).unwrap();
    assert!(found.h.is_positive_definite(0.0));
    assert!(qmi_residual(&r, &found.h, near).unwrap().min_eigenvalue() >= -1e-9);
    let err = search_h(&r, EtaParam::finite(1.05).unwrap(), &opts()).unwrap_err();
    assert!(matches!(err, Error::NoCertificate { .. }));
}

#[test]
fn midpoint_inverse_moves_five_thirds_to_seventeen_fifteenths() {
    assert_eq!(product_contract_eta(EtaParam::finite(5.0 / 3.0).unwrap()).value(), 0.5 * (5.0 / 3.0 + 0.6));
    let f = SisoRational::from_coeffs(&[1.0 / 3.0, 1.0 / 3.0], &[1.0 / 9.0, 1.0]).unwrap();
    let f1 = f.midpoint_inverse().unwrap();
    let e0 = eta_of(&f.to_realization().unwrap(), &opts()).unwrap().eta_star.unwrap();
    let e1 = eta_of(&f1.to_realization().unwrap(), &opts()).unwrap().eta_star.unwrap();
    assert!((e0 - 5.0 / 3.0).abs() < 1e-9);
    assert!((e1 - 17.0 / 15.0).abs() < 1e-9);
    // 1/f = 3(s + 1/9)/(s + 1)
    let inv = f.invert().unwrap();
    for w in [0.0, 0.5, 3.0] {
        let s = c(0.2, w);
        assert!((inv.eval(s).unwrap() - 3.0 * (s + 1.0 / 9.0) / (s + 1.0)).norm() < 1e-12);
    }
}

#[test]
fn pointwise_eta_values() {
    assert!((eta_pointwise(&CMatrix::identity(2, 2)) - 1.0).abs() < 1e-15);
    let phi = CMatrix::from_element(1, 1, c(1.0, -1.0) / SQRT_2);
    assert!((eta_pointwise(&phi) - SQRT_2).abs() < 1e-14);
    let f1v = CMatrix::from_element(1, 1, c(5.0 / 3.0, 0.0));
    assert!((eta_pointwise(&f1v) - 17.0 / 15.0).abs() < 1e-14);
}

#[test]
fn degree_one_class_conditions() {
    // d + b/(s + a): SP iff ab > 0 and d ≥ 0, HP iff abd > 0 (a > 0 here)
    for &(d, b, a, sp, hp) in &[
        (0.5, 1.0, 2.0, true, true),
        (0.0, 1.0, 1.0, true, false),
        (0.5, -1.0, 2.0, false, false),
        (2.0, -0.5, 1.0, true, true),
        (0.0, 0.0, 1.0, true, false),
    ] {
        let f = SisoRational::degree_one(d, b, a).to_realization().unwrap();
        let v = classify_prs(&f, &opts()).unwrap();
        if b == 0.0 || b * a > 0.0 {
            assert_eq!(v.sp, sp, "d = {d}, b = {b}, a = {a}");
            assert_eq!(v.hp, hp, "d = {d}, b = {b}, a = {a}");
        } else {
            // ab < 0: a negative residue; the function may still be SP when d
            // dominates, so only the HP ⇒ SP ⇒ P chain is checked
            assert!(!v.hp || v.sp);
        }
    }
    let id = classify_prs(&Realization::constant(CMatrix::identity(2, 2)).unwrap(), &opts()).unwrap();
    assert!(id.p && id.sp && id.hp);
    assert!((id.eta_star.unwrap() - 1.0).abs() < 1e-15);
    let lp = classify_prs(&SisoRational::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap().to_realization().unwrap(), &opts()).unwrap();
    assert!(lp.sp && !lp.hp);
    let v1 = classify_prs(&rf1(), &opts()).unwrap();
    assert!(v1.sp && v1.hp);
}

#[test]
fn scaled_all_pass_is_on_the_boundary() {
    for eta in [1.5f64, 3.0, 10.0] {
        let gamma = ((eta - 1.0) / (eta + 1.0)).sqrt();
        let a = 0.7;
        let g = SisoRational::from_coeffs(&[-a * gamma, gamma], &[a, 1.0]).unwrap().to_realization().unwrap();
        let rep = hb_membership(&g, EtaParam::finite(eta).unwrap(), 1e-9).unwrap();
        assert!(rep.member);
        assert!((rep.sup_norm - gamma).abs() < 1e-9);
        let zero = Realization::constant(CMatrix::zeros(1, 1)).unwrap();
        assert!(hb_membership(&zero, EtaParam::finite(eta).unwrap(), 0.0).unwrap().member);
    }
}

#[test]
fn composition_with_right_half_plane_maps() {
    let f = hyperreal::stability::degree_one_representative(SQRT_2, 1.0).to_realization().unwrap();
    let id = composition_eta(&f, &SisoRational::identity(), &opts()).unwrap();
    assert!((id.eta_star.unwrap() - SQRT_2).abs() < 1e-8);
    let h = SisoRational::from_coeffs(&[1.0, 2.0], &[3.0, 1.0]).unwrap();
    let rep = composition_eta(&f, &h, &opts()).unwrap();
    assert!(rep.eta_star.unwrap() <= SQRT_2 + 1e-8);
    assert!(rep.dominated);
    let bad = SisoRational::from_coeffs(&[-1.0], &[1.0, 1.0]).unwrap();
    assert!(matches!(composition_eta(&f, &bad, &opts()), Err(Error::InnerNotSP)));
}

#[test]
fn stein_and_lyap_closed_forms() {
    let mut g = rng(12);
    for n in 1..=4 {
        for eta in [1.5, 3.0, 10.0] {
            let e = EtaParam::finite(eta).unwrap();
            let gamma = e.contraction_radius();
            let spec = SteinSetSpec::new(HermitianMatrix::identity(n), e);
            let lam = Complex64::from_polar(gamma * g.random_range(0.0..0.999), g.random_range(0.0..6.0));
            let res = stein_residual(&spec, &(CMatrix::identity(n, n) * lam)).unwrap();
            assert!(res.is_positive_definite(0.0));
            let zero = stein_residual(&spec, &CMatrix::zeros(n, n)).unwrap();
            assert!(max_abs(&(zero.matrix() - CMatrix::identity(n, n) * c(eta - 1.0, 0.0))) < 1e-14);
            let lyap = lyap_residual(&LyapSetSpec::new(HermitianMatrix::identity(n), e), &CMatrix::identity(n, n)).unwrap();
            let want = CMatrix::identity(n, n) * c(2.0 * (1.0 - 1.0 / eta), 0.0);
            assert!(max_abs(&(lyap.matrix() - want)) < 1e-14);
        }
    }
}

#[test]
fn circle_transforms() {
    let s = Sector::new(1.0, 4.0).unwrap();
    let f = circle_transform(&s);
    assert_eq!(f.num().coeffs(), &[1.0, 4.0]);
    assert_eq!(f.den().coeffs(), &[1.0, 1.0]);
    let (g, eta, a) = circle_transform_eta(&Sector::new(0.6, 5.0 / 3.0).unwrap()).unwrap();
    assert!((eta.value() - 17.0 / 15.0).abs() < 1e-14);
    assert!((a - 0.6).abs() < 1e-14);
    let got = eta_of(&g.to_realization().unwrap(), &opts()).unwrap().eta_star.unwrap();
    assert!((got - 17.0 / 15.0).abs() < 1e-8);
    // β (1 + Ks)/(1 + ks))^{-1} with β = √(K/k) agrees with the degree-one form
    let (k, big_k) = (0.3, 2.7);
    let (g, _, _) = circle_transform_eta(&Sector::new(k, big_k).unwrap()).unwrap();
    let beta = (big_k / k).sqrt();
    let mut r = rng(13);
    for _ in 0..20 {
        let z = c(r.random_range(0.0..3.0), r.random_range(-3.0..3.0));
        let direct = beta * (1.0 + k * z) / (1.0 + big_k * z);
        assert!((g.eval(z).unwrap() - direct).norm() < 1e-12);
    }
    assert!(circle_transform_eta(&Sector::new(1.0, 1.0).unwrap()).is_err());
    assert!(matches!(circle_transform_eta(&Sector::new(0.0, 1.0).unwrap()), Err(Error::NonpositiveSector { .. })));
}

#[test]
fn criterion_on_first_order_lag() {
    let h = SisoRational::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap();
    let small = criterion(&h, &Sector::new(0.0, 0.5).unwrap(), CriterionRoute::Classical, &opts()).unwrap();
    assert!(small.criterion_holds);
    let zero = criterion(&h, &Sector::new(0.0, 0.0).unwrap(), CriterionRoute::Classical, &opts()).unwrap();
    assert!(zero.criterion_holds);
    assert_eq!(zero.route, CriterionRoute::LinearTimeInvariant);
    let unstable = SisoRational::from_coeffs(&[1.0], &[-1.0, 1.0]).unwrap();
    let r = criterion(&unstable, &Sector::new(0.0, 0.0).unwrap(), CriterionRoute::Classical, &opts()).unwrap();
    assert!(!r.criterion_holds);
}

#[test]
fn circuit_round_trip() {
    let circuit = synthesize(EtaParam::finite(5.0 / 3.0).unwrap(), 1.0 / 9.0).unwrap();
    assert!((circuit.r - 8.0 / 3.0).abs() < 1e-14);
    assert!((circuit.c - 27.0 / 8.0).abs() < 1e-13);
    assert!((circuit.rs - 1.0 / 3.0).abs() < 1e-14);
    // f(s) = 1/3 + (8/27)/(s + 1/9)
    for w in [0.0, 0.05, 1.0, 10.0] {
        let s = c(0.0, w);
        assert!((circuit.impedance(s) - (1.0 / 3.0 + (8.0 / 27.0) / (s + 1.0 / 9.0))).norm() < 1e-13);
    }
    let mut g = rng(14);
    for _ in 0..50 {
        let eta = 1.0 + 10f64.powf(g.random_range(-4.0..2.0));
        let a = 10f64.powf(g.random_range(-3.0..3.0));
        let an = analyze(&synthesize(EtaParam::finite(eta).unwrap(), a).unwrap()).unwrap();
        assert!((an.eta - eta).abs() <= 1e-10 * eta);
        assert!((an.a - a).abs() <= 1e-10 * a);
        let rep = eta_of(&an.impedance.to_realization().unwrap(), &opts()).unwrap();
        assert!((rep.eta_star.unwrap() - eta).abs() <= 1e-8 * eta);
    }
}

#[test]
fn witness_for_power_dominance_example() {
    let a = 2.0;
    let f = SisoRational::from_coeffs(&[SQRT_2 * a * a + a * a / SQRT_2, SQRT_2 * a, 1.0 / SQRT_2], &[a * a, 2.0 * a, 1.0])
        .unwrap();
    let rep = eta_of(&f.to_realization().unwrap(), &opts()).unwrap();
    match rep.witness {
        Witness::Frequency { omega } => assert!((omega.abs() - a).abs() < 1e-6 * a),
        other => panic!("unexpected witness {other:?}"),
    }
}
