//! Randomized invariants. Matrices come from a seeded generator so that a
//! shrunk failure is reproducible from its seed.

mod common;

use common::{cayley_oracle, max_abs, random_stable, rhp_point, rng, scaled_contraction};
use hyperreal::circuits::synthesize;
use hyperreal::classify::sweep::sweep_frequencies;
use hyperreal::classify::{classify_prs, eta_of, eta_pointwise, hb_membership, ClassifyOptions};
use hyperreal::kyp::{plemma_residual, qmi_residual, search_h, Verdict};
use hyperreal::matcore::{
    cayley, convex_combine, ginibre, psd_classify, random_unitary, spectral_norm, spectral_radius, CMatrix,
    HermitianMatrix, Isometry,
};
use hyperreal::rational::{Poly, Realization, SisoRational};
use hyperreal::sets::{
    is_lyap_member, is_lyap_member_closure, is_stein_member, is_stein_member_by_norm, lyap_residual,
    random_lyap_member, random_stein_member, similarity_norm, EtaParam, LyapSetSpec, SteinSetSpec,
};
use hyperreal::stability::{
    closed_loop_matrix, criterion, simulate_difference_inclusion, simulate_lurie, CriterionRoute,
    DifferenceInclusion, LurieLoop, Nonlinearity, Sector,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn random_pd<R: Rng>(n: usize, g: &mut R) -> HermitianMatrix {
    let m = ginibre(n, n, g);
    HermitianMatrix::new(&m * m.adjoint() + CMatrix::identity(n, n) * c(0.1 * n as f64)).unwrap()
}

fn eta_strategy() -> impl Strategy<Value = f64> {
    (-2.0f64..1.5).prop_map(|e| 1.0 + 10f64.powf(e))
}

fn random_hermitian<R: Rng>(n: usize, g: &mut R) -> HermitianMatrix {
    let m = ginibre(n, n, g);
    HermitianMatrix::new((&m + m.adjoint()) * c(0.5)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cayley_is_an_involution(seed in any::<u64>(), n in 1usize..=5) {
        let mut g = rng(seed);
        let m = ginibre(n, n, &mut g);
        if let Ok(cm) = cayley(&m) {
            let scale = max_abs(&m).max(1.0) * max_abs(&cm).max(1.0);
            prop_assert!(max_abs(&(cayley(&cm).unwrap() - &m)) <= 1e-9 * scale);
            prop_assert!(max_abs(&(&cm - cayley_oracle(&m))) <= 1e-9 * scale);
            if let Some(inv) = m.clone().try_inverse() {
                if let Ok(ci) = cayley(&inv) {
                    prop_assert!(max_abs(&(ci + &cm)) <= 1e-8 * scale * max_abs(&inv).max(1.0));
                }
            }
        }
    }

    #[test]
    fn definiteness_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..=5, shift in -2.0f64..2.0) {
        let mut g = rng(seed);
        let h = random_hermitian(n, &mut g);
        let shifted = HermitianMatrix::new(h.matrix() + CMatrix::identity(n, n) * c(shift)).unwrap();
        let ev = shifted.eigenvalues();
        let margin = ev.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
        prop_assume!(margin > 1e-6);
        let u = random_unitary(n, &mut g);
        let rotated = shifted.congruence(&u).unwrap();
        prop_assert_eq!(psd_classify(&shifted, 1e-10), psd_classify(&rotated, 1e-10));
    }

    #[test]
    fn norm_bounds_radius(seed in any::<u64>(), n in 1usize..=6) {
        let mut g = rng(seed);
        let m = ginibre(n, n, &mut g);
        prop_assert!(spectral_norm(&m) >= spectral_radius(&m).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn isometric_combinations(seed in any::<u64>(), n in 1usize..=4, k in 1usize..=3) {
        let mut g = rng(seed);
        let mats: Vec<CMatrix> = (0..k).map(|_| random_hermitian(n, &mut g).into_inner()).collect();
        let iso = Isometry::random(n, k, &mut g);
        let combo = convex_combine(&mats, &iso).unwrap();
        prop_assert!(max_abs(&(&combo - combo.adjoint())) <= 1e-12 * max_abs(&combo).max(1.0));
        let trivial = Isometry::new(CMatrix::identity(n, n), n).unwrap();
        prop_assert!(max_abs(&(convex_combine(&mats[..1], &trivial).unwrap() - &mats[0])) <= 1e-14);
        let raw: Vec<f64> = (0..k).map(|_| g.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let theta: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let scalar = convex_combine(&mats, &Isometry::scalar_weights(&theta, n).unwrap()).unwrap();
        let direct = mats.iter().zip(&theta).fold(CMatrix::zeros(n, n), |acc, (m, t)| acc + m * c(*t));
        prop_assert!(max_abs(&(scalar - direct)) <= 1e-12 * max_abs(&mats[0]).max(1.0));
    }

    #[test]
    fn stein_sets_scale_by_small_scalars(seed in any::<u64>(), n in 1usize..=4, eta in eta_strategy()) {
        let mut g = rng(seed);
        let spec = SteinSetSpec::new(random_pd(n, &mut g), EtaParam::finite(eta).unwrap());
        let a = random_stein_member(&spec, false, 1e-3, &mut g).unwrap();
        let gamma = spec.eta.contraction_radius();
        let lam = Complex64::from_polar(g.random_range(0.0..gamma - 1e-3), g.random_range(0.0..6.3));
        // |λ| < γ ≤ 1 keeps λÂ inside
        prop_assert!(is_stein_member(&spec, &(a * lam), 0.0).unwrap());
    }

    #[test]
    fn stein_routes_agree(seed in any::<u64>(), n in 1usize..=4, eta in eta_strategy(), ratio in 0.2f64..3.0) {
        prop_assume!((ratio - 1.0).abs() > 1e-3);
        let mut g = rng(seed);
        let h = random_pd(n, &mut g);
        let spec = SteinSetSpec::new(h.clone(), EtaParam::finite(eta).unwrap());
        let base = ginibre(n, n, &mut g);
        let nb = similarity_norm(&h, &base).unwrap();
        let a = base * c(ratio * spec.eta.contraction_radius() / nb);
        prop_assert_eq!(is_stein_member(&spec, &a, 0.0).unwrap(), is_stein_member_by_norm(&spec, &a).unwrap());
    }

    #[test]
    fn lyap_sets_are_convex(seed in any::<u64>(), n in 1usize..=4, eta in eta_strategy()) {
        let mut g = rng(seed);
        let spec = LyapSetSpec::new(random_pd(n, &mut g), EtaParam::finite(eta).unwrap());
        let a0 = random_lyap_member(&spec, false, 1e-3, &mut g).unwrap();
        let a1 = random_lyap_member(&spec, false, 1e-3, &mut g).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let a = &a1 * c(t) + &a0 * c(1.0 - t);
            prop_assert!(is_lyap_member(&spec, &a, 0.0).unwrap(), "θ = {}", t);
        }
    }

    #[test]
    fn lyap_residual_transforms_under_inversion(seed in any::<u64>(), n in 1usize..=4, eta in eta_strategy()) {
        let mut g = rng(seed);
        let spec = LyapSetSpec::new(random_pd(n, &mut g), EtaParam::finite(eta).unwrap());
        let a = random_lyap_member(&spec, false, 1e-3, &mut g).unwrap();
        let inv = a.clone().try_inverse().unwrap();
        let lhs = lyap_residual(&spec, &inv).unwrap();
        let rhs = inv.adjoint() * lyap_residual(&spec, &a).unwrap().matrix() * &inv;
        prop_assert!(max_abs(&(lhs.matrix() - &rhs)) <= 1e-9 * max_abs(&rhs).max(1.0));
        prop_assert!(is_lyap_member(&spec, &inv, 0.0).unwrap());
    }

    #[test]
    fn bounded_real_coefficient_below_minus_one(eta in eta_strategy()) {
        prop_assert!(EtaParam::finite(eta).unwrap().bounded_real_coefficient() < -1.0);
    }

    #[test]
    fn pointwise_eta_at_least_one(seed in any::<u64>(), m in 1usize..=4) {
        let mut g = rng(seed);
        let f = ginibre(m, m, &mut g) + CMatrix::identity(m, m) * c(g.random_range(0.0..4.0));
        prop_assert!(eta_pointwise(&f) >= 1.0 - 1e-12);
    }

    #[test]
    fn rational_evaluation_routes(seed in any::<u64>(), deg in 0usize..=4) {
        let mut g = rng(seed);
        let roots: Vec<f64> = (0..deg).map(|_| -g.random_range(0.1..5.0)).collect();
        let den = Poly::from_roots(&roots);
        let num = Poly::new((0..=deg).map(|_| g.random_range(-2.0..2.0)).collect());
        let f = SisoRational::new(num.clone(), den.clone()).unwrap();
        let r = f.to_realization().unwrap();
        for _ in 0..20 {
            let s = rhp_point(&mut g);
            let (a, b) = (f.eval(s).unwrap(), r.eval(s).unwrap()[(0, 0)]);
            prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
        }
        // a common factor cancels without moving values
        let common = Poly::new(vec![g.random_range(0.5..3.0), 1.0]);
        let padded = SisoRational::new(num.clone() * common.clone(), den.clone() * common).unwrap();
        prop_assert_eq!(padded.degree(), f.degree());
        let s = rhp_point(&mut g);
        prop_assert!((padded.eval(s).unwrap() - f.eval(s).unwrap()).norm() <= 1e-9 * f.eval(s).unwrap().norm().max(1.0));
        if !f.is_zero() {
            let back = f.invert().unwrap().invert().unwrap();
            prop_assert!((back.eval(s).unwrap() - f.eval(s).unwrap()).norm() <= 1e-9 * f.eval(s).unwrap().norm().max(1.0));
        }
    }

    #[test]
    fn realization_cayley_commutes_with_evaluation(seed in any::<u64>(), n in 0usize..=4, m in 1usize..=3) {
        let mut g = rng(seed);
        let r = random_stable(n, m, false, &mut g);
        prop_assume!(r.cayley().is_ok());
        let rc = r.cayley().unwrap();
        for _ in 0..5 {
            let s = rhp_point(&mut g);
            if let (Ok(fv), Ok(cv)) = (r.eval(s), rc.eval(s)) {
                if let Ok(pw) = cayley(&fv) {
                    let scale = max_abs(&fv).max(1.0) * max_abs(&pw).max(1.0);
                    prop_assert!(max_abs(&(cv - pw)) <= 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn realizations_survive_json(seed in any::<u64>(), n in 0usize..=3, m in 1usize..=2) {
        let mut g = rng(seed);
        let r = random_stable(n, m, false, &mut g);
        let text = serde_json::to_string(&r).unwrap();
        let back: Realization = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn sector_nonlinearities_stay_in_sector(seed in any::<u64>(), k in 0.0f64..2.0, width in 0.0f64..20.0) {
        let mut g = rng(seed);
        let sector = Sector::new(k, k + width).unwrap();
        for nl in [
            Nonlinearity::Saturation { level: g.random_range(0.01..3.0) },
            Nonlinearity::Deadzone { width: g.random_range(0.0..3.0) },
            Nonlinearity::Tanh { scale: g.random_range(0.01..3.0) },
            Nonlinearity::TimeVarying { omega: g.random_range(0.1..10.0) },
            Nonlinearity::Linear { gain: g.random_range(k..=k + width) },
        ] {
            for _ in 0..2000 {
                let (t, y) = (g.random_range(0.0..100.0), g.random_range(-50.0..50.0));
                prop_assert!(sector.contains(y, nl.eval(&sector, t, y), 1e-12), "{:?} at y = {}", nl, y);
            }
        }
    }

    #[test]
    fn inclusion_bound_holds(seed in any::<u64>(), n in 1usize..=4, eta in eta_strategy()) {
        let mut g = rng(seed);
        let di = DifferenceInclusion::new(EtaParam::finite(eta).unwrap(), n).unwrap();
        let x0: Vec<f64> = (0..n).map(|_| g.random_range(-1.0..1.0)).collect();
        let tr = simulate_difference_inclusion(&di, &x0, 60, &mut g).unwrap();
        prop_assert_eq!(tr.violations, 0);
    }

    #[test]
    fn synthesized_impedance_has_requested_eta(eta in eta_strategy(), la in -3.0f64..3.0) {
        let a = 10f64.powf(la);
        let circuit = synthesize(EtaParam::finite(eta).unwrap(), a).unwrap();
        prop_assert!((1.0 / (circuit.r * circuit.c) - a).abs() <= 1e-12 * a);
        let (_, f_eta) = (0, eta_of(&hyperreal::circuits::analyze(&circuit).unwrap().impedance.to_realization().unwrap(), &ClassifyOptions::default()).unwrap());
        prop_assert!((f_eta.eta_star.unwrap() - eta).abs() <= 1e-8 * eta);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn class_chain(seed in any::<u64>(), n in 0usize..=3, m in 1usize..=2) {
        let mut g = rng(seed);
        let r = random_stable(n, m, g.random_bool(0.5), &mut g);
        let v = classify_prs(&r, &ClassifyOptions::default()).unwrap();
        prop_assert!(!v.hp || v.sp);
        prop_assert!(!v.sp || v.p);
    }

    #[test]
    fn hyperpositive_and_hyperbounded_sides_agree(seed in any::<u64>(), rho in 0.1f64..0.9, slack in -0.2f64..0.2) {
        prop_assume!(slack.abs() > 1e-3);
        let mut g = rng(seed);
        let gr = scaled_contraction(g.random_range(1..=3), g.random_range(1..=2), rho, false, &mut g);
        let f = gr.cayley().unwrap();
        let star = eta_of(&f, &ClassifyOptions::default()).unwrap().eta_star.unwrap();
        let eta = EtaParam::finite((star * (1.0 + slack)).max(1.0 + 1e-6)).unwrap();
        let hp_side = star <= eta.value();
        let hb_side = hb_membership(&f.cayley().unwrap(), eta, 1e-12).unwrap().member;
        prop_assert_eq!(hp_side, hb_side);
    }

    #[test]
    fn hyperpositive_classes_are_matrix_convex_pointwise(seed in any::<u64>(), m in 1usize..=3, k in 1usize..=3, rho in 0.1f64..0.9) {
        let mut g = rng(seed);
        let eta = (1.0 + rho * rho) / (1.0 - rho * rho);
        let spec = LyapSetSpec::new(HermitianMatrix::identity(m), EtaParam::finite(eta).unwrap());
        let fs: Vec<Realization> = (0..k)
            .map(|_| scaled_contraction(g.random_range(1..=3), m, rho * g.random_range(0.5..1.0), false, &mut g).cayley().unwrap())
            .collect();
        let iso = Isometry::random(m, k, &mut g);
        for i in 0..256 {
            let w = 10f64.powf(-3.0 + 6.0 * i as f64 / 255.0);
            let vals: Vec<CMatrix> = fs.iter().map(|f| f.eval_freq(w).unwrap()).collect();
            let combo = convex_combine(&vals, &iso).unwrap();
            prop_assert!(is_lyap_member_closure(&spec, &combo, 1e-10).unwrap(), "ω = {}", w);
        }
    }

    #[test]
    fn plemma_sign_is_coordinate_free(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=2) {
        let mut g = rng(seed);
        let r = random_stable(n, m, false, &mut g);
        let h = random_pd(n, &mut g);
        let lmin = plemma_residual(&r, &h).unwrap().min_eigenvalue();
        prop_assume!(lmin.abs() > 1e-8);
        let t = ginibre(n, n, &mut g) + CMatrix::identity(n, n) * c(2.0);
        let ti = t.clone().try_inverse().unwrap();
        let moved = Realization::new(&ti * r.a() * &t, &ti * r.b(), r.c() * &t, r.d().clone()).unwrap();
        let hm = h.congruence(&t).unwrap();
        let lm = plemma_residual(&moved, &hm).unwrap().min_eigenvalue();
        prop_assert_eq!(lmin > 0.0, lm > 0.0);
    }

    #[test]
    fn classical_certificate_implies_axis_positivity(seed in any::<u64>(), rho in 0.1f64..0.9) {
        let mut g = rng(seed);
        let f = scaled_contraction(g.random_range(1..=3), g.random_range(1..=2), rho, false, &mut g).cayley().unwrap();
        let cert = search_h(&f, EtaParam::Infinity, &ClassifyOptions::default()).unwrap();
        prop_assert!(matches!(cert.verdict, Verdict::CertifiesP | Verdict::CertifiesSP | Verdict::CertifiesHP));
        for w in sweep_frequencies(true, &[]) .into_iter().step_by(16) {
            let v = f.eval_freq(w).unwrap();
            let herm = HermitianMatrix::new(&v + v.adjoint()).unwrap();
            prop_assert!(herm.min_eigenvalue() >= -1e-9);
        }
    }

    #[test]
    fn qmi_certificate_bounds_eta(seed in any::<u64>(), rho in 0.1f64..0.9, slack in 1e-3f64..0.5) {
        let mut g = rng(seed);
        let f = scaled_contraction(g.random_range(1..=3), g.random_range(1..=2), rho, false, &mut g).cayley().unwrap();
        let star = eta_of(&f, &ClassifyOptions::default()).unwrap().eta_star.unwrap();
        let eta = EtaParam::finite(star * (1.0 + slack)).unwrap();
        let cert = search_h(&f, eta, &ClassifyOptions::default()).unwrap();
        prop_assert!(cert.h.is_positive_definite(0.0));
        prop_assert!(qmi_residual(&f, &cert.h, eta).unwrap().min_eigenvalue() >= -1e-9);
        prop_assert!(star <= eta.value() + 1e-9);
    }

    #[test]
    fn linear_gain_matches_closed_loop(seed in any::<u64>(), frac in 0.0f64..1.0) {
        let mut g = rng(seed);
        let deg = g.random_range(1..=3);
        let roots: Vec<f64> = (0..deg).map(|_| -g.random_range(0.3..3.0)).collect();
        let num = Poly::new((0..deg).map(|_| g.random_range(-1.0..1.0)).collect());
        let plant = SisoRational::new(num, Poly::from_roots(&roots)).unwrap();
        prop_assume!(plant.degree() == deg);
        let sector = Sector::new(0.5, 3.0).unwrap();
        let gain = 0.5 + 2.5 * frac;
        let lp = LurieLoop::new(plant.clone(), sector, Nonlinearity::Linear { gain }).unwrap();
        let r = plant.to_realization().unwrap();
        let acl = closed_loop_matrix(&r, gain).unwrap();
        let abscissa = hyperreal::matcore::eigenvalues(&acl.map(|v| c(v))).unwrap().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(abscissa.abs() > 0.05);
        let x0: Vec<f64> = (0..deg).map(|_| g.random_range(-1.0..1.0)).collect();
        let tr = simulate_lurie(&lp, &x0, 60.0 / abscissa.abs(), None, 8).unwrap();
        let n0 = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if abscissa < 0.0 {
            prop_assert!(tr.final_norm < 1e-3 * n0);
        } else {
            prop_assert!(tr.diverged || tr.final_norm > n0);
        }
        let lti = criterion(&plant, &Sector::new(gain, gain).unwrap(), CriterionRoute::Classical, &ClassifyOptions::default()).unwrap();
        prop_assert_eq!(lti.criterion_holds, abscissa < 0.0);
    }
}
