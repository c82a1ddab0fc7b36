use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symflow_core::algebra::{apply_word, translation_pair, G1Flow};
use symflow_core::fvsolver::{step, Boundary, GridState};
use symflow_core::hodograph::invert_point;
use symflow_core::reduce::{case_ii_state, reduced_rhs_case_ii};
use symflow_core::*;

fn flow() -> impl Strategy<Value = G1Flow> {
    prop_oneof![
        Just(G1Flow::Dilation),
        Just(G1Flow::TimeTranslation),
        Just(G1Flow::SpaceTranslation),
        Just(G1Flow::Boost),
    ]
}

/// Elements with a random zero pattern so every class is exercised.
fn g1_element() -> impl Strategy<Value = G1Element> {
    (prop::array::uniform4(-2.0..2.0f64), 1u8..16).prop_map(|(a, mask)| {
        let mut a = a;
        for (i, v) in a.iter_mut().enumerate() {
            if mask & (1 << i) == 0 {
                *v = 0.0;
            } else if v.abs() < 0.1 {
                *v += 0.5;
            }
        }
        G1Element { a }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn manifold_jets_have_zero_residual(seed in any::<u64>(), hm in 0.0..3.0f64, g in 0.5..2.0f64) {
        let params = FluidParams::new(hm, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jet = sample_manifold_jet(&mut rng, &params, &SamplingBox::default()).unwrap();
        let (r1, r2) = mswe_residual(&jet, &params).unwrap();
        prop_assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
    }

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(
        c in prop::array::uniform4(-1.0..1.0f64),
        lambda in -3.0..3.0f64,
        t in 0.5..2.0f64, x in -1.0..1.0f64, u in -1.0..1.0f64, h in 0.5..2.0f64,
    ) {
        let v = VectorFieldSpec::linear("v", vec![
            (c[0], VectorFieldSpec::dilation()),
            (c[1], VectorFieldSpec::galilean_boost()),
        ]);
        let w = VectorFieldSpec::linear("w", vec![
            (c[2], VectorFieldSpec::time_translation()),
            (c[3], VectorFieldSpec::swe_dilation()),
        ]);
        let z = VectorFieldSpec::from_pair(&translation_pair(0.3, -0.7));
        let p = [t, x, u, h];
        let vw = lie_bracket(&v, &w, p).unwrap();
        let wv = lie_bracket(&w, &v, p).unwrap();
        let sum = VectorFieldSpec::linear("v+lz", vec![(1.0, v.clone()), (lambda, z.clone())]);
        let lhs = lie_bracket(&sum, &w, p).unwrap();
        let vz = lie_bracket(&z, &w, p).unwrap();
        for i in 0..4 {
            prop_assert!((vw[i] + wv[i]).abs() < 1e-9);
            prop_assert!((lhs[i] - vw[i] - lambda * vz[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn g1_normal_form_is_orbit_invariant(
        v in g1_element(),
        word in prop::collection::vec((flow(), -2.0..2.0f64), 0..6),
        s1 in any::<bool>(),
        s2 in any::<bool>(),
    ) {
        let mut w = apply_word(&v, &word);
        if s1 { w = w.s1(); }
        if s2 { w = w.s2(); }
        let a = normalize_g1(&v).unwrap();
        let b = normalize_g1(&w).unwrap();
        // Continuous flows and S1 fix the label; S2 reverses the sign of a.
        let expected = match (a.clone(), s2) {
            (CanonicalClass::DPlusAG(x), true) => CanonicalClass::DPlusAG(-x),
            (c, _) => c,
        };
        prop_assert!(expected.approx_eq(&b), "{a:?} vs {b:?}");
    }

    #[test]
    fn g1_normal_form_is_idempotent_and_span_invariant(v in g1_element(), lambda in 0.1..5.0f64, neg in any::<bool>()) {
        let class = normalize_g1(&v).unwrap();
        let rep = class.representative_g1().unwrap();
        prop_assert!(normalize_g1(&rep).unwrap().approx_eq(&class));
        let lambda = if neg { -lambda } else { lambda };
        prop_assert!(normalize_g1(&v.scaled(lambda)).unwrap().approx_eq(&class));
        let full = normalize_g(&v.to_algebra()).unwrap();
        let full_scaled = normalize_g(&v.scaled(lambda).to_algebra()).unwrap();
        prop_assert!(full.approx_eq(&full_scaled));
    }

    #[test]
    fn case_i_rhs_solves_the_reduced_pair(a in -2.0..2.0f64, p in -1.0..1.0f64, u in -1.0..1.0f64, h in 0.2..2.0f64) {
        let params = FluidParams::default();
        let s = ReducedState { p, u_tilde: u, h_tilde: h };
        match reduced_rhs_case_i(a, &params, s) {
            Ok((du, dh)) => {
                let (r1, r2) = ReducedSystem::CaseI { a }.residual(&params, s, du, dh);
                let scale = 1.0 + du.abs() + dh.abs();
                prop_assert!(r1.abs() < 1e-12 * scale && r2.abs() < 1e-12 * scale);
            }
            Err(Error::SonicPoint { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn case_ii_closed_form_solves_its_system(c1 in -2.0..2.0f64, c2 in 0.1..2.0f64, p in 0.2..3.0f64) {
        let s = case_ii_state(c1, c2, p);
        let (du, dh) = reduced_rhs_case_ii(s).unwrap();
        prop_assert!((du + c1 / (p * p)).abs() < 1e-12 && (dh + c2 / (p * p)).abs() < 1e-12);
        let gal = galilean_solution(c1, c2).unwrap();
        let lifted = lift_case_ii(c1, c2).unwrap();
        let (a, b) = (gal.eval(p, 0.3).unwrap(), lifted.eval(p, 0.3).unwrap());
        prop_assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
    }

    #[test]
    fn sonic_points_are_never_crossed(a in prop_oneof![-2.0..-0.1f64, 0.1..2.0f64], u0 in -1.5..1.5f64, h0 in 0.3..1.5f64) {
        let params = FluidParams::default();
        let opts = IntegrationOptions { max_step: 0.05, ..IntegrationOptions::default() };
        if let Ok(tr) = integrate_case_i(a, &params, 0.0, (u0, h0), 2.0, opts) {
            let sys = tr.system();
            let sign = sys.discriminant(&params, tr.nodes()[0]).signum();
            prop_assert!(tr.nodes().iter().all(|s| sys.discriminant(&params, *s).signum() == sign));
        }
    }

    #[test]
    fn simple_pairs_roundtrip(c1 in 0.2..1.0f64, c3 in -1.0..1.0f64, u in -0.8..0.8f64, h in 0.6..1.8f64) {
        let params = FluidParams::default();
        let pair = simple_pair([c1, 1.0, c3, 0.0, 0.0], &params).unwrap();
        let j = pair.jacobian(u, h).unwrap();
        prop_assume!(j.abs() > 1e-2);
        let v = pair.eval(u, h).unwrap();
        let (ru, rh) = invert_point(&pair, v.f, v.g, (u + 1e-3, h - 1e-3), 1e-13).unwrap();
        prop_assert!((ru - u).abs() < 1e-9 && (rh - h).abs() < 1e-9);
    }

    #[test]
    fn periodic_steps_conserve_mass(amp in 0.0..0.4f64, k in 1u32..4, cfl in 0.05..0.9f64) {
        let params = FluidParams::default();
        let wave = SolutionField::analytic(Rect::new(0.0, 1.0, 0.0, 1.0).unwrap(), "wave", move |_t, x| {
            let s = x.scale(std::f64::consts::TAU * f64::from(k)).sin();
            (s.scale(amp), &s.scale(0.5 * amp) + 1.0)
        });
        let mut gs = GridState::from_field(&wave, 0.0, 0.0, 1.0, 64).unwrap();
        for _ in 0..20 {
            let m0 = gs.mass();
            gs = step(&gs, &params, cfl, &Boundary::Periodic).unwrap();
            prop_assert!((gs.mass() - m0).abs() < 1e-12);
        }
    }
}
