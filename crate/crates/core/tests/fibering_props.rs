mod common;

use common::*;
use nehari_core::fibering::{analyze, DEGENERATE_BAND};
use nehari_core::{
    best_sobolev_constant, fibering_phi, find_nehari_scalings, m0_empty_certificate, project_to_branch, Branch,
    Exponents, NehariClass, Tolerances,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exponents_strategy() -> impl Strategy<Value = Exponents> {
    // p − q ≥ 0.25 keeps every root of these tuples inside the oracle's window
    (1.5f64..4.0, 0.0f64..1.0, 0.5f64..4.0).prop_map(|(p, qf, gap)| {
        let q = 1.1 + qf * (p - 1.35);
        // r, s > p with r + s = 2p + gap
        let rs = 2.0 * p + gap;
        Exponents::new(p, q, rs / 2.0, rs / 2.0).unwrap()
    })
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn signed(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (log_uniform(lo, hi), any::<bool>()).prop_map(|(x, neg)| if neg { -x } else { x })
}

fn check_against_oracle(e: &Exponents, k: f64, a: f64, b: f64) -> Result<(), TestCaseError> {
    let analysis = analyze(e, k, a, b).unwrap();
    if let Some(m) = analysis.m_max {
        prop_assume!((a - m).abs() > 1e-6 * m.abs().max(a.abs()));
    }
    let oracle = sign_scan_roots(e.p, e.q, e.rs(), k, a, b, 100_000);
    prop_assert_eq!(analysis.roots.len(), oracle.len(), "K={} A={} B={} {:?}", k, a, b, e);
    for (root, t) in analysis.roots.iter().zip(&oracle) {
        prop_assert!(relative(root.t, *t) <= 1e-6, "{} vs {}", root.t, t);
    }
    if analysis.roots.len() == 2 {
        prop_assert_eq!(analysis.roots[0].branch, NehariClass::Plus);
        prop_assert_eq!(analysis.roots[1].branch, NehariClass::Minus);
    }
    // branch label matches the pairing sign of the scaled quantities
    for root in &analysis.roots {
        let t = root.t;
        let pairing = (e.p - e.q) * a * t.powf(e.q) + (e.p - e.rs()) * b * t.powf(e.rs());
        match root.branch {
            NehariClass::Plus => prop_assert!(pairing > 0.0),
            NehariClass::Minus => prop_assert!(pairing < 0.0),
            _ => {}
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roots_match_sign_scan_t1(k in log_uniform(1e-2, 1e2), a in signed(1e-2, 1e2), b in signed(1e-2, 1e2)) {
        check_against_oracle(&t1_exponents(), k, a, b)?;
    }

    #[test]
    fn roots_match_sign_scan_random_exponents(e in exponents_strategy(), k in log_uniform(1e-2, 1e2), a in signed(1e-2, 1e2), b in signed(1e-2, 1e2)) {
        check_against_oracle(&e, k, a, b)?;
    }

    #[test]
    fn link_identity(seed in any::<u64>(), t in log_uniform(1e-3, 1e3)) {
        let params = t2(31);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(params.mesh(), &mut rng);
        let d = params.nehari_quantities(&pair).unwrap();
        let (_, dphi) = fibering_phi(params.exponents(), &d, t).unwrap();
        let scaled = params.nehari_quantities(&pair.scaled(t)).unwrap();
        prop_assert!((t * dphi - scaled.constraint).abs() <= 1e-10 * scaled.scale());
    }

    #[test]
    fn phi_at_one_is_the_energy(seed in any::<u64>()) {
        let params = t1(31);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(params.mesh(), &mut rng);
        let d = params.nehari_quantities(&pair).unwrap();
        let (phi, _) = fibering_phi(params.exponents(), &d, 1.0).unwrap();
        prop_assert!(relative(phi, params.energy(&pair).unwrap()) <= 1e-12);
    }

    #[test]
    fn projection_lands_on_requested_branch(seed in any::<u64>()) {
        let params = t1(41);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(params.mesh(), &mut rng);
        let tol = Tolerances::default();
        for branch in [Branch::Plus, Branch::Minus] {
            let projected = project_to_branch(&params, &pair, branch).unwrap();
            prop_assert_eq!(params.classify(&projected, tol.manifold, tol.zero).unwrap(), NehariClass::from(branch));
        }
    }
}

#[test]
fn degenerate_band_flips_root_count() {
    let e = t1_exponents();
    let (k, b) = (1.0, 1.0);
    let m = analyze(&e, k, 0.0, b).unwrap().m_max.unwrap();
    let inside = [m * (1.0 - 0.5 * DEGENERATE_BAND), m * (1.0 + 0.5 * DEGENERATE_BAND)];
    for a in inside {
        let roots = analyze(&e, k, a, b).unwrap().roots;
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].branch, NehariClass::Zero);
    }
    for factor in [1e-8, 1e-6, 1e-3] {
        let below = analyze(&e, k, m * (1.0 - factor), b).unwrap().roots;
        assert_eq!(below.len(), 2);
        assert!(below.iter().all(|r| r.branch != NehariClass::Zero));
        assert!(analyze(&e, k, m * (1.0 + factor), b).unwrap().roots.is_empty());
    }
}

#[test]
fn certificate_is_sound_for_random_directions() {
    let params = t1(101);
    let e = params.exponents();
    let s_q = best_sobolev_constant(params.mesh(), e.p, e.q).unwrap().value;
    let s_rs = best_sobolev_constant(params.mesh(), e.p, e.rs()).unwrap().value;
    let cert = m0_empty_certificate(&params, s_rs, s_q, 0.1, 0.1).unwrap();
    assert!(cert.certified);
    let half = cert.lambda0 / 2.0;
    assert!(cert.is_certified_at(half, half));
    assert!(!cert.is_certified_at(1.01 * cert.lambda0, 1.01 * cert.lambda0));
    let at_half = params.with_lambda_mu(half, half).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tol = Tolerances::default();
    for _ in 0..1000 {
        let pair = random_pair(at_half.mesh(), &mut rng);
        let branch = if rng.gen_bool(0.5) { Branch::Plus } else { Branch::Minus };
        // below the threshold every positive direction has both scalings
        let projected = project_to_branch(&at_half, &pair, branch).unwrap();
        let d = at_half.nehari_quantities_with(&projected, tol).unwrap();
        assert_ne!(d.branch, NehariClass::Zero);
        let analysis = find_nehari_scalings(at_half.exponents(), &d).unwrap();
        assert!(analysis.a < analysis.m_max.unwrap());
    }
}

#[test]
fn doubling_h_scales_the_lower_bound() {
    let params = t1(51);
    let doubled = nehari_core::ProblemParams::new(
        params.mesh().clone(),
        *params.exponents(),
        0.1,
        0.1,
        params.f().clone(),
        params.g().clone(),
        params.h().scaled(2.0),
    )
    .unwrap();
    let a = m0_empty_certificate(&params, 20.0, 8.0, 0.1, 0.1).unwrap();
    let b = m0_empty_certificate(&doubled, 20.0, 8.0, 0.1, 0.1).unwrap();
    let rs = params.exponents().rs();
    let expected = 2f64.powf(-1.0 / (rs - params.exponents().p));
    assert!(relative(b.lower_bound / a.lower_bound, expected) < 1e-14);
}

#[test]
fn vanishing_parameters_are_certified() {
    let params = t1(51);
    let cert = m0_empty_certificate(&params, 20.0, 8.0, 1e-12, 1e-12).unwrap();
    assert!(cert.upper_bound < 1e-10 * cert.lower_bound);
    assert!(cert.certified);
    assert!(m0_empty_certificate(&params, 0.0, 8.0, 0.1, 0.1).is_err());
    assert!(m0_empty_certificate(&params, 20.0, -1.0, 0.1, 0.1).is_err());
}
