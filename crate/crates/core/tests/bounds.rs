use proptest::prelude::*;
use unext::channel::{geo_unext_ent_channel, j_min_channel, smooth_min_unext_ent_channel};
use unext::closed_form::{f_bound, relaxed_alg, relaxed_td, zero_threshold};
use unext::quantum::random::{random_channel, random_density, random_one_way_locc, rng};
use unext::quantum::{
    erased_state, erasure_channel, identity_channel, isotropic, max_entangled, BipartiteState, Subsystem,
};
use unext::quantum::apply_channel;
use unext::state::{j_min, max_unext_ent, smooth_min_unext_ent, DEFAULT_TOL};

const TOL: f64 = DEFAULT_TOL;

fn random_two_qubit(seed: u64, rank: usize) -> BipartiteState {
    let mut r = rng(seed);
    BipartiteState::new(random_density(4, rank, &mut r), 2, 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn smooth_min_lies_in_its_range(seed in 0u64..10_000, rank in 1usize..5, eps in 0.0f64..0.5) {
        let rho = random_two_qubit(seed, rank);
        let e = smooth_min_unext_ent(&rho, eps, TOL).unwrap();
        let lo = -0.5 * (1.0 - eps).log2();
        let hi = 1.0 + lo;
        prop_assert!(e >= lo - 1e-6 && e <= hi + 1e-6, "E = {e} outside [{lo}, {hi}]");
    }

    #[test]
    fn one_way_locc_does_not_increase_smooth_min(seed in 0u64..10_000, eps in 0.0f64..0.3) {
        let rho = random_two_qubit(seed, 2);
        let mut r = rng(seed ^ 0xabcd);
        let locc = random_one_way_locc(2, 2, 2, 2, &mut r);
        let before = smooth_min_unext_ent(&rho, eps, TOL).unwrap();
        let after = smooth_min_unext_ent(&locc.apply(&rho).unwrap(), eps, TOL).unwrap();
        prop_assert!(after <= before + 1e-6, "{after} > {before}");
    }

    #[test]
    fn smooth_min_is_nondecreasing_in_eps(seed in 0u64..10_000, e1 in 0.0f64..0.4, de in 0.0f64..0.2) {
        let rho = random_two_qubit(seed, 3);
        let a = smooth_min_unext_ent(&rho, e1, TOL).unwrap();
        let b = smooth_min_unext_ent(&rho, e1 + de, TOL).unwrap();
        prop_assert!(b >= a - 1e-6);
    }

    #[test]
    fn relaxations_are_looser(j in 0.0f64..1.0, eps in 0.0f64..0.5) {
        prop_assume!(j > eps);
        let f = f_bound(j, eps).unwrap();
        prop_assert!(relaxed_alg(j, eps).unwrap() >= f - 1e-12);
        if let Some(td) = relaxed_td(j, eps) {
            prop_assert!(td >= f - 1e-12, "td {td} < f {f}");
        }
    }

    #[test]
    fn choi_state_never_exceeds_channel(seed in 0u64..10_000, eps in 0.0f64..0.3) {
        let mut r = rng(seed);
        let ch = random_channel(2, 2, 2, &mut r);
        let e_ch = smooth_min_unext_ent_channel(&ch, eps, TOL).unwrap();
        let e_st = smooth_min_unext_ent(&ch.choi_state(), eps, TOL).unwrap();
        prop_assert!(e_st <= e_ch + 1e-6, "state {e_st} > channel {e_ch}");
        let e_id = smooth_min_unext_ent_channel(&identity_channel(2).unwrap(), eps, TOL).unwrap();
        prop_assert!(e_ch <= e_id + 1e-6);
        prop_assert!(e_ch >= -0.5 * (1.0 - eps).log2() - 1e-6);
    }
}

#[test]
fn isotropic_smooth_min_is_monotone_in_fidelity() {
    let mut prev = f64::INFINITY;
    for k in (10..=20).rev() {
        let f = f64::from(k) / 20.0;
        let e = smooth_min_unext_ent(&isotropic(f, 2).unwrap(), 0.05, TOL).unwrap();
        assert!(e <= prev + 1e-7, "F = {f}: {e} > {prev}");
        prev = e;
    }
}

#[test]
fn max_measure_is_additive_on_product_pairs() {
    let pairs = [(0.9, 0.8), (1.0, 0.7), (0.95, 0.95)];
    for (f1, f2) in pairs {
        let (a, b) = (isotropic(f1, 2).unwrap(), isotropic(f2, 2).unwrap());
        let ea = max_unext_ent(&a, TOL).unwrap();
        let eb = max_unext_ent(&b, TOL).unwrap();
        let eab = max_unext_ent(&a.tensor(&b), TOL).unwrap();
        assert!((eab - ea - eb).abs() < 1e-5, "({f1}, {f2}): {eab} vs {}", ea + eb);
    }
}

#[test]
fn max_measure_dominates_smooth_min_at_zero_eps() {
    for seed in 0..5 {
        let rho = random_two_qubit(seed, 2);
        let smooth = smooth_min_unext_ent(&rho, 0.0, TOL).unwrap();
        let max = max_unext_ent(&rho, TOL).unwrap();
        assert!(smooth <= max + 1e-6, "seed {seed}: {smooth} > {max}");
    }
}

#[test]
fn erased_state_matches_erasure_channel_choi() {
    for p in [0.1, 0.3] {
        let state = erased_state(p, 2).unwrap();
        let ch = erasure_channel(p, 2).unwrap();
        let via_choi = apply_channel(&ch, &max_entangled(2).unwrap(), Subsystem::B).unwrap();
        let diff = state.matrix() - via_choi.matrix();
        assert!(diff.iter().all(|z| z.norm() < 1e-12));
        let js = j_min(&state, 0.05, TOL).unwrap();
        let jc = j_min_channel(&ch, 0.05, TOL).unwrap();
        assert!(js >= jc - 1e-6, "p = {p}: state J {js} < channel J {jc}");
    }
}

#[test]
fn zero_regime_for_two_extendible_inputs() {
    for f in [0.5, 0.6, 0.625] {
        let j = j_min(&isotropic(f, 2).unwrap(), 0.05, TOL).unwrap();
        assert!(j > zero_threshold(0.05).unwrap(), "F = {f}: J = {j}");
    }
}

#[test]
fn geometric_measure_decreases_along_the_ladder() {
    let ch = erasure_channel(0.2, 2).unwrap();
    let es: Vec<f64> = (0..4).map(|ell| geo_unext_ent_channel(&ch, ell, TOL).unwrap()).collect();
    for w in es.windows(2) {
        assert!(w[1] <= w[0] + 1e-7, "{es:?}");
    }
    let id = geo_unext_ent_channel(&identity_channel(2).unwrap(), 1, TOL).unwrap();
    assert!(es[1] <= id + 1e-6);
}

#[test]
fn zero_eps_is_the_small_eps_limit() {
    for seed in 0..12u64 {
        let mut r = rng(seed);
        let rho = BipartiteState::new(random_density(4, 1 + seed as usize % 3, &mut r), 2, 2).unwrap();
        let ch = random_channel(2, 2, 1 + seed as usize % 3, &mut r);
        let pairs = [
            (j_min(&rho, 0.0, TOL).unwrap(), j_min(&rho, 1e-6, TOL).unwrap()),
            (j_min_channel(&ch, 0.0, TOL).unwrap(), j_min_channel(&ch, 1e-6, TOL).unwrap()),
        ];
        for (j0, j_small) in pairs {
            assert!(j_small <= j0 + 1e-7, "seed {seed}: J(1e-6) = {j_small} > J(0) = {j0}");
            assert!(j0 - j_small < 5e-3, "seed {seed}: J(0) = {j0}, J(1e-6) = {j_small}");
        }
    }
}
