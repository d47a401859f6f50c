//! Cross-module property tests: structural invariants that should hold for
//! arbitrary parameters, not just the handpicked values of the unit tests.

use proptest::prelude::*;

use kzk::config::RunConfig;
use kzk::diagnostics::decay_constants;
use kzk::eigenbasis::{BcFamily, EigenBasis};
use kzk::inequality::{
    generate_ensemble, interpolation_exponent, interpolation_ratio, EnsembleSpec, LabGrid,
    ProfileKind, Term, TestFunction,
};
use kzk::weights::WeightSpec;

fn term() -> impl Strategy<Value = Term> {
    let profile = prop_oneof![
        (1.0..10.0f64, 0.6..2.5f64).prop_map(|(center, width)| ProfileKind::Gaussian {
            center,
            width
        }),
        (0.4..1.2f64).prop_map(|rate| ProfileKind::Exponential { rate }),
    ];
    (-1.0..1.0f64, 0usize..4, profile).prop_map(|(amp, mode, profile)| Term { amp, mode, profile })
}

fn test_function() -> impl Strategy<Value = TestFunction> {
    (
        proptest::collection::vec(term(), 1..=3),
        proptest::option::of(0.5..2.0f64),
    )
        .prop_map(|(terms, vanish_delta)| TestFunction { terms, vanish_delta })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn interpolation_ratios_are_scale_invariant(
        tf in test_function(),
        log_scale in -6.0..6.0f64,
        pair_idx in 0usize..5,
    ) {
        let (m, q) = [(0usize, 2.0), (0, 4.0), (0, f64::INFINITY), (1, 2.0), (1, 6.0)][pair_idx];
        let basis = EigenBasis::new(BcFamily::Dirichlet, 1.0, 4).unwrap();
        let lab = LabGrid::new(12.0, 121, 17);
        let psi1 = WeightSpec::exponential(0.2).unwrap();
        let psi2 = WeightSpec::unit();
        let ratio_of = |f: &TestFunction| {
            interpolation_ratio(
                m, q, &psi1, &psi2, 1.0, &lab,
                |x, y| f.eval(&basis, x, y),
                |x, y| f.dx(&basis, x, y),
                |x, y| f.dxx(&basis, x, y),
                |x, y| f.dy(&basis, x, y),
            ).unwrap()
        };
        let base = ratio_of(&tf);
        let scaled = ratio_of(&tf.scaled(10.0f64.powf(log_scale)));
        prop_assert!((base - scaled).abs() <= 1e-10 * base.max(1.0),
            "ratio moved from {base} to {scaled}");
    }
}

proptest! {
    #[test]
    fn interpolation_exponents_are_bounded_and_monotone(
        m in 0usize..2,
        q_lo in 2.0..6.0f64,
        dq in 0.0..3.0f64,
    ) {
        let cap = if m == 1 { 6.0 } else { f64::INFINITY };
        let q1 = q_lo.min(cap);
        let q2 = (q_lo + dq).min(cap);
        let s1 = interpolation_exponent(m, q1).unwrap();
        let s2 = interpolation_exponent(m, q2).unwrap();
        prop_assert!((0.0..=0.5 + 1e-12).contains(&s1));
        prop_assert!(s2 >= s1 - 1e-12, "s must grow with q: s({q1}) = {s1}, s({q2}) = {s2}");
    }

    #[test]
    fn config_toml_round_trips(
        b in -3.0..3.0f64,
        length in 0.2..4.0f64,
        x_max in 2.0..60.0f64,
        nx in 11usize..2000,
        dt in 1e-5..1e-1f64,
        amplitude in -2.0..2.0f64,
        cadence in 1usize..500,
        seed in any::<u32>(),
    ) {
        let mut cfg = RunConfig::default();
        cfg.equation.b = b;
        cfg.domain.length = length;
        cfg.domain.x_max = x_max;
        cfg.discretization.nx = nx;
        cfg.discretization.dt = dt;
        cfg.initial.amplitude = amplitude;
        cfg.output.cadence = cadence;
        cfg.output.seed = seed;
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn decay_constants_satisfy_their_defining_relations(
        kappa_idx in 0usize..2,
        length in 0.2..3.0f64,
        b in 0.0..2.0f64,
    ) {
        let kappa = [1.0, 4.0][kappa_idx];
        let c = decay_constants(kappa, length, b).unwrap();
        let pi = std::f64::consts::PI;
        prop_assert!((c.beta - pi * pi / (10.0 * kappa * length * length)).abs() <= 1e-12 * c.beta);
        // The weight exponent satisfies its defining budget, close to sharply.
        let budget = |a: f64| 8.0 * a * a + 32.0 * a.powi(4);
        prop_assert!(c.alpha0 > 0.0);
        prop_assert!(c.alpha0 <= 0.1f64.sqrt() + 1e-12);
        prop_assert!(budget(c.alpha0) <= c.beta + 1e-9);
        let capped = (c.alpha0 - 0.1f64.sqrt()).abs() < 1e-12;
        prop_assert!(capped || budget(1.01 * c.alpha0) > c.beta,
            "alpha0 = {} is not maximal for beta = {}", c.alpha0, c.beta);
        // Wider strips decay slower but the threshold width is b-only.
        if b > 0.0 {
            let l0 = c.l0.unwrap();
            prop_assert!((l0 - pi / (20.0 * kappa * b).sqrt()).abs() <= 1e-12 * l0);
        } else {
            prop_assert!(c.l0.is_none());
        }
    }

    #[test]
    fn ensembles_are_deterministic_and_respect_the_trace_flag(
        seed in any::<u64>(),
        vanish in any::<bool>(),
    ) {
        let basis = EigenBasis::new(BcFamily::Dirichlet, 1.0, 4).unwrap();
        let spec = EnsembleSpec { size: 8, seed, max_terms: 3, vanish_at_zero: vanish };
        let a = generate_ensemble(&basis, &spec);
        let b = generate_ensemble(&basis, &spec);
        prop_assert_eq!(a.len(), 8);
        for (fa, fb) in a.iter().zip(&b) {
            for i in 0..5 {
                let (x, y) = (0.7 * i as f64, 0.13 + 0.2 * (i as f64 / 5.0));
                let va = fa.eval(&basis, x, y);
                prop_assert!(va.is_finite());
                prop_assert_eq!(va.to_bits(), fb.eval(&basis, x, y).to_bits());
            }
            if vanish {
                prop_assert_eq!(fa.eval(&basis, 0.0, 0.37), 0.0);
            }
        }
    }
}
