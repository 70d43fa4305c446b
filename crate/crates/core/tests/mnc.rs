use hilfer::equation::example_alpha_equation;
use hilfer::mnc::{
    certificate_inequality_check, contraction_steps, darbo_iterate, ensemble_modulus,
    mnc_axiom_checks, mnc_estimate, modulus_of_continuity, random_ensemble, DarboConfig, Tolerance,
};
use hilfer::solvability::certify;
use hilfer::{
    ContractionCertificate, EquationOperator, FunctionEnsemble, GridFunction, Quadrature,
    SolvabilityOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pl(rng: &mut ChaCha8Rng) -> GridFunction {
    let n = rng.gen_range(2..40);
    let mut nodes: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..3.0)).collect();
    nodes.extend([1.0, 3.0]);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    GridFunction::from_fn(nodes, |_| rng.gen_range(-2.0..2.0)).unwrap()
}

#[test]
fn modulus_monotone_and_subadditive() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let f = random_pl(&mut rng);
        let d1: f64 = rng.gen_range(0.01..1.0);
        let d2: f64 = rng.gen_range(0.01..1.0);
        let m1 = modulus_of_continuity(&f, d1).unwrap();
        let m2 = modulus_of_continuity(&f, d2).unwrap();
        let m12 = modulus_of_continuity(&f, d1 + d2).unwrap();
        let (lo, hi) = if d1 <= d2 { (m1, m2) } else { (m2, m1) };
        assert!(lo <= hi, "not monotone: {lo} > {hi}");
        assert!(
            m12 <= m1 + m2 + 1e-12,
            "not subadditive: {m12} > {m1} + {m2}"
        );
    }
}

#[test]
fn axioms_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let nodes = GridFunction::uniform_nodes(3.0, 41);
    let deltas = [0.5, 0.25, 0.125, 0.0625];
    for _ in 0..100 {
        let e2 = random_ensemble(&nodes, rng.gen_range(2..8), 1.0, None, &mut rng).unwrap();
        let cut = rng.gen_range(1..=e2.len());
        let e1 = FunctionEnsemble::new(e2.members()[..cut].to_vec()).unwrap();
        let mix: f64 = rng.gen_range(0.0..=1.0);
        let r = mnc_axiom_checks(&e1, &e2, mix, &deltas, 1e-12).unwrap();
        assert!(r.monotonicity.unwrap().passed);
        assert!(r.convexity.passed, "{r:?}");

        let est = mnc_estimate(&e2, &deltas).unwrap();
        assert_eq!(est.hausdorff, est.mu0 / 2.0);
        assert!(est.mu0 >= 0.0);
    }
}

#[test]
fn lipschitz_ensembles_are_bounded_by_l_delta() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let nodes = GridFunction::uniform_nodes(3.0, 201);
    let e = random_ensemble(&nodes, 50, 2.0, Some(0.7), &mut rng).unwrap();
    for d in [0.01, 0.05, 0.3, 1.0] {
        assert!(ensemble_modulus(&e, d).unwrap() <= 0.7 * d + 1e-12);
    }
}

#[test]
fn darbo_on_the_example_contracts() {
    let gk = Some(2.4047);
    let eq = example_alpha_equation(gk).unwrap();
    let cert = certify(&eq, &SolvabilityOptions::default().with_gamma_k(gk)).unwrap();
    let factor = cert.contraction_factor(0.83);
    let nodes = GridFunction::uniform_nodes(3.0, 101);
    let op = EquationOperator::new(&eq, &nodes, &Quadrature::default()).unwrap();
    let cc = ContractionCertificate::from_factor(factor).unwrap();
    for rep in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(rep);
        let seed = random_ensemble(&nodes, 30, 0.1, Some(1.0), &mut rng).unwrap();
        let cfg = DarboConfig {
            p_max: 8,
            convex_samples: 10,
            deltas: vec![0.4, 0.2, 0.1, 0.05],
            seed: rep,
        };
        let trace = darbo_iterate(|f: &GridFunction| op.apply(f), &seed, &cfg).unwrap();
        assert!(contraction_steps(&trace, factor, 0.05, Tolerance::Strict)
            .iter()
            .all(|s| s.passed));
        assert!(
            certificate_inequality_check(&cc, &trace, 0.05, Tolerance::Strict)
                .iter()
                .all(|s| s.passed)
        );
    }
}

#[test]
fn constant_seed_gives_a_flat_zero_trace() {
    let eq = example_alpha_equation(None).unwrap();
    let nodes = GridFunction::uniform_nodes(3.0, 51);
    let op = EquationOperator::new(&eq, &nodes, &Quadrature::uniform(256)).unwrap();
    let seed = FunctionEnsemble::new(
        (0..5)
            .map(|i| GridFunction::constant(nodes.clone(), 0.0 * i as f64).unwrap())
            .collect(),
    )
    .unwrap();
    let cfg = DarboConfig {
        p_max: 3,
        convex_samples: 4,
        deltas: vec![0.4, 0.2, 0.1],
        seed: 1,
    };
    let trace = darbo_iterate(|f: &GridFunction| op.apply(f), &seed, &cfg).unwrap();
    assert!(trace.mu0().iter().all(|&m| m == 0.0));
}

#[test]
fn trace_is_independent_of_thread_count() {
    let eq = example_alpha_equation(None).unwrap();
    let nodes = GridFunction::uniform_nodes(3.0, 51);
    let op = EquationOperator::new(&eq, &nodes, &Quadrature::uniform(256)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let seed = random_ensemble(&nodes, 12, 0.1, None, &mut rng).unwrap();
    let cfg = DarboConfig {
        p_max: 4,
        convex_samples: 5,
        deltas: vec![0.4, 0.2, 0.1],
        seed: 17,
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| darbo_iterate(|f: &GridFunction| op.apply(f), &seed, &cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}
