use hilfer::equation::{example_alpha_equation, example_system};
use hilfer::solvability::{certify, contraction_factor};
use hilfer::solver::{solve, solve_system, solve_with};
use hilfer::{
    EquationOperator, EquationSpec, FracParams, GridFunction, Nonlinearity, Quadrature,
    SolvabilityOptions, SolveOptions,
};

fn nodes(n: usize) -> Vec<f64> {
    GridFunction::uniform_nodes(3.0, n)
}

#[test]
fn example_decays_geometrically_for_both_constants() {
    for gk in [Some(2.4047), None] {
        let eq = example_alpha_equation(gk).unwrap();
        let seed = GridFunction::constant(nodes(101), 0.5).unwrap();
        let r = solve(&eq, &seed, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.solution.sup_norm() <= 1e-8);
        let bound = contraction_factor(&eq, 0.5, gk) + 0.05;
        assert!(
            r.measured_rate <= bound,
            "{gk:?}: rate {} > {bound}",
            r.measured_rate
        );
        for w in r.sup_distances.windows(2).skip(1) {
            assert!(w[1] <= bound * w[0]);
        }
    }
}

#[test]
fn iterates_stay_in_the_certified_ball() {
    let eq = example_alpha_equation(Some(2.4047)).unwrap();
    let cert = certify(
        &eq,
        &SolvabilityOptions::default().with_gamma_k(Some(2.4047)),
    )
    .unwrap();
    let r0 = 0.83;
    assert!(cert.maps_ball_into_itself(r0));
    let seed = GridFunction::from_fn(nodes(81), |t| r0 * (2.0 * t).cos()).unwrap();
    let r = solve(
        &eq,
        &seed,
        &SolveOptions {
            radius: Some(r0),
            ..SolveOptions::default()
        },
    )
    .unwrap();
    assert!(r.warnings.is_empty());
    assert!(r.trace.iter().all(|rec| rec.sup_norm <= r0 + 1e-9));
}

#[test]
fn linear_fixed_point_two_x() {
    let eq = EquationSpec {
        params: FracParams::new(0.5, 0.5, 0.5, 3.0).unwrap(),
        f: Nonlinearity::parse("a/2 + x", 0.5, false).unwrap(),
        psi: Nonlinearity::parse("0", 0.0, true).unwrap(),
        g: Nonlinearity::parse("a", 1.0, true).unwrap(),
    };
    let tol = 1e-10;
    let seed = GridFunction::constant(nodes(51), 1.0).unwrap();
    let r = solve(
        &eq,
        &seed,
        &SolveOptions {
            tol,
            ..SolveOptions::default()
        },
    )
    .unwrap();
    assert!(r.converged);
    assert!(r.residual <= tol);
    let err = r
        .solution
        .nodes()
        .iter()
        .zip(r.solution.values())
        .map(|(x, v)| (v - 2.0 * x).abs())
        .fold(0.0, f64::max);
    assert!(err <= 10.0 * tol, "{err:e}");
}

fn inhomogeneous() -> EquationSpec {
    EquationSpec {
        params: FracParams::new(1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 3.0).unwrap(),
        f: Nonlinearity::parse("abs(a)/6 + sin(x)/4", 1.0 / 6.0, false).unwrap(),
        psi: Nonlinearity::parse("1/4", 0.0, false).unwrap(),
        g: Nonlinearity::parse("a/(3+log(x))", 1.0 / 3.0, true).unwrap(),
    }
}

#[test]
fn grid_refinement_is_stable() {
    let eq = inhomogeneous();
    let quad = Quadrature::default();
    let coarse = solve(
        &eq,
        &GridFunction::constant(nodes(51), 0.0).unwrap(),
        &SolveOptions::default(),
    )
    .unwrap();
    let fine = solve(
        &eq,
        &GridFunction::constant(nodes(101), 0.0).unwrap(),
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(coarse.converged && fine.converged);
    assert!(coarse.solution.sup_norm() > 0.1);

    // consistency error: the fine operator applied to the coarse solution
    let fine_op = EquationOperator::new(&eq, &nodes(101), &quad).unwrap();
    let lifted = coarse.solution.resample(nodes(101)).unwrap();
    let consistency = fine_op.apply(&lifted).unwrap().sup_distance(&lifted);

    let change = coarse
        .solution
        .nodes()
        .iter()
        .zip(coarse.solution.values())
        .map(|(&x, &v)| (fine.solution.eval(x) - v).abs())
        .fold(0.0, f64::max);
    assert!(
        change <= 10.0 * consistency,
        "{change:e} vs {consistency:e}"
    );
}

#[test]
fn system_solves_componentwise() {
    let sys = example_system(Some(2.4047)).unwrap();
    let seed = GridFunction::constant(nodes(101), 0.5).unwrap();
    let (a, b) = solve_system(&sys, &seed, &seed, &SolveOptions::default()).unwrap();
    assert!(a.converged && b.converged);
    assert!(a.solution.sup_norm() <= 1e-8 && b.solution.sup_norm() <= 1e-8);

    let zero = GridFunction::constant(nodes(101), 0.0).unwrap();
    let (a, b) = solve_system(&sys, &zero, &zero, &SolveOptions::default()).unwrap();
    assert!(a.iterations <= 1 && b.iterations <= 1);
}

#[test]
fn mixed_system_reports_the_failing_half() {
    let good = example_alpha_equation(None).unwrap();
    let mut bad = good.clone();
    bad.f = Nonlinearity::parse("1.5*a + 0.1", 1.5, false).unwrap();
    let seed = GridFunction::constant(nodes(41), 0.1).unwrap();
    let opts = SolveOptions {
        max_iter: 50,
        ..SolveOptions::default()
    };
    let op = EquationOperator::new(&good, &nodes(41), &opts.quadrature).unwrap();
    assert!(solve_with(&op, &seed, &opts).unwrap().converged);
    let r = solve(&bad, &seed, &opts).unwrap();
    assert!(!r.converged);
    assert_eq!(r.trace.len(), r.iterations);
}
