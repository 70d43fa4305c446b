#![allow(clippy::type_complexity)]

use hilfer::expr::{parse, BinOp, Func, Var};
use hilfer::Expr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn literal(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(0..10) as f64,
        1 => rng.gen_range(0.0..100.0),
        2 => rng.gen_range(0.0..1.0) * 1e-9,
        _ => rng.gen_range(1.0..10.0) * 1e12,
    }
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => Expr::Var(Var::X),
            1 => Expr::Var(Var::A),
            _ => Expr::Lit(literal(rng)),
        };
    }
    match rng.gen_range(0..10) {
        0 => Expr::Neg(Box::new(random_expr(rng, depth - 1))),
        1 | 2 => {
            let f = [
                Func::Abs,
                Func::Log,
                Func::Exp,
                Func::Sin,
                Func::Cos,
                Func::Sqrt,
                Func::Min,
                Func::Max,
            ][rng.gen_range(0..8)];
            let args = (0..f.arity())
                .map(|_| random_expr(rng, depth - 1))
                .collect();
            Expr::Call(f, args)
        }
        _ => {
            let op =
                [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][rng.gen_range(0..5)];
            Expr::Bin(
                op,
                Box::new(random_expr(rng, depth - 1)),
                Box::new(random_expr(rng, depth - 1)),
            )
        }
    }
}

#[test]
fn thousand_expressions_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for i in 0..1000 {
        let e = random_expr(&mut rng, 5);
        let printed = e.to_string();
        let back = parse(&printed).unwrap_or_else(|err| panic!("#{i} {printed:?}: {err}"));
        assert_eq!(back, e, "#{i} printed as {printed:?}");
        assert_eq!(back.to_string(), printed);
    }
}

#[test]
fn example_strings_evaluate() {
    let cases: [(&str, fn(f64, f64) -> f64); 4] = [
        ("abs(a)/6", |_, a| a.abs() / 6.0),
        ("abs(a)", |_, a| a.abs()),
        ("a/(3+log(x))", |x, a| a / (3.0 + x.ln())),
        ("a/(2+x)", |x, a| a / (2.0 + x)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (src, want) in cases {
        let e = parse(src).unwrap();
        for _ in 0..20 {
            let x: f64 = rng.gen_range(1.0..3.0);
            let a: f64 = rng.gen_range(-1.0..1.0);
            assert_eq!(e.eval(x, a).unwrap(), want(x, a), "{src} at ({x}, {a})");
        }
    }
}
