//! Symbolic derivatives against finite differences, plus algebraic laws.

use std::collections::BTreeSet;

use gauge_noether::expr::random::ExprGenerator;
use gauge_noether::expr::{
    equivalent, eval, is_zero, parse, partial, restrict_to_zero_jets, total_derivative, Dims, Expr, IdentityConfig,
    SampleEnv, Symbol,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIMS: Dims = Dims { n: 2, r: 1, k: 1, m: 2 };

fn variables() -> Vec<Symbol> {
    vec![
        Symbol::Time,
        Symbol::State(1),
        Symbol::State(2),
        Symbol::Control(1),
        Symbol::jet(1, 0),
        Symbol::jet(1, 1),
        Symbol::jet(1, 2),
    ]
}

fn random_env(rng: &mut ChaCha8Rng, symbols: impl IntoIterator<Item = Symbol>) -> SampleEnv {
    SampleEnv::from_pairs(symbols.into_iter().map(|s| (s, rng.gen_range(-2.0..2.0))))
}

/// Five-point central difference of `e` in the direction `dir` at `env`,
/// with a bound on its own round-off error.
fn directional_fd(e: &Expr, env: &SampleEnv, dir: &[(Symbol, f64)]) -> (f64, f64) {
    let speed = dir.iter().fold(1.0f64, |m, (_, d)| m.max(d.abs()));
    let h = 1e-4 / speed;
    let at = |s: f64| {
        let mut moved = env.clone();
        for (sym, d) in dir {
            moved.set(*sym, env.get(*sym).unwrap_or(0.0) + s * d);
        }
        eval(e, &moved).expect("generated expressions are defined everywhere")
    };
    let f = [at(2.0 * h), at(h), at(-h), at(-2.0 * h)];
    let magnitude = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let value = (-f[0] + 8.0 * f[1] - 8.0 * f[2] + f[3]) / (12.0 * h);
    (value, 4.0 * f64::EPSILON * magnitude / h)
}

fn close(symbolic: f64, (fd, noise): (f64, f64)) -> bool {
    (symbolic - fd).abs() <= 1e-6 * fd.abs().max(1.0) + noise
}

fn cfg() -> IdentityConfig {
    IdentityConfig::new(60, 1e-9, 5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partials_match_finite_differences(seed in any::<u64>(), which in 0usize..7) {
        let e = ExprGenerator::new(DIMS, 5, seed).generate();
        let s = variables()[which];
        let d = partial(&e, s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..4 {
            let env = random_env(&mut rng, variables());
            let symbolic = eval(&d, &env).unwrap();
            let fd = directional_fd(&e, &env, &[(s, 1.0)]);
            prop_assert!(close(symbolic, fd), "d/d{s} of {e}: {symbolic} vs {fd:?} at {env}");
        }
    }

    #[test]
    fn total_derivative_is_the_derivative_along_the_flow(seed in any::<u64>()) {
        let mut generator = ExprGenerator::new(DIMS, 4, seed);
        let e = generator.generate();
        let velocity = [generator.generate(), generator.generate()];
        let dt = total_derivative(&e, DIMS, &velocity).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let mut all = variables();
        all.push(Symbol::ControlDot(1));
        all.push(Symbol::jet(1, 3));
        let env = random_env(&mut rng, all);
        // move every coordinate at the rate D_t assigns to it
        let mut dir = vec![(Symbol::Time, 1.0)];
        for (i, v) in velocity.iter().enumerate() {
            dir.push((Symbol::State(i + 1), eval(v, &env).unwrap()));
        }
        dir.push((Symbol::Control(1), env.get(Symbol::ControlDot(1)).unwrap()));
        for q in 0..=2 {
            dir.push((Symbol::jet(1, q), env.get(Symbol::jet(1, q + 1)).unwrap()));
        }
        let symbolic = eval(&dt, &env).unwrap();
        let fd = directional_fd(&e, &env, &dir);
        prop_assert!(close(symbolic, fd), "D_t {e}: {symbolic} vs {fd:?}");
    }

    #[test]
    fn differentiation_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut g = ExprGenerator::new(DIMS, 4, seed);
        let (e1, e2) = (g.generate(), g.generate());
        let s = Symbol::State(1);
        let combo = Expr::sum([Expr::mul(Expr::constant(a), e1.clone()), Expr::mul(Expr::constant(b), e2.clone())]);
        let expected = Expr::sum([
            Expr::mul(Expr::constant(a), partial(&e1, s)),
            Expr::mul(Expr::constant(b), partial(&e2, s)),
        ]);
        prop_assert!(equivalent(&partial(&combo, s), &expected, &cfg()).unwrap());
    }

    #[test]
    fn leibniz_rule(seed in any::<u64>()) {
        let mut g = ExprGenerator::new(DIMS, 4, seed);
        let (e1, e2) = (g.generate(), g.generate());
        let s = Symbol::jet(1, 1);
        let lhs = partial(&Expr::mul(e1.clone(), e2.clone()), s);
        let rhs = Expr::sum([Expr::mul(partial(&e1, s), e2.clone()), Expr::mul(e1.clone(), partial(&e2, s))]);
        prop_assert!(equivalent(&lhs, &rhs, &cfg()).unwrap());
    }

    #[test]
    fn mixed_partials_commute(seed in any::<u64>(), i in 0usize..7, j in 0usize..7) {
        let e = ExprGenerator::new(DIMS, 4, seed).generate();
        let (si, sj) = (variables()[i], variables()[j]);
        let a = partial(&partial(&e, si), sj);
        let b = partial(&partial(&e, sj), si);
        prop_assert!(equivalent(&a, &b, &cfg()).unwrap());
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let e = ExprGenerator::new(DIMS, 6, seed).generate();
        let printed = e.to_string();
        let back = parse(&printed, DIMS).unwrap();
        prop_assert!(equivalent(&e, &back, &IdentityConfig::new(20, 1e-12, 1)).unwrap(), "{printed}");
        // parsing flattens nested sums and products, after which printing is a fixed point
        let normal = back.to_string();
        prop_assert_eq!(parse(&normal, DIMS).unwrap().to_string(), normal);
    }

    #[test]
    fn restriction_equals_evaluation_at_zero_jets(seed in any::<u64>()) {
        let e = ExprGenerator::new(DIMS, 5, seed).generate();
        let restricted = restrict_to_zero_jets(&e);
        prop_assert!(!restricted.any_symbol(&|s| s.is_jet()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut env = random_env(&mut rng, variables());
        let r = eval(&restricted, &env).unwrap();
        for q in 0..=2 {
            env.set(Symbol::jet(1, q), 0.0);
        }
        let direct = eval(&e, &env).unwrap();
        prop_assert!((r - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn self_difference_is_zero(seed in any::<u64>()) {
        let e = ExprGenerator::new(DIMS, 6, seed).generate();
        prop_assert!(is_zero(&Expr::sub(e.clone(), e), &IdentityConfig::default()).unwrap().is_zero());
    }

    #[test]
    fn literal_zero_is_never_flagged(seed in any::<u64>(), trials in 1usize..50) {
        let v = is_zero(&Expr::zero(), &IdentityConfig::new(trials, 1e-15, seed)).unwrap();
        prop_assert!(v.is_zero());
    }

    #[test]
    fn perturbed_expression_is_not_zero(seed in any::<u64>(), c in 0.01f64..10.0) {
        let e = ExprGenerator::new(DIMS, 5, seed).generate();
        let shifted = Expr::sub(Expr::sum([e.clone(), Expr::constant(c)]), e);
        prop_assert!(!is_zero(&shifted, &IdentityConfig::new(50, 1e-9, seed)).unwrap().is_zero());
    }
}

#[test]
fn generated_expressions_cover_the_symbol_table() {
    let mut seen = BTreeSet::new();
    let mut g = ExprGenerator::new(DIMS, 6, 1);
    for _ in 0..50 {
        seen.extend(g.generate().symbols());
    }
    assert_eq!(seen, variables().into_iter().collect());
}
