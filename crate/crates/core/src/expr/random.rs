//! Random expression generation for property tests and fuzzing.
//!
//! Generated trees use every node type. Quotient denominators, logarithm
//! and square-root arguments, and negative-power bases are wrapped as
//! `c + e^2` with `c >= 1`, so the expressions are defined everywhere.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dims, Expr, Func, Symbol};

pub struct ExprGenerator {
    rng: ChaCha8Rng,
    symbols: Vec<Symbol>,
    max_depth: usize,
}

impl ExprGenerator {
    /// Generator over time, state, control and jet symbols (orders `0..=m`)
    /// of `dims`.
    pub fn new(dims: Dims, max_depth: usize, seed: u64) -> Self {
        let mut symbols = vec![Symbol::Time];
        symbols.extend((1..=dims.n).map(Symbol::State));
        symbols.extend((1..=dims.r).map(Symbol::Control));
        for func in 1..=dims.k {
            symbols.extend((0..=dims.m).map(|order| Symbol::jet(func, order)));
        }
        Self::with_symbols(symbols, max_depth, seed)
    }

    pub fn with_symbols(symbols: Vec<Symbol>, max_depth: usize, seed: u64) -> Self {
        assert!(max_depth >= 1);
        ExprGenerator { rng: ChaCha8Rng::seed_from_u64(seed), symbols, max_depth }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// A random expression of depth at most `max_depth`.
    pub fn generate(&mut self) -> Expr {
        let depth = self.max_depth;
        self.node(depth)
    }

    fn leaf(&mut self) -> Expr {
        if self.symbols.is_empty() || self.rng.gen_bool(0.25) {
            let v: f64 = self.rng.gen_range(-2.0..2.0);
            Expr::Const((v * 4.0).round() / 4.0)
        } else {
            Expr::Var(*self.symbols.choose(&mut self.rng).unwrap())
        }
    }

    // `c + e^2` occupies two levels below the node that uses it.
    fn positive(&mut self, depth: usize) -> Expr {
        let c = self.rng.gen_range(1.0..2.0);
        Expr::Sum(vec![Expr::Const(c), Expr::Pow(Box::new(self.node(depth - 2)), 2)])
    }

    fn node(&mut self, depth: usize) -> Expr {
        if depth <= 1 {
            return self.leaf();
        }
        let choice = if depth >= 4 { self.rng.gen_range(0..12) } else { self.rng.gen_range(0..8) };
        let child = depth - 1;
        match choice {
            0 => self.leaf(),
            1 | 2 => {
                let n = self.rng.gen_range(2..=3);
                Expr::Sum((0..n).map(|_| self.node(child)).collect())
            }
            3 | 4 => Expr::Product(vec![self.node(child), self.node(child)]),
            5 => Expr::Neg(Box::new(self.node(child))),
            6 => {
                let n = self.rng.gen_range(2..=3);
                Expr::Pow(Box::new(self.node(child)), n)
            }
            7 => {
                let f = if self.rng.gen_bool(0.5) { Func::Sin } else { Func::Cos };
                Expr::Apply(f, Box::new(self.node(child)))
            }
            8 => Expr::Quot(Box::new(self.node(child)), Box::new(self.positive(child))),
            9 => {
                let f = if self.rng.gen_bool(0.5) { Func::Ln } else { Func::Sqrt };
                Expr::Apply(f, Box::new(self.positive(child)))
            }
            10 => Expr::Apply(Func::Exp, Box::new(Expr::Apply(Func::Sin, Box::new(self.node(depth - 2))))),
            _ => Expr::Pow(Box::new(self.positive(child)), -self.rng.gen_range(1..=2)),
        }
    }
}
