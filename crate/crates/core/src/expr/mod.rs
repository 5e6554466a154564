//! Symbolic expressions over time, state, control, jet and costate symbols.
//!
//! Expressions are immutable trees. The smart constructors ([`Expr::sum`],
//! [`Expr::product`], ...) flatten nested sums and products and fold
//! constants; no other simplification is ever applied. Semantic equality is
//! decided numerically by [`is_zero`] and [`equivalent`].

mod diff;
mod eval;
mod identity;
mod parse;
mod print;
pub mod random;
mod symbol;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diff::{partial, restrict_to_zero_jets, total_derivative};
pub use eval::{eval, eval_with_scale, EvalError, SampleEnv, Valuation};
pub use identity::{equivalent, is_zero, IdentityConfig, Sampler, Verdict, SAMPLE_GUARD, SAMPLE_RADIUS};
pub use parse::{parse, parse_in, ParseError, ParseErrorKind};
pub use symbol::{Dims, Scope, Symbol, SymbolKind};

/// Elementary functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    /// Applies the function, returning `None` outside its real domain.
    pub fn apply(self, v: f64) -> Option<f64> {
        match self {
            Func::Sin => Some(v.sin()),
            Func::Cos => Some(v.cos()),
            Func::Exp => Some(v.exp()),
            Func::Ln if v > 0.0 => Some(v.ln()),
            Func::Sqrt if v >= 0.0 => Some(v.sqrt()),
            Func::Ln | Func::Sqrt => None,
        }
    }
}

/// An immutable expression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Var(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Neg(Box<Expr>),
    Quot(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Apply(Func, Box<Expr>),
}

/// Errors raised by symbolic operations other than parsing and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("total derivative input must not contain `{0}`")]
    ForbiddenSymbol(Symbol),
    #[error("total derivative of `{0}` would exceed the jet order bound m + 1 = {1}")]
    JetOrderOverflow(Symbol, usize),
    #[error("no valid sample point after {attempts} attempts: {last}")]
    SamplerExhausted { attempts: usize, last: EvalError },
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(s: Symbol) -> Expr {
        Expr::Var(s)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    fn is_const_one(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 1.0)
    }

    /// Sum with flattening and constant folding.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        let mut constant = 0.0;
        let mut push = |e: Expr, out: &mut Vec<Expr>| match e {
            Expr::Const(v) => constant += v,
            other => out.push(other),
        };
        for t in terms {
            match t {
                Expr::Sum(inner) => {
                    for e in inner {
                        push(e, &mut out);
                    }
                }
                other => push(other, &mut out),
            }
        }
        if constant != 0.0 {
            out.push(Expr::Const(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    /// Product with flattening and constant folding. A literal zero factor
    /// annihilates the product.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        let mut constant = 1.0;
        for f in factors {
            let items = match f {
                Expr::Product(inner) => inner,
                other => vec![other],
            };
            for e in items {
                match e {
                    Expr::Const(v) => constant *= v,
                    other => out.push(other),
                }
            }
        }
        if constant == 0.0 {
            return Expr::zero();
        }
        if out.is_empty() {
            return Expr::Const(constant);
        }
        if constant == -1.0 {
            return Expr::neg(Expr::product(out));
        }
        if constant != 1.0 {
            out.insert(0, Expr::Const(constant));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Product(out)
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(v) => Expr::Const(-v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::sum([a, Expr::neg(b)])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::product([a, b])
    }

    /// Quotient with constant folding. A denominator that folds to the
    /// literal zero is kept as is and fails at evaluation time.
    pub fn quot(num: Expr, den: Expr) -> Expr {
        if den.is_const_one() {
            return num;
        }
        if num.is_const_zero() && !den.is_const_zero() {
            return Expr::zero();
        }
        match (&num, &den) {
            (Expr::Const(a), Expr::Const(b)) if *b != 0.0 => Expr::Const(a / b),
            _ => Expr::Quot(Box::new(num), Box::new(den)),
        }
    }

    pub fn pow(base: Expr, exponent: i32) -> Expr {
        match exponent {
            0 => return Expr::one(),
            1 => return base,
            _ => {}
        }
        match base {
            Expr::Const(v) => {
                let folded = v.powi(exponent);
                if folded.is_finite() {
                    Expr::Const(folded)
                } else {
                    Expr::Pow(Box::new(Expr::Const(v)), exponent)
                }
            }
            other => Expr::Pow(Box::new(other), exponent),
        }
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        if let Expr::Const(v) = arg {
            if let Some(r) = func.apply(v).filter(|r| r.is_finite()) {
                return Expr::Const(r);
            }
        }
        Expr::Apply(func, Box::new(arg))
    }

    /// All symbols occurring in the tree.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut set = BTreeSet::new();
        self.collect_symbols(&mut set);
        set
    }

    fn collect_symbols(&self, set: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(s) => {
                set.insert(*s);
            }
            Expr::Sum(items) | Expr::Product(items) => items.iter().for_each(|e| e.collect_symbols(set)),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Apply(_, e) => e.collect_symbols(set),
            Expr::Quot(a, b) => {
                a.collect_symbols(set);
                b.collect_symbols(set);
            }
        }
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        self.any_symbol(&|s| s == sym)
    }

    pub fn any_symbol(&self, pred: &dyn Fn(Symbol) -> bool) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(s) => pred(*s),
            Expr::Sum(items) | Expr::Product(items) => items.iter().any(|e| e.any_symbol(pred)),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Apply(_, e) => e.any_symbol(pred),
            Expr::Quot(a, b) => a.any_symbol(pred) || b.any_symbol(pred),
        }
    }

    /// Simultaneously replaces symbols for which `map` returns a value,
    /// rebuilding the tree through the folding constructors.
    pub fn substitute(&self, map: &dyn Fn(Symbol) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(s) => map(*s).unwrap_or(Expr::Var(*s)),
            Expr::Sum(items) => Expr::sum(items.iter().map(|e| e.substitute(map))),
            Expr::Product(items) => Expr::product(items.iter().map(|e| e.substitute(map))),
            Expr::Neg(e) => Expr::neg(e.substitute(map)),
            Expr::Quot(a, b) => Expr::quot(a.substitute(map), b.substitute(map)),
            Expr::Pow(e, n) => Expr::pow(e.substitute(map), *n),
            Expr::Apply(f, e) => Expr::apply(*f, e.substitute(map)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Sum(items) | Expr::Product(items) => items.iter().map(Expr::size).sum(),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Apply(_, e) => e.size(),
            Expr::Quot(a, b) => a.size() + b.size(),
        }
    }

    /// Nesting depth; atoms have depth 1.
    pub fn depth(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Sum(items) | Expr::Product(items) => items.iter().map(Expr::depth).max().unwrap_or(0),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Apply(_, e) => e.depth(),
            Expr::Quot(a, b) => a.depth().max(b.depth()),
        }
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::Var(s)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(self))
    }
}

pub use print::print;

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> Expr {
        Expr::var(Symbol::State(1))
    }

    #[test]
    fn sum_folds_and_flattens() {
        let e = Expr::sum([Expr::constant(1.0), Expr::sum([x1(), Expr::constant(2.0)])]);
        assert_eq!(e, Expr::Sum(vec![x1(), Expr::constant(3.0)]));
        assert_eq!(Expr::sum([Expr::constant(1.0), Expr::constant(-1.0)]), Expr::zero());
        assert_eq!(Expr::sum(Vec::new()), Expr::zero());
    }

    #[test]
    fn product_zero_annihilates() {
        assert_eq!(Expr::product([Expr::zero(), x1()]), Expr::zero());
        assert_eq!(Expr::product([Expr::one(), x1()]), x1());
        assert_eq!(Expr::product([Expr::constant(-1.0), x1()]), Expr::neg(x1()));
    }

    #[test]
    fn pow_and_quot_fold() {
        assert_eq!(Expr::pow(Expr::constant(2.0), 3), Expr::constant(8.0));
        assert_eq!(Expr::pow(x1(), 0), Expr::one());
        assert_eq!(Expr::quot(x1(), Expr::one()), x1());
        assert_eq!(Expr::quot(Expr::constant(1.0), Expr::constant(4.0)), Expr::constant(0.25));
        assert!(matches!(Expr::quot(Expr::one(), Expr::zero()), Expr::Quot(..)));
    }

    #[test]
    fn ln_of_zero_is_not_folded() {
        assert!(matches!(Expr::apply(Func::Ln, Expr::zero()), Expr::Apply(Func::Ln, _)));
        assert_eq!(Expr::apply(Func::Exp, Expr::zero()), Expr::one());
    }
}
