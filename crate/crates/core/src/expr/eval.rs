use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Expr, Func, Symbol};

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum EvalError {
    #[error("no value bound for symbol `{0}`")]
    MissingSymbol(Symbol),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func}({arg}) is outside the function's domain")]
    Domain { func: String, arg: f64 },
    #[error("non-finite intermediate value")]
    NonFinite,
}

/// Anything that can supply a value for a symbol.
pub trait Valuation {
    fn value(&self, sym: Symbol) -> Option<f64>;
}

impl<F: Fn(Symbol) -> Option<f64>> Valuation for F {
    fn value(&self, sym: Symbol) -> Option<f64> {
        self(sym)
    }
}

/// A point of the symbol space, usually drawn by a [`super::Sampler`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleEnv {
    pub values: BTreeMap<Symbol, f64>,
    /// Seed of the sampler that produced this point.
    pub seed: u64,
}

impl SampleEnv {
    pub fn new(seed: u64) -> Self {
        SampleEnv { values: BTreeMap::new(), seed }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Symbol, f64)>) -> Self {
        SampleEnv { values: pairs.into_iter().collect(), seed: 0 }
    }

    pub fn set(&mut self, sym: Symbol, v: f64) {
        self.values.insert(sym, v);
    }

    pub fn get(&self, sym: Symbol) -> Option<f64> {
        self.values.get(&sym).copied()
    }
}

impl Valuation for SampleEnv {
    fn value(&self, sym: Symbol) -> Option<f64> {
        self.get(sym)
    }
}

impl fmt::Display for SampleEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, v) in &self.values {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{s}={v}")?;
        }
        Ok(())
    }
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn apply(func: Func, arg: f64) -> Result<f64, EvalError> {
    let v = func.apply(arg).ok_or_else(|| EvalError::Domain { func: func.name().into(), arg })?;
    finite(v)
}

/// Evaluates `e`, failing on any non-finite intermediate.
pub fn eval(e: &Expr, env: &impl Valuation) -> Result<f64, EvalError> {
    eval_dyn(e, env)
}

fn eval_dyn(e: &Expr, env: &dyn Valuation) -> Result<f64, EvalError> {
    match e {
        Expr::Const(v) => finite(*v),
        Expr::Var(s) => finite(env.value(*s).ok_or(EvalError::MissingSymbol(*s))?),
        Expr::Sum(items) => {
            let mut acc = 0.0;
            for t in items {
                acc += eval_dyn(t, env)?;
            }
            finite(acc)
        }
        Expr::Product(items) => {
            let mut acc = 1.0;
            for t in items {
                acc *= eval_dyn(t, env)?;
            }
            finite(acc)
        }
        Expr::Neg(a) => Ok(-eval_dyn(a, env)?),
        Expr::Quot(a, b) => {
            let num = eval_dyn(a, env)?;
            let den = eval_dyn(b, env)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            finite(num / den)
        }
        Expr::Pow(a, n) => {
            let base = eval_dyn(a, env)?;
            if base == 0.0 && *n < 0 {
                return Err(EvalError::DivisionByZero);
            }
            finite(base.powi(*n))
        }
        Expr::Apply(f, a) => apply(*f, eval_dyn(a, env)?),
    }
}

/// Evaluates `e` together with a magnitude scale: the value the expression
/// would take if no cancellation happened in any sum. Roundoff in the value
/// is bounded by a small multiple of machine epsilon times the scale.
pub fn eval_with_scale(e: &Expr, env: &impl Valuation) -> Result<(f64, f64), EvalError> {
    scaled(e, env)
}

fn scaled(e: &Expr, env: &dyn Valuation) -> Result<(f64, f64), EvalError> {
    Ok(match e {
        Expr::Const(v) => (finite(*v)?, v.abs()),
        Expr::Var(s) => {
            let v = finite(env.value(*s).ok_or(EvalError::MissingSymbol(*s))?)?;
            (v, v.abs())
        }
        Expr::Sum(items) => {
            let (mut v, mut m) = (0.0, 0.0);
            for t in items {
                let (tv, tm) = scaled(t, env)?;
                v += tv;
                m += tm;
            }
            (finite(v)?, finite(m)?)
        }
        Expr::Product(items) => {
            let (mut v, mut m) = (1.0, 1.0);
            for t in items {
                let (tv, tm) = scaled(t, env)?;
                v *= tv;
                m *= tm;
            }
            (finite(v)?, finite(m)?)
        }
        Expr::Neg(a) => {
            let (v, m) = scaled(a, env)?;
            (-v, m)
        }
        Expr::Quot(a, b) => {
            let (nv, nm) = scaled(a, env)?;
            let (dv, _) = scaled(b, env)?;
            if dv == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            (finite(nv / dv)?, finite(nm / dv.abs())?)
        }
        Expr::Pow(a, n) => {
            let (bv, bm) = scaled(a, env)?;
            if bv == 0.0 && *n < 0 {
                return Err(EvalError::DivisionByZero);
            }
            let v = finite(bv.powi(*n))?;
            let m = if *n > 0 { finite(bm.powi(*n))? } else { v.abs() };
            (v, m)
        }
        Expr::Apply(f, a) => {
            let (av, am) = scaled(a, env)?;
            let v = apply(*f, av)?;
            (v, v.abs().max(am))
        }
    })
}
