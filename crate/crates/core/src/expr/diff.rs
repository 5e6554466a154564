use super::{Dims, Expr, ExprError, Func, Symbol, SymbolKind};

/// Symbolic partial derivative of `e` with respect to `s`, all other symbols
/// held fixed.
pub fn partial(e: &Expr, s: Symbol) -> Expr {
    if !e.contains(s) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(v) => {
            if *v == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(terms) => Expr::sum(terms.iter().map(|t| partial(t, s))),
        Expr::Product(factors) => Expr::sum((0..factors.len()).map(|i| {
            let d = partial(&factors[i], s);
            if d.is_const_zero() {
                return d;
            }
            let rest = factors.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, f)| f.clone());
            Expr::product(std::iter::once(d).chain(rest))
        })),
        Expr::Neg(a) => Expr::neg(partial(a, s)),
        Expr::Quot(a, b) => {
            let da = partial(a, s);
            let db = partial(b, s);
            let den = Expr::pow((**b).clone(), 2);
            let num = Expr::sub(Expr::mul(da, (**b).clone()), Expr::mul((**a).clone(), db));
            Expr::quot(num, den)
        }
        Expr::Pow(a, n) => Expr::product([
            Expr::constant(f64::from(*n)),
            Expr::pow((**a).clone(), n - 1),
            partial(a, s),
        ]),
        Expr::Apply(f, a) => {
            let da = partial(a, s);
            let arg = (**a).clone();
            match f {
                Func::Sin => Expr::mul(Expr::apply(Func::Cos, arg), da),
                Func::Cos => Expr::neg(Expr::mul(Expr::apply(Func::Sin, arg), da)),
                Func::Exp => Expr::mul(Expr::apply(Func::Exp, arg), da),
                Func::Ln => Expr::quot(da, arg),
                Func::Sqrt => Expr::quot(da, Expr::mul(Expr::constant(2.0), Expr::apply(Func::Sqrt, arg))),
            }
        }
    }
}

/// Total time derivative along admissible pairs:
///
/// `D_t e = ∂e/∂t + Σ φ_i ∂e/∂x_i + Σ du_j ∂e/∂u_j + Σ p_j^(q+1) ∂e/∂p_j^(q)`.
///
/// `velocity` holds the right-hand sides `φ_i` substituted for `dx_i/dt`;
/// control derivatives enter as free `du_j` symbols.
pub fn total_derivative(e: &Expr, dims: Dims, velocity: &[Expr]) -> Result<Expr, ExprError> {
    let symbols = e.symbols();
    let mut terms = Vec::with_capacity(symbols.len());
    for s in symbols {
        let rate = match s {
            Symbol::Time => Expr::one(),
            Symbol::State(i) => velocity.get(i - 1).cloned().unwrap_or_else(Expr::zero),
            Symbol::Control(j) => Expr::var(Symbol::ControlDot(j)),
            Symbol::Jet { func, order } => {
                if order > dims.m {
                    return Err(ExprError::JetOrderOverflow(s, dims.m + 1));
                }
                Expr::var(Symbol::jet(func, order + 1))
            }
            Symbol::ControlDot(_) | Symbol::Costate0 | Symbol::Costate(_) => {
                return Err(ExprError::ForbiddenSymbol(s))
            }
        };
        terms.push(Expr::mul(rate, partial(e, s)));
    }
    Ok(Expr::sum(terms))
}

/// Evaluates every jet symbol (any order) at zero.
pub fn restrict_to_zero_jets(e: &Expr) -> Expr {
    e.substitute(&|s| (s.kind() == SymbolKind::Jet).then(Expr::zero))
}
