use super::Expr;

// Binding strength of the context a subexpression is printed into.
const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const UNARY: u8 = 2;
const POW: u8 = 3;
const ATOM: u8 = 4;

/// Renders `e` in the input grammar. `du` symbols are printed but are not
/// accepted back by the parser.
pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    write(e, SUM, &mut out);
    out
}

fn number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    format!("{v}")
}

fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Const(v) if *v < 0.0 => UNARY,
        Expr::Const(_) | Expr::Var(_) | Expr::Apply(..) => ATOM,
        Expr::Sum(_) => SUM,
        Expr::Product(_) | Expr::Quot(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Pow(..) => POW,
    }
}

fn write(e: &Expr, ctx: u8, out: &mut String) {
    if strength(e) < ctx {
        out.push('(');
        write(e, SUM, out);
        out.push(')');
        return;
    }
    match e {
        Expr::Const(v) => out.push_str(&number(*v)),
        Expr::Var(s) => out.push_str(&s.to_string()),
        Expr::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                match (i, t) {
                    (0, t) => write(t, PRODUCT, out),
                    (_, Expr::Neg(inner)) => {
                        out.push_str(" - ");
                        write(inner, PRODUCT, out);
                    }
                    (_, Expr::Const(v)) if *v < 0.0 => {
                        out.push_str(" - ");
                        out.push_str(&number(-v));
                    }
                    (_, t) => {
                        out.push_str(" + ");
                        write(t, PRODUCT, out);
                    }
                }
            }
        }
        Expr::Product(factors) => {
            for (i, f) in factors.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                // quotients and negations are parenthesized inside products
                write(f, POW, out);
            }
        }
        Expr::Quot(a, b) => {
            write(a, PRODUCT, out);
            out.push('/');
            write(b, POW, out);
        }
        Expr::Neg(a) => {
            out.push('-');
            write(a, POW, out);
        }
        Expr::Pow(base, n) => {
            write(base, ATOM, out);
            if *n < 0 {
                out.push_str(&format!("^({n})"));
            } else {
                out.push_str(&format!("^{n}"));
            }
        }
        Expr::Apply(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write(a, SUM, out);
            out.push(')');
        }
    }
}
