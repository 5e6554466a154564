//! Worked examples, mirrored by the bundled documents under `models/`.

use crate::expr::{parse_in, Dims, Expr, Scope};
use crate::problem::{Bound, OcpProblem};
use crate::symmetry::{GaugeSymmetry, SymmetryParts};

fn expr(text: &str, dims: Dims, scope: Scope) -> Expr {
    parse_in(text, dims, scope).expect("built-in expression parses")
}

/// Time-optimal transfer on the line: `L ≡ 1`, `dx/dt = u`, `Ω = (−1, 1)`,
/// on `[0, 1]`.
pub fn time_optimal_problem() -> OcpProblem {
    let d = Dims::plain(1, 1);
    OcpProblem {
        name: "time-optimal".into(),
        n: 1,
        r: 1,
        a: 0.0,
        b: 1.0,
        lagrangian: expr("1", d, Scope::PROBLEM),
        dynamics: vec![expr("u1", d, Scope::PROBLEM)],
        omega: vec![Bound::open(-1.0, 1.0)],
    }
}

/// The second-order gauge symmetry of the time-optimal problem:
/// `T = p + t`, `X = (ṗ + 1)² x`, `U = 2p̈x + (ṗ + 1)u`, `F = p`, `λ = 0`.
pub fn time_optimal_symmetry(problem: &OcpProblem) -> GaugeSymmetry {
    let d = Dims::new(1, 1, 1, 2);
    let e = |t: &str| expr(t, d, Scope::SYMMETRY);
    GaugeSymmetry::new(
        problem,
        SymmetryParts {
            k: 1,
            m: 2,
            time: e("p1 + t"),
            state: vec![e("(dp1 + 1)^2*x1")],
            control: vec![e("2*ddp1*x1 + (dp1 + 1)*u1")],
            gauge: e("p1"),
            lambda: vec![vec![0.0; 3]],
        },
    )
    .expect("time-optimal symmetry is well formed")
}

/// `L = u`, `dx/dt = u`, unbounded control, on `[0, 1]`.
pub fn linear_cost_problem() -> OcpProblem {
    let d = Dims::plain(1, 1);
    OcpProblem {
        name: "linear-cost".into(),
        n: 1,
        r: 1,
        a: 0.0,
        b: 1.0,
        lagrangian: expr("u1", d, Scope::PROBLEM),
        dynamics: vec![expr("u1", d, Scope::PROBLEM)],
        omega: vec![Bound::unbounded()],
    }
}

/// First-order state translation for [`linear_cost_problem`]:
/// `T = t`, `X = x + p`, `U = u + ṗ`, `F = p`.
pub fn translation_symmetry(problem: &OcpProblem) -> GaugeSymmetry {
    let d = Dims::new(1, 1, 1, 1);
    let e = |t: &str| expr(t, d, Scope::SYMMETRY);
    GaugeSymmetry::new(
        problem,
        SymmetryParts {
            k: 1,
            m: 1,
            time: e("t"),
            state: vec![e("x1 + p1")],
            control: vec![e("u1 + dp1")],
            gauge: e("p1"),
            lambda: vec![],
        },
    )
    .expect("translation symmetry is well formed")
}

/// Minimal time with growth: `L ≡ 1`, `dx/dt = x + u`, `Ω = (−1, 1)`, on
/// `[0, 1]`. The costate solves `ψ = ψ_a e^{−t}`.
pub fn growth_problem() -> OcpProblem {
    let d = Dims::plain(1, 1);
    OcpProblem {
        name: "growth".into(),
        dynamics: vec![expr("x1 + u1", d, Scope::PROBLEM)],
        ..time_optimal_problem()
    }
}

/// Time reparametrization for [`growth_problem`]: `T = t + p`, `X = x`,
/// `U = (x + u)/(1 + ṗ) − x`, `F = p`.
pub fn reparametrization_symmetry(problem: &OcpProblem) -> GaugeSymmetry {
    let d = Dims::new(1, 1, 1, 1);
    let e = |t: &str| expr(t, d, Scope::SYMMETRY);
    GaugeSymmetry::new(
        problem,
        SymmetryParts {
            k: 1,
            m: 1,
            time: e("t + p1"),
            state: vec![e("x1")],
            control: vec![e("(x1 + u1)/(1 + dp1) - x1")],
            gauge: e("p1"),
            lambda: vec![],
        },
    )
    .expect("reparametrization is well formed")
}
