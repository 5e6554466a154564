//! Gauge symmetries and Noether currents for optimal control problems.
//!
//! The crate checks whether a transformation group depending on arbitrary
//! functions of time (and their derivatives) leaves an optimal control
//! problem semi-invariant, builds the resulting Noether currents, and
//! certifies numerically that the currents are conserved along Pontryagin
//! extremals.
//!
//! * [`expr`]: symbolic expressions, differentiation, identity testing.
//! * [`problem`]: the optimal control problem and its Hamiltonian.
//! * [`symmetry`]: gauge symmetries and the invariance checks.
//! * [`noether`]: construction of the Noether currents.
//! * [`extremal`]: integration of candidate extremals and extremality checks.
//! * [`conservation`]: drift statistics of currents along trajectories.

pub mod expr;
pub mod extremal;
pub mod models;
pub mod noether;
pub mod problem;
pub mod symmetry;
pub mod conservation;

/// Chapters of the guide under `book/src` and the README, compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/symmetries.md")]
    mod symmetries {}
    #[doc = include_str!("../../../book/src/currents.md")]
    mod currents {}
    #[doc = include_str!("../../../book/src/extremals.md")]
    mod extremals {}
    #[doc = include_str!("../../../book/src/conservation.md")]
    mod conservation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
