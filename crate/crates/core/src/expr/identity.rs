//! Probabilistic identity testing by random evaluation.
//!
//! An expression is declared identically zero when it vanishes, up to a
//! roundoff-scaled tolerance, at every one of `trials` independent random
//! points. For polynomial residuals a nonzero expression vanishes on a
//! measure-zero set, so a false positive needs an astronomically unlucky
//! draw.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{eval_with_scale, Expr, ExprError, SampleEnv, Symbol};

/// Coordinates are drawn uniformly from `[-SAMPLE_RADIUS, SAMPLE_RADIUS]`.
pub const SAMPLE_RADIUS: f64 = 2.0;
/// Draws with `|v| < SAMPLE_GUARD` are rejected.
pub const SAMPLE_GUARD: f64 = 1e-3;
const ATTEMPTS_PER_TRIAL: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityConfig {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

impl IdentityConfig {
    pub fn new(trials: usize, tol: f64, seed: u64) -> Self {
        assert!(trials >= 1, "identity test needs at least one trial");
        assert!(tol > 0.0, "identity tolerance must be positive");
        IdentityConfig { trials, tol, seed }
    }

    /// Same trials and seed, tolerance multiplied by `factor`.
    pub fn scaled_tol(self, factor: f64) -> Self {
        IdentityConfig { tol: self.tol * factor, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        IdentityConfig { seed, ..self }
    }
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig { trials: 200, tol: 1e-9, seed: 0 }
    }
}

/// Deterministic source of sample points.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    seed: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), seed }
    }

    pub fn coordinate(&mut self) -> f64 {
        loop {
            let v = self.rng.gen_range(-SAMPLE_RADIUS..=SAMPLE_RADIUS);
            if v.abs() >= SAMPLE_GUARD {
                return v;
            }
        }
    }

    /// Draws a value for every symbol, in symbol order.
    pub fn draw(&mut self, symbols: &BTreeSet<Symbol>) -> SampleEnv {
        let mut env = SampleEnv::new(self.seed);
        for s in symbols {
            let v = self.coordinate();
            env.set(*s, v);
        }
        env
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    /// Zero at every sample. `max_abs` is the largest raw residual and
    /// `max_ratio` the largest `|value| / (1 + scale)`.
    IdenticallyZero { trials: usize, max_abs: f64, max_ratio: f64 },
    /// First sample at which the residual exceeded the tolerance.
    NonZeroWitness { env: SampleEnv, value: f64, scale: f64 },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::IdenticallyZero { .. })
    }
}

/// Tests whether `e` vanishes identically: every sample must satisfy
/// `|value| <= tol * (1 + scale)`, where `scale` is the cancellation-free
/// magnitude from [`super::eval_with_scale`]. Points where evaluation fails
/// are redrawn a bounded number of times.
pub fn is_zero(e: &Expr, cfg: &IdentityConfig) -> Result<Verdict, ExprError> {
    if e.is_const_zero() {
        return Ok(Verdict::IdenticallyZero { trials: cfg.trials, max_abs: 0.0, max_ratio: 0.0 });
    }
    let symbols = e.symbols();
    let mut sampler = Sampler::new(cfg.seed);
    let (mut max_abs, mut max_ratio) = (0.0f64, 0.0f64);
    for _ in 0..cfg.trials {
        let mut attempts = 0;
        let (env, value, scale) = loop {
            let env = sampler.draw(&symbols);
            match eval_with_scale(e, &env) {
                Ok((v, s)) => break (env, v, s),
                Err(err) => {
                    attempts += 1;
                    if attempts >= ATTEMPTS_PER_TRIAL {
                        return Err(ExprError::SamplerExhausted { attempts, last: err });
                    }
                }
            }
        };
        let ratio = value.abs() / (1.0 + scale);
        if ratio > cfg.tol {
            return Ok(Verdict::NonZeroWitness { env, value, scale });
        }
        max_abs = max_abs.max(value.abs());
        max_ratio = max_ratio.max(ratio);
    }
    Ok(Verdict::IdenticallyZero { trials: cfg.trials, max_abs, max_ratio })
}

/// Random-evaluation equivalence: `a - b` is identically zero.
pub fn equivalent(a: &Expr, b: &Expr, cfg: &IdentityConfig) -> Result<bool, ExprError> {
    Ok(is_zero(&Expr::sub(a.clone(), b.clone()), cfg)?.is_zero())
}
