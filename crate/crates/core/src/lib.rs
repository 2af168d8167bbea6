//! Asymptotic analysis of Parrondo games.
//!
//! A game is a finite Markov chain with transition matrix `P` and a payoff
//! `w(i, j)` for each step. For an ergodic chain the profit `S_n` satisfies
//! a strong law and a central limit theorem with
//!
//! ```text
//! μ  = π P′ 1
//! σ² = π P″ 1 − μ² + 2 π P′ (Z − Π) P′ 1,    Z = (I − P + Π)⁻¹
//! ```
//!
//! where `P′ = P ∘ W` and `P″ = P ∘ W ∘ W`. This crate evaluates these
//! parameters exactly (over [`Rational`]) or in `f64` for the
//! capital-dependent and history-dependent families, their random mixtures
//! and periodic patterns such as `[2,2] = AABB`.
//!
//! ```
//! use parrondo::{analyze, capital_game_a, capital_game_b, mixture, Rational};
//!
//! let a = capital_game_a(Rational::from_integer(0)).unwrap();
//! let b = capital_game_b(Rational::new(1, 3), Rational::from_integer(0)).unwrap();
//! let c = mixture(&a, &b, Rational::new(1, 2)).unwrap();
//! assert_eq!(analyze(&c).unwrap().mu, Rational::new(18, 709));
//! ```
//!
//! Modules, bottom up:
//!
//! - [`scalar`]: the [`Scalar`] trait and the exact [`Rational`] backend
//! - [`matrix`], [`markov`]: dense matrices, `π`, `Z`, `μ`, `σ²`
//! - [`games`]: the two families and mixtures
//! - [`patterns`]: periodic words, by direct formula and by product chain
//! - [`spectral`]: eigenvalue closed forms and sign bounds
//! - [`analysis`]: fairness thresholds, large-`s` limits, convexity, grids
//! - [`montecarlo`]: seeded simulation with SLLN and CLT checks

pub mod analysis;
pub mod error;
pub mod games;
pub mod markov;
pub mod matrix;
pub mod montecarlo;
pub mod patterns;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use games::{
    capital_game_a, capital_game_b, history_game_a, history_game_b, mixture, Family, FamilyParams, ParamPoint,
};
pub use markov::{
    analyze, classify, ChainAnalysis, Classification, GameChain, LimitParams, PayoffMatrix, TransitionMatrix,
};
pub use matrix::Matrix;
pub use patterns::{Game, PatternSpec};
pub use scalar::{Rational, Scalar, Sign};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/games.md")]
    mod games {}
    #[doc = include_str!("../../../book/src/patterns.md")]
    mod patterns {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
