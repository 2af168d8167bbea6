//! Capital-dependent (3-state) and history-dependent (4-state) game families.
//!
//! State orderings are fixed:
//!
//! * capital: state `i` is the current capital mod 3;
//! * history: state `2a + b` encodes the last two results `a, b` (1 = win,
//!   `b` the more recent), so `0, 1, 2, 3` are loss-loss, loss-win, win-loss,
//!   win-win.
//!
//! Game B parameters are chosen so the unbiased game is fair; the bias `ε`
//! is then subtracted from every winning probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{GameChain, PayoffMatrix, TransitionMatrix};
use crate::matrix::Matrix;
use crate::scalar::{Scalar, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Capital,
    History,
}

impl Family {
    pub fn states(self) -> usize {
        match self {
            Family::Capital => 3,
            Family::History => 4,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Capital => "capital",
            Family::History => "history",
        })
    }
}

fn positive<S: Scalar>(x: &S) -> bool {
    x.sign() == Sign::Positive && !x.is_zero()
}

fn in_open_unit<S: Scalar>(p: &S) -> bool {
    positive(p) && positive(&(S::one() - p.clone()))
}

fn check_probabilities<S: Scalar>(ps: &[S]) -> Result<()> {
    for (i, p) in ps.iter().enumerate() {
        if !in_open_unit(p) {
            return Err(Error::Domain(format!("p{i} = {p} is not in (0, 1)")));
        }
    }
    Ok(())
}

fn check_bias<S: Scalar>(eps: &S) -> Result<()> {
    if eps.sign() == Sign::Negative && !eps.is_zero() {
        return Err(Error::Domain(format!("eps = {eps} must be nonnegative")));
    }
    Ok(())
}

fn int_matrix<S: Scalar, const N: usize>(rows: [[i64; N]; N]) -> Matrix<S> {
    Matrix::from_fn(N, N, |i, j| S::from_i64(rows[i][j]))
}

pub fn capital_payoff<S: Scalar>() -> PayoffMatrix<S> {
    PayoffMatrix::new(int_matrix([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])).unwrap()
}

pub fn history_payoff<S: Scalar>() -> PayoffMatrix<S> {
    PayoffMatrix::new(int_matrix([[-1, 1, 0, 0], [0, 0, -1, 1], [-1, 1, 0, 0], [0, 0, -1, 1]])).unwrap()
}

/// Capital chain with winning probability `p[i]` at capital `i` mod 3.
pub fn capital_chain<S: Scalar>(p: [S; 3]) -> Result<GameChain<S>> {
    check_probabilities(&p)?;
    let q = |x: &S| S::one() - x.clone();
    let z = S::zero;
    let m = Matrix::from_rows(vec![
        vec![z(), p[0].clone(), q(&p[0])],
        vec![q(&p[1]), z(), p[1].clone()],
        vec![p[2].clone(), q(&p[2]), z()],
    ])?;
    GameChain::new(TransitionMatrix::new(m)?, capital_payoff())
}

/// History chain with winning probability `p[i]` after history `i`.
pub fn history_chain<S: Scalar>(p: [S; 4]) -> Result<GameChain<S>> {
    check_probabilities(&p)?;
    let q = |x: &S| S::one() - x.clone();
    let z = S::zero;
    let m = Matrix::from_rows(vec![
        vec![q(&p[0]), p[0].clone(), z(), z()],
        vec![z(), z(), q(&p[1]), p[1].clone()],
        vec![q(&p[2]), p[2].clone(), z(), z()],
        vec![z(), z(), q(&p[3]), p[3].clone()],
    ])?;
    GameChain::new(TransitionMatrix::new(m)?, history_payoff())
}

pub fn check_rho<S: Scalar>(rho: &S) -> Result<()> {
    if !positive(rho) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    Ok(())
}

/// `κ > 0`, `λ > 0`, `λ < 1 + κ`.
pub fn check_kappa_lambda<S: Scalar>(kappa: &S, lambda: &S) -> Result<()> {
    if !positive(kappa) || !positive(lambda) {
        return Err(Error::Domain(format!("kappa = {kappa} and lambda = {lambda} must be positive")));
    }
    if !positive(&(S::one() + kappa.clone() - lambda.clone())) {
        return Err(Error::Domain(format!("lambda = {lambda} must be less than 1 + kappa")));
    }
    Ok(())
}

/// `(p0, p1, p2)` of capital game B; `ε` may be negative here.
pub fn capital_b_probabilities<S: Scalar>(rho: &S, eps: &S) -> [S; 3] {
    let one = S::one();
    let r2 = rho.clone() * rho.clone();
    let p0 = r2.clone() / (one.clone() + r2) - eps.clone();
    let p1 = one.clone() / (one + rho.clone()) - eps.clone();
    [p0, p1.clone(), p1]
}

/// `(p0, p1, p2, p3)` of history game B; `ε` may be negative here.
pub fn history_b_probabilities<S: Scalar>(kappa: &S, lambda: &S, eps: &S) -> [S; 4] {
    let one = S::one();
    let p0 = one.clone() / (one.clone() + kappa.clone()) - eps.clone();
    let p1 = lambda.clone() / (one.clone() + lambda.clone()) - eps.clone();
    let p3 = one.clone() - lambda.clone() / (one + kappa.clone()) - eps.clone();
    [p0, p1.clone(), p1, p3]
}

fn half_minus<S: Scalar>(eps: &S) -> S {
    S::from_ratio(1, 2) - eps.clone()
}

pub fn capital_game_a<S: Scalar>(eps: S) -> Result<GameChain<S>> {
    check_bias(&eps)?;
    let p = half_minus(&eps);
    capital_chain([p.clone(), p.clone(), p])
}

pub fn capital_game_b<S: Scalar>(rho: S, eps: S) -> Result<GameChain<S>> {
    check_rho(&rho)?;
    check_bias(&eps)?;
    capital_chain(capital_b_probabilities(&rho, &eps))
}

pub fn history_game_a<S: Scalar>(eps: S) -> Result<GameChain<S>> {
    check_bias(&eps)?;
    let p = half_minus(&eps);
    history_chain([p.clone(), p.clone(), p.clone(), p])
}

pub fn history_game_b<S: Scalar>(kappa: S, lambda: S, eps: S) -> Result<GameChain<S>> {
    check_kappa_lambda(&kappa, &lambda)?;
    check_bias(&eps)?;
    history_chain(history_b_probabilities(&kappa, &lambda, &eps))
}

/// `P_C = γ P_A + (1 − γ) P_B`; the payoff is shared.
pub fn mixture<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, gamma: S) -> Result<GameChain<S>> {
    if a.size() != b.size() || a.payoff != b.payoff {
        return Err(Error::SizeMismatch("mixed games must share state space and payoff".into()));
    }
    if gamma.sign() == Sign::Negative && !gamma.is_zero() || (gamma.clone() - S::one()).sign() == Sign::Positive {
        return Err(Error::Domain(format!("gamma = {gamma} must lie in [0, 1]")));
    }
    let pa = a.p().scale(&gamma);
    let pb = b.p().scale(&(S::one() - gamma));
    GameChain::new(TransitionMatrix::new(pa.add(&pb))?, a.payoff.clone())
}

/// Parameters of one family of game B.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyParams<S> {
    Capital { rho: S },
    History { kappa: S, lambda: S },
}

impl<S: Scalar> FamilyParams<S> {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Capital { .. } => Family::Capital,
            FamilyParams::History { .. } => Family::History,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FamilyParams::Capital { rho } => check_rho(rho),
            FamilyParams::History { kappa, lambda } => check_kappa_lambda(kappa, lambda),
        }
    }

    /// Game A with a possibly negative bias.
    pub fn game_a_signed(&self, eps: &S) -> Result<GameChain<S>> {
        let p = half_minus(eps);
        match self {
            FamilyParams::Capital { .. } => capital_chain([p.clone(), p.clone(), p]),
            FamilyParams::History { .. } => history_chain([p.clone(), p.clone(), p.clone(), p]),
        }
    }

    /// Game B with a possibly negative bias.
    pub fn game_b_signed(&self, eps: &S) -> Result<GameChain<S>> {
        self.validate()?;
        match self {
            FamilyParams::Capital { rho } => capital_chain(capital_b_probabilities(rho, eps)),
            FamilyParams::History { kappa, lambda } => history_chain(history_b_probabilities(kappa, lambda, eps)),
        }
    }

    /// Supremum of the biases keeping games A and B valid.
    pub fn max_eps(&self) -> S {
        let zero = S::zero();
        let mut best = half_minus(&zero);
        let ps: Vec<S> = match self {
            FamilyParams::Capital { rho } => capital_b_probabilities(rho, &zero).to_vec(),
            FamilyParams::History { kappa, lambda } => history_b_probabilities(kappa, lambda, &zero).to_vec(),
        };
        for p in ps {
            if p < best {
                best = p;
            }
        }
        best
    }
}

/// A point of a family together with mixture weight and bias.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamPoint<S> {
    #[serde(flatten)]
    pub params: FamilyParams<S>,
    pub gamma: S,
    pub eps: S,
}

impl<S: Scalar> ParamPoint<S> {
    pub fn capital(rho: S, gamma: S, eps: S) -> Result<Self> {
        Self::new(FamilyParams::Capital { rho }, gamma, eps)
    }

    pub fn history(kappa: S, lambda: S, gamma: S, eps: S) -> Result<Self> {
        Self::new(FamilyParams::History { kappa, lambda }, gamma, eps)
    }

    pub fn new(params: FamilyParams<S>, gamma: S, eps: S) -> Result<Self> {
        params.validate()?;
        check_bias(&eps)?;
        let point = ParamPoint { params, gamma, eps };
        point.game_c()?;
        Ok(point)
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn with_eps(&self, eps: S) -> Result<Self> {
        Self::new(self.params.clone(), self.gamma.clone(), eps)
    }

    pub fn game_a(&self) -> Result<GameChain<S>> {
        check_bias(&self.eps)?;
        self.params.game_a_signed(&self.eps)
    }

    pub fn game_b(&self) -> Result<GameChain<S>> {
        check_bias(&self.eps)?;
        self.params.game_b_signed(&self.eps)
    }

    pub fn game_c(&self) -> Result<GameChain<S>> {
        mixture(&self.game_a()?, &self.game_b()?, self.gamma.clone())
    }
}
