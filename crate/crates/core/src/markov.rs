//! Homogeneous finite Markov chains with a payoff function.
//!
//! For a chain `X_0, X_1, …` with row-stochastic transition matrix `P` and
//! payoff `w(i, j)`, the per-step profit `ξ_n = w(X_{n-1}, X_n)` obeys a law
//! of large numbers and a central limit theorem with parameters
//!
//! ```text
//! μ  = π P′ 1
//! σ² = π P″ 1 − (π P′ 1)² + 2 π P′ (Z − Π) P′ 1
//! ```
//!
//! where `P′ = P ∘ W`, `P″ = P ∘ W ∘ W`, `π` is the stationary distribution,
//! `Π` stacks `π` in every row and `Z = (I − P + Π)⁻¹` is the fundamental
//! matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dot, sum, Matrix};
use crate::scalar::{Scalar, Sign};

/// Tolerance on row sums for the float backend.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Row-stochastic matrix, `P[i][j] = P(X_n = j | X_{n-1} = i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix<S>(Matrix<S>);

impl<S: Scalar> TransitionMatrix<S> {
    pub fn new(m: Matrix<S>) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::SizeMismatch(format!(
                "transition matrix must be square and nonempty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        for i in 0..m.rows() {
            let row = m.row(i);
            let total = sum(row);
            let negative = row.iter().any(|x| x.sign() == Sign::Negative && !x.is_zero());
            let off = if S::EXACT { total != S::one() } else { (total.to_f64() - 1.0).abs() > ROW_SUM_TOLERANCE };
            if negative || off {
                return Err(Error::NotStochastic { row: i, sum: total.to_text() });
            }
        }
        Ok(TransitionMatrix(m))
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.0
    }

    /// Positive-entry pattern.
    pub fn support(&self) -> Support {
        Support::of(&self.0)
    }
}

/// Payoff matrix `W[i][j] = w(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMatrix<S>(Matrix<S>);

impl<S: Scalar> PayoffMatrix<S> {
    pub fn new(m: Matrix<S>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::SizeMismatch("payoff matrix must be square".into()));
        }
        if (0..m.rows()).any(|i| m.row(i).iter().any(|x| !x.to_f64().is_finite())) {
            return Err(Error::Domain("payoff entries must be finite".into()));
        }
        Ok(PayoffMatrix(m))
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.0
    }

    /// Largest |w(i, j)|.
    pub fn max_abs(&self) -> f64 {
        (0..self.size()).flat_map(|i| self.0.row(i).iter().map(|x| x.to_f64().abs())).fold(0.0, f64::max)
    }
}

/// A transition matrix together with the payoff collected on each transition.
#[derive(Clone, Debug, PartialEq)]
pub struct GameChain<S> {
    pub transition: TransitionMatrix<S>,
    pub payoff: PayoffMatrix<S>,
}

impl<S: Scalar> GameChain<S> {
    pub fn new(transition: TransitionMatrix<S>, payoff: PayoffMatrix<S>) -> Result<Self> {
        if transition.size() != payoff.size() {
            return Err(Error::SizeMismatch(format!(
                "transition is {0}x{0} but payoff is {1}x{1}",
                transition.size(),
                payoff.size()
            )));
        }
        Ok(GameChain { transition, payoff })
    }

    pub fn size(&self) -> usize {
        self.transition.size()
    }

    pub fn p(&self) -> &Matrix<S> {
        self.transition.matrix()
    }

    /// `P′`, entries `P_ij w(i,j)`.
    pub fn weighted(&self) -> Matrix<S> {
        self.p().hadamard(self.payoff.matrix())
    }

    /// `P″`, entries `P_ij w(i,j)²`.
    pub fn weighted_sq(&self) -> Matrix<S> {
        self.weighted().hadamard(self.payoff.matrix())
    }

    /// Expected one-step payoff from each state, `P′ 1`.
    pub fn drift(&self) -> Vec<S> {
        self.weighted().row_sums()
    }

    /// Same chain evaluated in another backend.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> GameChain<T> {
        GameChain { transition: TransitionMatrix(self.p().map(&f)), payoff: PayoffMatrix(self.payoff.matrix().map(&f)) }
    }
}

/// Boolean positive-entry pattern of a nonnegative matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Support {
    adj: Vec<Vec<bool>>,
}

impl Support {
    pub fn of<S: Scalar>(m: &Matrix<S>) -> Support {
        let adj = (0..m.rows()).map(|i| m.row(i).iter().map(|x| !x.is_zero()).collect()).collect();
        Support { adj }
    }

    pub fn size(&self) -> usize {
        self.adj.len()
    }

    /// Support of a product (boolean matrix multiplication).
    pub fn compose(&self, other: &Support) -> Support {
        let n = self.size();
        let adj = (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| self.adj[i][k] && other.adj[k][j])).collect()).collect();
        Support { adj }
    }

    fn reaches_all(&self, from: usize, transpose: bool) -> bool {
        let n = self.size();
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let edge = if transpose { self.adj[v][u] } else { self.adj[u][v] };
                if edge && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_irreducible(&self) -> bool {
        self.size() > 0 && self.reaches_all(0, false) && self.reaches_all(0, true)
    }

    /// Period of an irreducible support: gcd over edges `u → v` of
    /// `level(u) + 1 − level(v)` for BFS levels from state 0.
    pub fn period(&self) -> Option<usize> {
        if !self.is_irreducible() {
            return None;
        }
        let n = self.size();
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if self.adj[u][v] && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..n {
            for v in 0..n {
                if self.adj[u][v] {
                    let diff = (level[u] + 1).abs_diff(level[v]);
                    g = num_integer::gcd(g, diff);
                }
            }
        }
        Some(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainDiagnosis {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// `None` for a reducible chain.
    pub period: Option<usize>,
}

pub fn validate_chain<S: Scalar>(p: &TransitionMatrix<S>) -> ChainDiagnosis {
    let support = p.support();
    let period = support.period();
    ChainDiagnosis { irreducible: period.is_some(), aperiodic: period == Some(1), period }
}

/// Unique `π` with `π P = π`, `Σ π = 1`.
///
/// Solves `(I − Pᵀ) πᵀ = 0` with the last equation replaced by the
/// normalization.
pub fn stationary_distribution<S: Scalar>(p: &TransitionMatrix<S>) -> Result<Vec<S>> {
    if !p.support().is_irreducible() {
        return Err(Error::Reducible);
    }
    let n = p.size();
    let pm = p.matrix();
    let a = Matrix::from_fn(n, n, |i, j| {
        if i == n - 1 {
            S::one()
        } else if i == j {
            S::one() - pm[(j, i)].clone()
        } else {
            -pm[(j, i)].clone()
        }
    });
    let rhs = Matrix::from_fn(n, 1, |i, _| if i == n - 1 { S::one() } else { S::zero() });
    let x = a.solve(&rhs)?;
    Ok((0..n).map(|i| x[(i, 0)].clone()).collect())
}

/// `Z = (I − P + Π)⁻¹`. Periodic chains are accepted.
pub fn fundamental_matrix<S: Scalar>(p: &TransitionMatrix<S>, pi: &[S]) -> Result<Matrix<S>> {
    let n = p.size();
    if pi.len() != n {
        return Err(Error::SizeMismatch("stationary vector length".into()));
    }
    let big_pi = Matrix::stacked(pi, n);
    Matrix::identity(n).sub(p.matrix()).add(&big_pi).inverse()
}

/// `μ = π P′ 1`.
pub fn mean_parameter<S: Scalar>(chain: &GameChain<S>, pi: &[S]) -> S {
    dot(pi, &chain.drift())
}

/// `σ² = π P″ 1 − μ² + 2 π P′ (Z − Π) P′ 1`.
pub fn variance_parameter<S: Scalar>(chain: &GameChain<S>, pi: &[S], z: &Matrix<S>) -> S {
    let drift = chain.drift();
    let mu = dot(pi, &drift);
    let second = dot(pi, &chain.weighted_sq().row_sums());
    // (Z − Π) v = Z v − (π·v) 1
    let z_drift = z.mul_col(&drift);
    let centred: Vec<S> = z_drift.into_iter().map(|x| x - mu.clone()).collect();
    let left = chain.weighted().row_mul(pi);
    let cov = dot(&left, &centred);
    second - mu.clone() * mu + S::from_i64(2) * cov
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Winning,
    Losing,
    Fair,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Winning => "winning",
            Classification::Losing => "losing",
            Classification::Fair => "fair",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Winning if μ > 0, losing if μ < 0; floats within `1e-12` of zero are fair.
pub fn classify<S: Scalar>(mu: &S) -> Classification {
    match mu.sign() {
        Sign::Positive => Classification::Winning,
        Sign::Negative => Classification::Losing,
        Sign::Zero => Classification::Fair,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitParams<S> {
    pub mu: S,
    pub sigma2: S,
    pub classification: Classification,
}

impl<S: Scalar> LimitParams<S> {
    pub fn new(mu: S, sigma2: S) -> Self {
        let classification = classify(&mu);
        LimitParams { mu, sigma2, classification }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainAnalysis<S> {
    pub pi: Vec<S>,
    pub z: Matrix<S>,
    pub mu: S,
    pub sigma2: S,
}

impl<S: Scalar> ChainAnalysis<S> {
    pub fn limits(&self) -> LimitParams<S> {
        LimitParams::new(self.mu.clone(), self.sigma2.clone())
    }
}

pub fn analyze<S: Scalar>(chain: &GameChain<S>) -> Result<ChainAnalysis<S>> {
    let pi = stationary_distribution(&chain.transition)?;
    let z = fundamental_matrix(&chain.transition, &pi)?;
    let mu = mean_parameter(chain, &pi);
    let sigma2 = variance_parameter(chain, &pi, &z);
    Ok(ChainAnalysis { pi, z, mu, sigma2 })
}
