//! Periodic play: a finite word over `{A, B}` repeated forever.
//!
//! Three routes to `(μ, σ²)`:
//!
//! * [`pattern_limits_direct`]: the covariance-sum formulas evaluated along
//!   one period, for any word and any bias;
//! * [`pattern_mean_simplified`] / [`pattern_variance_simplified`]: the
//!   geometric-sum forms for `A^r B^s`, valid when `P_A′` has zero row sums
//!   and payoffs are `±1` on the support (true for both families at `ε = 0`);
//! * [`build_product_chain`] + [`pattern_limits_product`]: lift to the
//!   phase × state chain and analyze it as a homogeneous chain.
//!
//! Let `Q_0, …, Q_{L−1}` be the matrices played in order, `P = Q_0⋯Q_{L−1}`
//! with stationary `π` and fundamental matrix `Z`, and `ν_k = π Q_0⋯Q_{k−1}`.
//! With `m_k = ν_k Q_k′ 1`,
//!
//! ```text
//! μ        = L⁻¹ Σ_k m_k
//! Var(η)   = Σ_k (ν_k Q_k″ 1 − m_k²) + 2 Σ_{a<b} (ν_a Q_a′ Q_{a+1}⋯Q_{b−1} Q_b′ 1 − m_a m_b)
//! Σ Cov    = α (Z − Π) β,  α = Σ_a ν_a Q_a′ Q_{a+1}⋯Q_{L−1},  β = Σ_b Q_0⋯Q_{b−1} Q_b′ 1
//! σ²       = L⁻¹ (Var(η) + 2 Σ Cov)
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{
    analyze, fundamental_matrix, stationary_distribution, validate_chain, ChainDiagnosis, GameChain, LimitParams,
    PayoffMatrix, Support, TransitionMatrix,
};
use crate::matrix::{dot, sum, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Game {
    A,
    B,
}

/// A nonempty word over `{A, B}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PatternSpec {
    word: Vec<Game>,
}

impl PatternSpec {
    pub fn new(word: Vec<Game>) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::Domain("pattern word must be nonempty".into()));
        }
        Ok(PatternSpec { word })
    }

    /// `A^r B^s`.
    pub fn rs(r: usize, s: usize) -> Result<Self> {
        if r == 0 || s == 0 {
            return Err(Error::Domain(format!("[r,s] needs r, s >= 1, got [{r},{s}]")));
        }
        let mut word = vec![Game::A; r];
        word.extend(std::iter::repeat_n(Game::B, s));
        Self::new(word)
    }

    pub fn word(&self) -> &[Game] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(r, s)` when the word is `A^r B^s` with `r, s >= 1`.
    pub fn as_rs(&self) -> Option<(usize, usize)> {
        let r = self.word.iter().take_while(|g| **g == Game::A).count();
        let s = self.word.len() - r;
        let tail_ok = self.word[r..].iter().all(|g| *g == Game::B);
        (tail_ok && r > 0 && s > 0).then_some((r, s))
    }

    /// Leading `A` count.
    pub fn r(&self) -> usize {
        self.word.iter().take_while(|g| **g == Game::A).count()
    }

    /// Trailing `B` count.
    pub fn s(&self) -> usize {
        self.word.iter().rev().take_while(|g| **g == Game::B).count()
    }

    pub fn rotate(&self, k: usize) -> PatternSpec {
        let mut word = self.word.clone();
        word.rotate_left(k % self.word.len());
        PatternSpec { word }
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.word {
            f.write_str(match g {
                Game::A => "A",
                Game::B => "B",
            })?;
        }
        Ok(())
    }
}

impl FromStr for PatternSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let word = text
            .trim()
            .chars()
            .map(|c| match c {
                'A' | 'a' => Ok(Game::A),
                'B' | 'b' => Ok(Game::B),
                other => Err(Error::Domain(format!("pattern letter {other:?} is not A or B"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(word)
    }
}

impl Serialize for PatternSpec {
    fn serialize<Ser: serde::Serializer>(&self, ser: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        ser.collect_str(self)
    }
}

fn check_pair<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>) -> Result<()> {
    if a.size() != b.size() || a.payoff != b.payoff {
        return Err(Error::SizeMismatch("games A and B must share state space and payoff".into()));
    }
    Ok(())
}

fn pick<'a, S>(g: Game, a: &'a GameChain<S>, b: &'a GameChain<S>) -> &'a GameChain<S> {
    match g {
        Game::A => a,
        Game::B => b,
    }
}

/// Every cyclic permutation of the one-period product must be irreducible
/// and aperiodic.
pub fn validate_word<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, word: &PatternSpec) -> Result<()> {
    check_pair(a, b)?;
    let sa = Support::of(a.p());
    let sb = Support::of(b.p());
    for k in 0..word.len() {
        let rotated = word.rotate(k);
        let mut support: Option<Support> = None;
        for g in rotated.word() {
            let next = match g {
                Game::A => &sa,
                Game::B => &sb,
            };
            support = Some(match support {
                None => next.clone(),
                Some(acc) => acc.compose(next),
            });
        }
        match support.unwrap().period() {
            None => return Err(Error::Reducible),
            Some(1) => {}
            Some(period) => return Err(Error::Periodic { period }),
        }
    }
    Ok(())
}

/// Direct covariance-sum evaluation for any word.
pub fn pattern_limits_direct<S: Scalar>(
    a: &GameChain<S>,
    b: &GameChain<S>,
    word: &PatternSpec,
) -> Result<LimitParams<S>> {
    validate_word(a, b, word)?;
    let t = a.size();
    let len = word.len();
    let steps: Vec<&GameChain<S>> = word.word().iter().map(|g| pick(*g, a, b)).collect();
    let weighted: Vec<Matrix<S>> = steps.iter().map(|c| c.weighted()).collect();
    let drift: Vec<Vec<S>> = weighted.iter().map(|w| w.row_sums()).collect();
    let second: Vec<Vec<S>> = steps.iter().map(|c| c.weighted_sq().row_sums()).collect();

    let mut full = Matrix::identity(t);
    for c in &steps {
        full = full.mul(c.p());
    }
    let full = TransitionMatrix::new(full)?;
    let pi = stationary_distribution(&full)?;
    let z = fundamental_matrix(&full, &pi)?;

    let mut nu = Vec::with_capacity(len);
    let mut cur = pi.clone();
    for c in &steps {
        nu.push(cur.clone());
        cur = c.p().row_mul(&cur);
    }
    let m: Vec<S> = (0..len).map(|k| dot(&nu[k], &drift[k])).collect();
    let mu_total = sum(&m);

    let two = S::from_i64(2);
    let mut var = S::zero();
    for k in 0..len {
        var += dot(&nu[k], &second[k]) - m[k].clone() * m[k].clone();
    }
    let mut alpha = vec![S::zero(); t];
    for a_idx in 0..len {
        let mut x = weighted[a_idx].row_mul(&nu[a_idx]);
        for b_idx in a_idx + 1..len {
            let cross = dot(&x, &drift[b_idx]) - m[a_idx].clone() * m[b_idx].clone();
            var += two.clone() * cross;
            x = steps[b_idx].p().row_mul(&x);
        }
        for (acc, v) in alpha.iter_mut().zip(x) {
            *acc += v;
        }
    }
    let mut beta = drift[len - 1].clone();
    for k in (0..len - 1).rev() {
        beta = steps[k].p().mul_col(&beta).into_iter().zip(&drift[k]).map(|(x, d)| x + d.clone()).collect();
    }
    // α (Z − Π) β = α Z β − (α 1)(π β)
    let covsum = dot(&alpha, &z.mul_col(&beta)) - sum(&alpha) * dot(&pi, &beta);

    let l = S::from_i64(len as i64);
    let mu = mu_total / l.clone();
    let sigma2 = (var + two * covsum) / l;
    Ok(LimitParams::new(mu, sigma2))
}

/// `μ` alone by the direct method, skipping the variance work.
pub fn pattern_mean_word<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, word: &PatternSpec) -> Result<S> {
    validate_word(a, b, word)?;
    let steps: Vec<&GameChain<S>> = word.word().iter().map(|g| pick(*g, a, b)).collect();
    let mut full = Matrix::identity(a.size());
    for c in &steps {
        full = full.mul(c.p());
    }
    let mut nu = stationary_distribution(&TransitionMatrix::new(full)?)?;
    let mut total = S::zero();
    for c in &steps {
        total += dot(&nu, &c.drift());
        nu = c.p().row_mul(&nu);
    }
    Ok(total / S::from_i64(word.len() as i64))
}

/// `μ_[r,s]` by the direct method.
pub fn pattern_mean_direct<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, r: usize, s: usize) -> Result<S> {
    pattern_mean_word(a, b, &PatternSpec::rs(r, s)?)
}

/// `σ²_[r,s]` by the direct method.
pub fn pattern_variance_direct<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, r: usize, s: usize) -> Result<S> {
    Ok(pattern_limits_direct(a, b, &PatternSpec::rs(r, s)?)?.sigma2)
}

/// Shared pieces of the simplified `[r,s]` forms.
struct Simplified<S> {
    pa: Matrix<S>,
    pa_w: Matrix<S>,
    pb: Matrix<S>,
    pb_w: Matrix<S>,
    zeta: Vec<S>,
    pi: Vec<S>,
    pi_sr: Vec<S>,
    z: Matrix<S>,
}

impl<S: Scalar> Simplified<S> {
    fn new(a: &GameChain<S>, b: &GameChain<S>, r: usize, s: usize) -> Result<Self> {
        let word = PatternSpec::rs(r, s)?;
        validate_word(a, b, &word)?;
        let pa_w = a.weighted();
        if pa_w.row_sums().iter().any(|x| !x.is_zero()) {
            return Err(Error::Domain("simplified forms need P_A' with zero row sums".into()));
        }
        for chain in [a, b] {
            let w = chain.payoff.matrix();
            let p = chain.p();
            for i in 0..p.rows() {
                for j in 0..p.cols() {
                    let ok = p[(i, j)].is_zero() || (w[(i, j)].clone() * w[(i, j)].clone() - S::one()).is_zero();
                    if !ok {
                        return Err(Error::Domain("simplified forms need payoffs of +-1 on the support".into()));
                    }
                }
            }
        }
        let pa = a.p().clone();
        let pb = b.p().clone();
        let full = TransitionMatrix::new(pa.pow(r).mul(&pb.pow(s)))?;
        let pi = stationary_distribution(&full)?;
        let z = fundamental_matrix(&full, &pi)?;
        let pi_sr = pa.pow(r).row_mul(&pi);
        let pb_w = b.weighted();
        let zeta = pb_w.row_sums();
        Ok(Simplified { pa, pa_w, pb, pb_w, zeta, pi, pi_sr, z })
    }

    /// `G_v ζ = (I + P_B + ⋯ + P_B^{v−1}) ζ`.
    fn g_zeta(&self, v: usize) -> Vec<S> {
        let mut acc = vec![S::zero(); self.zeta.len()];
        let mut term = self.zeta.clone();
        for _ in 0..v {
            for (x, y) in acc.iter_mut().zip(&term) {
                *x += y.clone();
            }
            term = self.pb.mul_col(&term);
        }
        acc
    }

    fn pb_pow_zeta(&self, v: usize) -> Vec<S> {
        self.pb.pow(v).mul_col(&self.zeta)
    }
}

/// `μ_[r,s] = (r+s)⁻¹ π_{s,r} (I + P_B + ⋯ + P_B^{s−1}) ζ`.
pub fn pattern_mean_simplified<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, r: usize, s: usize) -> Result<S> {
    let k = Simplified::new(a, b, r, s)?;
    Ok(dot(&k.pi_sr, &k.g_zeta(s)) / S::from_i64((r + s) as i64))
}

/// Geometric-sum forms of `Var(η₁)` and the covariance sum.
pub fn pattern_variance_simplified<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, r: usize, s: usize) -> Result<S> {
    let k = Simplified::new(a, b, r, s)?;
    let two = S::from_i64(2);
    let gs_zeta = k.g_zeta(s);
    let m: Vec<S> = (0..s).map(|v| dot(&k.pi_sr, &k.pb_pow_zeta(v))).collect();

    let mut var = S::from_i64((r + s) as i64);
    for mv in &m {
        var -= mv.clone() * mv.clone();
    }
    // A-step to B-block cross terms
    let mut alpha_a = vec![S::zero(); k.pi.len()];
    for u in 0..r {
        let row = k.pa.pow(r - u - 1).row_mul(&k.pa_w.row_mul(&k.pa.pow(u).row_mul(&k.pi)));
        var += two.clone() * dot(&row, &gs_zeta);
        for (x, y) in alpha_a.iter_mut().zip(k.pb.pow(s).row_mul(&row)) {
            *x += y;
        }
    }
    // B-step pairs inside the block
    for v in 1..s {
        for u in 0..v {
            let row = k.pb_w.row_mul(&k.pb.pow(u).row_mul(&k.pi_sr));
            var += two.clone() * dot(&row, &k.pb_pow_zeta(v - u - 1));
        }
        var -= two.clone() * dot(&k.pi_sr, &k.g_zeta(v)) * m[v].clone();
    }

    let mut alpha_b = vec![S::zero(); k.pi.len()];
    for u in 0..s {
        let row = k.pb.pow(s - u - 1).row_mul(&k.pb_w.row_mul(&k.pb.pow(u).row_mul(&k.pi_sr)));
        for (x, y) in alpha_b.iter_mut().zip(row) {
            *x += y;
        }
    }
    let beta = k.pa.pow(r).mul_col(&gs_zeta);
    let centred = {
        let zb = k.z.mul_col(&beta);
        let pb = dot(&k.pi, &beta);
        zb.into_iter().map(|x| x - pb.clone()).collect::<Vec<_>>()
    };
    let covsum = dot(&alpha_a, &centred) + dot(&alpha_b, &centred);
    Ok((var + two * covsum) / S::from_i64((r + s) as i64))
}

/// Time-homogeneous lift of periodic play onto `{0..L−1} × Σ`.
///
/// State `(i, j)` has index `i·t + j`; block `(i, i+1 mod L)` is the matrix
/// of the `i`-th letter.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductChain<S> {
    pub chain: GameChain<S>,
    pub word: PatternSpec,
    pub base_size: usize,
    pub diagnosis: ChainDiagnosis,
}

impl<S: Scalar> ProductChain<S> {
    /// `true` when the period is a proper divisor of the word length.
    pub fn period_is_divisor(&self) -> bool {
        matches!(self.diagnosis.period, Some(d) if d != self.word.len())
    }
}

pub fn build_product_chain<S: Scalar>(
    a: &GameChain<S>,
    b: &GameChain<S>,
    word: &PatternSpec,
) -> Result<ProductChain<S>> {
    check_pair(a, b)?;
    let t = a.size();
    let len = word.len();
    let n = len * t;
    let mut p = Matrix::zeros(n, n);
    let w = a.payoff.matrix();
    let mut wbar = Matrix::zeros(n, n);
    for (i, g) in word.word().iter().enumerate() {
        let q = pick(*g, a, b).p();
        let next = (i + 1) % len;
        for j in 0..t {
            for k in 0..t {
                p[(i * t + j, next * t + k)] = q[(j, k)].clone();
            }
        }
    }
    for i in 0..len {
        for i2 in 0..len {
            for j in 0..t {
                for k in 0..t {
                    wbar[(i * t + j, i2 * t + k)] = w[(j, k)].clone();
                }
            }
        }
    }
    let transition = TransitionMatrix::new(p)?;
    let diagnosis = validate_chain(&transition);
    let chain = GameChain::new(transition, PayoffMatrix::new(wbar)?)?;
    Ok(ProductChain { chain, word: word.clone(), base_size: t, diagnosis })
}

/// Product-chain `(μ̄, σ̄²)` scaled to per-game values.
///
/// The lifted chain moves one game per step, so its parameters are already
/// per game.
pub fn pattern_limits_product<S: Scalar>(pc: &ProductChain<S>) -> Result<LimitParams<S>> {
    if !pc.diagnosis.irreducible {
        return Err(Error::Reducible);
    }
    Ok(analyze(&pc.chain)?.limits())
}

/// Any word, by the product-space method.
pub fn general_word_limits<S: Scalar>(
    a: &GameChain<S>,
    b: &GameChain<S>,
    word: &PatternSpec,
) -> Result<LimitParams<S>> {
    validate_word(a, b, word)?;
    pattern_limits_product(&build_product_chain(a, b, word)?)
}
