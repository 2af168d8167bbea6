//! Seeded simulation of single games, mixtures and pattern words, with
//! SLLN and CLT diagnostics.
//!
//! Replication `k` draws from `ChaCha8Rng::seed_from_u64(master_seed)` with
//! its stream set to `k`, so results do not depend on the thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::markov::{stationary_distribution, GameChain, TransitionMatrix};
use crate::matrix::Matrix;
use crate::patterns::{validate_word, Game, PatternSpec};
use crate::scalar::Scalar;

/// Recorded in every result.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Asymptotic Kolmogorov–Smirnov constant at the 0.1% level.
pub const KS_CRITICAL_0_001: f64 = 1.9495;

pub const VAR_RATIO_BAND: (f64, f64) = (0.9, 1.1);

pub const MIN_CLT_REPLICATIONS: u64 = 200;

/// Allowed SLLN deviation, in standard errors.
pub const SLLN_SIGMAS: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub enum SimGame {
    Chain(GameChain<f64>),
    /// Each round plays A with probability `gamma`, otherwise B.
    Mixture {
        a: GameChain<f64>,
        b: GameChain<f64>,
        gamma: f64,
    },
    /// Round `k` plays `word[k mod L]`.
    Word {
        a: GameChain<f64>,
        b: GameChain<f64>,
        word: PatternSpec,
    },
}

impl SimGame {
    pub fn chain<S: Scalar>(c: &GameChain<S>) -> Self {
        SimGame::Chain(c.convert(S::to_f64))
    }

    pub fn mixture<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, gamma: &S) -> Self {
        SimGame::Mixture { a: a.convert(S::to_f64), b: b.convert(S::to_f64), gamma: gamma.to_f64() }
    }

    pub fn word<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, word: &PatternSpec) -> Self {
        SimGame::Word { a: a.convert(S::to_f64), b: b.convert(S::to_f64), word: word.clone() }
    }

    fn states(&self) -> usize {
        match self {
            SimGame::Chain(c) => c.size(),
            SimGame::Mixture { a, .. } | SimGame::Word { a, .. } => a.size(),
        }
    }

    fn max_abs_payoff(&self) -> f64 {
        match self {
            SimGame::Chain(c) => c.payoff.max_abs(),
            SimGame::Mixture { a, .. } | SimGame::Word { a, .. } => a.payoff.max_abs(),
        }
    }

    /// Stationary law of `X_0` (of the one-period product for words).
    fn initial_law(&self) -> Result<Vec<f64>> {
        let p = match self {
            SimGame::Chain(c) => c.p().clone(),
            SimGame::Mixture { a, b, gamma } => a.p().scale(gamma).add(&b.p().scale(&(1.0 - gamma))),
            SimGame::Word { a, b, word } => {
                validate_word(a, b, word)?;
                word.word().iter().fold(Matrix::identity(a.size()), |acc, g| {
                    acc.mul(match g {
                        Game::A => a.p(),
                        Game::B => b.p(),
                    })
                })
            }
        };
        stationary_distribution(&TransitionMatrix::new(p)?)
    }
}

/// Serialized as the state index or `"stationary"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialState {
    State(usize),
    Stationary,
}

impl Serialize for InitialState {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InitialState::State(i) => ser.serialize_u64(*i as u64),
            InitialState::Stationary => ser.serialize_str("stationary"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub game: SimGame,
    pub n_games: u64,
    pub replications: u64,
    pub master_seed: u64,
    pub initial_state: InitialState,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub rng: &'static str,
    pub master_seed: u64,
    pub n_games: u64,
    pub replications: u64,
    pub initial_state: InitialState,
    pub states: usize,
    pub max_abs_payoff: f64,
    /// `S_n` of each replication, in replication order.
    pub finals: Vec<f64>,
    /// `Σ S_n / (n · replications)`
    pub mean_per_game: f64,
    /// Sample variance of `S_n` divided by `n`; `None` for one replication.
    pub var_per_game: Option<f64>,
}

impl SimResult {
    /// `(S_n − nμ)/√(nσ²)` per replication.
    pub fn standardized(&self, mu: f64, sigma2: f64) -> Vec<f64> {
        let n = self.n_games as f64;
        self.finals.iter().map(|s| (s - n * mu) / (n * sigma2).sqrt()).collect()
    }
}

/// Cumulative rows for inverse-CDF sampling.
struct Sampler {
    cum: Vec<Vec<f64>>,
    pay: Matrix<f64>,
}

impl Sampler {
    fn new(c: &GameChain<f64>) -> Self {
        let p = c.p();
        let cum = (0..p.rows())
            .map(|i| {
                let mut acc = 0.0;
                p.row(i)
                    .iter()
                    .map(|x| {
                        acc += x;
                        acc
                    })
                    .collect()
            })
            .collect();
        Sampler { cum, pay: c.payoff.matrix().clone() }
    }

    fn step(&self, state: usize, u: f64) -> (usize, f64) {
        let row = &self.cum[state];
        let last = row.len() - 1;
        let next = row.iter().position(|&c| u < c).unwrap_or(last);
        (next, self.pay[(state, next)])
    }
}

fn sample_law(law: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in law.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    law.len() - 1
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    if config.n_games == 0 || config.replications == 0 {
        return Err(Error::InvalidConfig("n_games and replications must be at least 1".into()));
    }
    let states = config.game.states();
    if let InitialState::State(i) = config.initial_state {
        if i >= states {
            return Err(Error::InvalidConfig(format!("initial state {i} out of range 0..{states}")));
        }
    }
    let law = match config.initial_state {
        InitialState::Stationary => Some(config.game.initial_law()?),
        InitialState::State(_) => {
            if let SimGame::Word { a, b, word } = &config.game {
                validate_word(a, b, word)?;
            }
            None
        }
    };
    let (samplers, schedule, gamma): (Vec<Sampler>, Vec<usize>, f64) = match &config.game {
        SimGame::Chain(c) => (vec![Sampler::new(c)], vec![0], 0.0),
        SimGame::Mixture { a, b, gamma } => (vec![Sampler::new(a), Sampler::new(b)], vec![], *gamma),
        SimGame::Word { a, b, word } => (
            vec![Sampler::new(a), Sampler::new(b)],
            word.word().iter().map(|g| if *g == Game::A { 0 } else { 1 }).collect(),
            0.0,
        ),
    };
    let n = config.n_games;
    let run = |rep: u64| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
        rng.set_stream(rep);
        let mut state = match (&law, config.initial_state) {
            (Some(law), _) => sample_law(law, rng.gen::<f64>()),
            (None, InitialState::State(i)) => i,
            (None, InitialState::Stationary) => unreachable!(),
        };
        let mut total = 0.0;
        for k in 0..n {
            let which = if schedule.is_empty() {
                usize::from(rng.gen::<f64>() >= gamma)
            } else {
                schedule[(k % schedule.len() as u64) as usize]
            };
            let (next, w) = samplers[which].step(state, rng.gen::<f64>());
            total += w;
            state = next;
        }
        total
    };
    let finals: Vec<f64> = (0..config.replications).into_par_iter().map(run).collect();

    let m = finals.len() as f64;
    let nf = n as f64;
    let mean_s = finals.iter().sum::<f64>() / m;
    let var_per_game =
        (finals.len() > 1).then(|| finals.iter().map(|s| (s - mean_s).powi(2)).sum::<f64>() / (m - 1.0) / nf);
    Ok(SimResult {
        rng: RNG_ALGORITHM,
        master_seed: config.master_seed,
        n_games: n,
        replications: config.replications,
        initial_state: config.initial_state,
        states,
        max_abs_payoff: config.game.max_abs_payoff(),
        mean_per_game: mean_s / nf,
        finals,
        var_per_game,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SllnReport {
    pub pass: bool,
    /// Deviation in standard errors; `None` when `σ² = 0`.
    pub z: Option<f64>,
    pub deviation: f64,
    pub tolerance: f64,
}

/// Passes iff `|mean − μ| ≤ 5 √(σ²/(n · replications))`.
///
/// With `σ² = 0` the walk `S_n − nμ` stays bounded; the tolerance becomes
/// `states · max|w| / n` and exceeding it is an error.
pub fn slln_check(result: &SimResult, mu: f64, sigma2: f64) -> Result<SllnReport> {
    if result.finals.is_empty() {
        return Err(Error::InvalidConfig("empty simulation result".into()));
    }
    if sigma2 < 0.0 {
        return Err(Error::Domain(format!("sigma2 = {sigma2} is negative")));
    }
    let deviation = (result.mean_per_game - mu).abs();
    let n = result.n_games as f64;
    if sigma2 == 0.0 {
        let tolerance = result.states as f64 * result.max_abs_payoff / n;
        if deviation > tolerance {
            return Err(Error::ZeroVariance(format!("deviation {deviation} exceeds bounded-walk bound {tolerance}")));
        }
        return Ok(SllnReport { pass: true, z: None, deviation, tolerance });
    }
    let se = (sigma2 / (n * result.replications as f64)).sqrt();
    let tolerance = SLLN_SIGMAS * se;
    Ok(SllnReport { pass: deviation <= tolerance, z: Some(deviation / se), deviation, tolerance })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltReport {
    pub pass: bool,
    pub ks_stat: f64,
    pub ks_critical: f64,
    /// Sample variance of `S_n` over `nσ²`.
    pub var_ratio: f64,
    pub replications: u64,
}

/// One-sample Kolmogorov–Smirnov distance from the standard normal.
pub fn ks_statistic(sample: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max)
}

/// KS test of the standardized finals at the 0.1% level plus a variance
/// ratio in `[0.9, 1.1]`.
pub fn clt_check(result: &SimResult, mu: f64, sigma2: f64) -> Result<CltReport> {
    if sigma2 <= 0.0 {
        return Err(Error::ZeroVariance("CLT needs sigma2 > 0".into()));
    }
    if result.replications < MIN_CLT_REPLICATIONS {
        return Err(Error::InvalidConfig(format!("clt_check needs at least {MIN_CLT_REPLICATIONS} replications")));
    }
    let z = result.standardized(mu, sigma2);
    let ks_stat = ks_statistic(&z);
    let m = z.len() as f64;
    let ks_critical = KS_CRITICAL_0_001 / m.sqrt();
    let zbar = z.iter().sum::<f64>() / m;
    let var_ratio = z.iter().map(|x| (x - zbar).powi(2)).sum::<f64>() / (m - 1.0);
    let pass = ks_stat < ks_critical && (VAR_RATIO_BAND.0..=VAR_RATIO_BAND.1).contains(&var_ratio);
    Ok(CltReport { pass, ks_stat, ks_critical, var_ratio, replications: result.replications })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{capital_game_a, capital_game_b};
    use crate::markov::{PayoffMatrix, TransitionMatrix};

    fn config(game: SimGame, n: u64, reps: u64, seed: u64) -> SimConfig {
        SimConfig { game, n_games: n, replications: reps, master_seed: seed, initial_state: InitialState::State(0) }
    }

    #[test]
    fn fair_coin_mean() {
        let a = capital_game_a(0.0).unwrap();
        let n = 1_000_000;
        let r = simulate(&config(SimGame::chain(&a), n, 1, 7)).unwrap();
        assert!(r.mean_per_game.abs() < 5.0 / (n as f64).sqrt());
        assert!(r.finals[0].abs() <= n as f64);
    }

    #[test]
    fn determinism_and_thread_independence() {
        let a = capital_game_a(0.0).unwrap();
        let b = capital_game_b(1.0 / 3.0, 0.0).unwrap();
        let cfg = config(SimGame::mixture(&a, &b, &0.5), 2_000, 16, 99);
        let first = simulate(&cfg).unwrap();
        assert_eq!(first, simulate(&cfg).unwrap());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        assert_eq!(first, pool.install(|| simulate(&cfg).unwrap()));
        let two = simulate(&config(SimGame::mixture(&a, &b, &0.5), 2_000, 2, 99)).unwrap();
        assert_eq!(two.finals[..], first.finals[..2]);
    }

    #[test]
    fn bad_configs() {
        let a = capital_game_a(0.0).unwrap();
        let mut cfg = config(SimGame::chain(&a), 10, 1, 1);
        cfg.initial_state = InitialState::State(3);
        assert!(matches!(simulate(&cfg), Err(Error::InvalidConfig(_))));
        cfg.initial_state = InitialState::State(0);
        cfg.n_games = 0;
        assert!(simulate(&cfg).is_err());
    }

    fn telescoping() -> GameChain<f64> {
        let p = Matrix::from_rows(vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3], vec![0.25, 0.25, 0.5]]).unwrap();
        let w = Matrix::from_fn(3, 3, |i, j| j as f64 - i as f64);
        GameChain::new(TransitionMatrix::new(p).unwrap(), PayoffMatrix::new(w).unwrap()).unwrap()
    }

    #[test]
    fn slln_checks() {
        let t = telescoping();
        let r = simulate(&config(SimGame::chain(&t), 10_001, 3, 5)).unwrap();
        assert!(r.finals.iter().all(|s| s.abs() <= 2.0));
        let rep = slln_check(&r, 0.0, 0.0).unwrap();
        assert!(rep.pass && rep.z.is_none());
        assert!(matches!(slln_check(&r, 0.5, 0.0), Err(Error::ZeroVariance(_))));

        let a = capital_game_a(0.0).unwrap();
        let n = 100_000u64;
        let r = simulate(&config(SimGame::chain(&a), n, 4, 11)).unwrap();
        assert!(slln_check(&r, 0.0, 1.0).unwrap().pass);
        let off = 10.0 / ((n * 4) as f64).sqrt();
        assert!(!slln_check(&r, off, 1.0).unwrap().pass);
    }

    #[test]
    fn clt_preconditions_and_fair_coin() {
        let a = capital_game_a(0.0).unwrap();
        let small = simulate(&config(SimGame::chain(&a), 100, 10, 3)).unwrap();
        assert!(matches!(clt_check(&small, 0.0, 1.0), Err(Error::InvalidConfig(_))));
        assert!(matches!(clt_check(&small, 0.0, 0.0), Err(Error::ZeroVariance(_))));
        let r = simulate(&config(SimGame::chain(&a), 2_000, 400, 20240501)).unwrap();
        let rep = clt_check(&r, 0.0, 1.0).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn ks_statistic_known_values() {
        assert!((ks_statistic(&[0.0]) - 0.5).abs() < 1e-12);
        let far = ks_statistic(&[10.0, 11.0, 12.0]);
        assert!((far - 1.0).abs() < 1e-9);
    }

    #[test]
    fn initial_state_insensitivity() {
        let a = capital_game_a(0.0).unwrap();
        let b = capital_game_b(1.0 / 3.0, 0.0).unwrap();
        let word = PatternSpec::rs(2, 2).unwrap();
        let (n, reps) = (50_000u64, 8u64);
        let mut from_zero = config(SimGame::word(&a, &b, &word), n, reps, 1);
        let zero = simulate(&from_zero).unwrap();
        from_zero.initial_state = InitialState::Stationary;
        from_zero.master_seed = 2;
        let stat = simulate(&from_zero).unwrap();
        let sigma2 = 1923037543.0 / 2195688729.0;
        let se = (2.0 * sigma2 / (n * reps) as f64).sqrt();
        assert!((zero.mean_per_game - stat.mean_per_game).abs() < 3.0 * se);
    }
}
