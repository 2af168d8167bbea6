//! Sign classification, fairness thresholds, large-`s` limits, fair-surface
//! convexity and parameter-plane grids.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{check_kappa_lambda, check_rho, mixture, Family, FamilyParams, ParamPoint};
use crate::markov::{
    analyze, classify, mean_parameter, stationary_distribution, Classification, GameChain, LimitParams,
};
use crate::matrix::dot;
use crate::patterns::{pattern_limits_direct, pattern_mean_word, PatternSpec};
use crate::scalar::{Rational, Scalar, Sign};
use crate::spectral::{a_r, region_label};

/// Which game's parameters are being asked for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "word", rename_all = "lowercase")]
pub enum Target {
    A,
    B,
    /// Random mixture with the point's `γ`.
    Mixture,
    Pattern(PatternSpec),
}

fn games_at<S: Scalar>(params: &FamilyParams<S>, eps: &S) -> Result<(GameChain<S>, GameChain<S>)> {
    Ok((params.game_a_signed(eps)?, params.game_b_signed(eps)?))
}

/// `(μ, σ²)` of a target at bias `eps`; negative biases are allowed so
/// that central differences can straddle zero.
pub fn target_limits<S: Scalar>(
    params: &FamilyParams<S>,
    gamma: &S,
    target: &Target,
    eps: &S,
) -> Result<LimitParams<S>> {
    let (a, b) = games_at(params, eps)?;
    match target {
        Target::A => Ok(analyze(&a)?.limits()),
        Target::B => Ok(analyze(&b)?.limits()),
        Target::Mixture => Ok(analyze(&mixture(&a, &b, gamma.clone())?)?.limits()),
        Target::Pattern(word) => pattern_limits_direct(&a, &b, word),
    }
}

/// `μ` alone of a target at bias `eps`.
pub fn target_mean<S: Scalar>(params: &FamilyParams<S>, gamma: &S, target: &Target, eps: &S) -> Result<S> {
    let (a, b) = games_at(params, eps)?;
    let single = |c: &GameChain<S>| -> Result<S> {
        let pi = stationary_distribution(&c.transition)?;
        Ok(mean_parameter(c, &pi))
    };
    match target {
        Target::A => single(&a),
        Target::B => single(&b),
        Target::Mixture => single(&mixture(&a, &b, gamma.clone())?),
        Target::Pattern(word) => pattern_mean_word(&a, &b, word),
    }
}

fn check_gamma_open<S: Scalar>(gamma: &S) -> Result<()> {
    let inside = gamma.sign() == Sign::Positive && (S::one() - gamma.clone()).sign() == Sign::Positive;
    if !inside {
        return Err(Error::Domain(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    Ok(())
}

/// `μ_C(0)` for the capital family; winning exactly when `ρ < 1`.
pub fn mixture_sign_capital<S: Scalar>(rho: &S, gamma: &S) -> Result<LimitParams<S>> {
    check_rho(rho)?;
    check_gamma_open(gamma)?;
    let params = FamilyParams::Capital { rho: rho.clone() };
    target_limits(&params, gamma, &Target::Mixture, &S::zero())
}

/// `μ_C(0)` for the history family; winning when `κ < λ < 1` or `κ > λ > 1`.
pub fn mixture_sign_history<S: Scalar>(kappa: &S, lambda: &S, gamma: &S) -> Result<LimitParams<S>> {
    check_kappa_lambda(kappa, lambda)?;
    check_gamma_open(gamma)?;
    let params = FamilyParams::History { kappa: kappa.clone(), lambda: lambda.clone() };
    target_limits(&params, gamma, &Target::Mixture, &S::zero())
}

/// Bisection stops once the bracket is this narrow.
pub const FAIRNESS_WIDTH: f64 = 1e-12;

/// Distance kept from the largest valid bias.
pub const EPS_MAX_GUARD: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct FairnessRoot {
    /// Midpoint of the final bracket.
    pub eps0: Rational,
    /// `μ(lo) > 0`.
    pub lo: Rational,
    /// `μ(hi) ≤ 0`, unless `saturated`.
    pub hi: Rational,
    pub eps_max: Rational,
    /// `μ` stayed positive all the way to `eps_max`.
    pub saturated: bool,
    pub mu0: Rational,
}

/// Largest bias keeping the target winning, by bisection with exact sign
/// evaluations.
pub fn fairness_epsilon(point: &ParamPoint<Rational>, target: &Target) -> Result<FairnessRoot> {
    let params = &point.params;
    let gamma = &point.gamma;
    let zero = Rational::zero();
    let mu0 = target_mean(params, gamma, target, &zero)?;
    if mu0.sign() != Sign::Positive {
        return Err(Error::NoParrondoWindow { mu0: mu0.to_string() });
    }
    let guard = Rational::from_f64(EPS_MAX_GUARD).unwrap();
    let eps_max = params.max_eps() - guard;
    let positive =
        |eps: &Rational| -> Result<bool> { Ok(target_mean(params, gamma, target, eps)?.sign() == Sign::Positive) };
    if positive(&eps_max)? {
        return Ok(FairnessRoot {
            eps0: eps_max.clone(),
            lo: eps_max.clone(),
            hi: eps_max.clone(),
            eps_max,
            saturated: true,
            mu0,
        });
    }
    let width = Rational::from_f64(FAIRNESS_WIDTH).unwrap();
    let two = Rational::from_i64(2);
    let (mut lo, mut hi) = (zero, eps_max.clone());
    while hi.clone() - lo.clone() > width {
        let exact_mid = (lo.clone() + hi.clone()) / two.clone();
        let mid = Rational::from_f64(exact_mid.to_f64()).filter(|m| *m > lo && *m < hi).unwrap_or(exact_mid);
        if positive(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eps0 = (lo.clone() + hi.clone()) / two;
    Ok(FairnessRoot { eps0, lo, hi, eps_max, saturated: false, mu0 })
}

/// `lim_{s→∞} (r+s) μ_[r,s](0) = π_B P_A^r Z_B ζ` with `ζ = P_B′ 1`.
pub fn pattern_limit<S: Scalar>(a: &GameChain<S>, b: &GameChain<S>, r: usize) -> Result<S> {
    if r == 0 {
        return Err(Error::Domain("r must be at least 1".into()));
    }
    let an = analyze(b)?;
    let row = a.p().pow(r).row_mul(&an.pi);
    Ok(dot(&row, &an.z.mul_col(&b.drift())))
}

/// `3 a_r (1−ρ)³ (1+ρ) / (2 (1+ρ+ρ²)²)`
pub fn capital_limit_closed<S: Scalar>(rho: &S, r: u32) -> S {
    let one = S::one();
    let om = one.clone() - rho.clone();
    let s = one.clone() + rho.clone() + rho.clone() * rho.clone();
    S::from_i64(3) * a_r::<S>(r) * om.powi(3) * (one + rho.clone()) / (S::from_i64(2) * s.clone() * s)
}

/// `(1+κ)(λ−κ)(1−λ) / (4λ(2+κ+λ))`, independent of `r`.
pub fn history_limit_closed<S: Scalar>(kappa: &S, lambda: &S) -> S {
    let one = S::one();
    (one.clone() + kappa.clone()) * (lambda.clone() - kappa.clone()) * (one - lambda.clone())
        / (S::from_i64(4) * lambda.clone() * (S::from_i64(2) + kappa.clone() + lambda.clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub family: Family,
    /// `g″(p0)` (capital) or `h″(0)` (history).
    pub second_derivative: f64,
    pub sign: Sign,
    pub convex_along_segment: bool,
}

/// Capital fair surface `p1 = p2 = g(p0) = 1/(1 + √(p0/(1−p0)))`.
///
/// With `t = √(p0/(1−p0))`,
/// `g″(p0) = t[(1 − 4p0) + (3 − 4p0)t] / (4 p0² (1−p0)² (1+t)³)`.
pub fn capital_convexity(p0: f64) -> Result<ConvexityReport> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Domain(format!("p0 = {p0} is not in (0, 1)")));
    }
    let q0 = 1.0 - p0;
    let t = (p0 / q0).sqrt();
    let g2 = t * ((1.0 - 4.0 * p0) + (3.0 - 4.0 * p0) * t) / (4.0 * p0 * p0 * q0 * q0 * (1.0 + t).powi(3));
    let sign = Sign::of_f64(g2, crate::scalar::FAIR_TOLERANCE);
    Ok(ConvexityReport {
        family: Family::Capital,
        second_derivative: g2,
        sign,
        convex_along_segment: sign == Sign::Positive,
    })
}

/// History fair surface `p3 = 1 − p0 p1/(1 − p1)` restricted to the segment
/// from `(1/2, 1/2)` to `(p0, p1)`:
/// `h″(t) = −4(p0+p1−1)(2p1−1) / [1 − (2p1−1)t]³`, whose sign does not
/// depend on `t ∈ [0, 1]`.
pub fn history_convexity<S: Scalar>(p0: &S, p1: &S) -> Result<ConvexityReport> {
    let one = S::one();
    for (name, p) in [("p0", p0), ("p1", p1)] {
        if p.sign() != Sign::Positive || (one.clone() - p.clone()).sign() != Sign::Positive {
            return Err(Error::Domain(format!("{name} = {p} is not in (0, 1)")));
        }
    }
    if (one.clone() - p1.clone() - p0.clone() * p1.clone()).sign() != Sign::Positive {
        return Err(Error::Domain("need p0 p1 < 1 − p1".into()));
    }
    let num = -(S::from_i64(4) * (p0.clone() + p1.clone() - one.clone()) * (S::from_i64(2) * p1.clone() - one));
    let sign = num.sign();
    Ok(ConvexityReport {
        family: Family::History,
        second_derivative: num.to_f64(),
        sign,
        convex_along_segment: sign == Sign::Positive,
    })
}

/// Dispatches on family: capital takes `[p0]`, history `[p0, p1]`.
pub fn fair_surface_convexity(family: Family, probabilities: &[Rational]) -> Result<ConvexityReport> {
    match (family, probabilities) {
        (Family::Capital, [p0]) => capital_convexity(p0.to_f64()),
        (Family::History, [p0, p1]) => history_convexity(p0, p1),
        _ => Err(Error::Domain(format!(
            "{family} convexity takes {} probabilities",
            if family == Family::Capital { 1 } else { 2 }
        ))),
    }
}

/// Richardson-extrapolated central difference of `μ(ε)` at `ε = 0`.
///
/// `D(h) = (μ(h) − μ(−h)) / 2h`; the result is `(4 D(h/2) − D(h)) / 3`.
pub fn bias_slope(params: &FamilyParams<Rational>, gamma: &Rational, target: &Target, h: &Rational) -> Result<f64> {
    let d = |h: &Rational| -> Result<Rational> {
        let up = target_mean(params, gamma, target, h)?;
        let down = target_mean(params, gamma, target, &-h.clone())?;
        Ok((up - down) / (Rational::from_i64(2) * h.clone()))
    };
    let half = h.clone() / Rational::from_i64(2);
    let r = (Rational::from_i64(4) * d(&half)? - d(h)?) / Rational::from_i64(3);
    Ok(r.to_f64())
}

/// Open interval `(min, max)` sampled at `resolution` interior points.
#[derive(Clone, Debug, Serialize)]
pub struct AxisRange {
    pub name: String,
    pub min: Rational,
    pub max: Rational,
}

impl AxisRange {
    pub fn new(name: &str, min: Rational, max: Rational) -> Result<Self> {
        if min >= max {
            return Err(Error::Domain(format!("axis {name}: min must be below max")));
        }
        Ok(AxisRange { name: name.into(), min, max })
    }

    /// `min + i (max − min)/(n+1)` for `i = 1..=n`.
    pub fn points(&self, n: usize) -> Vec<Rational> {
        let step = (self.max.clone() - self.min.clone()) / Rational::from_i64(n as i64 + 1);
        (1..=n).map(|i| self.min.clone() + step.clone() * Rational::from_i64(i as i64)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum GridMode {
    Mixture { gamma: Rational },
    Pattern { r: usize, s: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Ok,
    InvalidDomain,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridCell {
    /// `[ρ]` or `[κ, λ]`.
    pub params: Vec<Rational>,
    pub status: CellStatus,
    pub mu_exact: Option<Rational>,
    pub mu_float: Option<f64>,
    pub classification: Option<Classification>,
    pub region: Option<u8>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionGrid {
    pub family: Family,
    pub axes: Vec<AxisRange>,
    pub resolution: usize,
    #[serde(flatten)]
    pub mode: GridMode,
    pub cells: Vec<GridCell>,
}

fn grid_cell(family: Family, params: Vec<Rational>, mode: &GridMode) -> GridCell {
    let zero = Rational::zero();
    let fp = match family {
        Family::Capital => FamilyParams::Capital { rho: params[0].clone() },
        Family::History => FamilyParams::History { kappa: params[0].clone(), lambda: params[1].clone() },
    };
    let mut cell =
        GridCell { params, status: CellStatus::Ok, mu_exact: None, mu_float: None, classification: None, region: None };
    if fp.validate().is_err() {
        cell.status = CellStatus::InvalidDomain;
        return cell;
    }
    if let FamilyParams::History { kappa, lambda } = &fp {
        cell.region = region_label(kappa, lambda);
    }
    let (gamma, target) = match mode {
        GridMode::Mixture { gamma } => (gamma.clone(), Target::Mixture),
        GridMode::Pattern { r, s } => match PatternSpec::rs(*r, *s) {
            Ok(w) => (zero.clone(), Target::Pattern(w)),
            Err(_) => {
                cell.status = CellStatus::Error;
                return cell;
            }
        },
    };
    match target_mean(&fp, &gamma, &target, &zero) {
        Ok(mu) => {
            cell.classification = Some(classify(&mu));
            cell.mu_float = Some(mu.to_f64());
            cell.mu_exact = Some(mu);
        }
        Err(_) => cell.status = CellStatus::Error,
    }
    cell
}

/// Sign of `μ(0)` on a rectangular grid; cells are listed with the first
/// axis varying slowest.
pub fn region_grid(family: Family, axes: Vec<AxisRange>, resolution: usize, mode: GridMode) -> Result<RegionGrid> {
    let want = match family {
        Family::Capital => 1,
        Family::History => 2,
    };
    if axes.len() != want {
        return Err(Error::Domain(format!("{family} grid needs {want} axes")));
    }
    if resolution == 0 {
        return Err(Error::Domain("resolution must be at least 1".into()));
    }
    if let GridMode::Mixture { gamma } = &mode {
        if *gamma < Rational::zero() || *gamma > Rational::one() {
            return Err(Error::Domain(format!("gamma = {gamma} must lie in [0, 1]")));
        }
    }
    let points: Vec<Vec<Rational>> = axes.iter().map(|a| a.points(resolution)).collect();
    let count = points.iter().map(Vec::len).product::<usize>();
    let cells = (0..count)
        .into_par_iter()
        .map(|idx| {
            let params = match family {
                Family::Capital => vec![points[0][idx].clone()],
                Family::History => {
                    vec![points[0][idx / resolution].clone(), points[1][idx % resolution].clone()]
                }
            };
            grid_cell(family, params, &mode)
        })
        .collect();
    Ok(RegionGrid { family, axes, resolution, mode, cells })
}

impl RegionGrid {
    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = self.axes.iter().map(|a| a.name.clone()).collect();
        h.extend(["mu_float", "mu_exact", "classification", "region"].map(String::from));
        h
    }

    /// Invalid cells carry `invalid-domain` (or `error`) in the
    /// classification column and empty values elsewhere.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for cell in &self.cells {
            let mut rec: Vec<String> = cell.params.iter().map(|p| p.to_string()).collect();
            rec.push(cell.mu_float.map(|x| x.to_string()).unwrap_or_default());
            rec.push(cell.mu_exact.as_ref().map(|x| x.to_string()).unwrap_or_default());
            rec.push(match (cell.status, cell.classification) {
                (CellStatus::InvalidDomain, _) => "invalid-domain".into(),
                (CellStatus::Error, _) => "error".into(),
                (CellStatus::Ok, c) => c.map(|c| c.to_string()).unwrap_or_default(),
            });
            rec.push(cell.region.map(|r| r.to_string()).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()
    }
}
