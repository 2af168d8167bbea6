//! Closed forms built on the eigenvalues of game B (float backend).
//!
//! Capital game B has nonunit eigenvalues `e1, e2` in closed form; the
//! history game's three nonunit eigenvalues are the roots of a cubic found by
//! Cardano's formula. Coefficients are evaluated in complex arithmetic and the
//! real part extracted.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{check_kappa_lambda, check_rho, history_game_a, history_game_b};
use crate::matrix::Matrix;
use crate::patterns::pattern_mean_direct;
use crate::scalar::{Rational, Scalar, Sign};

/// Largest `s` tried by the bound searches.
pub const SEARCH_CAP: u64 = 100_000;

/// Imaginary parts above this (relative) are reported as degenerate.
pub const IMAGINARY_RESIDUE: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct CapitalSpectrum {
    pub rho: f64,
    /// `√((1+ρ²)(1+4ρ+ρ²))`
    pub s_root: f64,
    pub e1: f64,
    pub e2: f64,
    /// Right eigenvectors `(r0, r1, r2)` as columns.
    #[serde(skip)]
    pub r: Matrix<f64>,
    #[serde(skip)]
    pub l: Matrix<f64>,
    /// `e1 = e2`, which happens only at `ρ = 1`.
    pub repeated: bool,
}

pub fn capital_spectrum(rho: f64) -> Result<CapitalSpectrum> {
    check_rho(&rho)?;
    let r2 = rho * rho;
    let s_root = ((1.0 + r2) * (1.0 + 4.0 * rho + r2)).sqrt();
    let half_gap = (1.0 - rho) * s_root / (2.0 * (1.0 + rho) * (1.0 + r2));
    let e1 = -0.5 + half_gap;
    let e2 = -0.5 - half_gap;
    let col = |sg: f64| {
        let s = sg * s_root;
        [
            (1.0 + rho) * (1.0 - r2 - s),
            2.0 + rho + 2.0 * r2 + r2 * rho + rho * s,
            -(1.0 + 2.0 * rho + r2 + 2.0 * r2 * rho - s),
        ]
    };
    let (c1, c2) = (col(1.0), col(-1.0));
    let r = Matrix::from_fn(3, 3, |i, j| match j {
        0 => 1.0,
        1 => c1[i],
        _ => c2[i],
    });
    let l = r.inverse()?;
    Ok(CapitalSpectrum { rho, s_root, e1, e2, r, l, repeated: rho == 1.0 })
}

/// `a_r = (1 − (−1/2)^r)/3`, the off-diagonal entry of `P_A^r`.
pub fn a_r<S: Scalar>(r: u32) -> S {
    (S::one() - S::from_ratio(-1, 2).powi(r)) / S::from_i64(3)
}

/// `μ_[r,s](0) = E_{r,s}/D_{r,s}` for the capital family.
pub fn capital_pattern_mean_closed(rho: f64, r: u32, s: u32) -> Result<f64> {
    if r == 0 || s == 0 {
        return Err(Error::Domain("r and s must be at least 1".into()));
    }
    let sp = capital_spectrum(rho)?;
    let a = a_r::<f64>(r);
    let (x1, x2) = (sp.e1.powi(s as i32), sp.e2.powi(s as i32));
    let k = 3.0 * a - 1.0;
    let big_s = sp.s_root;
    let om = 1.0 - rho;
    let e = 3.0
        * a
        * ((2.0 + k * (x1 + x2 - 2.0 * x1 * x2) - (x1 + x2)) * om * (1.0 + rho) * big_s
            + a * (x2 - x1) * (5.0 * (1.0 + rho).powi(2) * (1.0 + rho * rho) - 4.0 * rho * rho))
        * om
        * om;
    let d = 4.0 * f64::from(r + s) * (1.0 + k * x1) * (1.0 + k * x2) * (1.0 + rho + rho * rho).powi(2) * big_s;
    Ok(e / d)
}

/// Cubic coefficients and Cardano quantities for history game B.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistoryCubic<S> {
    pub a2: S,
    pub a1: S,
    pub a0: S,
    pub alpha: S,
    pub beta: S,
    /// `β² + 4α³`
    pub discriminant: S,
}

pub fn history_cubic<S: Scalar>(kappa: &S, lambda: &S) -> HistoryCubic<S> {
    let k = kappa.clone();
    let l = lambda.clone();
    let n = |v: i64| S::from_i64(v);
    let one = S::one();
    let k2 = k.clone() * k.clone();
    let k3 = k2.clone() * k.clone();
    let l2 = l.clone() * l.clone();
    let l3 = l2.clone() * l.clone();
    let l4 = l3.clone() * l.clone();
    let l5 = l4.clone() * l.clone();
    let opk = one.clone() + k.clone();
    let opl = one.clone() + l.clone();
    let lmk = l.clone() - k.clone();
    let dd = opk.clone() * opk.clone() * opl.clone() * opl.clone();

    let a2 = lmk.clone() / opk.clone();
    let a1 = lmk.clone() * l.clone() * (n(2) + k.clone() + l.clone()) / dd.clone();
    let a0 = -((one.clone() - k.clone() * l.clone()) * (one.clone() + k.clone() - l.clone() - l2.clone())) / dd;
    let alpha = lmk
        * (k.clone() + n(5) * l.clone() + n(5) * k.clone() * l.clone() + l2.clone() + k.clone() * l2.clone()
            - l3.clone());
    let beta = opl
        * (n(27) + n(54) * k.clone() - n(27) * l.clone() + n(27) * k2.clone()
            - n(54) * k.clone() * l.clone()
            - n(27) * l2.clone()
            + n(2) * k3.clone()
            - n(42) * k2.clone() * l.clone()
            - n(30) * k.clone() * l2.clone()
            + n(16) * l3.clone()
            - n(14) * k3.clone() * l.clone()
            + n(6) * k2.clone() * l2.clone()
            + n(30) * k.clone() * l3.clone()
            + n(5) * l4.clone()
            + n(2) * k3.clone() * l2.clone()
            + n(21) * k2.clone() * l3.clone()
            + n(6) * k.clone() * l4.clone()
            - n(2) * l5);
    let discriminant = beta.clone() * beta.clone() + n(4) * alpha.clone() * alpha.clone() * alpha.clone();
    HistoryCubic { a2, a1, a0, alpha, beta, discriminant }
}

/// Region of the `(κ, λ)` plane: `1, 3, 4` winning, `2, 5, 6` losing;
/// `None` on the fair lines `κ = λ`, `λ = 1` and on `β² + 4α³ = 0`.
///
/// | sign region        | `β²+4α³ > 0` | `β²+4α³ < 0` |
/// |--------------------|--------------|--------------|
/// | `κ < λ < 1`        | 1            | 1            |
/// | `κ > λ > 1`        | 3            | 4            |
/// | `λ > max(κ, 1)`    | 2            | 2            |
/// | `λ < min(κ, 1)`    | 6            | 5            |
pub fn region_label<S: Scalar>(kappa: &S, lambda: &S) -> Option<u8> {
    let disc = history_cubic(kappa, lambda).discriminant.sign();
    let one = S::one();
    if disc == Sign::Zero || kappa == lambda || *lambda == one {
        return None;
    }
    let real = disc == Sign::Negative;
    let label = if kappa < lambda && *lambda < one {
        1
    } else if kappa > lambda && *lambda > one {
        if real {
            4
        } else {
            3
        }
    } else if lambda > kappa && *lambda > one {
        2
    } else if real {
        5
    } else {
        6
    };
    Some(label)
}

#[derive(Clone, Debug, Serialize)]
pub struct HistorySpectrum {
    pub kappa: f64,
    pub lambda: f64,
    pub cubic: HistoryCubic<f64>,
    #[serde(serialize_with = "ser_complex3")]
    pub e: [Complex64; 3],
    pub region: Option<u8>,
    /// Repeated eigenvalue (`β² + 4α³ = 0` within tolerance).
    pub degenerate: bool,
}

fn ser_complex3<Ser: serde::Serializer>(e: &[Complex64; 3], ser: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(3))?;
    for z in e {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

pub fn history_spectrum(kappa: f64, lambda: f64) -> Result<HistorySpectrum> {
    check_kappa_lambda(&kappa, &lambda)?;
    let cubic = history_cubic(&kappa, &lambda);
    let scale = 3.0 * (1.0 + kappa) * (1.0 + lambda);
    let shift = (lambda - kappa) / (3.0 * (1.0 + kappa));
    let (alpha, beta, disc) = (cubic.alpha, cubic.beta, cubic.discriminant);
    let size = (beta * beta).max((4.0 * alpha.powi(3)).abs()).max(1.0);
    let degenerate = disc.abs() <= 1e-12 * size;
    let e = if disc < 0.0 {
        let m = 2.0 * (-alpha).sqrt();
        let theta = (0.5 * beta / (-alpha).powi(3).sqrt()).clamp(-1.0, 1.0).acos();
        let tau = std::f64::consts::TAU;
        [0.0, tau, 2.0 * tau].map(|off| Complex64::new(m * ((theta + off) / 3.0).cos() / scale - shift, 0.0))
    } else {
        let root = disc.max(0.0).sqrt();
        let p = ((beta + root) / 2.0).cbrt();
        let q = if p != 0.0 { -alpha / p } else { ((beta - root) / 2.0).cbrt() };
        let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let w2 = w.conj();
        let (p, q) = (Complex64::new(p, 0.0), Complex64::new(q, 0.0));
        let e1 = (p + q) / scale - shift;
        let mut e2 = (w * p + w2 * q) / scale - shift;
        let mut e3 = (w2 * p + w * q) / scale - shift;
        if degenerate {
            e2.im = 0.0;
            e3.im = 0.0;
        }
        [e1, e2, e3]
    };
    let region = if degenerate { None } else { region_label(&kappa, &lambda) };
    Ok(HistorySpectrum { kappa, lambda, cubic, e, region, degenerate })
}

/// Coefficients of `E_s`, `H_s` and `G_s` at one `(κ, λ)`.
#[derive(Clone, Debug)]
pub struct HistoryCoefficients {
    pub e: [Complex64; 3],
    pub c0: f64,
    pub c: [Complex64; 3],
    pub b0: f64,
    pub b: [Complex64; 3],
    /// `(f0 − f1)(e_i, e_j, e_k)`
    pub f01: [Complex64; 3],
    pub f2: [Complex64; 3],
}

pub fn history_coefficients(kappa: f64, lambda: f64) -> Result<HistoryCoefficients> {
    let sp = history_spectrum(kappa, lambda)?;
    if sp.degenerate {
        return Err(Error::Degenerate(format!("repeated eigenvalue at kappa={kappa}, lambda={lambda}")));
    }
    let omkl = 1.0 - kappa * lambda;
    if omkl.abs() <= 1e-12 {
        return Err(Error::Degenerate("kappa * lambda = 1".into()));
    }
    let (k, l) = (kappa, lambda);
    let (k2, k3) = (k * k, k * k * k);
    let (l2, l3, l4, l5) = (l * l, l * l * l, l.powi(4), l.powi(5));
    let (opk, opl, lmk) = (1.0 + k, 1.0 + l, l - k);
    let c0 = opk * lmk * (1.0 - l) / (4.0 * l * (2.0 + k + l));
    let b0 = -(1.0 + k - 2.0 * l - l2 + k * l2) / (4.0 * l * opl);

    let q0 = 1.0 + 3.0 * k - 2.0 * l + 3.0 * k2 - 4.0 * k * l - l2 + k3 - 9.0 * k * l2 + 6.0 * l3 + 2.0 * k3 * l
        - 7.0 * k2 * l2
        + 6.0 * k * l3
        + k3 * l2
        - 2.0 * k2 * l3
        + 4.0 * k * l4
        - 2.0 * l5;
    let g_lin = 1.0 + 2.0 * k - 3.0 * l + k2 - 2.0 * k * l + k2 * l - 2.0 * k * l2 + 2.0 * l3;
    let q1 = opk * opl * g_lin;
    let q2 = opk * opk * opl * opl * (1.0 + k - 2.0 * l);
    let h0 = 2.0 + 2.0 * k - 4.0 * l - 2.0 * k * l - k2 * l + 2.0 * k * l2 + l3;
    let h1 = 2.0 + k + l - k2 - l2 - 2.0 * k2 * l + k * l2 - l3;
    let quad = opk * opl * lmk;

    let qb = |y: Complex64, z: Complex64| q0 - q1 * (y + z) + q2 * y * z;
    let g = |y: Complex64, z: Complex64| g_lin - opk * opl * (1.0 + k - 2.0 * l) * (y + z) + opk * opk * opl * y * z;
    let den_f = 4.0 * opk.powi(3) * l * opl * opl * omkl;
    let den_pi = opk * opk * l * opl;

    let f = |x: Complex64, y: Complex64, z: Complex64| {
        lmk * (l * lmk - (1.0 + k - l - l2) * x + opk * opl * x * x) * qb(y, z)
            / (den_f * (1.0 - x) * (x - y) * (x - z))
    };
    let h = |x: Complex64, y: Complex64, z: Complex64| {
        (h0 - h1 * x + quad * x * x) * qb(y, z) / (den_f * (1.0 - x) * (x - y) * (x - z))
    };
    let f0 = |x: Complex64, y: Complex64, z: Complex64| {
        (1.0 + k - 2.0 * l - opk * x) * g(y, z) / (2.0 * den_pi * (x - y) * (x - z))
    };
    let f1 = |x: Complex64, y: Complex64, z: Complex64| {
        ((1.0 - l) * (1.0 + k - l - l2) - opl * (1.0 - k2 + k * l - l2) * x + quad * x * x) * g(y, z)
            / (2.0 * den_pi * omkl * (x - y) * (x - z))
    };
    let f2 = |x: Complex64, y: Complex64, z: Complex64| {
        (h0 - h1 * x + quad * x * x) * g(y, z) / (den_pi * omkl * (x - y) * (x - z))
    };

    let e = sp.e;
    let cyc = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
    let apply =
        |func: &dyn Fn(Complex64, Complex64, Complex64) -> Complex64| cyc.map(|(i, j, m)| func(e[i], e[j], e[m]));
    Ok(HistoryCoefficients {
        e,
        c0,
        c: apply(&f),
        b0,
        b: apply(&h),
        f01: apply(&|x, y, z| f0(x, y, z) - f1(x, y, z)),
        f2: apply(&f2),
    })
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAGINARY_RESIDUE * z.re.abs().max(1.0) {
        return Err(Error::Degenerate(format!("{what} has imaginary residue {}", z.im)));
    }
    Ok(z.re)
}

impl HistoryCoefficients {
    fn weighted_sum(&self, coef: &[Complex64; 3], s: u64) -> Complex64 {
        (0..3).map(|i| coef[i] * self.e[i].powu(s as u32)).sum()
    }

    fn abs_sum(&self, coef: &[Complex64; 3], s: u64) -> f64 {
        (0..3).map(|i| coef[i].norm() * self.e[i].norm().powi(s as i32)).sum()
    }

    /// `E_s = c0 − Σ c_i e_i^s`
    pub fn e_s(&self, s: u64) -> Result<f64> {
        real_part(self.c0 - self.weighted_sum(&self.c, s), "E_s")
    }

    /// `H_s = b0 − Σ b_i e_i^s`
    pub fn h_s(&self, s: u64) -> Result<f64> {
        real_part(self.b0 - self.weighted_sum(&self.b, s), "H_s")
    }

    /// `G_s = 2 Σ (f0 − f1)_i e_i^s / (4 + Σ f2_i e_i^s)`
    pub fn g_s(&self, s: u64) -> Result<f64> {
        let num = 2.0 * self.weighted_sum(&self.f01, s);
        let den = 4.0 + self.weighted_sum(&self.f2, s);
        real_part(num / den, "G_s")
    }

    /// `F_s = E_s + G_s H_s`
    pub fn f_s(&self, s: u64) -> Result<f64> {
        Ok(self.e_s(s)? + self.g_s(s)? * self.h_s(s)?)
    }

    /// Lower bound on `|E_s|` certifying the sign of `c0` when positive.
    pub fn es_bound(&self, s: u64) -> f64 {
        self.c0.abs() - self.abs_sum(&self.c, s)
    }

    /// Lower bound on `|F_s|`; `None` while `4 − Σ|f2_i||e_i|^s ≤ 0`.
    pub fn fs_bound(&self, s: u64) -> Option<f64> {
        let den = 4.0 - self.abs_sum(&self.f2, s);
        if den <= 0.0 {
            return None;
        }
        let g = 2.0 * self.abs_sum(&self.f01, s) / den;
        let h = self.b0.abs() + self.abs_sum(&self.b, s);
        Some(self.c0.abs() - (self.abs_sum(&self.c, s) + g * h))
    }

    fn require_c0(&self) -> Result<()> {
        if self.c0 == 0.0 {
            return Err(Error::Degenerate("c0 = 0 (fair line)".into()));
        }
        Ok(())
    }

    pub fn s0(&self) -> Result<u64> {
        self.require_c0()?;
        (1..=SEARCH_CAP).find(|&s| self.es_bound(s) > 0.0).ok_or(Error::SearchCapExceeded { cap: SEARCH_CAP })
    }

    pub fn s1(&self) -> Result<u64> {
        self.require_c0()?;
        (1..=SEARCH_CAP)
            .find(|&s| self.fs_bound(s).is_some_and(|b| b > 0.0))
            .ok_or(Error::SearchCapExceeded { cap: SEARCH_CAP })
    }
}

pub fn history_es(kappa: f64, lambda: f64, s: u64) -> Result<f64> {
    history_coefficients(kappa, lambda)?.e_s(s)
}

pub fn history_fs(kappa: f64, lambda: f64, s: u64) -> Result<f64> {
    history_coefficients(kappa, lambda)?.f_s(s)
}

/// `μ_[r,s](0)`: `E_s/(r+s)` for `r ≥ 2`, `F_s/(1+s)` for `r = 1`.
pub fn history_pattern_mean_closed(kappa: f64, lambda: f64, r: u64, s: u64) -> Result<f64> {
    if r == 0 || s == 0 {
        return Err(Error::Domain("r and s must be at least 1".into()));
    }
    let co = history_coefficients(kappa, lambda)?;
    let top = if r == 1 { co.f_s(s)? } else { co.e_s(s)? };
    Ok(top / (r + s) as f64)
}

pub fn bound_search_s0(kappa: f64, lambda: f64) -> Result<u64> {
    history_coefficients(kappa, lambda)?.s0()
}

pub fn bound_search_s1(kappa: f64, lambda: f64) -> Result<u64> {
    history_coefficients(kappa, lambda)?.s1()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// Sign of `E_s`, i.e. of `μ_[r,s](0)` for every `r ≥ 2`.
    PatternRGe2,
    /// Sign of `F_s`, i.e. of `μ_[1,s](0)`.
    PatternREq1,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub mode: VerifyMode,
    /// `s0` or `s1`.
    pub bound: u64,
    pub c0_sign: Sign,
    /// Values of `s < bound` whose exact mean has the wrong sign.
    pub exceptions: Vec<u64>,
    pub checked_prefix_ok: bool,
}

/// Checks the sign of `μ_[r,s](0)` exactly for every `s` below the bound
/// index, where the bound no longer certifies it.
pub fn verify_sign_at_point(kappa: &Rational, lambda: &Rational, mode: VerifyMode) -> Result<VerifyReport> {
    check_kappa_lambda(kappa, lambda)?;
    if kappa == lambda || *lambda == Rational::one() {
        return Err(Error::Degenerate("c0 = 0 (fair line)".into()));
    }
    if (kappa.clone() * lambda.clone()) == Rational::one() {
        return Err(Error::Degenerate("kappa * lambda = 1".into()));
    }
    if history_cubic(kappa, lambda).discriminant.is_zero() {
        return Err(Error::Degenerate("repeated eigenvalue".into()));
    }
    let co = history_coefficients(kappa.to_f64(), lambda.to_f64())?;
    let (bound, r) = match mode {
        VerifyMode::PatternRGe2 => (co.s0()?, 2),
        VerifyMode::PatternREq1 => (co.s1()?, 1),
    };
    // c0 = (1+κ)(λ−κ)(1−λ)/(4λ(2+κ+λ)): sign of (λ−κ)(1−λ)
    let c0_sign = ((lambda.clone() - kappa.clone()) * (Rational::one() - lambda.clone())).sign();
    let a = history_game_a(Rational::zero())?;
    let b = history_game_b(kappa.clone(), lambda.clone(), Rational::zero())?;
    let mut exceptions = Vec::new();
    for s in 1..bound {
        let mu = pattern_mean_direct(&a, &b, r, s as usize)?;
        if mu.sign() != c0_sign {
            exceptions.push(s);
        }
    }
    let checked_prefix_ok = exceptions.is_empty();
    Ok(VerifyReport { mode, bound, c0_sign, exceptions, checked_prefix_ok })
}

/// `K = {k/l : k, l ∈ 1..9}`, sorted.
pub fn k_values() -> Vec<Rational> {
    let mut v: Vec<Rational> = (1..=9).flat_map(|k| (1..=9).map(move |l| Rational::new(k, l))).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// Pairs in `K × K` with `λ < 1 + κ`, `κ ≠ λ`, `λ ≠ 1`, `κλ ≠ 1`.
pub fn sweep_points() -> Vec<(Rational, Rational)> {
    let ks = k_values();
    let one = Rational::one();
    let mut out = Vec::new();
    for kappa in &ks {
        for lambda in &ks {
            if *lambda < one.clone() + kappa.clone()
                && kappa != lambda
                && *lambda != one
                && kappa.clone() * lambda.clone() != one
            {
                out.push((kappa.clone(), lambda.clone()));
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub kappa: Rational,
    pub lambda: Rational,
    pub region: Option<u8>,
    pub c0_sign: Sign,
    pub s0: u64,
    pub s1: u64,
    pub e_exceptions: Vec<u64>,
    pub f_exceptions: Vec<u64>,
}

impl SweepRecord {
    pub fn ok(&self) -> bool {
        self.e_exceptions.is_empty() && self.f_exceptions.is_empty()
    }
}

pub fn sweep_point(kappa: &Rational, lambda: &Rational) -> Result<SweepRecord> {
    let e = verify_sign_at_point(kappa, lambda, VerifyMode::PatternRGe2)?;
    let f = verify_sign_at_point(kappa, lambda, VerifyMode::PatternREq1)?;
    Ok(SweepRecord {
        kappa: kappa.clone(),
        lambda: lambda.clone(),
        region: region_label(kappa, lambda),
        c0_sign: e.c0_sign,
        s0: e.bound,
        s1: f.bound,
        e_exceptions: e.exceptions,
        f_exceptions: f.exceptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{capital_game_a, capital_game_b};
    use crate::patterns::pattern_mean_direct;
    use approx::assert_relative_eq;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn capital_a_power_check(r: u32) -> bool {
        let a = capital_game_a(Rational::zero()).unwrap();
        let pr = a.p().pow(r as usize);
        let ar = a_r::<Rational>(r);
        (0..3).all(|i| {
            (0..3).all(|j| {
                pr[(i, j)] == if i == j { Rational::one() - ar.clone() * Rational::from_i64(2) } else { ar.clone() }
            })
        })
    }

    #[test]
    fn capital_eigenpairs() {
        for rho in [0.2, 1.0 / 3.0, 0.5, 1.0, 1.5, 4.0] {
            let sp = capital_spectrum(rho).unwrap();
            assert_relative_eq!(sp.e1 + sp.e2, -1.0, epsilon = 1e-12);
            let prod = 2.0 * rho * rho / ((1.0 + rho).powi(2) * (1.0 + rho * rho));
            assert_relative_eq!(sp.e1 * sp.e2, prod, epsilon = 1e-12);
            let b = capital_game_b(rho, 0.0).unwrap();
            for (col, ev) in [(0, 1.0), (1, sp.e1), (2, sp.e2)] {
                let v: Vec<f64> = (0..3).map(|i| sp.r[(i, col)]).collect();
                let pv = b.p().mul_col(&v);
                for i in 0..3 {
                    assert!((pv[i] - ev * v[i]).abs() < 1e-10, "rho={rho} col={col}");
                }
            }
            assert!(sp.e1.abs() < 1.0 && sp.e2.abs() < 1.0);
            assert_eq!(sp.repeated, rho == 1.0);
        }
        let sp = capital_spectrum(1.0 / 3.0).unwrap();
        assert_relative_eq!(sp.e1, -0.5 + 55f64.sqrt() / 20.0, epsilon = 1e-12);
    }

    #[test]
    fn a_r_matches_powers() {
        for r in 1..6 {
            assert!(capital_a_power_check(r));
        }
        assert_eq!(a_r::<Rational>(1), q(1, 2));
        assert_eq!(a_r::<Rational>(2), q(1, 4));
    }

    #[test]
    fn capital_closed_form_matches_exact() {
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * y.abs().max(1e-12) || (x - y).abs() < 1e-14;
        assert!(close(capital_pattern_mean_closed(1.0 / 3.0, 2, 2).unwrap(), 4.0 / 163.0));
        assert!(close(capital_pattern_mean_closed(1.0 / 3.0, 1, 2).unwrap(), 2416.0 / 35601.0));
        for rho in [q(1, 5), q(1, 3), q(2, 3), q(3, 2), q(5, 1)] {
            let a = capital_game_a(Rational::zero()).unwrap();
            let b = capital_game_b(rho.clone(), Rational::zero()).unwrap();
            for r in 1..4u32 {
                for s in 1..4u32 {
                    let exact = pattern_mean_direct(&a, &b, r as usize, s as usize).unwrap().to_f64();
                    let closed = capital_pattern_mean_closed(rho.to_f64(), r, s).unwrap();
                    assert!(close(closed, exact), "rho={rho} r={r} s={s}: {closed} vs {exact}");
                }
            }
            assert!(capital_pattern_mean_closed(rho.to_f64(), 1, 1).unwrap().abs() < 1e-12);
        }
        assert_eq!(capital_pattern_mean_closed(1.0, 3, 2).unwrap(), 0.0);
    }

    fn power_trace(m: &Matrix<f64>, k: usize) -> f64 {
        let p = m.pow(k);
        (0..p.rows()).map(|i| p[(i, i)]).sum()
    }

    #[test]
    fn history_roots_match_traces_and_cubic() {
        for (k, l) in [(1.0 / 9.0, 1.0 / 3.0), (3.0, 1.5), (3.0, 2.0 / 3.0), (8.0, 1.0 / 9.0), (0.5, 1.2), (9.0, 3.0)] {
            let sp = history_spectrum(k, l).unwrap();
            let c = &sp.cubic;
            for x in sp.e {
                let v = x * x * x + c.a2 * x * x + c.a1 * x + c.a0;
                assert!(v.norm() < 1e-10, "({k},{l}) root residue {v}");
            }
            let sum: Complex64 = sp.e.iter().sum();
            assert!((sum + c.a2).norm() < 1e-10);
            let pair = sp.e[0] * sp.e[1] + sp.e[0] * sp.e[2] + sp.e[1] * sp.e[2];
            assert!((pair - c.a1).norm() < 1e-10);
            assert!((sp.e[0] * sp.e[1] * sp.e[2] + c.a0).norm() < 1e-10);
            let pb = history_game_b(k, l, 0.0).unwrap();
            for pow in 1..4 {
                let tr: Complex64 = sp.e.iter().map(|x| x.powu(pow as u32)).sum();
                assert!((tr.re + 1.0 - power_trace(pb.p(), pow)).abs() < 1e-10);
            }
            if c.discriminant < 0.0 {
                let [e1, e2, e3] = sp.e.map(|x| x.re);
                assert!(1.0 > e1 && e1 > e3 && e3 > e2 && e2 > -1.0);
            } else {
                assert!(sp.e[0].im.abs() < 1e-12);
                assert!((sp.e[1] - sp.e[2].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lambda_one_discriminant() {
        for k in [0.1, 0.3, 0.5, 0.9] {
            let c = history_cubic(&k, &1.0);
            let want = 108.0 * (1.0 + k).powi(2) * (1.0 - k).powi(3) * (7.0 + 9.0 * k);
            assert_relative_eq!(c.discriminant, want, max_relative = 1e-10);
        }
        let c = history_cubic(&q(1, 2), &Rational::one());
        assert_eq!(c.discriminant, q(108, 1) * q(9, 4) * q(1, 8) * q(23, 2));
    }

    #[test]
    fn table_regions() {
        let rows = [
            ((1, 9), (1, 3), 1),
            ((1, 3), (1, 9), 6),
            ((9, 1), (3, 1), 3),
            ((1, 9), (1, 8), 1),
            ((1, 9), (8, 9), 1),
            ((8, 1), (1, 9), 6),
            ((4, 1), (9, 2), 2),
            ((3, 1), (3, 2), 4),
            ((3, 1), (2, 3), 5),
        ];
        for ((kn, kd), (ln, ld), region) in rows {
            let (k, l) = (q(kn, kd), q(ln, ld));
            assert_eq!(region_label(&k, &l), Some(region));
            assert_eq!(history_spectrum(k.to_f64(), l.to_f64()).unwrap().region, Some(region));
        }
        assert_eq!(region_label(&q(1, 2), &q(1, 2)), None);
        assert_eq!(region_label(&q(1, 2), &Rational::one()), None);
    }

    #[test]
    fn history_closed_forms_match_exact() {
        let a = history_game_a(Rational::zero()).unwrap();
        for (k, l) in [
            (q(1, 9), q(1, 3)),
            (q(3, 1), q(3, 2)),
            (q(3, 1), q(2, 3)),
            (q(1, 3), q(1, 9)),
            (q(4, 1), q(9, 2)),
            (q(2, 1), q(5, 2)),
        ] {
            let b = history_game_b(k.clone(), l.clone(), Rational::zero()).unwrap();
            let co = history_coefficients(k.to_f64(), l.to_f64()).unwrap();
            for s in 1..7u64 {
                for r in [1u64, 2, 3] {
                    let exact = pattern_mean_direct(&a, &b, r as usize, s as usize).unwrap().to_f64();
                    let top = if r == 1 { co.f_s(s).unwrap() } else { co.e_s(s).unwrap() };
                    let closed = top / (r + s) as f64;
                    assert!((closed - exact).abs() <= 1e-9 * exact.abs(), "({k},{l}) r={r} s={s}: {closed} vs {exact}");
                }
            }
        }
        assert_relative_eq!(history_es(1.0 / 9.0, 1.0 / 3.0, 2).unwrap() / 4.0, 0.01, epsilon = 1e-10);
        assert_relative_eq!(history_fs(1.0 / 9.0, 1.0 / 3.0, 1).unwrap() / 2.0, 1.0 / 44.0, epsilon = 1e-10);
    }

    #[test]
    fn fair_line_coefficients_vanish() {
        let co = history_coefficients(0.5, 0.5).unwrap();
        assert_eq!(co.c0, 0.0);
        for s in 1..5 {
            assert!(co.e_s(s).unwrap().abs() < 1e-12);
            assert!(co.g_s(s).unwrap().abs() < 1e-12);
        }
        assert!(matches!(co.s0(), Err(Error::Degenerate(_))));
        assert!(matches!(history_coefficients(2.0, 0.5), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bounds_are_nondecreasing() {
        for (k, l) in [(1.0 / 9.0, 1.0 / 3.0), (8.0, 1.0 / 9.0), (3.0, 1.5), (1.0 / 3.0, 1.0 / 9.0)] {
            let co = history_coefficients(k, l).unwrap();
            let mut prev_e = f64::NEG_INFINITY;
            let mut prev_f = f64::NEG_INFINITY;
            for s in 1..60 {
                let e = co.es_bound(s);
                assert!(e >= prev_e - 1e-15);
                prev_e = e;
                if let Some(f) = co.fs_bound(s) {
                    assert!(f >= prev_f - 1e-15);
                    prev_f = f;
                }
            }
        }
    }

    #[test]
    fn c0_sign_regions() {
        for k in [q(1, 4), q(1, 2), q(2, 1), q(3, 1)] {
            for l in [q(1, 5), q(1, 3), q(3, 4), q(3, 2), q(2, 1)] {
                if check_kappa_lambda(&k, &l).is_err() || k == l || (k.clone() * l.clone()) == Rational::one() {
                    continue;
                }
                let co = history_coefficients(k.to_f64(), l.to_f64()).unwrap();
                let one = Rational::one();
                let winning = (k < l && l < one) || (k > l && l > one);
                assert_eq!(co.c0 > 0.0, winning, "({k},{l})");
            }
        }
    }

    #[test]
    fn table_one_bounds() {
        let rows = [((1, 9), (1, 3), 1, 2), ((3, 1), (3, 2), 1, 1), ((8, 1), (1, 9), 1, 27)];
        for ((kn, kd), (ln, ld), s0, s1) in rows {
            let (k, l) = (kn as f64 / kd as f64, ln as f64 / ld as f64);
            assert_eq!(bound_search_s0(k, l).unwrap(), s0);
            assert_eq!(bound_search_s1(k, l).unwrap(), s1);
        }
    }

    #[test]
    fn verify_rejects_fair_line() {
        let r = verify_sign_at_point(&q(1, 2), &q(1, 2), VerifyMode::PatternRGe2);
        assert!(matches!(r, Err(Error::Degenerate(_))));
        let ok = verify_sign_at_point(&q(1, 3), &q(1, 9), VerifyMode::PatternREq1).unwrap();
        assert!(ok.checked_prefix_ok);
        assert_eq!(ok.c0_sign, Sign::Negative);
        assert_eq!(ok.bound, 6);
    }

    #[test]
    fn sweep_enumeration_count() {
        assert_eq!(k_values().len(), 55);
        assert_eq!(sweep_points().len(), 2123);
    }
}
