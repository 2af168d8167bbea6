use std::io::Write;

use parrondo::analysis::{
    capital_limit_closed, fairness_epsilon, history_limit_closed, pattern_limit, region_grid, target_limits, AxisRange,
    CellStatus, GridMode, Target,
};
use parrondo::montecarlo::{clt_check, simulate as run_sim, slln_check, InitialState, SimConfig, SimGame};
use parrondo::patterns::{build_product_chain, pattern_limits_direct, pattern_limits_product};
use parrondo::spectral::{
    capital_spectrum, history_coefficients, history_cubic, history_spectrum, region_label, sweep_point, sweep_points,
    verify_sign_at_point, VerifyMode,
};
use parrondo::{analyze as analyze_chain, Error, Family, FamilyParams, ParamPoint, PatternSpec, Rational, Scalar};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, FamilyArg, FamilyArgs, GameArg, LimitArgs, PatternArgs, PointArgs, RegionArgs, SimGameArg,
    SimulateArgs, SweepArgs, TargetArgs,
};
use crate::output::{float, into_doc, scalar, Backend, Doc, Failure, Format, Output};

/// Relative tolerance for float-backend match checks.
const FLOAT_MATCH: f64 = 1e-9;

fn convert<S: Scalar>(p: &FamilyParams<Rational>) -> FamilyParams<S> {
    match p {
        FamilyParams::Capital { rho } => FamilyParams::Capital { rho: S::from_rational(rho) },
        FamilyParams::History { kappa, lambda } => {
            FamilyParams::History { kappa: S::from_rational(kappa), lambda: S::from_rational(lambda) }
        }
    }
}

fn params_json(p: &FamilyParams<Rational>) -> Doc {
    into_doc(match p {
        FamilyParams::Capital { rho } => json!({ "family": "capital", "rho": rho.to_string() }),
        FamilyParams::History { kappa, lambda } => {
            json!({ "family": "history", "kappa": kappa.to_string(), "lambda": lambda.to_string() })
        }
    })
}

fn header(backend: &str, p: &FamilyParams<Rational>) -> Doc {
    let mut d = Doc::new();
    d.insert("backend".into(), backend.into());
    d.extend(params_json(p));
    d
}

fn matches<S: Scalar>(a: &S, b: &S) -> bool {
    if S::EXACT {
        a == b
    } else {
        let (x, y) = (a.to_f64(), b.to_f64());
        (x - y).abs() <= FLOAT_MATCH * x.abs().max(y.abs()).max(1.0)
    }
}

pub fn analyze(backend: Backend, a: &AnalyzeArgs) -> Result<Output, Failure> {
    match backend {
        Backend::Exact => analyze_with::<Rational>(a),
        Backend::Float => analyze_with::<f64>(a),
    }
}

fn analyze_with<S: Scalar>(a: &AnalyzeArgs) -> Result<Output, Failure> {
    let params = a.family.params()?;
    let point = ParamPoint::new(convert::<S>(&params), S::from_rational(&a.gamma), S::from_rational(&a.family.eps))?;
    let (name, chain) = match a.game {
        GameArg::A => ("a", point.game_a()?),
        GameArg::B => ("b", point.game_b()?),
        GameArg::Mixture => ("mixture", point.game_c()?),
    };
    let lp = analyze_chain(&chain)?.limits();
    let mut body = header(S::BACKEND, &params);
    body.insert("eps".into(), a.family.eps.to_string().into());
    body.insert("game".into(), name.into());
    if a.game == GameArg::Mixture {
        body.insert("gamma".into(), a.gamma.to_string().into());
    }
    body.extend(into_doc(json!({
        "mu": scalar(&lp.mu),
        "sigma2": scalar(&lp.sigma2),
        "classification": lp.classification.to_string(),
        "mu_float": float(lp.mu.to_f64()),
        "sigma2_float": float(lp.sigma2.to_f64()),
    })));
    Ok(Output::single("analyze", Value::Object(body), true))
}

pub fn pattern(backend: Backend, a: &PatternArgs) -> Result<Output, Failure> {
    match backend {
        Backend::Exact => pattern_with::<Rational>(a),
        Backend::Float => pattern_with::<f64>(a),
    }
}

type Games<S> = (FamilyParams<Rational>, parrondo::GameChain<S>, parrondo::GameChain<S>);

fn games<S: Scalar>(f: &FamilyArgs) -> Result<Games<S>, Failure> {
    let params = f.params()?;
    let point = ParamPoint::new(convert::<S>(&params), S::from_ratio(1, 2), S::from_rational(&f.eps))?;
    Ok((params, point.game_a()?, point.game_b()?))
}

fn word_fields(word: &PatternSpec) -> Doc {
    let mut d = Doc::new();
    d.insert("word".into(), word.to_string().into());
    if let Some((r, s)) = word.as_rs() {
        d.insert("r".into(), r.into());
        d.insert("s".into(), s.into());
    }
    d
}

fn pattern_with<S: Scalar>(a: &PatternArgs) -> Result<Output, Failure> {
    let word = a.word.required()?;
    let (params, ga, gb) = games::<S>(&a.family)?;
    let direct = pattern_limits_direct(&ga, &gb, &word)?;
    let pc = build_product_chain(&ga, &gb, &word)?;
    let product = pattern_limits_product(&pc)?;
    let agree = matches(&direct.mu, &product.mu) && matches(&direct.sigma2, &product.sigma2);
    let mut body = header(S::BACKEND, &params);
    body.insert("eps".into(), a.family.eps.to_string().into());
    body.extend(word_fields(&word));
    body.extend(into_doc(json!({
        "mu": scalar(&direct.mu),
        "sigma2": scalar(&direct.sigma2),
        "classification": direct.classification.to_string(),
        "mu_float": float(direct.mu.to_f64()),
        "sigma2_float": float(direct.sigma2.to_f64()),
        "mu_product": scalar(&product.mu),
        "sigma2_product": scalar(&product.sigma2),
        "delta_mu": scalar(&(direct.mu.clone() - product.mu.clone())),
        "delta_sigma2": scalar(&(direct.sigma2.clone() - product.sigma2.clone())),
        "agree": agree,
        "product_states": pc.chain.size(),
        "product_period": pc.diagnosis.period,
    })));
    Ok(Output::single("pattern", Value::Object(body), agree))
}

pub fn spectrum(a: &FamilyArgs) -> Result<Output, Failure> {
    let params = a.params()?;
    if !a.eps.is_zero() {
        return Err(Failure::Usage("spectrum is defined at eps = 0".into()));
    }
    let mut body = header("float", &params);
    match &params {
        FamilyParams::Capital { rho } => {
            let sp = capital_spectrum(rho.to_f64())?;
            body.extend(into_doc(json!({
                "eigenvalues": [1.0, sp.e1, sp.e2],
                "s_root": sp.s_root,
                "repeated": sp.repeated,
            })));
        }
        FamilyParams::History { kappa, lambda } => {
            let sp = history_spectrum(kappa.to_f64(), lambda.to_f64())?;
            let exact = history_cubic(kappa, lambda);
            let eigen: Vec<Value> =
                std::iter::once(json!([1.0, 0.0])).chain(sp.e.iter().map(|z| json!([z.re, z.im]))).collect();
            body.extend(into_doc(json!({
                "eigenvalues": eigen,
                "alpha": exact.alpha.to_string(),
                "beta": exact.beta.to_string(),
                "discriminant": exact.discriminant.to_string(),
                "discriminant_float": exact.discriminant.to_f64(),
                "discriminant_sign": exact.discriminant.sign(),
                "region": region_label(kappa, lambda),
                "degenerate": sp.degenerate || exact.discriminant.is_zero(),
            })));
        }
    }
    Ok(Output::single("spectrum", Value::Object(body), true))
}

fn point_header(a: &PointArgs) -> Result<Doc, Failure> {
    parrondo::games::check_kappa_lambda(&a.kappa, &a.lambda)?;
    Ok(into_doc(json!({
        "kappa": a.kappa.to_string(),
        "lambda": a.lambda.to_string(),
        "region": region_label(&a.kappa, &a.lambda),
    })))
}

fn degenerate(mut body: Doc, command: &'static str, reason: String) -> Output {
    body.insert("status".into(), "degenerate".into());
    body.insert("reason".into(), reason.into());
    Output::single(command, Value::Object(body), true)
}

pub fn bounds(a: &PointArgs) -> Result<Output, Failure> {
    let mut body = point_header(a)?;
    let fair = a.kappa == a.lambda || a.lambda == Rational::one();
    if fair {
        return Ok(degenerate(body, "bounds", "c0 = 0 (fair line)".into()));
    }
    let co = match history_coefficients(a.kappa.to_f64(), a.lambda.to_f64()) {
        Ok(co) => co,
        Err(Error::Degenerate(reason)) => return Ok(degenerate(body, "bounds", reason)),
        Err(e) => return Err(e.into()),
    };
    body.extend(into_doc(json!({
        "status": "ok",
        "c0": co.c0,
        "c0_sign": parrondo::Sign::of_f64(co.c0, 0.0),
        "s0": co.s0()?,
        "s1": co.s1()?,
    })));
    Ok(Output::single("bounds", Value::Object(body), true))
}

pub fn verify_point(a: &PointArgs) -> Result<Output, Failure> {
    let body = point_header(a)?;
    let mut records = Vec::new();
    let mut ok = true;
    for mode in [VerifyMode::PatternRGe2, VerifyMode::PatternREq1] {
        match verify_sign_at_point(&a.kappa, &a.lambda, mode) {
            Ok(rep) => {
                ok &= rep.checked_prefix_ok;
                records.push(into_doc(serde_json::to_value(&rep).map_err(|e| Failure::Compute(e.to_string()))?));
            }
            Err(Error::Degenerate(reason)) => return Ok(degenerate(body, "verify-point", reason)),
            Err(e) => return Err(e.into()),
        }
    }
    let mut body = body;
    body.insert("status".into(), "ok".into());
    body.insert("pass".into(), ok.into());
    Ok(Output::table("verify-point", Value::Object(body), records, ok))
}

const SWEEP_CHUNK: usize = 64;

/// Streams one CSV row per point in index order; the summary goes to stderr.
pub fn sweep_k(a: &SweepArgs, format: Format, w: &mut impl Write) -> Result<bool, Failure> {
    let points = sweep_points();
    let to = a.to.unwrap_or(points.len()).min(points.len());
    if a.from > to {
        return Err(Failure::Usage(format!("--from {} is past --to {to}", a.from)));
    }
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *w);
    let streaming = format == Format::Csv;
    if streaming && !a.no_header {
        csv.write_record([
            "index",
            "kappa",
            "lambda",
            "region",
            "c0_sign",
            "s0",
            "s1",
            "e_exceptions",
            "f_exceptions",
        ])?;
    }
    let (mut s0_max, mut s1_max, mut exceptions, mut errors) = (0u64, 0u64, 0usize, 0usize);
    let mut records = Vec::new();
    let indices: Vec<usize> = (a.from..to).collect();
    for chunk in indices.chunks(SWEEP_CHUNK) {
        let results: Vec<_> = chunk.par_iter().map(|&i| (i, sweep_point(&points[i].0, &points[i].1))).collect();
        for (i, res) in results {
            let rec = match res {
                Ok(rec) => rec,
                Err(e) => {
                    errors += 1;
                    eprintln!("point {i} ({}, {}): {e}", points[i].0, points[i].1);
                    continue;
                }
            };
            s0_max = s0_max.max(rec.s0);
            s1_max = s1_max.max(rec.s1);
            if !rec.ok() {
                exceptions += 1;
            }
            let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
            if streaming {
                csv.write_record([
                    i.to_string(),
                    rec.kappa.to_string(),
                    rec.lambda.to_string(),
                    rec.region.map(|r| r.to_string()).unwrap_or_default(),
                    crate::output::cell(&json!(rec.c0_sign)),
                    rec.s0.to_string(),
                    rec.s1.to_string(),
                    join(&rec.e_exceptions),
                    join(&rec.f_exceptions),
                ])?;
            } else {
                let mut d = Doc::new();
                d.insert("index".into(), i.into());
                d.extend(into_doc(serde_json::to_value(&rec).map_err(|e| Failure::Compute(e.to_string()))?));
                records.push(d);
            }
        }
        csv.flush()?;
    }
    drop(csv);
    let summary = json!({
        "from": a.from,
        "to": to,
        "total_points": points.len(),
        "checked": to - a.from - errors,
        "errors": errors,
        "points_with_exceptions": exceptions,
        "s0_max": s0_max,
        "s1_max": s1_max,
    });
    let ok = exceptions == 0 && errors == 0;
    if streaming {
        eprintln!("{}", serde_json::to_string(&summary).unwrap_or_default());
    } else {
        crate::output::emit(&Output::table("sweep-k", summary, records, ok), format, w)?;
    }
    Ok(ok)
}

pub fn region(a: &RegionArgs, format: Format, w: &mut impl Write) -> Result<bool, Failure> {
    let (family, axes) = match a.family {
        FamilyArg::Capital => (Family::Capital, vec![AxisRange::new("rho", a.rho_min.clone(), a.rho_max.clone())?]),
        FamilyArg::History => (
            Family::History,
            vec![
                AxisRange::new("kappa", a.kappa_min.clone(), a.kappa_max.clone())?,
                AxisRange::new("lambda", a.lambda_min.clone(), a.lambda_max.clone())?,
            ],
        ),
    };
    let mode = match (a.r, a.s) {
        (Some(r), Some(s)) => GridMode::Pattern { r, s },
        _ => GridMode::Mixture { gamma: a.gamma.clone() },
    };
    let grid = region_grid(family, axes, a.resolution, mode)?;
    let ok = grid.cells.iter().all(|c| c.status != CellStatus::Error);
    match format {
        Format::Csv => grid.write_csv(&mut *w)?,
        Format::Json => {
            let mut doc = Doc::new();
            doc.insert("schema".into(), crate::output::SCHEMA.into());
            doc.insert("command".into(), "region".into());
            doc.extend(into_doc(serde_json::to_value(&grid).map_err(|e| Failure::Compute(e.to_string()))?));
            serde_json::to_writer_pretty(&mut *w, &doc).map_err(|e| Failure::Compute(e.to_string()))?;
            writeln!(w)?;
        }
        Format::Plain => {
            let count = |f: &dyn Fn(&parrondo::analysis::GridCell) -> bool| grid.cells.iter().filter(|c| f(c)).count();
            use parrondo::Classification as C;
            writeln!(w, "cells: {}", grid.cells.len())?;
            writeln!(w, "winning: {}", count(&|c| c.classification == Some(C::Winning)))?;
            writeln!(w, "losing: {}", count(&|c| c.classification == Some(C::Losing)))?;
            writeln!(w, "fair: {}", count(&|c| c.classification == Some(C::Fair)))?;
            writeln!(w, "invalid-domain: {}", count(&|c| c.status == CellStatus::InvalidDomain))?;
            writeln!(w, "error: {}", count(&|c| c.status == CellStatus::Error))?;
        }
    }
    w.flush()?;
    Ok(ok)
}

pub fn limit(backend: Backend, a: &LimitArgs) -> Result<Output, Failure> {
    match backend {
        Backend::Exact => limit_with::<Rational>(a),
        Backend::Float => limit_with::<f64>(a),
    }
}

fn limit_with<S: Scalar>(a: &LimitArgs) -> Result<Output, Failure> {
    if !a.family.eps.is_zero() {
        return Err(Failure::Usage("the large-s limit is taken at eps = 0".into()));
    }
    if a.r == 0 {
        return Err(Failure::Usage("--r must be at least 1".into()));
    }
    let (params, ga, gb) = games::<S>(&a.family)?;
    let value = pattern_limit(&ga, &gb, a.r)?;
    let closed = match convert::<S>(&params) {
        FamilyParams::Capital { rho } => {
            let r = u32::try_from(a.r).map_err(|_| Failure::Usage("--r is too large".into()))?;
            capital_limit_closed(&rho, r)
        }
        FamilyParams::History { kappa, lambda } => history_limit_closed(&kappa, &lambda),
    };
    let ok = matches(&value, &closed);
    let mut body = header(S::BACKEND, &params);
    body.extend(into_doc(json!({
        "r": a.r,
        "limit": scalar(&value),
        "limit_float": float(value.to_f64()),
        "closed_form": scalar(&closed),
        "match": ok,
    })));
    Ok(Output::single("limit", Value::Object(body), ok))
}

pub fn epsilon0(a: &TargetArgs) -> Result<Output, Failure> {
    let params = a.family.params()?;
    if !a.family.eps.is_zero() {
        return Err(Failure::Usage("epsilon0 searches over eps itself; drop --eps".into()));
    }
    let word = a.word.spec()?;
    let target = word.clone().map(Target::Pattern).unwrap_or(Target::Mixture);
    let point = ParamPoint::new(params.clone(), a.gamma.clone(), Rational::zero())?;
    let root = fairness_epsilon(&point, &target)?;
    let mut body = header("exact", &params);
    match &word {
        Some(w) => body.extend(word_fields(w)),
        None => {
            body.insert("gamma".into(), a.gamma.to_string().into());
        }
    }
    body.extend(into_doc(json!({
        "mu0": root.mu0.to_string(),
        "eps0": root.eps0.to_string(),
        "eps0_float": root.eps0.to_f64(),
        "lo": root.lo.to_string(),
        "hi": root.hi.to_string(),
        "eps_max": root.eps_max.to_string(),
        "saturated": root.saturated,
    })));
    Ok(Output::single("epsilon0", Value::Object(body), true))
}

pub fn simulate(a: &SimulateArgs) -> Result<Output, Failure> {
    let params = a.family.params()?;
    let point = ParamPoint::new(params.clone(), a.gamma.clone(), a.family.eps.clone())?;
    let (ga, gb) = (point.game_a()?, point.game_b()?);
    let (target, game, label) = match a.game {
        SimGameArg::A => (Target::A, SimGame::chain(&ga), "a"),
        SimGameArg::B => (Target::B, SimGame::chain(&gb), "b"),
        SimGameArg::Mixture => (Target::Mixture, SimGame::mixture(&ga, &gb, &a.gamma), "mixture"),
        SimGameArg::Pattern => {
            let w = a.word.required()?;
            (Target::Pattern(w.clone()), SimGame::word(&ga, &gb, &w), "pattern")
        }
    };
    let initial_state = match a.initial.as_str() {
        "stationary" => InitialState::Stationary,
        s => InitialState::State(
            s.parse()
                .map_err(|_| Failure::Usage(format!("--initial must be a state index or \"stationary\", got {s:?}")))?,
        ),
    };
    let exact = target_limits(&params, &a.gamma, &target, &a.family.eps)?;
    let (mu, sigma2) = (exact.mu.to_f64(), exact.sigma2.to_f64());
    let result =
        run_sim(&SimConfig { game, n_games: a.n, replications: a.replications, master_seed: a.seed, initial_state })?;
    let slln = match slln_check(&result, mu, sigma2) {
        Ok(rep) => serde_json::to_value(&rep).map_err(|e| Failure::Compute(e.to_string()))?,
        Err(e) => json!({ "pass": false, "error": e.to_string() }),
    };
    let clt = match clt_check(&result, mu, sigma2) {
        Ok(rep) => serde_json::to_value(&rep).map_err(|e| Failure::Compute(e.to_string()))?,
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    let pass = |v: &Value| v.get("pass").and_then(Value::as_bool);
    let ok = pass(&slln).unwrap_or(false) && pass(&clt).unwrap_or(true);

    let mut body = header("exact", &params);
    body.insert("eps".into(), a.family.eps.to_string().into());
    body.insert("game".into(), label.into());
    match &target {
        Target::Mixture => {
            body.insert("gamma".into(), a.gamma.to_string().into());
        }
        Target::Pattern(w) => body.extend(word_fields(w)),
        _ => {}
    }
    body.extend(into_doc(json!({
        "rng": result.rng,
        "seed": result.master_seed,
        "n_games": result.n_games,
        "replications": result.replications,
        "initial_state": result.initial_state,
        "mu": exact.mu.to_string(),
        "sigma2": exact.sigma2.to_string(),
        "mean_per_game": result.mean_per_game,
        "var_per_game": result.var_per_game,
        "slln": slln,
        "clt": clt,
        "pass": ok,
    })));
    if a.finals {
        body.insert("finals".into(), json!(result.finals));
    }
    Ok(Output::single("simulate", Value::Object(body), ok))
}
