//! Command implementations. Each returns its artifacts as `(file name, text)`.

use serde_json::{json, Value};
use sobmuck_core::classify::{piecewise_decompose, piecewise_decompose_with, reg_interval, ClassCVerdict, RegData};
use sobmuck_core::decide::{decide_with, replay_with, DecideOptions, Status, Witness};
use sobmuck_core::lambda::{lambda, LambdaOptions, LambdaVariant};
use sobmuck_core::quad::Divergence;
use sobmuck_core::sobolev::{self, MAX_DEGREE};
use sobmuck_core::{Endpoint, Enclosure, Finite, Measure, Side};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{fmt_f64, to_json, Csv};
use crate::spec::measure_from_value;

pub type Artifacts = Vec<(String, String)>;

fn input(cfg: &RunConfig, key: &str) -> Result<Measure, CliError> {
    let v = cfg.inputs.get(key).ok_or_else(|| CliError::Parse(format!("missing input {key}")))?;
    measure_from_value(v, key)
}

fn lambda_opts(cfg: &RunConfig) -> LambdaOptions {
    LambdaOptions { grid: cfg.grid, tol: cfg.tol, ..Default::default() }
}

fn endpoint_str(e: Endpoint) -> &'static str {
    match e {
        Endpoint::A => "a",
        Endpoint::B => "b",
    }
}

fn side_str(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn finite_str(f: Finite) -> &'static str {
    match f {
        Finite::Yes => "yes",
        Finite::No => "no",
        Finite::Unknown => "unknown",
    }
}

fn divergence_json(d: &Option<Divergence>) -> Value {
    match d {
        None => Value::Null,
        Some(d) => json!({"x": d.x, "side": side_str(d.side), "description": d.to_string()}),
    }
}

fn enclosure_json(e: &Enclosure) -> Value {
    json!({"lo": e.lo, "hi": e.hi, "diverged": divergence_json(&e.diverged)})
}

/// Runs `f(0..n)` on up to `SOBMUCK_THREADS` workers; results keep index order.
fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = std::env::var("SOBMUCK_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1))
        .clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= n {
                            break;
                        }
                        done.push((i, f(i)));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|v| v.expect("every index is computed")).collect()
}

pub fn run(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    cfg.validate()?;
    match cfg.command.as_str() {
        "lambda" => cmd_lambda(cfg),
        "classify" => cmd_classify(cfg),
        "decide" => cmd_decide(cfg),
        "sop" => cmd_sop(cfg),
        "mnorm" => cmd_mnorm(cfg),
        "verify" => cmd_verify(cfg),
        "counterexample" => cmd_counterexample(cfg),
        other => Err(CliError::Parse(format!("unknown command {other}"))),
    }
}

fn cmd_lambda(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let nu1 = input(cfg, "nu1")?;
    let nu2 = input(cfg, "nu2")?;
    let endpoint = match cfg.endpoint.as_deref() {
        Some("a") => Endpoint::A,
        Some("b") | None => Endpoint::B,
        Some(e) => return Err(CliError::Parse(format!("endpoint {e} is not a or b"))),
    };
    let variant = match cfg.variant.as_deref() {
        Some("lambda") | None => LambdaVariant::Lambda,
        Some("prime") => LambdaVariant::Prime,
        Some(v) => return Err(CliError::Parse(format!("variant {v} is not lambda or prime"))),
    };
    let r = lambda(&nu1, &nu2, cfg.p, endpoint, variant, &lambda_opts(cfg))?;
    let out = json!({
        "endpoint": endpoint_str(r.endpoint),
        "variant": match r.variant { LambdaVariant::Lambda => "lambda", LambdaVariant::Prime => "prime" },
        "p": cfg.p,
        "finite": finite_str(r.finite),
        "enclosure": enclosure_json(&r.enclosure),
        "argmax_r": r.argmax_r,
        "reason": r.reason,
    });
    Ok(vec![("lambda.json".into(), to_json(&out))])
}

fn regdata_json(d: &RegData) -> Value {
    let pieces: Vec<Value> = (1..=d.m())
        .map(|j| {
            let (lo, hi) = d.piece(j);
            let reg = d.j.iter().position(|&k| k == j).map(|i| d.reg[i].as_str());
            json!({"index": j, "lo": lo, "hi": hi, "in_j": reg.is_some(), "reg": reg})
        })
        .collect();
    json!({
        "params": d.params,
        "pieces": pieces,
        "j": d.j,
        "h": d.h,
        "strongly": d.strongly,
        "strong_failures": d.strong_failures.iter().map(|(x, s)| json!({"x": x, "side": side_str(*s)})).collect::<Vec<_>>(),
        "hull_extended": d.hull_extended,
        "monotone_params": d.monotone_params,
    })
}

fn cmd_classify(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mu1 = input(cfg, "mu1")?;
    let mu0 = if cfg.inputs.contains_key("mu0") { Some(input(cfg, "mu0")?) } else { None };
    let reg = match reg_interval(&mu1, cfg.p) {
        Ok(c) => json!({"class": c.as_str(), "error": null}),
        Err(e) => json!({"class": null, "error": e.to_string()}),
    };
    let dec = match &mu0 {
        Some(m0) => piecewise_decompose_with(&mu1, m0, cfg.p),
        None => piecewise_decompose(&mu1, cfg.p),
    };
    let (pr, data, reason) = match dec {
        Ok(d) => (true, regdata_json(&d), None),
        Err(sobmuck_core::ClassifyError::NotPiecewiseRegular(s)) => (false, Value::Null, Some(s)),
        Err(e) => return Err(e.into()),
    };
    let out = json!({
        "p": cfg.p,
        "reg_interval": reg,
        "piecewise_regular": pr,
        "reason": reason,
        "decomposition": data,
    });
    Ok(vec![("classify.json".into(), to_json(&out))])
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Reg(d) => json!({"kind": "reg", "data": regdata_json(d)}),
        Witness::ClassC { lo, hi, endpoint, result } => json!({
            "kind": "class_c",
            "lo": lo,
            "hi": hi,
            "endpoint": endpoint_str(*endpoint),
            "verdict": match result.verdict {
                ClassCVerdict::LimitInfinity => "limit_infinity",
                ClassCVerdict::LimsupFinite => "limsup_finite",
                ClassCVerdict::NotInClass => "not_in_class",
            },
            "witness_bound": result.witness_bound,
        }),
        Witness::Lambda { sub_lo, sub_hi, endpoint, k, enclosure } => json!({
            "kind": "lambda",
            "sub_lo": sub_lo,
            "sub_hi": sub_hi,
            "endpoint": endpoint_str(*endpoint),
            "k": k,
            "enclosure": enclosure_json(enclosure),
        }),
        Witness::Split { k } => json!({"kind": "split", "k": k}),
    }
}

fn cmd_decide(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mu0 = input(cfg, "mu0")?;
    let mu1 = input(cfg, "mu1")?;
    let opts = DecideOptions { lambda: lambda_opts(cfg), ..Default::default() };
    let v = decide_with(&mu0, &mu1, cfg.p, &opts)?;
    let replayed = replay_with(&mu0, &mu1, cfg.p, &v, &opts)?;
    let status = |s: Status| s.as_str();
    let out = json!({
        "p": cfg.p,
        "outcome": v.outcome.as_str(),
        "theorem": v.theorem.map(|t| t.as_str()),
        "piece_theorems": v.piece_theorems.iter().map(|t| t.as_str()).collect::<Vec<_>>(),
        "hypotheses": v.hypotheses.iter().map(|h| json!({"name": h.name(), "status": status(h.status)})).collect::<Vec<_>>(),
        "witnesses": v.witnesses.iter().map(witness_json).collect::<Vec<_>>(),
        "attempts": v.attempts.iter().map(|a| json!({"theorem": a.theorem.as_str(), "gap": a.gap})).collect::<Vec<_>>(),
        "gap": v.gap,
        "replay_verified": replayed,
    });
    Ok(vec![("verdict.json".into(), to_json(&out))])
}

fn cmd_sop(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mu0 = input(cfg, "mu0")?;
    let mu1 = input(cfg, "mu1")?;
    let polys = par_map(cfg.degree + 1, |n| {
        if cfg.p == 2.0 {
            sobolev::sop_monic(&mu0, &mu1, n)
        } else {
            sobolev::extremal_monic(&mu0, &mu1, n, cfg.p, cfg.tol.max(1e-12), cfg.seed)
        }
    });
    let mut coef = Csv::new(&["n", "j", "value"]);
    let mut zer = Csv::new(&["n", "k", "re", "im"]);
    for (n, q) in polys.into_iter().enumerate() {
        let q = q?;
        for (j, c) in q.all_coeffs().iter().enumerate() {
            coef.row(&[n.to_string(), j.to_string(), fmt_f64(*c)]);
        }
        for (k, z) in sorted_zeros(&q).iter().enumerate() {
            zer.row(&[n.to_string(), k.to_string(), fmt_f64(z.0), fmt_f64(z.1)]);
        }
    }
    Ok(vec![("sop.csv".into(), coef.into_string()), ("zeros.csv".into(), zer.into_string())])
}

fn sorted_zeros(q: &sobolev::MonicPoly) -> Vec<(f64, f64)> {
    let mut z: Vec<(f64, f64)> = sobolev::zeros(q).iter().map(|c| (c.re, c.im)).collect();
    z.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    z
}

fn check_nmax(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.nmax > MAX_DEGREE {
        return Err(CliError::Precondition(format!("nmax = {} exceeds {MAX_DEGREE}", cfg.nmax)));
    }
    Ok(())
}

fn norms(cfg: &RunConfig, mu0: &Measure, mu1: &Measure) -> Result<Vec<f64>, CliError> {
    check_nmax(cfg)?;
    if cfg.p == 2.0 {
        return Ok(sobolev::m_norm_sequence(mu0, mu1, cfg.nmax)?);
    }
    par_map(cfg.nmax + 1, |n| sobolev::m_norm(mu0, mu1, cfg.p, n, cfg.seed))
        .into_iter()
        .map(|r| r.map_err(CliError::from))
        .collect()
}

fn cmd_mnorm(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mu0 = input(cfg, "mu0")?;
    let mu1 = input(cfg, "mu1")?;
    let mut csv = Csv::new(&["n", "value"]);
    for (n, v) in norms(cfg, &mu0, &mu1)?.iter().enumerate() {
        csv.row(&[n.to_string(), fmt_f64(*v)]);
    }
    Ok(vec![("mnorm.csv".into(), csv.into_string())])
}

/// Zeros of the orthogonal (or extremal) polynomials against the disk of
/// radius `2 ||M||_n`.
fn cmd_verify(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mu0 = input(cfg, "mu0")?;
    let mu1 = input(cfg, "mu1")?;
    let m = norms(cfg, &mu0, &mu1)?;
    let radii = par_map(cfg.nmax, |i| {
        let n = i + 1;
        let q = if cfg.p == 2.0 {
            sobolev::sop_monic(&mu0, &mu1, n)?
        } else {
            sobolev::extremal_monic(&mu0, &mu1, n, cfg.p, cfg.tol.max(1e-12), cfg.seed)?
        };
        Ok::<f64, CliError>(sorted_zeros(&q).iter().map(|z| z.0.hypot(z.1)).fold(0.0, f64::max))
    });
    let mut csv = Csv::new(&["n", "mnorm", "max_abs_zero", "bound", "holds"]);
    for (i, r) in radii.into_iter().enumerate() {
        let n = i + 1;
        let r = r?;
        let bound = 2.0 * m[n];
        csv.row(&[n.to_string(), fmt_f64(m[n]), fmt_f64(r), fmt_f64(bound), (r <= bound).to_string()]);
    }
    Ok(vec![("verify.csv".into(), csv.into_string())])
}

/// `R_n` of the divergent test sequence at `n = 1, 2, 4, ..., <= nmax`.
fn cmd_counterexample(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let nu1 = input(cfg, "nu1")?;
    let nu2 = input(cfg, "nu2")?;
    let nu3 = input(cfg, "nu3")?;
    let ns: Vec<usize> = std::iter::successors(Some(1usize), |n| n.checked_mul(2)).take_while(|&n| n <= cfg.nmax).collect();
    let vals = par_map(ns.len(), |i| sobolev::niff_witness(&nu1, &nu2, &nu3, cfg.p, ns[i], cfg.tol));
    let mut csv = Csv::new(&["n", "value"]);
    for (n, v) in ns.iter().zip(vals) {
        csv.row(&[n.to_string(), fmt_f64(v?)]);
    }
    Ok(vec![("counterexample.csv".into(), csv.into_string())])
}
