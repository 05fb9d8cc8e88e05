use crate::config::ExperimentConfig;
use crate::json::to_value;
use crate::suite;
use crate::{Status, Table};
use anyhow::{anyhow, bail, Result};
use serde_json::{json, Value};
use sticky_lab::catalog::{catalog_list, KernelChoice};
use sticky_lab::convergence::{detect, replay, sticky_cauchy, Mode, ReplayTarget};
use sticky_lab::doubleseq::{
    compactness_diagnostic, double_cluster_candidates, flat_on_edges, hump_modulus, ClusterPolicy,
    DoubleSequenceOracle,
};
use sticky_lab::funcspace::{
    FunctionOracle, Outcome, ResolutionSchedule, SequenceFamily, Verdict, Window,
};
use sticky_lab::functionals::{check_property, limsup_along, upcrossings, Property, TimeSequence};
use sticky_lab::humps::{
    banach_steinhaus_experiment, dirichlet_profile, lemma_check, poisson_limit, AlphaSchedule,
    PoissonKernel,
};
use sticky_lab::seqspace::{ls_norm, Space, TailedSequence};

pub struct Output {
    pub body: Value,
    pub status: Status,
    pub tables: Vec<Table>,
}

fn plain(body: Value) -> Output {
    Output {
        body,
        status: Status::Success,
        tables: Vec::new(),
    }
}

pub fn status_of(o: Outcome) -> Status {
    match o {
        Outcome::Holds => Status::Success,
        Outcome::Fails => Status::Fails,
        Outcome::Inconclusive => Status::Inconclusive,
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn dispatch(cfg: &ExperimentConfig, sched: &ResolutionSchedule) -> Result<Output> {
    match cfg.command.as_str() {
        "analyze" => analyze(cfg, sched),
        "catalog" => Ok(catalog()),
        "lemma" => lemma(cfg),
        "banach-steinhaus" => banach_steinhaus(cfg),
        "poisson" => poisson(cfg, sched),
        "dirichlet" => dirichlet(cfg),
        "functional" => functional(cfg, sched),
        "cluster" => cluster(cfg),
        "compactness" => compactness(cfg, sched),
        "ls-norm" => ls(cfg),
        "suite" => {
            let s = suite::run_suite(cfg.seed);
            let status = if s.all_pass() {
                Status::Success
            } else {
                Status::Fails
            };
            Ok(Output {
                body: to_value(&s),
                status,
                tables: Vec::new(),
            })
        }
        other => bail!("unknown command {other:?}"),
    }
}

fn limit_of(fam: &SequenceFamily) -> Result<FunctionOracle> {
    fam.label
        .pointwise_limit
        .clone()
        .ok_or_else(|| anyhow!("{} has no labelled limit; use --mode cauchy", fam.name))
}

fn analyze(cfg: &ExperimentConfig, sched: &ResolutionSchedule) -> Result<Output> {
    let fam = cfg.family()?;
    let mode = cfg.str_or("mode", "sticky")?;
    let modes: Vec<Mode> = match mode {
        "pointwise" => vec![Mode::Pointwise],
        "sticky" => vec![Mode::Sticky],
        "locally-uniform" => vec![Mode::LocallyUniform],
        "cauchy" => vec![Mode::Cauchy],
        "all" => vec![
            Mode::Pointwise,
            Mode::Sticky,
            Mode::LocallyUniform,
            Mode::Cauchy,
        ],
        m => bail!("unknown mode {m:?}; valid: pointwise, sticky, locally-uniform, cauchy, all"),
    };
    let mut verdicts: Vec<(Mode, Verdict, bool)> = Vec::new();
    let against: Vec<Mode> = modes
        .iter()
        .copied()
        .filter(|&m| m != Mode::Cauchy)
        .collect();
    if !against.is_empty() {
        let lim = limit_of(&fam)?;
        for (m, v) in detect(&fam, &lim, &against, sched)? {
            let ok = v.outcome == Outcome::Inconclusive
                || replay(
                    &v,
                    &ReplayTarget::Family {
                        fam: &fam,
                        limit: Some(&lim),
                    },
                )?;
            verdicts.push((m, v, ok));
        }
    }
    if modes.contains(&Mode::Cauchy) {
        let v = sticky_cauchy(&fam, sched)?;
        let ok = v.outcome == Outcome::Inconclusive
            || replay(
                &v,
                &ReplayTarget::Family {
                    fam: &fam,
                    limit: None,
                },
            )?;
        verdicts.push((Mode::Cauchy, v, ok));
    }
    let status = status_of(Outcome::all(verdicts.iter().map(|v| v.1.outcome)));
    let body = json!({
        "family": fam.name,
        "labels": to_value(&fam.label.labels()),
        "verdicts": verdicts.iter().map(|(m, v, ok)| json!({"mode": to_value(m), "verdict": to_value(v), "replayed": ok})).collect::<Vec<_>>(),
    });
    Ok(Output {
        body,
        status,
        tables: Vec::new(),
    })
}

fn catalog() -> Output {
    let list = catalog_list();
    let mut rows = Vec::new();
    let entries: Vec<Value> = list
        .iter()
        .map(|(name, spec, g)| {
            let l = g.labels();
            rows.push(vec![
                name.clone(),
                to_value(&l.pointwise).to_string(),
                to_value(&l.sticky).to_string(),
                to_value(&l.locally_uniform).to_string(),
                to_value(&l.limit_continuous).to_string(),
            ]);
            json!({"name": name, "spec": to_value(spec), "labels": to_value(&l)})
        })
        .collect();
    let rows = rows
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|c| c.trim_matches('"').to_string())
                .collect()
        })
        .collect();
    Output {
        body: json!({ "families": entries }),
        status: Status::Success,
        tables: vec![Table::new(
            "catalog.csv",
            &[
                "name",
                "pointwise",
                "sticky",
                "locally_uniform",
                "limit_continuous",
            ],
            rows,
        )],
    }
}

fn lemma(cfg: &ExperimentConfig) -> Result<Output> {
    let r = lemma_check(
        cfg.usize_or("k", 4)?,
        cfg.usize_or("n", 8)?,
        cfg.f64_or("alpha", 1.0)?,
        cfg.f64_or("t0", 0.5)?,
    )?;
    let ok = r.rel_error <= 1e-9;
    Ok(Output {
        body: to_value(&r),
        status: if ok { Status::Success } else { Status::Fails },
        tables: Vec::new(),
    })
}

fn alpha_of(cfg: &ExperimentConfig) -> Result<AlphaSchedule> {
    match cfg.params.get("alpha") {
        None => Ok(AlphaSchedule::NOverLog),
        Some(Value::String(s)) if s == "n-over-log" => Ok(AlphaSchedule::NOverLog),
        Some(v) => v
            .as_f64()
            .map(AlphaSchedule::Constant)
            .ok_or_else(|| anyhow!("alpha must be a number or \"n-over-log\"")),
    }
}

fn banach_steinhaus(cfg: &ExperimentConfig) -> Result<Output> {
    let n_list = cfg.usize_list_or("n", &[8, 16, 32, 64, 128, 256, 512, 1024])?;
    let r = banach_steinhaus_experiment(cfg.usize_or("i_max", 6)?, &n_list, alpha_of(cfg)?)?;
    let sup = r
        .sup_norms
        .iter()
        .zip(&r.at_origin)
        .map(|(&(n, s), &(_, z))| vec![n.to_string(), float(s), float(z)])
        .collect();
    let spikes = r
        .spikes
        .iter()
        .map(|s| {
            vec![
                s.i.to_string(),
                s.n.to_string(),
                float(s.sup_norm),
                float(s.value_at_t),
                float(s.predicted),
            ]
        })
        .collect();
    Ok(Output {
        body: to_value(&r),
        status: Status::Success,
        tables: vec![
            Table::new("sup_norms.csv", &["n", "sup_norm", "value_at_0"], sup),
            Table::new(
                "spikes.csv",
                &["i", "n", "sup_norm", "value_at_t_i", "predicted"],
                spikes,
            ),
        ],
    })
}

fn poisson(cfg: &ExperimentConfig, sched: &ResolutionSchedule) -> Result<Output> {
    let (kernel, choice) = match cfg.str_or("kernel", "builtin")? {
        "builtin" => (PoissonKernel::builtin(), KernelChoice::Builtin),
        "odd-gaussian" => (PoissonKernel::odd_gaussian(), KernelChoice::OddGaussian),
        k => bail!("unknown kernel {k:?}; valid: builtin, odd-gaussian"),
    };
    let r = poisson_limit(
        &kernel,
        choice,
        &cfg.f64_list_or("s", &[0.05, 0.02, 0.01])?,
        sched,
    )?;
    let small = r.rows.iter().all(|row| row.sum.abs() <= 1e-6);
    let status = match Outcome::all([r.sticky.outcome, r.limit_continuous_at_zero.outcome]) {
        Outcome::Holds if !small => Status::Fails,
        o => status_of(o),
    };
    let rows = r
        .rows
        .iter()
        .map(|x| {
            vec![
                float(x.s),
                x.terms.to_string(),
                float(x.sum),
                float(x.tail_bound),
            ]
        })
        .collect();
    Ok(Output {
        body: to_value(&r),
        status,
        tables: vec![Table::new(
            "poisson.csv",
            &["s", "terms", "sum", "tail_bound"],
            rows,
        )],
    })
}

fn dirichlet(cfg: &ExperimentConfig) -> Result<Output> {
    let default: Vec<usize> = (0..=12).map(|k| 1 << k).collect();
    let r = dirichlet_profile(&cfg.usize_list_or("n", &default)?)?;
    let rows = r
        .rows
        .iter()
        .map(|&(n, v)| vec![n.to_string(), float(v)])
        .collect();
    Ok(Output {
        body: to_value(&r),
        status: Status::Success,
        tables: vec![Table::new("dirichlet.csv", &["n", "l1_norm"], rows)],
    })
}

/// `member = "limit"` or an index.
fn target(cfg: &ExperimentConfig, fam: &SequenceFamily) -> Result<(String, FunctionOracle)> {
    match cfg.params.get("member") {
        Some(Value::String(s)) if s == "limit" => Ok(("limit".into(), limit_of(fam)?)),
        None => Ok(("limit".into(), limit_of(fam)?)),
        Some(v) => {
            let n = v
                .as_u64()
                .filter(|&n| n >= 1)
                .ok_or_else(|| anyhow!("member must be \"limit\" or an index >= 1"))?
                as usize;
            Ok((n.to_string(), fam.member(n)))
        }
    }
}

fn property_of(name: &str, t: f64) -> Result<Property> {
    Ok(match name {
        "continuous-at" => Property::ContinuousAt(t),
        "right-continuous-at" => Property::RightContinuousAt(t),
        "left-limit-at" => Property::LeftLimitAt(t),
        "cadlag" => Property::Cadlag,
        "locally-bounded" => Property::LocallyBounded,
        "lower-sc" => Property::LowerSC(t),
        "upper-sc" => Property::UpperSC(t),
        p => bail!("unknown property {p:?}; valid: continuous-at, right-continuous-at, left-limit-at, cadlag, locally-bounded, lower-sc, upper-sc"),
    })
}

fn functional(cfg: &ExperimentConfig, sched: &ResolutionSchedule) -> Result<Output> {
    let fam = cfg.family()?;
    let (member, f) = target(cfg, &fam)?;
    let head = json!({"family": fam.name, "member": member});
    let mut body = match cfg.str_or("kind", "upcrossings")? {
        "upcrossings" => {
            let (a, b) = (cfg.f64_or("a", -0.5)?, cfg.f64_or("b", 0.5)?);
            let lo = cfg.f64_or("lo", fam.domain.lo)?;
            let hi = cfg.f64_or("hi", fam.domain.hi.min(lo + 1.0))?;
            let n = upcrossings(&f, a, b, &Window::closed(lo, hi), sched)?;
            json!({"upcrossings": {"a": a, "b": b, "window": [lo, hi], "count": n, "exact": f.as_piecewise().is_some()}})
        }
        "limsup" => {
            let t = cfg.f64_or("t", 0.0)?;
            let tau = match cfg.str_or("approach", "right")? {
                "right" => TimeSequence::harmonic(t),
                "left" => TimeSequence::harmonic_left(t),
                "alternating" => TimeSequence::alternating(t),
                a => bail!("unknown approach {a:?}; valid: right, left, alternating"),
            };
            json!({"limsup": to_value(&limsup_along(&f, &tau)?), "t": t})
        }
        "property" => {
            let p = property_of(
                cfg.str_or("property", "continuous-at")?,
                cfg.f64_or("t", 0.0)?,
            )?;
            let v = check_property(&f, &p, sched)?;
            let status = status_of(v.outcome);
            let mut body = head.clone();
            body["property"] = json!({"kind": to_value(&p), "verdict": to_value(&v)});
            return Ok(Output {
                body: json!({"functionals": body}),
                status,
                tables: Vec::new(),
            });
        }
        k => bail!("unknown functional {k:?}; valid: upcrossings, limsup, property"),
    };
    for (k, v) in head.as_object().unwrap() {
        body[k] = v.clone();
    }
    Ok(plain(json!({ "functionals": body })))
}

pub const DOUBLE_SEQUENCES: [&str; 5] = [
    "bump-ratio",
    "harmonic-sum",
    "gauss-diagonal",
    "constant",
    "upper-triangle",
];

/// Built-in double sequences, indexed from 1.
pub fn builtin_double(name: &str) -> Option<DoubleSequenceOracle> {
    Some(match name {
        "bump-ratio" => DoubleSequenceOracle::new(|i, j| {
            let x = i as f64 / j as f64;
            x * (-x).exp()
        }),
        "harmonic-sum" => DoubleSequenceOracle::new(|i, j| 1.0 / (i + j) as f64),
        "gauss-diagonal" => {
            DoubleSequenceOracle::new(|i, j| (-((i as f64 - j as f64).powi(2))).exp())
        }
        "constant" => DoubleSequenceOracle::new(|_, _| -1.5),
        "upper-triangle" => DoubleSequenceOracle::new(|i, j| if i < j { 1.0 } else { 0.0 }),
        _ => return None,
    })
}

fn cluster(cfg: &ExperimentConfig) -> Result<Output> {
    let size = cfg.usize_or("box", 256)?;
    let (label, sigma) = if let Some(name) = cfg.params.get("sequence").and_then(Value::as_str) {
        let s = builtin_double(name).ok_or_else(|| {
            anyhow!(
                "unknown double sequence {name:?}; valid: {}",
                DOUBLE_SEQUENCES.join(", ")
            )
        })?;
        (name.to_string(), s)
    } else {
        let fam = cfg.family()?;
        let t = cfg.f64_or("t", fam.domain.lo)?;
        let tau = TimeSequence::from_fn(t, move |j| t + 1.0 / (j * j) as f64);
        (
            format!("{}(t + 1/j^2), t = {t}", fam.name),
            DoubleSequenceOracle::from_family(&fam, &tau),
        )
    };
    let sigma = sigma.with_box(size, size)?;
    let policy = ClusterPolicy {
        eps: cfg.f64_or("eps", 0.05)?,
        ..Default::default()
    };
    let cands = double_cluster_candidates(&sigma, &policy)?;
    let kappa = cfg.usize_or("kappa", 2)?;
    let (flat, status) = match flat_on_edges(&sigma, |_| kappa, cfg.f64_or("tol", 0.05)?) {
        Ok(r) => (to_value(&r), status_of(r.verdict.outcome)),
        Err(e) => (json!({"error": e.to_string()}), Status::Inconclusive),
    };
    let body = json!({"sequence": label, "box": size, "policy": to_value(&policy), "candidates": to_value(&cands), "flat_on_edges": flat});
    Ok(Output {
        body,
        status,
        tables: Vec::new(),
    })
}

fn compactness(cfg: &ExperimentConfig, sched: &ResolutionSchedule) -> Result<Output> {
    let fam = cfg.family()?;
    let r = compactness_diagnostic(&fam, sched)?;
    let mut body = json!({"family": fam.name, "report": to_value(&r)});
    if let Some(s) = cfg.params.get("s").and_then(Value::as_f64) {
        let t = cfg.f64_or("t", fam.domain.lo)?;
        body["hump_modulus"] = to_value(&hump_modulus(&fam, s, t, sched)?);
    }
    Ok(Output {
        body,
        status: status_of(r.verdict.outcome),
        tables: Vec::new(),
    })
}

fn ls(cfg: &ExperimentConfig) -> Result<Output> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| anyhow!("ls-norm needs --in <seq.json>"))?;
    let text =
        std::fs::read_to_string(path).map_err(|e| anyhow!("reading {}: {e}", path.display()))?;
    let u: TailedSequence =
        serde_json::from_str(&text).map_err(|e| anyhow!("parsing {}: {e}", path.display()))?;
    u.validate()?;
    let member = |s: Space| s.contains(&u);
    Ok(plain(json!({
        "sequence": to_value(&u),
        "norm": ls_norm(&u),
        "sup_abs": u.sup_abs(),
        "limsup_abs": u.limsup_abs(),
        "in": {"c0": member(Space::C0), "c": member(Space::C), "l1": member(Space::Lp(1.0)), "l2": member(Space::Lp(2.0)), "l_inf": member(Space::Lp(f64::INFINITY))},
    })))
}
