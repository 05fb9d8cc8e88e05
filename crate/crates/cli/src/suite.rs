//! The acceptance battery. Every criterion reports deterministic data only;
//! wall-clock times are returned separately.

use crate::commands::{builtin_double, DOUBLE_SEQUENCES};
use crate::json::{canonical, to_value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::time::{Duration, Instant};
use sticky_lab::catalog::{by_name, catalog_list, KernelChoice, Label};
use sticky_lab::convergence::{detect, detect_sticky, replay, sticky_cauchy, Mode, ReplayTarget};
use sticky_lab::doubleseq::{
    compactness_diagnostic, double_cluster_candidates, flat_on_edges, hump_modulus, ClusterPolicy,
};
use sticky_lab::funcspace::{Certificate, Outcome, ResolutionSchedule, Window, Witness};
use sticky_lab::functionals::{check_property, limsup_along, upcrossings, Property, TimeSequence};
use sticky_lab::humps::{
    banach_steinhaus_experiment, lemma_check, poisson_limit, AlphaSchedule, PoissonKernel,
};
use sticky_lab::seqspace::{
    closedness_probe, ls_cauchy, ls_norm, ls_norm_lin, seq_schedule, Space, Tail, TailedSequence,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<Criterion>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

pub const TITLES: [&str; 8] = [
    "lemma exactness",
    "gliding-hump signature",
    "poisson continuity at zero",
    "detector soundness",
    "preservation suite",
    "compactness diagnostics",
    "l_s suite",
    "determinism",
];

/// Runtime budgets in seconds.
pub const BUDGETS: [u64; 8] = [10, 20, 5, 60, 30, 30, 5, 0];

fn crit(id: u8, pass: bool, detail: Value) -> Criterion {
    Criterion {
        id,
        title: TITLES[id as usize - 1],
        pass,
        detail,
    }
}

fn error(id: u8, e: impl std::fmt::Display) -> Criterion {
    crit(id, false, json!({ "error": e.to_string() }))
}

pub fn lemma_exactness() -> Criterion {
    let ks = [4usize, 8, 16, 32, 64];
    let (mut worst, mut checked, mut bad) = (0.0f64, 0, Vec::new());
    for &k in &ks {
        for &n in ks.iter().filter(|&&n| n >= k) {
            for alpha in [1.0, 2.0] {
                let r = match lemma_check(k, n, alpha, 0.5) {
                    Ok(r) => r,
                    Err(e) => return error(1, e),
                };
                checked += 1;
                worst = worst.max(r.rel_error);
                let (lo, hi) = r.predicted_hull;
                let hull_ok = r.support_hull.0 >= lo - 1e-12 && r.support_hull.1 <= hi + 1e-12;
                if !(r.rel_error <= 1e-9 && (r.argmax - r.t0).abs() <= 1.0 / 1024.0 && hull_ok) {
                    bad.push(json!({"k": k, "n": n, "alpha": alpha, "rel_error": r.rel_error, "argmax": r.argmax, "hull": r.support_hull}));
                }
            }
        }
    }
    crit(
        1,
        bad.is_empty(),
        json!({"cases": checked, "max_rel_error": worst, "violations": bad}),
    )
}

pub fn gliding_hump() -> Criterion {
    let n_list: Vec<usize> = (2..=10).map(|k| 1usize << k).collect();
    let r = match banach_steinhaus_experiment(6, &n_list, AlphaSchedule::NOverLog) {
        Ok(r) => r,
        Err(e) => return error(2, e),
    };
    let sups: Vec<f64> = r.spikes.iter().map(|s| s.sup_norm).collect();
    // the closed form k_i / (2 i log(k_i + 2)) dips from i = 1 to i = 2
    let increasing = sups[1..].windows(2).all(|w| w[0] < w[1]);
    let origin = r.at_origin.iter().all(|&(_, v)| v == 0.0);
    let decay: Vec<Value> = r
        .probes
        .iter()
        .take(4)
        .map(|p| {
            let last = p.values.iter().find(|v| v.0 == 1024).map_or(f64::NAN, |v| v.1.abs());
            json!({"t": p.t, "at_1024": last, "max": p.max_abs, "ratio": last / p.max_abs, "ok": last < 0.1 * p.max_abs})
        })
        .collect();
    let decays = decay.iter().all(|d| d["ok"] == json!(true));
    crit(
        2,
        increasing && origin && decays,
        json!({"sup_at_k_i": sups, "increasing_from_i2": increasing, "zero_at_origin": origin, "probe_decay": decay}),
    )
}

pub fn poisson_zero() -> Criterion {
    let s_list = [0.05, 0.02, 0.01];
    let r = match poisson_limit(
        &PoissonKernel::builtin(),
        KernelChoice::Builtin,
        &s_list,
        &ResolutionSchedule::default(),
    ) {
        Ok(r) => r,
        Err(e) => return error(3, e),
    };
    let small = r.rows.iter().all(|x| x.sum.abs() + x.tail_bound <= 1e-6);
    let sticky = r.sticky.outcome == Outcome::Holds;
    let cont = r.limit_continuous_at_zero.outcome == Outcome::Holds;
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|x| json!({"s": x.s, "sum": x.sum, "tail_bound": x.tail_bound, "terms": x.terms}))
        .collect();
    crit(
        3,
        small && sticky && cont,
        json!({"rows": rows, "sticky": to_value(&r.sticky.outcome), "continuous_at_zero": to_value(&r.limit_continuous_at_zero.outcome)}),
    )
}

fn expected(l: Label) -> Option<Outcome> {
    match l {
        Label::Yes => Some(Outcome::Holds),
        Label::No => Some(Outcome::Fails),
        Label::Unknown => None,
    }
}

pub fn detector_soundness() -> Criterion {
    let sched = ResolutionSchedule::default();
    let list = catalog_list();
    let (mut rows, mut mismatches, mut chain, mut replay_failures) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (name, _, truth) in &list {
        let fam = match by_name(name) {
            Ok(f) => f,
            Err(e) => return error(4, e),
        };
        let cauchy = match sticky_cauchy(&fam, &sched) {
            Ok(v) => {
                if !replay(
                    &v,
                    &ReplayTarget::Family {
                        fam: &fam,
                        limit: None,
                    },
                )
                .unwrap_or(false)
                {
                    replay_failures.push(format!("{name} cauchy"));
                }
                v.outcome
            }
            Err(e) => return error(4, e),
        };
        let (pw, st, lu) = match &truth.pointwise_limit {
            Some(lim) => match detect(
                &fam,
                lim,
                &[Mode::Pointwise, Mode::Sticky, Mode::LocallyUniform],
                &sched,
            ) {
                Ok(v) => {
                    let target = ReplayTarget::Family {
                        fam: &fam,
                        limit: Some(lim),
                    };
                    for (m, verdict) in &v {
                        if !replay(verdict, &target).unwrap_or(false) {
                            replay_failures.push(format!("{name} {m:?}"));
                        }
                    }
                    (Some(v[0].1.outcome), v[1].1.outcome, Some(v[2].1.outcome))
                }
                Err(e) => return error(4, e),
            },
            None => (None, cauchy, None),
        };
        if let (Some(p), Some(l)) = (pw, lu) {
            let imp = |a: Outcome, b: Outcome| a != Outcome::Holds || b == Outcome::Holds;
            if !(imp(l, st) && imp(st, p)) || !truth.is_consistent() {
                chain.push(name.clone());
            }
            if p != Outcome::Holds {
                mismatches.push(format!("{name} pointwise: {p:?}"));
            }
        }
        for (what, got, label) in [
            ("sticky", Some(st), truth.sticky),
            ("locally-uniform", lu, truth.locally_uniform),
        ] {
            if let (Some(got), Some(want)) = (got, expected(label)) {
                if got != want {
                    mismatches.push(format!("{name} {what}: {got:?}, label {label:?}"));
                }
            }
        }
        if truth.sticky == Label::Yes && cauchy != st {
            mismatches.push(format!("{name} cauchy: {cauchy:?} vs sticky {st:?}"));
        }
        rows.push(json!({"family": name, "pointwise": to_value(&pw), "sticky": to_value(&st), "locally_uniform": to_value(&lu), "cauchy": to_value(&cauchy)}));
    }
    let pass =
        list.len() >= 10 && mismatches.is_empty() && chain.is_empty() && replay_failures.is_empty();
    crit(
        4,
        pass,
        json!({"families": list.len(), "matrix": rows, "mismatches": mismatches, "chain_violations": chain, "replay_failures": replay_failures}),
    )
}

pub fn preservation() -> Criterion {
    let sched = ResolutionSchedule::default();
    let shapes: [fn(usize) -> f64; 3] = [
        |k| 1.0 / k as f64,
        |k| -1.0 / k as f64,
        |k| if k % 2 == 0 { 1.0 } else { -1.0 } / k as f64,
    ];
    let thin = |v: &[(usize, f64)]| -> Vec<(usize, f64)> {
        v.iter()
            .step_by(v.len().div_ceil(4).max(1))
            .copied()
            .collect()
    };
    let levels = [-0.75, -0.25, 0.0, 0.1, 0.3, 0.5, 0.9, 1.5];
    let (mut rows, mut bad) = (Vec::new(), Vec::new());
    for (name, _, truth) in catalog_list()
        .into_iter()
        .filter(|c| c.2.sticky == Label::Yes)
    {
        let run = || -> sticky_lab::Result<Value> {
            let fam = by_name(&name)?;
            let lim = truth
                .pointwise_limit
                .clone()
                .expect("sticky families carry a limit");
            let v = detect_sticky(&fam, &lim, &sched)?;
            let Some(Certificate::Sticky(entries)) = v.certificate else {
                return Ok(json!({"sticky": to_value(&v.outcome)}));
            };
            let grid = fam
                .domain
                .probes(sched.probe_density, sched.horizon, &fam.hints);
            let mut props = Vec::new();
            if truth.limit_continuous == Label::Yes {
                for &t in &grid {
                    if check_property(&lim, &Property::ContinuousAt(t), &sched)?.outcome
                        != Outcome::Holds
                    {
                        props.push(format!("continuous-at {t}"));
                    }
                }
            }
            for p in [Property::Cadlag, Property::LocallyBounded] {
                if check_property(&lim, &p, &sched)?.outcome != Outcome::Holds {
                    props.push(format!("{p:?}"));
                }
            }
            let (mut s_checks, mut s_bad) = (0usize, 0usize);
            for e in &entries {
                for (n, eta) in thin(&e.etas) {
                    for shape in shapes {
                        let (t, r) = (e.t, 0.5 * eta);
                        let tau = TimeSequence::from_fn(t, move |k| t + r * shape(k))
                            .with_truncation(256, 64);
                        if (1..=256).any(|k| !fam.domain.contains(tau.term(k))) {
                            continue;
                        }
                        let (a, b) = (
                            limsup_along(&fam.member(n), &tau)?,
                            limsup_along(&lim, &tau)?,
                        );
                        s_checks += 1;
                        if !((a.sup - b.sup).abs() <= e.eps && (a.inf - b.inf).abs() <= e.eps) {
                            s_bad += 1;
                        }
                    }
                }
            }
            let w = Window::closed(fam.domain.lo, fam.domain.hi.min(fam.domain.lo + 4.0));
            let late: Vec<usize> = sched
                .indices()
                .into_iter()
                .filter(|&n| n >= sched.n_max / 2)
                .collect();
            let idx: Vec<usize> = late
                .iter()
                .step_by(late.len().div_ceil(4).max(1))
                .copied()
                .collect();
            let mut up_bad = Vec::new();
            for (i, &a) in levels.iter().enumerate() {
                for &b in &levels[i + 1..] {
                    let lower = upcrossings(&lim, a, b, &w, &sched)?;
                    let mut members = usize::MAX;
                    for &n in &idx {
                        members = members.min(upcrossings(&fam.member(n), a, b, &w, &sched)?);
                    }
                    if lower > members {
                        up_bad.push(json!([a, b, lower, members]));
                    }
                }
            }
            Ok(
                json!({"sticky": "Holds", "property_failures": props, "s_tau_checks": s_checks, "s_tau_failures": s_bad, "upcrossing_failures": up_bad}),
            )
        };
        match run() {
            Ok(r) => {
                let ok = r["sticky"] == json!("Holds")
                    && r["property_failures"]
                        .as_array()
                        .is_some_and(|a| a.is_empty())
                    && r["s_tau_failures"] == json!(0)
                    && r["s_tau_checks"].as_u64().is_some_and(|c| c > 0)
                    && r["upcrossing_failures"]
                        .as_array()
                        .is_some_and(|a| a.is_empty());
                if !ok {
                    bad.push(name.clone());
                }
                rows.push(json!({"family": name, "result": r}));
            }
            Err(e) => {
                bad.push(name.clone());
                rows.push(json!({"family": name, "error": e.to_string()}));
            }
        }
    }
    crit(5, bad.is_empty(), json!({"families": rows, "failing": bad}))
}

pub fn compactness() -> Criterion {
    let sched = ResolutionSchedule::default();
    let run = || -> sticky_lab::Result<(bool, Value)> {
        let bump = compactness_diagnostic(&by_name("scaled-bump-exp")?, &sched)?
            .verdict
            .outcome;
        let ramp = compactness_diagnostic(&by_name("ramp-front")?, &sched)?.verdict;
        let ramp_ok = matches!(ramp.witness, Some(Witness::Jump { x, .. }) if x == 0.0);
        let sine = by_name("sin-oscillation")?;
        let sine_rho: Vec<(f64, f64)> = [0.37, 1.1, 2.9, 5.0]
            .iter()
            .map(|&s| Ok((s, hump_modulus(&sine, s, 0.0, &sched)?.rho)))
            .collect::<sticky_lab::Result<_>>()?;
        let train = by_name("spike-train")?;
        let train_rho: Vec<(f64, f64)> = [2.5 / sched.n_max as f64, 0.01, 0.3, 3.0]
            .iter()
            .map(|&s| Ok((s, hump_modulus(&train, s, 0.0, &sched)?.rho)))
            .collect::<sticky_lab::Result<_>>()?;
        let policy = ClusterPolicy::default();
        let mut flat = Vec::new();
        let mut flat_ok = true;
        for name in DOUBLE_SEQUENCES {
            let sigma = builtin_double(name).expect("listed");
            let r = flat_on_edges(&sigma, |_| 2, 0.05)?;
            if r.verdict.outcome == Outcome::Holds {
                let listed = double_cluster_candidates(&sigma, &policy)?
                    .iter()
                    .any(|c| c.covers(r.limit, policy.eps));
                flat_ok &= listed;
                flat.push(json!({"sequence": name, "limit": r.limit, "listed": listed}));
            } else {
                flat.push(json!({"sequence": name, "flat": to_value(&r.verdict.outcome)}));
            }
        }
        let pass = bump == Outcome::Holds
            && ramp_ok
            && sine_rho.iter().all(|r| r.1 >= 0.99)
            && train_rho.iter().all(|r| r.1 <= 1e-9)
            && flat_ok;
        Ok((
            pass,
            json!({"scaled_bump": to_value(&bump), "ramp_front": to_value(&ramp.witness), "sin_rho": sine_rho, "spike_train_rho": train_rho, "flat_on_edges": flat}),
        ))
    };
    match run() {
        Ok((pass, d)) => crit(6, pass, d),
        Err(e) => error(6, e),
    }
}

fn random_sequence(rng: &mut ChaCha8Rng) -> TailedSequence {
    let prefix = (0..rng.gen_range(0..12))
        .map(|_| rng.gen_range(-3.0..3.0))
        .collect();
    let tail = match rng.gen_range(0..4) {
        0 => Tail::Constant {
            c: rng.gen_range(-3.0..3.0),
        },
        1 => Tail::EventuallyPeriodic {
            pattern: (0..rng.gen_range(1..6))
                .map(|_| rng.gen_range(-3.0..3.0))
                .collect(),
        },
        2 => Tail::GeometricDecay {
            ratio: rng.gen_range(-0.9..0.9),
            scale: rng.gen_range(-3.0..3.0),
        },
        _ => Tail::ZeroTail,
    };
    TailedSequence { prefix, tail }
}

pub fn ls_suite(seed: u64) -> Criterion {
    let run = || -> sticky_lab::Result<(bool, Value)> {
        let exact = (0..=40).all(|n| ls_norm(&TailedSequence::unit(n)) == 2f64.powi(-(n as i32)));
        let s = seq_schedule();
        let unit = ls_cauchy(&TailedSequence::unit, &s)?.outcome;
        let front = |n: usize| TailedSequence {
            prefix: vec![0.0; n],
            tail: Tail::Constant { c: 1.0 },
        };
        let shifting = ls_cauchy(&front, &s)?.outcome;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut axiom_failures = 0;
        for _ in 0..200 {
            let (u, v) = (random_sequence(&mut rng), random_sequence(&mut rng));
            let lambda: f64 = rng.gen_range(-5.0..5.0);
            let n = ls_norm(&u);
            let tri = ls_norm_lin(1.0, &u, 1.0, &v)? <= n + ls_norm(&v) + 1e-12;
            let hom = (ls_norm(&u.scaled(lambda)) - lambda.abs() * n).abs() <= 1e-12 * (1.0 + n);
            let pos = n >= 0.0 && (n > 0.0 || (0..2000).all(|k| u.get(k) == 0.0));
            axiom_failures += usize::from(!(tri && hom && pos));
        }
        let c0 = closedness_probe(
            Space::C0,
            &TailedSequence::unit,
            &TailedSequence::zero(),
            &s,
        )?
        .outcome;
        let conv = |n: usize| TailedSequence {
            prefix: vec![],
            tail: Tail::Constant {
                c: 1.0 + 2f64.powi(-(n as i32).min(1000)),
            },
        };
        let c = closedness_probe(Space::C, &conv, &TailedSequence::constant(1.0), &s)?.outcome;
        let g = TailedSequence::new(
            vec![],
            Tail::GeometricDecay {
                ratio: 0.5,
                scale: 1.0,
            },
        )?;
        let trunc = |n: usize| TailedSequence {
            prefix: (0..n).map(|k| 0.5f64.powi(k as i32)).collect(),
            tail: Tail::ZeroTail,
        };
        let l2 = closedness_probe(Space::Lp(2.0), &trunc, &g, &s)?.outcome;
        let pass = exact
            && unit == Outcome::Holds
            && shifting == Outcome::Fails
            && axiom_failures == 0
            && [c0, c, l2].iter().all(|&o| o == Outcome::Holds);
        Ok((
            pass,
            json!({
                "unit_norms_exact": exact,
                "unit_cauchy": to_value(&unit),
                "shifting_front_cauchy": to_value(&shifting),
                "axiom_failures": axiom_failures,
                "closedness": {"c0": to_value(&c0), "c": to_value(&c), "l2": to_value(&l2)},
            }),
        ))
    };
    match run() {
        Ok((pass, d)) => crit(7, pass, d),
        Err(e) => error(7, e),
    }
}

/// Criterion `id` in 1..=7.
pub fn criterion(id: u8, seed: u64) -> Criterion {
    match id {
        1 => lemma_exactness(),
        2 => gliding_hump(),
        3 => poisson_zero(),
        4 => detector_soundness(),
        5 => preservation(),
        6 => compactness(),
        7 => ls_suite(seed),
        _ => panic!("criterion {id} is not a battery member"),
    }
}

/// Criteria 1-7 with their wall-clock times.
pub fn battery(seed: u64) -> (Vec<Criterion>, Vec<Duration>) {
    (1..=7u8)
        .map(|id| {
            let t = Instant::now();
            let c = criterion(id, seed);
            (c, t.elapsed())
        })
        .unzip()
}

/// Runs the battery twice; criterion 8 compares the two canonical encodings byte for byte.
pub fn run_suite_timed(seed: u64) -> (SuiteReport, Vec<Duration>) {
    let (first, mut times) = battery(seed);
    let t = Instant::now();
    let (second, _) = battery(seed);
    let a = canonical(&to_value(&first));
    let b = canonical(&to_value(&second));
    let mut criteria = first;
    criteria.push(crit(
        8,
        a == b,
        json!({"bytes": a.len(), "identical": a == b}),
    ));
    times.push(t.elapsed());
    (SuiteReport { seed, criteria }, times)
}

pub fn run_suite(seed: u64) -> SuiteReport {
    run_suite_timed(seed).0
}
