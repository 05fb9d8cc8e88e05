use super::engine::Engine;
use super::neighbourhood::window_sups;
use crate::error::{LabError, Result};
use crate::funcspace::{
    Certificate, FunctionOracle, Outcome, ProbeWindows, ResolutionSchedule, SequenceFamily,
    Verdict, Witness,
};

/// What a verdict is replayed against.
pub enum ReplayTarget<'a> {
    Family {
        fam: &'a SequenceFamily,
        limit: Option<&'a FunctionOracle>,
    },
    /// Two functions compared at a fixed tolerance.
    Pair {
        f: &'a FunctionOracle,
        g: &'a FunctionOracle,
        eps: f64,
    },
}

fn all_indices(sched: &ResolutionSchedule) -> Vec<usize> {
    let mut v = sched.indices();
    v.extend(sched.extension_indices());
    v
}

fn need_limit(limit: Option<&FunctionOracle>) -> Result<&FunctionOracle> {
    limit.ok_or_else(|| LabError::InvalidInput("this verdict needs a limit to replay".into()))
}

/// Checks `sup_{|s-t| < eta} gap_n(s) < eps` for every `(n, eta, eps)`.
///
/// The gap is `|f_n - f|` against `limit`, or the Cauchy tail spread when `limit` is `None`.
fn windows_below(
    fam: &SequenceFamily,
    limit: Option<&FunctionOracle>,
    t: f64,
    checks: &[(usize, f64, f64)],
    sched: &ResolutionSchedule,
) -> bool {
    if checks.is_empty() {
        return true;
    }
    if let Some(gp) = limit.and_then(|g| g.as_piecewise()) {
        if fam.is_piecewise() {
            return checks.iter().all(|&(n, eta, eps)| {
                let d = fam
                    .member(n)
                    .as_piecewise()
                    .expect("piecewise family")
                    .sub(gp);
                d.sup_abs(&fam.domain.window(t, eta)).value < eps
            });
        }
    }
    let pw = ProbeWindows::new(t, &fam.domain, sched);
    let mut ns: Vec<usize> = checks.iter().map(|c| c.0).collect();
    ns.sort_unstable();
    ns.dedup();
    let ev = fam.evaluator(&ns);
    // gaps[k][p] for index ns[k]
    let mut gaps = vec![Vec::with_capacity(pw.points.len()); ns.len()];
    for &s in &pw.points {
        let vals = ev.values(s);
        match limit {
            Some(g) => {
                let gv = g.eval(s);
                for (k, v) in vals.iter().enumerate() {
                    gaps[k].push((v - gv).abs());
                }
            }
            None => {
                let tail: Vec<f64> = Engine::tail_indices(sched, t, s)
                    .iter()
                    .map(|&m| fam.value(m, s))
                    .collect();
                for (k, v) in vals.iter().enumerate() {
                    gaps[k].push(tail.iter().map(|x| (x - v).abs()).fold(0.0, f64::max));
                }
            }
        }
    }
    checks.iter().all(|&(n, eta, eps)| {
        let k = ns.binary_search(&n).expect("index listed");
        let cut = pw.dist.partition_point(|&d| d < eta);
        gaps[k][..cut].iter().all(|&g| g < eps)
    })
}

fn by_t<T>(items: &[T], t: impl Fn(&T) -> f64) -> Vec<(f64, Vec<&T>)> {
    let mut out: Vec<(f64, Vec<&T>)> = Vec::new();
    for it in items {
        match out.last_mut() {
            Some((tt, v)) if *tt == t(it) => v.push(it),
            _ => out.push((t(it), vec![it])),
        }
    }
    out
}

fn replay_certificate(
    c: &Certificate,
    sched: &ResolutionSchedule,
    target: &ReplayTarget,
) -> Result<bool> {
    let idx = all_indices(sched);
    match (c, target) {
        (Certificate::Pointwise(es), ReplayTarget::Family { fam, limit }) => {
            let g = need_limit(*limit)?;
            Ok(es.iter().all(|e| {
                idx.iter()
                    .filter(|&&n| n >= e.n_threshold)
                    .all(|&n| (fam.value(n, e.t) - g.eval(e.t)).abs() < e.eps)
            }))
        }
        (Certificate::Sticky(es), ReplayTarget::Family { fam, limit }) => {
            let g = need_limit(*limit)?;
            Ok(by_t(es, |e| e.t).into_iter().all(|(t, group)| {
                let checks: Vec<_> = group
                    .iter()
                    .flat_map(|e| e.etas.iter().map(move |&(n, eta)| (n, eta, e.eps)))
                    .collect();
                let covered = group.iter().all(|e| {
                    idx.iter()
                        .filter(|&&n| n >= e.n_threshold)
                        .all(|n| e.etas.iter().any(|x| x.0 == *n))
                });
                covered && windows_below(fam, Some(g), t, &checks, sched)
            }))
        }
        (Certificate::Cauchy { entries, .. }, ReplayTarget::Family { fam, .. }) => {
            Ok(by_t(entries, |e| e.t).into_iter().all(|(t, group)| {
                let checks: Vec<_> = group
                    .iter()
                    .flat_map(|e| e.etas.iter().map(move |&(n, eta)| (n, eta, e.eps)))
                    .collect();
                windows_below(fam, None, t, &checks, sched)
            }))
        }
        (Certificate::LocallyUniform(es), ReplayTarget::Family { fam, limit }) => {
            let g = need_limit(*limit)?;
            Ok(by_t(es, |e| e.t).into_iter().all(|(t, group)| {
                let checks: Vec<_> = group
                    .iter()
                    .flat_map(|e| {
                        idx.iter()
                            .filter(move |&&n| n >= e.n_threshold)
                            .map(move |&n| (n, e.eta, e.eps))
                    })
                    .collect();
                group.iter().all(|e| e.eta >= sched.eta_floor_lu())
                    && windows_below(fam, Some(g), t, &checks, sched)
            }))
        }
        (Certificate::EventualEquality(es), ReplayTarget::Family { fam, .. }) => {
            for &(t, eta, n0) in es {
                for &n in idx.iter().filter(|&&n| n >= n0) {
                    let sup = fam
                        .member(n)
                        .meta
                        .hump_supports
                        .ok_or_else(|| LabError::MissingMetadata(format!("member {n}")))?;
                    if sup.iter().any(|i| i.dist(t) < eta) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        (Certificate::Neighbourhood(es), ReplayTarget::Pair { f, g, eps }) => {
            Ok(es.iter().all(|&(t, eta)| {
                let l = sched.eta_ladder.iter().position(|&e| e == eta);
                l.is_some_and(|l| window_sups(f, g, t, sched)[l].0 < *eps)
            }))
        }
        (Certificate::Note(_), _) => Ok(true),
        _ => Err(LabError::InvalidInput(
            "certificate kind does not match the replay target".into(),
        )),
    }
}

fn replay_witness(w: &Witness, sched: &ResolutionSchedule, target: &ReplayTarget) -> Result<bool> {
    match (w, target) {
        (Witness::Pointwise { t, eps, violations }, ReplayTarget::Family { fam, limit }) => {
            let g = need_limit(*limit)?;
            Ok(!violations.is_empty()
                && violations
                    .iter()
                    .all(|&(n, _)| !((fam.value(n, *t) - g.eval(*t)).abs() < *eps)))
        }
        (Witness::Window { t, eps, points, .. }, _) => {
            if points.is_empty() {
                return Ok(false);
            }
            for p in points {
                let (inside, gap) = match target {
                    ReplayTarget::Family { fam, limit } => {
                        let g = need_limit(*limit)?;
                        (
                            fam.domain.contains(p.s),
                            (fam.value(p.n, p.s) - g.eval(p.s)).abs(),
                        )
                    }
                    ReplayTarget::Pair { f, g, .. } => {
                        (f.domain.contains(p.s), (f.eval(p.s) - g.eval(p.s)).abs())
                    }
                };
                if !(inside && (p.s - t).abs() < p.eta && !(gap < *eps)) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (Witness::Cauchy { t, eps, points, .. }, ReplayTarget::Family { fam, .. }) => Ok(!points
            .is_empty()
            && points.iter().all(|(p, m)| {
                (p.s - t).abs() < p.eta
                    && !((fam.value(*m, p.s) - fam.value(p.n, p.s)).abs() < *eps)
            })),
        (
            Witness::Accumulation {
                t,
                dist_base,
                dist_doubled,
            },
            ReplayTarget::Family { fam, .. },
        ) => {
            let idx = all_indices(sched);
            let (mut base, mut dbl) = (f64::INFINITY, f64::INFINITY);
            for &n in &idx {
                let sup = fam
                    .member(n)
                    .meta
                    .hump_supports
                    .ok_or_else(|| LabError::MissingMetadata(format!("member {n}")))?;
                let d = sup.iter().map(|i| i.dist(*t)).fold(f64::INFINITY, f64::min);
                if n >= sched.n_max / 2 && n <= sched.n_max {
                    base = base.min(d);
                } else if n > sched.n_max {
                    dbl = dbl.min(d);
                }
            }
            Ok(base == *dist_base
                && dbl == *dist_doubled
                && ((base == 0.0 && dbl == 0.0) || dbl <= 0.75 * base))
        }
        _ => Err(LabError::InvalidInput(
            "witness kind does not match the replay target".into(),
        )),
    }
}

/// Re-checks a verdict's certificate or witness from scratch on its own schedule.
pub fn replay(v: &Verdict, target: &ReplayTarget) -> Result<bool> {
    match v.outcome {
        Outcome::Inconclusive => Ok(v.certificate.is_none() && v.witness.is_none()),
        Outcome::Holds => {
            let c = v.certificate.as_ref().ok_or_else(|| {
                LabError::InvalidInput("holding verdict without certificate".into())
            })?;
            replay_certificate(c, &v.schedule, target)
        }
        Outcome::Fails => {
            let w = v
                .witness
                .as_ref()
                .ok_or_else(|| LabError::InvalidInput("failing verdict without witness".into()))?;
            replay_witness(w, &v.schedule, target)
        }
    }
}
