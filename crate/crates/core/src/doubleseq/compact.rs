use crate::convergence::Engine;
use crate::error::{LabError, Result};
use crate::funcspace::{
    Certificate, ProbeWindows, ResolutionSchedule, SequenceFamily, Verdict, Witness,
};
use crate::par;
use serde::Serialize;

/// `rho` is the sup of `|f_n(s) - f_n(t)|` over the window indices that are not excluded;
/// the excluded set is `1..prefix` together with `outliers`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HumpModulus {
    pub rho: f64,
    pub prefix: usize,
    pub outliers: Vec<usize>,
}

/// At most `cap` evenly spaced indices of `(lo, hi]`.
fn spread(lo: usize, hi: usize, cap: usize) -> Vec<usize> {
    let len = hi.saturating_sub(lo);
    let step = len.div_ceil(cap.max(1)).max(1);
    (lo + 1..=hi)
        .rev()
        .step_by(step)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect()
}

fn windows(sched: &ResolutionSchedule) -> [Vec<usize>; 2] {
    let n = sched.n_max;
    [
        spread(n / 2 - 1, n, sched.window_cap),
        spread(n, 2 * n, sched.window_cap),
    ]
}

pub fn hump_modulus(
    fam: &SequenceFamily,
    s: f64,
    t: f64,
    sched: &ResolutionSchedule,
) -> Result<HumpModulus> {
    hump_modulus_sub(fam, s, t, sched, |_| true)
}

/// The modulus of the subfamily `{f_n : keep(n)}`, over the same index windows.
///
/// Windowed limsup: with `d_n = |f_n(s) - f_n(t)|`, `rho` is the smaller of the window maxima
/// over `[n_max / 2, n_max]` and `(n_max, 2 n_max]`.
pub fn hump_modulus_sub(
    fam: &SequenceFamily,
    s: f64,
    t: f64,
    sched: &ResolutionSchedule,
    keep: impl Fn(usize) -> bool,
) -> Result<HumpModulus> {
    sched.validate()?;
    for x in [s, t] {
        if !fam.domain.contains(x) {
            return Err(LabError::InvalidInput(format!(
                "{x} is outside the domain of {}",
                fam.name
            )));
        }
    }
    let [w1, w2] = windows(sched).map(|w| w.into_iter().filter(|&n| keep(n)).collect::<Vec<_>>());
    let idx: Vec<usize> = w1.iter().chain(&w2).copied().collect();
    let ev = fam.evaluator(&idx);
    let d: Vec<f64> = ev
        .values(s)
        .into_iter()
        .zip(ev.values(t))
        .map(|(a, b)| (a - b).abs())
        .map(|x| if x.is_nan() { f64::INFINITY } else { x })
        .collect();
    let top = |r: &[f64]| r.iter().copied().fold(0.0f64, f64::max);
    let rho = top(&d[..w1.len()]).min(top(&d[w1.len()..]));
    let outliers = idx
        .iter()
        .zip(&d)
        .filter(|&(_, &x)| x > rho)
        .map(|(&n, _)| n)
        .collect();
    Ok(HumpModulus {
        rho,
        prefix: sched.n_max / 2,
        outliers,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessReport {
    pub verdict: Verdict,
    /// Hump-modulus route: `(eps, max over grid t of rho(t +- eta, t) < eps)` at the finest
    /// window radius `eta >= lu_scale / n_max`. Informational only.
    pub hump_route: Vec<(f64, bool)>,
    pub hump_route_max: f64,
}

const TAIL_POINTS: usize = 16;

/// Finite-range relative compactness check: bounded orbits at every grid point, and a
/// continuous pointwise limit candidate.
pub fn compactness_diagnostic(
    fam: &SequenceFamily,
    sched: &ResolutionSchedule,
) -> Result<CompactnessReport> {
    sched.validate()?;
    match fam.members_continuous {
        None => {
            return Err(LabError::MissingMetadata(format!(
                "{} does not declare member continuity",
                fam.name
            )))
        }
        Some(false) => {
            return Err(LabError::Precondition(format!(
                "{} has discontinuous members",
                fam.name
            )))
        }
        Some(true) => {}
    }
    let grid = fam
        .domain
        .probes(sched.probe_density, sched.horizon, &fam.hints);
    let route = hump_route(fam, &grid, sched)?;
    let hump_route = sched.eps_ladder.iter().map(|&e| (e, route < e)).collect();
    let report = |verdict| CompactnessReport {
        verdict,
        hump_route,
        hump_route_max: route,
    };

    let mut idx = sched.indices();
    idx.extend(sched.extension_indices());
    let ev = fam.evaluator(&idx);
    let half = sched.n_max / 2;
    let bounded = par::map(&grid, |&x| {
        let (mut early, mut late) = (0.0f64, 0.0f64);
        for (&n, v) in idx.iter().zip(ev.values(x)) {
            let a = if v.is_nan() { f64::INFINITY } else { v.abs() };
            if n <= half {
                early = early.max(a);
            } else {
                late = late.max(a);
            }
        }
        (x, early, late)
    });
    if let Some(&(x, early_max, late_max)) = bounded
        .iter()
        .find(|&&(_, e, l)| !(e.is_finite() && l <= 2.0 * e + 1.0))
    {
        return Ok(report(Verdict::fails(
            Witness::Unbounded {
                x,
                early_max,
                late_max,
            },
            sched,
        )));
    }

    // without a settled tail value somewhere, (b) has nothing to test
    let coarsest = sched.eps_ladder[0];
    let unsettled: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&t| !(candidate(fam, t, t, sched).2 < coarsest))
        .collect();
    if let Some(&x) = unsettled.first() {
        let mut v = Verdict::inconclusive(sched);
        v.certificate = Some(Certificate::Note(format!(
            "no limit candidate at {} of {} grid points (tail oscillation >= {coarsest}), first at x = {x}",
            unsettled.len(),
            grid.len()
        )));
        return Ok(report(v));
    }

    let mut checked = 0usize;
    for &t in &grid {
        if let Some(w) = candidate_jump(fam, t, sched) {
            return Ok(report(Verdict::fails(w, sched)));
        }
        checked += 1;
    }
    let note =
        format!("orbits bounded and tail limit candidate continuous at {checked} grid points");
    Ok(report(Verdict::holds(Certificate::Note(note), sched)))
}

/// Tail means of `f_m(s)` and `f_m(t)` over the last quarter of `[1, 2 M]`, with `M` the Cauchy
/// tail start for `s` seen from `t`, and the larger of the two tail oscillations.
fn candidate(fam: &SequenceFamily, t: f64, s: f64, sched: &ResolutionSchedule) -> (f64, f64, f64) {
    let m = Engine::tail_start(sched, t, s);
    let ev = fam.evaluator(&spread(3 * m / 2, 2 * m, TAIL_POINTS));
    let stats = |x: f64| {
        let v = ev.values(x);
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        if mean.is_nan() {
            (f64::INFINITY, f64::INFINITY)
        } else {
            (mean, hi - lo)
        }
    };
    let ((gs, os), (gt, ot)) = (stats(s), stats(t));
    (gs, gt, os.max(ot))
}

/// Continuity of the limit candidate at `t`: for each eps some ladder window must keep every
/// accepted point (tail oscillation below eps) within eps of the value at `t`.
fn candidate_jump(fam: &SequenceFamily, t: f64, sched: &ResolutionSchedule) -> Option<Witness> {
    let pw = ProbeWindows::new(t, &fam.domain, sched);
    let vals: Vec<(f64, f64, f64)> = pw
        .points
        .iter()
        .map(|&s| candidate(fam, t, s, sched))
        .collect();
    for &eps in &sched.eps_ladder {
        let bad = |p: usize| vals[p].2 < eps && !((vals[p].0 - vals[p].1).abs() < eps);
        let ok = pw.prefix.iter().any(|&k| !(1..k).any(bad));
        if !ok {
            let p = (1..pw.points.len())
                .find(|&p| bad(p))
                .expect("a violation exists");
            return Some(Witness::Jump {
                x: t,
                s: pw.points[p],
                jump: vals[p].0 - vals[p].1,
            });
        }
    }
    None
}

fn hump_route(fam: &SequenceFamily, grid: &[f64], sched: &ResolutionSchedule) -> Result<f64> {
    let floor = sched.eta_floor_lu();
    let eta = sched
        .eta_ladder
        .iter()
        .copied()
        .filter(|&e| e >= floor)
        .fold(f64::INFINITY, f64::min);
    if !eta.is_finite() {
        return Ok(f64::INFINITY);
    }
    let per_t = par::map(grid, |&t| -> Result<f64> {
        let mut r = 0.0f64;
        for s in [t - eta, t + eta] {
            if fam.domain.contains(s) {
                r = r.max(hump_modulus(fam, s, t, sched)?.rho);
            }
        }
        Ok(r)
    });
    per_t.into_iter().try_fold(0.0f64, |m, r| Ok(m.max(r?)))
}

#[cfg(test)]
pub(super) fn windows_for_test(sched: &ResolutionSchedule) -> [Vec<usize>; 2] {
    windows(sched)
}
