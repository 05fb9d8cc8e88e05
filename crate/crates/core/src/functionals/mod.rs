//! Pointwise property checks, up-crossing counts, limsup along time sequences,
//! and transfer rules for series of functions.

mod limsup;
mod series;

pub use limsup::{limsup_along, LimsupEstimate, TimeSequence};
pub use series::{partial_sums, series_transfer, SeriesMode, SERIES_CAP};

use crate::error::{LabError, Result};
use crate::funcspace::{
    grid_points, Certificate, Domain, FunctionOracle, PiecewisePoly, ProbeWindows, PropertyEntry,
    ResolutionSchedule, Verdict, Window, Witness,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "t")]
pub enum Property {
    ContinuousAt(f64),
    RightContinuousAt(f64),
    LeftLimitAt(f64),
    Cadlag,
    LocallyBounded,
    LowerSC(f64),
    UpperSC(f64),
}

/// The pointwise gap a property bounds near `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Gap {
    /// `|f(s) - f(t)|` on both sides (`side = 0`) or to the right (`side = 1`).
    Abs { side: i8 },
    /// `f(t) - f(s)`
    Below,
    /// `f(s) - f(t)`
    Above,
    /// oscillation of `f` on `(t - eta, t)`
    LeftOsc,
}

fn signed_range(p: &PiecewisePoly, w: &Window) -> Option<(f64, f64)> {
    let ev = p.events(w);
    if ev.is_empty() {
        return None;
    }
    Some(
        ev.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e.value), hi.max(e.value))
            }),
    )
}

fn gap_window(dom: &Domain, t: f64, eta: f64, kind: Gap) -> Window {
    let w = dom.window(t, eta);
    match kind {
        Gap::Abs { side: 1 } => Window {
            lo: t,
            lo_closed: true,
            ..w
        },
        Gap::LeftOsc => Window {
            hi: t,
            hi_closed: false,
            ..w
        },
        _ => w,
    }
}

/// `sup` of the gap over each ladder window, exact for piecewise polynomials.
fn gap_sups(f: &FunctionOracle, t: f64, kind: Gap, sched: &ResolutionSchedule) -> Vec<f64> {
    let v = f.eval(t);
    if let Some(p) = f.as_piecewise() {
        return sched
            .eta_ladder
            .iter()
            .map(|&eta| {
                let w = gap_window(&f.domain, t, eta, kind);
                match signed_range(p, &w) {
                    None => 0.0,
                    Some((lo, hi)) => match kind {
                        Gap::Abs { .. } => (hi - v).max(v - lo),
                        Gap::Below => v - lo,
                        Gap::Above => hi - v,
                        Gap::LeftOsc => hi - lo,
                    },
                }
            })
            .map(|g: f64| g.max(0.0))
            .collect();
    }
    let side = match kind {
        Gap::Abs { side } => side,
        Gap::LeftOsc => -1,
        _ => 0,
    };
    let pw = ProbeWindows::with_side(t, &f.domain, sched, side);
    let vals: Vec<f64> = pw.points.iter().map(|&s| f.eval(s)).collect();
    let levels = sched.eta_ladder.len();
    let mut out = vec![0.0; levels];
    let (mut lo, mut hi, mut p) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for l in (0..levels).rev() {
        while p < pw.prefix[l] {
            if !(kind == Gap::LeftOsc && pw.points[p] == t) {
                let x = if vals[p].is_nan() {
                    f64::INFINITY
                } else {
                    vals[p]
                };
                lo = lo.min(x);
                hi = hi.max(x);
            }
            p += 1;
        }
        out[l] = if lo > hi {
            0.0
        } else {
            match kind {
                Gap::Abs { .. } => (hi - v).max(v - lo),
                Gap::Below => v - lo,
                Gap::Above => hi - v,
                Gap::LeftOsc => hi - lo,
            }
            .max(0.0)
        };
    }
    out
}

fn point_gap(f: &FunctionOracle, t: f64, s: f64, kind: Gap) -> f64 {
    let (v, x) = (f.eval(t), f.eval(s));
    match kind {
        Gap::Abs { .. } => (x - v).abs(),
        Gap::Below => v - x,
        Gap::Above => x - v,
        Gap::LeftOsc => (x - v).abs(),
    }
}

/// A point `s != t` approaching `t` (from `1/base_grid` inward) with gap at least `eps`.
fn witness_point(
    f: &FunctionOracle,
    t: f64,
    eps: f64,
    kind: Gap,
    sched: &ResolutionSchedule,
) -> Option<(f64, f64)> {
    let sides: &[f64] = match kind {
        Gap::Abs { side: 1 } => &[1.0],
        Gap::LeftOsc => &[-1.0],
        _ => &[1.0, -1.0],
    };
    let h0 = 1.0 / sched.base_grid as f64;
    for k in 0..=60 {
        for &sg in sides {
            let s = t + sg * h0 * 2f64.powi(-k);
            if s != t && f.domain.contains(s) && !(point_gap(f, t, s, kind) < eps) {
                return Some((s, point_gap(f, t, s, kind)));
            }
        }
    }
    None
}

fn left_osc_witness(
    f: &FunctionOracle,
    t: f64,
    eps: f64,
    sched: &ResolutionSchedule,
) -> Option<(f64, f64)> {
    // two left points whose values differ by at least eps; report the later one against the earlier
    let pw = ProbeWindows::with_side(t, &f.domain, sched, -1);
    let cut = *pw.prefix.last()?;
    let pts: Vec<f64> = pw.points[..cut]
        .iter()
        .copied()
        .filter(|&s| s < t)
        .collect();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            let g = (f.eval(a) - f.eval(b)).abs();
            if !(g < eps) {
                return Some((b, g));
            }
        }
    }
    None
}

/// Per-eps largest radius with the gap below eps, or a witness for the first eps that has none.
fn check_gap(
    f: &FunctionOracle,
    t: f64,
    kind: Gap,
    sched: &ResolutionSchedule,
) -> std::result::Result<Vec<PropertyEntry>, Witness> {
    let sups = gap_sups(f, t, kind, sched);
    let mut entries = Vec::new();
    for &eps in &sched.eps_ladder {
        match sups.iter().position(|&g| g < eps) {
            Some(l) => entries.push(PropertyEntry {
                t,
                eps,
                eta: sched.eta_ladder[l],
            }),
            None => {
                let w = if kind == Gap::LeftOsc {
                    left_osc_witness(f, t, eps, sched)
                } else {
                    witness_point(f, t, eps, kind, sched)
                };
                let (s, gap) = w.unwrap_or((t, *sups.last().unwrap_or(&f64::NAN)));
                return Err(Witness::Property { t, eps, s, gap });
            }
        }
    }
    Ok(entries)
}

fn require_point(f: &FunctionOracle, t: f64) -> Result<()> {
    if f.domain.contains(t) {
        Ok(())
    } else {
        Err(LabError::InvalidInput(format!(
            "point {t} outside the domain"
        )))
    }
}

fn from_entries(
    r: std::result::Result<Vec<PropertyEntry>, Witness>,
    sched: &ResolutionSchedule,
) -> Verdict {
    match r {
        Ok(e) => Verdict::holds(Certificate::Property(e), sched),
        Err(w) => Verdict::fails(w, sched),
    }
}

/// Points where a cadlag or boundedness check looks: breakpoints for piecewise
/// polynomials, the probe grid otherwise.
fn check_points(f: &FunctionOracle, sched: &ResolutionSchedule) -> Vec<f64> {
    let hi = f.domain.hi.min(f.domain.lo + sched.horizon);
    if let Some(p) = f.as_piecewise() {
        let w = Window::closed(f.domain.lo, hi);
        let mut v = p.features_in(&w);
        v.retain(|&x| f.domain.contains(x));
        return v;
    }
    f.domain
        .probes(sched.probe_density, sched.horizon, &f.meta.breakpoint_hints)
}

pub fn check_property(
    f: &FunctionOracle,
    p: &Property,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    sched.validate()?;
    Ok(match *p {
        Property::ContinuousAt(t) => {
            require_point(f, t)?;
            from_entries(check_gap(f, t, Gap::Abs { side: 0 }, sched), sched)
        }
        Property::RightContinuousAt(t) => {
            require_point(f, t)?;
            from_entries(check_gap(f, t, Gap::Abs { side: 1 }, sched), sched)
        }
        Property::LeftLimitAt(t) => {
            require_point(f, t)?;
            if t == f.domain.lo {
                return Ok(Verdict::holds(
                    Certificate::Note(format!("no left neighbourhood at {t}")),
                    sched,
                ));
            }
            from_entries(check_gap(f, t, Gap::LeftOsc, sched), sched)
        }
        Property::LowerSC(t) => {
            require_point(f, t)?;
            from_entries(check_gap(f, t, Gap::Below, sched), sched)
        }
        Property::UpperSC(t) => {
            require_point(f, t)?;
            from_entries(check_gap(f, t, Gap::Above, sched), sched)
        }
        Property::Cadlag => {
            let mut all = Vec::new();
            for x in check_points(f, sched) {
                let r = check_gap(f, x, Gap::Abs { side: 1 }, sched);
                let r = r.and_then(|mut e| {
                    if x > f.domain.lo {
                        e.extend(check_gap(f, x, Gap::LeftOsc, sched)?);
                    }
                    Ok(e)
                });
                match r {
                    Ok(e) => all.extend(e),
                    Err(Witness::Property { t, s, gap, .. }) => {
                        return Ok(Verdict::fails(Witness::Jump { x: t, s, jump: gap }, sched));
                    }
                    Err(w) => return Ok(Verdict::fails(w, sched)),
                }
            }
            Verdict::holds(Certificate::Property(all), sched)
        }
        Property::LocallyBounded => locally_bounded(f, sched)?,
    })
}

/// Max of `|f|` on each unit block of the horizon.
fn locally_bounded(f: &FunctionOracle, sched: &ResolutionSchedule) -> Result<Verdict> {
    if let Some(p) = f.as_piecewise() {
        let finite = p
            .pieces()
            .iter()
            .all(|q| q.coeffs().iter().all(|c| c.is_finite()))
            && p.atoms().iter().all(|a| a.1.is_finite());
        return Ok(if finite {
            Verdict::holds(
                Certificate::Note("finitely many polynomial pieces".into()),
                sched,
            )
        } else {
            Verdict::fails(Witness::Note("non-finite coefficient".into()), sched)
        });
    }
    let hi = f.domain.hi.min(f.domain.lo + sched.horizon);
    let mut bounds = Vec::new();
    let mut a = f.domain.lo;
    while a < hi {
        let b = (a + 1.0).min(hi);
        let w = Window {
            lo: a,
            hi: b,
            lo_closed: true,
            hi_closed: b == hi && f.domain.contains(b),
        };
        let mut m = 0.0f64;
        for s in grid_points(f, &w, sched)? {
            let v = f.eval(s).abs();
            if !v.is_finite() {
                return Ok(Verdict::fails(
                    Witness::Unbounded {
                        x: s,
                        early_max: m,
                        late_max: v,
                    },
                    sched,
                ));
            }
            m = m.max(v);
        }
        bounds.push(format!("[{a}, {b}]: {m:e}"));
        a = b;
    }
    Ok(Verdict::holds(
        Certificate::Note(format!("sampled bounds {}", bounds.join("; "))),
        sched,
    ))
}

/// Runs the up-crossing state machine over a value sequence (strict inequalities).
pub fn count_upcrossings(values: impl IntoIterator<Item = f64>, a: f64, b: f64) -> usize {
    let (mut below, mut n) = (false, 0);
    for v in values {
        if !below && v < a {
            below = true;
        } else if below && v > b {
            below = false;
            n += 1;
        }
    }
    n
}

/// `N^{a,b}(f)` on `w`: exact for piecewise polynomials, a grid lower bound otherwise.
pub fn upcrossings(
    f: &FunctionOracle,
    a: f64,
    b: f64,
    w: &Window,
    sched: &ResolutionSchedule,
) -> Result<usize> {
    if !(a < b) {
        return Err(LabError::InvalidInput(format!(
            "need a < b, got a = {a}, b = {b}"
        )));
    }
    if !(f.domain.contains(w.lo) && (f.domain.contains(w.hi) || w.hi == f.domain.hi)) {
        return Err(LabError::InvalidInput(format!(
            "window [{}, {}] leaves the domain",
            w.lo, w.hi
        )));
    }
    if let Some(p) = f.as_piecewise() {
        return Ok(count_upcrossings(
            p.events(w).into_iter().map(|e| e.value),
            a,
            b,
        ));
    }
    Ok(count_upcrossings(
        grid_points(f, w, sched)?.into_iter().map(|s| f.eval(s)),
        a,
        b,
    ))
}

#[cfg(test)]
mod tests;
