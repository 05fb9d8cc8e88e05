//! Function oracles on subsets of the line, grids, windows and exact suprema.

mod family;
mod schedule;
mod verdict;

pub use crate::piecewise::{Extremum, PiecewisePoly, Window};
pub use crate::poly::Poly;
pub use family::{Evaluator, SequenceFamily};
pub use schedule::{geometric_indices, ResolutionSchedule};
pub use verdict::*;

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// An interval `[lo, hi]` of the line (or `[0, 1)` of the circle when periodic).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain {
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn half_line(horizon: f64) -> Self {
        Domain::interval(0.0, horizon)
    }

    pub fn circle() -> Self {
        Domain {
            lo: 0.0,
            hi: 1.0,
            periodic: true,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && (t <= self.hi && !self.periodic || t < self.hi)
    }

    /// `(t - eta, t + eta)` intersected with the domain.
    pub fn window(&self, t: f64, eta: f64) -> Window {
        let (a, b) = (t - eta, t + eta);
        Window {
            lo: a.max(self.lo),
            hi: b.min(self.hi),
            lo_closed: a < self.lo,
            hi_closed: b > self.hi && !self.periodic,
        }
    }

    /// Evenly spaced probe points, `density` per unit length, plus `extra` points in range.
    pub fn probes(&self, density: usize, horizon: f64, extra: &[f64]) -> Vec<f64> {
        let hi = self.hi.min(self.lo + horizon);
        let n = ((hi - self.lo) * density as f64).floor() as usize;
        let mut v: Vec<f64> = (0..=n)
            .map(|k| self.lo + k as f64 / density as f64)
            .filter(|&t| self.contains(t))
            .collect();
        v.extend(
            extra
                .iter()
                .copied()
                .filter(|&t| self.contains(t) && t <= hi),
        );
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    /// Distance from `t` to the closed interval.
    pub fn dist(&self, t: f64) -> f64 {
        if t < self.lo {
            self.lo - t
        } else if t > self.hi {
            t - self.hi
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Declared supports of the difference from a reference, when known.
    pub hump_supports: Option<Vec<Interval>>,
    pub continuous: Option<bool>,
    pub breakpoint_hints: Vec<f64>,
    /// Bound on whatever a truncated representation leaves out.
    pub tail_bound: f64,
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type TermFn = Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>;
pub type RangeFn = Arc<dyn Fn(f64) -> (i64, i64) + Send + Sync>;

/// A finite sum `sum_{k in range(t)} term(k, t)`; terms outside the active range
/// are covered by `Metadata::tail_bound`.
#[derive(Clone)]
pub struct SeriesOracle {
    pub term: TermFn,
    pub range: RangeFn,
}

impl SeriesOracle {
    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = (self.range)(t);
        neumaier_sum((a..=b).map(|k| (self.term)(k, t)))
    }
}

#[derive(Clone)]
pub enum Structure {
    PiecewisePoly(Arc<PiecewisePoly>),
    Closure(RealFn),
    Series(SeriesOracle),
}

#[derive(Clone)]
pub struct FunctionOracle {
    pub domain: Domain,
    pub structure: Structure,
    pub meta: Metadata,
}

impl fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.structure {
            Structure::PiecewisePoly(_) => "piecewise",
            Structure::Closure(_) => "closure",
            Structure::Series(_) => "series",
        };
        f.debug_struct("FunctionOracle")
            .field("domain", &self.domain)
            .field("kind", &kind)
            .finish()
    }
}

impl FunctionOracle {
    pub fn piecewise(domain: Domain, p: PiecewisePoly) -> Self {
        let meta = Metadata {
            breakpoint_hints: p
                .breaks()
                .iter()
                .copied()
                .filter(|b| b.is_finite())
                .collect(),
            ..Default::default()
        };
        FunctionOracle {
            domain,
            structure: Structure::PiecewisePoly(Arc::new(p)),
            meta,
        }
    }

    pub fn closure(domain: Domain, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        FunctionOracle {
            domain,
            structure: Structure::Closure(Arc::new(f)),
            meta: Metadata::default(),
        }
    }

    pub fn series(domain: Domain, s: SeriesOracle, tail_bound: f64) -> Self {
        FunctionOracle {
            domain,
            structure: Structure::Series(s),
            meta: Metadata {
                tail_bound,
                ..Default::default()
            },
        }
    }

    pub fn with_meta(mut self, meta: Metadata) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_continuity(mut self, c: bool) -> Self {
        self.meta.continuous = Some(c);
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = if self.domain.periodic {
            t.rem_euclid(1.0)
        } else {
            t
        };
        match &self.structure {
            Structure::PiecewisePoly(p) => p.eval(t),
            Structure::Closure(f) => f(t),
            Structure::Series(s) => s.eval(t),
        }
    }

    pub fn as_piecewise(&self) -> Option<&PiecewisePoly> {
        match &self.structure {
            Structure::PiecewisePoly(p) if !self.domain.periodic => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupMode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupValue {
    pub value: f64,
    pub at: f64,
    pub mode: SupMode,
}

/// Sample points of `w`: a dyadic grid of spacing `1/base_grid` (coarsened by
/// doubling until it fits `window_cap`), closed endpoints, and the oracle's
/// breakpoint hints.
pub fn grid_points(f: &FunctionOracle, w: &Window, sched: &ResolutionSchedule) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Ok(Vec::new());
    }
    let mut fixed: Vec<f64> = f
        .meta
        .breakpoint_hints
        .iter()
        .copied()
        .filter(|&b| w.contains(b))
        .collect();
    if let Some(p) = f.as_piecewise() {
        fixed.extend(p.features_in(w));
    }
    fixed.sort_by(f64::total_cmp);
    fixed.dedup();
    if fixed.len() > sched.window_cap {
        return Err(LabError::WindowOverCap {
            needed: fixed.len(),
            cap: sched.window_cap,
        });
    }
    let mut h = 1.0 / sched.base_grid as f64;
    let budget = sched.window_cap - fixed.len();
    let width = w.hi - w.lo;
    while width / h + 3.0 > budget as f64 && h < width {
        h *= 2.0;
    }
    let mut pts = fixed;
    if w.lo_closed {
        pts.push(w.lo);
    }
    if w.hi_closed {
        pts.push(w.hi);
    }
    let k0 = (w.lo / h).floor() as i64;
    let k1 = (w.hi / h).ceil() as i64;
    pts.extend((k0..=k1).map(|k| k as f64 * h).filter(|&t| w.contains(t)));
    if pts.is_empty() {
        pts.push(w.interior(0.5));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.truncate(sched.window_cap.max(1));
    Ok(pts)
}

pub fn eval_on_grid(
    f: &FunctionOracle,
    w: &Window,
    sched: &ResolutionSchedule,
) -> Result<Vec<(f64, f64)>> {
    Ok(grid_points(f, w, sched)?
        .into_iter()
        .map(|t| (t, f.eval(t)))
        .collect())
}

/// `sup |f|` on `w`: exact for piecewise polynomials, a grid lower bound otherwise.
pub fn sup_on_window(
    f: &FunctionOracle,
    w: &Window,
    sched: &ResolutionSchedule,
) -> Result<SupValue> {
    if let Some(p) = f.as_piecewise() {
        let e = p.sup_abs(w);
        return Ok(SupValue {
            value: e.value,
            at: e.at,
            mode: SupMode::Exact,
        });
    }
    let mut best = SupValue {
        value: 0.0,
        at: w.lo,
        mode: SupMode::Sampled,
    };
    for (t, v) in eval_on_grid(f, w, sched)? {
        if v.abs() > best.value || v.is_nan() {
            best = SupValue {
                value: v.abs(),
                at: t,
                mode: SupMode::Sampled,
            };
        }
    }
    Ok(best)
}

/// Compensated summation.
pub fn neumaier_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Points of the detection windows around `t`, sorted by distance.
///
/// For every ladder level `eta` the offsets `eta (2j-1) / (2R)`, `j = 1..=R`, on
/// both sides are included. `prefix[l]` counts the points with distance
/// `< eta_ladder[l]`, so window `l` is `points[..prefix[l]]`.
#[derive(Clone, Debug)]
pub struct ProbeWindows {
    pub t: f64,
    pub points: Vec<f64>,
    pub dist: Vec<f64>,
    pub prefix: Vec<usize>,
}

impl ProbeWindows {
    pub fn new(t: f64, domain: &Domain, sched: &ResolutionSchedule) -> Self {
        Self::with_side(t, domain, sched, 0)
    }

    /// `side`: 0 both sides, 1 right only (`s >= t`), -1 left only (`s <= t`).
    pub fn with_side(t: f64, domain: &Domain, sched: &ResolutionSchedule, side: i8) -> Self {
        let r = sched.window_res;
        let mut pts: Vec<f64> = vec![t];
        for &eta in &sched.eta_ladder {
            for j in 1..=r {
                let d = eta * (2 * j - 1) as f64 / (2 * r) as f64;
                if side >= 0 {
                    pts.push(t + d);
                }
                if side <= 0 {
                    pts.push(t - d);
                }
            }
        }
        let top = sched.eta_ladder[0];
        if side <= 0 && t - domain.lo < top && !domain.periodic {
            pts.push(domain.lo);
        }
        if side >= 0 && domain.hi - t < top && !domain.periodic {
            pts.push(domain.hi);
        }
        let mut pd: Vec<(f64, f64)> = pts
            .into_iter()
            .filter(|&s| domain.periodic || (s >= domain.lo && s <= domain.hi))
            .map(|s| ((s - t).abs(), s))
            .filter(|&(d, s)| d < top || s == t)
            .collect();
        pd.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pd.dedup_by(|a, b| a.1 == b.1);
        let dist: Vec<f64> = pd.iter().map(|p| p.0).collect();
        let points: Vec<f64> = pd.iter().map(|p| p.1).collect();
        let prefix = sched
            .eta_ladder
            .iter()
            .map(|&eta| dist.partition_point(|&d| d < eta))
            .collect();
        ProbeWindows {
            t,
            points,
            dist,
            prefix,
        }
    }

    pub fn level_window(&self, domain: &Domain, eta: f64) -> Window {
        domain.window(self.t, eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_respects_cap_and_contains_breakpoints() {
        let p = PiecewisePoly::linear_interp(&[(0.0, 0.0), (0.3, 1.0), (16.0, 0.0)]).unwrap();
        let f = FunctionOracle::piecewise(Domain::half_line(16.0), p);
        let sched = ResolutionSchedule::default();
        let g = grid_points(&f, &Window::closed(0.0, 16.0), &sched).unwrap();
        assert!(g.len() <= sched.window_cap);
        assert!(g.contains(&0.3));
        assert!(g.contains(&16.0));
    }

    #[test]
    fn too_many_breakpoints_is_an_error() {
        let nodes: Vec<(f64, f64)> = (0..5000)
            .map(|k| (k as f64 * 1e-4, (k % 2) as f64))
            .collect();
        let f = FunctionOracle::piecewise(
            Domain::half_line(16.0),
            PiecewisePoly::linear_interp(&nodes).unwrap(),
        );
        let r = grid_points(
            &f,
            &Window::closed(0.0, 1.0),
            &ResolutionSchedule::default(),
        );
        assert!(matches!(r, Err(LabError::WindowOverCap { .. })));
    }

    #[test]
    fn probe_windows_are_nested_and_clipped() {
        let d = Domain::half_line(16.0);
        let sched = ResolutionSchedule::default();
        let w = ProbeWindows::new(0.0, &d, &sched);
        assert_eq!(w.points[0], 0.0);
        assert!(w.points.iter().all(|&s| s >= 0.0));
        assert!(w.prefix.windows(2).all(|p| p[0] >= p[1]));
        assert!(*w.prefix.last().unwrap() > 1);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let s = neumaier_sum([1e16, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }
}
