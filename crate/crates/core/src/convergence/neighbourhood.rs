use super::engine::{classify, Classification};
use crate::catalog::Label;
use crate::error::{LabError, Result};
use crate::funcspace::{
    Certificate, FunctionOracle, GapPoint, Interval, Outcome, ProbeWindows, ResolutionSchedule,
    SequenceFamily, Verdict, Window, Witness,
};
use crate::par;

/// A point of `w` near a non-attained extremum at `at`, maximising `h` over a dyadic approach.
pub(crate) fn approach(w: &Window, at: f64, h: impl Fn(f64) -> f64) -> f64 {
    let width = w.hi - w.lo;
    let mut best = (f64::NEG_INFINITY, w.interior(0.5));
    for k in 1..=60 {
        for sign in [1.0, -1.0] {
            let s = at + sign * width * 2f64.powi(-k);
            if s != at && w.contains(s) && h(s) > best.0 {
                best = (h(s), s);
            }
        }
    }
    best.1
}

/// `sup |f - g|` over each ladder window around `t`, with a point realising it.
pub(crate) fn window_sups(
    f: &FunctionOracle,
    g: &FunctionOracle,
    t: f64,
    sched: &ResolutionSchedule,
) -> Vec<(f64, f64)> {
    if let (Some(a), Some(b)) = (f.as_piecewise(), g.as_piecewise()) {
        let d = a.sub(b);
        return sched
            .eta_ladder
            .iter()
            .map(|&eta| {
                let w = f.domain.window(t, eta);
                let e = d.sup_abs(&w);
                if e.attained {
                    return (e.value, e.at);
                }
                (e.value, approach(&w, e.at, |s| d.eval(s).abs()))
            })
            .collect();
    }
    let pw = ProbeWindows::new(t, &f.domain, sched);
    let gaps: Vec<f64> = pw
        .points
        .iter()
        .map(|&s| (f.eval(s) - g.eval(s)).abs())
        .collect();
    let mut out = vec![(0.0, t); sched.eta_ladder.len()];
    let (mut best, mut at, mut p) = (0.0f64, t, 0);
    for l in (0..sched.eta_ladder.len()).rev() {
        while p < pw.prefix[l] {
            if !(gaps[p] <= best) {
                best = if gaps[p].is_nan() {
                    f64::INFINITY
                } else {
                    gaps[p]
                };
                at = pw.points[p];
            }
            p += 1;
        }
        out[l] = (best, at);
    }
    out
}

/// The elementary neighbourhood `{g : |g(t_i) - f(t_i)| < eps near every t_i}` of `base`.
#[derive(Clone, Debug)]
pub struct NeighbourhoodSpec {
    pub base: FunctionOracle,
    pub points: Vec<f64>,
    pub epsilon: f64,
}

impl NeighbourhoodSpec {
    pub fn new(base: FunctionOracle, points: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(LabError::InvalidInput(format!(
                "epsilon = {epsilon} must be positive"
            )));
        }
        for (i, &t) in points.iter().enumerate() {
            if !base.domain.contains(t) {
                return Err(LabError::InvalidInput(format!(
                    "point {t} outside the domain"
                )));
            }
            if points[..i].contains(&t) {
                return Err(LabError::InvalidInput(format!("point {t} listed twice")));
            }
        }
        Ok(NeighbourhoodSpec {
            base,
            points,
            epsilon,
        })
    }
}

/// Whether `g` lies in the neighbourhood; reports the largest working radius per point.
pub fn neighbourhood_contains(
    nbhd: &NeighbourhoodSpec,
    g: &FunctionOracle,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    sched.validate()?;
    let (f, eps, points) = (&nbhd.base, nbhd.epsilon, &nbhd.points);
    if f.domain != g.domain {
        return Err(LabError::DomainMismatch(format!(
            "{:?} vs {:?}",
            f.domain, g.domain
        )));
    }
    let mut cert = Vec::new();
    for &t in points {
        let sups = window_sups(f, g, t, sched);
        match sups.iter().position(|s| s.0 < eps) {
            Some(l) => cert.push((t, sched.eta_ladder[l])),
            None => {
                let pts = sups
                    .iter()
                    .zip(&sched.eta_ladder)
                    .map(|(&(gap, s), &eta)| GapPoint { eta, n: 0, s, gap })
                    .collect();
                return Ok(Verdict::fails(
                    Witness::Window {
                        t,
                        eps,
                        points: pts,
                        violating_indices: Vec::new(),
                    },
                    sched,
                ));
            }
        }
    }
    Ok(Verdict::holds(Certificate::Neighbourhood(cert), sched))
}

fn dist_to(supports: &[Interval], t: f64) -> f64 {
    supports
        .iter()
        .map(|i| i.dist(t))
        .fold(f64::INFINITY, f64::min)
}

/// If `f_n - g_n` is supported away from `t` for all large `n`, stickiness of `f_n`
/// follows from local uniformity of the reference `g_n`.
///
/// Hump supports accumulating at `t` count as a failure: the distance from `t` over
/// `(n_max, 2 n_max]` is at most 3/4 of the distance over `[n_max/2, n_max]`.
pub fn eventual_equality_transfer(
    fam: &SequenceFamily,
    reference: &SequenceFamily,
    ref_limit: &FunctionOracle,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    sched.validate()?;
    if reference.label.locally_uniform != Label::Yes {
        return Err(LabError::Precondition(format!(
            "reference family '{}' is not labelled locally uniform",
            reference.name
        )));
    }
    if fam.domain != reference.domain || fam.domain != ref_limit.domain {
        return Err(LabError::DomainMismatch(
            "family, reference and limit must share a domain".into(),
        ));
    }
    let mut idx = sched.indices();
    idx.extend(sched.extension_indices());
    let supports: Vec<Option<Vec<Interval>>> =
        par::map(&idx, |&n| fam.member(n).meta.hump_supports.clone());
    let supports: Vec<Vec<Interval>> = supports
        .into_iter()
        .zip(&idx)
        .map(|(s, n)| {
            s.ok_or_else(|| {
                LabError::MissingMetadata(format!(
                    "member {n} of '{}' has no hump_supports",
                    fam.name
                ))
            })
        })
        .collect::<Result<_>>()?;
    let n_max = sched.n_max;
    let probes = fam
        .domain
        .probes(sched.probe_density, sched.horizon, &fam.hints);
    let mut outcomes = Vec::new();
    let mut cert = Vec::new();
    let mut witness = None;
    for &t in &probes {
        let d: Vec<f64> = supports.iter().map(|s| dist_to(s, t)).collect();
        let min_over = |lo: usize, hi: usize| {
            idx.iter()
                .zip(&d)
                .filter(|(&n, _)| n >= lo && n <= hi)
                .map(|(_, &x)| x)
                .fold(f64::INFINITY, f64::min)
        };
        let base = min_over(n_max / 2, n_max);
        let dbl = min_over(n_max + 1, 2 * n_max);
        if dbl.is_finite() && ((base == 0.0 && dbl == 0.0) || (base > 0.0 && dbl <= 0.75 * base)) {
            outcomes.push(Outcome::Fails);
            witness.get_or_insert(Witness::Accumulation {
                t,
                dist_base: base,
                dist_doubled: dbl,
            });
            continue;
        }
        let found = sched.eta_ladder.iter().find_map(|&eta| {
            let viol: Vec<bool> = d.iter().map(|&x| x < eta).collect();
            match classify(&idx, &viol, n_max) {
                Classification::Holds(n) => Some((eta, n)),
                _ => None,
            }
        });
        match found {
            Some((eta, n)) => {
                outcomes.push(Outcome::Holds);
                cert.push((t, eta, n));
            }
            None => outcomes.push(Outcome::Inconclusive),
        }
    }
    Ok(match Outcome::all(outcomes) {
        Outcome::Holds => Verdict::holds(Certificate::EventualEquality(cert), sched),
        Outcome::Fails => Verdict::fails(witness.expect("failing probe"), sched),
        Outcome::Inconclusive => Verdict::inconclusive(sched),
    })
}
