//! The space of bounded real sequences with the norm
//! `||u||_s = sum_{k >= 0} 2^-k |u(k)| + limsup_k |u(k)|`.

use crate::convergence::{classify, Classification};
use crate::error::{LabError, Result};
use crate::funcspace::{neumaier_sum, Certificate, Outcome, ResolutionSchedule, Verdict, Witness};
use crate::par;
use serde::{Deserialize, Serialize};

#[cfg(test)]
mod tests;

/// Behaviour of `u(k)` for `k >= prefix.len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    Constant {
        c: f64,
    },
    /// `u(K + k) = pattern[k mod len]`.
    EventuallyPeriodic {
        pattern: Vec<f64>,
    },
    /// `u(K + k) = scale * ratio^k`.
    GeometricDecay {
        ratio: f64,
        scale: f64,
    },
    ZeroTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailedSequence {
    pub prefix: Vec<f64>,
    pub tail: Tail,
}

/// Past this index `2^-k` underflows and the weighted sum no longer changes.
const WEIGHT_SPAN: usize = 1100;
/// Largest common period used for exact limsups of combinations.
const PERIOD_CAP: usize = 1 << 20;

impl TailedSequence {
    pub fn new(prefix: Vec<f64>, tail: Tail) -> Result<Self> {
        let u = TailedSequence { prefix, tail };
        u.validate()?;
        Ok(u)
    }

    pub fn zero() -> Self {
        TailedSequence {
            prefix: vec![],
            tail: Tail::ZeroTail,
        }
    }

    /// The unit vector `e_n`.
    pub fn unit(n: usize) -> Self {
        let mut prefix = vec![0.0; n + 1];
        prefix[n] = 1.0;
        TailedSequence {
            prefix,
            tail: Tail::ZeroTail,
        }
    }

    pub fn constant(c: f64) -> Self {
        TailedSequence {
            prefix: vec![],
            tail: Tail::Constant { c },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(LabError::InvalidInput(format!("tailed sequence: {what}")));
        if self.prefix.iter().any(|v| !v.is_finite()) {
            return bad("prefix entries must be finite");
        }
        match &self.tail {
            Tail::Constant { c } if !c.is_finite() => bad("constant must be finite"),
            Tail::EventuallyPeriodic { pattern }
                if pattern.is_empty() || pattern.iter().any(|v| !v.is_finite()) =>
            {
                bad("pattern must be nonempty and finite")
            }
            Tail::GeometricDecay { ratio, scale } if !(ratio.abs() < 1.0 && scale.is_finite()) => {
                bad("geometric decay needs |ratio| < 1")
            }
            _ => Ok(()),
        }
    }

    pub fn get(&self, k: usize) -> f64 {
        let big_k = self.prefix.len();
        if k < big_k {
            return self.prefix[k];
        }
        let j = k - big_k;
        match &self.tail {
            Tail::Constant { c } => *c,
            Tail::EventuallyPeriodic { pattern } => pattern[j % pattern.len()],
            Tail::GeometricDecay { ratio, scale } => {
                scale * ratio.powi(j.min(i32::MAX as usize) as i32)
            }
            Tail::ZeroTail => 0.0,
        }
    }

    /// Periodic part `(start, pattern)`: `u(k) - pattern[(k - start) mod len] -> 0`.
    fn asymptote(&self) -> (usize, Vec<f64>) {
        let start = self.prefix.len();
        match &self.tail {
            Tail::Constant { c } => (start, vec![*c]),
            Tail::EventuallyPeriodic { pattern } => (start, pattern.clone()),
            Tail::GeometricDecay { .. } | Tail::ZeroTail => (start, vec![0.0]),
        }
    }

    pub fn limsup(&self) -> f64 {
        self.asymptote()
            .1
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn liminf(&self) -> f64 {
        self.asymptote().1.into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn limsup_abs(&self) -> f64 {
        self.asymptote()
            .1
            .into_iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_abs(&self) -> f64 {
        let tail = match &self.tail {
            Tail::Constant { c } => c.abs(),
            Tail::EventuallyPeriodic { pattern } => {
                pattern.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
            Tail::GeometricDecay { scale, .. } => scale.abs(),
            Tail::ZeroTail => 0.0,
        };
        self.prefix.iter().fold(tail, |m, v| m.max(v.abs()))
    }

    /// The shift `(theta u)(k) = u(k + 1)`.
    pub fn shift(&self) -> Self {
        if !self.prefix.is_empty() {
            return TailedSequence {
                prefix: self.prefix[1..].to_vec(),
                tail: self.tail.clone(),
            };
        }
        let tail = match &self.tail {
            Tail::EventuallyPeriodic { pattern } => {
                let mut p = pattern.clone();
                p.rotate_left(1);
                Tail::EventuallyPeriodic { pattern: p }
            }
            Tail::GeometricDecay { ratio, scale } => Tail::GeometricDecay {
                ratio: *ratio,
                scale: scale * ratio,
            },
            t => t.clone(),
        };
        TailedSequence {
            prefix: vec![],
            tail,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let tail = match &self.tail {
            Tail::Constant { c } => Tail::Constant { c: a * c },
            Tail::EventuallyPeriodic { pattern } => Tail::EventuallyPeriodic {
                pattern: pattern.iter().map(|v| a * v).collect(),
            },
            Tail::GeometricDecay { ratio, scale } => Tail::GeometricDecay {
                ratio: *ratio,
                scale: a * scale,
            },
            Tail::ZeroTail => Tail::ZeroTail,
        };
        TailedSequence {
            prefix: self.prefix.iter().map(|v| a * v).collect(),
            tail,
        }
    }
}

/// Exact norm: weighted prefix, closed-form weighted tail, exact limsup.
pub fn ls_norm(u: &TailedSequence) -> f64 {
    let big_k = u.prefix.len();
    let head = neumaier_sum(
        u.prefix
            .iter()
            .enumerate()
            .map(|(k, v)| weight(k) * v.abs()),
    );
    let w = weight(big_k);
    let tail = match &u.tail {
        Tail::Constant { c } => 2.0 * w * c.abs(),
        Tail::EventuallyPeriodic { pattern } => {
            let len = pattern.len();
            let one = neumaier_sum(pattern.iter().enumerate().map(|(r, v)| weight(r) * v.abs()));
            w * one / (1.0 - weight(len))
        }
        Tail::GeometricDecay { ratio, scale } => w * scale.abs() / (1.0 - 0.5 * ratio.abs()),
        Tail::ZeroTail => 0.0,
    };
    head + tail + u.limsup_abs()
}

fn weight(k: usize) -> f64 {
    if k >= WEIGHT_SPAN {
        0.0
    } else {
        2f64.powi(-(k as i32))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `limsup_k |a u(k) + b v(k)|` from the periodic parts.
fn limsup_combination(a: f64, u: &TailedSequence, b: f64, v: &TailedSequence) -> Result<f64> {
    let ((su, pu), (sv, pv)) = (u.asymptote(), v.asymptote());
    let len = pu.len() / gcd(pu.len(), pv.len()) * pv.len();
    if len > PERIOD_CAP {
        return Err(LabError::InvalidInput(format!(
            "common period {len} exceeds {PERIOD_CAP}"
        )));
    }
    let start = su.max(sv);
    Ok((start..start + len)
        .map(|k| (a * pu[(k - su) % pu.len()] + b * pv[(k - sv) % pv.len()]).abs())
        .fold(0.0, f64::max))
}

/// `||a u + b v||_s`; exact up to floating-point rounding of the weighted sum.
pub fn ls_norm_lin(a: f64, u: &TailedSequence, b: f64, v: &TailedSequence) -> Result<f64> {
    let head =
        neumaier_sum((0..WEIGHT_SPAN).map(|k| weight(k) * (a * u.get(k) + b * v.get(k)).abs()));
    Ok(head + limsup_combination(a, u, b, v)?)
}

pub fn ls_distance(u: &TailedSequence, v: &TailedSequence) -> Result<f64> {
    ls_norm_lin(1.0, u, -1.0, v)
}

/// Coordinates probed for the limsup term: `[k0, 2 k0)` with `k0 = 8 n_max`.
fn k_block(sched: &ResolutionSchedule) -> std::ops::Range<usize> {
    let k0 = 8 * sched.n_max;
    k0..2 * k0
}

/// Schedule for sequence-space tests: `n` up to 256, the `m` window `(2^14, 2^15]`.
pub fn seq_schedule() -> ResolutionSchedule {
    ResolutionSchedule {
        n_max: 256,
        m_max: 1 << 15,
        ..ResolutionSchedule::default()
    }
}

fn check_ranges(sched: &ResolutionSchedule) -> Result<()> {
    sched.validate()?;
    if sched.m_max < 64 * sched.n_max {
        return Err(LabError::InvalidSchedule(format!(
            "sequence tests need m_max >= 64 n_max, got {} < 64 * {}",
            sched.m_max, sched.n_max
        )));
    }
    Ok(())
}

/// `||v_n||_s` with `v_n(k) = max over the m window of |u_m(k) - u_n(k)|`; the limsup over `k`
/// is read off the block `k_block`, which sits well past `n` and well before `m`.
fn cauchy_norm(
    un: &TailedSequence,
    window: &[TailedSequence],
    block: std::ops::Range<usize>,
) -> f64 {
    let v = |k: usize| {
        let x = un.get(k);
        window
            .iter()
            .map(|um| (um.get(k) - x).abs())
            .fold(0.0, f64::max)
    };
    let head = neumaier_sum((0..WEIGHT_SPAN).map(|k| weight(k) * v(k)));
    head + block.map(v).fold(0.0, f64::max)
}

fn sampled(sched: &ResolutionSchedule) -> Vec<usize> {
    let mut idx = sched.indices();
    idx.extend(sched.extension_indices());
    idx
}

/// Threshold certificate or stagnation witness for a sampled nonnegative quantity `a(n)`.
fn decide(idx: &[usize], vals: &[f64], sched: &ResolutionSchedule) -> Verdict {
    let mut thresholds = Vec::new();
    let mut open = false;
    for &eps in &sched.eps_ladder {
        let viol: Vec<bool> = vals.iter().map(|&v| !(v < eps)).collect();
        match classify(idx, &viol, sched.n_max) {
            Classification::Holds(n) => thresholds.push((eps, n)),
            Classification::Fails => {
                let values = idx
                    .iter()
                    .zip(vals)
                    .filter(|&(&n, _)| n > sched.n_max / 4)
                    .map(|(&n, &v)| (n, v))
                    .collect();
                return Verdict::fails(Witness::Stagnation { eps, values }, sched);
            }
            Classification::Open => open = true,
        }
    }
    if open {
        Verdict::inconclusive(sched)
    } else {
        Verdict::holds(Certificate::Thresholds(thresholds), sched)
    }
}

/// Limit-free Cauchy test: `||limsup_m |u_m - u_n| ||_s -> 0`, with the limsup over `m` taken
/// coordinatewise on the window `(m_max / 2, m_max]`.
pub fn ls_cauchy(
    fam: &(dyn Fn(usize) -> TailedSequence + Sync),
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    check_ranges(sched)?;
    let idx = sampled(sched);
    let window: Vec<TailedSequence> =
        crate::funcspace::geometric_indices(sched.m_max / 2 + 1, sched.m_max)
            .into_iter()
            .filter(|&m| m > sched.m_max / 2)
            .map(fam)
            .collect();
    for u in &window {
        u.validate()?;
    }
    let vals = par::map(&idx, |&n| cauchy_norm(&fam(n), &window, k_block(sched)));
    Ok(decide(&idx, &vals, sched))
}

/// `||u_n - limit||_s` classified over the sampled indices.
pub fn ls_converges(
    fam: &(dyn Fn(usize) -> TailedSequence + Sync),
    limit: &TailedSequence,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    check_ranges(sched)?;
    limit.validate()?;
    let idx = sampled(sched);
    let vals = par::map(&idx, |&n| ls_distance(&fam(n), limit))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(decide(&idx, &vals, sched))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", content = "p", rename_all = "kebab-case")]
pub enum Space {
    C0,
    C,
    /// `l^p` for `0 < p <= inf`.
    Lp(f64),
}

impl Space {
    /// Membership from the tail descriptor; the prefix never matters.
    pub fn contains(&self, u: &TailedSequence) -> bool {
        let null = u.limsup_abs() == 0.0;
        match *self {
            Space::C0 => null,
            Space::C => match &u.tail {
                Tail::EventuallyPeriodic { pattern } => pattern.iter().all(|&v| v == pattern[0]),
                _ => true,
            },
            Space::Lp(p) => p == f64::INFINITY || null,
        }
    }
}

/// Closedness of `space` in the `s`-topology along one convergent family.
pub fn closedness_probe(
    space: Space,
    fam: &(dyn Fn(usize) -> TailedSequence + Sync),
    limit: &TailedSequence,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    if let Space::Lp(p) = space {
        if !(p > 0.0) {
            return Err(LabError::InvalidInput(format!("l^p needs p > 0, got {p}")));
        }
    }
    for n in sampled(sched) {
        let u = fam(n);
        u.validate()?;
        if !space.contains(&u) {
            return Err(LabError::Precondition(format!(
                "member u_{n} is not in {space:?}"
            )));
        }
    }
    let c = ls_cauchy(fam, sched)?;
    match c.outcome {
        Outcome::Holds => {}
        Outcome::Fails => {
            return Ok(Verdict::fails(
                Witness::Note(format!(
                    "not an l_s limit: Cauchy criterion fails, {:?}",
                    c.witness
                )),
                sched,
            ))
        }
        Outcome::Inconclusive => return Ok(c),
    }
    let conv = ls_converges(fam, limit, sched)?;
    match conv.outcome {
        Outcome::Holds if space.contains(limit) => Ok(Verdict::holds(
            Certificate::Note(format!("limit is in {space:?}")),
            sched,
        )),
        Outcome::Holds => Ok(Verdict::fails(
            Witness::Note(format!("limit is not in {space:?}")),
            sched,
        )),
        Outcome::Fails => Ok(Verdict::fails(
            Witness::Note(format!("not an l_s limit: {:?}", conv.witness)),
            sched,
        )),
        Outcome::Inconclusive => Ok(conv),
    }
}

/// Interface for Banach limits. No constructive instance exists; implementors only get the
/// contract check below.
pub trait BanachLimit {
    fn apply(&self, u: &TailedSequence) -> f64;
}

/// Shift invariance and `liminf <= L(u) <= limsup` on one sequence, to `tol`.
pub fn satisfies_contract(l: &dyn BanachLimit, u: &TailedSequence, tol: f64) -> bool {
    let v = l.apply(u);
    (l.apply(&u.shift()) - v).abs() <= tol && u.liminf() - tol <= v && v <= u.limsup() + tol
}
