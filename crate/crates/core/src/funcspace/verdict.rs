use super::ResolutionSchedule;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

impl Outcome {
    /// Conjunction over probe points: any failure fails, all holds hold.
    pub fn all(it: impl IntoIterator<Item = Outcome>) -> Outcome {
        let mut out = Outcome::Holds;
        for o in it {
            match o {
                Outcome::Fails => return Outcome::Fails,
                Outcome::Inconclusive => out = Outcome::Inconclusive,
                Outcome::Holds => {}
            }
        }
        out
    }
}

/// Threshold and per-index window radii certified at one `(t, eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedEntry {
    pub t: f64,
    pub eps: f64,
    pub n_threshold: usize,
    /// `(n, eta_n)` for each sampled `n >= n_threshold`; empty for pointwise.
    pub etas: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformEntry {
    pub t: f64,
    pub eps: f64,
    pub eta: f64,
    pub n_threshold: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub t: f64,
    pub eps: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    Pointwise(Vec<IndexedEntry>),
    Sticky(Vec<IndexedEntry>),
    LocallyUniform(Vec<UniformEntry>),
    Cauchy {
        entries: Vec<IndexedEntry>,
        tail_scale: f64,
        m_floor: usize,
    },
    Neighbourhood(Vec<(f64, f64)>),
    Property(Vec<PropertyEntry>),
    EventualEquality(Vec<(f64, f64, usize)>),
    /// `(eps, n)`: the tracked quantity stays below `eps` for every sampled index from `n` on.
    Thresholds(Vec<(f64, usize)>),
    Note(String),
}

/// One observed violation: `|f_n(s) - target(s)| = gap` inside the radius-`eta` window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub eta: f64,
    pub n: usize,
    pub s: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    /// Pointwise failure at `t`: `(n, gap)` for the violating sampled indices.
    Pointwise {
        t: f64,
        eps: f64,
        violations: Vec<(usize, f64)>,
    },
    /// A window failure: one violation per ladder level, plus the violating indices.
    Window {
        t: f64,
        eps: f64,
        points: Vec<GapPoint>,
        violating_indices: Vec<usize>,
    },
    /// Cauchy failure; `m` in each point is the tail index used.
    Cauchy {
        t: f64,
        eps: f64,
        points: Vec<(GapPoint, usize)>,
        violating_indices: Vec<usize>,
    },
    Property {
        t: f64,
        eps: f64,
        s: f64,
        gap: f64,
    },
    Jump {
        x: f64,
        s: f64,
        jump: f64,
    },
    Unbounded {
        x: f64,
        early_max: f64,
        late_max: f64,
    },
    Accumulation {
        t: f64,
        dist_base: f64,
        dist_doubled: f64,
    },
    Oscillation {
        max: (usize, usize, f64),
        min: (usize, usize, f64),
    },
    /// `(n, value)` pairs that stay at or above `eps` past the index range.
    Stagnation {
        eps: f64,
        values: Vec<(usize, f64)>,
    },
    Note(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub certificate: Option<Certificate>,
    pub witness: Option<Witness>,
    pub schedule: ResolutionSchedule,
}

impl Verdict {
    pub fn holds(c: Certificate, sched: &ResolutionSchedule) -> Self {
        Verdict {
            outcome: Outcome::Holds,
            certificate: Some(c),
            witness: None,
            schedule: sched.clone(),
        }
    }

    pub fn fails(w: Witness, sched: &ResolutionSchedule) -> Self {
        Verdict {
            outcome: Outcome::Fails,
            certificate: None,
            witness: Some(w),
            schedule: sched.clone(),
        }
    }

    pub fn inconclusive(sched: &ResolutionSchedule) -> Self {
        Verdict {
            outcome: Outcome::Inconclusive,
            certificate: None,
            witness: None,
            schedule: sched.clone(),
        }
    }
}
