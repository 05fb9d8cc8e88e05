use crate::error::{LabError, Result};
use crate::funcspace::FunctionOracle;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// A sequence of times `t_k -> limit`, `k = 1..=k_max`.
#[derive(Clone)]
pub struct TimeSequence {
    terms: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    pub limit: f64,
    pub k_max: usize,
    /// The last `tail_window` terms feed the limsup estimate.
    pub tail_window: usize,
}

impl fmt::Debug for TimeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeSequence")
            .field("limit", &self.limit)
            .field("k_max", &self.k_max)
            .field("tail_window", &self.tail_window)
            .finish()
    }
}

impl TimeSequence {
    pub fn from_fn(limit: f64, terms: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        TimeSequence {
            terms: Arc::new(terms),
            limit,
            k_max: 1 << 12,
            tail_window: 1 << 10,
        }
    }

    /// `t_k = limit + 1/k`
    pub fn harmonic(limit: f64) -> Self {
        Self::from_fn(limit, move |k| limit + 1.0 / k as f64)
    }

    /// `t_k = limit - 1/k`
    pub fn harmonic_left(limit: f64) -> Self {
        Self::from_fn(limit, move |k| limit - 1.0 / k as f64)
    }

    /// `t_k = limit + (-1)^k / k`
    pub fn alternating(limit: f64) -> Self {
        Self::from_fn(limit, move |k| {
            limit + if k % 2 == 0 { 1.0 } else { -1.0 } / k as f64
        })
    }

    pub fn from_list(limit: f64, list: Vec<f64>) -> Result<Self> {
        if list.is_empty() {
            return Err(LabError::InvalidInput("empty time sequence".into()));
        }
        let n = list.len();
        let list = Arc::new(list);
        Ok(TimeSequence {
            terms: Arc::new(move |k| list[k - 1]),
            limit,
            k_max: n,
            tail_window: (n / 4).clamp(1, 1 << 10),
        })
    }

    pub fn with_truncation(mut self, k_max: usize, tail_window: usize) -> Self {
        self.k_max = k_max;
        self.tail_window = tail_window.clamp(1, k_max);
        self
    }

    pub fn term(&self, k: usize) -> f64 {
        (self.terms)(k)
    }

    /// `|t_k - limit|` must not increase beyond `k_max / 2`.
    pub fn validate(&self) -> Result<()> {
        let mut prev = f64::INFINITY;
        for k in (self.k_max / 2).max(1)..=self.k_max {
            let d = (self.term(k) - self.limit).abs();
            if d > prev {
                return Err(LabError::InvalidInput(format!(
                    "|t_k - limit| increases at k = {k}"
                )));
            }
            prev = d;
        }
        Ok(())
    }

    pub fn tail(&self) -> impl Iterator<Item = f64> + '_ {
        (self.k_max + 1 - self.tail_window..=self.k_max).map(move |k| self.term(k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimsupEstimate {
    /// `limsup_k f(t_k)`
    pub sup: f64,
    /// `liminf_k f(t_k)`
    pub inf: f64,
    /// Both come from a one-sided limit of a piecewise polynomial rather than the tail window.
    pub exact: bool,
}

/// `S_tau(f)` and `I_tau(f)` from the tail window, or exactly when every tail
/// time sits on one side of the limit of a piecewise polynomial.
pub fn limsup_along(f: &FunctionOracle, tau: &TimeSequence) -> Result<LimsupEstimate> {
    tau.validate()?;
    if !f.domain.contains(tau.limit) {
        return Err(LabError::InvalidInput(format!(
            "limit {} outside the domain",
            tau.limit
        )));
    }
    for k in 1..=tau.k_max {
        let t = tau.term(k);
        if !f.domain.contains(t) {
            return Err(LabError::InvalidInput(format!(
                "t_{k} = {t} outside the domain"
            )));
        }
    }
    if let Some(p) = f.as_piecewise() {
        let side = |pred: fn(f64, f64) -> bool| tau.tail().all(|t| pred(t, tau.limit));
        let one_sided = if side(|t, l| t > l) {
            Some(p.right_limit(tau.limit))
        } else if side(|t, l| t < l) {
            Some(p.left_limit(tau.limit))
        } else if side(|t, l| t == l) {
            Some(p.eval(tau.limit))
        } else {
            None
        };
        if let Some(v) = one_sided {
            return Ok(LimsupEstimate {
                sup: v,
                inf: v,
                exact: true,
            });
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in tau.tail() {
        let v = f.eval(t);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(LimsupEstimate {
        sup: hi,
        inf: lo,
        exact: false,
    })
}
