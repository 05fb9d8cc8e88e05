use super::{Domain, FunctionOracle};
use crate::catalog::GroundTruth;
use std::fmt;
use std::sync::Arc;

pub type MemberFn = Arc<dyn Fn(usize) -> FunctionOracle + Send + Sync>;
pub type ValueFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;
pub type BatchFn = Arc<dyn Fn(f64, &[usize]) -> Vec<f64> + Send + Sync>;

/// An indexed family `n -> f_n`, `n >= 1`.
///
/// `value` and `batch` are optional fast paths and must agree with
/// `member(n).eval(s)` up to the member's recorded tail bound.
#[derive(Clone)]
pub struct SequenceFamily {
    pub name: String,
    pub domain: Domain,
    pub label: GroundTruth,
    pub members_continuous: Option<bool>,
    /// Points of special interest, added to the probe grid.
    pub hints: Vec<f64>,
    at: MemberFn,
    value: Option<ValueFn>,
    batch: Option<BatchFn>,
}

impl fmt::Debug for SequenceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceFamily")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl SequenceFamily {
    pub fn new(
        name: &str,
        domain: Domain,
        at: impl Fn(usize) -> FunctionOracle + Send + Sync + 'static,
    ) -> Self {
        SequenceFamily {
            name: name.to_string(),
            domain,
            label: GroundTruth::unknown(),
            members_continuous: None,
            hints: Vec::new(),
            at: Arc::new(at),
            value: None,
            batch: None,
        }
    }

    pub fn with_label(mut self, label: GroundTruth) -> Self {
        self.label = label;
        self
    }

    pub fn with_value(mut self, v: impl Fn(usize, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.value = Some(Arc::new(v));
        self
    }

    pub fn with_batch(
        mut self,
        b: impl Fn(f64, &[usize]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.batch = Some(Arc::new(b));
        self
    }

    pub fn with_continuity(mut self, c: bool) -> Self {
        self.members_continuous = Some(c);
        self
    }

    pub fn with_hints(mut self, h: Vec<f64>) -> Self {
        self.hints = h;
        self
    }

    pub fn member(&self, n: usize) -> FunctionOracle {
        (self.at)(n)
    }

    pub fn value(&self, n: usize, s: f64) -> f64 {
        match &self.value {
            Some(v) => v(n, s),
            None => (self.at)(n).eval(s),
        }
    }

    /// Whether members are piecewise polynomials (probed on `f_1`).
    pub fn is_piecewise(&self) -> bool {
        self.member(1).as_piecewise().is_some()
    }

    /// The family `n -> f_{phi(n)}`.
    pub fn subsequence(
        &self,
        phi: impl Fn(usize) -> usize + Send + Sync + 'static,
    ) -> SequenceFamily {
        let phi = Arc::new(phi);
        let at = self.at.clone();
        let p1 = phi.clone();
        let mut out = SequenceFamily {
            at: Arc::new(move |n| at(p1(n))),
            value: None,
            batch: None,
            ..self.clone()
        };
        out.name = format!("{}[sub]", self.name);
        if let Some(v) = self.value.clone() {
            let p2 = phi.clone();
            out.value = Some(Arc::new(move |n, s| v(p2(n), s)));
        }
        out
    }

    /// Evaluator for a fixed index list, caching members when no fast path exists.
    pub fn evaluator(&self, indices: &[usize]) -> Evaluator {
        if let Some(b) = &self.batch {
            return Evaluator {
                indices: indices.to_vec(),
                kind: EvalKind::Batch(b.clone()),
            };
        }
        if let Some(v) = &self.value {
            return Evaluator {
                indices: indices.to_vec(),
                kind: EvalKind::Value(v.clone()),
            };
        }
        Evaluator {
            indices: indices.to_vec(),
            kind: EvalKind::Members(indices.iter().map(|&n| self.member(n)).collect()),
        }
    }
}

enum EvalKind {
    Batch(BatchFn),
    Value(ValueFn),
    Members(Vec<FunctionOracle>),
}

pub struct Evaluator {
    pub indices: Vec<usize>,
    kind: EvalKind,
}

impl Evaluator {
    /// `f_n(s)` for every index, in index order.
    pub fn values(&self, s: f64) -> Vec<f64> {
        match &self.kind {
            EvalKind::Batch(b) => b(s, &self.indices),
            EvalKind::Value(v) => self.indices.iter().map(|&n| v(n, s)).collect(),
            EvalKind::Members(m) => m.iter().map(|f| f.eval(s)).collect(),
        }
    }

    pub fn member(&self, k: usize) -> Option<&FunctionOracle> {
        match &self.kind {
            EvalKind::Members(m) => m.get(k),
            _ => None,
        }
    }
}
