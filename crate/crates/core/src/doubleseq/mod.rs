//! Double sequences `sigma_ij` (indices from 1) and the compactness diagnostics built on them.

use crate::error::{LabError, Result};
use crate::funcspace::{Certificate, ResolutionSchedule, SequenceFamily, Verdict, Witness};
use crate::functionals::TimeSequence;
use crate::par;
use serde::Serialize;
use std::sync::Arc;

mod compact;
#[cfg(test)]
mod tests;

pub use compact::{
    compactness_diagnostic, hump_modulus, hump_modulus_sub, CompactnessReport, HumpModulus,
};

type Entry = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct DoubleSequenceOracle {
    at: Entry,
    pub i_max: usize,
    pub j_max: usize,
}

impl std::fmt::Debug for DoubleSequenceOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DoubleSequenceOracle({} x {})", self.i_max, self.j_max)
    }
}

impl DoubleSequenceOracle {
    pub fn new(at: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        DoubleSequenceOracle {
            at: Arc::new(at),
            i_max: 256,
            j_max: 256,
        }
    }

    pub fn with_box(mut self, i_max: usize, j_max: usize) -> Result<Self> {
        if i_max < 16 || j_max < 16 {
            return Err(LabError::InvalidInput(format!(
                "box {i_max} x {j_max} is below 16 x 16"
            )));
        }
        self.i_max = i_max;
        self.j_max = j_max;
        Ok(self)
    }

    /// `sigma_ij = f_i(t_j)`.
    pub fn from_family(fam: &SequenceFamily, tau: &TimeSequence) -> Self {
        let (f, tau) = (fam.clone(), tau.clone());
        DoubleSequenceOracle::new(move |i, j| f.value(i, tau.term(j)))
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        (self.at)(i, j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterPolicy {
    pub eps: f64,
    pub row_count_min: usize,
    pub col_count_min: usize,
    pub rows_min: usize,
    pub cols_min: usize,
}

impl Default for ClusterPolicy {
    fn default() -> Self {
        ClusterPolicy {
            eps: 0.05,
            row_count_min: 8,
            col_count_min: 8,
            rows_min: 8,
            cols_min: 8,
        }
    }
}

impl ClusterPolicy {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.row_count_min,
            self.col_count_min,
            self.rows_min,
            self.cols_min,
        ];
        if !(self.eps > 0.0 && self.eps.is_finite()) || counts.contains(&0) {
            return Err(LabError::InvalidInput(format!(
                "cluster policy must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Rows (resp. columns) that entered the ball, each with its hit count in the
/// terminal block and in the doubled block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterEvidence {
    pub rows: Vec<(usize, usize, usize)>,
    pub cols: Vec<(usize, usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterCandidate {
    pub value: f64,
    pub evidence: ClusterEvidence,
    /// Every qualifying centre merged into this cluster, ascending.
    pub centres: Vec<f64>,
}

impl ClusterCandidate {
    /// Whether some merged centre lies within `eps` of `y`.
    pub fn covers(&self, y: f64, eps: f64) -> bool {
        self.centres.iter().any(|c| (c - y).abs() < eps)
    }
}

/// Leading lines scanned for the row/column conditions.
fn leading(n: usize) -> usize {
    (n / 32).max(1)
}

/// Values of the leading lines along their tails: `line -> [terminal block, doubled block]`.
struct Scan {
    rows: Vec<[Vec<f64>; 2]>,
    cols: Vec<[Vec<f64>; 2]>,
}

fn tail_blocks(len: usize, f: impl Fn(usize) -> f64) -> [Vec<f64>; 2] {
    [
        (len / 2 + 1..=len).map(&f).collect(),
        (len + 1..=2 * len).map(&f).collect(),
    ]
}

fn scan(sigma: &DoubleSequenceOracle) -> Scan {
    let (im, jm) = (sigma.i_max, sigma.j_max);
    let rows = par::map_range(leading(im), |r| tail_blocks(jm, |j| sigma.at(r + 1, j)));
    let cols = par::map_range(leading(jm), |c| tail_blocks(im, |i| sigma.at(i, c + 1)));
    Scan { rows, cols }
}

fn hits(vals: &[f64], y: f64, eps: f64) -> usize {
    vals.iter().filter(|&&v| (v - y).abs() < eps).count()
}

fn qualifying(
    lines: &[[Vec<f64>; 2]],
    y: f64,
    eps: f64,
    count_min: usize,
) -> Vec<(usize, usize, usize)> {
    lines
        .iter()
        .enumerate()
        .filter_map(|(k, [a, b])| {
            let (ha, hb) = (hits(a, y, eps), hits(b, y, eps));
            (ha >= count_min && hb >= count_min).then_some((k + 1, ha, hb))
        })
        .collect()
}

fn evidence_at(sc: &Scan, y: f64, policy: &ClusterPolicy) -> Option<ClusterEvidence> {
    let rows = qualifying(&sc.rows, y, policy.eps, policy.row_count_min);
    if rows.len() < policy.rows_min {
        return None;
    }
    let cols = qualifying(&sc.cols, y, policy.eps, policy.col_count_min);
    (cols.len() >= policy.cols_min).then_some(ClusterEvidence { rows, cols })
}

/// Evidence that `y` passes the finite double-cluster test, if it does.
///
/// Row `i` of the leading `i_max / 32` rows enters `(y - eps, y + eps)` if it has at least
/// `row_count_min` hits among `j` in `(j_max / 2, j_max]` and again in `(j_max, 2 j_max]`;
/// columns likewise with the roles swapped.
pub fn cluster_evidence(
    sigma: &DoubleSequenceOracle,
    policy: &ClusterPolicy,
    y: f64,
) -> Result<Option<ClusterEvidence>> {
    policy.validate()?;
    Ok(evidence_at(&scan(sigma), y, policy))
}

pub fn double_cluster_candidates(
    sigma: &DoubleSequenceOracle,
    policy: &ClusterPolicy,
) -> Result<Vec<ClusterCandidate>> {
    policy.validate()?;
    let sc = scan(sigma);
    // bins of width eps over every scanned value; the bin median is the trial centre
    let mut bins: std::collections::BTreeMap<i64, Vec<f64>> = Default::default();
    for line in sc.rows.iter().chain(&sc.cols) {
        for &v in line.iter().flatten().filter(|v| v.is_finite()) {
            bins.entry((v / policy.eps).floor() as i64)
                .or_default()
                .push(v);
        }
    }
    let trials: Vec<(i64, f64)> = bins
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            (k, v[v.len() / 2])
        })
        .collect();
    let found = par::map(&trials, |&(k, y)| {
        evidence_at(&sc, y, policy).map(|e| (k, y, e))
    });
    let score = |e: &ClusterEvidence| {
        e.rows
            .iter()
            .chain(&e.cols)
            .map(|&(_, a, b)| a + b)
            .sum::<usize>()
    };
    // neighbouring qualifying bins describe one cluster: keep the best supported centre
    let mut out: Vec<(i64, ClusterCandidate)> = Vec::new();
    for (k, y, e) in found.into_iter().flatten() {
        match out.last_mut() {
            Some((last, c)) if k == *last + 1 => {
                c.centres.push(y);
                if score(&e) > score(&c.evidence) {
                    c.value = y;
                    c.evidence = e;
                }
                *last = k;
            }
            _ => out.push((
                k,
                ClusterCandidate {
                    value: y,
                    evidence: e,
                    centres: vec![y],
                },
            )),
        }
    }
    Ok(out.into_iter().map(|(_, c)| c).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatReport {
    pub verdict: Verdict,
    /// Midpoint of the edge-region range.
    pub limit: f64,
    pub oscillation: f64,
}

/// Oscillation of `sigma` over `{|i - j| >= kappa(min(i, j)), min(i, j) >= box / 4}`.
pub fn flat_on_edges(
    sigma: &DoubleSequenceOracle,
    kappa: impl Fn(usize) -> usize + Sync,
    tol: f64,
) -> Result<FlatReport> {
    let (im, jm) = (sigma.i_max, sigma.j_max);
    let top = im.max(jm);
    if (1..top).any(|k| kappa(k + 1) < kappa(k)) {
        return Err(LabError::InvalidInput("kappa must be nondecreasing".into()));
    }
    if !(tol >= 0.0) {
        return Err(LabError::InvalidInput(format!(
            "tol = {tol} must be nonnegative"
        )));
    }
    let floor = (im.min(jm) / 4).max(1);
    type Ext = Option<((usize, usize, f64), (usize, usize, f64))>;
    let per_row: Vec<Ext> = par::map_range(im, |r| {
        let i = r + 1;
        let mut ext: Ext = None;
        for j in 1..=jm {
            let m = i.min(j);
            if m < floor || i.abs_diff(j) < kappa(m) {
                continue;
            }
            let v = sigma.at(i, j);
            ext = Some(match ext {
                None => ((i, j, v), (i, j, v)),
                Some((hi, lo)) => (
                    if v > hi.2 { (i, j, v) } else { hi },
                    if v < lo.2 { (i, j, v) } else { lo },
                ),
            });
        }
        ext
    });
    let (hi, lo) = per_row
        .into_iter()
        .flatten()
        .reduce(|(h1, l1), (h2, l2)| {
            (
                if h2.2 > h1.2 { h2 } else { h1 },
                if l2.2 < l1.2 { l2 } else { l1 },
            )
        })
        .ok_or_else(|| {
            LabError::EmptyRegion(format!(
                "no edge entries in the {im} x {jm} box; try a smaller kappa"
            ))
        })?;
    let osc = hi.2 - lo.2;
    let limit = 0.5 * (hi.2 + lo.2);
    let sched = ResolutionSchedule::default();
    let verdict = if osc <= tol {
        Verdict::holds(
            Certificate::Note(format!(
                "edge oscillation {osc:e} <= {tol:e}; L = {limit:e}"
            )),
            &sched,
        )
    } else if osc.is_nan() {
        Verdict::inconclusive(&sched)
    } else {
        Verdict::fails(Witness::Oscillation { max: hi, min: lo }, &sched)
    };
    Ok(FlatReport {
        verdict,
        limit,
        oscillation: osc,
    })
}
