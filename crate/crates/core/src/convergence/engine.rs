use crate::funcspace::{
    Evaluator, FunctionOracle, PiecewisePoly, ProbeWindows, ResolutionSchedule, SequenceFamily,
};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// No violation at any sampled index from this threshold on.
    Holds(usize),
    /// Violations are dense near `n_max` and stay dense past it.
    Fails,
    Open,
}

/// Finite-range verdict for one `(t, eps)` from per-index violation flags.
///
/// `idx` must be ascending and cover both `[1, n_max]` and `(n_max, 2 n_max]`.
pub fn classify(idx: &[usize], viol: &[bool], n_max: usize) -> Classification {
    let start = viol.iter().rposition(|&v| v).map_or(0, |k| k + 1);
    if start < idx.len() && idx[start] <= n_max / 2 {
        return Classification::Holds(idx[start]);
    }
    let density = |lo: usize, hi: usize| {
        let (mut hit, mut all) = (0usize, 0usize);
        for (&n, &v) in idx.iter().zip(viol) {
            if n > lo && n <= hi {
                all += 1;
                hit += v as usize;
            }
        }
        if all == 0 {
            0.0
        } else {
            hit as f64 / all as f64
        }
    };
    if density(n_max / 4, n_max) >= 0.5 && density(n_max, 2 * n_max) >= 0.5 {
        Classification::Fails
    } else {
        Classification::Open
    }
}

/// Where a window sup was found.
#[derive(Clone, Copy, Debug)]
pub struct Arg {
    pub s: f64,
    pub attained: bool,
    /// Tail index for Cauchy tables.
    pub m: usize,
}

/// Gap profile at one probe: `sups[i][l]` is the sup over window `l` for index `i`.
pub struct Table {
    pub t: f64,
    pub at_t: Vec<f64>,
    pub sups: Vec<Vec<f64>>,
    pub args: Vec<Vec<Arg>>,
}

pub struct Engine<'a> {
    pub fam: &'a SequenceFamily,
    pub limit: Option<&'a FunctionOracle>,
    pub sched: &'a ResolutionSchedule,
    /// Sampled indices followed by the extension indices.
    pub idx: Vec<usize>,
    pub probes: Vec<f64>,
    diffs: Option<Vec<PiecewisePoly>>,
}

fn nan_to_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

impl<'a> Engine<'a> {
    pub fn new(
        fam: &'a SequenceFamily,
        limit: Option<&'a FunctionOracle>,
        sched: &'a ResolutionSchedule,
    ) -> Self {
        let mut idx = sched.indices();
        idx.extend(sched.extension_indices());
        let probes = fam
            .domain
            .probes(sched.probe_density, sched.horizon, &fam.hints);
        let diffs = limit.and_then(|g| {
            let gp = g.as_piecewise()?;
            if !fam.is_piecewise() {
                return None;
            }
            let d: Vec<Option<PiecewisePoly>> =
                par::map(&idx, |&n| fam.member(n).as_piecewise().map(|p| p.sub(gp)));
            d.into_iter().collect()
        });
        Engine {
            fam,
            limit,
            sched,
            idx,
            probes,
            diffs,
        }
    }

    fn gap(&self, n: usize, s: f64) -> f64 {
        let g = self.limit.expect("limit").eval(s);
        nan_to_inf((self.fam.value(n, s) - g).abs())
    }

    pub fn tables(&self) -> Vec<Table> {
        if let Some(d) = &self.diffs {
            return par::map(&self.probes, |&t| self.exact_table(d, t));
        }
        let ev = self.fam.evaluator(&self.idx);
        par::map(&self.probes, |&t| self.sampled_table(&ev, t))
    }

    fn exact_table(&self, diffs: &[PiecewisePoly], t: f64) -> Table {
        let dom = &self.fam.domain;
        let wins: Vec<_> = self
            .sched
            .eta_ladder
            .iter()
            .map(|&eta| dom.window(t, eta))
            .collect();
        let mut sups = Vec::with_capacity(diffs.len());
        let mut args = Vec::with_capacity(diffs.len());
        for d in diffs {
            let (mut s_row, mut a_row) = (
                Vec::with_capacity(wins.len()),
                Vec::with_capacity(wins.len()),
            );
            for w in &wins {
                let e = d.sup_abs(w);
                s_row.push(nan_to_inf(e.value));
                a_row.push(Arg {
                    s: e.at,
                    attained: e.attained,
                    m: 0,
                });
            }
            sups.push(s_row);
            args.push(a_row);
        }
        Table {
            t,
            at_t: diffs.iter().map(|d| nan_to_inf(d.eval(t).abs())).collect(),
            sups,
            args,
        }
    }

    /// Running maxima of `gaps[p][i]` over points sorted by distance, cut at each level.
    fn fold(
        &self,
        pw: &ProbeWindows,
        gaps: &[Vec<f64>],
        ms: Option<&[Vec<usize>]>,
    ) -> (Vec<Vec<f64>>, Vec<Vec<Arg>>) {
        let levels = self.sched.eta_ladder.len();
        let n_idx = self.idx.len();
        let mut sups = vec![vec![0.0; levels]; n_idx];
        let mut args = vec![
            vec![
                Arg {
                    s: pw.t,
                    attained: true,
                    m: 0
                };
                levels
            ];
            n_idx
        ];
        for i in 0..n_idx {
            let (mut best, mut at, mut m) = (f64::NEG_INFINITY, 0usize, 0usize);
            let mut p = 0;
            for l in (0..levels).rev() {
                while p < pw.prefix[l] {
                    if gaps[p][i] > best {
                        best = gaps[p][i];
                        at = p;
                        m = ms.map_or(0, |ms| ms[p][i]);
                    }
                    p += 1;
                }
                sups[i][l] = best.max(0.0);
                args[i][l] = Arg {
                    s: pw.points[at],
                    attained: true,
                    m,
                };
            }
        }
        (sups, args)
    }

    fn sampled_table(&self, ev: &Evaluator, t: f64) -> Table {
        let limit = self.limit.expect("limit");
        let pw = ProbeWindows::new(t, &self.fam.domain, self.sched);
        let gaps: Vec<Vec<f64>> = pw
            .points
            .iter()
            .map(|&s| {
                let g = limit.eval(s);
                ev.values(s)
                    .into_iter()
                    .map(|v| nan_to_inf((v - g).abs()))
                    .collect()
            })
            .collect();
        let (sups, args) = self.fold(&pw, &gaps, None);
        Table {
            t,
            at_t: gaps[0].clone(),
            sups,
            args,
        }
    }

    /// Tail start `M_s` for the Cauchy test: scales with `1 / |s - t|`.
    pub fn tail_start(sched: &ResolutionSchedule, t: f64, s: f64) -> usize {
        let floor = (sched.m_max / 2) as f64;
        let d = (s - t).abs();
        let m = if d == 0.0 {
            floor
        } else {
            (sched.tail_scale / d)
                .ceil()
                .clamp(floor, 2f64.powi(51).max(floor))
        };
        m as usize
    }

    /// The five geometric tail indices in `[M_s, 2 M_s]`.
    pub fn tail_indices(sched: &ResolutionSchedule, t: f64, s: f64) -> [usize; 5] {
        let m = Self::tail_start(sched, t, s) as f64;
        [0, 1, 2, 3, 4].map(|j| (m * 2f64.powf(j as f64 / 4.0)).round() as usize)
    }

    pub fn cauchy_tables(&self) -> Vec<Table> {
        let ev = self.fam.evaluator(&self.idx);
        par::map(&self.probes, |&t| {
            let pw = ProbeWindows::new(t, &self.fam.domain, self.sched);
            let mut gaps = Vec::with_capacity(pw.points.len());
            let mut ms = Vec::with_capacity(pw.points.len());
            for &s in &pw.points {
                let tail = Self::tail_indices(self.sched, t, s);
                let tv: Vec<f64> = tail.iter().map(|&m| self.fam.value(m, s)).collect();
                let (mut lo, mut hi) = (0usize, 0usize);
                for j in 1..tv.len() {
                    if tv[j] < tv[lo] {
                        lo = j;
                    }
                    if tv[j] > tv[hi] {
                        hi = j;
                    }
                }
                let (g_row, m_row): (Vec<f64>, Vec<usize>) = ev
                    .values(s)
                    .into_iter()
                    .map(|v| {
                        let (up, down) = (tv[hi] - v, v - tv[lo]);
                        if up >= down {
                            (nan_to_inf(up), tail[hi])
                        } else {
                            (nan_to_inf(down), tail[lo])
                        }
                    })
                    .unzip();
                gaps.push(g_row);
                ms.push(m_row);
            }
            let (sups, args) = self.fold(&pw, &gaps, Some(&ms));
            Table {
                t,
                at_t: gaps[0].clone(),
                sups,
                args,
            }
        })
    }

    /// A point of window `l` where index `i` violates `eps`, with its recomputed gap.
    pub fn replayable(&self, tab: &Table, i: usize, l: usize, eps: f64) -> Option<(f64, f64)> {
        let n = self.idx[i];
        let a = tab.args[i][l];
        let w = self.fam.domain.window(tab.t, self.sched.eta_ladder[l]);
        let ok = |s: f64| w.contains(s) && self.gap(n, s) >= eps;
        if a.attained && ok(a.s) {
            return Some((a.s, self.gap(n, a.s)));
        }
        let width = w.hi - w.lo;
        for k in 1..=60 {
            for sign in [1.0, -1.0] {
                let s = a.s + sign * width * 2f64.powi(-k);
                if ok(s) {
                    return Some((s, self.gap(n, s)));
                }
            }
        }
        let pw = ProbeWindows::new(tab.t, &self.fam.domain, self.sched);
        pw.points[..pw.prefix[l]]
            .iter()
            .copied()
            .find(|&s| ok(s))
            .map(|s| (s, self.gap(n, s)))
    }

    pub fn cauchy_point(
        &self,
        tab: &Table,
        i: usize,
        l: usize,
        eps: f64,
    ) -> Option<(f64, f64, usize)> {
        let n = self.idx[i];
        let a = tab.args[i][l];
        let gap = (self.fam.value(a.m, a.s) - self.fam.value(n, a.s)).abs();
        (gap >= eps).then_some((a.s, gap, a.m))
    }
}
