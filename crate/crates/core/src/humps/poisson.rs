use crate::catalog::{make_family, FamilySpec, KernelChoice};
use crate::convergence::detect_sticky;
use crate::error::{LabError, Result};
use crate::funcspace::{neumaier_sum, ResolutionSchedule, Verdict};
use crate::functionals::{check_property, Property};
use crate::quad::adaptive_simpson;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type F1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A kernel `xi` with a decreasing envelope `|xi(x)| <= env(x)` for `x >= env_from`
/// and a bound `env_tail(X) >= int_X^inf env`.
#[derive(Clone)]
pub struct PoissonKernel {
    pub name: String,
    xi: F1,
    env: F1,
    env_tail: F1,
    env_from: f64,
    /// Terms with `|n s| > cutoff` are dropped.
    pub cutoff: f64,
    /// Below this `|s|` the limit is taken as 0.
    pub s_floor: f64,
}

impl PoissonKernel {
    /// `(3x^2 - 2x^4) e^{-x^2}`
    pub fn builtin() -> Self {
        PoissonKernel {
            name: "(3x^2 - 2x^4) exp(-x^2)".into(),
            xi: Arc::new(|x| {
                let x2 = x * x;
                (3.0 * x2 - 2.0 * x2 * x2) * (-x2).exp()
            }),
            env: Arc::new(|x| {
                let x2 = x * x;
                (3.0 * x2 + 2.0 * x2 * x2) * (-x2).exp()
            }),
            // int_X^inf (3x^2 + 2x^4) e^{-x^2} <= (X^3 + 3X + 3/(2X)) e^{-X^2}
            env_tail: Arc::new(|x| (x.powi(3) + 3.0 * x + 1.5 / x) * (-x * x).exp()),
            env_from: 1.5,
            cutoff: 8.0,
            s_floor: 2f64.powi(-12),
        }
    }

    /// `x e^{-x^2}`
    pub fn odd_gaussian() -> Self {
        PoissonKernel {
            name: "x exp(-x^2)".into(),
            xi: Arc::new(|x| x * (-x * x).exp()),
            env: Arc::new(|x| x.abs() * (-x * x).exp()),
            env_tail: Arc::new(|x| 0.5 * (-x * x).exp()),
            env_from: 1.0,
            cutoff: 8.0,
            s_floor: 2f64.powi(-12),
        }
    }

    pub fn xi(&self, x: f64) -> f64 {
        (self.xi)(x)
    }

    /// Bound on `sum_{|n| > N} |xi(s n)|`.
    pub fn series_tail(&self, s: f64, n: usize) -> f64 {
        let s = s.abs();
        let x = s * n as f64;
        if s == 0.0 || x < self.env_from {
            return f64::INFINITY;
        }
        2.0 * ((self.env)(x) + (self.env_tail)(x) / s)
    }

    /// Number of positive-index terms kept for `psi_n(t)`.
    pub fn active_terms(&self, n: usize, t: f64) -> usize {
        if t == 0.0 {
            return n;
        }
        n.min((self.cutoff / t.abs()).floor() as usize)
    }

    fn pair(&self, k: usize, s: f64) -> f64 {
        let x = k as f64 * s;
        self.xi(x) + self.xi(-x)
    }

    /// `psi_inf(s) = sum_n xi(s n)`, truncated at `|n s| <= cutoff`.
    pub fn limit(&self, s: f64) -> f64 {
        if s.abs() < self.s_floor {
            return 0.0;
        }
        let m = (self.cutoff / s.abs()).floor() as usize;
        self.xi(0.0) + neumaier_sum((1..=m).map(|k| self.pair(k, s)))
    }

    /// `psi_n(s)`; equal to `psi_inf(s)` once every dropped term is beyond the cutoff.
    pub fn partial(&self, n: usize, s: f64) -> f64 {
        if s == 0.0 {
            return (2 * n + 1) as f64 * self.xi(0.0);
        }
        let m = self.active_terms(n, s);
        if m < n {
            return self.limit(s);
        }
        self.xi(0.0) + neumaier_sum((1..=n).map(|k| self.pair(k, s)))
    }

    /// `psi_n(s)` for every `n` in `idx`, by one running sum.
    pub fn partials(&self, s: f64, idx: &[usize]) -> Vec<f64> {
        if s == 0.0 {
            return idx.iter().map(|&n| self.partial(n, s)).collect();
        }
        let mut order: Vec<usize> = (0..idx.len()).collect();
        order.sort_by_key(|&i| idx[i]);
        let mut out = vec![0.0; idx.len()];
        let (mut sum, mut comp) = (self.xi(0.0), 0.0);
        let mut k = 0usize;
        let mut lim: Option<f64> = None;
        for i in order {
            let n = idx[i];
            if self.active_terms(n, s) < n {
                out[i] = *lim.get_or_insert_with(|| self.limit(s));
                continue;
            }
            while k < n {
                k += 1;
                let x = self.pair(k, s);
                let t = sum + x;
                if sum.abs() >= x.abs() {
                    comp += (sum - t) + x;
                } else {
                    comp += (x - t) + sum;
                }
                sum = t;
            }
            out[i] = sum + comp;
        }
        out
    }

    /// Worst tail bound recorded for a member, over `|s| >= s_floor`.
    pub fn tail_bound(&self, _n: usize) -> f64 {
        let m = (self.cutoff / self.s_floor).floor() as usize;
        self.series_tail(self.s_floor, m)
    }

    /// Smallest `N` with `series_tail(s, N) < tol`.
    pub fn terms_for(&self, s: f64, tol: f64) -> usize {
        let mut x = self.env_from.max(2.0);
        while 2.0 * ((self.env)(x) + (self.env_tail)(x) / s) >= tol {
            x += 0.125;
        }
        (x / s).ceil() as usize
    }

    /// `xi(0) = 0` and `int xi = 0`, each to 1e-8.
    pub fn check_hypotheses(&self) -> Result<()> {
        if self.xi(0.0).abs() > 1e-8 {
            return Err(LabError::Precondition(format!(
                "xi(0) = {} != 0",
                self.xi(0.0)
            )));
        }
        let x = 12.0;
        let f = |t: f64| self.xi(t);
        let integral = adaptive_simpson(&f, -x, 0.0, 1e-14) + adaptive_simpson(&f, 0.0, x, 1e-14);
        let tail = 2.0 * (self.env_tail)(x);
        if integral.abs() > 1e-8 || tail > 1e-12 {
            return Err(LabError::Precondition(format!(
                "int xi = {integral} != 0 (tail bound {tail})"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonRow {
    pub s: f64,
    pub terms: usize,
    pub sum: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub kernel: String,
    pub rows: Vec<PoissonRow>,
    /// `|S(s)|` is non-increasing as `s` decreases along the sorted list.
    pub shrinks_to_zero: bool,
    pub sticky: Verdict,
    pub limit_continuous_at_zero: Verdict,
}

/// `S(s) = sum_{|n| <= N(s)} xi(s n)` with certified tails, plus the detector run on `psi_N`.
pub fn poisson_limit(
    kernel: &PoissonKernel,
    choice: KernelChoice,
    s_list: &[f64],
    sched: &ResolutionSchedule,
) -> Result<PoissonReport> {
    kernel.check_hypotheses()?;
    if let Some(&s) = s_list.iter().find(|&&s| !(s > 0.0)) {
        return Err(LabError::InvalidInput(format!("s = {s} must be positive")));
    }
    let rows: Vec<PoissonRow> = s_list
        .iter()
        .map(|&s| {
            let n = kernel.terms_for(s, 1e-12);
            let sum = kernel.xi(0.0) + neumaier_sum((1..=n).map(|k| kernel.pair(k, s)));
            PoissonRow {
                s,
                terms: n,
                sum,
                tail_bound: kernel.series_tail(s, n),
            }
        })
        .collect();
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| b.s.total_cmp(&a.s));
    let small = sorted.iter().filter(|r| r.s <= 0.1).collect::<Vec<_>>();
    let shrinks_to_zero = small
        .windows(2)
        .all(|w| w[1].sum.abs() <= w[0].sum.abs() + 1e-15)
        && small.last().map_or(true, |r| r.sum.abs() < 1e-6);
    let fam = make_family(&FamilySpec::PoissonSeries { kernel: choice })?;
    let limit = fam
        .label
        .pointwise_limit
        .clone()
        .expect("poisson family has a limit");
    let sticky = detect_sticky(&fam, &limit, sched)?;
    let cont = check_property(&limit, &Property::ContinuousAt(0.0), sched)?;
    Ok(PoissonReport {
        kernel: kernel.name.clone(),
        rows,
        shrinks_to_zero,
        sticky,
        limit_continuous_at_zero: cont,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_hypotheses_hold() {
        PoissonKernel::builtin().check_hypotheses().unwrap();
        PoissonKernel::odd_gaussian().check_hypotheses().unwrap();
    }

    #[test]
    fn s_one_matches_direct_summation() {
        let k = PoissonKernel::builtin();
        let direct = k.xi(0.0) + 2.0 * (1..=10_000).map(|n| k.xi(n as f64)).sum::<f64>();
        let n = k.terms_for(1.0, 1e-12);
        let s = k.xi(0.0) + neumaier_sum((1..=n).map(|j| k.pair(j, 1.0)));
        assert!((s - direct).abs() < 1e-14);
    }

    #[test]
    fn odd_kernel_sums_to_zero() {
        let k = PoissonKernel::odd_gaussian();
        for s in [1.0, 0.3, 0.05] {
            assert_eq!(k.limit(s), 0.0);
        }
    }

    #[test]
    fn partials_agree_with_single_evaluation() {
        let k = PoissonKernel::builtin();
        let idx = [1, 5, 64, 3, 1000, 70000];
        for s in [0.0, 1e-5, 0.01, 0.3, 2.0] {
            let b = k.partials(s, &idx);
            for (i, &n) in idx.iter().enumerate() {
                assert!(
                    (b[i] - k.partial(n, s)).abs() < 1e-9 * (1.0 + b[i].abs()),
                    "n={n} s={s}"
                );
            }
        }
    }
}
