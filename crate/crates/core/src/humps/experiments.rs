use super::{convolve_circle, haar_kernel, spike, AlphaSchedule, CirclePiecewisePoly};
use crate::error::{LabError, Result};
use crate::par;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub t0: f64,
    pub measured: f64,
    pub predicted: f64,
    pub argmax: f64,
    pub value_at_t0: f64,
    pub support_hull: (f64, f64),
    pub predicted_hull: (f64, f64),
    pub rel_error: f64,
}

/// Exact `zeta_k^{t0} * eta_n` against `k^2 |alpha| / (2n)`.
pub fn lemma_check(k: usize, n: usize, alpha: f64, t0: f64) -> Result<LemmaReport> {
    if !(n >= k && k >= 4) {
        return Err(LabError::Precondition(format!(
            "need n >= k >= 4, got k = {k}, n = {n}"
        )));
    }
    let (kf, nf) = (k as f64, n as f64);
    if !(t0 - 1.0 / kf > 0.0 && t0 + 1.0 / kf + 1.0 / nf <= 1.0) {
        return Err(LabError::Precondition(format!(
            "[t0 - 1/k, t0 + 1/k + 1/n] must lie in (0, 1], t0 = {t0}"
        )));
    }
    let c = convolve_circle(&spike(k, t0)?, &haar_kernel(n, alpha))?;
    let (measured, at) = c.sup_abs();
    // the maximum is a plateau ending at t0; report t0 when it attains the sup
    let argmax = if c.eval(t0).abs() >= measured * (1.0 - 1e-12) {
        t0
    } else {
        at
    };
    let predicted = kf * kf * alpha.abs() / (2.0 * nf);
    let hull = c.support_hull(1e-12 * measured).unwrap_or((t0, t0));
    Ok(LemmaReport {
        k,
        n,
        alpha,
        t0,
        measured,
        predicted,
        argmax,
        value_at_t0: c.eval(t0),
        support_hull: hull,
        predicted_hull: (t0 - 1.0 / kf, t0 + 1.0 / kf + 1.0 / nf),
        rel_error: (measured - predicted).abs() / predicted,
    })
}

/// `f = sum_i beta_i zeta_{k_i}^{t_i}` and the kernel scale schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeSumParams {
    pub t: Vec<f64>,
    pub k: Vec<usize>,
    pub beta: Vec<f64>,
    pub alpha: AlphaSchedule,
}

impl SpikeSumParams {
    /// `t_i = 2^-i`, `k_i = 2^(i+2)`, `beta_i = 1/(i k_i)`.
    pub fn defaults(i_max: usize, alpha: AlphaSchedule) -> Self {
        let t = (1..=i_max).map(|i| 2f64.powi(-(i as i32))).collect();
        let k: Vec<usize> = (1..=i_max).map(|i| 1usize << (i + 2)).collect();
        let beta = k
            .iter()
            .enumerate()
            .map(|(j, &k)| 1.0 / ((j + 1) as f64 * k as f64))
            .collect();
        SpikeSumParams { t, k, beta, alpha }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.t.len();
        if m == 0 || self.k.len() != m || self.beta.len() != m {
            return Err(LabError::InvalidInput(
                "t, k and beta must have the same nonzero length".into(),
            ));
        }
        for i in 0..m {
            if self.k[i] < 4 {
                return Err(LabError::InvalidInput(format!(
                    "k_{} = {} < 4",
                    i + 1,
                    self.k[i]
                )));
            }
            if i + 1 < m {
                if !(self.t[i + 1] < self.t[i]) {
                    return Err(LabError::InvalidInput(format!(
                        "t_{} >= t_{}: t must decrease strictly",
                        i + 2,
                        i + 1
                    )));
                }
                let left = self.t[i] - 1.0 / self.k[i] as f64;
                let right = self.t[i + 1] + 1.0 / self.k[i + 1] as f64;
                if !(right < left) {
                    return Err(LabError::InvalidInput(format!(
                        "spike supports {} and {} overlap: t_{} + 1/k_{} >= t_{} - 1/k_{}",
                        i + 1,
                        i + 2,
                        i + 2,
                        i + 2,
                        i + 1,
                        i + 1
                    )));
                }
                if !(self.beta[i + 1] * (self.k[i + 1] as f64) < self.beta[i] * self.k[i] as f64) {
                    return Err(LabError::InvalidInput(format!(
                        "beta_i k_i must decrease (fails at i = {})",
                        i + 2
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn function(&self) -> Result<CirclePiecewisePoly> {
        self.validate()?;
        let mut f = spike(self.k[0], self.t[0])?.as_line().scale(self.beta[0]);
        for i in 1..self.t.len() {
            f = f.add(&spike(self.k[i], self.t[i])?.as_line().scale(self.beta[i]));
        }
        CirclePiecewisePoly::from_line(&f)
    }

    /// `beta_i alpha_n k_i^2 / (2n)`
    pub fn predicted(&self, i: usize, n: usize) -> f64 {
        let k = self.k[i] as f64;
        self.beta[i] * self.alpha.at(n) * k * k / (2.0 * n as f64)
    }
}

/// `|(f * eta_n)(t)|` over the tested `n` at one probe point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeColumn {
    pub t: f64,
    pub values: Vec<(usize, f64)>,
    pub max_abs: f64,
}

/// Spike `i` (1-based) measured at `n = k_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeRow {
    pub i: usize,
    pub n: usize,
    pub sup_norm: f64,
    pub value_at_t: f64,
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanachSteinhausReport {
    pub params: SpikeSumParams,
    /// `(n, (f * eta_n)(0))`
    pub at_origin: Vec<(usize, f64)>,
    pub sup_norms: Vec<(usize, f64)>,
    pub probes: Vec<ProbeColumn>,
    pub spikes: Vec<SpikeRow>,
}

pub fn banach_steinhaus_experiment(
    i_max: usize,
    n_list: &[usize],
    alpha: AlphaSchedule,
) -> Result<BanachSteinhausReport> {
    let params = SpikeSumParams::defaults(i_max, alpha);
    let f = params.function()?;
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.extend(params.k.iter().copied());
    ns.sort_unstable();
    ns.dedup();
    let convs: Vec<Result<CirclePiecewisePoly>> =
        par::map(&ns, |&n| convolve_circle(&f, &haar_kernel(n, alpha.at(n))));
    let convs: Vec<CirclePiecewisePoly> = convs.into_iter().collect::<Result<_>>()?;
    let listed = |n: &usize| n_list.contains(n);
    let at_origin = ns
        .iter()
        .zip(&convs)
        .filter(|(n, _)| listed(n))
        .map(|(&n, c)| (n, c.eval(0.0)))
        .collect();
    let sup_norms = ns
        .iter()
        .zip(&convs)
        .filter(|(n, _)| listed(n))
        .map(|(&n, c)| (n, c.sup_abs().0))
        .collect();
    let probes = params
        .t
        .iter()
        .map(|&t| {
            let values: Vec<(usize, f64)> = ns
                .iter()
                .zip(&convs)
                .filter(|(n, _)| listed(n))
                .map(|(&n, c)| (n, c.eval(t)))
                .collect();
            let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.1.abs()));
            ProbeColumn { t, values, max_abs }
        })
        .collect();
    let spikes = (0..i_max)
        .map(|i| {
            let n = params.k[i];
            let c = &convs[ns.binary_search(&n).expect("k_i included")];
            SpikeRow {
                i: i + 1,
                n,
                sup_norm: c.sup_abs().0,
                value_at_t: c.eval(params.t[i]),
                predicted: params.predicted(i, n),
            }
        })
        .collect();
    Ok(BanachSteinhausReport {
        params,
        at_origin,
        sup_norms,
        probes,
        spikes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_examples() {
        let r = lemma_check(4, 8, 1.0, 0.5).unwrap();
        assert!(r.rel_error <= 1e-12);
        assert_eq!(r.argmax, 0.5);
        // plateau on [t0 - 1/k + 1/n, t0]
        let c = convolve_circle(&spike(4, 0.5).unwrap(), &haar_kernel(8, 1.0)).unwrap();
        assert!((c.eval(0.375) - 1.0).abs() < 1e-13 && c.eval(0.37) < 1.0 - 1e-6);
        assert!((lemma_check(4, 4, 1.0, 0.5).unwrap().measured - 2.0).abs() < 1e-12);
        assert!((lemma_check(10, 100, 2.0, 0.5).unwrap().measured - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lemma_rejects_small_n() {
        let e = lemma_check(8, 4, 1.0, 0.5).unwrap_err();
        assert!(e.to_string().contains("n >= k >= 4"));
    }

    #[test]
    fn spike_value_at_t_matches_prediction() {
        let r = banach_steinhaus_experiment(6, &[64], AlphaSchedule::NOverLog).unwrap();
        for s in &r.spikes {
            assert!(
                (s.value_at_t - s.predicted).abs() <= 1e-12 * s.predicted,
                "{s:?}"
            );
        }
        assert_eq!(r.at_origin, vec![(64, 0.0)]);
    }

    #[test]
    fn overlapping_supports_are_rejected() {
        let mut p = SpikeSumParams::defaults(3, AlphaSchedule::NOverLog);
        p.k[1] = 4;
        assert!(p.function().unwrap_err().to_string().contains("overlap"));
    }
}
