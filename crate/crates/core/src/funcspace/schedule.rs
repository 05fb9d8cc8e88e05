use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};

/// Finite resolution at which every quantifier is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolutionSchedule {
    pub eps_ladder: Vec<f64>,
    pub eta_ladder: Vec<f64>,
    /// Grid points per unit length for sampled suprema.
    pub base_grid: usize,
    pub n_max: usize,
    pub m_max: usize,
    /// Largest number of points evaluated on one window.
    pub window_cap: usize,
    /// Horizon used when a domain is unbounded.
    pub horizon: f64,
    /// Probe points per unit length.
    pub probe_density: usize,
    /// Sample offsets per half-window on each eta level.
    pub window_res: usize,
    /// Cauchy tail scale: the tail at s starts near `tail_scale / |s - t|`.
    pub tail_scale: f64,
    /// Locally uniform windows are restricted to `eta >= lu_scale / n_max`.
    pub lu_scale: f64,
}

impl Default for ResolutionSchedule {
    fn default() -> Self {
        ResolutionSchedule {
            eps_ladder: vec![1.0, 1e-1, 1e-2, 1e-3],
            eta_ladder: (1..=40).map(|k| 2f64.powi(-k)).collect(),
            base_grid: 1 << 10,
            n_max: 1 << 16,
            m_max: 1 << 18,
            window_cap: 1 << 12,
            horizon: 16.0,
            probe_density: 4,
            window_res: 16,
            tail_scale: 64.0,
            lu_scale: 8.0,
        }
    }
}

impl ResolutionSchedule {
    /// A cheaper schedule for smoke runs and randomized checks.
    pub fn coarse() -> Self {
        ResolutionSchedule {
            eta_ladder: (1..=24).map(|k| 2f64.powi(-k)).collect(),
            n_max: 1 << 10,
            m_max: 1 << 12,
            probe_density: 2,
            window_res: 8,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let decreasing = |v: &[f64]| {
            !v.is_empty()
                && v.iter().all(|&x| x > 0.0 && x.is_finite())
                && v.windows(2).all(|w| w[0] > w[1])
        };
        if !decreasing(&self.eps_ladder) {
            return Err(LabError::InvalidSchedule(
                "eps_ladder must be positive and strictly decreasing".into(),
            ));
        }
        if !decreasing(&self.eta_ladder) {
            return Err(LabError::InvalidSchedule(
                "eta_ladder must be positive and strictly decreasing".into(),
            ));
        }
        if self.n_max < 4 || self.m_max < self.n_max {
            return Err(LabError::InvalidSchedule("need 4 <= n_max <= m_max".into()));
        }
        if self.base_grid == 0
            || self.window_cap < 2
            || self.window_res == 0
            || self.probe_density == 0
        {
            return Err(LabError::InvalidSchedule(
                "grid sizes must be positive".into(),
            ));
        }
        if !(self.horizon > 0.0 && self.tail_scale > 0.0 && self.lu_scale > 0.0) {
            return Err(LabError::InvalidSchedule(
                "horizon and scales must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Sampled indices in `1..=n_max`.
    pub fn indices(&self) -> Vec<usize> {
        geometric_indices(1, self.n_max)
    }

    /// Sampled indices in `(n_max, 2 n_max]`, used to test persistence.
    pub fn extension_indices(&self) -> Vec<usize> {
        geometric_indices(self.n_max + 1, 2 * self.n_max)
    }

    pub fn eta_floor_lu(&self) -> f64 {
        self.lu_scale / self.n_max as f64
    }
}

/// Every integer up to 16, then `round(2^(j/4))`, always including both ends.
pub fn geometric_indices(lo: usize, hi: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=16usize).collect();
    let mut j = 17;
    loop {
        let x = 2f64.powf(j as f64 / 4.0).round() as usize;
        if x > hi {
            break;
        }
        v.push(x);
        j += 1;
    }
    v.push(lo);
    v.push(hi);
    v.retain(|&n| n >= lo && n <= hi);
    v.sort_unstable();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_indices_cover_ends_and_powers_of_two() {
        let v = geometric_indices(1, 1 << 10);
        assert_eq!(v[0], 1);
        assert_eq!(*v.last().unwrap(), 1024);
        for k in 0..=10 {
            assert!(v.contains(&(1 << k)));
        }
        let e = geometric_indices(1025, 2048);
        assert_eq!(e[0], 1025);
        assert!(e.iter().all(|&n| n > 1024 && n <= 2048));
    }

    #[test]
    fn default_is_valid() {
        ResolutionSchedule::default().validate().unwrap();
        ResolutionSchedule::coarse().validate().unwrap();
    }
}
