use crate::error::{LabError, Result};
use crate::quad::adaptive_simpson;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `D_n(t) = sin((2n+1) pi t) / sin(pi t)`, with `D_n(0) = 2n + 1`.
pub fn dirichlet(n: usize, t: f64) -> f64 {
    let t = t.rem_euclid(1.0);
    let m = (2 * n + 1) as f64;
    let d = (PI * t).sin();
    if d.abs() < 1e-12 {
        return m;
    }
    (m * PI * t).sin() / d
}

/// `int_0^1 |D_n|`, integrating lobe by lobe between consecutive zeros `j/(2n+1)`.
pub fn dirichlet_l1(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let m = 2 * n + 1;
    let f = |t: f64| dirichlet(n, t).abs();
    // symmetric about 1/2: integrate [0, 1/2] and double
    let mut total = 0.0;
    let half = n; // zeros j/m for j = 1..=n lie below 1/2
    let mut a = 0.0;
    for j in 1..=half {
        let b = j as f64 / m as f64;
        total += adaptive_simpson(&f, a, b, 1e-13);
        a = b;
    }
    total += adaptive_simpson(&f, a, 0.5, 1e-13);
    2.0 * total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletReport {
    pub rows: Vec<(usize, f64)>,
    /// Least-squares slope of the L1 norm against `ln n` over `16 <= n <= 4096`.
    pub slope: Option<f64>,
    pub reference_slope: f64,
}

pub fn dirichlet_profile(n_list: &[usize]) -> Result<DirichletReport> {
    if let Some(&n) = n_list.iter().find(|&&n| n > 1 << 12) {
        return Err(LabError::InvalidInput(format!("n = {n} exceeds 2^12")));
    }
    let rows: Vec<(usize, f64)> = crate::par::map(n_list, |&n| (n, dirichlet_l1(n)));
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.0 >= 16)
        .map(|&(n, v)| ((n as f64).ln(), v))
        .collect();
    let slope = if fit.len() >= 2 {
        let k = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / k;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(DirichletReport {
        rows,
        slope,
        reference_slope: 4.0 / (PI * PI),
    })
}
