//! Exact piecewise-polynomial constructions on the circle: spikes, scaled Haar
//! kernels, their convolutions, and the experiments built from them.

mod dirichlet;
mod experiments;
mod poisson;

pub use dirichlet::{dirichlet, dirichlet_l1, dirichlet_profile, DirichletReport};
pub use experiments::{
    banach_steinhaus_experiment, lemma_check, BanachSteinhausReport, LemmaReport, ProbeColumn,
    SpikeRow, SpikeSumParams,
};
pub use poisson::{poisson_limit, PoissonKernel, PoissonReport, PoissonRow};

use crate::error::{LabError, Result};
use crate::funcspace::{Domain, FunctionOracle, PiecewisePoly, Poly, Window};
use serde::{Deserialize, Serialize};

/// Scale schedule `alpha_n` for `eta_n = alpha_n n eta(nt)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSchedule {
    Constant(f64),
    /// `n / log(n + 2)`
    NOverLog,
}

impl AlphaSchedule {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            AlphaSchedule::Constant(a) => a,
            AlphaSchedule::NOverLog => n as f64 / (n as f64 + 2.0).ln(),
        }
    }
}

/// Largest breakpoint count a convolution may produce.
pub const MAX_BREAKPOINTS: usize = 100_000;
const MERGE_TOL: f64 = 1e-14;

/// A piecewise polynomial on `[0, 1)`, read modulo 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirclePiecewisePoly {
    pp: PiecewisePoly,
}

impl CirclePiecewisePoly {
    /// From pieces covering sub-intervals of `[0, 1)`; gaps are filled with zero.
    pub fn from_line(p: &PiecewisePoly) -> Result<Self> {
        let b = p.breaks();
        if b[0] < 0.0 || b[b.len() - 1] > 1.0 {
            return Err(LabError::DomainMismatch(
                "circle pieces must lie in [0, 1]".into(),
            ));
        }
        let frame = PiecewisePoly::new(vec![0.0, 1.0], vec![Poly::zero()])?;
        Ok(CirclePiecewisePoly { pp: frame.add(p) })
    }

    pub fn constant(c: f64) -> Self {
        CirclePiecewisePoly {
            pp: PiecewisePoly::new(vec![0.0, 1.0], vec![Poly::constant(c)]).expect("valid"),
        }
    }

    pub fn breaks(&self) -> &[f64] {
        self.pp.breaks()
    }

    pub fn pieces(&self) -> &[Poly] {
        self.pp.pieces()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.pp.eval(t.rem_euclid(1.0))
    }

    pub fn integral(&self) -> f64 {
        self.pp.integrate(0.0, 1.0)
    }

    /// Exact `sup |f|` and a point where it is attained or approached.
    pub fn sup_abs(&self) -> (f64, f64) {
        let e = self.pp.sup_abs(&Window {
            lo: 0.0,
            hi: 1.0,
            lo_closed: true,
            hi_closed: false,
        });
        (e.value, e.at)
    }

    /// Smallest interval containing every piece whose sup exceeds `tol`.
    pub fn support_hull(&self, tol: f64) -> Option<(f64, f64)> {
        let b = self.breaks();
        let mut hull: Option<(f64, f64)> = None;
        for (i, p) in self.pieces().iter().enumerate() {
            let w = Window::closed(0.0, b[i + 1] - b[i]);
            let big = PiecewisePoly::new(vec![0.0, w.hi], vec![p.clone()])
                .expect("valid")
                .sup_abs(&w)
                .value
                > tol;
            if big {
                hull = Some(match hull {
                    None => (b[i], b[i + 1]),
                    Some((lo, _)) => (lo, b[i + 1]),
                });
            }
        }
        hull
    }

    pub fn to_oracle(&self) -> FunctionOracle {
        let mut o = FunctionOracle::piecewise(Domain::circle(), self.pp.clone());
        o.domain = Domain::circle();
        o
    }

    pub fn as_line(&self) -> &PiecewisePoly {
        &self.pp
    }
}

/// `zeta_k^{t0}`: affine spike of height `k` at `t0`, support `[t0 - 1/k, t0 + 1/k]`.
pub fn spike(k: usize, t0: f64) -> Result<CirclePiecewisePoly> {
    let w = 1.0 / k as f64;
    if k == 0 || t0 - w < 0.0 || t0 + w > 1.0 {
        return Err(LabError::InvalidInput(format!(
            "spike support [t0 - 1/k, t0 + 1/k] must lie in [0, 1] (k = {k}, t0 = {t0})"
        )));
    }
    let p = PiecewisePoly::linear_interp(&[(t0 - w, 0.0), (t0, k as f64), (t0 + w, 0.0)])?;
    CirclePiecewisePoly::from_line(&p)
}

/// `eta_n(t) = alpha n eta(nt)` with `eta = 2` on `[0, 1/2)`, `-2` on `[1/2, 1)`.
pub fn haar_kernel(n: usize, alpha: f64) -> CirclePiecewisePoly {
    let n_f = n as f64;
    let h = 2.0 * alpha * n_f;
    let p = PiecewisePoly::new(
        vec![0.0, 0.5 / n_f, 1.0 / n_f],
        vec![Poly::constant(h), Poly::constant(-h)],
    )
    .expect("valid");
    CirclePiecewisePoly::from_line(&p).expect("inside [0, 1]")
}

fn binomial_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..k {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// Bivariate coefficients `c[i][j]` of `tau^i sigma^j`.
type Bi = Vec<Vec<f64>>;

/// `P(delta + tau - sigma) * Q(sigma)`
fn integrand(p: &Poly, delta: f64, q: &Poly) -> Bi {
    let ps = p.shift(delta);
    let d = ps.degree() + q.degree() + 1;
    let mut b = vec![vec![0.0; d + 1]; d + 1];
    for (k, &pk) in ps.coeffs().iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let row = binomial_row(k);
        for i in 0..=k {
            let j = k - i;
            let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = pk * row[i] * sgn;
            for (l, &ql) in q.coeffs().iter().enumerate() {
                b[i][j + l] += c * ql;
            }
        }
    }
    b
}

/// `sum_ij c[i][j] tau^i (a + b tau)^{j+1} / (j+1)`, the sigma-antiderivative at `sigma = a + b tau`.
fn antiderivative_at(c: &Bi, a: f64, b: f64) -> Poly {
    let mut out = Poly::zero();
    let lin = Poly::linear(a, b);
    for (i, row) in c.iter().enumerate() {
        let mut pow = lin.clone();
        for (j, &cij) in row.iter().enumerate() {
            if cij != 0.0 {
                let mut tau_i = vec![0.0; i + 1];
                tau_i[i] = cij / (j + 1) as f64;
                out = out.add(&Poly::new(tau_i).mul(&pow));
            }
            pow = pow.mul(&lin);
        }
    }
    out
}

struct Arc1 {
    a: f64,
    b: f64,
    p: Poly,
}

fn arcs(f: &CirclePiecewisePoly) -> Vec<Arc1> {
    let b = f.breaks();
    f.pieces()
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(i, p)| Arc1 {
            a: b[i],
            b: b[i + 1],
            p: p.clone(),
        })
        .collect()
}

/// `(f * g)(t) = int_0^1 f(t - s) g(s) ds`, computed exactly arc by arc.
pub fn convolve_circle(
    f: &CirclePiecewisePoly,
    g: &CirclePiecewisePoly,
) -> Result<CirclePiecewisePoly> {
    let fa: Vec<Arc1> = arcs(f)
        .into_iter()
        .flat_map(|a| {
            [
                Arc1 {
                    a: a.a - 1.0,
                    b: a.b - 1.0,
                    p: a.p.clone(),
                },
                a,
            ]
        })
        .collect();
    let ga = arcs(g);
    let mut cuts: Vec<f64> = vec![0.0];
    for x in f.breaks() {
        for y in g.breaks() {
            cuts.push((x + y).rem_euclid(1.0));
        }
    }
    if cuts.len() > MAX_BREAKPOINTS {
        return Err(LabError::InvalidInput(format!(
            "convolution needs {} breakpoints, cap {}",
            cuts.len(),
            MAX_BREAKPOINTS
        )));
    }
    cuts.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(cuts.len());
    for c in cuts {
        if merged.last().map_or(true, |&l| c - l > MERGE_TOL) && 1.0 - c > MERGE_TOL {
            merged.push(c);
        }
    }
    merged.push(1.0);
    let mut pieces = Vec::with_capacity(merged.len() - 1);
    for w in merged.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let mid = 0.5 * (t0 + t1);
        let mut acc = Poly::zero();
        for fp in &fa {
            for gp in &ga {
                let lo_c = gp.a >= mid - fp.b;
                let hi_d = gp.b <= mid - fp.a;
                let lo = if lo_c { gp.a } else { mid - fp.b };
                let hi = if hi_d { gp.b } else { mid - fp.a };
                if lo >= hi {
                    continue;
                }
                let delta = t0 - gp.a - fp.a;
                let c = integrand(&fp.p, delta, &gp.p);
                // sigma = s - c_j; limits affine in tau = t - t0
                let (la, lb) = if lo_c {
                    (0.0, 0.0)
                } else {
                    (t0 - fp.b - gp.a, 1.0)
                };
                let (ha, hb) = if hi_d {
                    (gp.b - gp.a, 0.0)
                } else {
                    (delta, 1.0)
                };
                acc = acc.add(&antiderivative_at(&c, ha, hb).sub(&antiderivative_at(&c, la, lb)));
            }
        }
        pieces.push(acc);
    }
    Ok(CirclePiecewisePoly {
        pp: PiecewisePoly::new(merged, pieces)?,
    })
}
