//! Dense real polynomials in a local variable, with real-root isolation.

use serde::{Deserialize, Serialize};

/// Coefficients in ascending order: `c[0] + c[1] x + ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Poly {
    c: Vec<f64>,
}

impl Poly {
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.len() > 1 && c[c.len() - 1] == 0.0 {
            c.pop();
        }
        if c.is_empty() {
            c.push(0.0);
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![0.0] }
    }

    pub fn constant(a: f64) -> Self {
        Poly::new(vec![a])
    }

    /// `a + b x`
    pub fn linear(a: f64, b: f64) -> Self {
        Poly::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&a| a == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() == 1 {
            return Poly::zero();
        }
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| k as f64 * a)
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Poly {
        let mut c = vec![0.0];
        c.extend(self.c.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
        Poly::new(c)
    }

    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let p = self.integral();
        p.eval(b) - p.eval(a)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.c.iter().map(|&a| a * s).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new(
            (0..n)
                .map(|k| self.c.get(k).copied().unwrap_or(0.0) + o.c.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut c = vec![0.0; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    /// `q(x) = p(x + d)`, by repeated synthetic division.
    pub fn shift(&self, d: f64) -> Poly {
        if d == 0.0 {
            return self.clone();
        }
        let mut c = self.c.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                c[k] += d * c[k + 1];
            }
        }
        Poly::new(c)
    }

    /// `q(x) = p(s x)`
    pub fn dilate(&self, s: f64) -> Poly {
        let mut f = 1.0;
        Poly::new(
            self.c
                .iter()
                .map(|&a| {
                    let v = a * f;
                    f *= s;
                    v
                })
                .collect(),
        )
    }

    /// Real roots in the closed interval `[a, b]`, sorted, without duplicates.
    ///
    /// Roots of `p'` split `[a, b]` into monotone runs; each run holds at most
    /// one root, found by bisection. The zero polynomial has no isolated roots.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        if !(a <= b) || self.is_zero() {
            return Vec::new();
        }
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.c[0] / self.c[1];
                if r >= a && r <= b {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let mut cuts = vec![a];
                cuts.extend(
                    self.derivative()
                        .roots_in(a, b)
                        .into_iter()
                        .filter(|&x| x > a && x < b),
                );
                cuts.push(b);
                let mut out: Vec<f64> = Vec::new();
                for w in cuts.windows(2) {
                    if let Some(r) = self.monotone_root(w[0], w[1]) {
                        if out.last().map_or(true, |&l| r > l) {
                            out.push(r);
                        }
                    }
                }
                out
            }
        }
    }

    fn monotone_root(&self, mut lo: f64, mut hi: f64) -> Option<f64> {
        let mut flo = self.eval(lo);
        let fhi = self.eval(hi);
        if flo == 0.0 {
            return Some(lo);
        }
        if fhi == 0.0 {
            return Some(hi);
        }
        if flo.signum() == fhi.signum() {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return Some(mid);
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Critical points of `p` in the open interval `(a, b)`.
    pub fn critical_points(&self, a: f64, b: f64) -> Vec<f64> {
        self.derivative()
            .roots_in(a, b)
            .into_iter()
            .filter(|&x| x > a && x < b)
            .collect()
    }
}
