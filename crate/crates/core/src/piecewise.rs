//! Right-continuous piecewise polynomials on the line.
//!
//! Piece `i` covers `[b_i, b_{i+1})` and stores its polynomial in the local
//! variable `x = t - b_i`. The last breakpoint may be `+inf`. Outside
//! `[b_0, b_m)` the function is zero. Isolated point values ("atoms") override
//! the piece value at a single point, e.g. `1_{(0,inf)}` has an atom `0` at `0`.

use crate::error::LabError;
use crate::poly::Poly;
use serde::{Deserialize, Serialize};

/// A window `lo..hi` with independently open/closed ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Window {
    pub fn open(lo: f64, hi: f64) -> Self {
        Window {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Window {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        (t > self.lo || (self.lo_closed && t == self.lo))
            && (t < self.hi || (self.hi_closed && t == self.hi))
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed))
    }

    /// A point strictly inside, `frac` of the way from `lo`.
    pub fn interior(&self, frac: f64) -> f64 {
        self.lo + frac * (self.hi - self.lo)
    }
}

/// Location of an extremum: attained at `at`, or only approached as a one-sided limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub at: f64,
    pub attained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    pieces: Vec<Poly>,
    atoms: Vec<(f64, f64)>,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Poly>) -> Result<Self, LabError> {
        if breaks.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(LabError::InvalidInput(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                pieces.len()
            )));
        }
        if breaks[0].is_infinite() || breaks.iter().any(|b| b.is_nan()) {
            return Err(LabError::InvalidInput(
                "first breakpoint must be finite".into(),
            ));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LabError::InvalidInput(
                "breakpoints must increase strictly".into(),
            ));
        }
        if breaks[..breaks.len() - 1].iter().any(|b| b.is_infinite()) {
            return Err(LabError::InvalidInput(
                "only the last breakpoint may be infinite".into(),
            ));
        }
        Ok(PiecewisePoly {
            breaks,
            pieces,
            atoms: Vec::new(),
        })
    }

    pub fn zero() -> Self {
        PiecewisePoly {
            breaks: vec![0.0, f64::INFINITY],
            pieces: vec![Poly::zero()],
            atoms: Vec::new(),
        }
    }

    /// Continuous piecewise-linear interpolant through `(t, y)` nodes, zero outside.
    pub fn linear_interp(nodes: &[(f64, f64)]) -> Result<Self, LabError> {
        if nodes.len() < 2 {
            return Err(LabError::InvalidInput("need at least two nodes".into()));
        }
        let breaks: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let pieces = nodes
            .windows(2)
            .map(|w| Poly::linear(w[0].1, (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
            .collect();
        PiecewisePoly::new(breaks, pieces)
    }

    pub fn with_atoms(mut self, mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms.dedup_by(|a, b| a.0 == b.0);
        self.atoms = atoms;
        self
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    fn atom_at(&self, t: f64) -> Option<f64> {
        self.atoms
            .binary_search_by(|a| a.0.total_cmp(&t))
            .ok()
            .map(|i| self.atoms[i].1)
    }

    /// Index of the piece whose half-open interval contains `t`.
    fn piece_index(&self, t: f64) -> Option<usize> {
        let m = self.pieces.len();
        if t < self.breaks[0] || t >= self.breaks[m] {
            return None;
        }
        Some(self.breaks[..m].partition_point(|&b| b <= t) - 1)
    }

    fn piece_value(&self, i: usize, t: f64) -> f64 {
        self.pieces[i].eval(t - self.breaks[i])
    }

    pub fn eval(&self, t: f64) -> f64 {
        if let Some(v) = self.atom_at(t) {
            return v;
        }
        self.piece_index(t).map_or(0.0, |i| self.piece_value(i, t))
    }

    pub fn right_limit(&self, t: f64) -> f64 {
        self.piece_index(t).map_or(0.0, |i| self.piece_value(i, t))
    }

    pub fn left_limit(&self, t: f64) -> f64 {
        let m = self.pieces.len();
        if t <= self.breaks[0] || t > self.breaks[m] {
            return 0.0;
        }
        let i = self.breaks[..m].partition_point(|&b| b < t) - 1;
        self.piece_value(i, t)
    }

    /// Breakpoints and atoms lying in `w`.
    pub fn features_in(&self, w: &Window) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .breaks
            .iter()
            .copied()
            .chain(self.atoms.iter().map(|a| a.0))
            .filter(|&b| b.is_finite() && w.contains(b))
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Merge breakpoints of two functions and combine piecewise with `op`.
    pub fn combine(&self, o: &PiecewisePoly, op: impl Fn(&Poly, &Poly) -> Poly) -> PiecewisePoly {
        let mut bs: Vec<f64> = self.breaks.iter().chain(o.breaks.iter()).copied().collect();
        bs.sort_by(f64::total_cmp);
        bs.dedup();
        let local = |f: &PiecewisePoly, a: f64| -> Poly {
            match f.piece_index(a) {
                Some(i) => f.pieces[i].shift(a - f.breaks[i]),
                None => Poly::zero(),
            }
        };
        let pieces: Vec<Poly> = bs
            .windows(2)
            .map(|w| op(&local(self, w[0]), &local(o, w[0])))
            .collect();
        let mut atoms: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .chain(o.atoms.iter())
            .map(|&(p, _)| {
                let a = Poly::constant(self.eval(p));
                let b = Poly::constant(o.eval(p));
                (p, op(&a, &b).eval(0.0))
            })
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms.dedup_by(|a, b| a.0 == b.0);
        PiecewisePoly {
            breaks: bs,
            pieces,
            atoms,
        }
    }

    pub fn sub(&self, o: &PiecewisePoly) -> PiecewisePoly {
        self.combine(o, |a, b| a.sub(b))
    }

    pub fn add(&self, o: &PiecewisePoly) -> PiecewisePoly {
        self.combine(o, |a, b| a.add(b))
    }

    pub fn scale(&self, s: f64) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(s)).collect(),
            atoms: self.atoms.iter().map(|&(p, v)| (p, v * s)).collect(),
        }
    }

    /// Candidate values of `f` on `w` in left-to-right order: piece ends (as
    /// one-sided limits when not attained), interior critical points, atoms,
    /// and the zero region outside the support. Between consecutive entries
    /// `f` is monotone, so extrema and crossing counts over `w` can be read off.
    pub fn events(&self, w: &Window) -> Vec<Extremum> {
        // rank orders coincident events: left limit, point value, right limit
        let mut out: Vec<(u8, Extremum)> = Vec::new();
        if w.is_empty() {
            return Vec::new();
        }
        let m = self.pieces.len();
        let (b0, bm) = (self.breaks[0], self.breaks[m]);
        let mut zero_region = |z: Window| {
            if !z.is_empty() {
                let at = if z.lo < z.hi { z.interior(0.5) } else { z.lo };
                out.push((
                    1,
                    Extremum {
                        value: 0.0,
                        at,
                        attained: true,
                    },
                ));
            }
        };
        if w.lo < b0 {
            let hi = w.hi.min(b0);
            zero_region(Window {
                lo: w.lo,
                hi,
                lo_closed: w.lo_closed,
                hi_closed: hi < b0 && w.hi_closed,
            });
        }
        if w.hi > bm || (w.hi == bm && w.hi_closed) {
            let lo = w.lo.max(bm);
            zero_region(Window {
                lo,
                hi: w.hi,
                lo_closed: w.lo < bm || w.lo_closed,
                hi_closed: w.hi_closed,
            });
        }
        for i in 0..m {
            let (a, b) = (self.breaks[i], self.breaks[i + 1]);
            let lo = a.max(w.lo);
            let hi = b.min(w.hi);
            let lo_in = lo < b && w.contains(lo);
            if !(lo < hi || lo_in) {
                continue;
            }
            let p = &self.pieces[i];
            out.push((
                if lo_in { 1 } else { 2 },
                Extremum {
                    value: p.eval(lo - a),
                    at: lo,
                    attained: lo_in,
                },
            ));
            if hi > lo {
                for c in p.critical_points(lo - a, hi - a) {
                    out.push((
                        1,
                        Extremum {
                            value: p.eval(c),
                            at: a + c,
                            attained: true,
                        },
                    ));
                }
                let hi_in = hi < b && w.contains(hi);
                out.push((
                    if hi_in { 1 } else { 0 },
                    Extremum {
                        value: p.eval(hi - a),
                        at: hi,
                        attained: hi_in,
                    },
                ));
            }
        }
        for &(p, v) in &self.atoms {
            if w.contains(p) {
                for (r, e) in out.iter_mut().filter(|(_, e)| e.at == p) {
                    if e.attained {
                        e.attained = false;
                        *r = 2;
                    }
                }
                out.push((
                    1,
                    Extremum {
                        value: v,
                        at: p,
                        attained: true,
                    },
                ));
            }
        }
        out.sort_by(|a, b| a.1.at.total_cmp(&b.1.at).then(a.0.cmp(&b.0)));
        out.into_iter().map(|(_, e)| e).collect()
    }

    /// Exact `sup |f|` over `w`, with the location of the supremum.
    pub fn sup_abs(&self, w: &Window) -> Extremum {
        let mut best = Extremum {
            value: 0.0,
            at: w.lo,
            attained: false,
        };
        for e in self.events(w) {
            if e.value.abs() > best.value
                || (e.value.abs() == best.value && e.attained && !best.attained)
            {
                best = Extremum {
                    value: e.value.abs(),
                    ..e
                };
            }
        }
        best
    }

    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let mut s = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let (a, b) = (self.breaks[i].max(lo), self.breaks[i + 1].min(hi));
            if a < b {
                s += p.integrate(a - self.breaks[i], b - self.breaks[i]);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> PiecewisePoly {
        PiecewisePoly::linear_interp(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap()
    }

    #[test]
    fn eval_is_right_continuous_and_zero_outside() {
        let f = PiecewisePoly::new(
            vec![0.0, 1.0, f64::INFINITY],
            vec![Poly::constant(2.0), Poly::constant(5.0)],
        )
        .unwrap();
        assert_eq!(f.eval(-0.5), 0.0);
        assert_eq!(f.eval(1.0), 5.0);
        assert_eq!(f.left_limit(1.0), 2.0);
        assert_eq!(f.eval(1e300), 5.0);
    }

    #[test]
    fn atom_overrides_piece() {
        let h = PiecewisePoly::new(vec![0.0, f64::INFINITY], vec![Poly::constant(1.0)])
            .unwrap()
            .with_atoms(vec![(0.0, 0.0)]);
        assert_eq!(h.eval(0.0), 0.0);
        assert_eq!(h.right_limit(0.0), 1.0);
        let s = h.sup_abs(&Window {
            lo: -1.0,
            hi: 1e-9,
            lo_closed: false,
            hi_closed: false,
        });
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn sup_of_tent_on_windows() {
        let f = tent();
        assert_eq!(f.sup_abs(&Window::closed(0.0, 2.0)).value, 1.0);
        let s = f.sup_abs(&Window::open(0.0, 0.5));
        assert_eq!(s.value, 0.5);
        assert!(!s.attained);
        assert_eq!(f.sup_abs(&Window::closed(5.0, 6.0)).value, 0.0);
    }

    #[test]
    fn sup_finds_interior_critical_point() {
        // 4x(1-x) on [0,1]
        let f = PiecewisePoly::new(vec![0.0, 1.0], vec![Poly::new(vec![0.0, 4.0, -4.0])]).unwrap();
        let s = f.sup_abs(&Window::closed(0.0, 1.0));
        assert!((s.value - 1.0).abs() < 1e-15);
        assert!((s.at - 0.5).abs() < 1e-12);
    }

    #[test]
    fn combine_shifts_local_coordinates() {
        let f = tent();
        let g = PiecewisePoly::new(vec![0.5, 1.5], vec![Poly::linear(0.0, 1.0)]).unwrap();
        let d = f.sub(&g);
        for &t in &[0.25, 0.5, 0.9, 1.2, 1.7] {
            assert!(
                (d.eval(t) - (f.eval(t) - g.eval(t))).abs() < 1e-14,
                "t = {t}"
            );
        }
    }
}
