use super::*;
use crate::catalog::by_name;
use crate::funcspace::{Outcome, Poly, SequenceFamily};
use crate::humps::spike;
use std::sync::Arc;

fn line() -> Domain {
    Domain::half_line(16.0)
}

fn pp(nodes: &[(f64, f64)]) -> FunctionOracle {
    FunctionOracle::piecewise(line(), PiecewisePoly::linear_interp(nodes).unwrap())
}

fn step_open() -> FunctionOracle {
    let p = PiecewisePoly::new(vec![0.0, f64::INFINITY], vec![Poly::constant(1.0)])
        .unwrap()
        .with_atoms(vec![(0.0, 0.0)]);
    FunctionOracle::piecewise(line(), p)
}

/// Up-crossings counted from the label sequence: keep samples below `a` (L) or above `b` (H),
/// merge repeats, count `L H` pairs.
fn brute_upcrossings(vals: &[f64], a: f64, b: f64) -> usize {
    let mut labels: Vec<bool> = vals
        .iter()
        .filter(|&&v| v < a || v > b)
        .map(|&v| v > b)
        .collect();
    labels.dedup();
    labels.windows(2).filter(|w| !w[0] && w[1]).count()
}

#[test]
fn upcrossing_examples() {
    let s = ResolutionSchedule::default();
    let w = Window::closed(0.0, 1.0);
    assert_eq!(
        upcrossings(&pp(&[(0.0, 0.0), (1.0, 0.0)]), -0.5, 0.5, &w, &s).unwrap(),
        0
    );

    let zig = pp(&[
        (0.0, 0.0),
        (0.2, 1.0),
        (0.4, -1.0),
        (0.6, 1.0),
        (0.8, -1.0),
        (1.0, 0.0),
    ]);
    let grid: Vec<f64> = (0..=10_000).map(|k| zig.eval(k as f64 * 1e-4)).collect();
    assert_eq!(brute_upcrossings(&grid, -0.5, 0.5), 1);
    assert_eq!(upcrossings(&zig, -0.5, 0.5, &w, &s).unwrap(), 1);

    let sine = FunctionOracle::closure(Domain::interval(0.0, 1.0), |t| {
        (6.0 * std::f64::consts::PI * t).sin()
    });
    let grid: Vec<f64> = (0..=10_000).map(|k| sine.eval(k as f64 * 1e-4)).collect();
    assert_eq!(brute_upcrossings(&grid, -0.5, 0.5), 2);
    assert_eq!(upcrossings(&sine, -0.5, 0.5, &w, &s).unwrap(), 2);

    assert!(upcrossings(&zig, 0.5, 0.5, &w, &s).is_err());
}

#[test]
fn upcrossings_use_strict_inequalities() {
    // touches a and b exactly but never crosses them
    let f = pp(&[(0.0, 0.0), (0.25, -0.5), (0.5, 0.5), (1.0, 0.0)]);
    assert_eq!(
        upcrossings(
            &f,
            -0.5,
            0.5,
            &Window::closed(0.0, 1.0),
            &ResolutionSchedule::default()
        )
        .unwrap(),
        0
    );
}

#[test]
fn limsup_examples() {
    let f = pp(&[(0.0, 2.0), (1.0, 3.0)]);
    let e = limsup_along(&f, &TimeSequence::harmonic(0.0)).unwrap();
    assert_eq!((e.sup, e.inf, e.exact), (2.0, 2.0, true));

    let e = limsup_along(&step_open(), &TimeSequence::harmonic(0.0)).unwrap();
    assert_eq!((e.sup, e.inf), (1.0, 1.0));
    assert_eq!(step_open().eval(0.0), 0.0);

    let osc = FunctionOracle::closure(line(), |t| if t > 0.0 { (1.0 / t).sin() } else { 0.0 });
    let tau = TimeSequence::harmonic(0.0);
    let e = limsup_along(&osc, &tau).unwrap();
    // direct max/min of sin(k) over the tail window
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in tau.k_max + 1 - tau.tail_window..=tau.k_max {
        hi = hi.max((k as f64).sin());
        lo = lo.min((k as f64).sin());
    }
    assert!((e.sup - hi).abs() < 1e-12 && (e.inf - lo).abs() < 1e-12);
    assert!(e.sup > 0.99 && e.inf < -0.99 && !e.exact);

    let outside = TimeSequence::harmonic_left(0.0);
    assert!(limsup_along(&f, &outside).is_err());
}

#[test]
fn property_examples() {
    let s = ResolutionSchedule::default();
    let box01 = FunctionOracle::piecewise(
        line(),
        PiecewisePoly::new(vec![0.0, 1.0], vec![Poly::constant(1.0)]).unwrap(),
    );
    assert_eq!(
        check_property(&box01, &Property::RightContinuousAt(0.0), &s)
            .unwrap()
            .outcome,
        Outcome::Holds
    );

    let v = check_property(&step_open(), &Property::RightContinuousAt(0.0), &s).unwrap();
    assert_eq!(
        v.witness,
        Some(Witness::Property {
            t: 0.0,
            eps: 1.0,
            s: 2f64.powi(-10),
            gap: 1.0
        })
    );

    let z = spike(4, 0.5).unwrap().to_oracle();
    assert_eq!(
        check_property(&z, &Property::Cadlag, &s).unwrap().outcome,
        Outcome::Holds
    );

    // a left-open jump is not cadlag
    let v = check_property(&step_open(), &Property::Cadlag, &s).unwrap();
    assert!(matches!(v.witness, Some(Witness::Jump { x, jump, .. }) if x == 0.0 && jump == 1.0));

    assert_eq!(
        check_property(&step_open(), &Property::LowerSC(0.0), &s)
            .unwrap()
            .outcome,
        Outcome::Holds
    );
    assert_eq!(
        check_property(&step_open(), &Property::UpperSC(0.0), &s)
            .unwrap()
            .outcome,
        Outcome::Fails
    );
    assert_eq!(
        check_property(&step_open(), &Property::LeftLimitAt(0.5), &s)
            .unwrap()
            .outcome,
        Outcome::Holds
    );
    assert_eq!(
        check_property(&step_open(), &Property::LocallyBounded, &s)
            .unwrap()
            .outcome,
        Outcome::Holds
    );

    let osc = FunctionOracle::closure(line(), |t| {
        if t < 1.0 {
            (1.0 / (1.0 - t)).sin()
        } else {
            0.0
        }
    });
    assert_eq!(
        check_property(&osc, &Property::LeftLimitAt(1.0), &s)
            .unwrap()
            .outcome,
        Outcome::Fails
    );
    let blow = FunctionOracle::closure(line(), |t| 1.0 / (t - 2.0));
    assert_eq!(
        check_property(&blow, &Property::LocallyBounded, &s)
            .unwrap()
            .outcome,
        Outcome::Fails
    );
}

#[test]
fn sampled_continuity_matches_exact() {
    let s = ResolutionSchedule::default();
    let exact = step_open();
    let sampled = FunctionOracle::closure(line(), move |t| if t > 0.0 { 1.0 } else { 0.0 });
    for p in [
        Property::ContinuousAt(0.0),
        Property::ContinuousAt(0.5),
        Property::RightContinuousAt(0.0),
    ] {
        assert_eq!(
            check_property(&exact, &p, &s).unwrap().outcome,
            check_property(&sampled, &p, &s).unwrap().outcome,
            "{p:?}"
        );
    }
}

fn exp_terms() -> SequenceFamily {
    let d = Domain::interval(0.0, 2.0);
    SequenceFamily::new("x^n/n!", d, move |n| {
        FunctionOracle::closure(d, move |x| term(n, x))
    })
    .with_value(term)
    .with_continuity(true)
}

fn term(n: usize, x: f64) -> f64 {
    static LN_FACT: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    let t = LN_FACT.get_or_init(|| {
        let mut v = vec![0.0f64; 2 * SERIES_CAP + 2];
        for k in 1..v.len() {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        v
    });
    if x == 0.0 {
        return (n == 0) as u8 as f64;
    }
    (n as f64 * x.ln() - t[n.min(t.len() - 1)]).exp()
}

fn coarse() -> ResolutionSchedule {
    ResolutionSchedule::coarse()
}

#[test]
fn normal_convergence_transfers() {
    let fam = exp_terms();
    let v = series_transfer(&fam, &SeriesMode::NormalConvergence, &coarse()).unwrap();
    assert_eq!(v.outcome, Outcome::Holds, "{v:?}");
    // partial sums (from n = 1) approach e^x - 1
    let sums = partial_sums("s", &fam, Arc::new(term), SERIES_CAP);
    for x in [0.0, 0.7, 2.0] {
        assert!((sums.value(SERIES_CAP, x) - (x.exp() - 1.0)).abs() < 1e-13);
    }
}

#[test]
fn abel_transfers_for_sine_series() {
    let d = Domain::interval(0.5, std::f64::consts::PI - 0.5);
    let fam = SequenceFamily::new("sin(nx)", d, move |n| {
        FunctionOracle::closure(d, move |x| (n as f64 * x).sin())
    })
    .with_value(|n, x| (n as f64 * x).sin());
    let eps = SequenceFamily::new("1/n", d, move |n| {
        FunctionOracle::closure(d, move |_| 1.0 / n as f64)
    })
    .with_value(|n, _| 1.0 / n as f64);
    // partial sums of sin(nx) stay below 1/sin(x/2) <= 1/sin(0.25)
    let bound = 1.0 / 0.25f64.sin();
    for x in [0.5, 1.0, 2.0, std::f64::consts::PI - 0.5] {
        let mut s = 0.0f64;
        for n in 1..=4096 {
            s += (n as f64 * x).sin();
            assert!(s.abs() <= bound + 1e-9);
        }
    }
    // tail of sum sin(nx)/n is of order 1/(N sin(x/2)): too slow for the finest eps at this range
    let v = series_transfer(&fam, &SeriesMode::Abel { eps }, &coarse()).unwrap();
    assert_eq!(v.outcome, Outcome::Inconclusive, "{v:?}");
    let sq = SequenceFamily::new("1/n^2", d, move |n| {
        FunctionOracle::closure(d, move |_| 1.0 / (n * n) as f64)
    })
    .with_value(|n, _| 1.0 / (n * n) as f64);
    let v = series_transfer(&fam, &SeriesMode::Abel { eps: sq }, &coarse()).unwrap();
    assert_eq!(v.outcome, Outcome::Holds, "{v:?}");
}

#[test]
fn self_domination_transfers() {
    let fam = by_name("scaled-bump-exp").unwrap();
    let mode = SeriesMode::Domination {
        reference: fam.clone(),
        k: Arc::new(|_| 1.0),
        n: Arc::new(|_| 0),
    };
    assert_eq!(
        series_transfer(&fam, &mode, &coarse()).unwrap().outcome,
        Outcome::Holds
    );

    let doubled = SequenceFamily::new("2f", fam.domain, |n| {
        by_name("scaled-bump-exp").unwrap().member(n)
    })
    .with_value(|n, t| {
        let n = n as f64;
        2.0 * n * t * (-n * t).exp()
    });
    let mode = SeriesMode::Domination {
        reference: doubled,
        k: Arc::new(|_| 1.0),
        n: Arc::new(|_| 0),
    };
    let v = series_transfer(&fam, &mode, &coarse()).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
}
