use super::*;
use crate::catalog::{by_name, GroundTruth, Label};
use crate::funcspace::{Domain, Interval, Metadata, PiecewisePoly, Poly};
use crate::humps::spike;

fn sched() -> ResolutionSchedule {
    ResolutionSchedule::default()
}

fn line() -> Domain {
    Domain::half_line(16.0)
}

fn zero() -> FunctionOracle {
    FunctionOracle::piecewise(line(), PiecewisePoly::zero())
}

fn step_open() -> FunctionOracle {
    let p = PiecewisePoly::new(vec![0.0, f64::INFINITY], vec![Poly::constant(1.0)])
        .unwrap()
        .with_atoms(vec![(0.0, 0.0)]);
    FunctionOracle::piecewise(line(), p)
}

fn limit_of(name: &str) -> (SequenceFamily, FunctionOracle) {
    let f = by_name(name).unwrap();
    let l = f.label.pointwise_limit.clone().unwrap();
    (f, l)
}

fn replays(v: &Verdict, fam: &SequenceFamily, limit: Option<&FunctionOracle>) {
    assert!(
        replay(v, &ReplayTarget::Family { fam, limit }).unwrap(),
        "{v:?}"
    );
}

#[test]
fn classify_thresholds() {
    let idx = [1, 2, 4, 8, 16, 32, 64];
    assert_eq!(
        classify(&idx, &[true, true, false, false, false, false, false], 32),
        Classification::Holds(4)
    );
    assert_eq!(
        classify(&idx, &[false, false, false, false, true, true, true], 32),
        Classification::Fails
    );
    // transient violations near n_max that vanish past it stay open
    assert_eq!(
        classify(&idx, &[false, false, false, false, true, true, false], 32),
        Classification::Open
    );
}

#[test]
fn pointwise_examples() {
    let (f, l) = limit_of("linear-shrink");
    let v = detect_pointwise(&f, &l, &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Holds);
    replays(&v, &f, Some(&l));

    let f = by_name("indicator-front").unwrap();
    let v = detect_pointwise(&f, &step_open(), &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Holds);
    replays(&v, &f, Some(&step_open()));

    let v = detect_pointwise(&f, &zero(), &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
    match v.witness.as_ref().unwrap() {
        Witness::Pointwise { violations, .. } => assert!(violations.iter().all(|&(_, g)| g == 1.0)),
        w => panic!("{w:?}"),
    }
    replays(&v, &f, Some(&zero()));
}

#[test]
fn sticky_examples() {
    let (f, l) = limit_of("scaled-bump-exp");
    let v = detect_sticky(&f, &l, &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Holds);
    replays(&v, &f, Some(&l));

    let f = by_name("indicator-front").unwrap();
    let v = detect_sticky(&f, &step_open(), &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
    match v.witness.as_ref().unwrap() {
        Witness::Window { t, points, .. } => {
            assert_eq!(*t, 0.0);
            assert_eq!(points.len(), sched().eta_ladder.len());
            assert!(points
                .iter()
                .all(|p| p.gap == 1.0 && p.s > 0.0 && p.s < 1.0 / p.n as f64));
        }
        w => panic!("{w:?}"),
    }
    replays(&v, &f, Some(&step_open()));
}

#[test]
fn locally_uniform_examples() {
    let (f, l) = limit_of("linear-shrink");
    let v = detect_locally_uniform(&f, &l, &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Holds);
    replays(&v, &f, Some(&l));

    let (f, l) = limit_of("scaled-bump-exp");
    let v = detect_locally_uniform(&f, &l, &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
    match v.witness.as_ref().unwrap() {
        Witness::Window { t, eps, points, .. } => {
            assert_eq!((*t, *eps), (0.0, 0.1));
            let e1 = (-1f64).exp();
            assert!(
                points
                    .iter()
                    .all(|p| p.gap <= e1 + 1e-15 && p.gap > e1 - 1e-3),
                "{points:?}"
            );
        }
        w => panic!("{w:?}"),
    }
    replays(&v, &f, Some(&l));

    let (f, l) = limit_of("single-hump");
    let v = detect_locally_uniform(&f, &l, &sched()).unwrap();
    match v.witness.as_ref().unwrap() {
        Witness::Window { t, points, .. } => {
            assert_eq!(*t, 1.0);
            assert!(points.iter().all(|p| p.gap == 1.0));
        }
        w => panic!("{w:?}"),
    }
    replays(&v, &f, Some(&l));
}

#[test]
fn cauchy_examples() {
    let f = by_name("scaled-bump-exp").unwrap();
    let v = sticky_cauchy(&f, &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Holds);
    replays(&v, &f, None);

    let f = by_name("indicator-front").unwrap();
    let v = sticky_cauchy(&f, &sched()).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
    match v.witness.as_ref().unwrap() {
        Witness::Cauchy { t, points, .. } => {
            assert_eq!(*t, 0.0);
            assert!(points.iter().all(|(p, m)| p.gap == 1.0 && *m > p.n));
        }
        w => panic!("{w:?}"),
    }
    replays(&v, &f, None);

    let f = by_name("constant-family").unwrap();
    let v = sticky_cauchy(&f, &sched()).unwrap();
    match v.certificate.as_ref().unwrap() {
        Certificate::Cauchy { entries, .. } => assert!(entries.iter().all(|e| e.n_threshold == 1)),
        c => panic!("{c:?}"),
    }
}

#[test]
fn domain_mismatch_is_an_error() {
    let f = by_name("linear-shrink").unwrap();
    let other = FunctionOracle::piecewise(Domain::interval(0.0, 4.0), PiecewisePoly::zero());
    assert!(matches!(
        detect_sticky(&f, &other, &sched()),
        Err(crate::LabError::DomainMismatch(_))
    ));
}

#[test]
fn neighbourhood_examples() {
    let s = sched();
    let id = FunctionOracle::piecewise(
        line(),
        PiecewisePoly::new(vec![0.0, f64::INFINITY], vec![Poly::linear(0.0, 1.0)]).unwrap(),
    );
    let nb = NeighbourhoodSpec::new(zero(), vec![0.0], 0.1).unwrap();
    let v = neighbourhood_contains(&nb, &id, &s).unwrap();
    assert_eq!(
        v.certificate,
        Some(Certificate::Neighbourhood(vec![(0.0, 0.0625)]))
    );
    assert!(replay(
        &v,
        &ReplayTarget::Pair {
            f: &nb.base,
            g: &id,
            eps: 0.1
        }
    )
    .unwrap());

    let nb = NeighbourhoodSpec::new(zero(), vec![0.0], 0.5).unwrap();
    let v = neighbourhood_contains(&nb, &step_open(), &s).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
    assert!(replay(
        &v,
        &ReplayTarget::Pair {
            f: &nb.base,
            g: &step_open(),
            eps: 0.5
        }
    )
    .unwrap());

    // the spike's support [0.25, 0.75] misses (-1/4, 1/4) as well as (-1/8, 1/8)
    let z = spike(4, 0.5).unwrap().to_oracle();
    let c0 = FunctionOracle::closure(Domain::circle(), |_| 0.0);
    let nb = NeighbourhoodSpec::new(c0, vec![0.0], 0.1).unwrap();
    let v = neighbourhood_contains(&nb, &z, &s).unwrap();
    assert_eq!(
        v.certificate,
        Some(Certificate::Neighbourhood(vec![(0.0, 0.25)]))
    );
    assert!(NeighbourhoodSpec::new(zero(), vec![0.0], 0.0).is_err());
}

fn zero_reference() -> SequenceFamily {
    SequenceFamily::new("zero", line(), |_| zero()).with_label(GroundTruth {
        pointwise_limit: Some(zero()),
        sticky: Label::Yes,
        locally_uniform: Label::Yes,
        limit_continuous: Label::Yes,
        provenance: String::new(),
    })
}

fn hump_family(support: fn(usize) -> (f64, f64)) -> SequenceFamily {
    SequenceFamily::new("humps", line(), move |n| {
        let (a, b) = support(n);
        let p = PiecewisePoly::linear_interp(&[(a, 0.0), (0.5 * (a + b), 1.0), (b, 0.0)]).unwrap();
        FunctionOracle::piecewise(line(), p).with_meta(Metadata {
            hump_supports: Some(vec![Interval::new(a, b)]),
            ..Default::default()
        })
    })
}

#[test]
fn eventual_equality_examples() {
    let s = sched();
    let r = zero_reference();
    let escaping = hump_family(|n| (n as f64, n as f64 + 1.0));
    let v = eventual_equality_transfer(&escaping, &r, &zero(), &s).unwrap();
    assert_eq!(v.outcome, Outcome::Holds);
    replays(&v, &escaping, None);

    let shrinking = hump_family(|n| (1.0 / (n as f64 + 1.0), 1.0 / n as f64));
    let v = eventual_equality_transfer(&shrinking, &r, &zero(), &s).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
    assert!(matches!(v.witness, Some(Witness::Accumulation { t, .. }) if t == 0.0));
    replays(&v, &shrinking, None);

    let same = SequenceFamily::new("same", line(), |_| {
        zero().with_meta(Metadata {
            hump_supports: Some(vec![]),
            ..Default::default()
        })
    });
    assert_eq!(
        eventual_equality_transfer(&same, &r, &zero(), &s)
            .unwrap()
            .outcome,
        Outcome::Holds
    );

    let bare = SequenceFamily::new("bare", line(), |_| zero());
    assert!(matches!(
        eventual_equality_transfer(&bare, &r, &zero(), &s),
        Err(crate::LabError::MissingMetadata(_))
    ));
    let not_lu = by_name("scaled-bump-tent").unwrap();
    assert!(matches!(
        eventual_equality_transfer(&same, &not_lu, &zero(), &s),
        Err(crate::LabError::Precondition(_))
    ));
}
