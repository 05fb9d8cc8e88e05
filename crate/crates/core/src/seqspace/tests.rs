use super::*;
use proptest::prelude::*;

/// Weighted sum over the first 1100 terms plus a limsup read far out in the tail.
fn brute_norm(u: &TailedSequence) -> f64 {
    let head: f64 = (0..1100)
        .map(|k| 0.5f64.powi(k) * u.get(k as usize).abs())
        .sum();
    let far = u.prefix.len() + 100_000;
    head + (far..far + 256).map(|k| u.get(k).abs()).fold(0.0, f64::max)
}

fn tail() -> impl Strategy<Value = Tail> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|c| Tail::Constant { c }),
        prop::collection::vec(-3.0f64..3.0, 1..6)
            .prop_map(|pattern| Tail::EventuallyPeriodic { pattern }),
        (-0.9f64..0.9, -3.0f64..3.0)
            .prop_map(|(ratio, scale)| Tail::GeometricDecay { ratio, scale }),
        Just(Tail::ZeroTail),
    ]
}

fn seq() -> impl Strategy<Value = TailedSequence> {
    (prop::collection::vec(-3.0f64..3.0, 0..12), tail())
        .prop_map(|(prefix, tail)| TailedSequence { prefix, tail })
}

#[test]
fn norm_examples() {
    assert_eq!(ls_norm(&TailedSequence::unit(0)), 1.0);
    assert_eq!(ls_norm(&TailedSequence::constant(1.0)), 3.0);
    let g = TailedSequence::new(
        vec![],
        Tail::GeometricDecay {
            ratio: 0.5,
            scale: 1.0,
        },
    )
    .unwrap();
    assert!((ls_norm(&g) - 4.0 / 3.0).abs() < 1e-15);
    for n in 0..=40 {
        assert_eq!(ls_norm(&TailedSequence::unit(n)), 0.5f64.powi(n as i32));
    }
    assert_eq!(ls_norm(&TailedSequence::zero()), 0.0);
    assert!(TailedSequence::new(
        vec![],
        Tail::GeometricDecay {
            ratio: 1.0,
            scale: 1.0
        }
    )
    .is_err());
    assert!(TailedSequence::new(vec![], Tail::EventuallyPeriodic { pattern: vec![] }).is_err());
}

#[test]
fn json_schema() {
    let u: TailedSequence = serde_json::from_str(r#"{"prefix": [1.0, -2.0], "tail": {"kind": "eventually-periodic", "pattern": [1.0, 0.0]}}"#).unwrap();
    assert_eq!(u.get(5), 0.0);
    assert_eq!(u.get(4), 1.0);
    let z: TailedSequence =
        serde_json::from_str(r#"{"prefix": [], "tail": {"kind": "zero-tail"}}"#).unwrap();
    assert_eq!(z, TailedSequence::zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_matches_brute_force(u in seq()) {
        prop_assert!((ls_norm(&u) - brute_norm(&u)).abs() <= 1e-12 * (1.0 + ls_norm(&u)));
    }

    #[test]
    fn norm_axioms(u in seq(), v in seq(), lambda in -5.0f64..5.0) {
        let n = ls_norm(&u);
        prop_assert!(n >= 0.0);
        prop_assert_eq!(n == 0.0, (0..2000).all(|k| u.get(k) == 0.0));
        prop_assert!((ls_norm(&u.scaled(lambda)) - lambda.abs() * n).abs() <= 1e-12 * (1.0 + n));
        prop_assert!(ls_norm_lin(1.0, &u, 1.0, &v).unwrap() <= n + ls_norm(&v) + 1e-12);
    }

    #[test]
    fn coarser_than_sup_norm(u in seq()) {
        let s = u.sup_abs();
        let n = ls_norm(&u);
        prop_assert!(n <= 2.0 * s + u.limsup_abs() + 1e-12);
        prop_assert!(n <= 3.0 * s + 1e-12);
    }

    #[test]
    fn shift_at_most_doubles(u in seq()) {
        prop_assert!(ls_norm(&u.shift()) <= 2.0 * ls_norm(&u) + 1e-12);
        prop_assert_eq!(u.shift().limsup_abs(), u.limsup_abs());
        for k in 0..40 {
            prop_assert!((u.shift().get(k) - u.get(k + 1)).abs() <= 1e-15 * (1.0 + u.get(k + 1).abs()));
        }
    }
}

#[test]
fn e_n_is_strictly_coarser_evidence() {
    // ||e_n||_s -> 0 while sup |e_n| = 1
    let e = TailedSequence::unit(30);
    assert_eq!(e.sup_abs(), 1.0);
    assert!(ls_norm(&e) < 1e-9);
}

fn front(n: usize) -> TailedSequence {
    TailedSequence {
        prefix: vec![0.0; n],
        tail: Tail::Constant { c: 1.0 },
    }
}

fn ones(n: usize) -> TailedSequence {
    TailedSequence {
        prefix: vec![1.0; n],
        tail: Tail::ZeroTail,
    }
}

#[test]
fn cauchy_examples() {
    let s = seq_schedule();
    let v = ls_cauchy(&TailedSequence::unit, &s).unwrap();
    assert_eq!(v.outcome, Outcome::Holds, "{v:?}");
    let v = ls_cauchy(&front, &s).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
    match v.witness {
        Some(Witness::Stagnation { values, .. }) => assert!(values.iter().all(|&(_, x)| x >= 1.0)),
        w => panic!("{w:?}"),
    }
    let u0 = TailedSequence::new(
        vec![0.3, -1.0],
        Tail::EventuallyPeriodic {
            pattern: vec![2.0, -2.0, 0.5],
        },
    )
    .unwrap();
    let v = ls_cauchy(&move |_| u0.clone(), &s).unwrap();
    assert_eq!(v.outcome, Outcome::Holds);
    assert!(ls_cauchy(&front, &ResolutionSchedule::default()).is_err());
}

#[test]
fn closedness_examples() {
    let s = seq_schedule();
    let v = closedness_probe(
        Space::C0,
        &TailedSequence::unit,
        &TailedSequence::zero(),
        &s,
    )
    .unwrap();
    assert_eq!(v.outcome, Outcome::Holds);

    let v = closedness_probe(Space::C0, &ones, &TailedSequence::constant(1.0), &s).unwrap();
    assert_eq!(v.outcome, Outcome::Fails);
    assert!(matches!(&v.witness, Some(Witness::Note(m)) if m.starts_with("not an l_s limit")));

    let g = TailedSequence::new(
        vec![],
        Tail::GeometricDecay {
            ratio: 0.5,
            scale: 1.0,
        },
    )
    .unwrap();
    let trunc = |n: usize| TailedSequence {
        prefix: (0..n).map(|k| 0.5f64.powi(k as i32)).collect(),
        tail: Tail::ZeroTail,
    };
    assert_eq!(
        closedness_probe(Space::Lp(2.0), &trunc, &g, &s)
            .unwrap()
            .outcome,
        Outcome::Holds
    );

    let alt = |n: usize| TailedSequence {
        prefix: vec![0.0; n],
        tail: Tail::EventuallyPeriodic {
            pattern: vec![1.0, -1.0],
        },
    };
    assert!(matches!(
        closedness_probe(Space::C, &alt, &TailedSequence::zero(), &s),
        Err(LabError::Precondition(_))
    ));
    assert!(
        Space::C.contains(&front(3))
            && !Space::C0.contains(&front(3))
            && Space::Lp(f64::INFINITY).contains(&front(3))
    );
}

struct LimitOfConvergent;

impl BanachLimit for LimitOfConvergent {
    fn apply(&self, u: &TailedSequence) -> f64 {
        u.get(1 << 20)
    }
}

#[test]
fn banach_limit_contract() {
    let l = LimitOfConvergent;
    assert!(satisfies_contract(&l, &front(5), 1e-12));
    let g = TailedSequence::new(
        vec![4.0],
        Tail::GeometricDecay {
            ratio: -0.5,
            scale: 1.0,
        },
    )
    .unwrap();
    assert!(satisfies_contract(&l, &g, 1e-12));
    // evaluation at one far index is not shift invariant on oscillating sequences
    let alt = TailedSequence::new(
        vec![],
        Tail::EventuallyPeriodic {
            pattern: vec![1.0, -1.0],
        },
    )
    .unwrap();
    assert!(!satisfies_contract(&l, &alt, 1e-12));
}
