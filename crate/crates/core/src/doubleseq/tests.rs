use super::*;
use crate::catalog::{by_name, catalog_list, Label};
use crate::error::LabError;
use crate::funcspace::{Domain, FunctionOracle, Outcome};
use proptest::prelude::*;

fn bump_grid() -> DoubleSequenceOracle {
    DoubleSequenceOracle::new(|i, j| {
        let x = i as f64 / j as f64;
        x * (-x).exp()
    })
}

fn near(cands: &[ClusterCandidate], y: f64, eps: f64) -> bool {
    cands.iter().any(|c| c.covers(y, eps))
}

#[test]
fn box_has_a_floor() {
    assert!(bump_grid().with_box(8, 256).is_err());
    assert!(bump_grid().with_box(16, 16).is_ok());
    assert!(ClusterPolicy {
        rows_min: 0,
        ..Default::default()
    }
    .validate()
    .is_err());
}

#[test]
fn cluster_examples() {
    let p = ClusterPolicy::default();
    let sigma = bump_grid();
    let e = cluster_evidence(&sigma, &p, 0.0)
        .unwrap()
        .expect("0 is a double cluster point");
    // row 1 sees (1/j) e^{-1/j} < 0.05 for every j > 20
    assert!(e.rows.contains(&(1, 128, 256)));
    assert!(cluster_evidence(&sigma, &p, (-1f64).exp())
        .unwrap()
        .is_none());
    let c = double_cluster_candidates(&sigma, &p).unwrap();
    assert!(
        near(&c, 0.0, p.eps) && !near(&c, (-1f64).exp(), p.eps),
        "{c:?}"
    );

    let c = double_cluster_candidates(&DoubleSequenceOracle::new(|_, _| 0.3), &p).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].value, 0.3);
}

#[test]
fn flat_examples() {
    let r = flat_on_edges(
        &DoubleSequenceOracle::new(|i, j| 1.0 / (i + j) as f64),
        |_| 0,
        0.05,
    )
    .unwrap();
    assert_eq!(r.verdict.outcome, Outcome::Holds);
    assert!((r.limit - 0.5 * (1.0 / 128.0 + 1.0 / 512.0)).abs() < 1e-15);

    let gauss = DoubleSequenceOracle::new(|i, j| (-((i as f64 - j as f64).powi(2))).exp());
    let r = flat_on_edges(&gauss, |_| 2, 0.02).unwrap();
    assert_eq!(r.verdict.outcome, Outcome::Holds);
    assert!(r.oscillation <= (-4f64).exp() && r.limit.abs() < 0.02);

    let tri = DoubleSequenceOracle::new(|i, j| if i < j { 1.0 } else { 0.0 });
    let r = flat_on_edges(&tri, |_| 1, 0.5).unwrap();
    match r.verdict.witness {
        Some(Witness::Oscillation { max, min }) => {
            assert!(max.0 < max.1 && min.0 > min.1 && max.2 - min.2 == 1.0)
        }
        w => panic!("{w:?}"),
    }
    assert!(matches!(
        flat_on_edges(&tri, |_| 1000, 0.5),
        Err(LabError::EmptyRegion(_))
    ));
    assert!(flat_on_edges(&tri, |k| 100 - k.min(100), 0.5).is_err());
}

#[test]
fn flat_limit_is_a_cluster_candidate() {
    let p = ClusterPolicy::default();
    let all = [
        DoubleSequenceOracle::new(|i, j| 1.0 / (i + j) as f64),
        DoubleSequenceOracle::new(|i, j| (-((i as f64 - j as f64).powi(2))).exp()),
        DoubleSequenceOracle::new(|_, _| -1.5),
        bump_grid(),
        DoubleSequenceOracle::new(|i, j| if i < j { 1.0 } else { 0.0 }),
    ];
    let mut flat = 0;
    for sigma in &all {
        let r = flat_on_edges(sigma, |_| 2, 0.05).unwrap();
        if r.verdict.outcome == Outcome::Holds {
            flat += 1;
            assert!(
                near(
                    &double_cluster_candidates(sigma, &p).unwrap(),
                    r.limit,
                    p.eps
                ),
                "{sigma:?}"
            );
        }
    }
    assert_eq!(flat, 3);
}

#[test]
fn hump_modulus_examples() {
    let s = ResolutionSchedule::default();
    let spikes = by_name("spike-train").unwrap();
    for x in [2.5 / s.n_max as f64, 0.01, 0.3] {
        assert_eq!(hump_modulus(&spikes, x, 0.0, &s).unwrap().rho, 0.0);
    }

    let sine = by_name("sin-oscillation").unwrap();
    let [w1, w2] = super::compact::windows_for_test(&s);
    for x in [0.37, 1.1, 5.0] {
        let h = hump_modulus(&sine, x, 0.0, &s).unwrap();
        let top = |w: &[usize]| {
            w.iter()
                .map(|&n| (n as f64 * x).sin().abs())
                .fold(0.0, f64::max)
        };
        assert_eq!(h.rho, top(&w1).min(top(&w2)));
        assert!(h.rho >= 0.99);
    }

    let d = Domain::half_line(16.0);
    let c = SequenceFamily::new("c", d, move |_| FunctionOracle::closure(d, |_| 0.7));
    assert_eq!(hump_modulus(&c, 3.0, 7.5, &s).unwrap().rho, 0.0);
    assert!(hump_modulus(&c, -1.0, 0.0, &s).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn subfamily_modulus_is_smaller(k in 1usize..7, r in 0usize..7, x in 0.01f64..4.0, t in 0.0f64..4.0) {
        let s = ResolutionSchedule::coarse();
        for name in ["sin-oscillation", "scaled-bump-exp", "spike-train"] {
            let f = by_name(name).unwrap();
            let full = hump_modulus(&f, x, t, &s).unwrap().rho;
            let sub = hump_modulus_sub(&f, x, t, &s, |n| n % k == r % k).unwrap().rho;
            prop_assert!(sub <= full + 1e-12);
        }
    }
}

#[test]
fn compactness_examples() {
    let s = ResolutionSchedule::default();
    let r = compactness_diagnostic(&by_name("scaled-bump-exp").unwrap(), &s).unwrap();
    assert_eq!(r.verdict.outcome, Outcome::Holds, "{r:?}");

    let r = compactness_diagnostic(&by_name("ramp-front").unwrap(), &s).unwrap();
    match r.verdict.witness {
        Some(Witness::Jump { x, jump, .. }) => assert!(x == 0.0 && jump > 0.99, "{jump}"),
        w => panic!("{w:?}"),
    }

    assert_eq!(
        compactness_diagnostic(&by_name("constant-family").unwrap(), &s)
            .unwrap()
            .verdict
            .outcome,
        Outcome::Holds
    );
    // sin(nt) has no pointwise limit away from 0
    let r = compactness_diagnostic(&by_name("sin-oscillation").unwrap(), &s).unwrap();
    assert_eq!(r.verdict.outcome, Outcome::Inconclusive, "{r:?}");

    let d = Domain::half_line(16.0);
    let bare = SequenceFamily::new("bare", d, move |_| FunctionOracle::closure(d, |_| 0.0));
    assert!(matches!(
        compactness_diagnostic(&bare, &s),
        Err(LabError::MissingMetadata(_))
    ));
    assert!(matches!(
        compactness_diagnostic(&by_name("indicator-front").unwrap(), &s),
        Err(LabError::Precondition(_))
    ));
}

fn sticky_continuous() -> Vec<SequenceFamily> {
    catalog_list()
        .into_iter()
        .filter(|(_, _, g)| g.sticky == Label::Yes && g.limit_continuous == Label::Yes)
        .map(|(name, _, _)| by_name(&name).unwrap())
        .filter(|f| f.members_continuous == Some(true))
        .collect()
}

#[test]
fn sticky_families_are_relatively_compact() {
    let s = ResolutionSchedule::coarse();
    for f in sticky_continuous() {
        let r = compactness_diagnostic(&f, &s).unwrap();
        assert_eq!(
            r.verdict.outcome,
            Outcome::Holds,
            "{}: {:?}",
            f.name,
            r.verdict
        );
    }
}

#[test]
fn sticky_limits_are_double_cluster_points() {
    let p = ClusterPolicy::default();
    for f in sticky_continuous() {
        let lim = f.label.pointwise_limit.clone().unwrap();
        let t = f.domain.lo;
        let tau = TimeSequence::from_fn(t, move |j| t + 1.0 / (j * j) as f64);
        let sigma = DoubleSequenceOracle::from_family(&f, &tau)
            .with_box(1024, 1024)
            .unwrap();
        let c = double_cluster_candidates(&sigma, &p).unwrap();
        assert!(near(&c, lim.eval(t), p.eps), "{}: {c:?}", f.name);
    }
}
