use sticky_lab::catalog::{by_name, catalog_list, Label};
use sticky_lab::convergence::{detect, replay, sticky_cauchy, Mode, ReplayTarget};
use sticky_lab::funcspace::{Outcome, ResolutionSchedule};

fn expected(l: Label) -> Option<Outcome> {
    match l {
        Label::Yes => Some(Outcome::Holds),
        Label::No => Some(Outcome::Fails),
        Label::Unknown => None,
    }
}

fn implies(a: Outcome, b: Outcome) -> bool {
    a != Outcome::Holds || b == Outcome::Holds
}

/// One row per family: (name, pointwise, sticky, locally uniform, cauchy).
/// name, pointwise, sticky, locally uniform, cauchy
type Row = (String, Option<Outcome>, Outcome, Option<Outcome>, Outcome);

fn matrix(sched: &ResolutionSchedule) -> Vec<Row> {
    catalog_list()
        .into_iter()
        .map(|(name, _, truth)| {
            let fam = by_name(&name).unwrap();
            let cauchy = sticky_cauchy(&fam, sched).unwrap();
            assert!(
                replay(
                    &cauchy,
                    &ReplayTarget::Family {
                        fam: &fam,
                        limit: None
                    }
                )
                .unwrap(),
                "{name}: cauchy replay"
            );
            let row = match &truth.pointwise_limit {
                Some(lim) => {
                    let v = detect(
                        &fam,
                        lim,
                        &[Mode::Pointwise, Mode::Sticky, Mode::LocallyUniform],
                        sched,
                    )
                    .unwrap();
                    for (m, verdict) in &v {
                        let ok = replay(
                            verdict,
                            &ReplayTarget::Family {
                                fam: &fam,
                                limit: Some(lim),
                            },
                        )
                        .unwrap();
                        assert!(ok, "{name} {m:?}: replay failed");
                    }
                    (
                        name.clone(),
                        Some(v[0].1.outcome),
                        v[1].1.outcome,
                        Some(v[2].1.outcome),
                        cauchy.outcome,
                    )
                }
                None => (name.clone(), None, cauchy.outcome, None, cauchy.outcome),
            };
            eprintln!("{row:?}");
            row
        })
        .collect()
}

#[test]
fn confusion_matrix_and_hierarchy() {
    let sched = ResolutionSchedule::default();
    let truth: Vec<_> = catalog_list().into_iter().map(|(n, _, g)| (n, g)).collect();
    assert!(truth.len() >= 10);
    let mut mismatches = Vec::new();
    for ((name, pw, st, lu, cauchy), (_, g)) in matrix(&sched).into_iter().zip(&truth) {
        assert!(g.is_consistent(), "{name}");
        if let (Some(pw), Some(lu)) = (pw, lu) {
            assert!(
                implies(lu, st) && implies(st, pw),
                "{name}: {lu:?} {st:?} {pw:?}"
            );
            assert_eq!(
                pw,
                Outcome::Holds,
                "{name}: pointwise against the labelled limit"
            );
        }
        if g.sticky == Label::Yes {
            assert_eq!(cauchy, st, "{name}: cauchy and sticky disagree");
        }
        for (what, got, label) in [
            ("sticky", Some(st), g.sticky),
            ("locally-uniform", lu, g.locally_uniform),
        ] {
            if let (Some(got), Some(want)) = (got, expected(label)) {
                if got != want {
                    mismatches.push(format!("{name} {what}: {got:?}, label {label:?}"));
                }
            }
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}
