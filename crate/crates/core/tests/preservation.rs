use sticky_lab::catalog::{by_name, catalog_list, Label};
use sticky_lab::convergence::detect_sticky;
use sticky_lab::funcspace::{
    Certificate, FunctionOracle, Outcome, ResolutionSchedule, SequenceFamily, Window,
};
use sticky_lab::functionals::{check_property, limsup_along, upcrossings, Property, TimeSequence};
use sticky_lab::humps::{convolve_circle, haar_kernel, AlphaSchedule, SpikeSumParams};

/// Sticky-Holds catalog families with their limit and certificate entries.
fn sticky_families(
    sched: &ResolutionSchedule,
) -> Vec<(SequenceFamily, FunctionOracle, Certificate)> {
    catalog_list()
        .into_iter()
        .filter(|(_, _, g)| g.sticky == Label::Yes)
        .map(|(name, _, g)| {
            let fam = by_name(&name).unwrap();
            let lim = g.pointwise_limit.unwrap();
            let v = detect_sticky(&fam, &lim, sched).unwrap();
            assert_eq!(v.outcome, Outcome::Holds, "{name}");
            (fam, lim, v.certificate.unwrap())
        })
        .collect()
}

/// Offsets of the built-in time sequences: right, left and alternating approach.
const SHAPES: [fn(usize) -> f64; 3] = [
    |k| 1.0 / k as f64,
    |k| -1.0 / k as f64,
    |k| if k % 2 == 0 { 1.0 } else { -1.0 } / k as f64,
];

fn thin<T: Copy>(v: &[T], keep: usize) -> Vec<T> {
    let step = v.len().div_ceil(keep).max(1);
    v.iter().step_by(step).copied().collect()
}

#[test]
fn preservation_suite() {
    let sched = ResolutionSchedule::default();
    for (fam, lim, cert) in sticky_families(&sched) {
        let name = &fam.name;
        let grid = fam
            .domain
            .probes(sched.probe_density, sched.horizon, &fam.hints);

        // closedness of continuity and the other labelled properties of the limit
        if fam.label.limit_continuous == Label::Yes {
            for &t in &grid {
                let v = check_property(&lim, &Property::ContinuousAt(t), &sched).unwrap();
                assert_eq!(v.outcome, Outcome::Holds, "{name}: limit continuity at {t}");
            }
        }
        for p in [Property::Cadlag, Property::LocallyBounded] {
            assert_eq!(
                check_property(&lim, &p, &sched).unwrap().outcome,
                Outcome::Holds,
                "{name}: {p:?}"
            );
        }

        // S_tau continuity: tail of tau inside the certified window of f_n
        let Certificate::Sticky(entries) = cert else {
            panic!("{name}: not a sticky certificate")
        };
        let mut checked = 0;
        for e in &entries {
            for &(n, eta) in &thin(&e.etas, 4) {
                for shape in SHAPES {
                    let (t, r) = (e.t, 0.5 * eta);
                    let tau = TimeSequence::from_fn(t, move |k| t + r * shape(k))
                        .with_truncation(256, 64);
                    if (1..=256).any(|k| !fam.domain.contains(tau.term(k))) {
                        continue;
                    }
                    let (a, b) = (
                        limsup_along(&fam.member(n), &tau).unwrap(),
                        limsup_along(&lim, &tau).unwrap(),
                    );
                    assert!(
                        (a.sup - b.sup).abs() <= e.eps && (a.inf - b.inf).abs() <= e.eps,
                        "{name}: S_tau at t = {t}, n = {n}, eps = {}",
                        e.eps
                    );
                    checked += 1;
                }
            }
        }

        eprintln!(
            "{name}: {checked} S_tau checks over {} entries",
            entries.len()
        );
        assert!(checked > 0, "{name}");

        // lower semicontinuity of the up-crossing count
        let w = Window::closed(fam.domain.lo, fam.domain.hi.min(fam.domain.lo + 4.0));
        let idx: Vec<usize> = thin(
            &sched
                .indices()
                .into_iter()
                .filter(|&n| n >= sched.n_max / 2)
                .collect::<Vec<_>>(),
            4,
        );
        let levels = [-0.75, -0.25, 0.0, 0.1, 0.3, 0.5, 0.9, 1.5];
        for (i, &a) in levels.iter().enumerate() {
            for &b in &levels[i + 1..] {
                let lower = upcrossings(&lim, a, b, &w, &sched).unwrap();
                let members = idx
                    .iter()
                    .map(|&n| upcrossings(&fam.member(n), a, b, &w, &sched).unwrap())
                    .min()
                    .unwrap();
                assert!(
                    lower <= members,
                    "{name}: N^({a},{b}) of the limit {lower} > {members}"
                );
            }
        }
    }
}

#[test]
fn exact_limsup_for_piecewise_families() {
    let fam = by_name("indicator-front").unwrap();
    let lim = fam.label.pointwise_limit.clone().unwrap();
    let tau = TimeSequence::harmonic(0.0);
    let s = limsup_along(&lim, &tau).unwrap();
    assert!(s.exact && s.sup == 1.0 && s.inf == 1.0);
    // pointwise but not sticky: S_tau(f_n) = 0 for every n while S_tau(f) = 1
    for n in [1, 16, 1 << 12] {
        assert_eq!(limsup_along(&fam.member(n), &tau).unwrap().sup, 0.0);
    }
}

#[test]
fn upcrossings_of_spike_sum_convolutions_grow() {
    let alpha = AlphaSchedule::NOverLog;
    let f = SpikeSumParams::defaults(4, alpha).function().unwrap();
    let sched = ResolutionSchedule::default();
    let w = Window {
        lo: 0.0,
        hi: 1.0,
        lo_closed: true,
        hi_closed: false,
    };
    let mut running = 0;
    let mut profile = Vec::new();
    for n in [4, 8, 16, 32, 64] {
        let c = convolve_circle(&f, &haar_kernel(n, alpha.at(n))).unwrap();
        running = running.max(upcrossings(&c.to_oracle(), -0.1, 0.1, &w, &sched).unwrap());
        profile.push(running);
    }
    eprintln!("running max of N^(-0.1, 0.1): {profile:?}");
    assert!(
        profile.windows(2).all(|p| p[0] <= p[1]) && profile[4] > profile[0],
        "{profile:?}"
    );
}
