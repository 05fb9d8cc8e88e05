//! Built-in sequence families with ground-truth labels.

use crate::error::{LabError, Result};
use crate::funcspace::{
    Domain, FunctionOracle, Metadata, PiecewisePoly, Poly, SequenceFamily, SeriesOracle,
};
use crate::humps::{self, AlphaSchedule, PoissonKernel, SpikeSumParams};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Yes,
    No,
    Unknown,
}

#[derive(Clone)]
pub struct GroundTruth {
    pub pointwise_limit: Option<FunctionOracle>,
    pub sticky: Label,
    pub locally_uniform: Label,
    pub limit_continuous: Label,
    pub provenance: String,
}

/// Serializable view of a [`GroundTruth`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub pointwise: Label,
    pub sticky: Label,
    pub locally_uniform: Label,
    pub limit_continuous: Label,
    pub provenance: String,
}

impl fmt::Debug for GroundTruth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.labels().fmt(f)
    }
}

impl GroundTruth {
    pub fn unknown() -> Self {
        GroundTruth {
            pointwise_limit: None,
            sticky: Label::Unknown,
            locally_uniform: Label::Unknown,
            limit_continuous: Label::Unknown,
            provenance: String::new(),
        }
    }

    fn new(
        limit: Option<FunctionOracle>,
        sticky: Label,
        lu: Label,
        cont: Label,
        provenance: &str,
    ) -> Self {
        GroundTruth {
            pointwise_limit: limit,
            sticky,
            locally_uniform: lu,
            limit_continuous: cont,
            provenance: provenance.into(),
        }
    }

    pub fn pointwise(&self) -> Label {
        if self.pointwise_limit.is_some() {
            Label::Yes
        } else if self.sticky == Label::No
            && self.locally_uniform == Label::No
            && self.limit_continuous == Label::Unknown
        {
            Label::No
        } else {
            Label::Unknown
        }
    }

    pub fn labels(&self) -> Labels {
        Labels {
            pointwise: self.pointwise(),
            sticky: self.sticky,
            locally_uniform: self.locally_uniform,
            limit_continuous: self.limit_continuous,
            provenance: self.provenance.clone(),
        }
    }

    /// Locally uniform implies sticky implies a pointwise limit.
    pub fn is_consistent(&self) -> bool {
        !(self.locally_uniform == Label::Yes && self.sticky != Label::Yes)
            && !(self.sticky == Label::Yes && self.pointwise_limit.is_none())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpProfile {
    /// `x e^{-x}`
    Exp,
    /// hat on `[0, 2]` with peak 1 at 1
    Tent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    Zero,
    /// `min(t, 1)`
    Ramp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    /// `(3x^2 - 2x^4) e^{-x^2}`
    Builtin,
    /// `x e^{-x^2}`
    OddGaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum FamilySpec {
    ScaledBump {
        profile: BumpProfile,
    },
    PerturbedSignal {
        baseline: Baseline,
        terms: usize,
        ratio: f64,
    },
    PoissonSeries {
        kernel: KernelChoice,
    },
    HaarScaled {
        alpha: AlphaSchedule,
    },
    Spike {
        k: usize,
        t0: f64,
    },
    SpikeSum {
        i_max: usize,
        alpha: AlphaSchedule,
    },
    DirichletKernel {},
    IndicatorFront {},
    Custom {
        name: String,
    },
}

fn tent_at(a: f64, n: f64, height: f64) -> PiecewisePoly {
    PiecewisePoly::linear_interp(&[(a, 0.0), (a + 1.0 / n, height), (a + 2.0 / n, 0.0)])
        .expect("tent nodes increase")
}

/// Hat on `[0, 2]` with peak 1 at 1.
fn tent_value(x: f64) -> f64 {
    if x > 0.0 && x < 2.0 {
        1.0 - (x - 1.0).abs()
    } else {
        0.0
    }
}

fn ramp() -> PiecewisePoly {
    PiecewisePoly::new(
        vec![0.0, 1.0, f64::INFINITY],
        vec![Poly::linear(0.0, 1.0), Poly::constant(1.0)],
    )
    .expect("valid")
}

fn step_open_at_zero() -> PiecewisePoly {
    PiecewisePoly::new(vec![0.0, f64::INFINITY], vec![Poly::constant(1.0)])
        .expect("valid")
        .with_atoms(vec![(0.0, 0.0)])
}

fn pp(d: Domain, p: PiecewisePoly) -> FunctionOracle {
    FunctionOracle::piecewise(d, p)
}

const HORIZON: f64 = 16.0;

fn line() -> Domain {
    Domain::half_line(HORIZON)
}

fn zero_limit() -> FunctionOracle {
    pp(line(), PiecewisePoly::zero()).with_continuity(true)
}

pub fn make_family(spec: &FamilySpec) -> Result<SequenceFamily> {
    use Label::*;
    match spec {
        FamilySpec::ScaledBump { profile } => {
            let fam = match profile {
                BumpProfile::Exp => SequenceFamily::new("scaled-bump-exp", line(), |n| {
                    let n = n as f64;
                    FunctionOracle::closure(line(), move |t| n * t * (-n * t).exp())
                        .with_continuity(true)
                })
                .with_value(|n, t| {
                    let n = n as f64;
                    n * t * (-n * t).exp()
                }),
                BumpProfile::Tent => SequenceFamily::new("scaled-bump-tent", line(), |n| {
                    pp(line(), tent_at(0.0, n as f64, 1.0))
                }),
            };
            Ok(fam.with_continuity(true).with_label(GroundTruth::new(
                Some(zero_limit()),
                Yes,
                No,
                Yes,
                "scaled bump xi(nt), xi(0)=0, limit 0",
            )))
        }
        FamilySpec::PerturbedSignal {
            baseline,
            terms,
            ratio,
        } => {
            if !(ratio.abs() < 1.0) {
                return Err(LabError::InvalidInput(format!(
                    "sum |alpha_k| must be finite: need |ratio| < 1, got {ratio}"
                )));
            }
            if *terms == 0 {
                return Err(LabError::InvalidInput("need at least one hump term".into()));
            }
            let base = match baseline {
                Baseline::Zero => PiecewisePoly::zero(),
                Baseline::Ramp => ramp(),
            };
            let (k_max, r) = (*terms, *ratio);
            let b = base.clone();
            let fam = SequenceFamily::new("perturbed-signal", line(), move |n| {
                let mut f = b.clone();
                for k in 1..=k_max {
                    f = f.add(&tent_at(1.0 / k as f64, n as f64, r.powi(k as i32)));
                }
                let supports = (1..=k_max)
                    .map(|k| {
                        crate::funcspace::Interval::new(
                            1.0 / k as f64,
                            1.0 / k as f64 + 2.0 / n as f64,
                        )
                    })
                    .collect();
                let o = pp(line(), f);
                let meta = Metadata {
                    hump_supports: Some(supports),
                    continuous: Some(true),
                    tail_bound: r.abs().powi(k_max as i32),
                    ..o.meta.clone()
                };
                o.with_meta(meta)
            });
            let ramp_base = *baseline == Baseline::Ramp;
            let fam = fam.with_value(move |n, t| {
                let nf = n as f64;
                let mut v = if ramp_base && t >= 0.0 {
                    t.min(1.0)
                } else {
                    0.0
                };
                for k in 1..=k_max {
                    let x = nf * (t - 1.0 / k as f64);
                    if x > 0.0 && x < 2.0 {
                        v += r.powi(k as i32) * (1.0 - (x - 1.0).abs());
                    }
                }
                v
            });
            Ok(fam
                .with_continuity(true)
                .with_hints(vec![0.5, 1.0 / 3.0])
                .with_label(GroundTruth::new(
                    Some(pp(line(), base).with_continuity(true)),
                    Yes,
                    No,
                    Yes,
                    "baseline plus humps alpha_k xi_k(n(t - 1/k))",
                )))
        }
        FamilySpec::PoissonSeries { kernel } => {
            let k = match kernel {
                KernelChoice::Builtin => PoissonKernel::builtin(),
                KernelChoice::OddGaussian => PoissonKernel::odd_gaussian(),
            };
            Ok(poisson_family(
                Arc::new(k),
                *kernel == KernelChoice::OddGaussian,
            ))
        }
        FamilySpec::HaarScaled { alpha } => {
            let a = *alpha;
            Ok(
                SequenceFamily::new("haar-scaled", Domain::circle(), move |n| {
                    humps::haar_kernel(n, a.at(n)).to_oracle()
                })
                .with_continuity(false),
            )
        }
        FamilySpec::Spike { k, t0 } => {
            let z = humps::spike(*k, *t0)?;
            let f = z.to_oracle().with_continuity(true);
            let fam = SequenceFamily::new("spike", Domain::circle(), move |_| f.clone());
            let lim = z.to_oracle().with_continuity(true);
            Ok(fam.with_continuity(true).with_label(GroundTruth::new(
                Some(lim),
                Yes,
                Yes,
                Yes,
                "constant family: one spike",
            )))
        }
        FamilySpec::SpikeSum { i_max, alpha } => {
            let params = SpikeSumParams::defaults(*i_max, *alpha);
            let f = Arc::new(params.function()?);
            let a = *alpha;
            let fam = SequenceFamily::new("spike-sum", Domain::circle(), move |n| {
                humps::convolve_circle(&f, &humps::haar_kernel(n, a.at(n)))
                    .expect("within breakpoint cap")
                    .to_oracle()
            });
            let lim = FunctionOracle::closure(Domain::circle(), |_| 0.0).with_continuity(true);
            Ok(fam.with_continuity(true).with_label(GroundTruth::new(
                Some(lim),
                Yes,
                No,
                Yes,
                "R_n(f) = f * eta_n for a finite spike sum",
            )))
        }
        FamilySpec::DirichletKernel {} => {
            Ok(
                SequenceFamily::new("dirichlet-kernel", Domain::circle(), |n| {
                    FunctionOracle::closure(Domain::circle(), move |t| humps::dirichlet(n, t))
                        .with_continuity(true)
                })
                .with_value(humps::dirichlet)
                .with_continuity(true),
            )
        }
        FamilySpec::IndicatorFront {} => {
            let fam = SequenceFamily::new("indicator-front", line(), |n| {
                pp(
                    line(),
                    PiecewisePoly::new(
                        vec![1.0 / n as f64, f64::INFINITY],
                        vec![Poly::constant(1.0)],
                    )
                    .expect("valid"),
                )
            });
            Ok(fam.with_continuity(false).with_label(GroundTruth::new(
                Some(pp(line(), step_open_at_zero()).with_continuity(false)),
                No,
                No,
                No,
                "1_[1/n, inf) -> 1_(0, inf)",
            )))
        }
        FamilySpec::Custom { name } => custom(name),
    }
}

fn poisson_family(k: Arc<PoissonKernel>, odd: bool) -> SequenceFamily {
    let dom = Domain::interval(0.0, 4.0);
    let (k1, k2, k3, k4) = (k.clone(), k.clone(), k.clone(), k.clone());
    let fam = SequenceFamily::new("poisson-series", dom, move |n| {
        let kk = k1.clone();
        let kr = k1.clone();
        let s = SeriesOracle {
            term: Arc::new(move |j, t| kk.xi(j as f64 * t)),
            range: Arc::new(move |t| {
                let m = kr.active_terms(n, t) as i64;
                (-m, m)
            }),
        };
        let tail = k1.tail_bound(n);
        FunctionOracle::series(dom, s, tail).with_continuity(true)
    })
    .with_value(move |n, s| k2.partial(n, s))
    .with_batch(move |s, idx| k3.partials(s, idx))
    .with_continuity(true)
    .with_hints(vec![0.0]);
    let lim = FunctionOracle::closure(dom, move |s| k4.limit(s)).with_continuity(true);
    let (lu, prov) = if odd {
        (Label::Yes, "odd kernel: psi_N = 0")
    } else {
        (Label::No, "psi_N(t) = sum_{|n|<=N} xi(nt)")
    };
    fam.with_label(GroundTruth::new(
        Some(lim),
        Label::Yes,
        lu,
        Label::Yes,
        prov,
    ))
}

fn custom(name: &str) -> Result<SequenceFamily> {
    use Label::*;
    let fam = match name {
        "linear-shrink" => SequenceFamily::new(name, line(), |n| {
            pp(
                line(),
                PiecewisePoly::new(
                    vec![0.0, f64::INFINITY],
                    vec![Poly::linear(0.0, 1.0 / n as f64)],
                )
                .expect("valid"),
            )
        })
        .with_continuity(true)
        .with_label(GroundTruth::new(Some(zero_limit()), Yes, Yes, Yes, "t/n")),
        "single-hump" => SequenceFamily::new(name, line(), |n| {
            pp(line(), ramp().add(&tent_at(1.0, n as f64, 1.0)))
        })
        .with_value(|n, t| t.clamp(0.0, 1.0) + tent_value(n as f64 * (t - 1.0)))
        .with_continuity(true)
        .with_label(GroundTruth::new(
            Some(pp(line(), ramp()).with_continuity(true)),
            Yes,
            No,
            Yes,
            "min(t,1) + xi(n(t-1))",
        )),
        "ramp-front" => SequenceFamily::new(name, line(), |n| {
            let n = n as f64;
            let p = PiecewisePoly::new(
                vec![0.5 / n, 1.0 / n, f64::INFINITY],
                vec![Poly::linear(0.0, 2.0 * n), Poly::constant(1.0)],
            )
            .expect("valid");
            pp(line(), p)
        })
        .with_continuity(true)
        .with_label(GroundTruth::new(
            Some(pp(line(), step_open_at_zero()).with_continuity(false)),
            No,
            No,
            No,
            "continuous ramps -> 1_(0, inf)",
        )),
        "sin-oscillation" => SequenceFamily::new(name, line(), |n| {
            let n = n as f64;
            FunctionOracle::closure(line(), move |t| (n * t).sin()).with_continuity(true)
        })
        .with_value(|n, t| (n as f64 * t).sin())
        .with_continuity(true)
        .with_label(GroundTruth::new(None, No, No, Unknown, "sin(nt), no limit")),
        "spike-train" => SequenceFamily::new(name, line(), |n| {
            let n = n as f64;
            let w = 0.5 / (n * n);
            let c = 1.0 / n;
            let p = PiecewisePoly::linear_interp(&[(c - w, 0.0), (c, 1.0), (c + w, 0.0)])
                .expect("valid");
            let meta = Metadata {
                hump_supports: Some(vec![crate::funcspace::Interval::new(c - w, c + w)]),
                continuous: Some(true),
                ..Default::default()
            };
            let o = pp(line(), p);
            let meta = Metadata {
                breakpoint_hints: o.meta.breakpoint_hints.clone(),
                ..meta
            };
            o.with_meta(meta)
        })
        .with_value(|n, t| {
            let n = n as f64;
            (1.0 - (t - 1.0 / n).abs() * 2.0 * n * n).max(0.0)
        })
        .with_continuity(true)
        .with_label(GroundTruth::new(
            Some(zero_limit()),
            Yes,
            No,
            Yes,
            "unit spikes at 1/n, half-width 1/(2n^2)",
        )),
        "constant-family" => {
            let f0 = PiecewisePoly::new(
                vec![0.0, HORIZON],
                vec![Poly::new(vec![0.0, 0.25, -1.0 / 64.0])],
            )
            .expect("valid");
            let g = f0.clone();
            SequenceFamily::new(name, line(), move |_| pp(line(), g.clone()))
                .with_continuity(true)
                .with_label(GroundTruth::new(
                    Some(pp(line(), f0).with_continuity(true)),
                    Yes,
                    Yes,
                    Yes,
                    "f_n = t(16-t)/64",
                ))
        }
        "escaping-bump" => {
            SequenceFamily::new(name, line(), |n| pp(line(), tent_at(n as f64, 2.0, 1.0)))
                .with_value(|n, t| tent_value(2.0 * (t - n as f64)))
                .with_continuity(true)
                .with_label(GroundTruth::new(
                    Some(zero_limit()),
                    Yes,
                    Yes,
                    Yes,
                    "hat on [n, n+1]",
                ))
        }
        "sqrt-smoothing" => SequenceFamily::new(name, line(), |n| {
            let e = 1.0 / (n as f64 * n as f64);
            FunctionOracle::closure(line(), move |t| (t + e).sqrt()).with_continuity(true)
        })
        .with_value(|n, t| (t + 1.0 / (n as f64 * n as f64)).sqrt())
        .with_continuity(true)
        .with_label(GroundTruth::new(
            Some(FunctionOracle::closure(line(), |t: f64| t.max(0.0).sqrt()).with_continuity(true)),
            Yes,
            Yes,
            Yes,
            "sqrt(t + 1/n^2)",
        )),
        _ => return Err(LabError::UnknownFamily(name.to_string())),
    };
    Ok(fam)
}

fn custom_spec(name: &str) -> FamilySpec {
    FamilySpec::Custom { name: name.into() }
}

/// The labelled corpus used for validation.
pub fn catalog_list() -> Vec<(String, FamilySpec, GroundTruth)> {
    let specs = vec![
        (
            "scaled-bump-exp",
            FamilySpec::ScaledBump {
                profile: BumpProfile::Exp,
            },
        ),
        (
            "scaled-bump-tent",
            FamilySpec::ScaledBump {
                profile: BumpProfile::Tent,
            },
        ),
        (
            "perturbed-signal",
            FamilySpec::PerturbedSignal {
                baseline: Baseline::Ramp,
                terms: 40,
                ratio: 0.5,
            },
        ),
        ("single-hump", custom_spec("single-hump")),
        ("spike-train", custom_spec("spike-train")),
        ("linear-shrink", custom_spec("linear-shrink")),
        ("constant-family", custom_spec("constant-family")),
        ("escaping-bump", custom_spec("escaping-bump")),
        ("sqrt-smoothing", custom_spec("sqrt-smoothing")),
        ("indicator-front", FamilySpec::IndicatorFront {}),
        ("ramp-front", custom_spec("ramp-front")),
        ("sin-oscillation", custom_spec("sin-oscillation")),
        (
            "poisson-series",
            FamilySpec::PoissonSeries {
                kernel: KernelChoice::Builtin,
            },
        ),
    ];
    specs
        .into_iter()
        .map(|(name, spec)| {
            let fam = make_family(&spec).expect("built-in specs are valid");
            (name.to_string(), spec, fam.label)
        })
        .collect()
}

/// A built-in family by catalog name.
pub fn by_name(name: &str) -> Result<SequenceFamily> {
    let spec = catalog_list()
        .into_iter()
        .find(|(n, _, _)| n == name)
        .map(|(_, s, _)| s)
        .ok_or_else(|| LabError::UnknownFamily(name.to_string()))?;
    make_family(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_bump_member_value() {
        let f = make_family(&FamilySpec::ScaledBump {
            profile: BumpProfile::Exp,
        })
        .unwrap();
        assert!((f.member(4).eval(0.25) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn indicator_front_value() {
        let f = make_family(&FamilySpec::IndicatorFront {}).unwrap();
        assert_eq!(f.member(8).eval(0.1), 0.0);
        assert_eq!(f.member(8).eval(0.125), 1.0);
        let lim = f.label.pointwise_limit.as_ref().unwrap();
        assert_eq!(lim.eval(0.0), 0.0);
        assert_eq!(lim.eval(1e-300), 1.0);
    }

    #[test]
    fn labels_are_consistent_and_cover_required_names() {
        let list = catalog_list();
        assert!(list.len() >= 10);
        for (name, _, gt) in &list {
            assert!(gt.is_consistent(), "{name}");
        }
        let get = |n: &str| list.iter().find(|e| e.0 == n).map(|e| e.2.clone()).unwrap();
        assert_eq!(get("scaled-bump-exp").sticky, Label::Yes);
        assert_eq!(get("scaled-bump-exp").locally_uniform, Label::No);
        assert_eq!(get("indicator-front").limit_continuous, Label::No);
        assert_eq!(get("linear-shrink").locally_uniform, Label::Yes);
    }

    #[test]
    fn perturbed_signal_truncation_bound() {
        let full = make_family(&FamilySpec::PerturbedSignal {
            baseline: Baseline::Ramp,
            terms: 40,
            ratio: 0.5,
        })
        .unwrap();
        let cut = make_family(&FamilySpec::PerturbedSignal {
            baseline: Baseline::Ramp,
            terms: 10,
            ratio: 0.5,
        })
        .unwrap();
        for n in [1, 3, 17, 200] {
            let (a, b) = (full.member(n), cut.member(n));
            for k in 0..4000 {
                let t = k as f64 / 1000.0;
                assert!((a.eval(t) - b.eval(t)).abs() <= 2f64.powi(-10) + 1e-15);
            }
        }
    }

    #[test]
    fn family_spec_json_shape() {
        let s = FamilySpec::ScaledBump {
            profile: BumpProfile::Exp,
        };
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["kind"], "ScaledBump");
        assert_eq!(j["params"]["profile"], "exp");
        let back: FamilySpec = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn invalid_perturbed_ratio_is_rejected() {
        let r = make_family(&FamilySpec::PerturbedSignal {
            baseline: Baseline::Zero,
            terms: 5,
            ratio: 1.5,
        });
        assert!(matches!(r, Err(LabError::InvalidInput(m)) if m.contains("|ratio| < 1")));
    }
}
