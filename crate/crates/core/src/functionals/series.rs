use super::{check_property, Property};
use crate::convergence::sticky_cauchy;
use crate::error::{LabError, Result};
use crate::funcspace::{
    neumaier_sum, Certificate, FunctionOracle, Outcome, RealFn, ResolutionSchedule, SequenceFamily,
    Verdict, Witness,
};
use std::sync::Arc;

/// Terms beyond this index are not summed; `S_N = S_CAP` for `N > CAP`.
pub const SERIES_CAP: usize = 1 << 12;

pub enum SeriesMode {
    /// `sum |f_n|` converges sticky to a continuous function.
    NormalConvergence,
    /// `sum eps_n f_n` with bounded partial sums of `f_n` and `eps_n` of sticky-bounded variation.
    Abel { eps: SequenceFamily },
    /// `|g_p - g_q| <= K |f_p - f_q|` for `p, q > N(x)`; the conclusion is about `g`.
    Domination {
        reference: SequenceFamily,
        k: RealFn,
        n: Arc<dyn Fn(f64) -> usize + Send + Sync>,
    },
}

type TermFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// `N -> sum_{n <= min(N, cap)} term(n, s)`, with a batch path that shares one running sum.
pub fn partial_sums(name: &str, fam: &SequenceFamily, term: TermFn, cap: usize) -> SequenceFamily {
    let dom = fam.domain;
    let (t1, t2, t3) = (term.clone(), term.clone(), term);
    let value = move |t: &TermFn, n: usize, s: f64| neumaier_sum((1..=n.min(cap)).map(|k| t(k, s)));
    SequenceFamily::new(name, dom, move |n| {
        let t = t1.clone();
        FunctionOracle::closure(dom, move |s| value(&t, n, s))
    })
    .with_value(move |n, s| value(&t2, n, s))
    .with_batch(move |s, idx| {
        let top = idx.iter().copied().max().unwrap_or(0).min(cap);
        let mut run = Vec::with_capacity(top + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        run.push(0.0);
        for k in 1..=top {
            let x = t3(k, s);
            let t = sum + x;
            comp += if sum.abs() >= x.abs() {
                (sum - t) + x
            } else {
                (x - t) + sum
            };
            sum = t;
            run.push(sum + comp);
        }
        idx.iter().map(|&n| run[n.min(top)]).collect()
    })
    .with_continuity(fam.members_continuous.unwrap_or(false))
}

/// The schedule the transfer rules run on: indices stay below the summation cap.
fn series_schedule(sched: &ResolutionSchedule) -> ResolutionSchedule {
    ResolutionSchedule {
        n_max: sched.n_max.min(SERIES_CAP / 4),
        m_max: SERIES_CAP,
        ..sched.clone()
    }
}

/// Sticky-Cauchy plus continuity of the capped limit at every probe.
fn converges_to_continuous(
    fam: &SequenceFamily,
    sched: &ResolutionSchedule,
) -> Result<std::result::Result<(), Verdict>> {
    let v = sticky_cauchy(fam, sched)?;
    if v.outcome != Outcome::Holds {
        return Ok(Err(v));
    }
    let f = fam.clone();
    let lim = FunctionOracle::closure(fam.domain, move |s| f.value(SERIES_CAP, s));
    for t in fam
        .domain
        .probes(sched.probe_density, sched.horizon, &fam.hints)
    {
        let c = check_property(&lim, &Property::ContinuousAt(t), sched)?;
        if c.outcome != Outcome::Holds {
            return Ok(Err(c));
        }
    }
    Ok(Ok(()))
}

fn relabel(v: Verdict, what: &str) -> Verdict {
    match v.outcome {
        Outcome::Fails => {
            let w = v
                .witness
                .clone()
                .map(|w| format!("{what}: {w:?}"))
                .unwrap_or_else(|| what.into());
            Verdict {
                witness: Some(Witness::Note(w)),
                ..v
            }
        }
        _ => v,
    }
}

/// Checks the hypotheses of a transfer rule, then verifies its conclusion on the
/// transformed family: sticky-Cauchy and a continuous limit.
pub fn series_transfer(
    fam: &SequenceFamily,
    mode: &SeriesMode,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    sched.validate()?;
    let ss = series_schedule(sched);
    let probes = fam.domain.probes(ss.probe_density, ss.horizon, &fam.hints);
    let f = fam.clone();
    let transformed = match mode {
        SeriesMode::NormalConvergence => {
            let g = f.clone();
            let abs = partial_sums(
                "sum |f_n|",
                fam,
                Arc::new(move |k, s| g.value(k, s).abs()),
                SERIES_CAP,
            );
            if let Err(v) = converges_to_continuous(&abs, &ss)? {
                return Ok(relabel(
                    v,
                    "sum |f_n| does not converge sticky to a continuous function",
                ));
            }
            partial_sums(
                "sum f_n",
                fam,
                Arc::new(move |k, s| f.value(k, s)),
                SERIES_CAP,
            )
        }
        SeriesMode::Abel { eps } => {
            if eps.domain != fam.domain {
                return Err(LabError::DomainMismatch(
                    "eps family and terms differ in domain".into(),
                ));
            }
            let g = f.clone();
            let plain = partial_sums(
                "sum f_n",
                fam,
                Arc::new(move |k, s| g.value(k, s)),
                SERIES_CAP,
            );
            let idx: Vec<usize> = (1..=SERIES_CAP).collect();
            for &x in &probes {
                let sums = plain.evaluator(&idx).values(x);
                let early = sums[..SERIES_CAP / 2]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                let late = sums[SERIES_CAP / 2..]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                if !(late <= 2.0 * early + 1.0) {
                    return Ok(Verdict::fails(
                        Witness::Unbounded {
                            x,
                            early_max: early,
                            late_max: late,
                        },
                        sched,
                    ));
                }
                let e_last = eps.value(SERIES_CAP, x).abs();
                let floor = ss.eps_ladder.iter().copied().fold(f64::INFINITY, f64::min);
                if !(e_last < floor) {
                    return Ok(Verdict::fails(
                        Witness::Note(format!("|eps_{SERIES_CAP}({x})| = {e_last:e} is not below {floor:e}: eps_n does not tend to 0")),
                        sched,
                    ));
                }
            }
            let (e1, e2) = (eps.clone(), eps.clone());
            let var = partial_sums(
                "sum |eps_{n+1} - eps_n|",
                eps,
                Arc::new(move |k, s| (e1.value(k + 1, s) - e1.value(k, s)).abs()),
                SERIES_CAP,
            );
            if let Err(v) = converges_to_continuous(&var, &ss)? {
                return Ok(relabel(
                    v,
                    "sum |eps_{n+1} - eps_n| does not converge sticky to a continuous function",
                ));
            }
            partial_sums(
                "sum eps_n f_n",
                fam,
                Arc::new(move |k, s| e2.value(k, s) * f.value(k, s)),
                SERIES_CAP,
            )
        }
        SeriesMode::Domination { reference, k, n } => {
            if reference.domain != fam.domain {
                return Err(LabError::DomainMismatch(
                    "reference and terms differ in domain".into(),
                ));
            }
            if let Err(v) = converges_to_continuous(fam, &ss)? {
                return Ok(relabel(
                    v,
                    "f_n does not converge sticky to a continuous function",
                ));
            }
            let mut idx = ss.indices();
            idx.extend(ss.extension_indices());
            for &x in &probes {
                let kx = k(x);
                if !kx.is_finite() {
                    return Ok(Verdict::fails(
                        Witness::Unbounded {
                            x,
                            early_max: 0.0,
                            late_max: kx,
                        },
                        sched,
                    ));
                }
                let n0 = n(x);
                let tail: Vec<usize> = idx.iter().copied().filter(|&p| p > n0).collect();
                let fv: Vec<f64> = tail.iter().map(|&p| fam.value(p, x)).collect();
                let gv: Vec<f64> = tail.iter().map(|&p| reference.value(p, x)).collect();
                for i in 0..tail.len() {
                    for j in i + 1..tail.len() {
                        let (dg, df) = ((gv[i] - gv[j]).abs(), (fv[i] - fv[j]).abs());
                        if dg > kx * df + 1e-12 {
                            return Ok(Verdict::fails(
                                Witness::Note(format!(
                                    "|g_{p} - g_{q}|({x}) = {dg:e} > K({x}) |f_{p} - f_{q}|({x}) = {:e}",
                                    kx * df,
                                    p = tail[i],
                                    q = tail[j]
                                )),
                                sched,
                            ));
                        }
                    }
                }
            }
            reference.clone()
        }
    };
    match converges_to_continuous(&transformed, &ss)? {
        Ok(()) => Ok(Verdict::holds(
            Certificate::Note(format!(
                "hypotheses hold; {} converges sticky to a continuous limit",
                transformed.name
            )),
            sched,
        )),
        Err(v) => Ok(relabel(
            v,
            &format!("conclusion not reproduced for {}", transformed.name),
        )),
    }
}
