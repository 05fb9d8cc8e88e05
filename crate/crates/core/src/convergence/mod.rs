//! Resolution-bounded detectors for pointwise, sticky and locally uniform
//! convergence, the limit-free Cauchy test, and neighbourhood transfer checks.

mod engine;
mod neighbourhood;
mod replay;

pub(crate) use engine::Engine;
pub use engine::{classify, Classification};
pub use neighbourhood::{eventual_equality_transfer, neighbourhood_contains, NeighbourhoodSpec};
pub use replay::{replay, ReplayTarget};

use crate::error::{LabError, Result};
use crate::funcspace::{
    Certificate, FunctionOracle, GapPoint, IndexedEntry, Outcome, ResolutionSchedule,
    SequenceFamily, UniformEntry, Verdict, Witness,
};
use engine::Table;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Pointwise,
    Sticky,
    LocallyUniform,
    Cauchy,
}

fn check_domains(fam: &SequenceFamily, limit: &FunctionOracle) -> Result<()> {
    let (a, b) = (fam.domain, limit.domain);
    if a.lo != b.lo || a.hi != b.hi || a.periodic != b.periodic {
        return Err(LabError::DomainMismatch(format!(
            "family on [{}, {}], limit on [{}, {}]",
            a.lo, a.hi, b.lo, b.hi
        )));
    }
    Ok(())
}

/// Per-`(t, eps)` outcome with the data needed for a certificate or witness.
enum Cell {
    Holds {
        n: usize,
        etas: Vec<(usize, f64)>,
        eta: f64,
    },
    Fails(Witness),
    Open,
}

fn assemble(
    mode: Mode,
    cells: Vec<(f64, f64, Cell)>,
    sched: &ResolutionSchedule,
    cauchy: bool,
) -> Verdict {
    let outcome = Outcome::all(cells.iter().map(|c| match c.2 {
        Cell::Holds { .. } => Outcome::Holds,
        Cell::Fails(_) => Outcome::Fails,
        Cell::Open => Outcome::Inconclusive,
    }));
    match outcome {
        Outcome::Holds => {
            let cert = match mode {
                Mode::LocallyUniform => Certificate::LocallyUniform(
                    cells
                        .into_iter()
                        .map(|(t, eps, c)| match c {
                            Cell::Holds { n, eta, .. } => UniformEntry {
                                t,
                                eps,
                                eta,
                                n_threshold: n,
                            },
                            _ => unreachable!(),
                        })
                        .collect(),
                ),
                _ => {
                    let entries: Vec<IndexedEntry> = cells
                        .into_iter()
                        .map(|(t, eps, c)| match c {
                            Cell::Holds { n, etas, .. } => IndexedEntry {
                                t,
                                eps,
                                n_threshold: n,
                                etas,
                            },
                            _ => unreachable!(),
                        })
                        .collect();
                    match mode {
                        Mode::Pointwise => Certificate::Pointwise(entries),
                        Mode::Sticky => Certificate::Sticky(entries),
                        _ if cauchy => Certificate::Cauchy {
                            entries,
                            tail_scale: sched.tail_scale,
                            m_floor: sched.m_max / 2,
                        },
                        _ => unreachable!(),
                    }
                }
            };
            Verdict::holds(cert, sched)
        }
        Outcome::Fails => {
            // smallest t, then largest eps
            let mut best: Option<(f64, f64, Witness)> = None;
            for (t, eps, c) in cells {
                if let Cell::Fails(w) = c {
                    let better = match &best {
                        None => true,
                        Some((bt, be, _)) => t < *bt || (t == *bt && eps > *be),
                    };
                    if better {
                        best = Some((t, eps, w));
                    }
                }
            }
            Verdict::fails(best.expect("a failing cell").2, sched)
        }
        Outcome::Inconclusive => Verdict::inconclusive(sched),
    }
}

fn pointwise_cells(e: &Engine, tabs: &[Table]) -> Vec<(f64, f64, Cell)> {
    let mut out = Vec::new();
    for tab in tabs {
        for &eps in &e.sched.eps_ladder {
            let viol: Vec<bool> = tab.at_t.iter().map(|&g| !(g < eps)).collect();
            let cell = match classify(&e.idx, &viol, e.sched.n_max) {
                Classification::Holds(n) => Cell::Holds {
                    n,
                    etas: Vec::new(),
                    eta: 0.0,
                },
                Classification::Fails => Cell::Fails(Witness::Pointwise {
                    t: tab.t,
                    eps,
                    violations: e
                        .idx
                        .iter()
                        .zip(&tab.at_t)
                        .filter(|(_, &g)| !(g < eps))
                        .map(|(&n, &g)| (n, g))
                        .collect(),
                }),
                Classification::Open => Cell::Open,
            };
            out.push((tab.t, eps, cell));
        }
    }
    out
}

/// Largest level (smallest index `l`) whose window sup is below `eps`.
fn best_level(sups: &[f64], eps: f64, min_level: usize) -> Option<usize> {
    (min_level..sups.len()).find(|&l| sups[l] < eps)
}

fn window_witness(e: &Engine, tab: &Table, eps: f64, viol: &[bool], levels: &[usize]) -> Witness {
    let main: Vec<usize> = (0..e.idx.len())
        .filter(|&i| viol[i] && e.idx[i] <= e.sched.n_max)
        .collect();
    let pick = *main
        .last()
        .unwrap_or(&viol.iter().rposition(|&v| v).unwrap_or(0));
    let points = levels
        .iter()
        .filter_map(|&l| {
            let (s, gap) = e.replayable(tab, pick, l, eps)?;
            Some(GapPoint {
                eta: e.sched.eta_ladder[l],
                n: e.idx[pick],
                s,
                gap,
            })
        })
        .collect();
    Witness::Window {
        t: tab.t,
        eps,
        points,
        violating_indices: (0..e.idx.len())
            .filter(|&i| viol[i])
            .map(|i| e.idx[i])
            .collect(),
    }
}

fn sticky_cells(e: &Engine, tabs: &[Table]) -> Vec<(f64, f64, Cell)> {
    let mut out = Vec::new();
    let levels: Vec<usize> = (0..e.sched.eta_ladder.len()).collect();
    for tab in tabs {
        for &eps in &e.sched.eps_ladder {
            let best: Vec<Option<usize>> = tab.sups.iter().map(|s| best_level(s, eps, 0)).collect();
            let viol: Vec<bool> = best.iter().map(|b| b.is_none()).collect();
            let cell = match classify(&e.idx, &viol, e.sched.n_max) {
                Classification::Holds(n) => {
                    let etas = e
                        .idx
                        .iter()
                        .zip(&best)
                        .filter(|(&m, _)| m >= n)
                        .map(|(&m, b)| (m, e.sched.eta_ladder[b.expect("no violation past N")]))
                        .collect();
                    Cell::Holds { n, etas, eta: 0.0 }
                }
                Classification::Fails => Cell::Fails(window_witness(e, tab, eps, &viol, &levels)),
                Classification::Open => Cell::Open,
            };
            out.push((tab.t, eps, cell));
        }
    }
    out
}

fn uniform_cells(e: &Engine, tabs: &[Table]) -> Vec<(f64, f64, Cell)> {
    let floor = e.sched.eta_floor_lu();
    let levels: Vec<usize> = (0..e.sched.eta_ladder.len())
        .filter(|&l| e.sched.eta_ladder[l] >= floor)
        .collect();
    let mut out = Vec::new();
    for tab in tabs {
        for &eps in &e.sched.eps_ladder {
            let mut cell = Cell::Open;
            let mut all_fail = !levels.is_empty();
            let mut fail_viol: Option<Vec<bool>> = None;
            for &l in &levels {
                let viol: Vec<bool> = tab.sups.iter().map(|s| !(s[l] < eps)).collect();
                match classify(&e.idx, &viol, e.sched.n_max) {
                    Classification::Holds(n) => {
                        cell = Cell::Holds {
                            n,
                            etas: Vec::new(),
                            eta: e.sched.eta_ladder[l],
                        };
                        all_fail = false;
                        break;
                    }
                    Classification::Fails => {
                        if fail_viol.is_none() {
                            fail_viol = Some(viol);
                        }
                    }
                    Classification::Open => all_fail = false,
                }
            }
            if all_fail {
                let viol = fail_viol.expect("levels nonempty");
                // one violation per admissible level, each from its own largest violating index
                let mut points = Vec::new();
                for &l in &levels {
                    let v: Vec<bool> = tab.sups.iter().map(|s| !(s[l] < eps)).collect();
                    if let Some(i) = (0..e.idx.len()).rfind(|&i| v[i] && e.idx[i] <= e.sched.n_max)
                    {
                        if let Some((s, gap)) = e.replayable(tab, i, l, eps) {
                            points.push(GapPoint {
                                eta: e.sched.eta_ladder[l],
                                n: e.idx[i],
                                s,
                                gap,
                            });
                        }
                    }
                }
                let violating_indices = (0..e.idx.len())
                    .filter(|&i| viol[i])
                    .map(|i| e.idx[i])
                    .collect();
                cell = Cell::Fails(Witness::Window {
                    t: tab.t,
                    eps,
                    points,
                    violating_indices,
                });
            }
            out.push((tab.t, eps, cell));
        }
    }
    out
}

fn cauchy_cells(e: &Engine, tabs: &[Table]) -> Vec<(f64, f64, Cell)> {
    let mut out = Vec::new();
    for tab in tabs {
        for &eps in &e.sched.eps_ladder {
            let best: Vec<Option<usize>> = tab.sups.iter().map(|s| best_level(s, eps, 0)).collect();
            let viol: Vec<bool> = best.iter().map(|b| b.is_none()).collect();
            let cell = match classify(&e.idx, &viol, e.sched.n_max) {
                Classification::Holds(n) => {
                    let etas = e
                        .idx
                        .iter()
                        .zip(&best)
                        .filter(|(&m, _)| m >= n)
                        .map(|(&m, b)| (m, e.sched.eta_ladder[b.unwrap()]))
                        .collect();
                    Cell::Holds { n, etas, eta: 0.0 }
                }
                Classification::Fails => {
                    let main: Vec<usize> = (0..e.idx.len())
                        .filter(|&i| viol[i] && e.idx[i] <= e.sched.n_max)
                        .collect();
                    let pick = *main.last().unwrap_or(&0);
                    let points = (0..e.sched.eta_ladder.len())
                        .filter_map(|l| {
                            let (s, gap, m) = e.cauchy_point(tab, pick, l, eps)?;
                            Some((
                                GapPoint {
                                    eta: e.sched.eta_ladder[l],
                                    n: e.idx[pick],
                                    s,
                                    gap,
                                },
                                m,
                            ))
                        })
                        .collect();
                    let violating_indices = (0..e.idx.len())
                        .filter(|&i| viol[i])
                        .map(|i| e.idx[i])
                        .collect();
                    Cell::Fails(Witness::Cauchy {
                        t: tab.t,
                        eps,
                        points,
                        violating_indices,
                    })
                }
                Classification::Open => Cell::Open,
            };
            out.push((tab.t, eps, cell));
        }
    }
    out
}

/// Runs the requested detectors against `limit`, sharing one gap table per probe.
pub fn detect(
    fam: &SequenceFamily,
    limit: &FunctionOracle,
    modes: &[Mode],
    sched: &ResolutionSchedule,
) -> Result<Vec<(Mode, Verdict)>> {
    sched.validate()?;
    check_domains(fam, limit)?;
    let e = Engine::new(fam, Some(limit), sched);
    let tabs = e.tables();
    Ok(modes
        .iter()
        .map(|&m| {
            let v = match m {
                Mode::Pointwise => assemble(m, pointwise_cells(&e, &tabs), sched, false),
                Mode::Sticky => assemble(m, sticky_cells(&e, &tabs), sched, false),
                Mode::LocallyUniform => assemble(m, uniform_cells(&e, &tabs), sched, false),
                Mode::Cauchy => unreachable!("use sticky_cauchy"),
            };
            (m, v)
        })
        .collect())
}

pub fn detect_pointwise(
    fam: &SequenceFamily,
    limit: &FunctionOracle,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    Ok(detect(fam, limit, &[Mode::Pointwise], sched)?.remove(0).1)
}

pub fn detect_sticky(
    fam: &SequenceFamily,
    limit: &FunctionOracle,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    Ok(detect(fam, limit, &[Mode::Sticky], sched)?.remove(0).1)
}

pub fn detect_locally_uniform(
    fam: &SequenceFamily,
    limit: &FunctionOracle,
    sched: &ResolutionSchedule,
) -> Result<Verdict> {
    Ok(detect(fam, limit, &[Mode::LocallyUniform], sched)?
        .remove(0)
        .1)
}

/// Limit-free test: every `f_n(s)` near `t` is eventually within `eps` of the tail `f_m(s)`.
pub fn sticky_cauchy(fam: &SequenceFamily, sched: &ResolutionSchedule) -> Result<Verdict> {
    sched.validate()?;
    let e = Engine::new(fam, None, sched);
    let tabs = e.cauchy_tables();
    Ok(assemble(Mode::Cauchy, cauchy_cells(&e, &tabs), sched, true))
}

#[cfg(test)]
mod tests;
