use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use std::path::PathBuf;
use std::process::ExitCode;
use sticky_lab_cli::{emit, run, ExperimentConfig, Status};

#[derive(Parser)]
#[command(
    name = "sticky-lab",
    version,
    about = "Sticky and locally uniform convergence diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Option<Cmd>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON); flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for CSV sidecars.
    #[arg(long, global = true)]
    csv_dir: Option<PathBuf>,
    /// Resolution schedule: default or coarse.
    #[arg(long, global = true)]
    schedule: Option<String>,
    /// Override one schedule field, e.g. n_max=4096.
    #[arg(long = "schedule-set", value_name = "FIELD=VALUE", global = true)]
    schedule_set: Vec<String>,
    /// Set any command parameter, e.g. --set s=0.1,0.01.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run convergence detectors on a family.
    Analyze {
        #[arg(long)]
        family: Option<String>,
        /// pointwise, sticky, locally-uniform, cauchy or all.
        #[arg(long)]
        mode: Option<String>,
    },
    /// List the built-in families with their labels.
    Catalog,
    /// Compare a spike convolution against the closed form.
    Lemma {
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        t0: Option<String>,
    },
    /// Spike-sum convolutions against growing kernels.
    BanachSteinhaus {
        #[arg(long)]
        i_max: Option<String>,
        /// Comma-separated kernel indices.
        #[arg(long)]
        n: Option<String>,
        /// n-over-log or a constant.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Kernel-weighted series as s shrinks to zero.
    Poisson {
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        s: Option<String>,
    },
    /// L1 norms of Dirichlet kernels.
    Dirichlet {
        #[arg(long)]
        n: Option<String>,
    },
    /// Upcrossings, limsup along a sequence, or a path property.
    Functional {
        #[arg(long)]
        family: Option<String>,
        /// upcrossings, limsup or property.
        #[arg(long)]
        kind: Option<String>,
        /// limit or a member index.
        #[arg(long)]
        member: Option<String>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        lo: Option<String>,
        #[arg(long)]
        hi: Option<String>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        approach: Option<String>,
        #[arg(long)]
        property: Option<String>,
    },
    /// Cluster candidates and flatness of a double sequence.
    Cluster {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        sequence: Option<String>,
        #[arg(long = "box")]
        size: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long)]
        tol: Option<String>,
        #[arg(long)]
        t: Option<String>,
    },
    /// Compactness diagnostic and hump modulus.
    Compactness {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        t: Option<String>,
    },
    /// Norm and membership of a tailed sequence.
    LsNorm {
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// The acceptance battery.
    Suite,
}

/// `"0.1,0.2"` is a list, JSON literals parse as JSON, anything else is a string.
fn parse_value(s: &str) -> Value {
    if let Ok(v) = serde_json::from_str(s) {
        return v;
    }
    if s.contains(',') {
        return Value::Array(s.split(',').map(|x| parse_value(x.trim())).collect());
    }
    Value::String(s.into())
}

fn key_value(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("expected KEY=VALUE, got {s:?}"))?;
    Ok((k.trim().into(), parse_value(v.trim())))
}

fn build(cli: Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.common.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    let mut params: Vec<(&str, Option<String>)> = Vec::new();
    let mut family = None;
    let command = match cli.cmd {
        None => None,
        Some(Cmd::Analyze { family: f, mode }) => {
            family = f;
            params.push(("mode", mode));
            Some("analyze")
        }
        Some(Cmd::Catalog) => Some("catalog"),
        Some(Cmd::Lemma { k, n, alpha, t0 }) => {
            params.extend([("k", k), ("n", n), ("alpha", alpha), ("t0", t0)]);
            Some("lemma")
        }
        Some(Cmd::BanachSteinhaus { i_max, n, alpha }) => {
            // a single index is still a list
            let n = n.map(|n| if n.contains(',') { n } else { format!("[{n}]") });
            params.extend([("i_max", i_max), ("n", n), ("alpha", alpha)]);
            Some("banach-steinhaus")
        }
        Some(Cmd::Poisson { kernel, s }) => {
            let s = s.map(|s| if s.contains(',') { s } else { format!("[{s}]") });
            params.extend([("kernel", kernel), ("s", s)]);
            Some("poisson")
        }
        Some(Cmd::Dirichlet { n }) => {
            let n = n.map(|n| if n.contains(',') { n } else { format!("[{n}]") });
            params.push(("n", n));
            Some("dirichlet")
        }
        Some(Cmd::Functional {
            family: f,
            kind,
            member,
            a,
            b,
            lo,
            hi,
            t,
            approach,
            property,
        }) => {
            family = f;
            params.extend([
                ("kind", kind),
                ("member", member),
                ("a", a),
                ("b", b),
                ("lo", lo),
                ("hi", hi),
                ("t", t),
                ("approach", approach),
                ("property", property),
            ]);
            Some("functional")
        }
        Some(Cmd::Cluster {
            family: f,
            sequence,
            size,
            eps,
            kappa,
            tol,
            t,
        }) => {
            family = f;
            params.extend([
                ("sequence", sequence),
                ("box", size),
                ("eps", eps),
                ("kappa", kappa),
                ("tol", tol),
                ("t", t),
            ]);
            Some("cluster")
        }
        Some(Cmd::Compactness { family: f, s, t }) => {
            family = f;
            params.extend([("s", s), ("t", t)]);
            Some("compactness")
        }
        Some(Cmd::LsNorm { input }) => {
            if input.is_some() {
                cfg.input = input;
            }
            Some("ls-norm")
        }
        Some(Cmd::Suite) => Some("suite"),
    };
    if let Some(c) = command {
        if !cfg.command.is_empty() && cfg.command != c {
            return Err(anyhow!(
                "config is for {:?}, but the subcommand is {c:?}",
                cfg.command
            ));
        }
        cfg.command = c.into();
    }
    if cfg.command.is_empty() {
        return Err(anyhow!("no subcommand given and no command in --config"));
    }
    if family.is_some() {
        cfg.family = family;
    }
    for (k, v) in params {
        if let Some(v) = v {
            cfg.params.insert(k.into(), parse_value(&v));
        }
    }
    for s in &cli.common.set {
        let (k, v) = key_value(s)?;
        cfg.params.insert(k, v);
    }
    for s in &cli.common.schedule_set {
        let (k, v) = key_value(s)?;
        cfg.schedule_overrides.insert(k, v);
    }
    let c = cli.common;
    cfg.out = c.out.or(cfg.out);
    cfg.csv_dir = c.csv_dir.or(cfg.csv_dir);
    cfg.schedule = c.schedule.or(cfg.schedule);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    Ok(cfg)
}

fn threads() -> Result<()> {
    let Ok(v) = std::env::var("STICKYLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| anyhow!("STICKYLAB_THREADS must be a natural number, got {v:?}"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Status::Usage as u8
            } else {
                0
            });
        }
    };
    let outcome = threads().and_then(|_| build(cli)).and_then(|cfg| {
        let r = run(&cfg)?;
        emit(&cfg, &r)?;
        Ok(r.status)
    });
    match outcome {
        Ok(s) => ExitCode::from(s as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Usage as u8)
        }
    }
}
