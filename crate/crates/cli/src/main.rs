use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use jep_core::gibbs::gibbs_vector;
use jep_core::harness::{convergence_profile, worker_count};
use jep_core::related::asep_run;
use jep_core::{
    asep_stationary_exact, build_matrix, enumerate_states, equilibrium_stats, jump_times,
    monte_carlo, sample_gibbs, simulate, stationary_distribution, warrington_pmf, AsepParams,
    BoundedUniformFamily, DistVector, GeometricStream, JepError, JumpFamily, MemorylessFamily,
    ParticleConfig, RunConfig, TableFamily,
};

/// Juggler's exclusion process: simulation, exact equilibria and checks.
#[derive(Parser)]
#[command(name = "jep", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Root seed for every random stream of the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exclusive height bound of the truncated state space.
    #[arg(long = "hmax")]
    h_max: Option<u64>,
    /// Tolerance for escaped mass and solver residuals.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Memoryless,
    BoundedUniform,
    Table,
}

impl FamilyKind {
    fn name(self) -> &'static str {
        match self {
            FamilyKind::Memoryless => "memoryless",
            FamilyKind::BoundedUniform => "bounded-uniform",
            FamilyKind::Table => "table",
        }
    }
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "memoryless")]
    family: FamilyKind,
    /// Ratio of the memoryless family.
    #[arg(long)]
    alpha: Option<f64>,
    /// Height bound of the bounded uniform family.
    #[arg(long)]
    m: Option<u64>,
    /// JSON jump table, keyed by comma-joined index sets.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Record one trajectory as JSON lines.
    Simulate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: Option<usize>,
        /// Initial state, e.g. 1,4,7.
        #[arg(long)]
        init: ParticleConfig,
        /// Number of steps.
        #[arg(long = "t")]
        horizon: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Exact stationary distribution on a truncated space, as CSV.
    Stationary {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: usize,
        /// Also dump the transition matrix as JSON.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Gibbs probabilities on a truncated space, plus equilibrium statistics.
    Gibbs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        /// Where to write the JSON statistics record (stderr if omitted).
        #[arg(long)]
        stats_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical distribution of exact Gibbs samples, as CSV.
    GibbsSample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Fixed base set the sampled particles avoid.
        #[arg(long, default_value = "")]
        base: ParticleConfig,
        #[command(flatten)]
        common: Common,
    },
    /// Exact TV distance to equilibrium over time, as CSV.
    Converge {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        init: ParticleConfig,
        /// Last time step (defaults to two past the last jump time).
        #[arg(long = "t")]
        horizon: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Equilibrium of the bounded uniform model, as CSV.
    Warrington {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Reflecting exclusion process: exact equilibrium, or simulated end states.
    Asep {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Simulate this many end states instead of solving exactly.
        #[arg(long)]
        samples: Option<usize>,
        /// Simulated time per run.
        #[arg(long = "t", default_value_t = 50.0)]
        time: f64,
        /// Initial state of simulated runs (ground state if omitted).
        #[arg(long)]
        init: Option<ParticleConfig>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite; nonzero exit on any failure.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn base_config(model: &str, common: &Common) -> RunConfig {
    let mut cfg = RunConfig::new(model);
    cfg.seed = common.seed;
    cfg.h_max = common.h_max;
    cfg.tol = common.tol;
    cfg.out = common.out.as_ref().map(|p| p.display().to_string());
    cfg
}

fn with_family(mut cfg: RunConfig, f: &FamilyArgs) -> RunConfig {
    cfg.family = Some(f.family.name().to_string());
    cfg.alpha = f.alpha;
    cfg.m = f.m;
    cfg
}

fn build_family(f: &FamilyArgs) -> Result<Box<dyn JumpFamily>> {
    Ok(match f.family {
        FamilyKind::Memoryless => Box::new(MemorylessFamily::new(f.alpha.unwrap())?),
        FamilyKind::BoundedUniform => Box::new(BoundedUniformFamily::new(f.m.unwrap())?),
        FamilyKind::Table => {
            let path = f
                .table
                .as_ref()
                .ok_or_else(|| JepError::Config("table family needs --table".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| JepError::Config(format!("{}: {e}", path.display())))?;
            Box::new(TableFamily::from_json(&text)?)
        }
    })
}

/// Smallest bound whose per-row leak `α^{h-n+1}` is within `tol`.
fn auto_hmax(n: usize, alpha: f64, tol: f64) -> u64 {
    let mut h = n as u64;
    while alpha.powf((h + 1 - n as u64) as f64) > tol {
        h += 1;
    }
    h
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Simulate {
            family,
            n,
            init,
            horizon,
            common,
        } => {
            let mut cfg = with_family(base_config("simulate", &common), &family);
            cfg.n = n;
            cfg.init = Some(init.clone());
            cfg.horizon = Some(horizon);
            cfg.validate()?;
            let fam = build_family(&family)?;
            let mut stream = GeometricStream::new(common.seed);
            let traj = simulate(&init, fam.as_ref(), horizon as usize, &mut stream)?;
            let mut out = sink(&common.out)?;
            traj.write_jsonl(&mut out)?;
            out.flush()?;
        }
        Cmd::Stationary {
            family,
            n,
            matrix_out,
            common,
        } => {
            let mut cfg = with_family(base_config("stationary", &common), &family);
            cfg.n = Some(n);
            cfg.validate()?;
            let h_max = match (common.h_max, family.family) {
                (Some(h), _) => h,
                (None, FamilyKind::BoundedUniform) => family.m.unwrap(),
                (None, FamilyKind::Memoryless) => auto_hmax(n, family.alpha.unwrap(), common.tol),
                (None, FamilyKind::Table) => {
                    return Err(JepError::Config("table family needs --hmax".into()).into())
                }
            };
            let fam = build_family(&family)?;
            let space = enumerate_states(n, h_max)?;
            let matrix = build_matrix(fam.as_ref(), &space, common.tol)?;
            let pi = stationary_distribution(&matrix, common.tol)?;
            if let Some(p) = &matrix_out {
                let mut w = sink(&Some(p.clone()))?;
                matrix.write_json(&mut w)?;
                w.flush()?;
            }
            let mut out = sink(&common.out)?;
            pi.write_csv(&space, &mut out)?;
            out.flush()?;
        }
        Cmd::Gibbs {
            n,
            alpha,
            stats_out,
            common,
        } => {
            let mut cfg = base_config("gibbs", &common);
            cfg.n = Some(n);
            cfg.alpha = Some(alpha);
            cfg.validate()?;
            let h_max = common
                .h_max
                .unwrap_or_else(|| auto_hmax(n, alpha, common.tol));
            let space = enumerate_states(n, h_max)?;
            let g = gibbs_vector(&space, alpha)?;
            let mut out = sink(&common.out)?;
            g.write_csv(&space, &mut out)?;
            out.flush()?;
            let stats =
                serde_json::to_string(&equilibrium_stats(n, alpha)?).map_err(JepError::from)?;
            match stats_out {
                Some(p) => std::fs::write(&p, format!("{stats}\n"))
                    .with_context(|| format!("cannot write {}", p.display()))?,
                None => eprintln!("{stats}"),
            }
        }
        Cmd::GibbsSample {
            n,
            alpha,
            samples,
            base,
            common,
        } => {
            let mut cfg = base_config("gibbs-sample", &common);
            cfg.n = Some(n);
            cfg.alpha = Some(alpha);
            cfg.samples = Some(samples);
            cfg.validate()?;
            let root = GeometricStream::new(common.seed);
            let emp = monte_carlo(&root, samples, worker_count(), |s| {
                sample_gibbs(&base, n, alpha, s)
            })?;
            let mut out = sink(&common.out)?;
            emp.write_csv(&mut out)?;
            out.flush()?;
        }
        Cmd::Converge {
            alpha,
            init,
            horizon,
            common,
        } => {
            let mut cfg = base_config("converge", &common);
            cfg.alpha = Some(alpha);
            cfg.n = Some(init.len());
            cfg.init = Some(init.clone());
            cfg.horizon = horizon;
            cfg.validate()?;
            let last_jump = *jump_times(&init)?.last().unwrap();
            let horizon = horizon.unwrap_or(last_jump + 2);
            let n = init.len();
            let h_max = common.h_max.unwrap_or_else(|| {
                let tol = common.tol / (horizon.max(1) as f64);
                auto_hmax(n, alpha, tol).max(init.highest().unwrap() + 1)
            });
            let space = enumerate_states(n, h_max)?;
            let profile = convergence_profile(&init, alpha, horizon, &space, common.tol)?;
            let mut out = sink(&common.out)?;
            writeln!(out, "t,tv")?;
            for p in profile {
                writeln!(out, "{},{:e}", p.t, p.tv)?;
            }
            out.flush()?;
        }
        Cmd::Warrington { n, m, common } => {
            let mut cfg = base_config("warrington", &common);
            cfg.n = Some(n);
            cfg.m = Some(m);
            cfg.validate()?;
            let space = enumerate_states(n, m)?;
            let pi = DistVector::from_fn(&space, |b| warrington_pmf(n, m, b))?;
            let mut out = sink(&common.out)?;
            pi.write_csv(&space, &mut out)?;
            out.flush()?;
        }
        Cmd::Asep {
            n,
            lambda,
            eta,
            samples,
            time,
            init,
            common,
        } => {
            let mut cfg = base_config("asep", &common);
            cfg.n = Some(n);
            cfg.samples = samples;
            cfg.init = init.clone();
            cfg.validate()?;
            let params = AsepParams::new(n, lambda, eta)?;
            let mut out = sink(&common.out)?;
            match samples {
                Some(samples) => {
                    let x0 = init.unwrap_or_else(|| ParticleConfig::ground(n));
                    let root = GeometricStream::new(common.seed);
                    let emp = monte_carlo(&root, samples, worker_count(), |s| {
                        Ok(asep_run(&params, &x0, time, s)?.state)
                    })?;
                    emp.write_csv(&mut out)?;
                }
                None => {
                    let h_max = match common.h_max {
                        Some(h) => h,
                        None => {
                            let r = params.ratio();
                            n as u64 + (1e-10f64.ln() / r.ln()).ceil() as u64
                        }
                    };
                    let (space, pi) = asep_stationary_exact(&params, h_max)?;
                    pi.write_csv(&space, &mut out)?;
                }
            }
            out.flush()?;
        }
        Cmd::Verify { common } => {
            base_config("verify", &common).validate()?;
            let checks = jep_core::verify::run_all();
            let mut out = sink(&common.out)?;
            let mut failed = 0;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} {} ({:.2}s): {}", c.name, c.seconds, c.detail)?;
                failed += usize::from(!c.passed);
            }
            writeln!(out, "{} checks, {failed} failed", checks.len())?;
            out.flush()?;
            if failed > 0 {
                return Err(VerifyFailed(failed).into());
            }
        }
    }
    Ok(())
}

#[derive(Debug)]
struct VerifyFailed(usize);

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} verification check(s) failed", self.0)
    }
}

impl std::error::Error for VerifyFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<JepError>() {
        return if e.is_numerical() { 3 } else { 2 };
    }
    if err.downcast_ref::<VerifyFailed>().is_some() {
        return 1;
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jep: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
