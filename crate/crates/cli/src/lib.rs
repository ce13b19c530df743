//! Run configuration and subcommand implementations for the `locdiv` tool.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use locdiv_core::constructor::{check_conditions, ConditionReport};
use locdiv_core::coord::{self, Coord, Index};
use locdiv_core::kernels::FamilySpec;
use locdiv_core::majorant::{self, MajorantTable, MajorantValidation};
use locdiv_core::verifier::{self, DivergenceReport, LAudit, Oscillation};
use locdiv_core::{
    assemble_g, construct, ConstructionConfig, ConstructionState, Context, Interval, NullSetSpec,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CHECKPOINT: u8 = 3;
pub const EXIT_ABORTED: u8 = 4;

/// Environment variable selecting the worker count.
pub const THREADS_ENV: &str = "LOCDIV_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("construction aborted: {0}")]
    Aborted(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] locdiv_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Checkpoint(_) => EXIT_CHECKPOINT,
            CliError::Aborted(_) => EXIT_ABORTED,
            CliError::Io(_) => EXIT_USAGE,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MajorantOptions {
    pub n_max: u64,
    pub x_grid: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub u_count: usize,
    pub samples: usize,
}

impl Default for MajorantOptions {
    fn default() -> Self {
        MajorantOptions { n_max: 128, x_grid: 128, u_min: 1e-3, u_max: 1.0, u_count: 64, samples: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditOptions {
    /// Interval `I` with `f = 𝕀_I`.
    pub i: Option<Interval>,
    /// Closed window `A` inside `I`.
    pub a: Option<Interval>,
    pub n_max: u64,
    pub grid: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { i: None, a: None, n_max: 4096, grid: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilySpec,
    #[serde(default)]
    pub nullset: Option<NullSetSpec>,
    #[serde(default)]
    pub construction: ConstructionConfig,
    #[serde(default)]
    pub majorant: MajorantOptions,
    #[serde(default)]
    pub audit: AuditOptions,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Parser)]
#[command(name = "locdiv", version, about = "Divergence sets of measure zero for localized operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Built-in family name: dirichlet, fejer or haar_dyadic.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the nested sets and write `checkpoint.json` and `conditions.json`.
    Construct {
        #[command(flatten)]
        overrides: Overrides,
        /// Continue from an existing checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Check the alternation bound on a checkpoint; writes `report.json` and `report.csv`.
    Verify {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Tabulate and validate the kernel majorant; writes `majorant.csv` and `majorant.json`.
    Majorant {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Decay profile of `sup_A |U_n 𝕀_I - 1|`; writes `audit.csv` and `audit.json`.
    Audit {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// `(n, U_n 𝕀_G(x))` for one witness; writes `plot.csv`.
    Plot {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 0)]
        witness: usize,
        /// First index (defaults to the witness chain indices only).
        #[arg(long)]
        from: Option<Index>,
        #[arg(long)]
        to: Option<Index>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Checkpoint file: the construction state plus the run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub seed: u64,
    pub state: ConstructionState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub seed: u64,
    pub report: DivergenceReport,
    pub oscillation: Vec<Oscillation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantOutput {
    pub seed: u64,
    pub family: String,
    pub table: MajorantTable,
    pub monotone: bool,
    pub validation: MajorantValidation,
}

pub fn load_config(o: &Overrides) -> CliResult<RunConfig> {
    let text = fs::read_to_string(&o.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", o.config.display())))?;
    let mut cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed config: {e}")))?;
    if let Some(d) = o.depth {
        cfg.construction.depth = d;
    }
    if let Some(name) = &o.family {
        cfg.family = family_by_name(name)?;
    }
    if let Some(out) = &o.out {
        cfg.out = out.clone();
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

pub fn family_by_name(name: &str) -> CliResult<FamilySpec> {
    match name {
        "dirichlet" => Ok(FamilySpec::Dirichlet),
        "fejer" => Ok(FamilySpec::Fejer),
        "haar_dyadic" => Ok(FamilySpec::HaarDyadic),
        other => Err(CliError::Usage(format!("unknown family `{other}`"))),
    }
}

fn write(dir: &Path, name: &str, content: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let p = dir.join(name);
    fs::write(&p, content)?;
    Ok(p)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn read_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Checkpoint(format!("cannot read {}: {e}", path.display())))?;
    let cp: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| CliError::Checkpoint(format!("corrupted {}: {e}", path.display())))?;
    if cp.state.levels.is_empty() {
        return Err(CliError::Checkpoint("checkpoint has no levels".into()));
    }
    Ok(cp)
}

fn context(state: &ConstructionState) -> CliResult<Context> {
    Context::new(state).map_err(|e| CliError::Usage(e.to_string()))
}

/// Builds and checks; returns the exit code.
pub fn cmd_construct(cfg: &RunConfig, resume: Option<&Path>) -> CliResult<u8> {
    let state = match resume {
        Some(p) => {
            let mut cp = read_checkpoint(p)?;
            cp.state.config.depth = cfg.construction.depth;
            cp.state
        }
        None => {
            let nullset = cfg
                .nullset
                .clone()
                .ok_or_else(|| CliError::Usage("config has no nullset".into()))?;
            ConstructionState::new(cfg.family.clone(), nullset, cfg.construction.clone())
        }
    };
    state.config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let ctx = context(&state)?;
    let outcome = construct(&ctx, state).map_err(|e| match e {
        locdiv_core::Error::Precondition(_) | locdiv_core::Error::NotEnoughPoints { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Aborted(other.to_string()),
    })?;
    let cp = Checkpoint { seed: cfg.seed, state: outcome.state };
    write(&cfg.out, "checkpoint.json", &to_json(&cp))?;
    if let Some(e) = outcome.aborted {
        return Err(CliError::Aborted(format!(
            "{e}; partial checkpoint with {} levels written",
            cp.state.levels.len()
        )));
    }
    let report = check_conditions(&ctx, &cp.state)?;
    write(&cfg.out, "conditions.json", &to_json(&report))?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}

pub fn verify_state(state: &ConstructionState) -> CliResult<DivergenceReport> {
    let ctx = context(state)?;
    let g = assemble_g(state);
    verifier::alternation_check(&ctx, state, &g).map_err(|e| match e {
        locdiv_core::Error::WitnessNotCovered { .. } => CliError::Checkpoint(e.to_string()),
        other => CliError::Core(other),
    })
}

pub fn cmd_verify(checkpoint: &Path, out: &Path) -> CliResult<u8> {
    let cp = read_checkpoint(checkpoint)?;
    let report = verify_state(&cp.state)?;
    let oscillation = verifier::oscillation_summary(&report)?;
    let pass = report.pass;
    write(out, "report.csv", &report.to_csv())?;
    write(out, "report.json", &to_json(&VerifyOutput { seed: cp.seed, report, oscillation }))?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILED })
}

pub fn conditions(state: &ConstructionState) -> CliResult<ConditionReport> {
    Ok(check_conditions(&context(state)?, state)?)
}

pub fn cmd_majorant(cfg: &RunConfig) -> CliResult<u8> {
    let f = cfg.family.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let o = &cfg.majorant;
    let u_max = match f.domain().metric {
        locdiv_core::kernels::Metric::Circular { period } => o.u_max.min(period / 2.0),
        locdiv_core::kernels::Metric::Linear => o.u_max,
    };
    if !(o.u_min > 0.0 && o.u_min < u_max && o.u_count >= 2) {
        return Err(CliError::Usage("majorant grid needs 0 < u_min < u_max and u_count ≥ 2".into()));
    }
    let grid = majorant::geometric_grid(o.u_min, u_max, o.u_count);
    let table = match majorant::analytic_phi(f.as_ref(), &grid) {
        Ok(t) => t,
        Err(_) => majorant::estimate_phi(f.as_ref(), o.n_max, o.x_grid, &grid)?,
    };
    let validation = majorant::validate_majorant(f.as_ref(), &table, o.n_max, o.samples, cfg.seed)?;
    write(&cfg.out, "majorant.csv", &table.to_csv())?;
    let ok = table.is_monotone() && validation.violations == 0;
    let out = MajorantOutput {
        seed: cfg.seed,
        family: f.name().to_string(),
        monotone: table.is_monotone(),
        table,
        validation,
    };
    write(&cfg.out, "majorant.json", &to_json(&out))?;
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

pub fn run_audit(cfg: &RunConfig) -> CliResult<LAudit> {
    let f = cfg.family.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let o = &cfg.audit;
    let (i, a) = match (&o.i, &o.a) {
        (Some(i), Some(a)) => (i.clone(), a.clone()),
        _ => return Err(CliError::Usage("audit needs intervals `i` and `a`".into())),
    };
    verifier::lproperty_audit(f.as_ref(), &i, &a, o.n_max, o.grid).map_err(|e| match e {
        locdiv_core::Error::Precondition(_) => CliError::Usage(e.to_string()),
        other => CliError::Core(other),
    })
}

pub fn cmd_audit(cfg: &RunConfig) -> CliResult<u8> {
    let audit = run_audit(cfg)?;
    write(&cfg.out, "audit.csv", &audit.to_csv())?;
    write(&cfg.out, "audit.json", &to_json(&audit))?;
    Ok(EXIT_OK)
}

pub fn cmd_plot(
    checkpoint: &Path,
    witness: usize,
    from: Option<&Index>,
    to: Option<&Index>,
    out: &Path,
) -> CliResult<u8> {
    let cp = read_checkpoint(checkpoint)?;
    let st = &cp.state;
    let x: &Coord = st
        .witnesses
        .get(witness)
        .ok_or_else(|| CliError::Usage(format!("no witness {witness}")))?;
    let indices: Vec<Index> = match (from, to) {
        (Some(a), Some(b)) => {
            if a > b {
                return Err(CliError::Usage("--from exceeds --to".into()));
            }
            let span = (&b.0 - &a.0).to_string().parse::<u64>().unwrap_or(u64::MAX);
            if span > 1 << 20 {
                return Err(CliError::Usage("plot range exceeds 2^20 indices".into()));
            }
            let mut v = Vec::new();
            let mut n = a.clone();
            while &n <= b {
                v.push(n.clone());
                n = n.succ();
            }
            v
        }
        (None, None) => st
            .levels
            .iter()
            .map(|l| l.members[l.witness_members[witness]].nu.clone())
            .collect(),
        _ => return Err(CliError::Usage("--from and --to go together".into())),
    };
    let ctx = context(st)?;
    let g = assemble_g(st);
    let series = verifier::plot_series(&ctx, &g, x, &indices)?;
    let mut csv = format!("# witness {witness} x {}\nn,value\n", coord::to_f64(x));
    for (n, v) in series {
        csv.push_str(&format!("{n},{v}\n"));
    }
    write(out, "plot.csv", &csv)?;
    Ok(EXIT_OK)
}

pub fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Construct { overrides, resume } => {
            cmd_construct(&load_config(&overrides)?, resume.as_deref())
        }
        Command::Verify { checkpoint, out } => cmd_verify(&checkpoint, &out),
        Command::Majorant { overrides } => cmd_majorant(&load_config(&overrides)?),
        Command::Audit { overrides } => cmd_audit(&load_config(&overrides)?),
        Command::Plot { checkpoint, witness, from, to, out } => {
            cmd_plot(&checkpoint, witness, from.as_ref(), to.as_ref(), &out)
        }
    }
}

/// Applies [`THREADS_ENV`] to the global worker pool.
pub fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}
