//! Batch command-line front end.
//!
//! Exit status: 0 on success, 2 when the configuration violates a
//! precondition, 1 when a numerical contract fails or output cannot be written.

pub mod commands;
pub mod config;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser};

use crate::error::{precondition, Error, Result};
use crate::subplanck::SensitivityMode;

pub use config::{Format, RunConfig, Subcommand};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "BOXREVIVE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "boxrevive",
    version,
    about = "Wave-packet revivals of a slightly relativistic particle in a box"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Energy levels, level populations and characteristic time scales
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of levels to tabulate [default: the basis n_max]
        #[arg(long)]
        n_levels: Option<u32>,
    },
    /// Space-time probability density |psi(x, t)|^2
    Carpet {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        window: Window,
        /// Number of positions
        #[arg(long)]
        nx: Option<usize>,
    },
    /// Wigner function W(x, p) at one time
    Wigner {
        #[command(flatten)]
        common: Common,
        /// Evaluation time [T_rev]
        #[arg(long, allow_negative_numbers = true)]
        t: Option<f64>,
        /// Number of position cells
        #[arg(long)]
        nx: Option<usize>,
        /// Number of momentum points
        #[arg(long)]
        np: Option<usize>,
        /// Momentum half-range [default: |pbar| + 6/dx]
        #[arg(long, allow_negative_numbers = true)]
        p_max: Option<f64>,
        /// Fine samples per half position cell
        #[arg(long)]
        oversample: Option<usize>,
    },
    /// Action, sub-Planck dimension and its sensitivity to q^2
    Subplanck {
        #[command(flatten)]
        common: Common,
        /// Evaluation time of a single report [T_rev]
        #[arg(long, allow_negative_numbers = true)]
        t: Option<f64>,
        /// Comma-separated q^2 values for a sensitivity curve
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        q2_list: Option<Vec<f64>>,
        /// Evaluation time of each curve point
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Skip the fringe-period measurement
        #[arg(long)]
        no_fringes: bool,
    },
    /// Fractional super-revival times from exact fractions
    Revivals {
        #[command(flatten)]
        common: Common,
        /// Largest denominator on the t_sr4 clock
        #[arg(long)]
        s_max: Option<u32>,
    },
    /// Return fidelity |<psi(0)|psi(t)>| and its peaks
    Fidelity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        window: Window,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    ShortTime,
    SuperRevival,
}

impl From<ModeArg> for SensitivityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::ShortTime => SensitivityMode::ShortTime,
            ModeArg::SuperRevival => SensitivityMode::SuperRevival,
        }
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Basename of the data files [default: the subcommand name]
    #[arg(long)]
    pub name: Option<String>,
    /// Comma-separated output formats
    #[arg(long, value_enum, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    /// Relativistic parameter q^2
    #[arg(long, allow_negative_numbers = true)]
    pub q2: Option<f64>,
    /// Initial packet centre [L]
    #[arg(long, allow_negative_numbers = true)]
    pub xbar: Option<f64>,
    /// Initial packet width [L]
    #[arg(long, allow_negative_numbers = true)]
    pub dx: Option<f64>,
    /// Initial mean momentum [hbar/L]
    #[arg(long, allow_negative_numbers = true)]
    pub pbar: Option<f64>,
    /// Mean quantum number used by time scales and revival predictions
    #[arg(long)]
    pub nbar_override: Option<u32>,
    /// Allowed deficit of the captured norm
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Largest quantum number the basis may reach
    #[arg(long)]
    pub n_max_cap: Option<u32>,
}

/// A uniform time window.
#[derive(Debug, Args)]
pub struct Window {
    /// Start time [T_rev]
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// End time [T_rev]
    #[arg(long, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    /// Number of times
    #[arg(long)]
    pub nt: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.output.dir, self.out.clone());
        if self.name.is_some() {
            cfg.output.name = self.name.clone();
        }
        set(&mut cfg.output.formats, self.formats.clone());
        set(&mut cfg.system.q_squared, self.q2);
        set(&mut cfg.packet.x_bar, self.xbar);
        set(&mut cfg.packet.delta_x, self.dx);
        set(&mut cfg.packet.p_bar, self.pbar);
        if self.nbar_override.is_some() {
            cfg.packet.n_bar_override = self.nbar_override;
        }
        set(&mut cfg.system.truncation_epsilon, self.epsilon);
        set(&mut cfg.system.n_max_cap, self.n_max_cap);
    }
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum { common, .. }
            | Command::Carpet { common, .. }
            | Command::Wigner { common, .. }
            | Command::Subplanck { common, .. }
            | Command::Revivals { common, .. }
            | Command::Fidelity { common, .. } => common,
        }
    }

    pub fn subcommand(&self) -> Subcommand {
        match self {
            Command::Spectrum { .. } => Subcommand::Spectrum,
            Command::Carpet { .. } => Subcommand::Carpet,
            Command::Wigner { .. } => Subcommand::Wigner,
            Command::Subplanck { .. } => Subcommand::Subplanck,
            Command::Revivals { .. } => Subcommand::Revivals,
            Command::Fidelity { .. } => Subcommand::Fidelity,
        }
    }

    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let common = self.common();
        let mut cfg = match &common.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        common.apply(&mut cfg);
        match self {
            Command::Spectrum { n_levels, .. } => {
                if n_levels.is_some() {
                    cfg.spectrum.n_levels = *n_levels;
                }
            }
            Command::Carpet { window, nx, .. } => {
                let c = &mut cfg.carpet;
                set(&mut c.t0, window.t0);
                set(&mut c.t1, window.t1);
                set(&mut c.nt, window.nt);
                set(&mut c.nx, *nx);
            }
            Command::Wigner { t, nx, np, p_max, oversample, .. } => {
                let w = &mut cfg.wigner;
                set(&mut w.t, *t);
                set(&mut w.nx, *nx);
                set(&mut w.np, *np);
                if p_max.is_some() {
                    w.p_max = *p_max;
                }
                set(&mut w.oversample, *oversample);
            }
            Command::Subplanck { t, q2_list, mode, no_fringes, .. } => {
                let s = &mut cfg.subplanck;
                set(&mut s.t, *t);
                set(&mut s.q2_list, q2_list.clone());
                set(&mut s.mode, mode.map(Into::into));
                if *no_fringes {
                    s.fringes = false;
                }
            }
            Command::Revivals { s_max, .. } => set(&mut cfg.revivals.s_max, *s_max),
            Command::Fidelity { window, .. } => {
                let f = &mut cfg.fidelity;
                set(&mut f.t0, window.t0);
                set(&mut f.t1, window.t1);
                set(&mut f.nt, window.nt);
            }
        }
        Ok(cfg)
    }
}

/// Worker count from `BOXREVIVE_THREADS`, or all available cores.
pub fn thread_count(env: Option<&str>) -> Result<usize> {
    match env {
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(precondition(format!(
                "{THREADS_ENV} must be a positive integer (got {v:?})"
            ))),
        },
    }
}

/// Parses `args`, runs the subcommand and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else {
        1
    }
}

fn execute(command: &Command) -> Result<Vec<PathBuf>> {
    let env = std::env::var(THREADS_ENV).ok();
    let threads = thread_count(env.as_deref())?;
    let cfg = command.resolve()?;
    let cmd = command.subcommand();
    cfg.validate(cmd)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Contract(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| commands::execute(cmd, &cfg, threads))
}
