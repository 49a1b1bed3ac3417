use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Parameters, Solver, Study, UsageError};
use crate::manifest::{cached, compare, write_outputs, ResultManifest};
use crate::plots::render_plots;
use crate::studies::run_study;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "anyonlab", version, about = "Spectra, trial states and Hardy constants of trapped anyons")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Tonks–Girardeau levels of the one-dimensional limit
    Tg(StudyArgs),
    /// Calogero ground energies against the radial pair oracle
    Calogero(StudyArgs),
    /// Lowest relative eigenpairs of the two-anyon problem
    #[command(name = "spectrum2d")]
    Spectrum2d(StudyArgs),
    /// Relative ground energy, overlap and diagonal mass over (α, ε)
    Convergence(StudyArgs),
    /// Monte-Carlo energy of the gauged trial state
    Variational(StudyArgs),
    /// Hardy constants: pair Rayleigh quotient or three-particle upper bound
    Hardy(StudyArgs),
    /// Pointwise and lattice gauge checks, circumradius identity
    GaugeChecks(StudyArgs),
    /// Run a TOML experiment config
    Run {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Recompute a finished run and compare it with its manifest
    Replay {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Re-render the plots of a finished run
    Plot { dir: PathBuf },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Parameter points evaluated concurrently
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Recompute even when a matching manifest exists
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args, Debug)]
struct StudyArgs {
    /// Statistics parameters, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    alpha: Option<Vec<f64>>,
    /// Trap anisotropies, comma separated
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Particle number
    #[arg(long)]
    n: Option<usize>,
    /// Levels, eigenpairs or sample points, depending on the study
    #[arg(long)]
    count: Option<usize>,
    /// Occupied oscillator levels of the trial state
    #[arg(long, value_delimiter = ',')]
    occ: Option<Vec<usize>>,
    /// Log-polar refinement levels for the pair Hardy quotient
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    /// Core radius of the three-particle trial, in units of its width
    #[arg(long)]
    core: Option<f64>,
    /// Pair exponent of the three-particle trial
    #[arg(long)]
    exponent: Option<f64>,
    /// Skip the coarse-grid solve and extrapolation
    #[arg(long)]
    no_extrapolate: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points, NXxNY
    #[arg(long)]
    grid: Option<String>,
    /// Longitudinal box half-width
    #[arg(long = "box")]
    half_width: Option<f64>,
    /// Total Monte-Carlo samples
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[command(flatten)]
    run: RunArgs,
}

impl StudyArgs {
    fn config(self, study: Study) -> (ExperimentConfig, RunArgs) {
        let c = ExperimentConfig {
            study,
            parameters: Parameters {
                alpha: self.alpha,
                eps: self.eps,
                n: self.n,
                count: self.count,
                occupations: self.occ,
                levels: self.levels,
                core: self.core,
                exponent: self.exponent,
                extrapolate: self.no_extrapolate.then_some(false),
            },
            solver: Solver {
                tol: self.tol,
                max_iter: self.max_iter,
                seed: self.seed,
                grid: self.grid,
                half_width: self.half_width,
                samples: self.samples,
                chains: self.chains,
            },
        };
        (c, self.run)
    }
}

fn write_plots(dir: &Path, m: &ResultManifest) -> Result<usize, String> {
    let plots = render_plots(m).map_err(|e| e.to_string())?;
    if plots.is_empty() {
        return Ok(0);
    }
    let pd = dir.join("plots");
    fs::create_dir_all(&pd).map_err(|e| format!("{}: {e}", pd.display()))?;
    for (name, svg) in &plots {
        fs::write(pd.join(name), svg).map_err(|e| format!("{}: {e}", pd.join(name).display()))?;
    }
    Ok(plots.len())
}

/// Run one normalized config, honouring the cache. Returns the exit status.
fn execute(config: ExperimentConfig, run: RunArgs) -> i32 {
    let config = match config.normalize() {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    if run.workers == 0 {
        return usage_error(&UsageError("--workers: must be positive".into()));
    }
    let hash = config.hash();
    if !run.no_cache {
        if let Some(m) = cached(&run.out, &config) {
            println!("{}: cache hit {} ({} rows in {})", config.study, &hash[..12], m.rows.len(), run.out.display());
            return EXIT_OK;
        }
    }
    let table = run_study(&config, run.workers);
    let m = ResultManifest::new(&config, table);
    if let Err(e) = write_outputs(&run.out, &m) {
        eprintln!("error: {}: {e}", run.out.display());
        return EXIT_USAGE;
    }
    if let Err(e) = write_plots(&run.out, &m) {
        eprintln!("error: {e}");
    }
    for r in m.rows.iter().filter(|r| r.message.is_some()) {
        eprintln!("warning: {}", r.message.as_deref().unwrap_or_default());
    }
    let bad = m.rows.iter().filter(|r| r.status != crate::studies::Status::Ok).count();
    println!(
        "{}: {} rows -> {} (config {})",
        config.study,
        m.rows.len(),
        run.out.join("results.csv").display(),
        &hash[..12]
    );
    if bad > 0 {
        eprintln!("{bad} rows did not converge; see the status column");
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

fn usage_error(e: &dyn std::fmt::Display) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

fn replay(dir: &Path, workers: usize) -> i32 {
    let m = match ResultManifest::load(dir) {
        Ok(m) => m,
        Err(e) => return usage_error(&format!("{}: {e}", dir.join("manifest.json").display())),
    };
    let config = match m.config.clone().normalize() {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    if config.hash() != m.config_hash {
        return usage_error(&"manifest config does not match its hash");
    }
    let fresh = run_study(&config, workers.max(1));
    let diffs = compare(&m.table(), &fresh);
    if diffs.is_empty() {
        println!("{}: replay reproduced {} rows", m.study, m.rows.len());
        EXIT_OK
    } else {
        for d in &diffs {
            eprintln!("mismatch: {d}");
        }
        EXIT_PARTIAL
    }
}

/// Entry point shared by the binary and the tests.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.cmd {
        Cmd::Tg(a) => run_args(a, Study::Tg),
        Cmd::Calogero(a) => run_args(a, Study::Calogero),
        Cmd::Spectrum2d(a) => run_args(a, Study::Spectrum2d),
        Cmd::Convergence(a) => run_args(a, Study::Convergence),
        Cmd::Variational(a) => run_args(a, Study::Variational),
        Cmd::Hardy(a) => run_args(a, Study::Hardy),
        Cmd::GaugeChecks(a) => run_args(a, Study::GaugeChecks),
        Cmd::Run { config, run } => match fs::read_to_string(&config) {
            Ok(text) => match ExperimentConfig::from_toml(&text) {
                Ok(c) => execute(c, run),
                Err(e) => usage_error(&e),
            },
            Err(e) => usage_error(&format!("{}: {e}", config.display())),
        },
        Cmd::Replay { dir, workers } => replay(&dir, workers),
        Cmd::Plot { dir } => match ResultManifest::load(&dir) {
            Ok(m) => match write_plots(&dir, &m) {
                Ok(n) => {
                    println!("{}: {n} plots in {}", m.study, dir.join("plots").display());
                    EXIT_OK
                }
                Err(e) => usage_error(&e),
            },
            Err(e) => usage_error(&format!("{}: {e}", dir.join("manifest.json").display())),
        },
    }
}

fn run_args(a: StudyArgs, study: Study) -> i32 {
    let (c, run) = a.config(study);
    execute(c, run)
}
