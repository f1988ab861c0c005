//! `quadfeat` command-line interface.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use quadfeat::featuremaps::{embed_grid_fast, KernelApprox, Method};
use quadfeat::harness::{
    build_anova_map, build_map, error_curve, heldout_pairs, load_csv, rms_error, save_reports, sweep,
    write_csv_rows, write_reports, AnyKernel, AnyMap, BuildParams, Dataset, Displacements, ErrorReport,
    SweepConfig, DEFAULT_N_EVAL, DEFAULT_PAIRS,
};
use quadfeat::kernels::{AnovaKernel, GaussianKernel};
use quadfeat::{Error, Result};

#[derive(Parser)]
#[command(name = "quadfeat", version, about = "Quadrature-based feature maps for shift-invariant kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a feature map and write it as JSON.
    Build {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical max/RMS error of one map.
    Eval {
        #[command(flatten)]
        source: MapSource,
        /// Region diameters; comma separated.
        #[arg(long = "diameter", value_delimiter = ',', default_value = "1.0")]
        diameters: Vec<f64>,
        #[arg(long = "n-eval", default_value_t = DEFAULT_N_EVAL)]
        n_eval: usize,
        /// Report CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a JSON-configured grid of methods and parameters.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed every row of a CSV dataset.
    Embed {
        #[command(flatten)]
        source: MapSource,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time plain embedding against the table-based fast path.
    Bench {
        #[command(flatten)]
        source: MapSource,
    },
}

#[derive(Args, Clone)]
struct BuildArgs {
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long)]
    d: Option<usize>,
    /// Number of quadrature points (candidates for poly-exact).
    #[arg(long = "D")]
    count: Option<usize>,
    /// Gauss-Hermite points per coordinate.
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long, default_value_t = 2)]
    level: u32,
    /// Exactness degree R (even).
    #[arg(long, default_value_t = 2)]
    degree: u32,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV dataset (reweighting, embedding, held-out RMS).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Training pairs for reweighting.
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pairs: usize,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "target-D")]
    target: Option<usize>,
    /// ANOVA kernel JSON; the map is composed per subset.
    #[arg(long)]
    anova: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MapSource {
    /// Previously built map JSON; otherwise the build flags are used.
    #[arg(long)]
    map: Option<PathBuf>,
    #[command(flatten)]
    build: BuildArgs,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s.parse::<Method>() {
        Ok(Method::Anova) => Err("use --anova <json> with another method".into()),
        Ok(m) => Ok(m),
        Err(e) => Err(e.to_string()),
    }
}

impl BuildArgs {
    fn dataset(&self) -> Result<Option<Dataset>> {
        self.data.as_ref().map(load_csv).transpose()
    }

    fn anova_kernel(&self) -> Result<Option<AnovaKernel<f64>>> {
        self.anova.as_ref().map(AnovaKernel::load).transpose()
    }

    fn build(&self, data: Option<&Dataset>) -> Result<AnyMap> {
        let method = self.method.ok_or_else(|| Error::Argument("--method is required".into()))?;
        let anova = self.anova_kernel()?;
        let d = match (&anova, self.d, data) {
            (Some(k), _, _) => k.dim(),
            (None, Some(d), _) => d,
            (None, None, Some(ds)) => ds.dim(),
            _ => return Err(Error::Argument("--d is required".into())),
        };
        let count = match (method, self.count) {
            (Method::Dense | Method::Sparse, c) => c.unwrap_or(0),
            (Method::Reweighted, c) => c.or(self.target).ok_or_else(|| Error::Argument("--D or --target-D is required".into()))?,
            (_, Some(c)) => c,
            _ => return Err(Error::Argument(format!("--D is required for {method}"))),
        };
        let mut p = BuildParams::new(d, count, self.gamma, self.seed);
        p.l = self.l;
        p.level = self.level;
        p.degree = self.degree;
        p.lambda = self.lambda;
        p.target = self.target;
        p.pairs = self.pairs;
        match anova {
            Some(k) => Ok(AnyMap::Anova(build_anova_map(method, &k, &p)?)),
            None => Ok(AnyMap::Plain(build_map(method, &p, data)?)),
        }
    }
}

impl MapSource {
    /// The map and the exact kernel it approximates.
    fn resolve(&self, data: Option<&Dataset>) -> Result<(AnyMap, AnyKernel, Option<Method>, u64)> {
        let map = match &self.map {
            Some(path) => AnyMap::load(path)?,
            None => self.build.build(data)?,
        };
        let (kernel, method) = match (&map, self.build.anova_kernel()?) {
            (AnyMap::Plain(m), None) => (AnyKernel::Gaussian(GaussianKernel::new(m.gamma())?), Some(m.method())),
            (AnyMap::Anova(m), Some(k)) => {
                if k.subsets() != m.subsets() {
                    return Err(Error::Argument("--anova subsets differ from the map's".into()));
                }
                (AnyKernel::Anova(k), m.sub_maps().first().map(|s| s.method()))
            }
            (AnyMap::Anova(_), None) => return Err(Error::Argument("evaluating an ANOVA map needs --anova".into())),
            (AnyMap::Plain(_), Some(_)) => return Err(Error::Argument("--anova given for a non-ANOVA map".into())),
        };
        Ok((map, kernel, method, self.build.seed))
    }
}

fn write_out(out: Option<&PathBuf>, reports: &[ErrorReport]) -> Result<()> {
    match out {
        Some(path) => save_reports(path, reports),
        None => write_reports(std::io::stdout().lock(), reports),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build { build, out } => {
            let data = build.dataset()?;
            let map = build.build(data.as_ref())?;
            map.save(&out)?;
            eprintln!("wrote {} points to {}", map.len(), out.display());
        }
        Command::Eval { source, diameters, n_eval, out } => {
            let data = source.build.dataset()?;
            let started = Instant::now();
            let (map, kernel, method, seed) = source.resolve(data.as_ref())?;
            let build_ms = started.elapsed().as_millis() as u64;
            let started = Instant::now();
            let samples = Displacements::sample(map.dim(), n_eval, seed)?;
            let stats = error_curve(&map, &kernel, &diameters, &samples)?;
            let heldout = match &data {
                Some(ds) => Some(rms_error(&map, &kernel, &heldout_pairs(ds, n_eval, seed)?)?),
                None => None,
            };
            let embed_ms = started.elapsed().as_millis() as u64;
            let gamma = match &kernel {
                AnyKernel::Gaussian(k) => k.gamma(),
                AnyKernel::Anova(k) => k.base().gamma(),
            };
            let reports: Vec<ErrorReport> = diameters
                .iter()
                .zip(&stats)
                .map(|(&m, s)| ErrorReport {
                    method: if matches!(map, AnyMap::Anova(_)) { Method::Anova } else { method.unwrap_or(Method::Rff) },
                    d: map.dim(),
                    count: map.len(),
                    gamma,
                    diameter: m,
                    max_err: s.max,
                    rms_err: heldout.unwrap_or(s.rms),
                    n_eval,
                    seed,
                    build_ms,
                    embed_ms,
                })
                .collect();
            write_out(out.as_ref(), &reports)?;
        }
        Command::Sweep { config, out } => {
            let cfg = SweepConfig::load(&config)?;
            write_out(out.as_ref(), &sweep(&cfg)?)?;
        }
        Command::Embed { source, out } => {
            let data = source.build.dataset()?.ok_or_else(|| Error::Argument("--data is required".into()))?;
            let map = match &source.map {
                Some(path) => AnyMap::load(path)?,
                None => source.build.build(Some(&data))?,
            };
            let rows = match &map {
                AnyMap::Plain(m) => embed_grid_fast(m, data.rows())?.rows,
                AnyMap::Anova(m) => data.rows().iter().map(|x| m.embed(x)).collect::<Result<_>>()?,
            };
            write_csv_rows(&out, &rows)?;
            eprintln!("wrote {} rows x {} features to {}", rows.len(), 2 * map.len(), out.display());
        }
        Command::Bench { source } => {
            let data = source.build.dataset()?.ok_or_else(|| Error::Argument("--data is required".into()))?;
            let map = match &source.map {
                Some(path) => AnyMap::load(path)?,
                None => source.build.build(Some(&data))?,
            };
            let AnyMap::Plain(fm) = &map else {
                return Err(Error::Argument("bench needs a single (non-ANOVA) map".into()));
            };
            let started = Instant::now();
            let plain: Vec<Vec<f64>> = data.rows().iter().map(|x| fm.embed(x)).collect::<Result<_>>()?;
            let embed_ms = started.elapsed().as_secs_f64() * 1e3;
            let started = Instant::now();
            let fast = embed_grid_fast(fm, data.rows())?;
            let fast_ms = started.elapsed().as_secs_f64() * 1e3;
            let max_dev = plain
                .iter()
                .zip(&fast.rows)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            let mut out = std::io::stdout().lock();
            writeln!(out, "method,D,n,embed_ms,fast_ms,used_fast,max_dev")?;
            writeln!(
                out,
                "{},{},{},{embed_ms:.3},{fast_ms:.3},{},{max_dev:e}",
                fm.method(),
                fm.len(),
                data.len(),
                fast.used_fast
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
