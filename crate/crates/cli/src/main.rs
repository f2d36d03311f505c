use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use schroeder_core::rational::MapSpec;
use schroeder_core::report::{run, Command, JobConfig, RenderKind, Status};
use schroeder_core::sphere::parse_sphere_point;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Coeffs,
    Eval,
    Order,
    Tracts,
    Ply,
    Probe,
    Cover,
    Render,
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Coeffs => Command::Coeffs,
            Cmd::Eval => Command::Eval,
            Cmd::Order => Command::Order,
            Cmd::Tracts => Command::Tracts,
            Cmd::Ply => Command::Ply,
            Cmd::Probe => Command::Probe,
            Cmd::Cover => Command::Cover,
            Cmd::Render => Command::Render,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Domain,
    Julia,
}

/// Schröder maps of rational functions: series, evaluation, growth,
/// singularities, basin invariants, covering probes and pictures.
///
/// Exit status: 0 success, 2 inconclusive verdict, 1 error.
#[derive(Debug, Parser)]
#[command(name = "schroeder-lab", version)]
struct Cli {
    command: Cmd,
    /// Map as JSON {"num": [[re,im],...], "den": [...]}, ascending degree.
    #[arg(long, value_name = "FILE")]
    map: Option<PathBuf>,
    /// Approximate base point RE,IM (refined to a periodic point).
    #[arg(long, value_name = "RE,IM", value_parser = point)]
    z0: Option<schroeder_core::sphere::SpherePoint>,
    #[arg(long)]
    period: Option<usize>,
    /// Truncation order of the series.
    #[arg(long = "order-n")]
    order_n: Option<usize>,
    /// Half-width of the square box.
    #[arg(long = "box")]
    half_width: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, env = "SCHRODER_LAB_THREADS")]
    threads: Option<usize>,
    /// TOML file with any of the job parameters; flags win.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Target value RE,IM or inf (tracts, cover, probe).
    #[arg(long, value_parser = point)]
    value: Option<schroeder_core::sphere::SpherePoint>,
    /// Full singularity census instead of one value (tracts).
    #[arg(long)]
    census: bool,
    /// Radius ladder, comma separated, decreasing.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Evaluation point RE,IM; repeatable (eval).
    #[arg(long = "w", value_parser = complex)]
    w: Vec<Complex64>,
    /// Largest radius of the growth schedule (order).
    #[arg(long = "r-max")]
    r_max: Option<f64>,
    /// Disk radius of the degree probe (probe).
    #[arg(long = "probe-radius")]
    probe_radius: Option<f64>,
    #[arg(long = "k-max")]
    k_max: Option<usize>,
    /// Picture type (render).
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long, value_parser = complex)]
    center: Option<Complex64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Degree d of z^d + c (sweep).
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    re: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    im: Option<Vec<f64>>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Covering verdict per cell (sweep).
    #[arg(long = "cover")]
    sweep_cover: bool,
    /// Write component masks of every rung as PGM (tracts).
    #[arg(long)]
    masks: bool,
}

fn point(s: &str) -> Result<schroeder_core::sphere::SpherePoint, String> {
    parse_sphere_point(s)
}

fn complex(s: &str) -> Result<Complex64, String> {
    parse_sphere_point(s)?
        .finite()
        .ok_or_else(|| "a finite point is required".to_string())
}

fn range(v: &[f64], name: &str) -> Result<[f64; 2]> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => bail!("--{name} takes two values LO,HI"),
    }
}

fn load_map(path: &Path) -> Result<MapSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(MapSpec::from_json(&text)?)
}

/// Config file: job parameters plus `threads` and `map_file` (relative to the file).
fn load_config(path: &Path) -> Result<(JobConfig, Option<usize>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut table: toml::Table = text.parse().with_context(|| format!("parsing {}", path.display()))?;
    let threads = match table.remove("threads") {
        Some(v) => Some(v.as_integer().context("threads must be an integer")? as usize),
        None => None,
    };
    let map_file = table.remove("map_file");
    let mut job: JobConfig = table.try_into().with_context(|| format!("parsing {}", path.display()))?;
    if let Some(f) = map_file {
        let f = f.as_str().context("map_file must be a string")?;
        let base = path.parent().unwrap_or(Path::new("."));
        job.map = Some(load_map(&base.join(f))?);
    }
    Ok((job, threads))
}

fn job_from(cli: &Cli) -> Result<(JobConfig, Option<usize>)> {
    let (mut job, mut threads) = match &cli.config {
        Some(p) => load_config(p)?,
        None => (JobConfig::default(), None),
    };
    if let Some(p) = &cli.map {
        job.map = Some(load_map(p)?);
    }
    macro_rules! set {
        ($($field:ident),*) => {$(if let Some(v) = cli.$field.clone() { job.$field = v; })*};
    }
    set!(period, order_n, half_width, grid, r_max, probe_radius, k_max, center, max_iter, degree, nx, ny);
    if cli.z0.is_some() {
        job.z0 = cli.z0;
    }
    if cli.value.is_some() {
        job.value = cli.value;
    }
    if cli.radii.is_some() {
        job.radii = cli.radii.clone();
    }
    if !cli.w.is_empty() {
        job.w = cli.w.clone();
    }
    if let Some(k) = cli.kind {
        job.render = match k {
            Kind::Domain => RenderKind::Domain,
            Kind::Julia => RenderKind::Julia,
        };
    }
    if let Some(v) = &cli.re {
        job.re = range(v, "re")?;
    }
    if let Some(v) = &cli.im {
        job.im = range(v, "im")?;
    }
    job.census |= cli.census;
    job.sweep_cover |= cli.sweep_cover;
    job.masks |= cli.masks;
    if cli.threads.is_some() {
        threads = cli.threads;
    }
    Ok((job, threads))
}

fn execute(cli: &Cli) -> Result<Status> {
    let (job, threads) = job_from(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            bail!("thread count must be positive");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let out = pool.install(|| run(cli.command.into(), &job))?;
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &out.primary).with_context(|| format!("writing {}", path.display()))?;
            for (suffix, bytes) in &out.extras {
                let p = path.with_extension(suffix);
                std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        None => {
            std::io::stdout().write_all(&out.primary)?;
            for (suffix, _) in &out.extras {
                eprintln!("note: .{suffix} output needs --out");
            }
        }
    }
    Ok(out.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
