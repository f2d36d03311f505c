//! Job configuration and the report produced by each front-end command.
//! Everything here is a pure function of the configuration, so outputs are
//! byte-identical for any thread count.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{classify, periodic_point_near, periodic_points, PeriodicPoint, PointClass};
use crate::error::{Error, Result};
use crate::growth::series_order;
use crate::rational::{MapSpec, RationalMap};
use crate::render::{render_domain_coloring, render_julia, MAX_GRID};
use crate::schroeder::SchroederSeries;
use crate::singularity::basin::basin_components_of_infinity;
use crate::singularity::census::{census, CensusOptions, CrossCheck, SingularValue};
use crate::singularity::cover::complete_covering_probe;
use crate::singularity::lambda::{lambda_action, LambdaMatching};
use crate::singularity::ply::PlyReport;
use crate::singularity::tracts::{default_ladder, tract_family, Tract, TractFamily, Verdict};
use crate::singularity::{BoxLadder, Persistence};
use crate::sphere::{complex_pair, complex_vec, SpherePoint};
use crate::sweep::{sweep, sweep_csv, sweep_heatmap, SweepOptions, MAX_CELLS};
use crate::unhyp::{critical_reports, mane_from_reports, semihyperbolicity_probe, Cluster, OmegaLimitApprox};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
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

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderKind {
    Domain,
    Julia,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub map: Option<MapSpec>,
    /// Approximate base point; refined to a periodic point of the given period.
    pub z0: Option<SpherePoint>,
    pub period: usize,
    pub order_n: usize,
    #[serde(rename = "box")]
    pub half_width: f64,
    pub grid: usize,
    pub radii: Option<Vec<f64>>,
    /// Target value for `tracts`, `cover` and `probe`.
    pub value: Option<SpherePoint>,
    /// Run the full census in `tracts` instead of a single value.
    pub census: bool,
    #[serde(with = "complex_vec")]
    pub w: Vec<Complex64>,
    pub r_max: f64,
    pub samples: usize,
    pub probe_radius: f64,
    pub k_max: usize,
    pub orbit_length: usize,
    pub eps: f64,
    pub render: RenderKind,
    #[serde(with = "complex_pair")]
    pub center: Complex64,
    pub max_iter: usize,
    pub degree: usize,
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub sweep_cover: bool,
    pub masks: bool,
}

impl Default for JobConfig {
    fn default() -> Self {
        let s = SweepOptions::default();
        JobConfig {
            map: None,
            z0: None,
            period: 1,
            order_n: crate::schroeder::DEFAULT_ORDER,
            half_width: 20.0,
            grid: 256,
            radii: None,
            value: None,
            census: false,
            w: vec![Complex64::new(0.0, 0.0)],
            r_max: 1e6,
            samples: crate::growth::DEFAULT_SAMPLES,
            probe_radius: 0.05,
            k_max: 6,
            orbit_length: crate::unhyp::DEFAULT_ORBIT_LENGTH,
            eps: crate::unhyp::DEFAULT_EPS,
            render: RenderKind::Domain,
            center: Complex64::new(0.0, 0.0),
            max_iter: s.max_iter,
            degree: s.degree,
            re: [s.re.0, s.re.1],
            im: [s.im.0, s.im.1],
            nx: s.nx,
            ny: s.ny,
            sweep_cover: false,
            masks: false,
        }
    }
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Precondition(m.to_string()));
        if self.period == 0 || self.order_n < 2 || self.samples == 0 || self.k_max == 0 || self.nx == 0 || self.ny == 0 {
            return bad("numeric parameters must be positive");
        }
        if !(self.half_width > 0.0 && self.r_max > 0.0 && self.probe_radius > 0.0 && self.eps > 0.0) {
            return bad("numeric parameters must be positive");
        }
        if self.grid == 0 || self.grid > MAX_GRID {
            return bad("grid outside 1..=8192");
        }
        if self.nx * self.ny > MAX_CELLS {
            return bad("sweep cell count exceeds 1e7");
        }
        if !(self.re[0] < self.re[1] && self.im[0] < self.im[1]) {
            return bad("sweep ranges must be increasing");
        }
        Ok(())
    }

    pub fn rational_map(&self) -> Result<RationalMap> {
        self.map
            .as_ref()
            .ok_or_else(|| Error::Precondition("this command needs a map".into()))?
            .to_map()
    }

    fn radii(&self) -> Vec<f64> {
        self.radii.clone().unwrap_or_else(default_ladder)
    }

    fn target(&self) -> Result<SpherePoint> {
        self.value
            .ok_or_else(|| Error::Precondition("this command needs a target value".into()))
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            degree: self.degree,
            re: (self.re[0], self.re[1]),
            im: (self.im[0], self.im[1]),
            nx: self.nx,
            ny: self.ny,
            max_iter: self.max_iter,
            cover: self.sweep_cover,
            cover_box: self.half_width,
            cover_grid: self.grid.max(crate::singularity::MIN_GRID),
        }
    }

    /// The base point: `z0` refined, or the finite repelling point of the
    /// period with the smallest multiplier.
    pub fn base_point(&self, map: &RationalMap) -> Result<PeriodicPoint> {
        match self.z0 {
            Some(SpherePoint::Finite(z)) => periodic_point_near(map, z, self.period),
            Some(SpherePoint::Infinity) => Err(Error::Precondition("the base point must be finite".into())),
            None => periodic_points(map, self.period)?
                .into_iter()
                .filter(|p| !p.z0.is_infinite() && classify(p.multiplier) == PointClass::Repelling)
                .min_by(|a, b| a.multiplier.norm().total_cmp(&b.multiplier.norm()))
                .ok_or_else(|| Error::Precondition(format!("no finite repelling point of period {}", self.period))),
        }
    }

    pub fn series(&self) -> Result<SchroederSeries> {
        let map = self.rational_map()?;
        let point = self.base_point(&map)?;
        SchroederSeries::build(Arc::new(map), &point, self.order_n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
}

/// Main artifact plus side files named by suffix.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub primary: Vec<u8>,
    pub extras: Vec<(String, Vec<u8>)>,
    pub status: Status,
}

impl CommandOutput {
    fn json<T: Serialize>(v: &T, status: Status) -> Self {
        let mut primary = serde_json::to_vec_pretty(v).expect("reports serialize");
        primary.push(b'\n');
        CommandOutput {
            primary,
            extras: Vec::new(),
            status,
        }
    }
}

pub fn run(command: Command, cfg: &JobConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    match command {
        Command::Coeffs => Ok(CommandOutput::json(&cfg.series()?.export(), Status::Ok)),
        Command::Eval => eval_report(cfg),
        Command::Order => order_report(cfg),
        Command::Tracts if cfg.census => census_report(cfg),
        Command::Tracts => tracts_report(cfg),
        Command::Ply => ply_report(cfg),
        Command::Probe => probe_report(cfg),
        Command::Cover => cover_report(cfg),
        Command::Render => render_report(cfg),
        Command::Sweep => sweep_report(cfg),
    }
}

#[derive(Serialize)]
struct EvalRow {
    #[serde(with = "complex_pair")]
    w: Complex64,
    value: SpherePoint,
    depth: usize,
    error_estimate: f64,
}

fn eval_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let s = cfg.series()?;
    let rows: Vec<EvalRow> = cfg
        .w
        .iter()
        .map(|&w| {
            let e = s.evaluate_with_error(w);
            EvalRow {
                w,
                value: e.value,
                depth: e.depth,
                error_estimate: e.error_estimate,
            }
        })
        .collect();
    Ok(CommandOutput::json(&rows, Status::Ok))
}

#[derive(Serialize)]
struct OrderReport {
    rho: f64,
    rho_empirical: f64,
    relative_error: f64,
    monotone: bool,
    radii: Vec<f64>,
    log_max: Vec<f64>,
}

fn order_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let s = cfg.series()?;
    let profile = series_order(&s, cfg.r_max, cfg.samples)?;
    let rho = profile.theoretical.unwrap_or(f64::NAN);
    let mut out = CommandOutput::json(
        &OrderReport {
            rho,
            rho_empirical: profile.slope,
            relative_error: (profile.slope - rho).abs() / rho,
            monotone: profile.is_monotone(1e-9),
            radii: profile.radii.clone(),
            log_max: profile.log_max.clone(),
        },
        Status::Ok,
    );
    out.extras.push(("csv".into(), profile.to_csv().into_bytes()));
    Ok(out)
}

#[derive(Serialize)]
struct RungSummary {
    r: f64,
    components: usize,
    unbounded: usize,
    ambiguous: usize,
}

#[derive(Serialize)]
struct FamilySummary {
    a: SpherePoint,
    rungs: Vec<RungSummary>,
    tracts: Vec<Tract>,
    verdicts: Vec<Verdict>,
    vanished: Vec<u32>,
    unstable: bool,
}

impl FamilySummary {
    fn of(f: &TractFamily) -> Self {
        FamilySummary {
            a: f.a,
            rungs: f
                .rungs
                .iter()
                .map(|r| RungSummary {
                    r: r.r,
                    components: r.components.len(),
                    unbounded: r.labels.ids_with(Persistence::Unbounded).len(),
                    ambiguous: r.labels.ids_with(Persistence::Ambiguous).len(),
                })
                .collect(),
            tracts: f.tracts.clone(),
            verdicts: f.verdicts(),
            vanished: f.vanished.clone(),
            unstable: f.unstable,
        }
    }

    fn conclusive(&self) -> bool {
        !self.unstable && !self.verdicts.contains(&Verdict::Inconclusive)
    }
}

#[derive(Serialize)]
struct TractsReport {
    a: SpherePoint,
    half_width: f64,
    grid: usize,
    rungs: Vec<RungSummary>,
    tracts: Vec<Tract>,
    verdicts: Vec<Verdict>,
    unstable: bool,
    q_inf: Option<usize>,
    lambda: Option<LambdaMatching>,
    ply: Option<PlyReport>,
}

fn tracts_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let s = cfg.series()?;
    let a = cfg.target()?;
    let ladder = BoxLadder::evaluate(&s, cfg.half_width, cfg.grid);
    let family = tract_family(&s, &ladder, a, &cfg.radii())?;
    let image = s.map().iterate(a, s.period());
    let lambda = if crate::sphere::chordal(image, a) < crate::singularity::census::VALUE_TOL && !family.tracts.is_empty() {
        lambda_action(&family, &family, s.lambda(), true).ok()
    } else {
        None
    };
    let (q_inf, ply) = if s.map().is_polynomial() {
        let b = basin_components_of_infinity(&s, &ladder)?;
        (Some(b.q_inf), b.ply(&s))
    } else {
        (None, None)
    };
    let summary = FamilySummary::of(&family);
    let status = if summary.conclusive() { Status::Ok } else { Status::Inconclusive };
    let mut out = CommandOutput::json(
        &TractsReport {
            a,
            half_width: cfg.half_width,
            grid: cfg.grid,
            rungs: summary.rungs,
            tracts: summary.tracts,
            verdicts: summary.verdicts,
            unstable: summary.unstable,
            q_inf,
            lambda,
            ply,
        },
        status,
    );
    if cfg.masks {
        for (i, rung) in family.rungs.iter().enumerate() {
            out.extras.push((format!("rung{i}.pgm"), rung.labels.labeling.to_pgm()));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CensusReport {
    rho: f64,
    max_direct: usize,
    max_finite: Option<usize>,
    direct_count: usize,
    finite_count: usize,
    within_budget: bool,
    singular_values: Vec<SingularValue>,
    families: Vec<FamilySummary>,
    matchings: Vec<LambdaMatching>,
    crosscheck: CrossCheck,
    notes: Vec<String>,
}

fn census_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let s = cfg.series()?;
    let opts = CensusOptions {
        half_width: cfg.half_width,
        grid: cfg.grid,
        radii: cfg.radii(),
        eps: cfg.eps,
        ..CensusOptions::default()
    };
    let c = census(&s, &opts)?;
    let families: Vec<FamilySummary> = c.families.iter().map(FamilySummary::of).collect();
    let status = if families.iter().all(FamilySummary::conclusive) { Status::Ok } else { Status::Inconclusive };
    Ok(CommandOutput::json(
        &CensusReport {
            rho: c.rho,
            max_direct: c.budget.max_direct,
            max_finite: c.budget.max_finite,
            direct_count: c.direct_count,
            finite_count: c.finite_count,
            within_budget: c.within_budget,
            singular_values: c.singular_values,
            families,
            matchings: c.matchings,
            crosscheck: c.crosscheck,
            notes: c.notes,
        },
        status,
    ))
}

#[derive(Serialize)]
struct PlyOutput {
    q_inf: usize,
    p_inf: Option<usize>,
    m_inf: Option<usize>,
    q: Option<usize>,
    p: Option<usize>,
    arg_branch: Option<f64>,
    lhs: Option<f64>,
    rhs: Option<f64>,
    slack: Option<f64>,
    el: bool,
    violation: Option<bool>,
    consistent: bool,
    exceeds_dca: bool,
    spiral: Vec<f64>,
    closed_form_spiral: Option<f64>,
    notes: Vec<String>,
}

fn ply_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let s = cfg.series()?;
    let ladder = BoxLadder::evaluate(&s, cfg.half_width, cfg.grid);
    let b = basin_components_of_infinity(&s, &ladder)?;
    let ply = b.ply(&s);
    let status = match &ply {
        Some(p) if b.accepted() && !p.violation => Status::Ok,
        _ => Status::Inconclusive,
    };
    Ok(CommandOutput::json(
        &PlyOutput {
            q_inf: b.q_inf,
            p_inf: b.p_inf,
            m_inf: b.m_inf,
            q: b.q,
            p: b.p,
            arg_branch: ply.as_ref().map(|p| p.arg_branch),
            lhs: ply.as_ref().map(|p| p.lhs),
            rhs: ply.as_ref().map(|p| p.rhs),
            slack: ply.as_ref().map(|p| p.slack),
            el: b.el,
            violation: ply.as_ref().map(|p| p.violation),
            consistent: b.consistent,
            exceeds_dca: b.exceeds_dca,
            spiral: b.components.iter().map(|c| c.spiral).collect(),
            closed_form_spiral: b.closed_form_spiral,
            notes: b.notes,
        },
        status,
    ))
}

#[derive(Serialize)]
struct CriticalSummary {
    c: SpherePoint,
    multiplicity: usize,
    escaped: bool,
    in_julia: bool,
}

#[derive(Serialize)]
struct ProbeSummary {
    a: SpherePoint,
    r: f64,
    degrees: Vec<usize>,
    running_max: usize,
    grows: bool,
    partial_at: Option<usize>,
}

#[derive(Serialize)]
struct ProbeReport {
    critical_points: Vec<CriticalSummary>,
    omega: Vec<OmegaLimitApprox>,
    mane: Vec<Cluster>,
    probe: ProbeSummary,
}

fn probe_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let map = cfg.rational_map()?;
    let a = cfg.target()?;
    let reports = critical_reports(&map, cfg.orbit_length, cfg.eps)?;
    let mane = mane_from_reports(&reports);
    let probe = semihyperbolicity_probe(&map, a, cfg.probe_radius, cfg.k_max, cfg.grid)?;
    let status = if probe.partial_at.is_some() { Status::Inconclusive } else { Status::Ok };
    Ok(CommandOutput::json(
        &ProbeReport {
            critical_points: reports
                .iter()
                .map(|r| CriticalSummary {
                    c: r.c,
                    multiplicity: r.multiplicity,
                    escaped: r.escaped,
                    in_julia: r.in_julia,
                })
                .collect(),
            omega: reports.iter().map(|r| r.omega.clone()).collect(),
            mane: mane.clusters,
            probe: ProbeSummary {
                a: probe.a,
                r: probe.r,
                degrees: probe.degrees,
                running_max: probe.running_max,
                grows: probe.grows,
                partial_at: probe.partial_at,
            },
        },
        status,
    ))
}

fn cover_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let s = cfg.series()?;
    let a = cfg.target()?;
    let ladder = BoxLadder::evaluate(&s, cfg.half_width, cfg.grid);
    let r = complete_covering_probe(&s, &ladder, a, &cfg.radii())?;
    let status = if r.verdict == crate::singularity::cover::CoverVerdict::Inconclusive {
        Status::Inconclusive
    } else {
        Status::Ok
    };
    Ok(CommandOutput::json(&r, status))
}

fn render_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let img = match cfg.render {
        RenderKind::Domain => render_domain_coloring(&cfg.series()?, cfg.center, cfg.half_width, cfg.grid)?,
        RenderKind::Julia => render_julia(&cfg.rational_map()?, cfg.center, cfg.half_width, cfg.grid, cfg.max_iter)?,
    };
    Ok(CommandOutput {
        primary: img.encode(),
        extras: Vec::new(),
        status: Status::Ok,
    })
}

fn sweep_report(cfg: &JobConfig) -> Result<CommandOutput> {
    let opts = cfg.sweep_options();
    let cells = sweep(&opts)?;
    Ok(CommandOutput {
        primary: sweep_csv(&cells).into_bytes(),
        extras: vec![("ppm".into(), sweep_heatmap(&opts, &cells).encode())],
        status: Status::Ok,
    })
}
