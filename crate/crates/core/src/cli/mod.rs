//! Configuration-driven experiment runner and report writer.
//!
//! An [`ExperimentConfig`] is read from TOML (schema in `docs/config.md`),
//! validated as a whole, and executed by [`run`] into a [`ReportBundle`] of
//! CSV tables, solution binaries and a JSON summary.

pub mod acceptance;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exponent::{Exponent, ExponentRule};
use crate::grid::{make_bump, make_mean_zero_bump, write_grid_function, BoxDomain, DomainKind, Grid, GridFunction};
use crate::norms::luxemburg_norm;
use crate::report::{csv_field, EstimateReport};
use crate::solvers::{
    solve_poisson_halfspace, solve_poisson_wholespace, solve_stokes_halfspace, solve_stokes_wholespace, verify_estimate,
    Arm, DataFamily, EstimateId, SolveOptions,
};

pub use acceptance::{criterion_name, run_criterion, Outcome, CRITERIA};

/// Environment variable overriding the output directory.
pub const OUTPUT_ENV: &str = "VARPOT_OUTPUT_DIR";

/// Exit code of a run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code when any check or criterion failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for an invalid configuration.
pub const EXIT_CONFIG: i32 = 2;

/// Exponent description in a config file, tagged by `rule`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ExponentSpec {
    Constant { value: f64 },
    Affine { a: f64, b: f64, axis: usize },
    LogPerturbed { a: f64, b: f64, center: Vec<f64> },
    Bump { base: f64, height: f64, center: Vec<f64>, radius: f64 },
    Step { left: f64, right: f64, axis: usize, at: f64 },
}

impl ExponentSpec {
    pub fn build(&self, domain: BoxDomain) -> Result<Exponent> {
        let rule = match self.clone() {
            Self::Constant { value } => ExponentRule::Constant(value),
            Self::Affine { a, b, axis } => ExponentRule::Affine { a, b, axis },
            Self::LogPerturbed { a, b, center } => ExponentRule::LogPerturbed { a, b, center },
            Self::Bump {
                base,
                height,
                center,
                radius,
            } => ExponentRule::Bump {
                base,
                height,
                center,
                radius,
            },
            Self::Step { left, right, axis, at } => ExponentRule::Step { left, right, axis, at },
        };
        Exponent::new(rule, domain)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Poisson,
    Stokes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    Whole,
    Half,
}

fn default_points() -> usize {
    100
}

/// One stage of a run, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CheckSpec {
    /// Luxemburg norms of `family.count` seeded fields on the config grid.
    Norm,
    /// Kernel cancellation, identities and boundary limit.
    KernelCheck {
        #[serde(default = "default_points")]
        points: usize,
    },
    /// A solve on the config box with a bump fixture.
    Solve { problem: Problem, space: Space },
    /// Empirical constant of one estimate over the data family.
    Estimate { estimate: EstimateId, arm: Arm },
    /// Acceptance criteria by number; empty means all.
    Acceptance {
        #[serde(default)]
        criteria: Vec<u8>,
    },
}

impl CheckSpec {
    pub fn label(&self) -> String {
        match self {
            Self::Norm => "norm".into(),
            Self::KernelCheck { .. } => "kernel-check".into(),
            Self::Solve { problem, space } => format!("solve-{}-{}", problem_name(*problem), space_name(*space)),
            Self::Estimate { estimate, arm } => format!("estimate-{estimate}-{}", arm.name()),
            Self::Acceptance { .. } => "acceptance".into(),
        }
    }
}

fn problem_name(p: Problem) -> &'static str {
    match p {
        Problem::Poisson => "poisson",
        Problem::Stokes => "stokes",
    }
}

fn space_name(s: Space) -> &'static str {
    match s {
        Space::Whole => "whole",
        Space::Half => "half",
    }
}

/// Pass thresholds of the configurable checks. The acceptance criteria use
/// their own pinned tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|ρ(f/‖f‖) - 1|` for norm checks.
    pub unit_ball: f64,
    pub spherical_mean: f64,
    pub kernel_identity: f64,
    pub poisson_residual: f64,
    pub stokes_momentum: f64,
    pub stokes_divergence: f64,
    /// Momentum and divergence budget of half-space Stokes solves.
    pub half_space_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unit_ball: 1e-6,
            spherical_mean: 1e-8,
            kernel_identity: 1e-6,
            poisson_residual: 0.05,
            stokes_momentum: 0.08,
            stokes_divergence: 0.02,
            half_space_residual: 0.1,
        }
    }
}

impl Tolerances {
    fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("unit_ball", self.unit_ball),
            ("spherical_mean", self.spherical_mean),
            ("kernel_identity", self.kernel_identity),
            ("poisson_residual", self.poisson_residual),
            ("stokes_momentum", self.stokes_momentum),
            ("stokes_divergence", self.stokes_divergence),
            ("half_space_residual", self.half_space_residual),
        ]
    }
}

fn default_dimension() -> usize {
    3
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment id written into every CSV row.
    pub name: String,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub h: f64,
    pub exponent: ExponentSpec,
    /// Data family of the estimate checks; its seed seeds the whole run.
    #[serde(default)]
    pub family: DataFamily,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parse and validate.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Built-in configuration of the full acceptance suite.
    pub fn acceptance_preset() -> Self {
        Self {
            name: "acceptance".into(),
            dimension: 3,
            lower: vec![0.0; 3],
            upper: vec![1.0; 3],
            h: 0.125,
            exponent: ExponentSpec::Constant { value: 2.0 },
            family: DataFamily::default(),
            checks: vec![CheckSpec::Acceptance { criteria: Vec::new() }],
            tolerances: Tolerances::default(),
            output: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.family.seed
    }

    pub fn domain(&self, kind: DomainKind) -> Result<BoxDomain> {
        BoxDomain::new(&self.lower, &self.upper, kind)
    }

    pub fn exponent(&self) -> Result<Exponent> {
        self.exponent.build(self.domain(DomainKind::BoundedBox)?)
    }

    /// Check every field and report all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            errs.push("name: must be non-empty and use only letters, digits, '-' and '_'".into());
        }
        if !(1..=3).contains(&self.dimension) {
            errs.push(format!("dimension: must be 1, 2 or 3, got {}", self.dimension));
        }
        if self.lower.len() != self.dimension || self.upper.len() != self.dimension {
            errs.push(format!("lower/upper: need {} coordinates each", self.dimension));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            errs.push(format!("h: must be positive, got {}", self.h));
        }
        let domain = self.domain(DomainKind::BoundedBox);
        match &domain {
            Err(e) => errs.push(format!("lower/upper: {e}")),
            Ok(d) => {
                let shortest = (0..d.dim()).map(|a| d.extent(a)).fold(f64::INFINITY, f64::min);
                if self.h > 0.0 && self.h > shortest / 4.0 {
                    errs.push(format!("h: must be at most a quarter of the shortest side, got {}", self.h));
                }
                match self.exponent.build(d.clone()) {
                    Err(e) => errs.push(format!("exponent: {e}")),
                    Ok(p) if p.p_minus() < 1.0 => errs.push(format!("exponent: p- = {} is below 1", p.p_minus())),
                    Ok(_) => {}
                }
            }
        }
        for (name, v) in self.tolerances.named() {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("tolerances.{name}: must be positive, got {v}"));
            }
        }
        let needs_family = self.checks.iter().any(|c| matches!(c, CheckSpec::Estimate { .. } | CheckSpec::Norm));
        if needs_family {
            if let Err(e) = self.family.validate() {
                errs.push(format!("family: {e}"));
            }
        }
        for (i, check) in self.checks.iter().enumerate() {
            let at = format!("checks[{i}]");
            match check {
                CheckSpec::Solve { space, .. } => {
                    if self.dimension != 3 {
                        errs.push(format!("{at}: solves need dimension 3"));
                    } else if *space == Space::Half && self.lower.get(2) != Some(&0.0) {
                        errs.push(format!("{at}: half-space solves need lower[2] = 0"));
                    }
                }
                CheckSpec::Estimate { estimate, arm } => {
                    if self.dimension != 3 {
                        errs.push(format!("{at}: estimates need dimension 3"));
                    }
                    if !estimate.arms().contains(arm) {
                        errs.push(format!("{at}: {estimate} has no {} arm", arm.name()));
                    }
                }
                CheckSpec::KernelCheck { points } if *points == 0 => {
                    errs.push(format!("{at}: points must be positive"));
                }
                CheckSpec::Acceptance { criteria } => {
                    let mut seen = Vec::new();
                    for &c in criteria {
                        if criterion_name(c).is_none() {
                            errs.push(format!("{at}: unknown criterion {c}"));
                        } else if seen.contains(&c) {
                            errs.push(format!("{at}: criterion {c} listed twice"));
                        }
                        seen.push(c);
                    }
                }
                _ => {}
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Output directory: explicit argument, then [`OUTPUT_ENV`], then the config.
pub fn output_dir(config: &ExperimentConfig, explicit: Option<PathBuf>) -> Option<PathBuf> {
    explicit
        .or_else(|| std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| config.output.clone())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub version: String,
    pub seed: u64,
}

/// Outcome of one configured check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckStatus {
    pub index: usize,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionStatus {
    Pass,
    Fail,
    NotRun,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub id: u8,
    pub name: String,
    pub status: CriterionStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub passed: bool,
    pub provenance: Provenance,
    pub checks: Vec<CheckStatus>,
    /// Every acceptance criterion, exactly once.
    pub criteria: Vec<CriterionSummary>,
}

/// Everything a run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportBundle {
    /// File name to CSV content.
    pub tables: BTreeMap<String, String>,
    /// File name to grid binary.
    pub binaries: BTreeMap<String, Vec<u8>>,
    pub summary: Summary,
}

impl ReportBundle {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    /// Write tables, binaries and `summary.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &self.tables {
            std::fs::write(dir.join(name), body)?;
        }
        for (name, body) in &self.binaries {
            std::fs::write(dir.join(name), body)?;
        }
        std::fs::write(dir.join("summary.json"), self.summary_json() + "\n")?;
        Ok(())
    }

    fn row(&mut self, table: &str, header: &str, line: String) {
        let body = self.tables.entry(table.to_string()).or_insert_with(|| format!("{header}\n"));
        body.push_str(&line);
        body.push('\n');
    }
}

const NORMS_HEADER: &str = "experiment,field,norm,modular_at_norm,iterations,passed,h,exponent,seed";
const KERNELS_HEADER: &str = "experiment,check,value,bound,passed,h,exponent,seed";
const RESIDUALS_HEADER: &str = "experiment,problem,space,residual,divergence,divergence_free_part,\
boundary_trace,boundary_trace_before,passed,h,exponent,seed";
const ACCEPTANCE_HEADER: &str = "experiment,criterion,name,check,value,bound,passed,h,exponent,seed";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

/// Execute the checks of `config` in order. Only an invalid configuration
/// is an error; a failing check is recorded in the summary.
pub fn run(config: &ExperimentConfig) -> Result<ReportBundle> {
    config.validate()?;
    let seed = config.seed();
    let mut bundle = ReportBundle {
        tables: BTreeMap::new(),
        binaries: BTreeMap::new(),
        summary: Summary {
            experiment: config.name.clone(),
            passed: true,
            provenance: Provenance {
                config_sha256: config.hash(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
            },
            checks: Vec::new(),
            criteria: Vec::new(),
        },
    };
    let mut outcomes: BTreeMap<u8, Outcome> = BTreeMap::new();
    for (index, check) in config.checks.iter().enumerate() {
        let result = match check {
            CheckSpec::Norm => norm_check(config, &mut bundle),
            CheckSpec::KernelCheck { points } => kernel_check(config, *points, &mut bundle),
            CheckSpec::Solve { problem, space } => solve_check(config, *problem, *space, &mut bundle),
            CheckSpec::Estimate { estimate, arm } => estimate_check(config, *estimate, *arm, &mut bundle),
            CheckSpec::Acceptance { criteria } => acceptance_check(config, criteria, &mut outcomes, &mut bundle),
        };
        let (passed, detail) = match result {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        bundle.summary.passed &= passed;
        bundle.summary.checks.push(CheckStatus {
            index,
            check: check.label(),
            passed,
            detail,
        });
    }
    bundle.summary.criteria = CRITERIA
        .iter()
        .map(|&(id, name)| match outcomes.get(&id) {
            Some(o) => CriterionSummary {
                id,
                name: name.into(),
                status: if o.passed { CriterionStatus::Pass } else { CriterionStatus::Fail },
                detail: o.detail.clone(),
            },
            None => CriterionSummary {
                id,
                name: name.into(),
                status: CriterionStatus::NotRun,
                detail: String::new(),
            },
        })
        .collect();
    Ok(bundle)
}

type CheckResult = Result<(bool, String)>;

fn norm_check(config: &ExperimentConfig, bundle: &mut ReportBundle) -> CheckResult {
    let grid = Grid::new(config.domain(DomainKind::BoundedBox)?, config.h)?;
    let p = config.exponent()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    let mut worst = 0.0f64;
    for k in 0..config.family.count {
        let f = acceptance::random_field(&mut rng, &grid);
        let r = luxemburg_norm(&f, &p)?;
        let dev = (r.modular_at_value - 1.0).abs();
        worst = worst.max(dev);
        let ok = dev <= config.tolerances.unit_ball;
        bundle.row(
            "norms.csv",
            NORMS_HEADER,
            format!(
                "{},field{k},{:e},{:e},{},{ok},{:e},{},{}",
                config.name,
                r.value,
                r.modular_at_value,
                r.iterations,
                grid.h(),
                csv_field(&p.id()),
                config.seed()
            ),
        );
    }
    let passed = worst <= config.tolerances.unit_ball;
    Ok((passed, format!("{} fields, worst |rho - 1| {worst:.3e}", config.family.count)))
}

fn kernel_check(config: &ExperimentConfig, points: usize, bundle: &mut ReportBundle) -> CheckResult {
    let t = &config.tolerances;
    let checks = acceptance::kernel_suite(points, config.seed(), t.spherical_mean, t.kernel_identity)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    for c in &checks {
        bundle.row(
            "kernels.csv",
            KERNELS_HEADER,
            format!(
                "{},{},{:e},{:e},{},{:e},{},{}",
                config.name,
                c.label,
                c.value,
                c.bound,
                c.passed(),
                config.h,
                csv_field(&c.exponent),
                config.seed()
            ),
        );
    }
    Ok((failed == 0, format!("{} checks, {failed} failed", checks.len())))
}

/// Bump data centered in the box (and above `Σ` for half-space solves).
fn solve_check(config: &ExperimentConfig, problem: Problem, space: Space, bundle: &mut ReportBundle) -> CheckResult {
    let kind = match space {
        Space::Whole => DomainKind::WholeSpace,
        Space::Half => DomainKind::HalfSpace,
    };
    let domain = config.domain(kind)?;
    let grid = Grid::new(domain.clone(), config.h)?;
    let mid: Vec<f64> = (0..3).map(|a| 0.5 * (domain.lower()[a] + domain.upper()[a])).collect();
    let t = &config.tolerances;
    let opts = SolveOptions::default();
    let exponent = config.exponent()?.id();
    let tag = format!("{}-{}", problem_name(problem), space_name(space));
    let (residual, divergence, free, trace, before, passed, fields) = match (problem, space) {
        (Problem::Poisson, _) => {
            let (c, r) = bump_placement(&domain, &mid, space);
            let f = make_bump(&grid, &c, r, 1.0)?;
            let s = match space {
                Space::Whole => solve_poisson_wholespace(&f, &opts)?,
                Space::Half => solve_poisson_halfspace(&f, &opts)?,
            };
            let ok = s.residual <= t.poisson_residual && s.boundary_trace.map_or(true, |b| b == 0.0);
            (s.residual, None, None, s.boundary_trace, None, ok, vec![("solution", s.u)])
        }
        (Problem::Stokes, Space::Whole) => {
            let ext = (0..3).map(|a| domain.extent(a)).fold(f64::INFINITY, f64::min);
            let (off, r) = (ext / 8.0, 0.9 * ext / 8.0);
            let mut a = mid.clone();
            a[0] -= off;
            let mut b = mid.clone();
            b[1] -= off;
            let fx = make_mean_zero_bump(&grid, &a, r, 1.0, &[2.0 * off, 0.0, 0.0])?;
            let fy = make_mean_zero_bump(&grid, &b, r, 1.0, &[0.0, 2.0 * off, 0.0])?;
            let f = GridFunction::stack(&[fx, fy, GridFunction::zeros(&grid, 1)])?;
            let s = solve_stokes_wholespace(&f, &GridFunction::zeros(&grid, 1), &opts)?;
            let q = s.residuals;
            let ok = q.momentum <= t.stokes_momentum
                && q.divergence <= t.stokes_divergence
                && q.divergence_free_part <= t.stokes_divergence;
            let fields = vec![("solution", s.v), ("pressure", s.pi)];
            (q.momentum, Some(q.divergence), Some(q.divergence_free_part), None, None, ok, fields)
        }
        (Problem::Stokes, Space::Half) => {
            let (c, r) = bump_placement(&domain, &mid, space);
            let b = make_bump(&grid, &c, r, 1.0)?;
            let f = GridFunction::stack(&[b.clone(), b.scaled(0.5), b.scaled(-0.7)])?;
            let s = solve_stokes_halfspace(&f, &GridFunction::zeros(&grid, 1), &opts)?;
            let q = s.residuals;
            let ok = q.momentum <= t.half_space_residual && q.divergence <= t.half_space_residual;
            let fields = vec![("solution", s.v), ("pressure", s.pi)];
            let (tr, tb) = (q.boundary_trace, q.boundary_trace_before);
            (q.momentum, Some(q.divergence), Some(q.divergence_free_part), tr, tb, ok, fields)
        }
    };
    bundle.row(
        "residuals.csv",
        RESIDUALS_HEADER,
        format!(
            "{},{},{},{:e},{},{},{},{},{passed},{:e},{},{}",
            config.name,
            problem_name(problem),
            space_name(space),
            residual,
            opt(divergence),
            opt(free),
            opt(trace),
            opt(before),
            config.h,
            csv_field(&exponent),
            config.seed()
        ),
    );
    for (name, field) in fields {
        let mut bytes = Vec::new();
        write_grid_function(&field, &mut bytes)?;
        bundle.binaries.insert(format!("{name}-{tag}.bin"), bytes);
    }
    Ok((passed, format!("residual {residual:.3e}")))
}

/// Center and radius of the solve fixture: an eighth of the shortest side,
/// raised to three eighths of the height for half-space boxes.
fn bump_placement(domain: &BoxDomain, mid: &[f64], space: Space) -> (Vec<f64>, f64) {
    let ext = (0..3).map(|a| domain.extent(a)).fold(f64::INFINITY, f64::min);
    let mut c = mid.to_vec();
    match space {
        Space::Whole => (c, ext / 8.0),
        Space::Half => {
            let height = domain.extent(2);
            let r = (domain.extent(0).min(domain.extent(1)) / 8.0).min(height / 4.0);
            c[2] = 0.375 * height;
            (c, r)
        }
    }
}

fn estimate_check(config: &ExperimentConfig, id: EstimateId, arm: Arm, bundle: &mut ReportBundle) -> CheckResult {
    let family = config.family.clone().with_h(config.h);
    let p = config.exponent()?;
    let report: EstimateReport = verify_estimate(id, arm, &family, &p)?;
    let mut buf = Vec::new();
    report.write_csv_rows(&config.name, config.seed(), &mut buf)?;
    let body = bundle
        .tables
        .entry("estimates.csv".into())
        .or_insert_with(|| format!("{}\n", EstimateReport::CSV_HEADER));
    body.push_str(&String::from_utf8(buf).expect("csv is utf-8"));
    let finite = report.cases.iter().filter_map(|c| c.ratio).all(f64::is_finite);
    let sup = report.sup_ratio().unwrap_or(f64::NAN);
    Ok((finite, format!("{} cases, sup ratio {sup:.4e}", report.cases.len())))
}

fn acceptance_check(
    config: &ExperimentConfig,
    criteria: &[u8],
    outcomes: &mut BTreeMap<u8, Outcome>,
    bundle: &mut ReportBundle,
) -> CheckResult {
    let ids: Vec<u8> = if criteria.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        criteria.to_vec()
    };
    let mut failed = Vec::new();
    for id in ids {
        let o = outcomes.entry(id).or_insert_with(|| run_criterion(id)).clone();
        for c in &o.checks {
            bundle.row(
                "acceptance.csv",
                ACCEPTANCE_HEADER,
                format!(
                    "{},{},{},{},{:e},{:e},{},{:e},{},{}",
                    config.name,
                    o.id,
                    o.name,
                    csv_field(&c.label),
                    c.value,
                    c.bound,
                    c.passed(),
                    c.h,
                    csv_field(&c.exponent),
                    acceptance::SUITE_SEED
                ),
            );
        }
        if !o.passed {
            failed.push(id);
        }
    }
    let detail = if failed.is_empty() {
        "all criteria passed".to_string()
    } else {
        format!("failed criteria {failed:?}")
    };
    Ok((failed.is_empty(), detail))
}
