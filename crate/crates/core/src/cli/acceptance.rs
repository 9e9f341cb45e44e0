//! The acceptance suite: eleven criteria, each a list of measured values
//! checked against pinned bounds.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{extend_even, Exponent, ExponentRule};
use crate::grid::{
    gradient, hessian, make_bump, make_mean_zero_bump, quadrature, BoxDomain, DomainKind, Grid, GridFunction,
    SubGrid,
};
use crate::kernels::{max_spherical_mean, verify_kernel_identities, z_boundary_delta, Kernel, KernelId};
use crate::norms::{
    dual_norm_estimate, duality_optimizer, luxemburg_norm, modular, verify_duality, verify_holder, verify_poincare,
    Dictionary, DictionarySpec,
};
use crate::operators::{convolve, localize, pv_apply, reflect, Cutoff, CutoffProfile, Parity, PvOperator};
use crate::solvers::{
    solve_poisson_halfspace, solve_poisson_wholespace, solve_stokes_halfspace, solve_stokes_wholespace, DataFamily,
    EstimateId, EstimateSamples, SolveOptions,
};

/// Identifier and short name of every criterion.
pub const CRITERIA: [(u8, &str); 11] = [
    (1, "norm-axioms"),
    (2, "holder"),
    (3, "duality"),
    (4, "poincare"),
    (5, "kernels"),
    (6, "representation-constants"),
    (7, "poisson"),
    (8, "stokes"),
    (9, "estimate-stability"),
    (10, "localization"),
    (11, "odd-reflection"),
];

/// Seed of every randomized fixture in the suite.
pub const SUITE_SEED: u64 = 20_240_611;

pub fn criterion_name(id: u8) -> Option<&'static str> {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// One measured value against its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub bound: f64,
    pub kind: Bound,
    pub h: f64,
    pub exponent: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.kind {
            Bound::AtMost => self.value <= self.bound,
            Bound::AtLeast => self.value >= self.bound,
        }
    }

    /// Fraction of the allowance used; above one means failure.
    pub fn margin(&self) -> f64 {
        let m = match self.kind {
            Bound::AtMost if self.bound > 0.0 => self.value / self.bound,
            Bound::AtMost => {
                if self.value <= self.bound {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Bound::AtLeast => self.bound / self.value,
        };
        if m.is_nan() {
            f64::INFINITY
        } else {
            m
        }
    }
}

/// Result of one criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub checks: Vec<Check>,
}

impl Outcome {
    /// One line for terminal output.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<25} {}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

#[derive(Default)]
struct Tally {
    checks: Vec<Check>,
    h: f64,
    exponent: String,
}

impl Tally {
    fn at(&mut self, h: f64, exponent: impl Into<String>) {
        self.h = h;
        self.exponent = exponent.into();
    }

    fn push(&mut self, label: impl Into<String>, value: f64, bound: f64, kind: Bound) {
        self.checks.push(Check {
            label: label.into(),
            value,
            bound,
            kind,
            h: self.h,
            exponent: self.exponent.clone(),
        });
    }

    fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, bound, Bound::AtMost);
    }

    fn at_least(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, bound, Bound::AtLeast);
    }
}

/// Run one criterion; an error counts as a failure.
pub fn run_criterion(id: u8) -> Outcome {
    let name = criterion_name(id).unwrap_or("unknown");
    let result = match id {
        1 => norm_axioms(),
        2 => holder(),
        3 => duality(),
        4 => poincare(),
        5 => kernels(),
        6 => representation_constants(),
        7 => poisson(),
        8 => stokes(),
        9 => estimate_stability(),
        10 => localization(),
        11 => odd_reflection(),
        _ => Err(Error::Precondition(format!("unknown criterion {id}"))),
    };
    match result {
        Ok(t) if t.checks.is_empty() => Outcome {
            id,
            name,
            passed: false,
            detail: "no checks ran".into(),
            checks: t.checks,
        },
        Ok(t) => {
            let worst = t
                .checks
                .iter()
                .max_by(|a, b| a.margin().total_cmp(&b.margin()))
                .expect("non-empty");
            let failed = t.checks.iter().filter(|c| !c.passed()).count();
            let passed = failed == 0;
            let rel = match worst.kind {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            let detail = format!(
                "{} checks, {} failed; tightest {}: {:.3e} (need {} {:.3e})",
                t.checks.len(),
                failed,
                worst.label,
                worst.value,
                rel,
                worst.bound
            );
            Outcome {
                id,
                name,
                passed,
                detail,
                checks: t.checks,
            }
        }
        Err(e) => Outcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
            checks: Vec::new(),
        },
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SUITE_SEED)
}

fn unit_cube() -> Result<BoxDomain> {
    BoxDomain::cube(3, 0.0, 1.0, DomainKind::BoundedBox)
}

fn whole_grid(l: f64, h: f64) -> Result<Grid> {
    Grid::new(BoxDomain::cube(3, -l, l, DomainKind::WholeSpace)?, h)
}

fn half_grid(l: f64, h: f64) -> Result<Grid> {
    Grid::new(BoxDomain::half_space(3, l, l)?, h)
}

fn random_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..3).map(|_| rng.gen_range(0.0..1.0)).collect()
}

/// A random smooth exponent on the unit cube with values in `[lo, hi]`.
fn random_exponent(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Result<Exponent> {
    let dom = unit_cube()?;
    let mid = 0.5 * (lo + hi);
    let rule = match rng.gen_range(0..4) {
        0 => ExponentRule::Constant(rng.gen_range(lo..hi)),
        1 => {
            let a = rng.gen_range(lo..hi);
            let end = rng.gen_range(lo..hi);
            ExponentRule::Affine {
                a,
                b: end - a,
                axis: rng.gen_range(0..3),
            }
        }
        2 => {
            let a = rng.gen_range(lo..mid);
            ExponentRule::LogPerturbed {
                a,
                b: rng.gen_range(0.0..hi - a),
                center: random_point(rng),
            }
        }
        _ => {
            let base = rng.gen_range(lo..mid);
            ExponentRule::Bump {
                base,
                height: rng.gen_range(0.0..hi - base),
                center: random_point(rng),
                radius: rng.gen_range(0.3..0.7),
            }
        }
    };
    Exponent::new(rule, dom)
}

/// Random trigonometric field plus a Gaussian, at a random overall scale.
pub(crate) fn random_field(rng: &mut ChaCha8Rng, grid: &Grid) -> GridFunction {
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    let waves: Vec<([f64; 3], f64, f64)> = (0..3)
        .map(|_| {
            let w = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            (w, rng.gen_range(0.0..2.0 * PI), rng.gen_range(-1.0..1.0))
        })
        .collect();
    let d = grid.domain();
    let c: Vec<f64> = (0..d.dim()).map(|a| d.lower()[a] + rng.gen_range(0.0..1.0) * d.extent(a)).collect();
    let width = 0.1 * d.extent(0) * d.extent(0);
    let amp = rng.gen_range(-2.0..2.0);
    GridFunction::from_fn(grid, |x| {
        let mut v = 0.0;
        for (w, phase, a) in &waves {
            let arg: f64 = x.iter().zip(w).map(|(xi, wi)| xi * wi).sum();
            v += a * (2.0 * PI * arg + phase).cos();
        }
        let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        scale * (v + amp * (-r2 / width).exp())
    })
}

fn norm_axioms() -> Result<Tally> {
    let mut rng = rng();
    let grid = Grid::new(unit_cube()?, 0.125)?;
    let mut t = Tally::default();
    for k in 0..50 {
        let p = random_exponent(&mut rng, 1.1, 5.0)?;
        let f = random_field(&mut rng, &grid);
        t.at(grid.h(), p.id());
        let lambda = luxemburg_norm(&f, &p)?.value;
        let unit = modular(&f.scaled(1.0 / lambda), &p)?;
        t.at_most(format!("unit-ball#{k}"), (unit - 1.0).abs(), 1e-6);

        let c = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        let scaled = luxemburg_norm(&f.scaled(c), &p)?.value;
        let expect = c.abs() * lambda;
        t.at_most(format!("homogeneity#{k}"), (scaled - expect).abs() / expect, 1e-8);

        let pc: f64 = rng.gen_range(1.1..5.0);
        let constant = Exponent::constant(pc, unit_cube()?)?;
        t.at(grid.h(), constant.id());
        let classical = quadrature(&f.map(|v| v.abs().powf(pc)))?.powf(1.0 / pc);
        let lux = luxemburg_norm(&f, &constant)?.value;
        t.at_most(format!("classical#{k}"), (lux - classical).abs() / classical, 1e-6);
    }
    Ok(t)
}

fn holder() -> Result<Tally> {
    let mut rng = rng();
    let grid = Grid::new(unit_cube()?, 0.125)?;
    let mut t = Tally::default();
    for k in 0..100 {
        let p = random_exponent(&mut rng, 2.0, 6.0)?;
        let q = random_exponent(&mut rng, 2.0, 6.0)?;
        let f = random_field(&mut rng, &grid);
        let g = random_field(&mut rng, &grid);
        let r = verify_holder(&f, &g, &p, &q)?;
        t.at(grid.h(), r.exponent_id.clone());
        t.at_most(format!("holder#{k}"), r.sup_ratio().unwrap_or(f64::NAN), 1.0);
    }
    Ok(t)
}

fn duality() -> Result<Tally> {
    let mut rng = rng();
    let dom = unit_cube()?;
    let grid = Grid::new(dom.clone(), 0.125)?;
    let dict = Dictionary::build(&DictionarySpec::default(), &[0.0; 3], &[1.0; 3], &dom);
    let fields: Vec<GridFunction> = dict.fields().iter().map(|f| f.sample(&grid)).collect();
    let mut t = Tally::default();
    for k in 0..20 {
        let p = random_exponent(&mut rng, 1.3, 4.0)?;
        let f = random_field(&mut rng, &grid);
        t.at(grid.h(), p.id());
        let plain = verify_duality(&f, &p, &fields)?;
        t.at_most(format!("upper#{k}"), plain.cases[0].ratio.unwrap_or(f64::NAN), 1.0);
        let mut with_opt = fields.clone();
        with_opt.push(duality_optimizer(&f, &p)?);
        let r = verify_duality(&f, &p, &with_opt)?;
        t.at_most(format!("upper-self-dual#{k}"), r.cases[0].ratio.unwrap_or(f64::NAN), 1.0);
        t.at_most(format!("lower-self-dual#{k}"), r.cases[1].ratio.unwrap_or(f64::NAN), 1.0);
    }
    Ok(t)
}

/// Poincaré constant used against `diam(Ω)·‖∇u‖`.
const POINCARE_C: f64 = 1.0;

fn poincare() -> Result<Tally> {
    let dom = unit_cube()?;
    let exps = [
        Exponent::constant(2.0, dom.clone())?,
        Exponent::constant(3.0, dom.clone())?,
        Exponent::affine(2.0, 1.0, 0, dom.clone())?,
    ];
    type Field = fn(&[f64]) -> f64;
    let fixtures: [(&str, Field); 4] = [
        ("x1", |x| x[0]),
        ("trig", |x| (PI * x[0]).sin() * (PI * x[1]).cos() + x[2] * x[2]),
        ("exp", |x| (x[0] + 0.5 * x[1]).exp()),
        ("cubic", |x| x[0] * (1.0 - x[0]) * x[1]),
    ];
    let mut t = Tally::default();
    // Calibration: for p = 2 the linear fixture has closed-form sides.
    let fine = Grid::new(dom.clone(), 1.0 / 32.0)?;
    let r = verify_poincare(&GridFunction::from_fn(&fine, |x| x[0]), &exps[0], POINCARE_C)?;
    t.at(fine.h(), exps[0].id());
    let (lhs, rhs) = (r.cases[0].lhs, r.cases[0].rhs);
    t.at_most("calibration-lhs", (lhs - (1.0f64 / 12.0).sqrt()).abs() / (1.0f64 / 12.0).sqrt(), 1e-2);
    t.at_most("calibration-rhs", (rhs - 3f64.sqrt()).abs() / 3f64.sqrt(), 1e-2);
    for p in &exps {
        for (name, u) in &fixtures {
            let mut ratios = Vec::new();
            for h in [1.0 / 16.0, 1.0 / 32.0] {
                let g = Grid::new(dom.clone(), h)?;
                let r = verify_poincare(&GridFunction::from_fn(&g, u), p, POINCARE_C)?;
                let ratio = r.sup_ratio().unwrap_or(f64::NAN);
                t.at(h, p.id());
                t.at_most(format!("ratio-{name}"), ratio, 1.0);
                ratios.push(ratio);
            }
            t.at_most(format!("stability-{name}"), (ratios[0] / ratios[1]).max(ratios[1] / ratios[0]), 1.1);
        }
    }
    Ok(t)
}

fn kernels() -> Result<Tally> {
    let checks = kernel_suite(100, SUITE_SEED, 1e-8, 1e-6)?;
    Ok(Tally {
        checks,
        ..Tally::default()
    })
}

/// Spherical means of the Calderón–Zygmund families, the layer-kernel
/// identities at `points` random points, and the boundary delta limit.
pub(crate) fn kernel_suite(points: usize, seed: u64, mean_tol: f64, identity_tol: f64) -> Result<Vec<Check>> {
    let mut t = Tally::default();
    t.at(0.0, "-");
    for id in [KernelId::DdV, KernelId::DQ, KernelId::DdK] {
        t.at_most(format!("spherical-mean-{}", id.name()), max_spherical_mean(id, 3)?, mean_tol);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(points);
    while xs.len() < points {
        let x = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.05..1.0)];
        if x.iter().map(|v| v * v).sum::<f64>() >= 0.01 {
            xs.push(x);
        }
    }
    let r = verify_kernel_identities(&xs)?;
    let worst = |prefix: &str| {
        r.cases
            .iter()
            .filter(|c| c.label.starts_with(prefix))
            .map(|c| c.ratio.unwrap_or(0.0))
            .fold(0.0, f64::max)
    };
    t.at_most("laplace-identity", worst("laplace"), identity_tol);
    t.at_most("divergence-identity", worst("divergence"), identity_tol);
    for r in 0..3 {
        for l in 0..3 {
            let delta = if r == l { 1.0 } else { 0.0 };
            let v = z_boundary_delta(3, r, l, 0.01, BOUNDARY_DELTA_RADIUS)?;
            t.at_most(format!("boundary-delta-{r}{l}"), (v - delta).abs(), 1e-3);
        }
    }
    Ok(t.checks)
}

/// Truncation radius of the boundary integral in the delta check.
const BOUNDARY_DELTA_RADIUS: f64 = 100.0;

fn rel_l2(a: &GridFunction, b: &GridFunction) -> f64 {
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn representation_constants() -> Result<Tally> {
    let h = 1.0 / 32.0;
    let g = whole_grid(1.5, h)?;
    let f = make_bump(&g, &[0.0; 3], 0.75, 1.0)?;
    let big = g.window(&[-0.5; 3], &[0.5; 3])?;
    let inner = big.shrink(3)?;
    let local = SubGrid {
        grid: inner.grid.clone(),
        origin: vec![3, 3, 3],
    };
    let f_inner = {
        let sub = SubGrid {
            grid: inner.grid.clone(),
            origin: big.origin.iter().map(|o| o + 3).collect(),
        };
        f.restrict(&sub)?.with_grid(inner.grid.clone())?
    };
    let mut cache: HashMap<Kernel, GridFunction> = HashMap::new();
    let mut potential = |k: Kernel| -> Result<GridFunction> {
        if let Some(u) = cache.get(&k) {
            return Ok(u.clone());
        }
        let u = convolve(&k, &f, &big)?;
        cache.insert(k, u.clone());
        Ok(u)
    };
    let mut t = Tally::default();
    t.at(h, "-");
    let compare = |t: &mut Tally, label: String, op: PvOperator, fd: GridFunction, live: bool| -> Result<()> {
        let fd = fd.restrict(&local)?.with_grid(inner.grid.clone())?;
        let pv = pv_apply(&op, &f, &inner, true)?;
        let bare = pv.axpy(-op.correction(), &f_inner)?;
        let e = rel_l2(&pv, &fd);
        t.at_most(format!("{label}-matched"), e, 0.02);
        if live {
            t.at_least(format!("{label}-bare-over-matched"), rel_l2(&bare, &fd) / e, 10.0);
        }
        Ok(())
    };
    let hk = hessian(&potential(Kernel::k(3))?, 4)?;
    for (i, j) in [(0, 0), (0, 1), (2, 2)] {
        let op = PvOperator::new(Kernel::ddk(3, i, j))?;
        let live = op.correction() != 0.0;
        compare(&mut t, format!("ddK{i}{j}"), op, hk.component(i * 3 + j), live)?;
    }
    for (r, l, i, j) in [(0, 0, 0, 0), (0, 0, 1, 1), (1, 0, 0, 1), (0, 1, 1, 1), (2, 2, 0, 1)] {
        let hv = hessian(&potential(Kernel::v(3, r, l))?, 4)?;
        let op = PvOperator::new(Kernel::ddv(3, r, l, i, j))?;
        let live = op.correction() != 0.0;
        compare(&mut t, format!("ddV{r}{l}{i}{j}"), op, hv.component(i * 3 + j), live)?;
    }
    for (l, i) in [(0, 0), (0, 1), (2, 2)] {
        let gq = gradient(&potential(Kernel::q(3, l))?, 4)?;
        let op = PvOperator::new(Kernel::dq(3, l, i))?;
        compare(&mut t, format!("dQ{l}{i}"), op, gq.component(i), false)?;
    }
    Ok(t)
}

fn poisson() -> Result<Tally> {
    let mut t = Tally::default();
    let mut residuals = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let g = whole_grid(2.0, h)?;
        let f = make_bump(&g, &[0.0; 3], 0.5, 1.0)?;
        residuals.push(solve_poisson_wholespace(&f, &SolveOptions::default())?.residual);
    }
    t.at(1.0 / 32.0, "-");
    t.at_most("whole-residual", residuals[1], 0.05);
    t.at_least("whole-order", (residuals[0] / residuals[1]).log2(), 1.0);
    let hg = half_grid(2.0, 1.0 / 32.0)?;
    let f = make_bump(&hg, &[0.0, 0.0, 0.75], 0.5, 1.0)?;
    let s = solve_poisson_halfspace(&f, &SolveOptions::default())?;
    t.at_most("half-trace", s.boundary_trace.unwrap_or(f64::NAN), 0.0);
    t.at_most("half-residual", s.residual, 0.05);
    Ok(t)
}

fn stokes() -> Result<Tally> {
    let h = 1.0 / 32.0;
    let mut t = Tally::default();
    t.at(h, "-");
    let g = whole_grid(2.0, h)?;
    let fx = make_mean_zero_bump(&g, &[-0.5, 0.0, 0.0], 0.45, 1.0, &[1.0, 0.0, 0.0])?;
    let fy = make_mean_zero_bump(&g, &[0.0, -0.5, 0.0], 0.45, 1.0, &[0.0, 1.0, 0.0])?;
    let force = GridFunction::stack(&[fx, fy, GridFunction::zeros(&g, 1)])?;
    let cases = [
        ("dipole", GridFunction::zeros(&g, 1)),
        ("dipole-source", make_bump(&g, &[0.1, 0.0, 0.0], 0.4, 1.0)?),
    ];
    for (name, div) in &cases {
        let r = solve_stokes_wholespace(&force, div, &SolveOptions::default())?.residuals;
        t.at_most(format!("{name}-momentum"), r.momentum, 0.08);
        t.at_most(format!("{name}-divergence"), r.divergence, 0.02);
        t.at_most(format!("{name}-div-free-part"), r.divergence_free_part, 0.02);
    }
    let hg = half_grid(2.0, h)?;
    let b = make_bump(&hg, &[0.0, 0.0, 0.75], 0.5, 1.0)?;
    let f = GridFunction::stack(&[b.clone(), b.scaled(0.5), b.scaled(-0.7)])?;
    let r = solve_stokes_halfspace(&f, &GridFunction::zeros(&hg, 1), &SolveOptions::default())?.residuals;
    let before = r.boundary_trace_before.unwrap_or(f64::NAN);
    let after = r.boundary_trace.unwrap_or(f64::NAN);
    t.at_least("half-trace-reduction", before / after, 50.0);
    t.at_most("half-momentum", r.momentum, 0.1);
    t.at_most("half-divergence", r.divergence, 0.1);
    Ok(t)
}

fn estimate_stability() -> Result<Tally> {
    let dom = BoxDomain::cube(3, -1.5, 1.5, DomainKind::BoundedBox)?;
    let exps = [
        Exponent::constant(2.0, dom.clone())?,
        Exponent::constant(3.0, dom.clone())?,
        Exponent::affine(2.0, 0.3, 0, dom)?,
    ];
    let family = DataFamily::default();
    let mut t = Tally::default();
    for id in EstimateId::ALL {
        let coarse = EstimateSamples::compute(id, &family.clone().with_h(0.125))?;
        let fine = EstimateSamples::compute(id, &family.clone().with_h(0.0625))?;
        for &arm in id.arms() {
            for p in &exps {
                let a = coarse.report(arm, p)?.sup_ratio().unwrap_or(f64::NAN);
                let b = fine.report(arm, p)?.sup_ratio().unwrap_or(f64::NAN);
                t.at(0.0625, p.id());
                t.at_most(format!("{id}-{}", arm.name()), (a / b).max(b / a), 1.5);
            }
        }
    }
    Ok(t)
}

fn gaussian(x: &[f64], c: &[f64]) -> f64 {
    (-x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).exp()
}

fn localization() -> Result<Tally> {
    let h = 1.0 / 32.0;
    let g = Grid::new(BoxDomain::cube(3, -2.0, 2.0, DomainKind::BoundedBox)?, h)?;
    let centers = [[0.2, 0.0, 0.0], [0.0, -0.3, 0.1], [0.1, 0.1, -0.2]];
    let amp = [1.0, -0.5, 0.8];
    let b = [0.0, 0.2, 0.0];
    let v = GridFunction::from_fn_vec(&g, 3, |x, o| {
        for r in 0..3 {
            o[r] = amp[r] * gaussian(x, &centers[r]);
        }
    });
    let pi = GridFunction::from_fn(&g, |x| gaussian(x, &b));
    let f = GridFunction::from_fn_vec(&g, 3, |x, o| {
        let pb = gaussian(x, &b);
        for r in 0..3 {
            let s: f64 = x.iter().zip(&centers[r]).map(|(a, c)| (a - c).powi(2)).sum();
            o[r] = amp[r] * (4.0 * s - 6.0) * gaussian(x, &centers[r]) + 2.0 * (x[r] - b[r]) * pb;
        }
    });
    let div = GridFunction::from_fn(&g, |x| {
        (0..3).map(|r| -2.0 * amp[r] * (x[r] - centers[r][r]) * gaussian(x, &centers[r])).sum()
    });
    let (inner, outer) = (0.25, 1.75);
    let tau = Cutoff::cube(&[0.0; 3], inner, outer, CutoffProfile::Smooth)?;
    let loc = localize(&v, &pi, &f, &div, &tau, (&[-inner; 3], &[inner; 3]))?;
    let mut t = Tally::default();
    t.at(h, "-");
    for (r, m) in loc.momentum_mean.iter().enumerate() {
        t.at_most(format!("momentum-mean-{r}"), *m, 1e-6);
    }
    t.at_most("divergence-mean", loc.divergence_mean, 1e-6);
    let outside = (0..g.node_count())
        .filter(|&lin| g.point(lin).iter().any(|c| c.abs() >= outer))
        .filter(|&lin| {
            loc.t.node(lin).iter().any(|&x| x != 0.0)
                || loc.g.values()[lin] != 0.0
                || loc.pi.values()[lin] != 0.0
                || loc.v.node(lin).iter().any(|&x| x != 0.0)
        })
        .count();
    t.at_most("support-violations", outside as f64, 0.0);
    Ok(t)
}

fn odd_reflection() -> Result<Tally> {
    let half = BoxDomain::half_space(3, 2.0, 2.0)?;
    let gh = Grid::new(half.clone(), 0.125)?;
    let mut rng = rng();
    let mut fixtures = Vec::new();
    for _ in 0..5 {
        let r = rng.gen_range(0.3..0.5);
        let c = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(r + 0.1..1.2)];
        fixtures.push(make_bump(&gh, &c, r, rng.gen_range(0.5..1.5))?);
    }
    fixtures.push(fixtures[0].axpy(-0.7, &fixtures[1])?);
    let exps = [
        Exponent::constant(2.0, half.clone())?,
        Exponent::constant(3.0, half.clone())?,
        Exponent::affine(2.0, 0.5, 2, half.clone())?,
    ];
    let spec = DictionarySpec {
        scales: vec![0.5, 1.0],
        ..Default::default()
    };
    let whole_dict = Dictionary::whole_companion(&spec, &[-1.0, -1.0, 0.0], &[1.0; 3], &half)?;
    let half_dict = whole_dict.odd_parts();
    let mut t = Tally::default();
    for (k, f) in fixtures.iter().enumerate() {
        let odd = reflect(f, Parity::Odd)?;
        let mean = quadrature(&odd)?.abs() / quadrature(&odd.map(f64::abs))?;
        t.at(gh.h(), "-");
        t.at_most(format!("odd-mean#{k}"), mean, 1e-12);
        for p in &exps {
            let pw = extend_even(p)?;
            let eh = dual_norm_estimate(f, p, &half_dict)?.value;
            let ew = dual_norm_estimate(&odd, &pw, &whole_dict)?.value;
            t.at(gh.h(), p.id());
            t.at_most(format!("reflection#{k}"), ew / (2f64.powf(1.0 / p.p_minus()) * eh), 1.0 + 1e-6);
        }
    }
    Ok(t)
}
