//! Empirical constants of the a-priori estimates over seeded data families.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{bump_profile, gradient, make_bump, make_mean_zero_bump, BoxDomain, DomainKind, Grid, GridFunction, SubGrid};
use crate::norms::{derivative_tensor, luxemburg_norm, Dictionary, DictionarySpec, PreparedDictionary};
use crate::operators::{layer_apply, LayerOperator};
use crate::kernels::Kernel;
use crate::report::{EstimateCase, EstimateReport};

use super::stokes::layer_fields;
use super::{solve_poisson_wholespace, solve_stokes_halfspace, solve_stokes_wholespace, SolveOptions, RESIDUAL_FD_ACCURACY};

/// The estimates that can be measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateId {
    /// `‖∇u‖ ≤ c‖f‖_{D^{-1}}`, `‖∇²u‖ ≤ c‖f‖` for the Newton potential.
    WholePoisson,
    /// `‖∇v‖ + ‖π‖ ≤ c‖f‖_{D^{-1}}`, `‖∇²v‖ + ‖∇π‖ ≤ c‖f‖` with `div v = 0`.
    WholeStokes,
    /// The whole-space Stokes estimates with prescribed divergence `g`.
    WholeStokesDivergence,
    /// `‖∇w‖ + ‖ν‖ ≤ c‖∇h‖`, `‖∇²w‖ + ‖∇ν‖ ≤ c‖∇²h‖` for the layer potentials.
    LayerPotential,
    /// The Stokes estimates on the half-space with zero boundary values.
    HalfStokes,
    /// `‖∇Hf‖ ≤ c‖∇f‖` for the boundary operator with kernel `Z^{nn}`.
    BoundaryOperator,
}

impl EstimateId {
    pub const ALL: [EstimateId; 6] = [
        EstimateId::WholePoisson,
        EstimateId::WholeStokes,
        EstimateId::WholeStokesDivergence,
        EstimateId::LayerPotential,
        EstimateId::HalfStokes,
        EstimateId::BoundaryOperator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimateId::WholePoisson => "whole-poisson",
            EstimateId::WholeStokes => "whole-stokes",
            EstimateId::WholeStokesDivergence => "whole-stokes-divergence",
            EstimateId::LayerPotential => "layer-potential",
            EstimateId::HalfStokes => "half-stokes",
            EstimateId::BoundaryOperator => "boundary-operator",
        }
    }

    pub fn arms(self) -> &'static [Arm] {
        match self {
            EstimateId::BoundaryOperator => &[Arm::Weak],
            _ => &[Arm::Weak, Arm::Strong],
        }
    }

    fn is_half(self) -> bool {
        matches!(self, EstimateId::LayerPotential | EstimateId::HalfStokes | EstimateId::BoundaryOperator)
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown estimate `{s}`")))
    }
}

/// First-order (`weak`) or second-order (`strong`) form of an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Weak,
    Strong,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::Weak => "weak",
            Arm::Strong => "strong",
        }
    }
}

/// Seeded random bump data. Members depend only on the seed, not on `h`,
/// so one family can be compared across refinements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataFamily {
    pub count: usize,
    pub seed: u64,
    /// Range of bump radii.
    pub radii: (f64, f64),
    pub h: f64,
    /// The box is `[-L, L]^3`, or `[-L, L]^2 × [0, L]` for half-space data.
    pub half_width: f64,
    /// Add an all-zero member (its case is skipped).
    pub include_zero: bool,
    pub dictionary: DictionarySpec,
}

impl Default for DataFamily {
    fn default() -> Self {
        Self {
            count: 10,
            seed: 7,
            radii: (0.25, 0.35),
            h: 0.125,
            half_width: 1.5,
            include_zero: false,
            dictionary: DictionarySpec::default(),
        }
    }
}

/// Data of one family member; unused entries are `None`.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub label: String,
    pub f: Option<GridFunction>,
    pub g: Option<GridFunction>,
    /// Boundary data as a field on the half-space grid; its trace on `Σ`
    /// is the layer density.
    pub boundary: Option<GridFunction>,
}

impl DataFamily {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (r0, r1) = self.radii;
        if self.count == 0 && !self.include_zero {
            return Err(Error::Precondition("the data family is empty".into()));
        }
        if !(r0 > 0.0 && r1 >= r0 && self.half_width > 3.0 * r1 + 0.35 && self.h > 0.0) {
            return Err(Error::Precondition(format!(
                "radii {:?} do not fit the box of half-width {}",
                self.radii, self.half_width
            )));
        }
        Ok(())
    }

    pub fn grid(&self, half: bool) -> Result<Grid> {
        let l = self.half_width;
        let domain = if half {
            BoxDomain::half_space(3, l, l)?
        } else {
            BoxDomain::cube(3, -l, l, DomainKind::WholeSpace)?
        };
        Grid::new(domain, self.h)
    }

    /// Evaluation window: the inner `[-L/2, L/2]` block, or its upper half
    /// above `Σ` for half-space estimates.
    fn window(&self, half: bool) -> SolveOptions {
        let w = 0.5 * self.half_width;
        let lo_n = if half { 0.0 } else { -w };
        SolveOptions::with_window(&[-w, -w, lo_n], &[w, w, w])
    }

    /// Draw the members for `id`.
    pub fn members(&self, id: EstimateId) -> Result<Vec<FamilyMember>> {
        self.validate()?;
        let grid = self.grid(id.is_half())?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count + 1);
        if self.include_zero {
            let zero = |k| Some(GridFunction::zeros(&grid, k));
            out.push(match id {
                EstimateId::WholePoisson => member("zero", zero(1), None, None),
                EstimateId::WholeStokes | EstimateId::WholeStokesDivergence | EstimateId::HalfStokes => {
                    member("zero", zero(3), zero(1), None)
                }
                EstimateId::LayerPotential => member("zero", None, None, zero(3)),
                EstimateId::BoundaryOperator => member("zero", None, None, zero(1)),
            });
        }
        for k in 0..self.count {
            let label = format!("m{k}");
            let m = match id {
                EstimateId::WholePoisson => member(&label, Some(self.dipole(&grid, &mut rng)?), None, None),
                EstimateId::WholeStokes => {
                    let f = self.dipoles(&grid, &mut rng)?;
                    member(&label, Some(f), Some(GridFunction::zeros(&grid, 1)), None)
                }
                EstimateId::WholeStokesDivergence => {
                    let f = self.dipoles(&grid, &mut rng)?;
                    let g = self.interior_bump(&grid, &mut rng, false)?;
                    member(&label, Some(f), Some(g), None)
                }
                EstimateId::HalfStokes => {
                    let parts = (0..3)
                        .map(|_| self.interior_bump(&grid, &mut rng, true))
                        .collect::<Result<Vec<_>>>()?;
                    let g = self.interior_bump(&grid, &mut rng, true)?;
                    member(&label, Some(GridFunction::stack(&parts)?), Some(g), None)
                }
                EstimateId::LayerPotential => {
                    let parts: Vec<_> = (0..3).map(|_| self.plane_bump(&grid, &mut rng)).collect();
                    member(&label, None, None, Some(GridFunction::stack(&parts)?))
                }
                EstimateId::BoundaryOperator => member(&label, None, None, Some(self.plane_bump(&grid, &mut rng))),
            };
            out.push(m);
        }
        Ok(out)
    }

    fn radius(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (a, b) = self.radii;
        if b > a {
            rng.gen_range(a..b)
        } else {
            a
        }
    }

    fn amplitude(rng: &mut ChaCha8Rng) -> f64 {
        let a: f64 = rng.gen_range(0.5..1.5);
        if rng.gen_bool(0.5) {
            a
        } else {
            -a
        }
    }

    /// A bump minus a displaced copy, with a random direction.
    fn dipole(&self, grid: &Grid, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
        let r = self.radius(rng);
        let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let mut dir: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-3);
        let dist = 2.0 * r + 0.05;
        dir.iter_mut().for_each(|d| *d *= dist / norm);
        make_mean_zero_bump(grid, &c, r, Self::amplitude(rng), &dir)
    }

    fn dipoles(&self, grid: &Grid, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
        let parts = (0..3).map(|_| self.dipole(grid, rng)).collect::<Result<Vec<_>>>()?;
        GridFunction::stack(&parts)
    }

    fn interior_bump(&self, grid: &Grid, rng: &mut ChaCha8Rng, half: bool) -> Result<GridFunction> {
        let r = self.radius(rng);
        let mut c: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.3..0.3)).collect();
        if half {
            c[2] = r + rng.gen_range(0.1..0.4);
        }
        make_bump(grid, &c, r, Self::amplitude(rng))
    }

    /// A bump centered on `Σ`, restricted to the half-space grid.
    fn plane_bump(&self, grid: &Grid, rng: &mut ChaCha8Rng) -> GridFunction {
        let r = self.radius(rng);
        let c: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let a = Self::amplitude(rng);
        let r2 = r * r;
        GridFunction::from_fn(grid, |x| {
            let s = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + x[2] * x[2];
            a * bump_profile(s / r2)
        })
    }
}

fn member(label: &str, f: Option<GridFunction>, g: Option<GridFunction>, boundary: Option<GridFunction>) -> FamilyMember {
    FamilyMember {
        label: label.into(),
        f,
        g,
        boundary,
    }
}

/// One term of a side of an inequality.
#[derive(Clone, Debug)]
enum Term {
    /// `‖·‖_{p(·)}` of the field.
    Lp(GridFunction),
    /// Sampled `‖·‖_{D^{-1,p(·)}}` of the field.
    Dual(GridFunction),
}

#[derive(Clone, Debug)]
struct Sides {
    label: String,
    lhs: Vec<Term>,
    rhs: Vec<Term>,
}

/// Solutions of one family, ready to be measured for several exponents.
#[derive(Clone, Debug)]
pub struct EstimateSamples {
    id: EstimateId,
    h: f64,
    data_grid: Grid,
    dictionary: Dictionary,
    weak: Vec<Sides>,
    strong: Vec<Sides>,
}

fn deriv(f: &GridFunction, k: usize) -> Result<GridFunction> {
    derivative_tensor(f, k, RESIDUAL_FD_ACCURACY)
}

/// The boundary-plane trace of a half-space field.
fn trace(f: &GridFunction) -> Result<GridFunction> {
    let g = f.grid();
    let plane = g.boundary_plane()?;
    let k = f.components();
    let m = g.shape()[2];
    let mut values = Vec::with_capacity(plane.node_count() * k);
    for lin in 0..plane.node_count() {
        for c in 0..k {
            values.push(f.value(lin * m, c));
        }
    }
    GridFunction::new(plane, k, values)
}

/// Height above `Σ` where layer-potential windows start. It is fixed in
/// physical units so the measured region does not move under refinement.
pub const LAYER_WINDOW_FLOOR: f64 = 0.125;

/// The window of the half grid at heights `x_n >= LAYER_WINDOW_FLOOR`
/// matching `opts`.
fn above(half: &Grid, opts: &SolveOptions) -> Result<SubGrid> {
    let w = opts.resolve(half, true)?;
    let s = w.grid.shape();
    let floor = half.nearest_index(2, LAYER_WINDOW_FLOOR).max(1);
    half.window_indices(
        &[w.origin[0], w.origin[1], floor],
        &[w.origin[0] + s[0] - 1, w.origin[1] + s[1] - 1, w.origin[2] + s[2] - 1],
    )
}

impl EstimateSamples {
    /// Solve every member of `family` for `id`.
    pub fn compute(id: EstimateId, family: &DataFamily) -> Result<Self> {
        let members = family.members(id)?;
        let half = id.is_half();
        let data_grid = family.grid(half)?;
        let opts = family.window(half);
        let dictionary = if half {
            Dictionary::build_half_space(&family.dictionary, &[-1.0, -1.0, 0.0], &[1.0, 1.0, 1.0], data_grid.domain())?
        } else {
            Dictionary::build(&family.dictionary, &[-1.0; 3], &[1.0; 3], data_grid.domain())
        };
        let mut weak = Vec::new();
        let mut strong = Vec::new();
        for m in members {
            let label = m.label.clone();
            let (w, s) = match id {
                EstimateId::WholePoisson => {
                    let f = m.f.expect("poisson members carry f");
                    let u = solve_poisson_wholespace(&f, &opts)?.u;
                    (
                        (vec![Term::Lp(deriv(&u, 1)?)], vec![Term::Dual(f.clone())]),
                        (vec![Term::Lp(deriv(&u, 2)?)], vec![Term::Lp(f)]),
                    )
                }
                EstimateId::WholeStokes | EstimateId::WholeStokesDivergence | EstimateId::HalfStokes => {
                    let f = m.f.expect("stokes members carry f");
                    let g = m.g.expect("stokes members carry g");
                    let sol = if half {
                        solve_stokes_halfspace(&f, &g, &opts)?
                    } else {
                        solve_stokes_wholespace(&f, &g, &opts)?
                    };
                    let mut weak_rhs = vec![Term::Dual(f.clone())];
                    let mut strong_rhs = vec![Term::Lp(f)];
                    if id != EstimateId::WholeStokes {
                        strong_rhs.push(Term::Lp(gradient(&g, RESIDUAL_FD_ACCURACY)?));
                        weak_rhs.push(Term::Lp(g));
                    }
                    (
                        (vec![Term::Lp(deriv(&sol.v, 1)?), Term::Lp(sol.pi.clone())], weak_rhs),
                        (vec![Term::Lp(deriv(&sol.v, 2)?), Term::Lp(deriv(&sol.pi, 1)?)], strong_rhs),
                    )
                }
                EstimateId::LayerPotential => {
                    let h = m.boundary.expect("layer members carry boundary data");
                    let (w, nu) = layer_fields(&trace(&h)?, &data_grid, &above(&data_grid, &opts)?)?;
                    (
                        (vec![Term::Lp(deriv(&w, 1)?), Term::Lp(nu.clone())], vec![Term::Lp(deriv(&h, 1)?)]),
                        (vec![Term::Lp(deriv(&w, 2)?), Term::Lp(deriv(&nu, 1)?)], vec![Term::Lp(deriv(&h, 2)?)]),
                    )
                }
                EstimateId::BoundaryOperator => {
                    let f = m.boundary.expect("boundary members carry boundary data");
                    let op = LayerOperator::new(Kernel::z(3, 2, 2))?;
                    let hf = layer_apply(&op, &trace(&f)?, &data_grid, &above(&data_grid, &opts)?)?;
                    ((vec![Term::Lp(deriv(&hf, 1)?)], vec![Term::Lp(deriv(&f, 1)?)]), (Vec::new(), Vec::new()))
                }
            };
            weak.push(Sides {
                label: label.clone(),
                lhs: w.0,
                rhs: w.1,
            });
            strong.push(Sides { label, lhs: s.0, rhs: s.1 });
        }
        Ok(Self {
            id,
            h: family.h,
            data_grid,
            dictionary,
            weak,
            strong,
        })
    }

    pub fn id(&self) -> EstimateId {
        self.id
    }

    /// Measure one arm for the exponent `p`, whose domain must contain the
    /// data box (constant and affine rules are re-read on the box if not).
    pub fn report(&self, arm: Arm, p: &Exponent) -> Result<EstimateReport> {
        if !self.id.arms().contains(&arm) {
            return Err(Error::Precondition(format!("{} has no {} arm", self.id, arm.name())));
        }
        let p = fit_exponent(p, self.data_grid.domain())?;
        let sides = match arm {
            Arm::Weak => &self.weak,
            Arm::Strong => &self.strong,
        };
        let needs_dual = sides.iter().any(|s| s.rhs.iter().any(|t| matches!(t, Term::Dual(_))));
        let prepared = if needs_dual {
            Some(self.dictionary.prepare(&self.data_grid, &p)?)
        } else {
            None
        };
        let mut report = EstimateReport::new(format!("{}:{}", self.id, arm.name()), self.h, p.id());
        if needs_dual {
            report.flag("estimate");
        }
        for s in sides {
            let lhs = side(&s.lhs, &p, prepared.as_ref())?;
            let rhs = side(&s.rhs, &p, prepared.as_ref())?;
            report.push(EstimateCase::new(s.label.clone(), lhs, rhs));
        }
        Ok(report)
    }
}

fn side(terms: &[Term], p: &Exponent, dict: Option<&PreparedDictionary>) -> Result<f64> {
    let mut total = 0.0;
    for t in terms {
        total += match t {
            Term::Lp(f) => luxemburg_norm(f, p)?.value,
            Term::Dual(f) => dict.expect("dictionary prepared for dual terms").estimate(f)?.value,
        };
    }
    Ok(total)
}

fn fit_exponent(p: &Exponent, domain: &BoxDomain) -> Result<Exponent> {
    let d = p.domain();
    let inside = (0..domain.dim()).all(|a| d.lower()[a] <= domain.lower()[a] + 1e-12 && d.upper()[a] >= domain.upper()[a] - 1e-12);
    if inside && d.dim() == domain.dim() {
        Ok(p.clone())
    } else {
        p.on_domain(domain.clone())
    }
}

/// Measure one arm of an estimate over a family.
pub fn verify_estimate(id: EstimateId, arm: Arm, family: &DataFamily, p: &Exponent) -> Result<EstimateReport> {
    EstimateSamples::compute(id, family)?.report(arm, p)
}
