//! Test-field dictionaries for sampled `D^{-1}` norms.
//!
//! `‖f‖_{D^{-1,p}} = sup_u |⟨f, u⟩| / ‖∇u‖_{p'}`; the estimator takes the
//! supremum over a finite family of smooth compactly supported fields with
//! closed-form gradients, so it is a lower bound of the true norm.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{bump_profile, quadrature, BoxDomain, DomainKind, Grid, GridFunction, MAX_DIM};

use super::{luxemburg_from_samples, weights};

/// A smooth test field with an analytic gradient.
#[derive(Clone, Debug, PartialEq)]
pub enum TestField {
    /// `exp(-1/(1-|x-c|²/r²))`.
    Bump { center: Vec<f64>, radius: f64 },
    /// Difference of two equal bumps; vanishing mean.
    Dipole {
        a: Vec<f64>,
        b: Vec<f64>,
        radius: f64,
    },
    /// Bump times `cos(k·(x-c) + phase)`.
    Trig {
        center: Vec<f64>,
        radius: f64,
        wave: Vec<f64>,
        phase: f64,
    },
    /// `(ψ(x', x_n) - ψ(x', -x_n)) / 2`, vanishing on `x_n = 0`.
    OddPart(Box<TestField>),
}

fn bump_with_grad(x: &[f64], c: &[f64], r: f64, grad: &mut [f64]) -> f64 {
    let r2 = r * r;
    let s: f64 = x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / r2;
    let v = bump_profile(s);
    if v == 0.0 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        return 0.0;
    }
    let ds = -v / ((1.0 - s) * (1.0 - s));
    for (i, g) in grad.iter_mut().enumerate() {
        *g = ds * 2.0 * (x[i] - c[i]) / r2;
    }
    v
}

impl TestField {
    /// Value at `x`; writes the gradient into `grad`.
    pub fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            TestField::Bump { center, radius } => bump_with_grad(x, center, *radius, grad),
            TestField::Dipole { a, b, radius } => {
                let mut gb = [0.0; MAX_DIM];
                let va = bump_with_grad(x, a, *radius, grad);
                let vb = bump_with_grad(x, b, *radius, &mut gb[..x.len()]);
                for (g, h) in grad.iter_mut().zip(&gb) {
                    *g -= h;
                }
                va - vb
            }
            TestField::Trig {
                center,
                radius,
                wave,
                phase,
            } => {
                let v = bump_with_grad(x, center, *radius, grad);
                if v == 0.0 {
                    return 0.0;
                }
                let arg: f64 = x
                    .iter()
                    .zip(center)
                    .zip(wave)
                    .map(|((xi, ci), ki)| ki * (xi - ci))
                    .sum::<f64>()
                    + phase;
                let (s, c) = arg.sin_cos();
                for (g, k) in grad.iter_mut().zip(wave) {
                    *g = *g * c - v * s * k;
                }
                v * c
            }
            TestField::OddPart(inner) => {
                let n = x.len();
                let mut y = [0.0; MAX_DIM];
                y[..n].copy_from_slice(x);
                y[n - 1] = -y[n - 1];
                let mut gm = [0.0; MAX_DIM];
                let vp = inner.eval(x, grad);
                let vm = inner.eval(&y[..n], &mut gm[..n]);
                gm[n - 1] = -gm[n - 1];
                for (g, h) in grad.iter_mut().zip(&gm) {
                    *g = 0.5 * (*g - h);
                }
                0.5 * (vp - vm)
            }
        }
    }

    /// Axis-aligned box containing the support.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let ball = |c: &[f64], r: f64| {
            (
                c.iter().map(|v| v - r).collect::<Vec<_>>(),
                c.iter().map(|v| v + r).collect::<Vec<_>>(),
            )
        };
        let union = |(l1, u1): (Vec<f64>, Vec<f64>), (l2, u2): (Vec<f64>, Vec<f64>)| {
            (
                l1.iter().zip(&l2).map(|(a, b)| a.min(*b)).collect(),
                u1.iter().zip(&u2).map(|(a, b)| a.max(*b)).collect(),
            )
        };
        match self {
            TestField::Bump { center, radius } | TestField::Trig { center, radius, .. } => {
                ball(center, *radius)
            }
            TestField::Dipole { a, b, radius } => union(ball(a, *radius), ball(b, *radius)),
            TestField::OddPart(inner) => {
                let (lo, hi) = inner.support_box();
                let n = lo.len();
                let mut mlo = lo.clone();
                let mut mhi = hi.clone();
                mlo[n - 1] = -hi[n - 1];
                mhi[n - 1] = -lo[n - 1];
                union((lo, hi), (mlo, mhi))
            }
        }
    }

    pub fn odd_part(&self) -> TestField {
        TestField::OddPart(Box::new(self.clone()))
    }

    /// Sample on a grid as a scalar field.
    pub fn sample(&self, grid: &Grid) -> GridFunction {
        let n = grid.dim();
        GridFunction::from_fn(grid, |x| {
            let mut g = [0.0; MAX_DIM];
            self.eval(x, &mut g[..n])
        })
    }
}

/// Layout of a standard dictionary: for every radius in `scales`, centers
/// on a lattice of spacing `center_spacing * radius` covering the region.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DictionarySpec {
    pub scales: Vec<f64>,
    pub center_spacing: f64,
    /// Add cosine/sine-modulated bumps along each axis.
    pub trig: bool,
    /// Add neighbouring-bump differences.
    pub dipoles: bool,
}

impl Default for DictionarySpec {
    fn default() -> Self {
        Self {
            scales: vec![0.25, 0.5, 1.0],
            center_spacing: 1.0,
            trig: true,
            dipoles: true,
        }
    }
}

/// A finite family of test fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dictionary {
    fields: Vec<TestField>,
}

fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k = ((hi - lo) / step + 1e-9).floor() as usize;
    let offset = 0.5 * (hi - lo - k as f64 * step);
    (0..=k).map(|i| lo + offset + i as f64 * step).collect()
}

impl Dictionary {
    pub fn new(fields: Vec<TestField>) -> Self {
        Self { fields }
    }

    pub fn fields(&self) -> &[TestField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn push(&mut self, f: TestField) {
        self.fields.push(f);
    }

    pub fn extend(&mut self, other: &Dictionary) {
        self.fields.extend(other.fields.iter().cloned());
    }

    /// Odd parts of every field, for half-space problems.
    pub fn odd_parts(&self) -> Dictionary {
        Dictionary::new(self.fields.iter().map(TestField::odd_part).collect())
    }

    /// Standard dictionary with centers in `[lower, upper]`; fields whose
    /// support leaves `container` are dropped.
    pub fn build(
        spec: &DictionarySpec,
        lower: &[f64],
        upper: &[f64],
        container: &BoxDomain,
    ) -> Dictionary {
        let n = lower.len();
        let mut fields = Vec::new();
        for &r in &spec.scales {
            let step = spec.center_spacing * r;
            let axes: Vec<Vec<f64>> = (0..n).map(|a| lattice(lower[a], upper[a], step)).collect();
            let count: usize = axes.iter().map(Vec::len).product();
            for k in 0..count {
                let mut rem = k;
                let mut c = vec![0.0; n];
                for a in (0..n).rev() {
                    c[a] = axes[a][rem % axes[a].len()];
                    rem /= axes[a].len();
                }
                if !container.contains_ball(&c, r) {
                    continue;
                }
                fields.push(TestField::Bump {
                    center: c.clone(),
                    radius: r,
                });
                if spec.trig {
                    for a in 0..n {
                        let mut wave = vec![0.0; n];
                        wave[a] = std::f64::consts::PI / r;
                        for phase in [0.0, std::f64::consts::FRAC_PI_2] {
                            fields.push(TestField::Trig {
                                center: c.clone(),
                                radius: r,
                                wave: wave.clone(),
                                phase,
                            });
                        }
                    }
                }
                if spec.dipoles {
                    for a in 0..n {
                        let mut b = c.clone();
                        b[a] += 2.0 * r;
                        if container.contains_ball(&b, r) {
                            fields.push(TestField::Dipole {
                                a: c.clone(),
                                b,
                                radius: r,
                            });
                        }
                    }
                }
            }
        }
        Dictionary { fields }
    }

    /// Dictionary for a half-space box: odd parts of fields centered in
    /// `[lower, upper]` (with `lower_n >= 0`) that fit in the reflected box.
    pub fn build_half_space(
        spec: &DictionarySpec,
        lower: &[f64],
        upper: &[f64],
        container: &BoxDomain,
    ) -> Result<Dictionary> {
        Ok(Self::whole_companion(spec, lower, upper, container)?.odd_parts())
    }

    /// The whole-space fields whose odd parts make up
    /// [`Dictionary::build_half_space`].
    pub fn whole_companion(
        spec: &DictionarySpec,
        lower: &[f64],
        upper: &[f64],
        container: &BoxDomain,
    ) -> Result<Dictionary> {
        Ok(Self::build(spec, lower, upper, &container.reflected()?))
    }

    /// Sample every field on `grid` and cache `‖∇ψ‖_{p'}`, where `p` is the
    /// exponent of the data space.
    pub fn prepare(&self, grid: &Grid, p: &Exponent) -> Result<PreparedDictionary> {
        if self.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        let dual = p.dual()?;
        let pd = dual.as_exponent().sample(grid)?;
        let w = weights(&GridFunction::zeros(grid, 1))?;
        let n = grid.dim();
        let entries = self
            .fields
            .par_iter()
            .map(|field| {
                let (lo, hi) = field.support_box();
                let window = grid.window(&lo, &hi);
                let mut nodes = Vec::new();
                let mut wpsi = Vec::new();
                let mut gmag = Vec::new();
                let mut gp = Vec::new();
                let mut gw = Vec::new();
                if let Ok(window) = window {
                    let mut grad = [0.0; MAX_DIM];
                    for local in 0..window.grid.node_count() {
                        let lin = window.parent_index(grid, local);
                        let x = grid.point(lin);
                        let v = field.eval(&x[..n], &mut grad[..n]);
                        let gm = grad[..n].iter().map(|g| g * g).sum::<f64>().sqrt();
                        if v != 0.0 {
                            nodes.push(lin as u32);
                            wpsi.push(w[lin] * v);
                        }
                        if gm != 0.0 {
                            gmag.push(gm);
                            gp.push(pd[lin]);
                            gw.push(w[lin]);
                        }
                    }
                }
                let grad_norm = luxemburg_from_samples(&gmag, &gp, &gw)?.value;
                Ok(PreparedField {
                    nodes,
                    weighted_values: wpsi,
                    grad_norm,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedDictionary {
            grid: grid.clone(),
            exponent_id: p.id(),
            entries,
        })
    }
}

#[derive(Clone, Debug)]
struct PreparedField {
    nodes: Vec<u32>,
    weighted_values: Vec<f64>,
    grad_norm: f64,
}

/// A dictionary sampled on one grid for one exponent.
#[derive(Clone, Debug)]
pub struct PreparedDictionary {
    grid: Grid,
    exponent_id: String,
    entries: Vec<PreparedField>,
}

/// Sampled `D^{-1}` norm; always a lower bound of the true norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualNormEstimate {
    pub value: f64,
    pub dictionary_size: usize,
    pub lower_bound: bool,
    /// Index of the maximizing field.
    pub best: Option<usize>,
}

fn require_mean_zero(f: &GridFunction) -> Result<()> {
    for c in 0..f.components() {
        let comp = f.component(c);
        let mean = quadrature(&comp)?;
        let scale = quadrature(&comp.map(f64::abs))?;
        if mean.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotMeanZero { component: c, mean });
        }
    }
    Ok(())
}

impl PreparedDictionary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn exponent_id(&self) -> &str {
        &self.exponent_id
    }

    /// Gradient norms `‖∇ψ‖_{p'}` in dictionary order.
    pub fn gradient_norms(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.grad_norm).collect()
    }

    /// `max_{ψ, l} |∫ f_l ψ| / ‖∇ψ‖_{p'}`. Whole-space and bounded-box data
    /// must have vanishing mean in every component.
    pub fn estimate(&self, f: &GridFunction) -> Result<DualNormEstimate> {
        if f.grid() != &self.grid {
            return Err(Error::Shape("field and dictionary grids differ".into()));
        }
        if f.grid().domain().kind() != DomainKind::HalfSpace {
            require_mean_zero(f)?;
        }
        Ok(self.estimate_unchecked(f))
    }

    pub(crate) fn estimate_unchecked(&self, f: &GridFunction) -> DualNormEstimate {
        let k = f.components();
        let vals = f.values();
        let (value, best) = self
            .entries
            .par_iter()
            .enumerate()
            .map(|(idx, e)| {
                if e.grad_norm == 0.0 {
                    return (0.0, idx);
                }
                let mut best = 0.0f64;
                for c in 0..k {
                    let pairing: f64 = e
                        .nodes
                        .iter()
                        .zip(&e.weighted_values)
                        .map(|(&lin, wv)| wv * vals[lin as usize * k + c])
                        .sum();
                    best = best.max(pairing.abs());
                }
                (best / e.grad_norm, idx)
            })
            .reduce(
                || (0.0, usize::MAX),
                |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            );
        DualNormEstimate {
            value,
            dictionary_size: self.entries.len(),
            lower_bound: true,
            best: (value > 0.0).then_some(best),
        }
    }
}

/// Sampled `‖f‖_{D^{-1,p(·)}}` over `dictionary`.
pub fn dual_norm_estimate(
    f: &GridFunction,
    p: &Exponent,
    dictionary: &Dictionary,
) -> Result<DualNormEstimate> {
    dictionary.prepare(f.grid(), p)?.estimate(f)
}
