//! Principal-value convolution with Calderón–Zygmund kernels.
//!
//! The kernel is split with a radial cutoff `χ` (one for `r ≤ 1`, zero for
//! `r ≥ 6`, in lattice units). The far part `κ(1 - χ)` is smooth and summed
//! on the lattice. In the near part the density is replaced by its
//! piecewise tricubic interpolant, so each lattice node `k` receives the
//! weight `W_k = ∫ κ χ (L_k - δ_{k0})`. The subtraction of `δ_{k0}` is
//! allowed because `κ` has vanishing spherical integral, and it makes the
//! integrand absolutely integrable. Cells are integrated by tensor
//! Gauss–Legendre; the eight cells touching the origin are split into
//! pyramids with apex at the singularity.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SubGrid};
use crate::kernels::{ball_volume, spherical_mean, Kernel, KernelId};

use super::table::{apply_terms, require_isotropic, OffsetTable, Sources, Term};

/// Tolerance on the spherical integral accepted as cancellation.
pub const CANCELLATION_TOL: f64 = 1e-8;

/// Inner and outer radius of the near-field cutoff, in lattice units.
pub const CUTOFF_INNER: f64 = 1.0;
pub const CUTOFF_OUTER: f64 = 6.0;

const CELL_NODES: usize = 6;
const PYRAMID_NODES: usize = 10;

/// `C^∞` step rising from 0 at `t = 0` to 1 at `t = 1`.
pub(crate) fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Radial near-field cutoff `χ(r)`.
pub fn near_cutoff(r: f64) -> f64 {
    1.0 - smooth_step((r - CUTOFF_INNER) / (CUTOFF_OUTER - CUTOFF_INNER))
}

/// Cubic Lagrange weights at nodes `-1, 0, 1, 2` for `t ∈ [0, 1]`.
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

const REACH: isize = CUTOFF_OUTER as isize + 1;

fn near_weights(kernel: &Kernel) -> Result<OffsetTable> {
    let side = (2 * REACH + 1) as usize;
    let mut w = vec![0.0; side * side * side];
    let at = |k: [isize; 3]| -> usize {
        (((k[0] + REACH) as usize * side) + (k[1] + REACH) as usize) * side + (k[2] + REACH) as usize
    };
    // Deposit `weight · (L_k(z) - δ_{k0})` for a point `z` in cell `base`.
    let deposit = |w: &mut Vec<f64>, base: [isize; 3], z: [f64; 3], weight: f64| {
        let lw: Vec<[f64; 4]> = (0..3).map(|a| cubic_weights(z[a] - base[a] as f64)).collect();
        for i in 0..4 {
            for j in 0..4 {
                let wij = weight * lw[0][i] * lw[1][j];
                for k in 0..4 {
                    let node = [base[0] - 1 + i as isize, base[1] - 1 + j as isize, base[2] - 1 + k as isize];
                    w[at(node)] += wij * lw[2][k];
                }
            }
        }
        w[at([0, 0, 0])] -= weight;
    };
    let gl = |m: usize| -> Result<Vec<(f64, f64)>> {
        let rule = gauss_quad::legendre::GaussLegendre::new(m)
            .map_err(|e| Error::Precondition(e.to_string()))?;
        Ok(rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, wt)| (0.5 * (x + 1.0), 0.5 * wt))
            .collect())
    };
    let cell = gl(CELL_NODES)?;
    let radial = gl(PYRAMID_NODES)?;
    let lim = CUTOFF_OUTER as isize;
    for b0 in -lim..lim {
        for b1 in -lim..lim {
            for b2 in -lim..lim {
                let base = [b0, b1, b2];
                let singular = base.iter().all(|&b| b == 0 || b == -1);
                if singular {
                    let s: Vec<f64> = base.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
                    for face in 0..3 {
                        let (u, v) = ((face + 1) % 3, (face + 2) % 3);
                        for &(a, wa) in &cell {
                            for &(c, wc) in &cell {
                                let mut y = [0.0; 3];
                                y[face] = s[face];
                                y[u] = s[u] * a;
                                y[v] = s[v] * c;
                                let ky = kernel.eval_unchecked(&y);
                                let ry = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                                for &(t, wt) in &radial {
                                    // κ(t y) t² = κ(y) / t for degree -3.
                                    let z = [t * y[0], t * y[1], t * y[2]];
                                    let weight = wa * wc * wt * ky / t * near_cutoff(t * ry);
                                    deposit(&mut w, base, z, weight);
                                }
                            }
                        }
                    }
                    continue;
                }
                for &(a, wa) in &cell {
                    for &(c, wc) in &cell {
                        for &(e, we) in &cell {
                            let z = [b0 as f64 + a, b1 as f64 + c, b2 as f64 + e];
                            let r = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
                            let chi = near_cutoff(r);
                            if chi == 0.0 {
                                continue;
                            }
                            deposit(&mut w, base, z, wa * wc * we * kernel.eval_unchecked(&z) * chi);
                        }
                    }
                }
            }
        }
    }
    let lo = [-REACH; 3];
    Ok(OffsetTable::build(lo, [side; 3], |k| w[at(k)]))
}

fn near_cache() -> &'static Mutex<HashMap<Kernel, Arc<OffsetTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<Kernel, Arc<OffsetTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A principal-value convolution operator for one kernel component.
#[derive(Clone, Debug)]
pub struct PvOperator {
    kernel: Kernel,
    near: Arc<OffsetTable>,
}

impl PvOperator {
    /// Fails unless the kernel is homogeneous of degree `-n` with spherical
    /// integral below [`CANCELLATION_TOL`].
    pub fn new(kernel: Kernel) -> Result<Self> {
        let mean = spherical_mean(&kernel)?;
        if mean.abs() > CANCELLATION_TOL {
            return Err(Error::NoCancellation {
                kernel: kernel.label(),
                mean,
            });
        }
        if kernel.n != 3 {
            return Err(Error::Dimension(kernel.n));
        }
        let cached = near_cache().lock().expect("cache lock").get(&kernel).cloned();
        let near = match cached {
            Some(t) => t,
            None => {
                let t = Arc::new(near_weights(&kernel)?);
                near_cache().lock().expect("cache lock").insert(kernel, t.clone());
                t
            }
        };
        Ok(Self { kernel, near })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Coefficient `c` of the local term `c · f_l(x)` that turns the
    /// principal value into the distributional derivative, where `l` is the
    /// density component this kernel multiplies.
    pub fn correction(&self) -> f64 {
        let k = &self.kernel;
        let n = k.n as f64;
        let b = ball_volume(k.n);
        let d = |a: usize, c: usize| if a == c { 1.0 } else { 0.0 };
        let ix = k.indices();
        match k.id {
            KernelId::DdV => {
                let (r, l, i, j) = (ix[0], ix[1], ix[2], ix[3]);
                2.0 * b / (n + 2.0) * (-(n + 1.0) * d(i, j) * d(r, l) + d(i, r) * d(j, l) + d(r, j) * d(i, l))
            }
            KernelId::DQ => b * d(ix[0], ix[1]),
            KernelId::DdK => -d(ix[0], ix[1]) / n,
            _ => 0.0,
        }
    }

    /// Lattice-unit weights on the offset box `lo .. lo + shape`.
    pub fn table(&self, lo: [isize; 3], shape: [usize; 3]) -> OffsetTable {
        OffsetTable::build(lo, shape, |k| {
            let mut t = self.near.get(k);
            if k != [0, 0, 0] {
                let z = [k[0] as f64, k[1] as f64, k[2] as f64];
                let r = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
                let far = 1.0 - near_cutoff(r);
                if far > 0.0 {
                    t += far * self.kernel.eval_unchecked(&z);
                }
            }
            t
        })
    }

    /// Sum of the near weights; zero up to rounding by construction.
    pub fn near_sum(&self) -> f64 {
        let [a, b, c] = self.near.shape();
        let lo = self.near.lo();
        let mut s = 0.0;
        for i in 0..a as isize {
            for j in 0..b as isize {
                for k in 0..c as isize {
                    s += self.near.get([lo[0] + i, lo[1] + j, lo[2] + k]);
                }
            }
        }
        s
    }
}

/// Several principal-value convolutions of a vector density:
/// `out[o] = Σ PV(κ) * f[i] (+ c f[i](x))` for each `(o, i, op)`.
fn pv_apply_terms(
    f: &GridFunction,
    window: &SubGrid,
    terms: &[(usize, usize, &PvOperator)],
    out_components: usize,
    with_correction: bool,
) -> Result<GridFunction> {
    require_isotropic(f.grid())?;
    let sources = Sources::from_field(f)?;
    let (lo, shape) = sources.offset_box(window);
    let tables: Vec<OffsetTable> = terms.iter().map(|t| t.2.table(lo, shape)).collect();
    let list: Vec<Term<'_>> = terms
        .iter()
        .zip(&tables)
        .map(|(t, table)| Term {
            out: t.0,
            input: t.1,
            table,
            scale: 1.0,
        })
        .collect();
    let mut values = if sources.is_empty() {
        vec![0.0; window.grid.node_count() * out_components]
    } else {
        apply_terms(&sources, window, &list, out_components)
    };
    if with_correction {
        let parent = f.grid();
        for local in 0..window.grid.node_count() {
            let p = window.parent_index(parent, local);
            for t in terms {
                let c = t.2.correction();
                if c != 0.0 {
                    values[local * out_components + t.0] += c * f.value(p, t.1);
                }
            }
        }
    }
    GridFunction::new(window.grid.clone(), out_components, values)
}

/// `PV ∫ κ(x - y) f(y) dy` on the nodes of `window`, optionally plus the
/// local correction term. `f` is scalar and lives on the window's parent
/// grid.
pub fn pv_apply(
    op: &PvOperator,
    f: &GridFunction,
    window: &SubGrid,
    with_correction: bool,
) -> Result<GridFunction> {
    if !f.is_scalar() {
        return Err(Error::Shape("pv_apply takes a scalar density".into()));
    }
    pv_apply_terms(f, window, &[(0, 0, op)], 1, with_correction)
}
