//! Layer potentials over the boundary plane `Σ = {x_n = 0}`.
//!
//! `w(x) = ∫_Σ κ(x' - y', x_n) h(y') dy'` is evaluated at node layers
//! `x_n = m h`, `m ≥ 1`, by the trapezoid rule on the grid of `Σ`. For the
//! lowest layers the kernel is peaked on the scale of one cell, so on a
//! patch around the target the density is interpolated by six-point Lagrange
//! polynomials in each direction and
//! integrated on a four times finer grid, blended into the lattice sum by
//! a smooth radial partition of unity.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DomainKind, Grid, GridFunction, SubGrid};
use crate::kernels::{Kernel, KernelId};

use super::pv::smooth_step;

/// Layers `1..=REFINED_LAYERS` get the refined near patch.
pub const REFINED_LAYERS: usize = 2;
const PATCH: isize = 12;
const BLEND_INNER: f64 = 4.0;
const REFINE: usize = 4;

/// Six-point Lagrange weights at nodes `-2..=3` for `t ∈ [0, 1]`.
fn lagrange6(t: f64) -> [f64; 6] {
    let mut w = [1.0; 6];
    for (i, wi) in w.iter_mut().enumerate() {
        let xi = i as f64 - 2.0;
        for j in 0..6 {
            if j != i {
                let xj = j as f64 - 2.0;
                *wi *= (t - xj) / (xi - xj);
            }
        }
    }
    w
}

/// A layer kernel applied over `Σ`.
#[derive(Clone, Copy, Debug)]
pub struct LayerOperator {
    kernel: Kernel,
}

impl LayerOperator {
    pub fn new(kernel: Kernel) -> Result<Self> {
        if !kernel.id.is_layer() {
            return Err(Error::Precondition(format!("{} is not a layer kernel", kernel.label())));
        }
        if kernel.n != 3 {
            return Err(Error::Dimension(kernel.n));
        }
        Ok(Self { kernel })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Lattice-unit weights at height `m` for offsets `lo .. lo + shape`
    /// (row-major in the two tangential axes).
    fn table(&self, m: usize, lo: [isize; 2], shape: [usize; 2]) -> Vec<f64> {
        let k = &self.kernel;
        let mf = m as f64;
        let mut t = vec![0.0; shape[0] * shape[1]];
        t.par_chunks_mut(shape[1]).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                let o = [lo[0] + i as isize, lo[1] + j as isize];
                *v = k.eval_unchecked(&[o[0] as f64, o[1] as f64, mf]);
            }
        });
        if m <= REFINED_LAYERS {
            let at = |o: [isize; 2]| -> Option<usize> {
                let i = o[0] - lo[0];
                let j = o[1] - lo[1];
                (i >= 0 && j >= 0 && (i as usize) < shape[0] && (j as usize) < shape[1])
                    .then(|| i as usize * shape[1] + j as usize)
            };
            // Split Z = Zω + Z(1 - ω) with a smooth radial blend ω; the
            // first part is integrated on the fine grid against the
            // interpolated density, the second stays on the lattice.
            let blend = |y0: f64, y1: f64| {
                let r = (y0 * y0 + y1 * y1).sqrt();
                1.0 - smooth_step((r - BLEND_INNER) / (PATCH as f64 - BLEND_INNER))
            };
            for y0 in -PATCH..=PATCH {
                for y1 in -PATCH..=PATCH {
                    if let Some(p) = at([-y0, -y1]) {
                        let w = blend(y0 as f64, y1 as f64);
                        t[p] -= w * k.eval_unchecked(&[-y0 as f64, -y1 as f64, mf]);
                    }
                }
            }
            let nf = 2 * PATCH as usize * REFINE;
            let df = 1.0 / REFINE as f64;
            for a in 0..=nf {
                for b in 0..=nf {
                    let y = [-PATCH as f64 + a as f64 * df, -PATCH as f64 + b as f64 * df];
                    let w = df * df * blend(y[0], y[1]) * k.eval_unchecked(&[-y[0], -y[1], mf]);
                    if w == 0.0 {
                        continue;
                    }
                    let base: Vec<isize> = y.iter().map(|v| (v.floor() as isize).min(PATCH - 1)).collect();
                    let l0 = lagrange6(y[0] - base[0] as f64);
                    let l1 = lagrange6(y[1] - base[1] as f64);
                    for (i, wi) in l0.iter().enumerate() {
                        for (j, wj) in l1.iter().enumerate() {
                            let node = [base[0] - 2 + i as isize, base[1] - 2 + j as isize];
                            if let Some(p) = at([-node[0], -node[1]]) {
                                t[p] += w * wi * wj;
                            }
                        }
                    }
                }
            }
        }
        t
    }
}

fn check_layout(data: &GridFunction, half: &Grid, window: &SubGrid) -> Result<()> {
    if half.dim() != 3 || !half.is_isotropic() {
        return Err(Error::Precondition("layer potentials need an isotropic 3-d grid".into()));
    }
    if half.domain().kind() != DomainKind::HalfSpace || half.domain().lower()[2] != 0.0 {
        return Err(Error::InvalidDomain("layer potentials need a half-space grid starting at x_n = 0".into()));
    }
    if data.grid().shape() != &half.shape()[..2] {
        return Err(Error::Shape("boundary data must live on the boundary plane of the grid".into()));
    }
    if window.origin[2] == 0 {
        return Err(Error::Precondition(
            "the window touches Σ; use boundary_limit for the trace".into(),
        ));
    }
    Ok(())
}

/// Several layer potentials of vector boundary data, `out[o] += scale ·
/// κ ⋆ data[i]` for each `(o, i, op, scale)`, on a window of the half-space
/// grid that lies strictly above `Σ`.
pub(crate) fn layer_apply_terms(
    data: &GridFunction,
    half: &Grid,
    window: &SubGrid,
    terms: &[(usize, usize, &LayerOperator, f64)],
    out_components: usize,
) -> Result<GridFunction> {
    check_layout(data, half, window)?;
    let h = half.h();
    let sg = data.grid();
    let mut src_idx = Vec::new();
    let mut lo = [usize::MAX; 2];
    let mut hi = [0usize; 2];
    for lin in 0..sg.node_count() {
        if data.node(lin).iter().any(|&v| v != 0.0) {
            let m = sg.multi_index(lin);
            for a in 0..2 {
                lo[a] = lo[a].min(m[a]);
                hi[a] = hi[a].max(m[a]);
            }
            src_idx.push((lin, [m[0], m[1]]));
        }
    }
    let m = window.grid.shape().to_vec();
    let o = [window.origin[0] as isize, window.origin[1] as isize];
    if src_idx.is_empty() {
        return Ok(GridFunction::zeros(&window.grid, out_components));
    }
    let tlo = [o[0] - hi[0] as isize, o[1] - hi[1] as isize];
    let tshape = [m[0] + hi[0] - lo[0], m[1] + hi[1] - lo[1]];
    let plane = m[0] * m[1];
    // planar[(e2 * C + c) * plane + e0 * m1 + e1]
    let mut planar = vec![0.0; m[2] * out_components * plane];
    planar
        .par_chunks_mut(out_components * plane)
        .enumerate()
        .for_each(|(e2, slab)| {
            let layer = window.origin[2] + e2;
            let tables: Vec<Vec<f64>> = terms.iter().map(|t| t.2.table(layer, tlo, tshape)).collect();
            for (lin, s) in &src_idx {
                let f = data.node(*lin);
                for (t, table) in terms.iter().zip(&tables) {
                    let scale = t.3 * h.powi(2 + t.2.kernel.degree());
                    let c = scale * f[t.1];
                    if c == 0.0 {
                        continue;
                    }
                    let out = &mut slab[t.0 * plane..(t.0 + 1) * plane];
                    for e0 in 0..m[0] {
                        let k0 = (o[0] + e0 as isize - s[0] as isize - tlo[0]) as usize;
                        let k1 = (o[1] - s[1] as isize - tlo[1]) as usize;
                        let row = &table[k0 * tshape[1] + k1..][..m[1]];
                        for (d, w) in out[e0 * m[1]..(e0 + 1) * m[1]].iter_mut().zip(row) {
                            *d += c * w;
                        }
                    }
                }
            }
        });
    let mut values = vec![0.0; window.grid.node_count() * out_components];
    for e2 in 0..m[2] {
        for c in 0..out_components {
            for e01 in 0..plane {
                let v = planar[(e2 * out_components + c) * plane + e01];
                values[(e01 * m[2] + e2) * out_components + c] = v;
            }
        }
    }
    GridFunction::new(window.grid.clone(), out_components, values)
}

/// `∫_Σ κ(x' - y', x_n) h(y') dy'` on a window of the half-space grid
/// strictly above `Σ`; `data` is scalar on the grid's boundary plane.
pub fn layer_apply(op: &LayerOperator, data: &GridFunction, half: &Grid, window: &SubGrid) -> Result<GridFunction> {
    if !data.is_scalar() {
        return Err(Error::Shape("layer_apply takes scalar boundary data".into()));
    }
    layer_apply_terms(data, half, window, &[(0, 0, op, 1.0)], 1)
}

/// The limit of the layer potential as `x_n → 0+`: `δ_{rl} h` for
/// `Z^{rl}` and `-2h` for `z`. Other layer kernels have no pointwise trace
/// of this form.
pub fn boundary_limit(op: &LayerOperator, data: &GridFunction) -> Result<GridFunction> {
    let k = op.kernel();
    match k.id {
        KernelId::Z => {
            let ix = k.indices();
            Ok(data.scaled(if ix[0] == ix[1] { 1.0 } else { 0.0 }))
        }
        KernelId::LowerZ => Ok(data.scaled(-2.0)),
        _ => Err(Error::Precondition(format!("{} has no boundary limit", k.label()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxDomain;

    fn setup(h: f64) -> (Grid, GridFunction) {
        let half = Grid::new(BoxDomain::half_space(3, 2.0, 0.5).unwrap(), h).unwrap();
        let plane = half.boundary_plane().unwrap();
        let data = GridFunction::from_fn(&plane, |y| (-4.0 * (y[0] * y[0] + y[1] * y[1])).exp());
        (half, data)
    }

    #[test]
    fn z_potential_matches_polar_quadrature() {
        polar_check(Kernel::z(3, 2, 2), 1e-5);
    }

    #[test]
    fn normal_derivative_potential_matches_polar_quadrature() {
        polar_check(Kernel::dz(3, 2), 1e-5);
    }

    // Oracle: for radial data the potential above the origin is a 1-d
    // integral, done by Gauss–Legendre in polar coordinates.
    fn polar_check(kernel: Kernel, tol: f64) {
        let h = 1.0 / 16.0;
        let (half, data) = setup(h);
        let op = LayerOperator::new(kernel).unwrap();
        let w = half.window(&[0.0, 0.0, h], &[0.0, 0.0, 4.0 * h]).unwrap();
        let u = layer_apply(&op, &data, &half, &w).unwrap();
        let gl = gauss_quad::legendre::GaussLegendre::new(200).unwrap();
        for m in 1..=4 {
            let xn = m as f64 * h;
            let radial = |a0: f64, a1: f64| -> f64 {
                gl.as_node_weight_pairs()
                    .iter()
                    .map(|&(a, wa)| {
                        let r = a0 + 0.5 * (a1 - a0) * (a + 1.0);
                        0.5 * (a1 - a0) * wa * 2.0 * std::f64::consts::PI * r * (-4.0 * r * r).exp()
                            * op.kernel().eval_unchecked(&[r, 0.0, xn])
                    })
                    .sum()
            };
            let exact = radial(0.0, 0.25) + radial(0.25, 1.0) + radial(1.0, 3.0);
            let got = u.values()[m - 1];
            eprintln!("{} layer {m}: {got} vs {exact}", kernel.label());
            assert!((got - exact).abs() < tol * exact.abs().max(1.0), "layer {m}: {got} vs {exact}");
        }
    }

    #[test]
    fn off_diagonal_limit_is_zero_and_sigma_is_rejected() {
        let (half, data) = setup(0.125);
        let op = LayerOperator::new(Kernel::z(3, 0, 1)).unwrap();
        assert_eq!(boundary_limit(&op, &data).unwrap().max_abs(), 0.0);
        let w = half.full_window();
        assert!(layer_apply(&op, &data, &half, &w).is_err());
        assert!(LayerOperator::new(Kernel::k(3)).is_err());
    }
}
