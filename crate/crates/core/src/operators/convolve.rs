//! Convolution with weakly singular kernels by direct lattice summation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DomainKind, GridFunction, SubGrid};
use crate::kernels::Kernel;

use super::table::{apply_terms, integrable_table, lattice_scale, require_isotropic, OffsetTable, Sources, Term};

/// One contribution `out[o] += scale · (κ * f[input])`.
#[derive(Clone, Copy, Debug)]
pub struct ConvolutionTerm {
    pub out: usize,
    pub input: usize,
    pub kernel: Kernel,
    pub scale: f64,
}

fn check_kernel(k: &Kernel) -> Result<()> {
    if k.degree() <= -(k.n as i32) {
        return Err(Error::WrongHomogeneity {
            kernel: k.label(),
            degree: k.degree(),
            expected: 1 - k.n as i32,
        });
    }
    if k.id.is_layer() {
        return Err(Error::Precondition("layer kernels are applied with layer_apply".into()));
    }
    Ok(())
}

/// Evaluate several convolutions of a vector density on a window of its
/// grid. Off-diagonal lattice points use `h^3 κ(h k)`; the cell containing
/// the singularity uses the exact cell integral of `κ`.
pub fn convolve_terms(
    f: &GridFunction,
    window: &SubGrid,
    terms: &[ConvolutionTerm],
    out_components: usize,
) -> Result<GridFunction> {
    let g = f.grid();
    require_isotropic(g)?;
    for t in terms {
        check_kernel(&t.kernel)?;
        if t.input >= f.components() || t.out >= out_components {
            return Err(Error::Shape(format!("term {t:?} is out of range")));
        }
    }
    let sources = Sources::from_field(f)?;
    if sources.is_empty() {
        return Ok(GridFunction::zeros(&window.grid, out_components));
    }
    let (lo, shape) = sources.offset_box(window);
    let mut kernels: Vec<Kernel> = Vec::new();
    for t in terms {
        if !kernels.contains(&t.kernel) {
            kernels.push(t.kernel);
        }
    }
    let tables = kernels
        .iter()
        .map(|k| integrable_table(k, lo, shape))
        .collect::<Result<Vec<OffsetTable>>>()?;
    let h = g.h();
    let list: Vec<Term<'_>> = terms
        .iter()
        .map(|t| {
            let pos = kernels.iter().position(|k| *k == t.kernel).expect("kernel listed");
            Term {
                out: t.out,
                input: t.input,
                table: &tables[pos],
                scale: t.scale * lattice_scale(h, t.kernel.degree()),
            }
        })
        .collect();
    let values = apply_terms(&sources, window, &list, out_components);
    GridFunction::new(window.grid.clone(), out_components, values)
}

/// `∫ κ(x - y) f(y) dy` on the nodes of `window` for a scalar density.
pub fn convolve(kernel: &Kernel, f: &GridFunction, window: &SubGrid) -> Result<GridFunction> {
    if !f.is_scalar() {
        return Err(Error::Shape("convolve takes a scalar density".into()));
    }
    convolve_terms(
        f,
        window,
        &[ConvolutionTerm {
            out: 0,
            input: 0,
            kernel: *kernel,
            scale: 1.0,
        }],
        1,
    )
}

/// `∫_{x_n>0} [κ(x - y) - κ(x - ỹ)] f(y) dy` on a half-space grid whose
/// first node layer is `Σ`; `ỹ` is the mirror image of `y`. The two terms
/// of each source are combined before accumulation, so the result is
/// exactly zero on `Σ` whenever `κ` is even in `x_n`.
pub(crate) fn convolve_image(kernel: &Kernel, f: &GridFunction, window: &SubGrid) -> Result<GridFunction> {
    let g = f.grid();
    require_isotropic(g)?;
    check_kernel(kernel)?;
    if g.domain().kind() != DomainKind::HalfSpace || g.domain().lower()[2] != 0.0 {
        return Err(Error::InvalidDomain("image convolution needs a half-space grid starting at x_n = 0".into()));
    }
    let sources = Sources::from_field(f)?;
    if sources.is_empty() {
        return Ok(GridFunction::zeros(&window.grid, 1));
    }
    let (lo, shape) = sources.offset_box(window);
    let direct = integrable_table(kernel, lo, shape)?;
    let m = window.grid.shape();
    let o = [window.origin[0] as isize, window.origin[1] as isize, window.origin[2] as isize];
    // Mirror offsets along the last axis are e_n + s_n.
    let mlo = [lo[0], lo[1], o[2] + sources.lo[2] as isize];
    let mshape = [shape[0], shape[1], m[2] + sources.hi[2] - sources.lo[2]];
    let mirror = integrable_table(kernel, mlo, mshape)?;
    let scale = lattice_scale(g.h(), kernel.degree());
    let plane = m[1] * m[2];
    let mut values = vec![0.0; m[0] * plane];
    values.par_chunks_mut(plane).enumerate().for_each(|(e0, slab)| {
        for (sn, s) in sources.idx.iter().enumerate() {
            let c = scale * sources.values[sn];
            let k0 = o[0] + e0 as isize - s[0] as isize;
            for e1 in 0..m[1] {
                let k1 = o[1] + e1 as isize - s[1] as isize;
                let dst = &mut slab[e1 * m[2]..(e1 + 1) * m[2]];
                let a = direct.row(k0, k1, o[2] - s[2] as isize, m[2]);
                let b = mirror.row(k0, k1, o[2] + s[2] as isize, m[2]);
                for ((d, x), y) in dst.iter_mut().zip(a).zip(b) {
                    *d += c * (x - y);
                }
            }
        }
    });
    GridFunction::new(window.grid.clone(), 1, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_bump, BoxDomain, Grid};

    #[test]
    fn rejects_calderon_zygmund_kernels() {
        let g = Grid::new(BoxDomain::cube(3, -1.0, 1.0, DomainKind::WholeSpace).unwrap(), 0.25).unwrap();
        let f = GridFunction::zeros(&g, 1);
        let w = g.full_window();
        assert!(convolve(&Kernel::ddk(3, 0, 0), &f, &w).is_err());
    }

    #[test]
    fn newton_potential_of_a_ball_profile() {
        // Oracle: radial solution of -Δu = f for f = 1 - r² on the unit ball,
        // u = (1/6 - 1/20)... written via the radial ODE in closed form.
        let g = Grid::new(BoxDomain::cube(3, -1.5, 1.5, DomainKind::WholeSpace).unwrap(), 1.0 / 16.0).unwrap();
        let f = GridFunction::from_fn(&g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            if r2 < 1.0 { (1.0 - r2).powi(3) } else { 0.0 }
        });
        let w = g.window(&[-0.5, -0.5, -0.5], &[0.5, 0.5, 0.5]).unwrap();
        let u = convolve(&Kernel::k(3), &f, &w).unwrap();
        // u(r) = ∫_0^1 f(s) s² max(r, s)^{-1} ds for a radial density.
        let exact = |r: f64| {
            let gl = gauss_quad::legendre::GaussLegendre::new(40).unwrap();
            let seg = |a: f64, b: f64, g: &dyn Fn(f64) -> f64| {
                gl.as_node_weight_pairs()
                    .iter()
                    .map(|&(x, wt)| 0.5 * (b - a) * wt * g(0.5 * (b - a) * x + 0.5 * (a + b)))
                    .sum::<f64>()
            };
            let p = |s: f64| (1.0 - s * s).powi(3);
            seg(0.0, r, &|s| p(s) * s * s / r) + seg(r, 1.0, &|s| p(s) * s)
        };
        let mut err = 0.0f64;
        for lin in 0..w.grid.node_count() {
            let x = w.grid.point(lin);
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().max(1e-12);
            err = err.max((u.value(lin, 0) - exact(r)).abs());
        }
        assert!(err < 2e-3 * exact(1e-12), "max error {err}");
    }

    #[test]
    fn image_convolution_vanishes_on_the_boundary() {
        let d = BoxDomain::half_space(3, 1.0, 1.0).unwrap();
        let g = Grid::new(d, 0.125).unwrap();
        let f = make_bump(&g, &[0.1, 0.0, 0.5], 0.3, 1.0).unwrap();
        let u = convolve_image(&Kernel::k(3), &f, &g.full_window()).unwrap();
        let mut inner = 0.0f64;
        for lin in 0..g.node_count() {
            let m = g.multi_index(lin);
            if m[2] == 0 {
                assert_eq!(u.value(lin, 0), 0.0);
            } else {
                inner = inner.max(u.value(lin, 0));
            }
        }
        assert!(inner > 0.0);
    }
}
