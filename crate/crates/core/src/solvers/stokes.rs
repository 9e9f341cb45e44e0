use crate::error::{Error, Result};
use crate::grid::{divergence, gradient, laplacian, quadrature, DomainKind, Grid, GridFunction, SubGrid};
use crate::kernels::{sphere_area, Kernel};
use crate::operators::{convolve_terms, layer_apply_terms, reflect, ConvolutionTerm, LayerOperator, Parity};

use super::{l2_on, ratio, Provenance, SolveOptions, RESIDUAL_FD_ACCURACY};

/// Relative residuals of a Stokes solve, measured by fourth-order finite
/// differences on the evaluation window minus two boundary layers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    /// `‖Δ_h v - ∇_h π - f‖ / max(‖f‖, ‖∇_h g‖)`.
    pub momentum: f64,
    /// `‖div_h v - g‖ / max(‖g‖, ‖f‖)`.
    pub divergence: f64,
    /// `‖div_h ṽ‖ / max(‖g‖, ‖f‖)` for the fundamental-solution part.
    pub divergence_free_part: f64,
    /// Half-space only: `max |v|` on `Σ`, from the three lowest interior
    /// layers by quadratic extrapolation.
    pub boundary_trace: Option<f64>,
    /// Half-space only: `max |ṽ|` on `Σ` before the layer correction.
    pub boundary_trace_before: Option<f64>,
}

/// A velocity/pressure pair on an evaluation window with the intermediate
/// fields of its construction.
#[derive(Clone, Debug)]
pub struct StokesSolution {
    pub v: GridFunction,
    /// Pressure, normalized to vanishing mean over the window.
    pub pi: GridFunction,
    pub window: SubGrid,
    pub provenance: Provenance,
    pub residuals: Residuals,
    /// `-1/(2|∂B₁|) V * F`.
    pub v_tilde: GridFunction,
    /// `-1/|∂B₁| Q * F`, before normalization.
    pub pi_tilde: GridFunction,
    /// `h = -K * ∇g`, with `Δh = ∇g` and `div h = g`.
    pub corrector: GridFunction,
    /// Half-space only: the layer potentials `(w, ν)`.
    pub layer: Option<(GridFunction, GridFunction)>,
}

fn check_mean_zero(f: &GridFunction) -> Result<()> {
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

fn check_data(f: &GridFunction, g: &GridFunction) -> Result<()> {
    let grid = f.grid();
    if grid.dim() != 3 {
        return Err(Error::Dimension(grid.dim()));
    }
    if f.components() != 3 || !g.is_scalar() || g.grid() != grid {
        return Err(Error::Shape("Stokes data needs a 3-vector f and a scalar g on one grid".into()));
    }
    Ok(())
}

/// Fields of the whole-space construction on one window.
struct WholeParts {
    v_tilde: GridFunction,
    pi_tilde: GridFunction,
    corrector: GridFunction,
}

/// `F = f - ∇_h g`; `ṽ, π̃` from `F`; `h = -K * ∇_h g`.
fn whole_parts(big_f: &GridFunction, grad_g: &GridFunction, window: &SubGrid, pressure: bool) -> Result<WholeParts> {
    let n = 3;
    let s = sphere_area(n);
    let mut terms = Vec::new();
    for r in 0..n {
        for l in 0..n {
            terms.push(ConvolutionTerm {
                out: r,
                input: l,
                kernel: Kernel::v(n, r, l),
                scale: -1.0 / (2.0 * s),
            });
        }
    }
    if pressure {
        for l in 0..n {
            terms.push(ConvolutionTerm {
                out: n,
                input: l,
                kernel: Kernel::q(n, l),
                scale: -1.0 / s,
            });
        }
    }
    let out = convolve_terms(big_f, window, &terms, n + 1)?;
    let corr_terms: Vec<ConvolutionTerm> = (0..n)
        .map(|i| ConvolutionTerm {
            out: i,
            input: i,
            kernel: Kernel::k(n),
            scale: -1.0,
        })
        .collect();
    let corrector = convolve_terms(grad_g, window, &corr_terms, n)?;
    let v_tilde = GridFunction::stack(&[out.component(0), out.component(1), out.component(2)])?;
    Ok(WholeParts {
        v_tilde,
        pi_tilde: out.component(3),
        corrector,
    })
}

fn mean_zero(pi: &GridFunction) -> Result<GridFunction> {
    let vol = pi.grid().domain().volume();
    let mean = if vol > 0.0 { quadrature(pi)? / vol } else { 0.0 };
    Ok(pi.map(|p| p - mean))
}

fn residuals(
    v: &GridFunction,
    pi: &GridFunction,
    v_tilde: &GridFunction,
    f: &GridFunction,
    g: &GridFunction,
    window: &SubGrid,
) -> Result<Residuals> {
    let acc = RESIDUAL_FD_ACCURACY;
    let local = v.grid().clone();
    let fw = f.restrict(window)?.with_grid(local.clone())?;
    let gw = g.restrict(window)?.with_grid(local.clone())?;
    let inner = local.full_window().shrink(2)?;
    let mom = laplacian(v, acc)?.axpy(-1.0, &gradient(pi, acc)?)?.axpy(-1.0, &fw)?;
    let div = divergence(v, acc)?.axpy(-1.0, &gw)?;
    let div_t = divergence(v_tilde, acc)?;
    let fnorm = l2_on(&fw, &inner);
    let gnorm = l2_on(&gw, &inner);
    let grad_gnorm = l2_on(&gradient(&gw, acc)?, &inner);
    let scale = fnorm.max(gnorm);
    Ok(Residuals {
        momentum: ratio(l2_on(&mom, &inner), fnorm.max(grad_gnorm)),
        divergence: ratio(l2_on(&div, &inner), scale),
        divergence_free_part: ratio(l2_on(&div_t, &inner), scale),
        boundary_trace: None,
        boundary_trace_before: None,
    })
}

/// Whole-space Stokes solve `Δv - ∇π = f`, `div v = g`: `v = ṽ + h`,
/// `π = π̃` with `F = f - ∇_h g`. Every component of `f` must have
/// vanishing mean.
pub fn solve_stokes_wholespace(f: &GridFunction, g: &GridFunction, opts: &SolveOptions) -> Result<StokesSolution> {
    check_data(f, g)?;
    check_mean_zero(f)?;
    let window = opts.resolve(f.grid(), false)?;
    let grad_g = gradient(g, RESIDUAL_FD_ACCURACY)?;
    let big_f = f.axpy(-1.0, &grad_g)?;
    let parts = whole_parts(&big_f, &grad_g, &window, true)?;
    let v = parts.v_tilde.axpy(1.0, &parts.corrector)?;
    let pi = mean_zero(&parts.pi_tilde)?;
    let residuals = residuals(&v, &pi, &parts.v_tilde, f, g, &window)?;
    Ok(StokesSolution {
        v,
        pi,
        window,
        provenance: Provenance::Whole,
        residuals,
        v_tilde: parts.v_tilde,
        pi_tilde: parts.pi_tilde,
        corrector: parts.corrector,
        layer: None,
    })
}

/// Move a window of the half grid to the same nodes of the reflected grid.
fn lift(window: &SubGrid, whole: &Grid, offset: usize) -> Result<SubGrid> {
    let lo: Vec<usize> = vec![window.origin[0], window.origin[1], window.origin[2] + offset];
    let hi: Vec<usize> = (0..3).map(|a| lo[a] + window.grid.shape()[a] - 1).collect();
    whole.window_indices(&lo, &hi)
}

/// Half-space Stokes solve with `v = 0` on `Σ`: odd reflection of `f`, even
/// reflection of `g`, a whole-space solve `(ṽ, π̃)`, then the layer
/// correction `w = Z ⋆ h`, `ν = Σ_i ∂_i (z ⋆ h_i)` with `h = -ṽ|_Σ`.
/// The evaluation window must contain the node layer on `Σ` and at least
/// four layers above it.
pub fn solve_stokes_halfspace(f: &GridFunction, g: &GridFunction, opts: &SolveOptions) -> Result<StokesSolution> {
    check_data(f, g)?;
    let half = f.grid();
    if half.domain().kind() != DomainKind::HalfSpace || half.domain().lower()[2] != 0.0 {
        return Err(Error::InvalidDomain("half-space solve needs a half-space grid starting at x_n = 0".into()));
    }
    let window = opts.resolve(half, true)?;
    if window.origin[2] != 0 || window.grid.shape()[2] < 5 {
        return Err(Error::Precondition("the window must contain Σ and four layers above it".into()));
    }
    let m = half.shape()[2];
    let fr = reflect(f, Parity::Odd)?;
    let gr = reflect(g, Parity::Even)?;
    let whole = fr.grid().clone();
    let grad_g = gradient(&gr, RESIDUAL_FD_ACCURACY)?;
    let big_f = fr.axpy(-1.0, &grad_g)?;

    let eval = whole_parts(&big_f, &grad_g, &lift(&window, &whole, m - 1)?, true)?;
    let shape = half.shape();
    let sigma = whole.window_indices(&[0, 0, m - 1], &[shape[0] - 1, shape[1] - 1, m - 1])?;
    let on_sigma = whole_parts(&big_f, &grad_g, &sigma, false)?;
    let plane = half.boundary_plane()?;
    let v_sigma = on_sigma.v_tilde.axpy(1.0, &on_sigma.corrector)?;
    let data = GridFunction::new(plane, 3, v_sigma.scaled(-1.0).into_values())?;

    // Layer potentials on the window above Σ.
    let ws = window.grid.shape();
    let above = half.window_indices(
        &[window.origin[0], window.origin[1], 1],
        &[window.origin[0] + ws[0] - 1, window.origin[1] + ws[1] - 1, ws[2] - 1],
    )?;
    let (w_above, nu_above) = layer_fields(&data, half, &above)?;

    // Assemble on the window; on Σ, w takes its boundary limit h and ν is
    // extrapolated from the three lowest layers.
    let local = window.grid.clone();
    let mut w = GridFunction::zeros(&local, 3);
    let mut nu = GridFunction::zeros(&local, 1);
    let ag = w_above.grid().clone();
    for lin in 0..local.node_count() {
        let idx = local.multi_index(lin);
        if idx[2] == 0 {
            let p = plane_index(half, window.origin[0] + idx[0], window.origin[1] + idx[1]);
            let at = |k: usize| nu_above.value(ag.linear_index(&[idx[0], idx[1], k]), 0);
            nu.values_mut()[lin] = 3.0 * at(0) - 3.0 * at(1) + at(2);
            for r in 0..3 {
                w.values_mut()[lin * 3 + r] = data.value(p, r);
            }
        } else {
            let a = ag.linear_index(&[idx[0], idx[1], idx[2] - 1]);
            nu.values_mut()[lin] = nu_above.value(a, 0);
            for r in 0..3 {
                w.values_mut()[lin * 3 + r] = w_above.value(a, r);
            }
        }
    }
    let v_tilde = eval.v_tilde.axpy(1.0, &eval.corrector)?.with_grid(local.clone())?;
    let pi_tilde = eval.pi_tilde.with_grid(local.clone())?;
    let v = v_tilde.axpy(1.0, &w)?;
    let pi = mean_zero(&pi_tilde.axpy(1.0, &nu)?)?;

    let mut res = residuals(&v, &pi, &eval.v_tilde.with_grid(local.clone())?, f, g, &window)?;
    let mut before = 0.0f64;
    let mut after = 0.0f64;
    for i in 0..ws[0] {
        for j in 0..ws[1] {
            let node = |k: usize| local.linear_index(&[i, j, k]);
            for r in 0..3 {
                before = before.max(v_tilde.value(node(0), r).abs());
                let ext = 3.0 * v.value(node(1), r) - 3.0 * v.value(node(2), r) + v.value(node(3), r);
                after = after.max(ext.abs());
            }
        }
    }
    res.boundary_trace = Some(after);
    res.boundary_trace_before = Some(before);
    Ok(StokesSolution {
        v,
        pi,
        window,
        provenance: Provenance::Half,
        residuals: res,
        v_tilde,
        pi_tilde,
        corrector: eval.corrector.with_grid(local)?,
        layer: Some((w, nu)),
    })
}

/// `w = Z ⋆ h` (three components) and `ν = Σ_i ∂_i z ⋆ h_i` on a window
/// strictly above `Σ`.
pub(crate) fn layer_fields(data: &GridFunction, half: &Grid, above: &SubGrid) -> Result<(GridFunction, GridFunction)> {
    let z_ops: Vec<(usize, usize, LayerOperator)> = (0..3)
        .flat_map(|r| (0..3).map(move |l| (r, l)))
        .map(|(r, l)| Ok((r, l, LayerOperator::new(Kernel::z(3, r, l))?)))
        .collect::<Result<_>>()?;
    let z_terms: Vec<(usize, usize, &LayerOperator, f64)> = z_ops.iter().map(|(r, l, op)| (*r, *l, op, 1.0)).collect();
    let w = layer_apply_terms(data, half, above, &z_terms, 3)?;
    let dz_ops: Vec<LayerOperator> = (0..3).map(|i| LayerOperator::new(Kernel::dz(3, i))).collect::<Result<_>>()?;
    let dz_terms: Vec<(usize, usize, &LayerOperator, f64)> = dz_ops.iter().enumerate().map(|(i, op)| (0, i, op, 1.0)).collect();
    let nu = layer_apply_terms(data, half, above, &dz_terms, 1)?;
    Ok((w, nu))
}

fn plane_index(half: &Grid, i: usize, j: usize) -> usize {
    i * half.shape()[1] + j
}
