use crate::error::{Error, Result};
use crate::grid::{laplacian, DomainKind, GridFunction, SubGrid};
use crate::kernels::Kernel;
use crate::operators::{convolve, convolve_image};

use super::{l2_on, ratio, Provenance, SolveOptions, RESIDUAL_FD_ACCURACY};

/// A Newton-potential solution of `-Δu = f` on an evaluation window.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub u: GridFunction,
    /// The evaluation window inside the data grid.
    pub window: SubGrid,
    pub provenance: Provenance,
    /// `‖-Δ_h u - f‖₂ / ‖f‖₂` over the window minus two boundary layers.
    pub residual: f64,
    /// `max |u|` on `Σ` for half-space solves.
    pub boundary_trace: Option<f64>,
}

fn residual(u: &GridFunction, f: &GridFunction, window: &SubGrid) -> Result<f64> {
    let lap = laplacian(u, RESIDUAL_FD_ACCURACY)?;
    let fw = f.restrict(window)?.with_grid(u.grid().clone())?;
    let r = lap.scaled(-1.0).axpy(-1.0, &fw)?;
    let inner = u.grid().full_window().shrink(2)?;
    Ok(ratio(l2_on(&r, &inner), l2_on(&fw, &inner)))
}

/// `u = K * f` with `K = 1/((n-2)|∂B₁||x|^{n-2})`.
pub fn solve_poisson_wholespace(f: &GridFunction, opts: &SolveOptions) -> Result<PoissonSolution> {
    if !f.is_scalar() {
        return Err(Error::Shape("Poisson data must be scalar".into()));
    }
    let n = f.grid().dim();
    let window = opts.resolve(f.grid(), false)?;
    let u = convolve(&Kernel::k(n), f, &window)?;
    let residual = residual(&u, f, &window)?;
    Ok(PoissonSolution {
        u,
        window,
        provenance: Provenance::Whole,
        residual,
        boundary_trace: None,
    })
}

/// `u(x) = ∫ [K(x - y) - K(x - ỹ)] f(y) dy` on a half-space grid, with `ỹ`
/// the mirror image of `y` in `Σ`.
pub fn solve_poisson_halfspace(f: &GridFunction, opts: &SolveOptions) -> Result<PoissonSolution> {
    if !f.is_scalar() {
        return Err(Error::Shape("Poisson data must be scalar".into()));
    }
    let g = f.grid();
    if g.domain().kind() != DomainKind::HalfSpace {
        return Err(Error::InvalidDomain("half-space solve needs a half-space grid".into()));
    }
    let n = g.dim();
    let window = opts.resolve(g, true)?;
    let u = convolve_image(&Kernel::k(n), f, &window)?;
    let residual = residual(&u, f, &window)?;
    let trace = (window.origin[n - 1] == 0).then(|| {
        (0..u.grid().node_count())
            .filter(|&l| u.grid().multi_index(l)[n - 1] == 0)
            .map(|l| u.value(l, 0).abs())
            .fold(0.0, f64::max)
    });
    Ok(PoissonSolution {
        u,
        window,
        provenance: Provenance::Half,
        residual,
        boundary_trace: trace,
    })
}
