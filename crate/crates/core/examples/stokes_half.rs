//! Half-space Stokes flow: the odd/even reflected whole-space solution
//! corrected by layer potentials so that the velocity vanishes on Σ.

use varpot::grid::{make_bump, BoxDomain, Grid, GridFunction};
use varpot::solvers::{solve_stokes_halfspace, SolveOptions};

fn main() -> varpot::Result<()> {
    let g = Grid::new(BoxDomain::half_space(3, 2.0, 2.0)?, 1.0 / 16.0)?;
    let b = make_bump(&g, &[0.0, 0.0, 0.75], 0.5, 1.0)?;
    let f = GridFunction::stack(&[b.clone(), b.scaled(0.5), b.scaled(-0.7)])?;
    let s = solve_stokes_halfspace(&f, &GridFunction::zeros(&g, 1), &SolveOptions::default())?;
    let r = s.residuals;
    println!(
        "trace on Σ: {:.3e} before the layer correction, {:.3e} after",
        r.boundary_trace_before.unwrap(),
        r.boundary_trace.unwrap()
    );
    println!("momentum {:.3e}, divergence {:.3e}", r.momentum, r.divergence);
    Ok(())
}
