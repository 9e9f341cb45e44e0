//! Whole-space Stokes flow driven by a mean-zero force and a source term.

use varpot::grid::{make_bump, make_mean_zero_bump, BoxDomain, DomainKind, Grid, GridFunction};
use varpot::solvers::{solve_stokes_wholespace, SolveOptions};

fn main() -> varpot::Result<()> {
    let g = Grid::new(BoxDomain::cube(3, -2.0, 2.0, DomainKind::WholeSpace)?, 1.0 / 16.0)?;
    let fx = make_mean_zero_bump(&g, &[-0.5, 0.0, 0.0], 0.45, 1.0, &[1.0, 0.0, 0.0])?;
    let fy = make_mean_zero_bump(&g, &[0.0, -0.5, 0.0], 0.45, 1.0, &[0.0, 1.0, 0.0])?;
    let f = GridFunction::stack(&[fx, fy, GridFunction::zeros(&g, 1)])?;
    let source = make_bump(&g, &[0.1, 0.0, 0.0], 0.4, 1.0)?;

    let s = solve_stokes_wholespace(&f, &source, &SolveOptions::default())?;
    let r = s.residuals;
    println!("momentum residual   {:.3e}", r.momentum);
    println!("divergence residual {:.3e}", r.divergence);
    println!("div of the solenoidal part {:.3e}", r.divergence_free_part);
    println!("max |v| {:.4}, max |π| {:.4}", s.v.max_abs(), s.pi.max_abs());
    Ok(())
}
