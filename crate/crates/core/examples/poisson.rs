//! Newton-potential solves of -Δu = f in the whole space and in the
//! half-space with zero trace, with their difference residuals.

use varpot::grid::{make_bump, BoxDomain, DomainKind, Grid};
use varpot::solvers::{solve_poisson_halfspace, solve_poisson_wholespace, SolveOptions};

fn main() -> varpot::Result<()> {
    let opts = SolveOptions::default();
    for h in [1.0 / 8.0, 1.0 / 16.0] {
        let g = Grid::new(BoxDomain::cube(3, -2.0, 2.0, DomainKind::WholeSpace)?, h)?;
        let f = make_bump(&g, &[0.0; 3], 0.5, 1.0)?;
        let s = solve_poisson_wholespace(&f, &opts)?;
        println!("whole h = {h:<7} residual {:.3e}  max u {:.4}", s.residual, s.u.max_abs());
    }
    let g = Grid::new(BoxDomain::half_space(3, 2.0, 2.0)?, 1.0 / 16.0)?;
    let f = make_bump(&g, &[0.0, 0.0, 0.75], 0.5, 1.0)?;
    let s = solve_poisson_halfspace(&f, &opts)?;
    println!("half  residual {:.3e}  trace on Σ {:?}", s.residual, s.boundary_trace);
    Ok(())
}
