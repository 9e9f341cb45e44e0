//! Second derivatives of the Newton potential as principal-value integrals:
//! the local correction term is what makes them match finite differences.

use varpot::grid::{hessian, make_bump, BoxDomain, DomainKind, Grid, GridFunction, SubGrid};
use varpot::kernels::Kernel;
use varpot::operators::{convolve, pv_apply, PvOperator};

fn rel(a: &GridFunction, b: &GridFunction) -> f64 {
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn main() -> varpot::Result<()> {
    let g = Grid::new(BoxDomain::cube(3, -1.5, 1.5, DomainKind::WholeSpace)?, 1.0 / 16.0)?;
    let f = make_bump(&g, &[0.0; 3], 0.75, 1.0)?;
    let big = g.window(&[-0.5; 3], &[0.5; 3])?;
    let inner = big.shrink(3)?;
    let local = SubGrid {
        grid: inner.grid.clone(),
        origin: vec![3; 3],
    };
    let hess = hessian(&convolve(&Kernel::k(3), &f, &big)?, 4)?;
    for (i, j) in [(0, 0), (0, 1)] {
        let op = PvOperator::new(Kernel::ddk(3, i, j))?;
        let fd = hess.component(3 * i + j).restrict(&local)?.with_grid(inner.grid.clone())?;
        let with = pv_apply(&op, &f, &inner, true)?;
        let without = pv_apply(&op, &f, &inner, false)?;
        println!(
            "∂{i}∂{j}K: correction {:+.4}, error {:.2e} with it, {:.2e} without",
            op.correction(),
            rel(&with, &fd),
            rel(&without, &fd)
        );
    }
    Ok(())
}
