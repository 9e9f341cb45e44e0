//! Luxemburg norm of a field under a variable exponent, the unit-ball
//! property, and the Hölder and duality checks.

use varpot::exponent::Exponent;
use varpot::grid::{BoxDomain, DomainKind, Grid, GridFunction};
use varpot::norms::{duality_optimizer, luxemburg_norm, modular, verify_duality, verify_holder};

fn main() -> varpot::Result<()> {
    let dom = BoxDomain::cube(3, 0.0, 1.0, DomainKind::BoundedBox)?;
    let grid = Grid::new(dom.clone(), 1.0 / 16.0)?;
    let p = Exponent::affine(2.0, 1.5, 0, dom.clone())?;
    let q = Exponent::constant(3.0, dom)?;

    let f = GridFunction::from_fn(&grid, |x| 1.0 + (3.0 * x[0]).sin() * x[1]);
    let g = GridFunction::from_fn(&grid, |x| (x[0] - x[2]).exp());

    let n = luxemburg_norm(&f, &p)?;
    println!("‖f‖_p = {:.8} after {} bisection steps", n.value, n.iterations);
    println!("ρ_p(f/‖f‖) = {:.10}", modular(&f.scaled(1.0 / n.value), &p)?);

    let h = verify_holder(&f, &g, &p, &q)?;
    println!("Hölder ratio ‖fg‖_s / 2‖f‖_p‖g‖_q = {:.4}", h.ratio().unwrap());

    let best = duality_optimizer(&f, &p)?;
    let d = verify_duality(&f, &p, &[g, best])?;
    for c in &d.cases {
        println!("duality {}: {:.4} vs {:.4}", c.label, c.lhs, c.rhs);
    }
    Ok(())
}
