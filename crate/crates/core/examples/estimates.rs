//! Empirical constants of the solution estimates over a seeded data family,
//! compared at two resolutions.

use varpot::exponent::Exponent;
use varpot::grid::{BoxDomain, DomainKind};
use varpot::solvers::{DataFamily, EstimateId, EstimateSamples};

fn main() -> varpot::Result<()> {
    let dom = BoxDomain::cube(3, -1.5, 1.5, DomainKind::BoundedBox)?;
    let p = Exponent::affine(2.0, 0.3, 0, dom)?;
    let family = DataFamily::default().with_count(4);
    for id in [EstimateId::WholePoisson, EstimateId::WholeStokes] {
        for h in [0.125, 0.0625] {
            let samples = EstimateSamples::compute(id, &family.clone().with_h(h))?;
            for &arm in id.arms() {
                let r = samples.report(arm, &p)?;
                println!("{:<14} {:<6} h = {h:<7} sup ratio {:.4}", id.name(), arm.name(), r.sup_ratio().unwrap());
            }
        }
    }
    Ok(())
}
