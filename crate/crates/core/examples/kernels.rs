//! Cancellation of the singular kernel families, the layer-kernel
//! identities and the boundary limit of the layer potential.

use varpot::kernels::{max_spherical_mean, verify_kernel_identities, z_boundary_delta, KernelId};

fn main() -> varpot::Result<()> {
    for id in [KernelId::DdV, KernelId::DQ, KernelId::DdK] {
        println!("max spherical mean of {:<4} {:.2e}", id.name(), max_spherical_mean(id, 3)?);
    }
    let points = vec![vec![0.3, -0.2, 0.5], vec![-0.7, 0.1, 0.05], vec![0.0, 0.0, 1.0]];
    let r = verify_kernel_identities(&points)?;
    let worst = r.cases.iter().filter_map(|c| c.ratio).fold(0.0, f64::max);
    println!("largest relative identity residual {worst:.2e}");
    for xn in [0.1, 0.01, 0.001] {
        let v = z_boundary_delta(3, 0, 0, xn, 100.0)?;
        println!("x_n = {xn:<6} ∫Z^00 = {v:.6}");
    }
    Ok(())
}
