//! Cutting off a Stokes solution: the localized data have vanishing means
//! and are supported inside the cutoff box.

use varpot::grid::{BoxDomain, DomainKind, Grid, GridFunction};
use varpot::operators::{localize, Cutoff, CutoffProfile};

fn gauss(x: &[f64], c: &[f64]) -> f64 {
    (-x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).exp()
}

fn main() -> varpot::Result<()> {
    let g = Grid::new(BoxDomain::cube(3, -2.0, 2.0, DomainKind::BoundedBox)?, 1.0 / 32.0)?;
    let c = [0.1, -0.2, 0.0];
    // v = (G, 0, 0) and π = 0 with G a Gaussian, so f = ΔG e₀ and g = ∂₀G.
    let v = GridFunction::from_fn_vec(&g, 3, |x, o| o[0] = gauss(x, &c));
    let pi = GridFunction::zeros(&g, 1);
    let f = GridFunction::from_fn_vec(&g, 3, |x, o| {
        let s: f64 = x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
        o[0] = (4.0 * s - 6.0) * gauss(x, &c);
    });
    let div = GridFunction::from_fn(&g, |x| -2.0 * (x[0] - c[0]) * gauss(x, &c));
    let tau = Cutoff::cube(&[0.0; 3], 0.25, 1.75, CutoffProfile::Smooth)?;
    let loc = localize(&v, &pi, &f, &div, &tau, (&[-0.25; 3], &[0.25; 3]))?;
    let means: Vec<String> = loc.momentum_mean.iter().map(|m| format!("{m:.2e}")).collect();
    println!("|∫T| / ∫|T| per component: {}", means.join(", "));
    println!("|∫G| / ∫|G|: {:.2e}", loc.divergence_mean);
    Ok(())
}
