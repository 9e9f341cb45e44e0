use crate::error::{Error, Result};

use super::{quadrature, Grid, GridFunction};

/// `exp(-1/(1-s))` for `s < 1`, zero otherwise; `s` is the squared
/// normalized radius.
pub fn bump_profile(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

fn check_ball(grid: &Grid, center: &[f64], radius: f64) -> Result<()> {
    if !(radius > 0.0) || !grid.domain().contains_ball(center, radius) {
        return Err(Error::BallOutsideDomain {
            center: center.to_vec(),
            radius,
        });
    }
    Ok(())
}

fn raw_bump(grid: &Grid, center: &[f64], radius: f64) -> GridFunction {
    let r2 = radius * radius;
    GridFunction::from_fn(grid, |x| {
        let s: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
        bump_profile(s / r2)
    })
}

/// Smooth bump `amplitude * exp(-1/(1-|x-c|²/r²))` supported in the ball.
pub fn make_bump(grid: &Grid, center: &[f64], radius: f64, amplitude: f64) -> Result<GridFunction> {
    check_ball(grid, center, radius)?;
    Ok(raw_bump(grid, center, radius)
        .scaled(amplitude)
        .with_support_radius(radius))
}

/// Bump at `center` minus a rescaled copy at `center + offset`, with the
/// discrete integral removed exactly. The declared support radius is
/// measured from `center`.
pub fn make_mean_zero_bump(
    grid: &Grid,
    center: &[f64],
    radius: f64,
    amplitude: f64,
    offset: &[f64],
) -> Result<GridFunction> {
    check_ball(grid, center, radius)?;
    if offset.len() != center.len() {
        return Err(Error::Shape("offset has the wrong length".into()));
    }
    let second: Vec<f64> = center.iter().zip(offset).map(|(c, o)| c + o).collect();
    check_ball(grid, &second, radius)?;
    let dist = offset.iter().map(|o| o * o).sum::<f64>().sqrt();
    if dist < 2.0 * radius {
        return Err(Error::Precondition(
            "displaced bump must not overlap the first".into(),
        ));
    }
    let a = raw_bump(grid, center, radius);
    let b = raw_bump(grid, &second, radius);
    let ia = quadrature(&a)?;
    let ib = quadrature(&b)?;
    if ib == 0.0 {
        return Err(Error::Precondition(
            "bump is not resolved by the grid".into(),
        ));
    }
    let f = a.axpy(-ia / ib, &b)?.scaled(amplitude);
    Ok(f.with_support_radius(dist + radius))
}
