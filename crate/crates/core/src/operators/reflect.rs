use crate::error::{Error, Result};
use crate::grid::{DomainKind, Grid, GridFunction};

/// Parity of a reflection across `x_n = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Extend a half-space field to the reflected whole-space box:
/// `f(x', |x_n|)` (even) or `sign(x_n) f(x', |x_n|)` (odd). The odd
/// extension is zero on the plane.
pub fn reflect(f: &GridFunction, parity: Parity) -> Result<GridFunction> {
    let g = f.grid();
    if g.domain().kind() != DomainKind::HalfSpace {
        return Err(Error::InvalidDomain("reflection needs a half-space field".into()));
    }
    let n = g.dim();
    let m = g.shape()[n - 1];
    let mut shape = g.shape().to_vec();
    shape[n - 1] = 2 * m - 1;
    let whole = Grid::with_shape(g.domain().reflected()?, &shape)?;
    let k = f.components();
    let mut values = vec![0.0; whole.node_count() * k];
    for lin in 0..whole.node_count() {
        let mut idx = whole.multi_index(lin);
        let j = idx[n - 1] as isize - (m as isize - 1);
        idx[n - 1] = j.unsigned_abs();
        let src = g.linear_index(&idx[..n]);
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => j.signum() as f64,
        };
        for c in 0..k {
            values[lin * k + c] = sign * f.value(src, c);
        }
    }
    let out = GridFunction::new(whole, k, values)?;
    Ok(match f.support_radius() {
        Some(r) => out.with_support_radius(r),
        None => out,
    })
}

/// Restrict a field on a reflected box to its upper half `x_n >= 0`.
pub fn restrict_upper(f: &GridFunction) -> Result<GridFunction> {
    let g = f.grid();
    let n = g.dim();
    let lo_n = g.domain().lower()[n - 1];
    let hi_n = g.domain().upper()[n - 1];
    if lo_n >= 0.0 || hi_n <= 0.0 {
        return Err(Error::InvalidDomain("box does not straddle x_n = 0".into()));
    }
    let zero = g.nearest_index(n - 1, 0.0);
    if g.coord(n - 1, zero).abs() > 1e-9 * g.spacing()[n - 1] {
        return Err(Error::InvalidDomain("no node layer on x_n = 0".into()));
    }
    let mut lo = vec![0; n];
    let hi: Vec<usize> = g.shape().iter().map(|m| m - 1).collect();
    lo[n - 1] = zero;
    let window = g.window_indices(&lo, &hi)?;
    let restricted = f.restrict(&window)?;
    let mut upper = window.grid.domain().upper().to_vec();
    upper[n - 1] = hi_n;
    let mut lower = window.grid.domain().lower().to_vec();
    lower[n - 1] = 0.0;
    let domain = crate::grid::BoxDomain::new(&lower, &upper, DomainKind::HalfSpace)?;
    restricted.with_grid(Grid::with_shape(domain, window.grid.shape())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{quadrature, BoxDomain};

    fn half() -> Grid {
        Grid::new(BoxDomain::half_space(3, 1.0, 1.0).unwrap(), 0.125).unwrap()
    }

    #[test]
    fn odd_extension_has_zero_mean_and_trace() {
        let f = GridFunction::from_fn(&half(), |x| (x[0] + 2.0 * x[2]).exp() * (1.0 + x[1]));
        let o = reflect(&f, Parity::Odd).unwrap();
        assert!(quadrature(&o).unwrap().abs() < 1e-12);
        let g = o.grid();
        for lin in 0..g.node_count() {
            if g.point(lin)[2] == 0.0 {
                assert_eq!(o.values()[lin], 0.0);
            }
        }
    }

    #[test]
    fn even_extension_of_square() {
        let f = GridFunction::from_fn(&half(), |x| x[2] * x[2]);
        let e = reflect(&f, Parity::Even).unwrap();
        for lin in 0..e.grid().node_count() {
            let x = e.grid().point(lin);
            assert!((e.values()[lin] - x[2] * x[2]).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_is_exact() {
        // Odd extensions vanish on the plane, so the fixture does too.
        let f = GridFunction::from_fn_vec(&half(), 3, |x, o| {
            o[0] = x[0] * x[2];
            o[1] = x[1] * x[2];
            o[2] = x[2].sin();
        });
        for parity in [Parity::Even, Parity::Odd] {
            let back = restrict_upper(&reflect(&f, parity).unwrap()).unwrap();
            assert_eq!(back.values(), f.values());
            assert_eq!(back.grid(), f.grid());
        }
    }
}
