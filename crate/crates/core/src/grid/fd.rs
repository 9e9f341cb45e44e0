use crate::error::{Error, Result};

use super::{Grid, GridFunction};

/// A finite-difference derivative: first (`axes.0`) or second
/// (`axes.0`, `axes.1`) order, at accuracy 2 or 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StencilDerivative {
    pub order: usize,
    pub axes: (usize, usize),
    pub accuracy: usize,
}

impl StencilDerivative {
    pub fn first(axis: usize, accuracy: usize) -> Self {
        Self {
            order: 1,
            axes: (axis, axis),
            accuracy,
        }
    }

    pub fn second(a: usize, b: usize, accuracy: usize) -> Self {
        Self {
            order: 2,
            axes: (a, b),
            accuracy,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.order == 1 || self.order == 2) {
            return Err(Error::Precondition(format!(
                "derivative order {} unsupported",
                self.order
            )));
        }
        if !(self.accuracy == 2 || self.accuracy == 4) {
            return Err(Error::Precondition(format!(
                "accuracy {} unsupported",
                self.accuracy
            )));
        }
        if self.axes.0 >= dim || self.axes.1 >= dim {
            return Err(Error::Dimension(dim));
        }
        Ok(())
    }
}

/// Fornberg's recursion: weights of the `order`-th derivative at `x0` from
/// values at `xs`.
pub(crate) fn fornberg(order: usize, x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Per-node stencils along one axis: (window start, weights).
fn axis_stencils(
    nodes: usize,
    h: f64,
    axis: usize,
    order: usize,
    accuracy: usize,
) -> Result<Vec<(usize, Vec<f64>)>> {
    let centered = 2 * ((order + 1) / 2) - 1 + accuracy;
    let one_sided = order + accuracy;
    if nodes < one_sided.max(centered) {
        return Err(Error::StencilTooWide {
            axis,
            width: one_sided.max(centered),
            nodes,
        });
    }
    let half = centered / 2;
    let mut cache: std::collections::HashMap<(usize, usize), Vec<f64>> = Default::default();
    let mut out = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let (start, width) = if i >= half && i + half < nodes {
            (i - half, centered)
        } else {
            let s = i.saturating_sub(one_sided / 2).min(nodes - one_sided);
            (s, one_sided)
        };
        let w = cache
            .entry((i - start, width))
            .or_insert_with(|| {
                let xs: Vec<f64> = (0..width).map(|j| j as f64).collect();
                fornberg(order, (i - start) as f64, &xs)
                    .into_iter()
                    .map(|w| w / h.powi(order as i32))
                    .collect()
            })
            .clone();
        out.push((start, w));
    }
    Ok(out)
}

fn apply_axis(
    grid: &Grid,
    values: &[f64],
    comps: usize,
    axis: usize,
    order: usize,
    accuracy: usize,
) -> Result<Vec<f64>> {
    let st = axis_stencils(grid.shape()[axis], grid.spacing()[axis], axis, order, accuracy)?;
    let stride = grid.strides()[axis] * comps;
    let mut out = vec![0.0; values.len()];
    for lin in 0..grid.node_count() {
        let i = grid.multi_index(lin)[axis];
        let (start, w) = &st[i];
        let base = (lin * comps) as isize - ((i - start) * stride) as isize;
        for c in 0..comps {
            let mut acc = 0.0;
            for (j, wj) in w.iter().enumerate() {
                acc += wj * values[(base as usize) + j * stride + c];
            }
            out[lin * comps + c] = acc;
        }
    }
    Ok(out)
}

/// Componentwise derivative of a field.
pub fn finite_difference(f: &GridFunction, d: StencilDerivative) -> Result<GridFunction> {
    let grid = f.grid();
    d.validate(grid.dim())?;
    let k = f.components();
    let values = if d.order == 1 {
        apply_axis(grid, f.values(), k, d.axes.0, 1, d.accuracy)?
    } else if d.axes.0 == d.axes.1 {
        apply_axis(grid, f.values(), k, d.axes.0, 2, d.accuracy)?
    } else {
        let t = apply_axis(grid, f.values(), k, d.axes.0, 1, d.accuracy)?;
        apply_axis(grid, &t, k, d.axes.1, 1, d.accuracy)?
    };
    GridFunction::new(grid.clone(), k, values)
}

/// Gradient. For a `k`-component field the result has `k * n` components,
/// ordered `c * n + i` for `∂_i f_c`.
pub fn gradient(f: &GridFunction, accuracy: usize) -> Result<GridFunction> {
    let n = f.grid().dim();
    let k = f.components();
    let parts = (0..n)
        .map(|i| finite_difference(f, StencilDerivative::first(i, accuracy)))
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; f.grid().node_count() * k * n];
    for lin in 0..f.grid().node_count() {
        for c in 0..k {
            for (i, p) in parts.iter().enumerate() {
                values[(lin * k + c) * n + i] = p.value(lin, c);
            }
        }
    }
    GridFunction::new(f.grid().clone(), k * n, values)
}

pub fn divergence(f: &GridFunction, accuracy: usize) -> Result<GridFunction> {
    let n = f.grid().dim();
    if f.components() != n {
        return Err(Error::Shape(format!(
            "divergence needs {n} components, got {}",
            f.components()
        )));
    }
    let mut out = GridFunction::zeros(f.grid(), 1);
    for i in 0..n {
        let d = finite_difference(&f.component(i), StencilDerivative::first(i, accuracy))?;
        for (o, v) in out.values_mut().iter_mut().zip(d.values()) {
            *o += v;
        }
    }
    Ok(out)
}

/// Componentwise Laplacian.
pub fn laplacian(f: &GridFunction, accuracy: usize) -> Result<GridFunction> {
    let n = f.grid().dim();
    let mut out = GridFunction::zeros(f.grid(), f.components());
    for i in 0..n {
        let d = finite_difference(f, StencilDerivative::second(i, i, accuracy))?;
        for (o, v) in out.values_mut().iter_mut().zip(d.values()) {
            *o += v;
        }
    }
    Ok(out)
}

/// Hessian of a scalar field, components ordered `i * n + j`.
pub fn hessian(f: &GridFunction, accuracy: usize) -> Result<GridFunction> {
    if !f.is_scalar() {
        return Err(Error::Shape("hessian needs a scalar field".into()));
    }
    let n = f.grid().dim();
    let mut parts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            parts.push(finite_difference(f, StencilDerivative::second(i, j, accuracy))?);
        }
    }
    GridFunction::stack(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxDomain, DomainKind};

    fn grid(h: f64) -> Grid {
        Grid::new(BoxDomain::cube(3, 0.0, 1.0, DomainKind::BoundedBox).unwrap(), h).unwrap()
    }

    #[test]
    fn fornberg_matches_classic_stencils() {
        let w = fornberg(1, 2.0, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let w = fornberg(2, 1.0, &[0.0, 1.0, 2.0]);
        for (a, b) in w.iter().zip([1.0, -2.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn affine_first_derivative_is_exact() {
        let g = grid(0.125);
        let f = GridFunction::from_fn(&g, |x| 3.0 * x[0] - x[2]);
        for acc in [2, 4] {
            let d = finite_difference(&f, StencilDerivative::first(0, acc)).unwrap();
            assert!(d.values().iter().all(|v| (v - 3.0).abs() < 1e-11));
        }
    }

    #[test]
    fn quadratic_second_derivatives_are_exact() {
        let g = grid(0.125);
        let f = GridFunction::from_fn(&g, |x| x[0] * x[0] + x[0] * x[1]);
        for acc in [2, 4] {
            let d = finite_difference(&f, StencilDerivative::second(0, 0, acc)).unwrap();
            assert!(d.values().iter().all(|v| (v - 2.0).abs() < 1e-9));
            let d = finite_difference(&f, StencilDerivative::second(0, 1, acc)).unwrap();
            assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn sine_derivative_at_origin() {
        let dom = BoxDomain::cube(1, -1.0, 1.0, DomainKind::BoundedBox).unwrap();
        let g = Grid::new(dom, 1.0 / 32.0).unwrap();
        let f = GridFunction::from_fn(&g, |x| x[0].sin());
        let d = finite_difference(&f, StencilDerivative::first(0, 2)).unwrap();
        let mid = g.nearest_index(0, 0.0);
        let h: f64 = 1.0 / 32.0;
        // Taylor remainder h^2/6 * max|f'''|.
        assert!((d.values()[mid] - 1.0).abs() <= h * h / 6.0);
    }

    fn max_err(h: f64, acc: usize) -> f64 {
        let dom = BoxDomain::cube(1, 0.0, 1.0, DomainKind::BoundedBox).unwrap();
        let g = Grid::new(dom, h).unwrap();
        let f = GridFunction::from_fn(&g, |x| (3.0 * x[0]).sin());
        let d = finite_difference(&f, StencilDerivative::first(0, acc)).unwrap();
        (0..g.node_count())
            .map(|i| (d.values()[i] - 3.0 * (3.0 * g.point(i)[0]).cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn refinement_reduces_error() {
        let r2 = max_err(1.0 / 16.0, 2) / max_err(1.0 / 32.0, 2);
        assert!(r2 >= 3.5, "order-2 ratio {r2}");
        let r4 = max_err(1.0 / 16.0, 4) / max_err(1.0 / 32.0, 4);
        assert!(r4 >= 12.0, "order-4 ratio {r4}");
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let dom = BoxDomain::cube(1, 0.0, 1.0, DomainKind::BoundedBox).unwrap();
        let g = Grid::with_shape(dom, &[3]).unwrap();
        let f = GridFunction::from_fn(&g, |x| x[0]);
        assert!(matches!(
            finite_difference(&f, StencilDerivative::first(0, 4)),
            Err(Error::StencilTooWide { .. })
        ));
    }

    #[test]
    fn divergence_and_laplacian() {
        let g = grid(0.125);
        let v = GridFunction::from_fn_vec(&g, 3, |x, out| {
            out[0] = x[0] * x[1];
            out[1] = x[1] * x[1];
            out[2] = -x[2];
        });
        let div = divergence(&v, 2).unwrap();
        for lin in 0..g.node_count() {
            let x = g.point(lin);
            assert!((div.values()[lin] - (3.0 * x[1] - 1.0)).abs() < 1e-10);
        }
        let lap = laplacian(&v, 2).unwrap();
        for lin in 0..g.node_count() {
            assert!((lap.value(lin, 1) - 2.0).abs() < 1e-9);
            assert!(lap.value(lin, 0).abs() < 1e-9);
        }
    }
}
