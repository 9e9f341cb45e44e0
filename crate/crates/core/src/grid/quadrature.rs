use crate::error::{Error, Result};

use super::GridFunction;

/// Tensor-product quadrature rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    #[default]
    Trapezoid,
    /// Composite Simpson; needs an odd node count on every axis.
    Simpson,
}

pub(crate) fn axis_weights(nodes: usize, h: f64, rule: QuadratureRule) -> Result<Vec<f64>> {
    if nodes < 2 {
        return Err(Error::Shape("quadrature needs two nodes per axis".into()));
    }
    let mut w = vec![h; nodes];
    match rule {
        QuadratureRule::Trapezoid => {
            w[0] = 0.5 * h;
            w[nodes - 1] = 0.5 * h;
        }
        QuadratureRule::Simpson => {
            if nodes % 2 == 0 {
                return Err(Error::Shape(format!(
                    "Simpson's rule needs an odd node count, got {nodes}"
                )));
            }
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = if i == 0 || i == nodes - 1 {
                    h / 3.0
                } else if i % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                };
            }
        }
    }
    Ok(w)
}

/// Weights of the tensor rule in linear node order.
pub fn quadrature_weights(grid: &super::Grid, rule: QuadratureRule) -> Result<Vec<f64>> {
    let axes = (0..grid.dim())
        .map(|a| grid.axis_weights(a, rule))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..grid.node_count())
        .map(|lin| {
            let idx = grid.multi_index(lin);
            (0..grid.dim()).map(|a| axes[a][idx[a]]).product()
        })
        .collect())
}

/// Trapezoidal integral of a scalar field over its box.
pub fn quadrature(f: &GridFunction) -> Result<f64> {
    quadrature_with(f, QuadratureRule::Trapezoid)
}

pub fn quadrature_with(f: &GridFunction, rule: QuadratureRule) -> Result<f64> {
    if !f.is_scalar() {
        return Err(Error::Shape("quadrature needs a scalar field".into()));
    }
    let w = quadrature_weights(f.grid(), rule)?;
    Ok(w.iter().zip(f.values()).map(|(w, v)| w * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxDomain, DomainKind, Grid};

    fn unit(h: f64) -> Grid {
        Grid::new(BoxDomain::cube(3, 0.0, 1.0, DomainKind::BoundedBox).unwrap(), h).unwrap()
    }

    #[test]
    fn constants_and_affine_are_exact() {
        let g = unit(0.25);
        assert!((quadrature(&GridFunction::from_fn(&g, |_| 1.0)).unwrap() - 1.0).abs() < 1e-14);
        assert!((quadrature(&GridFunction::from_fn(&g, |x| x[0])).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn simpson_integrates_quadratics() {
        let g = unit(1.0 / 32.0);
        let q = quadrature_with(&GridFunction::from_fn(&g, |x| x[0] * x[0]), QuadratureRule::Simpson)
            .unwrap();
        assert!((q - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn simpson_rejects_even_counts() {
        let g = Grid::with_shape(
            BoxDomain::cube(2, 0.0, 1.0, DomainKind::BoundedBox).unwrap(),
            &[4, 5],
        )
        .unwrap();
        let f = GridFunction::from_fn(&g, |_| 1.0);
        assert!(quadrature_with(&f, QuadratureRule::Simpson).is_err());
    }

    #[test]
    fn vector_fields_are_rejected() {
        let g = unit(0.5);
        assert!(quadrature(&GridFunction::zeros(&g, 3)).is_err());
    }
}
