use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Polar Gauss–Legendre nodes.
pub const SPHERE_POLAR_NODES: usize = 48;
/// Azimuthal trapezoid nodes.
pub const SPHERE_AZIMUTH_NODES: usize = 96;

/// Product quadrature on the unit sphere `S²`: Gauss–Legendre in `cos θ`
/// times the trapezoid rule in `φ`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(polar: usize, azimuth: usize) -> Result<Self> {
        let gl = gauss_quad::legendre::GaussLegendre::new(polar)
            .map_err(|e| Error::Precondition(e.to_string()))?;
        let mut points = Vec::with_capacity(polar * azimuth);
        let mut weights = Vec::with_capacity(polar * azimuth);
        let dphi = 2.0 * PI / azimuth as f64;
        for &(c, w) in gl.as_node_weight_pairs() {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for k in 0..azimuth {
                let phi = (k as f64 + 0.5) * dphi;
                points.push([s * phi.cos(), s * phi.sin(), c]);
                weights.push(w * dphi);
            }
        }
        Ok(Self { points, weights })
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// The default rule on `S^{n-1}`; only `n = 3` is supported.
pub fn sphere_rule(n: usize) -> Result<SphereRule> {
    if n != 3 {
        return Err(Error::Dimension(n));
    }
    SphereRule::new(SPHERE_POLAR_NODES, SPHERE_AZIMUTH_NODES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_low_harmonics() {
        let r = sphere_rule(3).unwrap();
        assert!((r.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-12);
        assert!((r.integrate(|x| x[0] * x[0]) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(r.integrate(|x| x[0] * x[1] * x[2]).abs() < 1e-14);
    }
}
