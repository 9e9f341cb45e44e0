//! Closed-form fundamental solutions, half-space layer kernels and their
//! derivatives.
//!
//! Indices are zero-based: `Kernel::q(3, 0)` is `Q^1 = x_1/|x|^3`. The
//! layer kernels single out the last axis.

mod sphere;

pub use sphere::{sphere_rule, SphereRule};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{EstimateCase, EstimateReport};

/// `Γ(n/2)` by the recursion from `Γ(1) = 1` and `Γ(1/2) = √π`.
fn gamma_half(n: usize) -> f64 {
    let (mut k, mut g) = if n % 2 == 0 { (2, 1.0) } else { (1, PI.sqrt()) };
    while k < n {
        g *= k as f64 / 2.0;
        k += 2;
    }
    g
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// The kernel families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelId {
    V,
    Q,
    K,
    #[serde(rename = "dV")]
    DV,
    #[serde(rename = "ddV")]
    DdV,
    #[serde(rename = "dQ")]
    DQ,
    #[serde(rename = "dK")]
    DK,
    #[serde(rename = "ddK")]
    DdK,
    Z,
    #[serde(rename = "dZ")]
    DZ,
    #[serde(rename = "ddZ")]
    DdZ,
    #[serde(rename = "z")]
    LowerZ,
    #[serde(rename = "dz")]
    Dz,
    #[serde(rename = "ddz")]
    Ddz,
    /// `|x|^{-n}`: homogeneous of degree `-n` without cancellation.
    #[serde(rename = "invpow")]
    InversePower,
}

impl KernelId {
    pub fn name(self) -> &'static str {
        match self {
            KernelId::V => "V",
            KernelId::Q => "Q",
            KernelId::K => "K",
            KernelId::DV => "dV",
            KernelId::DdV => "ddV",
            KernelId::DQ => "dQ",
            KernelId::DK => "dK",
            KernelId::DdK => "ddK",
            KernelId::Z => "Z",
            KernelId::DZ => "dZ",
            KernelId::DdZ => "ddZ",
            KernelId::LowerZ => "z",
            KernelId::Dz => "dz",
            KernelId::Ddz => "ddz",
            KernelId::InversePower => "invpow",
        }
    }

    /// Number of tensor indices.
    pub fn arity(self) -> usize {
        match self {
            KernelId::K | KernelId::LowerZ | KernelId::InversePower => 0,
            KernelId::Q | KernelId::DK | KernelId::Dz => 1,
            KernelId::V | KernelId::DQ | KernelId::DdK | KernelId::Z | KernelId::Ddz => 2,
            KernelId::DV | KernelId::DZ => 3,
            KernelId::DdV | KernelId::DdZ => 4,
        }
    }

    /// Is this a half-space layer kernel (defined for `x_n >= 0`)?
    pub fn is_layer(self) -> bool {
        matches!(
            self,
            KernelId::Z | KernelId::DZ | KernelId::DdZ | KernelId::LowerZ | KernelId::Dz | KernelId::Ddz
        )
    }

    /// Homogeneity degree in dimension `n`.
    pub fn degree(self, n: usize) -> i32 {
        let n = n as i32;
        match self {
            KernelId::V | KernelId::K => 2 - n,
            KernelId::Q | KernelId::DV | KernelId::DK | KernelId::Z | KernelId::LowerZ => 1 - n,
            KernelId::DdV
            | KernelId::DQ
            | KernelId::DdK
            | KernelId::DZ
            | KernelId::Dz
            | KernelId::InversePower => -n,
            KernelId::DdZ | KernelId::Ddz => -n - 1,
        }
    }
}

/// A kernel component: family, dimension and tensor indices.
///
/// Index meaning: `V^{rl}` `(r, l)`, `Q^l` `(l)`, `∂_iV^{rl}` `(r, l, i)`,
/// `∂_i∂_jV^{rl}` `(r, l, i, j)`, `∂_iQ^l` `(l, i)`, `∂_iK` `(i)`,
/// `∂_i∂_jK` `(i, j)`, and likewise for `Z` and `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Kernel {
    pub id: KernelId,
    pub n: usize,
    idx: [usize; 4],
}

/// Value and first two derivatives of the monomial `prod x[idx]`.
fn monomial(x: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&a| x[a]).product()
}

fn monomial_d(x: &[f64], idx: &[usize], i: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..idx.len() {
        if idx[k] == i {
            s += idx
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != k)
                .map(|(_, &a)| x[a])
                .product::<f64>();
        }
    }
    s
}

fn monomial_dd(x: &[f64], idx: &[usize], i: usize, j: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..idx.len() {
        for m in 0..idx.len() {
            if k != m && idx[k] == i && idx[m] == j {
                s += idx
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != k && q != m)
                    .map(|(_, &a)| x[a])
                    .product::<f64>();
            }
        }
    }
    s
}

/// `P(x) |x|^{-m}` and its derivatives for a monomial `P`.
fn poly_over_power(x: &[f64], idx: &[usize], m: f64, d: &[usize]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let rm = r2.powf(-m / 2.0);
    let p = monomial(x, idx);
    match d {
        [] => p * rm,
        [i] => monomial_d(x, idx, *i) * rm - m * p * x[*i] * rm / r2,
        [i, j] => {
            let (i, j) = (*i, *j);
            monomial_dd(x, idx, i, j) * rm
                - m * (monomial_d(x, idx, i) * x[j] + monomial_d(x, idx, j) * x[i] + p * delta(i, j))
                    * rm
                    / r2
                + m * (m + 2.0) * p * x[i] * x[j] * rm / (r2 * r2)
        }
        _ => unreachable!("at most two derivatives"),
    }
}

impl Kernel {
    pub fn new(id: KernelId, n: usize, indices: &[usize]) -> Result<Self> {
        if n < 3 || n > crate::grid::MAX_DIM {
            return Err(Error::Dimension(n));
        }
        if indices.len() != id.arity() || indices.iter().any(|&k| k >= n) {
            return Err(Error::Precondition(format!(
                "kernel {} takes {} indices below {n}, got {indices:?}",
                id.name(),
                id.arity()
            )));
        }
        let mut idx = [0; 4];
        idx[..indices.len()].copy_from_slice(indices);
        Ok(Self { id, n, idx })
    }

    fn make(id: KernelId, n: usize, indices: &[usize]) -> Self {
        Self::new(id, n, indices).expect("valid kernel indices")
    }

    pub fn v(n: usize, r: usize, l: usize) -> Self {
        Self::make(KernelId::V, n, &[r, l])
    }
    pub fn q(n: usize, l: usize) -> Self {
        Self::make(KernelId::Q, n, &[l])
    }
    pub fn k(n: usize) -> Self {
        Self::make(KernelId::K, n, &[])
    }
    pub fn dv(n: usize, r: usize, l: usize, i: usize) -> Self {
        Self::make(KernelId::DV, n, &[r, l, i])
    }
    pub fn ddv(n: usize, r: usize, l: usize, i: usize, j: usize) -> Self {
        Self::make(KernelId::DdV, n, &[r, l, i, j])
    }
    pub fn dq(n: usize, l: usize, i: usize) -> Self {
        Self::make(KernelId::DQ, n, &[l, i])
    }
    pub fn dk(n: usize, i: usize) -> Self {
        Self::make(KernelId::DK, n, &[i])
    }
    pub fn ddk(n: usize, i: usize, j: usize) -> Self {
        Self::make(KernelId::DdK, n, &[i, j])
    }
    pub fn z(n: usize, r: usize, l: usize) -> Self {
        Self::make(KernelId::Z, n, &[r, l])
    }
    pub fn dz_tensor(n: usize, r: usize, l: usize, i: usize) -> Self {
        Self::make(KernelId::DZ, n, &[r, l, i])
    }
    pub fn ddz_tensor(n: usize, r: usize, l: usize, i: usize, j: usize) -> Self {
        Self::make(KernelId::DdZ, n, &[r, l, i, j])
    }
    pub fn lower_z(n: usize) -> Self {
        Self::make(KernelId::LowerZ, n, &[])
    }
    pub fn dz(n: usize, i: usize) -> Self {
        Self::make(KernelId::Dz, n, &[i])
    }
    pub fn ddz(n: usize, i: usize, j: usize) -> Self {
        Self::make(KernelId::Ddz, n, &[i, j])
    }
    pub fn inverse_power(n: usize) -> Self {
        Self::make(KernelId::InversePower, n, &[])
    }

    pub fn indices(&self) -> &[usize] {
        &self.idx[..self.id.arity()]
    }

    pub fn degree(&self) -> i32 {
        self.id.degree(self.n)
    }

    pub fn label(&self) -> String {
        let idx: Vec<String> = self.indices().iter().map(|k| k.to_string()).collect();
        if idx.is_empty() {
            self.id.name().to_string()
        } else {
            format!("{}[{}]", self.id.name(), idx.join(","))
        }
    }

    /// Closed-form value; `x` must be nonzero (and `x_n >= 0` for layer
    /// kernels).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::Dimension(x.len()));
        }
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::Singular(self.label()));
        }
        if self.id.is_layer() && x[self.n - 1] < 0.0 {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(self.eval_unchecked(x))
    }

    /// [`Kernel::eval`] without argument checks.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let nf = n as f64;
        let s = sphere_area(n);
        let b = ball_volume(n);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let rho = r2.sqrt();
        let rn = rho.powi(n as i32);
        let [a0, a1, a2, a3] = self.idx;
        let last = n - 1;
        match self.id {
            KernelId::V => {
                let (r, l) = (a0, a1);
                delta(r, l) / ((nf - 2.0) * rho.powi(n as i32 - 2)) + x[r] * x[l] / rn
            }
            KernelId::Q => x[a0] / rn,
            KernelId::K => 1.0 / ((nf - 2.0) * s * rho.powi(n as i32 - 2)),
            KernelId::DV => {
                let (r, l, i) = (a0, a1, a2);
                (-delta(r, l) * x[i] + delta(i, r) * x[l] + delta(i, l) * x[r]) / rn
                    - nf * x[r] * x[l] * x[i] / (rn * r2)
            }
            KernelId::DdV => {
                let (r, l, i, j) = (a0, a1, a2, a3);
                let rn2 = rn * r2;
                let t1 = -delta(r, l) * (delta(i, j) / rn - nf * x[i] * x[j] / rn2);
                let t2 = (delta(i, r) * delta(j, l) + delta(i, l) * delta(j, r)) / rn
                    - nf * (delta(i, r) * x[l] + delta(i, l) * x[r]) * x[j] / rn2;
                let t3 = -nf
                    * (delta(j, r) * x[l] * x[i] + delta(j, l) * x[r] * x[i] + delta(j, i) * x[r] * x[l])
                    / rn2
                    + nf * (nf + 2.0) * x[r] * x[l] * x[i] * x[j] / (rn2 * r2);
                t1 + t2 + t3
            }
            KernelId::DQ => {
                let (l, i) = (a0, a1);
                delta(i, l) / rn - nf * x[l] * x[i] / (rn * r2)
            }
            KernelId::DK => -x[a0] / (s * rn),
            KernelId::DdK => {
                let (i, j) = (a0, a1);
                -(delta(i, j) / rn - nf * x[i] * x[j] / (rn * r2)) / s
            }
            KernelId::Z => (2.0 / b) * poly_over_power(x, &[last, a0, a1], nf + 2.0, &[]),
            KernelId::DZ => (2.0 / b) * poly_over_power(x, &[last, a0, a1], nf + 2.0, &[a2]),
            KernelId::DdZ => {
                (2.0 / b) * poly_over_power(x, &[last, a0, a1], nf + 2.0, &[a2, a3])
            }
            KernelId::LowerZ => -(4.0 / s) * x[last] / rn,
            KernelId::Dz => -(4.0 / s) * poly_over_power(x, &[last], nf, &[a0]),
            KernelId::Ddz => -(4.0 / s) * poly_over_power(x, &[last], nf, &[a0, a1]),
            KernelId::InversePower => 1.0 / rn,
        }
    }

    /// The kernel this one is a first derivative of, with the axis.
    pub fn parent(&self) -> Option<(Kernel, usize)> {
        let n = self.n;
        let [a0, a1, a2, a3] = self.idx;
        Some(match self.id {
            KernelId::DV => (Kernel::v(n, a0, a1), a2),
            KernelId::DdV => (Kernel::dv(n, a0, a1, a2), a3),
            KernelId::DQ => (Kernel::q(n, a0), a1),
            KernelId::DK => (Kernel::k(n), a0),
            KernelId::DdK => (Kernel::dk(n, a0), a1),
            KernelId::DZ => (Kernel::z(n, a0, a1), a2),
            KernelId::DdZ => (Kernel::dz_tensor(n, a0, a1, a2), a3),
            KernelId::Dz => (Kernel::lower_z(n), a0),
            KernelId::Ddz => (Kernel::dz(n, a0), a1),
            _ => return None,
        })
    }

    /// Fourth-order central difference of the parent kernel at `x`.
    pub fn fd_from_parent(&self, x: &[f64], h: f64) -> Option<f64> {
        let (parent, axis) = self.parent()?;
        let at = |t: f64| {
            let mut y = x.to_vec();
            y[axis] += t;
            parent.eval_unchecked(&y)
        };
        Some((at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h))
    }

    /// All components of a family in dimension `n`, in lexicographic index
    /// order.
    pub fn family(id: KernelId, n: usize) -> Vec<Kernel> {
        let k = id.arity();
        let count = n.pow(k as u32);
        (0..count)
            .map(|mut c| {
                let mut idx = vec![0; k];
                for slot in (0..k).rev() {
                    idx[slot] = c % n;
                    c /= n;
                }
                Kernel::make(id, n, &idx)
            })
            .collect()
    }
}

/// `∫_{S^{n-1}} P dω` for a kernel homogeneous of degree `-n`, where
/// `P = |x|^n κ(x)` restricted to the sphere. Zero is the cancellation
/// condition of a Calderón–Zygmund kernel.
pub fn spherical_mean(kernel: &Kernel) -> Result<f64> {
    let n = kernel.n;
    if kernel.degree() != -(n as i32) {
        return Err(Error::WrongHomogeneity {
            kernel: kernel.label(),
            degree: kernel.degree(),
            expected: -(n as i32),
        });
    }
    if kernel.id.is_layer() {
        return Err(Error::Precondition(
            "layer kernels are only defined on the upper half-space".into(),
        ));
    }
    let rule = sphere_rule(n)?;
    Ok(rule.integrate(|w| kernel.eval_unchecked(w)))
}

/// Largest spherical integral over a family (e.g. all `∂_i∂_jV^{rl}`).
pub fn max_spherical_mean(id: KernelId, n: usize) -> Result<f64> {
    Kernel::family(id, n)
        .iter()
        .map(spherical_mean)
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v.abs())))
}

/// Check `ΔZ^{rl} - ∂²_{rl} z = 0` and `Σ_r ∂_r Z^{rl} = 0` at points in the
/// upper half-space. Each case is the largest residual over `(r, l)` against
/// the largest term magnitude, so the ratio is a relative residual.
pub fn verify_kernel_identities(points: &[Vec<f64>]) -> Result<EstimateReport> {
    let mut report = EstimateReport::new("kernel-identities", 0.0, "-");
    for (k, x) in points.iter().enumerate() {
        let n = x.len();
        if x[n - 1] <= 0.0 {
            return Err(Error::OutsideDomain { point: x.clone() });
        }
        let (mut lap_res, mut lap_scale, mut div_res, mut div_scale) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for r in 0..n {
            for l in 0..n {
                let mut lap = 0.0;
                let mut scale = 0.0;
                for i in 0..n {
                    let t = Kernel::ddz_tensor(n, r, l, i, i).eval(x)?;
                    lap += t;
                    scale += t.abs();
                }
                let zz = Kernel::ddz(n, r, l).eval(x)?;
                lap_res = lap_res.max((lap - zz).abs());
                lap_scale = lap_scale.max(scale + zz.abs());
                let mut div = 0.0;
                let mut dscale = 0.0;
                for rr in 0..n {
                    let t = Kernel::dz_tensor(n, rr, l, rr).eval(x)?;
                    div += t;
                    dscale += t.abs();
                }
                let _ = r;
                div_res = div_res.max(div.abs());
                div_scale = div_scale.max(dscale);
            }
        }
        report.push(EstimateCase::new(format!("laplace@{k}"), lap_res, lap_scale));
        report.push(EstimateCase::new(format!("divergence@{k}"), div_res, div_scale));
    }
    Ok(report)
}

/// `∫_{|y'| < R} Z^{rl}((0', x_n) - (y', 0)) dy'`, which tends to `δ_{rl}`
/// as `x_n ↘ 0` (for `R = ∞` it equals `δ_{rl}` for every `x_n`).
///
/// Polar quadrature: Gauss–Legendre on radial panels that double in width
/// from `x_n / 8`, and an exact trapezoid rule in the angle (the angular
/// dependence is a trigonometric polynomial of degree two).
pub fn z_boundary_delta(n: usize, r: usize, l: usize, xn: f64, radius: f64) -> Result<f64> {
    if n != 3 {
        return Err(Error::Dimension(n));
    }
    if !(xn > 0.0) || !(radius > 0.0) {
        return Err(Error::Precondition("need x_n > 0 and a positive radius".into()));
    }
    let kernel = Kernel::z(n, r, l);
    let gl = gauss_quad::legendre::GaussLegendre::new(16)
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let nodes = gl.as_node_weight_pairs();
    let mut edges = vec![0.0];
    let mut e = xn / 8.0;
    while e < radius {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(radius);
    let angles = 16;
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for &(t, wt) in nodes {
            let s = mid + half * t;
            let mut ring = 0.0;
            for k in 0..angles {
                let phi = 2.0 * PI * k as f64 / angles as f64;
                let x = [-s * phi.cos(), -s * phi.sin(), xn];
                ring += kernel.eval_unchecked(&x);
            }
            total += half * wt * s * ring * 2.0 * PI / angles as f64;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constants() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn point_values() {
        assert_eq!(Kernel::q(3, 0).eval(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        let k = Kernel::k(3).eval(&[0.0, 1.0, 0.0]).unwrap();
        assert!((k - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((k - 0.0795775).abs() < 1e-7);
        assert_eq!(Kernel::v(3, 0, 0).eval(&[1.0, 0.0, 0.0]).unwrap(), 2.0);
        assert!(matches!(Kernel::k(3).eval(&[0.0; 3]), Err(Error::Singular(_))));
        assert!(Kernel::z(3, 0, 0).eval(&[0.1, 0.0, -0.2]).is_err());
    }

    #[test]
    fn derivatives_match_parent_differences() {
        let pts = [[0.7, -0.4, 0.5], [0.3, 0.9, 0.2], [-0.6, 0.1, 0.8]];
        for id in [
            KernelId::DV,
            KernelId::DdV,
            KernelId::DQ,
            KernelId::DK,
            KernelId::DdK,
            KernelId::DZ,
            KernelId::DdZ,
            KernelId::Dz,
            KernelId::Ddz,
        ] {
            for k in Kernel::family(id, 3) {
                for x in &pts {
                    let exact = k.eval(x).unwrap();
                    let fd = k.fd_from_parent(x, 1e-3).unwrap();
                    assert!(
                        (exact - fd).abs() < 1e-8 * (1.0 + exact.abs()),
                        "{}: {exact} vs {fd}",
                        k.label()
                    );
                }
            }
        }
    }

    #[test]
    fn cancellation_of_singular_families() {
        for id in [KernelId::DdV, KernelId::DQ, KernelId::DdK] {
            assert!(max_spherical_mean(id, 3).unwrap() <= 1e-8, "{}", id.name());
        }
        let m = spherical_mean(&Kernel::inverse_power(3)).unwrap();
        assert!((m - 4.0 * PI).abs() < 1e-10);
        assert!(matches!(
            spherical_mean(&Kernel::v(3, 0, 0)),
            Err(Error::WrongHomogeneity { .. })
        ));
    }

    #[test]
    fn identities_at_fixed_points() {
        let div: f64 = (0..3)
            .map(|r| Kernel::dz_tensor(3, r, 1, r).eval(&[1.0, 1.0, 1.0]).unwrap())
            .sum();
        assert!(div.abs() < 1e-10);
        let x = [0.3, -0.2, 0.7];
        let lap: f64 = (0..3).map(|i| Kernel::ddz_tensor(3, 0, 0, i, i).eval(&x).unwrap()).sum();
        let zz = Kernel::ddz(3, 0, 0).eval(&x).unwrap();
        assert!((lap - zz).abs() < 1e-10 * (lap.abs() + zz.abs()));
        let report = verify_kernel_identities(&[x.to_vec(), vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(report.sup_ratio().unwrap() < 1e-12);
    }

    #[test]
    fn stokeslet_laplacian_is_twice_pressure_gradient() {
        let x = [0.4, -0.3, 0.6];
        for r in 0..3 {
            for l in 0..3 {
                let lap: f64 = (0..3).map(|i| Kernel::ddv(3, r, l, i, i).eval(&x).unwrap()).sum();
                let dq = Kernel::dq(3, l, r).eval(&x).unwrap();
                assert!((lap - 2.0 * dq).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_delta() {
        let v = z_boundary_delta(3, 2, 2, 0.01, 10.0).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
        assert!(z_boundary_delta(3, 0, 1, 0.3, 10.0).unwrap().abs() < 1e-10);
        let a = (z_boundary_delta(3, 0, 0, 0.02, 10.0).unwrap() - 1.0).abs();
        let b = (z_boundary_delta(3, 0, 0, 0.01, 10.0).unwrap() - 1.0).abs();
        assert!(b < a);
    }

    fn any_kernel() -> impl Strategy<Value = Kernel> {
        let ids = vec![
            KernelId::V,
            KernelId::Q,
            KernelId::K,
            KernelId::DV,
            KernelId::DdV,
            KernelId::DQ,
            KernelId::DK,
            KernelId::DdK,
            KernelId::Z,
            KernelId::DZ,
            KernelId::LowerZ,
            KernelId::Dz,
            KernelId::Ddz,
        ];
        (prop::sample::select(ids), prop::array::uniform4(0usize..3))
            .prop_map(|(id, idx)| Kernel::new(id, 3, &idx[..id.arity()]).unwrap())
    }

    proptest! {
        #[test]
        fn homogeneity(k in any_kernel(), x in prop::array::uniform3(-1.0f64..1.0), s in 0.1f64..10.0) {
            let mut x = x;
            x[2] = x[2].abs() + 0.05;
            let a = k.eval(&x).unwrap();
            let y: Vec<f64> = x.iter().map(|v| v * s).collect();
            let b = k.eval(&y).unwrap();
            let expect = s.powi(k.degree()) * a;
            prop_assert!((b - expect).abs() <= 1e-10 * (expect.abs() + s.powi(k.degree()) * 1e-3));
        }

        #[test]
        fn symmetries(x in prop::array::uniform3(-1.0f64..1.0), r in 0usize..3, l in 0usize..3,
                      i in 0usize..3, j in 0usize..3) {
            prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-4);
            prop_assert_eq!(Kernel::v(3, r, l).eval(&x).unwrap(), Kernel::v(3, l, r).eval(&x).unwrap());
            let a = Kernel::ddv(3, r, l, i, j).eval(&x).unwrap();
            let b = Kernel::ddv(3, r, l, j, i).eval(&x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert_eq!(Kernel::k(3).eval(&x).unwrap(), Kernel::k(3).eval(&neg).unwrap());
        }
    }
}
