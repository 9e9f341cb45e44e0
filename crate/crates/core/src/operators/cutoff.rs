//! Tensor-product cutoff functions and localization of Stokes solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{gradient, quadrature, Grid, GridFunction};

/// Shape of the one-dimensional transition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffProfile {
    /// `e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`, infinitely differentiable.
    #[default]
    Smooth,
    /// `6t^5 - 15t^4 + 10t^3`, twice continuously differentiable.
    Quintic,
}

impl CutoffProfile {
    /// Value and first two derivatives on `[0, 1]`, constant outside.
    fn eval(self, t: f64) -> [f64; 3] {
        if t <= 0.0 {
            return [0.0; 3];
        }
        if t >= 1.0 {
            return [1.0, 0.0, 0.0];
        }
        match self {
            CutoffProfile::Quintic => [
                t * t * t * (10.0 + t * (6.0 * t - 15.0)),
                30.0 * t * t * (t - 1.0) * (t - 1.0),
                60.0 * t * (2.0 * t * t - 3.0 * t + 1.0),
            ],
            CutoffProfile::Smooth => {
                let u = 1.0 - t;
                let a = (-1.0 / t).exp();
                let b = (-1.0 / u).exp();
                let a1 = a / (t * t);
                let b1 = -b / (u * u);
                let a2 = a * (1.0 / t.powi(4) - 2.0 / t.powi(3));
                let b2 = b * (1.0 / u.powi(4) - 2.0 / u.powi(3));
                let s = a + b;
                let num = a1 * b - a * b1;
                let num1 = a2 * b - a * b2;
                [a / s, num / (s * s), num1 / (s * s) - 2.0 * num * (a1 + b1) / (s * s * s)]
            }
        }
    }
}

/// `τ(x) = Π_a φ_a(x_a)` with `φ_a = 1` on `[inner_lo, inner_hi]` and
/// `φ_a = 0` outside `(outer_lo, outer_hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    inner: (Vec<f64>, Vec<f64>),
    outer: (Vec<f64>, Vec<f64>),
    profile: CutoffProfile,
}

impl Cutoff {
    pub fn new(inner: (&[f64], &[f64]), outer: (&[f64], &[f64]), profile: CutoffProfile) -> Result<Self> {
        let n = inner.0.len();
        if [inner.1.len(), outer.0.len(), outer.1.len()].iter().any(|&l| l != n) {
            return Err(Error::Shape("cutoff boxes differ in dimension".into()));
        }
        for a in 0..n {
            if !(outer.0[a] < inner.0[a] && inner.0[a] < inner.1[a] && inner.1[a] < outer.1[a]) {
                return Err(Error::InvalidDomain(format!(
                    "inner box must lie strictly inside the outer box on axis {a}"
                )));
            }
        }
        Ok(Self {
            inner: (inner.0.to_vec(), inner.1.to_vec()),
            outer: (outer.0.to_vec(), outer.1.to_vec()),
            profile,
        })
    }

    /// Concentric cubes of half-widths `inner < outer` around `center`.
    pub fn cube(center: &[f64], inner: f64, outer: f64, profile: CutoffProfile) -> Result<Self> {
        let lo = |r: f64| center.iter().map(|c| c - r).collect::<Vec<_>>();
        let hi = |r: f64| center.iter().map(|c| c + r).collect::<Vec<_>>();
        Self::new((&lo(inner), &hi(inner)), (&lo(outer), &hi(outer)), profile)
    }

    pub fn dim(&self) -> usize {
        self.inner.0.len()
    }

    pub fn profile(&self) -> CutoffProfile {
        self.profile
    }

    pub fn inner(&self) -> (&[f64], &[f64]) {
        (&self.inner.0, &self.inner.1)
    }

    pub fn outer(&self) -> (&[f64], &[f64]) {
        (&self.outer.0, &self.outer.1)
    }

    fn axis(&self, a: usize, x: f64) -> [f64; 3] {
        let (bl, al) = (self.outer.0[a], self.inner.0[a]);
        let (ah, bh) = (self.inner.1[a], self.outer.1[a]);
        let (wl, wh) = (al - bl, bh - ah);
        let up = self.profile.eval((x - bl) / wl);
        let down = self.profile.eval((bh - x) / wh);
        let (u1, u2) = (up[1] / wl, up[2] / (wl * wl));
        let (d1, d2) = (-down[1] / wh, down[2] / (wh * wh));
        [
            up[0] * down[0],
            u1 * down[0] + up[0] * d1,
            u2 * down[0] + 2.0 * u1 * d1 + up[0] * d2,
        ]
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (0..self.dim()).map(|a| self.axis(a, x[a])[0]).product()
    }

    /// Value, gradient and Laplacian at `x`.
    pub fn jet(&self, x: &[f64]) -> (f64, Vec<f64>, f64) {
        let n = self.dim();
        let parts: Vec<[f64; 3]> = (0..n).map(|a| self.axis(a, x[a])).collect();
        let others = |a: usize| -> f64 { (0..n).filter(|&b| b != a).map(|b| parts[b][0]).product() };
        let value = parts.iter().map(|p| p[0]).product();
        let grad = (0..n).map(|a| parts[a][1] * others(a)).collect();
        let lap = (0..n).map(|a| parts[a][2] * others(a)).sum();
        (value, grad, lap)
    }

    pub fn sample(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.value(x))
    }
}

/// Localized Stokes data `(τv, τπ)` and the right-hand sides it solves:
/// `Δ(τv) - ∇(τπ) = T` and `div(τv) = G`.
#[derive(Clone, Debug)]
pub struct Localized {
    pub v: GridFunction,
    pub pi: GridFunction,
    pub t: GridFunction,
    pub g: GridFunction,
    /// `|∫T_r| / ∫|T_r|` per component.
    pub momentum_mean: Vec<f64>,
    /// `|∫G| / ∫|G|`.
    pub divergence_mean: f64,
}

fn relative_mean(f: &GridFunction) -> Result<f64> {
    let total = quadrature(f)?;
    let abs = quadrature(&f.map(f64::abs))?;
    Ok(if abs == 0.0 { 0.0 } else { total.abs() / abs })
}

/// Localize a solution of `Δv - ∇π = f`, `div v = g`:
/// `T = 2∇v∇τ + Δτ v - π∇τ + fτ` and `G = v·∇τ + gτ`, with `∇v` by
/// fourth-order differences and the cutoff differentiated exactly.
/// `one_on` is a box on which `τ` must equal one at every node.
pub fn localize(
    v: &GridFunction,
    pi: &GridFunction,
    f: &GridFunction,
    g: &GridFunction,
    tau: &Cutoff,
    one_on: (&[f64], &[f64]),
) -> Result<Localized> {
    let grid = v.grid();
    let n = grid.dim();
    if tau.dim() != n || v.components() != n || f.components() != n {
        return Err(Error::Shape("velocity, force and cutoff must match the grid dimension".into()));
    }
    pi.check_compatible(&GridFunction::zeros(grid, 1))?;
    g.check_compatible(&GridFunction::zeros(grid, 1))?;
    f.check_compatible(v)?;
    let dv = gradient(v, 4)?;
    let mut vl = vec![0.0; grid.node_count() * n];
    let mut pl = vec![0.0; grid.node_count()];
    let mut t = vec![0.0; grid.node_count() * n];
    let mut gl = vec![0.0; grid.node_count()];
    for lin in 0..grid.node_count() {
        let x = grid.point(lin);
        let x = &x[..n];
        let (tv, dt, lt) = tau.jet(x);
        let inside = (0..n).all(|a| x[a] >= one_on.0[a] && x[a] <= one_on.1[a]);
        if inside && tv != 1.0 {
            return Err(Error::CutoffNotOne);
        }
        let p = pi.value(lin, 0);
        pl[lin] = tv * p;
        let mut div = g.value(lin, 0) * tv;
        for r in 0..n {
            let vr = v.value(lin, r);
            vl[lin * n + r] = tv * vr;
            let mut s = lt * vr - p * dt[r] + f.value(lin, r) * tv;
            for i in 0..n {
                s += 2.0 * dv.value(lin, r * n + i) * dt[i];
            }
            t[lin * n + r] = s;
            div += vr * dt[r];
        }
        gl[lin] = div;
    }
    let t = GridFunction::new(grid.clone(), n, t)?;
    let g = GridFunction::new(grid.clone(), 1, gl)?;
    let momentum_mean = (0..n)
        .map(|r| relative_mean(&t.component(r)))
        .collect::<Result<Vec<_>>>()?;
    let divergence_mean = relative_mean(&g)?;
    Ok(Localized {
        v: GridFunction::new(grid.clone(), n, vl)?,
        pi: GridFunction::new(grid.clone(), 1, pl)?,
        t,
        g,
        momentum_mean,
        divergence_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn profile_derivatives_match_differences(t in 0.05f64..0.95, quintic in any::<bool>()) {
            let p = if quintic { CutoffProfile::Quintic } else { CutoffProfile::Smooth };
            let d = 1e-4;
            let [_, d1, d2] = p.eval(t);
            let f = |s: f64| p.eval(s)[0];
            let fd1 = (f(t + d) - f(t - d)) / (2.0 * d);
            let fd2 = (f(t + d) - 2.0 * f(t) + f(t - d)) / (d * d);
            prop_assert!((d1 - fd1).abs() < 1e-6 * (1.0 + d1.abs()));
            prop_assert!((d2 - fd2).abs() < 1e-3 * (1.0 + d2.abs()));
        }

        #[test]
        fn cutoff_is_one_inside_and_zero_outside(x in prop::collection::vec(-2.0f64..2.0, 3)) {
            let c = Cutoff::cube(&[0.0; 3], 0.5, 1.0, CutoffProfile::Smooth).unwrap();
            let v = c.value(&x);
            let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m <= 0.5 { prop_assert_eq!(v, 1.0); }
            if m >= 1.0 { prop_assert_eq!(v, 0.0); }
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn rejects_a_box_where_tau_is_not_one() {
        use crate::grid::{BoxDomain, DomainKind};
        let g = Grid::new(BoxDomain::cube(3, -1.0, 1.0, DomainKind::WholeSpace).unwrap(), 0.125).unwrap();
        let c = Cutoff::cube(&[0.0; 3], 0.25, 0.75, CutoffProfile::Smooth).unwrap();
        let v = GridFunction::zeros(&g, 3);
        let s = GridFunction::zeros(&g, 1);
        let err = localize(&v, &s, &v, &s, &c, (&[-0.5; 3], &[0.5; 3])).unwrap_err();
        assert!(matches!(err, Error::CutoffNotOne));
        assert!(localize(&v, &s, &v, &s, &c, (&[-0.25; 3], &[0.25; 3])).is_ok());
    }
}
