//! Modulars, Luxemburg norms, Sobolev-type seminorms, sampled `D^{-1}`
//! estimators and inequality checks.

mod dictionary;

pub use dictionary::{
    dual_norm_estimate, Dictionary, DictionarySpec, DualNormEstimate, PreparedDictionary,
    TestField,
};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{
    finite_difference, gradient, quadrature, GridFunction, QuadratureRule, StencilDerivative,
};
use crate::report::{EstimateCase, EstimateReport};

/// Finite-difference accuracy used by the seminorms.
pub const DEFAULT_FD_ACCURACY: usize = 2;

const MODULAR_TOL: f64 = 1e-8;
const WIDTH_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 400;

/// Outcome of the Luxemburg bisection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormResult {
    pub value: f64,
    /// `rho_p(f / value)`.
    pub modular_at_value: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

impl NormResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            modular_at_value: 0.0,
            iterations: 0,
            bracket: (0.0, 0.0),
        }
    }
}

/// Quadrature weights of a field's grid in node order.
pub(crate) fn weights(f: &GridFunction) -> Result<Vec<f64>> {
    crate::grid::quadrature_weights(f.grid(), QuadratureRule::Trapezoid)
}

/// `sum_k w_k |f_k|^{p_k}`.
pub fn modular_from_samples(magnitudes: &[f64], p: &[f64], w: &[f64]) -> f64 {
    magnitudes
        .iter()
        .zip(p)
        .zip(w)
        .filter(|((m, _), _)| **m != 0.0)
        .map(|((m, p), w)| w * m.powf(*p))
        .sum()
}

/// `rho_p(f) = ∫ |f(x)|^{p(x)} dx`, with the Euclidean magnitude for
/// vector fields.
pub fn modular(f: &GridFunction, p: &Exponent) -> Result<f64> {
    let mag = f.magnitude();
    let ps = p.sample(f.grid())?;
    Ok(modular_from_samples(mag.values(), &ps, &weights(f)?))
}

/// Luxemburg norm from nodal magnitudes, exponents and weights.
pub fn luxemburg_from_samples(magnitudes: &[f64], p: &[f64], w: &[f64]) -> Result<NormResult> {
    let mut logs = Vec::new();
    let mut ps = Vec::new();
    let mut ws = Vec::new();
    let mut max = 0.0f64;
    for ((m, pk), wk) in magnitudes.iter().zip(p).zip(w) {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let m = m.abs();
        if m != 0.0 && *wk != 0.0 {
            logs.push(m.ln());
            ps.push(*pk);
            ws.push(*wk);
            max = max.max(m);
        }
    }
    if logs.is_empty() {
        return Ok(NormResult::zero());
    }
    // rho(f / e^mu), strictly decreasing in mu.
    let rho = |mu: f64| -> f64 {
        logs.iter()
            .zip(&ps)
            .zip(&ws)
            .map(|((l, p), w)| w * (p * (l - mu)).exp())
            .sum()
    };
    let mu0 = max.ln();
    let r0 = rho(mu0);
    if (r0 - 1.0).abs() <= MODULAR_TOL {
        return Ok(NormResult {
            value: max,
            modular_at_value: r0,
            iterations: 0,
            bracket: (max, max),
        });
    }
    let (mut lo, mut hi, mut r_lo, mut r_hi) = (mu0, mu0, r0, r0);
    let mut step = 1.0;
    let mut iterations = 0;
    while r_lo <= 1.0 {
        lo -= step;
        step *= 2.0;
        r_lo = rho(lo);
        iterations += 1;
    }
    step = 1.0;
    while r_hi > 1.0 {
        hi += step;
        step *= 2.0;
        r_hi = rho(hi);
        iterations += 1;
    }
    let mut mid = 0.5 * (lo + hi);
    let mut r_mid = rho(mid);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        if !(r_mid <= r_lo && r_mid >= r_hi) {
            return Err(Error::Precondition(format!(
                "modular is not monotone: rho({lo})={r_lo}, rho({mid})={r_mid}, rho({hi})={r_hi}"
            )));
        }
        if (r_mid - 1.0).abs() <= MODULAR_TOL || hi.exp() - lo.exp() <= WIDTH_TOL * mid.exp() {
            break;
        }
        if r_mid > 1.0 {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
            r_hi = r_mid;
        }
        mid = 0.5 * (lo + hi);
        r_mid = rho(mid);
    }
    Ok(NormResult {
        value: mid.exp(),
        modular_at_value: r_mid,
        iterations,
        bracket: (lo.exp(), hi.exp()),
    })
}

/// `inf{λ > 0 : rho_p(f/λ) <= 1}` by bisection in `ln λ`.
pub fn luxemburg_norm(f: &GridFunction, p: &Exponent) -> Result<NormResult> {
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    let mag = f.magnitude();
    let ps = p.sample(f.grid())?;
    luxemburg_from_samples(mag.values(), &ps, &weights(f)?)
}

/// All partial derivatives of order `k` (0, 1 or 2) as one multi-component
/// field.
pub fn derivative_tensor(f: &GridFunction, k: usize, accuracy: usize) -> Result<GridFunction> {
    let n = f.grid().dim();
    match k {
        0 => Ok(f.clone()),
        1 => gradient(f, accuracy),
        2 => {
            let mut parts = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    parts.push(finite_difference(f, StencilDerivative::second(i, j, accuracy))?);
                }
            }
            GridFunction::stack(&parts)
        }
        _ => Err(Error::Precondition(format!("derivative order {k} unsupported"))),
    }
}

/// `‖∇^k f‖_{p(·)}`.
pub fn homogeneous_seminorm(f: &GridFunction, p: &Exponent, k: usize) -> Result<f64> {
    homogeneous_seminorm_with(f, p, k, DEFAULT_FD_ACCURACY)
}

pub fn homogeneous_seminorm_with(
    f: &GridFunction,
    p: &Exponent,
    k: usize,
    accuracy: usize,
) -> Result<f64> {
    Ok(luxemburg_norm(&derivative_tensor(f, k, accuracy)?, p)?.value)
}

/// `sum_{j<=k} ‖∇^j f‖_{p(·)}`.
pub fn sobolev_norm(f: &GridFunction, p: &Exponent, k: usize) -> Result<f64> {
    (0..=k).map(|j| homogeneous_seminorm(f, p, j)).sum()
}

/// `‖∇u‖ + ‖∇²u‖`, the norm of the intersection of the first and second
/// order homogeneous spaces.
pub fn intersection_seminorm(f: &GridFunction, p: &Exponent) -> Result<f64> {
    Ok(homogeneous_seminorm(f, p, 1)? + homogeneous_seminorm(f, p, 2)?)
}

/// `‖fg‖_s` against `2‖f‖_p‖g‖_q` with `1/s = 1/p + 1/q`.
pub fn verify_holder(
    f: &GridFunction,
    g: &GridFunction,
    p: &Exponent,
    q: &Exponent,
) -> Result<EstimateReport> {
    let s = p.harmonic(q)?;
    let fg = f.magnitude().pointwise_mul(&g.magnitude())?;
    let lhs = luxemburg_norm(&fg, &s)?.value;
    let rhs = 2.0 * luxemburg_norm(f, p)?.value * luxemburg_norm(g, q)?.value;
    let mut r = EstimateReport::new("holder", f.grid().h(), format!("{};{}", p.id(), q.id()));
    r.push(EstimateCase::new("fg", lhs, rhs));
    Ok(r)
}

/// The field attaining the duality pairing: `g = sign(f)|f/λ|^{p'-1}` with
/// `λ = ‖f‖_{p'}`, so that `∫fg = λ` and `‖g‖_p = 1`.
pub fn duality_optimizer(f: &GridFunction, p: &Exponent) -> Result<GridFunction> {
    if !f.is_scalar() {
        return Err(Error::Shape("duality optimizer needs a scalar field".into()));
    }
    let dual = p.dual()?;
    let lambda = luxemburg_norm(f, dual.as_exponent())?.value;
    if lambda == 0.0 {
        return Ok(GridFunction::zeros(f.grid(), 1));
    }
    let pd = dual.as_exponent().sample(f.grid())?;
    let values = f
        .values()
        .iter()
        .zip(&pd)
        .map(|(v, q)| v.signum() * (v.abs() / lambda).powf(q - 1.0))
        .collect();
    GridFunction::new(f.grid().clone(), 1, values)
}

/// Two-sided duality check: with `S = sup_g |∫fg| / ‖g‖_p` over the
/// candidates, case `upper` compares `S` to `2‖f‖_{p'}` and case `lower`
/// compares `½‖f‖_{p'}` to `S`. A failed lower arm is an estimator
/// limitation and is flagged, not an error.
pub fn verify_duality(
    f: &GridFunction,
    p: &Exponent,
    candidates: &[GridFunction],
) -> Result<EstimateReport> {
    if candidates.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let dual = p.dual()?;
    let norm = luxemburg_norm(f, dual.as_exponent())?.value;
    let mut sup = 0.0f64;
    for g in candidates {
        let gn = luxemburg_norm(g, p)?.value;
        if gn == 0.0 {
            continue;
        }
        let pairing = quadrature(&f.pointwise_mul(g)?)?;
        sup = sup.max(pairing.abs() / gn);
    }
    let mut r = EstimateReport::new("duality", f.grid().h(), p.id());
    r.flag("estimate");
    r.push(EstimateCase::new("upper", sup, 2.0 * norm));
    let lower = EstimateCase::new("lower", 0.5 * norm, sup);
    let lower = if lower.ratio.is_some_and(|x| x > 1.0) {
        lower.with_flag("estimator-limitation")
    } else {
        lower
    };
    r.push(lower);
    Ok(r)
}

/// `‖u - u_Ω‖_p` against `c · diam(Ω) · ‖∇u‖_p` on the grid's box.
pub fn verify_poincare(u: &GridFunction, p: &Exponent, c: f64) -> Result<EstimateReport> {
    if !u.is_scalar() {
        return Err(Error::Shape("Poincaré check needs a scalar field".into()));
    }
    let domain = u.grid().domain();
    let mean = quadrature(u)? / domain.volume();
    let lhs = luxemburg_norm(&u.map(|v| v - mean), p)?.value;
    let rhs = c * domain.diameter() * homogeneous_seminorm(u, p, 1)?;
    let mut r = EstimateReport::new("poincare", u.grid().h(), p.id());
    r.push(EstimateCase::new("u", lhs, rhs));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ExponentRule;
    use crate::grid::{make_bump, BoxDomain, DomainKind, Grid};
    use proptest::prelude::*;

    fn unit() -> BoxDomain {
        BoxDomain::cube(3, 0.0, 1.0, DomainKind::BoundedBox).unwrap()
    }

    /// Grid resolving only the first axis finely.
    fn slab(m: usize) -> Grid {
        Grid::with_shape(unit(), &[m, 2, 2]).unwrap()
    }

    /// Independent oracle for f ≡ 2, p = 2 + t on [0,1]:
    /// ∫ a^{2+t} dt = a²(a-1)/ln a with a = 2/λ, solved by plain bisection.
    fn closed_form_norm() -> f64 {
        let rho = |lam: f64| {
            let a: f64 = 2.0 / lam;
            a * a * (a - 1.0) / a.ln()
        };
        let (mut lo, mut hi) = (1.0, 4.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rho(mid) > 1.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn modular_examples() {
        let g = Grid::new(unit(), 0.25).unwrap();
        let p = Exponent::affine(2.0, 1.0, 0, unit()).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        assert!((modular(&one, &p).unwrap() - 1.0).abs() < 1e-14);
        let two = GridFunction::from_fn(&g, |_| 2.0);
        let c2 = Exponent::constant(2.0, unit()).unwrap();
        assert!((modular(&two, &c2).unwrap() - 4.0).abs() < 1e-13);
        let g = slab(1025);
        let two = GridFunction::from_fn(&g, |_| 2.0);
        let expect = 4.0 / std::f64::consts::LN_2;
        assert!((modular(&two, &p).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn luxemburg_examples() {
        let g = Grid::new(unit(), 0.25).unwrap();
        let p = Exponent::affine(2.0, 1.0, 0, unit()).unwrap();
        let r = luxemburg_norm(&GridFunction::from_fn(&g, |_| 1.0), &p).unwrap();
        assert_eq!(r.value, 1.0);
        let c2 = Exponent::constant(2.0, unit()).unwrap();
        let r = luxemburg_norm(&GridFunction::from_fn(&g, |_| 2.0), &c2).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
        let g = slab(1025);
        let r = luxemburg_norm(&GridFunction::from_fn(&g, |_| 2.0), &p).unwrap();
        assert!((r.value - closed_form_norm()).abs() < 1e-6, "{}", r.value);
        assert!((r.modular_at_value - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn zero_and_non_finite() {
        let g = Grid::new(unit(), 0.5).unwrap();
        let p = Exponent::constant(2.0, unit()).unwrap();
        assert_eq!(luxemburg_norm(&GridFunction::zeros(&g, 1), &p).unwrap().value, 0.0);
        let bad = GridFunction::from_fn(&g, |x| if x[0] > 0.7 { f64::NAN } else { 1.0 });
        assert!(matches!(luxemburg_norm(&bad, &p), Err(Error::NonFinite)));
    }

    #[test]
    fn seminorm_examples() {
        let g = Grid::new(unit(), 1.0 / 16.0).unwrap();
        let p = Exponent::constant(2.0, unit()).unwrap();
        let c = GridFunction::from_fn(&g, |_| 3.0);
        assert!(homogeneous_seminorm(&c, &p, 1).unwrap() < 1e-12);
        let x = GridFunction::from_fn(&g, |x| x[0]);
        assert!((homogeneous_seminorm(&x, &p, 1).unwrap() - 1.0).abs() < 1e-9);
        // Trapezoid error of ∫x² is h²/6 in the square.
        let s = sobolev_norm(&x, &p, 1).unwrap();
        let expect = (1.0f64 / 3.0).sqrt() + 1.0;
        assert!((s - expect).abs() < 1e-3, "{s}");
        let g = Grid::with_shape(unit(), &[1025, 3, 3]).unwrap();
        let x = GridFunction::from_fn(&g, |x| x[0]);
        assert!((sobolev_norm(&x, &p, 1).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn holder_examples() {
        let g = Grid::new(unit(), 0.25).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let p = Exponent::constant(2.0, unit()).unwrap();
        let r = verify_holder(&one, &one, &p, &p).unwrap();
        assert!((r.lhs() - 1.0).abs() < 1e-9);
        assert!((r.rhs() - 2.0).abs() < 1e-9);
        assert!((r.ratio().unwrap() - 0.5).abs() < 1e-9);

        let dom = BoxDomain::cube(3, -1.0, 1.0, DomainKind::BoundedBox).unwrap();
        let g = Grid::new(dom.clone(), 0.125).unwrap();
        let f = make_bump(&g, &[0.2, 0.0, 0.0], 0.6, 2.0).unwrap();
        let h = make_bump(&g, &[-0.1, 0.1, 0.0], 0.7, -1.0).unwrap();
        let p3 = Exponent::constant(3.0, dom.clone()).unwrap();
        let q = Exponent::constant(1.5, dom).unwrap();
        assert!(verify_holder(&f, &h, &p3, &q).unwrap().ratio().unwrap() <= 1.0);
    }

    #[test]
    fn duality_examples() {
        let g = Grid::new(unit(), 0.25).unwrap();
        let p = Exponent::constant(2.0, unit()).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let opt = duality_optimizer(&one, &p).unwrap();
        let r = verify_duality(&one, &p, &[opt]).unwrap();
        assert!((r.cases[0].lhs - 1.0).abs() < 1e-9);
        assert!(r.cases.iter().all(|c| c.ratio.unwrap() <= 1.0));
        let zero = GridFunction::zeros(&g, 1);
        let r = verify_duality(&zero, &p, &[one]).unwrap();
        assert_eq!((r.cases[0].lhs, r.cases[0].rhs), (0.0, 0.0));
        assert!(matches!(verify_duality(&zero, &p, &[]), Err(Error::EmptyDictionary)));
    }

    #[test]
    fn poincare_fixture() {
        let p = Exponent::constant(2.0, unit()).unwrap();
        let g = Grid::new(unit(), 1.0 / 32.0).unwrap();
        let c = GridFunction::from_fn(&g, |_| 5.0);
        assert!(verify_poincare(&c, &p, 1.0).unwrap().lhs() < 1e-12);
        let x = GridFunction::from_fn(&g, |x| x[0]);
        let r = verify_poincare(&x, &p, 1.0).unwrap();
        assert!((r.lhs() - (1.0f64 / 12.0).sqrt()).abs() < 1e-3);
        assert!((r.rhs() - 3f64.sqrt()).abs() < 1e-9);
        assert!((r.ratio().unwrap() - 1.0 / 6.0).abs() < 1e-3);
    }

    fn rule() -> impl Strategy<Value = Exponent> {
        prop_oneof![
            (1.1f64..4.0).prop_map(|c| Exponent::constant(c, unit()).unwrap()),
            (1.9f64..3.0, -0.8f64..0.8, 0usize..3)
                .prop_map(|(a, b, ax)| Exponent::affine(a, b, ax, unit()).unwrap()),
            (1.5f64..3.0, -0.4f64..0.4).prop_map(|(a, b)| Exponent::new(
                ExponentRule::LogPerturbed { a, b, center: vec![0.3, 0.5, 0.5] },
                unit()
            )
            .unwrap()),
        ]
    }

    fn field(seed: [f64; 4]) -> impl Fn(&[f64]) -> f64 {
        move |x: &[f64]| {
            seed[0] * (3.0 * x[0] + seed[1]).sin() + seed[2] * x[1] * x[2] + seed[3]
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn unit_ball_and_homogeneity(
            p in rule(),
            seed in prop::array::uniform4(-3.0f64..3.0),
            c in -50.0f64..50.0,
        ) {
            let g = Grid::new(unit(), 0.125).unwrap();
            let f = GridFunction::from_fn(&g, field(seed));
            prop_assume!(f.max_abs() > 1e-6 && c.abs() > 1e-3);
            let r = luxemburg_norm(&f, &p).unwrap();
            prop_assert!((r.modular_at_value - 1.0).abs() <= 1e-6);
            prop_assert!((modular(&f.scaled(1.0 / r.value), &p).unwrap() - 1.0).abs() <= 1e-6);
            let rc = luxemburg_norm(&f.scaled(c), &p).unwrap();
            prop_assert!((rc.value - c.abs() * r.value).abs() <= 1e-8 * rc.value);
        }

        #[test]
        fn constant_exponent_is_classical(q in 1.0f64..5.0, seed in prop::array::uniform4(-3.0f64..3.0)) {
            let g = Grid::new(unit(), 0.125).unwrap();
            let f = GridFunction::from_fn(&g, field(seed));
            prop_assume!(f.max_abs() > 1e-6);
            let p = Exponent::constant(q, unit()).unwrap();
            let classical = quadrature(&f.map(|v| v.abs().powf(q))).unwrap().powf(1.0 / q);
            let r = luxemburg_norm(&f, &p).unwrap();
            prop_assert!((r.value - classical).abs() <= 1e-6 * classical);
        }

        #[test]
        fn quadrature_is_monotone(a in prop::array::uniform4(-3.0f64..3.0), shift in 0.0f64..2.0) {
            let g = Grid::new(unit(), 0.25).unwrap();
            let f = GridFunction::from_fn(&g, field(a));
            let h = f.map(|v| v + shift);
            prop_assert!(quadrature(&h).unwrap() >= quadrature(&f).unwrap() - 1e-12);
            let sum = f.axpy(2.0, &h).unwrap();
            let lin = quadrature(&f).unwrap() + 2.0 * quadrature(&h).unwrap();
            prop_assert!((quadrature(&sum).unwrap() - lin).abs() < 1e-12 * (1.0 + lin.abs()));
        }
    }
}
