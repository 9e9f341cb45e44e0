//! Variable exponents `p(·)`: catalog rules, sampled fields, conjugates and
//! reflection/clamping extensions.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{BoxDomain, DomainKind, Grid};

/// Number of pairs used when a rule has no analytic log-Hölder bound.
pub const DEFAULT_LOG_HOLDER_PAIRS: usize = 4000;

const DOMAIN_SLACK: f64 = 1e-12;
const ZOOM_STEPS: usize = 40;
const LOG_HOLDER_SEED: u64 = 0x5eed_10c4;

/// Profile of the bump rule, `exp(1 - 1/(1 - rho^2))` on `rho < 1`; it
/// equals one at the center.
pub fn bump_shape(rho: f64) -> f64 {
    if rho < 1.0 {
        (1.0 - 1.0 / (1.0 - rho * rho)).exp()
    } else {
        0.0
    }
}

/// `max |d/drho bump_shape|`, found by golden-section search on the
/// unimodal derivative magnitude.
fn bump_shape_lipschitz() -> f64 {
    let slope = |r: f64| {
        let s = 1.0 - r * r;
        2.0 * r / (s * s) * bump_shape(r)
    };
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if slope(c) > slope(d) {
            b = d;
        } else {
            a = c;
        }
    }
    slope(0.5 * (a + b))
}

/// Multilinear interpolant of exponent values on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledExponent {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledExponent {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Shape(format!(
                "{} exponent samples for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let n = self.grid.dim();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..n {
            let m = self.grid.shape()[a];
            let t = ((x[a] - self.grid.domain().lower()[a]) / self.grid.spacing()[a])
                .clamp(0.0, (m - 1) as f64);
            let i = (t.floor() as usize).min(m - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let strides = self.grid.strides();
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut lin = 0;
            for a in 0..n {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                lin += (base[a] + bit) * strides[a];
            }
            if w != 0.0 {
                acc += w * self.values[lin];
            }
        }
        acc
    }
}

/// How an exponent is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum ExponentRule {
    Constant(f64),
    /// `a + b * x[axis]`.
    Affine { a: f64, b: f64, axis: usize },
    /// `a + b / ln(e + 1/|x - center|)`, equal to `a` at the center.
    LogPerturbed { a: f64, b: f64, center: Vec<f64> },
    /// `base + height * bump_shape(|x - center| / radius)`.
    Bump {
        base: f64,
        height: f64,
        center: Vec<f64>,
        radius: f64,
    },
    Sampled(SampledExponent),
    /// Jump from `left` to `right` across `x[axis] = at`; a test fixture
    /// without log-Hölder continuity.
    Step {
        left: f64,
        right: f64,
        axis: usize,
        at: f64,
    },
    /// `p(x', |x_n|)` of a half-space exponent.
    EvenReflection(Box<Exponent>),
    /// Inner exponent at the nearest point of its own box.
    Clamped(Box<Exponent>),
    /// `p / (p - 1)`.
    Conjugate(Box<Exponent>),
    /// `s` with `1/s = 1/p + 1/q`.
    Harmonic(Box<Exponent>, Box<Exponent>),
}

/// A variable exponent on a box with its range and log-Hölder constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Exponent {
    rule: ExponentRule,
    domain: BoxDomain,
    p_minus: f64,
    p_plus: f64,
    clog: f64,
    clog_is_estimate: bool,
    p_infinity: Option<f64>,
}

/// Result of sampling the log-Hölder quotient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogHolderEstimate {
    /// Supremum of `|p(x)-p(y)| ln(e + 1/|x-y|)` over the sampled pairs.
    pub value: f64,
    pub pairs: usize,
    /// Always set: a sampled supremum is only a lower bound.
    pub estimate: bool,
    /// Set when refining a pair keeps increasing the quotient, i.e. the
    /// exponent is not log-Hölder continuous.
    pub divergent: bool,
}

fn log_weight(d: f64) -> f64 {
    (E + 1.0 / d).ln()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Nearest and farthest distance from `c` to the points of the box.
fn distance_range(domain: &BoxDomain, c: &[f64]) -> (f64, f64) {
    let mut near = 0.0;
    let mut far = 0.0;
    for a in 0..domain.dim() {
        let (lo, hi) = (domain.lower()[a], domain.upper()[a]);
        let dn = if c[a] < lo {
            lo - c[a]
        } else if c[a] > hi {
            c[a] - hi
        } else {
            0.0
        };
        let df = (c[a] - lo).abs().max((c[a] - hi).abs());
        near += dn * dn;
        far += df * df;
    }
    (near.sqrt(), far.sqrt())
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    (a.min(b), a.max(b))
}

impl Exponent {
    /// Build from a rule and the box it lives on. Range and log-Hölder
    /// constant are derived from the rule.
    pub fn new(rule: ExponentRule, domain: BoxDomain) -> Result<Self> {
        let n = domain.dim();
        let check_point = |c: &[f64]| {
            if c.len() != n {
                Err(Error::InvalidExponent(format!(
                    "center has {} coordinates, domain has {n}",
                    c.len()
                )))
            } else {
                Ok(())
            }
        };
        let mut clog_is_estimate = false;
        let (p_minus, p_plus, clog) = match &rule {
            ExponentRule::Constant(c) => (*c, *c, 0.0),
            ExponentRule::Affine { a, b, axis } => {
                if *axis >= n {
                    return Err(Error::InvalidExponent(format!("axis {axis} out of range")));
                }
                let lo = a + b * domain.lower()[*axis];
                let hi = a + b * domain.upper()[*axis];
                let l = domain.extent(*axis);
                let (pm, pp) = ordered(lo, hi);
                (pm, pp, b.abs() * l * log_weight(l))
            }
            ExponentRule::LogPerturbed { a, b, center } => {
                check_point(center)?;
                let (near, far) = distance_range(&domain, center);
                let g = |t: f64| if t == 0.0 { 0.0 } else { 1.0 / log_weight(t) };
                let (pm, pp) = ordered(a + b * g(near), a + b * g(far));
                (pm, pp, b.abs())
            }
            ExponentRule::Bump {
                base,
                height,
                center,
                radius,
            } => {
                check_point(center)?;
                if !(*radius > 0.0) {
                    return Err(Error::InvalidExponent("bump radius must be positive".into()));
                }
                let (near, far) = distance_range(&domain, center);
                let (pm, pp) = ordered(
                    base + height * bump_shape(far / radius),
                    base + height * bump_shape(near / radius),
                );
                let lip = bump_shape_lipschitz();
                (pm, pp, height.abs() * log_weight(radius / lip))
            }
            ExponentRule::Sampled(s) => {
                if s.grid.dim() != n {
                    return Err(Error::InvalidExponent("sample grid dimension mismatch".into()));
                }
                let pm = s.values.iter().copied().fold(f64::INFINITY, f64::min);
                let pp = s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                clog_is_estimate = true;
                (pm, pp, f64::NAN)
            }
            ExponentRule::Step {
                left, right, axis, ..
            } => {
                if *axis >= n {
                    return Err(Error::InvalidExponent(format!("axis {axis} out of range")));
                }
                clog_is_estimate = true;
                let (pm, pp) = ordered(*left, *right);
                (pm, pp, f64::NAN)
            }
            ExponentRule::EvenReflection(inner) | ExponentRule::Clamped(inner) => {
                clog_is_estimate = inner.clog_is_estimate;
                (inner.p_minus, inner.p_plus, inner.clog)
            }
            ExponentRule::Conjugate(inner) => {
                if inner.p_minus <= 1.0 {
                    return Err(Error::UnboundedDual(inner.p_minus));
                }
                clog_is_estimate = inner.clog_is_estimate;
                let c = |p: f64| p / (p - 1.0);
                (
                    c(inner.p_plus),
                    c(inner.p_minus),
                    inner.clog / (inner.p_minus - 1.0).powi(2),
                )
            }
            ExponentRule::Harmonic(p, q) => {
                clog_is_estimate = p.clog_is_estimate || q.clog_is_estimate;
                let s = |a: f64, b: f64| a * b / (a + b);
                let sp = s(p.p_plus, q.p_plus);
                (
                    s(p.p_minus, q.p_minus),
                    sp,
                    sp * sp * (p.clog / p.p_minus.powi(2) + q.clog / q.p_minus.powi(2)),
                )
            }
        };
        if !(p_minus >= 1.0) {
            return Err(Error::InvalidExponent(format!(
                "p- = {p_minus} is below 1"
            )));
        }
        if !p_plus.is_finite() {
            return Err(Error::InvalidExponent("p+ must be finite".into()));
        }
        let mut exp = Self {
            rule,
            domain,
            p_minus,
            p_plus,
            clog,
            clog_is_estimate,
            p_infinity: None,
        };
        if exp.clog.is_nan() {
            exp.clog = estimate_log_holder(&exp, DEFAULT_LOG_HOLDER_PAIRS).value;
        }
        Ok(exp)
    }

    pub fn constant(c: f64, domain: BoxDomain) -> Result<Self> {
        Self::new(ExponentRule::Constant(c), domain)
    }

    pub fn affine(a: f64, b: f64, axis: usize, domain: BoxDomain) -> Result<Self> {
        Self::new(ExponentRule::Affine { a, b, axis }, domain)
    }

    pub fn sampled(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let domain = grid.domain().clone();
        Self::new(ExponentRule::Sampled(SampledExponent::new(grid, values)?), domain)
    }

    /// Record the decay limit used on unbounded domains.
    pub fn with_p_infinity(mut self, p: f64) -> Self {
        self.p_infinity = Some(p);
        self
    }

    pub fn rule(&self) -> &ExponentRule {
        &self.rule
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn p_infinity(&self) -> Option<f64> {
        self.p_infinity
    }

    /// Log-Hölder constant: an analytic bound for catalog rules, a sampled
    /// estimate otherwise (see [`Exponent::clog_is_estimate`]).
    pub fn clog(&self) -> f64 {
        self.clog
    }

    pub fn clog_is_estimate(&self) -> bool {
        self.clog_is_estimate
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus == self.p_plus
    }

    /// Short label used in report rows.
    pub fn id(&self) -> String {
        match &self.rule {
            ExponentRule::Constant(c) => format!("const({c})"),
            ExponentRule::Affine { a, b, axis } => format!("affine({a}+{b}*x{axis})"),
            ExponentRule::LogPerturbed { a, b, .. } => format!("logperturb({a},{b})"),
            ExponentRule::Bump { base, height, radius, .. } => {
                format!("bump({base},{height},{radius})")
            }
            ExponentRule::Sampled(_) => "sampled".into(),
            ExponentRule::Step { left, right, .. } => format!("step({left},{right})"),
            ExponentRule::EvenReflection(p) => format!("even({})", p.id()),
            ExponentRule::Clamped(p) => format!("clamped({})", p.id()),
            ExponentRule::Conjugate(p) => format!("dual({})", p.id()),
            ExponentRule::Harmonic(p, q) => format!("harmonic({},{})", p.id(), q.id()),
        }
    }

    /// `p(x)` at a point of the domain.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if !self.domain.contains(x, DOMAIN_SLACK) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let raw = match &self.rule {
            ExponentRule::Constant(c) => *c,
            ExponentRule::Affine { a, b, axis } => {
                let t = x[*axis].clamp(self.domain.lower()[*axis], self.domain.upper()[*axis]);
                a + b * t
            }
            ExponentRule::LogPerturbed { a, b, center } => {
                let t = dist(x, center);
                if t == 0.0 {
                    *a
                } else {
                    a + b / log_weight(t)
                }
            }
            ExponentRule::Bump {
                base,
                height,
                center,
                radius,
            } => base + height * bump_shape(dist(x, center) / radius),
            ExponentRule::Sampled(s) => s.eval(x),
            ExponentRule::Step {
                left,
                right,
                axis,
                at,
            } => {
                if x[*axis] < *at {
                    *left
                } else {
                    *right
                }
            }
            ExponentRule::EvenReflection(inner) => {
                let mut y = x.to_vec();
                let last = y.len() - 1;
                y[last] = y[last].abs();
                inner.eval_unchecked(&y)
            }
            ExponentRule::Clamped(inner) => {
                let y: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(a, &v)| v.clamp(inner.domain.lower()[a], inner.domain.upper()[a]))
                    .collect();
                inner.eval_unchecked(&y)
            }
            ExponentRule::Conjugate(inner) => {
                let p = inner.eval_unchecked(x);
                p / (p - 1.0)
            }
            ExponentRule::Harmonic(p, q) => {
                let (a, b) = (p.eval_unchecked(x), q.eval_unchecked(x));
                a * b / (a + b)
            }
        };
        raw.clamp(self.p_minus, self.p_plus)
    }

    /// `p` at every node of a grid lying in the domain.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        let n = grid.dim();
        if n != self.domain.dim() {
            return Err(Error::Dimension(n));
        }
        if let ExponentRule::Constant(c) = self.rule {
            if !self.domain.contains(grid.domain().lower(), DOMAIN_SLACK)
                || !self.domain.contains(grid.domain().upper(), DOMAIN_SLACK)
            {
                return Err(Error::OutsideDomain {
                    point: grid.domain().lower().to_vec(),
                });
            }
            return Ok(vec![c; grid.node_count()]);
        }
        (0..grid.node_count())
            .map(|lin| self.evaluate(&grid.point(lin)[..n]))
            .collect()
    }

    /// The same rule viewed on another box (e.g. a sub-box for reports).
    /// Range and constant are recomputed for the new box.
    pub fn on_domain(&self, domain: BoxDomain) -> Result<Self> {
        let mut e = Self::new(self.rule.clone(), domain)?;
        e.p_infinity = self.p_infinity;
        Ok(e)
    }

    /// Conjugate exponent.
    pub fn dual(&self) -> Result<DualExponent> {
        DualExponent::new(self.clone())
    }

    /// `s` with `1/s = 1/p + 1/q`; fails when `s < 1` somewhere.
    pub fn harmonic(&self, q: &Exponent) -> Result<Exponent> {
        if self.domain != q.domain {
            return Err(Error::InvalidExponent("exponents live on different boxes".into()));
        }
        Self::new(
            ExponentRule::Harmonic(Box::new(self.clone()), Box::new(q.clone())),
            self.domain.clone(),
        )
        .map_err(|e| match e {
            Error::InvalidExponent(_) => Error::Precondition(
                "1/s = 1/p + 1/q gives s < 1 somewhere".into(),
            ),
            other => other,
        })
    }
}

/// The conjugate `p' = p/(p-1)` of an exponent with `p- > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualExponent {
    primal: Exponent,
    exponent: Exponent,
}

impl DualExponent {
    pub fn new(primal: Exponent) -> Result<Self> {
        if primal.p_minus <= 1.0 {
            return Err(Error::UnboundedDual(primal.p_minus));
        }
        let exponent = match &primal.rule {
            ExponentRule::Constant(c) => Exponent::constant(c / (c - 1.0), primal.domain.clone())?,
            ExponentRule::Conjugate(inner) => (**inner).clone(),
            _ => Exponent::new(
                ExponentRule::Conjugate(Box::new(primal.clone())),
                primal.domain.clone(),
            )?,
        };
        Ok(Self { primal, exponent })
    }

    pub fn primal(&self) -> &Exponent {
        &self.primal
    }

    /// `p'` as an exponent in its own right.
    pub fn as_exponent(&self) -> &Exponent {
        &self.exponent
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let p = self.primal.evaluate(x)?;
        Ok(p / (p - 1.0))
    }

    /// Conjugate of the conjugate.
    pub fn dual(&self) -> Result<DualExponent> {
        DualExponent::new(self.exponent.clone())
    }
}

/// Even reflection of a half-space exponent across `x_n = 0`.
pub fn extend_even(exp: &Exponent) -> Result<Exponent> {
    if exp.domain.kind() != DomainKind::HalfSpace {
        return Err(Error::InvalidDomain(
            "even extension needs a half-space exponent".into(),
        ));
    }
    let domain = exp.domain.reflected()?;
    let mut e = Exponent::new(ExponentRule::EvenReflection(Box::new(exp.clone())), domain)?;
    e.p_infinity = exp.p_infinity;
    Ok(e)
}

/// Extension to a larger box by evaluating at the nearest point of the
/// original box.
pub fn extend_clamped(exp: &Exponent, outer: BoxDomain) -> Result<Exponent> {
    let inner = &exp.domain;
    if outer.dim() != inner.dim()
        || (0..inner.dim()).any(|a| {
            outer.lower()[a] > inner.lower()[a] || outer.upper()[a] < inner.upper()[a]
        })
    {
        return Err(Error::InvalidDomain(
            "clamped extension needs a box containing the original".into(),
        ));
    }
    let mut e = Exponent::new(ExponentRule::Clamped(Box::new(exp.clone())), outer)?;
    e.p_infinity = exp.p_infinity;
    Ok(e)
}

fn random_point(rng: &mut ChaCha8Rng, domain: &BoxDomain) -> Vec<f64> {
    (0..domain.dim())
        .map(|a| rng.gen_range(domain.lower()[a]..=domain.upper()[a]))
        .collect()
}

/// Sampled supremum of `|p(x)-p(y)| ln(e + 1/|x-y|)`.
///
/// Pairs come from a fixed-seed stream, so the estimate for `N` pairs uses
/// a prefix of the pairs for `M > N` and is nondecreasing in the count.
/// Half of the pairs are close (log-uniform separation down to `1e-6` of
/// the diameter). Every pair is also refined by repeated bisection toward
/// the half with the larger jump; if the quotient keeps growing along that
/// chain the estimate is flagged divergent.
pub fn estimate_log_holder(exp: &Exponent, sample_pairs: usize) -> LogHolderEstimate {
    let domain = exp.domain.clone();
    let diam = domain.diameter();
    let mut rng = ChaCha8Rng::seed_from_u64(LOG_HOLDER_SEED);
    let mut sup = 0.0f64;
    let mut divergent = false;
    let quotient = |x: &[f64], y: &[f64]| {
        let d = dist(x, y);
        if d == 0.0 {
            0.0
        } else {
            (exp.eval_unchecked(x) - exp.eval_unchecked(y)).abs() * log_weight(d)
        }
    };
    for _ in 0..sample_pairs {
        let x = random_point(&mut rng, &domain);
        let near: bool = rng.gen();
        let y = if near {
            let scale = diam * 10f64.powf(-6.0 * rng.gen::<f64>());
            let dir: Vec<f64> = (0..domain.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            x.iter()
                .zip(&dir)
                .enumerate()
                .map(|(a, (xi, di))| {
                    (xi + scale * di / norm).clamp(domain.lower()[a], domain.upper()[a])
                })
                .collect()
        } else {
            random_point(&mut rng, &domain)
        };
        if exp.is_constant() {
            continue;
        }
        let (mut a, mut b) = (x, y);
        let mut chain = Vec::with_capacity(ZOOM_STEPS + 1);
        chain.push(quotient(&a, &b));
        for _ in 0..ZOOM_STEPS {
            let m: Vec<f64> = a.iter().zip(&b).map(|(u, v)| 0.5 * (u + v)).collect();
            let pa = exp.eval_unchecked(&a);
            let pb = exp.eval_unchecked(&b);
            let pm = exp.eval_unchecked(&m);
            if (pa - pm).abs() >= (pm - pb).abs() {
                b = m;
            } else {
                a = m;
            }
            if dist(&a, &b) == 0.0 {
                break;
            }
            chain.push(quotient(&a, &b));
        }
        for &q in &chain {
            sup = sup.max(q);
        }
        if chain.len() > ZOOM_STEPS / 2 {
            let mid = chain[ZOOM_STEPS / 2];
            let last = *chain.last().unwrap();
            if mid > 0.0 && last > 1.5 * mid {
                divergent = true;
            }
        }
    }
    LogHolderEstimate {
        value: sup,
        pairs: sample_pairs,
        estimate: true,
        divergent,
    }
}
