use varpot::exponent::Exponent;
use varpot::grid::{make_bump, make_mean_zero_bump, quadrature, BoxDomain, DomainKind, Grid, GridFunction};
use varpot::operators::{reflect, restrict_upper, Parity};
use varpot::report::EstimateCase;
use varpot::solvers::*;

fn whole(l: f64, h: f64) -> Grid {
    Grid::new(BoxDomain::cube(3, -l, l, DomainKind::WholeSpace).unwrap(), h).unwrap()
}

fn half(l: f64, h: f64) -> Grid {
    Grid::new(BoxDomain::half_space(3, l, l).unwrap(), h).unwrap()
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dipole_force(g: &Grid) -> GridFunction {
    let fx = make_mean_zero_bump(g, &[-0.5, 0.0, 0.0], 0.45, 1.0, &[1.0, 0.0, 0.0]).unwrap();
    let fy = make_mean_zero_bump(g, &[0.0, -0.5, 0.0], 0.45, 1.0, &[0.0, 1.0, 0.0]).unwrap();
    GridFunction::stack(&[fx, fy, GridFunction::zeros(g, 1)]).unwrap()
}

#[test]
fn poisson_residual_and_zero_data() {
    let g = whole(2.0, 1.0 / 16.0);
    let f = make_bump(&g, &[0.0; 3], 0.5, 1.0).unwrap();
    let s = solve_poisson_wholespace(&f, &SolveOptions::default()).unwrap();
    assert!(s.residual < 0.05, "residual {}", s.residual);
    assert_eq!(s.provenance, Provenance::Whole);
    let z = solve_poisson_wholespace(&GridFunction::zeros(&g, 1), &SolveOptions::default()).unwrap();
    assert_eq!(z.u.max_abs(), 0.0);
    assert_eq!(z.residual, 0.0);
}

#[test]
fn poisson_residual_decreases_under_refinement() {
    let res: Vec<f64> = [1.0 / 8.0, 1.0 / 16.0]
        .iter()
        .map(|&h| {
            let g = whole(2.0, h);
            let f = make_bump(&g, &[0.0; 3], 0.5, 1.0).unwrap();
            solve_poisson_wholespace(&f, &SolveOptions::default()).unwrap().residual
        })
        .collect();
    let order = (res[0] / res[1]).log2();
    assert!(order >= 1.0, "residuals {res:?}");
}

#[test]
fn solves_are_linear() {
    let g = whole(1.5, 1.0 / 8.0);
    let a = make_mean_zero_bump(&g, &[-0.3, 0.0, 0.0], 0.35, 1.0, &[0.75, 0.0, 0.0]).unwrap();
    let b = make_mean_zero_bump(&g, &[0.0, -0.3, 0.1], 0.3, 1.0, &[0.0, 0.7, 0.0]).unwrap();
    let opts = SolveOptions::default();
    let ua = solve_poisson_wholespace(&a, &opts).unwrap().u;
    let ub = solve_poisson_wholespace(&b, &opts).unwrap().u;
    let uab = solve_poisson_wholespace(&a.axpy(3.0, &b).unwrap(), &opts).unwrap().u;
    assert!(max_diff(&uab, &ua.axpy(3.0, &ub).unwrap()) <= 1e-8 * uab.max_abs());

    let z = GridFunction::zeros(&g, 1);
    let fa = GridFunction::stack(&[a.clone(), b.clone(), z.clone()]).unwrap();
    let fb = GridFunction::stack(&[z.clone(), a.scaled(-0.5), b.clone()]).unwrap();
    let ga = make_bump(&g, &[0.1, 0.0, 0.0], 0.4, 1.0).unwrap();
    let sa = solve_stokes_wholespace(&fa, &ga, &opts).unwrap();
    let sb = solve_stokes_wholespace(&fb, &z, &opts).unwrap();
    let sab = solve_stokes_wholespace(&fa.axpy(-2.0, &fb).unwrap(), &ga, &opts).unwrap();
    let v = sa.v.axpy(-2.0, &sb.v).unwrap();
    let pi = sa.pi.axpy(-2.0, &sb.pi).unwrap();
    assert!(max_diff(&sab.v, &v) <= 1e-8 * sab.v.max_abs());
    assert!(max_diff(&sab.pi, &pi) <= 1e-8 * sab.pi.max_abs());
}

#[test]
fn stokes_residuals_within_budget() {
    let g = whole(2.0, 1.0 / 16.0);
    let f = dipole_force(&g);
    let s = solve_stokes_wholespace(&f, &GridFunction::zeros(&g, 1), &SolveOptions::default()).unwrap();
    let r = s.residuals;
    assert!(r.momentum <= 0.08, "{r:?}");
    assert!(r.divergence <= 0.02, "{r:?}");
    assert!(r.divergence_free_part <= 0.02, "{r:?}");
    assert!(quadrature(&s.pi).unwrap().abs() <= 1e-10 * s.pi.max_abs());
    // Without g the corrector vanishes.
    assert_eq!(s.corrector.max_abs(), 0.0);
}

#[test]
fn stokes_zero_data_gives_zero() {
    let g = whole(1.5, 1.0 / 8.0);
    let s = solve_stokes_wholespace(&GridFunction::zeros(&g, 3), &GridFunction::zeros(&g, 1), &SolveOptions::default())
        .unwrap();
    assert_eq!(s.v.max_abs(), 0.0);
    assert_eq!(s.pi.max_abs(), 0.0);
    let hg = half(1.5, 1.0 / 8.0);
    let s = solve_stokes_halfspace(&GridFunction::zeros(&hg, 3), &GridFunction::zeros(&hg, 1), &SolveOptions::default())
        .unwrap();
    assert_eq!(s.v.max_abs(), 0.0);
    assert_eq!(s.residuals.boundary_trace, Some(0.0));
}

#[test]
fn stokes_rejects_force_with_mean() {
    let g = whole(1.5, 1.0 / 8.0);
    let b = make_bump(&g, &[0.0; 3], 0.4, 1.0).unwrap();
    let f = GridFunction::stack(&[b, GridFunction::zeros(&g, 1), GridFunction::zeros(&g, 1)]).unwrap();
    let err = solve_stokes_wholespace(&f, &GridFunction::zeros(&g, 1), &SolveOptions::default()).unwrap_err();
    assert!(matches!(err, varpot::Error::NotMeanZero { component: 0, .. }), "{err:?}");
}

#[test]
fn half_space_poisson_equals_odd_reflected_whole_solve() {
    let hg = half(1.5, 1.0 / 8.0);
    let f = make_bump(&hg, &[0.1, 0.0, 0.6], 0.4, 1.0).unwrap();
    let opts = SolveOptions::with_window(&[-0.75, -0.75, 0.0], &[0.75, 0.75, 0.75]);
    let s = solve_poisson_halfspace(&f, &opts).unwrap();
    assert_eq!(s.boundary_trace, Some(0.0));

    let odd = reflect(&f, Parity::Odd).unwrap();
    let w = solve_poisson_wholespace(&odd, &SolveOptions::with_window(&[-0.75, -0.75, -0.75], &[0.75, 0.75, 0.75]))
        .unwrap()
        .u;
    let upper = restrict_upper(&w).unwrap();
    assert_eq!(upper.grid().shape(), s.u.grid().shape());
    assert!(max_diff(&upper, &s.u) <= 1e-12 * s.u.max_abs());
}

#[test]
fn half_space_poisson_residual() {
    let hg = half(2.0, 1.0 / 16.0);
    let f = make_bump(&hg, &[0.0, 0.0, 0.75], 0.5, 1.0).unwrap();
    let s = solve_poisson_halfspace(&f, &SolveOptions::default()).unwrap();
    assert!(s.residual < 0.05, "{}", s.residual);
    assert_eq!(s.boundary_trace, Some(0.0));
    assert_eq!(s.provenance, Provenance::Half);
}

#[test]
fn half_space_stokes_layer_correction_reduces_trace() {
    let hg = half(2.0, 1.0 / 16.0);
    let b = make_bump(&hg, &[0.0, 0.0, 0.75], 0.5, 1.0).unwrap();
    let f = GridFunction::stack(&[b.clone(), b.scaled(0.5), b.scaled(-0.7)]).unwrap();
    let s = solve_stokes_halfspace(&f, &GridFunction::zeros(&hg, 1), &SolveOptions::default()).unwrap();
    let r = s.residuals;
    let (before, after) = (r.boundary_trace_before.unwrap(), r.boundary_trace.unwrap());
    assert!(after * 10.0 < before, "{r:?}");
    assert!(r.momentum <= 0.1, "{r:?}");
    assert!(r.divergence <= 0.1, "{r:?}");
    assert!(s.layer.is_some());
}

#[test]
fn estimate_family_is_reproducible_and_skips_zero_datum() {
    let fam = DataFamily {
        count: 2,
        include_zero: true,
        ..DataFamily::default()
    };
    let dom = BoxDomain::cube(3, -1.5, 1.5, DomainKind::BoundedBox).unwrap();
    let p = Exponent::constant(2.0, dom).unwrap();
    let a = verify_estimate(EstimateId::WholePoisson, Arm::Weak, &fam, &p).unwrap();
    let b = verify_estimate(EstimateId::WholePoisson, Arm::Weak, &fam, &p).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.cases.len(), 3);
    assert!(a.cases[0].ratio.is_none());
    assert!(a.cases[0].flags.iter().any(|f| f == "zero-datum"));
    assert!(a.has_flag("estimate"));
    let sup = a.sup_ratio().unwrap();
    assert!(sup.is_finite() && sup > 0.0);
    let strong = verify_estimate(EstimateId::WholePoisson, Arm::Strong, &fam, &p).unwrap();
    assert!(!strong.has_flag("estimate"));
    assert!(verify_estimate(EstimateId::BoundaryOperator, Arm::Strong, &fam, &p).is_err());
}

#[test]
fn estimate_ids_round_trip_through_names() {
    for id in EstimateId::ALL {
        assert_eq!(id.name().parse::<EstimateId>().unwrap(), id);
    }
    assert!("nope".parse::<EstimateId>().is_err());
    assert_eq!(EstimateCase::new("z", 0.0, 0.0).ratio, None);
}
