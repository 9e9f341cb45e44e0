use varpot::grid::{bump_profile, hessian, make_bump, BoxDomain, DomainKind, Grid, GridFunction};
use varpot::kernels::Kernel;
use varpot::operators::{convolve, layer_apply, localize, pv_apply, Cutoff, CutoffProfile, LayerOperator, PvOperator};

fn rel_l2(a: &GridFunction, b: &GridFunction) -> f64 {
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn newton_hessian_principal_value_matches_differences() {
    let h = 1.0 / 16.0;
    let g = Grid::new(BoxDomain::cube(3, -1.5, 1.5, DomainKind::WholeSpace).unwrap(), h).unwrap();
    let f = make_bump(&g, &[0.0, 0.0, 0.0], 0.75, 1.0).unwrap();
    let big = g.window(&[-0.5; 3], &[0.5; 3]).unwrap();
    let u = convolve(&Kernel::k(3), &f, &big).unwrap();
    let hess = hessian(&u, 4).unwrap();
    let inner = big.shrink(3).unwrap();
    let local = varpot::grid::SubGrid { grid: inner.grid.clone(), origin: vec![3, 3, 3] };
    for (i, j) in [(0, 0), (0, 1), (2, 2)] {
        let op = PvOperator::new(Kernel::ddk(3, i, j)).unwrap();
        let pv = pv_apply(&op, &f, &inner, true).unwrap();
        let bare = pv_apply(&op, &f, &inner, false).unwrap();
        let fd = hess.component(i * 3 + j).restrict(&local).unwrap().with_grid(inner.grid.clone()).unwrap();
        let e = rel_l2(&pv, &fd);
        let e0 = rel_l2(&bare, &fd);
        assert!(e < 0.02, "ddK {i}{j}: {e}");
        if i == j {
            assert!(e0 > 10.0 * e);
        }
    }
}

#[test]
fn stokes_hessian_principal_value_matches_differences() {
    let h = 1.0 / 16.0;
    let g = Grid::new(BoxDomain::cube(3, -1.5, 1.5, DomainKind::WholeSpace).unwrap(), h).unwrap();
    let f = make_bump(&g, &[0.0, 0.0, 0.0], 0.75, 1.0).unwrap();
    let big = g.window(&[-0.5; 3], &[0.5; 3]).unwrap();
    let inner = big.shrink(3).unwrap();
    let local = varpot::grid::SubGrid { grid: inner.grid.clone(), origin: vec![3, 3, 3] };
    for (r, l, i, j) in [(0, 0, 0, 0), (0, 0, 1, 1), (1, 0, 0, 1), (0, 1, 1, 1), (2, 2, 0, 1)] {
        let u = convolve(&Kernel::v(3, r, l), &f, &big).unwrap();
        let hess = hessian(&u, 4).unwrap();
        let op = PvOperator::new(Kernel::ddv(3, r, l, i, j)).unwrap();
        let pv = pv_apply(&op, &f, &inner, true).unwrap();
        let bare = pv_apply(&op, &f, &inner, false).unwrap();
        let fd = hess.component(i * 3 + j).restrict(&local).unwrap().with_grid(inner.grid.clone()).unwrap();
        let (e, e0) = (rel_l2(&pv, &fd), rel_l2(&bare, &fd));
        assert!(e < 0.02, "ddV {r}{l}{i}{j}: {e}");
        if op.correction() != 0.0 {
            assert!(e0 > 10.0 * e, "ddV {r}{l}{i}{j}: bare {e0} vs {e}");
        }
    }
    for (l, i) in [(0, 0), (0, 1), (2, 2)] {
        let u = convolve(&Kernel::q(3, l), &f, &big).unwrap();
        let grad = varpot::grid::gradient(&u, 4).unwrap();
        let op = PvOperator::new(Kernel::dq(3, l, i)).unwrap();
        let pv = pv_apply(&op, &f, &inner, true).unwrap();
        let fd = grad.component(i).restrict(&local).unwrap().with_grid(inner.grid.clone()).unwrap();
        let e = rel_l2(&pv, &fd);
        assert!(e < 0.02, "dQ {l}{i}: {e}");
    }
}

fn gaussian(x: &[f64], c: &[f64]) -> f64 {
    (-x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).exp()
}

#[test]
fn principal_value_is_linear_and_translation_invariant() {
    let g = Grid::new(BoxDomain::cube(3, -1.5, 1.5, DomainKind::WholeSpace).unwrap(), 0.125).unwrap();
    let a = make_bump(&g, &[0.0, 0.0, 0.0], 0.5, 1.0).unwrap();
    let b = make_bump(&g, &[0.25, -0.125, 0.0], 0.4, 1.0).unwrap();
    let op = PvOperator::new(Kernel::ddv(3, 0, 1, 0, 1)).unwrap();
    let w = g.window(&[-0.75; 3], &[0.75; 3]).unwrap();
    let pa = pv_apply(&op, &a, &w, true).unwrap();
    let pb = pv_apply(&op, &b, &w, true).unwrap();
    let ab = pv_apply(&op, &a.axpy(-2.5, &b).unwrap(), &w, true).unwrap();
    let lin = pa.axpy(-2.5, &pb).unwrap();
    assert!(rel_l2(&ab, &lin) < 1e-12);

    // Shift the bump by two nodes along x: the output shifts with it.
    let shifted = make_bump(&g, &[0.25, 0.0, 0.0], 0.5, 1.0).unwrap();
    let ws = g.window(&[-0.5, -0.75, -0.75], &[1.0, 0.75, 0.75]).unwrap();
    let ps = pv_apply(&op, &shifted, &ws, true).unwrap();
    assert_eq!(ps.grid().shape(), pa.grid().shape());
    assert!(rel_l2(&ps.with_grid(pa.grid().clone()).unwrap(), &pa) < 1e-12);
}

#[test]
fn newton_potential_outside_radial_support_is_a_point_source() {
    // For radial data the potential outside the support equals M/(4π|x|).
    let h = 1.0 / 16.0;
    let g = Grid::new(BoxDomain::cube(3, -2.0, 2.0, DomainKind::WholeSpace).unwrap(), h).unwrap();
    let f = make_bump(&g, &[0.0; 3], 0.4, 1.0).unwrap();
    let mass = varpot::grid::quadrature(&f).unwrap();
    let w = g.window(&[1.0, 1.0, -0.5], &[1.5, 1.5, 0.5]).unwrap();
    let u = convolve(&Kernel::k(3), &f, &w).unwrap();
    for lin in 0..u.grid().node_count() {
        let x = u.grid().point(lin);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let exact = mass / (4.0 * std::f64::consts::PI * r);
        assert!((u.values()[lin] - exact).abs() < 1e-6 * exact, "{} vs {exact}", u.values()[lin]);
    }
}

#[test]
fn tangential_derivatives_commute_with_layer_potentials() {
    // The lattice sum is translation invariant along Σ, so a tangential
    // difference of the potential is the potential of the differenced data.
    let h = 0.125;
    let half = Grid::new(BoxDomain::half_space(3, 2.0, 2.0).unwrap(), h).unwrap();
    let plane = half.boundary_plane().unwrap();
    let density = |x0: f64, x1: f64| (1.0 + x0) * bump_profile(((x0 - 0.1).powi(2) + (x1 + 0.2).powi(2)) / 0.49);
    let data = GridFunction::from_fn(&plane, |x| density(x[0], x[1]));
    let shifted = GridFunction::from_fn(&plane, |x| density(x[0] - h, x[1]));
    let w = half.window(&[-1.0, -1.0, h], &[1.0, 1.0, 0.5]).unwrap();
    for kernel in [Kernel::z(3, 0, 2), Kernel::dz(3, 1)] {
        let op = LayerOperator::new(kernel).unwrap();
        let u = layer_apply(&op, &data, &half, &w).unwrap();
        let d = layer_apply(&op, &data.axpy(-1.0, &shifted).unwrap(), &half, &w).unwrap();
        let ug = u.grid();
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for lin in 0..ug.node_count() {
            let idx = ug.multi_index(lin);
            if idx[0] == 0 {
                continue;
            }
            let back = ug.linear_index(&[idx[0] - 1, idx[1], idx[2]]);
            let diff = u.values()[lin] - u.values()[back];
            err = err.max((diff - d.values()[lin]).abs());
            scale = scale.max(diff.abs());
        }
        assert!(err < 1e-12 * scale, "{}: {err} vs {scale}", kernel.label());
    }
}

#[test]
fn localized_data_has_vanishing_means_on_a_manufactured_solution() {
    let h = 1.0 / 32.0;
    let g = Grid::new(BoxDomain::cube(3, -2.0, 2.0, DomainKind::BoundedBox).unwrap(), h).unwrap();
    let centers = [[0.2, 0.0, 0.0], [0.0, -0.3, 0.1], [0.1, 0.1, -0.2]];
    let amp = [1.0, -0.5, 0.8];
    let b = [0.0, 0.2, 0.0];
    let v = GridFunction::from_fn_vec(&g, 3, |x, o| {
        for r in 0..3 {
            o[r] = amp[r] * gaussian(x, &centers[r]);
        }
    });
    let pi = GridFunction::from_fn(&g, |x| gaussian(x, &b));
    // f = Δv - ∇π and g = div v in closed form.
    let f = GridFunction::from_fn_vec(&g, 3, |x, o| {
        let pb = gaussian(x, &b);
        for r in 0..3 {
            let s: f64 = x.iter().zip(&centers[r]).map(|(a, c)| (a - c).powi(2)).sum();
            o[r] = amp[r] * (4.0 * s - 6.0) * gaussian(x, &centers[r]) + 2.0 * (x[r] - b[r]) * pb;
        }
    });
    let div = GridFunction::from_fn(&g, |x| {
        (0..3).map(|r| -2.0 * amp[r] * (x[r] - centers[r][r]) * gaussian(x, &centers[r])).sum()
    });
    let tau = Cutoff::cube(&[0.0; 3], 0.25, 1.75, CutoffProfile::Smooth).unwrap();
    let loc = localize(&v, &pi, &f, &div, &tau, (&[-0.25; 3], &[0.25; 3])).unwrap();
    for m in &loc.momentum_mean {
        assert!(*m <= 1e-6, "momentum mean {m}");
    }
    assert!(loc.divergence_mean <= 1e-6, "divergence mean {}", loc.divergence_mean);
    // Support containment: every localized field vanishes outside the outer box.
    for lin in 0..g.node_count() {
        let x = g.point(lin);
        if x.iter().any(|c| c.abs() >= 1.75) {
            assert!(loc.t.node(lin).iter().all(|&t| t == 0.0));
            assert_eq!(loc.g.values()[lin], 0.0);
            assert_eq!(loc.pi.values()[lin], 0.0);
        }
    }
}
