use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use wsav_core::grid::{inner_product, integrate, norm_linf};
use wsav_core::spectral::make_operators;
use wsav_core::{Grid, RealField};

fn grid16() -> Grid {
    Grid::square(16, 0.0, 2.0 * PI).unwrap()
}

/// A trigonometric polynomial with the given `(kx, ky, a, b)` terms.
fn trig(grid: Grid, terms: &[(i32, i32, f64, f64)]) -> RealField {
    RealField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|&(k, l, a, b)| {
                let arg = k as f64 * x[0] + l as f64 * x[1];
                a * arg.cos() + b * arg.sin()
            })
            .sum()
    })
}

#[test]
fn l_matches_analytic_symbol() {
    let (eps, gamma) = (0.3, 2.0);
    let ops = make_operators(grid16(), 1.0, eps, gamma).unwrap();
    let terms = [(1, 0, 0.7, 0.0), (2, -3, 0.0, 0.4), (0, 5, 0.2, -0.1)];
    let f = trig(grid16(), &terms);
    let lf = ops.apply_l(&f).unwrap();
    let expect = RealField::from_fn(grid16(), |x| {
        terms
            .iter()
            .map(|&(k, l, a, b)| {
                let arg = k as f64 * x[0] + l as f64 * x[1];
                let s = eps * eps * (k * k + l * l) as f64 + gamma;
                s * (a * arg.cos() + b * arg.sin())
            })
            .sum()
    });
    assert!(norm_linf(&lf.add_scaled(-1.0, &expect).unwrap()) < 1e-12);
}

#[test]
fn l_agrees_with_finite_differences() {
    // fine grid, smooth field: the second-order stencil converges to the spectral value
    let grid = Grid::square(64, 0.0, 2.0 * PI).unwrap();
    let eps = 0.5;
    let ops = make_operators(grid, 1.0, eps, 0.0).unwrap();
    let f = RealField::from_fn(grid, |x| (x[0].sin() * x[1].cos()).exp());
    let lf = ops.apply_l(&f).unwrap();
    let h = grid.h(0);
    let n = 64;
    let v = f.values();
    let at = |i: usize, j: usize| v[(i % n) * n + (j % n)];
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let lap = (at(i + 1, j) + at(i + n - 1, j) + at(i, j + 1) + at(i, j + n - 1) - 4.0 * at(i, j)) / (h * h);
            err = err.max((-eps * eps * lap - lf.values()[i * n + j]).abs());
        }
    }
    assert!(err < 5e-3, "fd mismatch {err}");
}

#[test]
fn fractional_mobility_on_single_modes() {
    for nu in [0.0, 0.25, 0.5, 1.0] {
        let ops = make_operators(grid16(), nu, 0.1, 0.0).unwrap();
        let f = trig(grid16(), &[(3, 4, 1.0, 0.0)]);
        let gf = ops.apply_g(&f).unwrap();
        let scale = 25f64.powf(nu);
        assert!(norm_linf(&gf.add_scaled(-scale, &f).unwrap()) < 1e-11, "nu = {nu}");
    }
}

#[test]
fn be_propagator_residual() {
    let ops = make_operators(grid16(), 0.5, 0.2, 1.0).unwrap();
    let rhs = RealField::from_fn(grid16(), |x| (x[0] + 0.3).sin().powi(3) + x[1].cos());
    let tau = 0.05;
    let u = ops.solve_be_propagator(tau, &rhs).unwrap();
    let glu = ops.apply_g(&ops.apply_l(&u).unwrap()).unwrap();
    let back = u.add_scaled(tau, &glu).unwrap();
    assert!(norm_linf(&back.add_scaled(-1.0, &rhs).unwrap()) < 1e-12);
}

#[test]
fn cn_pieces_compose() {
    let ops = make_operators(grid16(), 1.0, 0.2, 1.0).unwrap();
    let f = trig(grid16(), &[(1, 1, 0.5, 0.1), (2, 0, -0.3, 0.0)]);
    let tau = 0.01;
    let u = ops.solve_cn_propagator(tau, &ops.apply_cn_explicit(tau, &f).unwrap()).unwrap();
    // the Cayley map is a contraction for a non-negative symbol
    let (nu, nf) = (inner_product(&u, &u).unwrap(), inner_product(&f, &f).unwrap());
    assert!(nu <= nf);
    assert!(ops.solve_be_propagator(-1.0, &f).is_err());
}

#[test]
fn rejects_bad_parameters() {
    assert!(make_operators(grid16(), 1.5, 0.1, 0.0).is_err());
    assert!(make_operators(grid16(), 1.0, 0.0, 0.0).is_err());
    assert!(make_operators(grid16(), 1.0, 0.1, -1.0).is_err());
}

fn field_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 8 * 8)
}

proptest! {
    #[test]
    fn parseval(a in field_strategy(), b in field_strategy()) {
        let grid = Grid::square(8, -1.0, 1.0).unwrap();
        let ops = make_operators(grid, 1.0, 0.1, 0.0).unwrap();
        let f = RealField::from_values(grid, a).unwrap();
        let g = RealField::from_values(grid, b).unwrap();
        let physical = inner_product(&f, &g).unwrap();
        let spectral = ops.spectral_inner_product(&f, &g).unwrap();
        prop_assert!((physical - spectral).abs() <= 1e-12 * (1.0 + physical.abs()));
    }

    #[test]
    fn linear_and_mass_preserving(a in field_strategy(), b in field_strategy(), s in -3.0f64..3.0, nu in 0.0f64..1.0) {
        let grid = Grid::square(8, -1.0, 1.0).unwrap();
        let ops = make_operators(grid, nu, 0.1, 0.5).unwrap();
        let f = RealField::from_values(grid, a).unwrap();
        let g = RealField::from_values(grid, b).unwrap();
        let lhs = ops.apply_l(&f.add_scaled(s, &g).unwrap()).unwrap();
        let rhs = ops.apply_l(&f).unwrap().add_scaled(s, &ops.apply_l(&g).unwrap()).unwrap();
        prop_assert!(norm_linf(&lhs.add_scaled(-1.0, &rhs).unwrap()) < 1e-12);
        if nu > 0.0 {
            prop_assert!(integrate(&ops.apply_g(&f).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn l_is_self_adjoint(a in field_strategy(), b in field_strategy()) {
        let grid = Grid::square(8, -1.0, 1.0).unwrap();
        let ops = make_operators(grid, 1.0, 0.3, 2.0).unwrap();
        let f = RealField::from_values(grid, a).unwrap();
        let g = RealField::from_values(grid, b).unwrap();
        let x = inner_product(&f, &ops.apply_l(&g).unwrap()).unwrap();
        let y = inner_product(&ops.apply_l(&f).unwrap(), &g).unwrap();
        prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    }
}

#[test]
fn constant_symbol_identity() {
    let ops = make_operators(grid16(), 1.0, 0.1, 0.0).unwrap();
    let f = trig(grid16(), &[(1, 2, 1.0, 0.5)]);
    let same = ops.apply_symbol(&f, |_| 1.0).unwrap();
    assert_relative_eq!(integrate(&same), integrate(&f), epsilon = 1e-13);
    assert!(norm_linf(&same.add_scaled(-1.0, &f).unwrap()) < 1e-13);
}
