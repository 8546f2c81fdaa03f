//! Property tests for transforms, multipliers, norms and propagators.

use std::f64::consts::PI;

use fracwave::fracops::{
    frac_laplacian, frac_seminorm, frac_seminorm_spectral, holder_sides, hs_norm, hs_norm_integral,
    lp_norm,
};
use fracwave::grid::{forward, inverse, l2_inner, l2_norm, plancherel_sides};
use fracwave::mollify::{make_mollifier, mollifying_net, regularize};
use fracwave::propagate::{free_flow, local_flow, strang_step};
use fracwave::{Field, FracOrder, Grid, Scheme, SolverState, StepperConfig};
use proptest::prelude::*;

fn grid1(n: usize) -> Grid {
    Grid::new(1, n, PI).unwrap()
}

fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Band-limited field `c + sum amp_k cos(k x + phase_k)` with `k < 8`.
fn band_limited() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((1.0f64..8.0, -1.0f64..1.0, 0.0f64..6.3), 1..5)
}

fn band_field(grid: &Grid, terms: &[(f64, f64, f64)]) -> Field {
    Field::from_fn(grid, |x| {
        0.3 + terms
            .iter()
            .map(|&(k, a, p)| a * (k.floor() * x[0] + p).cos())
            .sum::<f64>()
    })
    .unwrap()
}

/// `|h sum_n f_n exp(-i xi x_n)|` by direct summation.
fn direct_dft_magnitudes(f: &Field) -> Vec<f64> {
    let grid = f.grid();
    let xs = grid.axis_points();
    let h = grid.spacing();
    grid.axis_wavenumbers()
        .iter()
        .map(|&xi| {
            let (mut re, mut im) = (0.0, 0.0);
            for (v, &x) in f.values().iter().zip(&xs) {
                re += v * (xi * x).cos();
                im -= v * (xi * x).sin();
            }
            h * (re * re + im * im).sqrt()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(v in samples(64)) {
        let g = grid1(64);
        let f = Field::new(&g, v).unwrap();
        let back = inverse(&forward(&f).unwrap()).unwrap();
        prop_assert!(back.sub(&f).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn transform_matches_direct_sum(v in samples(32)) {
        let g = grid1(32);
        let f = Field::new(&g, v).unwrap();
        let spec = forward(&f).unwrap();
        for (z, m) in spec.coeffs().iter().zip(direct_dft_magnitudes(&f)) {
            prop_assert!((z.norm() - m).abs() < 1e-12);
        }
    }

    #[test]
    fn plancherel(v in samples(128)) {
        let g = grid1(128);
        let f = Field::new(&g, v).unwrap();
        let (phys, spec) = plancherel_sides(&f).unwrap();
        prop_assert!((phys - spec).abs() <= 1e-12 * phys.max(1e-300));
        let direct: f64 = direct_dft_magnitudes(&f).iter().map(|m| m * m).sum::<f64>()
            / g.box_volume();
        prop_assert!((phys - direct).abs() <= 1e-11 * phys.max(1e-300));
    }

    #[test]
    fn plancherel_in_two_dimensions(v in samples(256)) {
        let g = Grid::new(2, 16, 1.5).unwrap();
        let f = Field::new(&g, v).unwrap();
        let (phys, spec) = plancherel_sides(&f).unwrap();
        prop_assert!((phys - spec).abs() <= 1e-12 * phys.max(1e-300));
    }

    #[test]
    fn multipliers_compose(v in samples(64), s1 in 0.05f64..1.0, s2 in 0.05f64..1.0) {
        let g = grid1(64);
        let f = Field::new(&g, v).unwrap();
        let two = frac_laplacian(&frac_laplacian(&f, s1).unwrap(), s2).unwrap();
        let one = frac_laplacian(&f, s1 + s2).unwrap();
        let scale = one.max_abs().max(1.0);
        prop_assert!(two.sub(&one).unwrap().max_abs() <= 1e-11 * scale);
    }

    #[test]
    fn multiplier_is_self_adjoint(v in samples(64), w in samples(64), sigma in 0.0f64..1.5) {
        let g = grid1(64);
        let f = Field::new(&g, v).unwrap();
        let h = Field::new(&g, w).unwrap();
        let lhs = l2_inner(&frac_laplacian(&f, sigma).unwrap(), &h).unwrap();
        let rhs = l2_inner(&f, &frac_laplacian(&h, sigma).unwrap()).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale);
    }

    #[test]
    fn multiplier_is_linear(v in samples(64), w in samples(64), c in -3.0f64..3.0) {
        let g = grid1(64);
        let f = Field::new(&g, v).unwrap();
        let h = Field::new(&g, w).unwrap();
        let mut comb = f.clone();
        comb.axpy(c, &h).unwrap();
        let lhs = frac_laplacian(&comb, 0.4).unwrap();
        let mut rhs = frac_laplacian(&f, 0.4).unwrap();
        rhs.axpy(c, &frac_laplacian(&h, 0.4).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-11 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn seminorm_routes_agree(terms in band_limited(), s in 0.05f64..1.0) {
        let g = grid1(128);
        let f = band_field(&g, &terms);
        let s = FracOrder::new(s).unwrap();
        let a = frac_seminorm(&f, s).unwrap();
        let b = frac_seminorm_spectral(&f, s).unwrap();
        prop_assert!((a - b).abs() <= 1e-11 * a.max(1.0));
    }

    #[test]
    fn holder(terms_f in band_limited(), terms_g in band_limited(),
              p in 1.0f64..10.0, extra in 0.0f64..10.0) {
        let g = grid1(128);
        let f = band_field(&g, &terms_f);
        let h = band_field(&g, &terms_g);
        let p = p.max(1.01);
        let q = p / (p - 1.0) + extra;
        let (lhs, rhs) = holder_sides(&f, &h, p, q).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn hs_norm_forms_are_equivalent(terms in band_limited(), s in 0.05f64..1.0) {
        let g = grid1(128);
        let f = band_field(&g, &terms);
        let s = FracOrder::new(s).unwrap();
        let ratio = hs_norm(&f, s).unwrap() / hs_norm_integral(&f, s).unwrap();
        prop_assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn lp_norms_are_monotone_in_p_on_the_normalized_box(terms in band_limited(),
                                                         p in 1.0f64..6.0, dp in 0.0f64..4.0) {
        // With the probability measure (2L)^{-d} dx, ||f||_p grows with p.
        let g = grid1(128);
        let f = band_field(&g, &terms);
        let vol = g.box_volume();
        let lo = lp_norm(&f, p).unwrap() * vol.powf(-1.0 / p);
        let hi = lp_norm(&f, p + dp).unwrap() * vol.powf(-1.0 / (p + dp));
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn regularization_keeps_sign_and_mass(v in prop::collection::vec(0.0f64..2.0, 256),
                                           k in 2i32..5) {
        let g = Grid::new(1, 256, 2.0).unwrap();
        let psi = make_mollifier(&Grid::new(1, 64, 2.0).unwrap()).unwrap();
        let f = Field::new(&g, v).unwrap();
        let net = mollifying_net(&psi, 2f64.powi(-k), &g).unwrap();
        let r = regularize(&f, &net).unwrap();
        prop_assert!(r.min() >= 0.0);
        prop_assert!((r.integral() - f.integral()).abs() <= 1e-11 * f.integral().max(1.0));
    }

    #[test]
    fn free_flow_is_reversible(v in samples(64), w in samples(64), dt in 0.0f64..2.0) {
        let g = grid1(64);
        let s = FracOrder::new(0.6).unwrap();
        let st = SolverState::new(Field::new(&g, v).unwrap(), Field::new(&g, w).unwrap(), 0.0)
            .unwrap();
        let there = free_flow(&st, dt, s).unwrap();
        let back = free_flow(&there, -dt, s).unwrap();
        prop_assert!(back.u.sub(&st.u).unwrap().max_abs() < 1e-11);
        prop_assert!(back.ut.sub(&st.ut).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn local_flow_composes(u in samples(16), v in samples(16),
                           a in 0.0f64..4.0, b in 0.0f64..4.0, dt in 0.001f64..0.5) {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let af = Field::constant(&g, a);
        let bf = Field::constant(&g, b);
        let st = SolverState::new(Field::new(&g, u).unwrap(), Field::new(&g, v).unwrap(), 0.0)
            .unwrap();
        let once = local_flow(&st, 2.0 * dt, &af, &bf).unwrap();
        let twice = local_flow(&local_flow(&st, dt, &af, &bf).unwrap(), dt, &af, &bf).unwrap();
        prop_assert!(once.u.sub(&twice.u).unwrap().max_abs() < 1e-12);
        prop_assert!(once.ut.sub(&twice.ut).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn strang_step_is_linear(u in samples(64), v in samples(64), c in -2.0f64..2.0) {
        let g = grid1(64);
        let a = Field::from_fn(&g, |x| 1.0 + 0.5 * x[0].cos()).unwrap();
        let b = Field::from_fn(&g, |x| 0.2 + 0.1 * x[0].sin()).unwrap();
        let cfg = StepperConfig::new(FracOrder::new(0.5).unwrap(), 0.01, Scheme::StrangSplit, a, b)
            .unwrap();
        let st = SolverState::new(Field::new(&g, u).unwrap(), Field::new(&g, v).unwrap(), 0.0)
            .unwrap();
        let scaled = SolverState::new(st.u.scaled(c), st.ut.scaled(c), 0.0).unwrap();
        let lhs = strang_step(&scaled, &cfg).unwrap();
        let rhs = strang_step(&st, &cfg).unwrap();
        prop_assert!(lhs.u.sub(&rhs.u.scaled(c)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn undamped_step_does_not_grow_modal_energy(v in samples(64)) {
        // Free flow alone is a rotation in (omega u_hat, u_t_hat).
        let g = grid1(64);
        let s = FracOrder::new(0.5).unwrap();
        let st = SolverState::new(Field::new(&g, v).unwrap(), Field::zeros(&g), 0.0).unwrap();
        let e = |st: &SolverState| {
            l2_norm(&st.ut).powi(2) + frac_seminorm_spectral(&st.u, s).unwrap().powi(2)
        };
        let next = free_flow(&st, 0.37, s).unwrap();
        prop_assert!((e(&next) - e(&st)).abs() <= 1e-11 * e(&st).max(1.0));
    }
}
