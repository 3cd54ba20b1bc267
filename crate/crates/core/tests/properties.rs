use mfg_core::exponents::{certify, conjugate, rational, Rational};
use mfg_core::fp::{adjoint_pairing_matrix_check, forward_step, solve_forward, DriftSign};
use mfg_core::grid::{
    bump, compensated_sum, convolve, divergence, gradient, lp_norm, mixed_norm, Exponent, FieldSeries, GridSpec, Kernel,
    Region, ScalarField, VectorField,
};
use mfg_core::hjb::solve_backward;
use mfg_core::model::{HamiltonianModel, Nonlinearity};
use num_traits::One;
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = HamiltonianModel> {
    (1.1f64..=2.0, 0.0f64..1.0).prop_map(|(g, a0)| HamiltonianModel::new(g, a0).unwrap())
}

fn vec2(r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, 2)
}

/// Sum of a few low Fourier modes with the given coefficients along each axis.
fn smooth_field(grid: GridSpec, coef: &[f64]) -> ScalarField {
    let l = grid.half_width;
    ScalarField::from_fn(grid, |x| {
        let mut v = 0.0;
        for (k, c) in coef.iter().enumerate() {
            let freq = (k / 2 + 1) as f64 * std::f64::consts::PI / l;
            for xi in x {
                v += if k % 2 == 0 { c * (freq * xi).sin() } else { c * (freq * xi).cos() };
            }
        }
        v
    })
}

fn smooth_drift(grid: GridSpec, coef: &[f64]) -> VectorField {
    let mut b = VectorField::zeros(grid);
    for axis in 0..grid.d {
        let shifted: Vec<f64> = coef.iter().map(|c| c * (1.0 + 0.3 * axis as f64)).collect();
        b.components[axis] = smooth_field(grid, &shifted).values;
    }
    b
}

fn grid(d: usize, n: usize) -> GridSpec {
    GridSpec::new(d, 4.0, n, 0.1, 0.4).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn hamiltonian_is_strictly_convex(m in model_strategy(), x in vec2(3.0), p1 in vec2(10.0), p2 in vec2(10.0), t in 0.0f64..=1.0) {
        let mid: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let chord = t * m.eval_h(&x, &p1) + (1.0 - t) * m.eval_h(&x, &p2);
        let gap = chord - m.eval_h(&x, &mid);
        prop_assert!(gap >= -1e-12 * (1.0 + chord), "gap {gap}");
        let sep = p1.iter().zip(&p2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if sep > 1e-2 && (0.1..=0.9).contains(&t) {
            prop_assert!(gap > 0.0, "gap {gap} at separation {sep}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn young_fenchel(m in model_strategy(), x in vec2(3.0), p in vec2(10.0), v in vec2(10.0)) {
        let l = m.eval_l(&x, &v).unwrap();
        let pv: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
        prop_assert!(l + m.eval_h(&x, &p) + pv >= -1e-9 * (1.0 + l.abs()));
        let (l, star) = m.legendre(&x, &v).unwrap();
        let sv: f64 = star.iter().zip(&v).map(|(a, b)| a * b).sum();
        let slack = l + m.eval_h(&x, &star) + sv;
        prop_assert!(slack.abs() <= 1e-8 * (1.0 + l.abs()), "slack {slack}");
    }

    #[test]
    fn coupling_is_increasing(alpha in 0.05f64..=1.0, m1 in 0.0f64..1e6, gap in 1e-6f64..1e3) {
        let nl = Nonlinearity::new(alpha).unwrap();
        prop_assert!(nl.g(m1 + gap) > nl.g(m1));
    }

    #[test]
    fn norms_are_monotone_and_homogeneous(
        d in 1usize..=2,
        vals in prop::collection::vec(-5.0f64..5.0, 64),
        shrink in prop::collection::vec(0.0f64..=1.0, 64),
        lambda in -4.0f64..4.0,
        p in prop::sample::select(vec![1.0, 1.5, 2.0, 4.5, f64::INFINITY]),
        ball in any::<bool>(),
    ) {
        let g = grid(d, if d == 1 { 64 } else { 8 });
        let f = ScalarField::new(g, vals.clone()).unwrap();
        let small = ScalarField::new(g, vals.iter().zip(&shrink).map(|(v, s)| v * s).collect()).unwrap();
        let e = Exponent::finite(p).unwrap();
        let region = if ball { Region::Ball(2.0) } else { Region::Full };
        let nf = lp_norm(&f, e, region).unwrap();
        prop_assert!(lp_norm(&small, e, region).unwrap() <= nf * (1.0 + 1e-12));
        let scaled = lp_norm(&f.scaled(lambda), e, region).unwrap();
        prop_assert!((scaled - lambda.abs() * nf).abs() <= 1e-12 * (1.0 + lambda.abs() * nf));

        let series = FieldSeries::new(g, 0, vec![f.clone(), small.clone(), f.scaled(0.5)]);
        let smaller = FieldSeries::new(g, 0, vec![small.clone(), small.scaled(0.5), small.scaled(0.25)]);
        let c = Exponent::finite(2.0).unwrap();
        let ms = mixed_norm(&series, c, e).unwrap();
        prop_assert!(mixed_norm(&smaller, c, e).unwrap() <= ms * (1.0 + 1e-12));
        let msl = mixed_norm(&series.map(|v| v * lambda), c, e).unwrap();
        prop_assert!((msl - lambda.abs() * ms).abs() <= 1e-12 * (1.0 + lambda.abs() * ms));
    }

    #[test]
    fn summation_by_parts(d in 1usize..=3, seed_f in prop::collection::vec(-1.0f64..1.0, 4), seed_v in prop::collection::vec(-1.0f64..1.0, 4)) {
        let g = grid(d, 8);
        let f = smooth_field(g, &seed_f).map(|v| v * v - 0.3 * v);
        let v = smooth_drift(g, &seed_v);
        let lhs = f.inner(&divergence(&v));
        let rhs = -gradient(&f).inner(&v);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn mollification_conserves_mass(vals in prop::collection::vec(0.0f64..3.0, 128), eps in 0.13f64..2.0) {
        let g = grid(1, 128);
        let f = ScalarField::new(g, vals).unwrap();
        let k = Kernel::mollifier(&g, eps).unwrap();
        let out = convolve(&f, &k).unwrap();
        prop_assert!((out.integral() - f.integral()).abs() <= 1e-12 * f.integral().max(1.0));
        prop_assert!(out.min() >= 0.0);
    }

    #[test]
    fn conjugate_is_an_involution(num in 2i64..500, den in 1i64..250) {
        prop_assume!(num > den);
        let x = rational(num, den);
        prop_assert_eq!(conjugate(&conjugate(&x).unwrap()).unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn g_antiderivative_sandwich(alpha_den in 1i64..=8, alpha_num in 1i64..=8, z in 1.0f64..1e6) {
        prop_assume!(alpha_num <= alpha_den);
        let alpha = alpha_num as f64 / alpha_den as f64;
        let nl = Nonlinearity::new(alpha).unwrap();
        let ratio = nl.eval_G(z).unwrap() / z.powf(alpha + 1.0);
        let lower = nl.eval_G(1.0).unwrap().min(1.0 / (alpha + 1.0));
        let upper = 2f64.powf(1.0 - alpha) / (alpha + 1.0);
        prop_assert!(ratio >= lower * (1.0 - 1e-9) && ratio <= upper * (1.0 + 1e-9), "{lower} <= {ratio} <= {upper}");
    }

    #[test]
    fn canonical_witnesses_have_thetas_above_one(d in 3u32..=8, i in 1i64..=24, j in 1i64..=24) {
        prop_assume!(i <= j);
        let alpha = rational(i, j);
        let cert = certify(d, &alpha).unwrap();
        if let Some(w) = &cert.witness {
            prop_assert!(w.thetas.theta1 > Rational::one() && w.thetas.theta2 > Rational::one());
        }
        prop_assert_eq!(certify(d, &alpha).unwrap(), cert);
    }

    #[test]
    fn flux_form_conserves_mass(
        d in 1usize..=2,
        coef in prop::collection::vec(-1.0f64..1.0, 4),
        rho_coef in prop::collection::vec(-0.4f64..0.4, 4),
        sign in prop::sample::select(vec![DriftSign::Plus, DriftSign::Minus]),
    ) {
        let g = grid(d, if d == 1 { 64 } else { 24 });
        let b = smooth_drift(g, &coef);
        let mut rho = smooth_field(g, &rho_coef).map(|v| 1.0 + v);
        for _ in 0..20 {
            let next = forward_step(&b, &rho, sign);
            let before = compensated_sum(rho.values.iter().copied());
            let after = compensated_sum(next.values.iter().copied());
            let scale = compensated_sum(rho.values.iter().map(|v| v.abs()));
            prop_assert!((after - before).abs() <= 1e-14 * scale, "{} vs {}", after - before, scale);
            rho = next;
        }
    }

    #[test]
    fn density_stays_nonnegative(coef in prop::collection::vec(-1.0f64..1.0, 4), r in 0.5f64..2.0) {
        let g = GridSpec::new(1, 4.0, 64, 0.5, 0.4).unwrap();
        let b = smooth_drift(g, &coef);
        let rho0 = bump(g, &[0.0], r);
        let rho0 = rho0.scaled(1.0 / rho0.integral());
        let run = solve_forward(&vec![b; g.n_steps], &rho0, DriftSign::Plus, 0).unwrap();
        prop_assert!(run.min_value >= -1e-12, "min {}", run.min_value);
        prop_assert!(run.mass_drift <= 1e-12);
    }

    #[test]
    fn transpose_pairing_does_not_depend_on_the_step(coef in prop::collection::vec(-1.0f64..1.0, 4), cfl in 0.05f64..=0.4) {
        let coarse = GridSpec::new(1, 4.0, 64, 0.25, 0.4).unwrap();
        let fine = coarse.with_cfl(cfl).unwrap();
        prop_assert!(adjoint_pairing_matrix_check(&smooth_drift(coarse, &coef)) <= 1e-12);
        prop_assert!(adjoint_pairing_matrix_check(&smooth_drift(fine, &coef)) <= 1e-12);
    }

    #[test]
    fn larger_source_gives_larger_value(
        m in model_strategy(),
        base in prop::collection::vec(-1.0f64..1.0, 4),
        bumps in prop::collection::vec(0.0f64..2.0, 32),
        terminal in prop::collection::vec(-0.5f64..0.5, 4),
    ) {
        let g = GridSpec::new(1, 4.0, 32, 0.2, 0.4).unwrap();
        let g0 = smooth_field(g, &base);
        let g1 = ScalarField::new(g, g0.values.iter().zip(&bumps).map(|(a, b)| a + b).collect()).unwrap();
        let u_t = smooth_field(g, &terminal);
        let low = solve_backward(&m, &FieldSeries::constant_in_time(&g0), &u_t).unwrap().u;
        let high = solve_backward(&m, &FieldSeries::constant_in_time(&g1), &u_t).unwrap().u;
        for (lo, hi) in low.frames.iter().zip(&high.frames) {
            for (a, b) in lo.values.iter().zip(&hi.values) {
                prop_assert!(b >= &(a - 1e-12), "{b} < {a}");
            }
        }
    }
}
