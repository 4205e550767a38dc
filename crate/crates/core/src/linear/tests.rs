use super::*;
use crate::hyperfn::HGSpec;
use crate::matrix::Matrix;
use crate::params::modulo;
use crate::scalar::ratio;
use num_traits::Zero;
use proptest::prelude::*;

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn demo_n1() -> ParameterSet {
    ParameterSet::new(1, vec![re(0.13), re(0.21), re(0.29), re(0.37)], re(0.0), Kind::Generic).unwrap()
}

#[test]
fn fuchsian_n1_matrices() {
    let p = demo_n1();
    let s = build_fuchsian(&p).unwrap();
    let [a0, a1, a2, a3] = [0.13, 0.21, 0.29, 0.37].map(re);
    let want0 = Matrix::from_rows(vec![vec![-(a2 + a3), a3], vec![re(0.0), re(0.0)]]).unwrap();
    let want1 = Matrix::from_rows(vec![vec![a1, a3], vec![a1, a3]]).unwrap();
    assert!(s.a0.sub(&want0).max_abs() < 1e-15);
    assert!(s.a1.sub(&want1).max_abs() < 1e-15);
    let _ = a0;
}

#[test]
fn fuchsian_n2_diagonal() {
    let p = ParameterSet::sample_generic(2, 4).unwrap();
    let s = build_fuchsian(&p).unwrap();
    let a = |i: usize| p.alphas()[i];
    let want = [-(a(2) + a(3) + a(4) + a(5)), -(a(4) + a(5)), re(0.0)];
    for (d, w) in s.a0.diagonal().iter().zip(want) {
        assert!(close(*d, w, 1e-15));
    }
    assert!(s.a0.is_upper_triangular(0.0));
    assert_eq!(s.a1.rank(1e-12), 1);
}

#[test]
fn structural_spectra_match_listed_exponents() {
    for n in 1..=4 {
        let p = ParameterSet::sample_generic(n, 10 + n as u64).unwrap();
        let spec = build_fuchsian(&p).unwrap().spectra().unwrap();
        assert!(spec.distance(&listed_exponents(&p)) < 1e-14);
        assert!(spec.exponent_sum().norm() < 1e-13);
    }
}

#[test]
fn dual_n1_matrices() {
    let p = demo_n1();
    let s = build_dual(&p).unwrap();
    let [_, a1, a2, a3] = [0.13, 0.21, 0.29, 0.37].map(re);
    let want0 = Matrix::from_rows(vec![vec![a2 + a3, re(0.0)], vec![a3, a3]]).unwrap();
    let want1 = Matrix::from_rows(vec![vec![-a1, -a1], vec![a3, a3]]).unwrap();
    assert!(s.a0.sub(&want0).max_abs() < 1e-15);
    assert!(s.a1.sub(&want1).max_abs() < 1e-15);
}

#[test]
fn dual_residue_traces_cancel() {
    for n in 1..=3 {
        let p = ParameterSet::sample_generic(n, 30 + n as u64).unwrap();
        let s = build_dual(&p).unwrap();
        let at_inf = s.a1.sub(&s.a0);
        let total = s.a0.trace() - s.a1.trace() + at_inf.trace();
        assert!(total.norm() < 1e-14);
    }
}

#[test]
fn confluent_matrices() {
    let p = ParameterSet::sample_degenerate(1, 2, 3).unwrap();
    let s = build_confluent(&p).unwrap();
    let want1 = Matrix::from_rows(vec![vec![re(0.0), re(0.0)], vec![re(1.0), re(0.0)]]).unwrap();
    assert!(s.a1.sub(&want1).max_abs() == 0.0);
    assert_eq!(s.a0[(0, 1)], re(1.0));

    let p = ParameterSet::sample_degenerate(2, 1, 3).unwrap();
    let s = build_confluent(&p).unwrap();
    for i in 0..3 {
        assert_eq!(s.a1[(i, 0)], re(1.0));
        assert_eq!(s.a1[(i, 1)], re(0.0));
    }
    assert!(build_confluent(&ParameterSet::sample_generic(2, 1).unwrap()).is_err());
}

#[test]
fn confluent_diagonal_uses_surviving_parameters() {
    let p = ParameterSet::sample_degenerate(3, 2, 8).unwrap();
    let s = build_confluent(&p).unwrap();
    let n = 3i64;
    for i in 0..3i64 {
        let odd: C64 = (i + 1..=n).map(|j| *p.alpha(2 * j + 1)).sum();
        let even: C64 = ((i + 1).max(2)..=n).map(|j| *p.alpha(2 * j)).sum();
        assert!(close(s.a0[(i as usize, i as usize)], -(odd + even), 1e-14));
    }
}

#[test]
fn linear_confluence_is_first_order() {
    for n in 1..=3 {
        for r in 1..=n + 1 {
            let p = ParameterSet::sample_degenerate(n, r, 5).unwrap();
            let x: Vec<C64> = (0..=n).map(|i| re(0.3 + 0.2 * i as f64)).collect();
            let e3 = linear_confluence_error(&p, 1e-3, 0.7, &x).unwrap();
            let e4 = linear_confluence_error(&p, 1e-4, 0.7, &x).unwrap();
            let order = (e3 / e4).log10();
            assert!(e4 < 1e-3, "n={n} r={r} e4={e4}");
            assert!((0.8..=1.2).contains(&order), "n={n} r={r} order={order}");
        }
    }
}

#[test]
fn gauge_transform_reproduces_shifted_system() {
    for n in 1..=4 {
        let p = ParameterSet::sample_generic(n, 50 + n as u64).unwrap();
        let sys = build_fuchsian(&p).unwrap();
        for k in 0..=n {
            let g = gauge_transform(&sys, k).unwrap();
            let s = shifted_system(&p, k).unwrap();
            assert!(g.a0.sub(&s.a0).max_abs() < 1e-14, "n={n} k={k}");
            assert!(g.a1.sub(&s.a1).max_abs() < 1e-14, "n={n} k={k}");
        }
    }
}

#[test]
fn gauge_transform_exact() {
    let p = sample_rational(2, 89, 3).unwrap();
    let sys = build_fuchsian(&p).unwrap();
    for k in 0..=2 {
        assert_eq!(gauge_transform(&sys, k).unwrap(), shifted_system(&p, k).unwrap());
    }
}

#[test]
fn gauge_n1_k0_diagonal() {
    let p = demo_n1();
    let s = shifted_system(&p, 0).unwrap();
    // -α_4^1 = -(α_0 + α_1) with indices mod 4
    assert!(close(s.a0[(0, 0)], re(-(0.13 + 0.21)), 1e-15));
    assert_eq!(s.a0[(1, 1)], re(0.0));
    assert!(s.a0.is_upper_triangular(0.0));
}

#[test]
fn shifted_diagonals_are_shifted_partial_sums() {
    let p = ParameterSet::sample_generic(3, 2).unwrap();
    for k in 0..=3i64 {
        let s = shifted_system(&p, k as usize).unwrap();
        for i in 0..3i64 {
            let want = -p.partial_sum(2 * k + 2 * i + 4, 5 - 2 * i);
            assert!(close(s.a0[(i as usize, i as usize)], want, 1e-15));
        }
    }
}

#[test]
fn gauge_maps_solutions_to_solutions() {
    let p = ParameterSet::sample_generic(2, 9).unwrap();
    let sys = build_fuchsian(&p).unwrap();
    for k in 0..=2 {
        let sys_k = shifted_system(&p, k).unwrap();
        let sol = fundamental_solution(&p, k, 4).unwrap();
        for &t in &[0.1, 0.3, 0.5] {
            let h = FD_STEP;
            let at = |s: f64| apply_gauge(&p, k, s, &sol.eval(s).unwrap());
            let (xp, xm, x) = (at(t + h), at(t - h), at(t));
            let d: Vec<C64> = xp.iter().zip(&xm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let f = sys_k.field(re(t), &x).unwrap();
            let diff: Vec<C64> = d.iter().zip(&f).map(|(a, b)| a - b).collect();
            assert!(norm_inf(&diff) / norm_inf(&x) < 1e-9, "k={k} t={t}");
            let back = undo_gauge(&p, k, t, &x);
            let orig = sol.eval(t).unwrap();
            assert!(orig.iter().zip(&back).all(|(a, b)| close(*a, *b, 1e-13 * norm_inf(&orig))));
        }
        let _ = &sys;
    }
}

#[test]
fn recurrence_kernel_and_ranks() {
    for n in 1..=4 {
        let p = ParameterSet::sample_generic(n, 70 + n as u64).unwrap();
        for k in 0..=n {
            let s = shifted_system(&p, k).unwrap();
            let coeffs = solve_recurrence(&s, 6).unwrap();
            assert!(norm_inf(&s.a0.mul_vec(&coeffs[0])) < 1e-13);
            assert_eq!(s.a0.rank(1e-10), n);
            for i in 0..6 {
                assert_eq!(s.a0.shift_diagonal(&re(i as f64 + 1.0)).rank(1e-10), n + 1);
            }
        }
    }
}

#[test]
fn recurrence_matches_closed_form_n1_k1() {
    let p = demo_n1();
    let rec = recurrence_solution(&p, 1, 10).unwrap();
    let cf = closed_form_solution(&p, 1, 10).unwrap();
    for (a, b) in rec.coeffs.iter().zip(&cf.coeffs) {
        for (x, y) in a.iter().zip(b) {
            assert!(close(*x, *y, 1e-12 * y.norm().max(1.0)));
        }
    }
}

#[test]
fn closed_form_satisfies_recursion_exactly() {
    for n in 1..=3 {
        let p = sample_rational(n, 97, n as u64).unwrap();
        for k in 0..=n {
            let s = shifted_system(&p, k).unwrap();
            let coeffs = closed_form_coeffs(&p, k, 21).unwrap();
            assert!(recurrence_residuals(&s, &coeffs).iter().flatten().all(Zero::is_zero), "n={n} k={k}");
            assert_eq!(solve_recurrence(&s, 21).unwrap(), coeffs);
        }
    }
}

#[test]
fn closed_form_first_vector_ends_in_one() {
    let p = ParameterSet::sample_generic(3, 1).unwrap();
    for k in 0..=3 {
        let c = closed_form_coeffs(&p, k, 1).unwrap();
        assert_eq!(c[0][3], re(1.0));
    }
}

#[test]
fn closed_form_n1_k1_is_gauss_series() {
    let p = demo_n1();
    let cf = closed_form_coeffs(&p, 1, 12).unwrap();
    let [_, a1, a2, a3] = [0.13, 0.21, 0.29, 0.37];
    let gauss = HGSpec::from_reals(&[a1 + a2 + a3, a3], &[a2 + a3]);
    for i in 1..12 {
        let ratio = cf[i][1] / cf[i - 1][1];
        assert!(close(ratio, gauss.term_ratio(i), 1e-13));
    }
}

#[test]
fn theorem_n1_k1_second_component_is_gauss() {
    let p = demo_n1();
    let sol = fundamental_solution(&p, 1, 5).unwrap();
    let comps = sol.components.as_ref().unwrap();
    let [_, a1, a2, a3] = [0.13, 0.21, 0.29, 0.37];
    let want = HGSpec::from_reals(&[a1 + a2 + a3, a3], &[a2 + a3]);
    // original component 1 is f^{1,0}, gauge component n - 0 = 1
    assert_eq!(comps[1].l, 0);
    assert_eq!(comps[1].prefactor, re(1.0));
    for (a, b) in comps[1].spec.upper.iter().zip(&want.upper) {
        assert!(close(*a, *b, 1e-15));
    }
    assert!(close(comps[1].spec.lower[0], want.lower[0], 1e-15));
    assert_eq!(sol.exponent, re(0.0));
}

#[test]
fn theorem_matches_closed_form() {
    for n in 1..=4 {
        let p = ParameterSet::sample_generic(n, 90 + n as u64).unwrap();
        for k in 0..=n {
            let a = fundamental_solution(&p, k, 15).unwrap();
            let b = closed_form_solution(&p, k, 15).unwrap();
            for (u, v) in a.coeffs.iter().flatten().zip(b.coeffs.iter().flatten()) {
                assert!(close(*u, *v, 1e-12 * v.norm().max(1.0)), "n={n} k={k}");
            }
        }
    }
}

#[test]
fn fundamental_solutions_satisfy_system() {
    for n in 1..=3 {
        let p = ParameterSet::sample_generic(n, 20 + n as u64).unwrap();
        let sys = build_fuchsian(&p).unwrap();
        for k in 0..=n {
            let sol = fundamental_solution(&p, k, 30).unwrap();
            let cr = sol.coefficient_residual(&sys);
            assert!(cr < 1e-13, "n={n} k={k} cr={cr}");
            for &t in &[0.05, 0.2, 0.5] {
                let r = system_residual(&sol, &sys, t, FD_STEP).unwrap();
                assert!(r < 1e-8, "n={n} k={k} t={t} r={r}");
            }
        }
    }
}

#[test]
fn perturbed_solution_is_rejected() {
    let p = ParameterSet::sample_generic(2, 3).unwrap();
    let sys = build_fuchsian(&p).unwrap();
    let mut sol = fundamental_solution(&p, 1, 4).unwrap();
    if let Some(c) = sol.components.as_mut() {
        c[0].spec.upper[0] += re(0.1);
    }
    assert!(system_residual(&sol, &sys, 0.3, FD_STEP).unwrap() > 1e-4);
}

#[test]
fn solution_matrix_is_nonsingular() {
    let p = ParameterSet::sample_generic(3, 6).unwrap();
    let sols = all_fundamental_solutions(&p, 2).unwrap();
    let det = scaled_solution_matrix(&sols, 0.1).unwrap().determinant();
    assert!(det.norm() > 1e-6);
}

#[test]
fn solution_matrix_ignores_solution_normalization() {
    let p = ParameterSet::sample_generic(2, 9).unwrap();
    let sols = all_fundamental_solutions(&p, 0).unwrap();
    let mut scaled = sols.clone();
    for c in scaled[1].components.as_mut().unwrap() {
        c.prefactor *= re(1e4);
    }
    let a = scaled_solution_matrix(&sols, 0.2).unwrap().determinant();
    let b = scaled_solution_matrix(&scaled, 0.2).unwrap().determinant();
    assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
}

#[test]
fn mod_helper() {
    assert_eq!(mod_rank(5, 2), 2);
    assert_eq!(mod_rank(-1, 2), 2);
}

#[test]
fn confluent_solutions_satisfy_system() {
    for n in 1..=3 {
        for r in 1..=n + 1 {
            let p = ParameterSet::sample_degenerate(n, r, 40 + r as u64).unwrap();
            let sys = build_confluent(&p).unwrap();
            for k in 0..=n {
                let sol = confluent_fundamental_solution(&p, k, 30).unwrap();
                let comps = sol.components.as_ref().unwrap();
                assert_eq!(comps[n].prefactor, re(1.0));
                assert!(sol.coefficient_residual(&sys) < 1e-13, "n={n} r={r} k={k}");
                for &t in &[0.1, 0.7, 2.0] {
                    let res = system_residual(&sol, &sys, t, FD_STEP).unwrap();
                    assert!(res < 1e-8, "n={n} r={r} k={k} t={t} res={res}");
                }
            }
        }
    }
}

#[test]
fn unreduced_confluent_superscript_fails() {
    // n=2, r=1, k=2: the literal superscript 2k-2r+2i+2 exceeds 2n+1.
    let p = ParameterSet::sample_degenerate(2, 1, 11).unwrap();
    let sys = build_confluent(&p).unwrap();
    let mut sol = confluent_fundamental_solution(&p, 2, 20).unwrap();
    let (n, r, k) = (2i64, 1i64, 2i64);
    let comps = sol.components.as_mut().unwrap();
    for comp in comps.iter_mut() {
        for (idx, i) in (r..=n).enumerate() {
            let reduced = p.partial_sum(2 * r - 2 * i - 1, modulo(2 * k - 2 * r + 2 * i + 2, 2 * n + 2));
            let literal = p.partial_sum(2 * r - 2 * i - 1, 2 * k - 2 * r + 2 * i + 2);
            comp.spec.upper[idx] += literal - reduced;
        }
    }
    assert!(system_residual(&sol, &sys, 0.5, FD_STEP).unwrap() > 1e-4);
}

#[test]
fn corollary_parameters_n1() {
    let p = demo_n1();
    let [_, a1, a2, a3] = [0.13, 0.21, 0.29, 0.37];
    let s1 = component_ode_params(&p, 1).unwrap();
    assert!(close(s1.upper[0], re(a1 + a2 + a3), 1e-15));
    assert!(close(s1.upper[1], re(a3), 1e-15));
    assert!(close(s1.lower[0], re(a2 + a3), 1e-15));
    let s0 = component_ode_params(&p, 0).unwrap();
    assert!(close(s0.upper[1] - s1.upper[1], re(1.0), 1e-15));
    assert!(close(s0.lower[0] - s1.lower[0], re(1.0), 1e-15));
    assert_eq!(s0.upper[0], s1.upper[0]);
}

#[test]
fn corollary_confluent_shift_below_r() {
    let p = ParameterSet::sample_degenerate(2, 1, 2).unwrap();
    let s0 = component_ode_params(&p, 0).unwrap();
    let (n, r) = (2i64, 1i64);
    for (idx, j) in (r..=n).enumerate() {
        let base = p.partial_sum(2 * r - 2 * j - 1, modulo(2 * n - 2 * r + 2 * j + 2, 2 * n + 2));
        assert!(close(s0.upper[idx], base + re(1.0), 1e-15));
    }
}

#[test]
fn corollary_residuals() {
    for n in 1..=3 {
        let p = ParameterSet::sample_generic(n, 60 + n as u64).unwrap();
        for k in 0..=n {
            for i in 0..=n {
                for &t in &[0.1, 0.5] {
                    let r = component_ode_residual(&p, k, i, re(t), 1e-15).unwrap();
                    assert!(r < 1e-9, "n={n} k={k} i={i} r={r}");
                }
            }
        }
        for r in 1..=n + 1 {
            let p = ParameterSet::sample_degenerate(n, r, 61).unwrap();
            for k in 0..=n {
                for i in 0..=n {
                    let res = component_ode_residual(&p, k, i, re(0.8), 1e-15).unwrap();
                    assert!(res < 1e-9, "n={n} r={r} k={k} i={i} res={res}");
                }
            }
        }
    }
}

#[test]
fn specialization_kind_checks() {
    let g = ParameterSet::sample_generic(1, 1).unwrap();
    assert!(matches!(gauge_transform(&build_fuchsian(&g).unwrap(), 2), Err(Error::InvalidParameters(_))));
    let rational = ParameterSet::new(1, vec![ratio(1, 4); 4], ratio(0, 1), Kind::Generic).unwrap();
    assert!(build_fuchsian(&rational).unwrap().a1.rank(0.0) == 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]
    #[test]
    fn recurrence_equals_closed_form(seed in 0u64..1000, n in 1usize..=4) {
        let p = ParameterSet::sample_generic(n, seed).unwrap();
        for k in 0..=n {
            let rec = recurrence_solution(&p, k, 21).unwrap();
            let cf = closed_form_solution(&p, k, 21).unwrap();
            for (a, b) in rec.coeffs.iter().flatten().zip(cf.coeffs.iter().flatten()) {
                prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
            }
        }
    }
}
