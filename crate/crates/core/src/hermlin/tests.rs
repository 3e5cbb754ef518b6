use super::*;
use crate::sampling::{
    random_hermitian, random_pd_unit_det, random_traceless_hermitian, random_unitary,
    rng_from_seed,
};

fn unitary_defect(u: &ComplexMatrix) -> f64 {
    u.adjoint().mul(u).sub(&ComplexMatrix::identity(u.cols())).frob_norm()
}

fn reconstruct(vals: &[f64], u: &ComplexMatrix) -> ComplexMatrix {
    spectral_apply(vals, u, |x| x)
}

#[test]
fn herm_eig_diagonal_input() {
    let h = HermitianMatrix::from_diag_real(&[3.0, 1.0]);
    let (vals, u) = herm_eig(&h, EigOrder::Ascending).unwrap();
    assert_eq!(vals, vec![1.0, 3.0]);
    // Diagonal input: eigenvectors are a permutation of the standard basis.
    for col in 0..2 {
        let entries: Vec<f64> = (0..2).map(|r| u[(r, col)].norm()).collect();
        assert!(entries.iter().filter(|&&v| (v - 1.0).abs() < 1e-12).count() == 1);
    }
    assert!(reconstruct(&vals, &u).sub(h.as_matrix()).frob_norm() < 1e-12);
}

#[test]
fn herm_eig_known_two_by_two() {
    let h =
        HermitianMatrix::project(&ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap())
            .unwrap();
    let (vals, _) = herm_eig(&h, EigOrder::Ascending).unwrap();
    assert!((vals[0] + 1.0).abs() < 1e-14);
    assert!((vals[1] - 1.0).abs() < 1e-14);
}

#[test]
fn herm_eig_reconstruction_random() {
    let mut rng = rng_from_seed(7);
    let h = random_hermitian(&mut rng, 6, 1.0);
    let (vals, u) = herm_eig(&h, EigOrder::Ascending).unwrap();
    let err = reconstruct(&vals, &u).sub(h.as_matrix()).frob_norm();
    assert!(err <= 1e-9 * h.frob_norm().max(1.0), "err {err}");
}

#[test]
fn herm_eig_invariant_sweep() {
    let mut rng = rng_from_seed(20240501);
    for trial in 0..1000 {
        let n = 1 + (trial % 12);
        let scale = if trial % 3 == 0 { 10.0 } else { 0.5 };
        let h = random_hermitian(&mut rng, n, scale);
        let (vals, u) = herm_eig(&h, EigOrder::Ascending).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(unitary_defect(&u) <= 1e-10, "orthogonality at trial {trial}");
        let err = reconstruct(&vals, &u).sub(h.as_matrix()).frob_norm();
        assert!(
            err <= 1e-9 * h.frob_norm().max(1.0),
            "reconstruction at trial {trial}: {err}"
        );
    }
}

#[test]
fn pd_sqrt_identity_and_diagonal() {
    let id = PdUnitDetMatrix::identity(3);
    let s = pd_sqrt(&id).unwrap();
    assert!(s.sub(&ComplexMatrix::identity(3)).frob_norm() < 1e-12);

    let x = PdUnitDetMatrix::new(HermitianMatrix::from_diag_real(&[4.0, 0.25])).unwrap();
    let s = pd_sqrt(&x).unwrap();
    assert!((s[(0, 0)].re - 2.0).abs() < 1e-12);
    assert!((s[(1, 1)].re - 0.5).abs() < 1e-12);
}

#[test]
fn pd_sqrt_multiply_back() {
    let mut rng = rng_from_seed(11);
    for _ in 0..20 {
        let x = random_pd_unit_det(&mut rng, 5, 2.0);
        let s = pd_sqrt(&x).unwrap();
        let err = s.mul(&s).sub(x.as_matrix()).frob_norm();
        assert!(err <= 1e-9 * x.as_matrix().frob_norm(), "err {err}");
    }
}

#[test]
fn geodesic_step_at_identity_is_exp() {
    let h = HermitianMatrix::from_diag_real(&[1.0, -1.0]);
    let x = geodesic_step(&PdUnitDetMatrix::identity(2), &h).unwrap();
    assert!((x.as_matrix()[(0, 0)].re - 1.0f64.exp()).abs() < 1e-10);
    assert!((x.as_matrix()[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-10);

    let mut rng = rng_from_seed(3);
    let k = random_traceless_hermitian(&mut rng, 4, 0.7);
    let via_step = geodesic_step(&PdUnitDetMatrix::identity(4), &k).unwrap();
    let direct = herm_exp(&k).unwrap();
    assert!(via_step.as_matrix().sub(&direct).frob_norm() < 1e-9);
}

#[test]
fn geodesic_step_zero_direction_fixes_point() {
    let mut rng = rng_from_seed(5);
    let x = random_pd_unit_det(&mut rng, 4, 1.5);
    let out = geodesic_step(&x, &HermitianMatrix::zero(4)).unwrap();
    assert!(out.as_matrix().sub(x.as_matrix()).frob_norm() < 1e-9);
}

#[test]
fn geodesic_step_keeps_manifold_invariants() {
    let mut rng = rng_from_seed(17);
    for _ in 0..25 {
        let x = random_pd_unit_det(&mut rng, 5, 2.0);
        let k = random_traceless_hermitian(&mut rng, 5, 1.0);
        let out = geodesic_step(&x, &k).unwrap();
        assert!(out.det_defect().unwrap() <= 1e-8);
        assert!(out.as_matrix().hermitian_defect() <= 1e-12);
    }
}

#[test]
fn geodesic_step_moves_by_local_norm() {
    // The step direction is parallel-transported to the identity, so the
    // distance traveled equals its Frobenius norm.
    let mut rng = rng_from_seed(23);
    for _ in 0..10 {
        let x = random_pd_unit_det(&mut rng, 4, 1.0);
        let k = random_traceless_hermitian(&mut rng, 4, 0.8);
        let out = geodesic_step(&x, &k).unwrap();
        let d = pd_distance(&out, &x).unwrap();
        assert!((d - k.frob_norm()).abs() <= 1e-8, "d {d} vs {}", k.frob_norm());
    }
}

#[test]
fn pd_distance_examples() {
    let mut rng = rng_from_seed(29);
    let x = random_pd_unit_det(&mut rng, 3, 2.0);
    assert!(pd_distance(&x, &x).unwrap() < 1e-9);

    let y = PdUnitDetMatrix::new(HermitianMatrix::from_diag_real(&[
        (2.0f64).exp(),
        (-2.0f64).exp(),
    ]))
    .unwrap();
    let d = pd_distance(&PdUnitDetMatrix::identity(2), &y).unwrap();
    assert!((d - 8.0f64.sqrt()).abs() < 1e-10);
}

#[test]
fn pd_distance_symmetry_and_triangle() {
    let mut rng = rng_from_seed(31);
    for _ in 0..15 {
        let a = random_pd_unit_det(&mut rng, 4, 1.5);
        let b = random_pd_unit_det(&mut rng, 4, 1.5);
        let c = random_pd_unit_det(&mut rng, 4, 1.5);
        let dab = pd_distance(&a, &b).unwrap();
        let dba = pd_distance(&b, &a).unwrap();
        assert!((dab - dba).abs() < 1e-9);
        let dac = pd_distance(&a, &c).unwrap();
        let dcb = pd_distance(&c, &b).unwrap();
        assert!(dab <= dac + dcb + 1e-9);
    }
}

#[test]
fn weyl_spec_conventions() {
    let (p, q) = weyl_spec(&HermitianMatrix::zero(2), &HermitianMatrix::zero(3)).unwrap();
    assert_eq!(p, vec![0.0, 0.0]);
    assert_eq!(q, vec![0.0, 0.0, 0.0]);

    let h =
        HermitianMatrix::project(&ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap())
            .unwrap();
    let (p, q) = weyl_spec(&h, &HermitianMatrix::zero(2)).unwrap();
    assert!((p[0] - 1.0).abs() < 1e-14 && (p[1] + 1.0).abs() < 1e-14);
    assert_eq!(q, vec![0.0, 0.0]);
}

#[test]
fn weyl_spec_unitary_invariance() {
    let mut rng = rng_from_seed(37);
    for _ in 0..10 {
        let h = random_hermitian(&mut rng, 5, 1.0);
        let g = random_hermitian(&mut rng, 3, 1.0);
        let (p, q) = weyl_spec(&h, &g).unwrap();
        let u = random_unitary(&mut rng, 5);
        let v = random_unitary(&mut rng, 3);
        let hc = HermitianMatrix::project(&u.mul(h.as_matrix()).mul(&u.adjoint())).unwrap();
        let gc = HermitianMatrix::project(&v.mul(g.as_matrix()).mul(&v.adjoint())).unwrap();
        let (pc, qc) = weyl_spec(&hc, &gc).unwrap();
        for (a, b) in p.iter().zip(&pc) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in q.iter().zip(&qc) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn cholesky_rejects_indefinite() {
    let h = HermitianMatrix::from_diag_real(&[1.0, -0.5]);
    assert!(matches!(
        cholesky(h.as_matrix()),
        Err(Error::NotPositiveDefinite { .. })
    ));
}

#[test]
fn complex_matrix_json_round_trip() {
    let m = ComplexMatrix::from_rows(vec![
        vec![C64::new(1.0, -2.0), C64::new(0.0, 0.5)],
        vec![C64::new(3.25, 0.0), C64::new(-1.0, 1.0)],
    ])
    .unwrap();
    let text = serde_json::to_string(&m).unwrap();
    assert_eq!(text, "[[[1.0,-2.0],[0.0,0.5]],[[3.25,0.0],[-1.0,1.0]]]");
    let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
    assert_eq!(back, m);
}

mod graded {
    use super::*;
    use crate::sampling::random_complex_matrix;
    use rand::Rng;

    /// Materializes `G e^{diag c}` (caller keeps the scales representable)
    /// and checks the factorization columnwise.
    fn check_factorization(g: &ComplexMatrix, c: &[f64]) {
        let n = g.rows();
        let (s, v, u) = graded_svd_log(g, c).unwrap();
        assert!(unitary_defect(&v) < 1e-10);
        assert!(unitary_defect(&u) < 1e-10);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let a = ComplexMatrix::from_fn(n, n, |i, j| g[(i, j)] * c[j].exp());
        // w_j = A v_j must equal e^{s_j} u_j; pairs orthogonal.
        let w = a.mul(&v);
        for j in 0..n {
            let norm: f64 = (0..n).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            assert!(
                (norm.ln() - s[j]).abs() < 1e-9,
                "log norm {} vs s {}",
                norm.ln(),
                s[j]
            );
            let scale = s[j].exp();
            if scale.is_finite() && scale > 1e-280 {
                for i in 0..n {
                    assert!(
                        (w[(i, j)] - u[(i, j)] * scale).norm() <= 1e-9 * scale,
                        "column {j} disagrees with U"
                    );
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut dot = C64::new(0.0, 0.0);
                for k in 0..n {
                    dot += w[(k, i)].conj() * w[(k, j)];
                }
                let bound = 1e-10 * (s[i] + s[j]).exp();
                assert!(dot.norm() <= bound.max(1e-280), "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn recovers_plain_svd() {
        let mut rng = rng_from_seed(41);
        for n in [1usize, 2, 3, 5, 8] {
            let g = random_complex_matrix(&mut rng, n, n);
            let c = vec![0.0; n];
            check_factorization(&g, &c);
        }
    }

    #[test]
    fn moderate_grading_matches_materialized() {
        let mut rng = rng_from_seed(43);
        for spread in [5.0, 40.0, 120.0] {
            for n in [2usize, 4, 6] {
                let g = random_complex_matrix(&mut rng, n, n);
                let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-spread..=spread)).collect();
                check_factorization(&g, &c);
            }
        }
    }

    #[test]
    fn crosses_the_asymptotic_branch() {
        // Spread straddles DELTA_DIRECT: both rotation branches execute.
        let mut rng = rng_from_seed(47);
        let n = 4;
        let g = random_complex_matrix(&mut rng, n, n);
        let c = vec![320.0, 100.0, -90.0, -330.0];
        check_factorization(&g, &c);
    }

    #[test]
    fn extreme_grading_stays_finite() {
        // Far beyond f64 range for e^c; expected spectrum is the diagonal of
        // a unit upper-triangular perturbation, i.e. s ~ c.
        let n = 4;
        let mut g = ComplexMatrix::identity(n);
        g[(0, 1)] = C64::new(0.3, -0.1);
        g[(1, 2)] = C64::new(-0.2, 0.05);
        g[(2, 3)] = C64::new(0.15, 0.2);
        let c = vec![1500.0, 500.0, -400.0, -1600.0];
        let (s, v, u) = graded_svd_log(&g, &c).unwrap();
        assert!(unitary_defect(&v) < 1e-10);
        assert!(unitary_defect(&u) < 1e-10);
        for (want, got) in c.iter().zip(&s) {
            assert!((want - got).abs() < 1e-6, "want {want} got {got}");
        }
    }

    #[test]
    fn grading_with_ties_and_permuted_scales() {
        let mut rng = rng_from_seed(53);
        let n = 5;
        let g = random_complex_matrix(&mut rng, n, n);
        let c = vec![-200.0, 10.0, 10.0, 240.0, -200.0];
        check_factorization(&g, &c);
    }
}
