use super::*;
use crate::sampling::rng_from_seed;
use rand::Rng;

fn inst(terms: &[(&[f64], f64)]) -> GpInstance {
    let n = terms[0].0.len();
    GpInstance::new(
        n,
        terms
            .iter()
            .map(|(o, a)| GpTerm {
                omega: o.to_vec(),
                a: *a,
            })
            .collect(),
    )
    .unwrap()
}

fn random_instance(rng: &mut rand_chacha::ChaCha8Rng, max_dim: usize, max_terms: usize) -> GpInstance {
    let n = rng.gen_range(1..=max_dim);
    let count = rng.gen_range(2..=max_terms);
    let terms = (0..count)
        .map(|_| GpTerm {
            omega: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            a: rng.gen_range(0.2..3.0),
        })
        .collect();
    GpInstance::new(n, terms).unwrap()
}

#[test]
fn value_grad_single_constant_term() {
    let i = inst(&[(&[0.0, 0.0], 1.0)]);
    for x in [[0.0, 0.0], [3.0, -7.5], [100.0, 40.0]] {
        let (v, g) = gp_value_grad(&i, &x).unwrap();
        assert!(v.abs() < 1e-14);
        assert!(norm(&g) < 1e-14);
    }
}

#[test]
fn value_grad_two_terms_at_origin() {
    let i = inst(&[(&[1.0, 0.0], 1.0), (&[2.0, 1.0], 1.0)]);
    let (v, g) = gp_value_grad(&i, &[0.0, 0.0]).unwrap();
    assert!((v - 2.0f64.ln()).abs() < 1e-14);
    assert!((g[0] - 1.5).abs() < 1e-14);
    assert!((g[1] - 0.5).abs() < 1e-14);
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(101);
    let mut max_err = 0.0f64;
    for _ in 0..100 {
        let i = random_instance(&mut rng, 6, 8);
        let x: Vec<f64> = (0..i.n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let (_, g) = gp_value_grad(&i, &x).unwrap();
        let h = 1e-5;
        for d in 0..i.n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[d] += h;
            xm[d] -= h;
            let (vp, _) = gp_value_grad(&i, &xp).unwrap();
            let (vm, _) = gp_value_grad(&i, &xm).unwrap();
            max_err = max_err.max((g[d] - (vp - vm) / (2.0 * h)).abs());
        }
    }
    assert!(max_err <= 1e-6, "max fd error {max_err}");
}

#[test]
fn value_grad_survives_extreme_shift() {
    // Exponent arguments around +-1e4; the max-shift keeps both the value
    // and the weights finite.
    let i = inst(&[(&[1.0], 1.0), (&[-1.0], 1.0)]);
    let (v, g) = gp_value_grad(&i, &[1e4]).unwrap();
    assert!((v - 1e4).abs() < 1e-9);
    assert!((g[0] - 1.0).abs() < 1e-12);
}

#[test]
fn smoothness_values() {
    let i = inst(&[(&[1.0, 0.0], 1.0), (&[2.0, 1.0], 1.0)]);
    assert_eq!(gp_smoothness(&i), 5.0);
    let z = inst(&[(&[0.0, 0.0], 2.0)]);
    assert_eq!(gp_smoothness(&z), 0.0);
    assert!(gp_descent(&z, &[0.0, 0.0], 5).is_err());
    // Matrix-scaling exponents carry the -(1/n, 1/m) shift, so the constant
    // is 2 - 1/n - 1/m rather than the unshifted 2.
    let ms = matscale_instance(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    assert!((gp_smoothness(&ms) - 1.0).abs() < 1e-14);
    let ms3 = matscale_instance(&[
        vec![1.0, 1.0, 1.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap();
    assert!((gp_smoothness(&ms3) - (2.0 - 2.0 / 3.0)).abs() < 1e-14);
}

#[test]
fn descent_bounded_case_drives_gradient_to_zero() {
    let i = inst(&[(&[1.0, 0.0], 1.0), (&[-1.0, 0.0], 1.0)]);
    let trace = gp_descent(&i, &[0.7, 0.3], 200).unwrap();
    assert!(trace.final_entry().grad_norm < 1e-10);
}

#[test]
fn descent_gradient_converges_to_min_norm_point() {
    let i = inst(&[(&[1.0, 0.0], 1.0), (&[2.0, 1.0], 1.0)]);
    let trace = gp_descent(&i, &[0.0, 0.0], 100_000).unwrap();
    let p = min_norm_oracle(&i.exponents()).unwrap();
    assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    let g = &trace.final_entry().grad;
    let err = norm(&[g[0] - p[0], g[1] - p[1]]);
    assert!(err <= 1e-3, "gradient vs oracle gap {err}");
    // x_i / i converges to -p* / L with L = 5.
    let k = trace.entries.len() - 1;
    let x = &trace.final_entry().x;
    assert!((x[0] / k as f64 + 0.2).abs() < 1e-3);
    assert!((x[1] / k as f64).abs() < 1e-3);
}

#[test]
fn descent_velocity_of_escape() {
    let i = inst(&[(&[1.0, 0.0], 1.0), (&[2.0, 1.0], 1.0)]);
    let l = gp_smoothness(&i);
    let p = min_norm_oracle(&i.exponents()).unwrap();
    let pn = norm(&p);
    assert!(pn > 0.1);
    let trace = gp_descent(&i, &[0.0, 0.0], 10_000).unwrap();
    let k = trace.entries.len() - 1;
    let moved = norm(&trace.final_entry().x);
    let expected = pn / l;
    let ratio = moved / (k as f64) / expected;
    assert!((0.95..=1.05).contains(&ratio), "velocity ratio {ratio}");
}

#[test]
fn recession_examples_and_weak_duality() {
    let i = inst(&[(&[1.0, 0.0], 1.0), (&[2.0, 1.0], 1.0)]);
    assert_eq!(gp_recession(&i, &[0.0, 0.0]), 0.0);
    assert_eq!(gp_recession(&i, &[-1.0, 0.0]), -1.0);

    let mut rng = rng_from_seed(7);
    let trace = gp_descent(&i, &[0.0, 0.0], 500).unwrap();
    let min_grad = trace
        .entries
        .iter()
        .map(|e| e.grad_norm)
        .fold(f64::INFINITY, f64::min);
    for _ in 0..100 {
        let mut u: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let un = norm(&u);
        if un < 1e-6 {
            continue;
        }
        u.iter_mut().for_each(|v| *v /= un);
        assert!(min_grad >= -gp_recession(&i, &u) - 1e-9);
    }
}

#[test]
fn stall_detector_cuts_run_short() {
    let i = inst(&[(&[1.0, 0.0], 1.0), (&[-1.0, 0.0], 1.0)]);
    let trace = gp_descent_with_options(
        &i,
        &[0.4, 0.0],
        GpDescentOptions {
            iters: 100_000,
            stall_window: Some(100),
        },
    )
    .unwrap();
    assert!(trace.entries.len() < 10_000, "stalled run still took {}", trace.entries.len());
}

#[test]
fn min_norm_oracle_examples() {
    let p = min_norm_oracle(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);

    let p = min_norm_oracle(&[vec![1.0, 0.0], vec![2.0, 1.0]]).unwrap();
    assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);

    let p = min_norm_oracle(&[vec![-1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!(p[0].abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
}

#[test]
fn min_norm_oracle_certificate_on_random_inputs() {
    let mut rng = rng_from_seed(211);
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let count = rng.gen_range(1..=12);
        let pts: Vec<Vec<f64>> = (0..count)
            .map(|_| (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let w = min_norm_oracle(&pts).unwrap();
        let wn = dot(&w, &w);
        for p in &pts {
            assert!(dot(p, &w) >= wn - 1e-9);
        }
    }
}

#[test]
fn matscale_single_entry_is_constant() {
    let i = matscale_instance(&[vec![3.0]]).unwrap();
    assert_eq!(i.terms.len(), 1);
    assert!(i.terms[0].omega.iter().all(|&w| w == 0.0));
    let (_, g) = gp_value_grad(&i, &[0.5, -0.5]).unwrap();
    assert!(norm(&g) < 1e-15);
}

#[test]
fn matscale_triangular_is_approximately_scalable() {
    let i = matscale_instance(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    assert_eq!(i.terms.len(), 3);
    let p = min_norm_oracle(&i.exponents()).unwrap();
    assert!(norm(&p) < 1e-9, "min-norm point should be the origin");
}

#[test]
fn matscale_blocked_matrix_matches_block_report() {
    // Row block sizes (1, 2), column blocks (2, 1).
    let i = matscale_instance(&[
        vec![1.0, 1.0, 1.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap();
    let p = min_norm_oracle(&i.exponents()).unwrap();
    let expected = [
        1.0 / 6.0,
        -1.0 / 12.0,
        -1.0 / 12.0,
        -1.0 / 12.0,
        -1.0 / 12.0,
        1.0 / 6.0,
    ];
    for (got, want) in p.iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "got {got} want {want}");
    }
}

#[test]
fn matscale_rejects_zero_lines() {
    assert!(matscale_instance(&[vec![0.0, 0.0], vec![1.0, 1.0]]).is_err());
    assert!(matscale_instance(&[vec![1.0, 0.0], vec![1.0, 0.0]]).is_err());
}

#[test]
fn gp_instance_json_shape() {
    let i = inst(&[(&[1.0, 0.0], 1.0)]);
    let text = serde_json::to_string(&i).unwrap();
    assert_eq!(text, r#"{"n":2,"terms":[{"omega":[1.0,0.0],"a":1.0}]}"#);
    let back: GpInstance = serde_json::from_str(&text).unwrap();
    back.validate().unwrap();
}
