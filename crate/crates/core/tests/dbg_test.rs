#[test]
fn dbg_sweep_fix() {
    use unbflow_core::opscale::*;
    use unbflow_core::hermlin::ComplexMatrix;
    use unbflow_core::sampling::{rng_from_seed, random_unitary};
    let mats = vec![
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap(),
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]).unwrap(),
    ];
    let mut rng = rng_from_seed(4242);
    let u = random_unitary(&mut rng, 3);
    let v = random_unitary(&mut rng, 3);
    let a = MatrixTuple::new(mats.iter().map(|m| u.mul(m).mul(&v.adjoint())).collect()).unwrap();
    let p: Vec<f64> = [1.0/6.0, -1.0/12.0, -1.0/12.0].iter().map(|x| x + 1.0/3.0).collect();
    let q: Vec<f64> = [-1.0/12.0, -1.0/12.0, 1.0/6.0].iter().map(|x| x + 1.0/3.0).collect();
    for iters in [400usize, 1000, 4000, 10000, 20000] {
        let t = match run_descent(&a, iters, iters) { Ok(t) => t, Err(e) => { eprintln!("k {iters}: ERR {e}"); continue; } };
        let e = t.final_entry();
        let r = check_pq_scaling(&t.final_normalized, &p, &q).unwrap();
        eprintln!("k {iters}: mu-exc {:+.3e} pq-res {:.3e} offdiag {:.3e} blocks {:?} d/k {:.6}",
            e.mu_norm - (1.0f64/12.0).sqrt(), r, e.offdiag_residual.unwrap_or(f64::NAN), e.blocks,
            e.distance_from_identity / iters as f64);
    }
}
