mod common;

use airan::linalg::CMatrix;
use airan::pa::LinkChain;
use airan::precoder::{
    ee_sweep, energy_efficiency, project_affine_zf, rnn_precode, sweep_csv, zf_min_norm, PeakPenalty, RnnConfig,
    SweepConfig,
};
use airan::rng::{complex_gaussian, RngStream};
use airan::waveform::{gen_channel, random_qpsk, ChannelGrid};
use common::{adjoint, gauss_solve, matmul, matvec, max_abs_diff, norm, null_space_basis, Dense};
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

fn dense(h: &CMatrix) -> Dense {
    (0..h.rows()).map(|r| h.row(r).to_vec()).collect()
}

fn random_vec(rng: &mut impl rand::Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
}

/// `H^H (H H^H)^-1 s` by elimination on the normal equations.
fn oracle_min_norm(h: &Dense, s: &[Complex64]) -> Vec<Complex64> {
    let hh = adjoint(h);
    matvec(&hh, &gauss_solve(&matmul(h, &hh), s))
}

fn check_zf(m: usize, n: usize, stream: RngStream) {
    let channel = gen_channel(m, n, 1, stream.child(0)).unwrap();
    let s = random_qpsk(&mut stream.child(1).generator(), m);
    let s_grid = Array2::from_shape_vec((m, 1), s.clone()).unwrap();
    let sol = zf_min_norm(&channel, &s_grid).unwrap();
    let x = sol.x_grid.row(0).to_vec();
    let h = dense(channel.matrix(0));
    let residual = max_abs_diff(&matvec(&h, &x), &s);
    assert!(residual < 1e-9, "{m}x{n}: residual {residual}");
    assert!(sol.zf_residual < 1e-9);
    let expect = oracle_min_norm(&h, &s);
    assert!((norm(&x) - norm(&expect)).abs() < 1e-9 * norm(&expect), "{m}x{n}");
    assert!(max_abs_diff(&x, &expect) < 1e-9 * norm(&expect), "{m}x{n}");
    assert!(sol.objective_trace.is_empty());
}

#[test]
fn zf_matches_normal_equations_on_systems_up_to_4x16() {
    let mut count = 0;
    for m in 1..=4 {
        for n in m..=16 {
            check_zf(m, n, RngStream::new(100 + count, 0));
            count += 1;
        }
    }
    assert!(count >= 50);
    for t in 0..50 {
        check_zf(1 + t % 4, 16, RngStream::new(7, t as u64));
    }
}

#[test]
fn zf_seed_3_4x16() {
    check_zf(4, 16, RngStream::new(3, 0));
}

#[test]
fn zf_per_subcarrier_grid() {
    let channel = gen_channel(3, 8, 16, RngStream::new(11, 0)).unwrap();
    let s_grid = Array2::from_shape_vec((3, 16), random_qpsk(&mut RngStream::new(11, 1).generator(), 48)).unwrap();
    let sol = zf_min_norm(&channel, &s_grid).unwrap();
    for k in 0..16 {
        let s = s_grid.column(k).to_vec();
        let expect = oracle_min_norm(&dense(channel.matrix(k)), &s);
        assert!(max_abs_diff(&sol.x_grid.row(k).to_vec(), &expect) < 1e-10);
    }
    assert_eq!(sol.antenna_waveforms.len(), 8);
    assert_eq!(sol.papr_per_antenna_db.len(), 8);
}

#[test]
fn projection_displacement_is_orthogonal_to_null_space() {
    for seed in 0..5 {
        let mut g = RngStream::new(seed, 0).generator();
        let h = CMatrix::from_fn(2, 8, |_, _| complex_gaussian(&mut g, 1.0));
        let x = random_vec(&mut g, 8);
        let s = random_vec(&mut g, 2);
        let p = project_affine_zf(&x, &h, &s).unwrap();
        let hd = dense(&h);
        assert!(max_abs_diff(&matvec(&hd, &p), &s) < 1e-10);
        let d: Vec<Complex64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
        let basis = null_space_basis(&hd);
        assert_eq!(basis.len(), 6);
        for q in &basis {
            assert!(max_abs_diff(&matvec(&hd, q), &[Complex64::new(0.0, 0.0); 2]) < 1e-10);
            let ip: Complex64 = q.iter().zip(&d).map(|(a, b)| a.conj() * b).sum();
            assert!(ip.norm() < 1e-10 * norm(&d).max(1.0), "{ip}");
        }
        let pp = project_affine_zf(&p, &h, &s).unwrap();
        assert!(max_abs_diff(&pp, &p) < 1e-12);
    }
}

#[test]
fn peak_penalty_gradient_matches_central_differences() {
    let (n_c, n_t, h) = (128, 16, 1e-5);
    for seed in 0..5 {
        let mut g = RngStream::new(seed, 3).generator();
        let x = Array2::from_shape_fn((n_c, n_t), |_| complex_gaussian(&mut g, 1.0));
        let pen = PeakPenalty { tau: 1.5 };
        let (j, grad) = pen.evaluate(&x).unwrap();
        assert!(j > 0.0);
        for _ in 0..20 {
            let k = rand::Rng::random_range(&mut g, 0..n_c);
            let n = rand::Rng::random_range(&mut g, 0..n_t);
            for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                let mut xp = x.clone();
                xp[(k, n)] += dir * h;
                let mut xm = x.clone();
                xm[(k, n)] -= dir * h;
                let fd = (pen.evaluate(&xp).unwrap().0 - pen.evaluate(&xm).unwrap().0) / (2.0 * h);
                let an = if dir.re == 1.0 { grad[(k, n)].re } else { grad[(k, n)].im };
                assert!((fd - an).abs() <= 1e-4 * an.abs().max(fd.abs()).max(1e-6), "seed {seed} ({k},{n}): fd {fd} an {an}");
            }
        }
    }
}

#[test]
fn penalty_single_sample_reference() {
    let tau = 0.8;
    let y = [Complex64::new((2.0f64).sqrt() * tau, 0.0)];
    let (j, g) = PeakPenalty { tau }.time_domain(&y);
    assert!((j - tau.powi(4)).abs() < 1e-15);
    assert!((g[0].re - 4.0 * tau * tau * y[0].re).abs() < 1e-14);
}

fn problem(m: usize, n: usize, n_c: usize, seed: u64) -> (ChannelGrid, Array2<Complex64>) {
    let ch = gen_channel(m, n, n_c, RngStream::new(seed, 0)).unwrap();
    let s = Array2::from_shape_vec((m, n_c), random_qpsk(&mut RngStream::new(seed, 1).generator(), m * n_c)).unwrap();
    (ch, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_iterate_feasible_and_descending(seed in any::<u64>(), m in 1usize..4, extra in 1usize..6) {
        let (ch, s) = problem(m, m + extra, 32, seed);
        let sol = rnn_precode(&ch, &s, &RnnConfig::default()).unwrap();
        prop_assert!(sol.zf_residual < 1e-8);
        prop_assert!(sol.residual_trace.iter().all(|&r| r < 1e-8));
        prop_assert!(sol.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        prop_assert!(sol.iterations() <= RnnConfig::default().max_iters);
        let zf = zf_min_norm(&ch, &s).unwrap();
        prop_assert!(sol.papr_db <= zf.papr_db + 1e-9);
    }
}

#[test]
fn energy_efficiency_is_bits_over_joules_of_the_chain() {
    use airan::pa::{consumed_energy, measure_distortion, transmit};
    use airan::precoder::{EeSetup, PaSpec};
    use airan::waveform::SymbolGrid;

    let (ch, s) = problem(2, 8, 64, 0);
    let sol = rnn_precode(&ch, &s, &RnnConfig::default()).unwrap();
    let pa = PaSpec::default().params_for(sol.mean_antenna_power()).unwrap();
    let chain = LinkChain { cp_len: 16, sample_rate_hz: 64.0 * 15e3 };
    let setup = EeSetup { chain, noise_snr_db: 25.0 };
    let rng = RngStream::new(0, 9);
    let ee = energy_efficiency(&sol, &s, &ch, &pa, &setup, rng).unwrap();

    let tx = sol.antenna_grids();
    let users: Vec<SymbolGrid> = (0..2)
        .map(|u| SymbolGrid::full(s.row(u).to_owned().insert_axis(ndarray::Axis(1))))
        .collect();
    let report = measure_distortion(&tx, &users, &ch, &pa, &chain, 25.0, rng).unwrap();
    let bits: f64 = report.per_user_sinr.iter().map(|g| 64.0 * (1.0 + g).log2()).sum();
    let joules: f64 = transmit(&tx, &pa, &chain).unwrap().iter().map(|(i, _)| consumed_energy(i, &pa)).sum();
    assert_eq!(ee, bits / joules / 1e6);
}

#[test]
fn sweep_is_deterministic_and_skips_infeasible_pairs() {
    let cfg = SweepConfig { antennas: vec![4, 8], users: vec![2, 4], subcarriers: 32, trials: 2, ..Default::default() };
    let a = ee_sweep(&cfg, 5).unwrap();
    let b = ee_sweep(&cfg, 5).unwrap();
    assert_eq!(sweep_csv(&a), sweep_csv(&b));
    assert_eq!(a.rows.len(), 3);
    assert_eq!(a.warnings.len(), 1);
    assert_eq!((a.warnings[0].n_t, a.warnings[0].m_r), (4, 4));
    assert_ne!(sweep_csv(&a), sweep_csv(&ee_sweep(&cfg, 6).unwrap()));
}
