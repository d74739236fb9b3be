//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line. Tolerances are pinned here and nowhere else; a failure
//! means the build does not meet its contract, not that the tolerance needs
//! adjusting.

mod common;

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use prolate_core::approx::{
    band_averaged_residual, effective_dimension, n_width, random_residual, random_residual_mc,
    SlepianBasis,
};
use prolate_core::fast_apply::{toeplitz_matvec, truncated_pinv_solve};
use prolate_core::group::{BandSpec, GroupSpec};
use prolate_core::operator::{
    periodic_prolate_operator, prolate_operator, prolate_operator_2d, toeplitz_from_impulse,
    toeplitz_from_symbol, Dims, Symbol,
};
use prolate_core::spectral::{
    dpss_basis_tridiagonal, eig_count, eig_hermitian, estimate_eigs_circulant,
    estimate_eigs_symbol_sampling, szego_report, transition_bound_dpss, ThetaFn,
};

fn verdict(num: u32, label: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {num:02} {label}: {status}");
    assert!(pass, "criterion {num:02} {label}: {detail}");
}

fn two_plus_cos() -> Symbol {
    Symbol::hermitian_trig(&[Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0)]).unwrap()
}

fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// 2NW is meant as an exact real; snap away the float dust so floor/ceil pick
// the intended indices when the product is an integer.
fn snapped_area(n: usize, w: f64) -> f64 {
    let a = 2.0 * n as f64 * w;
    if (a - a.round()).abs() < 1e-9 {
        a.round()
    } else {
        a
    }
}

#[test]
fn criterion_01_trace_laws() {
    const TOL_1D_PER_N: f64 = 1e-8;
    const TOL_2D: f64 = 1e-6;
    const BUDGET: Duration = Duration::from_secs(30);

    let start = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    for &(n, w) in &[(64usize, 0.1f64), (128, 0.25), (256, 0.4)] {
        let dec = eig_hermitian(&prolate_operator(n, w).unwrap()).unwrap();
        let sum: f64 = dec.eigenvalues().iter().sum();
        let gap = (sum - 2.0 * n as f64 * w).abs();
        pass &= gap <= TOL_1D_PER_N * n as f64;
        detail.push_str(&format!("1d({n},{w}) gap {gap:.3e}; "));
    }

    let (n, m, k) = (64usize, 32usize, 16usize);
    let dec = eig_hermitian(&periodic_prolate_operator(n, m, k).unwrap()).unwrap();
    let sum: f64 = dec.eigenvalues().iter().sum();
    let gap = (sum - (m * k) as f64 / n as f64).abs();
    pass &= gap <= TOL_1D_PER_N * m as f64;
    detail.push_str(&format!("cyclic({n},{m},{k}) gap {gap:.3e}; "));

    let dec = eig_hermitian(&prolate_operator_2d(16, 16, 0.25, 0.25).unwrap()).unwrap();
    let sum: f64 = dec.eigenvalues().iter().sum();
    let gap = (sum - 4.0 * 16.0 * 16.0 * 0.25 * 0.25).abs();
    pass &= gap <= TOL_2D;
    detail.push_str(&format!("2d gap {gap:.3e}; "));

    let elapsed = start.elapsed();
    pass &= elapsed < BUDGET;
    detail.push_str(&format!("elapsed {elapsed:.2?}"));
    verdict(1, "trace laws", pass, &detail);
}

#[test]
fn criterion_02_eigenvalue_clustering() {
    const N: usize = 1024;
    const W: f64 = 0.25;
    const TRANSITION_CAP: usize = 141;
    const BUDGET: Duration = Duration::from_secs(120);

    let start = Instant::now();
    let dec = eig_hermitian(&prolate_operator(N, W).unwrap()).unwrap();
    let transition = eig_count(&dec, 0.01, 0.99, false);
    // top count: upper end left open so rounding spill past 1 still lands in
    // the near-one bin
    let near_one = eig_count(&dec, 0.99, 2.0, true);
    let elapsed = start.elapsed();

    let expected_top = (2.0 * N as f64 * W) as i64;
    let top_gap = (near_one as i64 - expected_top).unsigned_abs() as usize;
    let pass = transition <= TRANSITION_CAP && top_gap <= TRANSITION_CAP && elapsed < BUDGET;
    verdict(
        2,
        "eigenvalue clustering",
        pass,
        &format!(
            "transition count {transition} (cap {TRANSITION_CAP}), near-one count {near_one} \
             (target {expected_top} +/- {TRANSITION_CAP}), elapsed {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_03_sum_of_squares_deficit() {
    const W: f64 = 0.2;
    const RATIO_CAP: f64 = 1.5;
    const CROSS_TOL: f64 = 1e-10;

    let mut deficits = Vec::new();
    for &n in &[256usize, 512, 1024] {
        let op = prolate_operator(n, W).unwrap();
        // Frobenius route gives the eigenvalue square sum without a solve
        deficits.push(2.0 * n as f64 * W - op.frobenius_sq());
    }
    // cross-check the Frobenius route against an actual solve at the small size
    let op = prolate_operator(256, W).unwrap();
    let dec = eig_hermitian(&op).unwrap();
    let sq: f64 = dec.eigenvalues().iter().map(|l| l * l).sum();
    let cross_gap = (sq - op.frobenius_sq()).abs();

    let r1 = deficits[1] / deficits[0];
    let r2 = deficits[2] / deficits[1];
    let pass = deficits.iter().all(|&d| d > 0.0)
        && r1 <= RATIO_CAP
        && r2 <= RATIO_CAP
        && cross_gap <= CROSS_TOL;
    verdict(
        3,
        "sum-of-squares deficit",
        pass,
        &format!(
            "deficits {deficits:.4?}, ratios {r1:.3} and {r2:.3} (cap {RATIO_CAP}), \
             route cross-gap {cross_gap:.2e}"
        ),
    );
}

#[test]
fn criterion_04_half_point_index() {
    let mut pass = true;
    let mut detail = String::new();
    for &(n, w) in &[(100usize, 0.2f64), (128, 0.25), (200, 0.11)] {
        let area = snapped_area(n, w);
        let lo_idx = area.floor() as usize - 1;
        let hi_idx = area.ceil() as usize;
        let dec = eig_hermitian(&prolate_operator(n, w).unwrap()).unwrap();
        let lam_lo = dec.eigenvalues()[lo_idx];
        let lam_hi = dec.eigenvalues()[hi_idx];
        pass &= lam_lo >= 0.5 && 0.5 >= lam_hi;
        detail.push_str(&format!(
            "({n},{w}): lambda[{lo_idx}]={lam_lo:.6} lambda[{hi_idx}]={lam_hi:.6}; "
        ));
    }
    verdict(4, "half-point index", pass, &detail);
}

#[test]
fn criterion_05_szego_convergence() {
    const TRACE_TOL: f64 = 1e-12;
    const SQUARE_ROW_AT_64: f64 = 0.0078125;
    const SQUARE_TOL: f64 = 1e-9;

    let sym = two_plus_cos();
    let mut pass = true;
    let mut detail = String::new();
    let mut cdf_64 = f64::NAN;
    let mut cdf_512 = f64::NAN;

    for &n in &[16usize, 32, 64, 128, 256, 512] {
        let dec = eig_hermitian(&toeplitz_from_symbol(&sym, n).unwrap()).unwrap();
        let report = szego_report(&dec, &sym, &[ThetaFn::X, ThetaFn::X2]).unwrap();
        let trace_gap = report.rows[0].abs_gap;
        pass &= trace_gap <= TRACE_TOL;
        if n == 64 {
            let square_gap = report.rows[1].abs_gap;
            pass &= (square_gap - SQUARE_ROW_AT_64).abs() <= SQUARE_TOL;
            detail.push_str(&format!("square row at 64: {square_gap:.10}; "));
            cdf_64 = report.cdf_distance;
        }
        if n == 512 {
            cdf_512 = report.cdf_distance;
        }
        detail.push_str(&format!("trace gap at {n}: {trace_gap:.2e}; "));
    }

    pass &= cdf_512 < cdf_64;
    detail.push_str(&format!("cdf distance {cdf_64:.4} -> {cdf_512:.4}"));
    verdict(5, "szego convergence", pass, &detail);
}

#[test]
fn criterion_06_band_residual_identity() {
    const TOL: f64 = 1e-6;

    let mut pass = true;
    let mut detail = String::new();
    for &(n, w, rank, grid) in &[(64usize, 0.25f64, 40usize, 1usize << 17), (128, 0.1, 30, 1 << 18)]
    {
        let dec = eig_hermitian(&prolate_operator(n, w).unwrap()).unwrap();
        let cols = dec.vectors().columns(0, rank).into_owned();
        let lhs = band_averaged_residual(
            &cols,
            &GroupSpec::IntLine,
            Dims::One(n),
            &BandSpec::Symmetric { half_width: w },
            grid,
        )
        .unwrap();
        let rhs = random_residual(&dec, rank, n, 2.0 * w).unwrap();
        let gap = (lhs - rhs).abs();
        pass &= gap <= TOL;
        detail.push_str(&format!("({n},{w},{rank}): quadrature {lhs:.8} vs spectral {rhs:.8}; "));
    }
    verdict(6, "band residual identity", pass, &detail);
}

#[test]
fn criterion_07_random_residual_monte_carlo() {
    const N: usize = 64;
    const W: f64 = 0.2;
    const DRAWS: usize = 100_000;
    const SEED: u64 = 0xACCE97;
    // once the span captures the whole band the residual sits below double
    // precision and the standard error collapses with it, so the statistical
    // yardstick gets a machine-precision floor
    const FP_FLOOR: f64 = 1e-12;

    let dec = eig_hermitian(&prolate_operator(N, W).unwrap()).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for &rank in &[10usize, 26, 40] {
        let basis = SlepianBasis::prolate(N, W, rank).unwrap();
        let analytic = random_residual(&dec, rank, N, 2.0 * W).unwrap();
        let mc = random_residual_mc(&basis, DRAWS, SEED + rank as u64).unwrap();
        let diff = (mc.mean - analytic).abs();
        pass &= diff <= (3.0 * mc.std_err).max(FP_FLOOR);
        detail.push_str(&format!(
            "rank {rank}: analytic {analytic:.6}, mc {:.6} +/- {:.1e} (diff {diff:.1e}); ",
            mc.mean, mc.std_err
        ));
    }
    verdict(7, "random residual monte carlo", pass, &detail);
}

#[test]
fn criterion_08_dimension_scaling() {
    const W: f64 = 0.1;
    const EPS: f64 = 0.01;

    let mut pass = true;
    let mut detail = String::new();
    for &n in &[128usize, 256, 512] {
        let dec = dpss_basis_tridiagonal(n, W, n).unwrap();
        let k = effective_dimension(&dec, EPS).unwrap();
        let area = 2.0 * n as f64 * W;
        let lower = area.ceil() as usize;
        let upper = area + 3.0 * (n as f64).ln() * (1.0 / (EPS * EPS)).ln();
        pass &= k >= lower && (k as f64) <= upper;
        detail.push_str(&format!("n {n}: K {k} in [{lower}, {upper:.1}]; "));
    }
    verdict(8, "dimension scaling", pass, &detail);
}

#[test]
fn criterion_09_separable_spectra() {
    const TOL: f64 = 1e-8;

    let op = prolate_operator_2d(16, 16, 0.25, 0.25).unwrap();
    let (fa, fb) = op.factors().unwrap();
    let da = eig_hermitian(fa).unwrap();
    let db = eig_hermitian(fb).unwrap();
    let mut products: Vec<f64> = da
        .eigenvalues()
        .iter()
        .flat_map(|&a| db.eigenvalues().iter().map(move |&b| a * b))
        .collect();
    products.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // independent dense route on the full 256 x 256 matrix
    let dense = op.to_dense();
    let real = DMatrix::<f64>::from_fn(dense.nrows(), dense.ncols(), |r, c| dense[(r, c)].re);
    let mut dense_vals: Vec<f64> = nalgebra::SymmetricEigen::new(real)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    dense_vals.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let diff = max_abs_gap(&products, &dense_vals);
    verdict(
        9,
        "separable spectra",
        diff < TOL,
        &format!("max abs diff {diff:.3e} over {} eigenvalues", products.len()),
    );
}

#[test]
fn criterion_10_eigenvalue_estimators() {
    let sym = two_plus_cos();
    let mut pass = true;
    let mut detail = String::new();
    let mut errs = Vec::new();
    for &n in &[64usize, 512] {
        let op = toeplitz_from_symbol(&sym, n).unwrap();
        let dec = eig_hermitian(&op).unwrap();
        let est = estimate_eigs_symbol_sampling(&sym, n).unwrap();
        let err = max_abs_gap(dec.eigenvalues(), &est);
        errs.push(err);
        detail.push_str(&format!("sampling error at {n}: {err:.4e}; "));

        let circ = estimate_eigs_circulant(&op).unwrap();
        let circ_diff = max_abs_gap(&circ.values, &est);
        pass &= circ_diff == 0.0 && !circ.wrap_overlap;
        detail.push_str(&format!("circulant diff at {n}: {circ_diff:e}; "));
    }
    pass &= errs[1] < errs[0];
    verdict(10, "eigenvalue estimators", pass, &detail);
}

#[test]
fn criterion_11_fast_apply() {
    const MATVEC_TOL: f64 = 1e-10;
    const RECOVERY_TOL: f64 = 1e-8;

    // FFT matvec against the dense product for a random Hermitian column
    let n = 512;
    let mut rng = common::TestRng::new(0x5EED_11);
    let mut two_sided = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    two_sided[n - 1] = Complex64::new(rng.uniform(), 0.0);
    for k in 1..n {
        let z = rng.complex();
        two_sided[n - 1 + k] = z;
        two_sided[n - 1 - k] = z.conj();
    }
    let op = toeplitz_from_impulse(&two_sided, n).unwrap();
    let x: Vec<Complex64> = (0..n).map(|_| rng.complex()).collect();
    let fast = toeplitz_matvec(&op, &x).unwrap();
    let direct = op.to_dense() * nalgebra::DVector::from_column_slice(&x);
    let matvec_diff = fast
        .iter()
        .zip(direct.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    // truncated pseudoinverse recovery of an in-span signal
    let rank = 20;
    let dec = eig_hermitian(&prolate_operator(64, 0.2).unwrap()).unwrap();
    let mut x = nalgebra::DVector::from_element(64, Complex64::new(0.0, 0.0));
    for l in 0..rank {
        x.axpy(
            rng.complex(),
            &dec.vectors().column(l).clone_owned(),
            Complex64::new(1.0, 0.0),
        );
    }
    let signal: Vec<Complex64> = x.as_slice().to_vec();
    let y = toeplitz_matvec(&prolate_operator(64, 0.2).unwrap(), &signal).unwrap();
    let solve = truncated_pinv_solve(&dec, &y, rank).unwrap();
    let err: f64 = solve
        .solution
        .iter()
        .zip(signal.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / x.norm();

    let pass = matvec_diff <= MATVEC_TOL && err <= RECOVERY_TOL;
    verdict(
        11,
        "fast apply",
        pass,
        &format!("matvec diff {matvec_diff:.3e}, in-span recovery {err:.3e}"),
    );
}

#[test]
fn criterion_12_asymptotic_surrogates() {
    // The limiting statements are replaced by finite-size trend and bound
    // checks: transition counts stay under the nonasymptotic bound and grow
    // sublinearly, widths decay monotonically, and the eigenvalue density
    // approaches twice the bandwidth.
    let mut pass = true;
    let mut detail = String::new();

    // transition growth at W = 0.2, eps = 0.05
    let mut counts = Vec::new();
    for &n in &[64usize, 128, 256] {
        let dec = eig_hermitian(&prolate_operator(n, 0.2).unwrap()).unwrap();
        let c = eig_count(&dec, 0.05, 0.95, false);
        let bound = transition_bound_dpss(n, 0.05).unwrap();
        pass &= (c as f64) <= bound;
        counts.push(c);
    }
    let growth_cap =
        (transition_bound_dpss(256, 0.05).unwrap() - transition_bound_dpss(64, 0.05).unwrap())
            .ceil() as usize;
    pass &= counts[2] >= counts[0] && counts[2] - counts[0] <= growth_cap;
    detail.push_str(&format!("transition counts {counts:?} (growth cap {growth_cap}); "));

    // width monotonicity at (128, 0.2)
    let dec = eig_hermitian(&prolate_operator(128, 0.2).unwrap()).unwrap();
    let widths: Vec<f64> = (0..dec.len()).map(|i| n_width(&dec, i).unwrap()).collect();
    pass &= widths.windows(2).all(|p| p[1] <= p[0] + 1e-12);
    pass &= *widths.last().unwrap() <= 1e-3;
    detail.push_str(&format!("final width {:.2e}; ", widths.last().unwrap()));

    // density deviation shrinks at W = 0.1, eps = 0.01
    let mut devs = Vec::new();
    for &n in &[128usize, 256, 512] {
        let basis = dpss_basis_tridiagonal(n, 0.1, n).unwrap();
        let k = effective_dimension(&basis, 0.01).unwrap();
        devs.push((k as f64 - 2.0 * n as f64 * 0.1) / n as f64);
    }
    pass &= devs[1] < devs[0] && devs[2] < devs[1];
    detail.push_str(&format!("density deviations {devs:.4?}"));

    verdict(12, "asymptotic surrogates", pass, &detail);
}
