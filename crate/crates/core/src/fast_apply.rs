//! Fast operator application and its consumers: circulant-embedding FFT
//! matvecs, truncated-pseudoinverse solves, and multitaper spectral
//! estimation.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{ProlateError, Result};
use crate::operator::{Dims, ToeplitzOperator};
use crate::spectral::{dpss_basis, EigenDecomposition};

/// Reusable fast applier for a one-dimensional Hermitian Toeplitz operator.
/// The first column is embedded into a circulant of power-of-two size
/// `P >= 2n - 1`; each apply costs two FFTs of length `P`.
pub struct ToeplitzApplier {
    n: usize,
    p: usize,
    column_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzApplier {
    pub fn new(op: &ToeplitzOperator) -> Result<Self> {
        let col = op.first_column().ok_or_else(|| {
            ProlateError::Config(
                "fast application embeds one-dimensional operators; apply separable factors axis by axis".into(),
            )
        })?;
        let n = col.len();
        let p = (2 * n - 1).next_power_of_two();
        let mut embedded = vec![Complex64::new(0.0, 0.0); p];
        embedded[0] = col[0];
        for k in 1..n {
            embedded[k] = col[k];
            embedded[p - k] = col[k].conj();
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(p);
        let inverse = planner.plan_fft_inverse(p);
        forward.process(&mut embedded);
        Ok(ToeplitzApplier {
            n,
            p,
            column_hat: embedded,
            forward,
            inverse,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(ProlateError::Dimension(format!(
                "vector length {} vs operator dimension {}",
                x.len(),
                self.n
            )));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.p];
        buf[..self.n].copy_from_slice(x);
        self.forward.process(&mut buf);
        for (b, c) in buf.iter_mut().zip(self.column_hat.iter()) {
            *b *= c;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.p as f64;
        Ok(buf[..self.n].iter().map(|z| z * scale).collect())
    }
}

/// Apply an operator to a vector in `O(n log n)`. Separable operators are
/// applied factor by factor along the axes of the row-major reshape.
pub fn toeplitz_matvec(op: &ToeplitzOperator, x: &[Complex64]) -> Result<Vec<Complex64>> {
    match op.dims() {
        Dims::One(_) => ToeplitzApplier::new(op)?.apply(x),
        Dims::Two(n1, n2) => {
            if x.len() != n1 * n2 {
                return Err(ProlateError::Dimension(format!(
                    "vector length {} vs operator dimension {}",
                    x.len(),
                    n1 * n2
                )));
            }
            let (fa, fb) = op.factors().expect("two-dimensional operators are separable");
            let aa = ToeplitzApplier::new(fa)?;
            let ab = ToeplitzApplier::new(fb)?;
            let mut grid = x.to_vec();
            // first factor acts along axis 0 (columns of the row-major grid)
            let mut col = vec![Complex64::new(0.0, 0.0); n1];
            for j in 0..n2 {
                for i in 0..n1 {
                    col[i] = grid[i * n2 + j];
                }
                let out = aa.apply(&col)?;
                for i in 0..n1 {
                    grid[i * n2 + j] = out[i];
                }
            }
            // second factor acts along axis 1 (contiguous rows)
            for i in 0..n1 {
                let row = grid[i * n2..(i + 1) * n2].to_vec();
                let out = ab.apply(&row)?;
                grid[i * n2..(i + 1) * n2].copy_from_slice(&out);
            }
            Ok(grid)
        }
    }
}

/// Outcome of a truncated-pseudoinverse solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// The regularized solution.
    pub solution: Vec<Complex64>,
    /// Number of spectral components actually inverted.
    pub rank_used: usize,
    /// Relative residual `||T x - y|| / ||y||` (0 for `y = 0`).
    pub residual: f64,
    /// Spectral mass left uninverted: the sum of the trailing eigenvalues.
    pub dropped_mass: f64,
}

const PINV_FLOOR: f64 = 1e-12;

/// Solve `T x = y` through the leading `rank` eigenpairs of a (full)
/// decomposition of `T`: `x = sum_{l < rank} <u_l, y> / lambda_l u_l`.
pub fn truncated_pinv_solve(
    dec: &EigenDecomposition,
    y: &[Complex64],
    rank: usize,
) -> Result<SolveReport> {
    if y.len() != dec.dim() {
        return Err(ProlateError::Dimension(format!(
            "right-hand side length {} vs operator dimension {}",
            y.len(),
            dec.dim()
        )));
    }
    if rank == 0 || rank > dec.len() {
        return Err(ProlateError::Parameter(format!(
            "rank must lie in 1..={}, got {rank}",
            dec.len()
        )));
    }
    if let Some(bad) = dec.eigenvalues()[..rank].iter().position(|&l| l <= PINV_FLOOR) {
        return Err(ProlateError::Rank(format!(
            "eigenvalue {bad} = {:.3e} is at or below the inversion floor {PINV_FLOOR:.0e}; retry with rank <= {bad}",
            dec.eigenvalues()[bad]
        )));
    }
    let yv = nalgebra::DVector::from_column_slice(y);
    let mut x = nalgebra::DVector::from_element(dec.dim(), Complex64::new(0.0, 0.0));
    for l in 0..rank {
        let u = dec.vectors().column(l);
        let coef = u.dotc(&yv) / Complex64::new(dec.eigenvalues()[l], 0.0);
        x.axpy(coef, &u.clone_owned(), Complex64::new(1.0, 0.0));
    }
    let solution: Vec<Complex64> = x.as_slice().to_vec();
    let tx = dec.apply(&solution)?;
    let y_norm = yv.norm();
    let residual = if y_norm == 0.0 {
        0.0
    } else {
        tx.iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / y_norm
    };
    let dropped_mass = dec.eigenvalues()[rank..].iter().sum();
    Ok(SolveReport {
        solution,
        rank_used: rank,
        residual,
        dropped_mass,
    })
}

/// How multitaper eigenspectra are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TaperWeighting {
    /// Plain average over tapers.
    #[default]
    Uniform,
    /// Weights proportional to the tapers' concentrations.
    Eigenvalue,
}

/// A multitaper power spectral density estimate on the grid `m / f_grid`.
#[derive(Debug, Clone)]
pub struct MultitaperEstimate {
    pub psd: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// Set when more tapers were requested than the concentration plateau
    /// holds (`K > ceil(2 N W)`); the extra tapers leak badly.
    pub noisy_tapers: bool,
}

/// Multitaper PSD of a signal: average of `|FFT(taper .* signal)|^2` over the
/// first `k` Slepian tapers, zero-padded onto `f_grid` frequencies.
pub fn multitaper_psd(
    signal: &[Complex64],
    w: f64,
    k: usize,
    f_grid: usize,
    weighting: TaperWeighting,
) -> Result<MultitaperEstimate> {
    let n = signal.len();
    if n == 0 {
        return Err(ProlateError::Parameter("empty signal".into()));
    }
    if k == 0 || k > n {
        return Err(ProlateError::Parameter(format!(
            "taper count must lie in 1..={n}, got {k}"
        )));
    }
    if f_grid < n {
        return Err(ProlateError::Resolution(format!(
            "frequency grid of {f_grid} points cannot resolve a length-{n} signal"
        )));
    }
    let tapers = dpss_basis(n, w, k)?;
    let noisy_tapers = k as f64 > (2.0 * n as f64 * w).ceil();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(f_grid);
    let mut psd = vec![0.0f64; f_grid];
    let weights: Vec<f64> = match weighting {
        TaperWeighting::Uniform => vec![1.0 / k as f64; k],
        TaperWeighting::Eigenvalue => {
            let total: f64 = tapers.eigenvalues().iter().sum();
            tapers.eigenvalues().iter().map(|&l| l / total).collect()
        }
    };
    let mut buf = vec![Complex64::new(0.0, 0.0); f_grid];
    for (taper_idx, &weight) in weights.iter().enumerate() {
        for z in buf.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        let taper = tapers.vectors().column(taper_idx);
        for t in 0..n {
            buf[t] = taper[t] * signal[t];
        }
        fft.process(&mut buf);
        for (acc, z) in psd.iter_mut().zip(buf.iter()) {
            *acc += weight * z.norm_sqr();
        }
    }
    let frequencies = (0..f_grid).map(|m| m as f64 / f_grid as f64).collect();
    Ok(MultitaperEstimate {
        psd,
        frequencies,
        noisy_tapers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{
        periodic_prolate_operator, prolate_operator, prolate_operator_2d, toeplitz_from_impulse,
    };
    use nalgebra::DVector;

    fn dense_apply(op: &ToeplitzOperator, x: &[Complex64]) -> Vec<Complex64> {
        let m = op.to_dense();
        let v = m * DVector::from_column_slice(x);
        v.as_slice().to_vec()
    }

    fn test_vector(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                Complex64::new(
                    ((i * 37 + 11) % 17) as f64 / 17.0 - 0.5,
                    ((i * 53 + 5) % 13) as f64 / 13.0 - 0.5,
                )
            })
            .collect()
    }

    #[test]
    fn fft_matvec_matches_dense_real() {
        let op = prolate_operator(33, 0.17).unwrap();
        let x = test_vector(33);
        let fast = toeplitz_matvec(&op, &x).unwrap();
        let slow = dense_apply(&op, &x);
        for i in 0..33 {
            assert!((fast[i] - slow[i]).norm() < 1e-12, "entry {i}");
        }
    }

    #[test]
    fn fft_matvec_matches_dense_complex() {
        let op = periodic_prolate_operator(24, 15, 7).unwrap();
        let x = test_vector(15);
        let fast = toeplitz_matvec(&op, &x).unwrap();
        let slow = dense_apply(&op, &x);
        for i in 0..15 {
            assert!((fast[i] - slow[i]).norm() < 1e-12, "entry {i}");
        }
    }

    #[test]
    fn fft_matvec_matches_dense_impulse() {
        let two_sided: Vec<Complex64> = vec![
            Complex64::new(0.3, -0.2),
            Complex64::new(-1.0, 0.5),
            Complex64::new(2.0, 0.0),
            Complex64::new(-1.0, -0.5),
            Complex64::new(0.3, 0.2),
        ];
        let op = toeplitz_from_impulse(&two_sided, 9).unwrap();
        let x = test_vector(9);
        let fast = toeplitz_matvec(&op, &x).unwrap();
        let slow = dense_apply(&op, &x);
        for i in 0..9 {
            assert!((fast[i] - slow[i]).norm() < 1e-12, "entry {i}");
        }
    }

    #[test]
    fn fft_matvec_matches_dense_separable() {
        let op = prolate_operator_2d(5, 7, 0.3, 0.21).unwrap();
        let x = test_vector(35);
        let fast = toeplitz_matvec(&op, &x).unwrap();
        let slow = dense_apply(&op, &x);
        for i in 0..35 {
            assert!((fast[i] - slow[i]).norm() < 1e-12, "entry {i}");
        }
    }

    #[test]
    fn matvec_rejects_wrong_length() {
        let op = prolate_operator(8, 0.2).unwrap();
        assert!(toeplitz_matvec(&op, &test_vector(7)).is_err());
    }

    #[test]
    fn pinv_recovers_in_span_signal() {
        let op = prolate_operator(24, 0.25).unwrap();
        let dec = crate::spectral::eig_hermitian(&op).unwrap();
        // y = T x0 with x0 in the span of the top eigenvectors
        let rank = 10;
        let mut x0 = vec![Complex64::new(0.0, 0.0); 24];
        for l in 0..rank {
            let u = dec.vectors().column(l);
            for i in 0..24 {
                x0[i] += u[i] * Complex64::new(1.0 + l as f64, -0.5);
            }
        }
        let y = toeplitz_matvec(&op, &x0).unwrap();
        let report = truncated_pinv_solve(&dec, &y, rank).unwrap();
        assert_eq!(report.rank_used, rank);
        let err: f64 = report
            .solution
            .iter()
            .zip(x0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = x0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / scale < 1e-8, "relative error {}", err / scale);
        assert!(report.residual < 1e-8, "residual {}", report.residual);
        let tail: f64 = dec.eigenvalues()[rank..].iter().sum();
        assert!((report.dropped_mass - tail).abs() < 1e-14);
    }

    #[test]
    fn pinv_rejects_tiny_eigenvalues() {
        let op = prolate_operator(32, 0.1).unwrap();
        let dec = crate::spectral::eig_hermitian(&op).unwrap();
        let y = test_vector(32);
        // deep in the tail the spectrum is far below the floor
        match truncated_pinv_solve(&dec, &y, 32) {
            Err(ProlateError::Rank(msg)) => assert!(msg.contains("rank <="), "{msg}"),
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn pinv_validates_rank_and_length() {
        let op = prolate_operator(8, 0.25).unwrap();
        let dec = crate::spectral::eig_hermitian(&op).unwrap();
        assert!(truncated_pinv_solve(&dec, &test_vector(8), 0).is_err());
        assert!(truncated_pinv_solve(&dec, &test_vector(8), 9).is_err());
        assert!(truncated_pinv_solve(&dec, &test_vector(7), 2).is_err());
    }

    #[test]
    fn multitaper_sinusoid_peaks_at_tone() {
        let n = 64;
        let f0 = 0.25;
        let signal: Vec<Complex64> = (0..n)
            .map(|t| crate::group::unit_phase(f0 * t as f64))
            .collect();
        let est = multitaper_psd(&signal, 0.05, 4, 256, TaperWeighting::Uniform).unwrap();
        assert!(!est.noisy_tapers);
        let peak = est
            .psd
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(
            (est.frequencies[peak] - f0).abs() <= 0.05,
            "peak at {} expected near {f0}",
            est.frequencies[peak]
        );
    }

    #[test]
    fn multitaper_flags_excess_tapers() {
        let signal = test_vector(32);
        // 2 N W = 6.4, so 7 tapers fit and 8 do not
        let ok = multitaper_psd(&signal, 0.1, 7, 64, TaperWeighting::Uniform).unwrap();
        assert!(!ok.noisy_tapers);
        let noisy = multitaper_psd(&signal, 0.1, 8, 64, TaperWeighting::Eigenvalue).unwrap();
        assert!(noisy.noisy_tapers);
    }

    #[test]
    fn multitaper_validates_grid() {
        let signal = test_vector(32);
        assert!(multitaper_psd(&signal, 0.1, 4, 16, TaperWeighting::Uniform).is_err());
        assert!(multitaper_psd(&[], 0.1, 1, 16, TaperWeighting::Uniform).is_err());
        assert!(multitaper_psd(&signal, 0.1, 0, 64, TaperWeighting::Uniform).is_err());
    }
}
