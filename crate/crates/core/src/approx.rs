//! Approximation-theoretic consequences of the spectrum: Kolmogorov
//! n-widths, effective dimensionality, degrees-of-freedom convergence,
//! band-averaged subspace residuals, and the sinusoid-representation rank.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ProlateError, Result};
use crate::group::{band_measure, unit_phase, BandSpec, GroupSpec};
use crate::operator::{
    autocorrelation_operator, periodic_prolate_operator, prolate_operator, prolate_operator_2d,
    Dims, Symbol, SymbolGrid,
};
use crate::spectral::{dpss_basis_tridiagonal, eig_hermitian, EigenDecomposition};

/// Leading span of a time-frequency limiting operator's eigenbasis, with the
/// provenance needed to average approximation residuals over its band.
#[derive(Debug, Clone)]
pub struct SlepianBasis {
    vectors: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
    group: GroupSpec,
    dims: Dims,
    band: BandSpec,
}

impl SlepianBasis {
    /// Take the leading `count` eigenpairs of a decomposition, recording the
    /// group, window shape, and band they belong to.
    pub fn from_decomposition(
        dec: &EigenDecomposition,
        count: usize,
        group: GroupSpec,
        dims: Dims,
        band: BandSpec,
    ) -> Result<Self> {
        if count > dec.len() {
            return Err(ProlateError::Index(format!(
                "basis of {count} vectors exceeds the {} available eigenpairs",
                dec.len()
            )));
        }
        if dims.total() != dec.dim() {
            return Err(ProlateError::Dimension(format!(
                "window of {} points vs decomposition dimension {}",
                dims.total(),
                dec.dim()
            )));
        }
        band_measure(&group, &band)?;
        let vectors = dec.vectors().columns(0, count).clone_owned();
        let gram = vectors.adjoint() * &vectors;
        for r in 0..count {
            for c in 0..count {
                let expect = if r == c { 1.0 } else { 0.0 };
                if (gram[(r, c)] - Complex64::new(expect, 0.0)).norm() > 1e-10 {
                    return Err(ProlateError::Validation(format!(
                        "basis columns {r} and {c} are not orthonormal"
                    )));
                }
            }
        }
        Ok(SlepianBasis {
            vectors,
            eigenvalues: dec.eigenvalues()[..count].to_vec(),
            group,
            dims,
            band,
        })
    }

    /// Leading `count` DPSS vectors for the symmetric band `[-W, W]`.
    pub fn prolate(n: usize, w: f64, count: usize) -> Result<Self> {
        let dec = eig_hermitian(&prolate_operator(n, w)?)?;
        Self::from_decomposition(
            &dec,
            count,
            GroupSpec::IntLine,
            Dims::One(n),
            BandSpec::Symmetric { half_width: w },
        )
    }

    /// Leading `count` PDPSS vectors: modulus `n`, window `m`, band of `k`
    /// DFT frequencies.
    pub fn periodic(n: usize, m: usize, k: usize, count: usize) -> Result<Self> {
        let dec = eig_hermitian(&periodic_prolate_operator(n, m, k)?)?;
        Self::from_decomposition(
            &dec,
            count,
            GroupSpec::cyclic(n)?,
            Dims::One(m),
            BandSpec::Index { count: k },
        )
    }

    /// Leading `count` two-dimensional Slepian vectors.
    pub fn prolate_2d(n1: usize, n2: usize, w1: f64, w2: f64, count: usize) -> Result<Self> {
        let dec = eig_hermitian(&prolate_operator_2d(n1, n2, w1, w2)?)?;
        Self::from_decomposition(
            &dec,
            count,
            GroupSpec::Product2d,
            Dims::Two(n1, n2),
            BandSpec::Product { w1, w2 },
        )
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of basis vectors.
    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn band(&self) -> &BandSpec {
        &self.band
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(ProlateError::Dimension(format!(
                "vector length {} vs basis dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let xv = nalgebra::DVector::from_column_slice(x);
        let coef = self.vectors.adjoint() * &xv;
        let y = &self.vectors * coef;
        Ok(y.as_slice().to_vec())
    }
}

/// Kolmogorov n-width of the band-limited-signal set: `sqrt(lambda_n)`.
/// Tiny negative eigenvalues (within -1e-10) clamp to zero.
pub fn n_width(dec: &EigenDecomposition, n: usize) -> Result<f64> {
    let lam = *dec.eigenvalues().get(n).ok_or_else(|| {
        ProlateError::Index(format!(
            "width index {n} out of range for {} eigenvalues",
            dec.len()
        ))
    })?;
    if lam < -1e-10 {
        return Err(ProlateError::Numeric(format!(
            "eigenvalue {n} = {lam:e} is too negative for a width"
        )));
    }
    Ok(lam.max(0.0).sqrt())
}

/// Effective dimensionality at level `eps`: the smallest `n` with
/// `d_n < eps`, i.e. the number of widths at or above `eps`.
pub fn effective_dimension(dec: &EigenDecomposition, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(ProlateError::Parameter(format!(
            "dimension level eps must be positive, got {eps}"
        )));
    }
    let mut count = 0;
    for n in 0..dec.len() {
        if n_width(dec, n)? >= eps {
            count += 1;
        }
    }
    Ok(count)
}

/// Width sequence plus effective dimensions at chosen levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DofReport {
    pub n_widths: Vec<f64>,
    /// `(eps, effective dimension)` pairs, sorted by increasing eps.
    pub eff_dim: Vec<(f64, usize)>,
    /// Grid-measured limit of the dimension-to-size ratio, when the report
    /// comes from a convergence study.
    pub limit_target: Option<f64>,
}

/// Full width/dimension report for a decomposition.
pub fn dof_report(dec: &EigenDecomposition, eps_levels: &[f64]) -> Result<DofReport> {
    let n_widths: Vec<f64> = (0..dec.len())
        .map(|n| n_width(dec, n))
        .collect::<Result<_>>()?;
    let mut eff_dim = Vec::with_capacity(eps_levels.len());
    for &eps in eps_levels {
        eff_dim.push((eps, effective_dimension(dec, eps)?));
    }
    eff_dim.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(DofReport {
        n_widths,
        eff_dim,
        limit_target: None,
    })
}

/// One size of a degrees-of-freedom convergence study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DofStudyRow {
    pub n: usize,
    pub eff_dim: usize,
    pub ratio: f64,
}

/// Degrees-of-freedom study across window sizes for a pulse's convolution
/// dictionary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DofStudy {
    pub eps: f64,
    /// Grid measure of `{xi : |phi_hat(xi)| > eps}`.
    pub limit: f64,
    pub rows: Vec<DofStudyRow>,
}

/// Track `N(W, eps) / N` across window sizes for the shift dictionary of a
/// pulse with spectrum `phi_hat`; the ratio converges to the measure of
/// `{|phi_hat| > eps}`.
pub fn dof_convergence_study(
    pulse_symbol: &SymbolGrid,
    eps: f64,
    sizes: &[usize],
) -> Result<DofStudy> {
    if !(eps > 0.0) {
        return Err(ProlateError::Parameter(format!(
            "dimension level eps must be positive, got {eps}"
        )));
    }
    if sizes.is_empty() {
        return Err(ProlateError::Parameter("empty size sweep".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ProlateError::Parameter(
            "size sweep must be strictly increasing".into(),
        ));
    }
    let magnitudes: Vec<f64> = pulse_symbol.samples().iter().map(|z| z.norm()).collect();
    let g = magnitudes.len();
    // the limit statement needs eps to avoid the pulse's level sets
    let flat_hits = magnitudes.iter().filter(|&&m| (m - eps).abs() <= 1e-12).count();
    if flat_hits >= (g / 1000).max(2) {
        return Err(ProlateError::Hypothesis(format!(
            "eps = {eps} sits on a level set of |phi_hat| ({flat_hits} of {g} grid samples)"
        )));
    }
    let limit = magnitudes.iter().filter(|&&m| m > eps).count() as f64 / g as f64;

    let pulse = Symbol::Grid(pulse_symbol.clone());
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let op = autocorrelation_operator(&pulse, n)?;
        let dec = eig_hermitian(&op)?;
        let eff = effective_dimension(&dec, eps)?;
        rows.push(DofStudyRow {
            n,
            eff_dim: eff,
            ratio: eff as f64 / n as f64,
        });
    }
    Ok(DofStudy { eps, limit, rows })
}

/// Band-averaged relative residual of unit characters against the span of
/// the given orthonormal columns:
/// `(1/|B|) integral over B of ||chi - P chi||^2 / ||chi||^2`.
///
/// Symmetric and product bands use trapezoid quadrature on a uniform grid of
/// at least `grid_size` nodes; cyclic index bands are finite and evaluated
/// exactly (the grid size still bounds below per the resolution contract).
pub fn band_averaged_residual(
    columns: &DMatrix<Complex64>,
    group: &GroupSpec,
    dims: Dims,
    band: &BandSpec,
    grid_size: usize,
) -> Result<f64> {
    let dim = columns.nrows();
    if dims.total() != dim {
        return Err(ProlateError::Dimension(format!(
            "window of {} points vs {dim} rows",
            dims.total()
        )));
    }
    if grid_size < 16 * dim {
        return Err(ProlateError::Resolution(format!(
            "band grid of {grid_size} nodes is too coarse for dimension {dim} (need >= {})",
            16 * dim
        )));
    }
    band_measure(group, band)?;
    match (group, band, dims) {
        (GroupSpec::IntLine, BandSpec::Symmetric { half_width }, Dims::One(n)) => {
            let captured = |f: f64| {
                let mut total = 0.0;
                for col in columns.column_iter() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (t, u) in col.iter().enumerate() {
                        acc += u.conj() * unit_phase(f * t as f64);
                    }
                    total += acc.norm_sqr();
                }
                total
            };
            let mut acc = 0.0;
            for i in 0..=grid_size {
                let f = -half_width + 2.0 * half_width * i as f64 / grid_size as f64;
                let weight = if i == 0 || i == grid_size { 0.5 } else { 1.0 };
                acc += weight * (1.0 - captured(f) / n as f64);
            }
            Ok(acc / grid_size as f64)
        }
        (GroupSpec::Cyclic { modulus }, BandSpec::Index { count }, Dims::One(m)) => {
            let mut acc = 0.0;
            for a in 0..*count {
                let mut total = 0.0;
                for col in columns.column_iter() {
                    let mut dot = Complex64::new(0.0, 0.0);
                    for (t, u) in col.iter().enumerate() {
                        dot += u.conj() * unit_phase(a as f64 * t as f64 / *modulus as f64);
                    }
                    total += dot.norm_sqr();
                }
                acc += 1.0 - total / m as f64;
            }
            Ok(acc / *count as f64)
        }
        (GroupSpec::Product2d, BandSpec::Product { w1, w2 }, Dims::Two(n1, n2)) => {
            let side = (grid_size as f64).sqrt().ceil() as usize;
            let mut acc = 0.0;
            let mut weight_total = 0.0;
            let mut character = vec![Complex64::new(0.0, 0.0); n1 * n2];
            for i in 0..=side {
                let f1 = -w1 + 2.0 * w1 * i as f64 / side as f64;
                let wi = if i == 0 || i == side { 0.5 } else { 1.0 };
                for j in 0..=side {
                    let f2 = -w2 + 2.0 * w2 * j as f64 / side as f64;
                    let wj = if j == 0 || j == side { 0.5 } else { 1.0 };
                    for a in 0..n1 {
                        let pa = unit_phase(f1 * a as f64);
                        for b in 0..n2 {
                            character[a * n2 + b] = pa * unit_phase(f2 * b as f64);
                        }
                    }
                    let mut total = 0.0;
                    for col in columns.column_iter() {
                        let mut dot = Complex64::new(0.0, 0.0);
                        for (t, u) in col.iter().enumerate() {
                            dot += u.conj() * character[t];
                        }
                        total += dot.norm_sqr();
                    }
                    acc += wi * wj * (1.0 - total / (n1 * n2) as f64);
                    weight_total += wi * wj;
                }
            }
            Ok(acc / weight_total)
        }
        _ => Err(ProlateError::Config(format!(
            "band {band:?} does not match group {group:?} with window {dims:?}"
        ))),
    }
}

/// Band-averaged character approximation error of a Slepian basis, by
/// quadrature. Equals `1 - sum of the basis eigenvalues / (|A| |B|)`.
pub fn character_approx_mse(
    basis: &SlepianBasis,
    band: &BandSpec,
    grid_size: usize,
) -> Result<f64> {
    if band != basis.band() {
        return Err(ProlateError::Config(format!(
            "band {band:?} does not match the basis band {:?}",
            basis.band()
        )));
    }
    band_averaged_residual(basis.vectors(), basis.group(), basis.dims(), band, grid_size)
}

/// Expected residual of a character drawn uniformly from the band against
/// the span of the leading `n` eigenvectors:
/// `1 - sum_{l<n} lambda_l / (domain_size * band_measure)`.
pub fn random_residual(
    dec: &EigenDecomposition,
    n: usize,
    domain_size: usize,
    band_measure: f64,
) -> Result<f64> {
    if n > dec.len() {
        return Err(ProlateError::Index(format!(
            "rank {n} out of range for {} eigenvalues",
            dec.len()
        )));
    }
    if domain_size == 0 || !(band_measure > 0.0) {
        return Err(ProlateError::Parameter(format!(
            "need a nonempty window and positive band measure, got {domain_size} and {band_measure}"
        )));
    }
    let mass: f64 = dec.eigenvalues()[..n].iter().sum();
    Ok(1.0 - mass / (domain_size as f64 * band_measure))
}

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub draws: usize,
    pub seed: u64,
}

/// Monte-Carlo companion of [`random_residual`]: draw characters uniformly
/// from the basis band and average the empirical relative residual.
pub fn random_residual_mc(basis: &SlepianBasis, draws: usize, seed: u64) -> Result<McEstimate> {
    if draws < 2 {
        return Err(ProlateError::Parameter(format!(
            "need at least 2 draws for a standard error, got {draws}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dim = basis.dim();
    let mut character = vec![Complex64::new(0.0, 0.0); dim];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        match (basis.group(), basis.band(), basis.dims()) {
            (GroupSpec::IntLine, BandSpec::Symmetric { half_width }, Dims::One(n)) => {
                let f = -half_width + 2.0 * half_width * rng.gen::<f64>();
                for (t, c) in character.iter_mut().enumerate().take(n) {
                    *c = unit_phase(f * t as f64);
                }
            }
            (GroupSpec::Cyclic { modulus }, BandSpec::Index { count }, Dims::One(m)) => {
                let a = rng.gen_range(0..*count);
                for (t, c) in character.iter_mut().enumerate().take(m) {
                    *c = unit_phase(a as f64 * t as f64 / *modulus as f64);
                }
            }
            (GroupSpec::Product2d, BandSpec::Product { w1, w2 }, Dims::Two(n1, n2)) => {
                let f1 = -w1 + 2.0 * w1 * rng.gen::<f64>();
                let f2 = -w2 + 2.0 * w2 * rng.gen::<f64>();
                for a in 0..n1 {
                    let pa = unit_phase(f1 * a as f64);
                    for b in 0..n2 {
                        character[a * n2 + b] = pa * unit_phase(f2 * b as f64);
                    }
                }
            }
            (group, band, dims) => {
                return Err(ProlateError::Config(format!(
                    "band {band:?} does not match group {group:?} with window {dims:?}"
                )));
            }
        }
        let mut captured = 0.0;
        for col in basis.vectors().column_iter() {
            let mut dot = Complex64::new(0.0, 0.0);
            for (t, u) in col.iter().enumerate() {
                dot += u.conj() * character[t];
            }
            captured += dot.norm_sqr();
        }
        let residual = 1.0 - captured / dim as f64;
        sum += residual;
        sum_sq += residual * residual;
    }
    let mean = sum / draws as f64;
    let variance = (sum_sq / draws as f64 - mean * mean).max(0.0) * draws as f64
        / (draws as f64 - 1.0);
    Ok(McEstimate {
        mean,
        std_err: (variance / draws as f64).sqrt(),
        draws,
        seed,
    })
}

/// Result of the sinusoid-representation rank search.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SinusoidRank {
    /// Smallest basis size meeting the residual target.
    pub k: usize,
    /// Set when even the complete basis misses the target (a numeric
    /// anomaly: the full DPSS basis is complete).
    pub saturated: bool,
}

/// Smallest `K` such that every sinusoid `e_f`, `f` on a uniform grid of at
/// least `f_grid` points in `[-W, W]`, is captured by the leading `K` DPSS
/// vectors with relative residual at most `eps`.
pub fn uniform_sinusoid_k(n: usize, w: f64, eps: f64, f_grid: usize) -> Result<SinusoidRank> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ProlateError::Parameter(format!(
            "residual target eps must lie in (0, 1), got {eps}"
        )));
    }
    if f_grid < 64 * n {
        return Err(ProlateError::Resolution(format!(
            "frequency grid of {f_grid} points is too coarse for dimension {n} (need >= {})",
            64 * n
        )));
    }
    let basis = dpss_basis_tridiagonal(n, w, n)?;

    // embed the band grid in a full-period FFT grid so each vector's
    // spectrum costs one transform
    let mut period = ((f_grid as f64 / (2.0 * w)).ceil() as usize).next_power_of_two();
    let band_bins = |p: usize| -> Vec<usize> {
        (0..p)
            .filter(|&k| {
                let f = k as f64 / p as f64;
                let f = if f >= 0.5 { f - 1.0 } else { f };
                f.abs() <= w
            })
            .collect()
    };
    let mut bins = band_bins(period);
    while bins.len() < f_grid {
        period *= 2;
        bins = band_bins(period);
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(period);

    let spectrum_on_band = |l: usize| -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); period];
        for t in 0..n {
            buf[t] = basis.vectors()[(t, l)];
        }
        fft.process(&mut buf);
        bins.iter().map(|&b| buf[b].norm_sqr()).collect()
    };
    let worst = |captured: &[f64]| -> f64 {
        captured
            .iter()
            .map(|&c| 1.0 - c / n as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let start = (2.0 * n as f64 * w).ceil() as usize;
    let start = start.clamp(1, n);
    let mut captured = vec![0.0f64; bins.len()];
    for l in 0..start {
        for (c, p) in captured.iter_mut().zip(spectrum_on_band(l)) {
            *c += p;
        }
    }
    let mut k = start;
    if worst(&captured) > eps {
        // scan upward until the residual target holds
        while k < n {
            for (c, p) in captured.iter_mut().zip(spectrum_on_band(k)) {
                *c += p;
            }
            k += 1;
            if worst(&captured) <= eps {
                return Ok(SinusoidRank { k, saturated: false });
            }
        }
        return Ok(SinusoidRank { k: n, saturated: true });
    }
    // already passing: scan downward to the smallest passing K
    let contributions: Vec<Vec<f64>> = (0..start).map(spectrum_on_band).collect();
    while k > 1 {
        let mut trimmed = captured.clone();
        for (c, p) in trimmed.iter_mut().zip(contributions[k - 1].iter()) {
            *c -= p;
        }
        if worst(&trimmed) > eps {
            break;
        }
        captured = trimmed;
        k -= 1;
    }
    Ok(SinusoidRank {
        k,
        saturated: false,
    })
}
