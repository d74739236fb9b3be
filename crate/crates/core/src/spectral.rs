//! Spectra of time-limited band-limiting operators: dense Hermitian
//! eigendecomposition, Slepian (DPSS) bases with a fast commuting-tridiagonal
//! path, eigenvalue counting, transition-width bounds, Szego distribution
//! reports, and cheap eigenvalue estimators.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ProlateError, Result};
use crate::fast_apply::ToeplitzApplier;
use crate::operator::{prolate_operator, Dims, Symbol, SymbolGrid, ToeplitzOperator};

/// Hermitian eigendecomposition with eigenvalues in descending order and
/// phase-canonicalized eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<Complex64>,
    source: String,
}

impl EigenDecomposition {
    /// Assemble from raw eigenpairs: sorts descending (stable) and fixes each
    /// column's phase so its largest-magnitude entry (first on ties) is
    /// positive real.
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        vectors: DMatrix<Complex64>,
        source: String,
    ) -> Result<Self> {
        if eigenvalues.len() != vectors.ncols() {
            return Err(ProlateError::Dimension(format!(
                "{} eigenvalues vs {} eigenvector columns",
                eigenvalues.len(),
                vectors.ncols()
            )));
        }
        if eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(ProlateError::Numeric(
                "non-finite eigenvalue in decomposition".into(),
            ));
        }
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eigenvalues[j].partial_cmp(&eigenvalues[i]).unwrap());
        let sorted_vals: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let mut sorted_vecs = DMatrix::zeros(vectors.nrows(), vectors.ncols());
        for (dst, &src) in order.iter().enumerate() {
            sorted_vecs.set_column(dst, &vectors.column(src));
        }
        canonicalize_phases(&mut sorted_vecs);
        Ok(EigenDecomposition {
            eigenvalues: sorted_vals,
            vectors: sorted_vecs,
            source,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    /// Number of eigenpairs held (may be a truncation of the full spectrum).
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Ambient dimension (rows of the eigenvector matrix).
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Apply `U diag(lambda) U*` to a vector.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(ProlateError::Dimension(format!(
                "vector length {} vs operator dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let xv = nalgebra::DVector::from_column_slice(x);
        let mut coef = self.vectors.adjoint() * &xv;
        for (l, &lam) in self.eigenvalues.iter().enumerate() {
            coef[l] *= lam;
        }
        let y = &self.vectors * coef;
        Ok(y.as_slice().to_vec())
    }

    /// Keep only the leading `count` eigenpairs.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count > self.len() {
            return Err(ProlateError::Index(format!(
                "truncation to {count} pairs exceeds available {}",
                self.len()
            )));
        }
        Ok(EigenDecomposition {
            eigenvalues: self.eigenvalues[..count].to_vec(),
            vectors: self.vectors.columns(0, count).clone_owned(),
            source: format!("{} [leading {count}]", self.source),
        })
    }
}

fn canonicalize_phases(vectors: &mut DMatrix<Complex64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm();
            if m > best_mag {
                best_mag = m;
                best = i;
            }
        }
        if best_mag == 0.0 {
            continue;
        }
        let phase = col[best] / best_mag;
        let rot = phase.conj();
        for z in col.iter_mut() {
            *z *= rot;
        }
        // snap the pivot exactly onto the real axis
        col[best] = Complex64::new(col[best].re.abs(), 0.0);
    }
}

/// Dense Hermitian eigendecomposition of an operator. Real operators take a
/// real symmetric path; separable operators are decomposed factor-wise and
/// combined as sorted eigenvalue products with tensor-product eigenvectors.
pub fn eig_hermitian(op: &ToeplitzOperator) -> Result<EigenDecomposition> {
    let tag = describe_operator(op);
    match op.dims() {
        Dims::One(_) => eig_dense_1d(op, &tag),
        Dims::Two(_, _) => {
            let (a, b) = op.factors().expect("two-dimensional operators are separable");
            let da = eig_hermitian(a)?;
            let db = eig_hermitian(b)?;
            let (m1, m2) = (da.len(), db.len());
            let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(m1 * m2);
            for i in 0..m1 {
                for j in 0..m2 {
                    pairs.push((da.eigenvalues[i] * db.eigenvalues[j], i, j));
                }
            }
            pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
            let (n1, n2) = (da.dim(), db.dim());
            let mut vectors = DMatrix::zeros(n1 * n2, m1 * m2);
            let mut values = Vec::with_capacity(m1 * m2);
            for (c, (lam, i, j)) in pairs.iter().enumerate() {
                values.push(*lam);
                let u = da.vectors.column(*i);
                let v = db.vectors.column(*j);
                for a1 in 0..n1 {
                    for a2 in 0..n2 {
                        vectors[(a1 * n2 + a2, c)] = u[a1] * v[a2];
                    }
                }
            }
            EigenDecomposition::from_parts(values, vectors, format!("kronecker({tag})"))
        }
    }
}

fn eig_dense_1d(op: &ToeplitzOperator, tag: &str) -> Result<EigenDecomposition> {
    let dense = op.to_dense();
    if op.is_real() {
        let real = dense.map(|z| z.re);
        let eig = real.symmetric_eigen();
        let values: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        let vectors = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        EigenDecomposition::from_parts(values, vectors, format!("dense-real({tag})"))
    } else {
        let eig = dense.symmetric_eigen();
        let values: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        EigenDecomposition::from_parts(values, eig.eigenvectors, format!("dense-hermitian({tag})"))
    }
}

fn describe_operator(op: &ToeplitzOperator) -> String {
    let dims = match op.dims() {
        Dims::One(n) => format!("{n}"),
        Dims::Two(a, b) => format!("{a}x{b}"),
    };
    match op.symbol_tag() {
        Some(tag) => format!("{} n={dims} {tag}", op.group().describe()),
        None => format!("{} n={dims}", op.group().describe()),
    }
}

/// First `count` Slepian (DPSS) vectors of the prolate operator, via the
/// dense eigensolver.
pub fn dpss_basis(n: usize, w: f64, count: usize) -> Result<EigenDecomposition> {
    if count > n {
        return Err(ProlateError::Index(format!(
            "requested {count} tapers from an order-{n} operator"
        )));
    }
    let op = prolate_operator(n, w)?;
    eig_hermitian(&op)?.truncated(count)
}

/// Fast DPSS path: eigenvectors of the commuting symmetric tridiagonal
/// matrix (diagonal `((N-1-2i)/2)^2 cos(2 pi W)`, off-diagonal `i(N-i)/2`),
/// concentrations recovered as Rayleigh quotients against the prolate
/// operator. Cross-validated against [`dpss_basis`] in the test suite.
pub fn dpss_basis_tridiagonal(n: usize, w: f64, count: usize) -> Result<EigenDecomposition> {
    if count > n {
        return Err(ProlateError::Index(format!(
            "requested {count} tapers from an order-{n} operator"
        )));
    }
    let op = prolate_operator(n, w)?;
    let c2w = (2.0 * std::f64::consts::PI * w).cos();
    let mut diag: Vec<f64> = (0..n)
        .map(|i| {
            let t = (n as f64 - 1.0 - 2.0 * i as f64) / 2.0;
            t * t * c2w
        })
        .collect();
    let mut sub: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                (i as f64) * ((n - i) as f64) / 2.0
            }
        })
        .collect();
    // tql2 wants the subdiagonal shifted down by one
    sub.rotate_left(1);
    let mut z = DMatrix::<f64>::identity(n, n);
    tql2(&mut diag, &mut sub, &mut z)?;

    // concentration order is recovered from the Rayleigh quotients, not from
    // the tridiagonal eigenvalues, so the correspondence never depends on the
    // sign of cos(2 pi W)
    let applier = ToeplitzApplier::new(&op)?;
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for src in 0..n {
        let col = z.column(src);
        let norm = col.norm();
        let u: Vec<Complex64> = col.iter().map(|&x| Complex64::new(x / norm, 0.0)).collect();
        let bu = applier.apply(&u)?;
        let mut rayleigh = 0.0;
        for i in 0..n {
            rayleigh += (u[i].conj() * bu[i]).re;
        }
        values.push(rayleigh);
        for i in 0..n {
            vectors[(i, src)] = u[i];
        }
    }
    EigenDecomposition::from_parts(values, vectors, format!("tridiagonal-dpss(n={n},W={w})"))?
        .truncated(count)
}

/// Implicit-QL eigensolver for a symmetric tridiagonal matrix.
/// `d` holds the diagonal, `e[i]` the coupling between rows `i` and `i+1`
/// (`e[n-1]` ignored); on return `d` holds eigenvalues and the columns of `z`
/// the eigenvectors (accumulated onto the identity passed in).
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut DMatrix<f64>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(ProlateError::Numeric(format!(
                    "tridiagonal QL failed to converge at row {l} after {iter} shifts"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Number of eigenvalues inside `(lo, hi)` (or `[lo, hi]` with
/// `include_ends`).
pub fn eig_count(dec: &EigenDecomposition, lo: f64, hi: f64, include_ends: bool) -> usize {
    dec.eigenvalues
        .iter()
        .filter(|&&l| {
            if include_ends {
                l >= lo && l <= hi
            } else {
                l > lo && l < hi
            }
        })
        .count()
}

/// Nonasymptotic bound on the number of prolate eigenvalues inside
/// `(eps, 1 - eps)`: `(8 / pi^2 * ln(8 N) + 12) * ln(15 / eps)`.
pub fn transition_bound_dpss(n: usize, eps: f64) -> Result<f64> {
    if n < 2 {
        return Err(ProlateError::Parameter(format!(
            "transition bound needs n >= 2, got {n}"
        )));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(ProlateError::Parameter(format!(
            "transition level eps must lie in (0, 1/2), got {eps}"
        )));
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok((8.0 / pi2 * (8.0 * n as f64).ln() + 12.0) * (15.0 / eps).ln())
}

/// Test functions for spectral means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaFn {
    /// Identity: the spectral mean is the normalized trace.
    X,
    /// Square: the spectral mean is the normalized Frobenius norm.
    X2,
    /// Natural logarithm: the spectral mean is the normalized log-determinant.
    Log,
}

impl ThetaFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ThetaFn::X => x,
            ThetaFn::X2 => x * x,
            ThetaFn::Log => x.ln(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThetaFn::X => "x",
            ThetaFn::X2 => "x^2",
            ThetaFn::Log => "log",
        }
    }

    fn check_domain(&self, x: f64, what: &str) -> Result<()> {
        if matches!(self, ThetaFn::Log) && x <= 0.0 {
            return Err(ProlateError::Domain(format!(
                "theta=log undefined at {what} = {x}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ThetaFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThetaFn {
    type Err = ProlateError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(ThetaFn::X),
            "x^2" | "x2" => Ok(ThetaFn::X2),
            "log" => Ok(ThetaFn::Log),
            other => Err(ProlateError::Parameter(format!(
                "unknown test function '{other}' (expected x, x^2, or log)"
            ))),
        }
    }
}

/// One Szego comparison row: spectral mean of a test function against the
/// symbol integral.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SzegoRow {
    pub theta: String,
    pub matrix_mean: f64,
    pub symbol_integral: f64,
    pub abs_gap: f64,
}

/// Eigenvalue counts over a partition of the spectral range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Distribution comparison between a spectrum and its symbol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionReport {
    pub counts: Vec<CountBin>,
    pub rows: Vec<SzegoRow>,
    pub cdf_distance: f64,
    pub estimator_errors: BTreeMap<String, f64>,
}

/// Compare a spectrum against its generating symbol: spectral means of the
/// given test functions vs symbol integrals, eigenvalue counts over a
/// partition of the spectral range, the sup-distance between the empirical
/// eigenvalue CDF and the symbol CDF (evaluated only at continuity points),
/// and the symbol-sampling estimator error.
pub fn szego_report(
    dec: &EigenDecomposition,
    symbol: &Symbol,
    thetas: &[ThetaFn],
) -> Result<DistributionReport> {
    if !symbol.is_real() {
        return Err(ProlateError::Validation(
            "distribution comparisons need a real-valued symbol".into(),
        ));
    }
    let n = dec.len();
    if n == 0 {
        return Err(ProlateError::Parameter(
            "distribution report needs a nonempty spectrum".into(),
        ));
    }
    let grid = report_grid(symbol, n)?;
    let samples: Vec<f64> = grid.samples().iter().map(|z| z.re).collect();

    let mut rows = Vec::with_capacity(thetas.len());
    for theta in thetas {
        for (l, &lam) in dec.eigenvalues().iter().enumerate() {
            theta.check_domain(lam, &format!("eigenvalue {l}"))?;
        }
        for (i, &s) in samples.iter().enumerate() {
            theta.check_domain(s, &format!("symbol sample {i}"))?;
        }
        let matrix_mean =
            dec.eigenvalues().iter().map(|&l| theta.eval(l)).sum::<f64>() / n as f64;
        let symbol_integral =
            samples.iter().map(|&s| theta.eval(s)).sum::<f64>() / samples.len() as f64;
        rows.push(SzegoRow {
            theta: theta.name().to_string(),
            matrix_mean,
            symbol_integral,
            abs_gap: (matrix_mean - symbol_integral).abs(),
        });
    }

    let cdf_distance = cdf_sup_distance(dec.eigenvalues(), &samples);
    let counts = partition_counts(dec.eigenvalues(), 8);

    let mut estimator_errors = BTreeMap::new();
    let est = estimate_eigs_symbol_sampling(symbol, n)?;
    let err = dec
        .eigenvalues()
        .iter()
        .zip(est.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    estimator_errors.insert("symbol-sampling".to_string(), err);

    Ok(DistributionReport {
        counts,
        rows,
        cdf_distance,
        estimator_errors,
    })
}

fn report_grid(symbol: &Symbol, n: usize) -> Result<SymbolGrid> {
    match symbol {
        Symbol::Grid(g) => {
            if g.len() < 8 * n {
                return Err(ProlateError::Resolution(format!(
                    "symbol grid of {} samples is too coarse for dimension {n} (need >= {})",
                    g.len(),
                    8 * n
                )));
            }
            Ok(g.clone())
        }
        _ => {
            // closed form: sample on a multiple of n that is at least max(8n, 4096)
            let per = 4096usize.div_ceil(8 * n).max(1) * 8;
            symbol.to_grid(per * n)
        }
    }
}

fn partition_counts(eigs_desc: &[f64], bins: usize) -> Vec<CountBin> {
    let n = eigs_desc.len();
    let max = eigs_desc[0];
    let min = eigs_desc[n - 1];
    if !(max > min) {
        return vec![CountBin {
            lo: min,
            hi: max,
            count: n,
        }];
    }
    let width = (max - min) / bins as f64;
    let mut out: Vec<CountBin> = (0..bins)
        .map(|i| CountBin {
            lo: min + i as f64 * width,
            hi: if i + 1 == bins { max } else { min + (i + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &l in eigs_desc {
        let mut idx = ((l - min) / width).floor() as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        out[idx].count += 1;
    }
    out
}

/// Sup-distance between the empirical eigenvalue CDF and the symbol's value
/// CDF, evaluated at continuity points of the symbol distribution only:
/// midpoints between consecutive distinct sample values, plus eigenvalues
/// away from any atom (a sample value carrying >= 0.1% of the grid).
fn cdf_sup_distance(eigs_desc: &[f64], samples: &[f64]) -> f64 {
    let g = samples.len();
    let mut sym: Vec<f64> = samples.to_vec();
    sym.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut eig: Vec<f64> = eigs_desc.to_vec();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // distinct runs and atoms
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &v in &sym {
        match distinct.last_mut() {
            Some((u, c)) if *u == v => *c += 1,
            _ => distinct.push((v, 1)),
        }
    }
    let atom_threshold = ((g as f64 * 1e-3).ceil() as usize).max(8);
    let atoms: Vec<f64> = distinct
        .iter()
        .filter(|(_, c)| *c >= atom_threshold)
        .map(|(v, _)| *v)
        .collect();

    let mut points: Vec<f64> = distinct
        .windows(2)
        .map(|w| 0.5 * (w[0].0 + w[1].0))
        .collect();
    points.extend(
        eig.iter()
            .copied()
            .filter(|&l| atoms.iter().all(|&a| (l - a).abs() > 1e-9)),
    );

    let frac_le = |sorted: &[f64], x: f64| -> f64 {
        let count = sorted.partition_point(|&v| v <= x);
        count as f64 / sorted.len() as f64
    };

    points
        .into_iter()
        .map(|x| (frac_le(&eig, x) - frac_le(&sym, x)).abs())
        .fold(0.0, f64::max)
}

/// Eigenvalue estimate by symbol sampling: `{h_hat(l / n)}` sorted
/// descending. Valid as an estimator when the symbol's range is connected.
pub fn estimate_eigs_symbol_sampling(symbol: &Symbol, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(ProlateError::Parameter("sample count must be >= 1".into()));
    }
    if !symbol.is_real() {
        return Err(ProlateError::Validation(
            "symbol-sampling estimation needs a real-valued symbol".into(),
        ));
    }
    let mut values: Vec<f64> = match symbol {
        Symbol::Grid(g) => (0..n).map(|l| g.sample_fraction(l, n).re).collect(),
        _ => (0..n)
            .map(|l| symbol.eval(l as f64 / n as f64).re)
            .collect(),
    };
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(values)
}

/// Result of circulant-periodization eigenvalue estimation.
#[derive(Debug, Clone)]
pub struct CirculantEstimate {
    /// Estimated eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// Set when the column support wraps onto itself (bandwidth >= n/2), in
    /// which case the estimate aliases neighboring lags.
    pub wrap_overlap: bool,
}

/// Eigenvalue estimate by circulant periodization: wrap the first column
/// onto `Z_n` (`c[k] = h[k] + conj(h[n-k])`) and take the DFT of the
/// periodized column, evaluated as the two-sided Fourier sum at `l/n`.
/// Coincides exactly with symbol sampling for bandwidth below `n/2`.
pub fn estimate_eigs_circulant(op: &ToeplitzOperator) -> Result<CirculantEstimate> {
    let col = op.first_column().ok_or_else(|| {
        ProlateError::Config("circulant estimation needs a one-dimensional operator".into())
    })?;
    let n = col.len();
    let bandwidth = (0..n).rev().find(|&k| col[k].norm() > 0.0).unwrap_or(0);
    let wrap_overlap = n > 1 && 2 * bandwidth >= n;

    // two-sided periodized coefficients: lag m in (-n/2, n/2]
    let half = n / 2;
    let min_lag = -((n as i64 - 1) - half as i64);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (j, coeff) in coeffs.iter_mut().enumerate() {
        let m = min_lag + j as i64;
        let k = m.rem_euclid(n as i64) as usize;
        // residue k collects the lags k and k - n of the (compactly
        // supported) two-sided sequence
        *coeff = if k == 0 {
            col[0]
        } else {
            col[k] + col[n - k].conj()
        };
    }
    let periodized = Symbol::TrigPoly { min_lag, coeffs };
    let mut values: Vec<f64> = (0..n)
        .map(|l| periodized.eval(l as f64 / n as f64).re)
        .collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(CirculantEstimate {
        values,
        wrap_overlap,
    })
}
