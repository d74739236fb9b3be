//! Construction of time-limited band-limiting operators in Toeplitz form.
//!
//! Every operator here is Hermitian and is represented by its first column
//! (lags `0..n`), with the upper triangle implied by conjugate symmetry.
//! Two-dimensional operators are kept in separable (tensor-product) form and
//! materialized on demand.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ProlateError, Result};
use crate::group::{unit_phase, wrap_frequency, BandSpec, GroupPoint, GroupSpec};

const PI: f64 = std::f64::consts::PI;

/// Symbol samples on the uniform dual grid `f_i = i / G`, `i = 0..G`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    samples: Vec<Complex64>,
    real: bool,
}

impl SymbolGrid {
    /// Wrap complex samples; marks the grid real when every imaginary part
    /// is at most `1e-12` in magnitude.
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(ProlateError::Parameter(
                "symbol grid needs at least one sample".into(),
            ));
        }
        let real = samples.iter().all(|z| z.im.abs() <= 1e-12);
        Ok(SymbolGrid { samples, real })
    }

    pub fn from_real(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Sample at frequency `l / n`. Exact grid lookup when `n` divides the
    /// grid size, linear interpolation between neighbors otherwise.
    pub fn sample_fraction(&self, l: usize, n: usize) -> Complex64 {
        let g = self.samples.len();
        if n > 0 && g % n == 0 {
            return self.samples[(l % n) * (g / n)];
        }
        let pos = (l as f64 / n as f64).fract() * g as f64;
        let i0 = pos.floor() as usize % g;
        let i1 = (i0 + 1) % g;
        let t = pos - pos.floor();
        self.samples[i0] * (1.0 - t) + self.samples[i1] * t
    }
}

/// Analytic or sampled description of a symbol on the circle.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    /// Samples on a uniform grid over one period.
    Grid(SymbolGrid),
    /// Indicator of the symmetric band `[-W, W]`.
    BandIndicator { half_width: f64 },
    /// Finite trigonometric polynomial
    /// `h_hat(f) = sum_j coeffs[j] * exp(-j 2 pi f (min_lag + j))`.
    TrigPoly { min_lag: i64, coeffs: Vec<Complex64> },
}

impl Symbol {
    pub fn indicator(half_width: f64) -> Result<Self> {
        if !half_width.is_finite() || half_width <= 0.0 || half_width > 0.5 {
            return Err(ProlateError::Parameter(format!(
                "indicator half-width must lie in (0, 1/2], got {half_width}"
            )));
        }
        Ok(Symbol::BandIndicator { half_width })
    }

    /// Build a real-valued trigonometric polynomial from one-sided
    /// coefficients `c_0..c_L`; negative lags are filled in by conjugation.
    pub fn hermitian_trig(one_sided: &[Complex64]) -> Result<Self> {
        if one_sided.is_empty() {
            return Err(ProlateError::Parameter(
                "trig polynomial needs at least the lag-0 coefficient".into(),
            ));
        }
        if one_sided[0].im.abs() > 1e-12 {
            return Err(ProlateError::Validation(format!(
                "lag-0 coefficient must be real, has imaginary part {}",
                one_sided[0].im
            )));
        }
        let l = one_sided.len() - 1;
        let mut coeffs = Vec::with_capacity(2 * l + 1);
        for k in (1..=l).rev() {
            coeffs.push(one_sided[k].conj());
        }
        coeffs.push(Complex64::new(one_sided[0].re, 0.0));
        coeffs.extend_from_slice(&one_sided[1..]);
        Ok(Symbol::TrigPoly {
            min_lag: -(l as i64),
            coeffs,
        })
    }

    /// General (possibly complex-valued) trigonometric polynomial.
    pub fn trig(min_lag: i64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(ProlateError::Parameter(
                "trig polynomial needs at least one coefficient".into(),
            ));
        }
        Ok(Symbol::TrigPoly { min_lag, coeffs })
    }

    /// Point evaluation. Grids use exact lookup on their own nodes and
    /// linear interpolation elsewhere.
    pub fn eval(&self, f: f64) -> Complex64 {
        match self {
            Symbol::Grid(grid) => {
                let g = grid.samples.len() as f64;
                let pos = (f - f.floor()) * g;
                let i0 = (pos.floor() as usize) % grid.samples.len();
                let t = pos - pos.floor();
                if t == 0.0 {
                    grid.samples[i0]
                } else {
                    let i1 = (i0 + 1) % grid.samples.len();
                    grid.samples[i0] * (1.0 - t) + grid.samples[i1] * t
                }
            }
            Symbol::BandIndicator { half_width } => {
                if wrap_frequency(f).abs() <= *half_width {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Symbol::TrigPoly { min_lag, coeffs } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, c) in coeffs.iter().enumerate() {
                    let m = (*min_lag + j as i64) as f64;
                    acc += c * unit_phase(-f * m);
                }
                acc
            }
        }
    }

    /// Whether the symbol is (numerically) real-valued on the circle.
    pub fn is_real(&self) -> bool {
        match self {
            Symbol::Grid(grid) => grid.real,
            Symbol::BandIndicator { .. } => true,
            Symbol::TrigPoly { min_lag, coeffs } => {
                // real iff coefficients are Hermitian about lag 0
                let max_lag = min_lag + coeffs.len() as i64 - 1;
                let lag = |m: i64| -> Complex64 {
                    if m < *min_lag || m > max_lag {
                        Complex64::new(0.0, 0.0)
                    } else {
                        coeffs[(m - min_lag) as usize]
                    }
                };
                let top = min_lag.abs().max(max_lag.abs());
                (0..=top).all(|m| (lag(m) - lag(-m).conj()).norm() <= 1e-12)
            }
        }
    }

    /// Squared modulus `|phi_hat|^2` as a symbol of the same flavor.
    pub fn mod_squared(&self) -> Symbol {
        match self {
            Symbol::Grid(grid) => Symbol::Grid(SymbolGrid {
                samples: grid
                    .samples
                    .iter()
                    .map(|z| Complex64::new(z.norm_sqr(), 0.0))
                    .collect(),
                real: true,
            }),
            Symbol::BandIndicator { half_width } => Symbol::BandIndicator {
                half_width: *half_width,
            },
            Symbol::TrigPoly { min_lag, coeffs } => {
                // |sum a_m e(-fm)|^2 = sum_k (sum_m a_m conj(a_{m-k})) e(-fk)
                let l = coeffs.len() as i64 - 1;
                let mut out = vec![Complex64::new(0.0, 0.0); (2 * l + 1) as usize];
                for k in -l..=l {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..coeffs.len() as i64 {
                        let mk = m - k;
                        if mk >= 0 && mk < coeffs.len() as i64 {
                            acc += coeffs[m as usize] * coeffs[mk as usize].conj();
                        }
                    }
                    out[(k + l) as usize] = acc;
                }
                let _ = min_lag; // |.|^2 is independent of the absolute lag offset
                Symbol::TrigPoly {
                    min_lag: -l,
                    coeffs: out,
                }
            }
        }
    }

    /// Sample onto a uniform grid of the given size.
    pub fn to_grid(&self, grid_size: usize) -> Result<SymbolGrid> {
        if grid_size == 0 {
            return Err(ProlateError::Parameter("grid size must be >= 1".into()));
        }
        if let Symbol::Grid(g) = self {
            if g.samples.len() == grid_size {
                return Ok(g.clone());
            }
        }
        let samples: Vec<Complex64> = (0..grid_size)
            .map(|i| self.eval(i as f64 / grid_size as f64))
            .collect();
        SymbolGrid::new(samples)
    }

    pub fn describe(&self) -> String {
        match self {
            Symbol::Grid(g) => format!("grid[{}]", g.samples.len()),
            Symbol::BandIndicator { half_width } => {
                format!("indicator[-{half_width},{half_width}]")
            }
            Symbol::TrigPoly { min_lag, coeffs } => format!(
                "trig-poly[lags {}..{}]",
                min_lag,
                min_lag + coeffs.len() as i64 - 1
            ),
        }
    }
}

/// Dimensions of an operator: plain or separable two-factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dims {
    One(usize),
    Two(usize, usize),
}

impl Dims {
    pub fn total(&self) -> usize {
        match self {
            Dims::One(n) => *n,
            Dims::Two(a, b) => a * b,
        }
    }
}

/// Hermitian Toeplitz operator, stored as its first column (or a pair of
/// separable factors).
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzOperator {
    group: GroupSpec,
    kind: OperatorKind,
    symbol_tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum OperatorKind {
    Dense1d { first_column: Vec<Complex64> },
    Separable(Box<(ToeplitzOperator, ToeplitzOperator)>),
}

impl ToeplitzOperator {
    fn new_1d(group: GroupSpec, first_column: Vec<Complex64>, tag: Option<String>) -> Result<Self> {
        if first_column.is_empty() {
            return Err(ProlateError::Parameter("operator size must be >= 1".into()));
        }
        if first_column[0].im.abs() > 1e-12 {
            return Err(ProlateError::Validation(format!(
                "diagonal entry must be real, has imaginary part {:e}",
                first_column[0].im
            )));
        }
        Ok(ToeplitzOperator {
            group,
            kind: OperatorKind::Dense1d { first_column },
            symbol_tag: tag,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn dims(&self) -> Dims {
        match &self.kind {
            OperatorKind::Dense1d { first_column } => Dims::One(first_column.len()),
            OperatorKind::Separable(f) => Dims::Two(f.0.dim(), f.1.dim()),
        }
    }

    /// Total dimension of the matrix (product of sides when separable).
    pub fn dim(&self) -> usize {
        self.dims().total()
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.kind, OperatorKind::Separable(_))
    }

    pub fn first_column(&self) -> Option<&[Complex64]> {
        match &self.kind {
            OperatorKind::Dense1d { first_column } => Some(first_column),
            OperatorKind::Separable(_) => None,
        }
    }

    pub fn factors(&self) -> Option<(&ToeplitzOperator, &ToeplitzOperator)> {
        match &self.kind {
            OperatorKind::Separable(f) => Some((&f.0, &f.1)),
            OperatorKind::Dense1d { .. } => None,
        }
    }

    pub fn symbol_tag(&self) -> Option<&str> {
        self.symbol_tag.as_deref()
    }

    /// True when every stored coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        match &self.kind {
            OperatorKind::Dense1d { first_column } => {
                first_column.iter().all(|z| z.im == 0.0)
            }
            OperatorKind::Separable(f) => f.0.is_real() && f.1.is_real(),
        }
    }

    /// Matrix entry `T[r, c]`.
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        match &self.kind {
            OperatorKind::Dense1d { first_column } => {
                if r >= c {
                    first_column[r - c]
                } else {
                    first_column[c - r].conj()
                }
            }
            OperatorKind::Separable(f) => {
                let (n2,) = (f.1.dim(),);
                f.0.entry(r / n2, c / n2) * f.1.entry(r % n2, c % n2)
            }
        }
    }

    /// Dense materialization (Kronecker product for separable operators).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| self.entry(r, c))
    }

    /// Exact trace.
    pub fn trace(&self) -> f64 {
        match &self.kind {
            OperatorKind::Dense1d { first_column } => {
                first_column.len() as f64 * first_column[0].re
            }
            OperatorKind::Separable(f) => f.0.trace() * f.1.trace(),
        }
    }

    /// Squared Frobenius norm, `sum_{|k|<n} (n-|k|) |h_k|^2` per factor.
    pub fn frobenius_sq(&self) -> f64 {
        match &self.kind {
            OperatorKind::Dense1d { first_column } => {
                let n = first_column.len();
                let mut acc = n as f64 * first_column[0].norm_sqr();
                for k in 1..n {
                    acc += 2.0 * (n - k) as f64 * first_column[k].norm_sqr();
                }
                acc
            }
            OperatorKind::Separable(f) => f.0.frobenius_sq() * f.1.frobenius_sq(),
        }
    }

    /// The operator's own symbol as a two-sided trigonometric polynomial.
    pub fn symbol_trig(&self) -> Result<Symbol> {
        match &self.kind {
            OperatorKind::Dense1d { first_column } => {
                let n = first_column.len();
                let mut coeffs = Vec::with_capacity(2 * n - 1);
                for k in (1..n).rev() {
                    coeffs.push(first_column[k].conj());
                }
                coeffs.extend_from_slice(first_column);
                Ok(Symbol::TrigPoly {
                    min_lag: -((n - 1) as i64),
                    coeffs,
                })
            }
            OperatorKind::Separable(_) => Err(ProlateError::Config(
                "separable operators have no single-variable symbol".into(),
            )),
        }
    }

    /// Sample the operator's symbol on a uniform grid.
    pub fn symbol_grid(&self, grid_size: usize) -> Result<SymbolGrid> {
        if grid_size < 8 * self.dim() {
            return Err(ProlateError::Resolution(format!(
                "symbol grid of {grid_size} samples is too coarse for dimension {} (need >= {})",
                self.dim(),
                8 * self.dim()
            )));
        }
        self.symbol_trig()?.to_grid(grid_size)
    }
}

/// Kernel of the band-limiting operator at a given lag, under counting
/// measure on the group and normalized measure on the dual.
pub fn bandlimit_kernel(spec: &GroupSpec, band: &BandSpec, lag: &GroupPoint) -> Result<Complex64> {
    match (spec, band, lag) {
        (GroupSpec::IntLine, BandSpec::Symmetric { half_width }, GroupPoint::Int(m)) => {
            crate::group::band_measure(spec, band)?;
            Ok(Complex64::new(sinc_band(*half_width, *m), 0.0))
        }
        (GroupSpec::Cyclic { modulus }, BandSpec::Index { count }, GroupPoint::Cyclic(m)) => {
            crate::group::band_measure(spec, band)?;
            Ok(dirichlet_block(*modulus, *count, *m))
        }
        (GroupSpec::Product2d, BandSpec::Product { w1, w2 }, GroupPoint::Pair(m1, m2)) => {
            crate::group::band_measure(spec, band)?;
            Ok(Complex64::new(
                sinc_band(*w1, *m1) * sinc_band(*w2, *m2),
                0.0,
            ))
        }
        _ => Err(ProlateError::Config(format!(
            "kernel arguments {band:?}, {lag:?} do not match group {}",
            spec.describe()
        ))),
    }
}

/// `integral of e(j 2 pi f m) over [-W, W]`: `2W` at `m = 0`, else
/// `sin(2 pi W m) / (pi m)`.
fn sinc_band(w: f64, m: i64) -> f64 {
    if m == 0 {
        2.0 * w
    } else {
        (2.0 * PI * w * m as f64).sin() / (PI * m as f64)
    }
}

/// `(1/N) sum_{k<K} e(j 2 pi m k / N)`, the normalized Dirichlet block kernel.
fn dirichlet_block(n: usize, k: usize, m: i64) -> Complex64 {
    let nf = n as f64;
    let kf = k as f64;
    if m.rem_euclid(n as i64) == 0 {
        return Complex64::new(kf / nf, 0.0);
    }
    let x = m as f64 / nf;
    let amp = (PI * x * kf).sin() / (nf * (PI * x).sin());
    let phase = PI * x * (kf - 1.0);
    Complex64::new(phase.cos() * amp, phase.sin() * amp)
}

/// Prolate (time-limited sinc) operator `B_{N,W}` on a length-`n` window.
pub fn prolate_operator(n: usize, w: f64) -> Result<ToeplitzOperator> {
    if n == 0 {
        return Err(ProlateError::Parameter("operator size must be >= 1".into()));
    }
    if !w.is_finite() || w <= 0.0 || w > 0.5 {
        return Err(ProlateError::Parameter(format!(
            "half-bandwidth W must lie in (0, 1/2], got {w}"
        )));
    }
    let col: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(sinc_band(w, k as i64), 0.0))
        .collect();
    ToeplitzOperator::new_1d(
        GroupSpec::IntLine,
        col,
        Some(format!("indicator[-{w},{w}]")),
    )
}

/// Periodic prolate operator on `Z_N`: window `{0..M-1}`, band `{0..K-1}`.
pub fn periodic_prolate_operator(n: usize, m: usize, k: usize) -> Result<ToeplitzOperator> {
    let group = GroupSpec::cyclic(n)?;
    crate::group::TimeWindow::Block { len: m }.validate(&group)?;
    if k == 0 || k > n {
        return Err(ProlateError::Parameter(format!(
            "band size K={k} must lie in 1..=N={n}"
        )));
    }
    let col: Vec<Complex64> = (0..m).map(|t| dirichlet_block(n, k, t as i64)).collect();
    ToeplitzOperator::new_1d(group, col, Some(format!("dft-block[K={k},N={n}]")))
}

/// Separable two-dimensional prolate operator on an `n1 x n2` window with
/// band `[-w1, w1] x [-w2, w2]`.
pub fn prolate_operator_2d(n1: usize, n2: usize, w1: f64, w2: f64) -> Result<ToeplitzOperator> {
    let a = prolate_operator(n1, w1)?;
    let b = prolate_operator(n2, w2)?;
    Ok(ToeplitzOperator {
        group: GroupSpec::Product2d,
        symbol_tag: Some(format!("indicator[-{w1},{w1}]x[-{w2},{w2}]")),
        kind: OperatorKind::Separable(Box::new((a, b))),
    })
}

/// Build an operator from a two-sided impulse response `h[-L..=L]` laid out
/// as a slice of length `2L+1` with lag 0 at the center. Conjugate symmetry
/// is validated within `1e-12`.
pub fn toeplitz_from_impulse(two_sided: &[Complex64], n: usize) -> Result<ToeplitzOperator> {
    if two_sided.len() % 2 == 0 {
        return Err(ProlateError::Dimension(format!(
            "two-sided impulse response must have odd length, got {}",
            two_sided.len()
        )));
    }
    if n == 0 {
        return Err(ProlateError::Parameter("operator size must be >= 1".into()));
    }
    let l = two_sided.len() / 2;
    if l > n - 1 {
        return Err(ProlateError::Dimension(format!(
            "impulse support half-length {l} exceeds n-1 = {}",
            n - 1
        )));
    }
    for k in 0..=l {
        let diff = (two_sided[l + k] - two_sided[l - k].conj()).norm();
        if diff > 1e-12 {
            return Err(ProlateError::Validation(format!(
                "impulse response is not Hermitian at lag {k}: |h[{k}] - conj(h[-{k}])| = {diff:e}"
            )));
        }
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..=l {
        col[k] = two_sided[l + k];
    }
    col[0] = Complex64::new(col[0].re, 0.0);
    ToeplitzOperator::new_1d(GroupSpec::IntLine, col, Some(format!("impulse[{}]", 2 * l + 1)))
}

/// Fourier coefficients `h_k = integral of h_hat(f) e(j 2 pi f k) df` of a
/// real symbol, assembled into a Toeplitz operator. Closed-form symbols are
/// integrated exactly; grid symbols use the periodic rectangle rule and must
/// carry at least `8n` samples.
pub fn toeplitz_from_symbol(symbol: &Symbol, n: usize) -> Result<ToeplitzOperator> {
    if n == 0 {
        return Err(ProlateError::Parameter("operator size must be >= 1".into()));
    }
    if !symbol.is_real() {
        return Err(ProlateError::Validation(
            "symbol must be real-valued to define a Hermitian operator".into(),
        ));
    }
    let col: Vec<Complex64> = match symbol {
        Symbol::BandIndicator { half_width } => (0..n)
            .map(|k| Complex64::new(sinc_band(*half_width, k as i64), 0.0))
            .collect(),
        Symbol::TrigPoly { min_lag, coeffs } => (0..n as i64)
            .map(|k| {
                if k >= *min_lag && k < *min_lag + coeffs.len() as i64 {
                    coeffs[(k - *min_lag) as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
        Symbol::Grid(grid) => {
            let g = grid.samples.len();
            if g < 8 * n {
                return Err(ProlateError::Resolution(format!(
                    "symbol grid of {g} samples is too coarse for dimension {n} (need >= {})",
                    8 * n
                )));
            }
            (0..n)
                .map(|k| {
                    // rectangle rule on the full period, compensated sum
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut comp = Complex64::new(0.0, 0.0);
                    for (i, s) in grid.samples.iter().enumerate() {
                        let term = s * unit_phase(i as f64 * k as f64 / g as f64);
                        let y = term - comp;
                        let t = acc + y;
                        comp = (t - acc) - y;
                        acc = t;
                    }
                    acc / g as f64
                })
                .collect()
        }
    };
    let mut op = ToeplitzOperator::new_1d(GroupSpec::IntLine, col, Some(symbol.describe()))?;
    if let OperatorKind::Dense1d { first_column } = &mut op.kind {
        first_column[0] = Complex64::new(first_column[0].re, 0.0);
    }
    Ok(op)
}

/// Time-limited operator with symbol `|phi_hat|^2`, the Gram operator of the
/// pulse-train synthesis map.
pub fn autocorrelation_operator(pulse: &Symbol, n: usize) -> Result<ToeplitzOperator> {
    let sq = pulse.mod_squared();
    let mut op = toeplitz_from_symbol(&sq, n)?;
    op.symbol_tag = Some(format!("autocorr({})", pulse.describe()));
    Ok(op)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DimsField {
    One(usize),
    Two([usize; 2]),
}

/// On-disk layout of an operator file.
#[derive(Serialize, Deserialize)]
struct OperatorFile {
    #[serde(flatten)]
    group: GroupSpec,
    n: DimsField,
    separable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_column: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<OperatorFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symbol_tag: Option<String>,
}

impl From<&ToeplitzOperator> for OperatorFile {
    fn from(op: &ToeplitzOperator) -> Self {
        match &op.kind {
            OperatorKind::Dense1d { first_column } => OperatorFile {
                group: op.group,
                n: DimsField::One(first_column.len()),
                separable: false,
                first_column: Some(first_column.iter().map(|z| [z.re, z.im]).collect()),
                factors: None,
                symbol_tag: op.symbol_tag.clone(),
            },
            OperatorKind::Separable(f) => OperatorFile {
                group: op.group,
                n: DimsField::Two([f.0.dim(), f.1.dim()]),
                separable: true,
                first_column: None,
                factors: Some(vec![OperatorFile::from(&f.0), OperatorFile::from(&f.1)]),
                symbol_tag: op.symbol_tag.clone(),
            },
        }
    }
}

impl TryFrom<OperatorFile> for ToeplitzOperator {
    type Error = ProlateError;

    fn try_from(file: OperatorFile) -> Result<ToeplitzOperator> {
        if file.separable {
            let factors = file.factors.ok_or_else(|| {
                ProlateError::Validation("separable operator file lacks factors".into())
            })?;
            if factors.len() != 2 {
                return Err(ProlateError::Validation(format!(
                    "separable operator file must carry exactly 2 factors, got {}",
                    factors.len()
                )));
            }
            let mut it = factors.into_iter();
            let a = ToeplitzOperator::try_from(it.next().unwrap())?;
            let b = ToeplitzOperator::try_from(it.next().unwrap())?;
            if let DimsField::Two([n1, n2]) = file.n {
                if n1 != a.dim() || n2 != b.dim() {
                    return Err(ProlateError::Validation(format!(
                        "factor sizes ({}, {}) disagree with declared n = ({n1}, {n2})",
                        a.dim(),
                        b.dim()
                    )));
                }
            } else {
                return Err(ProlateError::Validation(
                    "separable operator file must declare n as a pair".into(),
                ));
            }
            Ok(ToeplitzOperator {
                group: file.group,
                kind: OperatorKind::Separable(Box::new((a, b))),
                symbol_tag: file.symbol_tag,
            })
        } else {
            let col = file.first_column.ok_or_else(|| {
                ProlateError::Validation("operator file lacks first_column".into())
            })?;
            let n = match file.n {
                DimsField::One(n) => n,
                DimsField::Two(_) => {
                    return Err(ProlateError::Validation(
                        "non-separable operator file must declare scalar n".into(),
                    ))
                }
            };
            if col.len() != n {
                return Err(ProlateError::Validation(format!(
                    "first_column length {} disagrees with n = {n}",
                    col.len()
                )));
            }
            ToeplitzOperator::new_1d(
                file.group,
                col.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
                file.symbol_tag,
            )
        }
    }
}

impl Serialize for ToeplitzOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ToeplitzOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = OperatorFile::deserialize(deserializer)?;
        ToeplitzOperator::try_from(file).map_err(D::Error::custom)
    }
}
