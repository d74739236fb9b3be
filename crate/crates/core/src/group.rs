//! Discrete abelian groups, their dual domains, characters, and band sets.
//!
//! Three group geometries are supported: the integers `Z` (dual: the circle,
//! with points kept in canonical form `[-1/2, 1/2)`), the cyclic group `Z_N`
//! (dual: `Z_N` again), and the product `Z x Z` (dual: the torus). Haar
//! measure is fixed once for the whole library: counting measure on the
//! group side, normalized (probability) measure on the dual side. With that
//! pairing Parseval holds without stray constants and every band measure
//! lies in `(0, 1]` per axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ProlateError, Result};

/// Group geometry selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "kebab-case")]
pub enum GroupSpec {
    /// The integers `Z`.
    IntLine,
    /// The cyclic group `Z_N`.
    Cyclic {
        #[serde(rename = "N")]
        modulus: usize,
    },
    /// The product group `Z x Z`.
    Product2d,
}

impl GroupSpec {
    pub fn cyclic(modulus: usize) -> Result<Self> {
        if modulus == 0 {
            return Err(ProlateError::Parameter(
                "cyclic modulus must be at least 1".into(),
            ));
        }
        Ok(GroupSpec::Cyclic { modulus })
    }

    /// Short human-readable name used in provenance strings.
    pub fn describe(&self) -> String {
        match self {
            GroupSpec::IntLine => "int-line".into(),
            GroupSpec::Cyclic { modulus } => format!("cyclic(N={modulus})"),
            GroupSpec::Product2d => "product2d".into(),
        }
    }
}

/// A point of the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupPoint {
    Int(i64),
    /// Residue in `0..N` (canonical representative).
    Cyclic(i64),
    Pair(i64, i64),
}

impl GroupPoint {
    /// Group inverse within the group `spec`.
    pub fn inverse(&self, spec: &GroupSpec) -> Result<GroupPoint> {
        match (spec, self) {
            (GroupSpec::IntLine, GroupPoint::Int(n)) => Ok(GroupPoint::Int(-n)),
            (GroupSpec::Cyclic { modulus }, GroupPoint::Cyclic(k)) => {
                let m = *modulus as i64;
                if *k < 0 || *k >= m {
                    return Err(ProlateError::Domain(format!(
                        "cyclic point {k} outside 0..{m}"
                    )));
                }
                Ok(GroupPoint::Cyclic((m - k) % m))
            }
            (GroupSpec::Product2d, GroupPoint::Pair(a, b)) => Ok(GroupPoint::Pair(-a, -b)),
            _ => Err(ProlateError::Domain(format!(
                "point {self:?} does not belong to group {}",
                spec.describe()
            ))),
        }
    }
}

/// A point of the dual group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualPoint {
    /// Circle frequency; canonical representative lives in `[-1/2, 1/2)`.
    Circle(f64),
    /// Dual index of `Z_N`, canonical in `0..N`.
    CyclicIndex(i64),
    /// Torus frequency pair, canonical in `[-1/2, 1/2)^2`.
    Torus(f64, f64),
}

/// Wrap a real frequency into `[-1/2, 1/2)`.
pub fn wrap_frequency(f: f64) -> f64 {
    let mut r = f - f.round();
    // f.round() ties away from zero, so r is in [-1/2, 1/2]; fold the closed
    // right endpoint onto the left one.
    if r >= 0.5 {
        r -= 1.0;
    }
    r
}

impl DualPoint {
    pub fn circle(f: f64) -> Self {
        DualPoint::Circle(wrap_frequency(f))
    }

    pub fn torus(f1: f64, f2: f64) -> Self {
        DualPoint::Torus(wrap_frequency(f1), wrap_frequency(f2))
    }
}

/// Evaluate the character `chi_xi(g)`. Always unimodular.
pub fn character_eval(spec: &GroupSpec, xi: &DualPoint, g: &GroupPoint) -> Result<Complex64> {
    match (spec, xi, g) {
        (GroupSpec::IntLine, DualPoint::Circle(f), GroupPoint::Int(n)) => {
            Ok(unit_phase(*f * *n as f64))
        }
        (GroupSpec::Cyclic { modulus }, DualPoint::CyclicIndex(k), GroupPoint::Cyclic(n)) => {
            let m = *modulus as i64;
            if *n < 0 || *n >= m {
                return Err(ProlateError::Domain(format!(
                    "cyclic point {n} outside 0..{m}"
                )));
            }
            if *k < 0 || *k >= m {
                return Err(ProlateError::Domain(format!(
                    "cyclic dual index {k} outside 0..{m}"
                )));
            }
            Ok(unit_phase((k * n) as f64 / m as f64))
        }
        (GroupSpec::Product2d, DualPoint::Torus(f1, f2), GroupPoint::Pair(n1, n2)) => {
            Ok(unit_phase(*f1 * *n1 as f64 + *f2 * *n2 as f64))
        }
        _ => Err(ProlateError::Domain(format!(
            "character arguments {xi:?}, {g:?} do not match group {}",
            spec.describe()
        ))),
    }
}

/// `exp(j 2 pi t)`.
pub fn unit_phase(t: f64) -> Complex64 {
    let (s, c) = (2.0 * std::f64::consts::PI * t).sin_cos();
    Complex64::new(c, s)
}

/// Contiguous time window on the group side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeWindow {
    /// `{0, .., len-1}` on `Z` or `Z_N`.
    Block { len: usize },
    /// `{0, .., len1-1} x {0, .., len2-1}` on `Z x Z`.
    Block2d { len1: usize, len2: usize },
}

impl TimeWindow {
    /// Number of points in the window (its counting measure).
    pub fn size(&self) -> usize {
        match self {
            TimeWindow::Block { len } => *len,
            TimeWindow::Block2d { len1, len2 } => len1 * len2,
        }
    }

    /// Check the window fits the group (nonempty; within the modulus for `Z_N`).
    pub fn validate(&self, spec: &GroupSpec) -> Result<()> {
        match (spec, self) {
            (GroupSpec::IntLine, TimeWindow::Block { len }) => {
                if *len == 0 {
                    return Err(ProlateError::Parameter("window length must be >= 1".into()));
                }
                Ok(())
            }
            (GroupSpec::Cyclic { modulus }, TimeWindow::Block { len }) => {
                if *len == 0 {
                    return Err(ProlateError::Parameter("window length must be >= 1".into()));
                }
                if len > modulus {
                    return Err(ProlateError::Config(format!(
                        "window length {len} exceeds cyclic modulus {modulus}"
                    )));
                }
                Ok(())
            }
            (GroupSpec::Product2d, TimeWindow::Block2d { len1, len2 }) => {
                if *len1 == 0 || *len2 == 0 {
                    return Err(ProlateError::Parameter(
                        "window side lengths must be >= 1".into(),
                    ));
                }
                Ok(())
            }
            _ => Err(ProlateError::Config(format!(
                "window {self:?} does not match group {}",
                spec.describe()
            ))),
        }
    }
}

/// Band (frequency set) on the dual side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandSpec {
    /// `[-W, W]` on the circle, `W` in `(0, 1/2]`.
    Symmetric {
        #[serde(rename = "W")]
        half_width: f64,
    },
    /// `{0, .., K-1}` in the dual of `Z_N`.
    Index {
        #[serde(rename = "K")]
        count: usize,
    },
    /// `[-W1, W1] x [-W2, W2]` on the torus.
    Product {
        #[serde(rename = "W1")]
        w1: f64,
        #[serde(rename = "W2")]
        w2: f64,
    },
}

impl BandSpec {
    pub fn symmetric(half_width: f64) -> Self {
        BandSpec::Symmetric { half_width }
    }

    pub fn index(count: usize) -> Self {
        BandSpec::Index { count }
    }

    pub fn product(w1: f64, w2: f64) -> Self {
        BandSpec::Product { w1, w2 }
    }
}

fn check_half_width(w: f64, label: &str) -> Result<()> {
    if !w.is_finite() || w <= 0.0 || w > 0.5 {
        return Err(ProlateError::Parameter(format!(
            "{label} must lie in (0, 1/2], got {w}"
        )));
    }
    Ok(())
}

/// Normalized Haar measure of the band within the given group's dual.
///
/// Equals `2W` for a symmetric circle band, `K/N` for an index block in the
/// dual of `Z_N`, and `4 W1 W2` for a torus product band.
pub fn band_measure(spec: &GroupSpec, band: &BandSpec) -> Result<f64> {
    match (spec, band) {
        (GroupSpec::IntLine, BandSpec::Symmetric { half_width }) => {
            check_half_width(*half_width, "band half-width W")?;
            Ok(2.0 * half_width)
        }
        (GroupSpec::Cyclic { modulus }, BandSpec::Index { count }) => {
            if *count == 0 {
                return Err(ProlateError::Parameter(
                    "band index count K must be >= 1".into(),
                ));
            }
            if count > modulus {
                return Err(ProlateError::Parameter(format!(
                    "band index count K={count} exceeds modulus N={modulus}"
                )));
            }
            Ok(*count as f64 / *modulus as f64)
        }
        (GroupSpec::Product2d, BandSpec::Product { w1, w2 }) => {
            check_half_width(*w1, "band half-width W1")?;
            check_half_width(*w2, "band half-width W2")?;
            Ok(4.0 * w1 * w2)
        }
        _ => Err(ProlateError::Config(format!(
            "band {band:?} does not match group {}",
            spec.describe()
        ))),
    }
}
