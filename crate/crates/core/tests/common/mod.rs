//! Reference oracles for integration tests.
//!
//! Everything here is deliberately independent of the library's own numeric
//! paths: eigenvalues come from a hand-written cyclic Jacobi sweep, matrices
//! are materialized by double loops, and integrals are done with composite
//! Simpson quadrature. Keep it slow and obvious.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Cyclic Jacobi eigensolver for a real symmetric matrix. Returns
/// eigenvalues (descending) and matching eigenvector columns.
pub fn jacobi_eigen_real(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + m.norm()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    (eigenvalues, vectors)
}

/// Eigenvalues (descending) of a complex Hermitian matrix via the real
/// embedding `[[X, -Y], [Y, X]]`, whose spectrum is that of `X + iY` with
/// every eigenvalue doubled.
pub fn jacobi_eigen_hermitian_values(h: &DMatrix<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            e[(r, c)] = z.re;
            e[(r, n + c)] = -z.im;
            e[(n + r, c)] = z.im;
            e[(n + r, n + c)] = z.re;
        }
    }
    let (vals, _) = jacobi_eigen_real(&e);
    vals.into_iter().step_by(2).collect()
}

/// Brute-force Toeplitz materialization from a first column.
pub fn toeplitz_bruteforce(col: &[Complex64]) -> DMatrix<Complex64> {
    let n = col.len();
    DMatrix::from_fn(n, n, |r, c| {
        if r >= c {
            col[r - c]
        } else {
            col[c - r].conj()
        }
    })
}

/// Double-loop dense matrix-vector product.
pub fn dense_matvec(a: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    let n = a.nrows();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for r in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..a.ncols() {
            acc += a[(r, c)] * x[c];
        }
        y[r] = acc;
    }
    y
}

/// Composite Simpson integration of a complex-valued function over `[a, b]`.
pub fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, intervals: usize) -> Complex64 {
    let n = if intervals % 2 == 0 { intervals } else { intervals + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// `integral over [-w, w] of e^(j 2 pi f m) df` by Simpson quadrature.
pub fn band_integral_quadrature(w: f64, m: i64) -> Complex64 {
    simpson(
        |f| {
            let t = 2.0 * std::f64::consts::PI * f * m as f64;
            Complex64::new(t.cos(), t.sin())
        },
        -w,
        w,
        1 << 14,
    )
}

/// Deterministic xorshift-based pseudo-random stream for oracle inputs.
/// Independent of the library's RNG choices.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [-1, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    pub fn complex(&mut self) -> Complex64 {
        Complex64::new(self.uniform(), self.uniform())
    }
}
