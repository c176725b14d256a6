//! Small dense linear algebra on top of `nalgebra`: SPD factorization with a
//! pivot check, the largest generalized symmetric eigenpair, and polynomial
//! roots from a balanced companion matrix.

use alloc::vec::Vec;
use core::fmt;

pub use nalgebra::{Complex, DMatrix, DVector};

use crate::math::abs;

#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    /// The matrix is not numerically positive definite; carries an
    /// approximate null vector.
    Singular { null_vector: Vec<f64> },
    NoConvergence,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular { null_vector } => {
                write!(f, "matrix is singular; approximate null vector {null_vector:?}")
            }
            LinalgError::NoConvergence => write!(f, "eigenvalue iteration did not converge"),
        }
    }
}

impl core::error::Error for LinalgError {}

/// Relative pivot floor for positive definiteness.
pub const PIVOT_TOL: f64 = 1e-13;

fn null_vector(a: &DMatrix<f64>) -> Vec<f64> {
    let e = a.clone().symmetric_eigen();
    let mut k = 0;
    for i in 1..e.eigenvalues.len() {
        if e.eigenvalues[i] < e.eigenvalues[k] {
            k = i;
        }
    }
    e.eigenvectors.column(k).iter().copied().collect()
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let n = a.nrows();
    let dmax = (0..n).map(|i| abs(a[(i, i)])).fold(0.0, f64::max);
    let Some(c) = a.clone().cholesky() else {
        return Err(LinalgError::Singular { null_vector: null_vector(a) });
    };
    let l = c.l();
    for i in 0..n {
        let p = l[(i, i)] * l[(i, i)];
        if !(p > PIVOT_TOL * dmax) {
            return Err(LinalgError::Singular { null_vector: null_vector(a) });
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` for a lower Cholesky factor.
pub fn chol_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let y = l.solve_lower_triangular(b).expect("nonzero pivots");
    l.transpose().solve_upper_triangular(&y).expect("nonzero pivots")
}

/// Largest `lambda` with `A v = lambda G v`, `G` positive definite, and a
/// `G`-normalized eigenvector.
pub fn gen_eig_max(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<(f64, DVector<f64>), LinalgError> {
    let l = cholesky(g)?;
    let linv = l.clone().try_inverse().ok_or(LinalgError::NoConvergence)?;
    let mut c = &linv * a * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let e = c.symmetric_eigen();
    let mut k = 0;
    for i in 1..e.eigenvalues.len() {
        if e.eigenvalues[i] > e.eigenvalues[k] {
            k = i;
        }
    }
    let y = e.eigenvectors.column(k).into_owned();
    let v = l.transpose().solve_upper_triangular(&y).ok_or(LinalgError::NoConvergence)?;
    Ok((e.eigenvalues[k], v))
}

/// Roots of the monic polynomial `x^n + c[n-1] x^{n-1} + ... + c[0]` as
/// eigenvalues of its balanced companion matrix.
pub fn monic_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len();
    if n == 0 {
        return Vec::new();
    }
    // Exact zero roots make the companion matrix reducible; peel them off.
    let k = c.iter().take_while(|v| **v == 0.0).count();
    let mut z: Vec<Complex<f64>> = alloc::vec![Complex::new(0.0, 0.0); k];
    let c = &c[k..];
    let n = c.len();
    if n > 0 {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            m[(i, n - 1)] = -c[i];
        }
        let mut b = m.clone();
        balance(&mut b);
        let cap = 200 * n;
        let found = nalgebra::linalg::Schur::try_new(b, f64::EPSILON, cap)
            .or_else(|| nalgebra::linalg::Schur::try_new(m, f64::EPSILON, cap))
            .map(|s| s.complex_eigenvalues().iter().copied().collect::<Vec<_>>());
        z.extend(found.unwrap_or_else(|| durand_kerner(c)));
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

/// Simultaneous Weierstrass iteration for a monic polynomial whose roots
/// lie in the unit disk up to a modest factor.
fn durand_kerner(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len();
    let eval = |z: Complex<f64>| c.iter().rev().fold(Complex::new(1.0, 0.0), |acc, v| acc * z + Complex::new(*v, 0.0));
    let seed = Complex::new(0.4, 0.9);
    let mut z: Vec<Complex<f64>> = (0..n).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut den = Complex::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            if den.re == 0.0 && den.im == 0.0 {
                continue;
            }
            let d = eval(z[i]) / den;
            z[i] -= d;
            moved = moved.max(crate::math::hypot(d.re, d.im));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Parlett-Reinsch balancing by powers of two.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0;
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs(m[(j, i)]);
                    r += abs(m[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= g;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}
