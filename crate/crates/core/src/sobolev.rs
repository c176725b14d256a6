//! Numerics for the Sobolev inner product
//!
//! ```text
//! <f, g> = int f g dmu0 + int f' g' dmu1,    ||f||^p = int |f|^p dmu0 + int |f'|^p dmu1
//! ```
//!
//! Measures are replaced by fixed discrete rules (Gauss-Legendre cells,
//! geometrically graded toward singular factor centres, plus the exact
//! atoms). Polynomials are handled in the Legendre basis of the common
//! support interval and converted to monomials only for output.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::decide::{niff_screen, NiffScreen};
use crate::gl_tables::{GL32_NODES, GL32_WEIGHTS};
use crate::linalg::{self, Complex, DMatrix, DVector, LinalgError};
use crate::math::{abs, exp, hypot, ln, powf, sqrt, KahanSum};
use crate::measure::{integrate_pow, Measure, MeasureView};
use crate::quad::{self, Point};
use crate::{Endpoint, Side};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub enum SobolevError {
    /// The Gram matrix is not positive definite.
    Degenerate(LinalgError),
    DegreeTooLarge(usize),
    BadExponent(f64),
    InfiniteMeasure,
    NoConvergence { best: Vec<f64>, grad_norm: f64 },
    DegenerateInstance(String),
    Precondition(String),
}

impl fmt::Display for SobolevError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SobolevError::Degenerate(e) => write!(f, "degenerate Gram matrix: {e}"),
            SobolevError::DegreeTooLarge(n) => write!(f, "degree {n} exceeds the cap {MAX_DEGREE}"),
            SobolevError::BadExponent(p) => write!(f, "p = {p} must lie in (1, inf)"),
            SobolevError::InfiniteMeasure => write!(f, "measures must be finite"),
            SobolevError::NoConvergence { best, grad_norm } => {
                write!(f, "optimizer did not converge (gradient norm {grad_norm:e}); best iterate {best:?}")
            }
            SobolevError::DegenerateInstance(s) => write!(f, "degenerate instance: {s}"),
            SobolevError::Precondition(s) => write!(f, "precondition failed: {s}"),
        }
    }
}

impl core::error::Error for SobolevError {}

impl From<LinalgError> for SobolevError {
    fn from(e: LinalgError) -> Self {
        SobolevError::Degenerate(e)
    }
}

fn check_p(p: f64) -> Result<(), SobolevError> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(SobolevError::BadExponent(p))
    }
}

fn check_n(n: usize) -> Result<(), SobolevError> {
    if n > MAX_DEGREE {
        Err(SobolevError::DegreeTooLarge(n))
    } else {
        Ok(())
    }
}

/// A discrete measure `sum_i m_i delta_{x_i}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Discrete {
    pub x: Vec<f64>,
    pub m: Vec<f64>,
}

const CELLS_PER_HALF: usize = 4;
const GRADED_LEVELS: usize = 48;

impl Discrete {
    fn push(&mut self, x: f64, m: f64) {
        if m > 0.0 && m.is_finite() {
            self.x.push(x);
            self.m.push(m);
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn total(&self) -> f64 {
        let mut s = KahanSum::default();
        for &m in &self.m {
            s.add(m);
        }
        s.value()
    }
}

/// Quadrature rule for `mu`, exact up to the Gauss-Legendre order for
/// polynomials times smooth densities.
pub fn discretize(mu: &Measure) -> Discrete {
    let w = mu.density();
    let mut d = Discrete::default();
    for (i, pc) in w.pieces().iter().enumerate() {
        let Some(fs) = &pc.factors else {
            continue;
        };
        let h = 0.5 * (pc.hi - pc.lo);
        for (anchor, side) in [(pc.lo, Side::Right), (pc.hi, Side::Left)] {
            let dir = side.dir();
            let singular = fs.iter().any(|f| f.center() == Some(anchor));
            let dens = |t: f64| exp(w.ln_eval(i, &Point { x: anchor + dir * t, anchor, off: dir * t, u: -ln(t) }));
            let cell = |d: &mut Discrete, t0: f64, t1: f64| {
                let c = 0.5 * (t0 + t1);
                let hw = 0.5 * (t1 - t0);
                for (x, wt) in GL32_NODES.iter().zip(GL32_WEIGHTS.iter()) {
                    for t in [c - hw * x, c + hw * x] {
                        d.push(anchor + dir * t, wt * hw * dens(t));
                    }
                }
            };
            let cw = h / CELLS_PER_HALF as f64;
            for j in 0..CELLS_PER_HALF {
                let t1 = if j + 1 == CELLS_PER_HALF { h } else { (j + 1) as f64 * cw };
                if j == 0 && singular {
                    let mut hi = t1;
                    for _ in 0..GRADED_LEVELS {
                        let lo = 0.5 * hi;
                        cell(&mut d, lo, hi);
                        hi = lo;
                    }
                    let (c0, c1) = if dir > 0.0 { (anchor, anchor + hi) } else { (anchor - hi, anchor) };
                    let r = integrate_pow(w, 1.0, c0, c1, 1e-10);
                    if r.is_finite() {
                        d.push(anchor, r.mid());
                    }
                } else {
                    cell(&mut d, j as f64 * cw, t1);
                }
            }
        }
    }
    for t in mu.atoms() {
        d.push(t.x, t.mass);
    }
    d
}

/// Legendre polynomials and derivatives at `t`.
fn legendre(t: f64, n: usize, p: &mut [f64], dp: &mut [f64]) {
    p[0] = 1.0;
    dp[0] = 0.0;
    if n == 0 {
        return;
    }
    p[1] = t;
    dp[1] = 1.0;
    for k in 1..n {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * t * p[k] - kf * p[k - 1]) / (kf + 1.0);
        dp[k + 1] = dp[k - 1] + (2.0 * kf + 1.0) * p[k];
    }
}

/// Monomial coefficients (in `t`) of `P_0..P_n`.
fn legendre_coeffs(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![1.0]];
    if n >= 1 {
        c.push(vec![0.0, 1.0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let mut next = vec![0.0; k + 2];
        for (j, v) in c[k].iter().enumerate() {
            next[j + 1] += (2.0 * kf + 1.0) * v / (kf + 1.0);
        }
        for (j, v) in c[k - 1].iter().enumerate() {
            next[j] -= kf * v / (kf + 1.0);
        }
        c.push(next);
    }
    c
}

/// Affine map `t = s (x - c0)` of `[a, b]` onto `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Basis {
    pub a: f64,
    pub b: f64,
    s: f64,
    c0: f64,
}

impl Basis {
    pub fn new(a: f64, b: f64) -> Basis {
        Basis { a, b, s: 2.0 / (b - a), c0: 0.5 * (a + b) }
    }

    fn t(&self, x: f64) -> f64 {
        self.s * (x - self.c0)
    }

    /// Leading monomial coefficient of `phi_n(x) = P_n(t(x))`.
    fn kappa(&self, n: usize) -> f64 {
        let mut k = 1.0;
        for j in 1..=n {
            k *= (2.0 * j as f64 - 1.0) / j as f64 * self.s;
        }
        k
    }

    /// Monomial coefficients in `x` of `sum_k c_k phi_k`.
    pub fn to_monomial(&self, c: &[f64]) -> Vec<f64> {
        let n = c.len() - 1;
        let lc = legendre_coeffs(n);
        let mut pt = vec![0.0; n + 1];
        for (k, ck) in c.iter().enumerate() {
            for (j, v) in lc[k].iter().enumerate() {
                pt[j] += ck * v;
            }
        }
        let mut res = vec![0.0; n + 1];
        let (lin, cst) = (self.s, -self.s * self.c0);
        let mut deg = 0;
        for j in (0..=n).rev() {
            // res = res * (lin x + cst) + pt[j]
            let mut next = vec![0.0; n + 1];
            for i in 0..=deg {
                if i + 1 <= n {
                    next[i + 1] += res[i] * lin;
                }
                next[i] += res[i] * cst;
            }
            next[0] += pt[j];
            res = next;
            if j < n {
                deg += 1;
            }
        }
        res
    }
}

/// Rows of basis values at the nodes of a discrete measure.
#[derive(Clone, Debug)]
struct Rows {
    dim: usize,
    data: Vec<f64>,
    m: Vec<f64>,
}

impl Rows {
    fn new(dim: usize) -> Rows {
        Rows { dim, data: Vec::new(), m: Vec::new() }
    }

    fn push(&mut self, row: &[f64], m: f64) {
        self.data.extend_from_slice(row);
        self.m.push(m);
    }

    fn extend(&mut self, o: &Rows) {
        self.data.extend_from_slice(&o.data);
        self.m.extend_from_slice(&o.m);
    }

    fn len(&self) -> usize {
        self.m.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Orthonormal basis of the vectors orthogonal to every row, when there
    /// are fewer rows than coordinates.
    fn complement(&self) -> Option<DMatrix<f64>> {
        if self.len() == 0 || self.len() >= self.dim {
            return None;
        }
        let project = |v: &mut Vec<f64>, basis: &[Vec<f64>]| {
            for _ in 0..2 {
                for q in basis {
                    let t = dotv(v, q);
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= t * b);
                }
            }
        };
        let mut span: Vec<Vec<f64>> = Vec::new();
        for i in 0..self.len() {
            let mut v = self.row(i).to_vec();
            let n0 = normv(&v);
            project(&mut v, &span);
            let n = normv(&v);
            if n > 1e-10 * n0 {
                span.push(v.iter().map(|x| x / n).collect());
            }
        }
        let mut out: Vec<Vec<f64>> = Vec::new();
        for j in 0..self.dim {
            let mut v = vec![0.0; self.dim];
            v[j] = 1.0;
            project(&mut v, &span);
            project(&mut v, &out);
            let n = normv(&v);
            if n > 0.1 {
                let mut v: Vec<f64> = v.iter().map(|x| x / n).collect();
                project(&mut v, &span);
                out.push(v);
            }
        }
        if out.is_empty() {
            return None;
        }
        Some(DMatrix::from_fn(self.dim, out.len(), |i, j| out[j][i]))
    }

    fn dot(&self, i: usize, c: &[f64]) -> f64 {
        self.row(i).iter().zip(c).map(|(a, b)| a * b).sum()
    }

    /// `sum_i m_i |r_i . c|^p` and its gradient.
    fn lp(&self, c: &[f64], p: f64) -> (f64, Vec<f64>) {
        let mut s = KahanSum::default();
        let mut g = vec![0.0; self.dim];
        for i in 0..self.len() {
            let v = self.dot(i, c);
            let av = abs(v);
            if av == 0.0 {
                continue;
            }
            s.add(self.m[i] * powf(av, p));
            let d = p * self.m[i] * powf(av, p - 1.0) * v.signum();
            for (gk, rk) in g.iter_mut().zip(self.row(i)) {
                *gk += d * rk;
            }
        }
        (s.value(), g)
    }

    /// Hessian of [`Rows::lp`] with `|v|` floored relative to the largest value.
    fn lp_hess(&self, c: &[f64], p: f64) -> DMatrix<f64> {
        let vals: Vec<f64> = (0..self.len()).map(|i| abs(self.dot(i, c))).collect();
        let vmax = vals.iter().copied().fold(0.0, f64::max);
        let floor = 1e-8 * vmax.max(1e-300);
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (i, &v) in vals.iter().enumerate() {
            let wgt = p * (p - 1.0) * self.m[i] * powf(v.max(floor), p - 2.0);
            let r = self.row(i);
            for a in 0..self.dim {
                for b in 0..=a {
                    h[(a, b)] += wgt * r[a] * r[b];
                }
            }
        }
        for a in 0..self.dim {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        h
    }

    /// `sum_i m_i (r_i r_i^T)`.
    fn gram(&self) -> DMatrix<f64> {
        let mut acc = vec![KahanSum::default(); self.dim * self.dim];
        for i in 0..self.len() {
            let r = self.row(i);
            for a in 0..self.dim {
                for b in 0..=a {
                    acc[a * self.dim + b].add(self.m[i] * r[a] * r[b]);
                }
            }
        }
        DMatrix::from_fn(self.dim, self.dim, |a, b| {
            let (i, j) = if a >= b { (a, b) } else { (b, a) };
            acc[i * self.dim + j].value()
        })
    }
}

/// Discretized pair `(mu0, mu1)` on a common interval.
#[derive(Clone, Debug)]
pub struct SobolevSpace {
    pub basis: Basis,
    pub d0: Discrete,
    pub d1: Discrete,
}

/// Union of the support intervals of several measures.
fn common_interval(ms: &[&Measure]) -> (f64, f64) {
    let mut a = f64::INFINITY;
    let mut b = f64::NEG_INFINITY;
    for m in ms {
        let (x, y) = m.support();
        a = a.min(x);
        b = b.max(y);
    }
    (a, b)
}

impl SobolevSpace {
    pub fn new(mu0: &Measure, mu1: &Measure) -> Result<SobolevSpace, SobolevError> {
        if !mu0.is_finite() || !mu1.is_finite() {
            return Err(SobolevError::InfiniteMeasure);
        }
        let (a, b) = common_interval(&[mu0, mu1]);
        Ok(SobolevSpace { basis: Basis::new(a, b), d0: discretize(mu0), d1: discretize(mu1) })
    }

    /// Rows for `f` at `mu0` nodes and `f'` at `mu1` nodes, degree `n`.
    fn rows(&self, n: usize) -> (Rows, Rows) {
        let mut p = vec![0.0; n + 1];
        let mut dp = vec![0.0; n + 1];
        let mut r0 = Rows::new(n + 1);
        for (&x, &m) in self.d0.x.iter().zip(&self.d0.m) {
            legendre(self.basis.t(x), n, &mut p, &mut dp);
            r0.push(&p, m);
        }
        let mut r1 = Rows::new(n + 1);
        for (&x, &m) in self.d1.x.iter().zip(&self.d1.m) {
            legendre(self.basis.t(x), n, &mut p, &mut dp);
            let row: Vec<f64> = dp.iter().map(|v| v * self.basis.s).collect();
            r1.push(&row, m);
        }
        (r0, r1)
    }

    /// Rows for `x f` and `(x f)'`.
    fn rows_x(&self, n: usize) -> (Rows, Rows) {
        let mut p = vec![0.0; n + 1];
        let mut dp = vec![0.0; n + 1];
        let mut r0 = Rows::new(n + 1);
        for (&x, &m) in self.d0.x.iter().zip(&self.d0.m) {
            legendre(self.basis.t(x), n, &mut p, &mut dp);
            let row: Vec<f64> = p.iter().map(|v| v * x).collect();
            r0.push(&row, m);
        }
        let mut r1 = Rows::new(n + 1);
        for (&x, &m) in self.d1.x.iter().zip(&self.d1.m) {
            legendre(self.basis.t(x), n, &mut p, &mut dp);
            let row: Vec<f64> = p.iter().zip(&dp).map(|(v, d)| v + x * d * self.basis.s).collect();
            r1.push(&row, m);
        }
        (r0, r1)
    }

    fn norm_rows(&self, n: usize) -> Rows {
        let (mut r, r1) = self.rows(n);
        r.extend(&r1);
        r
    }

    fn norm_rows_x(&self, n: usize) -> Rows {
        let (mut r, r1) = self.rows_x(n);
        r.extend(&r1);
        r
    }

    /// Gram matrices `G` of `<phi_i, phi_j>` and `A` of `<x phi_i, x phi_j>`
    /// in the Legendre basis.
    pub fn legendre_gram(&self, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.norm_rows(n).gram(), self.norm_rows_x(n).gram())
    }

    /// Legendre coefficients of the monic Sobolev orthogonal polynomial.
    pub fn sop_legendre(&self, n: usize) -> Result<Vec<f64>, SobolevError> {
        let lead = 1.0 / self.basis.kappa(n);
        if n == 0 {
            return Ok(vec![lead]);
        }
        let (g, _) = self.legendre_gram(n);
        let g0 = g.view((0, 0), (n, n)).into_owned();
        let l = linalg::cholesky(&g0)?;
        let rhs = DVector::from_fn(n, |j, _| -g[(j, n)] * lead);
        let c = linalg::chol_solve(&l, &rhs);
        let mut v: Vec<f64> = c.iter().copied().collect();
        v.push(lead);
        Ok(v)
    }

    pub fn monic_from_legendre(&self, c: &[f64]) -> MonicPoly {
        let mut m = self.basis.to_monomial(c);
        m.pop();
        MonicPoly { coeffs: m }
    }
}

/// `x^n + coeffs[n-1] x^{n-1} + ... + coeffs[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonicPoly {
    pub coeffs: Vec<f64>,
}

impl MonicPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// All coefficients, constant term first, ending with the leading 1.
    pub fn all_coeffs(&self) -> Vec<f64> {
        let mut v = self.coeffs.clone();
        v.push(1.0);
        v
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(1.0, |acc, c| acc * x + c)
    }

    fn eval_c(&self, z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
        let mut p = Complex::new(1.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + Complex::new(*c, 0.0);
        }
        (p, dp)
    }
}

/// Gram matrices in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GramBundle {
    pub n: usize,
    /// `G_ij = int x^{i+j} dmu0 + i j int x^{i+j-2} dmu1`.
    pub g: DMatrix<f64>,
    /// `A_ij = <x^{i+1}, x^{j+1}>`.
    pub a: DMatrix<f64>,
}

pub fn sobolev_gram(mu0: &Measure, mu1: &Measure, n: usize) -> Result<GramBundle, SobolevError> {
    check_n(n)?;
    let sp = SobolevSpace::new(mu0, mu1)?;
    let mom = |d: &Discrete, k: usize| {
        let mut s = KahanSum::default();
        for (&x, &m) in d.x.iter().zip(&d.m) {
            s.add(m * crate::math::powi(x, k as i32));
        }
        s.value()
    };
    let m0: Vec<f64> = (0..=2 * n + 2).map(|k| mom(&sp.d0, k)).collect();
    let m1: Vec<f64> = (0..=2 * n + 2).map(|k| mom(&sp.d1, k)).collect();
    let g = DMatrix::from_fn(n + 1, n + 1, |i, j| {
        let d = if i > 0 && j > 0 { (i * j) as f64 * m1[i + j - 2] } else { 0.0 };
        m0[i + j] + d
    });
    let a = DMatrix::from_fn(n + 1, n + 1, |i, j| m0[i + j + 2] + ((i + 1) * (j + 1)) as f64 * m1[i + j]);
    Ok(GramBundle { n, g, a })
}

/// Monic Sobolev orthogonal polynomial of degree `n` (p = 2).
pub fn sop_monic(mu0: &Measure, mu1: &Measure, n: usize) -> Result<MonicPoly, SobolevError> {
    check_n(n)?;
    let sp = SobolevSpace::new(mu0, mu1)?;
    let c = sp.sop_legendre(n)?;
    Ok(sp.monic_from_legendre(&c))
}

/// Zeros of a monic polynomial (companion eigenvalues after centring and
/// scaling, polished by Newton steps).
pub fn zeros(q: &MonicPoly) -> Vec<Complex<f64>> {
    let n = q.degree();
    if n == 0 {
        return Vec::new();
    }
    let c = -q.coeffs[n - 1] / n as f64;
    // Taylor shift: coefficients of q(y + c).
    let mut a = q.all_coeffs();
    for k in 0..n {
        for j in (k..n).rev() {
            a[j] += c * a[j + 1];
        }
    }
    let mut rho: f64 = 0.0;
    for (k, ak) in a.iter().enumerate().take(n) {
        if *ak != 0.0 {
            rho = rho.max(powf(abs(*ak), 1.0 / (n - k) as f64));
        }
    }
    if rho == 0.0 {
        return vec![Complex::new(c, 0.0); n];
    }
    let scaled: Vec<f64> = (0..n).map(|k| a[k] / powf(rho, (n - k) as f64)).collect();
    let mut z: Vec<Complex<f64>> =
        linalg::monic_roots(&scaled).into_iter().map(|w| w * rho + Complex::new(c, 0.0)).collect();
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = q.eval_c(*zi);
            if cabs(dp) == 0.0 {
                break;
            }
            let next = *zi - p / dp;
            if cabs(q.eval_c(next).0) < cabs(p) {
                *zi = next;
            } else {
                break;
            }
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

fn cabs(z: Complex<f64>) -> f64 {
    hypot(z.re, z.im)
}

fn rng(seed: u64, start: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ start.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn uniform(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normv(a: &[f64]) -> f64 {
    sqrt(dotv(a, a))
}

/// Maximizes a scale-invariant objective by projected gradient ascent on
/// the unit sphere with Barzilai-Borwein steps and Armijo backtracking.
fn ascend(f: &dyn Fn(&[f64]) -> Option<(f64, Vec<f64>)>, x0: &[f64], iters: usize) -> Option<(f64, Vec<f64>)> {
    let nx = normv(x0);
    if !(nx > 0.0) {
        return None;
    }
    let mut x: Vec<f64> = x0.iter().map(|v| v / nx).collect();
    let (mut fx, mut g) = f(&x)?;
    let mut step = 1.0 / normv(&g).max(1e-300);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for _ in 0..iters {
        let gx = dotv(&g, &x);
        let gt: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - gx * xi).collect();
        let gn = normv(&gt);
        if gn <= 1e-14 * (1.0 + abs(fx)) {
            break;
        }
        if let Some((px, pg)) = &prev {
            let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gt.iter().zip(pg).map(|(a, b)| a - b).collect();
            let sy = dotv(&s, &y);
            if sy < 0.0 {
                step = dotv(&s, &s) / -sy;
            }
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut xn: Vec<f64> = x.iter().zip(&gt).map(|(a, b)| a + step * b).collect();
            let nn = normv(&xn);
            xn.iter_mut().for_each(|v| *v /= nn);
            if let Some((fn_, gn_)) = f(&xn) {
                if fn_ >= fx + 1e-4 * step * gn * gn || (fn_ > fx && step < 1e-12) {
                    prev = Some((x.clone(), gt.clone()));
                    x = xn;
                    fx = fn_;
                    g = gn_;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some((fx, x))
}

/// Norm of the multiplication operator on polynomials of degree `<= n`:
/// exact on `P_n` for `p = 2`, a lower bound otherwise.
pub fn m_norm(mu0: &Measure, mu1: &Measure, p: f64, n: usize, seed: u64) -> Result<f64, SobolevError> {
    check_p(p)?;
    check_n(n)?;
    let sp = SobolevSpace::new(mu0, mu1)?;
    if p == 2.0 {
        let (g, a) = sp.legendre_gram(n);
        let (l, _) = linalg::gen_eig_max(&a, &g)?;
        return Ok(sqrt(l.max(0.0)));
    }
    let r = sp.norm_rows(n);
    let rx = sp.norm_rows_x(n);
    let obj = |c: &[f64]| {
        let (sf, gf) = r.lp(c, p);
        let (sx, gx) = rx.lp(c, p);
        if !(sf > 0.0) || !(sx > 0.0) {
            return None;
        }
        let g = gx.iter().zip(&gf).map(|(a, b)| (a / sx - b / sf) / p).collect();
        Some(((ln(sx) - ln(sf)) / p, g))
    };
    let (g, a) = sp.legendre_gram(n);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Ok((_, v)) = linalg::gen_eig_max(&a, &g) {
        starts.push(v.iter().copied().collect());
    } else {
        return Err(SobolevError::Degenerate(LinalgError::Singular { null_vector: Vec::new() }));
    }
    for k in 1..8u64 {
        let mut rg = rng(seed, k);
        starts.push((0..=n).map(|_| uniform(&mut rg)).collect());
    }
    let mut best = f64::NEG_INFINITY;
    for s in &starts {
        if let Some((v, _)) = ascend(&obj, s, 400) {
            if v > best {
                best = v;
            }
        }
    }
    Ok(exp(best))
}

/// `||M||_n` for `n = 0..=nmax` at `p = 2`.
pub fn m_norm_sequence(mu0: &Measure, mu1: &Measure, nmax: usize) -> Result<Vec<f64>, SobolevError> {
    check_n(nmax)?;
    let sp = SobolevSpace::new(mu0, mu1)?;
    let (g, a) = sp.legendre_gram(nmax);
    let mut out = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let gn = g.view((0, 0), (n + 1, n + 1)).into_owned();
        let an = a.view((0, 0), (n + 1, n + 1)).into_owned();
        let (l, _) = linalg::gen_eig_max(&an, &gn)?;
        out.push(sqrt(l.max(0.0)));
    }
    Ok(out)
}

/// The convex problem `min_b ||q_b||^p` over monic `q_b` of degree `n`,
/// with `b` the Legendre coefficients of `phi_0..phi_{n-1}`.
#[derive(Clone, Debug)]
pub struct ExtremalProblem {
    space: SobolevSpace,
    rows: Rows,
    n: usize,
    p: f64,
    lead: f64,
}

/// One optimizer run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalRun {
    pub b: Vec<f64>,
    pub phi: f64,
    pub grad_norm: f64,
    /// Objective after every accepted step.
    pub history: Vec<f64>,
    pub converged: bool,
}

impl ExtremalProblem {
    pub fn new(mu0: &Measure, mu1: &Measure, n: usize, p: f64) -> Result<ExtremalProblem, SobolevError> {
        check_p(p)?;
        check_n(n)?;
        let space = SobolevSpace::new(mu0, mu1)?;
        let rows = space.norm_rows(n);
        let lead = 1.0 / space.basis.kappa(n);
        Ok(ExtremalProblem { space, rows, n, p, lead })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn full(&self, b: &[f64]) -> Vec<f64> {
        let mut c = b.to_vec();
        c.push(self.lead);
        c
    }

    /// `Phi(b)` and its gradient.
    pub fn phi_grad(&self, b: &[f64]) -> (f64, Vec<f64>) {
        let (v, mut g) = self.rows.lp(&self.full(b), self.p);
        g.truncate(self.n);
        (v, g)
    }

    pub fn phi(&self, b: &[f64]) -> f64 {
        self.phi_grad(b).0
    }

    pub fn to_monic(&self, b: &[f64]) -> MonicPoly {
        self.space.monic_from_legendre(&self.full(b))
    }

    /// Start at the `p = 2` solution when it exists.
    pub fn initial(&self) -> Vec<f64> {
        match self.space.sop_legendre(self.n) {
            Ok(mut c) => {
                c.pop();
                c
            }
            Err(_) => vec![0.0; self.n],
        }
    }

    /// Damped Newton-preconditioned descent with Armijo backtracking.
    pub fn minimize(&self, start: &[f64], tol: f64, max_iter: usize) -> ExtremalRun {
        let mut b = start.to_vec();
        let (mut f, mut g) = self.phi_grad(&b);
        let mut history = vec![f];
        let mut converged = false;
        for _ in 0..max_iter {
            let gn = normv(&g);
            if gn <= tol * (1.0 + f) {
                converged = true;
                break;
            }
            let mut h = self.rows.lp_hess(&self.full(&b), self.p).view((0, 0), (self.n, self.n)).into_owned();
            let ridge = 1e-14 * (0..self.n).map(|i| h[(i, i)]).fold(0.0, f64::max);
            for i in 0..self.n {
                h[(i, i)] += ridge;
            }
            let gv = DVector::from_column_slice(&g);
            let mut d: Vec<f64> = match h.cholesky() {
                Some(c) => (-c.solve(&gv)).iter().copied().collect(),
                None => g.iter().map(|v| -v).collect(),
            };
            let mut slope = dotv(&g, &d);
            if !(slope < 0.0) {
                d = g.iter().map(|v| -v).collect();
                slope = -gn * gn;
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..80 {
                let bn: Vec<f64> = b.iter().zip(&d).map(|(x, y)| x + t * y).collect();
                let (fnew, gnew) = self.phi_grad(&bn);
                if fnew <= f + 1e-4 * t * slope && fnew < f {
                    b = bn;
                    f = fnew;
                    g = gnew;
                    history.push(f);
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                converged = normv(&g) <= tol * (1.0 + f) * 1e3;
                break;
            }
        }
        let grad_norm = normv(&g);
        if grad_norm <= tol * (1.0 + f) {
            converged = true;
        }
        ExtremalRun { b, phi: f, grad_norm, history, converged }
    }
}

/// Monic extremal polynomial of degree `n` for the `W^{1,p}` norm, from
/// eight starts that must agree.
pub fn extremal_monic(mu0: &Measure, mu1: &Measure, n: usize, p: f64, tol: f64, seed: u64) -> Result<MonicPoly, SobolevError> {
    let pr = ExtremalProblem::new(mu0, mu1, n, p)?;
    if n == 0 {
        return Ok(MonicPoly { coeffs: Vec::new() });
    }
    let b0 = pr.initial();
    let scale = 1.0 + b0.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
    let mut runs = Vec::new();
    for k in 0..8u64 {
        let start: Vec<f64> = if k == 0 {
            b0.clone()
        } else {
            let mut r = rng(seed, k);
            b0.iter().map(|v| v + 0.5 * scale * uniform(&mut r)).collect()
        };
        runs.push(pr.minimize(&start, tol, 500));
    }
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.phi.total_cmp(&b.phi).then(i.cmp(j)))
        .map(|(_, r)| r.clone())
        .expect("eight runs");
    let agree = runs.iter().all(|r| abs(r.phi - best.phi) <= 1e-6 * (1.0 + best.phi));
    if !best.converged || !agree {
        return Err(SobolevError::NoConvergence { best: best.b, grad_norm: best.grad_norm });
    }
    Ok(pr.to_monic(&best.b))
}

/// Rows for `F(x) = int_a^x f` and `f` at the nodes of a discrete measure,
/// with `f = sum_k c_k phi_k`.
fn hardy_rows(basis: &Basis, d: &Discrete, deg: usize, antiderivative: bool) -> Rows {
    let mut p = vec![0.0; deg + 2];
    let mut dp = vec![0.0; deg + 2];
    let half = 0.5 * (basis.b - basis.a);
    let mut r = Rows::new(deg + 1);
    for (&x, &m) in d.x.iter().zip(&d.m) {
        let t = basis.t(x);
        legendre(t, deg + 1, &mut p, &mut dp);
        let row: Vec<f64> = if antiderivative {
            (0..=deg)
                .map(|k| {
                    let v = if k == 0 { t + 1.0 } else { (p[k + 1] - p[k - 1]) / (2.0 * k as f64 + 1.0) };
                    v * half
                })
                .collect()
        } else {
            p[..=deg].to_vec()
        };
        r.push(&row, m);
    }
    r
}

/// Quadratic forms of the `p = 2` Hardy ratio in the Legendre coordinates
/// of `f` on the common interval: `int F^2 dnu1`, `int F^2 dnu2`, `int f^2 dnu3`.
pub fn hardy_quadratic_forms(
    nu1: &Measure,
    nu2: &Measure,
    nu3: &Measure,
    degree: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>), SobolevError> {
    check_n(degree)?;
    let (a, b) = common_interval(&[nu1, nu2, nu3]);
    let basis = Basis::new(a, b);
    Ok((
        hardy_rows(&basis, &discretize(nu1), degree, true).gram(),
        hardy_rows(&basis, &discretize(nu2), degree, true).gram(),
        hardy_rows(&basis, &discretize(nu3), degree, false).gram(),
    ))
}

/// Lower bound on the best constant `c` in
/// `||F||_{L^p(nu1)} <= c (||F||_{L^p(nu2)} + ||f||_{L^p(nu3)})`, `F = int_a^x f`,
/// over polynomials `f` of the given degree.
pub fn empirical_best_constant(
    nu1: &Measure,
    nu2: &Measure,
    nu3: &Measure,
    p: f64,
    degree: usize,
    trials: usize,
    seed: u64,
) -> Result<f64, SobolevError> {
    check_p(p)?;
    check_n(degree)?;
    for m in [nu1, nu2, nu3] {
        if !m.is_finite() {
            return Err(SobolevError::InfiniteMeasure);
        }
    }
    if nu2.is_zero() && nu3.is_zero() {
        return Err(SobolevError::DegenerateInstance("nu2 and nu3 are both zero".into()));
    }
    let (a, b) = common_interval(&[nu1, nu2, nu3]);
    let basis = Basis::new(a, b);
    let r1 = hardy_rows(&basis, &discretize(nu1), degree, true);
    let r2 = hardy_rows(&basis, &discretize(nu2), degree, true);
    let r3 = hardy_rows(&basis, &discretize(nu3), degree, false);
    let ip = 1.0 / p;
    // At p = 2 the integrals are quadratic forms; evaluate them on the Gram
    // matrix when that is cheaper. Few-node rules stay on the rows, which keeps
    // values near zero accurate at the kink of the square root.
    let gram_of = |r: &Rows| (p == 2.0 && r.len() > r.dim).then(|| r.gram());
    let grams = [gram_of(&r1), gram_of(&r2), gram_of(&r3)];
    let form = |k: usize, r: &Rows, c: &[f64]| match &grams[k] {
        Some(g) => {
            let v = DVector::from_column_slice(c);
            let gv = g * &v;
            (v.dot(&gv), gv.iter().map(|x| 2.0 * x).collect::<Vec<f64>>())
        }
        None => r.lp(c, p),
    };
    let obj = |c: &[f64]| {
        let (s1, g1) = form(0, &r1, c);
        let (s2, g2) = form(1, &r2, c);
        let (s3, g3) = form(2, &r3, c);
        let den = powf(s2, ip) + powf(s3, ip);
        if !(s1 > 0.0) || !(den > 0.0) {
            return None;
        }
        let d2 = if s2 > 0.0 { ip * powf(s2, ip - 1.0) } else { 0.0 };
        let d3 = if s3 > 0.0 { ip * powf(s3, ip - 1.0) } else { 0.0 };
        let g = (0..c.len()).map(|k| ip * g1[k] / s1 - (d2 * g2[k] + d3 * g3[k]) / den).collect();
        Some((ip * ln(s1) - ln(den), g))
    };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let mut e0 = vec![0.0; degree + 1];
    e0[0] = 1.0;
    starts.push(e0);
    let g1 = r1.gram();
    let mut g23 = r2.gram() + r3.gram();
    let tr = (0..=degree).map(|i| g23[(i, i)]).sum::<f64>();
    for i in 0..=degree {
        g23[(i, i)] += 1e-14 * tr;
    }
    if let Ok((_, v)) = linalg::gen_eig_max(&g1, &g23) {
        starts.push(v.iter().copied().collect());
    }
    // The supremum may sit where F or f vanishes on the support of nu2 or nu3,
    // a kink of the ratio; start from the best direction inside each such subspace.
    if p == 2.0 {
        let (g2, g3) = (r2.gram(), r3.gram());
        for (zero_on, other) in [(&r3, &g2), (&r2, &g3)] {
            let Some(z) = zero_on.complement() else { continue };
            let a = z.transpose() * &g1 * &z;
            let mut g = z.transpose() * other * &z;
            let tr = (0..g.nrows()).map(|i| g[(i, i)]).sum::<f64>();
            for i in 0..g.nrows() {
                g[(i, i)] += 1e-14 * tr;
            }
            if let Ok((_, y)) = linalg::gen_eig_max(&a, &g) {
                starts.push((&z * y).iter().copied().collect());
            }
        }
    }
    for k in 0..trials as u64 {
        let mut rg = rng(seed, k + 1);
        starts.push((0..=degree).map(|_| uniform(&mut rg)).collect());
    }
    let mut best = f64::NEG_INFINITY;
    let mut any = false;
    for s in &starts {
        if let Some((v, _)) = ascend(&obj, s, 3000) {
            any = true;
            if v > best {
                best = v;
            }
        }
    }
    if !any {
        return Err(SobolevError::DegenerateInstance("the ratio is undefined on every start".into()));
    }
    Ok(exp(best))
}

/// Ratio `R_n` of the divergent test sequence `f_n = w3^{-1/(p-1)} 1_{[a_n, b_n]}`
/// near `b`, with `a_n = max(b0, b - 1/n)` and `int_{a_n}^{b_n} w3^{-1/(p-1)} = n`.
pub fn niff_witness(nu1: &Measure, nu2: &Measure, nu3: &Measure, p: f64, n: usize, tol: f64) -> Result<f64, SobolevError> {
    check_p(p)?;
    if n == 0 {
        return Err(SobolevError::Precondition("n must be positive".into()));
    }
    if niff_screen(nu1, nu2, nu3, p, Endpoint::B) != NiffScreen::Triggered {
        return Err(SobolevError::Precondition("the divergence screen is not triggered at b".into()));
    }
    let q = 1.0 / (p - 1.0);
    let w3 = nu3.density();
    let (_, b) = nu3.support();
    let last = w3.pieces().last().expect("nonempty tiling");
    let b0 = 0.5 * (last.lo + b);
    let an = b0.max(b - 1.0 / n as f64);
    let nf = n as f64;
    // Solve int_{a_n}^{b - d} w3^{-q} = n for d by bisection in ln d.
    let cum = |x: f64| integrate_pow(w3, -q, an, x, tol).mid();
    let (mut lo, mut hi) = (ln(b - an) - 745.0, ln(b - an));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let x = b - exp(mid);
        if !(x > an) || cum(x) > nf {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let bn = b - exp(0.5 * (lo + hi));
    // F on a grid of [a_n, b_n].
    let nodes = quad::layout(&[an, bn], 512);
    let mut f_at = vec![0.0; nodes.len()];
    let mut s = KahanSum::default();
    for i in 1..nodes.len() {
        s.add(integrate_pow(w3, -q, nodes[i - 1], nodes[i], tol).mid());
        f_at[i] = s.value();
    }
    let norm_f_big = |nu: &Measure| -> f64 {
        let mut acc = KahanSum::default();
        acc.add(powf(nf, p) * nu.measure_of(bn, b, true, true, tol).mid());
        for i in 1..nodes.len() {
            let mass = nu.measure_of(nodes[i - 1], nodes[i], true, false, tol).mid();
            if mass > 0.0 {
                acc.add(0.5 * (powf(f_at[i - 1], p) + powf(f_at[i], p)) * mass);
            }
        }
        powf(acc.value(), 1.0 / p)
    };
    let mut small = KahanSum::default();
    small.add(integrate_pow(w3, -q, an, bn, tol).mid());
    for t in nu3.atoms() {
        if t.x >= an && t.x <= bn {
            if let Ok(d) = w3.density_at(t.x) {
                small.add(powf(d, -q * p) * t.mass);
            }
        }
    }
    let num = norm_f_big(nu1);
    let den = norm_f_big(nu2) + powf(small.value(), 1.0 / p);
    Ok(num / den)
}
