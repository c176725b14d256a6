//! Random symbolic instances.

#![allow(dead_code)]

use rand::Rng;
use sobmuck_core::{Factor, Measure, MeasureView};

pub struct LambdaCase {
    pub nu1: Measure,
    pub nu2: Measure,
    pub p: f64,
    pub label: String,
}

fn support<R: Rng>(rng: &mut R) -> (f64, f64) {
    let a = rng.random_range(-2.0..1.0);
    (a, a + rng.random_range(0.5..3.0))
}

/// `nu1 = |x-a|^s1 |b-x|^t1 L(b-x)^d1 dx (+ m delta_b)`,
/// `nu2 = C |x-a|^s2 |b-x|^t2 dx`.
pub fn lambda_case<R: Rng>(rng: &mut R, atom_at_b: bool) -> LambdaCase {
    let p = rng.random_range(1.2..4.0);
    let (a, b) = support(rng);
    let s1 = rng.random_range(-0.9..2.0);
    let t1 = rng.random_range(-0.9..3.0);
    let d1 = if rng.random_bool(0.3) { rng.random_range(-2.0..2.0) } else { 0.0 };
    let s2 = rng.random_range(-0.9..2.0);
    let t2 = rng.random_range(-0.9..4.0);
    let c = rng.random_range(1.0..2.0);
    let mut f1 = vec![Factor::power(a, s1), Factor::power(b, t1)];
    if d1 != 0.0 {
        f1.push(Factor::log(b, d1));
    }
    let mut nu1 = Measure::from_factors(a, b, f1).unwrap();
    let mut m = 0.0;
    if atom_at_b {
        m = rng.random_range(0.1..3.0);
        nu1 = nu1.with_atom(b, m).unwrap();
    }
    let nu2 = Measure::from_factors(a, b, vec![Factor::power(a, s2), Factor::power(b, t2), Factor::envelope(c)]).unwrap();
    let label = format!("p={p:.3} [{a:.3},{b:.3}] nu1: s={s1:.3} t={t1:.3} d={d1:.3} m={m:.3}; nu2: s={s2:.3} t={t2:.3} C={c:.3}");
    LambdaCase { nu1, nu2, p, label }
}

/// As [`lambda_case`] but with `w2^{-1/(p-1)}` integrable near `a`.
pub fn restricted_case<R: Rng>(rng: &mut R) -> (LambdaCase, f64) {
    let atom = rng.random_bool(0.5);
    let mut c = lambda_case(rng, atom);
    let (a, b) = c.nu1.support();
    let s2 = rng.random_range(-0.9..(c.p - 1.0) * 0.95);
    let t2 = rng.random_range(-0.9..4.0);
    c.nu2 = Measure::from_factors(a, b, vec![Factor::power(a, s2), Factor::power(b, t2)]).unwrap();
    c.label = format!("{} | nu2 replaced: s={s2:.3} t={t2:.3}", c.label);
    let r0 = a + rng.random_range(0.1..0.9) * (b - a);
    (c, r0)
}

pub struct ClassifyCase {
    pub mu1: Measure,
    pub p: f64,
    pub centers: Vec<f64>,
    pub alphas: Vec<f64>,
}

/// Exponent in `(-1, 4)` outside `[p-1, p)`.
pub fn admissible_alpha<R: Rng>(rng: &mut R, p: f64) -> f64 {
    loop {
        let a = rng.random_range(-0.99..4.0);
        if !(a >= p - 1.0 && a < p) {
            return a;
        }
    }
}

/// `C prod |x - c_j|^{alpha_j} dx + atoms` on `[-1, 1]` with distinct centres;
/// when `critical` one exponent is drawn from `[p-1, p)`.
pub fn classify_case<R: Rng>(rng: &mut R, critical: bool) -> ClassifyCase {
    let p = rng.random_range(1.1..4.0);
    let k = rng.random_range(1..=4usize);
    let mut centers: Vec<f64> = Vec::new();
    while centers.len() < k {
        let c = match rng.random_range(0..4) {
            0 => -1.0,
            1 => 1.0,
            _ => (rng.random_range(-0.95f64..0.95) * 1e3).round() / 1e3,
        };
        if centers.iter().all(|&d| (d - c).abs() > 0.05) {
            centers.push(c);
        }
    }
    let mut alphas: Vec<f64> = centers.iter().map(|_| admissible_alpha(rng, p)).collect();
    if critical {
        let j = rng.random_range(0..k);
        alphas[j] = rng.random_range(p - 1.0..p);
    }
    let mut f: Vec<Factor> = centers.iter().zip(&alphas).map(|(&c, &a)| Factor::power(c, a)).collect();
    f.push(Factor::envelope(rng.random_range(1.0..3.0)));
    let mut mu1 = Measure::from_factors(-1.0, 1.0, f).unwrap();
    let n_atoms = rng.random_range(0..=3usize);
    let mut used: Vec<f64> = Vec::new();
    for _ in 0..n_atoms {
        let x = if rng.random_bool(0.5) { centers[rng.random_range(0..k)] } else { rng.random_range(-1.0..1.0) };
        if !used.contains(&x) {
            used.push(x);
            mu1 = mu1.with_atom(x, rng.random_range(0.1..2.0)).unwrap();
        }
    }
    ClassifyCase { mu1, p, centers, alphas }
}

/// Finite measure on `[0, 1]` with random power factors at both ends and
/// optional atoms; `zero_density` replaces the density by zero.
pub fn hardy_measure<R: Rng>(rng: &mut R, zero_density: bool) -> Measure {
    let mut m = if zero_density {
        Measure::zero(0.0, 1.0).unwrap()
    } else {
        Measure::from_factors(
            0.0,
            1.0,
            vec![Factor::power(0.0, rng.random_range(-0.5..2.0)), Factor::power(1.0, rng.random_range(-0.5..2.0))],
        )
        .unwrap()
        .scaled(rng.random_range(0.2..3.0))
    };
    for _ in 0..rng.random_range(0..=2usize) {
        let x = (rng.random_range(0.0..1.0f64) * 100.0).round() / 100.0;
        let mass = rng.random_range(0.1..2.0);
        if let Ok(n) = m.clone().with_atom(x, mass) {
            m = n;
        }
    }
    m
}
