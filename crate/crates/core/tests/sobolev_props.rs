mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobmuck_core::linalg::DMatrix;
use sobmuck_core::sobolev::{
    empirical_best_constant, extremal_monic, hardy_quadratic_forms, m_norm, m_norm_sequence, niff_witness,
    discretize, sop_monic, Discrete, zeros, ExtremalProblem, MonicPoly,
};
use sobmuck_core::{Factor, Measure, Outcome};

use common::{battery::battery, gen};

fn leb(a: f64, b: f64) -> Measure {
    Measure::lebesgue(a, b).unwrap()
}

fn zero(a: f64, b: f64) -> Measure {
    Measure::zero(a, b).unwrap()
}

/// Monic Legendre polynomials from `P_{n+1} = x P_n - n^2/(4n^2-1) P_{n-1}`,
/// constant term first.
fn legendre_monic(nmax: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![1.0], vec![0.0, 1.0]];
    for n in 1..nmax {
        let nf = n as f64;
        let g = nf * nf / (4.0 * nf * nf - 1.0);
        let mut next = vec![0.0; n + 2];
        for (k, c) in out[n].iter().enumerate() {
            next[k + 1] += c;
        }
        for (k, c) in out[n - 1].iter().enumerate() {
            next[k] -= g * c;
        }
        out.push(next);
    }
    out
}

/// Largest singular value of the `(n+2) x (n+1)` block of the Legendre
/// Jacobi matrix, i.e. `||x||` on `P_n` in `L^2(dx)`.
fn legendre_norm_oracle(n: usize) -> f64 {
    let mut j = DMatrix::<f64>::zeros(n + 2, n + 1);
    for k in 0..=n {
        let b = |k: usize| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        };
        if k + 1 < n + 2 {
            j[(k + 1, k)] = b(k + 1);
        }
        if k >= 1 {
            j[(k - 1, k)] = b(k);
        }
    }
    let m = j.transpose() * &j;
    m.symmetric_eigen().eigenvalues.max().sqrt()
}

#[test]
fn legendre_coefficients_match_recurrence() {
    let want = legendre_monic(6);
    for n in 0..=6 {
        let q = sop_monic(&leb(-1.0, 1.0), &zero(-1.0, 1.0), n).unwrap();
        let got = q.all_coeffs();
        assert_eq!(got.len(), want[n].len());
        for (g, w) in got.iter().zip(&want[n]) {
            assert!((g - w).abs() <= 1e-8, "n={n}: {got:?} vs {:?}", want[n]);
        }
    }
}

#[test]
fn atom_at_zero_first_polynomial() {
    let mu0 = leb(0.0, 1.0).with_atom(0.0, 1.0).unwrap();
    let mu1 = zero(0.0, 1.0).with_atom(0.0, 1.0).unwrap();
    let q = sop_monic(&mu0, &mu1, 1).unwrap();
    assert!((q.coeffs[0] + 0.25).abs() <= 1e-10, "{q:?}");
}

// <x^3 - d x, x> = 0 with mu0 = dx, mu1 = l dx on [-1, 1].
#[test]
fn sobolev_legendre_cubic() {
    for l in [0.1, 0.5, 2.0] {
        let d = (0.4 + 2.0 * l) / (2.0 / 3.0 + 2.0 * l);
        let q = sop_monic(&leb(-1.0, 1.0), &leb(-1.0, 1.0).scaled(l), 3).unwrap();
        assert!((q.coeffs[1] + d).abs() < 1e-12, "l={l}: {q:?} vs {d}");
        assert!(q.coeffs[0].abs() < 1e-12 && q.coeffs[2].abs() < 1e-12);
    }
}

#[test]
fn legendre_operator_norm() {
    let m = m_norm_sequence(&leb(-1.0, 1.0), &zero(-1.0, 1.0), 25).unwrap();
    for (n, v) in m.iter().enumerate() {
        let o = legendre_norm_oracle(n);
        assert!((v - o).abs() <= 1e-9, "n={n}: {v} vs {o}");
    }
    assert!(m[25] >= 0.97 && m[25] <= 1.0 + 1e-6);
}

/// `int f g dmu0 + int f' g' dmu1` by quadrature on the rules of both measures.
fn inner(r0: &Discrete, r1: &Discrete, x: &[f64], y: &[f64]) -> f64 {
    let ev = |c: &[f64], t: f64| c.iter().rev().fold(0.0, |acc, v| acc * t + v);
    let dv = |c: &[f64], t: f64| c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, v)| acc * t + k as f64 * v);
    let mut s = 0.0;
    for (t, m) in r0.x.iter().zip(&r0.m) {
        s += m * ev(x, *t) * ev(y, *t);
    }
    for (t, m) in r1.x.iter().zip(&r1.m) {
        s += m * dv(x, *t) * dv(y, *t);
    }
    s
}

#[test]
fn orthogonality_residual_on_battery() {
    let n = 8;
    for inst in battery() {
        let (r0, r1) = (discretize(&inst.mu0), discretize(&inst.mu1));
        let qs: Vec<Vec<f64>> = (0..=n).map(|k| sop_monic(&inst.mu0, &inst.mu1, k).unwrap().all_coeffs()).collect();
        for i in 0..=n {
            for j in 0..i {
                let r = inner(&r0, &r1, &qs[i], &qs[j])
                    / (inner(&r0, &r1, &qs[i], &qs[i]) * inner(&r0, &r1, &qs[j], &qs[j])).sqrt();
                assert!(r.abs() < 1e-8, "{}: <q{i}, q{j}> = {r}", inst.name);
            }
        }
    }
}

fn symmetric_pairs() -> Vec<(&'static str, Measure, Measure)> {
    vec![
        ("legendre", leb(-1.0, 1.0), zero(-1.0, 1.0)),
        ("legendre-sobolev", leb(-1.0, 1.0), leb(-1.0, 1.0).scaled(0.5)),
        (
            "gegenbauer",
            Measure::from_factors(-1.0, 1.0, vec![Factor::power(1.0, -0.5), Factor::power(-1.0, -0.5)]).unwrap(),
            Measure::from_factors(-1.0, 1.0, vec![Factor::power(1.0, 2.5), Factor::power(-1.0, 2.5)]).unwrap(),
        ),
        ("cubic", leb(-1.0, 1.0), Measure::from_factors(-1.0, 1.0, vec![Factor::power(0.0, 3.0)]).unwrap()),
    ]
}

#[test]
fn symmetric_measures_give_parity() {
    for (name, mu0, mu1) in symmetric_pairs() {
        for n in 1..=12 {
            let c = sop_monic(&mu0, &mu1, n).unwrap().all_coeffs();
            let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (k, v) in c.iter().enumerate() {
                if (n - k) % 2 == 1 {
                    assert!(v.abs() <= 1e-10 * scale, "{name} n={n} k={k}: {v}");
                }
            }
        }
        for p in [1.5, 4.0] {
            let c = extremal_monic(&mu0, &mu1, 3, p, 1e-12, 1).unwrap().all_coeffs();
            assert!(c[0].abs() < 1e-8 && c[2].abs() < 1e-8, "{name} p={p}: {c:?}");
        }
    }
}

#[test]
fn operator_norm_is_monotone_on_battery() {
    for inst in battery() {
        let m = m_norm_sequence(&inst.mu0, &inst.mu1, 25).unwrap();
        for n in 1..m.len() {
            assert!(m[n] >= m[n - 1] * (1.0 - 1e-12), "{} n={n}: {} < {}", inst.name, m[n], m[n - 1]);
        }
    }
}

fn max_abs_zero(q: &MonicPoly) -> f64 {
    zeros(q).iter().map(|z| z.re.hypot(z.im)).fold(0.0, f64::max)
}

fn plateaued(m: &[f64]) -> bool {
    (20..25).all(|n| m[n + 1] / m[n] - 1.0 < 1e-3)
}

#[test]
fn zeros_lie_in_the_disk() {
    for inst in battery() {
        let m = m_norm_sequence(&inst.mu0, &inst.mu1, 25).unwrap();
        if inst.expected != Outcome::Bounded {
            continue;
        }
        assert!(plateaued(&m), "{}", inst.name);
        for n in 1..=20 {
            let q = sop_monic(&inst.mu0, &inst.mu1, n).unwrap();
            let r = max_abs_zero(&q);
            assert!(r <= 2.0 * m[n] * 1.05, "{} n={n}: {r} > 2 * {}", inst.name, m[n]);
        }
    }
}

#[test]
fn unbounded_instances_keep_growing() {
    for inst in battery().into_iter().filter(|i| i.expected == Outcome::Unbounded) {
        let m = m_norm_sequence(&inst.mu0, &inst.mu1, 25).unwrap();
        assert!(!plateaued(&m), "{}", inst.name);
        assert!(m[25] / m[10] > 1.2, "{}", inst.name);
    }
}

#[test]
fn zeros_of_known_polynomials() {
    // (x - 1)(x + 2)(x - 0.5)
    let q = MonicPoly { coeffs: vec![1.0, -2.5, 0.5] };
    let mut z: Vec<f64> = zeros(&q).iter().map(|z| z.re).collect();
    z.sort_by(f64::total_cmp);
    for (a, b) in z.iter().zip([-2.0, 0.5, 1.0]) {
        assert!((a - b).abs() < 1e-13);
    }
    // x^2 + 1
    let z = zeros(&MonicPoly { coeffs: vec![1.0, 0.0] });
    assert!(z.iter().all(|z| z.re.abs() < 1e-14 && (z.im.abs() - 1.0).abs() < 1e-14));
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let inst = [
        (leb(-1.0, 1.0), leb(-1.0, 1.0).scaled(0.5)),
        (leb(0.0, 1.0).with_atom(1.0, 1.0).unwrap(), Measure::from_factors(0.0, 1.0, vec![Factor::power(1.0, 1.5)]).unwrap()),
    ];
    for p in [1.5, 3.0, 4.0] {
        for k in 0..100 {
            let (mu0, mu1) = &inst[k % 2];
            let pr = ExtremalProblem::new(mu0, mu1, 4, p).unwrap();
            let b: Vec<f64> = (0..pr.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, g) = pr.phi_grad(&b);
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..b.len() {
                let h = 1e-5 * (1.0 + b[i].abs());
                let (mut bp, mut bm) = (b.clone(), b.clone());
                bp[i] += h;
                bm[i] -= h;
                let fd = (pr.phi(&bp) - pr.phi(&bm)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-5 * gmax, "p={p} i={i}: {fd} vs {}", g[i]);
            }
        }
    }
}

#[test]
fn extremal_at_p2_is_orthogonal_polynomial() {
    for inst in battery() {
        for n in [1, 3, 6] {
            let e = extremal_monic(&inst.mu0, &inst.mu1, n, 2.0, 1e-13, 5).unwrap();
            let s = sop_monic(&inst.mu0, &inst.mu1, n).unwrap();
            for (a, b) in e.coeffs.iter().zip(&s.coeffs) {
                assert!((a - b).abs() <= 1e-8, "{} n={n}: {:?} vs {:?}", inst.name, e.coeffs, s.coeffs);
            }
        }
    }
}

/// `max_f f'A1 f / (sqrt(f'A2 f) + sqrt(f'A3 f))^2` as
/// `sup_l l(1-l) lambda_max(A1, (1-l) A2 + l A3)`.
fn hardy_oracle(a1: &DMatrix<f64>, a2: &DMatrix<f64>, a3: &DMatrix<f64>) -> f64 {
    // Eigenbasis of the form whose weight stays large near an end, with its
    // null eigenvalues set to exactly zero; the vanishing weight is scaled out
    // of the null block so the pencil stays well conditioned.
    let split = |a: &DMatrix<f64>| {
        let e = a.clone().symmetric_eigen();
        let top = e.eigenvalues.max();
        let d: Vec<f64> = e.eigenvalues.iter().map(|&v| if v <= 1e-13 * top { 0.0 } else { v }).collect();
        (e.eigenvectors, d)
    };
    let s2 = split(a2);
    let s3 = split(a3);
    let g = |l: f64| {
        let ((q, d), other, w_big, w_small) = if l >= 0.5 { (&s3, a2, l, 1.0 - l) } else { (&s2, a3, 1.0 - l, l) };
        let n = d.len();
        let t: Vec<f64> = d.iter().map(|&v| if v == 0.0 { 1.0 / w_small.sqrt() } else { 1.0 }).collect();
        let o = q.transpose() * other * q;
        let a = q.transpose() * a1 * q;
        let c = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { w_big * d[i] } else { 0.0 };
            t[i] * t[j] * (w_small * o[(i, j)] + diag)
        });
        let a = DMatrix::from_fn(n, n, |i, j| t[i] * t[j] * a[(i, j)]);
        let c = (&c + c.transpose()) * 0.5;
        let li = c.cholesky().expect("positive definite").l().try_inverse().unwrap();
        let m = &li * a * li.transpose();
        l * (1.0 - l) * ((&m + m.transpose()) * 0.5).symmetric_eigen().eigenvalues.max()
    };
    let n = 400;
    let (mut best, mut at) = (f64::NEG_INFINITY, 0.5);
    for i in 1..n {
        let l = i as f64 / n as f64;
        let v = g(l);
        if v > best {
            best = v;
            at = l;
        }
    }
    let (mut lo, mut hi) = ((at - 1.0 / n as f64).max(1e-12), (at + 1.0 / n as f64).min(1.0 - 1e-12));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if g(x1) < g(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    best.max(g(0.5 * (lo + hi))).sqrt()
}

#[test]
fn best_constant_matches_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for i in 0..20 {
        let nu1 = gen::hardy_measure(&mut rng, false);
        let nu2 = gen::hardy_measure(&mut rng, false);
        let nu3 = gen::hardy_measure(&mut rng, i % 2 == 0);
        let (a1, a2, a3) = hardy_quadratic_forms(&nu1, &nu2, &nu3, 10).unwrap();
        let oracle = hardy_oracle(&a1, &a2, &a3);
        let got = empirical_best_constant(&nu1, &nu2, &nu3, 2.0, 10, 4, 7).unwrap();
        assert!((got - oracle).abs() <= 1e-6 * oracle, "instance {i}: {got} vs {oracle}");
    }
}

#[test]
fn best_constant_sanity() {
    let l = leb(0.0, 1.0);
    // nu1 = nu2 forces c <= 1.
    let c = empirical_best_constant(&l, &l, &l, 3.0, 6, 3, 1).unwrap();
    assert!(c <= 1.0 + 1e-12 && c > 0.0);
    // nu1 = delta_1, nu2 = 0, nu3 = dx: |F(1)| <= ||f||_1 <= ||f||_p, attained by constants.
    let d = zero(0.0, 1.0).with_atom(1.0, 1.0).unwrap();
    let c = empirical_best_constant(&d, &zero(0.0, 1.0), &l, 2.0, 6, 3, 1).unwrap();
    assert!((c - 1.0).abs() < 1e-9, "{c}");
}

#[test]
fn divergent_sequence_grows_like_sqrt() {
    let nu1 = zero(0.0, 1.0).with_atom(1.0, 1.0).unwrap();
    let nu3 = Measure::from_factors(0.0, 1.0, vec![Factor::power(1.0, 2.0)]).unwrap();
    let t = std::time::Instant::now();
    let r: Vec<f64> = [8, 16, 32, 64].iter().map(|&n| niff_witness(&nu1, &leb(0.0, 1.0), &nu3, 2.0, n, 1e-10).unwrap()).collect();
    assert!(t.elapsed().as_secs_f64() < 5.0);
    assert!(r.windows(2).all(|w| w[1] > w[0]), "{r:?}");
    let ratio = r[3] / r[0];
    assert!(ratio >= 2.0 && (ratio - 8f64.sqrt()).abs() < 0.1, "{ratio}");
}

#[test]
fn divergent_sequence_needs_its_pattern() {
    let l = leb(0.0, 1.0);
    assert!(niff_witness(&l, &l, &l, 2.0, 8, 1e-10).is_err());
}

#[test]
fn p_norm_is_seed_deterministic_and_below_p2_scale() {
    let (mu0, mu1) = (leb(-1.0, 1.0), leb(-1.0, 1.0).scaled(0.5));
    let a = m_norm(&mu0, &mu1, 3.0, 5, 9).unwrap();
    let b = m_norm(&mu0, &mu1, 3.0, 5, 9).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
    // |x f| <= |f| and |(x f)'| <= |f| + |f'| on [-1, 1] give ||M|| <= 2.
    assert!(a > 0.5 && a <= 2.0, "{a}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // With mu1 = 0 these are ordinary orthogonal polynomials: real, simple zeros inside the support.
    #[test]
    fn ordinary_zeros_are_real_and_inside(al in -0.9f64..3.0, ar in -0.9f64..3.0, n in 1usize..12) {
        let mu0 = Measure::from_factors(-1.0, 1.0, vec![Factor::power(-1.0, al), Factor::power(1.0, ar)]).unwrap();
        let q = sop_monic(&mu0, &zero(-1.0, 1.0), n).unwrap();
        let mut z = zeros(&q);
        prop_assert_eq!(z.len(), n);
        z.sort_by(|a, b| a.re.total_cmp(&b.re));
        for w in &z {
            prop_assert!(w.im.abs() < 1e-8, "{:?}", z);
            prop_assert!(w.re > -1.0 && w.re < 1.0, "{:?}", z);
        }
        for w in z.windows(2) {
            prop_assert!(w[1].re - w[0].re > 1e-8);
        }
    }

    // Scaling both measures by the same factor leaves the monic polynomials unchanged.
    #[test]
    fn common_scaling_invariance(c in 0.01f64..100.0, l in 0.01f64..10.0, n in 1usize..10) {
        let (mu0, mu1) = (leb(-1.0, 1.0).with_atom(1.0, 0.3).unwrap(), leb(-1.0, 1.0).scaled(l));
        let q1 = sop_monic(&mu0, &mu1, n).unwrap();
        let q2 = sop_monic(&mu0.scaled(c), &mu1.scaled(c), n).unwrap();
        for (a, b) in q1.coeffs.iter().zip(&q2.coeffs) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
        let m1 = m_norm_sequence(&mu0, &mu1, n).unwrap();
        let m2 = m_norm_sequence(&mu0.scaled(c), &mu1.scaled(c), n).unwrap();
        prop_assert!((m1[n] - m2[n]).abs() < 1e-9 * m1[n]);
    }

    // Extremal polynomials minimize the norm: perturbing the coefficients never lowers it.
    #[test]
    fn extremal_is_a_minimum(p in 1.5f64..4.0, seed in 0u64..1000) {
        let (mu0, mu1) = (leb(0.0, 1.0), leb(0.0, 1.0).scaled(0.3));
        let pr = ExtremalProblem::new(&mu0, &mu1, 3, p).unwrap();
        let run = pr.minimize(&pr.initial(), 1e-12, 200);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: Vec<f64> = run.b.iter().map(|v| v + 1e-3 * rng.random_range(-1.0..1.0)).collect();
        prop_assert!(pr.phi(&d) >= run.phi * (1.0 - 1e-12));
    }
}
