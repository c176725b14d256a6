//! Muckenhoupt-type constants
//!
//! ```text
//! Lambda_{p,b}(nu1, nu2)  = sup_{a<r<b} nu1([r,b]) * W(r)^{p-1},   W(r) = int_a^r w2^{-1/(p-1)}
//! Lambda'_{p,b}(nu1, nu2) = same with nu1([r,b))
//! Lambda_{p,a}(nu1, nu2)  = sup_{a<r<b} nu1([a,r]) * (int_r^b w2^{-1/(p-1)})^{p-1}
//! ```
//!
//! Finiteness is decided from asymptotic orders. The numeric value is
//! bracketed cell by cell using the monotonicity of both factors, and cells
//! that may still carry the supremum are bisected.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::classify::{class_c, ClassCResult, ClassCVerdict};
use crate::math::{powf, KahanSum};
use crate::measure::{integrate_pow, positive_part, Measure, MeasureError, MeasureView, Tag, WeightExpr};
use crate::quad::{self, Enclosure};
use crate::{Endpoint, Side};

/// Three-valued finiteness verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Finite {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LambdaVariant {
    /// Uses `nu1([r,b])`.
    Lambda,
    /// Uses `nu1([r,b))`.
    Prime,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LambdaError {
    Precondition(String),
    Measure(MeasureError),
}

impl fmt::Display for LambdaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaError::Precondition(s) => write!(f, "precondition failed: {s}"),
            LambdaError::Measure(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for LambdaError {}

impl From<MeasureError> for LambdaError {
    fn from(e: MeasureError) -> Self {
        LambdaError::Measure(e)
    }
}

/// Numeric knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaOptions {
    /// Base grid size.
    pub grid: usize,
    /// Relative tolerance of each integral.
    pub tol: f64,
    /// Target relative width of the final bracket.
    pub width: f64,
    /// Bisection rounds.
    pub max_rounds: usize,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions { grid: 1024, tol: 1e-10, width: 1e-6, max_rounds: 60 }
    }
}

/// A Muckenhoupt constant with its bracket and finiteness verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaResult {
    pub enclosure: Enclosure,
    /// Point where the lower bound is attained.
    pub argmax_r: f64,
    pub finite: Finite,
    pub endpoint: Endpoint,
    pub variant: LambdaVariant,
    /// Why the constant is infinite or undecided.
    pub reason: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Blow {
    /// `W` jumps to infinity right after `z` (zero piece or non-integrable from the right).
    Jump(f64),
    /// `W(r) -> inf` as `r -> z^-`.
    Blowup(f64),
}

/// First point where `W` becomes infinite.
fn first_blow(w2: &WeightExpr, q: f64) -> Option<Blow> {
    for p in w2.pieces() {
        if p.is_zero() || !w2.reciprocal_integrable(p.lo, Side::Right, q) {
            return Some(Blow::Jump(p.lo));
        }
        if !w2.reciprocal_integrable(p.hi, Side::Left, q) {
            return Some(Blow::Blowup(p.hi));
        }
    }
    None
}

/// Symbolic finiteness of `Lambda_{p,b}` (or the primed variant).
fn finiteness<V: MeasureView>(nu1: &V, w2: &WeightExpr, p: f64, include_b: bool) -> (Finite, Option<Blow>, Option<String>) {
    let q = 1.0 / (p - 1.0);
    let (_, b) = nu1.support();
    let blow = first_blow(w2, q);
    let res = match blow {
        None => (Finite::Yes, None),
        Some(Blow::Jump(z)) => match nu1.mass_positive(z, b, false, include_b) {
            Some(false) => (Finite::Yes, None),
            Some(true) => {
                (Finite::No, Some(alloc::format!("W is infinite right of {z} while nu1 charges ({z}, b]")))
            }
            None => (Finite::Unknown, Some(alloc::format!("cannot certify nu1((({z}), b]) = 0"))),
        },
        Some(Blow::Blowup(z)) => match nu1.mass_positive(z, b, true, include_b) {
            Some(true) => (Finite::No, Some(alloc::format!("W(r) -> inf as r -> {z}- while nu1 charges [{z}, b]"))),
            None => (Finite::Unknown, Some(alloc::format!("cannot certify nu1([{z}, b]) = 0"))),
            Some(false) => {
                let o2 = w2.order_at(z, Side::Left).map(|o| o.powf(-q));
                let (o1, exact) = match nu1.tag(z, Side::Left) {
                    Tag::Vanishes => return (Finite::Yes, blow, None),
                    Tag::Exact(o) => (o, true),
                    Tag::AtMost(o) => (o, false),
                };
                let prod = o2.and_then(|o2| {
                    let v = o1.integral()?;
                    let w = o2.integral()?;
                    Some(v.mul(&w.powf(p - 1.0)))
                });
                match prod {
                    None => (Finite::Unknown, Some(alloc::format!("asymptotics at {z} beyond the supported class"))),
                    Some(pr) if pr.growth() != Ordering::Greater => (Finite::Yes, None),
                    Some(pr) if exact => {
                        (Finite::No, Some(alloc::format!("nu1([r,b]) W(r)^(p-1) ~ {pr} -> inf as r -> {z}-")))
                    }
                    Some(pr) => (Finite::Unknown, Some(alloc::format!("only an upper order {pr} is known at {z}"))),
                }
            }
        },
    };
    (res.0, blow, res.1)
}

#[derive(Clone, Debug)]
struct Cell {
    r0: f64,
    r1: f64,
    w0: Enclosure,
    w1: Enclosure,
    v0: Enclosure,
    v1: Enclosure,
    /// Last cell before a blow-up point; its upper bound is asymptotic.
    terminal: bool,
    /// Splitting no longer narrows the bracket (envelope or rounding floor).
    stalled: bool,
}

fn point_lo(v: &Enclosure, w: &Enclosure, e: f64) -> f64 {
    if v.lo == 0.0 || w.lo == 0.0 {
        0.0
    } else {
        v.lo * powf(w.lo, e)
    }
}

impl Cell {
    fn lo(&self, e: f64) -> (f64, f64) {
        let a = point_lo(&self.v0, &self.w0, e);
        let b = point_lo(&self.v1, &self.w1, e);
        let c = point_lo(&self.v1, &self.w0, e);
        if b >= a && b >= c {
            (b, self.r1)
        } else if a >= c {
            (a, self.r0)
        } else {
            (c, self.r1)
        }
    }

    fn hi(&self, e: f64) -> f64 {
        if self.v0.hi == 0.0 {
            return 0.0;
        }
        self.v0.hi * powf(self.w1.hi, e)
    }
}

fn max_by_lo(cells: &[Cell], e: f64) -> (f64, f64) {
    let mut best = (0.0, f64::NAN);
    for c in cells {
        let l = c.lo(e);
        if l.0 > best.0 || best.1.is_nan() {
            best = l;
        }
    }
    best
}

/// `Lambda_{p,b}` core on the support of `nu1`.
fn lambda_b_core<V: MeasureView>(nu1: &V, w2: &WeightExpr, p: f64, include_b: bool, opts: &LambdaOptions) -> LambdaResult {
    let (a, b) = nu1.support();
    let q = 1.0 / (p - 1.0);
    let e = p - 1.0;
    let variant = if include_b { LambdaVariant::Lambda } else { LambdaVariant::Prime };
    let (finite, blow, reason) = finiteness(nu1, w2, p, include_b);
    let (r_end, blowup) = match blow {
        None => (b, false),
        Some(Blow::Jump(z)) => (z, false),
        Some(Blow::Blowup(z)) => (z, true),
    };
    let tol = opts.tol;
    let mut breaks: Vec<f64> = w2.breakpoints();
    breaks.extend(nu1.breakpoints());
    breaks.extend(nu1.atoms().iter().map(|t| t.x));
    breaks.push(r_end);
    let mut breaks: Vec<f64> = breaks.into_iter().filter(|&x| x >= a && x <= r_end).collect();
    breaks.push(a);
    let mut nodes = if r_end > a { quad::layout(&breaks, opts.grid) } else { alloc::vec![a] };
    if blowup && nodes.len() >= 2 {
        // Deeper geometric refinement toward the blow-up point.
        let n = nodes.len();
        let h = nodes[n - 1] - nodes[n - 2];
        let mut t = h;
        for _ in 0..40 {
            t *= 0.5;
            nodes.push(r_end - t);
        }
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
        nodes.dedup();
    }
    let n = nodes.len();
    // W at nodes (before r_end, or including r_end when finite there).
    let mut w: Vec<Enclosure> = Vec::with_capacity(n);
    w.push(Enclosure::zero());
    let (mut sl, mut sh) = (KahanSum::default(), KahanSum::default());
    for i in 1..n {
        let c = integrate_pow(w2, -q, nodes[i - 1], nodes[i], tol);
        if c.diverged.is_some() {
            w.push(Enclosure { lo: f64::INFINITY, hi: f64::INFINITY, diverged: c.diverged });
            for _ in i + 1..n {
                w.push(w[i].clone());
            }
            break;
        }
        sl.add(c.lo);
        sh.add(c.hi);
        let prev = &w[i - 1];
        w.push(Enclosure::new(sl.value().max(prev.lo), sh.value().max(prev.hi)));
    }
    // nu1 tail masses at nodes.
    let mut v: Vec<Enclosure> = alloc::vec![Enclosure::zero(); n];
    v[n - 1] = nu1.measure_of(nodes[n - 1], b, true, include_b, tol);
    for i in (0..n - 1).rev() {
        let c = nu1.measure_of(nodes[i], nodes[i + 1], true, false, tol);
        v[i] = v[i + 1].add(&c);
    }
    let mut cells: Vec<Cell> = (0..n.saturating_sub(1))
        .map(|i| Cell {
            r0: nodes[i],
            r1: nodes[i + 1],
            w0: w[i].clone(),
            w1: w[i + 1].clone(),
            v0: v[i].clone(),
            v1: v[i + 1].clone(),
            terminal: blowup && i + 2 == n,
            stalled: false,
        })
        .collect();
    let cell_hi = |c: &Cell, cells_hi_prev: f64| -> f64 {
        if c.terminal && finite == Finite::Yes {
            c.lo(e).0.max(cells_hi_prev)
        } else {
            c.hi(e)
        }
    };
    let eval = |cells: &[Cell]| -> (f64, f64, f64) {
        let (glo, arg) = max_by_lo(cells, e);
        let mut ghi: f64 = 0.0;
        let mut prev = 0.0;
        for c in cells {
            let h = cell_hi(c, prev);
            prev = h;
            ghi = ghi.max(h);
        }
        (glo, arg, ghi)
    };
    let (mut glo, mut arg, mut ghi) = eval(&cells);
    if finite == Finite::Yes {
        for _ in 0..opts.max_rounds {
            let target = opts.width * glo.max(0.0) + opts.tol;
            if ghi - glo <= target || cells.len() > 400_000 {
                break;
            }
            let mut next = Vec::with_capacity(cells.len());
            let mut split_any = false;
            for c in cells.into_iter() {
                let h = c.hi(e);
                let splittable =
                    !c.terminal && !c.stalled && c.r1 - c.r0 > 4.0 * f64::EPSILON * c.r1.abs().max(1.0);
                if splittable && h > glo + 0.5 * target {
                    split_any = true;
                    let m = 0.5 * (c.r0 + c.r1);
                    let iw = integrate_pow(w2, -q, c.r0, m, tol);
                    let wm = Enclosure::new((c.w0.lo + iw.lo).min(c.w1.lo), (c.w0.hi + iw.hi).min(c.w1.hi));
                    let iv = nu1.measure_of(m, c.r1, true, false, tol);
                    let vm = Enclosure::new((c.v1.lo + iv.lo).min(c.v0.lo), (c.v1.hi + iv.hi).min(c.v0.hi));
                    let parent = h - c.lo(e).0;
                    let mut kids = [
                        Cell { r0: c.r0, r1: m, w0: c.w0, w1: wm.clone(), v0: c.v0, v1: vm.clone(), terminal: false, stalled: false },
                        Cell { r0: m, r1: c.r1, w0: wm, w1: c.w1, v0: vm, v1: c.v1, terminal: false, stalled: false },
                    ];
                    let widest = kids.iter().map(|k| k.hi(e) - k.lo(e).0).fold(0.0, f64::max);
                    if widest > 0.9 * parent {
                        for k in &mut kids {
                            k.stalled = true;
                        }
                    }
                    next.extend(kids);
                } else {
                    next.push(c);
                }
            }
            cells = next;
            (glo, arg, ghi) = eval(&cells);
            if !split_any {
                break;
            }
        }
    }
    let enclosure = match finite {
        Finite::Yes => Enclosure::new(glo, ghi.max(glo)),
        Finite::No => {
            let d = w.iter().find_map(|x| x.diverged.clone()).or_else(|| {
                Some(quad::Divergence { x: r_end, side: Side::Left, order: w2.order_at(r_end, Side::Left) })
            });
            Enclosure { lo: f64::INFINITY, hi: f64::INFINITY, diverged: d }
        }
        Finite::Unknown => Enclosure { lo: glo, hi: f64::INFINITY, diverged: None },
    };
    LambdaResult {
        enclosure,
        argmax_r: if arg.is_nan() { a } else { arg },
        finite,
        endpoint: Endpoint::B,
        variant,
        reason,
    }
}

fn check_p(p: f64) -> Result<(), LambdaError> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(LambdaError::Precondition(alloc::format!("p = {p} must lie in (1, inf)")))
    }
}

fn density_on<V: MeasureView>(nu1: &V, nu2: &Measure) -> Result<WeightExpr, LambdaError> {
    let (a, b) = nu1.support();
    Ok(nu2.density().rebased(a, b)?)
}

/// `Lambda_{p,b}` or `Lambda'_{p,b}` at either endpoint.
pub fn lambda<V: MeasureView>(
    nu1: &V,
    nu2: &Measure,
    p: f64,
    endpoint: Endpoint,
    variant: LambdaVariant,
    opts: &LambdaOptions,
) -> Result<LambdaResult, LambdaError> {
    check_p(p)?;
    let include_b = variant == LambdaVariant::Lambda;
    match endpoint {
        Endpoint::B => {
            let w2 = density_on(nu1, nu2)?;
            Ok(lambda_b_core(nu1, &w2, p, include_b, opts))
        }
        Endpoint::A => {
            let (a, b) = nu1.support();
            let r1 = nu1.reflect();
            let w2 = density_on(nu1, nu2)?.reflected();
            let mut res = lambda_b_core(&r1, &w2, p, include_b, opts);
            res.endpoint = Endpoint::A;
            res.argmax_r = a + b - res.argmax_r;
            Ok(res)
        }
    }
}

pub fn lambda_b<V: MeasureView>(nu1: &V, nu2: &Measure, p: f64, opts: &LambdaOptions) -> Result<LambdaResult, LambdaError> {
    lambda(nu1, nu2, p, Endpoint::B, LambdaVariant::Lambda, opts)
}

pub fn lambda_a<V: MeasureView>(nu1: &V, nu2: &Measure, p: f64, opts: &LambdaOptions) -> Result<LambdaResult, LambdaError> {
    lambda(nu1, nu2, p, Endpoint::A, LambdaVariant::Lambda, opts)
}

pub fn lambda_prime_b<V: MeasureView>(
    nu1: &V,
    nu2: &Measure,
    p: f64,
    opts: &LambdaOptions,
) -> Result<LambdaResult, LambdaError> {
    lambda(nu1, nu2, p, Endpoint::B, LambdaVariant::Prime, opts)
}

/// Symbolic finiteness only, without numerics.
pub fn lambda_finiteness<V: MeasureView>(nu1: &V, nu2: &Measure, p: f64, endpoint: Endpoint) -> Result<Finite, LambdaError> {
    check_p(p)?;
    let w2 = density_on(nu1, nu2)?;
    Ok(match endpoint {
        Endpoint::B => finiteness(nu1, &w2, p, true).0,
        Endpoint::A => finiteness(&nu1.reflect(), &w2.reflected(), p, true).0,
    })
}

/// Outcome of checking the two-sided bracket between `Lambda`, `Lambda'`
/// and the atom term `nu1({b}) W(b)^{p-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompCheck {
    pub holds: bool,
    pub lambda: LambdaResult,
    pub prime: LambdaResult,
    pub atom_term: Enclosure,
}

/// Checks `max(L', A) <= L <= L' + A` at enclosure level, where
/// `A = nu1({b}) (int_a^b w2^{-1/(p-1)})^{p-1}`.
pub fn comp_lambdas_check(nu1: &Measure, nu2: &Measure, p: f64, opts: &LambdaOptions) -> Result<CompCheck, LambdaError> {
    let l = lambda_b(nu1, nu2, p, opts)?;
    let lp = lambda_prime_b(nu1, nu2, p, opts)?;
    let (a, b) = nu1.support();
    let w2 = density_on(nu1, nu2)?;
    let mass = nu1.atom_mass(b);
    let wb = integrate_pow(&w2, -1.0 / (p - 1.0), a, b, opts.tol);
    let atom_term = if mass == 0.0 {
        Enclosure::zero()
    } else if wb.diverged.is_some() {
        Enclosure { lo: f64::INFINITY, hi: f64::INFINITY, diverged: wb.diverged.clone() }
    } else {
        wb.powf(p - 1.0).scale(mass)
    };
    let (le, pe) = (&l.enclosure, &lp.enclosure);
    let slack = |x: f64| 1e-12 * (1.0 + x.abs());
    let lower_ok = pe.lo <= le.hi + slack(le.hi) && atom_term.lo <= le.hi + slack(le.hi);
    let upper_ok = le.lo <= pe.hi + atom_term.hi + slack(pe.hi + atom_term.hi);
    let finite_ok = match (l.finite, lp.finite) {
        (Finite::Yes, Finite::No) => false,
        (Finite::Yes, _) => atom_term.is_finite(),
        _ => true,
    };
    Ok(CompCheck { holds: lower_ok && upper_ok && finite_ok, lambda: l, prime: lp, atom_term })
}

/// Agreement of finiteness between the full and the restricted constant.
#[derive(Clone, Debug, PartialEq)]
pub enum RestrictedEquiv {
    BothFinite,
    BothInfinite,
    Unknown,
}

/// Compares `Lambda_{p,[a,b],b}` with `Lambda_{p,[r0,b],b}`.
pub fn restricted_lambda_equiv(
    nu1: &Measure,
    nu2: &Measure,
    p: f64,
    r0: f64,
    opts: &LambdaOptions,
) -> Result<(RestrictedEquiv, LambdaResult, LambdaResult), LambdaError> {
    check_p(p)?;
    let (a, b) = nu1.support();
    if !(r0 > a && r0 < b) {
        return Err(LambdaError::Precondition(alloc::format!("r0 = {r0} must lie in ({a}, {b})")));
    }
    let w2 = density_on(nu1, nu2)?;
    let q = 1.0 / (p - 1.0);
    let head = integrate_pow(&w2, -q, a, r0, opts.tol);
    if let Some(d) = head.diverged {
        return Err(LambdaError::Precondition(alloc::format!("w2^(-1/(p-1)) is not integrable on [{a}, {r0}]: {d}")));
    }
    let full = lambda_b(nu1, nu2, p, opts)?;
    let n1 = nu1.restrict(r0, b);
    let n2 = nu2.rebased(a, b)?.restrict(r0, b);
    let part = lambda_b(&n1, &n2, p, opts)?;
    let verdict = match (full.finite, part.finite) {
        (Finite::Yes, Finite::Yes) => RestrictedEquiv::BothFinite,
        (Finite::No, Finite::No) => RestrictedEquiv::BothInfinite,
        _ => RestrictedEquiv::Unknown,
    };
    Ok((verdict, full, part))
}

/// How the three-measure witness `k` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    RatioLimitInfinite,
    RatioLimsupFinite,
    Direct,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::RatioLimitInfinite => "ratio-limit-infinite",
            Route::RatioLimsupFinite => "ratio-limsup-finite",
            Route::Direct => "direct",
        }
    }
}

/// Witness of `Lambda_{p,endpoint}((nu1 - k nu2)_+, nu3) < inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeMeasureCert {
    pub k: f64,
    pub lambda: LambdaResult,
    pub route: Route,
    pub class_c: ClassCResult,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThreeMeasureOutcome {
    Holds(ThreeMeasureCert),
    NotFound(String),
    Unknown(String),
}

/// Searches `k >= 0` with `Lambda((nu1 - k nu2)_+, nu3) < inf` at the endpoint.
pub fn three_measure_condition(
    nu1: &Measure,
    nu2: &Measure,
    nu3: &Measure,
    p: f64,
    endpoint: Endpoint,
    opts: &LambdaOptions,
) -> Result<ThreeMeasureOutcome, LambdaError> {
    check_p(p)?;
    let (a, b) = nu1.support();
    let nu2 = nu2.rebased(a, b)?;
    let nu3 = nu3.rebased(a, b)?;
    let x = match endpoint {
        Endpoint::A => a,
        Endpoint::B => b,
    };
    let cc = class_c(nu1.density(), nu2.density(), endpoint);
    let mut candidates: Vec<(f64, Route)> = Vec::new();
    match cc.verdict {
        ClassCVerdict::NotInClass => {
            return Ok(ThreeMeasureOutcome::Unknown("density ratio is not in the ratio class at the endpoint".into()))
        }
        ClassCVerdict::LimitInfinity => candidates.push((0.0, Route::RatioLimitInfinite)),
        ClassCVerdict::LimsupFinite => {
            let bound = cc.witness_bound.unwrap_or(0.0);
            let m2 = nu2.atom_mass(x);
            let ar = if m2 > 0.0 { nu1.atom_mass(x) / m2 } else { 0.0 };
            let k0 = bound.max(ar);
            if k0 > 0.0 {
                candidates.push((k0, Route::RatioLimsupFinite));
                candidates.push((2.0 * k0, Route::RatioLimsupFinite));
            } else {
                candidates.push((1.0, Route::RatioLimsupFinite));
            }
        }
    }
    candidates.push((0.0, Route::Direct));
    let mut k = 1.0;
    while k <= 65536.0 {
        candidates.push((k, Route::Direct));
        k *= 2.0;
    }
    let mut unknown: Option<String> = None;
    let mut last_reason = String::new();
    for (k, route) in candidates {
        let pp = positive_part(nu1, k, &nu2)?;
        let fin = lambda_finiteness(&pp, &nu3, p, endpoint)?;
        match fin {
            Finite::Yes => {
                let lam = lambda(&pp, &nu3, p, endpoint, LambdaVariant::Lambda, opts)?;
                return Ok(ThreeMeasureOutcome::Holds(ThreeMeasureCert { k, lambda: lam, route, class_c: cc }));
            }
            Finite::No => {
                if last_reason.is_empty() {
                    let lam = lambda(&pp, &nu3, p, endpoint, LambdaVariant::Lambda, &LambdaOptions { grid: 8, max_rounds: 0, ..*opts })?;
                    last_reason = lam.reason.unwrap_or_default();
                }
            }
            Finite::Unknown => {
                if unknown.is_none() {
                    unknown = Some(alloc::format!("finiteness undecided for k = {k}"));
                }
            }
        }
    }
    Ok(match unknown {
        Some(s) => ThreeMeasureOutcome::Unknown(s),
        None => ThreeMeasureOutcome::NotFound(alloc::format!("no k in the search set works: {last_reason}")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Factor;

    fn opts() -> LambdaOptions {
        LambdaOptions { grid: 256, ..Default::default() }
    }

    #[test]
    fn lebesgue_quarter() {
        let m = Measure::lebesgue(0.0, 1.0).unwrap();
        let r = lambda_b(&m, &m, 2.0, &opts()).unwrap();
        assert_eq!(r.finite, Finite::Yes);
        assert!(r.enclosure.contains(0.25), "{}", r.enclosure);
        assert!(r.enclosure.width() < 1e-6);
        assert!((r.argmax_r - 0.5).abs() < 1e-3);
    }

    #[test]
    fn atom_at_b_closed_vs_open() {
        let nu1 = Measure::zero(0.0, 1.0).unwrap().with_atom(1.0, 1.0).unwrap();
        let nu2 = Measure::lebesgue(0.0, 1.0).unwrap();
        let l = lambda_b(&nu1, &nu2, 2.0, &opts()).unwrap();
        assert!(l.enclosure.contains(1.0), "{}", l.enclosure);
        let lp = lambda_prime_b(&nu1, &nu2, 2.0, &opts()).unwrap();
        assert_eq!(lp.enclosure.hi, 0.0);
        assert!(comp_lambdas_check(&nu1, &nu2, 2.0, &opts()).unwrap().holds);
    }

    #[test]
    fn zero_reciprocal_is_infinite() {
        let nu1 = Measure::lebesgue(0.0, 1.0).unwrap();
        let nu2 = Measure::zero(0.0, 1.0).unwrap();
        assert_eq!(lambda_b(&nu1, &nu2, 2.0, &opts()).unwrap().finite, Finite::No);
    }

    #[test]
    fn restricted_examples() {
        let m = Measure::lebesgue(0.0, 1.0).unwrap();
        assert_eq!(restricted_lambda_equiv(&m, &m, 2.0, 0.5, &opts()).unwrap().0, RestrictedEquiv::BothFinite);
        let nu1 = Measure::zero(0.0, 1.0).unwrap().with_atom(1.0, 1.0).unwrap();
        let nu2 = Measure::from_factors(0.0, 1.0, alloc::vec![Factor::power(1.0, 2.0)]).unwrap();
        assert_eq!(restricted_lambda_equiv(&nu1, &nu2, 2.0, 0.5, &opts()).unwrap().0, RestrictedEquiv::BothInfinite);
    }

    #[test]
    fn three_measure_examples() {
        let l = Measure::lebesgue(0.0, 1.0).unwrap();
        match three_measure_condition(&l, &l, &l, 2.0, Endpoint::B, &opts()).unwrap() {
            ThreeMeasureOutcome::Holds(c) => {
                assert_eq!(c.k, 1.0);
                assert_eq!(c.lambda.enclosure.hi, 0.0);
            }
            o => panic!("{o:?}"),
        }
        let z = Measure::zero(0.0, 1.0).unwrap();
        match three_measure_condition(&l, &z, &l, 2.0, Endpoint::B, &opts()).unwrap() {
            ThreeMeasureOutcome::Holds(c) => {
                assert_eq!(c.k, 0.0);
                assert!(c.lambda.enclosure.contains(0.25));
            }
            o => panic!("{o:?}"),
        }
        let nu1 = Measure::lebesgue(0.0, 1.0).unwrap().with_atom(1.0, 1.0).unwrap();
        let nu3 = Measure::from_factors(0.0, 1.0, alloc::vec![Factor::power(1.0, 2.0)]).unwrap();
        assert!(matches!(
            three_measure_condition(&nu1, &l, &nu3, 2.0, Endpoint::B, &opts()).unwrap(),
            ThreeMeasureOutcome::NotFound(_)
        ));
    }
}
