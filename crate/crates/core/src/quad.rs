//! Integration of weights with endpoint singularities, with two-sided
//! brackets.
//!
//! A segment `[c, d]` is split at its midpoint and each half is anchored at
//! its outer end. A half whose anchor is a factor center is integrated in
//! `u = ln(1/dist)` over panels of growing width; the infinite remainder is
//! bounded analytically from the majorant order. Other halves use adaptive
//! Gauss-Legendre. Divergence is only ever reported symbolically.

use alloc::vec::Vec;
use core::fmt;

use crate::gl_tables::{GL16_NODES, GL16_WEIGHTS, GL32_NODES, GL32_WEIGHTS};
use crate::math::{abs, exp, exps_equal, ln, log_level, loglog_level, KahanSum, E};
use crate::measure::{integrate_pow, WeightExpr};
use crate::order::OrderTuple;
use crate::Side;

/// Default relative tolerance of integrals.
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_PANELS: usize = 5000;
const MAX_DEPTH: u32 = 48;

/// Where and why an integral diverges.
#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub x: f64,
    pub side: Side,
    /// Order of the integrand at `x`; `None` for the reciprocal of a zero piece.
    pub order: Option<OrderTuple>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::Left => "-",
            Side::Right => "+",
        };
        match &self.order {
            Some(o) => write!(f, "non-integrable at {}{s}: {o}", self.x),
            None => write!(f, "reciprocal of a zero weight at {}{s}", self.x),
        }
    }
}

/// Two-sided bracket of a nonnegative extended-real quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
    pub diverged: Option<Divergence>,
}

impl Enclosure {
    pub fn zero() -> Enclosure {
        Enclosure::exact(0.0)
    }

    pub fn exact(v: f64) -> Enclosure {
        Enclosure { lo: v, hi: v, diverged: None }
    }

    pub fn new(lo: f64, hi: f64) -> Enclosure {
        Enclosure { lo: lo.max(0.0), hi: hi.max(lo.max(0.0)), diverged: None }
    }

    pub fn infinite(d: Divergence) -> Enclosure {
        Enclosure { lo: f64::INFINITY, hi: f64::INFINITY, diverged: Some(d) }
    }

    pub fn is_finite(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn add(&self, o: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
            diverged: self.diverged.clone().or_else(|| o.diverged.clone()),
        }
    }

    /// Multiplies by a constant factor known to lie in `[1/env, env]`.
    pub fn widen(&self, env: f64) -> Enclosure {
        if env == 1.0 {
            return self.clone();
        }
        Enclosure { lo: self.lo / env, hi: self.hi * env, diverged: self.diverged.clone() }
    }

    pub fn scale(&self, c: f64) -> Enclosure {
        Enclosure { lo: self.lo * c, hi: self.hi * c, diverged: self.diverged.clone() }
    }

    /// `[lo^e, hi^e]` for `e > 0`.
    pub fn powf(&self, e: f64) -> Enclosure {
        Enclosure { lo: crate::math::powf(self.lo, e), hi: crate::math::powf(self.hi, e), diverged: self.diverged.clone() }
    }

    /// Product of two nonnegative brackets with `0 * inf = 0`.
    pub fn mul(&self, o: &Enclosure) -> Enclosure {
        let m = |x: f64, y: f64| if x == 0.0 || y == 0.0 { 0.0 } else { x * y };
        Enclosure { lo: m(self.lo, o.lo), hi: m(self.hi, o.hi), diverged: self.diverged.clone().or_else(|| o.diverged.clone()) }
    }

    pub(crate) fn hull_of(lo: &Enclosure, hi: &Enclosure) -> Enclosure {
        Enclosure { lo: lo.lo.min(hi.lo), hi: hi.hi.max(lo.hi), diverged: hi.diverged.clone().or_else(|| lo.diverged.clone()) }
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)?;
        if let Some(d) = &self.diverged {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

/// Evaluation point. `u = -ln|x - anchor|` is exact even when the distance
/// underflows, so factors centered at `anchor` are evaluated from `u`.
#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub x: f64,
    pub anchor: f64,
    /// Signed offset, `x = anchor + off` before rounding.
    pub off: f64,
    pub u: f64,
}

impl Point {
    /// A point not tied to any anchor.
    pub fn at(x: f64) -> Point {
        Point { x, anchor: f64::NAN, off: f64::NAN, u: f64::NAN }
    }
}

/// Majorant of an integrand near a point.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    /// Identically zero.
    Zero,
    /// `f(anchor +- d) <= scale * core(d)` where `core` has the given order,
    /// evaluated with the regularized log factors.
    Majorant { scale: f64, order: OrderTuple },
    Divergent(Divergence),
}

/// Nonnegative integrand on an open segment free of interior singularities.
pub trait SegmentIntegrand {
    /// `ln f` at the point (`-inf` where `f = 0`).
    fn ln_eval(&self, pt: &Point) -> f64;
    fn tail(&self, anchor: f64, side: Side, reach: f64) -> Tail;
}

struct Adaptive {
    val: KahanSum,
    err: f64,
    bad: bool,
}

fn gl_pair(g: &mut dyn FnMut(f64) -> f64, t0: f64, t1: f64) -> (f64, f64, f64) {
    let c = 0.5 * (t0 + t1);
    let h = 0.5 * (t1 - t0);
    let mut s32 = 0.0;
    let mut a32 = 0.0;
    for (x, w) in GL32_NODES.iter().zip(GL32_WEIGHTS.iter()) {
        let (f1, f2) = (g(c - h * x), g(c + h * x));
        s32 += w * (f1 + f2);
        a32 += w * (abs(f1) + abs(f2));
    }
    let mut s16 = 0.0;
    for (x, w) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
        s16 += w * (g(c - h * x) + g(c + h * x));
    }
    (s32 * h, s16 * h, a32 * abs(h))
}

fn adapt(g: &mut dyn FnMut(f64) -> f64, t0: f64, t1: f64, rel: f64, depth: u32, out: &mut Adaptive) {
    let (i32_, i16_, a32) = gl_pair(g, t0, t1);
    if !i32_.is_finite() || !i16_.is_finite() {
        if depth == 0 {
            out.bad = true;
            return;
        }
        let m = 0.5 * (t0 + t1);
        adapt(g, t0, m, rel, depth - 1, out);
        adapt(g, m, t1, rel, depth - 1, out);
        return;
    }
    let err = 2.0 * abs(i32_ - i16_) + 8.0 * f64::EPSILON * a32;
    if err <= rel * a32 || a32 < 1e-300 || depth == 0 || abs(t1 - t0) <= 64.0 * f64::EPSILON * abs(t0).max(abs(t1)) {
        out.val.add(i32_);
        out.err += err;
        return;
    }
    let m = 0.5 * (t0 + t1);
    adapt(g, t0, m, rel, depth - 1, out);
    adapt(g, m, t1, rel, depth - 1, out);
}

/// Log-derivative margin `kappa(U)` of the majorant in `u`-space plus the
/// effective leading exponential `(rate, gamma)`.
fn kappa(order: &OrderTuple, big_u: f64) -> Option<(f64, Option<(f64, f64)>)> {
    let l = log_level(big_u);
    let ll = loglog_level(big_u);
    let mut k = (order.alpha + 1.0) - order.delta.max(0.0) / l - order.epsilon.max(0.0) / ((E + l) * ll);
    let mut lead = None;
    if let Some(t) = order.leading_exp() {
        if t.rate >= 0.0 {
            return None;
        }
        let mut c = t.rate;
        for o in &order.exp_terms()[1..] {
            if o.rate > 0.0 {
                c += o.rate * exp((o.gamma - t.gamma) * big_u);
            }
        }
        if c >= 0.0 {
            return None;
        }
        k += -c * t.gamma * exp(t.gamma * big_u);
        lead = Some((c, t.gamma));
    }
    Some((k, lead))
}

/// Bound on `int_U^inf core(e^-u) e^-u du` for an integrable majorant order.
pub(crate) fn tail_bound(order: &OrderTuple, big_u: f64) -> Option<f64> {
    if order.theta != 0.0 || !order.is_integrable() {
        return None;
    }
    let (k, lead) = kappa(order, big_u)?;
    let l = log_level(big_u);
    let ll = loglog_level(big_u);
    let borderline = lead.is_none() && exps_equal(order.alpha, -1.0);
    if !borderline {
        if !(k > 0.0) {
            return None;
        }
        let e_part = lead.map(|(c, g)| c * exp(g * big_u)).unwrap_or(0.0);
        let lnh = e_part - (order.alpha + 1.0) * big_u + order.delta * ln(l) + order.epsilon * ln(ll);
        return Some(exp(lnh) / k);
    }
    if big_u < 3.0 {
        return None;
    }
    let (d, e) = (order.delta, order.epsilon);
    if !exps_equal(d, -1.0) && d < -1.0 {
        if e <= 0.0 {
            return Some(crate::math::powf(ll, e) * crate::math::powf(big_u, d + 1.0) / (-d - 1.0));
        }
        let eta = 0.5 * (-d - 1.0);
        if ll < e / eta {
            return None;
        }
        return Some(
            crate::math::powf(ll, e) * crate::math::powf(l, -eta) * crate::math::powf(big_u, d + eta + 1.0) / eta,
        );
    }
    if exps_equal(d, -1.0) && !exps_equal(e, -1.0) && e < -1.0 {
        return Some(4.0 * crate::math::powf(ll, e + 1.0) / (-e - 1.0));
    }
    None
}

fn half(f: &dyn SegmentIntegrand, anchor: f64, side: Side, reach: f64, tol: f64) -> Enclosure {
    let dir = side.dir();
    let rel = 0.02 * tol;
    match f.tail(anchor, side, reach) {
        Tail::Zero => Enclosure::zero(),
        Tail::Divergent(d) => Enclosure::infinite(d),
        Tail::Majorant { scale, order } if order.is_one() => {
            let _ = scale;
            let mut g = |t: f64| {
                let pt = Point { x: anchor + dir * t, anchor, off: dir * t, u: -ln(t) };
                exp(f.ln_eval(&pt))
            };
            let mut out = Adaptive { val: KahanSum::default(), err: 0.0, bad: false };
            adapt(&mut g, 0.0, reach, rel, MAX_DEPTH, &mut out);
            finish(out, 0.0)
        }
        Tail::Majorant { scale, order } => {
            let u0 = -ln(reach);
            let mut g = |u: f64| {
                let t = exp(-u);
                let pt = Point { x: anchor + dir * t, anchor, off: dir * t, u };
                let l = f.ln_eval(&pt);
                if l == f64::NEG_INFINITY {
                    0.0
                } else {
                    exp(l - u)
                }
            };
            let mut out = Adaptive { val: KahanSum::default(), err: 0.0, bad: false };
            let mut u = u0;
            let mut panels = 0;
            loop {
                let mut w = (0.5 * (u - u0 + 1.0)).max(1.0);
                if let Some((k, _)) = kappa(&order, u) {
                    if k > 0.0 {
                        w = w.min((30.0 / k).max(1.0));
                    }
                }
                adapt(&mut g, u, u + w, rel, MAX_DEPTH, &mut out);
                u += w;
                panels += 1;
                let acc = out.val.value();
                match tail_bound(&order, u) {
                    Some(t) => {
                        let t = t * scale;
                        if t <= 0.05 * tol * acc || t < 1e-300 || panels >= MAX_PANELS {
                            return finish(out, t);
                        }
                    }
                    None if panels >= MAX_PANELS => return finish(out, f64::INFINITY),
                    None => {}
                }
            }
        }
    }
}

fn finish(out: Adaptive, tail: f64) -> Enclosure {
    if out.bad {
        return Enclosure { lo: 0.0, hi: f64::INFINITY, diverged: None };
    }
    let v = out.val.value();
    Enclosure::new(v - out.err, v + out.err + tail)
}

/// Integral of a nonnegative segment integrand over `[c, d]`.
pub fn integrate_segment(f: &dyn SegmentIntegrand, c: f64, d: f64, tol: f64) -> Enclosure {
    if !(d > c) {
        return Enclosure::zero();
    }
    let reach = 0.5 * (d - c);
    let left = half(f, c, Side::Right, reach, tol);
    let right = half(f, d, Side::Left, reach, tol);
    left.add(&right)
}

/// Result of a local integrability test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrability {
    Integrable,
    NonIntegrable,
}

/// Whether `w^{-q}` is integrable near `x` from the given side.
pub fn integrability(w: &WeightExpr, x: f64, side: Side, q: f64) -> Integrability {
    if w.reciprocal_integrable(x, side, q) {
        Integrability::Integrable
    } else {
        Integrability::NonIntegrable
    }
}

/// Integral of `w^s` over `[c, d]`.
pub fn integrate_singular(w: &WeightExpr, s: f64, c: f64, d: f64, tol: f64) -> Enclosure {
    integrate_pow(w, s, c, d, tol)
}

/// Brackets of `W(r) = int_a^r w^{-1/(p-1)}` on a node grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CumGrid {
    pub nodes: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub diverged: Option<Divergence>,
}

impl CumGrid {
    pub fn at(&self, i: usize) -> Enclosure {
        Enclosure { lo: self.lo[i], hi: self.hi[i], diverged: None }
    }

    /// Index of a node equal to `r`, if present.
    pub fn index_of(&self, r: f64) -> Option<usize> {
        self.nodes.iter().position(|&x| x == r)
    }
}

/// Geometric ratio-1/2 levels added next to every breakpoint.
pub(crate) const GEOM_LEVELS: u32 = 24;

/// Node layout: uniform cells per segment (nested under doubling of `n`)
/// plus geometric clustering toward every breakpoint.
pub fn layout(breaks: &[f64], n: usize) -> Vec<f64> {
    let mut b: Vec<f64> = breaks.to_vec();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup();
    if b.len() < 2 {
        return b;
    }
    let total = b[b.len() - 1] - b[0];
    let blocks = n.max(8).div_ceil(8);
    let mut nodes = Vec::new();
    for s in b.windows(2) {
        let (lo, hi) = (s[0], s[1]);
        let len = hi - lo;
        let m = blocks * ((libm::ceil(8.0 * len / total) as usize).max(1));
        let h = len / m as f64;
        for j in 0..m {
            nodes.push(lo + len * (j as f64) / (m as f64));
        }
        let mut t = h;
        for _ in 0..GEOM_LEVELS {
            t *= 0.5;
            nodes.push(lo + t);
            nodes.push(hi - t);
        }
    }
    nodes.push(b[b.len() - 1]);
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    nodes.dedup();
    nodes
}

/// Cumulative antiderivative of `w^{-1/(p-1)}` from the left support end.
pub fn cum_antiderivative(w: &WeightExpr, p: f64, n: usize, tol: f64) -> CumGrid {
    let q = 1.0 / (p - 1.0);
    let nodes = layout(&w.breakpoints(), n);
    cum_on_nodes(w, q, nodes, tol)
}

pub(crate) fn cum_on_nodes(w: &WeightExpr, q: f64, nodes: Vec<f64>, tol: f64) -> CumGrid {
    let mut lo = alloc::vec![0.0; nodes.len()];
    let mut hi = alloc::vec![0.0; nodes.len()];
    let mut diverged = None;
    let (mut sl, mut sh) = (KahanSum::default(), KahanSum::default());
    for i in 1..nodes.len() {
        if diverged.is_some() {
            lo[i] = f64::INFINITY;
            hi[i] = f64::INFINITY;
            continue;
        }
        let e = integrate_pow(w, -q, nodes[i - 1], nodes[i], tol);
        if let Some(d) = e.diverged {
            diverged = Some(d);
            lo[i] = f64::INFINITY;
            hi[i] = f64::INFINITY;
            continue;
        }
        sl.add(e.lo);
        sh.add(e.hi);
        lo[i] = sl.value().max(lo[i - 1]);
        hi[i] = sh.value().max(hi[i - 1]);
    }
    CumGrid { nodes, lo, hi, diverged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Factor;

    fn powint(alpha: f64) -> Enclosure {
        let w = WeightExpr::product(0.0, 1.0, alloc::vec![Factor::power(0.0, alpha)]).unwrap();
        integrate_singular(&w, 1.0, 0.0, 1.0, 1e-10)
    }

    #[test]
    fn power_integrals() {
        let e = powint(-0.5);
        assert!(e.contains(2.0) || abs(e.mid() - 2.0) < 1e-9, "{e}");
        assert!(e.width() <= 1e-8 * (1.0 + e.hi));
        let e = powint(0.0);
        assert!(abs(e.mid() - 1.0) < 1e-12);
        let e = powint(-1.0);
        assert!(e.diverged.is_some() && e.hi == f64::INFINITY);
        let e = powint(-0.95);
        assert!(abs(e.mid() - 20.0) < 1e-7 * 20.0, "{e}");
    }

    #[test]
    fn borderline_log_integral() {
        // int_0^{1/2} d^-1 L(d)^-2 with L = ln(e + 1/d): finite.
        let w = WeightExpr::product(0.0, 0.5, alloc::vec![Factor::power(0.0, -1.0), Factor::log(0.0, -2.0)]).unwrap();
        let e = integrate_singular(&w, 1.0, 0.0, 0.5, 1e-6);
        assert!(e.is_finite(), "{e}");
        assert!(e.width() <= 1e-6 * (1.0 + e.hi), "{e}");
    }

    #[test]
    fn cum_grid_closed_form() {
        let w = WeightExpr::product(0.0, 1.0, alloc::vec![Factor::power(1.0, 2.0)]).unwrap();
        let g = cum_antiderivative(&w, 2.0, 64, 1e-10);
        let i = g.index_of(0.5).unwrap();
        assert!(abs(g.at(i).mid() - 1.0) < 1e-9);
        assert!(g.diverged.is_some());
        assert_eq!(*g.hi.last().unwrap(), f64::INFINITY);
    }
}
