//! Asymptotic normal forms of positive functions near a point.
//!
//! An [`OrderTuple`] describes `g(d)` as the distance `d` to a point tends to
//! zero, up to a bounded factor:
//!
//! ```text
//! g(d) ~ exp(sum_i rate_i * d^{-gamma_i}) * d^alpha * L(d)^delta * LL(d)^epsilon * LLL(d)^theta
//! ```
//!
//! where `L(d) = ln(e + 1/d)`, `LL(d) = ln(e + L(d))` and `LLL` is the next
//! iterate. The triple-log exponent only appears as the integral of a
//! borderline `d^-1 L^-1 LL^-1` weight.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::math::{abs, exps_equal, tol_sign};

/// One exponential term `exp(rate * d^{-gamma})`; `rate < 0` decays.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub gamma: f64,
    pub rate: f64,
}

/// Asymptotic normal form at a point. See the module docs.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderTuple {
    /// Sorted by `gamma`, largest first; no zero rates.
    exp: Vec<ExpTerm>,
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub theta: f64,
}

impl Default for OrderTuple {
    fn default() -> Self {
        OrderTuple::one()
    }
}

fn snap(x: f64, scale: f64) -> f64 {
    if tol_sign(x, scale) == 0 {
        0.0
    } else {
        x
    }
}

impl OrderTuple {
    /// The constant function.
    pub fn one() -> Self {
        OrderTuple { exp: Vec::new(), alpha: 0.0, delta: 0.0, epsilon: 0.0, theta: 0.0 }
    }

    pub fn power(alpha: f64) -> Self {
        OrderTuple { alpha, ..Self::one() }
    }

    pub fn log_power(delta: f64) -> Self {
        OrderTuple { delta, ..Self::one() }
    }

    pub fn loglog_power(epsilon: f64) -> Self {
        OrderTuple { epsilon, ..Self::one() }
    }

    /// `exp(-beta d^{-gamma})`.
    pub fn exp_neg(beta: f64, gamma: f64) -> Self {
        let mut o = Self::one();
        if beta != 0.0 {
            o.exp.push(ExpTerm { gamma, rate: -beta });
        }
        o
    }

    pub fn with_exponents(alpha: f64, delta: f64, epsilon: f64) -> Self {
        OrderTuple { alpha, delta, epsilon, ..Self::one() }
    }

    pub fn exp_terms(&self) -> &[ExpTerm] {
        &self.exp
    }

    /// Leading (largest `gamma`) exponential term, if any.
    pub fn leading_exp(&self) -> Option<ExpTerm> {
        self.exp.first().copied()
    }

    pub fn is_one(&self) -> bool {
        self.exp.is_empty()
            && self.alpha == 0.0
            && self.delta == 0.0
            && self.epsilon == 0.0
            && self.theta == 0.0
    }

    pub fn mul(&self, other: &OrderTuple) -> OrderTuple {
        let mut exp: Vec<ExpTerm> = Vec::with_capacity(self.exp.len() + other.exp.len());
        for t in self.exp.iter().chain(other.exp.iter()) {
            if let Some(e) = exp.iter_mut().find(|e| exps_equal(e.gamma, t.gamma)) {
                let scale = abs(e.rate).max(abs(t.rate));
                e.rate = snap(e.rate + t.rate, scale);
            } else {
                exp.push(*t);
            }
        }
        exp.retain(|e| e.rate != 0.0);
        exp.sort_by(|x, y| y.gamma.partial_cmp(&x.gamma).unwrap_or(Ordering::Equal));
        let add = |x: f64, y: f64| snap(x + y, abs(x).max(abs(y)));
        OrderTuple {
            exp,
            alpha: add(self.alpha, other.alpha),
            delta: add(self.delta, other.delta),
            epsilon: add(self.epsilon, other.epsilon),
            theta: add(self.theta, other.theta),
        }
    }

    /// `g^s`.
    pub fn powf(&self, s: f64) -> OrderTuple {
        if s == 0.0 {
            return OrderTuple::one();
        }
        OrderTuple {
            exp: self.exp.iter().map(|e| ExpTerm { gamma: e.gamma, rate: e.rate * s }).collect(),
            alpha: self.alpha * s,
            delta: self.delta * s,
            epsilon: self.epsilon * s,
            theta: self.theta * s,
        }
    }

    pub fn recip(&self) -> OrderTuple {
        self.powf(-1.0)
    }

    pub fn div(&self, other: &OrderTuple) -> OrderTuple {
        self.mul(&other.recip())
    }

    /// Behaviour of `g(d)` as `d -> 0`: `Greater` for `g -> inf`, `Less` for
    /// `g -> 0`, `Equal` when `g` stays comparable to a positive constant.
    pub fn growth(&self) -> Ordering {
        if let Some(e) = self.leading_exp() {
            return if e.rate > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        for (x, sign) in [(self.alpha, -1.0), (self.delta, 1.0), (self.epsilon, 1.0), (self.theta, 1.0)] {
            match tol_sign(x * sign, 1.0) {
                1 => return Ordering::Greater,
                -1 => return Ordering::Less,
                _ => {}
            }
        }
        Ordering::Equal
    }

    /// Compares growth: `Greater` means `self / other -> inf`.
    pub fn cmp_growth(&self, other: &OrderTuple) -> Ordering {
        self.div(other).growth()
    }

    /// Whether `g` is integrable on `(0, d0)` for small `d0`.
    pub fn is_integrable(&self) -> bool {
        if let Some(e) = self.leading_exp() {
            return e.rate < 0.0;
        }
        if !exps_equal(self.alpha, -1.0) {
            return self.alpha > -1.0;
        }
        for x in [self.delta, self.epsilon, self.theta] {
            if !exps_equal(x, -1.0) {
                return x < -1.0;
            }
        }
        false
    }

    /// Order of `int_0^d g` when `g` is integrable, or of `int_d^{d0} g`
    /// when it is not. `None` past the triple-log level.
    pub fn integral(&self) -> Option<OrderTuple> {
        if let Some(e) = self.leading_exp() {
            return Some(self.mul(&OrderTuple::power(e.gamma + 1.0)));
        }
        if !exps_equal(self.alpha, -1.0) {
            return Some(self.mul(&OrderTuple::power(1.0)));
        }
        let mut o = OrderTuple::one();
        o.theta = self.theta;
        o.epsilon = self.epsilon;
        o.delta = self.delta;
        if !exps_equal(self.delta, -1.0) {
            o.delta = self.delta + 1.0;
            return Some(o);
        }
        o.delta = 0.0;
        if !exps_equal(self.epsilon, -1.0) {
            o.epsilon = self.epsilon + 1.0;
            return Some(o);
        }
        o.epsilon = 0.0;
        if !exps_equal(self.theta, -1.0) && self.theta == 0.0 {
            o.theta = 1.0;
            return Some(o);
        }
        None
    }

    /// Reflection-invariant key used by the lexicographic total order.
    fn key(&self) -> (f64, f64, f64, f64, f64, f64) {
        let (g, r) = self.leading_exp().map(|e| (e.gamma, e.rate)).unwrap_or((0.0, 0.0));
        (r.signum(), g * r.signum(), r, -self.alpha, self.delta, self.epsilon)
    }

    /// Lexicographic total order on growth: larger means faster growth
    /// (or slower decay) as `d -> 0`.
    pub fn total_cmp(&self, other: &OrderTuple) -> Ordering {
        let g = self.cmp_growth(other);
        if g != Ordering::Equal {
            return g;
        }
        // Same growth class: tie-break on the raw key so the order is total.
        let (a, b) = (self.key(), other.key());
        a.partial_cmp(&b).unwrap_or(Ordering::Equal)
    }
}

impl fmt::Display for OrderTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.exp {
            write!(f, "exp({} d^-{}) ", e.rate, e.gamma)?;
        }
        write!(f, "d^{} L^{} LL^{}", self.alpha + 0.0, self.delta + 0.0, self.epsilon + 0.0)?;
        if self.theta != 0.0 {
            write!(f, " LLL^{}", self.theta)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrability_table() {
        assert!(OrderTuple::power(-0.5).is_integrable());
        assert!(!OrderTuple::power(-1.0).is_integrable());
        assert!(OrderTuple::with_exponents(-1.0, -2.0, 0.0).is_integrable());
        assert!(!OrderTuple::with_exponents(-1.0, -1.0, 0.0).is_integrable());
        assert!(OrderTuple::with_exponents(-1.0, -1.0, -1.5).is_integrable());
        assert!(!OrderTuple::with_exponents(-1.0, -1.0, -1.0).is_integrable());
        assert!(!OrderTuple::with_exponents(-1.0, 3.0, 0.0).is_integrable());
        assert!(OrderTuple::with_exponents(-0.9, 30.0, 4.0).is_integrable());
        assert!(OrderTuple::exp_neg(1.0, 1.0).mul(&OrderTuple::power(-7.0)).is_integrable());
        assert!(!OrderTuple::exp_neg(1.0, 1.0).recip().is_integrable());
    }

    #[test]
    fn growth_and_exp_merge() {
        let a = OrderTuple::exp_neg(2.0, 1.0);
        let b = OrderTuple::exp_neg(2.0, 1.0).recip();
        assert!(a.mul(&b).is_one());
        assert_eq!(a.growth(), Ordering::Less);
        assert_eq!(OrderTuple::power(0.3).cmp_growth(&OrderTuple::power(0.5)), Ordering::Greater);
        let mixed = OrderTuple::exp_neg(1.0, 2.0).mul(&OrderTuple::exp_neg(-5.0, 1.0));
        assert_eq!(mixed.growth(), Ordering::Less);
    }

    #[test]
    fn integral_orders() {
        let i = OrderTuple::power(-0.5).integral().unwrap();
        assert!(exps_equal(i.alpha, 0.5));
        let i = OrderTuple::with_exponents(-1.0, -2.0, 0.0).integral().unwrap();
        assert!(exps_equal(i.delta, -1.0) && i.alpha == 0.0);
        let i = OrderTuple::with_exponents(-1.0, -1.0, -1.0).integral().unwrap();
        assert_eq!(i.theta, 1.0);
    }
}
