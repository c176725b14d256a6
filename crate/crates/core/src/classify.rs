//! Structural classification of measures: regular-point intervals,
//! piecewise regularity, piecewise monotonicity and the ratio class at an
//! endpoint.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::measure::{Measure, MeasureView, WeightExpr};
use crate::{Endpoint, Side};

#[derive(Clone, Debug, PartialEq)]
pub enum ClassifyError {
    /// `w^{-1/(p-1)}` fails to be integrable at an interior point.
    NotRegOnWholeInterval { x: f64 },
    NotPiecewiseRegular(String),
    BadExponent(f64),
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::NotRegOnWholeInterval { x } => {
                write!(f, "w^(-1/(p-1)) is not locally integrable at interior point {x}; use the piecewise decomposition")
            }
            ClassifyError::NotPiecewiseRegular(s) => write!(f, "not piecewise regular: {s}"),
            ClassifyError::BadExponent(p) => write!(f, "p = {p} must lie in (1, inf)"),
        }
    }
}

impl core::error::Error for ClassifyError {}

/// Shape of the interval of regular points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegClass {
    /// `[a, b]`
    ClosedClosed,
    /// `[a, b)`
    ClosedOpen,
    /// `(a, b]`
    OpenClosed,
    /// `(a, b)`
    OpenOpen,
}

impl RegClass {
    fn from_ends(left_closed: bool, right_closed: bool) -> RegClass {
        match (left_closed, right_closed) {
            (true, true) => RegClass::ClosedClosed,
            (true, false) => RegClass::ClosedOpen,
            (false, true) => RegClass::OpenClosed,
            (false, false) => RegClass::OpenOpen,
        }
    }

    pub fn left_closed(self) -> bool {
        matches!(self, RegClass::ClosedClosed | RegClass::ClosedOpen)
    }

    pub fn right_closed(self) -> bool {
        matches!(self, RegClass::ClosedClosed | RegClass::OpenClosed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegClass::ClosedClosed => "[a,b]",
            RegClass::ClosedOpen => "[a,b)",
            RegClass::OpenClosed => "(a,b]",
            RegClass::OpenOpen => "(a,b)",
        }
    }
}

fn check_p(p: f64) -> Result<f64, ClassifyError> {
    if p > 1.0 && p.is_finite() {
        Ok(1.0 / (p - 1.0))
    } else {
        Err(ClassifyError::BadExponent(p))
    }
}

/// Non-integrability of `w^{-q}` next to `x`; outside the support `w` is 0.
pub(crate) fn nonint(w: &WeightExpr, x: f64, side: Side, q: f64) -> bool {
    let (a, b) = w.support();
    if (side == Side::Left && x <= a) || (side == Side::Right && x >= b) {
        return true;
    }
    !w.reciprocal_integrable(x, side, q)
}

/// Regular-point interval of `w` on `[c, d]`, a union of pieces of `w`.
pub fn reg_of(w: &WeightExpr, c: f64, d: f64, q: f64) -> Result<RegClass, ClassifyError> {
    for pc in w.pieces().iter().filter(|pc| pc.lo < d && pc.hi > c) {
        if pc.is_zero() {
            return Err(ClassifyError::NotRegOnWholeInterval { x: 0.5 * (pc.lo.max(c) + pc.hi.min(d)) });
        }
        if pc.lo > c && nonint(w, pc.lo, Side::Right, q) {
            return Err(ClassifyError::NotRegOnWholeInterval { x: pc.lo });
        }
        if pc.hi < d && nonint(w, pc.hi, Side::Left, q) {
            return Err(ClassifyError::NotRegOnWholeInterval { x: pc.hi });
        }
    }
    Ok(RegClass::from_ends(!nonint(w, c, Side::Right, q), !nonint(w, d, Side::Left, q)))
}

/// Regular-point interval of `mu1` on its support interval.
pub fn reg_interval(mu1: &Measure, p: f64) -> Result<RegClass, ClassifyError> {
    let q = check_p(p)?;
    let (a, b) = mu1.support();
    reg_of(mu1.density(), a, b, q)
}

/// Result of the piecewise decomposition of `mu1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegData {
    /// `a_0 < a_1 < ... < a_m`.
    pub params: Vec<f64>,
    /// Indices `j` (1-based) of pieces `[a_{j-1}, a_j]` with locally
    /// integrable `w^{-1/(p-1)}` inside.
    pub j: Vec<usize>,
    /// Regular-point interval of each piece listed in `j`.
    pub reg: Vec<RegClass>,
    /// Atoms of `mu1` at points of two-sided non-integrability.
    pub h: Vec<f64>,
    pub strongly: bool,
    /// Sides `(a_j, side)` where the strong property fails.
    pub strong_failures: Vec<(f64, Side)>,
    /// The hull of `mu1` was a single point and was widened with `mu0`.
    pub hull_extended: bool,
    pub monotone_params: Option<Vec<f64>>,
}

impl RegData {
    /// `[a_{j-1}, a_j]` for a 1-based `j`.
    pub fn piece(&self, j: usize) -> (f64, f64) {
        (self.params[j - 1], self.params[j])
    }

    pub fn m(&self) -> usize {
        self.params.len() - 1
    }
}

/// Piecewise decomposition on the hull of `supp mu1`.
pub fn piecewise_decompose(mu1: &Measure, p: f64) -> Result<RegData, ClassifyError> {
    decompose(mu1, None, p)
}

/// As [`piecewise_decompose`], widening a one-point hull with the hull of `mu0`.
pub fn piecewise_decompose_with(mu1: &Measure, mu0: &Measure, p: f64) -> Result<RegData, ClassifyError> {
    decompose(mu1, Some(mu0), p)
}

fn decompose(mu1: &Measure, mu0: Option<&Measure>, p: f64) -> Result<RegData, ClassifyError> {
    let q = check_p(p)?;
    let Some((mut lo, mut hi)) = mu1.hull() else {
        return Err(ClassifyError::NotPiecewiseRegular("mu1 is the zero measure".into()));
    };
    let mut hull_extended = false;
    if lo >= hi {
        match mu0.and_then(|m| m.hull()) {
            Some((l0, h0)) if l0.min(lo) < h0.max(hi) => {
                lo = l0.min(lo);
                hi = h0.max(hi);
                hull_extended = true;
            }
            _ => {
                return Err(ClassifyError::NotPiecewiseRegular(alloc::format!(
                    "the convex hull of supp mu1 is the single point {lo}"
                )))
            }
        }
    }
    let w = mu1
        .density()
        .rebased(lo, hi)
        .map_err(|e| ClassifyError::NotPiecewiseRegular(alloc::format!("{e}")))?;
    let mut params = alloc::vec![lo];
    for pc in &w.pieces()[1..] {
        let x = pc.lo;
        let left = w.piece_index(x, Side::Left).map(|i| &w.pieces()[i]);
        let both_zero = pc.is_zero() && left.is_some_and(|l| l.is_zero());
        if !both_zero && (nonint(&w, x, Side::Left, q) || nonint(&w, x, Side::Right, q)) {
            params.push(x);
        }
    }
    params.push(hi);
    let mut j = Vec::new();
    let mut reg = Vec::new();
    for (idx, s) in params.windows(2).enumerate() {
        let mid = 0.5 * (s[0] + s[1]);
        let i = w.piece_index(mid, Side::Right).expect("piece inside hull");
        if !w.pieces()[i].is_zero() {
            j.push(idx + 1);
            reg.push(reg_of(&w, s[0], s[1], q)?);
        }
    }
    let h = mu1
        .atoms()
        .iter()
        .filter(|t| t.mass > 0.0 && t.x >= lo && t.x <= hi)
        .filter(|t| nonint(&w, t.x, Side::Left, q) && nonint(&w, t.x, Side::Right, q))
        .map(|t| t.x)
        .collect();
    let qs = 1.0 / p;
    let mut strong_failures = Vec::new();
    for &x in &params {
        for side in [Side::Left, Side::Right] {
            let outside = (side == Side::Left && x <= lo) || (side == Side::Right && x >= hi);
            if outside {
                continue;
            }
            if nonint(&w, x, side, q) && !nonint(&w, x, side, qs) {
                strong_failures.push((x, side));
            }
        }
    }
    let monotone_params = monotone_breaks(&w, lo, hi);
    Ok(RegData {
        params,
        j,
        reg,
        h,
        strongly: strong_failures.is_empty(),
        strong_failures,
        hull_extended,
        monotone_params: Some(monotone_params),
    })
}

/// Piece ends plus piece midpoints. On each half-piece only the factors
/// centred at its outer end vary unboundedly; the rest are comparable to
/// constants, and the product of the centred factors is eventually monotone
/// because its log-derivative has a dominant term.
fn monotone_breaks(w: &WeightExpr, lo: f64, hi: f64) -> Vec<f64> {
    let mut v = Vec::new();
    for pc in w.pieces() {
        if pc.hi <= lo || pc.lo >= hi {
            continue;
        }
        let (l, h) = (pc.lo.max(lo), pc.hi.min(hi));
        v.push(l);
        if !pc.is_zero() {
            v.push(0.5 * (l + h));
        }
    }
    v.push(hi);
    v.dedup();
    v
}

#[derive(Clone, Debug, PartialEq)]
pub enum Monotone {
    Yes(Vec<f64>),
    No,
    Unknown,
}

/// Piecewise monotonicity. Every measure built from the factor classes
/// qualifies; the returned points are the `b_j`.
pub fn is_piecewise_monotone(mu1: &Measure) -> Monotone {
    match mu1.hull() {
        Some((lo, hi)) if lo < hi => match mu1.density().rebased(lo, hi) {
            Ok(w) => Monotone::Yes(monotone_breaks(&w, lo, hi)),
            Err(_) => Monotone::Unknown,
        },
        Some((lo, _)) => Monotone::Yes(alloc::vec![lo]),
        None => Monotone::Unknown,
    }
}

/// Piecewise monotonicity of a derived measure whose density is not a
/// closed-form weight: never certified.
pub fn is_piecewise_monotone_view<V: MeasureView>(_mu1: &V) -> Monotone {
    Monotone::Unknown
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassCVerdict {
    /// `w1 / w0 -> inf`.
    LimitInfinity,
    /// `limsup w1 / w0 < inf`.
    LimsupFinite,
    NotInClass,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassCResult {
    pub verdict: ClassCVerdict,
    /// Upper bound of the limsup when finite.
    pub witness_bound: Option<f64>,
}

/// Behaviour of `w1 / w0` at an endpoint of the common support.
pub fn class_c(w1: &WeightExpr, w0: &WeightExpr, endpoint: Endpoint) -> ClassCResult {
    let (x, side) = match endpoint {
        Endpoint::A => (w1.support().0, Side::Right),
        Endpoint::B => (w1.support().1, Side::Left),
    };
    let finite = |b: f64| ClassCResult { verdict: ClassCVerdict::LimsupFinite, witness_bound: Some(b) };
    let Some(o1) = w1.order_at(x, side) else {
        return finite(0.0);
    };
    let Some(o0) = w0.order_at(x, side) else {
        return ClassCResult { verdict: ClassCVerdict::LimitInfinity, witness_bound: None };
    };
    match o1.cmp_growth(&o0) {
        Ordering::Greater => ClassCResult { verdict: ClassCVerdict::LimitInfinity, witness_bound: None },
        Ordering::Less => finite(0.0),
        Ordering::Equal => {
            let (n1, e1) = w1.const_at(x, side).unwrap_or((0.0, 1.0));
            let (n0, e0) = w0.const_at(x, side).unwrap_or((1.0, 1.0));
            if n0 > 0.0 && (n1 / n0).is_finite() {
                finite(n1 / n0 * e1 * e0)
            } else {
                ClassCResult { verdict: ClassCVerdict::NotInClass, witness_bound: None }
            }
        }
    }
}
