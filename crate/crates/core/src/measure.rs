//! Weights built from symbolic factors, finite measures with atoms, and the
//! positive part `(nu1 - k nu2)_+`.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::math::{abs, exp, ln, log_level, loglog_level, powf};
use crate::order::OrderTuple;
use crate::quad::{self, Enclosure, Point, SegmentIntegrand, Tail};
use crate::Side;

/// Errors raised while building or querying measures.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureError {
    InvalidFactor(String),
    BadSupport { a: f64, b: f64 },
    BadTiling(String),
    AtomOutside { x: f64 },
    DuplicateAtom { x: f64 },
    BadMass { x: f64, mass: f64 },
    Domain { x: f64 },
    NegativeK(f64),
    Precondition(String),
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::InvalidFactor(s) => write!(f, "invalid factor: {s}"),
            MeasureError::BadSupport { a, b } => write!(f, "support [{a}, {b}] is not a proper interval"),
            MeasureError::BadTiling(s) => write!(f, "pieces do not tile the support: {s}"),
            MeasureError::AtomOutside { x } => write!(f, "atom at {x} lies outside the support"),
            MeasureError::DuplicateAtom { x } => write!(f, "two atoms at {x}"),
            MeasureError::BadMass { x, mass } => write!(f, "atom at {x} has mass {mass}"),
            MeasureError::Domain { x } => write!(f, "point {x} is outside the support"),
            MeasureError::NegativeK(k) => write!(f, "k = {k} must be nonnegative"),
            MeasureError::Precondition(s) => write!(f, "precondition failed: {s}"),
        }
    }
}

impl core::error::Error for MeasureError {}

/// Dirac mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// A single multiplicative factor of a weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor {
    /// `|x - center|^alpha`
    Power { center: f64, alpha: f64 },
    /// `L(|x - center|)^delta` with `L(d) = ln(e + 1/d)`
    Log { center: f64, delta: f64 },
    /// `LL(|x - center|)^epsilon` with `LL(d) = ln(e + L(d))`
    LogLog { center: f64, epsilon: f64 },
    /// `exp(-beta |x - center|^-gamma)`
    ExpNeg { center: f64, beta: f64, gamma: f64 },
    /// An unknown function with values in `[1/c, c]`; evaluated as 1.
    Envelope { c: f64 },
}

impl Factor {
    pub fn power(center: f64, alpha: f64) -> Factor {
        Factor::Power { center, alpha }
    }

    pub fn log(center: f64, delta: f64) -> Factor {
        Factor::Log { center, delta }
    }

    pub fn loglog(center: f64, epsilon: f64) -> Factor {
        Factor::LogLog { center, epsilon }
    }

    pub fn exp_neg(center: f64, beta: f64, gamma: f64) -> Factor {
        Factor::ExpNeg { center, beta, gamma }
    }

    pub fn envelope(c: f64) -> Factor {
        Factor::Envelope { c }
    }

    pub fn center(&self) -> Option<f64> {
        match *self {
            Factor::Power { center, .. }
            | Factor::Log { center, .. }
            | Factor::LogLog { center, .. }
            | Factor::ExpNeg { center, .. } => Some(center),
            Factor::Envelope { .. } => None,
        }
    }

    fn validate(&self) -> Result<(), MeasureError> {
        let bad = |s: &str| Err(MeasureError::InvalidFactor(s.into()));
        if let Some(c) = self.center() {
            if !c.is_finite() {
                return bad("center must be finite");
            }
        }
        match *self {
            Factor::Power { alpha: e, .. } | Factor::Log { delta: e, .. } | Factor::LogLog { epsilon: e, .. } => {
                if !e.is_finite() {
                    return bad("exponent must be finite");
                }
            }
            Factor::ExpNeg { beta, gamma, .. } => {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return bad("expneg needs beta >= 0");
                }
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return bad("expneg needs gamma > 0");
                }
            }
            Factor::Envelope { c } => {
                if !(c >= 1.0 && c.is_finite()) {
                    return bad("envelope needs C >= 1");
                }
            }
        }
        Ok(())
    }

    /// Asymptotic order at the factor's own center.
    pub fn order(&self) -> OrderTuple {
        match *self {
            Factor::Power { alpha, .. } => OrderTuple::power(alpha),
            Factor::Log { delta, .. } => OrderTuple::log_power(delta),
            Factor::LogLog { epsilon, .. } => OrderTuple::loglog_power(epsilon),
            Factor::ExpNeg { beta, gamma, .. } => OrderTuple::exp_neg(beta, gamma),
            Factor::Envelope { .. } => OrderTuple::one(),
        }
    }

    /// `ln f` at distance `exp(-u)` from the center.
    pub(crate) fn ln_at_level(&self, u: f64) -> f64 {
        match *self {
            Factor::Power { alpha, .. } => {
                if alpha == 0.0 {
                    0.0
                } else {
                    -alpha * u
                }
            }
            Factor::Log { delta, .. } => {
                if delta == 0.0 {
                    0.0
                } else {
                    delta * ln(log_level(u))
                }
            }
            Factor::LogLog { epsilon, .. } => {
                if epsilon == 0.0 {
                    0.0
                } else {
                    epsilon * ln(loglog_level(u))
                }
            }
            Factor::ExpNeg { beta, gamma, .. } => {
                if beta == 0.0 {
                    0.0
                } else {
                    -beta * exp(gamma * u)
                }
            }
            Factor::Envelope { .. } => 0.0,
        }
    }

    /// `ln f(x)` for `x` away from the center.
    pub(crate) fn ln_at(&self, x: f64) -> f64 {
        match self.center() {
            Some(c) => self.ln_at_level(-ln(abs(x - c))),
            None => 0.0,
        }
    }

    fn reflected(&self, s: f64) -> Factor {
        let mut f = *self;
        match &mut f {
            Factor::Power { center, .. }
            | Factor::Log { center, .. }
            | Factor::LogLog { center, .. }
            | Factor::ExpNeg { center, .. } => *center = s - *center,
            Factor::Envelope { .. } => {}
        }
        f
    }
}

/// One piece of a weight: either identically zero or a product of factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    /// `None` for a zero piece.
    pub factors: Option<Vec<Factor>>,
}

impl Piece {
    pub fn is_zero(&self) -> bool {
        self.factors.is_none()
    }

    fn envelope(&self) -> f64 {
        self.factors
            .iter()
            .flatten()
            .map(|f| if let Factor::Envelope { c } = f { *c } else { 1.0 })
            .product()
    }
}

/// Piecewise product-of-factors weight on `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightExpr {
    a: f64,
    b: f64,
    coef: f64,
    pieces: Vec<Piece>,
}

impl WeightExpr {
    /// Builds a weight from pieces that tile `[a, b]`. Pieces are split at
    /// interior factor centers so every singular point is a piece end.
    pub fn new(a: f64, b: f64, pieces: Vec<Piece>) -> Result<WeightExpr, MeasureError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(MeasureError::BadSupport { a, b });
        }
        if pieces.is_empty() {
            return Err(MeasureError::BadTiling("no pieces".into()));
        }
        let mut at = a;
        for p in &pieces {
            if p.lo != at {
                return Err(MeasureError::BadTiling(alloc::format!("gap or overlap at {at}")));
            }
            if !(p.hi > p.lo) {
                return Err(MeasureError::BadTiling(alloc::format!("empty piece at {}", p.lo)));
            }
            for f in p.factors.iter().flatten() {
                f.validate()?;
            }
            at = p.hi;
        }
        if at != b {
            return Err(MeasureError::BadTiling(alloc::format!("pieces end at {at}, support ends at {b}")));
        }
        let mut split = Vec::new();
        for p in pieces {
            let Some(fs) = &p.factors else {
                split.push(p);
                continue;
            };
            let mut cuts: Vec<f64> = fs.iter().filter_map(|f| f.center()).filter(|&c| c > p.lo && c < p.hi).collect();
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            cuts.dedup();
            let mut lo = p.lo;
            for c in cuts.into_iter().chain(core::iter::once(p.hi)) {
                split.push(Piece { lo, hi: c, factors: p.factors.clone() });
                lo = c;
            }
        }
        Ok(WeightExpr { a, b, coef: 1.0, pieces: split })
    }

    pub fn product(a: f64, b: f64, factors: Vec<Factor>) -> Result<WeightExpr, MeasureError> {
        WeightExpr::new(a, b, alloc::vec![Piece { lo: a, hi: b, factors: Some(factors) }])
    }

    pub fn constant(a: f64, b: f64) -> Result<WeightExpr, MeasureError> {
        WeightExpr::product(a, b, Vec::new())
    }

    pub fn zero(a: f64, b: f64) -> Result<WeightExpr, MeasureError> {
        WeightExpr::new(a, b, alloc::vec![Piece { lo: a, hi: b, factors: None }])
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn coef(&self) -> f64 {
        self.coef
    }

    /// `c * w`.
    pub fn scaled(&self, c: f64) -> WeightExpr {
        let mut w = self.clone();
        w.coef *= c;
        if c == 0.0 {
            for p in &mut w.pieces {
                p.factors = None;
            }
            w.coef = 1.0;
        }
        w
    }

    /// Piece ends, ascending, including `a` and `b`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().map(|p| p.lo).collect();
        v.push(self.b);
        v
    }

    /// Same weight with the pieces not selected by `keep` set to zero.
    pub fn keep_pieces(&self, keep: &[bool]) -> WeightExpr {
        let pieces = self
            .pieces
            .iter()
            .zip(keep)
            .map(|(p, &k)| if k { p.clone() } else { Piece { lo: p.lo, hi: p.hi, factors: None } })
            .collect();
        merge_zero_runs(WeightExpr { pieces, ..self.clone() })
    }

    pub fn is_identically_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.is_zero())
    }

    /// Index of the piece adjacent to `x` on the given side.
    pub fn piece_index(&self, x: f64, side: Side) -> Option<usize> {
        self.pieces.iter().position(|p| match side {
            Side::Right => p.lo <= x && x < p.hi,
            Side::Left => p.lo < x && x <= p.hi,
        })
    }

    pub(crate) fn piece_index_inside(&self, c: f64, d: f64) -> Option<usize> {
        self.pieces.iter().position(|p| p.lo <= c && d <= p.hi)
    }

    /// Order of `w` at `x` from one side; `None` on a zero piece.
    pub fn order_at(&self, x: f64, side: Side) -> Option<OrderTuple> {
        let i = self.piece_index(x, side)?;
        let fs = self.pieces[i].factors.as_ref()?;
        Some(fs.iter().filter(|f| f.center() == Some(x)).fold(OrderTuple::one(), |o, f| o.mul(&f.order())))
    }

    /// Nominal value of the non-singular part of `w` at `x` from one side,
    /// and the envelope constant of that piece.
    pub fn const_at(&self, x: f64, side: Side) -> Option<(f64, f64)> {
        let i = self.piece_index(x, side)?;
        let p = &self.pieces[i];
        let fs = p.factors.as_ref()?;
        let l: f64 = fs.iter().filter(|f| f.center() != Some(x)).map(|f| f.ln_at(x)).sum();
        Some((self.coef * exp(l), p.envelope()))
    }

    /// Envelope constant of the piece containing `[c, d]`.
    pub(crate) fn envelope_on(&self, c: f64, d: f64) -> f64 {
        self.piece_index_inside(c, d).map(|i| self.pieces[i].envelope()).unwrap_or(1.0)
    }

    /// Largest envelope constant across all pieces.
    pub fn max_envelope(&self) -> f64 {
        self.pieces.iter().map(|p| p.envelope()).fold(1.0, f64::max)
    }

    /// `ln w` at a point of piece `i` (`-inf` on zero pieces).
    pub(crate) fn ln_eval(&self, i: usize, pt: &Point) -> f64 {
        let Some(fs) = &self.pieces[i].factors else {
            return f64::NEG_INFINITY;
        };
        let mut s = ln(self.coef);
        for f in fs {
            s += match f.center() {
                Some(c) if c == pt.anchor => f.ln_at_level(pt.u),
                Some(_) if pt.off.is_nan() => f.ln_at(pt.x),
                Some(c) => f.ln_at_level(-ln(abs((pt.anchor - c) + pt.off))),
                None => 0.0,
            };
        }
        s
    }

    /// Nominal density value (envelopes evaluated as 1). At a factor center
    /// the one-sided limit is returned; at a piece boundary the larger
    /// one-sided value.
    pub fn density_at(&self, x: f64) -> Result<f64, MeasureError> {
        if !(x >= self.a && x <= self.b) {
            return Err(MeasureError::Domain { x });
        }
        let mut best: Option<f64> = None;
        for side in [Side::Left, Side::Right] {
            let Some(i) = self.piece_index(x, side) else { continue };
            let p = &self.pieces[i];
            let v = match &p.factors {
                None => 0.0,
                Some(fs) => {
                    let centered = fs.iter().any(|f| f.center() == Some(x));
                    if centered {
                        let o = self.order_at(x, side).unwrap_or_default();
                        match o.growth() {
                            Ordering::Greater => f64::INFINITY,
                            Ordering::Less => 0.0,
                            Ordering::Equal => self.const_at(x, side).map(|c| c.0).unwrap_or(0.0),
                        }
                    } else {
                        exp(self.ln_eval(i, &Point::at(x)))
                    }
                }
            };
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
        Ok(best.unwrap_or(0.0))
    }

    /// Majorant of `w^s` near `x` on one side, valid for distances up to
    /// `reach` (which must not cross another factor center).
    pub(crate) fn majorant(&self, i: usize, x: f64, side: Side, reach: f64, s: f64) -> Tail {
        let p = &self.pieces[i];
        let Some(fs) = &p.factors else {
            return if s > 0.0 {
                Tail::Zero
            } else {
                Tail::Divergent(quad::Divergence { x, side, order: None })
            };
        };
        let order = fs
            .iter()
            .filter(|f| f.center() == Some(x))
            .fold(OrderTuple::one(), |o, f| o.mul(&f.order()))
            .powf(s);
        if !order.is_integrable() {
            return Tail::Divergent(quad::Divergence { x, side, order: Some(order) });
        }
        let far = x + side.dir() * reach;
        let mut ln_scale = s * ln(self.coef);
        for f in fs.iter().filter(|f| f.center().is_some_and(|c| c != x)) {
            ln_scale += (s * f.ln_at(x)).max(s * f.ln_at(far));
        }
        Tail::Majorant { scale: exp(ln_scale), order }
    }

    /// Weight on `[c, d]` obtained by restriction and, outside `[a, b]`,
    /// extension by zero.
    pub fn rebased(&self, c: f64, d: f64) -> Result<WeightExpr, MeasureError> {
        let mut pieces = Vec::new();
        if c < self.a {
            pieces.push(Piece { lo: c, hi: self.a.min(d), factors: None });
        }
        for p in &self.pieces {
            let lo = p.lo.max(c);
            let hi = p.hi.min(d);
            if hi > lo {
                pieces.push(Piece { lo, hi, factors: p.factors.clone() });
            }
        }
        if d > self.b {
            pieces.push(Piece { lo: self.b.max(c), hi: d, factors: None });
        }
        let mut w = WeightExpr::new(c, d, pieces)?;
        w.coef = self.coef;
        Ok(w)
    }

    /// The weight `x -> w(s - x)` on `[s - b, s - a]` with `s = a + b`.
    pub fn reflected(&self) -> WeightExpr {
        let s = self.a + self.b;
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece {
                lo: s - p.hi,
                hi: s - p.lo,
                factors: p.factors.as_ref().map(|fs| fs.iter().map(|f| f.reflected(s)).collect()),
            })
            .collect();
        WeightExpr { a: self.a, b: self.b, coef: self.coef, pieces }
    }

    /// Segment integrand for `w^s` on `[c, d]` inside one piece.
    pub(crate) fn segment(&self, c: f64, d: f64, s: f64) -> Option<PowSegment<'_>> {
        self.piece_index_inside(c, d).map(|i| PowSegment { w: self, i, s })
    }

    /// Whether `w^{-q}` is integrable near `x` from one side.
    pub fn reciprocal_integrable(&self, x: f64, side: Side, q: f64) -> bool {
        match self.order_at(x, side) {
            None => false,
            Some(o) => o.powf(-q).is_integrable(),
        }
    }
}

/// `w^s` restricted to one piece.
pub(crate) struct PowSegment<'a> {
    w: &'a WeightExpr,
    i: usize,
    s: f64,
}

impl SegmentIntegrand for PowSegment<'_> {
    fn ln_eval(&self, pt: &Point) -> f64 {
        let l = self.w.ln_eval(self.i, pt);
        if l == f64::NEG_INFINITY {
            return if self.s > 0.0 { l } else { f64::INFINITY };
        }
        self.s * l
    }

    fn tail(&self, anchor: f64, side: Side, reach: f64) -> Tail {
        self.w.majorant(self.i, anchor, side, reach, self.s)
    }
}

/// Integral of `w^s` over `[c, d]`, split at the weight's breakpoints,
/// with envelope constants folded into the bracket.
pub fn integrate_pow(w: &WeightExpr, s: f64, c: f64, d: f64, tol: f64) -> Enclosure {
    if !(d > c) {
        return Enclosure::zero();
    }
    let mut cuts: Vec<f64> = w.breakpoints().into_iter().filter(|&x| x > c && x < d).collect();
    cuts.insert(0, c);
    cuts.push(d);
    let mut acc = Enclosure::zero();
    for seg in cuts.windows(2) {
        let Some(f) = w.segment(seg[0], seg[1], s) else { continue };
        let e = quad::integrate_segment(&f, seg[0], seg[1], tol);
        let env = powf(w.envelope_on(seg[0], seg[1]), abs(s));
        acc = acc.add(&e.widen(env));
    }
    acc
}

/// Finite measure: density plus finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    density: WeightExpr,
    atoms: Vec<Atom>,
}

/// Asymptotic tag of a density near a point.
#[derive(Clone, Debug, PartialEq)]
pub enum Tag {
    /// Identically zero on a one-sided neighbourhood.
    Vanishes,
    /// Comparable to the given order.
    Exact(OrderTuple),
    /// Bounded above by a constant times the given order.
    AtMost(OrderTuple),
}

/// Common read-only interface of [`Measure`] and [`PositivePart`].
pub trait MeasureView: Clone + Sync {
    fn support(&self) -> (f64, f64);
    fn atoms(&self) -> Vec<Atom>;
    /// Density breakpoints including the support ends.
    fn breakpoints(&self) -> Vec<f64>;
    fn tag(&self, x: f64, side: Side) -> Tag;
    /// Certified bracket of the mass of an interval.
    fn measure_of(&self, c: f64, d: f64, closed_left: bool, closed_right: bool, tol: f64) -> Enclosure;
    /// `Some(true)` if certainly positive, `Some(false)` if certainly zero.
    fn mass_positive(&self, c: f64, d: f64, closed_left: bool, closed_right: bool) -> Option<bool>;
    fn density_at(&self, x: f64) -> Result<f64, MeasureError>;
    fn reflect(&self) -> Self;
    fn restrict(&self, c: f64, d: f64) -> Self;
    fn atom_mass(&self, x: f64) -> f64 {
        self.atoms().iter().find(|a| a.x == x).map(|a| a.mass).unwrap_or(0.0)
    }
}

fn in_range(x: f64, c: f64, d: f64, cl: bool, cr: bool) -> bool {
    (x > c || (cl && x == c)) && (x < d || (cr && x == d))
}

impl Measure {
    pub fn new(density: WeightExpr, mut atoms: Vec<Atom>) -> Result<Measure, MeasureError> {
        let (a, b) = density.support();
        for at in &atoms {
            if !(at.x >= a && at.x <= b) {
                return Err(MeasureError::AtomOutside { x: at.x });
            }
            if !(at.mass > 0.0 && at.mass.is_finite()) {
                return Err(MeasureError::BadMass { x: at.x, mass: at.mass });
            }
        }
        atoms.sort_by(|p, q| p.x.partial_cmp(&q.x).unwrap());
        for w in atoms.windows(2) {
            if w[0].x == w[1].x {
                return Err(MeasureError::DuplicateAtom { x: w[0].x });
            }
        }
        Ok(Measure { density, atoms })
    }

    pub fn lebesgue(a: f64, b: f64) -> Result<Measure, MeasureError> {
        Measure::new(WeightExpr::constant(a, b)?, Vec::new())
    }

    pub fn zero(a: f64, b: f64) -> Result<Measure, MeasureError> {
        Measure::new(WeightExpr::zero(a, b)?, Vec::new())
    }

    pub fn from_factors(a: f64, b: f64, factors: Vec<Factor>) -> Result<Measure, MeasureError> {
        Measure::new(WeightExpr::product(a, b, factors)?, Vec::new())
    }

    pub fn with_atom(mut self, x: f64, mass: f64) -> Result<Measure, MeasureError> {
        self.atoms.push(Atom { x, mass });
        Measure::new(self.density, self.atoms)
    }

    pub fn density(&self) -> &WeightExpr {
        &self.density
    }

    /// `c * mu`.
    pub fn scaled(&self, c: f64) -> Measure {
        let atoms = if c > 0.0 {
            self.atoms.iter().map(|a| Atom { x: a.x, mass: a.mass * c }).collect()
        } else {
            Vec::new()
        };
        Measure { density: self.density.scaled(c), atoms }
    }

    /// Same measure viewed on `[c, d]` (restricted, or extended by zero).
    pub fn rebased(&self, c: f64, d: f64) -> Result<Measure, MeasureError> {
        let atoms = self.atoms.iter().copied().filter(|a| a.x >= c && a.x <= d).collect();
        Measure::new(self.density.rebased(c, d)?, atoms)
    }

    /// Keeps the density on `[c, d]` but only the atoms selected by the
    /// closedness flags; the density is zeroed outside `[c, d]`.
    pub fn restricted_to(&self, c: f64, d: f64, closed_left: bool, closed_right: bool) -> Measure {
        let (a, b) = self.support();
        let mut pieces = Vec::new();
        if c > a {
            pieces.push(Piece { lo: a, hi: c, factors: None });
        }
        for p in self.density.pieces() {
            let lo = p.lo.max(c);
            let hi = p.hi.min(d);
            if hi > lo {
                pieces.push(Piece { lo, hi, factors: p.factors.clone() });
            }
        }
        if d < b {
            pieces.push(Piece { lo: d, hi: b, factors: None });
        }
        let mut w = WeightExpr::new(a, b, pieces).expect("restriction keeps the tiling");
        w.coef = self.density.coef;
        let atoms = self.atoms.iter().copied().filter(|t| in_range(t.x, c, d, closed_left, closed_right)).collect();
        Measure { density: merge_zero_runs(w), atoms }
    }

    pub fn total_mass(&self, tol: f64) -> Enclosure {
        let (a, b) = self.support();
        self.measure_of(a, b, true, true, tol)
    }

    pub fn is_finite(&self) -> bool {
        let w = &self.density;
        w.pieces().iter().all(|p| {
            p.is_zero()
                || (w.order_at(p.lo, Side::Right).is_none_or(|o| o.is_integrable())
                    && w.order_at(p.hi, Side::Left).is_none_or(|o| o.is_integrable()))
        })
    }

    /// Whether the measure is zero.
    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_identically_zero()
    }

    /// Hull of the support of the measure (density pieces and atoms).
    pub fn hull(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in self.density.pieces().iter().filter(|p| !p.is_zero()) {
            lo = lo.min(p.lo);
            hi = hi.max(p.hi);
        }
        for a in &self.atoms {
            lo = lo.min(a.x);
            hi = hi.max(a.x);
        }
        (lo <= hi).then_some((lo, hi))
    }

    pub fn without_atoms(&self) -> Measure {
        Measure { density: self.density.clone(), atoms: Vec::new() }
    }
}

fn merge_zero_runs(w: WeightExpr) -> WeightExpr {
    let mut pieces: Vec<Piece> = Vec::new();
    for p in w.pieces {
        if let Some(last) = pieces.last_mut() {
            if last.is_zero() && p.is_zero() {
                last.hi = p.hi;
                continue;
            }
        }
        pieces.push(p);
    }
    WeightExpr { pieces, ..w }
}

impl MeasureView for Measure {
    fn support(&self) -> (f64, f64) {
        self.density.support()
    }

    fn atoms(&self) -> Vec<Atom> {
        self.atoms.clone()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.density.breakpoints()
    }

    fn tag(&self, x: f64, side: Side) -> Tag {
        match self.density.order_at(x, side) {
            None => Tag::Vanishes,
            Some(o) => Tag::Exact(o),
        }
    }

    fn measure_of(&self, c: f64, d: f64, cl: bool, cr: bool, tol: f64) -> Enclosure {
        let mut e = integrate_pow(&self.density, 1.0, c, d, tol);
        let m: f64 = self.atoms.iter().filter(|a| in_range(a.x, c, d, cl, cr)).map(|a| a.mass).sum();
        e = e.add(&Enclosure::exact(m));
        e
    }

    fn mass_positive(&self, c: f64, d: f64, cl: bool, cr: bool) -> Option<bool> {
        if self.atoms.iter().any(|a| in_range(a.x, c, d, cl, cr)) {
            return Some(true);
        }
        let dens = self.density.pieces().iter().any(|p| !p.is_zero() && p.lo.max(c) < p.hi.min(d));
        Some(dens)
    }

    fn density_at(&self, x: f64) -> Result<f64, MeasureError> {
        self.density.density_at(x)
    }

    fn reflect(&self) -> Measure {
        let (a, b) = self.support();
        let mut atoms: Vec<Atom> = self.atoms.iter().map(|t| Atom { x: a + b - t.x, mass: t.mass }).collect();
        atoms.reverse();
        Measure { density: self.density.reflected(), atoms }
    }

    fn restrict(&self, c: f64, d: f64) -> Measure {
        self.rebased(c, d).expect("restriction to a subinterval")
    }
}

/// The measure `(nu1 - k nu2)_+`, with density `max(w1 - k w2, 0)` and
/// atoms `max(c1 - k c2, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivePart {
    nu1: Measure,
    nu2: Measure,
    k: f64,
}

/// Builds `(nu1 - k nu2)_+` on the support of `nu1`; outside the support of
/// `nu2` the result equals `nu1`.
pub fn positive_part(nu1: &Measure, k: f64, nu2: &Measure) -> Result<PositivePart, MeasureError> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(MeasureError::NegativeK(k));
    }
    let (a, b) = nu1.support();
    let nu2 = nu2.rebased(a, b)?;
    Ok(PositivePart { nu1: nu1.clone(), nu2, k })
}

impl PositivePart {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn parts(&self) -> (&Measure, &Measure) {
        (&self.nu1, &self.nu2)
    }

    fn ln_density(&self, i1: usize, i2: usize, pt: &Point, mode: Bound) -> f64 {
        let w1 = &self.nu1.density;
        let w2 = &self.nu2.density;
        let (c1, c2) = match mode {
            Bound::Nominal => (1.0, 1.0),
            Bound::Lower => (1.0 / w1.pieces[i1].envelope(), w2.pieces[i2].envelope()),
            Bound::Upper => (w1.pieces[i1].envelope(), 1.0 / w2.pieces[i2].envelope()),
        };
        let l1 = w1.ln_eval(i1, pt) + ln(c1);
        if self.k == 0.0 || l1 == f64::NEG_INFINITY {
            return l1;
        }
        let l2 = w2.ln_eval(i2, pt) + ln(self.k * c2);
        if l2 == f64::NEG_INFINITY {
            return l1;
        }
        let r = 1.0 - exp(l2 - l1);
        // Differences at the rounding level of `l1, l2` count as zero.
        if r > 64.0 * f64::EPSILON * (1.0 + abs(l1) + abs(l2)) {
            l1 + ln(r)
        } else {
            f64::NEG_INFINITY
        }
    }

    fn cuts(&self, c: f64, d: f64) -> Vec<f64> {
        let mut cuts: Vec<f64> = self
            .nu1
            .density
            .breakpoints()
            .into_iter()
            .chain(self.nu2.density.breakpoints())
            .filter(|&x| x > c && x < d)
            .collect();
        cuts.push(c);
        cuts.push(d);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        cuts
    }

    fn has_envelopes(&self) -> bool {
        self.nu1.density.max_envelope() > 1.0 || self.nu2.density.max_envelope() > 1.0
    }

    /// Ratio bounds `(lo, hi)` of `w1 / w2` on an open segment, from the
    /// monotonicity of each factor between breakpoints.
    fn ratio_bounds(&self, c: f64, d: f64) -> Option<(f64, f64)> {
        let w1 = &self.nu1.density;
        let w2 = &self.nu2.density;
        let i1 = w1.piece_index_inside(c, d)?;
        let i2 = w2.piece_index_inside(c, d)?;
        let f1 = w1.pieces[i1].factors.as_ref()?;
        let f2 = w2.pieces[i2].factors.as_ref()?;
        let mut lo = ln(w1.coef) - ln(w2.coef) - ln(w1.pieces[i1].envelope()) - ln(w2.pieces[i2].envelope());
        let mut hi = ln(w1.coef) - ln(w2.coef) + ln(w1.pieces[i1].envelope()) + ln(w2.pieces[i2].envelope());
        let ends = |f: &Factor| {
            let at = |x: f64| match f.center() {
                Some(cc) if cc == x => f.ln_at_level(f64::INFINITY),
                _ => f.ln_at(x),
            };
            (at(c), at(d))
        };
        for f in f1 {
            let (u, v) = ends(f);
            lo += u.min(v);
            hi += u.max(v);
        }
        for f in f2 {
            let (u, v) = ends(f);
            lo -= u.max(v);
            hi -= u.min(v);
        }
        (lo.is_finite() && hi.is_finite()).then(|| (exp(lo), exp(hi)))
    }
}

#[derive(Clone, Copy)]
enum Bound {
    Nominal,
    Lower,
    Upper,
}

struct PosSegment<'a> {
    pp: &'a PositivePart,
    i1: usize,
    i2: usize,
    mode: Bound,
}

impl SegmentIntegrand for PosSegment<'_> {
    fn ln_eval(&self, pt: &Point) -> f64 {
        self.pp.ln_density(self.i1, self.i2, pt, self.mode)
    }

    fn tail(&self, anchor: f64, side: Side, reach: f64) -> Tail {
        let t = self.pp.nu1.density.majorant(self.i1, anchor, side, reach, 1.0);
        match (t, self.mode) {
            (Tail::Majorant { scale, order }, Bound::Upper) => {
                Tail::Majorant { scale: scale * self.pp.nu1.density.pieces[self.i1].envelope(), order }
            }
            (t, _) => t,
        }
    }
}

impl MeasureView for PositivePart {
    fn support(&self) -> (f64, f64) {
        self.nu1.support()
    }

    fn atoms(&self) -> Vec<Atom> {
        self.nu1
            .atoms
            .iter()
            .map(|a| Atom { x: a.x, mass: a.mass - self.k * self.nu2.atom_mass(a.x) })
            .filter(|a| a.mass > 0.0)
            .collect()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.support();
        self.cuts(a, b)
    }

    fn tag(&self, x: f64, side: Side) -> Tag {
        let Some(o1) = self.nu1.density.order_at(x, side) else {
            return Tag::Vanishes;
        };
        if self.k == 0.0 {
            return Tag::Exact(o1);
        }
        let Some(o2) = self.nu2.density.order_at(x, side) else {
            return Tag::Exact(o1);
        };
        match o1.cmp_growth(&o2) {
            Ordering::Greater => Tag::Exact(o1),
            Ordering::Less => Tag::Vanishes,
            Ordering::Equal => {
                let (n1, e1) = self.nu1.density.const_at(x, side).unwrap_or((0.0, 1.0));
                let (n2, e2) = self.nu2.density.const_at(x, side).unwrap_or((1.0, 1.0));
                let l = n1 / n2;
                if self.k > l * e1 * e2 {
                    Tag::Vanishes
                } else if self.k < l / (e1 * e2) {
                    Tag::Exact(o1)
                } else {
                    Tag::AtMost(o1)
                }
            }
        }
    }

    fn measure_of(&self, c: f64, d: f64, cl: bool, cr: bool, tol: f64) -> Enclosure {
        let m: f64 = self.atoms().iter().filter(|a| in_range(a.x, c, d, cl, cr)).map(|a| a.mass).sum();
        let mut acc = Enclosure::exact(m);
        if !(d > c) {
            return acc;
        }
        let env = self.has_envelopes();
        for seg in self.cuts(c, d).windows(2) {
            let (s0, s1) = (seg[0], seg[1]);
            let (Some(i1), Some(i2)) =
                (self.nu1.density.piece_index_inside(s0, s1), self.nu2.density.piece_index_inside(s0, s1))
            else {
                continue;
            };
            if self.nu1.density.pieces[i1].is_zero() {
                continue;
            }
            if let Some((_, rhi)) = self.ratio_bounds(s0, s1) {
                if rhi < self.k {
                    continue;
                }
            }
            let e = if env {
                let lo = quad::integrate_segment(&PosSegment { pp: self, i1, i2, mode: Bound::Lower }, s0, s1, tol);
                let hi = quad::integrate_segment(&PosSegment { pp: self, i1, i2, mode: Bound::Upper }, s0, s1, tol);
                Enclosure::hull_of(&lo, &hi)
            } else {
                quad::integrate_segment(&PosSegment { pp: self, i1, i2, mode: Bound::Nominal }, s0, s1, tol)
            };
            acc = acc.add(&e);
        }
        acc
    }

    fn mass_positive(&self, c: f64, d: f64, cl: bool, cr: bool) -> Option<bool> {
        if self.atoms().iter().any(|a| in_range(a.x, c, d, cl, cr)) {
            return Some(true);
        }
        if !(d > c) {
            return Some(false);
        }
        let mut unknown = false;
        for seg in self.cuts(c, d).windows(2) {
            let (s0, s1) = (seg[0], seg[1]);
            let Some(i1) = self.nu1.density.piece_index_inside(s0, s1) else { continue };
            if self.nu1.density.pieces[i1].is_zero() {
                continue;
            }
            let i2 = self.nu2.density.piece_index_inside(s0, s1)?;
            if self.nu2.density.pieces[i2].is_zero() || self.k == 0.0 {
                return Some(true);
            }
            if matches!(self.tag(s0, Side::Right), Tag::Exact(_)) || matches!(self.tag(s1, Side::Left), Tag::Exact(_))
            {
                return Some(true);
            }
            // Interior sampling certifies positivity; monotone ratio bounds on
            // sub-cells certify vanishing.
            let n = 32;
            let mut all_zero = true;
            for j in 0..n {
                let (t0, t1) = (s0 + (s1 - s0) * j as f64 / n as f64, s0 + (s1 - s0) * (j + 1) as f64 / n as f64);
                let mid = 0.5 * (t0 + t1);
                let pt = Point::at(mid);
                let l1 = self.nu1.density.ln_eval(i1, &pt) - ln(self.nu1.density.pieces[i1].envelope());
                let l2 = self.nu2.density.ln_eval(i2, &pt) + ln(self.k * self.nu2.density.pieces[i2].envelope());
                if l1 > l2 + 1e-9 {
                    return Some(true);
                }
                match self.ratio_bounds(t0, t1) {
                    Some((_, rhi)) if rhi < self.k => {}
                    _ => all_zero = false,
                }
            }
            if !all_zero {
                unknown = true;
            }
        }
        if unknown {
            None
        } else {
            Some(false)
        }
    }

    fn density_at(&self, x: f64) -> Result<f64, MeasureError> {
        let v1 = self.nu1.density_at(x)?;
        let v2 = self.nu2.density_at(x)?;
        if v1.is_infinite() && v2.is_infinite() {
            return Ok(match self.tag(x, Side::Left) {
                Tag::Vanishes => 0.0,
                _ => f64::INFINITY,
            });
        }
        Ok((v1 - self.k * v2).max(0.0))
    }

    fn reflect(&self) -> PositivePart {
        PositivePart { nu1: self.nu1.reflect(), nu2: self.nu2.reflect(), k: self.k }
    }

    fn restrict(&self, c: f64, d: f64) -> PositivePart {
        PositivePart { nu1: self.nu1.restrict(c, d), nu2: self.nu2.restrict(c, d), k: self.k }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        let w = WeightExpr::product(0.0, 1.0, alloc::vec![Factor::power(0.0, 0.5)]).unwrap();
        assert!(abs(w.density_at(0.25).unwrap() - 0.5) < 1e-15);
        let w = WeightExpr::product(0.0, 1.0, alloc::vec![Factor::power(1.0, -0.5)]).unwrap();
        assert_eq!(w.density_at(1.0).unwrap(), f64::INFINITY);
        assert!(w.density_at(1.5).is_err());
        let z = WeightExpr::zero(0.0, 1.0).unwrap();
        assert_eq!(z.density_at(0.3).unwrap(), 0.0);
    }

    #[test]
    fn pieces_split_at_centers() {
        let w = WeightExpr::product(-1.0, 1.0, alloc::vec![Factor::power(0.0, 3.0)]).unwrap();
        assert_eq!(w.breakpoints(), alloc::vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn atom_inclusion() {
        let m = Measure::zero(0.0, 1.0).unwrap().with_atom(1.0, 2.0).unwrap();
        assert_eq!(m.measure_of(0.5, 1.0, true, true, 1e-8).lo, 2.0);
        assert_eq!(m.measure_of(0.5, 1.0, true, false, 1e-8).hi, 0.0);
    }

    #[test]
    fn invalid_factors_rejected() {
        assert!(WeightExpr::product(0.0, 1.0, alloc::vec![Factor::exp_neg(0.0, -1.0, 1.0)]).is_err());
        assert!(WeightExpr::product(0.0, 1.0, alloc::vec![Factor::exp_neg(0.0, 1.0, 0.0)]).is_err());
        assert!(WeightExpr::product(0.0, 1.0, alloc::vec![Factor::envelope(0.5)]).is_err());
    }
}
