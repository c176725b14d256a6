//! Boundedness of `M f(x) = x f(x)` on `P^{1,p}(mu0, mu1)`.
//!
//! Negative screens run first, then the characterization for strongly
//! piecewise regular `mu1`, then three sufficient conditions. Every verdict
//! carries the hypotheses it used as replayable [`Check`]s.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::classify::{self, class_c, is_piecewise_monotone, piecewise_decompose_with, ClassCResult, ClassCVerdict, Monotone, RegClass, RegData};
use crate::lambda::{lambda_finiteness, three_measure_condition, Finite, LambdaError, LambdaOptions, ThreeMeasureOutcome};
use crate::measure::{positive_part, Measure, MeasureError, MeasureView};
use crate::quad::{self, Enclosure};
use crate::{Endpoint, Side};

#[derive(Clone, Debug, PartialEq)]
pub enum DecideError {
    BadExponent(f64),
    InfiniteMeasure,
    Measure(MeasureError),
    Lambda(LambdaError),
}

impl fmt::Display for DecideError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecideError::BadExponent(p) => write!(f, "p = {p} must lie in (1, inf)"),
            DecideError::InfiniteMeasure => write!(f, "measures must be finite"),
            DecideError::Measure(e) => write!(f, "{e}"),
            DecideError::Lambda(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DecideError {}

impl From<MeasureError> for DecideError {
    fn from(e: MeasureError) -> Self {
        DecideError::Measure(e)
    }
}

impl From<LambdaError> for DecideError {
    fn from(e: LambdaError) -> Self {
        DecideError::Lambda(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Bounded,
    Unbounded,
    Unknown,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Bounded => "Bounded",
            Outcome::Unbounded => "Unbounded",
            Outcome::Unknown => "Unknown",
        }
    }
}

/// Result cited by a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// `Reg = [a, b]`.
    TSub1,
    /// `Reg = [a, b)`.
    TSub2,
    /// `Reg = (a, b]`.
    TSub3,
    /// `Reg = (a, b)`.
    TSub4,
    /// Reduction to regular pieces for strongly piecewise regular `mu1`.
    CorSub3,
    /// Sufficiency of bounded regular pieces.
    TSub2Suff,
    /// Sufficiency for piecewise monotone `mu1`.
    TMonotoneSuff,
    /// Sufficiency after splitting off a part dominated by `mu0`.
    CorSplitSuff,
    /// Atom of `mu1` at a two-sided singular point without a `mu0` atom.
    TR1Neg,
    /// Divergent test sequence at an endpoint.
    TNiffNeg,
    /// `mu0 = 0`.
    Mu0ZeroNeg,
}

impl Theorem {
    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::TSub1 => "T-sub-1",
            Theorem::TSub2 => "T-sub-2",
            Theorem::TSub3 => "T-sub-3",
            Theorem::TSub4 => "T-sub-4",
            Theorem::CorSub3 => "Cor-sub-3",
            Theorem::TSub2Suff => "T-sub2-suff",
            Theorem::TMonotoneSuff => "T-monotone-suff",
            Theorem::CorSplitSuff => "Cor-split-suff",
            Theorem::TR1Neg => "T-R1-neg",
            Theorem::TNiffNeg => "T-niff-neg",
            Theorem::Mu0ZeroNeg => "Mu0-zero-neg",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Verified,
    Failed,
    Undecided,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::Failed => "failed",
            Status::Undecided => "undecided",
        }
    }

    fn from_opt(b: Option<bool>) -> Status {
        match b {
            Some(true) => Status::Verified,
            Some(false) => Status::Failed,
            None => Status::Undecided,
        }
    }

    fn from_bool(b: bool) -> Status {
        Status::from_opt(Some(b))
    }
}

/// A hypothesis that can be re-evaluated from `(mu0, mu1, p)`.
///
/// Piece-level checks refer to the measures restricted to the regular-point
/// interval of `[lo, hi]` described by `class`.
#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    Mu0Zero,
    /// `w1^{-1/(p-1)}` is locally integrable somewhere.
    Mu1DensitySomewhere,
    PiecewiseRegular,
    Strongly,
    Mu1Atom { x: f64 },
    /// `w1^{-1/(p-1)}` is non-integrable on both sides of `x`.
    TwoSidedNonint { x: f64 },
    Mu0AtomZero { x: f64 },
    Mu0AtomPositive { x: f64 },
    /// Regular-point interval of `[lo, hi]` is `class`.
    Reg { lo: f64, hi: f64, class: RegClass },
    /// `mu0(Reg([lo, hi])) > 0`.
    Mu0MassPositive { lo: f64, hi: f64, class: RegClass },
    /// `(w1, w0)` is in the ratio class at the endpoint.
    ClassC { lo: f64, hi: f64, class: RegClass, endpoint: Endpoint },
    /// Neither restricted measure has singular mass near the endpoint.
    SingularVanishes { lo: f64, hi: f64, class: RegClass, endpoint: Endpoint },
    /// `Lambda_{p,[sub_lo, sub_hi],endpoint}((mu1 - k mu0)_+, mu1) < inf`.
    ThreeMeasure { lo: f64, hi: f64, class: RegClass, sub_lo: f64, sub_hi: f64, endpoint: Endpoint, k: f64 },
    /// The same condition for some `k >= 0` from the search set.
    ThreeMeasureSearch { lo: f64, hi: f64, class: RegClass, sub_lo: f64, sub_hi: f64, endpoint: Endpoint },
    /// The divergence pattern for `(mu1, mu0, mu1)` at an endpoint.
    NiffPattern { endpoint: Endpoint },
    PiecewiseMonotone,
    /// [`split_dominated`] succeeds with this `k`.
    SplitDominated { k: f64 },
    SplitRestPiecewiseMonotone,
}

fn end_str(e: Endpoint) -> &'static str {
    match e {
        Endpoint::A => "a",
        Endpoint::B => "b",
    }
}

fn reg_str(lo: f64, hi: f64, class: RegClass) -> String {
    let l = if class.left_closed() { '[' } else { '(' };
    let r = if class.right_closed() { ']' } else { ')' };
    format!("{l}{lo}, {hi}{r}")
}

impl Check {
    pub fn name(&self) -> String {
        match *self {
            Check::Mu0Zero => "mu0 = 0".into(),
            Check::Mu1DensitySomewhere => "w1^(-1/(p-1)) locally integrable somewhere".into(),
            Check::PiecewiseRegular => "mu1 piecewise regular".into(),
            Check::Strongly => "mu1 strongly piecewise regular".into(),
            Check::Mu1Atom { x } => format!("mu1({{{x}}}) > 0"),
            Check::TwoSidedNonint { x } => format!("w1^(-1/(p-1)) not integrable on either side of {x}"),
            Check::Mu0AtomZero { x } => format!("mu0({{{x}}}) = 0"),
            Check::Mu0AtomPositive { x } => format!("mu0({{{x}}}) > 0 for {x} in H"),
            Check::Reg { lo, hi, class } => format!("Reg([{lo}, {hi}]) = {}", reg_str(lo, hi, class)),
            Check::Mu0MassPositive { lo, hi, class } => format!("mu0({}) > 0", reg_str(lo, hi, class)),
            Check::ClassC { lo, hi, endpoint, .. } => {
                format!("(w1, w0) in ratio class at {} of [{lo}, {hi}]", end_str(endpoint))
            }
            Check::SingularVanishes { lo, hi, endpoint, .. } => {
                format!("singular parts vanish near {} of [{lo}, {hi}]", end_str(endpoint))
            }
            Check::ThreeMeasure { sub_lo, sub_hi, endpoint, k, .. } => format!(
                "Lambda_(p,[{sub_lo}, {sub_hi}],{})((mu1 - {k} mu0)_+, mu1) < inf",
                end_str(endpoint)
            ),
            Check::ThreeMeasureSearch { sub_lo, sub_hi, endpoint, .. } => format!(
                "Lambda_(p,[{sub_lo}, {sub_hi}],{})((mu1 - k mu0)_+, mu1) < inf for some k",
                end_str(endpoint)
            ),
            Check::NiffPattern { endpoint } => format!("divergence pattern at {}", end_str(endpoint)),
            Check::PiecewiseMonotone => "mu1 piecewise monotone".into(),
            Check::SplitDominated { k } => format!("mu1 = mu11 + mu12 with mu12 <= {k} mu0"),
            Check::SplitRestPiecewiseMonotone => "mu11 piecewise monotone".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub check: Check,
    pub status: Status,
}

impl Hypothesis {
    pub fn name(&self) -> String {
        self.check.name()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Reg(RegData),
    ClassC { lo: f64, hi: f64, endpoint: Endpoint, result: ClassCResult },
    Lambda { sub_lo: f64, sub_hi: f64, endpoint: Endpoint, k: f64, enclosure: Enclosure },
    Split { k: f64 },
}

/// A route that was tried and did not conclude.
#[derive(Clone, Debug, PartialEq)]
pub struct Attempt {
    pub theorem: Theorem,
    pub gap: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// `None` exactly when the outcome is `Unknown`.
    pub theorem: Option<Theorem>,
    /// Piece-level results used by a reduction.
    pub piece_theorems: Vec<Theorem>,
    pub hypotheses: Vec<Hypothesis>,
    pub witnesses: Vec<Witness>,
    pub attempts: Vec<Attempt>,
    /// The nearest failing hypothesis of an `Unknown` verdict.
    pub gap: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecideOptions {
    pub lambda: LambdaOptions,
    /// Split point of `(lo, hi)` pieces as a fraction of the piece.
    pub x0_frac: f64,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { lambda: LambdaOptions { grid: 256, ..Default::default() }, x0_frac: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NiffScreen {
    Triggered,
    NotTriggered,
}

/// Screen for the divergent test sequence at `endpoint`: `nu2` finite near
/// the endpoint, `w3^{-1/(p-1)}` not integrable up to it, `nu1` has an atom
/// there and `nu2` has none.
pub fn niff_screen(nu1: &Measure, nu2: &Measure, nu3: &Measure, p: f64, endpoint: Endpoint) -> NiffScreen {
    if endpoint == Endpoint::A {
        return niff_screen(&nu1.reflect(), &nu2.reflect(), &nu3.reflect(), p, Endpoint::B);
    }
    if !(p > 1.0) {
        return NiffScreen::NotTriggered;
    }
    let q = 1.0 / (p - 1.0);
    let (_, b) = nu1.support();
    if nu2.support().1 != b || nu3.support().1 != b {
        return NiffScreen::NotTriggered;
    }
    let finite2 = nu2.density().order_at(b, Side::Left).is_none_or(|o| o.is_integrable());
    let nonint3 = !nu3.density().reciprocal_integrable(b, Side::Left, q);
    let hit = finite2 && nonint3 && nu1.atom_mass(b) > 0.0 && nu2.atom_mass(b) == 0.0;
    if hit {
        NiffScreen::Triggered
    } else {
        NiffScreen::NotTriggered
    }
}

/// Split `mu1 = mu11 + mu12` with `mu12 <= k mu0`: atoms of `mu1` sitting on
/// atoms of `mu0`, and density pieces whose ratio to `w0` stays bounded and
/// tends to zero somewhere. Returns `None` when nothing can be moved.
pub fn split_dominated(mu1: &Measure, mu0: &Measure) -> Option<(Measure, Measure, f64)> {
    if mu0.is_zero() {
        return None;
    }
    let (a, b) = mu1.support();
    let (a0, b0) = mu0.support();
    let mu0 = mu0.rebased(a.min(a0), b.max(b0)).ok()?.rebased(a, b).ok()?;
    let w1 = mu1.density();
    let mut k: f64 = 0.0;
    let mut a11 = Vec::new();
    let mut a12 = Vec::new();
    for t in mu1.atoms() {
        let m0 = mu0.atom_mass(t.x);
        if m0 > 0.0 {
            k = k.max(t.mass / m0);
            a12.push(t);
        } else {
            a11.push(t);
        }
    }
    let mut keep = Vec::new();
    for pc in w1.pieces() {
        let dominated = !pc.is_zero() && piece_ratio_bound(mu1, &mu0, pc.lo, pc.hi).map(|r| k = k.max(r)).is_some();
        keep.push(dominated);
    }
    if a12.is_empty() && !keep.iter().any(|&x| x) {
        return None;
    }
    let inv: Vec<bool> = keep.iter().map(|x| !x).collect();
    let mu12 = Measure::new(w1.keep_pieces(&keep), a12).ok()?;
    let mu11 = Measure::new(w1.keep_pieces(&inv), a11).ok()?;
    Some((mu11, mu12, k))
}

/// Bound of `w1 / w0` on `[lo, hi]` when the ratio is bounded there and
/// tends to zero at some break.
fn piece_ratio_bound(mu1: &Measure, mu0: &Measure, lo: f64, hi: f64) -> Option<f64> {
    let w1 = mu1.density();
    let w0 = mu0.density();
    if w0.pieces().iter().any(|p| p.is_zero() && p.lo < hi && p.hi > lo) {
        return None;
    }
    let mut pts: Vec<(f64, Side)> = vec![(lo, Side::Right), (hi, Side::Left)];
    for x in w0.breakpoints() {
        if x > lo && x < hi {
            pts.push((x, Side::Left));
            pts.push((x, Side::Right));
        }
    }
    let mut strict = false;
    let mut sup: f64 = 0.0;
    for &(x, side) in &pts {
        let o1 = w1.order_at(x, side)?;
        let o0 = w0.order_at(x, side)?;
        match o1.cmp_growth(&o0) {
            Ordering::Greater => return None,
            Ordering::Less => strict = true,
            Ordering::Equal => {
                let (n1, _) = w1.const_at(x, side)?;
                let (n0, _) = w0.const_at(x, side)?;
                if !(n0 > 0.0) {
                    return None;
                }
                sup = sup.max(n1 / n0);
            }
        }
    }
    if !strict {
        return None;
    }
    let mut breaks: Vec<f64> = pts.iter().map(|p| p.0).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let nodes = quad::layout(&breaks, 64);
    for w in nodes.windows(2) {
        let x = 0.5 * (w[0] + w[1]);
        let (v1, v0) = (w1.density_at(x).ok()?, w0.density_at(x).ok()?);
        if v0 > 0.0 {
            sup = sup.max(v1 / v0);
        }
    }
    Some(sup * w1.max_envelope() * w0.max_envelope())
}

fn check_inputs(mu0: &Measure, mu1: &Measure, p: f64) -> Result<(Measure, Measure), DecideError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(DecideError::BadExponent(p));
    }
    if !mu0.is_finite() || !mu1.is_finite() {
        return Err(DecideError::InfiniteMeasure);
    }
    let (a0, b0) = mu0.support();
    let (a1, b1) = mu1.support();
    let (a, b) = (a0.min(a1), b0.max(b1));
    Ok((mu0.rebased(a, b)?, mu1.rebased(a, b)?))
}

/// `mu` restricted to `Reg([lo, hi])` and viewed on `[lo, hi]`.
fn on_reg(mu: &Measure, lo: f64, hi: f64, class: RegClass) -> Result<Measure, MeasureError> {
    mu.restricted_to(lo, hi, class.left_closed(), class.right_closed()).rebased(lo, hi)
}

struct Ctx<'a> {
    mu0: &'a Measure,
    mu1: &'a Measure,
    p: f64,
    q: f64,
    opts: &'a DecideOptions,
}

enum PieceResult {
    Bounded,
    Fails,
    Unknown,
}

impl Ctx<'_> {
    fn eval(&self, c: &Check) -> Result<Status, DecideError> {
        let w1 = self.mu1.density();
        Ok(match *c {
            Check::Mu0Zero => Status::from_bool(self.mu0.is_zero()),
            Check::Mu1DensitySomewhere => Status::from_bool(!w1.is_identically_zero()),
            Check::PiecewiseRegular => Status::from_bool(piecewise_decompose_with(self.mu1, self.mu0, self.p).is_ok()),
            Check::Strongly => match piecewise_decompose_with(self.mu1, self.mu0, self.p) {
                Ok(rd) => Status::from_bool(rd.strongly),
                Err(_) => Status::Failed,
            },
            Check::Mu1Atom { x } => Status::from_bool(self.mu1.atom_mass(x) > 0.0),
            Check::TwoSidedNonint { x } => Status::from_bool(
                classify::nonint(w1, x, Side::Left, self.q) && classify::nonint(w1, x, Side::Right, self.q),
            ),
            Check::Mu0AtomZero { x } => Status::from_bool(self.mu0.atom_mass(x) == 0.0),
            Check::Mu0AtomPositive { x } => Status::from_bool(self.mu0.atom_mass(x) > 0.0),
            Check::Reg { lo, hi, class } => match classify::reg_of(w1, lo, hi, self.q) {
                Ok(r) => Status::from_bool(r == class),
                Err(_) => Status::Failed,
            },
            Check::Mu0MassPositive { lo, hi, class } => {
                Status::from_opt(self.mu0.mass_positive(lo, hi, class.left_closed(), class.right_closed()))
            }
            Check::ClassC { lo, hi, class, endpoint } => {
                let r = class_c(on_reg(self.mu1, lo, hi, class)?.density(), on_reg(self.mu0, lo, hi, class)?.density(), endpoint);
                Status::from_bool(r.verdict != ClassCVerdict::NotInClass)
            }
            Check::SingularVanishes { lo, hi, class, endpoint } => {
                let x = match endpoint {
                    Endpoint::A => lo,
                    Endpoint::B => hi,
                };
                let m0 = on_reg(self.mu0, lo, hi, class)?;
                let m1 = on_reg(self.mu1, lo, hi, class)?;
                Status::from_bool(m0.atom_mass(x) == 0.0 && m1.atom_mass(x) == 0.0)
            }
            Check::ThreeMeasure { lo, hi, class, sub_lo, sub_hi, endpoint, k } => {
                let n1 = on_reg(self.mu1, lo, hi, class)?.rebased(sub_lo, sub_hi)?;
                let n0 = on_reg(self.mu0, lo, hi, class)?.rebased(sub_lo, sub_hi)?;
                let pp = positive_part(&n1, k, &n0)?;
                match lambda_finiteness(&pp, &n1, self.p, endpoint)? {
                    Finite::Yes => Status::Verified,
                    Finite::No => Status::Failed,
                    Finite::Unknown => Status::Undecided,
                }
            }
            Check::ThreeMeasureSearch { lo, hi, class, sub_lo, sub_hi, endpoint } => {
                let n1 = on_reg(self.mu1, lo, hi, class)?.rebased(sub_lo, sub_hi)?;
                let n0 = on_reg(self.mu0, lo, hi, class)?.rebased(sub_lo, sub_hi)?;
                match three_measure_condition(&n1, &n0, &n1, self.p, endpoint, &self.opts.lambda)? {
                    ThreeMeasureOutcome::Holds(_) => Status::Verified,
                    ThreeMeasureOutcome::NotFound(_) => Status::Failed,
                    ThreeMeasureOutcome::Unknown(_) => Status::Undecided,
                }
            }
            Check::NiffPattern { endpoint } => {
                Status::from_bool(niff_screen(self.mu1, self.mu0, self.mu1, self.p, endpoint) == NiffScreen::Triggered)
            }
            Check::PiecewiseMonotone => match is_piecewise_monotone(self.mu1) {
                Monotone::Yes(_) => Status::Verified,
                Monotone::No => Status::Failed,
                Monotone::Unknown => Status::Undecided,
            },
            Check::SplitDominated { k } => match split_dominated(self.mu1, self.mu0) {
                Some((_, _, k2)) => Status::from_bool(k2 == k),
                None => Status::Failed,
            },
            Check::SplitRestPiecewiseMonotone => match split_dominated(self.mu1, self.mu0) {
                Some((m11, _, _)) if m11.is_zero() => Status::Verified,
                Some((m11, _, _)) => match is_piecewise_monotone(&m11) {
                    Monotone::Yes(_) => Status::Verified,
                    Monotone::No => Status::Failed,
                    Monotone::Unknown => Status::Undecided,
                },
                None => Status::Failed,
            },
        })
    }

    fn record(&self, hyps: &mut Vec<Hypothesis>, check: Check) -> Result<Status, DecideError> {
        let status = self.eval(&check)?;
        hyps.push(Hypothesis { check, status });
        Ok(status)
    }

    /// Boundedness on `Reg([lo, hi])` for a piece in `J`.
    fn piece(
        &self,
        lo: f64,
        hi: f64,
        class: RegClass,
        hyps: &mut Vec<Hypothesis>,
        wit: &mut Vec<Witness>,
    ) -> Result<(PieceResult, Theorem), DecideError> {
        let tag = match class {
            RegClass::ClosedClosed => Theorem::TSub1,
            RegClass::ClosedOpen => Theorem::TSub2,
            RegClass::OpenClosed => Theorem::TSub3,
            RegClass::OpenOpen => Theorem::TSub4,
        };
        if self.record(hyps, Check::Reg { lo, hi, class })? != Status::Verified {
            return Ok((PieceResult::Unknown, tag));
        }
        let mass = self.record(hyps, Check::Mu0MassPositive { lo, hi, class })?;
        let ends: &[Endpoint] = match class {
            RegClass::ClosedClosed => &[],
            RegClass::ClosedOpen => &[Endpoint::B],
            RegClass::OpenClosed => &[Endpoint::A],
            RegClass::OpenOpen => &[Endpoint::A, Endpoint::B],
        };
        let m0r = on_reg(self.mu0, lo, hi, class)?;
        let m1r = on_reg(self.mu1, lo, hi, class)?;
        for &e in ends {
            let cc = class_c(m1r.density(), m0r.density(), e);
            wit.push(Witness::ClassC { lo, hi, endpoint: e, result: cc });
            let s1 = self.record(hyps, Check::ClassC { lo, hi, class, endpoint: e })?;
            let s2 = self.record(hyps, Check::SingularVanishes { lo, hi, class, endpoint: e })?;
            if s1 != Status::Verified || s2 != Status::Verified {
                return Ok((PieceResult::Unknown, tag));
            }
        }
        match mass {
            Status::Verified => {}
            Status::Failed => return Ok((PieceResult::Fails, tag)),
            Status::Undecided => return Ok((PieceResult::Unknown, tag)),
        }
        let x0 = lo + self.opts.x0_frac * (hi - lo);
        let subs: Vec<(f64, f64, Endpoint)> = match class {
            RegClass::ClosedClosed => return Ok((PieceResult::Bounded, tag)),
            RegClass::ClosedOpen => vec![(lo, hi, Endpoint::B)],
            RegClass::OpenClosed => vec![(lo, hi, Endpoint::A)],
            RegClass::OpenOpen => vec![(lo, x0, Endpoint::A), (x0, hi, Endpoint::B)],
        };
        let mut k: f64 = 0.0;
        for &(sub_lo, sub_hi, e) in &subs {
            let n1 = m1r.rebased(sub_lo, sub_hi)?;
            let n0 = m0r.rebased(sub_lo, sub_hi)?;
            match three_measure_condition(&n1, &n0, &n1, self.p, e, &self.opts.lambda)? {
                ThreeMeasureOutcome::Holds(c) => {
                    k = k.max(c.k);
                    wit.push(Witness::Lambda { sub_lo, sub_hi, endpoint: e, k: c.k, enclosure: c.lambda.enclosure });
                }
                ThreeMeasureOutcome::NotFound(_) => {
                    self.record(hyps, Check::ThreeMeasureSearch { lo, hi, class, sub_lo, sub_hi, endpoint: e })?;
                    return Ok((PieceResult::Fails, tag));
                }
                ThreeMeasureOutcome::Unknown(_) => {
                    hyps.push(Hypothesis {
                        check: Check::ThreeMeasureSearch { lo, hi, class, sub_lo, sub_hi, endpoint: e },
                        status: Status::Undecided,
                    });
                    return Ok((PieceResult::Unknown, tag));
                }
            }
        }
        for &(sub_lo, sub_hi, e) in &subs {
            if self.record(hyps, Check::ThreeMeasure { lo, hi, class, sub_lo, sub_hi, endpoint: e, k })? != Status::Verified {
                return Ok((PieceResult::Unknown, tag));
            }
        }
        Ok((PieceResult::Bounded, tag))
    }
}

fn first_gap(hyps: &[Hypothesis]) -> String {
    hyps.iter().find(|h| h.status != Status::Verified).map(|h| h.name()).unwrap_or_else(|| "no route applies".into())
}

fn verdict(outcome: Outcome, theorem: Theorem, hyps: Vec<Hypothesis>, wit: Vec<Witness>, pieces: Vec<Theorem>) -> Verdict {
    Verdict {
        outcome,
        theorem: Some(theorem),
        piece_theorems: pieces,
        hypotheses: hyps,
        witnesses: wit,
        attempts: Vec::new(),
        gap: None,
    }
}

pub fn decide(mu0: &Measure, mu1: &Measure, p: f64) -> Result<Verdict, DecideError> {
    decide_with(mu0, mu1, p, &DecideOptions::default())
}

pub fn decide_with(mu0: &Measure, mu1: &Measure, p: f64, opts: &DecideOptions) -> Result<Verdict, DecideError> {
    let (m0, m1) = check_inputs(mu0, mu1, p)?;
    let cx = Ctx { mu0: &m0, mu1: &m1, p, q: 1.0 / (p - 1.0), opts };
    let (a, b) = m1.support();

    if m0.is_zero() {
        let mut h = Vec::new();
        cx.record(&mut h, Check::Mu0Zero)?;
        if cx.record(&mut h, Check::Mu1DensitySomewhere)? == Status::Verified {
            return Ok(verdict(Outcome::Unbounded, Theorem::Mu0ZeroNeg, h, Vec::new(), Vec::new()));
        }
    }

    for t in m1.atoms() {
        if t.x > a && t.x < b {
            let mut h = Vec::new();
            let ok = cx.record(&mut h, Check::Mu1Atom { x: t.x })? == Status::Verified
                && cx.record(&mut h, Check::TwoSidedNonint { x: t.x })? == Status::Verified
                && cx.record(&mut h, Check::Mu0AtomZero { x: t.x })? == Status::Verified;
            if ok {
                return Ok(verdict(Outcome::Unbounded, Theorem::TR1Neg, h, Vec::new(), Vec::new()));
            }
        }
    }

    let rd = match piecewise_decompose_with(&m1, &m0, p) {
        Ok(rd) => rd,
        Err(e) => {
            let h = vec![Hypothesis { check: Check::PiecewiseRegular, status: Status::Failed }];
            return Ok(Verdict {
                outcome: Outcome::Unknown,
                theorem: None,
                piece_theorems: Vec::new(),
                hypotheses: h,
                witnesses: Vec::new(),
                attempts: Vec::new(),
                gap: Some(format!("mu1 piecewise regular ({e})")),
            });
        }
    };
    let base = vec![Hypothesis { check: Check::PiecewiseRegular, status: Status::Verified }];
    let reg_w = Witness::Reg(rd.clone());

    if rd.strongly {
        let mut h = base.clone();
        cx.record(&mut h, Check::Strongly)?;
        for e in [Endpoint::A, Endpoint::B] {
            if cx.eval(&Check::NiffPattern { endpoint: e })? == Status::Verified {
                cx.record(&mut h, Check::NiffPattern { endpoint: e })?;
                return Ok(verdict(Outcome::Unbounded, Theorem::TNiffNeg, h, vec![reg_w], Vec::new()));
            }
        }
        let mut w = vec![reg_w];
        let mut pieces = Vec::new();
        let unknown = |h: Vec<Hypothesis>, w: Vec<Witness>| Verdict {
            outcome: Outcome::Unknown,
            theorem: None,
            piece_theorems: Vec::new(),
            gap: Some(first_gap(&h)),
            attempts: vec![Attempt { theorem: Theorem::CorSub3, gap: first_gap(&h) }],
            hypotheses: h,
            witnesses: w,
        };
        for &x in &rd.h {
            match cx.record(&mut h, Check::Mu0AtomPositive { x })? {
                Status::Verified => {}
                Status::Failed => return Ok(verdict(Outcome::Unbounded, Theorem::CorSub3, h, w, pieces)),
                Status::Undecided => return Ok(unknown(h, w)),
            }
        }
        for (&j, &class) in rd.j.iter().zip(&rd.reg) {
            let (lo, hi) = rd.piece(j);
            let (r, tag) = cx.piece(lo, hi, class, &mut h, &mut w)?;
            pieces.push(tag);
            match r {
                PieceResult::Bounded => {}
                PieceResult::Fails => return Ok(verdict(Outcome::Unbounded, Theorem::CorSub3, h, w, pieces)),
                PieceResult::Unknown => return Ok(unknown(h, w)),
            }
        }
        return Ok(verdict(Outcome::Bounded, Theorem::CorSub3, h, w, pieces));
    }

    let mut attempts = Vec::new();
    let mut all_hyps = base.clone();
    all_hyps.push(Hypothesis { check: Check::Strongly, status: Status::Failed });

    // Bounded regular pieces and mu0 atoms on H.
    {
        let mut h = base.clone();
        let mut w = vec![reg_w.clone()];
        let mut pieces = Vec::new();
        let mut ok = true;
        for &x in &rd.h {
            if cx.record(&mut h, Check::Mu0AtomPositive { x })? != Status::Verified {
                ok = false;
                break;
            }
        }
        if ok {
            for (&j, &class) in rd.j.iter().zip(&rd.reg) {
                let (lo, hi) = rd.piece(j);
                let (r, tag) = cx.piece(lo, hi, class, &mut h, &mut w)?;
                pieces.push(tag);
                if !matches!(r, PieceResult::Bounded) {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(verdict(Outcome::Bounded, Theorem::TSub2Suff, h, w, pieces));
        }
        attempts.push(Attempt { theorem: Theorem::TSub2Suff, gap: first_gap(&h) });
        all_hyps.extend(h.into_iter().skip(base.len()));
    }

    // Piecewise monotone mu1.
    {
        let mut h = base.clone();
        let ok = cx.record(&mut h, Check::PiecewiseMonotone)? == Status::Verified
            && monotone_masses(&cx, &rd, &mut h)?;
        if ok {
            return Ok(verdict(Outcome::Bounded, Theorem::TMonotoneSuff, h, vec![reg_w.clone()], Vec::new()));
        }
        attempts.push(Attempt { theorem: Theorem::TMonotoneSuff, gap: first_gap(&h) });
        all_hyps.extend(h.into_iter().skip(base.len()));
    }

    // Split off a part dominated by mu0.
    {
        let mut h = Vec::new();
        match split_dominated(&m1, &m0) {
            Some((m11, _, k)) => {
                cx.record(&mut h, Check::SplitDominated { k })?;
                let ok = cx.record(&mut h, Check::SplitRestPiecewiseMonotone)? == Status::Verified
                    && (m11.is_zero()
                        || match piecewise_decompose_with(&m11, &m0, p) {
                            Ok(rd11) => monotone_masses(&cx, &rd11, &mut h)?,
                            Err(_) => false,
                        });
                if ok {
                    return Ok(verdict(Outcome::Bounded, Theorem::CorSplitSuff, h, vec![Witness::Split { k }], Vec::new()));
                }
                attempts.push(Attempt { theorem: Theorem::CorSplitSuff, gap: first_gap(&h) });
            }
            None => {
                h.push(Hypothesis { check: Check::SplitDominated { k: 0.0 }, status: Status::Failed });
                attempts.push(Attempt { theorem: Theorem::CorSplitSuff, gap: "no part of mu1 is dominated by mu0".into() });
            }
        }
        all_hyps.extend(h);
    }

    Ok(Verdict {
        outcome: Outcome::Unknown,
        theorem: None,
        piece_theorems: Vec::new(),
        gap: Some(format!("{}; mu1 is not strongly piecewise regular", attempts[0].gap)),
        hypotheses: all_hyps,
        witnesses: vec![reg_w],
        attempts,
    })
}

/// `mu0(Reg(piece)) > 0` for every piece in `J` and `mu0({x}) > 0` on `H`.
fn monotone_masses(cx: &Ctx<'_>, rd: &RegData, h: &mut Vec<Hypothesis>) -> Result<bool, DecideError> {
    for &x in &rd.h {
        if cx.record(h, Check::Mu0AtomPositive { x })? != Status::Verified {
            return Ok(false);
        }
    }
    for (&j, &class) in rd.j.iter().zip(&rd.reg) {
        let (lo, hi) = rd.piece(j);
        if cx.record(h, Check::Mu0MassPositive { lo, hi, class })? != Status::Verified {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Re-evaluates every hypothesis of a verdict; true when all statuses agree.
pub fn replay(mu0: &Measure, mu1: &Measure, p: f64, v: &Verdict) -> Result<bool, DecideError> {
    replay_with(mu0, mu1, p, v, &DecideOptions::default())
}

pub fn replay_with(mu0: &Measure, mu1: &Measure, p: f64, v: &Verdict, opts: &DecideOptions) -> Result<bool, DecideError> {
    let (m0, m1) = check_inputs(mu0, mu1, p)?;
    let cx = Ctx { mu0: &m0, mu1: &m1, p, q: 1.0 / (p - 1.0), opts };
    for h in &v.hypotheses {
        if matches!(h.check, Check::SplitDominated { k } if k == 0.0) && h.status == Status::Failed {
            if split_dominated(&m1, &m0).is_some() {
                return Ok(false);
            }
            continue;
        }
        if cx.eval(&h.check)? != h.status {
            return Ok(false);
        }
    }
    if v.outcome != Outcome::Unknown {
        let failed = v.hypotheses.iter().filter(|h| h.status != Status::Verified).count();
        let allowed = usize::from(v.outcome == Outcome::Unbounded && v.theorem == Some(Theorem::CorSub3));
        if failed > allowed {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Factor;

    #[test]
    fn niff_examples() {
        let nu1 = Measure::zero(0.0, 1.0).unwrap().with_atom(1.0, 1.0).unwrap();
        let l = Measure::lebesgue(0.0, 1.0).unwrap();
        let w3 = Measure::from_factors(0.0, 1.0, vec![Factor::power(1.0, 2.0)]).unwrap();
        assert_eq!(niff_screen(&nu1, &l, &w3, 2.0, Endpoint::B), NiffScreen::Triggered);
        let l1 = l.clone().with_atom(1.0, 1.0).unwrap();
        assert_eq!(niff_screen(&nu1, &l1, &w3, 2.0, Endpoint::B), NiffScreen::NotTriggered);
        assert_eq!(niff_screen(&nu1, &l, &l, 2.0, Endpoint::B), NiffScreen::NotTriggered);
        let r = |m: &Measure| m.reflect();
        assert_eq!(niff_screen(&r(&nu1), &r(&l), &r(&w3), 2.0, Endpoint::A), NiffScreen::Triggered);
    }

    #[test]
    fn split_examples() {
        let l = Measure::lebesgue(0.0, 1.0).unwrap();
        let mu1 = l.clone().with_atom(0.5, 2.0).unwrap();
        let mu0 = l.clone().with_atom(0.5, 1.0).unwrap();
        let (m11, m12, k) = split_dominated(&mu1, &mu0).unwrap();
        assert_eq!(k, 2.0);
        assert_eq!(m12.atoms().len(), 1);
        assert!(m11.atoms().is_empty() && !m11.density().is_identically_zero());
        assert!(split_dominated(&l, &Measure::zero(0.0, 1.0).unwrap()).is_none());
        let a = Measure::from_factors(0.0, 1.0, vec![Factor::power(0.0, 0.5)]).unwrap();
        let b = Measure::from_factors(0.0, 1.0, vec![Factor::power(0.0, 0.3)]).unwrap();
        let (m11, _, k) = split_dominated(&a, &b).unwrap();
        assert!(m11.is_zero());
        assert!((k - 1.0).abs() < 1e-12, "{k}");
    }

    #[test]
    fn lebesgue_pair_is_bounded() {
        let l = Measure::lebesgue(0.0, 1.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let v = decide(&l, &l, p).unwrap();
            assert_eq!(v.outcome, Outcome::Bounded);
            assert_eq!(v.piece_theorems, vec![Theorem::TSub1]);
            assert!(replay(&l, &l, p, &v).unwrap());
        }
    }
}
