//! Muckenhoupt-type constants with certified enclosures, structural
//! classification of measures, and boundedness decisions for the
//! multiplication operator `M f(x) = x f(x)` on polynomial Sobolev spaces
//! `P^{1,p}(mu0, mu1)` on a compact interval.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and threading live in the `sobmuck` companion crate.
//!
//! Module map:
//!
//! * [`order`]: asymptotic normal forms of weights near a point, integrability.
//! * [`measure`]: weights built from power / log / iterated-log / exponential
//!   factors, measures with atoms, positive parts `(nu1 - k nu2)_+`.
//! * [`quad`]: endpoint-singular integration with two-sided brackets.
//! * [`lambda`]: the constants `Lambda_{p,a}`, `Lambda_{p,b}`, `Lambda'_{p,b}`
//!   and the three-measure condition.
//! * [`classify`]: regular-point intervals, piecewise regularity, the ratio
//!   class at an endpoint.
//! * [`decide`]: the boundedness decision procedure and its certificates.
//! * [`sobolev`]: Gram matrices, Sobolev orthogonal and extremal polynomials,
//!   zeros, operator-norm estimates, empirical Hardy constants, the
//!   divergent witness sequence.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classify;
pub mod decide;
pub mod lambda;
pub mod linalg;
pub mod measure;
pub mod order;
pub mod quad;
pub mod sobolev;

mod gl_tables;
mod math;

pub use classify::{ClassifyError, RegClass, RegData};
pub use decide::{decide, Outcome, Theorem, Verdict};
pub use lambda::{Finite, LambdaOptions, LambdaResult};




pub use measure::{Atom, Factor, Measure, MeasureError, MeasureView, PositivePart, WeightExpr};
pub use order::OrderTuple;
pub use quad::{CumGrid, Enclosure};

/// Which end of the support interval `[a, b]` an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    A,
    B,
}

/// Side from which a point is approached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// From the left, `x -> c^-`.
    Left,
    /// From the right, `x -> c^+`.
    Right,
}

impl Side {
    pub(crate) fn dir(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}
