//! Regression battery shared by the integration tests.

#![allow(dead_code)]

use sobmuck_core::{Factor, Measure, Outcome};

pub struct Instance {
    pub name: &'static str,
    pub mu0: Measure,
    pub mu1: Measure,
    pub p: f64,
    pub expected: Outcome,
}

fn leb(a: f64, b: f64) -> Measure {
    Measure::lebesgue(a, b).unwrap()
}

fn zero(a: f64, b: f64) -> Measure {
    Measure::zero(a, b).unwrap()
}

fn prod(a: f64, b: f64, f: Vec<Factor>) -> Measure {
    Measure::from_factors(a, b, f).unwrap()
}

pub fn battery() -> Vec<Instance> {
    let p = 2.0;
    let inst = |name, mu0, mu1, expected| Instance { name, mu0, mu1, p, expected };
    vec![
        inst("atom-at-zero", leb(0.0, 1.0).with_atom(0.0, 1.0).unwrap(), zero(0.0, 1.0).with_atom(0.0, 1.0).unwrap(), Outcome::Bounded),
        inst(
            "cubic-atom",
            leb(-1.0, 1.0),
            prod(-1.0, 1.0, vec![Factor::power(0.0, 3.0)]).with_atom(0.0, 1.0).unwrap(),
            Outcome::Unbounded,
        ),
        inst("lebesgue", leb(0.0, 1.0), leb(0.0, 1.0), Outcome::Bounded),
        inst(
            "jacobi-critical-atom",
            leb(-1.0, 1.0),
            prod(-1.0, 1.0, vec![Factor::power(-1.0, p - 1.0), Factor::power(1.0, p - 1.0)]).with_atom(1.0, 1.0).unwrap(),
            Outcome::Unknown,
        ),
        inst("legendre-sobolev", leb(-1.0, 1.0), leb(-1.0, 1.0).scaled(0.5), Outcome::Bounded),
        inst(
            "jacobi-mild",
            prod(-1.0, 1.0, vec![Factor::power(1.0, 0.5), Factor::power(-1.0, -0.5)]),
            prod(-1.0, 1.0, vec![Factor::power(1.0, 0.5), Factor::power(-1.0, 0.5)]),
            Outcome::Bounded,
        ),
        inst(
            "gegenbauer-steep",
            prod(-1.0, 1.0, vec![Factor::power(1.0, -0.5), Factor::power(-1.0, -0.5)]),
            prod(-1.0, 1.0, vec![Factor::power(1.0, 2.5), Factor::power(-1.0, 2.5)]),
            Outcome::Bounded,
        ),
        inst(
            "endpoint-atoms",
            leb(0.0, 1.0).with_atom(1.0, 1.0).unwrap(),
            leb(0.0, 1.0).with_atom(1.0, 1.0).unwrap(),
            Outcome::Bounded,
        ),
        inst(
            "vanishing-end-atom",
            leb(0.0, 1.0),
            prod(0.0, 1.0, vec![Factor::power(1.0, 3.0)]).with_atom(1.0, 1.0).unwrap(),
            Outcome::Unbounded,
        ),
        inst("cubic-zero", leb(-1.0, 1.0), prod(-1.0, 1.0, vec![Factor::power(0.0, 3.0)]), Outcome::Bounded),
        inst(
            "jacobi-critical",
            leb(-1.0, 1.0),
            prod(-1.0, 1.0, vec![Factor::power(-1.0, 1.0), Factor::power(1.0, 1.0)]),
            Outcome::Bounded,
        ),
        inst(
            "discrete-mu0",
            zero(-1.0, 1.0).with_atom(-1.0, 1.0).unwrap().with_atom(0.0, 1.0).unwrap().with_atom(1.0, 1.0).unwrap(),
            leb(-1.0, 1.0).with_atom(0.0, 2.0).unwrap(),
            Outcome::Bounded,
        ),
    ]
}
