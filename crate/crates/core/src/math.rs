//! Thin wrappers over `libm` so the rest of the crate reads like std code.

pub(crate) const E: f64 = core::f64::consts::E;

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// `ln(e + e^u)`, the regularized `log(1/d)` at `d = e^{-u}`, without overflow.
#[inline]
pub(crate) fn log_level(u: f64) -> f64 {
    if u > 1.0 {
        u + ln1p(exp(1.0 - u))
    } else {
        1.0 + ln1p(exp(u - 1.0))
    }
}

/// `ln(e + ln(e + e^u))`.
#[inline]
pub(crate) fn loglog_level(u: f64) -> f64 {
    ln(E + log_level(u))
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if abs(self.sum) >= abs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Tolerant equality for exponents produced by float arithmetic.
#[inline]
pub(crate) fn exps_equal(a: f64, b: f64) -> bool {
    let scale = 1.0f64.max(abs(a)).max(abs(b));
    abs(a - b) <= 1e-12 * scale
}

/// Sign of `x` with values within exponent tolerance of zero mapped to 0.
#[inline]
pub(crate) fn tol_sign(x: f64, scale: f64) -> i8 {
    if abs(x) <= 1e-12 * scale.max(1.0) {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}
