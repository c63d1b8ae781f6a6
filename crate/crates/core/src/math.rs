//! Float helpers routed through `libm` so results are bit-identical
//! with and without the standard library.

pub const NEG_INF: f64 = f64::NEG_INFINITY;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

/// `ln(1 + e^x)`, stable for large `|x|`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + ln_1p(exp(-x))
    } else {
        ln_1p(exp(x))
    }
}

/// Logistic sigmoid, the derivative of [`softplus`].
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// `ln Σ exp(xs)` with `-inf` entries contributing exactly zero mass.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut max = NEG_INF;
    for &x in xs {
        if x > max {
            max = x;
        }
    }
    if max == NEG_INF {
        return NEG_INF;
    }
    let mut sum = 0.0;
    for &x in xs {
        if x > NEG_INF {
            sum += exp(x - max);
        }
    }
    max + ln(sum)
}

#[inline]
pub fn hypot(dx: f64, dy: f64) -> f64 {
    libm::hypot(dx, dy)
}
