//! Float helpers that work without `std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `base^exponent` with fast paths for the exponents the solvers use most.
#[inline]
pub fn pow(base: f64, exponent: f64) -> f64 {
    if exponent == 1.0 {
        base
    } else if exponent == 2.0 {
        base * base
    } else if exponent == 0.0 {
        1.0
    } else {
        libm::pow(base, exponent)
    }
}

#[inline]
pub fn hypot(dx: f64, dy: f64) -> f64 {
    sqrt(dx * dx + dy * dy)
}
