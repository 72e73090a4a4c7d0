//! Float helpers that work without `std`.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// `+1` for `x >= 0`, `-1` otherwise.
#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Modulus of a complex number.
#[inline]
pub(crate) fn cabs(z: nalgebra::Complex<f64>) -> f64 {
    libm::hypot(z.re, z.im)
}
