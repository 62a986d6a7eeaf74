//! f64 math routed through libm so the crate stays no_std and every build
//! produces bit-identical transcendentals.

pub(crate) use libm::{atan, atan2, cos, exp, fabs, log, log1p, sin, sqrt};

pub(crate) fn hypot(a: f64, b: f64) -> f64 {
    libm::hypot(a, b)
}

/// Half-up rounding to the nearest integer, used for stratified counts.
pub(crate) fn round_half_up(x: f64) -> f64 {
    libm::floor(x + 0.5)
}
