//! Scalar abstraction for the numeric core.
//!
//! Everything numerical in this crate is generic over [`Real`], which is
//! implemented for `f32` and `f64`. The CLI and the type aliases at the
//! crate root use `f64`.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + for<'a> Sum<&'a Self>
    + fmt::Display
    + fmt::Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into this scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in Real")
    }

    /// Lift a `usize` (counts, lengths) into this scalar type.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in Real")
    }

    /// Lossy view as `f64` (exact for `f32` and `f64`).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real convertible to f64")
    }

    /// Natural log of the gamma function.
    fn ln_gamma(self) -> Self {
        Self::of(ln_gamma(self.as_f64()))
    }

    /// ln(2π), the normal-density normalization constant.
    fn ln_two_pi() -> Self {
        Self::of(LN_TWO_PI)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub const LN_TWO_PI: f64 = 1.837_877_066_409_345_6;

/// Lanczos coefficients, g = 7, n = 9. Relative error below 2e-10 over the
/// positive axis.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Γ(x)| for x > 0 (reflection is used below 0.5, where the
/// gamma function is still positive).
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        // Poles at non-positive integers; the priors in this crate never
        // evaluate here, so +inf is a safe sentinel.
        if x == x.floor() {
            return f64::INFINITY;
        }
        return std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().abs().ln()
            - ln_gamma(1.0 - x);
    }
    if x < 0.5 {
        return std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * LN_TWO_PI + (x + 0.5) * t.ln() - t + acc.ln()
}
