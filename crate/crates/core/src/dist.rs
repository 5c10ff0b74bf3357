//! The five distribution kinds the models and diagnostics need: densities,
//! samplers, and the generalized-Pareto quantile function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::RngStream;

/// A distribution specification. Scale and shape parameters must be positive
/// for density evaluation; sampling additionally accepts zero scales as point
/// masses (`Normal(5, 0)` draws 5, `Uniform(2, 2)` draws 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec<R: Real> {
    Normal { mean: R, sd: R },
    HalfNormal { sd: R },
    InvGamma { shape: R, scale: R },
    Uniform { lo: R, hi: R },
    GenPareto { location: R, scale: R, shape: R },
}

impl<R: Real> DistSpec<R> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DistSpec::Normal { .. } => "normal",
            DistSpec::HalfNormal { .. } => "half_normal",
            DistSpec::InvGamma { .. } => "inv_gamma",
            DistSpec::Uniform { .. } => "uniform",
            DistSpec::GenPareto { .. } => "gen_pareto",
        }
    }

    fn domain_err(&self, msg: &str) -> Error {
        Error::ParamDomain { what: "distribution", msg: format!("{}: {}", self.kind_name(), msg) }
    }

    /// Validate parameters for sampling: finite, scales non-negative
    /// (zero-width cases degenerate to point masses).
    pub fn validate_for_sampling(&self) -> Result<()> {
        let finite = |vals: &[R]| vals.iter().all(|v| v.is_finite());
        match *self {
            DistSpec::Normal { mean, sd } => {
                if !finite(&[mean, sd]) || sd < R::zero() {
                    return Err(self.domain_err("requires finite mean and sd >= 0"));
                }
            }
            DistSpec::HalfNormal { sd } => {
                if !sd.is_finite() || sd < R::zero() {
                    return Err(self.domain_err("requires sd >= 0"));
                }
            }
            DistSpec::InvGamma { shape, scale } => {
                if !finite(&[shape, scale]) || shape <= R::zero() || scale <= R::zero() {
                    return Err(self.domain_err("requires shape > 0 and scale > 0"));
                }
            }
            DistSpec::Uniform { lo, hi } => {
                if !finite(&[lo, hi]) || hi < lo {
                    return Err(self.domain_err("requires lo <= hi"));
                }
            }
            DistSpec::GenPareto { location, scale, shape } => {
                if !finite(&[location, scale, shape]) || scale <= R::zero() {
                    return Err(self.domain_err("requires scale > 0"));
                }
            }
        }
        Ok(())
    }

    /// Validate parameters for density evaluation: scales strictly positive,
    /// intervals non-degenerate.
    pub fn validate_for_density(&self) -> Result<()> {
        self.validate_for_sampling()?;
        match *self {
            DistSpec::Normal { sd, .. } | DistSpec::HalfNormal { sd } if sd == R::zero() => {
                Err(self.domain_err("density requires sd > 0"))
            }
            DistSpec::Uniform { lo, hi } if lo == hi => {
                Err(self.domain_err("density requires lo < hi"))
            }
            _ => Ok(()),
        }
    }

    /// Natural-log density at `x`; −inf outside the support.
    pub fn logpdf(&self, x: R) -> Result<R> {
        self.validate_for_density()?;
        Ok(self.logpdf_unchecked(x))
    }

    /// Density without parameter validation (callers validate once up front).
    pub fn logpdf_unchecked(&self, x: R) -> R {
        let half = R::of(0.5);
        match *self {
            DistSpec::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -half * R::ln_two_pi() - sd.ln() - half * z * z
            }
            DistSpec::HalfNormal { sd } => {
                if x < R::zero() {
                    return R::neg_infinity();
                }
                let z = x / sd;
                R::of(std::f64::consts::LN_2) - half * R::ln_two_pi() - sd.ln() - half * z * z
            }
            DistSpec::InvGamma { shape, scale } => {
                if x <= R::zero() {
                    return R::neg_infinity();
                }
                shape * scale.ln() - shape.ln_gamma() - (shape + R::one()) * x.ln() - scale / x
            }
            DistSpec::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    R::neg_infinity()
                } else {
                    -(hi - lo).ln()
                }
            }
            DistSpec::GenPareto { location, scale, shape } => {
                let z = (x - location) / scale;
                if z < R::zero() {
                    return R::neg_infinity();
                }
                if shape.abs() < R::of(1e-12) {
                    -scale.ln() - z
                } else {
                    let t = R::one() + shape * z;
                    if t <= R::zero() {
                        return R::neg_infinity();
                    }
                    -scale.ln() - (R::one() + R::one() / shape) * t.ln()
                }
            }
        }
    }

    /// d logpdf / dx inside the support. Callers never evaluate at support
    /// boundaries (scale parameters live on the log scale upstream).
    pub(crate) fn dlogpdf_dx(&self, x: R) -> R {
        match *self {
            DistSpec::Normal { mean, sd } => -(x - mean) / (sd * sd),
            DistSpec::HalfNormal { sd } => -x / (sd * sd),
            DistSpec::InvGamma { shape, scale } => -(shape + R::one()) / x + scale / (x * x),
            DistSpec::Uniform { .. } => R::zero(),
            DistSpec::GenPareto { location, scale, shape } => {
                let z = (x - location) / scale;
                if shape.abs() < R::of(1e-12) {
                    -R::one() / scale
                } else {
                    -(R::one() + R::one() / shape) * (shape / scale)
                        / (R::one() + shape * z)
                }
            }
        }
    }

    /// One draw. Half-normal draws as |normal|; inverse-gamma as the
    /// reciprocal of a gamma draw; generalized Pareto by inverse CDF.
    pub fn sample(&self, rng: &mut RngStream) -> Result<R> {
        self.validate_for_sampling()?;
        Ok(self.sample_unchecked(rng))
    }

    pub(crate) fn sample_unchecked(&self, rng: &mut RngStream) -> R {
        match *self {
            DistSpec::Normal { mean, sd } => mean + sd * rng.std_normal(),
            DistSpec::HalfNormal { sd } => (sd * rng.std_normal()).abs(),
            DistSpec::InvGamma { shape, scale } => {
                // X ~ InvGamma(a, b)  ⇔  1/X ~ Gamma(a, scale = 1/b)
                let g = rng.gamma_f64(shape.as_f64(), 1.0 / scale.as_f64());
                R::of(1.0 / g)
            }
            DistSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.unit(),
            DistSpec::GenPareto { location, scale, shape } => {
                let p: R = rng.unit();
                gpd_inv_cdf(shape, scale, location, p)
                    .expect("p in [0,1) and validated scale")
            }
        }
    }
}

/// Generalized-Pareto quantile function. Shape `k > 0` is the heavy-tail
/// direction. `location + scale·((1−p)^(−k) − 1)/k`, with the exponential
/// limit at `k = 0`.
pub fn gpd_inv_cdf<R: Real>(k: R, sigma: R, location: R, p: R) -> Result<R> {
    if !(sigma > R::zero()) {
        return Err(Error::ParamDomain {
            what: "gpd_inv_cdf",
            msg: format!("scale must be positive, got {}", sigma),
        });
    }
    if !(p >= R::zero() && p < R::one()) {
        return Err(Error::ParamDomain {
            what: "gpd_inv_cdf",
            msg: format!("p must lie in [0, 1), got {}", p),
        });
    }
    let neg_log1p = -(-p).ln_1p(); // −log(1 − p), stable near p = 0
    if k == R::zero() {
        Ok(location + sigma * neg_log1p)
    } else {
        // ((1−p)^(−k) − 1)/k = expm1(−k·log(1−p))/k
        Ok(location + sigma * (k * neg_log1p).exp_m1() / k)
    }
}
