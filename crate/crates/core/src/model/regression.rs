//! Log posterior and gradient for the regression models.
//!
//! Unconstrained layouts:
//!   pooled        [β0, β1, log σ]
//!   hierarchical  [β0, β1, log σ, log τ0, log τ1, off0[0..J], off1[0..J]]
//! where the offsets are the group effects themselves (centered) or
//! standardized ones with effect = τ·z (non-centered).

use crate::data::Dataset;
use crate::dist::DistSpec;
use crate::real::Real;

use super::PriorConfig;

/// Log density and d/dx of a prior at an unbounded coordinate.
pub(super) fn prior_term<R: Real>(dist: &DistSpec<R>, x: R) -> (R, R) {
    (dist.logpdf_unchecked(x), dist.dlogpdf_dx(x))
}

/// Prior on a positive parameter v stored as u = log v, density on v.
/// Includes the log-Jacobian u; returns (lp, dlp/du).
pub(super) fn scale_prior_sd<R: Real>(dist: &DistSpec<R>, v: R, u: R) -> (R, R) {
    (dist.logpdf_unchecked(v) + u, dist.dlogpdf_dx(v) * v + R::one())
}

/// Prior placed on the variance w = v² of a positive parameter stored as
/// u = log v. Log-Jacobian is log 2 + 2u; returns (lp, dlp/du).
pub(super) fn scale_prior_var<R: Real>(dist: &DistSpec<R>, v: R, u: R) -> (R, R) {
    let two = R::of(2.0);
    let w = v * v;
    (
        dist.logpdf_unchecked(w) + R::of(std::f64::consts::LN_2) + two * u,
        dist.dlogpdf_dx(w) * two * w + two,
    )
}

pub(super) fn tau_prior<R: Real>(priors: &PriorConfig<R>, v: R, u: R) -> (R, R) {
    if priors.tau_on_variance() {
        scale_prior_var(&priors.tau, v, u)
    } else {
        scale_prior_sd(&priors.tau, v, u)
    }
}

pub(super) fn lp_grad_pooled<R: Real>(
    priors: &PriorConfig<R>,
    data: &Dataset<R>,
    q: &[R],
    grad: &mut [R],
) -> R {
    let half = R::of(0.5);
    let one = R::one();
    let (b0, b1, u) = (q[0], q[1], q[2]);
    let sigma = u.exp();
    let inv_s = one / sigma;
    grad.fill(R::zero());

    let mut lp = R::zero();
    for i in 0..data.n() {
        let z = (data.y[i] - b0 - b1 * data.x[i]) * inv_s;
        lp += -half * R::ln_two_pi() - u - half * z * z;
        let zs = z * inv_s;
        grad[0] += zs;
        grad[1] += zs * data.x[i];
        grad[2] += z * z - one;
    }

    let (lp0, d0) = prior_term(&priors.beta0, b0);
    let (lp1, d1) = prior_term(&priors.beta1, b1);
    let (lps, ds) = scale_prior_sd(&priors.sigma, sigma, u);
    grad[0] += d0;
    grad[1] += d1;
    grad[2] += ds;
    lp + lp0 + lp1 + lps
}

pub(super) fn lp_grad_hier<R: Real>(
    priors: &PriorConfig<R>,
    centered: bool,
    data: &Dataset<R>,
    q: &[R],
    grad: &mut [R],
) -> R {
    let half = R::of(0.5);
    let one = R::one();
    let j = data.n_groups();
    let (b0, b1, u, t0, t1) = (q[0], q[1], q[2], q[3], q[4]);
    let sigma = u.exp();
    let tau0 = t0.exp();
    let tau1 = t1.exp();
    let inv_s = one / sigma;
    let off0 = &q[5..5 + j];
    let off1 = &q[5 + j..5 + 2 * j];
    grad.fill(R::zero());

    let mut lp = R::zero();
    // τ-gradient pieces that flow through the likelihood mean (non-centered)
    let mut like_t0 = R::zero();
    let mut like_t1 = R::zero();
    for i in 0..data.n() {
        let g = data.group[i];
        let (a, b) = if centered {
            (off0[g], off1[g])
        } else {
            (tau0 * off0[g], tau1 * off1[g])
        };
        let x = data.x[i];
        let z = (data.y[i] - b0 - a - (b1 + b) * x) * inv_s;
        lp += -half * R::ln_two_pi() - u - half * z * z;
        let zs = z * inv_s;
        grad[0] += zs;
        grad[1] += zs * x;
        grad[2] += z * z - one;
        if centered {
            grad[5 + g] += zs;
            grad[5 + j + g] += zs * x;
        } else {
            grad[5 + g] += zs * tau0;
            grad[5 + j + g] += zs * x * tau1;
            like_t0 += zs * off0[g];
            like_t1 += zs * x * off1[g];
        }
    }

    if centered {
        // group effects ~ N(0, τ_k)
        let inv_t0sq = one / (tau0 * tau0);
        let inv_t1sq = one / (tau1 * tau1);
        for jj in 0..j {
            let a = off0[jj];
            lp += -half * R::ln_two_pi() - t0 - half * a * a * inv_t0sq;
            grad[5 + jj] += -a * inv_t0sq;
            grad[3] += a * a * inv_t0sq - one;
            let b = off1[jj];
            lp += -half * R::ln_two_pi() - t1 - half * b * b * inv_t1sq;
            grad[5 + j + jj] += -b * inv_t1sq;
            grad[4] += b * b * inv_t1sq - one;
        }
    } else {
        // standardized effects ~ N(0, 1); τ touches the likelihood only
        for jj in 0..j {
            lp += -half * R::ln_two_pi() - half * off0[jj] * off0[jj];
            grad[5 + jj] += -off0[jj];
            lp += -half * R::ln_two_pi() - half * off1[jj] * off1[jj];
            grad[5 + j + jj] += -off1[jj];
        }
        grad[3] += like_t0 * tau0;
        grad[4] += like_t1 * tau1;
    }

    let (lp0, d0) = prior_term(&priors.beta0, b0);
    let (lp1, d1) = prior_term(&priors.beta1, b1);
    let (lps, ds) = scale_prior_sd(&priors.sigma, sigma, u);
    let (lpt0, dt0) = tau_prior(priors, tau0, t0);
    let (lpt1, dt1) = tau_prior(priors, tau1, t1);
    grad[0] += d0;
    grad[1] += d1;
    grad[2] += ds;
    grad[3] += dt0;
    grad[4] += dt1;
    lp + lp0 + lp1 + lps + lpt0 + lpt1
}
