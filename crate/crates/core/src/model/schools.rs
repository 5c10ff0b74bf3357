//! The eight-schools hierarchical mean model.
//!
//! Unconstrained layout: [μ, log τ, θ[0..8]] (centered) or
//! [μ, log τ, θ_std[0..8]] with θ = μ + τ·θ_std (non-centered). The data's
//! x column carries the known per-school standard errors.

use crate::data::Dataset;
use crate::real::Real;

use super::regression::{prior_term, tau_prior};
use super::PriorConfig;

pub(super) const N_SCHOOLS: usize = 8;

/// Fixture values shipped in `data/eight_schools.csv`.
const EIGHT_SCHOOLS_CSV: &str = include_str!("../../data/eight_schools.csv");

pub(super) fn dataset<R: Real>() -> Dataset<R> {
    let mut y = Vec::new();
    let mut se = Vec::new();
    let mut names = Vec::new();
    for line in EIGHT_SCHOOLS_CSV.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("school,") {
            continue;
        }
        let mut parts = line.split(',');
        names.push(parts.next().expect("school name").to_string());
        y.push(R::of(parts.next().expect("effect").parse::<f64>().expect("numeric effect")));
        se.push(R::of(parts.next().expect("stderr").parse::<f64>().expect("numeric stderr")));
    }
    assert_eq!(names.len(), N_SCHOOLS, "fixture must list {} schools", N_SCHOOLS);
    let group = (0..N_SCHOOLS).collect();
    Dataset::new(se, y, group, names, None).expect("fixture is well formed")
}

pub(super) fn lp_grad<R: Real>(
    priors: &PriorConfig<R>,
    centered: bool,
    data: &Dataset<R>,
    q: &[R],
    grad: &mut [R],
) -> R {
    let half = R::of(0.5);
    let one = R::one();
    let (mu, t) = (q[0], q[1]);
    let tau = t.exp();
    let th = &q[2..2 + N_SCHOOLS];
    grad.fill(R::zero());

    let mut lp = R::zero();
    let mut like_t = R::zero();
    for i in 0..data.n() {
        let g = data.group[i];
        let s = data.x[i];
        let theta_g = if centered { th[g] } else { mu + tau * th[g] };
        let z = (data.y[i] - theta_g) / s;
        lp += -half * R::ln_two_pi() - s.ln() - half * z * z;
        let r = z / s;
        if centered {
            grad[2 + g] += r;
        } else {
            grad[0] += r;
            grad[2 + g] += r * tau;
            like_t += r * th[g];
        }
    }

    if centered {
        // θ_j ~ N(μ, τ)
        let inv_tsq = one / (tau * tau);
        for jj in 0..N_SCHOOLS {
            let d = th[jj] - mu;
            lp += -half * R::ln_two_pi() - t - half * d * d * inv_tsq;
            grad[2 + jj] += -d * inv_tsq;
            grad[0] += d * inv_tsq;
            grad[1] += d * d * inv_tsq - one;
        }
    } else {
        // θ_std ~ N(0, 1)
        for jj in 0..N_SCHOOLS {
            lp += -half * R::ln_two_pi() - half * th[jj] * th[jj];
            grad[2 + jj] += -th[jj];
        }
        grad[1] += like_t * tau;
    }

    let (lp_mu, d_mu) = prior_term(&priors.beta0, mu);
    let (lp_tau, d_tau) = tau_prior(priors, tau, t);
    grad[0] += d_mu;
    grad[1] += d_tau;
    lp + lp_mu + lp_tau
}
