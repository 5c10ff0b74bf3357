//! Warmup adaptation: dual-averaging step-size control and diagonal mass
//! estimation from warmup draws.

use crate::real::Real;
use crate::stats::RunningVar;

/// Nesterov dual averaging targeting a fixed acceptance statistic.
/// Constants γ = 0.05, t0 = 10, κ = 0.75.
#[derive(Debug, Clone)]
pub struct DualAverage<R: Real> {
    mu: R,
    log_eps: R,
    log_eps_bar: R,
    h_bar: R,
    m: usize,
    target_accept: R,
}

impl<R: Real> DualAverage<R> {
    pub fn new(eps0: R, target_accept: R) -> Self {
        DualAverage {
            mu: (R::of(10.0) * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: eps0.ln(),
            h_bar: R::zero(),
            m: 0,
            target_accept,
        }
    }

    /// Incorporate one acceptance statistic and return the next step size.
    pub fn update(&mut self, accept_stat: R) -> R {
        let gamma = R::of(0.05);
        let t0 = R::of(10.0);
        let kappa = 0.75;
        self.m += 1;
        let m = R::of_usize(self.m);
        let w = R::one() / (m + t0);
        self.h_bar = (R::one() - w) * self.h_bar + w * (self.target_accept - accept_stat);
        self.log_eps = self.mu - m.sqrt() / gamma * self.h_bar;
        let x = R::of((self.m as f64).powf(-kappa));
        self.log_eps_bar = x * self.log_eps + (R::one() - x) * self.log_eps_bar;
        self.current()
    }

    /// Step size to use for the next transition.
    pub fn current(&self) -> R {
        self.log_eps.exp()
    }

    /// Smoothed step size to freeze after warmup.
    pub fn adapted(&self) -> R {
        self.log_eps_bar.exp()
    }

    /// Restart around a fresh step size (used after a metric update).
    pub fn restart(&mut self, eps: R) {
        *self = DualAverage::new(eps, self.target_accept);
    }
}

/// Warmup phase boundaries. Step size adapts throughout; the diagonal mass
/// is re-estimated at the end of each variance window, so the final metric
/// comes from the draws of the second half of warmup.
#[derive(Debug, Clone, Copy)]
pub struct WarmupSchedule {
    pub window1_start: usize,
    pub window2_start: usize,
    pub term_start: usize,
    pub adapt_mass: bool,
}

impl WarmupSchedule {
    pub fn new(n_warmup: usize) -> Self {
        // Too short to estimate variances: adapt the step size only.
        let adapt_mass = n_warmup >= 40;
        WarmupSchedule {
            window1_start: (n_warmup as f64 * 0.15) as usize,
            window2_start: n_warmup / 2,
            term_start: (n_warmup as f64 * 0.85) as usize,
            adapt_mass,
        }
    }
}

/// Regularized variance estimate for the inverse mass, shrunk toward 1e-3
/// the way adaptive HMC implementations conventionally do.
pub fn regularized_inv_mass<R: Real>(acc: &RunningVar<R>) -> Vec<R> {
    let n = R::of_usize(acc.count());
    let five = R::of(5.0);
    let w = n / (n + five);
    let floor = R::of(1e-10);
    acc.variances()
        .iter()
        .map(|&v| (w * v + (R::one() - w) * R::of(1e-3)).max(floor))
        .collect()
}
