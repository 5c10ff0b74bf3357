//! Hamiltonian Monte Carlo with step-size/mass adaptation, divergence
//! detection, multi-chain execution, and the split-R-hat convergence summary.
//!
//! Trajectories are static-length with jittered step counts (uniform on
//! [1, L_max] with eps·L_max ≈ 2π in the mass-standardized space) and a
//! Metropolis accept/reject on the endpoint. A transition is flagged
//! divergent when the Hamiltonian error along the trajectory exceeds the
//! configured threshold; divergent proposals are rejected, so the recorded
//! draw is the trajectory's starting point.

pub mod adapt;
pub mod draws;
pub mod targets;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{BoundModel, ModelSpec};
use crate::real::Real;
use crate::rng::RngStream;
use crate::stats::{self, RunningVar};

use adapt::{regularized_inv_mass, DualAverage, WarmupSchedule};
pub use draws::Draws;

/// A differentiable unnormalized log density the sampler can explore.
/// Implementations may return non-finite values; the sampler folds those
/// into its divergence handling instead of erroring.
pub trait Target<R: Real>: Sync {
    fn dim(&self) -> usize;
    /// Log density at `position`, writing the gradient into `grad`.
    fn logp_grad(&self, position: &[R], grad: &mut [R]) -> R;
    fn name(&self) -> String;
    fn constrained_names(&self) -> Vec<String>;
    /// Map an unconstrained position to the constrained values recorded in
    /// [`Draws`] (may be longer than `dim` for derived quantities).
    fn constrain_into(&self, position: &[R], out: &mut Vec<R>);
}

impl<'d, R: Real> Target<R> for BoundModel<'d, R> {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn logp_grad(&self, position: &[R], grad: &mut [R]) -> R {
        self.logp_grad_raw(position, grad)
    }

    fn name(&self) -> String {
        self.spec.kind.name().to_string()
    }

    fn constrained_names(&self) -> Vec<String> {
        self.spec.constrained_names(self.n_groups())
    }

    fn constrain_into(&self, position: &[R], out: &mut Vec<R>) {
        self.spec.constrain_values(self.n_groups(), position, out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig<R: Real> {
    pub n_chains: usize,
    pub n_warmup: usize,
    pub n_keep: usize,
    pub target_accept: R,
    pub max_leapfrog: usize,
    /// Energy-error threshold that flags a divergence, in Hamiltonian units.
    pub divergence_threshold: R,
    pub seed: u64,
}

impl<R: Real> Default for SamplerConfig<R> {
    fn default() -> Self {
        SamplerConfig {
            n_chains: 4,
            n_warmup: 1000,
            n_keep: 1000,
            target_accept: R::of(0.8),
            max_leapfrog: 1024,
            divergence_threshold: R::of(1000.0),
            seed: 0,
        }
    }
}

impl<R: Real> SamplerConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if self.n_chains < 1 {
            return Err(Error::invalid("n_chains must be at least 1"));
        }
        if self.n_keep < 1 {
            return Err(Error::invalid("n_keep must be at least 1"));
        }
        if !(self.target_accept > R::zero() && self.target_accept < R::one()) {
            return Err(Error::invalid("target_accept must lie strictly in (0, 1)"));
        }
        if !(self.divergence_threshold > R::zero()) {
            return Err(Error::invalid("divergence_threshold must be positive"));
        }
        if self.max_leapfrog < 1 {
            return Err(Error::invalid("max_leapfrog must be at least 1"));
        }
        Ok(())
    }
}

/// Position, momentum, and the cached density/gradient at the position.
#[derive(Debug, Clone)]
pub struct PhasePoint<R: Real> {
    pub q: Vec<R>,
    pub p: Vec<R>,
    pub logp: R,
    pub grad: Vec<R>,
}

impl<R: Real> PhasePoint<R> {
    pub fn new(q: Vec<R>, p: Vec<R>, grad_fn: &mut impl FnMut(&[R], &mut [R]) -> R) -> Self {
        let mut grad = vec![R::zero(); q.len()];
        let logp = grad_fn(&q, &mut grad);
        PhasePoint { q, p, logp, grad }
    }

    pub fn hamiltonian(&self, inv_mass: &[R]) -> R {
        -self.logp + kinetic(&self.p, inv_mass)
    }
}

/// Kinetic energy ½ pᵀ M⁻¹ p for a diagonal inverse mass.
pub fn kinetic<R: Real>(p: &[R], inv_mass: &[R]) -> R {
    R::of(0.5) * p.iter().zip(inv_mass).map(|(&pi, &mi)| mi * pi * pi).sum::<R>()
}

/// One leapfrog step (half-kick, drift with inverse-mass scaling, half-kick)
/// on `state`, whose gradient cache must be current. Returns the number of
/// gradient evaluations used (always 1).
pub fn leapfrog<R: Real>(
    grad_fn: &mut impl FnMut(&[R], &mut [R]) -> R,
    state: &mut PhasePoint<R>,
    eps: R,
    inv_mass: &[R],
) -> usize {
    let half = R::of(0.5);
    for (pi, &gi) in state.p.iter_mut().zip(&state.grad) {
        *pi += half * eps * gi;
    }
    for ((qi, &pi), &mi) in state.q.iter_mut().zip(&state.p).zip(inv_mass) {
        *qi += eps * mi * pi;
    }
    state.logp = grad_fn(&state.q, &mut state.grad);
    for (pi, &gi) in state.p.iter_mut().zip(&state.grad) {
        *pi += half * eps * gi;
    }
    1
}

/// Leapfrog driven by a [`Target`].
pub fn leapfrog_target<R: Real, T: Target<R>>(
    target: &T,
    state: &mut PhasePoint<R>,
    eps: R,
    inv_mass: &[R],
) -> usize {
    leapfrog(&mut |q: &[R], g: &mut [R]| target.logp_grad(q, g), state, eps, inv_mass)
}

/// Everything a transition reports besides the new position.
#[derive(Debug, Clone)]
pub struct Transition<R: Real> {
    pub divergent: bool,
    /// Hamiltonian of the recorded (accepted or retained) state.
    pub energy: R,
    /// min(1, exp(H0 − H1)); 0 for divergent trajectories.
    pub accept_stat: R,
    pub n_leapfrog: usize,
    /// Momentum paired with the recorded state (diagnostic only).
    pub momentum: Vec<R>,
}

/// Position with cached density and gradient; the chain state between
/// transitions.
#[derive(Debug, Clone)]
pub struct Position<R: Real> {
    pub q: Vec<R>,
    pub logp: R,
    pub grad: Vec<R>,
}

impl<R: Real> Position<R> {
    pub fn new<T: Target<R>>(target: &T, q: Vec<R>) -> Self {
        let mut grad = vec![R::zero(); q.len()];
        let logp = target.logp_grad(&q, &mut grad);
        Position { q, logp, grad }
    }
}

/// One HMC transition: momentum refresh, `n_steps` leapfrog steps with
/// early termination on divergence, Metropolis acceptance on the endpoint.
pub fn hmc_transition<R: Real, T: Target<R>>(
    target: &T,
    state: &mut Position<R>,
    eps: R,
    inv_mass: &[R],
    n_steps: usize,
    divergence_threshold: R,
    rng: &mut RngStream,
) -> Transition<R> {
    let p0: Vec<R> = inv_mass.iter().map(|&mi| rng.std_normal::<R>() / mi.sqrt()).collect();
    let h0 = -state.logp + kinetic(&p0, inv_mass);

    let mut traj = PhasePoint {
        q: state.q.clone(),
        p: p0.clone(),
        logp: state.logp,
        grad: state.grad.clone(),
    };
    let mut divergent = false;
    let mut n_leapfrog = 0;
    let mut h_end = h0;
    for _ in 0..n_steps {
        n_leapfrog += leapfrog_target(target, &mut traj, eps, inv_mass);
        h_end = traj.hamiltonian(inv_mass);
        // NaN comparisons are false, so a NaN Hamiltonian is not flagged
        // here; the Metropolis step below still rejects it.
        if (h_end - h0).abs() > divergence_threshold {
            divergent = true;
            break;
        }
    }

    let accept_stat = if divergent {
        R::zero()
    } else {
        let a = (h0 - h_end).exp();
        if a.is_nan() {
            R::zero()
        } else {
            a.min(R::one())
        }
    };

    let accepted = !divergent && rng.unit::<R>() < accept_stat;
    if accepted {
        state.q = traj.q;
        state.logp = traj.logp;
        state.grad = traj.grad;
        Transition { divergent, energy: h_end, accept_stat, n_leapfrog, momentum: traj.p }
    } else {
        Transition { divergent, energy: h0, accept_stat, n_leapfrog, momentum: p0 }
    }
}

/// Trajectory length cap so that eps·L_max ≈ 2π in standardized space.
fn max_steps<R: Real>(eps: R, cap: usize) -> usize {
    let l = (std::f64::consts::TAU / eps.as_f64()).ceil();
    if !l.is_finite() || l < 1.0 {
        1
    } else {
        (l as usize).clamp(1, cap)
    }
}

/// Crude step-size search: double or halve until the one-step acceptance
/// crosses 1/2.
fn find_initial_eps<R: Real, T: Target<R>>(
    target: &T,
    state: &Position<R>,
    inv_mass: &[R],
    rng: &mut RngStream,
) -> R {
    let half = R::of(0.5);
    let mut eps = R::one();
    let p0: Vec<R> = inv_mass.iter().map(|&mi| rng.std_normal::<R>() / mi.sqrt()).collect();
    let h0 = -state.logp + kinetic(&p0, inv_mass);

    let one_step_alpha = |eps: R| -> R {
        let mut traj = PhasePoint {
            q: state.q.clone(),
            p: p0.clone(),
            logp: state.logp,
            grad: state.grad.clone(),
        };
        leapfrog_target(target, &mut traj, eps, inv_mass);
        let h1 = traj.hamiltonian(inv_mass);
        let a = (h0 - h1).exp();
        if a.is_nan() {
            R::zero()
        } else {
            a
        }
    };

    let grow = one_step_alpha(eps) > half;
    for _ in 0..100 {
        let alpha = one_step_alpha(eps);
        if grow {
            if alpha <= half || eps > R::of(1e7) {
                break;
            }
            eps = eps * R::of(2.0);
        } else {
            if alpha > half || eps < R::of(1e-10) {
                break;
            }
            eps = eps * half;
        }
    }
    eps
}

struct ChainOutput<R: Real> {
    rows: Vec<R>,
    divergent: Vec<bool>,
    energy: Vec<R>,
    accept_stat: Vec<R>,
}

fn run_one_chain<R: Real, T: Target<R>>(
    target: &T,
    config: &SamplerConfig<R>,
    chain_id: u64,
) -> Result<ChainOutput<R>> {
    let dim = target.dim();
    let mut rng = RngStream::new(config.seed, chain_id);

    // Initial point: uniform in (−2, 2) on the unconstrained scale, retried
    // until the density is finite.
    let mut state = None;
    for _ in 0..100 {
        let q: Vec<R> = (0..dim).map(|_| R::of(4.0 * rng.unit_f64() - 2.0)).collect();
        let pos = Position::new(target, q);
        if pos.logp.is_finite() && pos.grad.iter().all(|g| g.is_finite()) {
            state = Some(pos);
            break;
        }
    }
    let mut state = state.ok_or_else(|| {
        Error::invalid(format!("could not find a finite initial point for {}", target.name()))
    })?;

    let mut inv_mass = vec![R::one(); dim];
    let mut eps = find_initial_eps(target, &state, &inv_mass, &mut rng);
    let mut da = DualAverage::new(eps, config.target_accept);
    let schedule = WarmupSchedule::new(config.n_warmup);
    let mut acc = RunningVar::new(dim);

    let mut warmup_divergences = 0usize;
    for m in 0..config.n_warmup {
        let n_steps = 1 + rng.below(max_steps(eps, config.max_leapfrog) as u64) as usize;
        let t = hmc_transition(
            target,
            &mut state,
            eps,
            &inv_mass,
            n_steps,
            config.divergence_threshold,
            &mut rng,
        );
        if t.divergent {
            warmup_divergences += 1;
        }
        eps = da.update(t.accept_stat);
        if schedule.adapt_mass {
            if m >= schedule.window1_start && m < schedule.term_start {
                acc.push(&state.q);
            }
            if (m + 1 == schedule.window2_start || m + 1 == schedule.term_start) && acc.count() >= 10
            {
                inv_mass = regularized_inv_mass(&acc);
                acc = RunningVar::new(dim);
                eps = find_initial_eps(target, &state, &inv_mass, &mut rng);
                da.restart(eps);
            }
        }
    }
    if config.n_warmup > 0 && warmup_divergences == config.n_warmup {
        return Err(Error::AllDivergent {
            target: target.name(),
            step_size: da.adapted().as_f64(),
        });
    }
    if config.n_warmup > 0 {
        eps = da.adapted();
    }

    let mut out = ChainOutput {
        rows: Vec::new(),
        divergent: Vec::with_capacity(config.n_keep),
        energy: Vec::with_capacity(config.n_keep),
        accept_stat: Vec::with_capacity(config.n_keep),
    };
    let mut constrained = Vec::new();
    for _ in 0..config.n_keep {
        let n_steps = 1 + rng.below(max_steps(eps, config.max_leapfrog) as u64) as usize;
        let t = hmc_transition(
            target,
            &mut state,
            eps,
            &inv_mass,
            n_steps,
            config.divergence_threshold,
            &mut rng,
        );
        target.constrain_into(&state.q, &mut constrained);
        out.rows.extend_from_slice(&constrained);
        out.divergent.push(t.divergent);
        out.energy.push(t.energy);
        out.accept_stat.push(t.accept_stat);
    }
    Ok(out)
}

/// Run `config.n_chains` independent chains on an arbitrary target, merging
/// kept draws in chain order. Chains derive their RNG streams from the seed,
/// so results are reproducible and independent of thread scheduling.
pub fn run_target<R: Real, T: Target<R>>(target: &T, config: &SamplerConfig<R>) -> Result<Draws<R>> {
    config.validate()?;
    let names = target.constrained_names();
    let outputs: Vec<Result<ChainOutput<R>>> = (0..config.n_chains)
        .into_par_iter()
        .map(|c| run_one_chain(target, config, c as u64))
        .collect();

    let p = names.len();
    let s_total = config.n_chains * config.n_keep;
    let mut flat = Vec::with_capacity(s_total * p);
    let mut chain = Vec::with_capacity(s_total);
    let mut iteration = Vec::with_capacity(s_total);
    let mut divergent = Vec::with_capacity(s_total);
    let mut energy = Vec::with_capacity(s_total);
    let mut accept_stat = Vec::with_capacity(s_total);
    for (c, out) in outputs.into_iter().enumerate() {
        let out = out?;
        flat.extend_from_slice(&out.rows);
        chain.extend(std::iter::repeat(c as u32).take(config.n_keep));
        iteration.extend(0..config.n_keep as u32);
        divergent.extend_from_slice(&out.divergent);
        energy.extend_from_slice(&out.energy);
        accept_stat.extend_from_slice(&out.accept_stat);
    }
    let params = Array2::from_shape_vec((s_total, p), flat)
        .map_err(|e| Error::invalid(format!("draw matrix shape: {e}")));
    Draws::new(names, params?, chain, iteration, divergent, energy, accept_stat)
}

/// Fit a model to data: the main sampling entry point.
pub fn run_chains<R: Real>(
    model: &ModelSpec<R>,
    data: &Dataset<R>,
    config: &SamplerConfig<R>,
) -> Result<Draws<R>> {
    let bound = BoundModel::new(model.clone(), data)?;
    run_target(&bound, config)
}

/// Split-R-hat for one parameter: each chain is halved and the
/// between/within variance ratio √((W·(N−1)/N + B/N)/W) is computed over
/// the 2·n_chains half-chains. Returns NaN when a half-chain variance is
/// zero (constant draws carry no convergence information).
pub fn split_rhat<R: Real>(draws: &Draws<R>, param: &str) -> Result<R> {
    let col = draws.col_index(param)?;
    let n_chains = draws.n_chains();
    let mut halves: Vec<Vec<R>> = Vec::with_capacity(2 * n_chains);
    for c in 0..n_chains {
        let series = draws.chain_column(c as u32, col);
        if series.len() < 4 {
            return Err(Error::invalid(format!(
                "split_rhat needs at least 4 draws per chain, got {}",
                series.len()
            )));
        }
        let half = series.len() / 2;
        // when the chain length is odd the middle draw is dropped
        halves.push(series[..half].to_vec());
        halves.push(series[series.len() - half..].to_vec());
    }
    let n = halves.iter().map(|h| h.len()).min().unwrap();
    let nf = R::of_usize(n);
    let means: Vec<R> = halves.iter().map(|h| stats::mean(&h[..n])).collect();
    let vars: Vec<R> = halves.iter().map(|h| stats::sample_var(&h[..n])).collect();
    let w = stats::mean(&vars);
    if w == R::zero() {
        return Ok(R::nan());
    }
    let b = nf * stats::sample_var(&means);
    Ok(((w * (nf - R::one()) / nf + b / nf) / w).sqrt())
}

/// Split-R-hat for every parameter column.
pub fn split_rhat_all<R: Real>(draws: &Draws<R>) -> Result<Vec<(String, R)>> {
    draws
        .names
        .iter()
        .map(|n| split_rhat(draws, n).map(|r| (n.clone(), r)))
        .collect()
}
