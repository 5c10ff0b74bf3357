//! The model family: pooled log-log regression, two multilevel regressions
//! (grouped by WHO super-region or by clustered super-region), and the
//! eight-schools problem in centered and non-centered parameterizations.
//!
//! Scale parameters live on the log scale in unconstrained space; the log
//! posterior includes the corresponding change-of-variable terms, and every
//! model exposes an exact analytic gradient.

mod regression;
mod schools;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::dist::DistSpec;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::RngStream;
use crate::sampler::draws::Draws;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// One regression line for all observations.
    Pooled,
    /// Varying intercepts/slopes by WHO super-region.
    HierWho,
    /// Varying intercepts/slopes by clustered super-region.
    HierCluster,
    EightSchoolsCentered,
    EightSchoolsNonCentered,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Pooled => "pooled",
            ModelKind::HierWho => "hier-who",
            ModelKind::HierCluster => "hier-cluster",
            ModelKind::EightSchoolsCentered => "8schools-c",
            ModelKind::EightSchoolsNonCentered => "8schools-nc",
        }
    }

    pub fn is_hier_regression(&self) -> bool {
        matches!(self, ModelKind::HierWho | ModelKind::HierCluster)
    }

    pub fn is_schools(&self) -> bool {
        matches!(self, ModelKind::EightSchoolsCentered | ModelKind::EightSchoolsNonCentered)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    Centered,
    NonCentered,
}

/// Priors for the regression family. `tau` is shared by both group-scale
/// parameters and is read on the variance scale when it is an inverse gamma
/// (the vague preset) and on the sd scale otherwise. The school models read
/// `beta0` as the prior for μ and `tau` as the prior for τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig<R: Real> {
    pub beta0: DistSpec<R>,
    pub beta1: DistSpec<R>,
    pub tau: DistSpec<R>,
    pub sigma: DistSpec<R>,
}

impl<R: Real> PriorConfig<R> {
    /// β_k ~ N(0, 100), τ_k² ~ Inv-Gamma(1, 100), σ ~ N+(0, 1).
    pub fn vague() -> Self {
        PriorConfig {
            beta0: DistSpec::Normal { mean: R::zero(), sd: R::of(100.0) },
            beta1: DistSpec::Normal { mean: R::zero(), sd: R::of(100.0) },
            tau: DistSpec::InvGamma { shape: R::one(), scale: R::of(100.0) },
            sigma: DistSpec::HalfNormal { sd: R::one() },
        }
    }

    /// β0 ~ N(0, 1), β1 ~ N(1, 1), τ_k ~ N+(0, 1), σ ~ N+(0, 1).
    pub fn weak() -> Self {
        PriorConfig {
            beta0: DistSpec::Normal { mean: R::zero(), sd: R::one() },
            beta1: DistSpec::Normal { mean: R::one(), sd: R::one() },
            tau: DistSpec::HalfNormal { sd: R::one() },
            sigma: DistSpec::HalfNormal { sd: R::one() },
        }
    }

    /// Default priors for the school models: μ ~ N(0, 5), τ ~ N+(0, 5).
    /// `beta1` and `sigma` are unused by those models.
    pub fn schools() -> Self {
        PriorConfig {
            beta0: DistSpec::Normal { mean: R::zero(), sd: R::of(5.0) },
            beta1: DistSpec::Normal { mean: R::zero(), sd: R::one() },
            tau: DistSpec::HalfNormal { sd: R::of(5.0) },
            sigma: DistSpec::HalfNormal { sd: R::one() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for d in [&self.beta0, &self.beta1, &self.tau, &self.sigma] {
            d.validate_for_density()?;
        }
        Ok(())
    }

    /// Whether the tau prior is read on the variance scale.
    pub fn tau_on_variance(&self) -> bool {
        matches!(self.tau, DistSpec::InvGamma { .. })
    }

    /// Draw a group-scale value τ from the prior, honoring the variance-scale
    /// reading for inverse-gamma configurations.
    pub fn sample_tau(&self, rng: &mut RngStream) -> Result<R> {
        let v = self.tau.sample(rng)?;
        if self.tau_on_variance() {
            Ok(v.sqrt())
        } else {
            Ok(v)
        }
    }
}

/// One model/parameterization variant plus its prior configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<R: Real> {
    pub kind: ModelKind,
    pub priors: PriorConfig<R>,
    /// Only meaningful for the hierarchical regressions; the school variants
    /// carry their parameterization in the kind.
    pub parameterization: Parameterization,
}

impl<R: Real> ModelSpec<R> {
    /// Hierarchical regressions default to the non-centered parameterization;
    /// the centered one is retained to reproduce funnel pathologies on demand.
    pub fn new(kind: ModelKind, priors: PriorConfig<R>) -> Self {
        ModelSpec { kind, priors, parameterization: Parameterization::NonCentered }
    }

    pub fn with_parameterization(mut self, parameterization: Parameterization) -> Self {
        self.parameterization = parameterization;
        self
    }

    /// Parameterization actually in effect for this kind.
    pub fn effective_parameterization(&self) -> Parameterization {
        match self.kind {
            ModelKind::Pooled => Parameterization::Centered,
            ModelKind::EightSchoolsCentered => Parameterization::Centered,
            ModelKind::EightSchoolsNonCentered => Parameterization::NonCentered,
            _ => self.parameterization,
        }
    }

    fn centered(&self) -> bool {
        self.effective_parameterization() == Parameterization::Centered
    }

    /// Unconstrained dimension: pooled 3; hierarchical 5 + 2·J; schools 10.
    pub fn dim(&self, n_groups: usize) -> usize {
        match self.kind {
            ModelKind::Pooled => 3,
            ModelKind::HierWho | ModelKind::HierCluster => 5 + 2 * n_groups,
            _ => 10,
        }
    }

    pub fn unconstrained_names(&self, n_groups: usize) -> Vec<String> {
        match self.kind {
            ModelKind::Pooled => {
                vec!["beta0".into(), "beta1".into(), "log_sigma".into()]
            }
            ModelKind::HierWho | ModelKind::HierCluster => {
                let mut names = vec![
                    "beta0".into(),
                    "beta1".into(),
                    "log_sigma".into(),
                    "log_tau0".into(),
                    "log_tau1".into(),
                ];
                let off = if self.centered() { "off" } else { "off_std" };
                names.extend((0..n_groups).map(|j| format!("beta0_{off}[{j}]")));
                names.extend((0..n_groups).map(|j| format!("beta1_{off}[{j}]")));
                names
            }
            ModelKind::EightSchoolsCentered => {
                let mut names = vec!["mu".into(), "log_tau".into()];
                names.extend((0..schools::N_SCHOOLS).map(|j| format!("theta[{j}]")));
                names
            }
            ModelKind::EightSchoolsNonCentered => {
                let mut names = vec!["mu".into(), "log_tau".into()];
                names.extend((0..schools::N_SCHOOLS).map(|j| format!("theta_std[{j}]")));
                names
            }
        }
    }

    /// Constrained-space names. Non-centered variants also report the derived
    /// centered quantities, so these may be longer than `dim`.
    pub fn constrained_names(&self, n_groups: usize) -> Vec<String> {
        match self.kind {
            ModelKind::Pooled => vec!["beta0".into(), "beta1".into(), "sigma".into()],
            ModelKind::HierWho | ModelKind::HierCluster => {
                let mut names = vec![
                    "beta0".into(),
                    "beta1".into(),
                    "sigma".into(),
                    "tau0".into(),
                    "tau1".into(),
                ];
                if !self.centered() {
                    names.extend((0..n_groups).map(|j| format!("beta0_off_std[{j}]")));
                    names.extend((0..n_groups).map(|j| format!("beta1_off_std[{j}]")));
                }
                names.extend((0..n_groups).map(|j| format!("beta0_off[{j}]")));
                names.extend((0..n_groups).map(|j| format!("beta1_off[{j}]")));
                names
            }
            ModelKind::EightSchoolsCentered => {
                let mut names = vec!["mu".into(), "tau".into()];
                names.extend((0..schools::N_SCHOOLS).map(|j| format!("theta[{j}]")));
                names
            }
            ModelKind::EightSchoolsNonCentered => {
                let mut names = vec!["mu".into(), "tau".into()];
                names.extend((0..schools::N_SCHOOLS).map(|j| format!("theta_std[{j}]")));
                names.extend((0..schools::N_SCHOOLS).map(|j| format!("theta[{j}]")));
                names
            }
        }
    }

    /// Map an unconstrained vector to constrained values aligned with
    /// [`constrained_names`]. Assumes the length was validated.
    pub fn constrain_values(&self, n_groups: usize, theta: &[R], out: &mut Vec<R>) {
        out.clear();
        match self.kind {
            ModelKind::Pooled => {
                out.extend_from_slice(&[theta[0], theta[1], theta[2].exp()]);
            }
            ModelKind::HierWho | ModelKind::HierCluster => {
                let j = n_groups;
                let (tau0, tau1) = (theta[3].exp(), theta[4].exp());
                out.extend_from_slice(&[theta[0], theta[1], theta[2].exp(), tau0, tau1]);
                if self.centered() {
                    out.extend_from_slice(&theta[5..5 + 2 * j]);
                } else {
                    out.extend_from_slice(&theta[5..5 + 2 * j]);
                    out.extend(theta[5..5 + j].iter().map(|&z| tau0 * z));
                    out.extend(theta[5 + j..5 + 2 * j].iter().map(|&z| tau1 * z));
                }
            }
            ModelKind::EightSchoolsCentered => {
                out.push(theta[0]);
                out.push(theta[1].exp());
                out.extend_from_slice(&theta[2..]);
            }
            ModelKind::EightSchoolsNonCentered => {
                let (mu, tau) = (theta[0], theta[1].exp());
                out.push(mu);
                out.push(tau);
                out.extend_from_slice(&theta[2..]);
                out.extend(theta[2..].iter().map(|&z| mu + tau * z));
            }
        }
    }

    /// Constrained values with their names.
    pub fn constrain(&self, n_groups: usize, theta: &[R]) -> Result<Vec<(String, R)>> {
        let dim = self.dim(n_groups);
        if theta.len() != dim {
            return Err(Error::DimMismatch { what: "parameter vector", expected: dim, got: theta.len() });
        }
        let mut values = Vec::new();
        self.constrain_values(n_groups, theta, &mut values);
        Ok(self.constrained_names(n_groups).into_iter().zip(values).collect())
    }

    /// Inverse of [`constrain`]: recover the unconstrained vector from values
    /// aligned with [`constrained_names`]. Derived columns of non-centered
    /// variants are ignored in favor of the standardized ones.
    pub fn unconstrain(&self, n_groups: usize, constrained: &[R]) -> Result<Vec<R>> {
        let expected = self.constrained_names(n_groups).len();
        if constrained.len() != expected {
            return Err(Error::DimMismatch { what: "constrained vector", expected, got: constrained.len() });
        }
        let c = constrained;
        let out = match self.kind {
            ModelKind::Pooled => vec![c[0], c[1], c[2].ln()],
            ModelKind::HierWho | ModelKind::HierCluster => {
                let j = n_groups;
                let mut v = vec![c[0], c[1], c[2].ln(), c[3].ln(), c[4].ln()];
                v.extend_from_slice(&c[5..5 + 2 * j]);
                v
            }
            ModelKind::EightSchoolsCentered | ModelKind::EightSchoolsNonCentered => {
                let mut v = vec![c[0], c[1].ln()];
                v.extend_from_slice(&c[2..2 + schools::N_SCHOOLS]);
                v
            }
        };
        Ok(out)
    }
}

/// An unconstrained parameter vector with its coordinate names.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector<R: Real> {
    pub unconstrained: Vec<R>,
    pub names: Vec<String>,
}

impl<R: Real> ParamVector<R> {
    pub fn new(model: &ModelSpec<R>, n_groups: usize, unconstrained: Vec<R>) -> Result<Self> {
        let dim = model.dim(n_groups);
        if unconstrained.len() != dim {
            return Err(Error::DimMismatch { what: "parameter vector", expected: dim, got: unconstrained.len() });
        }
        Ok(ParamVector { unconstrained, names: model.unconstrained_names(n_groups) })
    }
}

/// A model bound to a dataset: the evaluation unit the sampler works on.
#[derive(Debug, Clone)]
pub struct BoundModel<'d, R: Real> {
    pub spec: ModelSpec<R>,
    pub data: &'d Dataset<R>,
    dim: usize,
}

impl<'d, R: Real> BoundModel<'d, R> {
    pub fn new(spec: ModelSpec<R>, data: &'d Dataset<R>) -> Result<Self> {
        spec.priors.validate()?;
        if spec.kind.is_schools() {
            if data.n_groups() != schools::N_SCHOOLS {
                return Err(Error::invalid(format!(
                    "the school models need exactly {} groups, got {}",
                    schools::N_SCHOOLS,
                    data.n_groups()
                )));
            }
            if let Some(i) = data.x.iter().position(|&s| s <= R::zero()) {
                return Err(Error::invalid(format!(
                    "school standard errors (x column) must be positive; row {i} is not"
                )));
            }
        } else if data.n_groups() == 0 {
            return Err(Error::invalid("dataset declares zero groups"));
        }
        let dim = spec.dim(data.n_groups());
        Ok(BoundModel { spec, data, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_groups(&self) -> usize {
        self.data.n_groups()
    }

    /// Unnormalized log posterior and gradient on the unconstrained scale.
    /// No input checks; non-finite results propagate to the caller (the
    /// sampler treats them as divergent states).
    pub fn logp_grad_raw(&self, q: &[R], grad: &mut [R]) -> R {
        debug_assert_eq!(q.len(), self.dim);
        debug_assert_eq!(grad.len(), self.dim);
        let centered = self.spec.centered();
        match self.spec.kind {
            ModelKind::Pooled => regression::lp_grad_pooled(&self.spec.priors, self.data, q, grad),
            ModelKind::HierWho | ModelKind::HierCluster => {
                regression::lp_grad_hier(&self.spec.priors, centered, self.data, q, grad)
            }
            ModelKind::EightSchoolsCentered | ModelKind::EightSchoolsNonCentered => {
                schools::lp_grad(&self.spec.priors, centered, self.data, q, grad)
            }
        }
    }

    /// Checked variant: validates dimension and input finiteness.
    pub fn log_posterior_grad(&self, theta: &[R]) -> Result<(R, Vec<R>)> {
        if theta.len() != self.dim {
            return Err(Error::DimMismatch { what: "parameter vector", expected: self.dim, got: theta.len() });
        }
        if let Some(i) = theta.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                name: self.spec.unconstrained_names(self.n_groups())[i].clone(),
                index: i,
            });
        }
        let mut grad = vec![R::zero(); self.dim];
        let lp = self.logp_grad_raw(theta, &mut grad);
        Ok((lp, grad))
    }
}

/// Unnormalized log posterior density and its analytic gradient.
pub fn log_posterior_grad<R: Real>(
    model: &ModelSpec<R>,
    data: &Dataset<R>,
    theta: &[R],
) -> Result<(R, Vec<R>)> {
    BoundModel::new(model.clone(), data)?.log_posterior_grad(theta)
}

/// Per-draw constrained regression parameters resolved from draw columns.
struct LikColumns {
    beta0: usize,
    beta1: usize,
    sigma: usize,
    off0: Vec<usize>,
    off1: Vec<usize>,
    theta: Vec<usize>,
}

fn resolve_lik_columns<R: Real>(
    model: &ModelSpec<R>,
    data: &Dataset<R>,
    draws: &Draws<R>,
) -> Result<LikColumns> {
    let j = data.n_groups();
    let mut cols = LikColumns { beta0: 0, beta1: 0, sigma: 0, off0: vec![], off1: vec![], theta: vec![] };
    match model.kind {
        ModelKind::Pooled => {
            cols.beta0 = draws.col_index("beta0")?;
            cols.beta1 = draws.col_index("beta1")?;
            cols.sigma = draws.col_index("sigma")?;
        }
        ModelKind::HierWho | ModelKind::HierCluster => {
            cols.beta0 = draws.col_index("beta0")?;
            cols.beta1 = draws.col_index("beta1")?;
            cols.sigma = draws.col_index("sigma")?;
            for jj in 0..j {
                cols.off0.push(draws.col_index(&format!("beta0_off[{jj}]"))?);
                cols.off1.push(draws.col_index(&format!("beta1_off[{jj}]"))?);
            }
        }
        ModelKind::EightSchoolsCentered | ModelKind::EightSchoolsNonCentered => {
            for jj in 0..schools::N_SCHOOLS {
                cols.theta.push(draws.col_index(&format!("theta[{jj}]"))?);
            }
        }
    }
    Ok(cols)
}

/// Fitted mean for observation `i` under draw row `row`.
fn draw_mean<R: Real>(
    model: &ModelSpec<R>,
    data: &Dataset<R>,
    cols: &LikColumns,
    row: ndarray::ArrayView1<'_, R>,
    i: usize,
) -> R {
    match model.kind {
        ModelKind::Pooled => row[cols.beta0] + row[cols.beta1] * data.x[i],
        ModelKind::HierWho | ModelKind::HierCluster => {
            let g = data.group[i];
            row[cols.beta0] + row[cols.off0[g]] + (row[cols.beta1] + row[cols.off1[g]]) * data.x[i]
        }
        _ => row[cols.theta[data.group[i]]],
    }
}

/// Per-observation noise scale under draw row `row` (the known standard
/// error for the school models).
fn draw_scale<R: Real>(
    model: &ModelSpec<R>,
    data: &Dataset<R>,
    cols: &LikColumns,
    row: ndarray::ArrayView1<'_, R>,
    i: usize,
) -> R {
    if model.kind.is_schools() {
        data.x[i]
    } else {
        row[cols.sigma]
    }
}

/// S × n matrix of pointwise log likelihoods log p(y_i | θ⁽ˢ⁾).
pub fn pointwise_log_lik<R: Real>(
    model: &ModelSpec<R>,
    data: &Dataset<R>,
    draws: &Draws<R>,
) -> Result<Array2<R>> {
    if draws.n_draws() == 0 {
        return Err(Error::invalid("pointwise_log_lik needs at least one draw"));
    }
    let cols = resolve_lik_columns(model, data, draws)?;
    let (s_total, n) = (draws.n_draws(), data.n());
    let half = R::of(0.5);
    let mut out = Array2::zeros((s_total, n));
    for s in 0..s_total {
        let row = draws.row(s);
        for i in 0..n {
            let m = draw_mean(model, data, &cols, row, i);
            let sd = draw_scale(model, data, &cols, row, i);
            let z = (data.y[i] - m) / sd;
            out[(s, i)] = -half * R::ln_two_pi() - sd.ln() - half * z * z;
        }
    }
    Ok(out)
}

/// S × n matrix of replicate datasets drawn from the posterior predictive
/// distribution at the observed x values and groups.
pub fn simulate_replicates<R: Real>(
    model: &ModelSpec<R>,
    data: &Dataset<R>,
    draws: &Draws<R>,
    rng: &mut RngStream,
) -> Result<Array2<R>> {
    if draws.n_draws() == 0 {
        return Err(Error::invalid("simulate_replicates needs at least one draw"));
    }
    let cols = resolve_lik_columns(model, data, draws)?;
    let (s_total, n) = (draws.n_draws(), data.n());
    let mut out = Array2::zeros((s_total, n));
    for s in 0..s_total {
        let row = draws.row(s);
        for i in 0..n {
            let m = draw_mean(model, data, &cols, row, i);
            let sd = draw_scale(model, data, &cols, row, i);
            out[(s, i)] = m + sd * rng.std_normal();
        }
    }
    Ok(out)
}

/// The eight-schools fixture (effect estimates and standard errors), shipped
/// as a data file next to this crate. The x column carries the standard
/// errors.
pub fn eight_schools_dataset<R: Real>() -> Dataset<R> {
    schools::dataset()
}

#[cfg(test)]
mod tests;
