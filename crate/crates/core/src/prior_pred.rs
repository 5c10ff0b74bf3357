//! Prior predictive simulation: generate whole datasets from the joint prior
//! data-generating process and summarize how extreme they get, flip-book
//! style (one simulated dataset per page).

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec, PriorConfig};
use crate::real::Real;
use crate::rng::RngStream;
use crate::stats::{quantile, sample_sd};

/// Natural-scale plausibility threshold on the log scale: log(22,000 µg/m³).
pub fn log_natural_threshold<R: Real>() -> R {
    R::of(22_000.0f64.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipBook<R: Real> {
    /// Simulated y vectors, each aligned with the template's x/groups.
    pub datasets: Vec<Vec<R>>,
    /// vague | weak | custom
    pub prior_label: String,
    /// Constrained generating parameters per dataset.
    pub per_dataset_params: Vec<Vec<(String, R)>>,
}

impl<R: Real> FlipBook<R> {
    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }
}

fn prior_label<R: Real>(priors: &PriorConfig<R>) -> &'static str {
    if *priors == PriorConfig::vague() {
        "vague"
    } else if *priors == PriorConfig::weak() {
        "weak"
    } else {
        "custom"
    }
}

/// Draw `n_datasets` datasets from the prior data generating process at the
/// template's x values and groups. Generation is sequential on the given
/// stream, so a (seed, template, prior) triple always reproduces the book.
pub fn prior_flipbook<R: Real>(
    model: &ModelSpec<R>,
    template: &Dataset<R>,
    n_datasets: usize,
    rng: &mut RngStream,
) -> Result<FlipBook<R>> {
    if n_datasets == 0 {
        return Err(Error::invalid("prior_flipbook needs n_datasets >= 1"));
    }
    if template.n() == 0 {
        return Err(Error::invalid("prior_flipbook needs a non-empty template"));
    }
    let priors = &model.priors;
    for d in [&priors.beta0, &priors.beta1, &priors.tau, &priors.sigma] {
        d.validate_for_sampling()?;
    }

    let j = template.n_groups();
    let n = template.n();
    let mut book = FlipBook {
        datasets: Vec::with_capacity(n_datasets),
        prior_label: prior_label(priors).to_string(),
        per_dataset_params: Vec::with_capacity(n_datasets),
    };

    for _ in 0..n_datasets {
        let mut params: Vec<(String, R)> = Vec::new();
        let mut y = Vec::with_capacity(n);
        match model.kind {
            ModelKind::Pooled => {
                let b0 = priors.beta0.sample_unchecked(rng);
                let b1 = priors.beta1.sample_unchecked(rng);
                let sigma = priors.sigma.sample_unchecked(rng);
                params.push(("beta0".into(), b0));
                params.push(("beta1".into(), b1));
                params.push(("sigma".into(), sigma));
                for i in 0..n {
                    y.push(b0 + b1 * template.x[i] + sigma * rng.std_normal());
                }
            }
            ModelKind::HierWho | ModelKind::HierCluster => {
                let b0 = priors.beta0.sample_unchecked(rng);
                let b1 = priors.beta1.sample_unchecked(rng);
                let sigma = priors.sigma.sample_unchecked(rng);
                let tau0 = priors.sample_tau(rng)?;
                let tau1 = priors.sample_tau(rng)?;
                let off0: Vec<R> = (0..j).map(|_| tau0 * rng.std_normal()).collect();
                let off1: Vec<R> = (0..j).map(|_| tau1 * rng.std_normal()).collect();
                params.push(("beta0".into(), b0));
                params.push(("beta1".into(), b1));
                params.push(("sigma".into(), sigma));
                params.push(("tau0".into(), tau0));
                params.push(("tau1".into(), tau1));
                for (jj, &v) in off0.iter().enumerate() {
                    params.push((format!("beta0_off[{jj}]"), v));
                }
                for (jj, &v) in off1.iter().enumerate() {
                    params.push((format!("beta1_off[{jj}]"), v));
                }
                for i in 0..n {
                    let g = template.group[i];
                    let mean = b0 + off0[g] + (b1 + off1[g]) * template.x[i];
                    y.push(mean + sigma * rng.std_normal());
                }
            }
            ModelKind::EightSchoolsCentered | ModelKind::EightSchoolsNonCentered => {
                let mu = priors.beta0.sample_unchecked(rng);
                let tau = priors.sample_tau(rng)?;
                let theta: Vec<R> = (0..j).map(|_| mu + tau * rng.std_normal()).collect();
                params.push(("mu".into(), mu));
                params.push(("tau".into(), tau));
                for (jj, &v) in theta.iter().enumerate() {
                    params.push((format!("theta[{jj}]"), v));
                }
                for i in 0..n {
                    // the template's x column carries the known standard errors
                    y.push(theta[template.group[i]] + template.x[i] * rng.std_normal());
                }
            }
        }
        book.datasets.push(y);
        book.per_dataset_params.push(params);
    }
    Ok(book)
}

/// Spread summary for one simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetTail<R: Real> {
    pub max_abs: R,
    pub min: R,
    pub max: R,
    pub sd: R,
}

/// Flip-book spread summary across datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSummary<R: Real> {
    pub prior_label: String,
    pub per_dataset: Vec<DatasetTail<R>>,
    /// 5/50/95% linear-interpolation quantiles of max|y| across datasets.
    pub max_abs_q05: R,
    pub max_abs_q50: R,
    pub max_abs_q95: R,
    /// Datasets containing at least one point above log(22,000 µg/m³).
    pub n_above_natural_threshold: usize,
}

pub fn prior_tail_summary<R: Real>(book: &FlipBook<R>) -> Result<TailSummary<R>> {
    if book.datasets.is_empty() {
        return Err(Error::invalid("prior_tail_summary needs a non-empty flip book"));
    }
    let threshold = log_natural_threshold::<R>();
    let mut per_dataset = Vec::with_capacity(book.datasets.len());
    let mut max_abs_all = Vec::with_capacity(book.datasets.len());
    let mut n_above = 0;
    for y in &book.datasets {
        let min = y.iter().copied().fold(R::infinity(), R::min);
        let max = y.iter().copied().fold(R::neg_infinity(), R::max);
        let max_abs = min.abs().max(max.abs());
        let sd = if y.len() < 2 { R::zero() } else { sample_sd(y) };
        if max > threshold {
            n_above += 1;
        }
        max_abs_all.push(max_abs);
        per_dataset.push(DatasetTail { max_abs, min, max, sd });
    }
    Ok(TailSummary {
        prior_label: book.prior_label.clone(),
        per_dataset,
        max_abs_q05: quantile(&max_abs_all, 0.05),
        max_abs_q50: quantile(&max_abs_all, 0.50),
        max_abs_q95: quantile(&max_abs_all, 0.95),
        n_above_natural_threshold: n_above,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistSpec;
    use approx::assert_relative_eq;

    fn template(n: usize, j: usize, x_max: f64) -> Dataset<f64> {
        let x: Vec<f64> = (0..n).map(|i| 0.5 + (x_max - 0.5) * i as f64 / (n - 1) as f64).collect();
        let y = vec![0.0; n];
        let group: Vec<usize> = (0..n).map(|i| i % j).collect();
        let names = (0..j).map(|g| format!("g{g}")).collect();
        Dataset::new(x, y, group, names, None).unwrap()
    }

    fn point_mass_priors() -> PriorConfig<f64> {
        PriorConfig {
            beta0: DistSpec::Normal { mean: 0.0, sd: 0.0 },
            beta1: DistSpec::Normal { mean: 1.0, sd: 0.0 },
            tau: DistSpec::HalfNormal { sd: 0.0 },
            sigma: DistSpec::HalfNormal { sd: 0.0 },
        }
    }

    #[test]
    fn point_mass_priors_give_identity_line() {
        let tpl = template(20, 3, 4.0);
        let model = ModelSpec::new(ModelKind::HierWho, point_mass_priors());
        let mut rng = RngStream::new(1, 0);
        let book = prior_flipbook(&model, &tpl, 3, &mut rng).unwrap();
        assert_eq!(book.prior_label, "custom");
        for y in &book.datasets {
            for (yi, xi) in y.iter().zip(&tpl.x) {
                assert_relative_eq!(yi, xi, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn weak_book_covers_extreme_but_plausible_values() {
        let tpl = template(200, 7, 4.5);
        let model = ModelSpec::new(ModelKind::HierWho, PriorConfig::weak());
        let mut rng = RngStream::new(2, 0);
        let book = prior_flipbook(&model, &tpl, 1000, &mut rng).unwrap();
        assert_eq!(book.prior_label, "weak");
        let summary = prior_tail_summary(&book).unwrap();
        assert!(
            summary.n_above_natural_threshold >= 1,
            "no dataset exceeded log(22000) = {}",
            log_natural_threshold::<f64>()
        );
    }

    #[test]
    fn vague_books_dwarf_weak_books() {
        let tpl = template(100, 7, 4.5);
        let weak = ModelSpec::new(ModelKind::HierWho, PriorConfig::weak());
        let vague = ModelSpec::new(ModelKind::HierWho, PriorConfig::vague());
        let mut rng = RngStream::new(3, 0);
        let weak_sum =
            prior_tail_summary(&prior_flipbook(&weak, &tpl, 300, &mut rng).unwrap()).unwrap();
        let vague_sum =
            prior_tail_summary(&prior_flipbook(&vague, &tpl, 300, &mut rng).unwrap()).unwrap();
        assert!(
            vague_sum.max_abs_q50 >= 10.0 * weak_sum.max_abs_q50,
            "vague q50 {} vs weak q50 {}",
            vague_sum.max_abs_q50,
            weak_sum.max_abs_q50
        );
        assert!(vague_sum.max_abs_q50 > 50.0);
    }

    #[test]
    fn summary_pinned_small_cases() {
        let book = FlipBook {
            datasets: vec![vec![0.0, 0.0]],
            prior_label: "custom".into(),
            per_dataset_params: vec![vec![]],
        };
        let s = prior_tail_summary(&book).unwrap();
        assert_eq!(s.per_dataset[0].max_abs, 0.0);
        assert_eq!(s.per_dataset[0].sd, 0.0);

        let book = FlipBook {
            datasets: vec![vec![1.0, 1.0], vec![-3.0, 3.0]],
            prior_label: "custom".into(),
            per_dataset_params: vec![vec![], vec![]],
        };
        // median of {1, 3} with linear interpolation
        assert_eq!(prior_tail_summary(&book).unwrap().max_abs_q50, 2.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let tpl = template(30, 2, 4.0);
        let model = ModelSpec::new(ModelKind::HierCluster, PriorConfig::weak());
        let a = prior_flipbook(&model, &tpl, 5, &mut RngStream::new(9, 4)).unwrap();
        let b = prior_flipbook(&model, &tpl, 5, &mut RngStream::new(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weak_book_parameters_are_positive_and_slope_centered() {
        let tpl = template(10, 2, 4.0);
        let model = ModelSpec::new(ModelKind::HierWho, PriorConfig::weak());
        let mut rng = RngStream::new(4, 0);
        let book = prior_flipbook(&model, &tpl, 10_000, &mut rng).unwrap();
        let mut beta1_sum = 0.0;
        for params in &book.per_dataset_params {
            let get = |name: &str| params.iter().find(|(n, _)| n == name).unwrap().1;
            assert!(get("sigma") > 0.0);
            assert!(get("tau0") > 0.0);
            assert!(get("tau1") > 0.0);
            beta1_sum += get("beta1");
        }
        let beta1_mean = beta1_sum / book.n_datasets() as f64;
        assert!((beta1_mean - 1.0).abs() < 0.05, "beta1 mean {beta1_mean}");
    }

    #[test]
    fn schools_flipbook_uses_stderr_column() {
        let schools = crate::model::eight_schools_dataset::<f64>();
        let model = ModelSpec::new(ModelKind::EightSchoolsCentered, PriorConfig::schools());
        let mut rng = RngStream::new(6, 0);
        let book = prior_flipbook(&model, &schools, 4, &mut rng).unwrap();
        assert_eq!(book.datasets[0].len(), 8);
        assert!(book.per_dataset_params[0].iter().any(|(n, _)| n == "mu"));
    }

    #[test]
    fn rejects_empty_requests() {
        let tpl = template(5, 1, 2.0);
        let model = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
        assert!(prior_flipbook(&model, &tpl, 0, &mut RngStream::new(1, 0)).is_err());
        let empty_book: FlipBook<f64> =
            FlipBook { datasets: vec![], prior_label: "weak".into(), per_dataset_params: vec![] };
        assert!(prior_tail_summary(&empty_book).is_err());
    }
}
