use approx::assert_relative_eq;
use ndarray::Array2;

use super::*;
use crate::rng::RngStream;

fn toy_dataset(n: usize, n_groups: usize, seed: u64) -> Dataset<f64> {
    let mut rng = RngStream::new(seed, 0);
    let x: Vec<f64> = (0..n).map(|_| 3.0 * rng.unit_f64()).collect();
    let y: Vec<f64> = x.iter().map(|&xi| xi + 0.5 * rng.std_normal_f64()).collect();
    let group: Vec<usize> = (0..n).map(|i| i % n_groups).collect();
    let names = (0..n_groups).map(|j| format!("g{j}")).collect();
    Dataset::new(x, y, group, names, None).unwrap()
}

fn all_specs() -> Vec<(ModelSpec<f64>, Dataset<f64>)> {
    let data = toy_dataset(40, 3, 7);
    let schools = eight_schools_dataset::<f64>();
    vec![
        (ModelSpec::new(ModelKind::Pooled, PriorConfig::weak()), data.clone()),
        (
            ModelSpec::new(ModelKind::HierWho, PriorConfig::weak())
                .with_parameterization(Parameterization::Centered),
            data.clone(),
        ),
        (ModelSpec::new(ModelKind::HierCluster, PriorConfig::vague()), data),
        (ModelSpec::new(ModelKind::EightSchoolsCentered, PriorConfig::schools()), schools.clone()),
        (ModelSpec::new(ModelKind::EightSchoolsNonCentered, PriorConfig::schools()), schools),
    ]
}

fn finite_diff_grad(bound: &BoundModel<'_, f64>, theta: &[f64], h: f64) -> Vec<f64> {
    let dim = theta.len();
    let mut grad = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut t = theta.to_vec();
    for i in 0..dim {
        t[i] = theta[i] + h;
        let hi = bound.logp_grad_raw(&t, &mut scratch);
        t[i] = theta[i] - h;
        let lo = bound.logp_grad_raw(&t, &mut scratch);
        t[i] = theta[i];
        grad[i] = (hi - lo) / (2.0 * h);
    }
    grad
}

/// Analytic gradients match central finite differences (h = 1e-5) with
/// relative error < 1e-6 at 100 random points, for all five model kinds.
#[test]
fn gradients_match_finite_differences() {
    for (spec, data) in all_specs() {
        let bound = BoundModel::new(spec.clone(), &data).unwrap();
        let dim = bound.dim();
        let mut rng = RngStream::new(123, 0);
        let mut grad = vec![0.0; dim];
        for _ in 0..100 {
            let theta: Vec<f64> = (0..dim).map(|_| 4.0 * rng.unit_f64() - 2.0).collect();
            bound.logp_grad_raw(&theta, &mut grad);
            let fd = finite_diff_grad(&bound, &theta, 1e-5);
            for (i, (&a, &f)) in grad.iter().zip(&fd).enumerate() {
                let rel = (a - f).abs() / a.abs().max(1.0);
                assert!(
                    rel < 1e-6,
                    "{}: coord {} analytic {} vs fd {} (rel {})",
                    spec.kind.name(),
                    i,
                    a,
                    f,
                    rel
                );
            }
        }
    }
}

#[test]
fn constrain_pooled_exponentiates_sigma() {
    let spec = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    let out = spec.constrain(1, &[0.0, 1.0, 0.0]).unwrap();
    assert_eq!(out[0], ("beta0".to_string(), 0.0));
    assert_eq!(out[1], ("beta1".to_string(), 1.0));
    assert_eq!(out[2], ("sigma".to_string(), 1.0));
}

#[test]
fn constrain_schools_noncentered_derives_theta() {
    let spec = ModelSpec::new(ModelKind::EightSchoolsNonCentered, PriorConfig::schools());
    let mut theta = vec![3.0, 2.0f64.ln()];
    theta.extend(std::iter::repeat(0.0).take(8));
    let out = spec.constrain(8, &theta).unwrap();
    assert_relative_eq!(out[1].1, 2.0, epsilon = 1e-15);
    for (name, v) in &out[10..] {
        assert!(name.starts_with("theta["));
        assert_relative_eq!(*v, 3.0, epsilon = 1e-15);
    }
}

#[test]
fn constrain_unconstrain_round_trip() {
    let mut rng = RngStream::new(11, 0);
    for param in [Parameterization::Centered, Parameterization::NonCentered] {
        let spec = ModelSpec::new(ModelKind::HierCluster, PriorConfig::weak())
            .with_parameterization(param);
        let j = 4;
        let dim = spec.dim(j);
        for _ in 0..100 {
            let theta: Vec<f64> = (0..dim).map(|_| 4.0 * rng.unit_f64() - 2.0).collect();
            let mut constrained = Vec::new();
            spec.constrain_values(j, &theta, &mut constrained);
            let back = spec.unconstrain(j, &constrained).unwrap();
            for (a, b) in theta.iter().zip(&back) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn dimension_contract() {
    let weak = PriorConfig::<f64>::weak();
    assert_eq!(ModelSpec::new(ModelKind::Pooled, weak.clone()).dim(5), 3);
    assert_eq!(ModelSpec::new(ModelKind::HierWho, weak.clone()).dim(7), 5 + 14);
    assert_eq!(ModelSpec::new(ModelKind::EightSchoolsCentered, weak).dim(8), 10);
}

#[test]
fn empty_dataset_gives_prior_only_posterior() {
    let data = toy_dataset(10, 1, 3);
    let empty = data.empty_like();
    let spec = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    let theta = [0.3, 0.8, -0.4];
    let (lp, _) = log_posterior_grad(&spec, &empty, &theta).unwrap();
    let sigma = (-0.4f64).exp();
    let expect = spec.priors.beta0.logpdf(0.3).unwrap()
        + spec.priors.beta1.logpdf(0.8).unwrap()
        + spec.priors.sigma.logpdf(sigma).unwrap()
        + (-0.4);
    assert_relative_eq!(lp, expect, epsilon = 1e-12);
}

#[test]
fn single_observation_likelihood_term() {
    // WEAK priors, θ = {β0=0, β1=1, log σ=0}, data {(1, 1)}: the likelihood
    // contributes exactly the standard normal density at zero.
    let data = Dataset::new(vec![1.0], vec![1.0], vec![0], vec!["g0".into()], None).unwrap();
    let spec = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    let theta = [0.0, 1.0, 0.0];
    let (lp_full, _) = log_posterior_grad(&spec, &data, &theta).unwrap();
    let (lp_prior, _) = log_posterior_grad(&spec, &data.empty_like(), &theta).unwrap();
    assert_relative_eq!(lp_full - lp_prior, -0.9189385, epsilon = 1e-7);
}

#[test]
fn rejects_non_finite_theta() {
    let data = toy_dataset(5, 1, 1);
    let spec = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    let err = log_posterior_grad(&spec, &data, &[0.0, f64::NAN, 0.0]).unwrap_err();
    match err {
        Error::NonFinite { name, index } => {
            assert_eq!(name, "beta1");
            assert_eq!(index, 1);
        }
        other => panic!("unexpected error {other}"),
    }
}

/// Matched centered/non-centered parameter values give the same posterior
/// density up to the change-of-variable bookkeeping J·(log τ0 + log τ1).
#[test]
fn parameterizations_agree_up_to_jacobian() {
    let data = toy_dataset(30, 3, 21);
    let j = data.n_groups();
    let centered = ModelSpec::new(ModelKind::HierWho, PriorConfig::weak())
        .with_parameterization(Parameterization::Centered);
    let noncentered = ModelSpec::new(ModelKind::HierWho, PriorConfig::weak());
    let mut rng = RngStream::new(5, 0);
    for _ in 0..100 {
        let dim = centered.dim(j);
        let qc: Vec<f64> = (0..dim).map(|_| 2.0 * rng.unit_f64() - 1.0).collect();
        let (tau0, tau1) = (qc[3].exp(), qc[4].exp());
        let mut qnc = qc.clone();
        for jj in 0..j {
            qnc[5 + jj] = qc[5 + jj] / tau0;
            qnc[5 + j + jj] = qc[5 + j + jj] / tau1;
        }
        let (lp_c, _) = log_posterior_grad(&centered, &data, &qc).unwrap();
        let (lp_nc, _) = log_posterior_grad(&noncentered, &data, &qnc).unwrap();
        let jacobian = j as f64 * (qc[3] + qc[4]);
        assert_relative_eq!(lp_c - lp_nc + jacobian, 0.0, epsilon = 1e-8);
    }
}

fn one_row_draws(spec: &ModelSpec<f64>, n_groups: usize, theta: &[f64]) -> Draws<f64> {
    let mut values = Vec::new();
    spec.constrain_values(n_groups, theta, &mut values);
    let p = values.len();
    Draws::new(
        spec.constrained_names(n_groups),
        Array2::from_shape_vec((1, p), values).unwrap(),
        vec![0],
        vec![0],
        vec![false],
        vec![0.0],
        vec![1.0],
    )
    .unwrap()
}

#[test]
fn pointwise_log_lik_standard_normal_entry() {
    let data = Dataset::new(vec![2.0], vec![0.0], vec![0], vec!["g0".into()], None).unwrap();
    let spec = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    let draws = one_row_draws(&spec, 1, &[0.0, 0.0, 0.0]);
    let ll = pointwise_log_lik(&spec, &data, &draws).unwrap();
    assert_eq!(ll.dim(), (1, 1));
    assert_relative_eq!(ll[(0, 0)], -0.9189385, epsilon = 1e-7);
}

#[test]
fn pointwise_log_lik_shape() {
    let data = toy_dataset(3, 1, 2);
    let spec = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    let draws = one_row_draws(&spec, 1, &[0.1, 0.9, -0.2]);
    assert_eq!(pointwise_log_lik(&spec, &data, &draws).unwrap().dim(), (1, 3));
}

#[test]
fn hierarchical_with_zero_offsets_matches_pooled() {
    let data = toy_dataset(25, 4, 9);
    let pooled = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    let hier = ModelSpec::new(ModelKind::HierWho, PriorConfig::weak())
        .with_parameterization(Parameterization::Centered);
    let theta_pooled = [0.4, 1.1, -0.3];
    let mut theta_hier = vec![0.4, 1.1, -0.3, 0.0, 0.0];
    theta_hier.extend(std::iter::repeat(0.0).take(8));
    let dp = one_row_draws(&pooled, 4, &theta_pooled);
    let dh = one_row_draws(&hier, 4, &theta_hier);
    let ll_p = pointwise_log_lik(&pooled, &data, &dp).unwrap();
    let ll_h = pointwise_log_lik(&hier, &data, &dh).unwrap();
    for i in 0..data.n() {
        assert_relative_eq!(ll_p[(0, i)], ll_h[(0, i)], epsilon = 1e-14);
    }
}

#[test]
fn pointwise_sum_equals_likelihood_portion() {
    for (spec, data) in all_specs() {
        let j = data.n_groups();
        let dim = spec.dim(j);
        let mut rng = RngStream::new(31, 0);
        let theta: Vec<f64> = (0..dim).map(|_| rng.unit_f64() - 0.5).collect();
        let (lp_full, _) = log_posterior_grad(&spec, &data, &theta).unwrap();
        let (lp_prior, _) = log_posterior_grad(&spec, &data.empty_like(), &theta).unwrap();
        let draws = one_row_draws(&spec, j, &theta);
        let ll = pointwise_log_lik(&spec, &data, &draws).unwrap();
        let total: f64 = ll.row(0).sum();
        assert_relative_eq!(lp_full - lp_prior, total, epsilon = 1e-8);
    }
}

#[test]
fn replicates_with_zero_sigma_equal_fitted_means() {
    let data = toy_dataset(10, 1, 4);
    let spec = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    // log σ = −inf is not representable; build the draw row directly
    let draws = Draws::new(
        vec!["beta0".into(), "beta1".into(), "sigma".into()],
        Array2::from_shape_vec((1, 3), vec![0.5, 2.0, 0.0]).unwrap(),
        vec![0],
        vec![0],
        vec![false],
        vec![0.0],
        vec![1.0],
    )
    .unwrap();
    let mut rng = RngStream::new(8, 0);
    let rep = simulate_replicates(&spec, &data, &draws, &mut rng).unwrap();
    for i in 0..data.n() {
        assert_relative_eq!(rep[(0, i)], 0.5 + 2.0 * data.x[i], epsilon = 1e-15);
    }
}

#[test]
fn replicate_means_approach_fitted_means() {
    let data = toy_dataset(5, 1, 12);
    let spec = ModelSpec::new(ModelKind::Pooled, PriorConfig::weak());
    // 4000 identical draws with σ = 0.3: the replicate average at each point
    // is the fitted mean up to σ/√S Monte Carlo error
    let s = 4000;
    let sigma = 0.3;
    let row = vec![0.2, 1.5, sigma];
    let flat: Vec<f64> = row.iter().cycle().take(3 * s).copied().collect();
    let draws = Draws::new(
        vec!["beta0".into(), "beta1".into(), "sigma".into()],
        Array2::from_shape_vec((s, 3), flat).unwrap(),
        vec![0; s],
        (0..s as u32).collect(),
        vec![false; s],
        vec![0.0; s],
        vec![1.0; s],
    )
    .unwrap();
    let mut rng = RngStream::new(77, 0);
    let rep = simulate_replicates(&spec, &data, &draws, &mut rng).unwrap();
    let mc_err = sigma / (s as f64).sqrt();
    for i in 0..data.n() {
        let fitted = 0.2 + 1.5 * data.x[i];
        let mean = rep.column(i).sum() / s as f64;
        assert!(
            (mean - fitted).abs() <= 3.0 * mc_err,
            "i={}: mean {} vs fitted {}",
            i,
            mean,
            fitted
        );
    }
}

#[test]
fn replicates_deterministic_for_fixed_seed() {
    let data = toy_dataset(6, 2, 19);
    let spec = ModelSpec::new(ModelKind::HierWho, PriorConfig::weak());
    let dim = spec.dim(2);
    let theta: Vec<f64> = (0..dim).map(|i| 0.1 * i as f64 - 0.3).collect();
    let draws = one_row_draws(&spec, 2, &theta);
    let a = simulate_replicates(&spec, &data, &draws, &mut RngStream::new(5, 3)).unwrap();
    let b = simulate_replicates(&spec, &data, &draws, &mut RngStream::new(5, 3)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn eight_schools_fixture_loads() {
    let d = eight_schools_dataset::<f64>();
    assert_eq!(d.n(), 8);
    assert_eq!(d.y[0], 28.0);
    assert_eq!(d.x[0], 15.0);
    assert_eq!(d.group_names.len(), 8);
}
