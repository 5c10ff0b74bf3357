//! Posterior predictive checking: kernel density overlays, scalar test
//! statistics (global and grouped), posterior predictive tail fractions,
//! and LOO-PIT calibration values.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::RngStream;
use crate::stats::{central_moment, mean, median_lower, sample_sd, iqr};

/// Role of a density curve in an overlay figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveRole {
    Observed,
    Replicate,
    UniformReference,
}

impl CurveRole {
    pub fn label(&self) -> &'static str {
        match self {
            CurveRole::Observed => "observed",
            CurveRole::Replicate => "replicate",
            CurveRole::UniformReference => "uniform-reference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve<R: Real> {
    pub grid: Vec<R>,
    pub density: Vec<R>,
    pub label: CurveRole,
}

impl<R: Real> DensityCurve<R> {
    pub fn with_label(mut self, label: CurveRole) -> Self {
        self.label = label;
        self
    }
}

/// Gaussian kernel density estimate on an equispaced grid spanning
/// [min − 3h, max + 3h]. Bandwidth is Silverman's rule
/// h = 0.9·min(sd, IQR/1.34)·n^(−1/5), falling back to the sd when the IQR
/// degenerates. Constant input is an error (zero bandwidth).
pub fn kde<R: Real>(values: &[R], n_grid: usize) -> Result<DensityCurve<R>> {
    if values.len() < 2 {
        return Err(Error::invalid("kde needs at least 2 values"));
    }
    if n_grid < 2 {
        return Err(Error::invalid("kde needs at least 2 grid points"));
    }
    let sd = sample_sd(values);
    let iqr_scaled = iqr(values) / R::of(1.34);
    let mut spread = sd.min(iqr_scaled);
    if spread <= R::zero() {
        spread = sd;
    }
    if !(spread > R::zero()) {
        return Err(Error::invalid("kde bandwidth is zero (constant input)"));
    }
    let h = R::of(0.9) * spread * R::of((values.len() as f64).powf(-0.2));

    let lo = values.iter().copied().fold(R::infinity(), R::min) - R::of(3.0) * h;
    let hi = values.iter().copied().fold(R::neg_infinity(), R::max) + R::of(3.0) * h;
    let step = (hi - lo) / R::of_usize(n_grid - 1);
    let norm = R::one() / (R::of_usize(values.len()) * h * R::ln_two_pi().exp().sqrt());
    let half = R::of(0.5);

    let grid: Vec<R> = (0..n_grid).map(|i| lo + step * R::of_usize(i)).collect();
    let density = grid
        .iter()
        .map(|&g| {
            norm * values
                .iter()
                .map(|&x| {
                    let z = (g - x) / h;
                    (-half * z * z).exp()
                })
                .sum::<R>()
        })
        .collect();
    Ok(DensityCurve { grid, density, label: CurveRole::Observed })
}

/// Scalar test statistics for predictive checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    Skew,
    Median,
    Mean,
    Sd,
}

impl StatKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatKind::Skew => "skew",
            StatKind::Median => "median",
            StatKind::Mean => "mean",
            StatKind::Sd => "sd",
        }
    }

    fn min_n(&self) -> usize {
        match self {
            StatKind::Skew => 3,
            _ => 1,
        }
    }
}

/// Skewness m3/m2^(3/2) with 1/n central moments; median with lower
/// interpolation; mean and sample sd.
pub fn test_stat<R: Real>(values: &[R], kind: StatKind) -> Result<R> {
    if values.len() < kind.min_n() {
        return Err(Error::invalid(format!(
            "{} needs at least {} values, got {}",
            kind.name(),
            kind.min_n(),
            values.len()
        )));
    }
    match kind {
        StatKind::Skew => {
            let m2 = central_moment(values, 2);
            if m2 == R::zero() {
                return Err(Error::invalid("skew undefined for constant input"));
            }
            Ok(central_moment(values, 3) / m2.powf(R::of(1.5)))
        }
        StatKind::Median => Ok(median_lower(values)),
        StatKind::Mean => Ok(mean(values)),
        StatKind::Sd => Ok(sample_sd(values)),
    }
}

/// One test-statistic check: the observed value against its replicate
/// distribution, with both one-sided tail fractions (ties count in both).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatCheck<R: Real> {
    pub stat: StatKind,
    pub observed: R,
    pub replicated: Vec<R>,
    pub group: Option<String>,
    /// P(stat_rep ≥ stat_obs)
    pub p_ge: R,
    /// P(stat_rep ≤ stat_obs)
    pub p_le: R,
}

impl<R: Real> StatCheck<R> {
    pub fn min_tail(&self) -> R {
        self.p_ge.min(self.p_le)
    }
}

/// Checks plus the groups that had to be skipped (too few members for the
/// statistic), each with a short note.
#[derive(Debug, Clone, PartialEq)]
pub struct StatCheckReport<R: Real> {
    pub checks: Vec<StatCheck<R>>,
    pub skipped: Vec<String>,
}

/// Group labels aligned with observations.
#[derive(Debug, Clone, Copy)]
pub struct Grouping<'a> {
    pub index: &'a [usize],
    pub names: &'a [String],
}

fn check_one<R: Real>(
    y: &[R],
    yrep: &Array2<R>,
    kind: StatKind,
    rows: Option<&[usize]>,
    group: Option<String>,
) -> Result<StatCheck<R>> {
    let observed = match rows {
        None => test_stat(y, kind)?,
        Some(idx) => {
            let sub: Vec<R> = idx.iter().map(|&i| y[i]).collect();
            test_stat(&sub, kind)?
        }
    };
    let s = yrep.nrows();
    let mut replicated = Vec::with_capacity(s);
    for srow in yrep.rows() {
        let stat = match rows {
            None => test_stat(srow.as_slice().expect("contiguous row"), kind)?,
            Some(idx) => {
                let sub: Vec<R> = idx.iter().map(|&i| srow[i]).collect();
                test_stat(&sub, kind)?
            }
        };
        replicated.push(stat);
    }
    let sf = R::of_usize(s);
    let ge = replicated.iter().filter(|&&r| r >= observed).count();
    let le = replicated.iter().filter(|&&r| r <= observed).count();
    Ok(StatCheck {
        stat: kind,
        observed,
        replicated,
        group,
        p_ge: R::of_usize(ge) / sf,
        p_le: R::of_usize(le) / sf,
    })
}

/// Compare an observed statistic with its posterior predictive distribution,
/// globally or within each group. Groups too small for the statistic are
/// skipped and reported in the result.
pub fn ppc_stat_check<R: Real>(
    y: &[R],
    yrep: &Array2<R>,
    kind: StatKind,
    groups: Option<Grouping<'_>>,
) -> Result<StatCheckReport<R>> {
    if yrep.ncols() != y.len() {
        return Err(Error::DimMismatch { what: "replicate columns", expected: y.len(), got: yrep.ncols() });
    }
    if yrep.nrows() == 0 {
        return Err(Error::invalid("ppc_stat_check needs at least one replicate row"));
    }
    let mut report = StatCheckReport { checks: Vec::new(), skipped: Vec::new() };
    match groups {
        None => report.checks.push(check_one(y, yrep, kind, None, None)?),
        Some(g) => {
            if g.index.len() != y.len() {
                return Err(Error::DimMismatch { what: "grouping", expected: y.len(), got: g.index.len() });
            }
            let mut members = vec![Vec::new(); g.names.len()];
            for (i, &gi) in g.index.iter().enumerate() {
                members[gi].push(i);
            }
            for (j, rows) in members.iter().enumerate() {
                if rows.len() < kind.min_n() {
                    report.skipped.push(format!(
                        "group {} skipped: {} members, {} needs {}",
                        g.names[j],
                        rows.len(),
                        kind.name(),
                        kind.min_n()
                    ));
                    continue;
                }
                report.checks.push(check_one(
                    y,
                    yrep,
                    kind,
                    Some(rows),
                    Some(g.names[j].clone()),
                )?);
            }
        }
    }
    Ok(report)
}

/// LOO probability integral transform values:
/// PIT_i = Σ_s w_si·1[y_rep_si ≤ y_i] / Σ_s w_si with w = exp(log_weights).
pub fn loo_pit<R: Real>(y: &[R], yrep: &Array2<R>, log_weights: &Array2<R>) -> Result<Vec<R>> {
    let (s, n) = yrep.dim();
    if n != y.len() {
        return Err(Error::DimMismatch { what: "loo_pit observations", expected: y.len(), got: n });
    }
    if log_weights.dim() != (s, n) {
        return Err(Error::DimMismatch {
            what: "loo_pit weights",
            expected: s * n,
            got: log_weights.len(),
        });
    }
    let mut pit = Vec::with_capacity(n);
    for i in 0..n {
        let mut num = R::zero();
        let mut den = R::zero();
        for si in 0..s {
            let w = log_weights[(si, i)].exp();
            den += w;
            if yrep[(si, i)] <= y[i] {
                num += w;
            }
        }
        pit.push(num / den);
    }
    Ok(pit)
}

/// Reference curves for PIT overlays: `n_curves` standard-uniform samples of
/// size `n`, each passed through the same density estimator.
pub fn uniform_reference_curves<R: Real>(
    n: usize,
    n_curves: usize,
    n_grid: usize,
    rng: &mut RngStream,
) -> Result<Vec<DensityCurve<R>>> {
    (0..n_curves)
        .map(|_| {
            let sample: Vec<R> = (0..n).map(|_| rng.unit()).collect();
            kde(&sample, n_grid).map(|c| c.with_label(CurveRole::UniformReference))
        })
        .collect()
}
