//! Pareto-smoothed importance sampling LOO: tail fitting, weight smoothing,
//! k-hat influence diagnostics, pointwise ELPD, and pairwise comparison.
//!
//! Tail size is M = ⌈min(0.2·S, 3·√S)⌉. The M largest raw ratios are
//! replaced by expected order statistics of a generalized Pareto fit to the
//! exceedances over the (S−M)-th order statistic, truncated at the raw
//! maximum, and all log weights are shifted so the largest is zero.
//!
//! k-hat sentinels: +∞ marks a degenerate (spread-free) tail and NaN marks
//! columns with too few draws to smooth (S < 25).

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use crate::dist::gpd_inv_cdf;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::stats::{log_sum_exp, sample_var};

/// Minimum number of draws before tail smoothing is attempted.
pub const MIN_TAIL_DRAWS: usize = 25;

/// Diagnostic band for one k-hat value, at thresholds 0.5 / 0.7 / 1.0.
/// Sentinel values (NaN, +∞) land in the worst band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KhatBand {
    Good,
    Ok,
    Bad,
    VeryBad,
}

impl KhatBand {
    pub fn classify<R: Real>(khat: R) -> KhatBand {
        if khat < R::of(0.5) {
            KhatBand::Good
        } else if khat < R::of(0.7) {
            KhatBand::Ok
        } else if khat < R::one() {
            KhatBand::Bad
        } else {
            // NaN comparisons are all false, so sentinels end up here
            KhatBand::VeryBad
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            KhatBand::Good => "good",
            KhatBand::Ok => "ok",
            KhatBand::Bad => "bad",
            KhatBand::VeryBad => "very bad",
        }
    }
}

/// Profile-likelihood generalized Pareto fit to sorted exceedances
/// (Zhang–Stephens grid over the transformed shape with posterior-mean
/// weighting), with the small-sample adjustment k̂ ← (M·k̂ + 5)/(M + 10).
/// Returns (k̂, σ̂); a spread-free tail yields the +∞ sentinel.
pub fn gpd_fit_tail<R: Real>(tail: &[R]) -> Result<(R, R)> {
    let n = tail.len();
    if n < 5 {
        return Err(Error::invalid(format!("gpd_fit_tail needs at least 5 exceedances, got {n}")));
    }
    if tail.iter().any(|&v| v < R::zero() || !v.is_finite()) {
        return Err(Error::invalid("exceedances must be finite and non-negative"));
    }
    if tail.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("exceedances must be sorted ascending"));
    }
    let x_max = tail[n - 1];
    if x_max <= tail[0] || x_max <= R::zero() {
        return Ok((R::infinity(), R::zero()));
    }
    // first-quartile order statistic anchors the grid scale
    let mut x_star = tail[((n as f64 / 4.0 + 0.5).floor() as usize).saturating_sub(1)];
    if x_star <= R::zero() {
        x_star = tail.iter().copied().find(|&v| v > R::zero()).unwrap_or(x_max);
    }

    let m_grid = 30 + (n as f64).sqrt().floor() as usize;
    let n_f = R::of_usize(n);
    let three = R::of(3.0);
    let mut thetas = Vec::with_capacity(m_grid);
    let mut profiles = Vec::with_capacity(m_grid);
    for j in 1..=m_grid {
        let jj = R::of(j as f64 - 0.5);
        let theta = R::one() / x_max + (R::one() - (R::of_usize(m_grid) / jj).sqrt()) / (three * x_star);
        let l = if theta == R::zero() {
            // exponential limit of the profile likelihood
            let sigma = tail.iter().copied().sum::<R>() / n_f;
            n_f * (-sigma.ln() - R::one())
        } else {
            let k = tail.iter().map(|&x| (-theta * x).ln_1p()).sum::<R>() / n_f;
            n_f * ((-theta / k).ln() - k - R::one())
        };
        thetas.push(theta);
        profiles.push(l);
    }
    let lse = log_sum_exp(&profiles);
    let theta_hat = thetas
        .iter()
        .zip(&profiles)
        .map(|(&t, &l)| t * (l - lse).exp())
        .sum::<R>();

    let (k_raw, sigma) = if theta_hat == R::zero() {
        (R::zero(), tail.iter().copied().sum::<R>() / n_f)
    } else {
        let k = tail.iter().map(|&x| (-theta_hat * x).ln_1p()).sum::<R>() / n_f;
        (k, -k / theta_hat)
    };
    let k_adj = (n_f * k_raw + R::of(5.0)) / (n_f + R::of(10.0));
    Ok((k_adj, sigma))
}

/// Smooth one column of raw log importance ratios. Returns the smoothed log
/// weights (shifted so the maximum is zero) and the tail-shape estimate.
pub fn psis_smooth<R: Real>(log_ratios: &[R]) -> Result<(Vec<R>, R)> {
    if let Some(i) = log_ratios.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { name: "log_ratios".into(), index: i });
    }
    let s = log_ratios.len();
    let mut lw = log_ratios.to_vec();
    // shift first so the ratio scale below cannot overflow
    let raw_max = lw.iter().copied().fold(R::neg_infinity(), R::max);
    for v in &mut lw {
        *v -= raw_max;
    }

    let khat = if s < MIN_TAIL_DRAWS {
        R::nan()
    } else {
        let m = (0.2 * s as f64).min(3.0 * (s as f64).sqrt()).ceil() as usize;
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_unstable_by(|&a, &b| {
            lw[a].partial_cmp(&lw[b]).unwrap_or(std::cmp::Ordering::Equal)
        });
        let cutoff = lw[order[s - m - 1]];
        if lw[order[s - 1]] <= cutoff {
            R::infinity()
        } else {
            // fit on the ratio scale: exceedances of exp(lw) over exp(cutoff)
            let exp_cutoff = cutoff.exp();
            let exceedances: Vec<R> =
                order[s - m..].iter().map(|&i| lw[i].exp() - exp_cutoff).collect();
            let (khat, sigma) = gpd_fit_tail(&exceedances).expect("tail construction is valid");
            if khat.is_finite() && sigma > R::zero() {
                for (z, &idx) in order[s - m..].iter().enumerate() {
                    let p = R::of((z as f64 + 0.5) / m as f64);
                    let q = gpd_inv_cdf(khat, sigma, exp_cutoff, p).expect("p in [0,1)");
                    // truncate at the raw maximum (zero after the shift)
                    lw[idx] = q.ln().min(R::zero());
                }
            }
            khat
        }
    };

    let max = lw.iter().copied().fold(R::neg_infinity(), R::max);
    for v in &mut lw {
        *v -= max;
    }
    Ok((lw, khat))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooResult<R: Real> {
    pub pointwise_elpd: Vec<R>,
    pub khat: Vec<R>,
    /// S × n smoothed log weights, columns aligned with observations.
    pub smoothed_log_weights: Array2<R>,
    pub elpd_total: R,
    pub elpd_se: R,
}

impl<R: Real> LooResult<R> {
    pub fn n(&self) -> usize {
        self.pointwise_elpd.len()
    }

    /// Count of points in each diagnostic band, ordered good/ok/bad/very bad.
    pub fn band_counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for &k in &self.khat {
            match KhatBand::classify(k) {
                KhatBand::Good => counts[0] += 1,
                KhatBand::Ok => counts[1] += 1,
                KhatBand::Bad => counts[2] += 1,
                KhatBand::VeryBad => counts[3] += 1,
            }
        }
        counts
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("index,elpd,khat\n");
        for i in 0..self.n() {
            let _ = writeln!(out, "{},{},{}", i, self.pointwise_elpd[i], self.khat[i]);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Read the pointwise table written by [`LooResult::write_csv`]:
/// (elpd, khat) per observation.
pub fn read_loo_csv<R: Real>(path: impl AsRef<Path>) -> Result<(Vec<R>, Vec<R>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "index,elpd,khat")) => {}
        _ => return Err(Error::parse(1, "expected header index,elpd,khat")),
    }
    let mut elpd = Vec::new();
    let mut khat = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let bad = || Error::parse(i + 1, "bad loo row");
        let idx: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if idx != elpd.len() {
            return Err(Error::parse(i + 1, format!("expected index {}, got {}", elpd.len(), idx)));
        }
        elpd.push(R::of(parts.next().ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?));
        khat.push(R::of(parts.next().ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?));
    }
    Ok((elpd, khat))
}

/// PSIS-LOO expected log pointwise predictive density from an S × n
/// log-likelihood matrix. Raw ratios for column i are −log_lik[:, i].
pub fn elpd_loo<R: Real>(log_lik: &Array2<R>) -> Result<LooResult<R>> {
    let (s, n) = log_lik.dim();
    if s == 0 || n == 0 {
        return Err(Error::invalid("elpd_loo needs a non-empty log-likelihood matrix"));
    }
    for ((si, i), &v) in log_lik.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { name: format!("log_lik[{si},{i}]"), index: i });
        }
    }

    let columns: Vec<(Vec<R>, R, R)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let col: Vec<R> = log_lik.column(i).to_vec();
            let ratios: Vec<R> = col.iter().map(|&v| -v).collect();
            let (lw, khat) = psis_smooth(&ratios).expect("ratios validated finite");
            let weighted: Vec<R> = lw.iter().zip(&col).map(|(&w, &l)| w + l).collect();
            let elpd = log_sum_exp(&weighted) - log_sum_exp(&lw);
            (lw, khat, elpd)
        })
        .collect();

    let mut smoothed = Array2::zeros((s, n));
    let mut khat = Vec::with_capacity(n);
    let mut pointwise = Vec::with_capacity(n);
    for (i, (lw, k, e)) in columns.into_iter().enumerate() {
        for (si, v) in lw.into_iter().enumerate() {
            smoothed[(si, i)] = v;
        }
        khat.push(k);
        pointwise.push(e);
    }
    let elpd_total = pointwise.iter().copied().sum();
    let elpd_se = (R::of_usize(n) * sample_var(&pointwise)).sqrt();
    Ok(LooResult { pointwise_elpd: pointwise, khat, smoothed_log_weights: smoothed, elpd_total, elpd_se })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooComparison<R: Real> {
    /// Pointwise ELPD of model B minus model A; positive favors B.
    pub pointwise_diff: Vec<R>,
    pub diff_total: R,
    pub diff_se: R,
    pub group: Option<Vec<String>>,
}

impl<R: Real> LooComparison<R> {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("index,elpd_diff,group\n");
        for (i, d) in self.pointwise_diff.iter().enumerate() {
            let g = self.group.as_ref().map_or("", |g| g[i].as_str());
            let _ = writeln!(out, "{},{},{}", i, d, g);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Pointwise comparison of two models fit to the same observations in the
/// same order: model B minus model A.
pub fn loo_compare_pointwise<R: Real>(
    a: &[R],
    b: &[R],
    group: Option<Vec<String>>,
) -> Result<LooComparison<R>> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch { what: "loo comparison", expected: a.len(), got: b.len() });
    }
    if let Some(g) = &group {
        if g.len() != a.len() {
            return Err(Error::DimMismatch { what: "loo comparison groups", expected: a.len(), got: g.len() });
        }
    }
    let pointwise_diff: Vec<R> = a.iter().zip(b).map(|(&ai, &bi)| bi - ai).collect();
    let diff_total = pointwise_diff.iter().copied().sum();
    let diff_se = (R::of_usize(pointwise_diff.len()) * sample_var(&pointwise_diff)).sqrt();
    Ok(LooComparison { pointwise_diff, diff_total, diff_se, group })
}

pub fn loo_compare<R: Real>(
    a: &LooResult<R>,
    b: &LooResult<R>,
    group: Option<Vec<String>>,
) -> Result<LooComparison<R>> {
    loo_compare_pointwise(&a.pointwise_elpd, &b.pointwise_elpd, group)
}
