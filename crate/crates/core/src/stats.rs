//! Small statistical helpers shared across modules.

use crate::real::Real;

pub fn mean<R: Real>(xs: &[R]) -> R {
    if xs.is_empty() {
        return R::nan();
    }
    xs.iter().copied().sum::<R>() / R::of_usize(xs.len())
}

/// Sample variance (n − 1 denominator). NaN for n < 2.
pub fn sample_var<R: Real>(xs: &[R]) -> R {
    let n = xs.len();
    if n < 2 {
        return R::nan();
    }
    let m = mean(xs);
    let ss = xs.iter().map(|&x| (x - m) * (x - m)).sum::<R>();
    ss / R::of_usize(n - 1)
}

pub fn sample_sd<R: Real>(xs: &[R]) -> R {
    sample_var(xs).sqrt()
}

/// Central moment of order k with 1/n normalization.
pub fn central_moment<R: Real>(xs: &[R], k: u32) -> R {
    let m = mean(xs);
    let n = R::of_usize(xs.len());
    xs.iter().map(|&x| (x - m).powi(k as i32)).sum::<R>() / n
}

/// Sort a copy ascending. Values must not contain NaN.
pub fn sorted<R: Real>(xs: &[R]) -> Vec<R> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Linear-interpolation quantile (R type 7) on a pre-sorted slice.
pub fn quantile_sorted<R: Real>(sorted: &[R], p: f64) -> R {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&p), "p outside [0,1]");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = R::of(pos - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn quantile<R: Real>(xs: &[R], p: f64) -> R {
    quantile_sorted(&sorted(xs), p)
}

/// Sample median with lower interpolation: element at index ⌊(n−1)/2⌋ of the
/// sorted values.
pub fn median_lower<R: Real>(xs: &[R]) -> R {
    let s = sorted(xs);
    s[(s.len() - 1) / 2]
}

/// Interquartile range via linear-interpolation quartiles.
pub fn iqr<R: Real>(xs: &[R]) -> R {
    let s = sorted(xs);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

/// log(Σ exp(x_i)) with max-shift stabilization. −inf for an empty slice.
pub fn log_sum_exp<R: Real>(xs: &[R]) -> R {
    let m = xs.iter().copied().fold(R::neg_infinity(), R::max);
    if !m.is_finite() {
        // all −inf (or empty): the sum is 0 ⇒ log is −inf; +inf propagates
        return m;
    }
    let s = xs.iter().map(|&x| (x - m).exp()).sum::<R>();
    m + s.ln()
}

/// Kolmogorov–Smirnov distance of a sample from Uniform(0, 1).
pub fn ks_distance_uniform<R: Real>(xs: &[R]) -> R {
    let s = sorted(xs);
    let n = s.len();
    let nf = R::of_usize(n);
    let mut d = R::zero();
    for (i, &u) in s.iter().enumerate() {
        let lo = (u - R::of_usize(i) / nf).abs();
        let hi = (R::of_usize(i + 1) / nf - u).abs();
        d = d.max(lo).max(hi);
    }
    d
}

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone)]
pub struct RunningVar<R: Real> {
    n: usize,
    mean: Vec<R>,
    m2: Vec<R>,
}

impl<R: Real> RunningVar<R> {
    pub fn new(dim: usize) -> Self {
        RunningVar { n: 0, mean: vec![R::zero(); dim], m2: vec![R::zero(); dim] }
    }

    pub fn push(&mut self, x: &[R]) {
        debug_assert_eq!(x.len(), self.mean.len());
        self.n += 1;
        let nf = R::of_usize(self.n);
        for ((m, s), &xi) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = xi - *m;
            *m += d / nf;
            *s += d * (xi - *m);
        }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    /// Sample variances (n − 1). Zeros when fewer than two observations.
    pub fn variances(&self) -> Vec<R> {
        if self.n < 2 {
            return vec![R::zero(); self.mean.len()];
        }
        let d = R::of_usize(self.n - 1);
        self.m2.iter().map(|&s| s / d).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantile_linear_midpoint() {
        // median of {1, 3} interpolates to 2
        assert_relative_eq!(quantile(&[1.0, 3.0], 0.5), 2.0);
        assert_relative_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.25), 1.75);
    }

    #[test]
    fn median_lower_picks_lower_of_even() {
        assert_eq!(median_lower(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_lower(&[4.0, 1.0, 3.0, 2.0]), 2.0);
    }

    #[test]
    fn log_sum_exp_matches_naive() {
        let xs = [0.1f64, -2.0, 3.5, 1.0];
        let naive: f64 = xs.iter().map(|x| f64::exp(*x)).sum::<f64>().ln();
        assert_relative_eq!(log_sum_exp(&xs), naive, epsilon = 1e-12);
        // large shifts do not overflow
        let big = [1000.0, 1000.0];
        assert_relative_eq!(log_sum_exp(&big), 1000.0 + 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn running_var_matches_direct() {
        let xs = [[1.0, -1.0], [2.0, 0.5], [4.0, 2.0], [0.0, 1.5]];
        let mut acc = RunningVar::new(2);
        for x in &xs {
            acc.push(x);
        }
        let col0: Vec<f64> = xs.iter().map(|r| r[0]).collect();
        let col1: Vec<f64> = xs.iter().map(|r| r[1]).collect();
        let v = acc.variances();
        assert_relative_eq!(v[0], sample_var(&col0), epsilon = 1e-12);
        assert_relative_eq!(v[1], sample_var(&col1), epsilon = 1e-12);
    }

    #[test]
    fn ks_distance_of_perfect_grid_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!(ks_distance_uniform(&xs) < 1e-3);
    }
}
