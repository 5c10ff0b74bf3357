//! Simple least-squares line fits for exploratory analysis.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::stats::mean;

/// Least-squares line and R² = 1 − SS_res/SS_tot. A perfectly constant
/// response is reported as R² = 1 (the line is exact).
pub fn ols_fit<R: Real>(x: &[R], y: &[R]) -> Result<(R, R, R)> {
    if x.len() != y.len() {
        return Err(Error::DimMismatch { what: "ols inputs", expected: x.len(), got: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::invalid("ols_fit needs at least 3 points"));
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == R::zero() {
        return Err(Error::invalid("ols_fit needs variation in x"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = R::zero();
    let mut ss_tot = R::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - intercept - slope * xi;
        ss_res += r * r;
        ss_tot += (yi - my) * (yi - my);
    }
    let r2 = if ss_tot == R::zero() { R::one() } else { R::one() - ss_res / ss_tot };
    Ok((intercept, slope, r2))
}
