//! Analytic targets with known moments, used for sampler validation.

use crate::real::Real;

use super::Target;

/// Product of independent zero-mean Gaussians with fixed scales.
#[derive(Debug, Clone)]
pub struct DiagGaussian<R: Real> {
    pub sds: Vec<R>,
}

impl<R: Real> DiagGaussian<R> {
    pub fn standard(dim: usize) -> Self {
        DiagGaussian { sds: vec![R::one(); dim] }
    }
}

impl<R: Real> Target<R> for DiagGaussian<R> {
    fn dim(&self) -> usize {
        self.sds.len()
    }

    fn logp_grad(&self, position: &[R], grad: &mut [R]) -> R {
        let half = R::of(0.5);
        let mut lp = R::zero();
        for ((&q, &s), g) in position.iter().zip(&self.sds).zip(grad.iter_mut()) {
            let inv_var = R::one() / (s * s);
            lp -= half * q * q * inv_var;
            *g = -q * inv_var;
        }
        lp
    }

    fn name(&self) -> String {
        format!("diag_gaussian_{}d", self.sds.len())
    }

    fn constrained_names(&self) -> Vec<String> {
        (0..self.sds.len()).map(|i| format!("x[{i}]")).collect()
    }

    fn constrain_into(&self, position: &[R], out: &mut Vec<R>) {
        out.clear();
        out.extend_from_slice(position);
    }
}
