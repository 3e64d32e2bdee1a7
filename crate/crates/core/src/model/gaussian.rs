use std::f64::consts::PI;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{FullConditionals, Proposal, Target};
use crate::error::{invalid, Error, Result};

/// Normal distribution with diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: Vec<f64>,
    var: Vec<f64>,
    log_norm: f64,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() != var.len() {
            return Err(invalid(
                "mean and variance must be non-empty and equal length",
            ));
        }
        if let Some((k, v)) = var
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
        {
            return Err(Error::DegenerateCovariance(*v, k));
        }
        let log_norm = -0.5 * var.iter().map(|v| (2.0 * PI * v).ln()).sum::<f64>();
        Ok(Self {
            mean,
            var,
            log_norm,
        })
    }

    pub fn isotropic(n: usize, mean: f64, var: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Self::new(vec![mean; n], vec![var; n])
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        self.log_norm
            - 0.5
                * x.iter()
                    .zip(self.mean.iter().zip(&self.var))
                    .map(|(xi, (m, v))| (xi - m) * (xi - m) / v)
                    .sum::<f64>()
    }

    /// Differential entropy in nats.
    pub fn entropy(&self) -> f64 {
        0.5 * self
            .var
            .iter()
            .map(|v| (2.0 * PI * std::f64::consts::E * v).ln())
            .sum::<f64>()
    }

    pub fn draw(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.var)
            .map(|(m, v)| {
                let z: f64 = StandardNormal.sample(rng);
                m + v.sqrt() * z
            })
            .collect()
    }
}

impl Target<[f64]> for Gaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_mass(&self, x: &[f64]) -> f64 {
        self.log_pdf(x)
    }

    fn log_normalizer(&self) -> Option<f64> {
        Some(0.0)
    }

    fn grad_log(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(
            x.iter()
                .zip(self.mean.iter().zip(&self.var))
                .map(|(xi, (m, v))| -(xi - m) / v)
                .collect(),
        )
    }

    fn sample_exact(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        Some(self.draw(rng))
    }

    fn conditionals(&self) -> Option<&dyn FullConditionals> {
        Some(self)
    }
}

impl Proposal<[f64]> for Gaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.draw(rng)
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.log_pdf(x)
    }
}

impl FullConditionals for Gaussian {
    fn sample_conditional(&self, _x: &[f64], axis: usize, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean[axis] + self.var[axis].sqrt() * z
    }

    fn conditional_density(&self, _x: &[f64], axis: usize, value: f64) -> f64 {
        let d = value - self.mean[axis];
        (-0.5 * d * d / self.var[axis]).exp() / (2.0 * PI * self.var[axis]).sqrt()
    }
}

/// Isotropic Gaussian `N(mean·1, cov_scale·I)` in `n` dimensions. The
/// returned value serves both as target and as proposal.
pub fn make_gaussian(n: usize, mean: f64, cov_scale: f64) -> Result<Gaussian> {
    if !(cov_scale > 0.0) {
        return Err(invalid("cov_scale must be positive"));
    }
    Gaussian::isotropic(n, mean, cov_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_normal_density_at_zero() {
        let g = make_gaussian(1, 0.0, 1.0).unwrap();
        assert!((g.mass(&[0.0]) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn wide_density_at_zero() {
        let g = make_gaussian(1, 0.0, 36.0).unwrap();
        assert!((g.mass(&[0.0]) - 1.0 / (6.0 * (2.0 * PI).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn entropy_three_dims() {
        let g = make_gaussian(3, 0.0, 1.0).unwrap();
        assert!((g.entropy() - 1.5 * (2.0 * PI * std::f64::consts::E).ln()).abs() < 1e-14);
        assert!((g.entropy() - 4.2568).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(make_gaussian(2, 0.0, 0.0).is_err());
        assert!(make_gaussian(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn exact_sampler_moments() {
        let g = Gaussian::new(vec![1.0, -2.0], vec![4.0, 0.25]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let mut sum = [0.0; 2];
        let mut sq = [0.0; 2];
        for _ in 0..draws {
            let x = g.draw(&mut rng);
            for k in 0..2 {
                sum[k] += x[k];
                sq[k] += x[k] * x[k];
            }
        }
        for k in 0..2 {
            let m = sum[k] / draws as f64;
            let v = sq[k] / draws as f64 - m * m;
            let se_mean = (g.var()[k] / draws as f64).sqrt();
            let se_var = g.var()[k] * (2.0 / draws as f64).sqrt();
            assert!((m - g.mean()[k]).abs() < 5.0 * se_mean);
            assert!((v - g.var()[k]).abs() < 5.0 * se_var);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let g = Gaussian::new(vec![0.5, -1.0], vec![2.0, 3.0]).unwrap();
        let x = [0.3, 0.7];
        let grad = g.grad_log(&x).unwrap();
        for k in 0..2 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (g.log_pdf(&xp) - g.log_pdf(&xm)) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-7);
        }
    }
}
