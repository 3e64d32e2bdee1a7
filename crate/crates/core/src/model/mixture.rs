use rand::{Rng, RngCore};

use super::{FullConditionals, Gaussian, Target};
use crate::error::{invalid, Error, Result};

/// Finite mixture of diagonal Gaussians.
#[derive(Debug, Clone)]
pub struct Mixture {
    weights: Vec<f64>,
    components: Vec<Gaussian>,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let peak = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    peak + values.map(|v| (v - peak).exp()).sum::<f64>().ln()
}

impl Mixture {
    pub fn new(components: Vec<(f64, Gaussian)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyMixture);
        }
        let n = components[0].1.mean().len();
        if components.iter().any(|(_, g)| g.mean().len() != n) {
            return Err(invalid("mixture components differ in dimension"));
        }
        if components.iter().any(|(w, _)| !(*w > 0.0)) {
            return Err(invalid("mixture weights must be positive"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("mixture weights sum to {total}, not 1")));
        }
        let (weights, components) = components.into_iter().unzip();
        Ok(Self {
            weights,
            components,
        })
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, &Gaussian)> {
        self.weights.iter().copied().zip(&self.components)
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        log_sum_exp(
            self.weights
                .iter()
                .zip(&self.components)
                .map(|(w, g)| w.ln() + g.log_pdf(x)),
        )
    }

    /// Posterior component weights for coordinate `axis` given the others.
    pub fn conditional_weights(&self, x: &[f64], axis: usize) -> Vec<f64> {
        let logs: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, g)| {
                w.ln()
                    + (0..x.len())
                        .filter(|&k| k != axis)
                        .map(|k| {
                            let d = x[k] - g.mean()[k];
                            -0.5 * (2.0 * std::f64::consts::PI * g.var()[k]).ln()
                                - 0.5 * d * d / g.var()[k]
                        })
                        .sum::<f64>()
            })
            .collect();
        let lz = log_sum_exp(logs.iter().copied());
        logs.iter().map(|l| (l - lz).exp()).collect()
    }
}

impl Target<[f64]> for Mixture {
    fn dim(&self) -> usize {
        self.components[0].mean().len()
    }

    fn log_mass(&self, x: &[f64]) -> f64 {
        self.log_pdf(x)
    }

    fn log_normalizer(&self) -> Option<f64> {
        Some(0.0)
    }

    fn grad_log(&self, x: &[f64]) -> Option<Vec<f64>> {
        let logs: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, g)| w.ln() + g.log_pdf(x))
            .collect();
        let lz = log_sum_exp(logs.iter().copied());
        let mut grad = vec![0.0; x.len()];
        for (l, g) in logs.iter().zip(&self.components) {
            let r = (l - lz).exp();
            for (k, gk) in grad.iter_mut().enumerate() {
                *gk -= r * (x[k] - g.mean()[k]) / g.var()[k];
            }
        }
        Some(grad)
    }

    fn sample_exact(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.components.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        Some(self.components[pick].draw(rng))
    }

    fn conditionals(&self) -> Option<&dyn FullConditionals> {
        Some(self)
    }
}

impl FullConditionals for Mixture {
    fn sample_conditional(&self, x: &[f64], axis: usize, rng: &mut dyn RngCore) -> f64 {
        let weights = self.conditional_weights(x, axis);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        self.components[pick].sample_conditional(x, axis, rng)
    }

    fn conditional_density(&self, x: &[f64], axis: usize, value: f64) -> f64 {
        self.conditional_weights(x, axis)
            .iter()
            .zip(&self.components)
            .map(|(w, g)| w * g.conditional_density(x, axis, value))
            .sum()
    }
}

/// Mixture from `(weight, mean, diagonal variance)` triples.
pub fn make_mixture(components: &[(f64, Vec<f64>, Vec<f64>)]) -> Result<Mixture> {
    let parts = components
        .iter()
        .map(|(w, m, v)| Ok((*w, Gaussian::new(m.clone(), v.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    Mixture::new(parts)
}
