//! Scalar random-walk state-space model:
//! `X_1 ~ N(0, σ_s²)`, `X_t | X_{t-1} ~ N(x_{t-1}, σ_s²)`, `Z_t | X_t ~ N(x_t, σ_o²)`.

use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::auxweight::SearchConfig;
use crate::error::{invalid, Error, Result};
use crate::estimators::{gis_estimate_continuous, EstimateReport, WeightMode};
use crate::model::{Proposal, Target};

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanModel {
    pub sigma_s: f64,
    pub sigma_o: f64,
    pub observations: Vec<f64>,
}

fn log_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - 0.5 * (x - mean) * (x - mean) / var
}

impl KalmanModel {
    pub fn new(sigma_s: f64, sigma_o: f64, observations: Vec<f64>) -> Result<Self> {
        if !(sigma_s > 0.0) || !(sigma_o > 0.0) {
            return Err(invalid("noise scales must be positive"));
        }
        if observations.is_empty() {
            return Err(invalid("need at least one observation"));
        }
        Ok(Self {
            sigma_s,
            sigma_o,
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Simulate `(states, observations)` from the generative model.
    pub fn simulate(
        sigma_s: f64,
        sigma_o: f64,
        t: usize,
        rng: &mut dyn RngCore,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut x = 0.0;
        let mut states = Vec::with_capacity(t);
        let mut obs = Vec::with_capacity(t);
        for _ in 0..t {
            let a: f64 = StandardNormal.sample(rng);
            x += sigma_s * a;
            let b: f64 = StandardNormal.sample(rng);
            states.push(x);
            obs.push(x + sigma_o * b);
        }
        (states, obs)
    }

    /// Filtering recursion: `(mean, variance)` after each observation, and
    /// the log evidence `ln p(z_1..z_t)`.
    fn filter(&self) -> (Vec<(f64, f64)>, f64) {
        let (qs, qo) = (self.sigma_s * self.sigma_s, self.sigma_o * self.sigma_o);
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut log_ev = 0.0;
        let mut out = Vec::with_capacity(self.len());
        for &z in &self.observations {
            var += qs;
            log_ev += log_normal(z, mean, var + qo);
            let gain = var / (var + qo);
            mean += gain * (z - mean);
            var *= 1.0 - gain;
            out.push((mean, var));
        }
        (out, log_ev)
    }

    pub fn log_evidence(&self) -> f64 {
        self.filter().1
    }
}

/// Exact posterior `(mean, variance)` of the final state given all
/// observations.
pub fn kalman_posterior(model: &KalmanModel) -> Result<(f64, f64)> {
    if model.is_empty() {
        return Err(invalid("need at least one observation"));
    }
    let (steps, _) = model.filter();
    Ok(*steps.last().expect("non-empty"))
}

/// Unnormalized posterior over the whole state trajectory:
/// prior × observation likelihood. The normalizer is the evidence.
#[derive(Debug, Clone)]
pub struct KalmanJoint {
    model: KalmanModel,
    log_z: f64,
}

impl KalmanJoint {
    pub fn new(model: KalmanModel) -> Self {
        let log_z = model.log_evidence();
        Self { model, log_z }
    }

    pub fn model(&self) -> &KalmanModel {
        &self.model
    }
}

impl Target<[f64]> for KalmanJoint {
    fn dim(&self) -> usize {
        self.model.len()
    }

    fn log_mass(&self, x: &[f64]) -> f64 {
        let m = &self.model;
        let (qs, qo) = (m.sigma_s * m.sigma_s, m.sigma_o * m.sigma_o);
        let mut prev = 0.0;
        let mut total = 0.0;
        for (xk, zk) in x.iter().zip(&m.observations) {
            total += log_normal(*xk, prev, qs) + log_normal(*zk, *xk, qo);
            prev = *xk;
        }
        total
    }

    fn log_normalizer(&self) -> Option<f64> {
        Some(self.log_z)
    }

    fn grad_log(&self, x: &[f64]) -> Option<Vec<f64>> {
        let m = &self.model;
        let (qs, qo) = (m.sigma_s * m.sigma_s, m.sigma_o * m.sigma_o);
        let t = x.len();
        Some(
            (0..t)
                .map(|k| {
                    let prev = if k == 0 { 0.0 } else { x[k - 1] };
                    let mut g = -(x[k] - prev) / qs + (m.observations[k] - x[k]) / qo;
                    if k + 1 < t {
                        g += (x[k + 1] - x[k]) / qs;
                    }
                    g
                })
                .collect(),
        )
    }
}

/// The state prior, used as the proposal (likelihood weighting).
#[derive(Debug, Clone)]
pub struct KalmanPrior {
    sigma_s: f64,
    t: usize,
}

impl KalmanPrior {
    pub fn new(model: &KalmanModel) -> Self {
        Self {
            sigma_s: model.sigma_s,
            t: model.len(),
        }
    }
}

impl Proposal<[f64]> for KalmanPrior {
    fn dim(&self) -> usize {
        self.t
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut x = 0.0;
        (0..self.t)
            .map(|_| {
                let a: f64 = StandardNormal.sample(rng);
                x += self.sigma_s * a;
                x
            })
            .collect()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let qs = self.sigma_s * self.sigma_s;
        let mut prev = 0.0;
        x.iter()
            .map(|xk| {
                let v = log_normal(*xk, prev, qs);
                prev = *xk;
                v
            })
            .sum()
    }
}

/// Bootstrap particle filter estimate of `E[x_t | z_1..z_t]`: propagate by
/// the transition, weight by the observation likelihood, resample
/// multinomially after every step.
pub fn particle_filter_estimate(
    model: &KalmanModel,
    n_particles: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if n_particles == 0 {
        return Err(invalid("need at least one particle"));
    }
    let qo = model.sigma_o * model.sigma_o;
    let mut particles = vec![0.0f64; n_particles];
    let mut weights = vec![0.0f64; n_particles];
    let mut cdf = vec![0.0f64; n_particles];
    let mut estimate = 0.0;
    for (step, &z) in model.observations.iter().enumerate() {
        for p in particles.iter_mut() {
            let a: f64 = StandardNormal.sample(rng);
            *p += model.sigma_s * a;
        }
        let logs: Vec<f64> = particles.iter().map(|p| log_normal(z, *p, qo)).collect();
        let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::NoUsableMass);
        }
        let mut total = 0.0;
        for (w, l) in weights.iter_mut().zip(&logs) {
            *w = (l - peak).exp();
            total += *w;
        }
        if total == 0.0 {
            return Err(Error::NoUsableMass);
        }
        if step + 1 == model.len() {
            estimate = particles
                .iter()
                .zip(&weights)
                .map(|(p, w)| p * w)
                .sum::<f64>()
                / total;
            break;
        }
        let mut acc = 0.0;
        for (c, w) in cdf.iter_mut().zip(&weights) {
            acc += w / total;
            *c = acc;
        }
        let old = particles.clone();
        for p in particles.iter_mut() {
            let u: f64 = rng.random();
            let idx = cdf.partition_point(|c| *c <= u).min(n_particles - 1);
            *p = old[idx];
        }
    }
    Ok(estimate)
}

/// Indirect greedy importance sampling over the joint state trajectory
/// with the prior as proposal and `f` = final state.
pub fn gis_dynamic_estimate(
    model: &KalmanModel,
    cfg: &SearchConfig,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<EstimateReport> {
    let target = KalmanJoint::new(model.clone());
    let prior = KalmanPrior::new(model);
    let last = model.len() - 1;
    let f = move |x: &[f64]| x[last];
    gis_estimate_continuous(&target, &prior, &f, cfg, n, rng, WeightMode::Indirect)
}
