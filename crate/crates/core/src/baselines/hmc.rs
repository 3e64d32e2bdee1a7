use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use super::ChainConfig;
use crate::error::{invalid, Error, Result};
use crate::model::{Objective, Target};

fn gradient(target: &dyn Target<[f64]>, x: &[f64]) -> Result<Vec<f64>> {
    target
        .grad_log(x)
        .ok_or(Error::MissingCapability("a log-density gradient"))
}

/// `H(x, p) = -ln p̃(x) + |p|²/2`.
pub fn hamiltonian(target: &dyn Target<[f64]>, x: &[f64], p: &[f64]) -> f64 {
    -target.log_mass(x) + 0.5 * p.iter().map(|v| v * v).sum::<f64>()
}

/// `leaps` leapfrog steps of size `step` from `(x, p)`.
pub fn leapfrog(
    target: &dyn Target<[f64]>,
    x: &[f64],
    p: &[f64],
    step: f64,
    leaps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut x = x.to_vec();
    let mut p = p.to_vec();
    let mut g = gradient(target, &x)?;
    for _ in 0..leaps {
        for (pk, gk) in p.iter_mut().zip(&g) {
            *pk += 0.5 * step * gk;
        }
        for (xk, pk) in x.iter_mut().zip(&p) {
            *xk += step * pk;
        }
        g = gradient(target, &x)?;
        for (pk, gk) in p.iter_mut().zip(&g) {
            *pk += 0.5 * step * gk;
        }
    }
    Ok((x, p))
}

/// Hybrid Monte Carlo with unit mass matrix; mean of `f` over `t` states.
pub fn hmc_estimate(
    target: &dyn Target<[f64]>,
    f: &dyn Objective<[f64]>,
    t: usize,
    cfg: &ChainConfig,
    init: Vec<f64>,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if t == 0 {
        return Err(invalid("chain length must be at least 1"));
    }
    cfg.validate()?;
    let mut x = init;
    let mut sum = 0.0;
    for i in 0..cfg.burn_in + t {
        if i > 0 {
            let p: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(rng)).collect();
            let h0 = hamiltonian(target, &x, &p);
            let (x1, p1) = leapfrog(target, &x, &p, cfg.hmc_step, cfg.hmc_leaps)?;
            let h1 = hamiltonian(target, &x1, &p1);
            let u: f64 = rng.random();
            if h1.is_finite() && u.ln() < h0 - h1 {
                x = x1;
            }
        }
        if i >= cfg.burn_in {
            sum += f.eval(&x);
        }
    }
    Ok(sum / t as f64)
}
