use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use super::ChainConfig;
use crate::error::{invalid, Result};
use crate::model::{GridDomain, GridPoint, Objective, Target};

fn accept(rng: &mut dyn RngCore, log_ratio: f64) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    let u: f64 = rng.random();
    u.ln() < log_ratio
}

/// Metropolis on a grid with a uniform proposal over the `2n` axis
/// neighbors. Moves off the grid are proposed and rejected, so the
/// proposal stays symmetric at the boundary.
pub fn metropolis_grid_estimate(
    domain: &GridDomain,
    target: &dyn Target<GridPoint>,
    f: &dyn Objective<GridPoint>,
    t: usize,
    cfg: &ChainConfig,
    init: GridPoint,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if t == 0 {
        return Err(invalid("chain length must be at least 1"));
    }
    if !domain.contains(&init) {
        return Err(invalid(format!("chain start {init} is off the grid")));
    }
    let n = domain.dim();
    let mut x = init;
    let mut lp = target.log_mass(&x);
    let mut sum = 0.0;
    for i in 0..cfg.burn_in + t {
        if i > 0 {
            let dir = rng.random_range(0..2 * n);
            let mut y = x.clone();
            y.coords[dir / 2] += if dir % 2 == 0 { -1 } else { 1 };
            if domain.contains(&y) {
                let ly = target.log_mass(&y);
                if accept(rng, ly - lp) {
                    x = y;
                    lp = ly;
                }
            }
        }
        if i >= cfg.burn_in {
            sum += f.eval(&x);
        }
    }
    Ok(sum / t as f64)
}

/// Random-walk Metropolis with proposal `N(x, proposal_var·I)`.
pub fn metropolis_estimate(
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
    let scale = cfg.proposal_var.sqrt();
    let mut x = init;
    let mut lp = target.log_mass(&x);
    let mut y = x.clone();
    let mut sum = 0.0;
    for i in 0..cfg.burn_in + t {
        if i > 0 {
            for (yk, xk) in y.iter_mut().zip(&x) {
                let z: f64 = StandardNormal.sample(rng);
                *yk = xk + scale * z;
            }
            let ly = target.log_mass(&y);
            if accept(rng, ly - lp) {
                std::mem::swap(&mut x, &mut y);
                lp = ly;
            }
        }
        if i >= cfg.burn_in {
            sum += f.eval(&x);
        }
    }
    Ok(sum / t as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_gaussian, GridDistribution};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Mutex;

    #[test]
    fn uphill_always_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert!(accept(&mut rng, 0.0));
            assert!(accept(&mut rng, 3.0));
        }
    }

    /// Runs a grid chain and returns the visited states in order.
    fn trace(
        d: &GridDomain,
        p: &GridDistribution,
        steps: usize,
        init: i64,
        rng: &mut ChaCha8Rng,
    ) -> Vec<i64> {
        let states = Mutex::new(Vec::with_capacity(steps));
        let f = |x: &GridPoint| {
            states.lock().unwrap().push(x.coords[0]);
            0.0
        };
        let cfg = ChainConfig::default();
        metropolis_grid_estimate(d, p, &f, steps, &cfg, GridPoint::new(vec![init]), rng).unwrap();
        states.into_inner().unwrap()
    }

    #[test]
    fn flat_target_accepts_everything() {
        let d = GridDomain::cube(1, -1000, 1000).unwrap();
        let flat = GridDistribution::from_weights(d.clone(), &vec![1.0; d.len()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pos = trace(&d, &flat, 200, 0, &mut rng);
        assert!(pos.windows(2).all(|w| (w[0] - w[1]).abs() == 1));
    }

    #[test]
    fn detailed_balance_on_five_points() {
        let d = GridDomain::cube(1, 0, 4).unwrap();
        let weights = [1.0, 3.0, 2.0, 5.0, 4.0];
        let p = GridDistribution::from_weights(d.clone(), &weights).unwrap();
        let steps = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let states = trace(&d, &p, steps, 2, &mut rng);
        // Batch-means standard error accounts for autocorrelation.
        let batches = 100;
        let len = steps / batches;
        for (k, w) in weights.iter().enumerate() {
            let pk = w / 15.0;
            let means: Vec<f64> = states
                .chunks(len)
                .map(|c| c.iter().filter(|s| **s == k as i64).count() as f64 / len as f64)
                .collect();
            let frac = means.iter().sum::<f64>() / batches as f64;
            let var = means.iter().map(|m| (m - frac).powi(2)).sum::<f64>() / (batches - 1) as f64;
            let se = (var / batches as f64).sqrt();
            assert!(
                (frac - pk).abs() < 4.0 * se,
                "state {k}: {frac} vs {pk} (se {se})"
            );
        }
    }

    #[test]
    fn continuous_chain_centres_on_target() {
        let g = make_gaussian(1, 2.0, 1.0).unwrap();
        let f = |x: &[f64]| x[0];
        let cfg = ChainConfig {
            burn_in: 500,
            ..ChainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = metropolis_estimate(&g, &f, 200_000, &cfg, vec![0.0], &mut rng).unwrap();
        assert!((m - 2.0).abs() < 0.05, "{m}");
    }
}
