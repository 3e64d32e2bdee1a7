use rand::RngCore;

use super::ChainConfig;
use crate::error::{invalid, Error, Result};
use crate::model::{Objective, Target};

/// Systematic-scan Gibbs sampling; mean of `f` over `t` sweeps (the start
/// counts as the first state).
pub fn gibbs_estimate(
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
    let cond = target
        .conditionals()
        .ok_or(Error::MissingCapability("full conditionals"))?;
    let mut x = init;
    let mut sum = 0.0;
    for i in 0..cfg.burn_in + t {
        if i > 0 {
            for axis in 0..x.len() {
                x[axis] = cond.sample_conditional(&x, axis, rng);
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
    use crate::model::{make_gaussian, make_mixture, FullConditionals};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let inner: f64 = (1..n).map(|i| f(lo + i as f64 * h)).sum();
        h * (0.5 * (f(lo) + f(hi)) + inner)
    }

    #[test]
    fn isotropic_conditionals_ignore_other_axis() {
        let g = make_gaussian(2, 0.0, 1.0).unwrap();
        let c = g.conditionals().unwrap();
        for other in [-3.0, 0.0, 5.0] {
            let d = c.conditional_density(&[0.0, other], 0, 0.7);
            assert!((d - (-0.245f64).exp() / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn conditionals_integrate_to_one() {
        let m = make_mixture(&[
            (0.5, vec![0.0, 0.0], vec![1.0, 1.0]),
            (0.5, vec![16.0, 16.0], vec![1.0, 1.0]),
        ])
        .unwrap();
        for y in [0.0, 7.9, 8.0, 12.0, 16.0] {
            for axis in 0..2 {
                let x = [y, y];
                let total = trapezoid(|v| m.conditional_density(&x, axis, v), -30.0, 46.0, 20_000);
                assert!((total - 1.0).abs() < 1e-6, "y={y} axis={axis}: {total}");
            }
        }
    }

    #[test]
    fn mixture_conditional_weight_checked_by_quadrature() {
        // Component weight of the conditional of x given y, as the ratio of
        // the component's joint mass on the line y = const to the mixture's.
        let m = make_mixture(&[
            (0.5, vec![0.0, 0.0], vec![1.0, 1.0]),
            (0.5, vec![16.0, 16.0], vec![1.0, 1.0]),
        ])
        .unwrap();
        let parts: Vec<_> = m.components().map(|(w, g)| (w, g.clone())).collect();
        for y in [0.0, 4.0, 8.0, 11.0] {
            let line = |c: usize| {
                trapezoid(
                    |v| parts[c].0 * parts[c].1.log_pdf(&[v, y]).exp(),
                    -30.0,
                    46.0,
                    20_000,
                )
            };
            let (a, b) = (line(0), line(1));
            let w = m.conditional_weights(&[0.0, y], 0);
            assert!((w[1] / w[0] - b / a).abs() <= 1e-6 * (b / a), "y={y}");
        }
        // At y = 0 the near mode dominates: ratio exp(-128).
        let w = m.conditional_weights(&[0.0, 0.0], 0);
        assert!(w[0] > 1.0 - 1e-12);
        assert!((w[1] / w[0] / (-128.0f64).exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn chain_needs_conditionals() {
        struct Bare;
        impl Target<[f64]> for Bare {
            fn dim(&self) -> usize {
                1
            }
            fn log_mass(&self, _: &[f64]) -> f64 {
                0.0
            }
        }
        let f = |x: &[f64]| x[0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = ChainConfig::default();
        assert!(matches!(
            gibbs_estimate(&Bare, &f, 5, &cfg, vec![0.0], &mut rng),
            Err(Error::MissingCapability(_))
        ));
    }

    #[test]
    fn gaussian_gibbs_mean() {
        let g = make_gaussian(3, 1.5, 2.0).unwrap();
        let f = |x: &[f64]| x.iter().sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cfg = ChainConfig::default();
        let t = 50_000;
        let m = gibbs_estimate(&g, &f, t, &cfg, vec![0.0; 3], &mut rng).unwrap();
        let se = (6.0 / t as f64).sqrt();
        assert!((m - 4.5).abs() < 5.0 * se, "{m}");
    }
}
