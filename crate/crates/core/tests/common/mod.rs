//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use greedy_is::auxweight::SearchConfig;
use greedy_is::estimators::{lattice_blocks, weighted_block, WeightMode};
use greedy_is::model::{GridDistribution, GridDomain, GridPoint, Objective, Target};
use greedy_is::search::Block;

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// Posterior `(mean, var)` of the last state of the random-walk model by
/// sequential filtering on a fixed 1-D grid (trapezoid rule throughout).
pub fn kalman_grid_posterior(sigma_s: f64, sigma_o: f64, obs: &[f64]) -> (f64, f64) {
    let (lo, hi, nodes) = (-15.0, 15.0, 2001usize);
    let h = (hi - lo) / (nodes - 1) as f64;
    let xs: Vec<f64> = (0..nodes).map(|i| lo + i as f64 * h).collect();
    let trap = |i: usize| if i == 0 || i == nodes - 1 { 0.5 * h } else { h };
    let (qs, qo) = (sigma_s * sigma_s, sigma_o * sigma_o);
    let mut dens: Vec<f64> = xs.iter().map(|&x| normal_pdf(x, 0.0, qs)).collect();
    for (k, &z) in obs.iter().enumerate() {
        if k > 0 {
            dens = xs
                .iter()
                .map(|&x| {
                    (0..nodes)
                        .map(|j| trap(j) * dens[j] * normal_pdf(x, xs[j], qs))
                        .sum()
                })
                .collect();
        }
        for (d, &x) in dens.iter_mut().zip(&xs) {
            *d *= normal_pdf(z, x, qo);
        }
        let z: f64 = (0..nodes).map(|i| trap(i) * dens[i]).sum();
        dens.iter_mut().for_each(|d| *d /= z);
    }
    let mean: f64 = (0..nodes).map(|i| trap(i) * dens[i] * xs[i]).sum();
    let var: f64 = (0..nodes)
        .map(|i| trap(i) * dens[i] * (xs[i] - mean).powi(2))
        .sum();
    (mean, var)
}

/// Composite Simpson rule on `[lo, hi]²` with an even number of cells.
pub fn simpson_2d(g: impl Fn(f64, f64) -> f64, lo: f64, hi: f64, cells: usize) -> f64 {
    assert!(cells.is_multiple_of(2));
    let h = (hi - lo) / cells as f64;
    let w = |i: usize| match i {
        0 => 1.0,
        i if i == cells => 1.0,
        i if i % 2 == 1 => 4.0,
        _ => 2.0,
    };
    let mut total = 0.0;
    for i in 0..=cells {
        for j in 0..=cells {
            total += w(i) * w(j) * g(lo + i as f64 * h, lo + j as f64 * h);
        }
    }
    total * h * h / 9.0
}

/// Entropy of the equal mixture of `N((0,0), I)` and `N((16,16), I)`.
pub fn separated_mixture_entropy() -> f64 {
    let p = |x: f64, y: f64| {
        0.5 * (normal_pdf(x, 0.0, 1.0) * normal_pdf(y, 0.0, 1.0)
            + normal_pdf(x, 16.0, 1.0) * normal_pdf(y, 16.0, 1.0))
    };
    simpson_2d(
        |x, y| {
            let v = p(x, y);
            if v > 0.0 {
                -v * v.ln()
            } else {
                0.0
            }
        },
        -10.0,
        26.0,
        1440,
    )
}

/// Midpoint-rule integral over starts in `[-half, half]^n` of
/// `Σ_j α_j p(x_j) f(x_j)` and of `Σ_j α_j p(x_j)`. Both equal the plain
/// integrals of `p f` and `p` when the α-weights preserve measure.
pub fn lattice_start_integrals(
    target: &dyn Target<[f64]>,
    f: &dyn Objective<[f64]>,
    cfg: SearchConfig,
    half: f64,
    h: f64,
) -> (f64, f64) {
    let n = target.dim();
    let log_z = target.log_normalizer().expect("normalized target");
    let blocks = lattice_blocks(target, f, cfg);
    let cells = (2.0 * half / h).round() as usize;
    let mut idx = vec![0usize; n];
    let (mut with_f, mut mass) = (0.0, 0.0);
    'outer: loop {
        let x: Vec<f64> = idx.iter().map(|&i| -half + (i as f64 + 0.5) * h).collect();
        for (pt, a) in blocks(&x).unwrap() {
            let p = (target.log_mass(&pt) - log_z).exp();
            with_f += a * p * f.eval(&pt);
            mass += a * p;
        }
        for i in idx.iter_mut() {
            *i += 1;
            if *i < cells {
                continue 'outer;
            }
            *i = 0;
        }
        break;
    }
    let vol = h.powi(n as i32);
    (with_f * vol, mass * vol)
}

/// `E_Q[direct GIS estimate from one start]` by enumerating every start.
pub fn enumerated_direct_gis(
    domain: &GridDomain,
    p: &GridDistribution,
    q: &GridDistribution,
    f: &dyn Objective<GridPoint>,
    cfg: SearchConfig,
) -> f64 {
    let blocks = greedy_is::estimators::grid_blocks(domain, p, f, cfg);
    domain
        .points()
        .map(|x| {
            let wb = weighted_block(p, q, &blocks, &x, 0, WeightMode::Direct).unwrap();
            q.pmf(&x) * wb.iter().map(|w| w.weight * f.eval(&w.point)).sum::<f64>()
        })
        .sum()
}

/// Strict ascent, distinct points, length at most `m`.
pub fn block_is_valid<P: PartialEq>(block: &Block<P>, m: usize) -> bool {
    let ascent = block.scores.windows(2).all(|w| w[1] > w[0]);
    let distinct = block
        .points
        .iter()
        .enumerate()
        .all(|(i, a)| block.points[..i].iter().all(|b| b != a));
    ascent && distinct && !block.is_empty() && block.len() <= m
}

/// Unnormalized 1-D target with many local maxima.
pub struct Bumpy;

impl Target<[f64]> for Bumpy {
    fn dim(&self) -> usize {
        1
    }

    fn log_mass(&self, x: &[f64]) -> f64 {
        (3.0 * x[0]).sin() + 0.5 * (7.3 * x[0] + 1.0).sin()
    }
}

/// Largest |z| over sub-ε bins of the α-weighted pushforward of uniform
/// starts on `[0, len]`, restricted to bins at least `m·ε` from the ends.
pub fn pushforward_max_z(
    starts: usize,
    len: f64,
    bin: f64,
    cfg: SearchConfig,
    rng: &mut impl rand::Rng,
) -> (f64, usize) {
    let one = |_: &[f64]| 1.0;
    let blocks = lattice_blocks(&Bumpy, &one, cfg);
    let margin = cfg.m as f64 * cfg.eps;
    let bins = ((len - 2.0 * margin) / bin).round() as usize;
    let mut sum = vec![0.0; bins];
    let mut sum_sq = vec![0.0; bins];
    let mut hit = vec![0.0; bins];
    let mut touched = Vec::new();
    for _ in 0..starts {
        let x = [rng.random::<f64>() * len];
        for (pt, a) in blocks(&x).unwrap() {
            let u = (pt[0] - margin) / bin;
            if u >= 0.0 && (u as usize) < bins {
                let k = u as usize;
                if hit[k] == 0.0 {
                    touched.push(k);
                }
                hit[k] += a;
            }
        }
        for k in touched.drain(..) {
            sum[k] += hit[k];
            sum_sq[k] += hit[k] * hit[k];
            hit[k] = 0.0;
        }
    }
    let n = starts as f64;
    let expected = bin / len;
    let worst = (0..bins)
        .map(|k| {
            let mean = sum[k] / n;
            let var = sum_sq[k] / n - mean * mean;
            (mean - expected).abs() / (var / n).sqrt()
        })
        .fold(0.0, f64::max);
    (worst, bins)
}
