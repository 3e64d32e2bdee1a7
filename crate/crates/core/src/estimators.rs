//! Importance sampling estimators: plain, indirect (self-normalized),
//! generalized block sampling, and greedy importance sampling on grids and
//! on ε-lattices.

use std::borrow::Borrow;

use rand::RngCore;

use crate::auxweight::{weigh_block, SearchConfig};
use crate::error::{Error, Result};
use crate::model::{GridDomain, GridPoint, Objective, Proposal, Target};
use crate::search::{GridWalk, LatticeWalk};

/// Direct weights `P(x)/Q(x)` need the exact normalizer; indirect weights
/// `c·P(x)/Q(x)` use the unnormalized mass and are self-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Direct,
    #[default]
    Indirect,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "indirect" => Ok(Self::Indirect),
            other => Err(Error::Parse(format!("weight mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint<P> {
    pub point: P,
    pub weight: f64,
    pub block_id: usize,
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub estimate: f64,
    pub n_starts: usize,
    pub n_points: usize,
    pub sum_weights: f64,
    /// `(Σw)² / Σw²`.
    pub effective_sample_size: f64,
}

/// Running sums over a weighted sample, accumulated in block order.
#[derive(Debug, Default, Clone, Copy)]
struct Accumulator {
    sum_fw: f64,
    sum_w: f64,
    sum_w2: f64,
    n_points: usize,
}

impl Accumulator {
    fn push(&mut self, fx: f64, w: f64) {
        self.sum_fw += fx * w;
        self.sum_w += w;
        self.sum_w2 += w * w;
        self.n_points += 1;
    }

    fn finish(self, n_starts: usize, mode: WeightMode) -> Result<EstimateReport> {
        let estimate = match mode {
            WeightMode::Direct => self.sum_fw / n_starts as f64,
            WeightMode::Indirect => {
                if self.sum_w == 0.0 {
                    return Err(Error::NoUsableMass);
                }
                self.sum_fw / self.sum_w
            }
        };
        let ess = if self.sum_w2 > 0.0 {
            self.sum_w * self.sum_w / self.sum_w2
        } else {
            0.0
        };
        Ok(EstimateReport {
            estimate,
            n_starts,
            n_points: self.n_points,
            sum_weights: self.sum_w,
            effective_sample_size: ess,
        })
    }
}

fn log_target<P: ?Sized + ToOwned>(target: &dyn Target<P>, mode: WeightMode, x: &P) -> Result<f64> {
    let lm = target.log_mass(x);
    match mode {
        WeightMode::Direct => Ok(lm - target.log_normalizer().ok_or(Error::MissingNormalizer)?),
        WeightMode::Indirect => Ok(lm),
    }
}

fn proposal_log_density<P>(proposal: &dyn Proposal<P>, x: &P) -> Result<f64>
where
    P: ?Sized + ToOwned + std::fmt::Debug,
{
    let lq = proposal.log_density(x);
    if lq == f64::NEG_INFINITY || lq.is_nan() {
        return Err(Error::ZeroProposalMass {
            at: format!("{x:?}"),
        });
    }
    Ok(lq)
}

fn checked_weight<P: ?Sized + std::fmt::Debug>(w: f64, x: &P) -> Result<f64> {
    if !w.is_finite() || w < 0.0 {
        return Err(Error::NonFiniteWeight {
            weight: w,
            at: format!("{x:?}"),
        });
    }
    Ok(w)
}

/// Plain importance sampling: `(1/n) Σ f(x_i) P(x_i)/Q(x_i)` in direct mode,
/// `Σ f u / Σ u` in indirect mode.
pub fn is_estimate<P>(
    target: &dyn Target<P>,
    proposal: &dyn Proposal<P>,
    f: &dyn Objective<P>,
    n: usize,
    rng: &mut dyn RngCore,
    mode: WeightMode,
) -> Result<EstimateReport>
where
    P: ?Sized + ToOwned + std::fmt::Debug,
{
    if n == 0 {
        return Err(crate::error::invalid("sample size must be at least 1"));
    }
    if mode == WeightMode::Direct && target.log_normalizer().is_none() {
        return Err(Error::MissingNormalizer);
    }
    let mut acc = Accumulator::default();
    for _ in 0..n {
        let owned = proposal.sample(rng);
        let x: &P = owned.borrow();
        let lq = proposal_log_density(proposal, x)?;
        let w = checked_weight((log_target(target, mode, x)? - lq).exp(), x)?;
        let fx = if w > 0.0 { f.eval(x) } else { 0.0 };
        acc.push(fx, w);
    }
    acc.finish(n, mode)
}

/// Self-normalized estimate `Σ f·u / Σ u` from `(f(x), u(x))` pairs.
pub fn indirect_estimate(sample: impl IntoIterator<Item = (f64, f64)>) -> Result<f64> {
    let (num, den) = sample
        .into_iter()
        .fold((0.0, 0.0), |(n, d), (fx, u)| (n + fx * u, d + u));
    if den == 0.0 {
        return Err(Error::NoUsableMass);
    }
    Ok(num / den)
}

/// One sampled block: points with their auxiliary weights.
pub type AlphaBlock<O> = Vec<(O, f64)>;

/// Generalized (block) importance sampling. `blocks` maps a start to its
/// deterministic block as `(point, α)` pairs. Each point is weighted
/// `P(x_j)/Q(x_i)·α_ij`.
pub fn generalized_is<P, B>(
    target: &dyn Target<P>,
    proposal: &dyn Proposal<P>,
    f: &dyn Objective<P>,
    blocks: B,
    n: usize,
    rng: &mut dyn RngCore,
    mode: WeightMode,
) -> Result<EstimateReport>
where
    P: ?Sized + ToOwned + std::fmt::Debug,
    B: Fn(&P) -> Result<AlphaBlock<P::Owned>>,
{
    if n == 0 {
        return Err(crate::error::invalid("sample size must be at least 1"));
    }
    if mode == WeightMode::Direct && target.log_normalizer().is_none() {
        return Err(Error::MissingNormalizer);
    }
    let mut acc = Accumulator::default();
    for _ in 0..n {
        let owned = proposal.sample(rng);
        let start: &P = owned.borrow();
        let lq = proposal_log_density(proposal, start)?;
        for (point, a) in blocks(start)? {
            let x: &P = point.borrow();
            let w = checked_weight((log_target(target, mode, x)? - lq).exp() * a, x)?;
            let fx = if w > 0.0 { f.eval(x) } else { 0.0 };
            acc.push(fx, w);
        }
    }
    acc.finish(n, mode)
}

/// Weighted sample of one block, for inspection and enumeration oracles.
pub fn weighted_block<P, B>(
    target: &dyn Target<P>,
    proposal: &dyn Proposal<P>,
    blocks: B,
    start: &P,
    block_id: usize,
    mode: WeightMode,
) -> Result<Vec<WeightedPoint<P::Owned>>>
where
    P: ?Sized + ToOwned + std::fmt::Debug,
    B: Fn(&P) -> Result<AlphaBlock<P::Owned>>,
{
    let lq = proposal_log_density(proposal, start)?;
    blocks(start)?
        .into_iter()
        .enumerate()
        .map(|(depth, (point, a))| {
            let x: &P = point.borrow();
            let weight = checked_weight((log_target(target, mode, x)? - lq).exp() * a, x)?;
            Ok(WeightedPoint {
                point,
                weight,
                block_id,
                depth,
            })
        })
        .collect()
}

/// Singleton blocks with α = 1; [`generalized_is`] then equals plain IS.
pub fn singleton_blocks<P: ?Sized + ToOwned>(x: &P) -> Result<AlphaBlock<P::Owned>> {
    Ok(vec![(x.to_owned(), 1.0)])
}

/// Greedy block function on a grid.
pub fn grid_blocks<'a>(
    domain: &'a GridDomain,
    target: &'a dyn Target<GridPoint>,
    f: &'a dyn Objective<GridPoint>,
    cfg: SearchConfig,
) -> impl Fn(&GridPoint) -> Result<AlphaBlock<GridPoint>> + 'a {
    move |start: &GridPoint| {
        let walk = GridWalk::new(domain, target, f);
        let wb = weigh_block(&walk, start.clone(), &cfg)?;
        Ok(wb.block.points.into_iter().zip(wb.alphas).collect())
    }
}

/// Greedy block function on the ε-lattice anchored at each start.
pub fn lattice_blocks<'a>(
    target: &'a dyn Target<[f64]>,
    f: &'a dyn Objective<[f64]>,
    cfg: SearchConfig,
) -> impl Fn(&[f64]) -> Result<AlphaBlock<Vec<f64>>> + 'a {
    move |start: &[f64]| {
        let walk = LatticeWalk::new(target, f);
        let origin = crate::model::LatticePoint::origin(start.into(), cfg.eps);
        let wb = weigh_block(&walk, origin, &cfg)?;
        Ok(wb
            .block
            .points
            .iter()
            .map(|p| p.coords())
            .zip(wb.alphas)
            .collect())
    }
}

/// Greedy importance sampling on a grid.
#[allow(clippy::too_many_arguments)]
pub fn gis_estimate_grid(
    domain: &GridDomain,
    target: &dyn Target<GridPoint>,
    proposal: &dyn Proposal<GridPoint>,
    f: &dyn Objective<GridPoint>,
    cfg: &SearchConfig,
    n: usize,
    rng: &mut dyn RngCore,
    mode: WeightMode,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let blocks = grid_blocks(domain, target, f, *cfg);
    generalized_is(target, proposal, f, blocks, n, rng, mode)
}

/// Greedy importance sampling in `R^n` with fixed axis steps of size `eps`.
pub fn gis_estimate_continuous(
    target: &dyn Target<[f64]>,
    proposal: &dyn Proposal<[f64]>,
    f: &dyn Objective<[f64]>,
    cfg: &SearchConfig,
    n: usize,
    rng: &mut dyn RngCore,
    mode: WeightMode,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let blocks = lattice_blocks(target, f, *cfg);
    generalized_is(target, proposal, f, blocks, n, rng, mode)
}
