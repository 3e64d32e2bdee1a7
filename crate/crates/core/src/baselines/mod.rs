//! Comparison methods: direct sampling, rejection sampling, Metropolis,
//! Gibbs, Hybrid Monte Carlo, and the Kalman-model baselines.

mod gibbs;
mod hmc;
mod kalman;
mod metropolis;

use std::borrow::Borrow;

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};
use crate::model::{Objective, Proposal, Target};

pub use gibbs::gibbs_estimate;
pub use hmc::{hamiltonian, hmc_estimate, leapfrog};
pub use kalman::{
    gis_dynamic_estimate, kalman_posterior, particle_filter_estimate, KalmanJoint, KalmanModel,
    KalmanPrior,
};
pub use metropolis::{metropolis_estimate, metropolis_grid_estimate};

/// Where a chain starts.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ChainInit {
    /// One draw from the scenario's proposal.
    #[default]
    FromProposal,
    FromPoint(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub init: ChainInit,
    /// Per-axis variance of the Gaussian random-walk proposal.
    pub proposal_var: f64,
    pub hmc_step: f64,
    pub hmc_leaps: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            burn_in: 0,
            init: ChainInit::FromProposal,
            proposal_var: 0.5,
            hmc_step: 0.1,
            hmc_leaps: 20,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.proposal_var > 0.0) {
            return Err(invalid("proposal_var must be positive"));
        }
        if !(self.hmc_step > 0.0) {
            return Err(invalid("hmc_step must be positive"));
        }
        if self.hmc_leaps < 1 {
            return Err(invalid("hmc_leaps must be at least 1"));
        }
        Ok(())
    }
}

/// Mean of `f` over `t` exact draws from the target.
pub fn direct_sample_estimate<P>(
    target: &dyn Target<P>,
    f: &dyn Objective<P>,
    t: usize,
    rng: &mut dyn RngCore,
) -> Result<f64>
where
    P: ?Sized + ToOwned,
{
    if t == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let mut sum = 0.0;
    for _ in 0..t {
        let x = target
            .sample_exact(rng)
            .ok_or(Error::MissingCapability("an exact sampler"))?;
        sum += f.eval(x.borrow());
    }
    Ok(sum / t as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionOutcome {
    pub estimate: f64,
    /// Proposals drawn to collect the accepted sample.
    pub proposals: u64,
}

/// Rejection sampling with envelope `M`: accept `x ~ Q` with probability
/// `p̃(x) / (M q(x))`; mean of `f` over `t` accepted draws.
pub fn rejection_estimate<P>(
    target: &dyn Target<P>,
    proposal: &dyn Proposal<P>,
    f: &dyn Objective<P>,
    envelope: f64,
    t: usize,
    rng: &mut dyn RngCore,
) -> Result<RejectionOutcome>
where
    P: ?Sized + ToOwned,
{
    if t == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    if !(envelope > 0.0) {
        return Err(invalid("envelope must be positive"));
    }
    let limit = (t as u64).saturating_mul(10_000_000);
    let mut proposals = 0u64;
    let mut accepted = 0usize;
    let mut sum = 0.0;
    while accepted < t {
        if proposals >= limit {
            return Err(Error::RejectionStalled(proposals));
        }
        proposals += 1;
        let owned = proposal.sample(rng);
        let x: &P = owned.borrow();
        let ratio = (target.log_mass(x) - proposal.log_density(x)).exp();
        if ratio > envelope {
            return Err(Error::EnvelopeViolated { ratio, envelope });
        }
        let u: f64 = rng.random();
        if u * envelope < ratio {
            sum += f.eval(x);
            accepted += 1;
        }
    }
    Ok(RejectionOutcome {
        estimate: sum / t as f64,
        proposals,
    })
}
