//! Repetition runner and summary statistics.
//!
//! Repetition `r` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` on stream `r`, so every repetition is
//! independent and reproducible no matter which worker executes it.

mod export;

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    direct_sample_estimate, gibbs_estimate, gis_dynamic_estimate, hmc_estimate,
    metropolis_estimate, metropolis_grid_estimate, particle_filter_estimate, rejection_estimate,
    ChainInit,
};
use crate::error::{invalid, Error, Result};
use crate::estimators::{gis_estimate_continuous, gis_estimate_grid, is_estimate};
use crate::model::{scenario, GridPoint, Overrides, Problem, Proposal, Scenario};

pub use export::{
    read_csv, read_json, to_csv_string, to_json_string, write_stats, Format, CSV_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ds,
    Rs,
    Is,
    Gis,
    Met,
    Gibbs,
    Hmc,
    Pf,
    GisDyn,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Ds,
        Method::Rs,
        Method::Is,
        Method::Gis,
        Method::Met,
        Method::Gibbs,
        Method::Hmc,
        Method::Pf,
        Method::GisDyn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ds => "ds",
            Method::Rs => "rs",
            Method::Is => "is",
            Method::Gis => "gis",
            Method::Met => "met",
            Method::Gibbs => "gibbs",
            Method::Hmc => "hmc",
            Method::Pf => "pf",
            Method::GisDyn => "gis-dyn",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scenario: String,
    pub method: Method,
    pub t: usize,
    pub reps: usize,
    pub seed: u64,
    pub overrides: Overrides,
}

impl RunSpec {
    pub fn new(scenario: &str, method: Method, t: usize, reps: usize, seed: u64) -> Self {
        Self {
            scenario: scenario.into(),
            method,
            t,
            reps,
            seed,
            overrides: Overrides::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Result<Self> {
        self.set(key, &value.to_string())?;
        Ok(self)
    }

    /// Set a field by name; unrecognized keys go to the scenario overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Parse(format!("bad value '{value}' for '{key}'"));
        match key {
            "scenario" => self.scenario = value.into(),
            "method" => self.method = value.parse()?,
            "t" => self.t = value.parse().map_err(|_| bad())?,
            "reps" => self.reps = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            _ => self.overrides.set(key, value)?,
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 1 {
            return Err(invalid("t must be at least 1"));
        }
        if self.reps < 1 {
            return Err(invalid("reps must be at least 1"));
        }
        Ok(())
    }
}

/// Parse a flat `key=value` config file; blank lines and `#` comments are
/// skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
        .map(|(i, line)| {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", i + 1)))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub scenario: String,
    pub method: String,
    pub n_dim: usize,
    pub t: usize,
    pub reps: usize,
    pub seed: u64,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub stdev: f64,
    pub rmse: f64,
}

impl ScenarioStats {
    /// `rmse² - (bias² + stdev²)`, zero up to rounding.
    pub fn identity_residual(&self) -> f64 {
        self.rmse * self.rmse - (self.bias * self.bias + self.stdev * self.stdev)
    }

    pub fn identity_holds(&self) -> bool {
        self.identity_residual().abs() <= 1e-12 * (self.rmse * self.rmse).max(1.0)
    }
}

/// Mean, absolute bias, population standard deviation and rmse of
/// `estimates` against `truth`.
pub fn summarize(estimates: &[f64], truth: f64) -> Result<(f64, f64, f64, f64)> {
    if estimates.is_empty() {
        return Err(invalid("no estimates to summarize"));
    }
    let r = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / r;
    let mse = estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / r;
    let stats = (mean, (mean - truth).abs(), var.sqrt(), mse.sqrt());
    if ![stats.0, stats.1, stats.2, stats.3]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(invalid("non-finite statistics"));
    }
    Ok(stats)
}

pub fn truth(name: &str, overrides: &Overrides) -> Result<f64> {
    Ok(scenario(name, overrides)?.truth())
}

/// RNG for repetition `rep` under master seed `seed`.
pub fn rep_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn chain_start(s: &Scenario, proposal: &dyn Proposal<[f64]>, rng: &mut dyn RngCore) -> Vec<f64> {
    match &s.defaults.chain.init {
        ChainInit::FromProposal => proposal.sample(rng),
        ChainInit::FromPoint(x) => x.clone(),
    }
}

/// One estimate of the scenario's expectation from a sample of size `t`.
pub fn estimate_once(s: &Scenario, method: Method, t: usize, rng: &mut dyn RngCore) -> Result<f64> {
    let d = &s.defaults;
    let unsupported = || Error::UnsupportedMethod {
        method: method.name().into(),
        scenario: s.name.clone(),
    };
    let envelope = || d.envelope.ok_or_else(unsupported);
    match &s.problem {
        Problem::Grid {
            domain,
            target,
            proposal,
            f,
        } => match method {
            Method::Ds => direct_sample_estimate(&**target, &**f, t, rng),
            Method::Rs => {
                Ok(rejection_estimate(&**target, &**proposal, &**f, envelope()?, t, rng)?.estimate)
            }
            Method::Is => Ok(is_estimate(&**target, &**proposal, &**f, t, rng, d.mode)?.estimate),
            Method::Gis => Ok(gis_estimate_grid(
                domain,
                &**target,
                &**proposal,
                &**f,
                &d.search,
                t,
                rng,
                d.mode,
            )?
            .estimate),
            Method::Met => {
                let init = match &d.chain.init {
                    ChainInit::FromProposal => proposal.draw(rng),
                    ChainInit::FromPoint(x) => GridPoint::new(
                        x.iter()
                            .map(|v| (v / domain.spacing()).round() as i64)
                            .collect(),
                    ),
                };
                metropolis_grid_estimate(domain, &**target, &**f, t, &d.chain, init, rng)
            }
            _ => Err(unsupported()),
        },
        Problem::Continuous {
            target,
            proposal,
            f,
            kalman,
        } => match method {
            Method::Ds => direct_sample_estimate(&**target, &**f, t, rng),
            Method::Rs => {
                Ok(rejection_estimate(&**target, &**proposal, &**f, envelope()?, t, rng)?.estimate)
            }
            Method::Is => Ok(is_estimate(&**target, &**proposal, &**f, t, rng, d.mode)?.estimate),
            Method::Gis => Ok(gis_estimate_continuous(
                &**target,
                &**proposal,
                &**f,
                &d.search,
                t,
                rng,
                d.mode,
            )?
            .estimate),
            Method::Met => {
                let init = chain_start(s, &**proposal, rng);
                metropolis_estimate(&**target, &**f, t, &d.chain, init, rng)
            }
            Method::Gibbs => {
                let init = chain_start(s, &**proposal, rng);
                gibbs_estimate(&**target, &**f, t, &d.chain, init, rng)
            }
            Method::Hmc => {
                let init = chain_start(s, &**proposal, rng);
                hmc_estimate(&**target, &**f, t, &d.chain, init, rng)
            }
            Method::Pf => {
                particle_filter_estimate(kalman.as_ref().ok_or_else(unsupported)?, t, rng)
            }
            Method::GisDyn => Ok(gis_dynamic_estimate(
                kalman.as_ref().ok_or_else(unsupported)?,
                &d.search,
                t,
                rng,
            )?
            .estimate),
        },
    }
}

/// Estimate of repetition `rep`.
pub fn repetition(s: &Scenario, spec: &RunSpec, rep: usize) -> Result<f64> {
    let mut rng = rep_rng(spec.seed, rep);
    estimate_once(s, spec.method, spec.t, &mut rng).map_err(|e| Error::Repetition {
        rep,
        source: Box::new(e),
    })
}

/// All repetition estimates, in repetition order.
pub fn estimates(spec: &RunSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let s = scenario(&spec.scenario, &spec.overrides)?;
    (0..spec.reps)
        .into_par_iter()
        .map(|rep| repetition(&s, spec, rep))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub fn run(spec: &RunSpec) -> Result<ScenarioStats> {
    let s = scenario(&spec.scenario, &spec.overrides)?;
    let est = estimates(spec)?;
    stats_for(&s, spec, &est)
}

pub fn stats_for(s: &Scenario, spec: &RunSpec, estimates: &[f64]) -> Result<ScenarioStats> {
    let truth = s.truth();
    let (mean, bias, stdev, rmse) = summarize(estimates, truth)?;
    Ok(ScenarioStats {
        scenario: spec.scenario.clone(),
        method: spec.method.name().into(),
        n_dim: s.n_dim,
        t: spec.t,
        reps: spec.reps,
        seed: spec.seed,
        truth,
        mean,
        bias,
        stdev,
        rmse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    T,
    N,
    SigmaQ,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(SweepAxis::T),
            "n" => Ok(SweepAxis::N),
            "sigma_q" => Ok(SweepAxis::SigmaQ),
            _ => Err(Error::Parse(format!("unknown sweep axis '{s}'"))),
        }
    }
}

/// One run per value of `axis`, for each method.
pub fn sweep(
    template: &RunSpec,
    methods: &[Method],
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<ScenarioStats>> {
    let mut rows = Vec::with_capacity(values.len() * methods.len());
    for &v in values {
        for &method in methods {
            let mut spec = template.clone();
            spec.method = method;
            match axis {
                SweepAxis::T => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(invalid(format!("t = {v} is not a positive integer")));
                    }
                    spec.t = v as usize;
                }
                SweepAxis::N => spec.overrides.set("n", v)?,
                SweepAxis::SigmaQ => spec.overrides.set("sigma_q", v)?,
            }
            rows.push(run(&spec)?);
        }
    }
    Ok(rows)
}
