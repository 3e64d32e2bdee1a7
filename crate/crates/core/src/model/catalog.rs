//! Named experiment scenarios.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use super::{
    make_discretized_gaussian, make_gaussian, make_mixture, neg_log_density, GridDistribution,
    GridDomain, GridPoint, Mixture, Objective, Proposal, Target,
};
use crate::auxweight::SearchConfig;
use crate::baselines::{kalman_posterior, ChainConfig, KalmanJoint, KalmanModel, KalmanPrior};
use crate::error::{invalid, Error, Result};
use crate::estimators::WeightMode;

/// Seed used to draw the six catalog observations of the Kalman scenario.
pub const KALMAN_OBS_SEED: u64 = 20_000_607;

/// Observations drawn by `KalmanModel::simulate(1, 1, 6, ChaCha8Rng(KALMAN_OBS_SEED))`.
const KALMAN_OBS: [f64; 6] = [
    -0.2690554520608382,
    -0.3299789849656376,
    -1.002496375884359,
    -2.962676857719507,
    -4.539928051173884,
    -4.346276355285129,
];

const NAMES: [&str; 12] = [
    "table1",
    "table2-n1",
    "table2-n3",
    "table3",
    "table4",
    "table5",
    "table6",
    "fig6-a",
    "fig6-b",
    "fig6-c",
    "fig6-d",
    "constant",
];

pub fn scenario_names() -> &'static [&'static str] {
    &NAMES
}

/// Target, proposal and objective of a scenario.
#[derive(Clone)]
pub enum Problem {
    Grid {
        domain: GridDomain,
        target: Arc<GridDistribution>,
        proposal: Arc<GridDistribution>,
        f: Arc<dyn Objective<GridPoint>>,
    },
    Continuous {
        target: Arc<dyn Target<[f64]>>,
        proposal: Arc<dyn Proposal<[f64]>>,
        f: Arc<dyn Objective<[f64]>>,
        kalman: Option<KalmanModel>,
    },
}

impl fmt::Debug for Problem {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Grid { domain, .. } => write!(out, "Grid({} nodes)", domain.len()),
            Problem::Continuous { target, .. } => write!(out, "Continuous(n = {})", target.dim()),
        }
    }
}

/// How the ground truth was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruthOracle {
    Analytic(f64),
    GridSum(f64),
    Quadrature(f64),
    KalmanMean(f64),
}

impl TruthOracle {
    pub fn value(&self) -> f64 {
        match *self {
            TruthOracle::Analytic(v)
            | TruthOracle::GridSum(v)
            | TruthOracle::Quadrature(v)
            | TruthOracle::KalmanMean(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Defaults {
    pub search: SearchConfig,
    pub chain: ChainConfig,
    pub mode: WeightMode,
    /// Rejection envelope `M ≥ sup p̃/q` with a 1% margin; `None` when the
    /// ratio is unbounded.
    pub envelope: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub n_dim: usize,
    pub problem: Problem,
    pub truth_oracle: TruthOracle,
    pub defaults: Defaults,
}

impl Scenario {
    pub fn truth(&self) -> f64 {
        self.truth_oracle.value()
    }
}

/// `key=value` parameter overrides.
///
/// Recognized keys: `n`, `sigma_q` (proposal standard deviation), `b`, `m`,
/// `eps`, `burn_in`, `proposal_var`, `hmc_step`, `hmc_leaps`, `mode`
/// (`direct`/`indirect`), `objective` (`table5` only: `neglogp`/`sqnorm`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides(BTreeMap<String, String>);

const KEYS: [&str; 11] = [
    "n",
    "sigma_q",
    "b",
    "m",
    "eps",
    "burn_in",
    "proposal_var",
    "hmc_step",
    "hmc_leaps",
    "mode",
    "objective",
];

impl Overrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::Parse(format!("unknown parameter '{key}'")));
        }
        self.0.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Result<Self> {
        self.set(key, value)?;
        Ok(self)
    }

    /// Parse `key=value`.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{pair}'")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Parse(format!("bad value '{v}' for '{key}'")))
            })
            .transpose()
    }
}

fn gaussian_entropy(n: usize) -> f64 {
    0.5 * n as f64 * (2.0 * PI * E).ln()
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{key} must be positive")))
    }
}

fn defaults_for(n: usize, o: &Overrides, envelope: Option<f64>) -> Result<Defaults> {
    let mut search = SearchConfig::for_dimension(n);
    if let Some(b) = o.parse("b")? {
        search.b = b;
    }
    if let Some(m) = o.parse("m")? {
        search.m = m;
    }
    if let Some(eps) = o.parse("eps")? {
        search.eps = eps;
    }
    search.validate()?;
    let mut chain = ChainConfig::default();
    if let Some(v) = o.parse("burn_in")? {
        chain.burn_in = v;
    }
    if let Some(v) = o.parse("proposal_var")? {
        chain.proposal_var = v;
    }
    if let Some(v) = o.parse("hmc_step")? {
        chain.hmc_step = v;
    }
    if let Some(v) = o.parse("hmc_leaps")? {
        chain.hmc_leaps = v;
    }
    chain.validate()?;
    let mode = o.parse("mode")?.unwrap_or_default();
    Ok(Defaults {
        search,
        chain,
        mode,
        envelope,
    })
}

fn reject_keys(name: &str, o: &Overrides, keys: &[&str]) -> Result<()> {
    match keys.iter().find(|k| o.get(k).is_some()) {
        Some(k) => Err(invalid(format!("'{k}' cannot be overridden for {name}"))),
        None => Ok(()),
    }
}

/// Build a scenario by name.
pub fn scenario(name: &str, overrides: &Overrides) -> Result<Scenario> {
    match name {
        "table1" => {
            reject_keys(name, overrides, &["n", "objective"])?;
            let sigma_q = positive("sigma_q", overrides.parse("sigma_q")?.unwrap_or(6.0))?;
            let domain = GridDomain::cube(2, -10, 10)?;
            let p = make_discretized_gaussian(domain.clone(), &[0.0; 2], &[1.0; 2])?;
            let q = make_discretized_gaussian(domain.clone(), &[0.0; 2], &[sigma_q * sigma_q; 2])?;
            grid_scenario(name, domain, p, q, None, overrides)
        }
        "table2-n1" | "table2-n3" | "table3" | "table4" => {
            reject_keys(name, overrides, &["objective"])?;
            let default_n = match name {
                "table2-n1" | "table3" => 1,
                "table2-n3" => 3,
                _ => 5,
            };
            let n: usize = overrides.parse("n")?.unwrap_or(default_n);
            if n == 0 {
                return Err(invalid("n must be at least 1"));
            }
            let sigma_q = positive("sigma_q", overrides.parse("sigma_q")?.unwrap_or(6.0))?;
            gaussian_scenario(name, n, sigma_q, overrides)
        }
        "table5" => {
            reject_keys(name, overrides, &["n"])?;
            let sigma_q = positive("sigma_q", overrides.parse("sigma_q")?.unwrap_or(6.0))?;
            let objective = overrides.get("objective").unwrap_or("sqnorm");
            mixture_scenario(name, sigma_q, objective, overrides)
        }
        "table6" => {
            reject_keys(name, overrides, &["n", "sigma_q", "objective"])?;
            kalman_scenario(name, overrides)
        }
        "fig6-a" | "fig6-b" | "fig6-c" | "fig6-d" => {
            reject_keys(name, overrides, &["n", "sigma_q", "objective"])?;
            fig6_scenario(name, overrides)
        }
        "constant" => {
            reject_keys(name, overrides, &["n", "sigma_q", "objective"])?;
            let g = Arc::new(make_gaussian(1, 0.0, 1.0)?);
            Ok(Scenario {
                name: name.into(),
                n_dim: 1,
                problem: Problem::Continuous {
                    target: g.clone(),
                    proposal: g,
                    f: Arc::new(|_: &[f64]| 5.0),
                    kalman: None,
                },
                truth_oracle: TruthOracle::Analytic(5.0),
                defaults: defaults_for(1, overrides, Some(1.01))?,
            })
        }
        _ => Err(Error::UnknownScenario(name.into())),
    }
}

fn grid_envelope(p: &GridDistribution, q: &GridDistribution) -> f64 {
    let worst = p
        .domain()
        .points()
        .map(|x| (p.log_mass(&x) - Proposal::log_density(q, &x)).exp())
        .fold(0.0, f64::max);
    1.01 * worst
}

/// Grid scenario with `f = -ln P` unless another objective is given.
fn grid_scenario(
    name: &str,
    domain: GridDomain,
    p: GridDistribution,
    q: GridDistribution,
    f: Option<Arc<dyn Objective<GridPoint>>>,
    overrides: &Overrides,
) -> Result<Scenario> {
    let p = Arc::new(p);
    let q = Arc::new(q);
    let f: Arc<dyn Objective<GridPoint>> = match f {
        Some(f) => f,
        None => Arc::new(neg_log_density(p.clone())?),
    };
    let truth = p.expectation(|x| f.eval(x));
    let envelope = Some(grid_envelope(&p, &q));
    let n = domain.dim();
    Ok(Scenario {
        name: name.into(),
        n_dim: n,
        problem: Problem::Grid {
            domain,
            target: p,
            proposal: q,
            f,
        },
        truth_oracle: TruthOracle::GridSum(truth),
        defaults: defaults_for(n, overrides, envelope)?,
    })
}

fn gaussian_scenario(name: &str, n: usize, sigma_q: f64, o: &Overrides) -> Result<Scenario> {
    let p = Arc::new(make_gaussian(n, 0.0, 1.0)?);
    let q = Arc::new(make_gaussian(n, 0.0, sigma_q * sigma_q)?);
    let f = Arc::new(neg_log_density(p.clone())?);
    // sup p/q = σ_q^n at the origin when σ_q ≥ 1.
    let envelope = (sigma_q >= 1.0).then(|| 1.01 * sigma_q.powi(n as i32));
    Ok(Scenario {
        name: name.into(),
        n_dim: n,
        problem: Problem::Continuous {
            target: p,
            proposal: q,
            f,
            kalman: None,
        },
        truth_oracle: TruthOracle::Analytic(gaussian_entropy(n)),
        defaults: defaults_for(n, o, envelope)?,
    })
}

fn table5_mixture() -> Result<Mixture> {
    make_mixture(&[
        (0.5, vec![0.0, 0.0], vec![1.0, 1.0]),
        (0.5, vec![16.0, 16.0], vec![1.0, 1.0]),
    ])
}

fn trapezoid_2d(g: &dyn Fn(f64, f64) -> f64, lo: f64, hi: f64, cells: usize) -> f64 {
    let h = (hi - lo) / cells as f64;
    let weight = |i: usize| if i == 0 || i == cells { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for i in 0..=cells {
        let x = lo + i as f64 * h;
        let mut row = 0.0;
        for j in 0..=cells {
            row += weight(j) * g(x, lo + j as f64 * h);
        }
        total += weight(i) * row;
    }
    total * h * h
}

/// `E[-ln p]` of the two-mode mixture by trapezoid quadrature over
/// `[-8, 24]²`, halving the spacing until successive values agree to 1e-4.
pub(crate) fn mixture_entropy() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| {
        let mix = table5_mixture().expect("fixed parameters");
        let g = |x: f64, y: f64| {
            let lp = mix.log_pdf(&[x, y]);
            let p = lp.exp();
            if p == 0.0 {
                0.0
            } else {
                -p * lp
            }
        };
        let mut cells = 32;
        let mut prev = trapezoid_2d(&g, -8.0, 24.0, cells);
        loop {
            cells *= 2;
            let next = trapezoid_2d(&g, -8.0, 24.0, cells);
            if (next - prev).abs() < 1e-4 || cells >= 4096 {
                return next;
            }
            prev = next;
        }
    })
}

fn mixture_scenario(name: &str, sigma_q: f64, objective: &str, o: &Overrides) -> Result<Scenario> {
    let mix = Arc::new(table5_mixture()?);
    let q = Arc::new(make_gaussian(2, 0.0, sigma_q * sigma_q)?);
    let (f, truth): (Arc<dyn Objective<[f64]>>, TruthOracle) = match objective {
        "neglogp" => (
            Arc::new(neg_log_density(mix.clone())?),
            TruthOracle::Quadrature(mixture_entropy()),
        ),
        "sqnorm" => {
            // E|x|² = Σ_k w_k (|μ_k|² + tr Σ_k).
            let exact = mix
                .components()
                .map(|(w, g)| {
                    let mu2: f64 = g.mean().iter().map(|m| m * m).sum();
                    w * (mu2 + g.var().iter().sum::<f64>())
                })
                .sum();
            (
                Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>()),
                TruthOracle::Analytic(exact),
            )
        }
        other => return Err(invalid(format!("unknown objective '{other}'"))),
    };
    // Sum over components of sup w_k N(x; μ_k, I) / N(x; 0, s²I).
    let envelope = (sigma_q > 1.0).then(|| {
        let s2 = sigma_q * sigma_q;
        let c = s2 / (s2 - 1.0);
        let bound: f64 = mix
            .components()
            .map(|(w, g)| {
                let mu2: f64 = g.mean().iter().map(|m| m * m).sum();
                let expo = -0.5 * (c - 1.0) * (c - 1.0) * mu2 + c * c * mu2 / (2.0 * s2);
                w * s2 * expo.exp()
            })
            .sum();
        1.01 * bound
    });
    Ok(Scenario {
        name: name.into(),
        n_dim: 2,
        problem: Problem::Continuous {
            target: mix,
            proposal: q,
            f,
            kalman: None,
        },
        truth_oracle: truth,
        defaults: defaults_for(2, o, envelope)?,
    })
}

pub(crate) fn kalman_catalog_model() -> KalmanModel {
    KalmanModel::new(1.0, 1.0, KALMAN_OBS.to_vec()).expect("fixed parameters")
}

fn kalman_scenario(name: &str, o: &Overrides) -> Result<Scenario> {
    let model = kalman_catalog_model();
    let t = model.len();
    let (mean, _) = kalman_posterior(&model)?;
    let target = Arc::new(KalmanJoint::new(model.clone()));
    let prior = Arc::new(KalmanPrior::new(&model));
    // p̃/q is the likelihood, at most (2π σ_o²)^{-t/2}.
    let log_bound = -0.5 * t as f64 * (2.0 * PI * model.sigma_o * model.sigma_o).ln();
    let last = t - 1;
    Ok(Scenario {
        name: name.into(),
        n_dim: t,
        problem: Problem::Continuous {
            target,
            proposal: prior,
            f: Arc::new(move |x: &[f64]| x[last]),
            kalman: Some(model),
        },
        truth_oracle: TruthOracle::KalmanMean(mean),
        defaults: defaults_for(t, o, Some(1.01 * log_bound.exp()))?,
    })
}

/// One-dimensional grid configurations on `[-40, 40]` with spacing 0.5:
/// - `a`: P = N(0, 2²), Q = N(0, 8²), f = x²
/// - `b`: P = N(0, 1), Q = N(0, 3²), f = 1[x ≥ 5] (rare tail event)
/// - `c`: P = ½N(-8, 1.5²) + ½N(8, 1.5²), Q = N(0, 6²), f = x + 8
/// - `d`: P = N(0, 1), Q = N(10, 3²), f = -ln P
fn fig6_scenario(name: &str, o: &Overrides) -> Result<Scenario> {
    let domain = GridDomain::new(vec![-80], vec![80], 0.5)?;
    let gauss = |mean: f64, sd: f64| make_discretized_gaussian(domain.clone(), &[mean], &[sd * sd]);
    let pos = {
        let spacing = domain.spacing();
        move |x: &GridPoint| x.coords[0] as f64 * spacing
    };
    let (p, q, f): (_, _, Option<Arc<dyn Objective<GridPoint>>>) = match name {
        "fig6-a" => (
            gauss(0.0, 2.0)?,
            gauss(0.0, 8.0)?,
            Some(Arc::new(move |x: &GridPoint| pos(x).powi(2))),
        ),
        "fig6-b" => (
            gauss(0.0, 1.0)?,
            gauss(0.0, 3.0)?,
            Some(Arc::new(move |x: &GridPoint| {
                f64::from(u8::from(pos(x) >= 5.0))
            })),
        ),
        "fig6-c" => {
            let bimodal = GridDistribution::from_fn(domain.clone(), |x| {
                let a = -0.5 * ((x[0] + 8.0) / 1.5).powi(2);
                let b = -0.5 * ((x[0] - 8.0) / 1.5).powi(2);
                let peak = a.max(b);
                peak + ((a - peak).exp() + (b - peak).exp()).ln()
            })?;
            (
                bimodal,
                gauss(0.0, 6.0)?,
                Some(Arc::new(move |x: &GridPoint| pos(x) + 8.0)),
            )
        }
        _ => (gauss(0.0, 1.0)?, gauss(10.0, 3.0)?, None),
    };
    grid_scenario(name, domain, p, q, f, o)
}

/// Regenerate the catalog observations from [`KALMAN_OBS_SEED`].
#[cfg(test)]
fn simulate_kalman_observations() -> Vec<f64> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(KALMAN_OBS_SEED);
    KalmanModel::simulate(1.0, 1.0, 6, &mut rng).1
}
