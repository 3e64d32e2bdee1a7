//! Domain types shared by every other module: grid and lattice points,
//! target and proposal distributions, objectives, and the scenario catalog.
//!
//! Targets are evaluated in log space. `log_mass` is the (possibly
//! unnormalized) log target mass `ln p̃(x)`; when the exact normalizer `Z` is
//! known, `ln P(x) = ln p̃(x) - ln Z`.

mod catalog;
mod gaussian;
mod grid;
mod mixture;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::RngCore;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use catalog::{
    scenario, scenario_names, Defaults, Overrides, Problem, Scenario, TruthOracle, KALMAN_OBS_SEED,
};
pub use gaussian::{make_gaussian, Gaussian};
pub use grid::{make_discretized_gaussian, GridDistribution};
pub use mixture::{make_mixture, Mixture};

/// A (possibly unnormalized) target distribution over points of type `P`.
pub trait Target<P: ?Sized + ToOwned>: Send + Sync {
    fn dim(&self) -> usize;

    /// `ln p̃(x)`; `-inf` where the mass is zero.
    fn log_mass(&self, x: &P) -> f64;

    fn mass(&self, x: &P) -> f64 {
        self.log_mass(x).exp()
    }

    /// `ln Z` when the exact normalizer is available.
    fn log_normalizer(&self) -> Option<f64> {
        None
    }

    fn normalizer(&self) -> Option<f64> {
        self.log_normalizer().map(f64::exp)
    }

    /// Normalized log mass/density, if the normalizer is known.
    fn log_density(&self, x: &P) -> Option<f64> {
        self.log_normalizer().map(|z| self.log_mass(x) - z)
    }

    /// Gradient of `ln p̃` (equal to the gradient of `ln p`).
    fn grad_log(&self, _x: &P) -> Option<Vec<f64>> {
        None
    }

    fn sample_exact(&self, _rng: &mut dyn RngCore) -> Option<P::Owned> {
        None
    }

    /// Exact full conditionals, for Gibbs sampling.
    fn conditionals(&self) -> Option<&dyn FullConditionals> {
        None
    }
}

/// A samplable proposal distribution with a normalized mass/density that
/// is positive everywhere on the domain.
pub trait Proposal<P: ?Sized + ToOwned>: Send + Sync {
    fn dim(&self) -> usize;

    fn sample(&self, rng: &mut dyn RngCore) -> P::Owned;

    fn log_density(&self, x: &P) -> f64;

    fn density(&self, x: &P) -> f64 {
        self.log_density(x).exp()
    }
}

/// The random variable of interest `f`.
pub trait Objective<P: ?Sized>: Send + Sync {
    fn eval(&self, x: &P) -> f64;
}

impl<P: ?Sized, F> Objective<P> for F
where
    F: Fn(&P) -> f64 + Send + Sync,
{
    fn eval(&self, x: &P) -> f64 {
        self(x)
    }
}

/// Coordinate-wise conditional distributions of a continuous target.
pub trait FullConditionals: Send + Sync {
    /// Draw coordinate `axis` given the other coordinates of `x`.
    fn sample_conditional(&self, x: &[f64], axis: usize, rng: &mut dyn RngCore) -> f64;

    /// Normalized conditional density of coordinate `axis` at `value`.
    fn conditional_density(&self, x: &[f64], axis: usize, value: f64) -> f64;
}

/// `f = -ln P(x)` using the target's exact normalizer.
pub fn neg_log_density<P, T>(target: Arc<T>) -> Result<impl Objective<P>>
where
    P: ?Sized + ToOwned,
    T: Target<P> + ?Sized + 'static,
{
    let log_z = target.log_normalizer().ok_or(Error::MissingNormalizer)?;
    Ok(move |x: &P| log_z - target.log_mass(x))
}

/// `|f(x) p̃(x)|`, the quantity greedy search ascends.
pub fn search_objective<P: ?Sized + ToOwned>(
    target: &dyn Target<P>,
    f: &dyn Objective<P>,
    x: &P,
) -> Result<f64> {
    Ok(log_search_objective(target, f, x)?.exp())
}

/// `ln |f(x) p̃(x)|`, with `-inf` where either factor vanishes.
///
/// Ordering agrees with [`search_objective`]; the log form stays finite
/// where `p̃` underflows.
pub fn log_search_objective<P: ?Sized + ToOwned>(
    target: &dyn Target<P>,
    f: &dyn Objective<P>,
    x: &P,
) -> Result<f64> {
    let lm = target.log_mass(x);
    if lm == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let fx = f.eval(x);
    if !fx.is_finite() || lm.is_nan() || lm == f64::INFINITY {
        return Err(Error::NonFiniteObjective {
            at: format!("f = {fx}, ln p = {lm}"),
        });
    }
    if fx == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(fx.abs().ln() + lm)
}

/// Axis-aligned integer lattice with inclusive bounds and a real pitch.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    lo: Vec<i64>,
    hi: Vec<i64>,
    spacing: f64,
}

impl GridDomain {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>, spacing: f64) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(crate::error::invalid(
                "grid bounds must be non-empty and equal length",
            ));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(crate::error::invalid("grid needs lo < hi on every axis"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(crate::error::invalid("grid spacing must be positive"));
        }
        Ok(Self { lo, hi, spacing })
    }

    /// `[lo, hi]^n` with unit spacing.
    pub fn cube(n: usize, lo: i64, hi: i64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n], 1.0)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &GridPoint) -> bool {
        x.coords.len() == self.dim()
            && x.coords
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(c, (l, h))| l <= c && c <= h)
    }

    /// Row-major index, last axis fastest.
    pub fn index(&self, x: &GridPoint) -> usize {
        let mut idx = 0usize;
        for (k, &c) in x.coords.iter().enumerate() {
            let width = (self.hi[k] - self.lo[k] + 1) as usize;
            idx = idx * width + (c - self.lo[k]) as usize;
        }
        idx
    }

    pub fn point(&self, mut index: usize) -> GridPoint {
        let mut coords = vec![0i64; self.dim()];
        for k in (0..self.dim()).rev() {
            let width = (self.hi[k] - self.lo[k] + 1) as usize;
            coords[k] = self.lo[k] + (index % width) as i64;
            index /= width;
        }
        GridPoint { coords }
    }

    /// Real position of a node: `coords * spacing`.
    pub fn position(&self, x: &GridPoint) -> Vec<f64> {
        x.coords.iter().map(|&c| c as f64 * self.spacing).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// A node of a [`GridDomain`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub coords: Vec<i64>,
}

impl GridPoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }
}

impl From<Vec<i64>> for GridPoint {
    fn from(coords: Vec<i64>) -> Self {
        Self { coords }
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.coords.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Integer lattice offset; stored inline up to 16 dimensions.
pub type Offset = SmallVec<[i32; 16]>;

/// A point of the `eps`-lattice anchored at a continuous start.
///
/// Identity is the anchor (bitwise) plus the integer offset, so equality
/// never compares real coordinates.
#[derive(Debug, Clone)]
pub struct LatticePoint {
    pub anchor: Arc<[f64]>,
    pub offset: Offset,
    pub eps: f64,
}

impl LatticePoint {
    pub fn origin(anchor: Arc<[f64]>, eps: f64) -> Self {
        let n = anchor.len();
        Self {
            anchor,
            offset: smallvec::smallvec![0; n],
            eps,
        }
    }

    pub fn with_offset(&self, offset: Offset) -> Self {
        Self {
            anchor: Arc::clone(&self.anchor),
            offset,
            eps: self.eps,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.anchor.len());
        self.write_coords(&mut out);
        out
    }

    pub fn write_coords(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.anchor
                .iter()
                .zip(&self.offset)
                .map(|(a, &o)| a + self.eps * o as f64),
        );
    }
}

impl PartialEq for LatticePoint {
    fn eq(&self, other: &Self) -> bool {
        self.offset == other.offset
            && self.eps.to_bits() == other.eps.to_bits()
            && (Arc::ptr_eq(&self.anchor, &other.anchor)
                || (self.anchor.len() == other.anchor.len()
                    && self
                        .anchor
                        .iter()
                        .zip(other.anchor.iter())
                        .all(|(a, b)| a.to_bits() == b.to_bits())))
    }
}

impl Eq for LatticePoint {}

impl Hash for LatticePoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Points compared in practice share an anchor; the offset suffices.
        self.offset.hash(state);
    }
}
