//! Deterministic greedy block construction.
//!
//! A [`Walk`] supplies an ordered neighborhood and a search score
//! (`ln |f·p̃|`). The successor of a point is its best strictly improving
//! neighbor, ties going to the lowest neighbor index, so the successor
//! relation is a function and ascent paths can never loop.

mod grid;
mod lattice;

use std::cell::RefCell;
use std::fmt::Debug;
use std::hash::Hash;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

pub use grid::GridWalk;
pub use lattice::{build_block_continuous, LatticeWalk};

/// Neighborhood structure plus the greedy score on a point set.
pub trait Walk {
    type Point: Clone + Eq + Hash + Debug;

    /// Neighbors in the fixed order: axis 0 negative, axis 0 positive,
    /// axis 1 negative, ...
    fn neighbors(&self, x: &Self::Point) -> Vec<Self::Point>;

    /// Visit neighbors in order until `visit` returns `false`. Walks can
    /// override this to avoid materializing every neighbor.
    fn for_each_neighbor(
        &self,
        x: &Self::Point,
        visit: &mut dyn FnMut(&Self::Point) -> Result<bool>,
    ) -> Result<()> {
        for y in self.neighbors(x) {
            if !visit(&y)? {
                break;
            }
        }
        Ok(())
    }

    /// `ln |f(x) p̃(x)|`; `-inf` where it vanishes.
    fn score(&self, x: &Self::Point) -> Result<f64>;
}

/// Memoizes scores for the lifetime of one block construction.
pub struct Memoized<'w, W: Walk> {
    inner: &'w W,
    cache: RefCell<FxHashMap<W::Point, f64>>,
}

impl<'w, W: Walk> Memoized<'w, W> {
    pub fn new(inner: &'w W) -> Self {
        Self {
            inner,
            cache: RefCell::new(FxHashMap::with_capacity_and_hasher(
                4096,
                Default::default(),
            )),
        }
    }

    pub fn evaluations(&self) -> usize {
        self.cache.borrow().len()
    }
}

impl<W: Walk> Walk for Memoized<'_, W> {
    type Point = W::Point;

    fn neighbors(&self, x: &Self::Point) -> Vec<Self::Point> {
        self.inner.neighbors(x)
    }

    fn for_each_neighbor(
        &self,
        x: &Self::Point,
        visit: &mut dyn FnMut(&Self::Point) -> Result<bool>,
    ) -> Result<()> {
        self.inner.for_each_neighbor(x, visit)
    }

    fn score(&self, x: &Self::Point) -> Result<f64> {
        if let Some(s) = self.cache.borrow().get(x) {
            return Ok(*s);
        }
        let s = self.inner.score(x)?;
        self.cache.borrow_mut().insert(x.clone(), s);
        Ok(s)
    }
}

fn checked_score<W: Walk>(walk: &W, x: &W::Point) -> Result<f64> {
    let s = walk.score(x)?;
    if s.is_nan() || s == f64::INFINITY {
        return Err(Error::NonFiniteObjective {
            at: format!("{x:?}"),
        });
    }
    Ok(s)
}

/// Best strictly improving neighbor of `x`, or `None` at a local maximum
/// (plateaus included).
pub fn greedy_successor<W: Walk>(walk: &W, x: &W::Point) -> Result<Option<W::Point>> {
    let here = checked_score(walk, x)?;
    let mut best: Option<(W::Point, f64)> = None;
    walk.for_each_neighbor(x, &mut |y| {
        let s = checked_score(walk, y)?;
        if s > here && best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((y.clone(), s));
        }
        Ok(true)
    })?;
    Ok(best.map(|(y, _)| y))
}

/// Whether the greedy step from `y` lands on `x`, given `x`'s score.
/// Exits as soon as a competitor beats `x`.
fn steps_into<W: Walk>(walk: &W, y: &W::Point, x: &W::Point, x_score: f64) -> Result<bool> {
    if checked_score(walk, y)? >= x_score {
        return Ok(false);
    }
    let mut seen_x = false;
    let mut beaten = false;
    walk.for_each_neighbor(y, &mut |z| {
        if z == x {
            seen_x = true;
            return Ok(true);
        }
        let s = checked_score(walk, z)?;
        // Earlier neighbors win ties; later ones must be strictly better.
        beaten = s > x_score || (!seen_x && s == x_score);
        Ok(!beaten)
    })?;
    Ok(seen_x && !beaten)
}

/// All neighbors whose greedy step enters `x`, in neighbor order.
pub fn predecessors<W: Walk>(walk: &W, x: &W::Point) -> Result<Vec<W::Point>> {
    let x_score = checked_score(walk, x)?;
    let mut out = Vec::new();
    walk.for_each_neighbor(x, &mut |y| {
        if steps_into(walk, y, x, x_score)? {
            out.push(y.clone());
        }
        Ok(true)
    })?;
    Ok(out)
}

/// Number of neighbors whose greedy step enters `x`.
pub fn inward_branching<W: Walk>(walk: &W, x: &W::Point) -> Result<usize> {
    let x_score = checked_score(walk, x)?;
    let mut count = 0;
    walk.for_each_neighbor(x, &mut |y| {
        if steps_into(walk, y, x, x_score)? {
            count += 1;
        }
        Ok(true)
    })?;
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    LocalMax,
    StepLimit,
}

/// One greedy ascent path of at most `m` distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct Block<P> {
    pub points: Vec<P>,
    /// Search score (`ln |f·p̃|`) of each point.
    pub scores: Vec<f64>,
    pub terminated_by: Termination,
}

impl<P> Block<P> {
    pub fn start(&self) -> &P {
        &self.points[0]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Follow greedy successors from `start` for at most `m - 1` steps.
pub fn build_block<W: Walk>(walk: &W, start: W::Point, m: usize) -> Result<Block<W::Point>> {
    if m == 0 {
        return Err(crate::error::invalid("block length m must be at least 1"));
    }
    let mut scores = vec![checked_score(walk, &start)?];
    let mut points = vec![start];
    let mut terminated_by = Termination::StepLimit;
    while points.len() < m {
        let current = points.last().expect("block is never empty");
        match greedy_successor(walk, current)? {
            Some(next) => {
                scores.push(walk.score(&next)?);
                points.push(next);
            }
            None => {
                terminated_by = Termination::LocalMax;
                break;
            }
        }
    }
    Ok(Block {
        points,
        scores,
        terminated_by,
    })
}
