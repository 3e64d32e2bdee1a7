use super::Walk;
use crate::error::Result;
use crate::model::{log_search_objective, GridDomain, GridPoint, Objective, Target};

/// Greedy walk over the nodes of a finite grid. Off-grid neighbors are
/// omitted: the domain simply ends.
pub struct GridWalk<'a> {
    domain: &'a GridDomain,
    target: &'a dyn Target<GridPoint>,
    f: &'a dyn Objective<GridPoint>,
}

impl<'a> GridWalk<'a> {
    pub fn new(
        domain: &'a GridDomain,
        target: &'a dyn Target<GridPoint>,
        f: &'a dyn Objective<GridPoint>,
    ) -> Self {
        Self { domain, target, f }
    }

    pub fn domain(&self) -> &GridDomain {
        self.domain
    }
}

impl Walk for GridWalk<'_> {
    type Point = GridPoint;

    fn neighbors(&self, x: &GridPoint) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(2 * x.coords.len());
        for k in 0..x.coords.len() {
            if x.coords[k] > self.domain.lo()[k] {
                let mut y = x.clone();
                y.coords[k] -= 1;
                out.push(y);
            }
            if x.coords[k] < self.domain.hi()[k] {
                let mut y = x.clone();
                y.coords[k] += 1;
                out.push(y);
            }
        }
        out
    }

    fn score(&self, x: &GridPoint) -> Result<f64> {
        log_search_objective(self.target, self.f, x)
    }
}
