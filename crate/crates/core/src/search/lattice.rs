use std::cell::RefCell;
use std::sync::Arc;

use super::{build_block, Block, Walk};
use crate::error::{invalid, Result};
use crate::model::{log_search_objective, LatticePoint, Objective, Target};

/// Greedy walk over the `eps`-lattice anchored at a continuous start. Every
/// point has all `2n` axis neighbors.
pub struct LatticeWalk<'a> {
    target: &'a dyn Target<[f64]>,
    f: &'a dyn Objective<[f64]>,
    buf: RefCell<Vec<f64>>,
}

impl<'a> LatticeWalk<'a> {
    pub fn new(target: &'a dyn Target<[f64]>, f: &'a dyn Objective<[f64]>) -> Self {
        Self {
            target,
            f,
            buf: RefCell::new(Vec::with_capacity(target.dim())),
        }
    }
}

impl Walk for LatticeWalk<'_> {
    type Point = LatticePoint;

    fn neighbors(&self, x: &LatticePoint) -> Vec<LatticePoint> {
        let mut out = Vec::with_capacity(2 * x.offset.len());
        for k in 0..x.offset.len() {
            for step in [-1, 1] {
                let mut offset = x.offset.clone();
                offset[k] += step;
                out.push(x.with_offset(offset));
            }
        }
        out
    }

    fn for_each_neighbor(
        &self,
        x: &LatticePoint,
        visit: &mut dyn FnMut(&LatticePoint) -> Result<bool>,
    ) -> Result<()> {
        let mut y = x.clone();
        for k in 0..x.offset.len() {
            for step in [-1, 1] {
                y.offset[k] = x.offset[k] + step;
                if !visit(&y)? {
                    return Ok(());
                }
            }
            y.offset[k] = x.offset[k];
        }
        Ok(())
    }

    fn score(&self, x: &LatticePoint) -> Result<f64> {
        let mut buf = self.buf.borrow_mut();
        x.write_coords(&mut buf);
        log_search_objective(self.target, self.f, &buf[..])
    }
}

/// Greedy block over the lattice anchored at `start` with step `eps`.
pub fn build_block_continuous(
    walk: &LatticeWalk<'_>,
    start: &[f64],
    eps: f64,
    m: usize,
) -> Result<Block<LatticePoint>> {
    if !(eps > 0.0) {
        return Err(invalid("step size eps must be positive"));
    }
    let origin = LatticePoint::origin(Arc::from(start), eps);
    build_block(walk, origin, m)
}
