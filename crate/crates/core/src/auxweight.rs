//! Auxiliary weights for greedy blocks.
//!
//! A start `x_i` whose ascent reaches `x_j` after `d` steps gets
//!
//! ```text
//! α_ij = β_ij / S(b, m)                 if b(x_i) ≠ 0
//! α_ij = β_ij · S(b, m - d) / S(b, m)   if b(x_i) = 0
//! β_ij = Π_{ℓ=1..d} b / b(x_{i+ℓ})
//! ```
//!
//! where `b(x)` counts the neighbors whose greedy step enters `x` and
//! `S(b, m) = 1 + b + … + b^{m-1}`. With these weights the α-mass of every
//! predecessor tree `T_j` sums to one, which [`verify_alpha_tree`] checks by
//! explicit enumeration.

use crate::error::{invalid, Error, Result};
use crate::search::{build_block, inward_branching, predecessors, Block, Memoized, Walk};

/// `(b, m, eps)`: guessed inward branching factor, block length bound, and
/// lattice step for continuous domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub b: f64,
    pub m: usize,
    pub eps: f64,
}

impl SearchConfig {
    pub fn new(b: f64, m: usize, eps: f64) -> Result<Self> {
        let cfg = Self { b, m, eps };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Continuous defaults: `eps = 1`, `m = 10n`, `b = n / 2.6`.
    pub fn for_dimension(n: usize) -> Self {
        Self {
            b: n as f64 / 2.6,
            m: 10 * n,
            eps: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(invalid(format!("b must be positive, got {}", self.b)));
        }
        if self.m < 1 {
            return Err(invalid("m must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(invalid(format!("eps must be positive, got {}", self.eps)));
        }
        Ok(())
    }
}

/// Node count of a complete inward tree of depth `m` with branching `b`.
pub fn tree_size(b: f64, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(invalid("tree depth m must be at least 1"));
    }
    if !(b > 0.0) {
        return Err(invalid("branching factor b must be positive"));
    }
    if b == 1.0 {
        return Ok(m as f64);
    }
    Ok((b.powi(m as i32) - 1.0) / (b - 1.0))
}

/// Search path from a start to a destination with the inward branching
/// factors of its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord<P> {
    /// `x_{s,1} .. x_{s,k}`, start first, destination last.
    pub points: Vec<P>,
    /// Branching factors of `points[1..]`.
    pub branch_factors: Vec<usize>,
    /// Branching factor of the start.
    pub start_branch: usize,
}

impl<P> PathRecord<P> {
    pub fn depth(&self) -> usize {
        self.branch_factors.len()
    }
}

/// Path correction `β = Π b / b_ℓ` over the nodes after the start.
pub fn beta<P>(path: &PathRecord<P>, b: f64) -> Result<f64> {
    let mut out = 1.0;
    for (index, &bf) in path.branch_factors.iter().enumerate() {
        if bf == 0 {
            return Err(Error::ZeroBranchFactor { index: index + 1 });
        }
        out *= b / bf as f64;
    }
    Ok(out)
}

/// Auxiliary weight of the start of `path` for its destination.
pub fn alpha<P>(path: &PathRecord<P>, cfg: &SearchConfig) -> Result<f64> {
    let d = path.depth();
    if d >= cfg.m {
        return Err(Error::DepthExceeded { depth: d, m: cfg.m });
    }
    let beta = beta(path, cfg.b)?;
    let full = tree_size(cfg.b, cfg.m)?;
    if path.start_branch != 0 {
        Ok(beta / full)
    } else {
        Ok(beta * tree_size(cfg.b, cfg.m - d)? / full)
    }
}

/// α for every point of a block, from the branching factors of its nodes
/// (`branch[0]` is the start). Equivalent to calling [`alpha`] on each
/// prefix path, with the β product accumulated incrementally.
pub fn block_alphas(branch: &[usize], cfg: &SearchConfig) -> Result<Vec<f64>> {
    if branch.is_empty() {
        return Ok(Vec::new());
    }
    if branch.len() > cfg.m {
        return Err(Error::DepthExceeded {
            depth: branch.len() - 1,
            m: cfg.m,
        });
    }
    let full = tree_size(cfg.b, cfg.m)?;
    let mut out = Vec::with_capacity(branch.len());
    let mut beta = 1.0;
    for d in 0..branch.len() {
        if d > 0 {
            if branch[d] == 0 {
                return Err(Error::ZeroBranchFactor { index: d });
            }
            beta *= cfg.b / branch[d] as f64;
        }
        let a = if branch[0] != 0 {
            beta / full
        } else {
            beta * tree_size(cfg.b, cfg.m - d)? / full
        };
        out.push(a);
    }
    Ok(out)
}

/// A greedy block together with the branching factor and α of each point.
#[derive(Debug, Clone)]
pub struct WeightedBlock<P> {
    pub block: Block<P>,
    pub branch: Vec<usize>,
    pub alphas: Vec<f64>,
}

/// Build the block from `start` and weight its points. Scores are memoized
/// for the duration of the call.
pub fn weigh_block<W: Walk>(
    walk: &W,
    start: W::Point,
    cfg: &SearchConfig,
) -> Result<WeightedBlock<W::Point>> {
    let memo = Memoized::new(walk);
    let block = build_block(&memo, start, cfg.m)?;
    if cfg.m == 1 {
        // S(b, 1) = 1 and β = 1: the weight is 1 whatever the start's factor.
        return Ok(WeightedBlock {
            block,
            branch: vec![0],
            alphas: vec![1.0],
        });
    }
    let branch = block
        .points
        .iter()
        .map(|p| inward_branching(&memo, p))
        .collect::<Result<Vec<_>>>()?;
    let alphas = block_alphas(&branch, cfg)?;
    Ok(WeightedBlock {
        block,
        branch,
        alphas,
    })
}

/// Result of enumerating a predecessor tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaTree {
    /// `Σ α` over all tree nodes; should be 1.
    pub total: f64,
    pub nodes: usize,
    /// Largest deviation of a subtree's α-mass from `β·S(b, ℓ)/S(b, m)`.
    pub max_subtree_gap: f64,
}

/// Default node cap for tree enumeration: `(2n)^m`.
pub fn default_tree_cap(n: usize, m: usize) -> usize {
    let base = (2 * n).max(2);
    base.checked_pow(m as u32).unwrap_or(usize::MAX)
}

/// Enumerate `T_j`, every start whose ascent reaches `x_j` within `m - 1`
/// steps, and sum their α weights. Also checks, for each subtree, that its
/// accumulated weight equals `β·S(b, ℓ)/S(b, m)` with `ℓ = m - depth`.
pub fn verify_alpha_tree<W: Walk>(
    walk: &W,
    x_j: &W::Point,
    cfg: &SearchConfig,
    cap: usize,
) -> Result<AlphaTree> {
    cfg.validate()?;
    let memo = Memoized::new(walk);
    let full = tree_size(cfg.b, cfg.m)?;
    let mut nodes = 0usize;
    let mut gap = 0.0f64;
    // Branching factors from the destination back toward the current node,
    // so the node's own path record reads `path_factors` reversed.
    let mut path_factors = Vec::new();
    let total = subtree(
        &memo,
        x_j,
        cfg,
        full,
        cap,
        &mut path_factors,
        &mut nodes,
        &mut gap,
    )?;
    Ok(AlphaTree {
        total,
        nodes,
        max_subtree_gap: gap,
    })
}

#[allow(clippy::too_many_arguments)]
fn subtree<W: Walk>(
    walk: &W,
    node: &W::Point,
    cfg: &SearchConfig,
    full: f64,
    cap: usize,
    path_factors: &mut Vec<usize>,
    nodes: &mut usize,
    gap: &mut f64,
) -> Result<f64> {
    *nodes += 1;
    if *nodes > cap {
        return Err(Error::TreeTooLarge { cap });
    }
    let depth = path_factors.len();
    let preds = predecessors(walk, node)?;
    let record = PathRecord {
        points: vec![(); depth + 1],
        branch_factors: path_factors.iter().rev().copied().collect(),
        start_branch: preds.len(),
    };
    let own = alpha(&record, cfg)?;
    let mut sum = own;
    if depth + 1 < cfg.m {
        path_factors.push(preds.len());
        for p in &preds {
            sum += subtree(walk, p, cfg, full, cap, path_factors, nodes, gap)?;
        }
        path_factors.pop();
    }
    let expected = beta(&record, cfg.b)? * tree_size(cfg.b, cfg.m - depth)? / full;
    *gap = gap.max((sum - expected).abs());
    Ok(sum)
}
