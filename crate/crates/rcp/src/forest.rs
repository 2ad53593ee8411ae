//! Regression forests for conditional means and conditional quantiles.
//!
//! Both estimators share the same CART-style trees: axis-aligned splits
//! chosen to minimize within-node squared error over `mtry` randomly sampled
//! features, rows bagged per tree. A mean forest averages leaf means; a
//! quantile forest keeps each leaf's sorted targets and reads quantiles off
//! the forest-weighted empirical distribution (each leaf value weighted by
//! `1 / (leaf size * n_trees)`), using the left-continuous convention: the
//! smallest value whose cumulative weight reaches `beta`.
//!
//! Determinism: every tree draws from its own stream derived from
//! `(seed, tree index)`, so parallel and serial fits agree bitwise.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::data::Matrix;
use crate::error::RcpError;
use crate::seeding::{stream_rng, tag};
use crate::Result;

/// Forest hyperparameters.
#[derive(Debug, Clone)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_leaf: usize,
    /// Features sampled per split; `None` means `ceil(d / 3)`.
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub bootstrap_rows: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            min_leaf: 5,
            mtry: None,
            max_depth: None,
            bootstrap_rows: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(RcpError::InvalidParam("n_trees must be positive".into()));
        }
        if self.min_leaf == 0 {
            return Err(RcpError::InvalidParam("min_leaf must be positive".into()));
        }
        if let Some(m) = self.mtry {
            if m == 0 || m > d {
                return Err(RcpError::InvalidParam(format!("mtry must be in 1..={d}, got {m}")));
            }
        }
        Ok(())
    }

    fn resolved_mtry(&self, d: usize) -> usize {
        self.mtry.unwrap_or_else(|| d.div_ceil(3))
    }
}

#[derive(Debug, Clone)]
enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        start: u32,
        len: u32,
        mean: f64,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
    /// Sorted leaf targets, all leaves concatenated.
    values: Vec<f64>,
}

impl Tree {
    fn leaf(&self, x: &[f64]) -> (&[f64], f64) {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature as usize] < *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { start, len, mean } => {
                    return (
                        &self.values[*start as usize..(*start + *len) as usize],
                        *mean,
                    );
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Forest {
    trees: Vec<Tree>,
    dim: usize,
}

fn fit_forest(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<Forest> {
    let n = x.nrows();
    let d = x.ncols();
    params.validate(d)?;
    if y.len() != n {
        return Err(RcpError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if n < 2 {
        return Err(RcpError::Validation("forest fit needs at least 2 rows".into()));
    }
    if n < params.min_leaf {
        return Err(RcpError::Validation(format!(
            "forest fit has {n} rows, fewer than min_leaf {}",
            params.min_leaf
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(RcpError::Validation(format!("non-finite target at row {}", i + 1)));
    }
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(params.seed, &[tag::TREE, t as u64]);
            grow_tree(x, y, params, &mut rng)
        })
        .collect();
    Ok(Forest { trees, dim: d })
}

fn grow_tree(x: &Matrix, y: &[f64], params: &ForestParams, rng: &mut ChaCha12Rng) -> Tree {
    let n = x.nrows();
    let rows: Vec<usize> = if params.bootstrap_rows {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut tree = Tree {
        nodes: Vec::new(),
        values: Vec::new(),
    };
    let mut features: Vec<usize> = (0..x.ncols()).collect();
    build_node(x, y, params, rng, rows, 0, &mut features, &mut tree);
    tree
}

fn build_node(
    x: &Matrix,
    y: &[f64],
    params: &ForestParams,
    rng: &mut ChaCha12Rng,
    rows: Vec<usize>,
    depth: usize,
    features: &mut Vec<usize>,
    tree: &mut Tree,
) -> u32 {
    let m = rows.len();
    let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
    let splittable = m >= 2 * params.min_leaf && !depth_capped && !targets_constant(y, &rows);
    if splittable {
        if let Some((feature, threshold, sorted, pos)) = best_split(x, y, params, rng, &rows, features) {
            let right_rows = sorted[pos..].to_vec();
            let left_rows = sorted[..pos].to_vec();
            let node_idx = tree.nodes.len() as u32;
            tree.nodes.push(Node::Leaf {
                start: 0,
                len: 0,
                mean: 0.0,
            }); // placeholder
            let left = build_node(x, y, params, rng, left_rows, depth + 1, features, tree);
            let right = build_node(x, y, params, rng, right_rows, depth + 1, features, tree);
            tree.nodes[node_idx as usize] = Node::Split {
                feature: feature as u32,
                threshold,
                left,
                right,
            };
            return node_idx;
        }
    }
    // leaf: store sorted targets and their mean
    let start = tree.values.len() as u32;
    let mut vals: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    vals.sort_by(f64::total_cmp);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    tree.values.extend_from_slice(&vals);
    let node_idx = tree.nodes.len() as u32;
    tree.nodes.push(Node::Leaf {
        start,
        len: rows.len() as u32,
        mean,
    });
    node_idx
}

fn targets_constant(y: &[f64], rows: &[usize]) -> bool {
    let first = y[rows[0]];
    rows.iter().all(|&r| y[r] == first)
}

/// Best within-node-SSE split over `mtry` sampled features. Returns the
/// chosen feature, threshold, rows sorted by that feature, and the split
/// position in the sorted order.
fn best_split(
    x: &Matrix,
    y: &[f64],
    params: &ForestParams,
    rng: &mut ChaCha12Rng,
    rows: &[usize],
    features: &mut [usize],
) -> Option<(usize, f64, Vec<usize>, usize)> {
    let m = rows.len();
    let d = x.ncols();
    let mtry = params.resolved_mtry(d);
    // partial Fisher-Yates over the feature scratch
    for k in 0..mtry {
        let j = rng.random_range(k..d);
        features.swap(k, j);
    }
    let min_leaf = params.min_leaf;
    let mut best: Option<(f64, usize, f64, Vec<usize>, usize)> = None;
    let mut sorted: Vec<usize> = rows.to_vec();
    for fi in 0..mtry {
        let f = features[fi];
        sorted.sort_unstable_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        if x.get(sorted[0], f) == x.get(sorted[m - 1], f) {
            continue; // constant feature within node
        }
        // incremental left sums
        let total: f64 = sorted.iter().map(|&r| y[r]).sum();
        let total_sq: f64 = sorted.iter().map(|&r| y[r] * y[r]).sum();
        let mut sum_l = 0.0;
        let mut sq_l = 0.0;
        for i in 1..m {
            let yi = y[sorted[i - 1]];
            sum_l += yi;
            sq_l += yi * yi;
            if i < min_leaf || m - i < min_leaf {
                continue;
            }
            let xl = x.get(sorted[i - 1], f);
            let xr = x.get(sorted[i], f);
            if xl == xr {
                continue;
            }
            let nl = i as f64;
            let nr = (m - i) as f64;
            let sum_r = total - sum_l;
            let sq_r = total_sq - sq_l;
            let cost = (sq_l - sum_l * sum_l / nl) + (sq_r - sum_r * sum_r / nr);
            if best.as_ref().is_none_or(|b| cost < b.0) {
                let threshold = 0.5 * (xl + xr);
                best = Some((cost, f, threshold, sorted.clone(), i));
            }
        }
    }
    best.map(|(_, f, thr, sorted, pos)| (f, thr, sorted, pos))
}

/// Forest whose leaves store the mean of their training targets.
#[derive(Debug, Clone)]
pub struct MeanForest {
    forest: Forest,
}

/// Forest whose leaves retain the full sorted target lists.
#[derive(Debug, Clone)]
pub struct QuantileForest {
    forest: Forest,
}

/// Fit a mean-regression forest.
pub fn fit_mean(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<MeanForest> {
    Ok(MeanForest {
        forest: fit_forest(x, y, params)?,
    })
}

/// Fit a quantile-regression forest.
pub fn fit_quantile(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<QuantileForest> {
    Ok(QuantileForest {
        forest: fit_forest(x, y, params)?,
    })
}

impl MeanForest {
    pub fn dim(&self) -> usize {
        self.forest.dim
    }

    /// Average over trees of the leaf mean at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.forest.dim, x)?;
        let mut acc = 0.0;
        for tree in &self.forest.trees {
            acc += tree.leaf(x).1;
        }
        Ok(acc / self.forest.trees.len() as f64)
    }
}

impl QuantileForest {
    pub fn dim(&self) -> usize {
        self.forest.dim
    }

    /// `beta`-quantile of the forest-weighted leaf-target distribution.
    pub fn predict(&self, x: &[f64], beta: f64) -> Result<f64> {
        Ok(self.predict_many(x, &[beta])?[0])
    }

    /// Several quantile levels at once; gathers and sorts leaf targets once.
    pub fn predict_many(&self, x: &[f64], betas: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.forest.dim, x)?;
        for &b in betas {
            if !(0.0 < b && b < 1.0) {
                return Err(RcpError::InvalidParam(format!("quantile level must be in (0,1), got {b}")));
            }
        }
        let n_trees = self.forest.trees.len() as f64;
        let mut weighted: Vec<(f64, f64)> = Vec::new();
        for tree in &self.forest.trees {
            let (vals, _) = tree.leaf(x);
            let w = 1.0 / (vals.len() as f64 * n_trees);
            weighted.extend(vals.iter().map(|&v| (v, w)));
        }
        weighted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = weighted.iter().map(|p| p.1).sum();

        let mut order: Vec<usize> = (0..betas.len()).collect();
        order.sort_unstable_by(|&a, &b| betas[a].total_cmp(&betas[b]));
        let mut out = vec![0.0; betas.len()];
        let mut cum = 0.0;
        let mut k = 0usize;
        for &bi in &order {
            let threshold = betas[bi] * total - 1e-9 * total;
            while k < weighted.len() && cum < threshold {
                cum += weighted[k].1;
                k += 1;
            }
            // cum first reached threshold at entry k-1
            out[bi] = weighted[k.saturating_sub(1).min(weighted.len() - 1)].0;
        }
        Ok(out)
    }
}

fn check_dim(d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(RcpError::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    Ok(())
}
