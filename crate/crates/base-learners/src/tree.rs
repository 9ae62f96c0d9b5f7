//! CART regression tree with greedy variance-reduction splits.

use serde::{Deserialize, Serialize};
use tensor_autodiff::rng::SeededRng;
use tensor_autodiff::Matrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Number of features considered per split; `None` means all.
    pub feature_subset: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: None, min_leaf: 5, feature_subset: None }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::InvalidParam("min_leaf must be at least 1".into()));
        }
        if self.feature_subset == Some(0) {
            return Err(Error::InvalidParam("feature_subset must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { value: f64 },
    /// Rows with `feature <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeModel {
    nodes: Vec<TreeNode>,
    n_features: usize,
}

impl TreeModel {
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        if features.cols() != self.n_features {
            return Err(Error::FeatureMismatch { expected: self.n_features, got: features.cols() });
        }
        Ok((0..features.rows()).map(|r| self.predict_row(features.row(r))).collect())
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], id: usize) -> usize {
            match &nodes[id] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Greedy CART fit. Candidate thresholds are midpoints between distinct
/// consecutive sorted values; ties in the split score are broken by the
/// lowest feature index, then the lowest threshold.
pub fn fit_tree(data: &Dataset, params: &TreeParams, rng: &mut SeededRng) -> Result<TreeModel> {
    params.validate()?;
    let mut builder = TreeBuilder {
        data,
        params,
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    builder.build(&rows, 0, rng);
    Ok(TreeModel { nodes: builder.nodes, n_features: data.n_features() })
}

struct TreeBuilder<'a> {
    data: &'a Dataset,
    params: &'a TreeParams,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    left_rows: Vec<usize>,
    right_rows: Vec<usize>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, rows: &[usize], depth: usize, rng: &mut SeededRng) -> usize {
        let target = self.data.target();
        let n = rows.len();
        let mean = rows.iter().map(|&r| target[r]).sum::<f64>() / n as f64;

        let depth_ok = self.params.max_depth.map_or(true, |d| depth < d);
        let split = if depth_ok && n >= 2 * self.params.min_leaf {
            self.find_best_split(rows, rng)
        } else {
            None
        };

        match split {
            None => {
                self.nodes.push(TreeNode::Leaf { value: mean });
                self.nodes.len() - 1
            }
            Some(best) => {
                let id = self.nodes.len();
                // Placeholder is patched once the children are built.
                self.nodes.push(TreeNode::Leaf { value: mean });
                let left = self.build(&best.left_rows, depth + 1, rng);
                let right = self.build(&best.right_rows, depth + 1, rng);
                self.nodes[id] = TreeNode::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                };
                id
            }
        }
    }

    fn find_best_split(&self, rows: &[usize], rng: &mut SeededRng) -> Option<BestSplit> {
        let target = self.data.target();
        let features = self.data.features();
        let n = rows.len();
        let min_leaf = self.params.min_leaf;

        let sum: f64 = rows.iter().map(|&r| target[r]).sum();
        let sum_sq: f64 = rows.iter().map(|&r| target[r] * target[r]).sum();
        let parent_sse = sum_sq - sum * sum / n as f64;
        if parent_sse <= 0.0 {
            return None; // pure node
        }

        let candidates = self.candidate_features(rng);
        let mut best: Option<(f64, usize, f64, usize)> = None; // (sse, feature, threshold, sorted split pos)
        let mut best_order: Vec<(f64, usize)> = Vec::new();

        for &feature in &candidates {
            // Sort rows by value with the row index as a stable tie key.
            let mut order: Vec<(f64, usize)> = rows.iter().map(|&r| (features.get(r, feature), r)).collect();
            order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            for pos in 0..n - 1 {
                let (value, row) = order[pos];
                left_sum += target[row];
                left_sq += target[row] * target[row];
                let next_value = order[pos + 1].0;
                if next_value <= value {
                    continue; // no boundary between equal values
                }
                let left_n = pos + 1;
                let right_n = n - left_n;
                if left_n < min_leaf || right_n < min_leaf {
                    continue;
                }
                let right_sum = sum - left_sum;
                let right_sq = sum_sq - left_sq;
                let sse = (left_sq - left_sum * left_sum / left_n as f64)
                    + (right_sq - right_sum * right_sum / right_n as f64);
                // Strict improvement keeps the first (lowest feature,
                // lowest threshold) candidate on ties.
                if best.as_ref().map_or(sse < parent_sse, |b| sse < b.0) {
                    let threshold = midpoint(value, next_value);
                    best = Some((sse, feature, threshold, left_n));
                    best_order = order.clone();
                }
            }
        }

        best.map(|(_, feature, threshold, left_n)| {
            let left_rows: Vec<usize> = best_order[..left_n].iter().map(|&(_, r)| r).collect();
            let right_rows: Vec<usize> = best_order[left_n..].iter().map(|&(_, r)| r).collect();
            BestSplit { feature, threshold, left_rows, right_rows }
        })
    }

    fn candidate_features(&self, rng: &mut SeededRng) -> Vec<usize> {
        let d = self.data.n_features();
        match self.params.feature_subset {
            Some(k) if k < d => {
                let mut picked = rand::seq::index::sample(rng, d, k).into_vec();
                // Ascending order so the tie-break rule applies within the
                // sampled set.
                picked.sort_unstable();
                picked
            }
            _ => (0..d).collect(),
        }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid > a && mid < b {
        mid
    } else {
        a // adjacent floats: keep both sides non-empty under <=
    }
}
