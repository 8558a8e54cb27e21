//! CART classification trees. Splits are `x[feature] <= threshold` with the
//! threshold at the midpoint between adjacent distinct values. Impure nodes
//! are split even when no split lowers the impurity (the greedy step cannot
//! see XOR-like interactions). Ties between candidate splits go to the lower
//! feature index, then the lower threshold.

use serde::{Deserialize, Serialize};

use super::DtParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    fn impurity(self, pos: f64, total: f64) -> f64 {
        if total == 0.0 {
            return 0.0;
        }
        let p = pos / total;
        match self {
            Criterion::Gini => 2.0 * p * (1.0 - p),
            Criterion::Entropy => {
                let h = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
                h(p) + h(1.0 - p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// Fraction of positive training rows reaching the leaf.
        score: f64,
        n: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

pub(super) fn score(nodes: &[TreeNode], x: &[f64]) -> f64 {
    let mut at = 0;
    loop {
        match &nodes[at] {
            TreeNode::Leaf { score, .. } => return *score,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                at = if x[*feature] <= *threshold {
                    *left
                } else {
                    *right
                }
            }
        }
    }
}

struct Builder<'a> {
    x: &'a [f64],
    p: usize,
    y: &'a [u8],
    params: &'a DtParams,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn value(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.p + j]
    }

    fn best_split(&self, rows: &[usize]) -> Option<(usize, f64)> {
        let total = rows.len() as f64;
        let pos: f64 = rows.iter().map(|&i| self.y[i] as f64).sum();
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = rows.to_vec();
        for j in 0..self.p {
            order.sort_by(|&a, &b| self.value(a, j).total_cmp(&self.value(b, j)));
            let mut left_pos = 0.0;
            for k in 0..order.len() - 1 {
                left_pos += self.y[order[k]] as f64;
                let (v, next) = (self.value(order[k], j), self.value(order[k + 1], j));
                let n_left = k + 1;
                if v == next || n_left < min_leaf || order.len() - n_left < min_leaf {
                    continue;
                }
                let nl = n_left as f64;
                let nr = total - nl;
                let cost = self.params.criterion.impurity(left_pos, nl) * nl
                    + self.params.criterion.impurity(pos - left_pos, nr) * nr;
                if best.is_none_or(|(c, _, _)| cost < c - 1e-12) {
                    best = Some((cost, j, 0.5 * (v + next)));
                }
            }
        }
        best.map(|(_, j, t)| (j, t))
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let pos = rows.iter().filter(|&&i| self.y[i] == 1).count();
        self.nodes.push(TreeNode::Leaf {
            score: pos as f64 / rows.len() as f64,
            n: rows.len(),
        });
        if depth >= self.params.max_depth || pos == 0 || pos == rows.len() {
            return id;
        }
        if let Some((feature, threshold)) = self.best_split(&rows) {
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| self.value(i, feature) <= threshold);
            let left = self.grow(l, depth + 1);
            let right = self.grow(r, depth + 1);
            self.nodes[id] = TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        id
    }
}

pub(super) fn fit(x: &[f64], p: usize, y: &[u8], params: &DtParams) -> Vec<TreeNode> {
    let mut b = Builder {
        x,
        p,
        y,
        params,
        nodes: Vec::new(),
    };
    b.grow((0..y.len()).collect(), 0);
    b.nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impurity_values() {
        assert_eq!(Criterion::Gini.impurity(5.0, 10.0), 0.5);
        assert_eq!(Criterion::Entropy.impurity(5.0, 10.0), 1.0);
        assert_eq!(Criterion::Gini.impurity(0.0, 10.0), 0.0);
    }

    #[test]
    fn threshold_split_found() {
        let x = vec![1.0, 2.0, 3.0, 10.0, 11.0, 12.0];
        let y = vec![0, 0, 0, 1, 1, 1];
        let nodes = fit(&x, 1, &y, &DtParams::default());
        assert_eq!(
            nodes[0],
            TreeNode::Split {
                feature: 0,
                threshold: 6.5,
                left: 1,
                right: 2
            }
        );
        assert_eq!(score(&nodes, &[6.5]), 0.0);
        assert_eq!(score(&nodes, &[6.6]), 1.0);
    }

    #[test]
    fn min_leaf_limits_splits() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y = vec![1, 0, 0, 0];
        let params = DtParams {
            min_samples_leaf: 2,
            ..DtParams::default()
        };
        let nodes = fit(&x, 1, &y, &params);
        for n in &nodes {
            if let TreeNode::Leaf { n, .. } = n {
                assert!(*n >= 2);
            }
        }
    }
}
