//! Regression trees grown by exact greedy search on second-order statistics.

use serde_json::{json, Value as Json};

use super::GbtConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Node {
    Leaf {
        weight: f64,
    },
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// A regression tree stored as a node arena rooted at index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree {
    pub(crate) nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(weight: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf { weight }],
        }
    }

    /// A depth-one tree on a single feature.
    pub fn stump(feature: usize, threshold: f64, left_weight: f64, right_weight: f64) -> Self {
        RegressionTree {
            nodes: vec![
                Node::Split {
                    feature: feature as u32,
                    threshold,
                    left: 1,
                    right: 2,
                },
                Node::Leaf {
                    weight: left_weight,
                },
                Node::Leaf {
                    weight: right_weight,
                },
            ],
        }
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match self.nodes[idx] {
                Node::Leaf { weight } => return weight,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature as usize),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    /// Smallest and largest leaf weight.
    pub fn weight_range(&self) -> (f64, f64) {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { weight } => Some(*weight),
                Node::Split { .. } => None,
            })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
                (lo.min(w), hi.max(w))
            })
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn to_json(&self) -> Json {
        fn walk(nodes: &[Node], idx: usize) -> Json {
            match nodes[idx] {
                Node::Leaf { weight } => json!({ "weight": weight }),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => json!({
                    "feature_index": feature,
                    "threshold": threshold,
                    "left": walk(nodes, left as usize),
                    "right": walk(nodes, right as usize),
                }),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Node of a [`FlatEnsemble`]; leaves have `feature == LEAF` and carry their
/// weight in `value`, splits keep their children at `left` and `left + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct FlatNode {
    value: f64,
    feature: u32,
    left: u32,
}

const LEAF: u32 = u32::MAX;

/// All trees of an ensemble laid out in one array for fast evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct FlatEnsemble {
    nodes: Vec<FlatNode>,
    roots: Vec<u32>,
}

impl FlatEnsemble {
    pub fn new(trees: &[RegressionTree]) -> Self {
        let mut flat = FlatEnsemble::default();
        for t in trees {
            let root = flat.nodes.len();
            flat.roots.push(root as u32);
            flat.nodes.push(FlatNode {
                value: 0.0,
                feature: LEAF,
                left: 0,
            });
            flat.place(&t.nodes, 0, root);
        }
        flat
    }

    fn place(&mut self, src: &[Node], from: usize, at: usize) {
        match src[from] {
            Node::Leaf { weight } => {
                self.nodes[at] = FlatNode {
                    value: weight,
                    feature: LEAF,
                    left: 0,
                };
            }
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let children = self.nodes.len();
                let blank = FlatNode {
                    value: 0.0,
                    feature: LEAF,
                    left: 0,
                };
                self.nodes.push(blank);
                self.nodes.push(blank);
                self.nodes[at] = FlatNode {
                    value: threshold,
                    feature,
                    left: children as u32,
                };
                self.place(src, left as usize, children);
                self.place(src, right as usize, children + 1);
            }
        }
    }

    #[inline]
    pub fn predict_tree(&self, tree: usize, x: &[f64]) -> f64 {
        let mut idx = self.roots[tree] as usize;
        loop {
            let node = self.nodes[idx];
            if node.feature == LEAF {
                return node.value;
            }
            idx = node.left as usize + usize::from(x[node.feature as usize] > node.value);
        }
    }

    pub fn n_trees(&self) -> usize {
        self.roots.len()
    }
}

/// Row-major feature matrix plus per-row gradient statistics for one round.
pub(crate) struct GrowContext<'a> {
    pub features: &'a [f64],
    pub n_features: usize,
    pub grad: &'a [f64],
    pub hess: &'a [f64],
    pub config: &'a GbtConfig,
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl GrowContext<'_> {
    fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.n_features + feature]
    }

    pub fn grow(&self, rows: &[usize]) -> RegressionTree {
        let mut nodes = Vec::new();
        let mut rows = rows.to_vec();
        self.grow_node(&mut rows, 0, &mut nodes);
        RegressionTree { nodes }
    }

    fn leaf_weight(&self, g: f64, h: f64) -> f64 {
        -g / (h + self.config.l2_leaf_penalty)
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.config.l2_leaf_penalty)
    }

    fn grow_node(&self, rows: &mut [usize], depth: usize, nodes: &mut Vec<Node>) -> u32 {
        let idx = nodes.len();
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        nodes.push(Node::Leaf {
            weight: self.leaf_weight(g, h),
        });

        if depth >= self.config.max_depth {
            return idx as u32;
        }
        let Some(best) = self.best_split(rows, g, h) else {
            return idx as u32;
        };
        // Zero-gain splits are kept: on symmetric data such as XOR the first
        // split gains nothing on its own but enables the next level.
        if best.gain < self.config.min_split_gain.max(0.0) {
            return idx as u32;
        }

        // Stable partition keeps row order deterministic in the children.
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.value(r, best.feature) <= best.threshold);
        let left_idx = self.grow_node(&mut left, depth + 1, nodes);
        let right_idx = self.grow_node(&mut right, depth + 1, nodes);
        nodes[idx] = Node::Split {
            feature: best.feature as u32,
            threshold: best.threshold,
            left: left_idx,
            right: right_idx,
        };
        idx as u32
    }

    /// Scan features in index order and thresholds in increasing order; a
    /// candidate replaces the incumbent only on strictly greater gain.
    fn best_split(&self, rows: &mut [usize], g: f64, h: f64) -> Option<Candidate> {
        let min_child = self.config.min_child_hessian;
        if h < 2.0 * min_child {
            return None;
        }
        let parent = self.score(g, h);
        let mut best: Option<Candidate> = None;
        let mut order: Vec<usize> = rows.to_vec();

        for feature in 0..self.n_features {
            order.sort_by(|&a, &b| {
                self.value(a, feature)
                    .total_cmp(&self.value(b, feature))
                    .then(a.cmp(&b))
            });
            let mut gl = 0.0;
            let mut hl = 0.0;
            for w in 0..order.len().saturating_sub(1) {
                let row = order[w];
                gl += self.grad[row];
                hl += self.hess[row];
                let here = self.value(row, feature);
                let next = self.value(order[w + 1], feature);
                if here == next {
                    continue;
                }
                let hr = h - hl;
                if hl < min_child || hr < min_child {
                    continue;
                }
                let gr = g - gl;
                let gain = 0.5 * (self.score(gl, hl) + self.score(gr, hr) - parent);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Candidate {
                        gain,
                        feature,
                        threshold: midpoint(here, next),
                    });
                }
            }
        }
        best
    }
}

/// A threshold `t` with `lo <= t < hi`, halfway when representable.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}
