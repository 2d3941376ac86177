//! Greedy decision tree with the entropy criterion.
//!
//! Every node considers every feature and every midpoint between
//! consecutive distinct values, and commits the split with the largest
//! information gain. Ties go to the lowest feature index, then the lowest
//! threshold. Routing sends a value left iff it is strictly below the
//! threshold.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, Standardizer};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: usize = 25;
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Splits whose gain does not exceed this are treated as no gain at all.
const MIN_GAIN: f64 = 1e-12;

/// Shannon entropy of a class histogram, in bits.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::Empty("entropy of an all-zero histogram"));
    }
    Ok(entropy_of(counts, total))
}

fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_MAX_DEPTH,
            min_samples_split: 2,
        }
    }
}

/// Node records, children referenced by index into the node list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub n_classes: usize,
    pub params: TreeParams,
    /// Root is node 0.
    pub nodes: Vec<TreeNode>,
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Builder<'a> {
    rows: &'a [&'a [f64]],
    labels: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn histogram(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &i in idx {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    fn leaf(&mut self, counts: Vec<usize>) -> usize {
        // Majority class; ties go to the lowest index.
        let class = counts
            .iter()
            .enumerate()
            .fold((0, 0), |best, (c, &n)| if n > best.1 { (c, n) } else { best })
            .0;
        self.nodes.push(TreeNode::Leaf { class, counts });
        self.nodes.len() - 1
    }

    fn best_split_on(&self, feature: usize, idx: &[usize], parent: &[usize], parent_h: f64) -> Option<Candidate> {
        let mut pairs: Vec<(f64, usize)> = idx.iter().map(|&i| (self.rows[i][feature], self.labels[i])).collect();
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = pairs.len();
        let mut left = vec![0usize; self.n_classes];
        let mut right = parent.to_vec();
        let mut best: Option<Candidate> = None;
        for i in 1..n {
            let (prev, class) = pairs[i - 1];
            left[class] += 1;
            right[class] -= 1;
            let next = pairs[i].0;
            if next <= prev {
                continue;
            }
            let nl = i;
            let nr = n - i;
            let child_h = (nl as f64 * entropy_of(&left, nl) + nr as f64 * entropy_of(&right, nr)) / n as f64;
            let gain = parent_h - child_h;
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                let mut threshold = prev + (next - prev) / 2.0;
                // Adjacent floats: the midpoint can round onto `prev`.
                if threshold <= prev {
                    threshold = next;
                }
                best = Some(Candidate {
                    gain,
                    feature,
                    threshold,
                });
            }
        }
        best
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.histogram(&idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || idx.len() < self.params.min_samples_split {
            return self.leaf(counts);
        }
        let parent_h = entropy_of(&counts, idx.len());
        let n_features = self.rows[0].len();
        let per_feature: Vec<Option<Candidate>> = (0..n_features)
            .into_par_iter()
            .map(|f| self.best_split_on(f, &idx, &counts, parent_h))
            .collect();
        // Ordered reduction keeps the lowest-feature tie rule.
        let mut best: Option<Candidate> = None;
        for c in per_feature.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
        let Some(best) = best.filter(|b| b.gain > MIN_GAIN) else {
            return self.leaf(counts);
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.rows[i][best.feature] < best.threshold);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: usize::MAX,
            right: usize::MAX,
        });
        let left = self.build(left_idx, depth + 1);
        let right = self.build(right_idx, depth + 1);
        if let TreeNode::Split { left: l, right: r, .. } = &mut self.nodes[id] {
            *l = left;
            *r = right;
        }
        id
    }
}

impl DecisionTree {
    /// Fits a tree on `rows` (all of equal length) with class indices `labels`.
    pub fn fit(rows: &[&[f64]], labels: &[usize], params: TreeParams) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("no training rows"));
        }
        if rows.len() != labels.len() {
            return Err(Error::Shape {
                context: "decision tree labels",
                expected: rows.len(),
                actual: labels.len(),
            });
        }
        let n_features = rows[0].len();
        if n_features == 0 {
            return Err(Error::Empty("training rows have no features"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n_features) {
            return Err(Error::Shape {
                context: "decision tree features",
                expected: n_features,
                actual: bad.len(),
            });
        }
        if rows.iter().any(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("decision tree training rows"));
        }
        let n_classes = labels.iter().max().map_or(1, |m| m + 1).max(2);
        let mut builder = Builder {
            rows,
            labels,
            n_classes,
            params,
            nodes: Vec::new(),
        };
        builder.build((0..rows.len()).collect(), 0);
        Ok(Self {
            n_features,
            n_classes,
            params,
            nodes: builder.nodes,
        })
    }

    fn leaf_for(&self, row: &[f64]) -> Result<&TreeNode> {
        if row.len() != self.n_features {
            return Err(Error::Shape {
                context: "decision tree input",
                expected: self.n_features,
                actual: row.len(),
            });
        }
        let mut node = &self.nodes[0];
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = &self.nodes[if row[*feature] < *threshold { *left } else { *right }];
        }
        Ok(node)
    }

    /// Class of the reached leaf.
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        Ok(self.predict_scores(row)?.0)
    }

    /// Class and class frequencies of the reached leaf.
    pub fn predict_scores(&self, row: &[f64]) -> Result<(usize, Vec<f64>)> {
        match self.leaf_for(row)? {
            TreeNode::Leaf { class, counts } => {
                let total: usize = counts.iter().sum();
                let freq = counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect();
                Ok((*class, freq))
            }
            TreeNode::Split { .. } => unreachable!("routing always ends at a leaf"),
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], id: usize) -> usize {
            match &nodes[id] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

/// A fitted tree plus the input standardization it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtreeModel {
    pub format_version: u32,
    pub standardizer: Standardizer,
    pub tree: DecisionTree,
}

impl DtreeModel {
    pub fn new(tree: DecisionTree, standardizer: Standardizer) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            standardizer,
            tree,
        }
    }

    /// Prediction on a raw (unstandardized) window.
    pub fn predict_raw(&self, window: &[f64]) -> Result<Label> {
        let x = self.standardizer.apply(window);
        Ok(Label::from_class_index(self.tree.predict(&x)?))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let malformed = |detail: String| Error::Malformed {
            what: "decision tree model",
            path: path.to_path_buf(),
            detail,
        };
        let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
        let found = raw
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| malformed("missing format_version".into()))?;
        if found != u64::from(MODEL_FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                path: path.to_path_buf(),
                expected: MODEL_FORMAT_VERSION,
                found: found as u32,
            });
        }
        let model: Self = serde_json::from_value(raw).map_err(|e| malformed(e.to_string()))?;
        model.validate().map_err(malformed)?;
        Ok(model)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let nodes = &self.tree.nodes;
        if nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (id, node) in nodes.iter().enumerate() {
            if let TreeNode::Split { feature, left, right, .. } = node {
                if *feature >= self.tree.n_features {
                    return Err(format!("node {id} splits on feature {feature} out of range"));
                }
                if *left <= id || *right <= id || *left >= nodes.len() || *right >= nodes.len() {
                    return Err(format!("node {id} has invalid children"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(rows: &[Vec<f64>], labels: &[usize], max_depth: usize) -> DecisionTree {
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        DecisionTree::fit(
            &refs,
            labels,
            TreeParams {
                max_depth,
                min_samples_split: 2,
            },
        )
        .unwrap()
    }

    fn accuracy(tree: &DecisionTree, rows: &[Vec<f64>], labels: &[usize]) -> f64 {
        let hits = rows.iter().zip(labels).filter(|(r, &l)| tree.predict(r).unwrap() == l).count();
        hits as f64 / rows.len() as f64
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[10, 0]).unwrap(), 0.0);
        assert!((entropy(&[5, 5]).unwrap() - 1.0).abs() < 1e-12);
        assert!((entropy(&[3, 1]).unwrap() - 0.8113).abs() < 1e-4);
        assert!(entropy(&[0, 0]).is_err());
    }

    #[test]
    fn separable_stump() {
        let rows = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        let labels = [0, 0, 1, 1];
        let tree = fit(&rows, &labels, 25);
        assert_eq!(tree.depth(), 1);
        match &tree.nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert!(*threshold > 1.0 && *threshold < 10.0);
            }
            _ => panic!("expected a split at the root"),
        }
        assert_eq!(accuracy(&tree, &rows, &labels), 1.0);
    }

    #[test]
    fn value_at_threshold_goes_right() {
        let rows = vec![vec![0.0], vec![2.0]];
        let tree = fit(&rows, &[0, 1], 25);
        let TreeNode::Split { threshold, .. } = tree.nodes[0] else {
            panic!()
        };
        assert_eq!(threshold, 1.0);
        assert_eq!(tree.predict(&[1.0]).unwrap(), 1);
        assert_eq!(tree.predict(&[0.999]).unwrap(), 0);
    }

    #[test]
    fn single_class_is_a_leaf() {
        let rows = vec![vec![0.0, 1.0], vec![5.0, 2.0], vec![3.0, 3.0]];
        let tree = fit(&rows, &[1, 1, 1], 25);
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict(&[100.0, -4.0]).unwrap(), 1);
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(DecisionTree::fit(&[], &[], TreeParams::default()).is_err());
        let tree = fit(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[0, 1], 25);
        assert!(matches!(tree.predict(&[0.0]), Err(Error::Shape { .. })));
    }

    /// Exhaustive oracle: does any depth-1 stump classify every row?
    fn some_stump_is_perfect(rows: &[Vec<f64>], labels: &[usize]) -> bool {
        let mut thresholds: Vec<(usize, f64)> = Vec::new();
        for f in 0..rows[0].len() {
            for r in rows {
                thresholds.push((f, r[f]));
                thresholds.push((f, r[f] + 0.5));
            }
        }
        thresholds.iter().any(|&(f, t)| {
            [(0, 1), (1, 0), (0, 0), (1, 1)]
                .iter()
                .any(|&(l, r)| rows.iter().zip(labels).all(|(x, &y)| y == if x[f] < t { l } else { r }))
        })
    }

    #[test]
    fn xor_needs_depth_two() {
        // Unbalanced XOR so the root split has a small positive gain.
        let rows = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let labels = [0, 0, 1, 1, 0];
        assert!(!some_stump_is_perfect(&rows, &labels));
        let deep = fit(&rows, &labels, 25);
        assert_eq!(accuracy(&deep, &rows, &labels), 1.0);
        assert!(deep.depth() >= 2);
        let stump = fit(&rows, &labels, 1);
        assert!(accuracy(&stump, &rows, &labels) < 1.0);
        assert!(stump.depth() <= 1);
    }

    #[test]
    fn ties_pick_lowest_feature() {
        // Both features separate perfectly.
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let tree = fit(&rows, &[0, 1], 25);
        assert!(matches!(tree.nodes[0], TreeNode::Split { feature: 0, .. }));
    }

    #[test]
    fn json_round_trip() {
        let rows = vec![vec![0.0, 3.5], vec![1.0, -2.25], vec![10.0, 0.1], vec![11.0, 7.0]];
        let tree = fit(&rows, &[0, 1, 1, 0], 25);
        let model = DtreeModel::new(tree, Standardizer { mean: 0.3, std: 1.7 });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tree.json");
        model.save(&path).unwrap();
        assert_eq!(DtreeModel::load(&path).unwrap(), model);
    }

    #[test]
    fn load_rejects_other_versions() {
        let model = DtreeModel::new(fit(&[vec![0.0], vec![1.0]], &[0, 1], 25), Standardizer { mean: 0.0, std: 1.0 });
        let mut raw: serde_json::Value = serde_json::from_str(&model.to_json()).unwrap();
        raw["format_version"] = 99.into();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tree.json");
        fs::write(&path, raw.to_string()).unwrap();
        assert!(matches!(DtreeModel::load(&path), Err(Error::VersionMismatch { found: 99, .. })));
    }
}
