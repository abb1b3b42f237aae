//! Stochastic gradient boosting with softmax log-loss.
//!
//! Every round computes class probabilities for all training rows, then fits
//! one depth-limited regression tree per class to the residuals `y_k - p_k`
//! on a fresh row subsample drawn without replacement. Splits minimize the
//! squared error of the residuals; leaves take a single Newton step
//! `Σr / Σp(1-p)`, clipped to `[-4, 4]` and scaled by the learning rate.
//!
//! Binary columns split on 0 versus 1 (threshold 0.5). Dense columns split
//! at midpoints between consecutive observed values. A row goes left when its
//! value is `<=` the threshold.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{Column, FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};

const LEAF_CLIP: f64 = 4.0;
const MIN_SPLIT_GAIN: f64 = 1e-9;
const FORMAT_TAG: &str = "gbdt-ensemble v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtParams {
    pub learning_rate: f64,
    pub n_trees: usize,
    /// Nodes with fewer rows than this become leaves.
    pub min_samples_split: usize,
    /// Fraction of rows drawn for each tree.
    pub subsample: f64,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            learning_rate: 0.005,
            n_trees: 1000,
            min_samples_split: 5,
            subsample: 0.4,
            max_depth: 3,
            seed: 0,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!("subsample must lie in (0, 1], got {}", self.subsample));
        }
        if self.min_samples_split < 2 {
            return bad(format!(
                "min_samples_split must be >= 2, got {}",
                self.min_samples_split
            ));
        }
        if self.max_depth == 0 {
            return bad("max_depth must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn eval(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if value(feature) <= threshold { left } else { right },
            }
        }
    }
}

/// Trained model: per-class log-prior plus per-class tree sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub classes: Vec<String>,
    pub prior: Vec<f64>,
    /// `trees[k]` holds class `k`'s trees; empty for prior-only models.
    pub trees: Vec<Vec<Tree>>,
    pub learning_rate: f64,
    pub width: usize,
}

impl TreeEnsemble {
    pub fn is_prior_only(&self) -> bool {
        self.trees.iter().all(Vec::is_empty)
    }

    fn scores(&self, value: impl Fn(usize) -> f64 + Copy) -> Vec<f64> {
        self.prior
            .iter()
            .zip(&self.trees)
            .map(|(&p, trees)| {
                p + self.learning_rate * trees.iter().map(|t| t.eval(value)).sum::<f64>()
            })
            .collect()
    }

    /// Per-class raw scores of each row.
    pub fn decision_function(&self, features: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        if features.cols() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                got: features.cols(),
            });
        }
        Ok((0..features.rows())
            .map(|r| self.scores(|f| features.value(r, f)))
            .collect())
    }

    /// Versioned text serialization; floats use shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_TAG}");
        let _ = writeln!(out, "width {}", self.width);
        let _ = writeln!(out, "learning_rate {}", self.learning_rate);
        let _ = writeln!(out, "classes {}", self.classes.len());
        for (c, p) in self.classes.iter().zip(&self.prior) {
            let _ = writeln!(out, "class {p} {c}");
        }
        for (k, trees) in self.trees.iter().enumerate() {
            for (round, t) in trees.iter().enumerate() {
                let _ = writeln!(out, "tree {k} {round} {}", t.nodes.len());
                for node in &t.nodes {
                    match node {
                        TreeNode::Leaf { value } => {
                            let _ = writeln!(out, "leaf {value}");
                        }
                        TreeNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            let _ = writeln!(out, "split {feature} {threshold} {left} {right}");
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<TreeEnsemble> {
        let bad = |m: &str| Error::Model(m.to_string());
        let mut lines = text.lines();
        if lines.next() != Some(FORMAT_TAG) {
            return Err(bad("missing format tag"));
        }
        fn field<T: std::str::FromStr>(
            line: Option<&str>,
            key: &str,
        ) -> Result<T> {
            line.and_then(|l| l.strip_prefix(key))
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Model(format!("expected {key}")))
        }
        let width: usize = field(lines.next(), "width ")?;
        let learning_rate: f64 = field(lines.next(), "learning_rate ")?;
        let k: usize = field(lines.next(), "classes ")?;
        let mut classes = Vec::with_capacity(k);
        let mut prior = Vec::with_capacity(k);
        for _ in 0..k {
            let line = lines.next().and_then(|l| l.strip_prefix("class ")).ok_or_else(|| bad("expected class"))?;
            let (p, name) = line.split_once(' ').ok_or_else(|| bad("bad class line"))?;
            prior.push(p.parse().map_err(|_| bad("bad prior"))?);
            classes.push(name.to_string());
        }
        let mut trees: Vec<Vec<Tree>> = vec![Vec::new(); k];
        while let Some(line) = lines.next() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let (class, count) = match parts.as_slice() {
                ["tree", c, _, n] => (
                    c.parse::<usize>().map_err(|_| bad("bad tree class"))?,
                    n.parse::<usize>().map_err(|_| bad("bad node count"))?,
                ),
                _ => return Err(bad("expected tree header")),
            };
            if class >= k {
                return Err(bad("tree class out of range"));
            }
            let mut nodes = Vec::with_capacity(count);
            for _ in 0..count {
                let parts: Vec<&str> = lines
                    .next()
                    .ok_or_else(|| bad("truncated tree"))?
                    .split_whitespace()
                    .collect();
                let node = match parts.as_slice() {
                    ["leaf", v] => TreeNode::Leaf {
                        value: v.parse().map_err(|_| bad("bad leaf"))?,
                    },
                    ["split", f, t, l, r] => TreeNode::Split {
                        feature: f.parse().map_err(|_| bad("bad split"))?,
                        threshold: t.parse().map_err(|_| bad("bad split"))?,
                        left: l.parse().map_err(|_| bad("bad split"))?,
                        right: r.parse().map_err(|_| bad("bad split"))?,
                    },
                    _ => return Err(bad("bad node")),
                };
                nodes.push(node);
            }
            trees[class].push(Tree { nodes });
        }
        Ok(TreeEnsemble {
            classes,
            prior,
            trees,
            learning_rate,
            width,
        })
    }
}

fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Mean negative log-likelihood of `labels` under row-major scores.
fn log_loss(scores: &[f64], labels: &[usize], k: usize) -> f64 {
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let row = &scores[i * k..(i + 1) * k];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
            lse - row[y]
        })
        .sum();
    total / labels.len() as f64
}

/// Training-time view of the features.
struct Prepared<'a> {
    features: &'a FeatureMatrix,
    /// Binary columns active in each row, ascending.
    row_binary: Vec<Vec<u32>>,
    /// For dense columns, rows ordered by value.
    dense_order: Vec<Option<Vec<u32>>>,
}

impl<'a> Prepared<'a> {
    fn new(features: &'a FeatureMatrix) -> Self {
        let mut row_binary = vec![Vec::new(); features.rows()];
        let mut dense_order = Vec::with_capacity(features.cols());
        for (j, col) in features.columns().iter().enumerate() {
            match col {
                Column::Binary(ones) => {
                    for &r in ones {
                        row_binary[r].push(j as u32);
                    }
                    dense_order.push(None);
                }
                Column::Dense(v) => {
                    let mut order: Vec<u32> = (0..v.len() as u32).collect();
                    order.sort_by(|&a, &b| v[a as usize].total_cmp(&v[b as usize]));
                    dense_order.push(Some(order));
                }
            }
        }
        Prepared {
            features,
            row_binary,
            dense_order,
        }
    }

    fn value(&self, row: usize, col: usize) -> f64 {
        match &self.features.columns()[col] {
            Column::Binary(_) => {
                f64::from(u8::from(self.row_binary[row].binary_search(&(col as u32)).is_ok()))
            }
            Column::Dense(v) => v[row],
        }
    }

    /// True when some column takes more than one value across the rows.
    fn any_informative(&self) -> bool {
        let n = self.features.rows();
        self.features.columns().iter().any(|c| match c {
            Column::Binary(ones) => !ones.is_empty() && ones.len() < n,
            Column::Dense(v) => v.iter().any(|&x| x != v[0]),
        })
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Grows one tree over the sampled rows. `slot` maps rows to their current
/// frontier node (`u32::MAX` = unsampled); it is left dirty on return.
fn grow_tree(
    data: &Prepared<'_>,
    sample: &[usize],
    residual: &[f64],
    hessian: &[f64],
    params: &GbdtParams,
    slot: &mut [u32],
) -> Tree {
    let cols = data.features.cols();
    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { value: 0.0 }];
    // frontier entries: (node id, rows)
    let mut frontier: Vec<(usize, Vec<usize>)> = vec![(0, sample.to_vec())];
    let mut finished: Vec<(usize, Vec<usize>)> = Vec::new();

    for _depth in 0..params.max_depth {
        let splittable: Vec<(usize, Vec<usize>)>;
        (splittable, frontier) = std::mem::take(&mut frontier)
            .into_iter()
            .partition(|(_, rows)| rows.len() >= params.min_samples_split);
        finished.append(&mut frontier);
        if splittable.is_empty() {
            break;
        }

        let f = splittable.len();
        let mut totals = vec![(0.0f64, 0usize); f];
        for (s, (_, rows)) in splittable.iter().enumerate() {
            for &r in rows {
                slot[r] = s as u32;
                totals[s].0 += residual[r];
                totals[s].1 += 1;
            }
        }
        let mut best: Vec<Option<Candidate>> = vec![None; f];
        let consider = |best: &mut Option<Candidate>, cand: Candidate| {
            if cand.gain > MIN_SPLIT_GAIN && best.is_none_or(|b| cand.gain > b.gain) {
                *best = Some(cand);
            }
        };
        let score = |s: usize, left_sum: f64, left_n: usize, totals: &[(f64, usize)]| {
            let (sum, n) = totals[s];
            let right_sum = sum - left_sum;
            let right_n = n - left_n;
            if left_n == 0 || right_n == 0 {
                return f64::NEG_INFINITY;
            }
            left_sum * left_sum / left_n as f64 + right_sum * right_sum / right_n as f64
                - sum * sum / n as f64
        };

        // binary columns: accumulate the x = 1 side per (slot, column)
        let mut ones_sum = vec![0.0f64; f * cols];
        let mut ones_n = vec![0usize; f * cols];
        for (s, (_, rows)) in splittable.iter().enumerate() {
            for &r in rows {
                for &j in &data.row_binary[r] {
                    ones_sum[s * cols + j as usize] += residual[r];
                    ones_n[s * cols + j as usize] += 1;
                }
            }
        }
        for j in 0..cols {
            match &data.dense_order[j] {
                None => {
                    for s in 0..f {
                        let (sum, n) = totals[s];
                        let left_sum = sum - ones_sum[s * cols + j];
                        let left_n = n - ones_n[s * cols + j];
                        let gain = score(s, left_sum, left_n, &totals);
                        consider(&mut best[s], Candidate { gain, feature: j, threshold: 0.5 });
                    }
                }
                Some(order) => {
                    let Column::Dense(values) = &data.features.columns()[j] else {
                        unreachable!()
                    };
                    let mut acc = vec![(0.0f64, 0usize, f64::NAN); f];
                    for &r in order {
                        let r = r as usize;
                        let s = slot[r];
                        if s == u32::MAX || s as usize >= f {
                            continue;
                        }
                        let s = s as usize;
                        let x = values[r];
                        let (left_sum, left_n, last) = acc[s];
                        if left_n > 0 && x != last {
                            let gain = score(s, left_sum, left_n, &totals);
                            let threshold = last + (x - last) / 2.0;
                            consider(&mut best[s], Candidate { gain, feature: j, threshold });
                        }
                        acc[s] = (left_sum + residual[r], left_n + 1, x);
                    }
                }
            }
        }

        let mut next = Vec::new();
        for (s, (node, rows)) in splittable.into_iter().enumerate() {
            for &r in &rows {
                slot[r] = u32::MAX;
            }
            match best[s] {
                None => finished.push((node, rows)),
                Some(c) => {
                    let (l, r) = (nodes.len(), nodes.len() + 1);
                    nodes.push(TreeNode::Leaf { value: 0.0 });
                    nodes.push(TreeNode::Leaf { value: 0.0 });
                    nodes[node] = TreeNode::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left: l,
                        right: r,
                    };
                    let (lo, hi): (Vec<usize>, Vec<usize>) = rows
                        .into_iter()
                        .partition(|&row| data.value(row, c.feature) <= c.threshold);
                    next.push((l, lo));
                    next.push((r, hi));
                }
            }
        }
        frontier = next;
    }
    finished.append(&mut frontier);

    for (node, rows) in finished {
        let num: f64 = rows.iter().map(|&r| residual[r]).sum();
        let den: f64 = rows.iter().map(|&r| hessian[r]).sum();
        let value = if den > 0.0 {
            (num / den).clamp(-LEAF_CLIP, LEAF_CLIP)
        } else if num == 0.0 {
            0.0
        } else {
            LEAF_CLIP.copysign(num)
        };
        nodes[node] = TreeNode::Leaf { value };
    }
    Tree { nodes }
}

/// Trains an ensemble and returns it with the training log-loss before the
/// first round and after every round.
///
/// Single-class data, fewer rows than `min_samples_split`, or features that
/// are constant over all rows yield a prior-only model: the log-frequency
/// prior already minimizes the training loss when no split is possible.
pub fn train_gbdt_traced(data: &LabeledDataset, params: &GbdtParams) -> Result<(TreeEnsemble, Vec<f64>)> {
    params.validate()?;
    let n = data.len();
    if n == 0 {
        return Err(Error::Empty("cannot train on an empty dataset".into()));
    }
    let k = data.classes.len();
    let counts = data.class_counts();
    let prior: Vec<f64> = counts
        .iter()
        .map(|&c| if c == 0 { f64::MIN / 4.0 } else { (c as f64 / n as f64).ln() })
        .collect();
    let mut model = TreeEnsemble {
        classes: data.classes.clone(),
        prior: prior.clone(),
        trees: vec![Vec::new(); k],
        learning_rate: params.learning_rate,
        width: data.features.cols(),
    };
    let mut scores: Vec<f64> = (0..n).flat_map(|_| prior.iter().copied()).collect();
    let mut trace = vec![log_loss(&scores, &data.labels, k)];

    let prepared = Prepared::new(&data.features);
    if k < 2 || n < params.min_samples_split || !prepared.any_informative() {
        return Ok((model, trace));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let take = ((params.subsample * n as f64).ceil() as usize).clamp(1, n);
    let mut probs = vec![0.0; n * k];
    let mut residual = vec![0.0; n];
    let mut hessian = vec![0.0; n];
    let mut slot = vec![u32::MAX; n];
    for _round in 0..params.n_trees {
        for i in 0..n {
            softmax_into(&scores[i * k..(i + 1) * k], &mut probs[i * k..(i + 1) * k]);
        }
        for class in 0..k {
            let mut rows = sample(&mut rng, n, take).into_vec();
            rows.sort_unstable();
            for &r in &rows {
                let p = probs[r * k + class];
                let y = f64::from(u8::from(data.labels[r] == class));
                residual[r] = y - p;
                hessian[r] = p * (1.0 - p);
            }
            let tree = grow_tree(&prepared, &rows, &residual, &hessian, params, &mut slot);
            for r in 0..n {
                scores[r * k + class] +=
                    params.learning_rate * tree.eval(|f| prepared.value(r, f));
            }
            model.trees[class].push(tree);
        }
        trace.push(log_loss(&scores, &data.labels, k));
    }
    Ok((model, trace))
}

pub fn train_gbdt(data: &LabeledDataset, params: &GbdtParams) -> Result<TreeEnsemble> {
    train_gbdt_traced(data, params).map(|(m, _)| m)
}

/// Class index of the highest score per row; ties go to the earlier class.
pub fn predict(model: &TreeEnsemble, features: &FeatureMatrix) -> Result<Vec<usize>> {
    Ok(model
        .decision_function(features)?
        .into_iter()
        .map(|s| {
            let mut best = 0;
            for (c, &v) in s.iter().enumerate() {
                if v > s[best] {
                    best = c;
                }
            }
            best
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `rows` rows; column 0 equals the label, further columns are noise.
    fn separable(rows: usize, noise_cols: usize, seed: u64) -> LabeledDataset {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (0..rows).map(|_| rng.random_range(0..2)).collect();
        let mut f = FeatureMatrix::new(rows);
        f.push_binary("signal", (0..rows).filter(|&r| labels[r] == 1).collect());
        for j in 0..noise_cols {
            f.push_binary(format!("noise{j}"), (0..rows).filter(|_| rng.random_bool(0.5)).collect());
        }
        LabeledDataset::new(f, labels, vec!["a".into(), "b".into()]).unwrap()
    }

    fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
        pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
    }

    #[test]
    fn separable_feature_is_learned() {
        let d = separable(200, 0, 1);
        let m = train_gbdt(&d, &GbdtParams::default()).unwrap();
        assert_eq!(m.trees[0].len(), 1000);
        assert_eq!(m.trees[1].len(), 1000);
        let p = predict(&m, &d.features).unwrap();
        assert_eq!(accuracy(&p, &d.labels), 1.0);
        assert_eq!(p, d.labels);
    }

    #[test]
    fn one_class_is_prior_only() {
        let mut f = FeatureMatrix::new(10);
        f.push_binary("x", vec![1, 2]);
        let d = LabeledDataset::new(f.clone(), vec![0; 10], vec!["only".into()]).unwrap();
        let m = train_gbdt(&d, &GbdtParams::default()).unwrap();
        assert!(m.is_prior_only());
        assert!(predict(&m, &f).unwrap().iter().all(|&c| c == 0));
    }

    #[test]
    fn zero_features_predict_majority() {
        let f = FeatureMatrix::new(9);
        let labels = vec![0, 1, 1, 1, 2, 2, 1, 0, 1];
        let d = LabeledDataset::new(f.clone(), labels, vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let m = train_gbdt(&d, &GbdtParams::default()).unwrap();
        assert!(predict(&m, &f).unwrap().iter().all(|&c| c == 1));

        let mut zeros = FeatureMatrix::new(9);
        zeros.push_binary("never", vec![]);
        let d = LabeledDataset::new(zeros.clone(), d.labels.clone(), d.classes.clone()).unwrap();
        let m = train_gbdt(&d, &GbdtParams::default()).unwrap();
        assert!(predict(&m, &zeros).unwrap().iter().all(|&c| c == 1));
    }

    #[test]
    fn width_mismatch_and_empty() {
        let d = separable(50, 2, 3);
        let p = GbdtParams { n_trees: 5, ..GbdtParams::default() };
        let m = train_gbdt(&d, &p).unwrap();
        assert!(matches!(
            predict(&m, &FeatureMatrix::new(3)),
            Err(Error::WidthMismatch { expected: 3, got: 0 })
        ));
        let bad = GbdtParams { subsample: 0.0, ..p };
        assert!(train_gbdt(&d, &bad).is_err());
    }

    #[test]
    fn full_sample_loss_is_non_increasing() {
        let d = separable(200, 5, 7);
        let p = GbdtParams {
            subsample: 1.0,
            n_trees: 200,
            ..GbdtParams::default()
        };
        let (_, trace) = train_gbdt_traced(&d, &p).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
        let p = GbdtParams { n_trees: 200, ..GbdtParams::default() };
        let (_, trace) = train_gbdt_traced(&d, &p).unwrap();
        assert!(trace.last().unwrap() < &trace[0]);
    }

    #[test]
    fn dense_midpoint_split() {
        let mut f = FeatureMatrix::new(40);
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 10.0).collect();
        f.push_dense("x", xs);
        let labels: Vec<usize> = (0..40).map(|i| usize::from(i >= 25)).collect();
        let d = LabeledDataset::new(f.clone(), labels.clone(), vec!["lo".into(), "hi".into()]).unwrap();
        let p = GbdtParams { n_trees: 300, subsample: 1.0, ..GbdtParams::default() };
        let m = train_gbdt(&d, &p).unwrap();
        match m.trees[0][0].nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert!((threshold - 2.45).abs() < 1e-12);
            }
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(predict(&m, &f).unwrap(), labels);
    }

    #[test]
    fn deterministic_and_serializable() {
        let d = separable(80, 4, 11);
        let p = GbdtParams { n_trees: 30, seed: 5, ..GbdtParams::default() };
        let a = train_gbdt(&d, &p).unwrap();
        let b = train_gbdt(&d, &p).unwrap();
        assert_eq!(a, b);
        let text = a.to_text();
        let back = TreeEnsemble::from_text(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_text(), text);
        assert!(TreeEnsemble::from_text("nonsense").is_err());
    }
}
