//! Graph data model: sparse re-normalized adjacency, degree features, and
//! data splits.
//!
//! Input graphs are treated as undirected; edge lists are symmetrized and
//! deduplicated before normalization. Graphs are immutable after load.

use crate::error::{Error, Result};
use crate::Mat;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Compressed sparse row matrix with `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets. Duplicate coordinates are
    /// summed; entries are sorted by (row, col).
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut per_row: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n_rows];
        for &(r, c, v) in triplets {
            *per_row[r].entry(c).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &per_row {
            for (&c, &v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Dense product `self · x`.
    pub fn matmul(&self, x: &Mat) -> Mat {
        assert_eq!(self.n_cols, x.nrows(), "CsrMatrix::matmul shape mismatch");
        let mut out = Mat::zeros((self.n_rows, x.ncols()));
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut out_row = out.row_mut(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out_row.scaled_add(v, &x.row(c));
            }
        }
        out
    }

    /// Dense product `selfᵀ · x`, computed by scattering rows.
    pub fn transpose_matmul(&self, x: &Mat) -> Mat {
        assert_eq!(self.n_rows, x.nrows(), "CsrMatrix::transpose_matmul shape mismatch");
        let mut out = Mat::zeros((self.n_cols, x.ncols()));
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let x_row = x.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out.row_mut(c).scaled_add(v, &x_row);
            }
        }
        out
    }

    pub fn to_dense(&self) -> Mat {
        let mut out = Mat::zeros((self.n_rows, self.n_cols));
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[(r, c)] = v;
            }
        }
        out
    }

    /// Block-diagonal union of several matrices.
    pub fn block_diag(blocks: &[&CsrMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.n_rows).sum();
        let m: usize = blocks.iter().map(|b| b.n_cols).sum();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut col_off = 0;
        for b in blocks {
            for r in 0..b.n_rows {
                let (cols, vals) = b.row(r);
                col_idx.extend(cols.iter().map(|&c| c + col_off));
                values.extend_from_slice(vals);
                row_ptr.push(col_idx.len());
            }
            col_off += b.n_cols;
        }
        Self {
            n_rows: n,
            n_cols: m,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Node features: an explicit dense matrix, or the n×n identity (used by
/// text graphs, where materializing one-hot rows would be wasteful).
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Dense(Mat),
    Identity(usize),
}

impl Features {
    pub fn num_rows(&self) -> usize {
        match self {
            Features::Dense(m) => m.nrows(),
            Features::Identity(n) => *n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Features::Dense(m) => m.ncols(),
            Features::Identity(n) => *n,
        }
    }

    pub fn to_dense(&self) -> Mat {
        match self {
            Features::Dense(m) => m.clone(),
            Features::Identity(n) => Mat::from_diag_elem(*n, 1.0),
        }
    }

    pub fn as_dense(&self) -> Option<&Mat> {
        match self {
            Features::Dense(m) => Some(m),
            Features::Identity(_) => None,
        }
    }
}

/// Immutable sparse graph: nodes, deduplicated undirected edges, the
/// re-normalized adjacency, features, labels, and optional masks.
#[derive(Debug, Clone)]
pub struct Graph {
    pub num_nodes: usize,
    /// Unique undirected edges with u < v (self-loops dropped).
    pub edges: Vec<(usize, usize)>,
    pub norm_adj: Arc<CsrMatrix>,
    pub features: Features,
    /// Node labels for node-level tasks (empty otherwise).
    pub labels: Vec<usize>,
    pub train_mask: Vec<bool>,
    pub val_mask: Vec<bool>,
    pub test_mask: Vec<bool>,
}

impl Graph {
    /// Builds a graph from an unweighted edge list; the adjacency is
    /// symmetrized, self-looped, and degree-normalized.
    pub fn new(num_nodes: usize, edges: &[(usize, usize)], features: Features) -> Result<Self> {
        let norm_adj = normalize_adjacency(edges, num_nodes)?;
        Ok(Self {
            num_nodes,
            edges: dedup_undirected(edges, num_nodes)?,
            norm_adj: Arc::new(norm_adj),
            features,
            labels: Vec::new(),
            train_mask: Vec::new(),
            val_mask: Vec::new(),
            test_mask: Vec::new(),
        })
    }
}

/// Unique undirected (u, v) pairs with u < v; self-loops removed.
fn dedup_undirected(edges: &[(usize, usize)], num_nodes: usize) -> Result<Vec<(usize, usize)>> {
    let mut set = std::collections::BTreeSet::new();
    for &(u, v) in edges {
        for idx in [u, v] {
            if idx >= num_nodes {
                return Err(Error::NodeIndexOutOfRange {
                    index: idx,
                    num_nodes,
                });
            }
        }
        if u != v {
            set.insert((u.min(v), u.max(v)));
        }
    }
    Ok(set.into_iter().collect())
}

/// Re-normalized adjacency D̃^(−1/2) Ã D̃^(−1/2) with Ã = A + I, after
/// symmetrizing and deduplicating the edge list.
///
/// Entry (v, u) is 1/sqrt(d̃_v · d̃_u) for every u ∈ N_v ∪ {v}.
pub fn normalize_adjacency(edges: &[(usize, usize)], num_nodes: usize) -> Result<CsrMatrix> {
    if num_nodes == 0 {
        return Err(Error::EmptyGraph);
    }
    let unique = dedup_undirected(edges, num_nodes)?;
    let mut weighted: Vec<(usize, usize, f64)> = Vec::with_capacity(unique.len() * 2 + num_nodes);
    for &(u, v) in &unique {
        weighted.push((u, v, 1.0));
        weighted.push((v, u, 1.0));
    }
    for n in 0..num_nodes {
        weighted.push((n, n, 1.0));
    }
    normalize_weighted(&weighted, num_nodes)
}

/// Weighted variant: takes (u, v, weight) entries for Ã directly (self-loop
/// entries included by the caller) and applies the symmetric degree
/// normalization with d̃_v = Σ_u Ã_{v,u}.
pub fn normalize_adjacency_weighted(
    entries: &[(usize, usize, f64)],
    num_nodes: usize,
) -> Result<CsrMatrix> {
    if num_nodes == 0 {
        return Err(Error::EmptyGraph);
    }
    for &(u, v, _) in entries {
        for idx in [u, v] {
            if idx >= num_nodes {
                return Err(Error::NodeIndexOutOfRange {
                    index: idx,
                    num_nodes,
                });
            }
        }
    }
    normalize_weighted(entries, num_nodes)
}

fn normalize_weighted(entries: &[(usize, usize, f64)], num_nodes: usize) -> Result<CsrMatrix> {
    let adj = CsrMatrix::from_triplets(num_nodes, num_nodes, entries);
    let mut degree = vec![0.0f64; num_nodes];
    for r in 0..num_nodes {
        let (_, vals) = adj.row(r);
        degree[r] = vals.iter().sum();
    }
    let inv_sqrt: Vec<f64> = degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let mut norm = adj;
    for r in 0..norm.n_rows {
        let (lo, hi) = (norm.row_ptr[r], norm.row_ptr[r + 1]);
        for pos in lo..hi {
            let c = norm.col_idx[pos];
            norm.values[pos] *= inv_sqrt[r] * inv_sqrt[c];
        }
    }
    Ok(norm)
}

/// Degree of each node (without self-loops), over the deduplicated
/// undirected edge list.
pub fn degrees(edges: &[(usize, usize)], num_nodes: usize) -> Result<Vec<usize>> {
    let unique = dedup_undirected(edges, num_nodes)?;
    let mut deg = vec![0usize; num_nodes];
    for &(u, v) in &unique {
        deg[u] += 1;
        deg[v] += 1;
    }
    Ok(deg)
}

/// One-hot degree features: row v has a 1 at position deg(v).
///
/// `max_degree` must be computed dataset-wide so the feature dimension is
/// consistent across graphs and folds.
pub fn degree_onehot_features(
    edges: &[(usize, usize)],
    num_nodes: usize,
    max_degree: usize,
) -> Result<Mat> {
    let deg = degrees(edges, num_nodes)?;
    let mut out = Mat::zeros((num_nodes, max_degree + 1));
    for (v, &d) in deg.iter().enumerate() {
        if d > max_degree {
            return Err(Error::DegreeOverflow {
                degree: d,
                max_degree,
            });
        }
        out[(v, d)] = 1.0;
    }
    Ok(out)
}

/// Boolean train/val/test masks over nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMasks {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

/// Stratified split: per class, `fractions` of its members go to
/// train/val/test (rounded, remainder to test), so per-class proportions
/// stay within one node of the target. Deterministic under `seed`.
pub fn stratified_split(
    labels: &[usize],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<SplitMasks> {
    let n = labels.len();
    let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (idx, &l) in labels.iter().enumerate() {
        by_class[l].push(idx);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < 5 {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                min: 5,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut masks = SplitMasks {
        train: vec![false; n],
        val: vec![false; n],
        test: vec![false; n],
    };
    for members in &mut by_class {
        members.shuffle(&mut rng);
        let m = members.len();
        let n_train = (fractions.0 * m as f64).round() as usize;
        let n_val = (fractions.1 * m as f64).round() as usize;
        let n_val = n_val.min(m - n_train);
        for (pos, &idx) in members.iter().enumerate() {
            if pos < n_train {
                masks.train[idx] = true;
            } else if pos < n_train + n_val {
                masks.val[idx] = true;
            } else {
                masks.test[idx] = true;
            }
        }
    }
    Ok(masks)
}

/// K-fold indices: a seeded shuffle of [0, n) dealt into k folds whose
/// sizes differ by at most one; returns (train, test) index lists.
pub fn kfold_indices(num_items: usize, k: usize, seed: u64) -> Vec<(Vec<usize>, Vec<usize>)> {
    assert!(k >= 2, "k-fold needs k >= 2");
    let mut order: Vec<usize> = (0..num_items).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = num_items / k;
    let extra = num_items % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    (0..k)
        .map(|f| {
            let test = folds[f].clone();
            let train = folds
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != f)
                .flat_map(|(_, fold)| fold.iter().copied())
                .collect();
            (train, test)
        })
        .collect()
}

/// Stratified k-fold: like [`kfold_indices`] but dealing each class's
/// members separately so fold label proportions match the dataset (the
/// convention of the shared graph-classification evaluation scheme).
pub fn stratified_kfold_indices(
    labels: &[usize],
    k: usize,
    seed: u64,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    assert!(k >= 2, "k-fold needs k >= 2");
    let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in 0..num_classes {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect();
        members.shuffle(&mut rng);
        for (pos, idx) in members.into_iter().enumerate() {
            folds[pos % k].push(idx);
        }
    }
    (0..k)
        .map(|f| {
            let test = folds[f].clone();
            let train = folds
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != f)
                .flat_map(|(_, fold)| fold.iter().copied())
                .collect();
            (train, test)
        })
        .collect()
}

/// Block-diagonal union of disjoint graphs: stacked dense features, a
/// block-diagonal normalized adjacency, and per-graph node ranges for
/// pooling.
#[derive(Debug, Clone)]
pub struct GraphBatch {
    /// Prefix sums of node counts; length = #graphs + 1.
    pub node_offsets: Vec<usize>,
    pub norm_adj: Arc<CsrMatrix>,
    pub features: Mat,
    pub labels: Vec<usize>,
}

impl GraphBatch {
    /// Assembles a batch from graphs with dense features of equal dim.
    pub fn new(graphs: &[&Graph], labels: &[usize]) -> Result<Self> {
        assert_eq!(graphs.len(), labels.len());
        if graphs.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let dim = graphs[0].features.dim();
        let total: usize = graphs.iter().map(|g| g.num_nodes).sum();
        let mut features = Mat::zeros((total, dim));
        let mut node_offsets = Vec::with_capacity(graphs.len() + 1);
        node_offsets.push(0);
        let mut row = 0;
        for g in graphs {
            let dense = g.features.as_dense().ok_or_else(|| Error::ShapeMismatch {
                op: "GraphBatch::new",
                details: "batching requires dense features".into(),
            })?;
            if dense.ncols() != dim {
                return Err(Error::ShapeMismatch {
                    op: "GraphBatch::new",
                    details: format!("feature dim {} vs {}", dense.ncols(), dim),
                });
            }
            features
                .slice_mut(ndarray::s![row..row + g.num_nodes, ..])
                .assign(dense);
            row += g.num_nodes;
            node_offsets.push(row);
        }
        let blocks: Vec<&CsrMatrix> = graphs.iter().map(|g| g.norm_adj.as_ref()).collect();
        Ok(Self {
            node_offsets,
            norm_adj: Arc::new(CsrMatrix::block_diag(&blocks)),
            features,
            labels: labels.to_vec(),
        })
    }

    pub fn num_graphs(&self) -> usize {
        self.node_offsets.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        *self.node_offsets.last().unwrap()
    }

    /// Per-graph (start, end) node ranges.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        self.node_offsets
            .windows(2)
            .map(|w| (w[0], w[1]))
            .collect()
    }
}
