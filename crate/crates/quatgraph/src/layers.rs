//! QGNN and GCN layers, activation, readouts, and classification heads.
//!
//! Forward conventions are node-major: hidden states are n×d matrices with
//! one row per node. A quaternion layer stores its weight as a `QTensor`
//! with `in_q` rows and `out_q` columns, so the per-node Hamilton product
//! W ⊗ h_u becomes four signed sums of real products H_b · W_a driven by
//! [`crate::qalg::HAMILTON_TABLE`].

use crate::autograd::softmax_rows;
use crate::error::{Error, Result};
use crate::graphcore::{CsrMatrix, GraphBatch};
use crate::qalg::{QTensor, HAMILTON_TABLE};
use crate::Mat;
use ndarray::{concatenate, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Nonlinearity applied independently to each quaternion component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    #[default]
    Relu,
    Identity,
}

impl ActivationKind {
    pub fn apply(&self, m: &mut Mat) {
        if let ActivationKind::Relu = self {
            m.mapv_inplace(|v| v.max(0.0));
        }
    }
}

/// Graph convolution in the quaternion space: h_v ← g(Σ a_vu · W ⊗ h_u).
#[derive(Debug, Clone)]
pub struct QgnnLayer {
    /// Quaternion weight with components [in_q × out_q].
    pub weight: QTensor,
    /// Optional bias, one 1×out_q row per component.
    pub bias: Option<[Mat; 4]>,
    pub activation: ActivationKind,
}

/// Real-valued GCN convolution: h_v ← g(Σ a_vu · W h_u).
#[derive(Debug, Clone)]
pub struct GcnLayer {
    /// Weight [in × out].
    pub weight: Mat,
    /// Optional bias row [1 × out].
    pub bias: Option<Mat>,
    pub activation: ActivationKind,
}

/// Node-classification prediction layer: softmax(Σ a_vu · W₁ x_u).
#[derive(Debug, Clone)]
pub struct NodeHead {
    /// Weight [input dim × classes]; for a QGNN the input dim is 4·out_q.
    pub weight: Mat,
    pub bias: Option<Mat>,
}

/// Graph-classification head over the vectorized pooled readout.
#[derive(Debug, Clone)]
pub struct GraphHead {
    /// Weight [4·Σ per-layer out_q × classes] (QGNN) or [Σ hidden × classes] (GCN).
    pub weight: Mat,
    pub bias: Option<Mat>,
}

/// Uniform Glorot sample in ±sqrt(6 / (fan_in + fan_out)) for a
/// rows×cols matrix, drawn from the supplied generator.
pub fn glorot_with(rows: usize, cols: usize, rng: &mut impl Rng) -> Mat {
    let s = (6.0 / (rows + cols) as f64).sqrt();
    Mat::from_shape_fn((rows, cols), |_| rng.random_range(-s..s))
}

/// Seeded Glorot initialization; deterministic under `seed`.
pub fn glorot_init(shape: (usize, usize), seed: u64) -> Mat {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    glorot_with(shape.0, shape.1, &mut rng)
}

impl QgnnLayer {
    /// Glorot-initialized layer; each of the four component matrices is
    /// drawn independently with the same fan bounds.
    pub fn glorot(in_q: usize, out_q: usize, bias: bool, activation: ActivationKind, rng: &mut impl Rng) -> Self {
        let comps: [Mat; 4] = std::array::from_fn(|_| glorot_with(in_q, out_q, rng));
        let weight = QTensor::from_components(
            comps[0].clone(),
            comps[1].clone(),
            comps[2].clone(),
            comps[3].clone(),
        )
        .expect("equal shapes");
        Self {
            weight,
            bias: bias.then(|| std::array::from_fn(|_| Mat::zeros((1, out_q)))),
            activation,
        }
    }

    pub fn in_q(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_q(&self) -> usize {
        self.weight.cols()
    }
}

impl GcnLayer {
    pub fn glorot(in_dim: usize, out_dim: usize, bias: bool, activation: ActivationKind, rng: &mut impl Rng) -> Self {
        Self {
            weight: glorot_with(in_dim, out_dim, rng),
            bias: bias.then(|| Mat::zeros((1, out_dim))),
            activation,
        }
    }
}

/// One QGNN aggregation step over all nodes.
///
/// For each node v: g(Σ_{u ∈ N_v ∪ {v}} a_vu · (W ⊗ h_u) + bias), where the
/// edge constant a_vu scales all four components.
pub fn qgnn_forward(layer: &QgnnLayer, norm_adj: &CsrMatrix, h: &QTensor) -> Result<QTensor> {
    if h.cols() != layer.in_q() {
        return Err(Error::ShapeMismatch {
            op: "qgnn_forward",
            details: format!("hidden dim {} vs layer in_q {}", h.cols(), layer.in_q()),
        });
    }
    if norm_adj.n_rows != h.rows() || norm_adj.n_cols != h.rows() {
        return Err(Error::ShapeMismatch {
            op: "qgnn_forward",
            details: format!(
                "adjacency {}x{} vs {} nodes",
                norm_adj.n_rows,
                norm_adj.n_cols,
                h.rows()
            ),
        });
    }
    let mut out: [Mat; 4] = std::array::from_fn(|_| Mat::zeros((0, 0)));
    for (c, terms) in HAMILTON_TABLE.iter().enumerate() {
        let mut pre = Mat::zeros((h.rows(), layer.out_q()));
        for &(a, b, sign) in terms {
            pre.scaled_add(sign, &h.comp(b).dot(layer.weight.comp(a)));
        }
        let mut agg = norm_adj.matmul(&pre);
        if let Some(bias) = &layer.bias {
            agg += &bias[c].broadcast(agg.dim()).unwrap();
        }
        layer.activation.apply(&mut agg);
        out[c] = agg;
    }
    let [r, i, j, k] = out;
    QTensor::from_components(r, i, j, k)
}

/// One GCN aggregation step: g(norm_adj · H · W + bias).
pub fn gcn_forward(layer: &GcnLayer, norm_adj: &CsrMatrix, h: &Mat) -> Result<Mat> {
    if h.ncols() != layer.weight.nrows() {
        return Err(Error::ShapeMismatch {
            op: "gcn_forward",
            details: format!("hidden dim {} vs weight rows {}", h.ncols(), layer.weight.nrows()),
        });
    }
    if norm_adj.n_cols != h.nrows() {
        return Err(Error::ShapeMismatch {
            op: "gcn_forward",
            details: format!("adjacency cols {} vs {} nodes", norm_adj.n_cols, h.nrows()),
        });
    }
    let mut agg = norm_adj.matmul(&h.dot(&layer.weight));
    if let Some(bias) = &layer.bias {
        agg += &bias.broadcast(agg.dim()).unwrap();
    }
    layer.activation.apply(&mut agg);
    Ok(agg)
}

/// Per-row vectorization of a quaternion matrix: [H_r | H_i | H_j | H_k],
/// giving an n × 4d real matrix whose row v is Vec(h_v).
pub fn vec_rows(h: &QTensor) -> Mat {
    concatenate(
        Axis(1),
        &[
            h.comp(0).view(),
            h.comp(1).view(),
            h.comp(2).view(),
            h.comp(3).view(),
        ],
    )
    .expect("components share shape")
}

/// Node prediction: softmax over classes of the neighborhood-aggregated
/// linear map, softmax(norm_adj · X · W₁) per node.
pub fn node_head_forward(head: &NodeHead, norm_adj: &CsrMatrix, x: &Mat) -> Result<Mat> {
    if x.ncols() != head.weight.nrows() {
        return Err(Error::ShapeMismatch {
            op: "node_head_forward",
            details: format!("input dim {} vs weight rows {}", x.ncols(), head.weight.nrows()),
        });
    }
    let mut logits = norm_adj.matmul(&x.dot(&head.weight));
    if let Some(bias) = &head.bias {
        logits += &bias.broadcast(logits.dim()).unwrap();
    }
    Ok(softmax_rows(&logits))
}

/// Concatenation of per-layer node states (layers 1..L; input features are
/// excluded by the caller): componentwise column concat.
pub fn concat_readout(per_layer: &[QTensor]) -> Result<QTensor> {
    if per_layer.is_empty() {
        return Err(Error::ShapeMismatch {
            op: "concat_readout",
            details: "no layers to concatenate".into(),
        });
    }
    let rows = per_layer[0].rows();
    for t in per_layer {
        if t.rows() != rows {
            return Err(Error::ShapeMismatch {
                op: "concat_readout",
                details: format!("row counts differ: {} vs {}", t.rows(), rows),
            });
        }
    }
    let comps: [Mat; 4] = std::array::from_fn(|c| {
        let views: Vec<_> = per_layer.iter().map(|t| t.comp(c).view()).collect();
        concatenate(Axis(1), &views).expect("equal rows")
    });
    let [r, i, j, k] = comps;
    QTensor::from_components(r, i, j, k)
}

/// Sum pooling: per-graph componentwise sum over that graph's node range.
pub fn sum_pool(h: &QTensor, batch: &GraphBatch) -> Result<QTensor> {
    if h.rows() != batch.num_nodes() {
        return Err(Error::ShapeMismatch {
            op: "sum_pool",
            details: format!("{} rows vs {} batch nodes", h.rows(), batch.num_nodes()),
        });
    }
    let comps: [Mat; 4] = std::array::from_fn(|c| {
        let src = h.comp(c);
        let mut out = Mat::zeros((batch.num_graphs(), h.cols()));
        for (g, (start, end)) in batch.ranges().into_iter().enumerate() {
            let mut row = out.row_mut(g);
            for r in start..end {
                row += &src.row(r);
            }
        }
        out
    });
    let [r, i, j, k] = comps;
    QTensor::from_components(r, i, j, k)
}

/// Graph prediction: softmax(Vec(e_G) · W) per graph.
pub fn graph_head_forward(head: &GraphHead, e_g: &QTensor) -> Result<Mat> {
    let x = vec_rows(e_g);
    if x.ncols() != head.weight.nrows() {
        return Err(Error::ShapeMismatch {
            op: "graph_head_forward",
            details: format!("input dim {} vs weight rows {}", x.ncols(), head.weight.nrows()),
        });
    }
    let mut logits = x.dot(&head.weight);
    if let Some(bias) = &head.bias {
        logits += &bias.broadcast(logits.dim()).unwrap();
    }
    Ok(softmax_rows(&logits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::{normalize_adjacency, Features, Graph};
    use crate::qalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng_qtensor(rows: usize, cols: usize, seed: u64) -> QTensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comps: [Mat; 4] =
            std::array::from_fn(|_| Mat::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0)));
        QTensor::from_components(
            comps[0].clone(),
            comps[1].clone(),
            comps[2].clone(),
            comps[3].clone(),
        )
        .unwrap()
    }

    fn quaternion_identity_weight(n: usize) -> QTensor {
        let mut r = Mat::zeros((n, n));
        for d in 0..n {
            r[(d, d)] = 1.0;
        }
        QTensor::from_components(r, Mat::zeros((n, n)), Mat::zeros((n, n)), Mat::zeros((n, n)))
            .unwrap()
    }

    #[test]
    fn single_node_identity_layer_is_identity() {
        let layer = QgnnLayer {
            weight: quaternion_identity_weight(3),
            bias: None,
            activation: ActivationKind::Identity,
        };
        let adj = normalize_adjacency(&[], 1).unwrap();
        let h = rng_qtensor(1, 3, 0);
        let out = qgnn_forward(&layer, &adj, &h).unwrap();
        assert!(out.max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn two_node_edge_averages_states() {
        let layer = QgnnLayer {
            weight: quaternion_identity_weight(2),
            bias: None,
            activation: ActivationKind::Identity,
        };
        let adj = normalize_adjacency(&[(0, 1)], 2).unwrap();
        let h = rng_qtensor(2, 2, 1);
        let out = qgnn_forward(&layer, &adj, &h).unwrap();
        for c in 0..4 {
            for col in 0..2 {
                let avg = 0.5 * (h.comp(c)[(0, col)] + h.comp(c)[(1, col)]);
                assert!((out.comp(c)[(0, col)] - avg).abs() < 1e-14);
                assert!((out.comp(c)[(1, col)] - avg).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn qgnn_forward_matches_dense_block_oracle() {
        // Reference: build the (4·out)×(4·in) block matrix of the paper-form
        // weight, multiply each node's stacked state, then apply the
        // normalized adjacency.
        let (n, in_q, out_q) = (5, 3, 2);
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)];
        let adj = normalize_adjacency(&edges, n).unwrap();
        let h = rng_qtensor(n, in_q, 2);
        let weight = rng_qtensor(in_q, out_q, 3);
        let layer = QgnnLayer {
            weight: weight.clone(),
            bias: None,
            activation: ActivationKind::Relu,
        };
        let out = qgnn_forward(&layer, &adj, &h).unwrap();

        // Paper-orientation weight = component transposes.
        let w_paper = QTensor::from_components(
            weight.comp(0).t().to_owned(),
            weight.comp(1).t().to_owned(),
            weight.comp(2).t().to_owned(),
            weight.comp(3).t().to_owned(),
        )
        .unwrap();
        let big = qalg::block_matrix(&w_paper);
        // Per-node transformed states, stacked 4·out vectors.
        let mut transformed = Mat::zeros((n, 4 * out_q));
        for u in 0..n {
            let stacked: Vec<f64> = (0..4).flat_map(|c| h.comp(c).row(u).to_vec()).collect();
            let x = Mat::from_shape_vec((4 * in_q, 1), stacked).unwrap();
            let y = big.dot(&x);
            for idx in 0..4 * out_q {
                transformed[(u, idx)] = y[(idx, 0)];
            }
        }
        let aggregated = adj.matmul(&transformed);
        for u in 0..n {
            for c in 0..4 {
                for o in 0..out_q {
                    let want = aggregated[(u, c * out_q + o)].max(0.0);
                    let got = out.comp(c)[(u, o)];
                    assert!((got - want).abs() < 1e-10, "node {u} comp {c} col {o}");
                }
            }
        }
    }

    #[test]
    fn gcn_forward_examples() {
        // Identity weight on a single node returns the input.
        let layer = GcnLayer {
            weight: Mat::from_diag_elem(3, 1.0),
            bias: None,
            activation: ActivationKind::Identity,
        };
        let adj = normalize_adjacency(&[], 1).unwrap();
        let h = Mat::from_shape_vec((1, 3), vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(gcn_forward(&layer, &adj, &h).unwrap(), h);

        // Zero weight with bias gives g(bias) rows.
        let layer = GcnLayer {
            weight: Mat::zeros((3, 2)),
            bias: Some(Mat::from_shape_vec((1, 2), vec![0.7, -0.3]).unwrap()),
            activation: ActivationKind::Relu,
        };
        let adj = normalize_adjacency(&[(0, 1)], 2).unwrap();
        let h = Mat::from_elem((2, 3), 2.0);
        let out = gcn_forward(&layer, &adj, &h).unwrap();
        for r in 0..2 {
            assert_eq!(out[(r, 0)], 0.7);
            assert_eq!(out[(r, 1)], 0.0);
        }

        // Random small graph matches the dense triple product.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layer = GcnLayer {
            weight: glorot_with(4, 3, &mut rng),
            bias: None,
            activation: ActivationKind::Identity,
        };
        let edges = [(0, 1), (1, 2), (0, 2), (2, 3)];
        let adj = normalize_adjacency(&edges, 4).unwrap();
        let h = Mat::from_shape_fn((4, 4), |_| rng.random_range(-1.0..1.0));
        let out = gcn_forward(&layer, &adj, &h).unwrap();
        let want = adj.to_dense().dot(&h).dot(&layer.weight);
        let diff = (&out - &want).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(diff < 1e-10);
    }

    #[test]
    fn node_head_examples() {
        // Single node: softmax(W₁ᵀ x).
        let head = NodeHead {
            weight: Mat::from_shape_vec((2, 3), vec![1.0, 0.0, -1.0, 0.5, 2.0, 0.0]).unwrap(),
            bias: None,
        };
        let adj = normalize_adjacency(&[], 1).unwrap();
        let x = Mat::from_shape_vec((1, 2), vec![1.0, 2.0]).unwrap();
        let probs = node_head_forward(&head, &adj, &x).unwrap();
        let logits = x.dot(&head.weight);
        let want = softmax_rows(&logits);
        assert!((&probs - &want).iter().all(|v| v.abs() < 1e-14));
        assert!((probs.row(0).sum() - 1.0).abs() < 1e-12);

        // Uniform logits give uniform probabilities.
        let head = NodeHead {
            weight: Mat::zeros((2, 4)),
            bias: None,
        };
        let probs = node_head_forward(&head, &adj, &x).unwrap();
        for c in 0..4 {
            assert!((probs[(0, c)] - 0.25).abs() < 1e-14);
        }

        // 3-node path matches the dense oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let head = NodeHead {
            weight: glorot_with(3, 2, &mut rng),
            bias: None,
        };
        let adj = normalize_adjacency(&[(0, 1), (1, 2)], 3).unwrap();
        let x = Mat::from_shape_fn((3, 3), |_| rng.random_range(-1.0..1.0));
        let probs = node_head_forward(&head, &adj, &x).unwrap();
        let want = softmax_rows(&adj.to_dense().dot(&x).dot(&head.weight));
        let diff = (&probs - &want).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(diff < 1e-12);
    }

    #[test]
    fn concat_readout_dims_and_permutation() {
        let a = rng_qtensor(4, 2, 11);
        let b = rng_qtensor(4, 3, 12);
        let single = concat_readout(std::slice::from_ref(&a)).unwrap();
        assert!(single.max_abs_diff(&a) == 0.0);
        let cat = concat_readout(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(cat.cols(), 5);
        // Vec of a row of the result is the documented block permutation of
        // the per-layer vecs: component blocks interleave layer blocks.
        let v = vec_rows(&cat);
        for node in 0..4 {
            for c in 0..4 {
                for col in 0..2 {
                    assert_eq!(v[(node, c * 5 + col)], a.comp(c)[(node, col)]);
                }
                for col in 0..3 {
                    assert_eq!(v[(node, c * 5 + 2 + col)], b.comp(c)[(node, col)]);
                }
            }
        }
    }

    #[test]
    fn sum_pool_examples() {
        let g1 = Graph::new(1, &[], Features::Dense(Mat::zeros((1, 2)))).unwrap();
        let g2 = Graph::new(3, &[(0, 1), (1, 2)], Features::Dense(Mat::zeros((3, 2)))).unwrap();
        let batch = GraphBatch::new(&[&g1, &g2], &[0, 1]).unwrap();
        let h = rng_qtensor(4, 2, 13);
        let pooled = sum_pool(&h, &batch).unwrap();
        assert_eq!(pooled.rows(), 2);
        for c in 0..4 {
            for col in 0..2 {
                assert_eq!(pooled.comp(c)[(0, col)], h.comp(c)[(0, col)]);
                let want: f64 = (1..4).map(|r| h.comp(c)[(r, col)]).sum();
                assert!((pooled.comp(c)[(1, col)] - want).abs() < 1e-14);
            }
        }
        // All-zero features pool to zero.
        let zero = QTensor::zeros(4, 2);
        let pooled = sum_pool(&zero, &batch).unwrap();
        assert_eq!(pooled.comp(0).sum(), 0.0);
    }

    #[test]
    fn sum_pool_is_order_invariant_within_graph() {
        let g = Graph::new(4, &[(0, 1), (2, 3)], Features::Dense(Mat::zeros((4, 3)))).unwrap();
        let batch = GraphBatch::new(&[&g], &[0]).unwrap();
        let h = rng_qtensor(4, 3, 14);
        let pooled = sum_pool(&h, &batch).unwrap();
        // Permute rows of h.
        let perm = [2usize, 0, 3, 1];
        let comps: [Mat; 4] = std::array::from_fn(|c| {
            let mut m = Mat::zeros((4, 3));
            for (dst, &src) in perm.iter().enumerate() {
                m.row_mut(dst).assign(&h.comp(c).row(src));
            }
            m
        });
        let hp = QTensor::from_components(
            comps[0].clone(),
            comps[1].clone(),
            comps[2].clone(),
            comps[3].clone(),
        )
        .unwrap();
        let pooled_p = sum_pool(&hp, &batch).unwrap();
        assert!(pooled.max_abs_diff(&pooled_p) < 1e-12);
    }

    #[test]
    fn graph_head_uniform_and_oracle() {
        let e = rng_qtensor(3, 2, 15);
        let head = GraphHead {
            weight: Mat::zeros((8, 5)),
            bias: None,
        };
        let probs = graph_head_forward(&head, &e).unwrap();
        for g in 0..3 {
            for c in 0..5 {
                assert!((probs[(g, c)] - 0.2).abs() < 1e-14);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let head = GraphHead {
            weight: glorot_with(8, 3, &mut rng),
            bias: None,
        };
        let probs = graph_head_forward(&head, &e).unwrap();
        let want = softmax_rows(&vec_rows(&e).dot(&head.weight));
        assert!((&probs - &want).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn glorot_bounds_and_variance() {
        let m = glorot_init((100, 100), 0);
        let s = (6.0 / 200.0f64).sqrt();
        assert!(m.iter().all(|&v| v > -s && v < s));
        let var = m.iter().map(|v| v * v).sum::<f64>() / m.len() as f64;
        let want = 2.0 / 200.0;
        assert!(
            (var - want).abs() < 0.2 * want,
            "variance {var} vs expected {want}"
        );
        // Deterministic under seed.
        assert_eq!(glorot_init((10, 10), 7), glorot_init((10, 10), 7));
        assert_ne!(glorot_init((10, 10), 7), glorot_init((10, 10), 8));
    }

    #[test]
    fn real_weight_layer_degenerates_to_gcn() {
        // With W_i = W_j = W_k = 0 and all-real duplicated inputs, every
        // output component equals a GCN layer with weight W_r.
        let (n, in_dim, out_dim) = (6, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w_r = glorot_with(in_dim, out_dim, &mut rng);
        let qlayer = QgnnLayer {
            weight: QTensor::from_components(
                w_r.clone(),
                Mat::zeros((in_dim, out_dim)),
                Mat::zeros((in_dim, out_dim)),
                Mat::zeros((in_dim, out_dim)),
            )
            .unwrap(),
            bias: None,
            activation: ActivationKind::Relu,
        };
        let glayer = GcnLayer {
            weight: w_r,
            bias: None,
            activation: ActivationKind::Relu,
        };
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)];
        let adj = normalize_adjacency(&edges, n).unwrap();
        let x = Mat::from_shape_fn((n, in_dim), |_| rng.random_range(-1.0..1.0));
        let h = QTensor::from_components(x.clone(), x.clone(), x.clone(), x.clone()).unwrap();
        let q_out = qgnn_forward(&qlayer, &adj, &h).unwrap();
        let g_out = gcn_forward(&glayer, &adj, &x).unwrap();
        for c in 0..4 {
            let diff = (q_out.comp(c) - &g_out)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(diff < 1e-10, "component {c} differs by {diff}");
        }
    }

    #[test]
    fn single_component_perturbation_touches_all_outputs() {
        // Perturbing only h_i changes all four output components for
        // generic weights.
        let (n, in_q, out_q) = (3, 2, 2);
        let weight = rng_qtensor(in_q, out_q, 18);
        let layer = QgnnLayer {
            weight,
            bias: None,
            activation: ActivationKind::Identity,
        };
        let adj = normalize_adjacency(&[(0, 1), (1, 2)], n).unwrap();
        let h = rng_qtensor(n, in_q, 19);
        let base = qgnn_forward(&layer, &adj, &h).unwrap();

        let mut i_comp = h.comp(1).clone();
        i_comp[(0, 0)] += 0.5;
        let h2 = QTensor::from_components(
            h.comp(0).clone(),
            i_comp,
            h.comp(2).clone(),
            h.comp(3).clone(),
        )
        .unwrap();
        let out2 = qgnn_forward(&layer, &adj, &h2).unwrap();
        for c in 0..4 {
            let delta = (out2.comp(c) - base.comp(c))
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(delta > 1e-9, "component {c} unchanged");
        }
    }

    #[test]
    fn node_permutation_equivariance() {
        let (n, in_q, out_q) = (5, 3, 2);
        let weight = rng_qtensor(in_q, out_q, 20);
        let layer = QgnnLayer {
            weight,
            bias: None,
            activation: ActivationKind::Relu,
        };
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)];
        let perm = [3usize, 1, 4, 0, 2]; // perm[old] = new
        let adj = normalize_adjacency(&edges, n).unwrap();
        let h = rng_qtensor(n, in_q, 21);
        let out = qgnn_forward(&layer, &adj, &h).unwrap();

        let perm_edges: Vec<(usize, usize)> =
            edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let adj_p = normalize_adjacency(&perm_edges, n).unwrap();
        let comps: [Mat; 4] = std::array::from_fn(|c| {
            let mut m = Mat::zeros((n, in_q));
            for old in 0..n {
                m.row_mut(perm[old]).assign(&h.comp(c).row(old));
            }
            m
        });
        let h_p = QTensor::from_components(
            comps[0].clone(),
            comps[1].clone(),
            comps[2].clone(),
            comps[3].clone(),
        )
        .unwrap();
        let out_p = qgnn_forward(&layer, &adj_p, &h_p).unwrap();
        for old in 0..n {
            for c in 0..4 {
                for col in 0..out_q {
                    let a = out.comp(c)[(old, col)];
                    let b = out_p.comp(c)[(perm[old], col)];
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
