//! Reverse-mode differentiation over the fixed op vocabulary used by the
//! models, plus a finite-difference verifier.
//!
//! A [`Tape`] records a forward computation as a topologically ordered list
//! of ops with cached values; [`Tape::backward`] replays it in reverse. The
//! vocabulary is a closed enum, so an op outside it is unrepresentable. The
//! Hamilton-structured matmul is a dedicated op whose adjoint is derived
//! from the transposed signed block form and cross-checked against finite
//! differences in tests rather than trusted.
//!
//! A tape is confined to one training worker; several tapes may run
//! concurrently with no shared mutable state.

use crate::error::{Error, Result};
use crate::graphcore::CsrMatrix;
use crate::qalg::HAMILTON_TABLE;
use crate::Mat;
use ndarray::{concatenate, Axis};
use std::sync::Arc;

/// Shared dense matrix: clones are O(1) until mutated.
pub type Value = ndarray::ArcArray2<f64>;

/// Handle to a tensor recorded on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    /// A·B
    Matmul { a: TensorId, b: TensorId },
    /// S·X with a constant sparse S
    SpMatmul { s: Arc<CsrMatrix>, x: TensorId },
    /// One component of W ⊗ H in node-major layout: rows of `h` are
    /// quaternion vectors, each `w` component is stored [in × out].
    /// Component `c` is Σ sign · H_b · W_a over `HAMILTON_TABLE[c]`.
    QuatMatmulComp {
        h: [TensorId; 4],
        w: [TensorId; 4],
        comp: usize,
    },
    /// Σ coeff · X over the listed terms (covers elementwise add).
    LinComb { terms: Vec<(f64, TensorId)> },
    /// X + bias with bias a 1×d row broadcast over rows.
    AddBias { x: TensorId, bias: TensorId },
    Relu { x: TensorId },
    ConcatCols { parts: Vec<TensorId> },
    /// Per-range row sums: out[g, :] = Σ_{r in ranges[g]} X[r, :].
    RowRangeSum {
        x: TensorId,
        ranges: Arc<Vec<(usize, usize)>>,
    },
    /// Elementwise product with a constant mask (dropout).
    MulMask { x: TensorId, mask: Arc<Mat> },
    /// Mean over `rows` of −log softmax(logits[row])[labels[row]]; scalar.
    SoftmaxCrossEntropy {
        logits: TensorId,
        labels: Arc<Vec<usize>>,
        rows: Arc<Vec<usize>>,
    },
}

struct Node {
    value: Value,
    op: Op,
    trainable: bool,
}

/// Recorded forward computation, replayable in reverse for gradients.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients keyed by tensor id; a missing entry means zero gradient.
pub struct GradStore {
    grads: Vec<Option<Mat>>,
}

impl GradStore {
    pub fn get(&self, id: TensorId) -> Option<&Mat> {
        self.grads[id.0].as_ref()
    }

    /// Gradient for `id`, materializing zeros of the given shape when the
    /// loss does not depend on it.
    pub fn get_or_zeros(&self, id: TensorId, shape: (usize, usize)) -> Mat {
        match &self.grads[id.0] {
            Some(g) => g.clone(),
            None => Mat::zeros(shape),
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: TensorId) -> &Value {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: TensorId) -> f64 {
        let v = self.value(id);
        assert_eq!(v.dim(), (1, 1), "scalar() on non-1x1 tensor");
        v[(0, 0)]
    }

    fn push(&mut self, value: Value, op: Op, trainable: bool) -> TensorId {
        self.nodes.push(Node {
            value,
            op,
            trainable,
        });
        TensorId(self.nodes.len() - 1)
    }

    /// Records a constant input.
    pub fn constant(&mut self, value: Value) -> TensorId {
        self.push(value, Op::Leaf, false)
    }

    /// Records a trainable parameter leaf.
    pub fn param(&mut self, value: Value) -> TensorId {
        self.push(value, Op::Leaf, true)
    }

    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let v = self.value(a).dot(self.value(b)).into_shared();
        self.push(v, Op::Matmul { a, b }, false)
    }

    pub fn spmatmul(&mut self, s: Arc<CsrMatrix>, x: TensorId) -> TensorId {
        let v = s.matmul(&self.value(x).to_owned()).into_shared();
        self.push(v, Op::SpMatmul { s, x }, false)
    }

    /// Records the four components of W ⊗ H (node-major). `h` rows are
    /// quaternion vectors of dim `in`, `w` components are [in × out].
    pub fn quat_matmul(&mut self, w: [TensorId; 4], h: [TensorId; 4]) -> [TensorId; 4] {
        std::array::from_fn(|comp| {
            let mut acc: Option<Mat> = None;
            for &(a, b, sign) in &HAMILTON_TABLE[comp] {
                let term = self.value(h[b]).dot(self.value(w[a]));
                match &mut acc {
                    None => {
                        let mut t = term;
                        if sign < 0.0 {
                            t.mapv_inplace(|v| -v);
                        }
                        acc = Some(t);
                    }
                    Some(m) => m.scaled_add(sign, &term),
                }
            }
            self.push(
                acc.expect("table rows are non-empty").into_shared(),
                Op::QuatMatmulComp { h, w, comp },
                false,
            )
        })
    }

    pub fn lincomb(&mut self, terms: &[(f64, TensorId)]) -> TensorId {
        assert!(!terms.is_empty());
        let mut acc = Mat::zeros(self.value(terms[0].1).dim());
        for &(coeff, id) in terms {
            acc.scaled_add(coeff, self.value(id));
        }
        self.push(
            acc.into_shared(),
            Op::LinComb {
                terms: terms.to_vec(),
            },
            false,
        )
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> TensorId {
        self.lincomb(&[(1.0, a), (1.0, b)])
    }

    pub fn add_bias(&mut self, x: TensorId, bias: TensorId) -> TensorId {
        let xb = {
            let xv = self.value(x);
            let bv = self.value(bias);
            assert_eq!(bv.nrows(), 1, "bias must be a 1×d row");
            let broadcast = bv.broadcast(xv.dim()).expect("bias dim matches columns");
            (xv + &broadcast).into_shared()
        };
        self.push(xb, Op::AddBias { x, bias }, false)
    }

    pub fn relu(&mut self, x: TensorId) -> TensorId {
        let v = self.value(x).mapv(|t| t.max(0.0)).into_shared();
        self.push(v, Op::Relu { x }, false)
    }

    pub fn concat_cols(&mut self, parts: &[TensorId]) -> TensorId {
        assert!(!parts.is_empty());
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        let v = concatenate(Axis(1), &views)
            .expect("row counts match")
            .into_shared();
        self.push(
            v,
            Op::ConcatCols {
                parts: parts.to_vec(),
            },
            false,
        )
    }

    pub fn row_range_sum(&mut self, x: TensorId, ranges: Arc<Vec<(usize, usize)>>) -> TensorId {
        let v = {
            let xv = self.value(x);
            let mut out = Mat::zeros((ranges.len(), xv.ncols()));
            for (g, &(start, end)) in ranges.iter().enumerate() {
                let mut row = out.row_mut(g);
                for r in start..end {
                    row += &xv.row(r);
                }
            }
            out.into_shared()
        };
        self.push(v, Op::RowRangeSum { x, ranges }, false)
    }

    pub fn mul_mask(&mut self, x: TensorId, mask: Arc<Mat>) -> TensorId {
        let v = (self.value(x) * &*mask).into_shared();
        self.push(v, Op::MulMask { x, mask }, false)
    }

    pub fn softmax_cross_entropy(
        &mut self,
        logits: TensorId,
        labels: Arc<Vec<usize>>,
        rows: Arc<Vec<usize>>,
    ) -> TensorId {
        assert!(!rows.is_empty(), "cross-entropy over an empty row set");
        let loss = {
            let z = self.value(logits);
            let mut total = 0.0;
            for &r in rows.iter() {
                let row = z.row(r);
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let log_sum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
                total += log_sum - row[labels[r]];
            }
            total / rows.len() as f64
        };
        self.push(
            Mat::from_elem((1, 1), loss).into_shared(),
            Op::SoftmaxCrossEntropy {
                logits,
                labels,
                rows,
            },
            false,
        )
    }

    /// Gradients of a scalar loss with respect to every tensor it depends
    /// on. Can be called repeatedly; results are identical.
    pub fn backward(&self, loss: TensorId) -> Result<GradStore> {
        let loss_dim = self.value(loss).dim();
        if loss_dim != (1, 1) {
            return Err(Error::NonScalarLoss {
                rows: loss_dim.0,
                cols: loss_dim.1,
            });
        }
        let mut grads: Vec<Option<Mat>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Mat::from_elem((1, 1), 1.0));

        for idx in (0..=loss.0).rev() {
            let Some(go) = grads[idx].take() else {
                continue;
            };
            match &self.nodes[idx].op {
                Op::Leaf => {
                    grads[idx] = Some(go);
                    continue;
                }
                Op::Matmul { a, b } => {
                    let da = go.dot(&self.value(*b).t());
                    let db = self.value(*a).t().dot(&go);
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::SpMatmul { s, x } => {
                    accumulate(&mut grads, *x, s.transpose_matmul(&go));
                }
                Op::QuatMatmulComp { h, w, comp } => {
                    for &(a, b, sign) in &HAMILTON_TABLE[*comp] {
                        let mut dh = go.dot(&self.value(w[a]).t());
                        let mut dw = self.value(h[b]).t().dot(&go);
                        if sign < 0.0 {
                            dh.mapv_inplace(|v| -v);
                            dw.mapv_inplace(|v| -v);
                        }
                        accumulate(&mut grads, h[b], dh);
                        accumulate(&mut grads, w[a], dw);
                    }
                }
                Op::LinComb { terms } => {
                    for &(coeff, id) in terms {
                        accumulate(&mut grads, id, &go * coeff);
                    }
                }
                Op::AddBias { x, bias } => {
                    let db = go
                        .sum_axis(Axis(0))
                        .insert_axis(Axis(0));
                    accumulate(&mut grads, *x, go.clone());
                    accumulate(&mut grads, *bias, db);
                }
                Op::Relu { x } => {
                    // Subgradient at 0 is 0: pass only where input > 0.
                    let xv = self.value(*x);
                    let mut dx = go;
                    dx.zip_mut_with(&xv.to_owned(), |g, &v| {
                        if v <= 0.0 {
                            *g = 0.0;
                        }
                    });
                    accumulate(&mut grads, *x, dx);
                }
                Op::ConcatCols { parts } => {
                    let mut col = 0;
                    for &p in parts {
                        let w = self.value(p).ncols();
                        let slice = go.slice(ndarray::s![.., col..col + w]).to_owned();
                        accumulate(&mut grads, p, slice);
                        col += w;
                    }
                }
                Op::RowRangeSum { x, ranges } => {
                    let mut dx = Mat::zeros(self.value(*x).dim());
                    for (g, &(start, end)) in ranges.iter().enumerate() {
                        let go_row = go.row(g);
                        for r in start..end {
                            dx.row_mut(r).assign(&go_row);
                        }
                    }
                    accumulate(&mut grads, *x, dx);
                }
                Op::MulMask { x, mask } => {
                    accumulate(&mut grads, *x, &go * &**mask);
                }
                Op::SoftmaxCrossEntropy {
                    logits,
                    labels,
                    rows,
                } => {
                    let scale = go[(0, 0)] / rows.len() as f64;
                    let z = self.value(*logits);
                    let mut dz = Mat::zeros(z.dim());
                    for &r in rows.iter() {
                        let row = z.row(r);
                        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
                        let denom: f64 = exps.iter().sum();
                        for (c, e) in exps.iter().enumerate() {
                            dz[(r, c)] += scale * (e / denom);
                        }
                        dz[(r, labels[r])] -= scale;
                    }
                    accumulate(&mut grads, *logits, dz);
                }
            }
        }
        Ok(GradStore { grads })
    }

    /// Gradients for a list of parameter leaves, zeros where untouched.
    pub fn param_grads(&self, loss: TensorId, params: &[TensorId]) -> Result<Vec<Mat>> {
        let store = self.backward(loss)?;
        Ok(params
            .iter()
            .map(|&p| {
                debug_assert!(self.nodes[p.0].trainable, "param_grads on non-trainable leaf");
                store.get_or_zeros(p, self.value(p).dim())
            })
            .collect())
    }
}

fn accumulate(grads: &mut [Option<Mat>], id: TensorId, delta: Mat) {
    match &mut grads[id.0] {
        Some(g) => *g += &delta,
        slot @ None => *slot = Some(delta),
    }
}

/// Row-wise softmax (numerically stable); rows sum to 1.
pub fn softmax_rows(logits: &Mat) -> Mat {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Outcome of a finite-difference gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// (param index, flat offset, analytic, numeric) of the worst entry.
    pub worst: Option<(usize, usize, f64, f64)>,
}

impl GradCheckReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

/// Compares analytic gradients against central finite differences
/// (f(θ+ε) − f(θ−ε)) / 2ε on a seeded sample of at least `min_samples`
/// scalar parameters (all of them when fewer exist).
///
/// Relative error is |a − b| / max(1e−8, |a| + |b|).
pub fn check_gradients<F>(
    loss_fn: F,
    params: &[Mat],
    analytic: &[Mat],
    epsilon: f64,
    min_samples: usize,
    seed: u64,
) -> GradCheckReport
where
    F: Fn(&[Mat]) -> f64,
{
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    assert_eq!(params.len(), analytic.len());
    let mut coords: Vec<(usize, usize)> = Vec::new();
    for (p, m) in params.iter().enumerate() {
        for flat in 0..m.len() {
            coords.push((p, flat));
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    coords.shuffle(&mut rng);
    let take = coords.len().min(min_samples.max(1));

    let mut work: Vec<Mat> = params.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        worst: None,
    };
    for &(p, flat) in coords.iter().take(take) {
        let cols = work[p].ncols();
        let coord = (flat / cols, flat % cols);
        let orig = work[p][coord];
        work[p][coord] = orig + epsilon;
        let up = loss_fn(&work);
        work[p][coord] = orig - epsilon;
        let down = loss_fn(&work);
        work[p][coord] = orig;

        let numeric = (up - down) / (2.0 * epsilon);
        let a = analytic[p][coord];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        report.checked += 1;
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst = Some((p, flat, a, numeric));
        }
    }
    report
}
