//! Assembled classification models: stacked QGNN or GCN layers with a
//! graph- or node-level head, tape-recorded forward passes, parameter
//! counting, and checkpoint I/O.

use crate::autograd::{Tape, TensorId};
use crate::error::{Error, Result};
use crate::graphcore::{Features, Graph, GraphBatch};
use crate::layers::{ActivationKind, GcnLayer, GraphHead, NodeHead, QgnnLayer};
use crate::qalg::HAMILTON_TABLE;
use crate::Mat;
use rand::rngs::SmallRng;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Qgnn,
    Gcn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Graph,
    Node,
}

/// Architecture hyperparameters. `hidden` counts quaternions per layer for
/// a QGNN and real units for a GCN.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub arch: Arch,
    pub layers: usize,
    pub hidden: usize,
    #[serde(default)]
    pub bias: bool,
    #[serde(default)]
    pub dropout: f64,
    #[serde(default)]
    pub activation: ActivationKind,
}

#[derive(Debug, Clone)]
enum Layers {
    Qgnn(Vec<QgnnLayer>),
    Gcn(Vec<GcnLayer>),
}

#[derive(Debug, Clone)]
enum Head {
    Graph(GraphHead),
    Node(NodeHead),
}

/// A ready-to-train model. Parameters are mutated only between steps.
#[derive(Debug, Clone)]
pub struct Model {
    pub cfg: ModelConfig,
    pub feature_dim: usize,
    pub num_classes: usize,
    pub init_seed: u64,
    layers: Layers,
    head: Head,
}

/// Handles produced by a tape-recorded forward pass.
pub struct TapeForward {
    pub logits: TensorId,
    /// Parameter leaves in canonical order (matches [`Model::param_views`]).
    pub params: Vec<TensorId>,
    /// Per-layer quaternion states (QGNN) as four component ids each.
    pub layer_states_q: Vec<[TensorId; 4]>,
    /// Per-layer states (GCN).
    pub layer_states_r: Vec<TensorId>,
}

impl Model {
    /// Builds a Glorot-initialized model for `head_kind` classification.
    pub fn new(
        cfg: ModelConfig,
        feature_dim: usize,
        num_classes: usize,
        head_kind: HeadKind,
        seed: u64,
    ) -> Result<Self> {
        if cfg.layers == 0 || cfg.hidden == 0 {
            return Err(Error::Config(
                "model needs at least one layer and a positive hidden size".into(),
            ));
        }
        if !(0.0..1.0).contains(&cfg.dropout) {
            return Err(Error::Config(format!(
                "dropout must be in [0, 1), got {}",
                cfg.dropout
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = match cfg.arch {
            Arch::Qgnn => Layers::Qgnn(
                (0..cfg.layers)
                    .map(|l| {
                        let in_q = if l == 0 { feature_dim } else { cfg.hidden };
                        QgnnLayer::glorot(in_q, cfg.hidden, cfg.bias, cfg.activation, &mut rng)
                    })
                    .collect(),
            ),
            Arch::Gcn => Layers::Gcn(
                (0..cfg.layers)
                    .map(|l| {
                        let in_dim = if l == 0 { feature_dim } else { cfg.hidden };
                        GcnLayer::glorot(in_dim, cfg.hidden, cfg.bias, cfg.activation, &mut rng)
                    })
                    .collect(),
            ),
        };
        let head_in = match (cfg.arch, head_kind) {
            // Concat readout over layers 1..L, then Vec(.) for the QGNN.
            (Arch::Qgnn, HeadKind::Graph) => 4 * cfg.hidden * cfg.layers,
            (Arch::Qgnn, HeadKind::Node) => 4 * cfg.hidden,
            (Arch::Gcn, HeadKind::Graph) => cfg.hidden * cfg.layers,
            (Arch::Gcn, HeadKind::Node) => cfg.hidden,
        };
        let weight = crate::layers::glorot_with(head_in, num_classes, &mut rng);
        let bias = cfg.bias.then(|| Mat::zeros((1, num_classes)));
        let head = match head_kind {
            HeadKind::Graph => Head::Graph(GraphHead { weight, bias }),
            HeadKind::Node => Head::Node(NodeHead { weight, bias }),
        };
        Ok(Self {
            cfg,
            feature_dim,
            num_classes,
            init_seed: seed,
            layers,
            head,
        })
    }

    pub fn head_kind(&self) -> HeadKind {
        match self.head {
            Head::Graph(_) => HeadKind::Graph,
            Head::Node(_) => HeadKind::Node,
        }
    }

    pub fn qgnn_layers(&self) -> Option<&[QgnnLayer]> {
        match &self.layers {
            Layers::Qgnn(ls) => Some(ls),
            Layers::Gcn(_) => None,
        }
    }

    pub fn gcn_layers(&self) -> Option<&[GcnLayer]> {
        match &self.layers {
            Layers::Gcn(ls) => Some(ls),
            Layers::Qgnn(_) => None,
        }
    }

    /// Parameter names paired with shapes, in canonical order.
    pub fn param_names(&self) -> Vec<(String, (usize, usize))> {
        let comp_names = ["r", "i", "j", "k"];
        let mut out = Vec::new();
        match &self.layers {
            Layers::Qgnn(ls) => {
                for (l, layer) in ls.iter().enumerate() {
                    for c in 0..4 {
                        out.push((
                            format!("layer{l}.weight.{}", comp_names[c]),
                            layer.weight.comp(c).dim(),
                        ));
                    }
                    if let Some(bias) = &layer.bias {
                        for c in 0..4 {
                            out.push((format!("layer{l}.bias.{}", comp_names[c]), bias[c].dim()));
                        }
                    }
                }
            }
            Layers::Gcn(ls) => {
                for (l, layer) in ls.iter().enumerate() {
                    out.push((format!("layer{l}.weight"), layer.weight.dim()));
                    if let Some(bias) = &layer.bias {
                        out.push((format!("layer{l}.bias"), bias.dim()));
                    }
                }
            }
        }
        let (w, b) = match &self.head {
            Head::Graph(h) => (&h.weight, &h.bias),
            Head::Node(h) => (&h.weight, &h.bias),
        };
        out.push(("head.weight".into(), w.dim()));
        if let Some(bias) = b {
            out.push(("head.bias".into(), bias.dim()));
        }
        out
    }

    /// Immutable views of every trainable matrix, canonical order.
    pub fn param_views(&self) -> Vec<&Mat> {
        let mut out = Vec::new();
        match &self.layers {
            Layers::Qgnn(ls) => {
                for layer in ls {
                    out.extend(layer.weight.components().iter());
                    if let Some(bias) = &layer.bias {
                        out.extend(bias.iter());
                    }
                }
            }
            Layers::Gcn(ls) => {
                for layer in ls {
                    out.push(&layer.weight);
                    if let Some(bias) = &layer.bias {
                        out.push(bias);
                    }
                }
            }
        }
        match &self.head {
            Head::Graph(h) => {
                out.push(&h.weight);
                if let Some(bias) = &h.bias {
                    out.push(bias);
                }
            }
            Head::Node(h) => {
                out.push(&h.weight);
                if let Some(bias) = &h.bias {
                    out.push(bias);
                }
            }
        }
        out
    }

    /// Mutable views in the same canonical order.
    pub fn param_views_mut(&mut self) -> Vec<&mut Mat> {
        let mut out: Vec<&mut Mat> = Vec::new();
        match &mut self.layers {
            Layers::Qgnn(ls) => {
                for layer in ls.iter_mut() {
                    out.extend(layer.weight.components_mut().iter_mut());
                    if let Some(bias) = &mut layer.bias {
                        out.extend(bias.iter_mut());
                    }
                }
            }
            Layers::Gcn(ls) => {
                for layer in ls.iter_mut() {
                    out.push(&mut layer.weight);
                    if let Some(bias) = &mut layer.bias {
                        out.push(bias);
                    }
                }
            }
        }
        match &mut self.head {
            Head::Graph(h) => {
                out.push(&mut h.weight);
                if let Some(bias) = &mut h.bias {
                    out.push(bias);
                }
            }
            Head::Node(h) => {
                out.push(&mut h.weight);
                if let Some(bias) = &mut h.bias {
                    out.push(bias);
                }
            }
        }
        out
    }

    /// Exact count of trainable real scalars.
    pub fn param_count(&self) -> usize {
        self.param_views().iter().map(|m| m.len()).sum()
    }

    fn register_params(&self, tape: &mut Tape) -> Vec<TensorId> {
        self.param_views()
            .into_iter()
            .map(|m| tape.param(m.clone().into_shared()))
            .collect()
    }

    fn dropout(
        &self,
        tape: &mut Tape,
        id: TensorId,
        rng: &mut Option<&mut SmallRng>,
    ) -> TensorId {
        let p = self.cfg.dropout;
        let Some(rng) = rng else { return id };
        if p <= 0.0 {
            return id;
        }
        let dim = tape.value(id).dim();
        let keep = 1.0 / (1.0 - p);
        let mask = Mat::from_shape_fn(dim, |_| if rng.random::<f64>() < p { 0.0 } else { keep });
        tape.mul_mask(id, Arc::new(mask))
    }

    /// Records the stack of convolution layers on the tape, returning the
    /// per-layer states. `param_cursor` walks the canonical leaf order.
    fn record_layers(
        &self,
        tape: &mut Tape,
        adj: &Arc<crate::graphcore::CsrMatrix>,
        features: &Features,
        params: &[TensorId],
        cursor: &mut usize,
        rng: &mut Option<&mut SmallRng>,
    ) -> Result<(Vec<[TensorId; 4]>, Vec<TensorId>)> {
        let mut states_q: Vec<[TensorId; 4]> = Vec::new();
        let mut states_r: Vec<TensorId> = Vec::new();
        match &self.layers {
            Layers::Qgnn(ls) => {
                // Quaternion input: the four components all equal the real
                // features; one shared constant serves all four.
                let mut h: Option<[TensorId; 4]> = match features {
                    Features::Dense(x) => {
                        if x.ncols() != self.feature_dim {
                            return Err(Error::ConfigMismatch(format!(
                                "feature dim {} vs model {}",
                                x.ncols(),
                                self.feature_dim
                            )));
                        }
                        let leaf = tape.constant(x.clone().into_shared());
                        Some([leaf; 4])
                    }
                    // Identity features never materialize; the first layer
                    // collapses to signed sums of the weight components.
                    Features::Identity(_) => None,
                };
                for layer in ls {
                    let w: [TensorId; 4] = std::array::from_fn(|c| params[*cursor + c]);
                    *cursor += 4;
                    let bias: Option<[TensorId; 4]> = layer.bias.as_ref().map(|_| {
                        let b = std::array::from_fn(|c| params[*cursor + c]);
                        *cursor += 4;
                        b
                    });
                    let pre: [TensorId; 4] = match &h {
                        Some(comps) => {
                            let dropped: [TensorId; 4] =
                                std::array::from_fn(|c| self.dropout(tape, comps[c], rng));
                            tape.quat_matmul(w, dropped)
                        }
                        None => std::array::from_fn(|c| {
                            let terms: Vec<(f64, TensorId)> = HAMILTON_TABLE[c]
                                .iter()
                                .map(|&(a, _, sign)| (sign, w[a]))
                                .collect();
                            tape.lincomb(&terms)
                        }),
                    };
                    let next: [TensorId; 4] = std::array::from_fn(|c| {
                        let mut t = tape.spmatmul(adj.clone(), pre[c]);
                        if let Some(b) = &bias {
                            t = tape.add_bias(t, b[c]);
                        }
                        match layer.activation {
                            ActivationKind::Relu => tape.relu(t),
                            ActivationKind::Identity => t,
                        }
                    });
                    states_q.push(next);
                    h = Some(next);
                }
            }
            Layers::Gcn(ls) => {
                let mut h: Option<TensorId> = match features {
                    Features::Dense(x) => {
                        if x.ncols() != self.feature_dim {
                            return Err(Error::ConfigMismatch(format!(
                                "feature dim {} vs model {}",
                                x.ncols(),
                                self.feature_dim
                            )));
                        }
                        Some(tape.constant(x.clone().into_shared()))
                    }
                    Features::Identity(_) => None,
                };
                for layer in ls {
                    let w = params[*cursor];
                    *cursor += 1;
                    let bias = layer.bias.as_ref().map(|_| {
                        let b = params[*cursor];
                        *cursor += 1;
                        b
                    });
                    // Identity features: H·W is just W.
                    let pre = match h {
                        Some(hid) => {
                            let dropped = self.dropout(tape, hid, rng);
                            tape.matmul(dropped, w)
                        }
                        None => w,
                    };
                    let mut t = tape.spmatmul(adj.clone(), pre);
                    if let Some(b) = bias {
                        t = tape.add_bias(t, b);
                    }
                    let t = match layer.activation {
                        ActivationKind::Relu => tape.relu(t),
                        ActivationKind::Identity => t,
                    };
                    states_r.push(t);
                    h = Some(t);
                }
            }
        }
        Ok((states_q, states_r))
    }

    /// Tape-recorded graph-classification forward over a batch: layer
    /// stack, concat readout over layers 1..L, per-graph sum pooling,
    /// Vec(.), then the fully-connected head. Pass a generator to sample
    /// dropout masks (training); `None` runs in eval mode.
    pub fn forward_graph(
        &self,
        tape: &mut Tape,
        batch: &GraphBatch,
        mut rng: Option<&mut SmallRng>,
    ) -> Result<TapeForward> {
        if self.head_kind() != HeadKind::Graph {
            return Err(Error::ConfigMismatch("model has no graph head".into()));
        }
        let params = self.register_params(tape);
        let mut cursor = 0;
        let features = Features::Dense(batch.features.clone());
        let (states_q, states_r) = self.record_layers(
            tape,
            &batch.norm_adj,
            &features,
            &params,
            &mut cursor,
            &mut rng,
        )?;
        let ranges = Arc::new(batch.ranges());
        let pooled_x = match &self.layers {
            Layers::Qgnn(_) => {
                // Readout per component, pool, then Vec(.) column order
                // r, i, j, k.
                let pooled: [TensorId; 4] = std::array::from_fn(|c| {
                    let per_layer: Vec<TensorId> = states_q.iter().map(|s| s[c]).collect();
                    let cat = tape.concat_cols(&per_layer);
                    tape.row_range_sum(cat, ranges.clone())
                });
                tape.concat_cols(&pooled)
            }
            Layers::Gcn(_) => {
                let cat = tape.concat_cols(&states_r);
                tape.row_range_sum(cat, ranges.clone())
            }
        };
        let dropped = self.dropout(tape, pooled_x, &mut rng);
        let mut logits = tape.matmul(dropped, params[cursor]);
        cursor += 1;
        if matches!(&self.head, Head::Graph(GraphHead { bias: Some(_), .. })) {
            logits = tape.add_bias(logits, params[cursor]);
            cursor += 1;
        }
        debug_assert_eq!(cursor, params.len());
        Ok(TapeForward {
            logits,
            params,
            layer_states_q: states_q,
            layer_states_r: states_r,
        })
    }

    /// Tape-recorded node-classification forward: layer stack, Vec(.) of
    /// the last layer, then the neighborhood-aggregated prediction layer.
    pub fn forward_node(
        &self,
        tape: &mut Tape,
        graph: &Graph,
        mut rng: Option<&mut SmallRng>,
    ) -> Result<TapeForward> {
        if self.head_kind() != HeadKind::Node {
            return Err(Error::ConfigMismatch("model has no node head".into()));
        }
        let params = self.register_params(tape);
        let mut cursor = 0;
        let (states_q, states_r) = self.record_layers(
            tape,
            &graph.norm_adj,
            &graph.features,
            &params,
            &mut cursor,
            &mut rng,
        )?;
        let x = match &self.layers {
            Layers::Qgnn(_) => {
                let last = states_q.last().expect("at least one layer");
                tape.concat_cols(&[last[0], last[1], last[2], last[3]])
            }
            Layers::Gcn(_) => *states_r.last().expect("at least one layer"),
        };
        let dropped = self.dropout(tape, x, &mut rng);
        let xw = tape.matmul(dropped, params[cursor]);
        cursor += 1;
        let mut logits = tape.spmatmul(graph.norm_adj.clone(), xw);
        if matches!(&self.head, Head::Node(NodeHead { bias: Some(_), .. })) {
            logits = tape.add_bias(logits, params[cursor]);
            cursor += 1;
        }
        debug_assert_eq!(cursor, params.len());
        Ok(TapeForward {
            logits,
            params,
            layer_states_q: states_q,
            layer_states_r: states_r,
        })
    }

    /// Class probabilities for every graph in the batch (eval mode).
    pub fn predict_graph(&self, batch: &GraphBatch) -> Result<Mat> {
        let mut tape = Tape::new();
        let fwd = self.forward_graph(&mut tape, batch, None)?;
        Ok(crate::autograd::softmax_rows(&tape.value(fwd.logits).to_owned()))
    }

    /// Class probabilities for every node (eval mode).
    pub fn predict_node(&self, graph: &Graph) -> Result<Mat> {
        let mut tape = Tape::new();
        let fwd = self.forward_node(&mut tape, graph, None)?;
        Ok(crate::autograd::softmax_rows(&tape.value(fwd.logits).to_owned()))
    }

    /// Node states after `layer_index` (1-based: 1 = first layer), as the
    /// n × 4·dim vectorized real matrix for a QGNN or the raw states for a
    /// GCN. Runs in eval mode.
    pub fn hidden_states(&self, graph: &Graph, layer_index: usize) -> Result<Mat> {
        let num_layers = self.cfg.layers;
        if layer_index == 0 || layer_index > num_layers {
            return Err(Error::ConfigMismatch(format!(
                "layer index {layer_index} out of range 1..={num_layers}"
            )));
        }
        let mut tape = Tape::new();
        let adj = graph.norm_adj.clone();
        let params = self.register_params(&mut tape);
        let mut cursor = 0;
        let (states_q, states_r) = self.record_layers(
            &mut tape,
            &adj,
            &graph.features,
            &params,
            &mut cursor,
            &mut None,
        )?;
        match &self.layers {
            Layers::Qgnn(_) => {
                let s = states_q[layer_index - 1];
                let cat = tape.concat_cols(&[s[0], s[1], s[2], s[3]]);
                Ok(tape.value(cat).to_owned())
            }
            Layers::Gcn(_) => Ok(tape.value(states_r[layer_index - 1]).to_owned()),
        }
    }
}

/// Checkpoint container: `QGCK` magic, u32-LE header length, JSON header
/// (config, seed, tensor shapes in canonical order), then the tensors as
/// row-major little-endian f64.
#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    format_version: u32,
    model: ModelConfig,
    feature_dim: usize,
    num_classes: usize,
    head: HeadKind,
    seed: u64,
    tensors: Vec<TensorShape>,
}

#[derive(Serialize, Deserialize)]
struct TensorShape {
    name: String,
    rows: usize,
    cols: usize,
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"QGCK";

impl Model {
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = CheckpointHeader {
            format_version: 1,
            model: self.cfg.clone(),
            feature_dim: self.feature_dim,
            num_classes: self.num_classes,
            head: self.head_kind(),
            seed: self.init_seed,
            tensors: self
                .param_names()
                .into_iter()
                .map(|(name, (rows, cols))| TensorShape { name, rows, cols })
                .collect(),
        };
        let header_bytes = serde_json::to_vec(&header)
            .map_err(|e| Error::Checkpoint(format!("header encode: {e}")))?;
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let io_err = |e| Error::io(path.display().to_string(), e);
        file.write_all(CHECKPOINT_MAGIC).map_err(io_err)?;
        file.write_all(&(header_bytes.len() as u32).to_le_bytes())
            .map_err(io_err)?;
        file.write_all(&header_bytes).map_err(io_err)?;
        let mut payload = Vec::new();
        for m in self.param_views() {
            for v in m.iter() {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
        file.write_all(&payload).map_err(io_err)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        let mut file = std::fs::File::open(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if buf.len() < 8 || &buf[0..4] != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let header_len = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
        if buf.len() < 8 + header_len {
            return Err(Error::Checkpoint("truncated header".into()));
        }
        let header: CheckpointHeader = serde_json::from_slice(&buf[8..8 + header_len])
            .map_err(|e| Error::Checkpoint(format!("header decode: {e}")))?;
        if header.format_version != 1 {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {}",
                header.format_version
            )));
        }
        let mut model = Model::new(
            header.model,
            header.feature_dim,
            header.num_classes,
            header.head,
            header.seed,
        )?;
        let expected = model.param_names();
        if expected.len() != header.tensors.len() {
            return Err(Error::Checkpoint(format!(
                "tensor count {} does not match architecture ({} expected)",
                header.tensors.len(),
                expected.len()
            )));
        }
        let mut offset = 8 + header_len;
        for ((name, (rows, cols)), shape) in expected.into_iter().zip(&header.tensors) {
            if shape.name != name || shape.rows != rows || shape.cols != cols {
                return Err(Error::Checkpoint(format!(
                    "tensor {} ({}x{}) does not match architecture entry {name} ({rows}x{cols})",
                    shape.name, shape.rows, shape.cols
                )));
            }
        }
        for m in model.param_views_mut() {
            let need = m.len() * 8;
            if buf.len() < offset + need {
                return Err(Error::Checkpoint("truncated payload".into()));
            }
            let slice = m.as_slice_mut().expect("standard layout");
            for (idx, chunk) in buf[offset..offset + need].chunks_exact(8).enumerate() {
                slice[idx] = f64::from_le_bytes(chunk.try_into().unwrap());
            }
            offset += need;
        }
        if offset != buf.len() {
            return Err(Error::Checkpoint("trailing bytes after payload".into()));
        }
        Ok(model)
    }
}
