//! Ingestion of the three benchmark families: TU-format graph datasets,
//! citation networks in a portable TSV format, and tokenized text corpora
//! converted to a single heterogeneous word–document graph.
//!
//! File formats
//! ------------
//! * TU graph datasets, directory `<name>/` containing `<name>_A.txt`
//!   (1-indexed global edge list, `u, v` per line), `<name>_graph_indicator.txt`
//!   (1-indexed graph id per node line), `<name>_graph_labels.txt`, and
//!   optionally `<name>_node_labels.txt` / `<name>_node_attributes.txt`.
//! * Citation networks: `nodes.tsv` with `id<TAB>label<TAB>idx:val idx:val …`
//!   (the feature column may be empty) plus an optional leading
//!   `#features <dim>` line pinning the feature dimension, and `edges.tsv`
//!   with `id<TAB>id` per line.
//! * Corpora: one document per line, `label<TAB>token token …`, plus a split
//!   file with line i naming the split (`train` or `test`) of document i.

use crate::error::{Error, Result};
use crate::graphcore::{
    degree_onehot_features, degrees, normalize_adjacency_weighted, Features, Graph,
};
use crate::qalg::QTensor;
use crate::Mat;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// How node features are produced for a TU dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    NodeAttributes,
    NodeLabelsOnehot,
    DegreeOnehot,
}

/// A graph-classification dataset: one graph and one label per sample.
#[derive(Debug, Clone)]
pub struct TUDataset {
    pub graphs: Vec<Graph>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub feature_mode: FeatureMode,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn parse_int(path: &Path, line_no: usize, token: &str) -> Result<i64> {
    token.trim().parse::<i64>().map_err(|_| {
        Error::format(
            path.display().to_string(),
            line_no,
            format!("expected integer, got {token:?}"),
        )
    })
}

/// Loads a TU-format dataset. Node labels are one-hot encoded over the
/// dataset-wide sorted distinct values; degree features use the
/// dataset-wide max degree so the dimension is fold-independent.
pub fn load_tu(dir: &Path, feature_mode: FeatureMode) -> Result<TUDataset> {
    let name = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Config(format!("bad dataset dir {}", dir.display())))?;
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));

    let indicator_path = file("graph_indicator");
    let indicator = read_lines(&indicator_path)?;
    let num_nodes = indicator.len();
    if num_nodes == 0 {
        return Err(Error::EmptyGraph);
    }
    // graph_of[global node] (0-based), node counts per graph.
    let mut graph_of = Vec::with_capacity(num_nodes);
    for (ln, line) in indicator.iter().enumerate() {
        let g = parse_int(&indicator_path, ln + 1, line)?;
        if g < 1 {
            return Err(Error::format(
                indicator_path.display().to_string(),
                ln + 1,
                "graph ids are 1-indexed",
            ));
        }
        graph_of.push((g - 1) as usize);
    }
    let num_graphs = graph_of.iter().max().unwrap() + 1;
    // Nodes of each graph appear consecutively; record local offsets.
    let mut local_index = vec![0usize; num_nodes];
    let mut graph_sizes = vec![0usize; num_graphs];
    for (node, &g) in graph_of.iter().enumerate() {
        local_index[node] = graph_sizes[g];
        graph_sizes[g] += 1;
    }

    let labels_path = file("graph_labels");
    let label_lines = read_lines(&labels_path)?;
    if label_lines.len() != num_graphs {
        return Err(Error::format(
            labels_path.display().to_string(),
            label_lines.len(),
            format!("{} graph labels for {num_graphs} graphs", label_lines.len()),
        ));
    }
    let raw_labels: Vec<i64> = label_lines
        .iter()
        .enumerate()
        .map(|(ln, l)| parse_int(&labels_path, ln + 1, l))
        .collect::<Result<_>>()?;
    let distinct: BTreeSet<i64> = raw_labels.iter().copied().collect();
    let label_map: BTreeMap<i64, usize> = distinct
        .into_iter()
        .enumerate()
        .map(|(idx, v)| (v, idx))
        .collect();
    let labels: Vec<usize> = raw_labels.iter().map(|v| label_map[v]).collect();

    let adj_path = file("A");
    let mut per_graph_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    for (ln, line) in read_lines(&adj_path)?.iter().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split(',');
        let (u, v) = match (parts.next(), parts.next()) {
            (Some(a), Some(b)) => (
                parse_int(&adj_path, ln + 1, a)?,
                parse_int(&adj_path, ln + 1, b)?,
            ),
            _ => {
                return Err(Error::format(
                    adj_path.display().to_string(),
                    ln + 1,
                    "expected `u, v`",
                ))
            }
        };
        if u < 1 || v < 1 || u as usize > num_nodes || v as usize > num_nodes {
            return Err(Error::format(
                adj_path.display().to_string(),
                ln + 1,
                format!("node id out of range: {u}, {v}"),
            ));
        }
        let (u, v) = ((u - 1) as usize, (v - 1) as usize);
        if graph_of[u] != graph_of[v] {
            return Err(Error::format(
                adj_path.display().to_string(),
                ln + 1,
                format!("edge crosses graphs {} and {}", graph_of[u], graph_of[v]),
            ));
        }
        per_graph_edges[graph_of[u]].push((local_index[u], local_index[v]));
    }

    // Optional node labels / attributes.
    let node_labels_path = file("node_labels");
    let node_labels: Option<Vec<i64>> = if node_labels_path.exists() {
        let lines = read_lines(&node_labels_path)?;
        if lines.len() != num_nodes {
            return Err(Error::format(
                node_labels_path.display().to_string(),
                lines.len(),
                "node label count differs from node count",
            ));
        }
        Some(
            lines
                .iter()
                .enumerate()
                .map(|(ln, l)| parse_int(&node_labels_path, ln + 1, l))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let attrs_path = file("node_attributes");
    let node_attrs: Option<Vec<Vec<f64>>> = if attrs_path.exists() {
        let lines = read_lines(&attrs_path)?;
        if lines.len() != num_nodes {
            return Err(Error::format(
                attrs_path.display().to_string(),
                lines.len(),
                "attribute count differs from node count",
            ));
        }
        let mut rows = Vec::with_capacity(num_nodes);
        for (ln, line) in lines.iter().enumerate() {
            let row: std::result::Result<Vec<f64>, _> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect();
            rows.push(row.map_err(|_| {
                Error::format(attrs_path.display().to_string(), ln + 1, "bad float")
            })?);
        }
        Some(rows)
    } else {
        None
    };

    // Feature construction.
    let (feature_dim, tag_map) = match feature_mode {
        FeatureMode::NodeAttributes => {
            let attrs = node_attrs.as_ref().ok_or_else(|| {
                Error::io(
                    attrs_path.display().to_string(),
                    std::io::Error::new(std::io::ErrorKind::NotFound, "node attributes required"),
                )
            })?;
            (attrs[0].len(), BTreeMap::new())
        }
        FeatureMode::NodeLabelsOnehot => {
            let tags = node_labels.as_ref().ok_or_else(|| {
                Error::io(
                    node_labels_path.display().to_string(),
                    std::io::Error::new(std::io::ErrorKind::NotFound, "node labels required"),
                )
            })?;
            let distinct: BTreeSet<i64> = tags.iter().copied().collect();
            let map: BTreeMap<i64, usize> = distinct
                .into_iter()
                .enumerate()
                .map(|(idx, v)| (v, idx))
                .collect();
            (map.len(), map)
        }
        FeatureMode::DegreeOnehot => {
            let mut max_degree = 0;
            for (g, edges) in per_graph_edges.iter().enumerate() {
                let deg = degrees(edges, graph_sizes[g])?;
                max_degree = max_degree.max(deg.into_iter().max().unwrap_or(0));
            }
            (max_degree + 1, BTreeMap::new())
        }
    };

    // Per-graph node lists in global order.
    let mut nodes_of_graph: Vec<Vec<usize>> = vec![Vec::new(); num_graphs];
    for (node, &g) in graph_of.iter().enumerate() {
        nodes_of_graph[g].push(node);
    }

    let mut graphs = Vec::with_capacity(num_graphs);
    for g in 0..num_graphs {
        let n = graph_sizes[g];
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let features = match feature_mode {
            FeatureMode::NodeAttributes => {
                let attrs = node_attrs.as_ref().unwrap();
                let mut m = Mat::zeros((n, feature_dim));
                for &node in &nodes_of_graph[g] {
                    for (c, &v) in attrs[node].iter().enumerate() {
                        m[(local_index[node], c)] = v;
                    }
                }
                m
            }
            FeatureMode::NodeLabelsOnehot => {
                let tags = node_labels.as_ref().unwrap();
                let mut m = Mat::zeros((n, feature_dim));
                for &node in &nodes_of_graph[g] {
                    m[(local_index[node], tag_map[&tags[node]])] = 1.0;
                }
                m
            }
            FeatureMode::DegreeOnehot => {
                degree_onehot_features(&per_graph_edges[g], n, feature_dim - 1)?
            }
        };
        graphs.push(Graph::new(n, &per_graph_edges[g], Features::Dense(features))?);
    }

    Ok(TUDataset {
        graphs,
        labels,
        num_classes: label_map.len(),
        feature_dim,
        feature_mode,
    })
}

/// Writes a dataset back to TU files (used for round-trip checks and
/// fixtures). Each undirected edge is emitted in both directions.
pub fn write_tu(ds: &TUDataset, dir: &Path, name: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let write = |suffix: &str, contents: String| -> Result<()> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        let mut f =
            std::fs::File::create(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(contents.as_bytes())
            .map_err(|e| Error::io(path.display().to_string(), e))
    };

    let mut indicator = String::new();
    let mut adj = String::new();
    let mut node_labels = String::new();
    let mut node_attrs = String::new();
    let mut offset = 0usize;
    for (g, graph) in ds.graphs.iter().enumerate() {
        for local in 0..graph.num_nodes {
            indicator.push_str(&format!("{}\n", g + 1));
            match ds.feature_mode {
                FeatureMode::NodeLabelsOnehot => {
                    let row = graph.features.as_dense().unwrap().row(local);
                    let tag = row.iter().position(|&v| v == 1.0).unwrap_or(0);
                    node_labels.push_str(&format!("{tag}\n"));
                }
                FeatureMode::NodeAttributes => {
                    let row = graph.features.as_dense().unwrap().row(local);
                    let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                    node_attrs.push_str(&cells.join(", "));
                    node_attrs.push('\n');
                }
                FeatureMode::DegreeOnehot => {}
            }
            let _ = local;
        }
        for &(u, v) in &graph.edges {
            adj.push_str(&format!("{}, {}\n", offset + u + 1, offset + v + 1));
            adj.push_str(&format!("{}, {}\n", offset + v + 1, offset + u + 1));
        }
        offset += graph.num_nodes;
    }
    let labels: String = ds.labels.iter().map(|l| format!("{l}\n")).collect();
    write("graph_indicator", indicator)?;
    write("A", adj)?;
    write("graph_labels", labels)?;
    match ds.feature_mode {
        FeatureMode::NodeLabelsOnehot => write("node_labels", node_labels)?,
        FeatureMode::NodeAttributes => write("node_attributes", node_attrs)?,
        FeatureMode::DegreeOnehot => {}
    }
    Ok(())
}

/// A citation network: one graph, node labels, bag-of-words features.
#[derive(Debug, Clone)]
pub struct CitationDataset {
    pub graph: Graph,
    pub num_classes: usize,
}

/// Loads the portable citation format. `row_normalize` rescales every
/// nonzero feature row to sum 1.
pub fn load_citation(dir: &Path, row_normalize: bool) -> Result<CitationDataset> {
    let nodes_path = dir.join("nodes.tsv");
    let edges_path = dir.join("edges.tsv");
    let node_lines = read_lines(&nodes_path)?;

    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut raw: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
    let mut pinned_dim: Option<usize> = None;
    let mut max_feat = 0usize;
    for (ln, line) in node_lines.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#features") {
            pinned_dim = Some(rest.trim().parse().map_err(|_| {
                Error::format(nodes_path.display().to_string(), ln + 1, "bad #features")
            })?);
            continue;
        }
        let mut cols = line.splitn(3, '\t');
        let id = cols.next().unwrap_or("").to_string();
        let label = cols
            .next()
            .ok_or_else(|| {
                Error::format(nodes_path.display().to_string(), ln + 1, "missing label column")
            })?
            .to_string();
        let feats_col = cols.next().unwrap_or("");
        if id.is_empty() {
            return Err(Error::format(
                nodes_path.display().to_string(),
                ln + 1,
                "empty node id",
            ));
        }
        if ids.insert(id, raw.len()).is_some() {
            return Err(Error::format(
                nodes_path.display().to_string(),
                ln + 1,
                "duplicate node id",
            ));
        }
        let mut feats = Vec::new();
        for pair in feats_col.split_whitespace() {
            let (idx, val) = pair.split_once(':').ok_or_else(|| {
                Error::format(
                    nodes_path.display().to_string(),
                    ln + 1,
                    format!("bad feature pair {pair:?}"),
                )
            })?;
            let idx: usize = idx.parse().map_err(|_| {
                Error::format(nodes_path.display().to_string(), ln + 1, "bad feature index")
            })?;
            let val: f64 = val.parse().map_err(|_| {
                Error::format(nodes_path.display().to_string(), ln + 1, "bad feature value")
            })?;
            max_feat = max_feat.max(idx + 1);
            feats.push((idx, val));
        }
        raw.push((label, feats));
    }
    let n = raw.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let dim = pinned_dim.unwrap_or(max_feat);
    if dim < max_feat {
        return Err(Error::format(
            nodes_path.display().to_string(),
            0,
            format!("#features {dim} smaller than max index {max_feat}"),
        ));
    }

    let label_names: BTreeSet<String> = raw.iter().map(|(l, _)| l.clone()).collect();
    let label_map: BTreeMap<String, usize> = label_names
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();

    let mut features = Mat::zeros((n, dim));
    let mut labels = Vec::with_capacity(n);
    for (node, (label, feats)) in raw.iter().enumerate() {
        labels.push(label_map[label]);
        for &(idx, val) in feats {
            features[(node, idx)] = val;
        }
        if row_normalize {
            let sum: f64 = features.row(node).sum();
            if sum != 0.0 {
                features.row_mut(node).mapv_inplace(|v| v / sum);
            }
        }
    }

    let mut edges = Vec::new();
    for (ln, line) in read_lines(&edges_path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (a, b) = line.split_once('\t').ok_or_else(|| {
            Error::format(edges_path.display().to_string(), ln + 1, "expected `id<TAB>id`")
        })?;
        let ua = *ids.get(a.trim()).ok_or_else(|| {
            Error::format(
                edges_path.display().to_string(),
                ln + 1,
                format!("unknown node id {a:?}"),
            )
        })?;
        let ub = *ids.get(b.trim()).ok_or_else(|| {
            Error::format(
                edges_path.display().to_string(),
                ln + 1,
                format!("unknown node id {b:?}"),
            )
        })?;
        edges.push((ua, ub));
    }

    let mut graph = Graph::new(n, &edges, Features::Dense(features))?;
    graph.labels = labels;
    Ok(CitationDataset {
        graph,
        num_classes: label_map.len(),
    })
}

/// A tokenized, pre-split document corpus.
#[derive(Debug, Clone)]
pub struct TextCorpus {
    pub docs: Vec<(usize, Vec<String>)>,
    pub label_names: Vec<String>,
    pub train_docs: Vec<usize>,
    pub test_docs: Vec<usize>,
}

/// Reads `label<TAB>tokens` lines plus the train/test split file.
pub fn load_corpus(corpus_path: &Path, split_path: &Path) -> Result<TextCorpus> {
    let lines = read_lines(corpus_path)?;
    let split_lines = read_lines(split_path)?;
    if lines.len() != split_lines.len() {
        return Err(Error::format(
            split_path.display().to_string(),
            split_lines.len(),
            format!(
                "{} split entries for {} documents",
                split_lines.len(),
                lines.len()
            ),
        ));
    }
    let mut label_set = BTreeSet::new();
    let mut parsed = Vec::with_capacity(lines.len());
    for (ln, line) in lines.iter().enumerate() {
        let (label, body) = line.split_once('\t').ok_or_else(|| {
            Error::format(
                corpus_path.display().to_string(),
                ln + 1,
                "expected `label<TAB>tokens`",
            )
        })?;
        label_set.insert(label.to_string());
        let tokens: Vec<String> = body.split_whitespace().map(str::to_string).collect();
        parsed.push((label.to_string(), tokens));
    }
    let label_names: Vec<String> = label_set.into_iter().collect();
    let label_map: HashMap<&str, usize> = label_names
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let docs: Vec<(usize, Vec<String>)> = parsed
        .into_iter()
        .map(|(l, t)| (label_map[l.as_str()], t))
        .collect();

    let mut train_docs = Vec::new();
    let mut test_docs = Vec::new();
    for (ln, line) in split_lines.iter().enumerate() {
        match line.trim() {
            "train" => train_docs.push(ln),
            "test" => test_docs.push(ln),
            other => {
                return Err(Error::format(
                    split_path.display().to_string(),
                    ln + 1,
                    format!("expected `train` or `test`, got {other:?}"),
                ))
            }
        }
    }
    Ok(TextCorpus {
        docs,
        label_names,
        train_docs,
        test_docs,
    })
}

/// Word–document graph: document nodes first, then vocabulary nodes.
#[derive(Debug, Clone)]
pub struct TextGraphDataset {
    pub graph: Graph,
    pub num_docs: usize,
    pub num_words: usize,
    pub num_classes: usize,
    pub doc_mask: Vec<bool>,
    pub word_mask: Vec<bool>,
    pub train_docs: Vec<usize>,
    pub test_docs: Vec<usize>,
}

/// Builds the heterogeneous text graph: word–word edges weighted by
/// positive PMI over sliding windows of length `window`, document–word
/// edges weighted by TF·IDF (raw count × ln(#docs / doc frequency)),
/// unit self-loops, identity features.
pub fn build_text_graph(corpus: &TextCorpus, window: usize) -> Result<TextGraphDataset> {
    assert!(window >= 1, "window must be at least 1");
    let num_docs = corpus.docs.len();
    // Vocabulary in first-seen order.
    let mut vocab: HashMap<&str, usize> = HashMap::new();
    let mut vocab_list: Vec<String> = Vec::new();
    for (_, tokens) in &corpus.docs {
        for tok in tokens {
            if !vocab.contains_key(tok.as_str()) {
                vocab.insert(tok.as_str(), vocab_list.len());
                vocab_list.push(tok.clone());
            }
        }
    }
    let num_words = vocab_list.len();
    if num_words == 0 {
        return Err(Error::EmptyVocabulary);
    }

    // Sliding-window counts: windows containing a word, windows containing
    // a word pair (counted once per window).
    let mut word_windows: Vec<usize> = vec![0; num_words];
    let mut pair_windows: HashMap<(usize, usize), usize> = HashMap::new();
    let mut total_windows = 0usize;
    for (_, tokens) in &corpus.docs {
        let ids: Vec<usize> = tokens.iter().map(|t| vocab[t.as_str()]).collect();
        if ids.is_empty() {
            continue;
        }
        let starts = if ids.len() <= window {
            0..1
        } else {
            0..(ids.len() - window + 1)
        };
        for start in starts {
            total_windows += 1;
            let end = (start + window).min(ids.len());
            let uniq: BTreeSet<usize> = ids[start..end].iter().copied().collect();
            for &w in &uniq {
                word_windows[w] += 1;
            }
            let uniq: Vec<usize> = uniq.into_iter().collect();
            for (a_pos, &a) in uniq.iter().enumerate() {
                for &b in &uniq[a_pos + 1..] {
                    *pair_windows.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
    }

    // Document frequencies and term counts.
    let mut doc_freq = vec![0usize; num_words];
    let mut term_counts: Vec<HashMap<usize, usize>> = vec![HashMap::new(); num_docs];
    for (d, (_, tokens)) in corpus.docs.iter().enumerate() {
        for tok in tokens {
            *term_counts[d].entry(vocab[tok.as_str()]).or_insert(0) += 1;
        }
        for &w in term_counts[d].keys() {
            doc_freq[w] += 1;
        }
    }

    let n_total = num_docs + num_words;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    // Self-loops with weight 1.
    for node in 0..n_total {
        entries.push((node, node, 1.0));
    }
    // Word–word PMI edges, kept only when positive.
    let total = total_windows as f64;
    for (&(a, b), &joint) in &pair_windows {
        let pmi = ((joint as f64 * total) / (word_windows[a] as f64 * word_windows[b] as f64)).ln();
        if pmi > 0.0 {
            let (na, nb) = (num_docs + a, num_docs + b);
            entries.push((na, nb, pmi));
            entries.push((nb, na, pmi));
        }
    }
    // Document–word TF-IDF edges.
    for (d, counts) in term_counts.iter().enumerate() {
        for (&w, &tf) in counts {
            let idf = (num_docs as f64 / doc_freq[w] as f64).ln();
            let weight = tf as f64 * idf;
            if weight != 0.0 {
                entries.push((d, num_docs + w, weight));
                entries.push((num_docs + w, d, weight));
            }
        }
    }

    let norm_adj = normalize_adjacency_weighted(&entries, n_total)?;
    let mut labels = vec![0usize; n_total];
    for (d, (label, _)) in corpus.docs.iter().enumerate() {
        labels[d] = *label;
    }
    let mut doc_mask = vec![false; n_total];
    let mut word_mask = vec![false; n_total];
    for m in doc_mask.iter_mut().take(num_docs) {
        *m = true;
    }
    for m in word_mask.iter_mut().skip(num_docs) {
        *m = true;
    }
    // Undirected edge pairs for bookkeeping (weights live in norm_adj).
    let mut edge_pairs = BTreeSet::new();
    for &(u, v, _) in &entries {
        if u != v {
            edge_pairs.insert((u.min(v), u.max(v)));
        }
    }
    let graph = Graph {
        num_nodes: n_total,
        edges: edge_pairs.into_iter().collect(),
        norm_adj: std::sync::Arc::new(norm_adj),
        features: Features::Identity(n_total),
        labels,
        train_mask: Vec::new(),
        val_mask: Vec::new(),
        test_mask: Vec::new(),
    };
    Ok(TextGraphDataset {
        graph,
        num_docs,
        num_words,
        num_classes: corpus.label_names.len(),
        doc_mask,
        word_mask,
        train_docs: corpus.train_docs.clone(),
        test_docs: corpus.test_docs.clone(),
    })
}

/// Quaternion feature initialization: all four components equal the real
/// feature matrix.
pub fn duplicate_features(features: &Mat) -> QTensor {
    QTensor::from_components(
        features.clone(),
        features.clone(),
        features.clone(),
        features.clone(),
    )
    .expect("identical shapes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_file(dir: &Path, name: &str, contents: &str) {
        std::fs::write(dir.join(name), contents).unwrap();
    }

    /// Two hand-written graphs: a triangle (label 0) and a 2-path (label 1).
    fn tu_fixture(dir: &Path) {
        let d = dir.join("FIX");
        std::fs::create_dir_all(&d).unwrap();
        write_file(&d, "FIX_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n");
        write_file(&d, "FIX_graph_indicator.txt", "1\n1\n1\n2\n2\n");
        write_file(&d, "FIX_graph_labels.txt", "1\n-1\n");
        write_file(&d, "FIX_node_labels.txt", "0\n1\n0\n1\n1\n");
    }

    #[test]
    fn tu_fixture_reconstructs_exactly() {
        let tmp = tempfile::tempdir().unwrap();
        tu_fixture(tmp.path());
        let ds = load_tu(&tmp.path().join("FIX"), FeatureMode::NodeLabelsOnehot).unwrap();
        assert_eq!(ds.graphs.len(), 2);
        assert_eq!(ds.num_classes, 2);
        // Labels -1, 1 map to 0, 1 in sorted order.
        assert_eq!(ds.labels, vec![1, 0]);
        assert_eq!(ds.feature_dim, 2);
        let tri = &ds.graphs[0];
        assert_eq!(tri.num_nodes, 3);
        assert_eq!(tri.edges, vec![(0, 1), (0, 2), (1, 2)]);
        // Triangle adjacency: all degrees 3 with self-loop.
        for r in 0..3 {
            for c in 0..3 {
                assert!((tri.norm_adj.get(r, c) - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        let path = &ds.graphs[1];
        assert_eq!(path.num_nodes, 2);
        assert_eq!(path.edges, vec![(0, 1)]);
        let feats = path.features.as_dense().unwrap();
        assert_eq!(feats[(0, 1)], 1.0);
        assert_eq!(feats[(1, 1)], 1.0);
    }

    #[test]
    fn tu_missing_file_is_io_error() {
        let tmp = tempfile::tempdir().unwrap();
        let d = tmp.path().join("NOPE");
        std::fs::create_dir_all(&d).unwrap();
        assert!(matches!(
            load_tu(&d, FeatureMode::DegreeOnehot),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn tu_out_of_range_edge_is_format_error() {
        let tmp = tempfile::tempdir().unwrap();
        let d = tmp.path().join("BAD");
        std::fs::create_dir_all(&d).unwrap();
        write_file(&d, "BAD_A.txt", "1, 9\n");
        write_file(&d, "BAD_graph_indicator.txt", "1\n1\n");
        write_file(&d, "BAD_graph_labels.txt", "0\n");
        assert!(matches!(
            load_tu(&d, FeatureMode::DegreeOnehot),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn tu_roundtrip_preserves_graphs() {
        let tmp = tempfile::tempdir().unwrap();
        tu_fixture(tmp.path());
        let ds = load_tu(&tmp.path().join("FIX"), FeatureMode::NodeLabelsOnehot).unwrap();
        let out = tmp.path().join("RT");
        write_tu(&ds, &out.join("RT"), "RT").unwrap();
        let back = load_tu(&out.join("RT"), FeatureMode::NodeLabelsOnehot).unwrap();
        assert_eq!(back.graphs.len(), ds.graphs.len());
        assert_eq!(back.labels, ds.labels);
        for (a, b) in ds.graphs.iter().zip(&back.graphs) {
            assert_eq!(a.num_nodes, b.num_nodes);
            assert_eq!(a.edges, b.edges);
            assert_eq!(a.features, b.features);
            assert_eq!(a.norm_adj, b.norm_adj);
        }
    }

    #[test]
    fn tu_degree_mode_uses_dataset_wide_max() {
        let tmp = tempfile::tempdir().unwrap();
        tu_fixture(tmp.path());
        let ds = load_tu(&tmp.path().join("FIX"), FeatureMode::DegreeOnehot).unwrap();
        // Max degree across both graphs is 2 (triangle nodes).
        assert_eq!(ds.feature_dim, 3);
        let path_feats = ds.graphs[1].features.as_dense().unwrap();
        assert_eq!(path_feats.ncols(), 3);
        assert_eq!(path_feats[(0, 1)], 1.0);
    }

    fn citation_fixture(dir: &Path) {
        write_file(
            dir,
            "nodes.tsv",
            "#features 4\nn1\tai\t0:1 2:1\nn2\tml\t1:2\nn3\tai\t\n",
        );
        write_file(dir, "edges.tsv", "n1\tn2\nn2\tn3\n");
    }

    #[test]
    fn citation_fixture_loads_known_adjacency() {
        let tmp = tempfile::tempdir().unwrap();
        citation_fixture(tmp.path());
        let ds = load_citation(tmp.path(), false).unwrap();
        assert_eq!(ds.graph.num_nodes, 3);
        assert_eq!(ds.num_classes, 2);
        // Sorted label names: ai -> 0, ml -> 1.
        assert_eq!(ds.graph.labels, vec![0, 1, 0]);
        assert_eq!(ds.graph.edges, vec![(0, 1), (1, 2)]);
        let feats = ds.graph.features.as_dense().unwrap();
        assert_eq!(feats.dim(), (3, 4));
        assert_eq!(feats[(0, 0)], 1.0);
        assert_eq!(feats[(1, 1)], 2.0);
        // Empty feature line accepted as a zero row.
        assert_eq!(feats.row(2).sum(), 0.0);
        // Path graph normalization: degree 2 ends, 3 middle.
        let a = ds.graph.norm_adj.as_ref();
        assert!((a.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((a.get(0, 1) - 1.0 / 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn citation_row_normalization() {
        let tmp = tempfile::tempdir().unwrap();
        citation_fixture(tmp.path());
        let ds = load_citation(tmp.path(), true).unwrap();
        let feats = ds.graph.features.as_dense().unwrap();
        assert!((feats.row(0).sum() - 1.0).abs() < 1e-12);
        assert!((feats.row(1).sum() - 1.0).abs() < 1e-12);
        assert_eq!(feats.row(2).sum(), 0.0);
    }

    #[test]
    fn citation_malformed_line_reports_line_number() {
        let tmp = tempfile::tempdir().unwrap();
        write_file(tmp.path(), "nodes.tsv", "n1\tai\t0:1\nbroken-line\n");
        write_file(tmp.path(), "edges.tsv", "");
        match load_citation(tmp.path(), false) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    fn toy_corpus(lines: &[(&str, &str)], splits: &[&str], dir: &Path) -> TextCorpus {
        let corpus: String = lines
            .iter()
            .map(|(l, t)| format!("{l}\t{t}\n"))
            .collect();
        let split: String = splits.iter().map(|s| format!("{s}\n")).collect();
        write_file(dir, "corpus.tsv", &corpus);
        write_file(dir, "split.txt", &split);
        load_corpus(&dir.join("corpus.tsv"), &dir.join("split.txt")).unwrap()
    }

    #[test]
    fn single_word_documents_have_no_word_word_edges() {
        let tmp = tempfile::tempdir().unwrap();
        // Identical one-word docs: the word appears in every document, so
        // IDF = ln(2/2) = 0 and even the doc-word weight vanishes; only
        // self-loops remain.
        let corpus = toy_corpus(
            &[("a", "hello"), ("a", "hello")],
            &["train", "test"],
            tmp.path(),
        );
        let ds = build_text_graph(&corpus, 20).unwrap();
        assert_eq!(ds.graph.num_nodes, 3);
        assert!(ds.graph.edges.is_empty());

        // Distinct one-word docs: still no word-word pairs, but each word
        // now has IDF ln(2) > 0, so doc-word edges appear.
        let tmp2 = tempfile::tempdir().unwrap();
        let corpus = toy_corpus(
            &[("a", "hello"), ("b", "world")],
            &["train", "test"],
            tmp2.path(),
        );
        let ds = build_text_graph(&corpus, 20).unwrap();
        assert_eq!(ds.graph.num_nodes, 4);
        assert_eq!(ds.graph.edges, vec![(0, 2), (1, 3)]);
        assert!(ds.graph.norm_adj.get(0, 2) > 0.0);
    }

    #[test]
    fn pmi_matches_hand_count() {
        let tmp = tempfile::tempdir().unwrap();
        // Window 2 over three docs; tokens chosen so windows are countable
        // by hand:
        //   doc0: x y      -> windows {x,y}
        //   doc1: x y z    -> windows {x,y}, {y,z}
        //   doc2: z        -> windows {z}
        // total windows = 4; #W(x)=2, #W(y)=3, #W(z)=2, #W(x,y)=2, #W(y,z)=1.
        let corpus = toy_corpus(
            &[("a", "x y"), ("a", "x y z"), ("b", "z")],
            &["train", "train", "test"],
            tmp.path(),
        );
        let ds = build_text_graph(&corpus, 2).unwrap();
        assert_eq!(ds.num_docs, 3);
        assert_eq!(ds.num_words, 3);
        assert_eq!(ds.graph.num_nodes, ds.num_docs + ds.num_words);

        // PMI(x,y) = ln(2*4 / (2*3)) = ln(4/3) > 0 -> edge present.
        // PMI(y,z) = ln(1*4 / (3*2)) = ln(2/3) < 0 -> dropped.
        let (x, y, z) = (3, 4, 5);
        let pre_norm_xy = 4.0f64 / 3.0;
        let _ = pre_norm_xy;
        assert!(ds.graph.norm_adj.get(x, y) > 0.0);
        assert_eq!(ds.graph.norm_adj.get(y, z), 0.0);
        assert_eq!(ds.graph.norm_adj.get(x, z), 0.0);

        // Check the raw PMI value through the normalization: entry (x,y)
        // equals pmi / sqrt(d_x d_y). Recover pmi by rebuilding degrees.
        let pmi_xy = (2.0f64 * 4.0 / (2.0 * 3.0)).ln();
        // idf: x in 2/3 docs, y in 2/3, z in 2/3.
        let idf = (3.0f64 / 2.0).ln();
        // d_x = 1 (self) + pmi_xy + tfidf(d0,x) + tfidf(d1,x)
        let d_x = 1.0 + pmi_xy + idf + idf;
        let d_y = 1.0 + pmi_xy + idf + idf;
        let want = pmi_xy / (d_x * d_y).sqrt();
        assert!((ds.graph.norm_adj.get(x, y) - want).abs() < 1e-12);
    }

    #[test]
    fn text_graph_symmetry_and_counts() {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = toy_corpus(
            &[
                ("pos", "good great fine"),
                ("neg", "bad awful"),
                ("pos", "good fine"),
                ("neg", "bad bad awful"),
            ],
            &["train", "train", "test", "test"],
            tmp.path(),
        );
        let ds = build_text_graph(&corpus, 3).unwrap();
        assert_eq!(ds.graph.num_nodes, ds.num_docs + ds.num_words);
        assert_eq!(ds.num_docs, 4);
        assert_eq!(ds.num_words, 5);
        let n = ds.graph.num_nodes;
        for r in 0..n {
            for c in 0..n {
                let diff = (ds.graph.norm_adj.get(r, c) - ds.graph.norm_adj.get(c, r)).abs();
                assert!(diff < 1e-12);
            }
        }
        assert!(ds.doc_mask.iter().filter(|&&b| b).count() == 4);
        assert!(ds.word_mask.iter().filter(|&&b| b).count() == 5);
    }

    #[test]
    fn empty_vocabulary_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = toy_corpus(&[("a", ""), ("b", "")], &["train", "test"], tmp.path());
        assert!(matches!(
            build_text_graph(&corpus, 5),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn duplicate_features_copies_all_components() {
        let m = Mat::from_shape_vec((2, 2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let q = duplicate_features(&m);
        for c in 0..4 {
            assert_eq!(q.comp(c), &m);
        }
        // Row vec is [h; h; h; h].
        let row = crate::layers::vec_rows(&q);
        assert_eq!(row.row(0).to_vec(), vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);

        let z = duplicate_features(&Mat::zeros((3, 2)));
        assert_eq!(z.comp(3).sum(), 0.0);
    }
}
