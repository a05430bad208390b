//! Command implementations behind the `quatgraph` binary: `train`,
//! `count-params`, `export-embeddings`, and `gradcheck`.
//!
//! Exit codes: 0 success, 2 invalid config, 3 dataset error, 1 anything
//! else (including a failed gradient check).

use crate::autograd::{check_gradients, Tape};
use crate::config::{RunConfig, TaskKind};
use crate::datasets::{build_text_graph, load_citation, load_corpus, load_tu, FeatureMode};
use crate::error::{Error, Result};
use crate::graphcore::{stratified_split, Features, Graph, GraphBatch};
use crate::model::{HeadKind, Model};
use crate::trainer::{self, Metrics, TrainConfig};
use crate::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::ConfigMismatch(_) => 2,
        Error::Io { .. }
        | Error::Format { .. }
        | Error::EmptyGraph
        | Error::EmptyVocabulary
        | Error::ClassTooSmall { .. }
        | Error::NodeIndexOutOfRange { .. }
        | Error::DegreeOverflow { .. } => 3,
        _ => 1,
    }
}

/// Metrics file layout: the resolved config followed by the metrics
/// fields (per_fold, mean, std, wall_time, curves).
#[derive(Serialize)]
struct MetricsFile<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    metrics: &'a Metrics,
}

enum LoadedDataset {
    Tu(crate::datasets::TUDataset),
    Citation(crate::datasets::CitationDataset),
    Text(crate::datasets::TextGraphDataset),
}

fn load_dataset(cfg: &RunConfig) -> Result<LoadedDataset> {
    match cfg.task {
        TaskKind::Graph => {
            let dir = cfg.dataset_dir()?;
            let mode = cfg
                .dataset
                .feature_mode
                .unwrap_or(FeatureMode::DegreeOnehot);
            Ok(LoadedDataset::Tu(load_tu(&dir, mode)?))
        }
        TaskKind::Node => {
            let dir = cfg.dataset_dir()?;
            Ok(LoadedDataset::Citation(load_citation(
                &dir,
                cfg.dataset.row_normalize,
            )?))
        }
        TaskKind::Text => {
            let corpus_path = cfg
                .dataset
                .corpus
                .as_ref()
                .ok_or_else(|| Error::Config("dataset.corpus is required for the text task".into()))?;
            let split_path = cfg
                .dataset
                .split
                .as_ref()
                .ok_or_else(|| Error::Config("dataset.split is required for the text task".into()))?;
            let corpus = load_corpus(
                &RunConfig::resolve_data_path(corpus_path),
                &RunConfig::resolve_data_path(split_path),
            )?;
            Ok(LoadedDataset::Text(build_text_graph(
                &corpus,
                cfg.dataset.window,
            )?))
        }
    }
}

fn check_dims(cfg: &RunConfig, feature_dim: usize, num_classes: usize) -> Result<()> {
    if let Some(want) = cfg.dataset.feature_dim {
        if want != feature_dim {
            return Err(Error::ConfigMismatch(format!(
                "dataset.feature_dim {want} but data has {feature_dim}"
            )));
        }
    }
    if let Some(want) = cfg.dataset.num_classes {
        if want != num_classes {
            return Err(Error::ConfigMismatch(format!(
                "dataset.num_classes {want} but data has {num_classes}"
            )));
        }
    }
    Ok(())
}

fn run_train(cfg: &RunConfig) -> Result<(Metrics, Model)> {
    let dataset = load_dataset(cfg)?;
    match dataset {
        LoadedDataset::Tu(ds) => {
            check_dims(cfg, ds.feature_dim, ds.num_classes)?;
            let metrics = trainer::run_graph_task(&ds, &cfg.model, &cfg.train)?;
            let all: Vec<usize> = (0..ds.graphs.len()).collect();
            let model = trainer::train_graph_model(&ds, &cfg.model, &cfg.train, &all)?;
            Ok((metrics, model))
        }
        LoadedDataset::Citation(ds) => {
            check_dims(cfg, ds.graph.features.dim(), ds.num_classes)?;
            let metrics = trainer::run_node_task(&ds, &cfg.model, &cfg.train)?;
            let model = final_node_model(
                &ds.graph,
                ds.num_classes,
                &cfg.model,
                &cfg.train,
                &mask_based_rows(&ds.graph, &cfg.train)?,
            )?;
            Ok((metrics, model))
        }
        LoadedDataset::Text(ds) => {
            check_dims(cfg, ds.graph.features.dim(), ds.num_classes)?;
            let metrics = trainer::run_text_task(&ds, &cfg.model, &cfg.train)?;
            let model = final_node_model(
                &ds.graph,
                ds.num_classes,
                &cfg.model,
                &cfg.train,
                &ds.train_docs,
            )?;
            Ok((metrics, model))
        }
    }
}

fn mask_based_rows(graph: &Graph, train_cfg: &TrainConfig) -> Result<Vec<usize>> {
    let masks = stratified_split(&graph.labels, (0.6, 0.2, 0.2), train_cfg.seed)?;
    Ok(masks
        .train
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect())
}

fn final_node_model(
    graph: &Graph,
    num_classes: usize,
    model_cfg: &crate::model::ModelConfig,
    train_cfg: &TrainConfig,
    train_rows: &[usize],
) -> Result<Model> {
    let mut model = Model::new(
        model_cfg.clone(),
        graph.features.dim(),
        num_classes,
        HeadKind::Node,
        train_cfg.seed,
    )?;
    trainer::fit_node_model(&mut model, graph, train_rows, train_cfg, train_cfg.seed)?;
    Ok(model)
}

/// `train`: runs the configured task, writes `metrics.json` and
/// `model.qgck` into the output directory.
pub fn cmd_train(config_path: &Path, overrides: &[String]) -> i32 {
    match train_inner(config_path, overrides) {
        Ok(metrics_path) => {
            println!("wrote {}", metrics_path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn train_inner(config_path: &Path, overrides: &[String]) -> Result<PathBuf> {
    let cfg = RunConfig::load(config_path, overrides)?;
    let (metrics, model) = run_train(&cfg)?;
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::io(cfg.output_dir.display().to_string(), e))?;
    let metrics_path = cfg.output_dir.join("metrics.json");
    let body = serde_json::to_string_pretty(&MetricsFile {
        config: &cfg,
        metrics: &metrics,
    })
    .map_err(|e| Error::Config(format!("metrics encode: {e}")))?;
    std::fs::write(&metrics_path, body)
        .map_err(|e| Error::io(metrics_path.display().to_string(), e))?;
    model.save(&cfg.output_dir.join("model.qgck"))?;
    println!(
        "{:?} task: mean accuracy {:.4} ± {:.4} (epoch {}, {} folds, {:.1}s)",
        cfg.task,
        metrics.mean,
        metrics.std,
        metrics.selected_epoch,
        metrics.per_fold.len(),
        metrics.wall_time,
    );
    Ok(metrics_path)
}

/// `count-params`: prints the exact number of trainable scalars of the
/// configured model. Uses `dataset.feature_dim` / `dataset.num_classes`
/// when present so no data needs to be read.
pub fn cmd_count_params(config_path: &Path, overrides: &[String]) -> i32 {
    match count_params_inner(config_path, overrides) {
        Ok(count) => {
            println!("{count}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn count_params_inner(config_path: &Path, overrides: &[String]) -> Result<usize> {
    let cfg = RunConfig::load(config_path, overrides)?;
    let (feature_dim, num_classes) = match (cfg.dataset.feature_dim, cfg.dataset.num_classes) {
        (Some(d), Some(c)) => (d, c),
        _ => match load_dataset(&cfg)? {
            LoadedDataset::Tu(ds) => (ds.feature_dim, ds.num_classes),
            LoadedDataset::Citation(ds) => (ds.graph.features.dim(), ds.num_classes),
            LoadedDataset::Text(ds) => (ds.graph.features.dim(), ds.num_classes),
        },
    };
    let head = match cfg.task {
        TaskKind::Graph => HeadKind::Graph,
        TaskKind::Node | TaskKind::Text => HeadKind::Node,
    };
    let model = Model::new(cfg.model.clone(), feature_dim, num_classes, head, 0)?;
    Ok(model.param_count())
}

/// `export-embeddings`: loads a checkpoint and writes the vectorized node
/// states of the requested layer as CSV.
pub fn cmd_export_embeddings(
    config_path: &Path,
    overrides: &[String],
    checkpoint: &Path,
    layer: usize,
    out: Option<&Path>,
) -> i32 {
    match export_inner(config_path, overrides, checkpoint, layer, out) {
        Ok(path) => {
            println!("wrote {}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn export_inner(
    config_path: &Path,
    overrides: &[String],
    checkpoint: &Path,
    layer: usize,
    out: Option<&Path>,
) -> Result<PathBuf> {
    let cfg = RunConfig::load(config_path, overrides)?;
    let model = Model::load(checkpoint)?;
    let graph = match load_dataset(&cfg)? {
        LoadedDataset::Citation(ds) => ds.graph,
        LoadedDataset::Text(ds) => ds.graph,
        LoadedDataset::Tu(_) => {
            return Err(Error::Config(
                "export-embeddings works on node-level tasks (node, text)".into(),
            ))
        }
    };
    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| {
        cfg.output_dir.join(format!("embeddings_layer{layer}.csv"))
    });
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    trainer::export_embeddings(&model, &graph, layer, &out_path)?;
    Ok(out_path)
}

/// Result of a miniature-model gradient check.
pub struct GradcheckOutcome {
    pub max_rel_error: f64,
    pub checked: usize,
}

/// `gradcheck`: builds a small instance of the configured architecture on
/// a random 8-node graph and compares tape gradients against central
/// finite differences. Exits nonzero when the max relative error exceeds
/// the gradient tolerance.
pub fn cmd_gradcheck(config_path: &Path, overrides: &[String]) -> i32 {
    match gradcheck_inner(config_path, overrides) {
        Ok(outcome) => {
            println!(
                "gradcheck: max relative error {:.3e} over {} sampled parameters",
                outcome.max_rel_error, outcome.checked
            );
            if outcome.max_rel_error < crate::tol::GRADIENT {
                println!("gradcheck: pass (tolerance {:.1e})", crate::tol::GRADIENT);
                0
            } else {
                eprintln!("gradcheck: FAIL (tolerance {:.1e})", crate::tol::GRADIENT);
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn gradcheck_inner(config_path: &Path, overrides: &[String]) -> Result<GradcheckOutcome> {
    let cfg = RunConfig::load(config_path, overrides)?;
    // Miniature instance: same arch/layers/activation, clamped width, no
    // dropout (finite differences need a deterministic loss).
    let mut model_cfg = cfg.model.clone();
    model_cfg.hidden = 6;
    model_cfg.dropout = 0.0;
    let (feature_dim, num_classes) = (8usize, 4usize);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let n = 8;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(0.4) {
                edges.push((u, v));
            }
        }
    }
    edges.push((0, 1));
    let feats = Mat::from_shape_fn((n, feature_dim), |_| rng.random_range(-1.0..1.0));
    let mut graph = Graph::new(n, &edges, Features::Dense(feats))?;
    graph.labels = (0..n).map(|v| v % num_classes).collect();

    let head = match cfg.task {
        TaskKind::Graph => HeadKind::Graph,
        TaskKind::Node | TaskKind::Text => HeadKind::Node,
    };
    let model = Model::new(model_cfg, feature_dim, num_classes, head, cfg.train.seed)?;

    let batch = GraphBatch::new(&[&graph], &[1])?;
    let labels = Arc::new(match head {
        HeadKind::Graph => vec![1usize],
        HeadKind::Node => graph.labels.clone(),
    });
    let rows = Arc::new(match head {
        HeadKind::Graph => vec![0usize],
        HeadKind::Node => (0..n).collect::<Vec<_>>(),
    });

    let loss_of = |mats: &[Mat]| -> f64 {
        let mut m = model.clone();
        for (dst, src) in m.param_views_mut().into_iter().zip(mats) {
            dst.assign(src);
        }
        let mut tape = Tape::new();
        let fwd = match head {
            HeadKind::Graph => m.forward_graph(&mut tape, &batch, None).unwrap(),
            HeadKind::Node => m.forward_node(&mut tape, &graph, None).unwrap(),
        };
        let loss = tape.softmax_cross_entropy(fwd.logits, labels.clone(), rows.clone());
        tape.scalar(loss)
    };
    let params: Vec<Mat> = model.param_views().into_iter().cloned().collect();
    let analytic = {
        let mut tape = Tape::new();
        let fwd = match head {
            HeadKind::Graph => model.forward_graph(&mut tape, &batch, None)?,
            HeadKind::Node => model.forward_node(&mut tape, &graph, None)?,
        };
        let loss = tape.softmax_cross_entropy(fwd.logits, labels.clone(), rows.clone());
        tape.param_grads(loss, &fwd.params)?
    };
    let report = check_gradients(loss_of, &params, &analytic, 1e-5, 120, cfg.train.seed);
    Ok(GradcheckOutcome {
        max_rel_error: report.max_rel_error,
        checked: report.checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, name: &str, body: serde_json::Value) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap()).unwrap();
        path
    }

    #[test]
    fn count_params_reproduces_table_cells_from_config() {
        let tmp = tempfile::tempdir().unwrap();
        let path = write_config(
            tmp.path(),
            "imdb.json",
            serde_json::json!({
                "schema_version": 1,
                "task": "graph",
                "dataset": {"path": "IMDB-B", "feature_dim": 65, "num_classes": 2},
                "model": {"arch": "gcn", "layers": 1, "hidden": 256},
                "train": {"lr": 5e-4, "epochs": 100}
            }),
        );
        assert_eq!(count_params_inner(&path, &[]).unwrap(), 17_152);
        assert_eq!(
            count_params_inner(&path, &["model.layers=5".into()]).unwrap(),
            281_344
        );
        let overrides = vec![
            "model.arch=qgnn".to_string(),
            "model.hidden=64".to_string(),
            "model.layers=5".to_string(),
        ];
        assert_eq!(count_params_inner(&path, &overrides).unwrap(), 84_736);
        let overrides = vec![
            "model.arch=qgnn".to_string(),
            "model.hidden=64".to_string(),
            "model.layers=2".to_string(),
        ];
        assert_eq!(count_params_inner(&path, &overrides).unwrap(), 34_048);
    }

    #[test]
    fn missing_dataset_dir_maps_to_exit_3() {
        let tmp = tempfile::tempdir().unwrap();
        let path = write_config(
            tmp.path(),
            "missing.json",
            serde_json::json!({
                "schema_version": 1,
                "task": "graph",
                "dataset": {"path": "/does/not/exist/ANYWHERE"},
                "model": {"arch": "qgnn", "layers": 1, "hidden": 4},
                "train": {"lr": 1e-3, "epochs": 1}
            }),
        );
        assert_eq!(cmd_train(&path, &[]), 3);
    }

    #[test]
    fn invalid_config_maps_to_exit_2() {
        let tmp = tempfile::tempdir().unwrap();
        let path = write_config(
            tmp.path(),
            "bad.json",
            serde_json::json!({
                "schema_version": 1,
                "task": "graph",
                "dataset": {},
                "model": {"arch": "qgnn", "layers": 1, "hidden": 4},
                "train": {"lr": -5.0, "epochs": 1}
            }),
        );
        assert_eq!(cmd_train(&path, &[]), 2);
    }

    #[test]
    fn gradcheck_passes_on_default_models() {
        let tmp = tempfile::tempdir().unwrap();
        for (task, arch) in [("graph", "qgnn"), ("node", "qgnn"), ("graph", "gcn")] {
            let path = write_config(
                tmp.path(),
                &format!("{task}_{arch}.json"),
                serde_json::json!({
                    "schema_version": 1,
                    "task": task,
                    "dataset": {},
                    "model": {"arch": arch, "layers": 2, "hidden": 4, "dropout": 0.5},
                    "train": {"lr": 1e-3, "epochs": 1, "seed": 7}
                }),
            );
            let outcome = gradcheck_inner(&path, &[]).unwrap();
            assert!(
                outcome.max_rel_error < crate::tol::GRADIENT,
                "{task}/{arch}: {}",
                outcome.max_rel_error
            );
            assert!(outcome.checked >= 100);
        }
    }

    #[test]
    fn gradcheck_detects_corrupted_gradients() {
        // The checker itself must flag a wrong analytic gradient.
        let loss_of = |p: &[Mat]| p[0][(0, 0)] * p[0][(0, 0)];
        let params = vec![Mat::from_elem((1, 1), 3.0)];
        let corrupted = vec![Mat::from_elem((1, 1), 5.9)]; // true gradient is 6
        let report = check_gradients(loss_of, &params, &corrupted, 1e-5, 10, 0);
        assert!(report.max_rel_error > crate::tol::GRADIENT);
    }

    #[test]
    fn identity_like_linear_model_gradcheck_is_tight() {
        // A purely linear model checks out near machine precision.
        let loss_of = |p: &[Mat]| 2.0 * p[0][(0, 0)] + 0.5 * p[0][(0, 1)];
        let params = vec![Mat::from_shape_vec((1, 2), vec![1.0, -2.0]).unwrap()];
        let analytic = vec![Mat::from_shape_vec((1, 2), vec![2.0, 0.5]).unwrap()];
        let report = check_gradients(loss_of, &params, &analytic, 1e-5, 10, 0);
        assert!(report.max_rel_error < 1e-7, "{}", report.max_rel_error);
    }
}
