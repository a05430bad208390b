#!/usr/bin/env python3
"""Convert a planetoid-distribution citation network (the pickled
ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index} files) into the portable
TSV format consumed by the engine:

    nodes.tsv   `#features <dim>` line, then `id<TAB>label<TAB>idx:val ...`
    edges.tsv   `id<TAB>id`, unique undirected pairs

Node ids are `n<index>` in planetoid order (train, rest, reordered test).

Usage: convert_planetoid.py DATA_DIR NAME OUTDIR   (e.g. ... data cora out/cora)
"""

import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load(data_dir: Path, name: str):
    objs = {}
    for ext in ["x", "y", "tx", "ty", "allx", "ally", "graph"]:
        with open(data_dir / f"ind.{name}.{ext}", "rb") as f:
            objs[ext] = pickle.load(f, encoding="latin1")
    test_idx = [int(l) for l in open(data_dir / f"ind.{name}.test.index")]
    return objs, test_idx


def main() -> None:
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    data_dir, name, outdir = Path(sys.argv[1]), sys.argv[2], Path(sys.argv[3])
    outdir.mkdir(parents=True, exist_ok=True)

    objs, test_idx = load(data_dir, name)
    features = sp.vstack((objs["allx"], objs["tx"])).tolil()
    labels = np.vstack((objs["ally"], objs["ty"]))
    # Test rows are stored shuffled; place them at their true indices.
    # Citeseer has isolated test nodes missing from the files: the index
    # range can exceed the row count, so build the full range explicitly.
    test_range = np.arange(min(test_idx), max(test_idx) + 1)
    full_features = sp.lil_matrix((len(objs["ally"]) + len(test_range), features.shape[1]))
    full_features[: objs["allx"].shape[0]] = objs["allx"].tolil()
    full_labels = np.zeros((full_features.shape[0], labels.shape[1]))
    full_labels[: len(objs["ally"])] = objs["ally"]
    tx = objs["tx"].tolil()
    for row, idx in enumerate(test_idx):
        full_features[idx] = tx[row]
        full_labels[idx] = objs["ty"][row]
    features = full_features.tocsr()
    labels = full_labels

    graph = objs["graph"]
    n = features.shape[0]
    label_idx = labels.argmax(axis=1)
    # Isolated padding nodes (citeseer) keep their all-zero label rows and
    # are assigned class 0; they have no edges and never enter any split
    # with their true class, matching the standard preprocessing.
    lines = [f"#features {features.shape[1]}"]
    for node in range(n):
        row = features.getrow(node)
        pairs = " ".join(f"{c}:{v:.6g}" for c, v in zip(row.indices, row.data))
        lines.append(f"n{node}\tc{label_idx[node]}\t{pairs}")
    (outdir / "nodes.tsv").write_text("\n".join(lines) + "\n")

    pairs = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v:
                pairs.add((min(u, v), max(u, v)))
    edge_lines = [f"n{u}\tn{v}" for u, v in sorted(pairs)]
    (outdir / "edges.tsv").write_text("\n".join(edge_lines) + "\n")
    print(
        f"{name}: {n} nodes, {len(pairs)} undirected edges, "
        f"{features.shape[1]} feature dims, {labels.shape[1]} classes"
    )


if __name__ == "__main__":
    main()
