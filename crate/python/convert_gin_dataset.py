#!/usr/bin/env python3
"""Convert a graph-classification dataset from the adjacency-list text
format (one file: graph count, then per graph a `num_nodes label` header
and per-node `tag degree neighbors...` lines) into TU-style files:

    <NAME>_A.txt               edge list, 1-indexed global node ids
    <NAME>_graph_indicator.txt graph id (1-indexed) per node
    <NAME>_graph_labels.txt    one label per graph
    <NAME>_node_labels.txt     one tag per node

With --degrees-as-tags the node-label column is replaced by each node's
degree (the convention for the social datasets, which ship without node
labels); loading those files with feature mode `node_labels_onehot` then
one-hot encodes over the distinct observed degrees.

Usage: convert_gin_dataset.py INPUT.txt OUTDIR NAME [--degrees-as-tags]
"""

import sys
from pathlib import Path


def main() -> None:
    args = [a for a in sys.argv[1:] if a != "--degrees-as-tags"]
    degrees_as_tags = "--degrees-as-tags" in sys.argv[1:]
    if len(args) != 3:
        sys.exit(__doc__)
    src, outdir, name = Path(args[0]), Path(args[1]), args[2]
    outdir.mkdir(parents=True, exist_ok=True)

    with open(src) as f:
        tokens = f.read().split("\n")
    pos = 0

    def next_line():
        nonlocal pos
        while tokens[pos].strip() == "":
            pos += 1
        line = tokens[pos].strip()
        pos += 1
        return line

    num_graphs = int(next_line())
    adj_lines = []
    indicator = []
    graph_labels = []
    node_tags = []
    offset = 0
    for g in range(num_graphs):
        header = next_line().split()
        n, label = int(header[0]), int(header[1])
        graph_labels.append(label)
        for local in range(n):
            row = [int(w) for w in next_line().split()]
            tag, degree = row[0], row[1]
            neighbors = row[2 : 2 + degree]
            node_tags.append(degree if degrees_as_tags else tag)
            indicator.append(g + 1)
            for nb in neighbors:
                adj_lines.append(f"{offset + local + 1}, {offset + nb + 1}")
        offset += n

    (outdir / f"{name}_A.txt").write_text("\n".join(adj_lines) + "\n")
    (outdir / f"{name}_graph_indicator.txt").write_text(
        "\n".join(str(i) for i in indicator) + "\n"
    )
    (outdir / f"{name}_graph_labels.txt").write_text(
        "\n".join(str(l) for l in graph_labels) + "\n"
    )
    (outdir / f"{name}_node_labels.txt").write_text(
        "\n".join(str(t) for t in node_tags) + "\n"
    )
    print(
        f"{name}: {num_graphs} graphs, {len(indicator)} nodes, "
        f"{len(adj_lines)} directed edge entries, "
        f"{len(set(node_tags))} node tags, {len(set(graph_labels))} classes"
    )


if __name__ == "__main__":
    main()
