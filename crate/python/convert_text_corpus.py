#!/usr/bin/env python3
"""Convert a text-classification corpus from the two-file layout used by
the public text-GCN distributions (a metadata file with `id<TAB>split<TAB>label`
lines and a cleaned corpus file with one tokenized document per line, same
order) into the engine's format:

    corpus.tsv  `label<TAB>token token ...` per document
    split.txt   `train` or `test` per document (same order)

Usage: convert_text_corpus.py META.txt CLEAN_CORPUS.txt OUTDIR
"""

import sys
from pathlib import Path


def main() -> None:
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    meta_path, corpus_path, outdir = Path(sys.argv[1]), Path(sys.argv[2]), Path(sys.argv[3])
    outdir.mkdir(parents=True, exist_ok=True)

    meta = [l for l in meta_path.read_text().splitlines() if l.strip()]
    docs = [l for l in corpus_path.read_text().splitlines()]
    if len(meta) != len(docs):
        sys.exit(f"{len(meta)} metadata lines vs {len(docs)} documents")

    out_corpus = []
    out_split = []
    for line, text in zip(meta, docs):
        parts = line.split("\t")
        split, label = parts[1], parts[2]
        split = "train" if "train" in split else "test"
        out_corpus.append(f"{label}\t{text.strip()}")
        out_split.append(split)
    (outdir / "corpus.tsv").write_text("\n".join(out_corpus) + "\n")
    (outdir / "split.txt").write_text("\n".join(out_split) + "\n")
    n_train = sum(1 for s in out_split if s == "train")
    labels = {l.split("\t")[0] for l in out_corpus}
    print(
        f"{len(docs)} documents ({n_train} train, {len(docs) - n_train} test), "
        f"{len(labels)} classes"
    )


if __name__ == "__main__":
    main()
