#!/usr/bin/env python3
"""Convert raw Planetoid files (ind.<name>.x, .y, .tx, .ty, .allx, .ally,
.graph, .test.index) into the directory layout read by `egnn --dataset`.

    python3 scripts/convert_planetoid.py RAW_DIR cora OUT_DIR

Masks follow the standard public split: the first 20 per class of the
labelled training block, the next 500 nodes for validation and the listed
test indices.
"""

import argparse
import pathlib
import pickle
import sys

import numpy as np
import scipy.sparse as sp


def load(raw, name, part):
    with open(raw / f"ind.{name}.{part}", "rb") as f:
        return pickle.load(f, encoding="latin1")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("raw_dir", type=pathlib.Path)
    ap.add_argument("name")
    ap.add_argument("out_dir", type=pathlib.Path)
    args = ap.parse_args()

    x, y, tx, ty, allx, ally, graph = (load(args.raw_dir, args.name, p)
                                       for p in ("x", "y", "tx", "ty", "allx", "ally", "graph"))
    test_idx = [int(line) for line in open(args.raw_dir / f"ind.{args.name}.test.index")]
    test_sorted = sorted(test_idx)

    if args.name == "citeseer":
        # isolated test nodes are missing from tx/ty
        full = range(test_sorted[0], test_sorted[-1] + 1)
        tx_ext = sp.lil_matrix((len(full), tx.shape[1]))
        tx_ext[np.array(test_sorted) - test_sorted[0], :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full), ty.shape[1]))
        ty_ext[np.array(test_sorted) - test_sorted[0], :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_idx, :] = features[test_sorted, :]
    labels = np.vstack((ally, ty))
    labels[test_idx, :] = labels[test_sorted, :]
    n = features.shape[0]
    label_ids = labels.argmax(1)

    edges = set()
    for i, nbrs in graph.items():
        for j in nbrs:
            if i != j and i < n and j < n:
                edges.add((min(i, j), max(i, j)))

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "edges.txt", "w") as f:
        f.write(f"# {args.name}: {n} nodes, {len(edges)} undirected edges\n")
        for i, j in sorted(edges):
            f.write(f"{i} {j}\n")
    dense = features.toarray()
    np.savetxt(out / "features.csv", dense, delimiter=",", fmt="%.10g")
    np.savetxt(out / "labels.csv", label_ids, fmt="%d")

    train = np.zeros(n, dtype=int)
    val = np.zeros(n, dtype=int)
    test = np.zeros(n, dtype=int)
    train[: y.shape[0]] = 1
    val[y.shape[0]: y.shape[0] + 500] = 1
    test[test_idx] = 1
    val[test == 1] = 0
    # nodes without a label row (citeseer padding) stay out of every split
    unlabeled = labels.sum(1) == 0
    train[unlabeled] = val[unlabeled] = test[unlabeled] = 0
    np.savetxt(out / "masks.csv", np.stack([train, val, test], 1), delimiter=",", fmt="%d")
    print(f"{args.name}: n={n} d={dense.shape[1]} C={labels.shape[1]} m={len(edges)} "
          f"train={train.sum()} val={val.sum()} test={test.sum()}", file=sys.stderr)


if __name__ == "__main__":
    main()
