"""Independent reference computations used by the test-suite."""

import numpy as np


def brute_force_selection(Z, level):
    """Nested-family selection by explicit enumeration over draws.

    Returns ``(selected, signs, joint_prob)`` with ``selected`` in ranking
    order, mirroring the construction with plain Python loops.
    """
    Z = [list(map(float, row)) for row in np.asarray(Z)]
    M, n = len(Z), len(Z[0])
    cand, score = [], []
    for i in range(n):
        pos = sum(1 for m in range(M) if Z[m][i] > 0)
        neg = sum(1 for m in range(M) if Z[m][i] < 0)
        cand.append(1 if pos >= neg else -1)
        score.append(max(pos, neg))
    order = sorted(range(n), key=lambda i: (-score[i], i))

    def joint(k):
        cells = order[:k]
        hits = 0
        for m in range(M):
            if all((Z[m][j] > 0) if cand[j] > 0 else (Z[m][j] < 0) for j in cells):
                hits += 1
        return hits / M

    best_k, best_j = 0, 1.0
    for k in range(1, n + 1):
        j = joint(k)
        if j >= level:
            best_k, best_j = k, j
    sel = order[:best_k]
    return sel, [cand[i] for i in sel], best_j


def recomputed_joint_probability(Z, labels_row):
    """Fraction of draws whose sign agrees with every labelled cell."""
    Z = np.asarray(Z)
    cells = [i for i, lab in enumerate(labels_row) if lab != 0]
    if not cells:
        return 1.0
    hits = 0
    for row in Z:
        if all((row[i] > 0) if labels_row[i] > 0 else (row[i] < 0) for i in cells):
            hits += 1
    return hits / Z.shape[0]
