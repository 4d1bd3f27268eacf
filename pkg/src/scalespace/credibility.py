"""Joint sign credibility over time (and optionally over scales).

For a set of cells with candidate signs, the joint probability is the
fraction of posterior draws whose derivative has the candidate sign at
*every* cell of the set. Candidate sets are nested: cells are ranked by
pointwise sign probability and the largest prefix meeting the level is
kept.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidConfig, LevelOutOfRange
from .scalespace import DerivativeField


class Label(enum.IntEnum):
    NONE = 0
    INCREASE = 1
    DECREASE = -1

    @property
    def code(self) -> str:
        return {Label.NONE: "none", Label.INCREASE: "inc", Label.DECREASE: "dec"}[self]

    @classmethod
    def from_code(cls, code: str) -> "Label":
        return {"none": cls.NONE, "inc": cls.INCREASE, "dec": cls.DECREASE}[code]


JOINT_MODES = ("row", "map")


def pointwise_sign_probs(Z) -> tuple[np.ndarray, np.ndarray]:
    """Fractions of draws strictly above and strictly below zero, per column."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] < 1:
        raise DimensionMismatch(f"expected an M x n array with M >= 1, got {Z.shape}")
    M = Z.shape[0]
    p_pos = np.count_nonzero(Z > 0, axis=0) / M
    p_neg = np.count_nonzero(Z < 0, axis=0) / M
    return p_pos, p_neg


def _check_level(level: float) -> None:
    if not (0 < level < 1):
        raise LevelOutOfRange(f"level must lie in (0, 1), got {level}")


@dataclass(frozen=True)
class Selection:
    selected: np.ndarray    # column indices, in ranking order
    signs: np.ndarray       # +1 / -1 per selected index
    joint_prob: float


def joint_sign_selection(Z, level: float) -> Selection:
    """Largest prefix of the ranked cells whose joint sign probability >= level.

    Candidate sign is ``+`` when ``p_pos >= p_neg``; cells are ranked by
    ``max(p_pos, p_neg)`` descending, ties by ascending index. The empty
    set has joint probability 1.
    """
    _check_level(level)
    Z = np.asarray(Z, dtype=float)
    p_pos, p_neg = pointwise_sign_probs(Z)
    M, n = Z.shape
    signs = np.where(p_pos >= p_neg, 1, -1)
    q = np.maximum(p_pos, p_neg)
    order = np.lexsort((np.arange(n), -q))

    hits = np.where(signs[order] > 0, Z[:, order] > 0, Z[:, order] < 0)
    # all_hit[m, k]: draw m matches the candidate sign on the first k+1 cells
    all_hit = np.logical_and.accumulate(hits, axis=1)
    counts = all_hit.sum(axis=0)          # non-increasing in k
    ok = counts / M >= level
    k_star = int(np.count_nonzero(ok))    # ok is a prefix of True values
    joint = 1.0 if k_star == 0 else float(counts[k_star - 1] / M)
    sel = order[:k_star]
    return Selection(sel, signs[sel], joint)


def joint_probability(Z, cells, signs) -> float:
    """Fraction of draws with the given strict sign at every listed column."""
    Z = np.asarray(Z, dtype=float)
    cells = np.asarray(cells, dtype=int)
    if cells.size == 0:
        return 1.0
    signs = np.asarray(signs)
    sub = Z[:, cells]
    ok = np.where(signs > 0, sub > 0, sub < 0).all(axis=1)
    return float(np.count_nonzero(ok) / Z.shape[0])


@dataclass(frozen=True, eq=False)
class CredibilityMap:
    bandwidths: np.ndarray
    times: np.ndarray
    labels: np.ndarray          # K x n of Label values (int8)
    p_pos: np.ndarray
    p_neg: np.ndarray
    level: float
    joint_mode: str
    selected_count: np.ndarray  # per row
    joint_prob: np.ndarray      # per row, recomputed from the row's own cells
    map_joint_prob: float | None = None   # whole-map value in map mode

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def label_codes(self) -> np.ndarray:
        table = np.array(["dec", "none", "inc"])
        return table[self.labels.astype(int) + 1]


def build_map(field: DerivativeField, level: float = 0.95, joint_mode: str = "row") -> CredibilityMap:
    _check_level(level)
    if joint_mode not in JOINT_MODES:
        raise InvalidConfig(f"joint_mode must be one of {JOINT_MODES}, got {joint_mode!r}")
    K, n = field.K, field.n
    if K != field.grid.K or any(Zk.shape[1] != n for Zk in field.Z):
        raise DimensionMismatch("derivative field inconsistent with grid or times")

    labels = np.zeros((K, n), dtype=np.int8)
    p_pos = np.empty((K, n))
    p_neg = np.empty((K, n))
    for k, Zk in enumerate(field.Z):
        p_pos[k], p_neg[k] = pointwise_sign_probs(Zk)

    map_joint = None
    if joint_mode == "row":
        joint = np.empty(K)
        for k, Zk in enumerate(field.Z):
            sel = joint_sign_selection(Zk, level)
            labels[k, sel.selected] = sel.signs
            joint[k] = sel.joint_prob
    else:
        stacked = np.concatenate(field.Z, axis=1)
        sel = joint_sign_selection(stacked, level)
        flat = labels.reshape(-1)
        flat[sel.selected] = sel.signs
        joint = np.empty(K)
        for k, Zk in enumerate(field.Z):
            cells = np.flatnonzero(labels[k])
            joint[k] = joint_probability(Zk, cells, labels[k, cells])
        map_joint = sel.joint_prob

    counts = np.count_nonzero(labels, axis=1)
    return CredibilityMap(np.array(field.grid.bandwidths), np.array(field.times), labels,
                          p_pos, p_neg, float(level), joint_mode, counts, joint, map_joint)
