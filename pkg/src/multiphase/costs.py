"""Cost matrices for relative-phase estimation and the scalar bounds they set.

A choice of which relative phases matter (and how much) is a set of target
parameters that are linear in the d phases relative to mode 0.  Stacking
the difference coefficients gives a Jacobian J, and any estimator's
weighted variance sum obeys sum >= Tr(R C) with R = J^T J.  Three standard
parametrizations are provided: all phases against a common reference
(R identity), each mode against its cyclic neighbour (ring), and every
unordered pair (all pairs).  Weighted variants scale the Jacobian rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InvariantViolation

COST_KINDS = (
    "common_reference",
    "ring",
    "all_pairs",
    "weighted_common",
    "weighted_ring",
    "custom",
)


@dataclass(frozen=True)
class CostMatrix:
    """Positive-semidefinite weight matrix R together with the Jacobian
    generating it as R = J^T J (weights absorbed into the rows of J)."""

    matrix: np.ndarray
    kind: str
    jacobian: np.ndarray

    def __post_init__(self):
        r = np.array(self.matrix, dtype=float)
        j = np.array(self.jacobian, dtype=float)
        if self.kind not in COST_KINDS:
            raise InvariantViolation(f"unknown cost kind {self.kind!r}")
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise InvariantViolation("cost matrix must be square")
        if j.shape[1] != r.shape[0]:
            raise InvariantViolation("jacobian columns must match the cost dimension")
        scale = max(1.0, float(np.abs(r).max()))
        if np.abs(r - r.T).max() > 1e-12 * scale:
            raise InvariantViolation("cost matrix must be symmetric")
        if np.abs(j.T @ j - r).max() > 1e-12 * scale:
            raise InvariantViolation("cost matrix must factor as J^T J")
        r.setflags(write=False)
        j.setflags(write=False)
        object.__setattr__(self, "matrix", r)
        object.__setattr__(self, "jacobian", j)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ScalarBound:
    """Lower bound on a weighted sum of variances: Tr(R H^{-1})."""

    value: float
    cost_kind: str
    probe_descriptor: str = ""


def _check_weights(weights, expected, what):
    w = np.asarray(weights, dtype=float)
    if w.shape != (expected,):
        raise ValueError(f"{what} needs {expected} weights, got shape {w.shape}")
    if np.any(w <= 0):
        raise ValueError(f"{what} weights must be positive")
    return w


def cost_common(d: int, weights=None) -> CostMatrix:
    """Weighted sum of the variances of the d phases relative to mode 0.

    Unweighted this is the identity; weights w_i give diag(w).
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if weights is None:
        eye = np.eye(d)
        return CostMatrix(eye, "common_reference", eye.copy())
    w = _check_weights(weights, d, "common-reference cost")
    return CostMatrix(np.diag(w), "weighted_common", np.diag(np.sqrt(w)))


def ring_jacobian(d: int) -> np.ndarray:
    """Rows are the d+1 cyclic neighbour differences phi_{i+1} - phi_i
    expressed in the d phases relative to mode 0 (mode indices mod d+1)."""
    j = np.zeros((d + 1, d))
    for i in range(d + 1):
        nxt = (i + 1) % (d + 1)
        if nxt >= 1:
            j[i, nxt - 1] += 1.0
        if i >= 1:
            j[i, i - 1] -= 1.0
    return j


def cost_ring(d: int, weights=None) -> CostMatrix:
    """Cyclic neighbour-difference cost.

    For d >= 2 the unweighted matrix is tridiagonal with 2 on the diagonal
    and -1 off it; for d = 1 both cyclic differences collapse onto the
    single parameter with opposite signs, giving the 1 x 1 matrix [2].
    Weights (one per edge, w_d belonging to the edge closing the cycle
    between mode d and mode 0) scale the Jacobian rows.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    j = ring_jacobian(d)
    if weights is None:
        return CostMatrix(j.T @ j, "ring", j)
    w = _check_weights(weights, d + 1, "ring cost")
    jw = np.sqrt(w)[:, None] * j
    return CostMatrix(jw.T @ jw, "weighted_ring", jw)


def pair_index(d: int) -> list[tuple[int, int]]:
    """Unordered mode pairs in lexicographic order: (0,1), (0,2), ..."""
    return list(combinations(range(d + 1), 2))


def cost_all_pairs(d: int) -> CostMatrix:
    """Cost counting every pairwise relative phase once: d on the diagonal,
    -1 elsewhere."""
    if d < 1:
        raise ValueError("d must be at least 1")
    pairs = pair_index(d)
    j = np.zeros((len(pairs), d))
    for row, (a, b) in enumerate(pairs):
        if b >= 1:
            j[row, b - 1] += 1.0
        if a >= 1:
            j[row, a - 1] -= 1.0
    return CostMatrix(j.T @ j, "all_pairs", j)


def cost_custom(jacobian, weights=None) -> CostMatrix:
    """Cost from an arbitrary stack of parameter rows (optionally weighted)."""
    j = np.array(jacobian, dtype=float)
    if j.ndim != 2:
        raise ValueError("jacobian must be 2-d")
    if weights is not None:
        w = _check_weights(weights, j.shape[0], "custom cost")
        j = np.sqrt(w)[:, None] * j
    return CostMatrix(j.T @ j, "custom", j)


def scalar_bound(restricted_inverse, cost: CostMatrix, probe_descriptor: str = "") -> ScalarBound:
    """Tr(R H^{-1}) for an inverted restricted information matrix."""
    c = np.asarray(restricted_inverse, dtype=float)
    if c.shape != cost.matrix.shape:
        raise ValueError(f"dimension mismatch: inverse {c.shape}, cost {cost.matrix.shape}")
    return ScalarBound(float(np.trace(cost.matrix @ c)), cost.kind, probe_descriptor)


def variance_of_pair(covariance, i: int, j: int) -> float:
    """Variance of the relative phase between modes i and j, given the
    covariance matrix of the phases relative to mode 0.

    Uses Var(x - y) = Var(x) + Var(y) - 2 Cov(x, y) with the convention
    that the mode-0 entry has zero variance.
    """
    c = np.asarray(covariance, dtype=float)
    d = c.shape[0]
    if not (0 <= i <= d and 0 <= j <= d):
        raise ValueError(f"mode indices must lie in 0..{d}")

    def var(a):
        return 0.0 if a == 0 else c[a - 1, a - 1]

    def cov(a, b):
        return 0.0 if (a == 0 or b == 0) else c[a - 1, b - 1]

    return var(i) + var(j) - 2.0 * cov(i, j)
