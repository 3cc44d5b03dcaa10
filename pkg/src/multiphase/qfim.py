"""Quantum Fisher information matrices for multimode phase imprinting.

Phase shifts are generated by the commuting photon-number operators, so for
a pure state the QFIM is four times the covariance matrix of the mode
photon numbers, and for a global-phase-averaged state it is the layer-weight
convex sum of the per-layer matrices.  Closed forms exist for coherent
probes (with and without an external phase reference) and for fixed-N
block superpositions; :func:`qfim_oracle` recomputes the same matrix from
explicit Fock layers and serves as the independent cross-check.

Without an external reference the matrix has vanishing row sums, hence rank
at most d: only relative phases are estimable, and bounds are formed by
restricting to a d x d block and inverting that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .fock import CoherentProbe, FockLayer, NoonProbe, covariance_matrix

PROVENANCES = ("with_reference", "superselected", "restricted", "reparametrized")


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric PSD information matrix with a record of how it arose."""

    entries: np.ndarray
    provenance: str
    basis_labels: tuple

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvariantViolation("Fisher matrix must be square")
        if self.provenance not in PROVENANCES:
            raise InvariantViolation(f"unknown provenance {self.provenance!r}")
        if len(self.basis_labels) != m.shape[0]:
            raise InvariantViolation("one basis label per row required")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.T).max() > 1e-10 * scale:
            raise InvariantViolation("Fisher matrix must be symmetric")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < -1e-8 * max(eigs.max(), 0.0) - 1e-300:
            raise InvariantViolation(f"Fisher matrix not PSD: min eigenvalue {eigs.min()}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _mode_labels(n_modes):
    return tuple(f"phi_{i}" for i in range(n_modes))


def qfim_coherent_with_reference(probe: CoherentProbe) -> FisherMatrix:
    """QFIM of a coherent probe when an external phase reference is free:
    diagonal, 4 |alpha_i|^2."""
    return FisherMatrix(
        4.0 * np.diag(probe.mode_energies), "with_reference", _mode_labels(probe.n_modes)
    )


def qfim_coherent_no_reference(probe: CoherentProbe) -> FisherMatrix:
    """QFIM of a coherent probe after global-phase averaging:
    4 (delta_ij |alpha_i|^2 - |alpha_i|^2 |alpha_j|^2 / E).  Rows sum to zero."""
    e = probe.mode_energies
    h = 4.0 * (np.diag(e) - np.outer(e, e) / probe.total_energy)
    return FisherMatrix(h, "superselected", _mode_labels(probe.n_modes))


def qfim_noon(probe: NoonProbe) -> FisherMatrix:
    """QFIM of a fixed-N block superposition:
    4 N^2 (delta_ij |beta_i|^2 - |beta_i|^2 |beta_j|^2)."""
    b = probe.branch_weights
    n = probe.photon_number
    h = 4.0 * n * n * (np.diag(b) - np.outer(b, b))
    return FisherMatrix(h, "superselected", _mode_labels(probe.n_modes))


def qfim_oracle(layers: list[FockLayer]) -> FisherMatrix:
    """Brute-force QFIM from explicit Fock layers.

    Computes 4 sum_N p_N Cov_N(n_i, n_j) directly from layer amplitudes.
    The result does not depend on any phases already applied to the layers,
    since phase shifts leave occupation probabilities unchanged.
    """
    if not layers:
        raise ValueError("need at least one Fock layer")
    n_modes = layers[0].n_modes
    h = np.zeros((n_modes, n_modes))
    for layer in layers:
        if layer.n_modes != n_modes:
            raise ValueError("layers disagree on the number of modes")
        h += 4.0 * layer.weight * covariance_matrix(layer)
    return FisherMatrix(h, "superselected", _mode_labels(n_modes))


def rank_of(matrix: FisherMatrix, tol: float = 1e-8) -> int:
    """Numerical rank: singular values above tol times the largest."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = np.linalg.svd(matrix.entries, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def restrict(matrix: FisherMatrix, drop_mode: int = 0) -> FisherMatrix:
    """Remove one mode's row and column.

    A zero-row-sum matrix loses no information this way: the remaining
    block carries everything about the phases relative to the dropped mode.
    Labels become delta_{m,i} for the estimation basis that keeps mode m
    as the phase origin.
    """
    n = matrix.dim
    if not 0 <= drop_mode < n:
        raise ValueError(f"drop_mode {drop_mode} out of range for dimension {n}")
    keep = [i for i in range(n) if i != drop_mode]
    sub = matrix.entries[np.ix_(keep, keep)]
    labels = tuple(f"delta_{drop_mode}_{i}" for i in keep)
    return FisherMatrix(sub, "restricted", labels)


def invert_restricted(probe) -> np.ndarray:
    """Closed-form inverse of the QFIM restricted to phases relative to
    mode 0.

    The restricted matrix is a diagonal minus a rank-one update, so its
    inverse follows from the Sherman-Morrison formula:
    delta_ij / (4 E_i) + 1 / (4 E_0), with E_i = |alpha_i|^2 for coherent
    probes and E_i = N^2 |beta_i|^2 for fixed-N probes.
    """
    if isinstance(probe, NoonProbe):
        scaled = probe.photon_number**2 * probe.branch_weights
    elif isinstance(probe, CoherentProbe):
        scaled = probe.mode_energies
    else:
        raise TypeError(f"unsupported probe type {type(probe).__name__}")
    if np.any(scaled <= 0.0):
        raise InvariantViolation("every mode needs nonzero energy to invert the restricted QFIM")
    return np.diag(1.0 / (4.0 * scaled[1:])) + 1.0 / (4.0 * scaled[0])
