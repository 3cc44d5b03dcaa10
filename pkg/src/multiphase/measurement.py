"""Projective measurements that extract relative phases at the quantum limit.

For a fixed-N probe, a set of d+1 orthonormal vectors over the single-mode
N-photon blocks defines a projective measurement.  Choosing the first
vector as the (unperturbed) probe state itself and completing the set by
Gram-Schmidt over a ladder of sign patterns yields measurements whose
classical Fisher information approaches the quantum limit as the phases
approach the measurement's design point.  Because that limit saturates the
matrix bound, the same measurement is optimal for every quadratic cost.

The classical Fisher information is singular exactly at the design point
(the first outcome then fires with certainty), so it is evaluated at small
offsets and polynomially extrapolated to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .fock import ModeCount, NoonProbe, PhaseVector

SOURCES = ("humphreys", "ghz_gs", "ghz_hadamard_d3", "custom")

PROBABILITY_FLOOR = 1e-15
DERIVATIVE_FLOOR = 1e-12
DEFAULT_EPSILONS = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class MeasurementSet:
    """d+1 orthonormal projector vectors over the N-photon block basis."""

    vectors: np.ndarray
    photon_number: int
    source: str

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvariantViolation("need exactly d+1 vectors of length d+1")
        ModeCount(v.shape[0])
        if self.source not in SOURCES:
            raise InvariantViolation(f"unknown measurement source {self.source!r}")
        if self.photon_number < 1:
            raise InvariantViolation("photon number must be a positive integer")
        gram = v.conj() @ v.T
        if np.abs(gram - np.eye(v.shape[0])).max() > 1e-10:
            raise InvariantViolation("projector vectors must be orthonormal")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def n_modes(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.n_modes - 1


@dataclass(frozen=True)
class CfimResult:
    """Classical Fisher information of the outcome statistics at one point."""

    matrix: np.ndarray
    evaluation_phases: PhaseVector
    epsilon: float
    status: str = "ok"


def _gram_schmidt(rows: np.ndarray) -> np.ndarray:
    """Orthonormalize rows in order, with a re-orthogonalization pass."""
    out = []
    for row in np.array(rows, dtype=float):
        u = row.copy()
        for _ in range(2):  # second pass scrubs the O(eps) residue of the first
            for q in out:
                u -= (q @ u) * q
        norm = np.linalg.norm(u)
        if norm < 1e-12:
            raise InvariantViolation("ladder vectors are linearly dependent")
        out.append(u / norm)
    return np.array(out)


def _ladder(first_entry: float, d: int) -> np.ndarray:
    """Sign-pattern ladder: row 1 is (first, 1, ..., 1); row j flips the
    last surviving +1 to -1 and zeroes everything after it."""
    rows = [[first_entry] + [1.0] * d]
    for j in range(2, d + 2):
        rows.append([first_entry] + [1.0] * (d - j + 1) + [-1.0] + [0.0] * (j - 2))
    return np.array(rows)


def build_humphreys_set(d: int, photon_number: int) -> MeasurementSet:
    """Projector set matched to the optimal common-reference probe.

    The ladder head d^{1/4} makes the first vector proportional to the
    probe that minimizes the summed variance against a privileged mode,
    so the first projector is the projector onto that probe state.
    """
    ModeCount(d + 1)
    u = _gram_schmidt(_ladder(d**0.25, d))
    return MeasurementSet(u, photon_number, "humphreys")


def build_ghz_set(d: int, photon_number: int) -> MeasurementSet:
    """Projector set matched to the equal-superposition probe that is
    optimal for the ring and all-pairs costs."""
    ModeCount(d + 1)
    u = _gram_schmidt(_ladder(1.0, d))
    return MeasurementSet(u, photon_number, "ghz_gs")


def build_hadamard_d3(photon_number: int) -> MeasurementSet:
    """Alternative four-outcome set for d = 3: normalized Hadamard rows.

    Shares its first vector with the equal-superposition probe and induces
    the same Fisher information limit as the Gram-Schmidt construction.
    """
    u = 0.5 * np.array([
        [1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ])
    return MeasurementSet(u, photon_number, "ghz_hadamard_d3")


def outcome_probabilities(measurement: MeasurementSet, probe: NoonProbe,
                          phases: PhaseVector) -> np.ndarray:
    """Born-rule outcome distribution for the phase-shifted probe.

    The probe evolves branchwise to beta_i e^{i N phi_i}, so outcome j has
    probability |sum_i conj(u^{(j)}_i) beta_i e^{i N phi_i}|^2.
    """
    if not (measurement.n_modes == probe.n_modes == phases.n_modes):
        raise ValueError("measurement, probe, and phases disagree on mode count")
    if measurement.photon_number != probe.photon_number:
        raise ValueError("measurement and probe disagree on photon number")
    evolved = probe.betas * np.exp(1j * probe.photon_number * phases.phases)
    return np.abs(measurement.vectors.conj() @ evolved) ** 2


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _offset_direction(d: int) -> np.ndarray:
    # fixed generic direction: square roots of distinct primes admit no
    # small-integer relation, so no outcome's leading phase dependence can
    # cancel (integer patterns like (1, 2, 3) do cancel for sign-pattern
    # projector sets and would push that outcome's information to higher
    # order in epsilon)
    if d > len(_PRIMES):
        raise ValueError(f"offset direction table covers d <= {len(_PRIMES)}")
    return np.sqrt(np.array(_PRIMES[:d], dtype=float) / 2.0)


def cfim(measurement: MeasurementSet, probe: NoonProbe, phases: PhaseVector,
         epsilon: float) -> CfimResult:
    """Classical Fisher information near (but not at) the design point.

    The d parameters are the phases relative to mode 0.  The evaluation
    point is ``phases`` displaced by epsilon along a fixed generic
    direction; derivatives are central differences of step epsilon/10.
    Outcomes with probability below the floor are dropped when their
    derivative also vanishes (a removable 0/0), otherwise the result is
    flagged as an underflow.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    d = probe.d
    base = phases.phases[1:] - phases.phases[0]
    point = base + epsilon * _offset_direction(d)
    step = epsilon / 10.0

    def p_at(offsets):
        return outcome_probabilities(measurement, probe, PhaseVector.from_offsets(offsets))

    probs = p_at(point)
    grads = np.empty((d, probs.size))
    for a in range(d):
        shift = np.zeros(d)
        shift[a] = step
        grads[a] = (p_at(point + shift) - p_at(point - shift)) / (2.0 * step)

    status = "ok"
    matrix = np.zeros((d, d))
    for j in range(probs.size):
        if probs[j] < PROBABILITY_FLOOR:
            if np.abs(grads[:, j]).max() < DERIVATIVE_FLOOR:
                continue  # extinguished outcome, removable singularity
            status = "underflow"
            continue
        matrix += np.outer(grads[:, j], grads[:, j]) / probs[j]
    return CfimResult(matrix, PhaseVector.from_offsets(point), epsilon, status)


def extrapolate_to_zero(xs, values):
    """Entrywise polynomial extrapolation of values sampled at xs down to 0
    (Neville's scheme)."""
    xs = np.asarray(xs, dtype=float)
    table = [np.array(v, dtype=float) for v in values]
    if len(xs) != len(table) or len(xs) < 2:
        raise ValueError("need matching xs and values, at least two points")
    n = len(xs)
    for level in range(1, n):
        for i in range(n - level):
            x_lo, x_hi = xs[i], xs[i + level]
            table[i] = (x_hi * table[i] - x_lo * table[i + 1]) / (x_hi - x_lo)
    return table[0]


def extrapolate_cfim(measurement: MeasurementSet, probe: NoonProbe,
                     epsilons=DEFAULT_EPSILONS, phases: PhaseVector | None = None):
    """CFIM limit at the design point via polynomial extrapolation.

    Evaluates the finite-offset CFIM at each epsilon and extrapolates
    entrywise to epsilon = 0.  Returns the extrapolated matrix and the
    per-epsilon results.
    """
    if phases is None:
        phases = PhaseVector.zero(probe.n_modes)
    results = [cfim(measurement, probe, phases, eps) for eps in epsilons]
    return extrapolate_to_zero(epsilons, [r.matrix for r in results]), results
