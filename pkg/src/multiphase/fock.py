"""Multimode photonic probe states and their photon-number structure.

Two probe families are modelled: multimode coherent states (one complex
amplitude per mode) and fixed-photon-number superpositions that put all N
photons into a single mode per branch.  A coherent probe decomposes into
"Fock layers", the components with exactly N photons in total; the layer
weights follow a Poisson distribution in the mean photon number and the
amplitudes inside a layer follow the multinomial expansion of the mode
amplitudes.  Per-mode phase shifts act diagonally on occupation vectors,
so everything downstream (Fisher information, measurement statistics)
reduces to photon-number moments computable from these layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import InvariantViolation

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class ModeCount:
    """Number of optical modes d+1 for a d-phase estimation problem."""

    d_plus_1: int

    def __post_init__(self):
        if self.d_plus_1 < 2:
            raise InvariantViolation(
                f"need at least two modes (one relative phase), got {self.d_plus_1}"
            )

    @property
    def d(self) -> int:
        return self.d_plus_1 - 1


@dataclass(frozen=True)
class PhaseVector:
    """Per-mode phase angles in radians.  No wrapping is applied."""

    phases: np.ndarray

    def __post_init__(self):
        arr = np.array(self.phases, dtype=float)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise InvariantViolation("phases must be a finite 1-d vector")
        arr.setflags(write=False)
        object.__setattr__(self, "phases", arr)

    @classmethod
    def zero(cls, n_modes: int) -> "PhaseVector":
        return cls(np.zeros(n_modes))

    @classmethod
    def from_offsets(cls, offsets) -> "PhaseVector":
        """Phases (0, o_1, ..., o_d): mode 0 is the phase origin."""
        return cls(np.concatenate([[0.0], np.asarray(offsets, dtype=float)]))

    @property
    def n_modes(self) -> int:
        return self.phases.size


@dataclass(frozen=True)
class CoherentProbe:
    """Product of coherent states, one complex amplitude per mode."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex)
        if arr.ndim != 1 or arr.size < 1 or not np.all(np.isfinite(arr)):
            raise InvariantViolation("amplitudes must be a finite 1-d complex vector")
        if not np.vdot(arr, arr).real > 0.0:
            raise InvariantViolation("probe carries no energy (all amplitudes zero)")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @classmethod
    def balanced(cls, n_modes: int, energy: float) -> "CoherentProbe":
        return cls(np.full(n_modes, math.sqrt(energy / n_modes), dtype=complex))

    @classmethod
    def from_energies(cls, energies) -> "CoherentProbe":
        """Real amplitudes sqrt(E_i) from per-mode energies."""
        e = np.asarray(energies, dtype=float)
        if np.any(e < 0):
            raise InvariantViolation("per-mode energies must be non-negative")
        return cls(np.sqrt(e).astype(complex))

    @property
    def n_modes(self) -> int:
        return self.amplitudes.size

    @property
    def d(self) -> int:
        return self.n_modes - 1

    @property
    def mode_energies(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def total_energy(self) -> float:
        """Mean photon number E = sum |alpha_i|^2."""
        return float(np.sum(self.mode_energies))


@dataclass(frozen=True)
class NoonProbe:
    """Fixed-N superposition placing all N photons in one mode per branch.

    The state is sum_i beta_i |N>_i with |N>_i the N-photon state of mode i
    (vacuum elsewhere).  All branches share the total photon number, so the
    state is invariant under global-phase averaging.
    """

    betas: np.ndarray
    photon_number: int

    def __post_init__(self):
        arr = np.array(self.betas, dtype=complex)
        ModeCount(arr.size)
        norm = float(np.sum(np.abs(arr) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise InvariantViolation(f"branch weights must sum to 1, got {norm!r}")
        if self.photon_number < 1:
            raise InvariantViolation("photon number must be a positive integer")
        arr.setflags(write=False)
        object.__setattr__(self, "betas", arr)

    @classmethod
    def ghz(cls, d: int, photon_number: int) -> "NoonProbe":
        """Equal-weight superposition over all d+1 modes."""
        return cls(np.full(d + 1, 1.0 / math.sqrt(d + 1), dtype=complex), photon_number)

    @classmethod
    def common_optimal(cls, d: int, photon_number: int) -> "NoonProbe":
        """Branch weights minimizing the summed variance of the d phases
        relative to mode 0: |beta_0|^2 = sqrt(d)/(d+sqrt(d)), rest equal."""
        v = np.concatenate([[d**0.25], np.ones(d)])
        return cls((v / np.linalg.norm(v)).astype(complex), photon_number)

    @classmethod
    def from_weights(cls, weights, photon_number: int) -> "NoonProbe":
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise InvariantViolation("weights must be non-negative with positive sum")
        return cls(np.sqrt(w / w.sum()).astype(complex), photon_number)

    @property
    def n_modes(self) -> int:
        return self.betas.size

    @property
    def d(self) -> int:
        return self.n_modes - 1

    @property
    def branch_weights(self) -> np.ndarray:
        return np.abs(self.betas) ** 2


@dataclass(frozen=True)
class FockLayer:
    """Fixed-total-photon-number component of a multimode state.

    ``occupations`` lists the basis occupation vectors (rows sum to
    ``total_photons``) in lexicographically descending order of the first
    mode; ``amplitudes`` are the matching normalized coefficients.
    ``weight`` is the probability of finding the state in this layer.
    """

    total_photons: int
    weight: float
    occupations: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        occ = np.asarray(self.occupations)
        amp = np.array(self.amplitudes, dtype=complex)
        if occ.shape[0] != amp.size:
            raise InvariantViolation("one amplitude per occupation vector required")
        if np.any(occ.sum(axis=1) != self.total_photons):
            raise InvariantViolation("every occupation vector must sum to the layer photon number")
        if not 0.0 <= self.weight <= 1.0:
            raise InvariantViolation("layer weight is a probability")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise InvariantViolation(f"layer amplitudes must be normalized, got {norm!r}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n_modes(self) -> int:
        return self.occupations.shape[1]

    def amplitude_of(self, occupation) -> complex:
        """Coefficient of a single occupation vector (0 if absent)."""
        k = np.asarray(occupation)
        hit = np.nonzero(np.all(self.occupations == k, axis=1))[0]
        return complex(self.amplitudes[hit[0]]) if hit.size else 0.0

    def as_dict(self) -> dict:
        return {tuple(int(x) for x in k): complex(a)
                for k, a in zip(self.occupations, self.amplitudes)}


@lru_cache(maxsize=None)
def occupation_basis(n_modes: int, total: int) -> np.ndarray:
    """All occupation vectors of ``n_modes`` modes summing to ``total``,
    ordered lexicographically descending (first mode varies slowest)."""
    if n_modes == 1:
        out = np.array([[total]], dtype=np.int64)
    else:
        blocks = []
        for k0 in range(total, -1, -1):
            rest = occupation_basis(n_modes - 1, total - k0)
            head = np.full((rest.shape[0], 1), k0, dtype=np.int64)
            blocks.append(np.hstack([head, rest]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def poisson_weight(energy: float, n: int) -> float:
    """P(N = n) for total photon number of a coherent probe of energy E."""
    return math.exp(n * math.log(energy) - energy - math.lgamma(n + 1)) if n else math.exp(-energy)


def truncation_bound(energy: float, n_max: int) -> float:
    """Upper bound on the Fisher-matrix error of dropping layers N > n_max.

    Each dropped layer contributes at most 4 p_N N^2 to any matrix entry
    (occupations are bounded by N), so the sum of that series past the
    cut bounds the truncation error of any layer-weighted covariance.
    """
    total = 0.0
    n = n_max + 1
    p = poisson_weight(energy, n)
    while True:
        term = 4.0 * p * n * n
        total += term
        if term < 1e-30 * max(total, 1e-300) and n > energy:
            return total
        n += 1
        p *= energy / n


def decompose_coherent(probe: CoherentProbe, tail_mass: float = 1e-10) -> list[FockLayer]:
    """Split a coherent probe into its fixed-photon-number layers.

    Layers N = 0..N_max are returned, with N_max the smallest cut leaving
    Poisson mass below ``tail_mass``.  Amplitudes inside layer N are the
    multinomial expansion sqrt(N!/prod k_i!) prod alpha_i^{k_i}, normalized
    to unit norm within the layer; weights are p_N = E^N e^{-E} / N!.

    The decomposition is taken at zero phase; apply phases afterwards with
    :func:`apply_phases` (the two operations commute).
    """
    if not 0.0 < tail_mass < 1.0:
        raise ValueError("tail_mass must lie strictly between 0 and 1")
    energy = probe.total_energy
    if energy <= 0.0:
        raise InvariantViolation("zero-energy probe has no informative layers")

    alpha = probe.amplitudes
    m = probe.n_modes
    log_abs = np.full(m, -np.inf)
    nz = np.abs(alpha) > 0
    log_abs[nz] = np.log(np.abs(alpha[nz]))
    args = np.angle(alpha)
    log_energy = math.log(energy)

    layers = []
    cumulative = 0.0
    n = 0
    p_n = math.exp(-energy)
    while True:
        k = occupation_basis(m, n)
        # log-magnitude of the normalized amplitude; 0 * (-inf) would be nan,
        # so zero-amplitude modes are masked explicitly
        log_mult = 0.5 * (gammaln(n + 1) - gammaln(k + 1.0).sum(axis=1))
        with np.errstate(invalid="ignore"):  # 0 * (-inf) rows are masked out
            mode_terms = np.where(k == 0, 0.0, k * log_abs)
        log_mod = log_mult + mode_terms.sum(axis=1) - 0.5 * n * log_energy
        amp = np.exp(log_mod) * np.exp(1j * (k @ args))
        layers.append(FockLayer(n, p_n, k, amp))

        cumulative += p_n
        if 1.0 - cumulative < tail_mass:
            return layers
        n += 1
        p_n *= energy / n


def apply_phases(layer: FockLayer, phases: PhaseVector) -> FockLayer:
    """Imprint per-mode phase shifts: amplitude of |k> gains e^{i k.phi}."""
    if phases.n_modes != layer.n_modes:
        raise ValueError(
            f"phase vector has {phases.n_modes} modes, layer has {layer.n_modes}"
        )
    rotated = layer.amplitudes * np.exp(1j * (layer.occupations @ phases.phases))
    return FockLayer(layer.total_photons, layer.weight, layer.occupations, rotated)


def number_covariance(layer: FockLayer, i: int, j: int) -> float:
    """Covariance of the photon numbers of modes i and j within a layer."""
    probs = np.abs(layer.amplitudes) ** 2
    ki = layer.occupations[:, i].astype(float)
    kj = layer.occupations[:, j].astype(float)
    return float(probs @ (ki * kj) - (probs @ ki) * (probs @ kj))


def covariance_matrix(layer: FockLayer) -> np.ndarray:
    """All pairwise photon-number covariances of a layer at once."""
    probs = np.abs(layer.amplitudes) ** 2
    k = layer.occupations.astype(float)
    first = probs @ k
    second = k.T @ (probs[:, None] * k)
    return second - np.outer(first, first)
