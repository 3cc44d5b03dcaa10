"""Optimal probe-energy allocations for the scalar phase-estimation bounds.

For every cost matrix the figure of merit is Tr(R H^{-1}) with H the QFIM
restricted to phases relative to mode 0.  Because that inverse is
delta_ij/(4 E_i) + 1/(4 E_0), the bound is a sum of c_i / E_i terms and the
minimizing split over the energy simplex follows from a Lagrange multiplier:
E_i proportional to sqrt(c_i).  Closed forms are provided for the common-
reference, ring, and all-pairs costs (with weights), and an independent
projected-descent optimizer cross-checks them numerically.

The same machinery covers fixed-N probes: their restricted QFIM differs
only by an N^2 prefactor, so optimal branch weights |beta_i|^2 equal the
optimal classical energy fractions E_i / E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costs import CostMatrix, cost_all_pairs, cost_common, cost_ring
from .errors import InvariantViolation, NumericalFailure

PROBE_FAMILIES = ("coherent", "noon")


@dataclass(frozen=True)
class Allocation:
    """Energy split over the d+1 modes together with the bound it achieves."""

    energies: np.ndarray
    achieved_bound: float
    cost_kind: str
    method: str = "closed_form"
    converged: bool = True
    iterations: int = 0

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        if np.any(e < 0):
            raise InvariantViolation("allocations must be non-negative")
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    @property
    def total(self) -> float:
        return float(self.energies.sum())

    @property
    def fractions(self) -> np.ndarray:
        return self.energies / self.total


def optimal_common(d: int, energy: float, weights=None) -> Allocation:
    """Minimize the (weighted) summed variance of phases relative to mode 0.

    The reference mode absorbs sqrt(sum w) shares while probe mode i takes
    sqrt(w_i); unweighted this is E_0 = sqrt(d) E/(d+sqrt(d)) and
    S_0 = d (sqrt(d)+1)^2 / (4E).
    """
    if energy <= 0:
        raise ValueError("energy must be positive")
    cost = cost_common(d, weights)
    w = np.ones(d) if weights is None else np.asarray(weights, dtype=float)
    shares = np.concatenate([[math.sqrt(w.sum())], np.sqrt(w)])
    energies = energy * shares / shares.sum()
    bound = shares.sum() ** 2 / (4.0 * energy)
    return Allocation(energies, bound, cost.kind)


def optimal_ring(d: int, energy: float, weights=None) -> Allocation:
    """Minimize the (weighted) sum of cyclic neighbour-difference variances.

    Mode i touches the two cycle edges carrying weights w_{i-1} and w_i
    (w_d closes the cycle at mode 0), and the Lagrange condition puts
    E_i proportional to sqrt(w_{i-1} + w_i).  Unweighted the split is even
    and S_1 = (d+1)^2 / (2E).
    """
    if energy <= 0:
        raise ValueError("energy must be positive")
    cost = cost_ring(d, weights)
    w = np.ones(d + 1) if weights is None else np.asarray(weights, dtype=float)
    shares = np.sqrt(np.roll(w, 1) + w)
    energies = energy * shares / shares.sum()
    bound = shares.sum() ** 2 / (4.0 * energy)
    return Allocation(energies, bound, cost.kind)


def optimal_all_pairs(d: int, energy: float) -> Allocation:
    """Minimize the summed variances of all pairwise relative phases.

    The fully symmetric cost is optimized by the same equal split as the
    ring cost, with S_2 = d (d+1)^2 / (4E), i.e. d/2 times the ring bound.
    """
    if energy <= 0:
        raise ValueError("energy must be positive")
    cost = cost_all_pairs(d)
    energies = np.full(d + 1, energy / (d + 1))
    bound = d * (d + 1) ** 2 / (4.0 * energy)
    return Allocation(energies, bound, cost.kind)


def project_simplex(v, total: float = 1.0, floor: float = 0.0) -> np.ndarray:
    """Euclidean projection onto {x : x_i >= floor, sum x_i = total}."""
    v = np.asarray(v, dtype=float)
    m = v.size
    budget = total - m * floor
    if budget < 0:
        raise ValueError("floor leaves no mass to distribute")
    u = np.sort(v - floor)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, m + 1)
    rho = idx[u + (budget - css) / idx > 0][-1]
    lam = (budget - css[rho - 1]) / rho
    return np.maximum(v - floor + lam, 0.0) + floor


def _objective_and_gradient(x: np.ndarray, r: np.ndarray):
    """Tr(R H(x)^{-1}) and its gradient over all d+1 energies.

    H(x) = 4 (diag(x_1..x_d) - v v^T / sum x) is inverted numerically so the
    optimizer stays independent of the closed-form inverse it is meant to
    check.
    """
    total = x.sum()
    v = x[1:]
    h = 4.0 * (np.diag(v) - np.outer(v, v) / total)
    hinv = np.linalg.inv(h)
    f = float(np.trace(r @ hinv))
    g = hinv @ r @ hinv  # d(Tr(R H^-1)) = -Tr(G dH) with G symmetric
    gv = g @ v
    vgv = float(v @ gv)
    grad = np.empty_like(x)
    grad[0] = -4.0 * vgv / total**2
    grad[1:] = -4.0 * (np.diag(g) - 2.0 * gv / total + vgv / total**2)
    return f, grad


def optimize_numeric(
    d: int,
    energy: float,
    cost: CostMatrix,
    probe_family: str = "coherent",
    seed: int = 0,
    floor: float = 1e-9,
    max_iterations: int = 100_000,
    n_starts: int = 5,
) -> Allocation:
    """Minimize Tr(R H^{-1}) over the energy simplex by projected descent.

    Spectral (Barzilai-Borwein) steps with a backtracking safeguard,
    restarted from several random interior points; the bound diverges as
    any mode empties, so optima are interior and a small floor keeps the
    iterates away from the boundary.  For the "noon" family ``energy`` is
    the photon number N and the optimization runs over the branch weights;
    returned energies are then N |beta_i|^2.
    """
    if probe_family not in PROBE_FAMILIES:
        raise ValueError(f"unknown probe family {probe_family!r}")
    if energy <= 0:
        raise ValueError("energy must be positive")
    if cost.dim != d:
        raise ValueError(f"cost matrix is {cost.dim}-dimensional, expected {d}")
    if probe_family == "noon" and int(energy) != energy:
        raise ValueError("photon number must be an integer")

    # branch weights live on the unit simplex; the bound just rescales
    total = 1.0 if probe_family == "noon" else float(energy)
    scale = 1.0 / float(energy) ** 2 if probe_family == "noon" else 1.0
    r = cost.matrix
    rng = np.random.default_rng(seed)
    m = d + 1

    # random restarts stay clear of the boundary, where the objective blows up
    start_floor = max(floor, 1e-3 * total / m)
    starts = [np.full(m, total / m)]
    starts += [project_simplex(rng.dirichlet(np.ones(m)) * total, total, start_floor)
               for _ in range(n_starts)]

    best = None
    for x0 in starts:
        x = project_simplex(x0, total, floor)
        f, grad = _objective_and_gradient(x, r)
        step = 1.0 / max(np.abs(grad).max(), 1e-12)
        converged = False
        small_changes = 0
        iterations = 0
        for iterations in range(1, max_iterations + 1):
            x_new = project_simplex(x - step * grad, total, floor)
            f_new, grad_new = _objective_and_gradient(x_new, r)
            backtracks = 0
            while (not np.isfinite(f_new)
                   or f_new > f + 1e-4 * grad @ (x_new - x)) and backtracks < 60:
                step *= 0.5
                backtracks += 1
                x_new = project_simplex(x - step * grad, total, floor)
                f_new, grad_new = _objective_and_gradient(x_new, r)
            if not np.isfinite(f_new) or f_new > f:
                # a vanishing step no longer decreases f: numerical floor
                converged = True
                break
            s = x_new - x
            y = grad_new - grad
            sy = float(s @ y)
            step = float(s @ s) / sy if sy > 1e-300 else step * 2.0
            small_changes = small_changes + 1 if f - f_new <= 1e-12 * max(1.0, abs(f)) else 0
            x, f, grad = x_new, f_new, grad_new
            if small_changes >= 3:
                converged = True
                break
        key = (not converged, f)
        if best is None or key < best[0]:
            best = (key, x, f, converged, iterations)

    _, x, f, converged, iterations = best
    if not converged:
        raise NumericalFailure(
            f"projected descent did not converge within {max_iterations} iterations"
        )
    energies = x * (1.0 if probe_family == "coherent" else float(energy))
    return Allocation(energies, f * scale, cost.kind, "projected_descent", converged, iterations)
