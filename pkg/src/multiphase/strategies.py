"""Sequential versus simultaneous estimation strategies.

Every entry is the minimum total variance achievable for one combination of
resource (coherent light of energy E, or fixed-N photon blocks), schedule
(split the resource over one-parameter estimates, or probe all phases at
once), and cost (common reference, ring, all pairs).  Sequential schemes
are scored by mapping the covariance of their per-parameter estimates into
the d-dimensional relative-phase basis, which is why estimating the d+1
ring parameters can beat estimating d independent ones.  Values are kept
as exact rationals whenever the formula is rational in d and the resource,
so strategy crossovers compare exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

COSTS = ("common", "ring", "all_pairs")
RESOURCES = ("classical", "quantum")
SCHEDULES = ("sequential", "simultaneous")


@dataclass(frozen=True)
class StrategyRow:
    resource: str
    schedule: str
    cost: str
    d: int
    total_variance: object  # Fraction when exact, float otherwise
    note: str


@dataclass(frozen=True)
class StrategyReport:
    rows: tuple

    def cell(self, resource: str, schedule: str, cost: str, d: int) -> StrategyRow:
        for row in self.rows:
            if (row.resource, row.schedule, row.cost, row.d) == (resource, schedule, cost, d):
                return row
        raise KeyError((resource, schedule, cost, d))


def _exact(numerator, denominator):
    """Fraction when both ends are rational, float division otherwise."""
    if isinstance(numerator, Rational) and isinstance(denominator, Rational):
        return Fraction(numerator) / Fraction(denominator)
    return numerator / denominator


def _check(d, amount, cost_kind):
    if d < 1:
        raise ValueError("d must be at least 1")
    if amount <= 0:
        raise ValueError("resource amount must be positive")
    if cost_kind not in COSTS:
        raise ValueError(f"unknown cost kind {cost_kind!r}")


def sequential_classical(d: int, energy=1, cost_kind: str = "common"):
    """Best sequential scheme with coherent light: (total variance, note).

    Each one-parameter estimate splits its energy share evenly over its two
    modes, giving Fisher information equal to the share.  For the ring cost
    both the d+1-parameter and the inferior d-parameter schemes are scored
    and the better one reported.
    """
    _check(d, energy, cost_kind)
    if cost_kind == "common":
        return _exact(d * d, energy), "d estimates"
    if cost_kind == "ring":
        with_cycle = _exact(d * (d + 1), energy)
        without = _exact(2 * d * d, energy)
        if with_cycle <= without:
            return with_cycle, "d+1 estimates"
        return without, "d estimates"
    n_pairs = math.comb(d + 1, 2)
    return _exact(d * n_pairs, energy), "pairwise estimates"


def sequential_quantum(d: int, photons=1, cost_kind: str = "common"):
    """Best sequential scheme with fixed-photon-number blocks.

    A block of n photons estimates one relative phase with variance 1/n^2,
    so splitting N photons into many parts is costly; all enumerated
    sub-strategies are scored and the minimum returned with its name.
    """
    _check(d, photons, cost_kind)
    n2 = photons * photons
    if cost_kind == "common":
        return _exact(d**3, n2), "d estimates"
    if cost_kind == "ring":
        candidates = [
            (_exact(2 * d**3, n2), "d estimates"),
            (_exact(d * (d + 1) ** 2, n2), "d+1 estimates"),
        ]
    else:
        n_pairs = math.comb(d + 1, 2)
        candidates = [
            (_exact(d**4, n2), "d estimates"),
            (_exact(math.comb(d + 2, 3) * (d + 1) ** 2, 2 * n2), "d+1 estimates"),
            (_exact(d * n_pairs**2, n2), "pairwise estimates"),
        ]
    return min(candidates, key=lambda pair: pair[0])


def simultaneous_bound(d: int, amount=1, resource_kind: str = "classical",
                       cost_kind: str = "common"):
    """Minimum total variance of the joint scheme with the optimal probe.

    Common reference: d (sqrt(d)+1)^2 / (4E); ring: (d+1)^2 / (2E);
    all pairs: d (d+1)^2 / (4E); quantum versions replace E by N^2.
    The common-reference value is irrational unless d is a perfect square.
    """
    _check(d, amount, cost_kind)
    if resource_kind not in RESOURCES:
        raise ValueError(f"unknown resource kind {resource_kind!r}")
    denom = amount * amount if resource_kind == "quantum" else amount
    if cost_kind == "common":
        root = math.isqrt(d)
        if root * root == d:
            return _exact(d * (root + 1) ** 2, 4 * denom)
        return d * (math.sqrt(d) + 1.0) ** 2 / (4.0 * denom)
    if cost_kind == "ring":
        return _exact((d + 1) ** 2, 2 * denom)
    return _exact(d * (d + 1) ** 2, 4 * denom)


def _simultaneous_note(cost_kind: str) -> str:
    return "privileged mode" if cost_kind == "common" else "mode symmetry"


def sequential_bound(d: int, amount=1, resource_kind: str = "classical",
                     cost_kind: str = "common"):
    """(value, note) for the best sequential scheme of either resource."""
    if resource_kind == "classical":
        return sequential_classical(d, amount, cost_kind)
    if resource_kind == "quantum":
        return sequential_quantum(d, amount, cost_kind)
    raise ValueError(f"unknown resource kind {resource_kind!r}")


def advantage_ratio(d: int, resource_kind: str = "classical",
                    cost_kind: str = "common") -> float:
    """Sequential over simultaneous total variance at equal resource.

    Classical schemes gain a bounded factor (2d/(d+1) for the ring cost);
    quantum schemes gain a factor growing linearly with d.
    """
    seq, _ = sequential_bound(d, 1, resource_kind, cost_kind)
    sim = simultaneous_bound(d, 1, resource_kind, cost_kind)
    return float(seq / sim)


def build_report(d_max: int, energy=1, photons=1) -> StrategyReport:
    """All strategy cells for d = 1..d_max."""
    if d_max < 1:
        raise ValueError("d_max must be at least 1")
    rows = []
    for d in range(1, d_max + 1):
        for resource, amount in (("classical", energy), ("quantum", photons)):
            for cost in COSTS:
                value, note = sequential_bound(d, amount, resource, cost)
                rows.append(StrategyRow(resource, "sequential", cost, d, value, note))
                value = simultaneous_bound(d, amount, resource, cost)
                rows.append(StrategyRow(
                    resource, "simultaneous", cost, d, value, _simultaneous_note(cost)))
    return StrategyReport(tuple(rows))
