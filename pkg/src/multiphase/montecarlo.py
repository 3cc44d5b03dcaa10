"""Monte-Carlo check that a projective measurement attains its variance bound.

Each trial draws M multinomial outcomes at the true relative phases,
maximum-likelihood-estimates the d offsets, and the covariance of the
estimates across trials is compared against the inverse restricted QFIM
divided by M.  Estimation is local: the likelihood is maximized by Newton
iterations seeded at the truth, which is the regime in which the bound is
attainable; a moment-matching fallback guards the rare trials where the
iteration stalls.

Randomness is driven by a single seed whose SeedSequence is spawned once
per trial, so tallies are bit-identical for a given seed regardless of
execution order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .costs import cost_all_pairs, cost_common, cost_ring
from .errors import InvariantViolation
from .fock import NoonProbe, PhaseVector
from .measurement import MeasurementSet, outcome_probabilities
from .qfim import qfim_noon, restrict

MAX_OFFSET = 0.2  # rad; beyond this the local-estimation framing is dubious
RECOMMENDED_MIN_EXPECTED_COUNT = 5.0
MAX_FAILURE_RATE = 0.01


@dataclass(frozen=True)
class SimConfig:
    probe: NoonProbe
    measurement: MeasurementSet
    true_offsets: np.ndarray
    shots_per_trial: int
    trials: int
    seed: int

    def __post_init__(self):
        offsets = np.array(self.true_offsets, dtype=float)
        if offsets.shape != (self.probe.d,):
            raise InvariantViolation(f"need {self.probe.d} offsets, got {offsets.shape}")
        if np.abs(offsets).max() > MAX_OFFSET:
            raise InvariantViolation(
                f"offsets exceed the local-estimation regime (|offset| <= {MAX_OFFSET})"
            )
        if self.shots_per_trial < 1:
            raise InvariantViolation("shots_per_trial must be positive")
        if self.trials < 2:
            raise InvariantViolation("need at least two trials for a covariance")
        offsets.setflags(write=False)
        object.__setattr__(self, "true_offsets", offsets)


@dataclass(frozen=True)
class SimResult:
    empirical_covariance: np.ndarray
    predicted_covariance: np.ndarray
    cost_ratios: dict
    estimator_bias: np.ndarray
    outcome_totals: np.ndarray
    estimates: np.ndarray
    mle_failures: int
    trials: int
    shots_per_trial: int
    status: str


def default_offsets(d: int) -> np.ndarray:
    """Small generic offsets, 0.05 * (1, 2, ..., d)/d radians."""
    return 0.05 * np.arange(1, d + 1) / d


def _amplitude_terms(measurement, probe, offsets):
    phases = np.concatenate([[0.0], offsets])
    evolved = probe.betas * np.exp(1j * probe.photon_number * phases)
    amps = measurement.vectors.conj() @ evolved
    # per-outcome, per-parameter factor c_{j,a} = conj(u^{(j)}_a) beta_a e^{iN delta_a}
    branch = measurement.vectors.conj()[:, 1:] * evolved[None, 1:]
    return amps, branch


def _probs_grads_hessians(measurement, probe, offsets):
    """Outcome probabilities with analytic first and second derivatives."""
    n = probe.photon_number
    amps, branch = _amplitude_terms(measurement, probe, offsets)
    probs = np.abs(amps) ** 2
    cross = np.conj(amps)[:, None] * branch
    grads = -2.0 * n * cross.imag  # (outcomes, d)
    d = offsets.size
    hess = 2.0 * n * n * np.real(np.einsum("jb,ja->jab", branch.conj(), branch))
    idx = np.arange(d)
    hess[:, idx, idx] -= 2.0 * n * n * cross.real
    return probs, grads, hess


def _newton_mle(counts, measurement, probe, start, max_iter=60, tol=1e-11):
    delta = start.copy()
    for _ in range(max_iter):
        probs, grads, hess = _probs_grads_hessians(measurement, probe, delta)
        hot = counts > 0
        p = np.maximum(probs[hot], 1e-300)
        w = counts[hot] / p
        score = grads[hot].T @ w
        curvature = np.einsum("j,jab->ab", w, hess[hot]) - np.einsum(
            "j,ja,jb->ab", w / p, grads[hot], grads[hot]
        )
        try:
            step = np.linalg.solve(curvature, -score)
        except np.linalg.LinAlgError:
            # expected-information (Fisher scoring) step when the observed
            # curvature is singular
            live = probs > 1e-300
            fisher = np.einsum("ja,jb,j->ab", grads[live], grads[live], 1.0 / probs[live])
            try:
                step = np.linalg.solve(counts.sum() * fisher, score)
            except np.linalg.LinAlgError:
                return delta, False
        if not np.all(np.isfinite(step)):
            return delta, False
        delta = delta + step
        if np.abs(step).max() < tol:
            return delta, True
        if np.abs(delta - start).max() > 1.0:  # wandered out of the local basin
            return delta, False
    return delta, False


def _moment_estimate(counts, measurement, probe, truth):
    """Linear inversion of the observed frequency deviation from the truth."""
    probs, grads, _ = _probs_grads_hessians(measurement, probe, truth)
    freq = counts / counts.sum()
    correction, *_ = np.linalg.lstsq(grads, freq - probs, rcond=None)
    return truth + correction


def run(config: SimConfig) -> SimResult:
    """Sample, estimate, and compare covariance against the quantum bound."""
    probe, measurement = config.probe, config.measurement
    d = probe.d
    m_shots = config.shots_per_trial
    truth = config.true_offsets

    p_true = outcome_probabilities(measurement, probe, PhaseVector.from_offsets(truth))
    p_true = p_true / p_true.sum()
    if m_shots * p_true.min() < RECOMMENDED_MIN_EXPECTED_COUNT:
        warnings.warn(
            f"rarest outcome expects {m_shots * p_true.min():.2f} counts per trial "
            f"(< {RECOMMENDED_MIN_EXPECTED_COUNT:g}); covariance estimates may sit "
            "noticeably above the bound",
            stacklevel=2,
        )

    estimates = np.empty((config.trials, d))
    totals = np.zeros(p_true.size, dtype=np.int64)
    failures = 0
    for t, child in enumerate(np.random.SeedSequence(config.seed).spawn(config.trials)):
        rng = np.random.default_rng(child)
        counts = rng.multinomial(m_shots, p_true)
        totals += counts
        est, ok = _newton_mle(counts, measurement, probe, truth)
        if not ok:
            failures += 1
            est = _moment_estimate(counts, measurement, probe, truth)
        estimates[t] = est

    empirical = np.atleast_2d(np.cov(estimates, rowvar=False, ddof=1))
    h_restricted = restrict(qfim_noon(probe), 0).entries
    predicted = np.linalg.inv(h_restricted) / m_shots

    ratios = {}
    for name, cost in (("common", cost_common(d)), ("ring", cost_ring(d)),
                       ("all_pairs", cost_all_pairs(d))):
        ratios[name] = float(np.trace(cost.matrix @ empirical)
                             / np.trace(cost.matrix @ predicted))

    status = "ok" if failures <= MAX_FAILURE_RATE * config.trials else "mle_failures"
    return SimResult(
        empirical_covariance=empirical,
        predicted_covariance=predicted,
        cost_ratios=ratios,
        estimator_bias=estimates.mean(axis=0) - truth,
        outcome_totals=totals,
        estimates=estimates,
        mle_failures=failures,
        trials=config.trials,
        shots_per_trial=m_shots,
        status=status,
    )


def sweep_shots(config: SimConfig, shot_list) -> list[SimResult]:
    """Repeat the simulation across an ascending list of shot counts."""
    shots = list(shot_list)
    if any(b <= a for a, b in zip(shots, shots[1:])):
        raise ValueError("shot_list must be strictly ascending")
    results = []
    for m_shots in shots:
        cfg = SimConfig(config.probe, config.measurement, config.true_offsets,
                        int(m_shots), config.trials, config.seed)
        results.append(run(cfg))
    return results


def variance_scaling_exponent(results, cost_matrix) -> float:
    """Log-log slope of the empirical weighted variance versus shot count.

    Saturating estimators scale as 1/M, so the fitted slope should be -1.
    """
    if len(results) < 2:
        raise ValueError("need at least two sweep points to fit a slope")
    shots = np.array([r.shots_per_trial for r in results], dtype=float)
    traces = np.array([np.trace(cost_matrix @ r.empirical_covariance) for r in results])
    slope, _ = np.polyfit(np.log(shots), np.log(traces), 1)
    return float(slope)
