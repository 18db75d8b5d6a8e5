"""Fractional Yule, linear death, and sublinear death processes.

Sample paths are generated event by event from the Mittag-Leffler inter-event
laws (rate ``lambda*i`` for the ``i``-th birth; ``mu*(n0-k)`` resp. ``mu*(k+1)``
for the death after ``k`` deaths).  Exact analytics - state pmf, mean,
variance - are finite combinations of Mittag-Leffler evaluations.

The alternating binomial sums behind the pmfs and the sublinear moments lose
roughly ``n0 * log10(2)`` digits to cancellation; they are accumulated with
``math.fsum`` and refuse to evaluate beyond population caps (60 for pmfs, 50
for the sublinear moments) rather than degrade silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConditioningError
from .mittag import ml, ml_survival
from .variates import RandomSource, sample_ml_rates

__all__ = [
    "ProcessKind",
    "ProcessParams",
    "SamplePath",
    "simulate_yule",
    "simulate_yule_horizon",
    "simulate_linear_death",
    "simulate_sublinear_death",
    "yule_pmf",
    "death_pmf",
    "yule_mean",
    "yule_var",
    "linear_death_mean",
    "linear_death_var",
    "sublinear_death_mean",
    "sublinear_death_var",
    "population_at",
    "step_rows",
]

_PMF_N0_CAP = 60
_SUBLINEAR_MOMENT_CAP = 50


class ProcessKind(str, Enum):
    YULE = "yule"
    LINEAR_DEATH = "linear-death"
    SUBLINEAR_DEATH = "sublinear-death"


@dataclass(frozen=True)
class ProcessParams:
    """Which process, with its fractional order, intensity, and start size.

    ``rate`` is the birth intensity (lambda) for Yule and the death intensity
    (mu) for the death processes.  Yule starts from one progenitor; the death
    processes from ``n0 >= 1`` individuals.
    """

    kind: ProcessKind
    nu: float
    rate: float
    n0: int = 1

    def __post_init__(self):
        if not (0.0 < self.nu <= 1.0):
            raise ValueError(f"nu must be in (0, 1], got {self.nu}")
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ValueError(f"rate must be positive, got {self.rate}")
        if not (isinstance(self.n0, (int, np.integer)) and self.n0 >= 1):
            raise ValueError(f"n0 must be a positive integer, got {self.n0!r}")
        object.__setattr__(self, "n0", int(self.n0))
        object.__setattr__(self, "kind", ProcessKind(self.kind))
        if self.kind is ProcessKind.YULE and self.n0 != 1:
            raise ValueError("the Yule process starts from a single progenitor (n0 = 1)")

    def rate_schedule(self, n_events: int | None = None) -> np.ndarray:
        """Inter-event rate sequence theta_1, theta_2, ... for this process."""
        if self.kind is ProcessKind.YULE:
            if n_events is None:
                raise ValueError("n_events is required for the Yule schedule")
            return self.rate * np.arange(1, n_events + 1, dtype=float)
        if n_events is not None and n_events != self.n0:
            raise ValueError("death processes have exactly n0 events")
        if self.kind is ProcessKind.LINEAR_DEATH:
            return self.rate * np.arange(self.n0, 0, -1, dtype=float)
        return self.rate * np.arange(1, self.n0 + 1, dtype=float)


@dataclass(frozen=True)
class SamplePath:
    """One simulated trajectory: inter-event times and their cumulative sums."""

    inter_times: np.ndarray
    event_times: np.ndarray
    process: ProcessParams

    def __post_init__(self):
        object.__setattr__(self, "inter_times", np.asarray(self.inter_times, dtype=float))
        object.__setattr__(self, "event_times", np.asarray(self.event_times, dtype=float))
        if self.inter_times.shape != self.event_times.shape:
            raise ValueError("inter_times and event_times must have equal length")

    @property
    def n_events(self) -> int:
        return int(self.inter_times.size)

    def population_at(self, t: float) -> int:
        return population_at(self, t)


def _make_path(process: ProcessParams, inter: np.ndarray) -> SamplePath:
    return SamplePath(inter_times=inter, event_times=np.cumsum(inter), process=process)


def simulate_yule(nu: float, rate: float, n_events: int, rng: RandomSource) -> SamplePath:
    """Path of the fractional Yule process observed for ``n_events`` births.

    Inter-birth time ``i`` is Mittag-Leffler with parameters ``(nu, rate*i)``.
    """
    if not (isinstance(n_events, (int, np.integer)) and n_events >= 1):
        raise ValueError(f"n_events must be a positive integer, got {n_events!r}")
    process = ProcessParams(ProcessKind.YULE, nu, rate)
    inter = sample_ml_rates(nu, process.rate_schedule(int(n_events)), rng)
    return _make_path(process, inter)


def simulate_yule_horizon(
    nu: float, rate: float, t_max: float, rng: RandomSource, max_events: int = 10 ** 6
) -> SamplePath:
    """Yule path extended until the first birth after ``t_max``.

    ``population_at(path, t)`` is then exact for every ``t <= t_max``.  Raises
    ``RuntimeError`` if ``max_events`` births do not reach the horizon.
    """
    if not t_max >= 0.0:
        raise ValueError(f"t_max must be nonnegative, got {t_max}")
    process = ProcessParams(ProcessKind.YULE, nu, rate)
    blocks = []
    total = 0.0
    count = 0
    block = 64
    while total <= t_max:
        if count >= max_events:
            raise RuntimeError(f"horizon {t_max} not reached within {max_events} events")
        block = min(block, max_events - count)
        rates = rate * np.arange(count + 1, count + block + 1, dtype=float)
        draws = sample_ml_rates(nu, rates, rng)
        blocks.append(draws)
        count += block
        total += float(draws.sum())
        block = 2 * block
    inter = np.concatenate(blocks)
    events = np.cumsum(inter)
    keep = int(np.searchsorted(events, t_max, side="right")) + 1
    return _make_path(process, inter[:keep])


def simulate_linear_death(nu: float, rate: float, n0: int, rng: RandomSource) -> SamplePath:
    """Path of the fractional linear death process, run to extinction.

    The time between the ``k``-th and ``(k+1)``-th death is Mittag-Leffler
    with parameters ``(nu, rate*(n0-k))``, ``k = 0..n0-1``.
    """
    process = ProcessParams(ProcessKind.LINEAR_DEATH, nu, rate, n0)
    inter = sample_ml_rates(nu, process.rate_schedule(), rng)
    return _make_path(process, inter)


def simulate_sublinear_death(nu: float, rate: float, n0: int, rng: RandomSource) -> SamplePath:
    """Path of the fractional sublinear death process (rates ``mu*(k+1)``)."""
    process = ProcessParams(ProcessKind.SUBLINEAR_DEATH, nu, rate, n0)
    inter = sample_ml_rates(nu, process.rate_schedule(), rng)
    return _make_path(process, inter)


def _death_ensemble(
    kind: ProcessKind, nu: float, rate: float, n0: int, n_paths: int, rng: RandomSource
) -> np.ndarray:
    """(n_paths, n0) inter-death times from one stream; moment-test helper."""
    process = ProcessParams(kind, nu, rate, n0)
    schedule = np.broadcast_to(process.rate_schedule(), (n_paths, n0))
    return sample_ml_rates(nu, schedule, rng)


def population_at(path: SamplePath, t: float) -> int:
    """Population of the counting process at time ``t``.

    Yule: ``1 + #{events <= t}``; deaths: ``n0 - #{events <= t}``.
    """
    if not t >= 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    count = int(np.searchsorted(path.event_times, t, side="right"))
    if path.process.kind is ProcessKind.YULE:
        return 1 + count
    return path.process.n0 - count


def step_rows(path: SamplePath):
    """(event_time, population) step-function rows, starting with t = 0."""
    yule = path.process.kind is ProcessKind.YULE
    pop = 1 if yule else path.process.n0
    rows = [(0.0, pop)]
    for t in path.event_times:
        pop = pop + 1 if yule else pop - 1
        rows.append((float(t), pop))
    return rows


# ---------------------------------------------------------------------------
# exact analytics
# ---------------------------------------------------------------------------


def _check_nu_rate(nu, rate):
    if not (0.0 < nu <= 1.0):
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if not rate > 0.0:
        raise ValueError(f"rate must be positive, got {rate}")


def yule_pmf(nu: float, rate: float, t: float, i: int) -> float:
    """P(population = i at time t) for the fractional Yule process, ``i >= 1``."""
    _check_nu_rate(nu, rate)
    if not (isinstance(i, (int, np.integer)) and i >= 1):
        raise ValueError(f"i must be a positive integer, got {i!r}")
    if not t >= 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if i > _PMF_N0_CAP:
        raise ConditioningError(
            f"yule_pmf is limited to i <= {_PMF_N0_CAP}; the alternating "
            f"binomial sum at i = {i} would lose all precision"
        )
    if t == 0.0:
        return 1.0 if i == 1 else 0.0
    terms = [
        math.comb(i - 1, j - 1) * (-1.0) ** (j - 1) * ml(nu, 1.0, -rate * j * t ** nu)
        for j in range(1, i + 1)
    ]
    return max(math.fsum(terms), 0.0)


def death_pmf(nu: float, rate: float, n0: int, t: float, i: int) -> float:
    """P(population = i at time t) for the fractional linear death process."""
    _check_nu_rate(nu, rate)
    if not (isinstance(n0, (int, np.integer)) and n0 >= 1):
        raise ValueError(f"n0 must be a positive integer, got {n0!r}")
    if not (isinstance(i, (int, np.integer)) and 0 <= i <= n0):
        raise ValueError(f"i must be an integer in [0, n0], got {i!r}")
    if not t >= 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if n0 > _PMF_N0_CAP:
        raise ConditioningError(
            f"death_pmf is limited to n0 <= {_PMF_N0_CAP}; the alternating "
            f"binomial sum at n0 = {n0} would lose all precision"
        )
    if t == 0.0:
        return 1.0 if i == n0 else 0.0
    terms = [
        math.comb(n0 - i, j) * (-1.0) ** j * ml(nu, 1.0, -(i + j) * rate * t ** nu)
        for j in range(0, n0 - i + 1)
    ]
    return max(math.comb(n0, i) * math.fsum(terms), 0.0)


def yule_mean(nu: float, rate: float, t: float) -> float:
    """``E_{nu,1}(rate * t^nu)``; grows super-exponentially in ``t`` for nu < 1."""
    _check_nu_rate(nu, rate)
    if not t >= 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return ml(nu, 1.0, rate * t ** nu)


def yule_var(nu: float, rate: float, t: float) -> float:
    """``2 E_{nu,1}(2 rate t^nu) - E_{nu,1}(rate t^nu) - E_{nu,1}(rate t^nu)^2``."""
    _check_nu_rate(nu, rate)
    if not t >= 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    m = ml(nu, 1.0, rate * t ** nu)
    return 2.0 * ml(nu, 1.0, 2.0 * rate * t ** nu) - m - m * m


def linear_death_mean(nu: float, rate: float, n0: int, t: float) -> float:
    """``n0 * E_{nu,1}(-rate t^nu)``."""
    _check_nu_rate(nu, rate)
    if not t >= 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return n0 * ml_survival(nu, rate, t)


def linear_death_var(nu: float, rate: float, n0: int, t: float) -> float:
    """``n0(n0-1) E_{nu,1}(-2 rate t^nu) + n0 E - n0^2 E^2`` with ``E = E_{nu,1}(-rate t^nu)``."""
    _check_nu_rate(nu, rate)
    if not t >= 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    e1 = ml_survival(nu, rate, t)
    e2 = ml(nu, 1.0, -2.0 * rate * t ** nu)
    return n0 * (n0 - 1) * e2 + n0 * e1 - n0 * n0 * e1 * e1


def _check_sublinear(nu, rate, n0, t):
    _check_nu_rate(nu, rate)
    if not (isinstance(n0, (int, np.integer)) and n0 >= 1):
        raise ValueError(f"n0 must be a positive integer, got {n0!r}")
    if not t >= 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if n0 > _SUBLINEAR_MOMENT_CAP:
        raise ConditioningError(
            f"sublinear moments are limited to n0 <= {_SUBLINEAR_MOMENT_CAP}; "
            f"the alternating binomial sum at n0 = {n0} would lose all precision"
        )


def sublinear_death_mean(nu: float, rate: float, n0: int, t: float) -> float:
    """Mean ``sum_{k=1..n0} C(n0+1, k+1) (-1)^(k+1) E_{nu,1}(-k rate t^nu)``."""
    _check_sublinear(nu, rate, n0, t)
    if t == 0.0:
        return float(n0)
    terms = [
        math.comb(n0 + 1, k + 1) * (-1.0) ** (k + 1) * ml(nu, 1.0, -k * rate * t ** nu)
        for k in range(1, n0 + 1)
    ]
    return math.fsum(terms)


def _sublinear_second_factorial(nu: float, rate: float, n0: int, t: float) -> float:
    # Second factorial moment H(t) = E[M(M-1)].  Solving the fractional
    # relaxation equation for H and inverting the Laplace transform by exact
    # partial fractions gives
    #   H(t) = 2 * sum_{k=1..n0-1} C(n0+1, k+2) (-1)^(k+1) E_{nu,1}(-k mu t^nu);
    # the growing E_{nu,1}(+2 mu t^nu) mode cancels identically (its total
    # coefficient telescopes to zero), which also pins H(0) = n0(n0-1).
    if t == 0.0:
        return float(n0 * (n0 - 1))
    terms = [
        math.comb(n0 + 1, k + 2) * (-1.0) ** (k + 1) * ml(nu, 1.0, -k * rate * t ** nu)
        for k in range(1, n0)
    ]
    return 2.0 * math.fsum(terms)


def sublinear_death_var(nu: float, rate: float, n0: int, t: float) -> float:
    """Variance via the second factorial moment: ``H + mean - mean^2``."""
    _check_sublinear(nu, rate, n0, t)
    if t == 0.0:
        return 0.0
    m = sublinear_death_mean(nu, rate, n0, t)
    h = _sublinear_second_factorial(nu, rate, n0, t)
    return h + m - m * m
