"""Reproducible random variates: uniform, exponential, one-sided stable, Mittag-Leffler.

Randomness comes from one pinned source: the Philox4x64-10 counter-based
bit generator keyed by ``(seed, stream_id)``.  Distinct key pairs give
independent streams, the bit stream is identical on every platform, and all
derived variates use explicit inverse-CDF / closed-form constructions, so a
``(seed, stream_id)`` pair fully determines every sequence this package draws.

The one-sided ``nu``-stable variate (Laplace transform ``exp(-s**nu)``) is
generated with Kanter's product form: with ``U`` uniform on (0, 1) and ``W``
standard exponential,

    S = sin(nu pi U) * sin((1-nu) pi U)**((1-nu)/nu) / sin(pi U)**(1/nu)
        * W**(-(1-nu)/nu).

A Mittag-Leffler time with parameters ``(nu, theta)`` is the product
``T = E**(1/nu) * S`` with ``E`` exponential of rate ``theta`` independent of
``S``; ``nu = 1`` short-circuits to the exponential itself.

Draw order is pinned (and relied on for reproducibility): each batched
Mittag-Leffler draw of size ``n`` consumes ``U[0..n)``, then ``W[0..n)``, then
``E[0..n)``; at ``nu = 1`` only ``E[0..n)`` is consumed.
"""

from __future__ import annotations

import math

import numpy as np

from .mittag import MLDistribution

__all__ = ["RandomSource", "sample_stable", "sample_ml"]


class RandomSource:
    """Independently seeded variate stream.

    Parameters
    ----------
    seed : int
        Base seed shared by a whole experiment (64-bit unsigned).
    stream_id : int
        Substream selector (64-bit unsigned); replications and parallel
        workers each get their own value.

    A single instance is not thread-safe; concurrent consumers must each own
    one (with distinct ``stream_id``).
    """

    def __init__(self, seed: int = 0, stream_id: int = 0):
        for name, v in (("seed", seed), ("stream_id", stream_id)):
            if not (isinstance(v, (int, np.integer)) and 0 <= int(v) < 2 ** 64):
                raise ValueError(f"{name} must be an integer in [0, 2**64), got {v!r}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream_id={self.stream_id})"

    def uniform_open(self, size=None):
        """Uniform draws on the open interval (0, 1); exact zeros are redrawn."""
        if size is None:
            u = self._gen.random()
            while u == 0.0:
                u = self._gen.random()
            return u
        u = self._gen.random(size)
        while True:
            zeros = u == 0.0
            if not zeros.any():
                return u
            u[zeros] = self._gen.random(int(zeros.sum()))

    def standard_exponential(self, size=None):
        """Standard exponential via -log(1 - U); strictly positive."""
        if size is None:
            return -math.log1p(-self.uniform_open())
        return -np.log1p(-self.uniform_open(size))

    def integers(self, low: int, high: int, size=None):
        """Integers in [low, high), straight from the generator."""
        return self._gen.integers(low, high, size=size)


def sample_stable(nu: float, rng: RandomSource, size=None):
    """One-sided ``nu``-stable draw(s) with Laplace transform ``exp(-s**nu)``.

    Requires ``0 < nu < 1`` strictly (the ``nu = 1`` law is the point mass at
    1 and is short-circuited by :func:`sample_ml` instead).
    """
    nu = float(nu)
    if not 0.0 < nu < 1.0:
        raise ValueError(f"nu must be in the open interval (0, 1), got {nu}")
    u = rng.uniform_open(size)
    w = rng.standard_exponential(size)
    return _kanter(nu, u, w)


def _kanter(nu, u, w):
    a = (
        np.sin(nu * np.pi * u)
        * np.sin((1.0 - nu) * np.pi * u) ** ((1.0 - nu) / nu)
        / np.sin(np.pi * u) ** (1.0 / nu)
    )
    return a * w ** (-(1.0 - nu) / nu)


def sample_ml(dist: MLDistribution, rng: RandomSource, size=None):
    """Mittag-Leffler draw(s): ``T = E**(1/nu) * S_nu`` with ``E ~ Exp(theta)``."""
    if dist.nu == 1.0:
        return rng.standard_exponential(size) / dist.theta
    s = sample_stable(dist.nu, rng, size)
    e = rng.standard_exponential(size) / dist.theta
    return e ** (1.0 / dist.nu) * s


def sample_ml_rates(nu: float, rates: np.ndarray, rng: RandomSource) -> np.ndarray:
    """One Mittag-Leffler draw per entry of ``rates``, sharing the order ``nu``.

    Batched equivalent of calling :func:`sample_ml` once per rate; this is
    what the path simulators use.
    """
    rates = np.asarray(rates, dtype=float)
    if np.any(rates <= 0.0):
        raise ValueError("rates must be positive")
    n = rates.shape
    if float(nu) == 1.0:
        return rng.standard_exponential(n) / rates
    s = sample_stable(nu, rng, n)
    e = rng.standard_exponential(n) / rates
    return e ** (1.0 / nu) * s
