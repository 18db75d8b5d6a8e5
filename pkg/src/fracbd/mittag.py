"""Two-parameter Mittag-Leffler function and the Mittag-Leffler distribution.

``ml(delta, beta, x)`` evaluates ``E_{delta,beta}(x) = sum_j x^j / Gamma(delta*j + beta)``
on the real line to a relative accuracy of about 1e-10 over the domain this
package needs: ``delta`` in (0, 1], ``beta`` in {1, delta} (other ``beta <= 1``
work too), and arguments from -1e6 up to the overflow boundary.

Evaluation regimes for negative arguments (``x = -y``, ``y > 0``):

* power series with exact (``math.fsum``) accumulation while the cancellation
  stays bounded, i.e. ``y**(1/delta) <= _SERIES_UMAX``;
* the algebraic large-argument expansion ``sum_k (-1)^(k+1) y^(-k) / Gamma(beta - delta*k)``
  truncated at its smallest term, once the attainable truncation floor is far
  below the target (``y**(1/delta)`` large, damped by ``|cos(pi/delta)|`` for
  ``delta > 0.6`` where an oscillatory exponentially-small pair exists);
* in the band between the two, a branch-cut integral
  ``E_{delta,beta}(-y) = (1/pi) * int_0^inf exp(-u) u^(delta-beta)
  [u^delta sin(pi(1-beta)) + y sin(pi(1-beta+delta))] /
  (u^(2delta) + 2 u^delta y cos(pi delta) + y^2) du``
  computed by the trapezoid rule on a log grid (exponentially convergent; the
  step is set from the integrand's analyticity strip);
* for ``delta >= 0.99`` the strip is too thin for the trapezoid, and the band
  is evaluated by an arbitrary-precision series instead (mpmath).

Positive arguments use the plain series (all terms positive, no cancellation)
with an overflow guard.  ``delta == beta == 1`` short-circuits to ``exp``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

__all__ = ["ml", "ml_survival", "ml_pdf", "MLDistribution"]

# Regime thresholds, in terms of u = y**(1/delta).  Probed by the seam tests.
_SERIES_UMAX = 5.5
_ASYMP_UEFF_MIN = 36.0
_MP_DELTA_MIN = 0.99  # band fallback to arbitrary precision near delta = 1

_LOG_DBL_MAX = math.log(np.finfo(float).max)  # 709.78...


def _rgamma(z: float) -> float:
    """1/Gamma(z) for real z; exactly 0 at the poles.

    Arguments within 1e-12 of a nonpositive integer are snapped to the pole:
    they only arise from float rounding of delta*k and their true coefficient
    is 0.
    """
    n = round(z)
    if n <= 0 and abs(z - n) < 1e-12:
        return 0.0
    if z > 0.5:
        if z < 170.0:
            return 1.0 / math.gamma(z)
        return math.exp(-math.lgamma(z))
    # reflection: 1/Gamma(z) = sin(pi z) Gamma(1-z) / pi, sin via the reduced
    # argument so large |z| keeps full accuracy
    s = math.sin(math.pi * (z - n)) * (1.0 if n % 2 == 0 else -1.0)
    if 1.0 - z < 170.0:
        return s * math.gamma(1.0 - z) / math.pi
    m = math.lgamma(1.0 - z) + math.log(abs(s) / math.pi)
    if m > _LOG_DBL_MAX:
        return math.inf if s >= 0 else -math.inf
    v = math.exp(m)
    return v if s >= 0 else -v


def _stokes_damping(delta: float) -> float:
    # For delta > 2/3 an oscillatory pair of size exp(y**(1/delta) cos(pi/delta))
    # accompanies the algebraic expansion; |cos(pi/delta)| sets how fast it
    # dies.  Below 0.6 no such pair is switched on along the negative axis.
    if delta <= 0.6:
        return 1.0
    return min(1.0, max(abs(math.cos(math.pi / delta)), 0.05))


def _series_neg(delta: float, beta: float, y: float) -> float:
    terms = []
    s = 0.0
    prev = math.inf
    t = _rgamma(beta)
    j = 0
    while j < 100000:
        terms.append(t)
        s += t
        a = abs(t)
        if a < 1e-17 * max(abs(s), 1e-300) and a < prev:
            break
        if a > 0.0:
            prev = a
        j += 1
        t = (-y) ** j * _rgamma(delta * j + beta)
    return math.fsum(terms)


def _asymp_neg(delta: float, beta: float, y: float) -> tuple[float, bool]:
    """Algebraic expansion truncated at its globally smallest term.

    Returns (value, ok); ``ok`` is False when the attainable floor is not
    clearly below target and the caller must fall back to the integral.
    """
    terms: list[float] = []
    gmin = math.inf
    argmin = -1
    running = 0.0
    k = 1
    while k <= 2000:
        t = (-1.0) ** (k + 1) * y ** (-k) * _rgamma(beta - delta * k)
        terms.append(t)
        running += t
        a = abs(t)
        if a != 0.0:
            if a < gmin:
                gmin = a
                argmin = len(terms) - 1
            if a <= 1e-18 * abs(running):
                break
            if a > 1e4 * gmin:  # past the optimal truncation point
                break
        k += 1
    if argmin < 0:
        return 0.0, False
    best = math.fsum(terms[: argmin + 1])
    return best, gmin <= 1e-13 * abs(best)


def _integral_grid(delta: float, beta: float, y_max: float):
    """Log-grid nodes and y-independent integrand factors for the band integral."""
    s1 = math.sin(math.pi * (1.0 - beta))
    s2 = math.sin(math.pi * (1.0 - beta + delta))
    c = math.cos(math.pi * delta)
    # trapezoid step from the analyticity strip: the denominator's complex
    # zeros sit at |Im ln(u)| = pi(1-delta)/delta
    d_strip = min(math.pi / 2.0, math.pi * (1.0 - delta) / delta) * 0.9
    h = 0.182 * d_strip
    w_min = -42.0 / (delta - beta + 1.0)
    u_res = (y_max * abs(c)) ** (1.0 / delta) if c < 0.0 else 0.0
    w_max = math.log(max(60.0, 2.0 * u_res + 60.0))
    n = int(math.ceil((w_max - w_min) / h)) + 1
    u = np.exp(w_min + h * np.arange(n))
    ud = u ** delta
    base = h / math.pi * np.exp(-u) * u ** (delta - beta + 1.0)
    return ud, base * ud * s1, base * s2, c


def _integral_neg_array(delta: float, beta: float, y: np.ndarray) -> np.ndarray:
    ud, num1, num2, c = _integral_grid(delta, beta, float(y.max()))
    out = np.empty_like(y)
    chunk = max(1, 4_000_000 // ud.size)
    for i in range(0, y.size, chunk):
        yy = y[i : i + chunk, None]
        den = ud * ud + (2.0 * c) * ud * yy + yy * yy
        out[i : i + chunk] = ((num1 + num2 * yy) / den).sum(axis=1)
    return out


def _mp_series_neg(delta: float, beta: float, y: float) -> float:
    u = y ** (1.0 / delta)
    dps = int(0.45 * u) + 40
    with mpmath.workdps(dps):
        d = mpmath.mpf(delta)
        b = mpmath.mpf(beta)
        my = mpmath.mpf(-y)
        s = mpmath.mpf(0)
        j = 0
        while True:
            t = mpmath.power(my, j) / mpmath.gamma(d * j + b)
            s += t
            j += 1
            if abs(t) < mpmath.mpf(10) ** (-dps) and j > u / delta + 10:
                break
            if j > 300000:
                raise RuntimeError("mittag-leffler band series did not converge")
        return float(s)


def _ml_neg(delta: float, beta: float, y: float) -> float:
    """E_{delta,beta}(-y) for y > 0, 0 < delta <= 1, beta < 1 + delta."""
    u = y ** (1.0 / delta)
    if u <= _SERIES_UMAX:
        return _series_neg(delta, beta, y)
    if u * _stokes_damping(delta) >= _ASYMP_UEFF_MIN:
        v, ok = _asymp_neg(delta, beta, y)
        if ok:
            return v
    if delta >= _MP_DELTA_MIN:
        return _mp_series_neg(delta, beta, y)
    return float(_integral_neg_array(delta, beta, np.array([y]))[0])


def _ml_neg_array(delta: float, beta: float, y: np.ndarray) -> np.ndarray:
    """Vectorized E_{delta,beta}(-y); same regime map as the scalar path."""
    out = np.empty(y.shape, dtype=float)
    u = y ** (1.0 / delta)
    ser = u <= _SERIES_UMAX
    asy = ~ser & (u * _stokes_damping(delta) >= _ASYMP_UEFF_MIN)
    if ser.any():
        out[ser] = _series_neg_array(delta, beta, y[ser])
    if asy.any():
        vals, ok = _asymp_neg_array(delta, beta, y[asy])
        out[asy] = vals
        bad = np.flatnonzero(asy)[~ok]
    else:
        bad = np.array([], dtype=int)
    band = np.flatnonzero(~ser & ~asy)
    band = np.concatenate([band, bad])
    if band.size:
        if delta >= _MP_DELTA_MIN:
            out[band] = [_mp_series_neg(delta, beta, float(v)) for v in y[band]]
        else:
            out[band] = _integral_neg_array(delta, beta, y[band])
    return out


def _series_neg_array(delta: float, beta: float, y: np.ndarray) -> np.ndarray:
    # Kahan-compensated accumulation keeps the bounded cancellation harmless.
    s = np.full(y.shape, _rgamma(beta))
    comp = np.zeros_like(s)
    p = np.ones_like(s)
    prev = np.full(y.shape, np.inf)
    for j in range(1, 20000):
        p *= -y
        coef = _rgamma(delta * j + beta)
        t = coef * p
        dy = t - comp
        tt = s + dy
        comp = (tt - s) - dy
        s = tt
        a = np.abs(t)
        if np.all((a < 1e-17 * np.maximum(np.abs(s), 1e-300)) & (a < prev)):
            break
        np.copyto(prev, a, where=a > 0)
    return s


def _asymp_neg_array(delta: float, beta: float, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = 1.0 / y
    p = q.copy()
    running = np.zeros_like(y)
    best = np.zeros_like(y)
    gmin = np.full(y.shape, np.inf)
    active = np.ones(y.shape, dtype=bool)
    for k in range(1, 2001):
        if not active.any():
            break
        coef = (-1.0) ** (k + 1) * _rgamma(beta - delta * k)
        t = coef * p
        a = np.abs(t)
        running = np.where(active, running + t, running)
        nz = active & (a != 0.0)
        smaller = nz & (a < gmin)
        gmin[smaller] = a[smaller]
        best[smaller] = running[smaller]
        # freeze points whose terms passed the optimal truncation point or
        # that have converged outright
        active &= ~(nz & ((a > 1e4 * gmin) | (a <= 1e-18 * np.abs(running))))
        p *= q
    ok = gmin <= 1e-13 * np.abs(best)
    return best, ok


def _ml_pos(delta: float, beta: float, x: float) -> float:
    # positive argument: all series terms positive, computed in log space
    if delta < 1.0:
        lead = x ** (1.0 / delta) + (1.0 - beta) / delta * math.log(x) - math.log(delta)
        if lead > _LOG_DBL_MAX + 6.0:
            raise OverflowError(
                f"ml({delta}, {beta}, {x}) exceeds the double range"
            )
    s = 0.0
    lx = math.log(x)
    j = 0
    while j < 10 ** 6:
        t = math.exp(j * lx - math.lgamma(delta * j + beta))
        s += t
        if s > 8e307:
            raise OverflowError(f"ml({delta}, {beta}, {x}) exceeds the double range")
        if t < 1e-17 * s and (delta * j) ** delta > x:
            break
        j += 1
    return s


def ml(delta: float, beta: float, x: float) -> float:
    """Two-parameter Mittag-Leffler function ``E_{delta,beta}(x)`` on the real line.

    Parameters
    ----------
    delta, beta : float
        Positive indices.  For negative ``x`` this implementation supports
        ``delta <= 1`` and ``beta < 1 + delta`` (the package only uses
        ``beta`` in ``{1, delta}``).
    x : float
        Argument.

    Returns
    -------
    float

    Raises
    ------
    ValueError
        If ``delta <= 0`` or ``beta <= 0``, on non-finite input, or for
        negative ``x`` outside the supported index range.
    OverflowError
        If the result exceeds the double range (large positive ``x``).
    """
    delta = float(delta)
    beta = float(beta)
    x = float(x)
    if not (math.isfinite(delta) and delta > 0.0):
        raise ValueError(f"delta must be a positive finite real, got {delta}")
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValueError(f"beta must be a positive finite real, got {beta}")
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    if delta == 1.0 and beta == 1.0:
        if x > _LOG_DBL_MAX:
            raise OverflowError(f"ml(1, 1, {x}) exceeds the double range")
        return math.exp(x)
    if x == 0.0:
        return _rgamma(beta)
    if x > 0.0:
        return _ml_pos(delta, beta, x)
    if delta > 1.0:
        raise ValueError("delta > 1 is not supported for negative arguments")
    if beta >= 1.0 + delta:
        raise ValueError("beta >= 1 + delta is not supported for negative arguments")
    return _ml_neg(delta, beta, -x)


@dataclass(frozen=True)
class MLDistribution:
    """Mittag-Leffler distribution with survival function ``E_{nu,1}(-theta t^nu)``.

    Exponential with rate ``theta`` at ``nu = 1``; heavy-tailed for ``nu < 1``.
    """

    nu: float
    theta: float

    def __post_init__(self):
        if not (0.0 < self.nu <= 1.0):
            raise ValueError(f"nu must be in (0, 1], got {self.nu}")
        if not (math.isfinite(self.theta) and self.theta > 0.0):
            raise ValueError(f"theta must be positive, got {self.theta}")

    def survival(self, t):
        return ml_survival(self.nu, self.theta, t)

    def cdf(self, t):
        return 1.0 - self.survival(t)

    def pdf(self, t):
        return ml_pdf(self.nu, self.theta, t)

    def log_mean(self) -> float:
        """Mean of ``ln T``: ``-ln(theta)/nu - gamma`` (Euler-Mascheroni gamma)."""
        return -math.log(self.theta) / self.nu - float(np.euler_gamma)

    def log_var(self) -> float:
        """Variance of ``ln T``: ``pi^2 (1/(3 nu^2) - 1/6)``."""
        return math.pi ** 2 * (1.0 / (3.0 * self.nu ** 2) - 1.0 / 6.0)


def ml_survival(nu: float, theta: float, t):
    """Survival function ``E_{nu,1}(-theta t^nu)`` of the Mittag-Leffler law.

    Accepts a scalar or array ``t >= 0``; returns a float or ndarray to match.
    """
    nu = float(nu)
    theta = float(theta)
    if not (0.0 < nu <= 1.0):
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if not theta > 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("t must be nonnegative")
    scalar = arr.ndim == 0
    a = np.atleast_1d(arr)
    if nu == 1.0:
        out = np.exp(-theta * a)
    else:
        out = np.ones_like(a)
        pos = a > 0.0
        if pos.any():
            out[pos] = _ml_neg_array(nu, 1.0, theta * a[pos] ** nu)
    return float(out[0]) if scalar else out


def ml_pdf(nu: float, theta: float, t):
    """Density ``theta t^(nu-1) E_{nu,nu}(-theta t^nu)`` of the Mittag-Leffler law.

    Requires ``t > 0``; for ``nu < 1`` the density diverges as ``t -> 0+``.
    Accepts a scalar or array ``t``.
    """
    nu = float(nu)
    theta = float(theta)
    if not (0.0 < nu <= 1.0):
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if not theta > 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("t must be positive")
    scalar = arr.ndim == 0
    a = np.atleast_1d(arr)
    if nu == 1.0:
        out = theta * np.exp(-theta * a)
    else:
        out = theta * a ** (nu - 1.0) * _ml_neg_array(nu, nu, theta * a ** nu)
    return float(out[0]) if scalar else out
