"""Log-regression parameter estimation for fractional birth/death processes.

The log of a Mittag-Leffler inter-event time with rate ``theta_i`` has mean
``-ln(theta_i)/nu - gamma`` and variance ``pi^2 (1/(3 nu^2) - 1/6)``
(``gamma`` = Euler-Mascheroni).  With ``theta_i = rate * g(i)`` and regressor
``x_i = ln g(i)`` this is a simple linear regression

    ln T_i = a0 + a1 x_i + eps_i,    a0 = -ln(rate)/nu - gamma,  a1 = -1/nu,

and everything here is closed-form least squares on top of it:

* LS-route point estimates  ``nu = -1/a1``, ``rate = exp((a0+gamma)/a1)``;
* residual-route point estimates from the error variance,
  ``nu = 1/sqrt(3 (s2_u/pi^2 + 1/6))``, ``rate = exp(-nu (a0+gamma))``;
* delta-method (asymptotic-normal) intervals for the LS route;
* residual-based intervals for both parameters;
* a fixed-regressor percentile bootstrap for the residual-route rate, with
  leverage-corrected residuals.

Regressors per process: ``ln i`` (Yule, i = 1..n), ``ln(n0-k)`` (linear
death, k = 0..n0-1), ``ln(k+1)`` (sublinear death).  The general rate
families ``ln(theta_j) = m(theta) + q(j)`` and ``ln(theta_j) = m(theta) q(j)``
are handled by :func:`estimate_general`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from statistics import NormalDist
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DegenerateSlopeError, InsufficientDataError, SingularDesignError
from .processes import ProcessKind, SamplePath
from .variates import RandomSource

__all__ = [
    "EULER_GAMMA",
    "Interval",
    "RegressionData",
    "RegressionFit",
    "PointEstimates",
    "EstimateReport",
    "RateLink",
    "GeneralRateEstimate",
    "build_design",
    "design_from_times",
    "ls_fit",
    "point_estimates",
    "ci_ls",
    "ci_res",
    "ci_bootstrap_rate",
    "estimate_path",
    "estimate_design",
    "estimate_general",
    "residual_records",
]

EULER_GAMMA = float(np.euler_gamma)
_PI2 = math.pi ** 2
SMALL_SAMPLE_N = 15


def _z_quantile(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class RegressionData:
    """Log inter-event times ``y`` against the process regressor ``x``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be one-dimensional and equally long")
        if x.size < 3:
            raise InsufficientDataError(
                f"need at least 3 observations, got {x.size}"
            )
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("x and y must be finite")
        if np.all(x == x[0]):
            raise InsufficientDataError("regressor has no variation")

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True)
class RegressionFit:
    """Closed-form least-squares fit with the pieces the estimators reuse."""

    x: np.ndarray
    y: np.ndarray
    intercept: float
    slope: float
    fitted: np.ndarray
    residuals: np.ndarray
    leverages: np.ndarray
    sigma2_u: float
    s_xx: float
    x_bar: float

    @property
    def n(self) -> int:
        return int(self.x.size)


class PointEstimates(NamedTuple):
    nu_ls: float
    rate_ls: float
    nu_res: float
    rate_res: float


def _log_times(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("inter-event times must be one-dimensional")
    if not np.isfinite(times).all():
        raise ValueError("inter-event times must be finite")
    if np.any(times <= 0.0):
        raise ValueError(
            "inter-event times must be strictly positive (a zero would make "
            "the log-regression undefined)"
        )
    return np.log(times)


def build_design(path: SamplePath) -> RegressionData:
    """Regression data for a simulated path, regressor chosen by process kind."""
    n = path.n_events
    if path.process.kind is ProcessKind.YULE:
        x = np.log(np.arange(1, n + 1, dtype=float))
    elif path.process.kind is ProcessKind.LINEAR_DEATH:
        x = np.log(np.arange(path.process.n0, path.process.n0 - n, -1, dtype=float))
    else:
        x = np.log(np.arange(1, n + 1, dtype=float))
    return RegressionData(x=x, y=_log_times(path.inter_times))


def design_from_times(
    times: np.ndarray, kind: ProcessKind = ProcessKind.YULE, start_index: int = 1
) -> RegressionData:
    """Regression data for externally observed inter-event times.

    For the Yule (and sublinear death) regressor the event index starts at
    ``start_index``; a complete linear-death path of ``n`` deaths uses
    ``ln(n), ..., ln(1)``.
    """
    kind = ProcessKind(kind)
    y = _log_times(times)
    n = y.size
    if not (isinstance(start_index, (int, np.integer)) and start_index >= 1):
        raise ValueError(f"start_index must be a positive integer, got {start_index!r}")
    if kind is ProcessKind.LINEAR_DEATH:
        x = np.log(np.arange(n, 0, -1, dtype=float))
    else:
        x = np.log(np.arange(start_index, start_index + n, dtype=float))
    return RegressionData(x=x, y=y)


def ls_fit(data: RegressionData) -> RegressionFit:
    """Least squares line through ``(x, y)`` plus residual diagnostics."""
    x, y = data.x, data.y
    n = data.n
    x_bar = float(x.mean())
    dx = x - x_bar
    s_xx = float(dx @ dx)
    if s_xx <= 0.0:
        raise SingularDesignError("regressor sum of squares is zero")
    slope = float((y @ dx) / s_xx)
    intercept = float(y.mean() - slope * x_bar)
    fitted = intercept + slope * x
    residuals = y - fitted
    leverages = 1.0 / n + dx ** 2 / s_xx
    sigma2_u = float(residuals @ residuals / (n - 2))
    return RegressionFit(
        x=x,
        y=y,
        intercept=intercept,
        slope=slope,
        fitted=fitted,
        residuals=residuals,
        leverages=leverages,
        sigma2_u=sigma2_u,
        s_xx=s_xx,
        x_bar=x_bar,
    )


def _nu_res_from_sigma2(sigma2_u: float) -> float:
    return 1.0 / math.sqrt(3.0 * (sigma2_u / _PI2 + 1.0 / 6.0))


def point_estimates(fit: RegressionFit) -> PointEstimates:
    """LS-route and residual-route point estimates of ``(nu, rate)``."""
    if fit.slope == 0.0:
        raise DegenerateSlopeError("slope is zero; nu = -1/slope is undefined")
    nu_ls = -1.0 / fit.slope
    rate_ls = math.exp((fit.intercept + EULER_GAMMA) / fit.slope)
    nu_res = _nu_res_from_sigma2(fit.sigma2_u)
    rate_res = math.exp(-nu_res * (fit.intercept + EULER_GAMMA))
    return PointEstimates(nu_ls=nu_ls, rate_ls=rate_ls, nu_res=nu_res, rate_res=rate_res)


def _plugin_error_variance(nu_hat: float) -> float:
    return _PI2 * (1.0 / (3.0 * nu_hat ** 2) - 1.0 / 6.0)


def ci_ls(
    fit: RegressionFit, alpha: float = 0.05, error_variance: str = "plugin"
) -> tuple[Optional[Interval], Optional[Interval], tuple[str, ...]]:
    """Asymptotic (delta-method) intervals for the LS-route estimates.

    ``error_variance="plugin"`` estimates the regression error variance from
    the LS nu estimate, ``pi^2 (1/(3 nu^2) - 1/6)``; ``"residual"`` uses the
    unbiased residual variance instead.  Returns ``(ci_nu, ci_rate, warnings)``;
    an interval is None when its standard error is not computable.
    """
    z = _z_quantile(alpha)
    pe = point_estimates(fit)
    warnings: list[str] = []
    if error_variance == "plugin":
        var_eps = _plugin_error_variance(pe.nu_ls)
        if var_eps <= 0.0 or not math.isfinite(var_eps):
            warnings.append(
                "plug-in error variance is not positive (nu_ls >= sqrt(2)); "
                "LS intervals unavailable"
            )
            return None, None, tuple(warnings)
    elif error_variance == "residual":
        var_eps = fit.sigma2_u
    else:
        raise ValueError(f"unknown error_variance option {error_variance!r}")
    sigma_eps = math.sqrt(var_eps)
    half_nu = z * sigma_eps * pe.nu_ls ** 2 / math.sqrt(fit.s_xx)
    ci_nu = Interval(pe.nu_ls - half_nu, pe.nu_ls + half_nu)
    log_rate = math.log(pe.rate_ls)
    spread = 1.0 / fit.n + (fit.x_bar ** 2 + 2.0 * log_rate * fit.x_bar + log_rate ** 2) / fit.s_xx
    if spread < 0.0:
        warnings.append("rate standard error is not computable; LS rate interval unavailable")
        return ci_nu, None, tuple(warnings)
    half_rate = z * sigma_eps * abs(pe.nu_ls) * pe.rate_ls * math.sqrt(spread)
    ci_rate = Interval(pe.rate_ls - half_rate, pe.rate_ls + half_rate)
    if ci_rate.lo < 0.0:
        warnings.append("LS rate interval has a negative lower bound (reported as-is)")
    return ci_nu, ci_rate, tuple(warnings)


def _nu_res_radicand(nu_res: float) -> float:
    return 32.0 - 20.0 * nu_res ** 2 - nu_res ** 4


def ci_res(
    fit: RegressionFit, alpha: float = 0.05
) -> tuple[Optional[Interval], Optional[Interval], tuple[str, ...]]:
    """Residual-route intervals for ``nu`` and the rate.

    The nu interval is ``nu_res +/- z sqrt(nu^2 (32 - 20 nu^2 - nu^4)/(40 n))``;
    it is unavailable (None, with a warning) when the radicand is negative,
    i.e. ``nu_res > ~1.22``.  The rate interval combines that variance with
    the intercept's, scaled by the squared rate estimate.
    """
    z = _z_quantile(alpha)
    pe = point_estimates(fit)
    warnings: list[str] = []
    n = fit.n
    rad = _nu_res_radicand(pe.nu_res)
    ci_nu: Optional[Interval] = None
    if rad < 0.0:
        warnings.append(
            "nu_res exceeds the admissible range of its variance formula "
            "(32 - 20 nu^2 - nu^4 < 0); residual nu interval unavailable"
        )
    else:
        half = z * math.sqrt(pe.nu_res ** 2 * rad / (40.0 * n))
        ci_nu = Interval(pe.nu_res - half, pe.nu_res + half)
    bracket = pe.nu_res ** 2 * rad / (40.0 * n) + pe.nu_res ** 2 * fit.sigma2_u * (
        1.0 / n + fit.x_bar ** 2 / fit.s_xx
    )
    ci_rate: Optional[Interval] = None
    if bracket < 0.0:
        warnings.append("residual rate variance is negative; residual rate interval unavailable")
    else:
        half = z * math.sqrt(
            math.exp(-2.0 * pe.nu_res * (fit.intercept + EULER_GAMMA)) * bracket
        )
        ci_rate = Interval(pe.rate_res - half, pe.rate_res + half)
        if ci_rate.lo < 0.0:
            warnings.append("residual rate interval has a negative lower bound (reported as-is)")
    return ci_nu, ci_rate, tuple(warnings)


def ci_bootstrap_rate(
    fit: RegressionFit,
    alpha: float = 0.05,
    n_boot: int = 500,
    rng: RandomSource | None = None,
) -> Interval:
    """Fixed-regressor percentile bootstrap interval for the residual-route rate.

    Residuals are scaled by ``1/sqrt(1-h_i)`` (their true variance is
    ``sigma^2 (1-h_i)``), resampled with replacement onto the fitted values,
    and the regression is refit; the interval is the empirical
    ``alpha/2``/``1-alpha/2`` quantile pair of the ``exp(-nu*_res (a0* + gamma))``
    replicates.
    """
    if not (isinstance(n_boot, (int, np.integer)) and n_boot >= 100):
        raise ValueError(f"n_boot must be an integer >= 100, got {n_boot!r}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    pe = point_estimates(fit)
    if fit.sigma2_u == 0.0:
        return Interval(pe.rate_res, pe.rate_res)
    if rng is None:
        rng = RandomSource(0, 0)
    n = fit.n
    scaled = fit.residuals / np.sqrt(1.0 - fit.leverages)
    idx = rng.integers(0, n, size=(int(n_boot), n))
    y_star = fit.fitted[None, :] + scaled[idx]
    dx = fit.x - fit.x_bar
    slope_star = y_star @ dx / fit.s_xx
    intercept_star = y_star.mean(axis=1) - slope_star * fit.x_bar
    resid_star = y_star - (intercept_star[:, None] + slope_star[:, None] * fit.x[None, :])
    sigma2_star = (resid_star ** 2).sum(axis=1) / (n - 2)
    nu_star = 1.0 / np.sqrt(3.0 * (sigma2_star / _PI2 + 1.0 / 6.0))
    rate_star = np.exp(-nu_star * (intercept_star + EULER_GAMMA))
    lo, hi = np.quantile(rate_star, [alpha / 2.0, 1.0 - alpha / 2.0], method="linear")
    return Interval(float(lo), float(hi))


@dataclass(frozen=True)
class EstimateReport:
    """Point and interval estimates of ``(nu, rate)`` for one dataset."""

    n: int
    alpha: float
    nu_ls: float
    rate_ls: float
    nu_res: float
    rate_res: float
    ci_nu_ls: Optional[Interval]
    ci_rate_ls: Optional[Interval]
    ci_nu_res: Optional[Interval]
    ci_rate_res: Optional[Interval]
    ci_rate_boot: Optional[Interval]
    n_boot: int
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        def iv(v):
            return None if v is None else [v.lo, v.hi]

        return {
            "n": self.n,
            "alpha": self.alpha,
            "n_boot": self.n_boot,
            "point": {
                "nu_ls": self.nu_ls,
                "rate_ls": self.rate_ls,
                "nu_res": self.nu_res,
                "rate_res": self.rate_res,
            },
            "intervals": {
                "nu_ls": iv(self.ci_nu_ls),
                "rate_ls": iv(self.ci_rate_ls),
                "nu_res": iv(self.ci_nu_res),
                "rate_res": iv(self.ci_rate_res),
                "rate_boot": iv(self.ci_rate_boot),
            },
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimateReport":
        def iv(v):
            return None if v is None else Interval(float(v[0]), float(v[1]))

        p = d["point"]
        i = d["intervals"]
        return cls(
            n=int(d["n"]),
            alpha=float(d["alpha"]),
            n_boot=int(d["n_boot"]),
            nu_ls=float(p["nu_ls"]),
            rate_ls=float(p["rate_ls"]),
            nu_res=float(p["nu_res"]),
            rate_res=float(p["rate_res"]),
            ci_nu_ls=iv(i["nu_ls"]),
            ci_rate_ls=iv(i["rate_ls"]),
            ci_nu_res=iv(i["nu_res"]),
            ci_rate_res=iv(i["rate_res"]),
            ci_rate_boot=iv(i["rate_boot"]),
            warnings=tuple(d["warnings"]),
        )


def estimate_design(
    data: RegressionData,
    alpha: float = 0.05,
    n_boot: int = 500,
    rng: RandomSource | None = None,
    error_variance: str = "plugin",
) -> EstimateReport:
    """Full estimation pipeline on prepared regression data."""
    fit = ls_fit(data)
    pe = point_estimates(fit)
    warnings: list[str] = []
    if fit.slope >= 0.0:
        warnings.append("slope is nonnegative; the implied nu_ls is not in (0, 1]")
    elif not pe.nu_ls <= 1.0:
        warnings.append(f"nu_ls = {pe.nu_ls:.6g} lies outside (0, 1]")
    if pe.nu_res > 1.0:
        warnings.append(f"nu_res = {pe.nu_res:.6g} lies outside (0, 1] (zero-residual limit is sqrt(2))")
    if fit.n < SMALL_SAMPLE_N:
        warnings.append(
            f"n = {fit.n} < {SMALL_SAMPLE_N}: interval estimates are unreliable at this sample size"
        )
    nu_ls_ci, rate_ls_ci, w1 = ci_ls(fit, alpha, error_variance)
    nu_res_ci, rate_res_ci, w2 = ci_res(fit, alpha)
    boot = ci_bootstrap_rate(fit, alpha, n_boot, rng)
    warnings.extend(w1)
    warnings.extend(w2)
    return EstimateReport(
        n=fit.n,
        alpha=alpha,
        nu_ls=pe.nu_ls,
        rate_ls=pe.rate_ls,
        nu_res=pe.nu_res,
        rate_res=pe.rate_res,
        ci_nu_ls=nu_ls_ci,
        ci_rate_ls=rate_ls_ci,
        ci_nu_res=nu_res_ci,
        ci_rate_res=rate_res_ci,
        ci_rate_boot=boot,
        n_boot=int(n_boot),
        warnings=tuple(warnings),
    )


def estimate_path(
    path: SamplePath,
    alpha: float = 0.05,
    n_boot: int = 500,
    rng: RandomSource | None = None,
    error_variance: str = "plugin",
) -> EstimateReport:
    """Full estimation pipeline on a simulated path."""
    return estimate_design(build_design(path), alpha, n_boot, rng, error_variance)


def residual_records(fit: RegressionFit):
    """Per-observation rows ``(index, x, y, fitted, residual, leverage)``."""
    return [
        (
            i + 1,
            float(fit.x[i]),
            float(fit.y[i]),
            float(fit.fitted[i]),
            float(fit.residuals[i]),
            float(fit.leverages[i]),
        )
        for i in range(fit.n)
    ]


class RateLink(str, Enum):
    """How the event rates depend on the unknown parameter.

    ADDITIVE:       ln(theta_j) = m(theta) + q(j)
    MULTIPLICATIVE: ln(theta_j) = m(theta) * q(j)
    """

    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


@dataclass(frozen=True)
class GeneralRateEstimate:
    link: RateLink
    nu: float
    m_hat: float
    theta: float
    intercept: float
    slope: float
    sigma2_u: float
    n: int
    warnings: tuple[str, ...] = field(default_factory=tuple)


def estimate_general(
    link: RateLink,
    q: Callable[[int], float],
    m_inverse: Callable[[float], float],
    times: np.ndarray,
    nu_route: str = "residual",
    nu_value: float | None = None,
    start_index: int = 1,
) -> GeneralRateEstimate:
    """Estimate ``(nu, theta)`` for rates with a known link ``ln(theta_j)``.

    Fits ``ln T_j = d0 + d1 q(j) + eps`` over ``j = start_index, ...``.

    ADDITIVE link (``ln theta_j = m(theta) + q(j)``): ``d0 = -(gamma + m/nu)``
    and ``d1 = -1/nu``, so ``nu`` comes from the residual route (default) or
    from ``-1/d1`` (``nu_route="ls"``); then ``m_hat = -nu (d0 + gamma)``.

    MULTIPLICATIVE link (``ln theta_j = m(theta) q(j)``): ``d0 = -gamma`` and
    ``d1 = -m/nu``; ``nu`` comes from the residual route only, and
    ``m_hat = -nu d1``.  Supplying the known order via ``nu_value`` overrides
    either route.

    ``theta`` is ``m_inverse(m_hat)``; the callable must invert ``m`` and may
    raise ``ValueError`` for arguments outside its domain.
    """
    link = RateLink(link)
    y = _log_times(np.asarray(times, dtype=float))
    n = y.size
    x = np.array([float(q(j)) for j in range(start_index, start_index + n)])
    fit = ls_fit(RegressionData(x=x, y=y))
    warnings: list[str] = []
    if nu_value is not None:
        if not 0.0 < nu_value <= 1.0:
            raise ValueError(f"nu_value must be in (0, 1], got {nu_value}")
        nu = float(nu_value)
    elif link is RateLink.ADDITIVE and nu_route == "ls":
        if fit.slope == 0.0:
            raise DegenerateSlopeError("slope is zero; nu = -1/slope is undefined")
        nu = -1.0 / fit.slope
    elif nu_route in ("residual", "ls"):
        if nu_route == "ls" and link is RateLink.MULTIPLICATIVE:
            warnings.append(
                "the slope confounds m(theta) with nu under a multiplicative "
                "link; using the residual route for nu"
            )
        nu = _nu_res_from_sigma2(fit.sigma2_u)
    else:
        raise ValueError(f"unknown nu_route {nu_route!r}")
    if not 0.0 < nu <= 1.0:
        warnings.append(f"estimated nu = {nu:.6g} lies outside (0, 1]")
    if link is RateLink.ADDITIVE:
        m_hat = -nu * (fit.intercept + EULER_GAMMA)
    else:
        m_hat = -nu * fit.slope
    theta = float(m_inverse(m_hat))
    return GeneralRateEstimate(
        link=link,
        nu=float(nu),
        m_hat=float(m_hat),
        theta=theta,
        intercept=fit.intercept,
        slope=fit.slope,
        sigma2_u=fit.sigma2_u,
        n=n,
        warnings=tuple(warnings),
    )
