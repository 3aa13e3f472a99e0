"""
Comparison of the power law against other heavy-tailed candidates.

Each alternative is a continuous distribution discretised on the integers,
P(k) = (S(k) - S(k+1)) / S(k_min), and fitted by maximum likelihood on the
same tail as the power law. The normalised log-likelihood ratio R and its
two-sided p-value follow the Vuong test; R > 0 favours the power law.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize
from scipy.special import erfc, log_ndtr

from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import PowerLawFitError
from defiblocks.logging.setup import get_logger
from defiblocks.topology.powerlaw import PLAUSIBLE_P, Degrees, PowerLawFit, positive_degrees

logger = get_logger(__name__)

LR_COLUMNS = ("alternative", "available", "R", "p_value", "loglikelihood_ratio", "parameters")


class Alternative(str, Enum):
    """Alternative distribution."""

    EXPONENTIAL = "exponential"
    LOGNORMAL = "lognormal"
    WEIBULL = "weibull"


@dataclass(frozen=True)
class LRComparison:
    """
    Power law versus one alternative.

    Attributes:
        alternative: Alternative distribution.
        R: Normalised log-likelihood ratio (R > 0 favours the power law).
        p_value: Two-sided significance of R.
        loglikelihood_ratio: Unnormalised ratio.
        parameters: Fitted alternative parameters.
        available: False if the alternative could not be fitted.
    """

    alternative: Alternative
    R: float = float("nan")
    p_value: float = float("nan")
    loglikelihood_ratio: float = float("nan")
    parameters: tuple[tuple[str, float], ...] = field(default_factory=tuple)
    available: bool = True

    @property
    def significant(self) -> bool:
        """The sign of R is meaningful at the 0.1 level."""
        return self.available and self.p_value < PLAUSIBLE_P

    def to_row(self) -> dict[str, object]:
        return {
            "alternative": self.alternative.value,
            "available": int(self.available),
            "R": self.R if self.available else "",
            "p_value": self.p_value if self.available else "",
            "loglikelihood_ratio": self.loglikelihood_ratio if self.available else "",
            "parameters": ";".join(f"{k}={v:.6g}" for k, v in self.parameters),
        }


def _log_diff_sf(log_sf_k: np.ndarray, log_sf_k1: np.ndarray) -> np.ndarray:
    """log(S(k) - S(k+1)) from log S(k) and log S(k+1)."""
    delta = np.minimum(log_sf_k1 - log_sf_k, -1e-300)
    return log_sf_k + np.log(-np.expm1(delta))


def exponential_log_pmf(k: np.ndarray, k_min: int, lam: float) -> np.ndarray:
    """Discretised exponential log-pmf on k >= k_min."""
    return np.log(-np.expm1(-lam)) - lam * (k - k_min)


def lognormal_log_pmf(k: np.ndarray, k_min: int, mu: float, sigma: float) -> np.ndarray:
    """Discretised lognormal log-pmf on k >= k_min."""

    def log_sf(v: np.ndarray) -> np.ndarray:
        return log_ndtr(-(np.log(v) - mu) / sigma)

    return _log_diff_sf(log_sf(k), log_sf(k + 1.0)) - log_sf(np.array([float(k_min)]))[0]


def weibull_log_pmf(k: np.ndarray, k_min: int, scale: float, shape: float) -> np.ndarray:
    """Discretised Weibull (stretched exponential) log-pmf on k >= k_min."""

    def log_sf(v: np.ndarray) -> np.ndarray:
        return -((v / scale) ** shape)

    return _log_diff_sf(log_sf(k), log_sf(k + 1.0)) - log_sf(np.array([float(k_min)]))[0]


def _fit_exponential(tail: np.ndarray, k_min: int) -> Optional[tuple[tuple[str, float], ...]]:
    excess = float(tail.mean()) - k_min
    if excess <= 0:
        return None
    return (("lambda", float(np.log1p(1.0 / excess))),)


def _fit_two_params(
    tail: np.ndarray,
    k_min: int,
    log_pmf: Callable[[np.ndarray, int, float, float], np.ndarray],
    start: tuple[float, float],
    names: tuple[str, str],
    transform: Callable[[np.ndarray], tuple[float, float]],
) -> Optional[tuple[tuple[str, float], ...]]:
    values = tail.astype(np.float64)

    def nll(theta: np.ndarray) -> float:
        a, b = transform(theta)
        with np.errstate(all="ignore"):
            total = -float(np.sum(log_pmf(values, k_min, a, b)))
        return total if np.isfinite(total) else 1e300

    res = minimize(nll, np.asarray(start), method="Nelder-Mead", options={"maxiter": 4000, "xatol": 1e-8, "fatol": 1e-10})
    if not res.success or not np.isfinite(res.fun) or res.fun >= 1e300:
        return None
    a, b = transform(res.x)
    return ((names[0], a), (names[1], b))


def _fit_lognormal(tail: np.ndarray, k_min: int) -> Optional[tuple[tuple[str, float], ...]]:
    logs = np.log(tail)
    start = (float(logs.mean()), float(np.log(max(logs.std(), 0.1))))
    return _fit_two_params(
        tail,
        k_min,
        lognormal_log_pmf,
        start,
        ("mu", "sigma"),
        lambda th: (float(th[0]), float(np.exp(th[1]))),
    )


def _fit_weibull(tail: np.ndarray, k_min: int) -> Optional[tuple[tuple[str, float], ...]]:
    start = (float(np.log(tail.mean())), 0.0)
    return _fit_two_params(
        tail,
        k_min,
        weibull_log_pmf,
        start,
        ("scale", "shape"),
        lambda th: (float(np.exp(th[0])), float(np.exp(th[1]))),
    )


def _alt_log_pmf(alternative: Alternative, tail: np.ndarray, k_min: int, params: dict[str, float]) -> np.ndarray:
    values = tail.astype(np.float64)
    if alternative is Alternative.EXPONENTIAL:
        return exponential_log_pmf(values, k_min, params["lambda"])
    if alternative is Alternative.LOGNORMAL:
        return lognormal_log_pmf(values, k_min, params["mu"], params["sigma"])
    return weibull_log_pmf(values, k_min, params["scale"], params["shape"])


_FITTERS = {
    Alternative.EXPONENTIAL: _fit_exponential,
    Alternative.LOGNORMAL: _fit_lognormal,
    Alternative.WEIBULL: _fit_weibull,
}


def vuong_ratio(log_p1: np.ndarray, log_p2: np.ndarray) -> tuple[float, float, float]:
    """
    Normalised log-likelihood ratio test.

    Args:
        log_p1: Per-observation log-likelihoods under model 1.
        log_p2: Per-observation log-likelihoods under model 2.

    Returns:
        (R normalised, two-sided p-value, raw log-likelihood ratio).
    """
    diff = log_p1 - log_p2
    n = len(diff)
    raw = float(diff.sum())
    sigma = float(diff.std())
    if n == 0 or sigma == 0.0:
        return 0.0, 1.0, raw
    r = raw / (sigma * np.sqrt(n))
    p = float(erfc(abs(r) / np.sqrt(2.0)))
    return float(r), p, raw


def compare_distributions(
    degrees: Degrees,
    fit: PowerLawFit,
    alternatives: tuple[Alternative, ...] = tuple(Alternative),
    diagnostics: Optional[DiagnosticCollector] = None,
) -> list[LRComparison]:
    """
    Compare the fitted power law with alternative distributions.

    Args:
        degrees: Data the fit came from.
        fit: Power-law fit.
        alternatives: Alternatives to test.
        diagnostics: Collector for alternatives that fail to converge.

    Returns:
        One comparison per alternative, in the order given.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source="compare_distributions")
    x = positive_degrees(degrees)
    tail = x[x >= fit.k_min]
    if len(tail) < 2:
        raise PowerLawFitError("tail too small for likelihood ratio tests")
    log_pl = fit.log_pmf(tail.astype(np.float64))

    results: list[LRComparison] = []
    for alternative in alternatives:
        params = _FITTERS[alternative](tail, fit.k_min)
        if params is None:
            diagnostics.report(
                "alternative_fit_failed",
                f"{alternative.value} MLE did not converge; comparison unavailable",
                alternative=alternative.value,
            )
            results.append(LRComparison(alternative=alternative, available=False))
            continue
        log_alt = _alt_log_pmf(alternative, tail, fit.k_min, dict(params))
        r, p, raw = vuong_ratio(log_pl, log_alt)
        results.append(
            LRComparison(alternative=alternative, R=r, p_value=p, loglikelihood_ratio=raw, parameters=params)
        )
        logger.info("lr_test", alternative=alternative.value, R=round(r, 4), p_value=round(p, 4))
    return results
