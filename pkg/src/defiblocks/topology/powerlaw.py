"""
Discrete power-law fitting.

P(k) = k^-alpha / zeta(alpha, k_min) for k >= k_min, with the Hurwitz zeta
function as exact normalisation. k_min minimises the Kolmogorov-Smirnov
distance between the empirical and fitted tail CDFs; alpha is the maximum
likelihood estimate for each candidate k_min. Goodness of fit uses the
semiparametric bootstrap.
"""

from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from defiblocks.errors import PowerLawFitError
from defiblocks.logging.setup import get_logger
from defiblocks.utils.parallel import chunked, ordered_map

logger = get_logger(__name__)

MIN_TAIL = 50
MIN_BOOTSTRAP = 100
PLAUSIBLE_P = 0.1
ALPHA_BOUNDS = (1.0 + 1e-6, 30.0)
# Values k_min .. k_min + SAMPLER_TABLE - 1 are drawn by exact inversion.
SAMPLER_TABLE = 10_000

Degrees = Union[Sequence[int], np.ndarray]


@dataclass(frozen=True)
class PowerLawFit:
    """
    Fitted discrete power law.

    Attributes:
        k_min: Lower bound of the power-law tail.
        alpha: Scaling exponent.
        ks_distance: KS distance on k >= k_min.
        n_tail: Observations at or above k_min.
        n_total: Positive observations.
    """

    k_min: int
    alpha: float
    ks_distance: float
    n_tail: int
    n_total: int

    @property
    def alpha_stderr(self) -> float:
        """Asymptotic standard error of alpha."""
        return (self.alpha - 1.0) / np.sqrt(self.n_tail)

    def log_pmf(self, k: np.ndarray) -> np.ndarray:
        """Log-probabilities of tail values."""
        return -self.alpha * np.log(k) - np.log(zeta(self.alpha, self.k_min))

    def ccdf(self, k: np.ndarray) -> np.ndarray:
        """P(X >= k) under the fitted tail, for k >= k_min."""
        return zeta(self.alpha, k) / zeta(self.alpha, self.k_min)

    def to_row(self) -> dict[str, object]:
        return {
            "k_min": self.k_min,
            "alpha": self.alpha,
            "alpha_stderr": self.alpha_stderr,
            "ks_distance": self.ks_distance,
            "n_tail": self.n_tail,
            "n_total": self.n_total,
        }


@dataclass(frozen=True)
class GoFResult:
    """
    Bootstrap goodness-of-fit result.

    Attributes:
        p_value: Fraction of replicates with KS distance >= the empirical one.
        n_bootstrap: Replicates requested.
        n_failed: Replicates whose refit failed (excluded from p_value).
        seed: Seed the replicates derive from.
    """

    p_value: float
    n_bootstrap: int
    n_failed: int = 0
    seed: int = 0

    @property
    def plausible(self) -> bool:
        """Power law not rejected at the conventional 0.1 level."""
        return self.p_value >= PLAUSIBLE_P


def positive_degrees(degrees: Degrees) -> np.ndarray:
    """Sorted array of the positive values."""
    x = np.asarray(degrees, dtype=np.int64)
    return np.sort(x[x > 0])


def discrete_alpha_mle(tail: np.ndarray, k_min: int) -> float:
    """
    Maximum likelihood exponent of a discrete power law on a tail.

    Args:
        tail: Values >= k_min.
        k_min: Lower bound.

    Returns:
        alpha.
    """
    n = len(tail)
    sum_log = float(np.log(tail).sum())
    return _alpha_from_stats(n, sum_log, k_min)


def _alpha_from_stats(n: int, sum_log: float, k_min: int) -> float:
    def nll(alpha: float) -> float:
        return float(n * np.log(zeta(alpha, k_min)) + alpha * sum_log)

    res = minimize_scalar(nll, bounds=ALPHA_BOUNDS, method="bounded", options={"xatol": 1e-7})
    return float(res.x)


def discrete_ks(tail: np.ndarray, k_min: int, alpha: float) -> float:
    """
    KS distance between the empirical tail CDF and the fitted CDF.

    The supremum runs over every integer k >= k_min. The empirical CDF is flat
    between observed values while the fitted one rises, so it is attained at
    an observed value or just below one.
    """
    tail = np.sort(np.asarray(tail, dtype=np.int64))
    values = np.unique(tail)
    ks = np.unique(np.concatenate([values, values - 1]))
    ks = ks[ks >= k_min]
    empirical = np.searchsorted(tail, ks, side="right") / len(tail)
    fitted = 1.0 - zeta(alpha, ks + 1) / zeta(alpha, k_min)
    return float(np.max(np.abs(empirical - fitted)))


def fit_power_law(
    degrees: Degrees,
    k_min: Optional[int] = None,
    min_tail: int = MIN_TAIL,
) -> PowerLawFit:
    """
    Fit a discrete power law.

    Every observed value with at least `min_tail` observations at or above it
    is a k_min candidate. The candidate with the smallest KS distance wins,
    ties going to the smaller k_min.

    Args:
        degrees: Degree multiset; zeros are ignored.
        k_min: Fix k_min instead of searching.
        min_tail: Minimum tail size for a candidate.

    Returns:
        The fit.

    Raises:
        PowerLawFitError: Too few observations or no tail to fit.
    """
    x = positive_degrees(degrees)
    n_total = len(x)
    n_fittable = int(np.count_nonzero(x >= 2))
    if n_fittable < min_tail:
        raise PowerLawFitError(
            f"need at least {min_tail} observations >= 2, got {n_fittable}"
        )

    log_x = np.log(x)
    # suffix_log[i] = sum(log x[i:])
    suffix_log = np.concatenate([np.cumsum(log_x[::-1])[::-1], [0.0]])

    if k_min is not None:
        candidates = [int(k_min)]
    else:
        unique = np.unique(x)
        starts = np.searchsorted(x, unique, side="left")
        candidates = [
            int(k)
            for k, s in zip(unique, starts)
            if n_total - s >= min_tail and k < x[-1]
        ]
    if not candidates:
        raise PowerLawFitError("no tail to fit")

    best: Optional[PowerLawFit] = None
    for k in candidates:
        start = int(np.searchsorted(x, k, side="left"))
        n_tail = n_total - start
        tail = x[start:]
        if n_tail < 2 or tail[0] == tail[-1]:
            continue
        alpha = _alpha_from_stats(n_tail, float(suffix_log[start]), k)
        ks = discrete_ks(tail, k, alpha)
        if best is None or ks < best.ks_distance:
            best = PowerLawFit(k_min=k, alpha=alpha, ks_distance=ks, n_tail=n_tail, n_total=n_total)

    if best is None:
        raise PowerLawFitError("no tail to fit")
    return best


def sample_power_law(
    alpha: float,
    k_min: int,
    size: int,
    rng: np.random.Generator,
    table_size: int = SAMPLER_TABLE,
) -> np.ndarray:
    """
    Draw from a discrete power law.

    Values below k_min + table_size come from exact inversion of the CDF; the
    rare larger values use the continuous approximation
    floor((k_min - 1/2) (1 - u)^(-1/(alpha - 1)) + 1/2).

    Args:
        alpha: Exponent (> 1).
        k_min: Lower bound.
        size: Number of draws.
        rng: Random generator.
        table_size: Number of tabulated values.

    Returns:
        Integer samples.
    """
    u = rng.random(size)
    ks = np.arange(k_min, k_min + table_size, dtype=np.float64)
    cdf = 1.0 - zeta(alpha, ks + 1) / zeta(alpha, k_min)
    idx = np.searchsorted(cdf, u, side="left")
    out = np.empty(size, dtype=np.int64)
    inside = idx < table_size
    out[inside] = k_min + idx[inside]
    far = ~inside
    if far.any():
        approx = np.floor((k_min - 0.5) * (1.0 - u[far]) ** (-1.0 / (alpha - 1.0)) + 0.5)
        out[far] = np.maximum(approx, k_min + table_size).astype(np.int64)
    return out


def _replicate_ks(
    indices: Sequence[int],
    body: np.ndarray,
    fit: PowerLawFit,
    seed: int,
    min_tail: int,
) -> list[Optional[float]]:
    results: list[Optional[float]] = []
    for i in indices:
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        if len(body):
            n_from_tail = int(rng.binomial(fit.n_total, fit.n_tail / fit.n_total))
        else:
            n_from_tail = fit.n_total
        tail = sample_power_law(fit.alpha, fit.k_min, n_from_tail, rng)
        head = rng.choice(body, size=fit.n_total - n_from_tail, replace=True) if len(body) else body
        sample = np.concatenate([head, tail])
        try:
            results.append(fit_power_law(sample, min_tail=min_tail).ks_distance)
        except PowerLawFitError:
            results.append(None)
    return results


def bootstrap_gof(
    degrees: Degrees,
    fit: PowerLawFit,
    n: int = 5000,
    seed: int = 0,
    min_tail: int = MIN_TAIL,
    workers: int = 1,
) -> GoFResult:
    """
    Semiparametric bootstrap goodness-of-fit test.

    Each replicate draws n_total values: from the fitted tail with
    probability n_tail / n_total, otherwise uniformly from the observed values
    below k_min; the replicate is refitted and its KS distance recorded.
    Replicate i uses SeedSequence([seed, i]), so results do not depend on the
    number of workers.

    Args:
        degrees: The data `fit` was produced from.
        fit: Fit to test.
        n: Number of replicates (>= 100).
        seed: Base seed.
        min_tail: Minimum tail size used by the refits.
        workers: Worker processes.

    Returns:
        The goodness-of-fit result.

    Raises:
        PowerLawFitError: If n < 100.
    """
    if n < MIN_BOOTSTRAP:
        raise PowerLawFitError(f"bootstrap needs at least {MIN_BOOTSTRAP} replicates, got {n}")

    x = positive_degrees(degrees)
    body = x[x < fit.k_min]
    batches = list(chunked(range(n), max(1, n // max(1, workers * 4))))
    parts = ordered_map(
        partial(_replicate_ks, body=body, fit=fit, seed=seed, min_tail=min_tail),
        batches,
        workers=workers,
    )
    distances = [d for part in parts for d in part]
    valid = np.array([d for d in distances if d is not None], dtype=np.float64)
    n_failed = len(distances) - len(valid)
    p_value = float(np.mean(valid >= fit.ks_distance)) if len(valid) else 0.0

    if n_failed:
        logger.warning("bootstrap_refits_failed", failed=n_failed, replicates=n)
    logger.info(
        "bootstrap_gof_done",
        replicates=n,
        p_value=round(p_value, 4),
        k_min=fit.k_min,
        alpha=round(fit.alpha, 4),
    )
    return GoFResult(p_value=p_value, n_bootstrap=n, n_failed=n_failed, seed=seed)


def ccdf_rows(degrees: Degrees, fit: Optional[PowerLawFit]) -> list[dict[str, object]]:
    """
    Plot-ready complementary CDF.

    The fitted column is scaled by n_tail / n_total so both curves share the
    empirical axis; it is empty below k_min.
    """
    x = positive_degrees(degrees)
    if not len(x):
        return []
    values, counts = np.unique(x, return_counts=True)
    ccdf_emp = (len(x) - np.concatenate([[0], np.cumsum(counts)[:-1]])) / len(x)
    rows: list[dict[str, object]] = []
    for k, c in zip(values, ccdf_emp):
        fitted: object = ""
        if fit is not None and k >= fit.k_min:
            fitted = float(fit.ccdf(np.array([k]))[0]) * fit.n_tail / fit.n_total
        rows.append({"degree": int(k), "ccdf_empirical": float(c), "ccdf_fitted": fitted})
    return rows
