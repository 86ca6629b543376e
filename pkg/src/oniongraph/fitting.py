"""Heavy-tail fits for degree samples: discrete power law vs log-normal.

The power law is the discrete zeta-normalized model p(x) = x^-alpha /
zeta(alpha, xmin) on integers x >= xmin; the cutoff xmin is chosen by
scanning every distinct sample value and keeping the one whose fitted
model minimizes the Kolmogorov-Smirnov distance to the empirical tail.

Degrees are integers, so the competing log-normal is discretized too
(mass of the continuous log-normal over (x-1/2, x+1/2], renormalized over
x >= xmin). Both models are then proper pmfs over the same support, which
keeps the per-point log-likelihood comparison coherent. The bundled
samplers invert these exact pmfs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import erfc, ndtr, ndtri, zeta

from .errors import DataError, UsageError

DEFAULT_MIN_TAIL = 50
_ALPHA_BOUNDS = (1.000001, 25.0)
_LOW_CONFIDENCE_DISTINCT = 2


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    xmin: int
    ks_distance: float
    n_tail: int
    tail_fraction: float


@dataclass(frozen=True)
class LognormalFit:
    mu: float
    sigma: float
    xmin: int
    n_tail: int
    low_confidence: bool


@dataclass(frozen=True)
class FitComparison:
    loglik_ratio: float  # power-law total log-likelihood minus log-normal
    p_value: float
    better: str  # "power_law" | "log_normal" | "tie"


@dataclass(frozen=True)
class BootstrapResult:
    p_value: float  # share of model replicates fitting worse than the data
    n_replicates: int


@dataclass(frozen=True)
class FitReport:
    """Full report for one degree sample: both fits plus their comparison."""

    alpha: float
    xmin: int
    ks_distance: float
    tail_fraction: float
    n_tail: int
    lognormal_mu: float
    lognormal_sigma: float
    lognormal_low_confidence: bool
    loglik_ratio: float
    p_value: float
    better: str

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "xmin": self.xmin,
            "ks_distance": self.ks_distance,
            "tail_fraction": self.tail_fraction,
            "n_tail": self.n_tail,
            "lognormal_mu": self.lognormal_mu,
            "lognormal_sigma": self.lognormal_sigma,
            "lognormal_low_confidence": self.lognormal_low_confidence,
            "loglik_ratio": self.loglik_ratio,
            "p_value": self.p_value,
            "better": self.better,
        }


def _as_sample(sample) -> np.ndarray:
    x = np.asarray(sample)
    if x.size == 0:
        raise DataError("empty sample")
    if not np.issubdtype(x.dtype, np.integer):
        xi = np.rint(x).astype(np.int64)
        if not np.allclose(x, xi):
            raise DataError("sample must contain integers")
        x = xi
    else:
        x = x.astype(np.int64)
    if x.min() < 1:
        raise DataError("sample values must be positive")
    return x


# -- discrete power law -----------------------------------------------------


def _pl_alpha_mle(values: np.ndarray, counts: np.ndarray, xmin: int) -> float:
    n = counts.sum()
    slog = float(counts @ np.log(values))

    def nll(alpha: float) -> float:
        return alpha * slog + n * math.log(zeta(alpha, xmin))

    res = minimize_scalar(nll, bounds=_ALPHA_BOUNDS, method="bounded",
                          options={"xatol": 1e-9})
    return float(res.x)


def _pl_ks(values: np.ndarray, counts: np.ndarray, alpha: float, xmin: int) -> float:
    """Exact sup-distance between the empirical tail CDF and the model CDF.

    Both are step functions jumping only at integers, so the supremum is
    attained either at an observed value or just below one; comparing the
    model CDF and its left limit against the empirical steps covers both.
    """
    n = counts.sum()
    emp = np.cumsum(counts) / n
    z0 = zeta(alpha, xmin)
    model_upper = 1.0 - zeta(alpha, values + 1) / z0  # P(X <= u_j)
    model_lower = 1.0 - zeta(alpha, values) / z0  # P(X <= u_j - 1)
    emp_prev = np.concatenate([[0.0], emp[:-1]])
    gaps = np.maximum(np.abs(emp - model_upper), np.abs(emp_prev - model_lower))
    return float(gaps.max())


def fit_power_law(
    sample, min_tail: int = DEFAULT_MIN_TAIL, xmin: int | None = None
) -> PowerLawFit:
    """Clauset-style discrete fit: MLE alpha per candidate cutoff, cutoff
    chosen by minimum KS distance (ties to the smallest cutoff).

    Candidates are the distinct sample values whose tail holds at least
    min_tail observations and at least two distinct values. Passing xmin
    pins the cutoff instead of scanning (e.g. to compare models on a
    chosen tail).
    """
    x = _as_sample(sample)
    values, counts = np.unique(x, return_counts=True)
    if values.size < 2:
        raise DataError("degenerate tail: sample needs at least two distinct values")
    n = x.size

    if xmin is not None:
        keep = values >= xmin
        v, c = values[keep], counts[keep]
        n_tail = int(c.sum())
        if n_tail < min_tail:
            raise DataError(f"insufficient tail: {n_tail} observations at cutoff {xmin}")
        if v.size < 2:
            raise DataError("degenerate tail: fixed cutoff leaves one distinct value")
        alpha = _pl_alpha_mle(v, c, int(xmin))
        ks = _pl_ks(v, c, alpha, int(xmin))
        return PowerLawFit(alpha=alpha, xmin=int(xmin), ks_distance=ks,
                           n_tail=n_tail, tail_fraction=n_tail / n)

    tail_sizes = counts[::-1].cumsum()[::-1]  # tail count at each distinct value
    best = None
    had_min_tail = False
    for j, xmin in enumerate(values):
        if tail_sizes[j] < min_tail:
            continue
        had_min_tail = True
        if values.size - j < 2:
            continue
        v, c = values[j:], counts[j:]
        alpha = _pl_alpha_mle(v, c, int(xmin))
        ks = _pl_ks(v, c, alpha, int(xmin))
        if best is None or ks < best[0] - 1e-15:
            best = (ks, int(xmin), alpha, int(tail_sizes[j]))
    if best is None:
        if had_min_tail:
            raise DataError("degenerate tail: no candidate cutoff with two distinct values")
        raise DataError(f"insufficient tail: no cutoff keeps {min_tail} observations")
    ks, xmin, alpha, n_tail = best
    return PowerLawFit(alpha=alpha, xmin=xmin, ks_distance=ks, n_tail=n_tail,
                       tail_fraction=n_tail / n)


def power_law_logpmf(x: np.ndarray, alpha: float, xmin: int) -> np.ndarray:
    return -alpha * np.log(x) - math.log(zeta(alpha, xmin))


def sample_power_law(alpha: float, xmin: int, size: int, rng) -> np.ndarray:
    """Inverse-CDF draws from the discrete power law (exact)."""
    if alpha <= 1:
        raise UsageError("alpha must exceed 1")
    u = rng.random(size)
    z0 = zeta(alpha, xmin)
    # tabulated CDF for the bulk, per-sample bisection beyond the table
    hi = xmin + 2
    while 1.0 - zeta(alpha, hi + 1) / z0 < u.max() and hi - xmin < 1_000_000:
        hi = xmin + 2 * (hi - xmin)
    support = np.arange(xmin, hi + 1, dtype=np.int64)
    cdf = 1.0 - zeta(alpha, support + 1) / z0
    pos = np.searchsorted(cdf, u, side="left")
    out = np.empty(size, dtype=np.int64)
    inside = pos < support.size
    out[inside] = support[pos[inside]]
    for i in np.flatnonzero(~inside):
        lo_b, hi_b = int(support[-1]), int(support[-1]) * 4
        while 1.0 - zeta(alpha, hi_b + 1) / z0 < u[i]:
            hi_b *= 4
        while lo_b < hi_b:
            mid = (lo_b + hi_b) // 2
            if 1.0 - zeta(alpha, mid + 1) / z0 >= u[i]:
                hi_b = mid
            else:
                lo_b = mid + 1
        out[i] = lo_b
    return out


# -- discretized truncated log-normal ----------------------------------------


def _ln_z(t: np.ndarray, mu: float, sigma: float) -> np.ndarray:
    return (np.log(t) - mu) / sigma


def lognormal_logpmf(x: np.ndarray, mu: float, sigma: float, xmin: int) -> np.ndarray:
    """log pmf of the bin-rounded log-normal truncated below xmin."""
    x = np.asarray(x, dtype=np.float64)
    upper = ndtr(_ln_z(x + 0.5, mu, sigma))
    lower = ndtr(_ln_z(x - 0.5, mu, sigma))
    norm = 1.0 - ndtr(_ln_z(xmin - 0.5, mu, sigma))
    mass = np.maximum(upper - lower, 1e-300)
    return np.log(mass) - math.log(max(norm, 1e-300))


def fit_lognormal(sample, xmin: int) -> LognormalFit:
    """MLE of the truncated discretized log-normal on the tail x >= xmin."""
    x = _as_sample(sample)
    tail = x[x >= xmin]
    if tail.size == 0:
        raise DataError(f"empty tail: no sample values at or above {xmin}")
    values, counts = np.unique(tail, return_counts=True)
    if values.size < 2:
        raise DataError("degenerate tail: log-normal fit needs two distinct values")

    logs = np.log(tail.astype(np.float64))
    mu0 = float(logs.mean())
    sigma0 = max(float(logs.std()), 0.05)

    def nll(params) -> float:
        mu, log_sigma = params
        sigma = math.exp(log_sigma)
        if sigma > 50.0:
            return 1e12
        ll = counts @ lognormal_logpmf(values, mu, sigma, xmin)
        return -float(ll)

    res = minimize(nll, x0=np.array([mu0, math.log(sigma0)]), method="Nelder-Mead",
                   options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 2000})
    mu, sigma = float(res.x[0]), float(math.exp(res.x[1]))
    return LognormalFit(mu=mu, sigma=sigma, xmin=int(xmin), n_tail=int(tail.size),
                        low_confidence=values.size <= _LOW_CONFIDENCE_DISTINCT)


def sample_lognormal(mu: float, sigma: float, xmin: int, size: int, rng) -> np.ndarray:
    """Inverse-CDF draws from the same discretized truncated log-normal."""
    if sigma <= 0:
        raise UsageError("sigma must be positive")
    u = rng.random(size)
    base = ndtr(_ln_z(np.array([xmin - 0.5]), mu, sigma))[0]
    q = base + u * (1.0 - base)
    y = np.exp(mu + sigma * ndtri(q))
    x = np.floor(y + 0.5).astype(np.int64)  # the bin (x-1/2, x+1/2] containing y
    return np.maximum(x, xmin)


def bootstrap_pvalue(
    sample,
    fit: PowerLawFit,
    n_boot: int = 100,
    seed: int = 0,
    min_tail: int = DEFAULT_MIN_TAIL,
) -> BootstrapResult:
    """Semi-parametric goodness-of-fit test for the power-law fit.

    Each replicate mixes draws from the fitted tail model with resamples of
    the empirical data below the cutoff, is refitted from scratch, and its
    KS distance compared with the observed one; the p-value is the share of
    replicates fitting at least as badly. Small p rejects the power law.
    Expensive (n_boot full refits), hence off by default everywhere.
    """
    if n_boot < 1:
        raise UsageError("n_boot must be >= 1")
    x = _as_sample(sample)
    rng = np.random.default_rng(seed)
    below = x[x < fit.xmin]
    n = x.size
    p_tail = fit.n_tail / n
    worse = 0
    usable = 0
    for _ in range(n_boot):
        k_tail = int((rng.random(n) < p_tail).sum()) if below.size else n
        synth = np.empty(n, dtype=np.int64)
        synth[:k_tail] = sample_power_law(fit.alpha, fit.xmin, k_tail, rng)
        if n - k_tail:
            synth[k_tail:] = rng.choice(below, size=n - k_tail, replace=True)
        try:
            refit = fit_power_law(synth, min_tail=min_tail)
        except DataError:
            continue  # degenerate replicate, drop it
        usable += 1
        if refit.ks_distance >= fit.ks_distance - 1e-15:
            worse += 1
    if usable == 0:
        raise DataError("all bootstrap replicates were degenerate")
    return BootstrapResult(p_value=worse / usable, n_replicates=usable)


# -- model comparison ----------------------------------------------------------


def _vuong(ll_a: np.ndarray, ll_b: np.ndarray) -> tuple[float, float]:
    """Normalized log-likelihood ratio test (normal approximation).

    Returns (R, p) with R = sum(ll_a - ll_b); p is the two-sided tail
    probability of |R| under the ratio's estimated variance. Identical
    per-point likelihoods give (0, 1).
    """
    diff = ll_a - ll_b
    r = float(diff.sum())
    n = diff.size
    sd = float(diff.std())
    if sd < 1e-12:
        return (r, 1.0 if abs(r) < 1e-9 else 0.0)
    z = r / (sd * math.sqrt(n))
    return r, float(erfc(abs(z) / math.sqrt(2.0)))


def compare_fits(sample, xmin: int, pl: PowerLawFit, ln: LognormalFit) -> FitComparison:
    """Per-point log-likelihood comparison of the two fitted models on the
    shared tail; positive ratio favors the power law."""
    if pl.xmin != xmin or ln.xmin != xmin:
        raise UsageError(
            f"mismatched tails: cutoffs {pl.xmin} / {ln.xmin} do not match {xmin}"
        )
    x = _as_sample(sample)
    tail = x[x >= xmin].astype(np.float64)
    if tail.size == 0:
        raise UsageError(f"no sample values at or above {xmin}")
    ll_pl = power_law_logpmf(tail, pl.alpha, xmin)
    ll_ln = lognormal_logpmf(tail, ln.mu, ln.sigma, xmin)
    r, p = _vuong(ll_pl, ll_ln)
    if abs(r) < 1e-9:
        better = "tie"
    else:
        better = "power_law" if r > 0 else "log_normal"
    return FitComparison(loglik_ratio=r, p_value=p, better=better)


def fit_report(sample, min_tail: int = DEFAULT_MIN_TAIL) -> FitReport:
    """Run both fits on the KS-selected tail and compare them."""
    pl = fit_power_law(sample, min_tail=min_tail)
    ln = fit_lognormal(sample, pl.xmin)
    cmp_ = compare_fits(sample, pl.xmin, pl, ln)
    return FitReport(
        alpha=pl.alpha,
        xmin=pl.xmin,
        ks_distance=pl.ks_distance,
        tail_fraction=pl.tail_fraction,
        n_tail=pl.n_tail,
        lognormal_mu=ln.mu,
        lognormal_sigma=ln.sigma,
        lognormal_low_confidence=ln.low_confidence,
        loglik_ratio=cmp_.loglik_ratio,
        p_value=cmp_.p_value,
        better=cmp_.better,
    )
