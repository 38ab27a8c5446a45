"""Exact maximal-deviation statistics and the two sample generators.

``draw_direct_sample`` simulates all ``n`` observations.  ``draw_conditioned_sample``
uses the conditioning trick instead: draw ``K ~ Bin(n, p)`` and then ``K`` points
from ``mu`` restricted to the rare region.  Both return a :class:`DeviationSample`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

__all__ = [
    "DeviationSample",
    "Sample",
    "sup_deviation_halflines",
    "sup_deviation_intervals",
    "sup_deviation_finite",
    "draw_direct_sample",
    "draw_conditioned_sample",
    "binomial_draw",
]

# below this log-pmf at zero, (1 - p)^n underflows and the search starts at the mode
_LOG_UNDERFLOW = -700.0


@dataclass(frozen=True)
class DeviationSample:
    sup_dev: float
    tail_count_k: int


@dataclass(frozen=True)
class Sample:
    values: tuple

    def __init__(self, values: Sequence):
        values = tuple(values)
        if not values:
            raise ValueError("a sample needs at least one point")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.values)


def _as_tail(tail_points, q: float) -> np.ndarray:
    x = np.asarray(tail_points, dtype=float).reshape(-1)
    if x.size:
        if np.any(np.diff(x) < 0):
            raise ValueError("tail points must be sorted ascending")
        if x[-1] > q:
            raise ValueError(f"tail points must be <= q = {q}, got max {x[-1]}")
    return x


def sup_deviation_halflines(tail_points, n: int, q: float, p: float) -> float:
    """``sup_{t <= q} |F_n(t) - F(t)|`` for uniform ``mu``, computed from order statistics.

    ``tail_points`` are the sorted sample points lying in ``[0, q]`` and ``p = F(q)``.
    """
    x = _as_tail(tail_points, q)
    m = x.size
    if m > n:
        raise ValueError(f"{m} tail points cannot come from a sample of size {n}")
    if m == 0:
        return float(p)
    i = np.arange(1, m + 1)
    above = float(np.max(i / n - x))
    below = max(float(p) - m / n, float(np.max(x - (i - 1) / n)))
    return max(above, below, 0.0)


def sup_deviation_intervals(tail_points, n: int, q: float) -> float:
    """``sup |nu([a, b]) - (b - a)|`` over ``0 <= a <= b <= q``, ``nu`` = mass ``1/n`` per point.

    Quadratic in the number of tail points.
    """
    x = _as_tail(tail_points, q)
    m = x.size
    if m > n:
        raise ValueError(f"{m} tail points cannot come from a sample of size {n}")
    # longest interval holding points i+1..j-1 strictly between ext[i] and ext[j]
    ext = np.concatenate(([0.0], x, [float(q)]))
    idx = np.arange(m + 2)
    gap = ext[None, :] - ext[:, None] - (idx[None, :] - idx[:, None] - 1) / n
    below = float(np.max(gap[np.triu_indices(m + 2, k=1)]))
    if m == 0:
        return max(below, 0.0)
    # tightest interval [x_i, x_j] holding points i..j
    j_minus_i = idx[None, :m] - idx[:m, None]
    tight = (j_minus_i + 1) / n - (x[None, :] - x[:, None])
    above = float(np.max(tight[np.triu_indices(m)]))
    return max(above, below, 0.0)


def sup_deviation_finite(spec, sample: Sample, true_masses: Sequence[float]) -> float:
    """``max_j |mu_n(A_j) - mu(A_j)|`` over the sets of a finite class."""
    if len(true_masses) != len(spec.sets):
        raise ValueError(
            f"got {len(true_masses)} true masses for {len(spec.sets)} sets"
        )
    n = sample.n
    best = 0.0
    for s, mass in zip(spec.sets, true_masses):
        freq = sum(1 for v in sample.values if v in s) / n
        best = max(best, abs(freq - mass))
    return best


def draw_direct_sample(n: int, set_class, rng: np.random.Generator) -> DeviationSample:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x = set_class.sample_mu(rng, n)
    tail = np.sort(x[set_class.in_rare_region(x)])
    return DeviationSample(float(set_class.statistic(tail, n)), int(tail.size))


def draw_conditioned_sample(n: int, set_class, rng: np.random.Generator) -> DeviationSample:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    k = binomial_draw(n, set_class.rare_mass_p, rng)
    tail = np.sort(set_class.sample_conditional(rng, k))
    return DeviationSample(float(set_class.statistic(tail, n)), k)


def binomial_draw(n: int, p: float, rng: np.random.Generator) -> int:
    """Exact ``Bin(n, p)`` variate by inverse transform with the pmf ratio recursion.

    The search starts at 0 when ``(1 - p)^n`` is representable and at the mode
    otherwise; both return the smallest ``k`` with ``F(k) >= u``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p}")
    u = rng.random()
    odds = p / (1.0 - p)
    log_pmf0 = n * math.log1p(-p)

    if log_pmf0 > _LOG_UNDERFLOW:
        k = 0
        pmf = math.exp(log_pmf0)
        cdf = pmf
        while cdf < u and k < n:
            pmf *= (n - k) / (k + 1) * odds
            k += 1
            cdf += pmf
        return k

    k = min(int(math.floor((n + 1) * p)), n)
    pmf = math.exp(
        math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
        + k * math.log(p) + (n - k) * math.log1p(-p)
    )
    cdf = float(stats.binom.cdf(k, n, p))
    if cdf >= u:
        while k > 0 and cdf - pmf >= u:
            cdf -= pmf
            pmf *= k / (n - k + 1) / odds
            k -= 1
        return k
    while cdf < u and k < n:
        pmf *= (n - k) / (k + 1) * odds
        k += 1
        cdf += pmf
    return k
