"""Seeded Monte Carlo checks: bound coverage, the conditioning trick, symmetrization.

Randomness: every replication gets its own ``numpy.random.Generator`` backed by
PCG64 and seeded with ``derive_seed(master_seed, replication)``.  Results therefore
do not depend on how replications are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy import stats

from .bounds import BoundInput, BoundKind, evaluate
from .classes import SetClass, get_class, shattering_at_real
from .empirical import draw_direct_sample

__all__ = [
    "ConfigurationError",
    "PreconditionError",
    "ExperimentError",
    "ExperimentConfig",
    "KindCoverage",
    "CoverageReport",
    "SymmetrizationConfig",
    "SymmetrizationReport",
    "ConditioningReport",
    "DEFAULT_KINDS",
    "derive_seed",
    "make_rng",
    "bound_input_for",
    "wilson_lower",
    "ks_critical_value",
    "run_coverage",
    "verify_conditioning",
    "verify_symmetrization",
]

MASK64 = (1 << 64) - 1
# separates the conditional-sampler stream from the direct-sample stream
_CONDITIONAL_STREAM = 0xC0D1_7104_ED5A_3B1E

DEFAULT_KINDS = (
    BoundKind.RARE_SYM_AFTER,
    BoundKind.RARE_SYM_BEFORE,
    BoundKind.EXPECTATION_ROUTE,
    BoundKind.RELATIVE_VC,
)


class ConfigurationError(ValueError):
    pass


class PreconditionError(ConfigurationError):
    """A lemma's hypotheses fail at the requested parameters."""


class ExperimentError(RuntimeError):
    pass


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, replication: int) -> int:
    """SplitMix64 of ``SplitMix64(master_seed) XOR replication``.

    A bijection in ``replication`` for fixed ``master_seed``; pure integer
    arithmetic, so identical on every platform.
    """
    return _splitmix64(_splitmix64(master_seed & MASK64) ^ (replication & MASK64))


def make_rng(master_seed: int, replication: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, replication)))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p: float
    delta: float
    replications: int
    master_seed: int = 0
    class_id: str = "tail-halflines"
    bound_kinds: tuple = DEFAULT_KINDS

    def __post_init__(self):
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigurationError(f"replications must be >= 1, got {self.replications}")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if not (0.0 < self.p < 1.0):
            raise ConfigurationError(f"p must lie in (0, 1), got {self.p}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigurationError(f"delta must lie in (0, 1), got {self.delta}")
        try:
            kinds = tuple(BoundKind.parse(k) for k in self.bound_kinds)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        object.__setattr__(self, "bound_kinds", kinds)

    def set_class(self) -> SetClass:
        try:
            return get_class(self.class_id, self.p)
        except KeyError as exc:
            raise ConfigurationError(exc.args[0]) from None


def bound_input_for(set_class: SetClass, n: int, delta: float) -> BoundInput:
    return BoundInput(
        n=n,
        p=set_class.rare_mass_p,
        delta=delta,
        log_shattering=lambda x: shattering_at_real(set_class, x),
        vc_dim=set_class.vc_dim,
    )


def wilson_lower(successes: int, trials: int, confidence: float = 0.95) -> float:
    """Lower limit of the two-sided Wilson score interval."""
    ci = stats.binomtest(successes, trials).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    return float(ci.low)


@dataclass(frozen=True)
class KindCoverage:
    bound_value: float
    valid: bool
    exceed_count: int
    coverage: float
    coverage_ci_low: float


@dataclass(frozen=True)
class CoverageReport:
    """Per-kind coverage.  Invalid bounds carry ``nan`` coverage and are never compared."""

    config: ExperimentConfig
    kinds: dict

    def passes(self) -> bool:
        target = 1.0 - self.config.delta
        return all(c.coverage_ci_low >= target for c in self.kinds.values() if c.valid)


def _direct_sup_dev(args) -> float:
    n, set_class, master_seed, r = args
    return draw_direct_sample(n, set_class, make_rng(master_seed, r)).sup_dev


def run_coverage(
    config: ExperimentConfig,
    *,
    overrides: Optional[Mapping] = None,
    scale: float = 1.0,
    n_jobs: int = 1,
) -> CoverageReport:
    """Count how often the direct-sample maximal deviation exceeds each bound.

    ``overrides`` replaces computed bound values (keyed by kind); ``scale``
    multiplies every bound.  Both exist to sanity-check the harness itself.
    """
    set_class = config.set_class()
    inp = bound_input_for(set_class, config.n, config.delta)
    overrides = {BoundKind.parse(k): float(v) for k, v in (overrides or {}).items()}

    values = {}
    for kind in config.bound_kinds:
        if kind in overrides:
            values[kind] = (overrides[kind], True)
        else:
            res = evaluate(kind, inp)
            values[kind] = (res.total * scale, res.valid)

    tasks = [(config.n, set_class, config.master_seed, r) for r in range(config.replications)]
    if n_jobs == 1:
        sup_devs = [_direct_sup_dev(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=None if n_jobs < 1 else n_jobs) as pool:
            sup_devs = list(pool.map(_direct_sup_dev, tasks, chunksize=16))

    R = config.replications
    kinds = {}
    for kind, (value, valid) in values.items():
        if not valid:
            kinds[kind] = KindCoverage(value, False, 0, math.nan, math.nan)
            continue
        exceed = sum(1 for d in sup_devs if d > value)
        kinds[kind] = KindCoverage(value, True, exceed, 1.0 - exceed / R, wilson_lower(R - exceed, R))
    return CoverageReport(config, kinds)


def ks_critical_value(alpha: float, n1: int, n2: int) -> float:
    """Asymptotic two-sample KS critical value ``c(alpha) sqrt((n1 + n2) / (n1 n2))``."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n1 + n2) / (n1 * n2))


@dataclass(frozen=True)
class ConditioningReport:
    ks_statistic: float
    critical_value: float
    sample_sizes: tuple
    k_star: int
    alpha: float

    @property
    def passed(self) -> bool:
        return self.ks_statistic < self.critical_value


def verify_conditioning(
    config: ExperimentConfig,
    alpha: float = 0.01,
    *,
    per_side: Optional[int] = None,
    min_per_side: int = 200,
    conditional_p: Optional[float] = None,
    self_test: bool = False,
) -> ConditioningReport:
    """Two-sample KS test of the conditioning trick on the stratum ``K = round(np)``.

    One side keeps the direct samples whose tail count equals ``k*``; the other
    draws ``k*`` points from the conditional law and rescales by ``k*/n``.
    ``conditional_p`` swaps in a wrong conditional law, uniform on
    ``[0, conditional_p]`` (points past the rare region belong to no set), as an
    adversarial control.  ``self_test`` replaces the direct side with a second,
    independent conditional sample (a same-distribution control).  Direct
    sampling stops early once ``per_side`` hits.
    """
    if not (0.0 < alpha < 1.0):
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    set_class = config.set_class()
    n = config.n
    k_star = int(round(n * config.p))
    target = max(min_per_side, per_side or 0)

    q = set_class.quantile_q
    cond_seed = config.master_seed ^ _CONDITIONAL_STREAM

    def conditional_side(seed, count, mass=None):
        out = []
        for r in range(count):
            rng = make_rng(seed, r)
            if mass is None:
                y = set_class.sample_conditional(rng, k_star)
            else:
                y = mass * rng.random(k_star)
                y = y[y <= q]
            out.append(set_class.statistic(np.sort(y), n))
        return out

    if self_test:
        count = per_side or min_per_side
        first = conditional_side(config.master_seed, count)
        second = conditional_side(cond_seed, count)
        ks = stats.ks_2samp(first, second)
        return ConditioningReport(
            float(ks.statistic), ks_critical_value(alpha, count, count), (count, count), k_star, alpha
        )

    direct = []
    for r in range(config.replications):
        rng = make_rng(config.master_seed, r)
        x = set_class.sample_mu(rng, n)
        tail = x[set_class.in_rare_region(x)]
        if tail.size == k_star:
            direct.append(set_class.statistic(np.sort(tail), n))
            if per_side is not None and len(direct) >= per_side:
                break

    if len(direct) < target:
        pmf = float(stats.binom.pmf(k_star, n, config.p))
        needed = math.ceil(target / pmf) if pmf > 0 else float("inf")
        raise ExperimentError(
            f"stratum K={k_star} collected {len(direct)} direct samples, need {target}; "
            f"raise replications to about {needed} (P(K={k_star}) = {pmf:.4g})"
        )

    conditional = conditional_side(cond_seed, len(direct), conditional_p)

    ks = stats.ks_2samp(direct, conditional)
    n1, n2 = len(direct), len(conditional)
    return ConditioningReport(
        float(ks.statistic), ks_critical_value(alpha, n1, n2), (n1, n2), k_star, alpha
    )


# relative slack so the boundary choice a = 1 - sqrt(1/(2 n t^2)) passes its own condition
_CONDITION_SLACK = 1e-12


@dataclass(frozen=True)
class SymmetrizationConfig:
    """Ghost-sample experiment on half-lines ``(-inf, s]``, ``s <= p``, under uniform ``mu``.

    ``p = 1`` gives the full class of half-lines on ``[0, 1]``.
    """

    a: float
    t: float
    n: int
    p: float = 1.0
    replications: int = 5000
    master_seed: int = 0
    condition: str = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise ConfigurationError(f"a must lie in (0, 1), got {self.a}")
        if not (self.t > 0.0):
            raise ConfigurationError(f"t must be > 0, got {self.t}")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if not (0.0 < self.p <= 1.0):
            raise ConfigurationError(f"p must lie in (0, 1], got {self.p}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigurationError(f"replications must be >= 1, got {self.replications}")
        spread = (1.0 - self.a) ** 2 * self.n * self.t**2
        if 4.0 * spread >= 2.0 * (1.0 - _CONDITION_SLACK):
            condition = "standard"
        elif spread >= 2.0 * self.p * (1.0 - _CONDITION_SLACK):
            condition = "weak"
        else:
            condition = "violated"
        object.__setattr__(self, "condition", condition)

    @staticmethod
    def maximal_a(n: int, t: float) -> float:
        """Largest ``a`` with ``4 (1 - a)^2 n t^2 >= 2``."""
        return 1.0 - math.sqrt(1.0 / (2.0 * n * t * t))


@dataclass(frozen=True)
class SymmetrizationReport:
    lhs_upper: float
    lhs_lower: float
    rhs: float
    stderr: float
    condition: str
    replications: int

    @property
    def holds(self) -> bool:
        return max(self.lhs_upper, self.lhs_lower) <= 2.0 * self.rhs + 3.0 * self.stderr


def _one_sided_devs(x_tail: np.ndarray, n: int, q: float) -> tuple:
    m = x_tail.size
    if m == 0:
        return 0.0, q
    i = np.arange(1, m + 1)
    upper = max(0.0, float(np.max(i / n - x_tail)))
    lower = max(0.0, q - m / n, float(np.max(x_tail - (i - 1) / n)))
    return upper, lower


def _ghost_gap(x_tail: np.ndarray, ghost_tail: np.ndarray, n: int) -> float:
    """``sup_s (F_n(s) - F'_n(s))`` over half-lines ending inside the rare region."""
    pts = np.concatenate((x_tail, ghost_tail))
    if pts.size == 0:
        return 0.0
    steps = np.concatenate((np.ones(x_tail.size), -np.ones(ghost_tail.size)))
    order = np.argsort(pts, kind="stable")
    return max(0.0, float(np.max(np.cumsum(steps[order]))) / n)


def verify_symmetrization(config: SymmetrizationConfig) -> SymmetrizationReport:
    """Estimate both sides of the ghost-sample inequality by paired draws."""
    if config.condition == "violated":
        raise PreconditionError(
            f"a={config.a}, t={config.t}, n={config.n} satisfy neither "
            "4(1-a)^2 n t^2 >= 2 nor (1-a)^2 n t^2 >= 2p"
        )
    n, q, t, R = config.n, config.p, config.t, config.replications
    thresh = config.a * t
    hits_up = hits_low = hits_ghost = 0
    for r in range(R):
        rng = make_rng(config.master_seed, r)
        x = rng.random(n)
        ghost = rng.random(n)
        x_tail = np.sort(x[x <= q])
        g_tail = np.sort(ghost[ghost <= q])
        upper, lower = _one_sided_devs(x_tail, n, q)
        hits_up += upper >= t
        hits_low += lower >= t
        hits_ghost += _ghost_gap(x_tail, g_tail, n) >= thresh
    lhs_u, lhs_l, rhs = hits_up / R, hits_low / R, hits_ghost / R
    lhs = max(lhs_u, lhs_l)
    stderr = math.sqrt(lhs * (1 - lhs) / R + 4.0 * rhs * (1 - rhs) / R)
    return SymmetrizationReport(lhs_u, lhs_l, rhs, stderr, config.condition, R)
