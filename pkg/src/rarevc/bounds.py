"""Closed-form VC-type deviation bounds, with and without a rare region.

Every shattering coefficient enters through its natural log, so the bounds stay
finite for sample sizes far beyond what ``S_A(2n)`` would allow in linear space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

__all__ = [
    "BoundKind",
    "BoundInput",
    "BoundResult",
    "classic_vc_tail",
    "classic_vc_bound",
    "improved_vc_tail",
    "improved_vc_bound",
    "relative_vc_bound",
    "rare_sym_after_bound",
    "rare_sym_before_bound",
    "bernstein_tail",
    "expected_sup_bound",
    "sauer_log_cap",
    "mcdiarmid_concentration",
    "expectation_jensen_bound",
    "expectation_cond_bound",
    "expectation_route_bound",
    "evaluate",
]

LOG2 = math.log(2.0)
LOG4 = math.log(4.0)
LOG8 = math.log(8.0)


class BoundKind(str, enum.Enum):
    CLASSIC_VC = "classic-vc"
    IMPROVED_VC = "improved-vc"
    RELATIVE_VC = "relative-vc"
    RARE_SYM_AFTER = "rare-sym-after"
    RARE_SYM_BEFORE = "rare-sym-before"
    EXPECTATION_ROUTE = "expectation-route"

    @classmethod
    def parse(cls, value: "str | BoundKind") -> "BoundKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(
            f"unknown bound kind {value!r}; expected one of {[k.value for k in cls]}"
        )


@dataclass(frozen=True)
class BoundInput:
    """Arguments shared by the high-probability bounds.

    ``log_shattering`` maps a nonnegative real ``x`` to ``log S_A(floor(x))``.
    """

    n: int
    p: float
    delta: float
    log_shattering: Callable[[float], float]
    vc_dim: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.p <= 1.0):
            raise ValueError(f"p must lie in (0, 1], got {self.p!r}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.vc_dim is not None and (int(self.vc_dim) != self.vc_dim or self.vc_dim < 1):
            raise ValueError(f"vc_dim must be a positive integer, got {self.vc_dim!r}")

    def log_s(self, x: float) -> float:
        value = float(self.log_shattering(x))
        if not (value >= 0.0) or math.isinf(value):
            raise ValueError(f"log_shattering({x}) returned {value}; expected finite >= 0")
        return value


@dataclass(frozen=True)
class BoundResult:
    total: float
    term_inv_n: float
    term_sqrt: float
    valid: bool
    precondition_note: str = ""


def _invalid(note: str) -> BoundResult:
    return BoundResult(math.nan, math.nan, math.nan, False, note)


def _check_t(t: float) -> None:
    if not (t > 0.0) or math.isinf(t):
        raise ValueError(f"t must be a positive finite real, got {t!r}")


def _check_log_s(log_s: float) -> None:
    if not (log_s >= 0.0):
        raise ValueError(f"log shattering must be >= 0, got {log_s!r}")


def _check_delta(delta: float) -> None:
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")


def _check_p(p: float) -> None:
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p!r}")


def _check_vc_dim(vc_dim: Optional[int]) -> None:
    if vc_dim is None:
        raise ValueError("this bound needs a finite VC dimension")
    if int(vc_dim) != vc_dim or vc_dim < 1:
        raise ValueError(f"vc_dim must be a positive integer, got {vc_dim!r}")


def _capped_exp(log_value: float) -> float:
    return 1.0 if log_value >= 0.0 else math.exp(log_value)


def _round_up_until(total: float, log_tail: Callable[[float], float], log_delta: float) -> float:
    """Step ``total`` up by ulps until its own tail is at most ``delta``.

    When ``log S`` is huge the exponent is a difference of large numbers, so a
    bound rounded half an ulp low can overshoot ``delta`` by ~1e-7 relative.
    """
    for _ in range(64):
        if log_tail(total) <= log_delta:
            break
        total = math.nextafter(total, math.inf)
    return total


def _classic_log_tail(n: int, t: float, log_s2n: float) -> float:
    return LOG4 + log_s2n - n * t * t / 8.0


def classic_vc_tail(n: int, t: float, log_s2n: float) -> float:
    """``min(1, 4 S_A(2n) exp(-n t^2 / 8))``."""
    _check_n(n)
    _check_t(t)
    _check_log_s(log_s2n)
    return _capped_exp(_classic_log_tail(n, t, log_s2n))


def classic_vc_bound(inp: BoundInput) -> BoundResult:
    n = inp.n
    log_s = inp.log_s(2 * n)
    total = 2.0 * math.sqrt((2.0 / n) * (LOG4 - math.log(inp.delta) + log_s))
    total = _round_up_until(total, lambda t: _classic_log_tail(n, t, log_s), math.log(inp.delta))
    return BoundResult(total, 0.0, total, True)


def improved_vc_tail(n: int, t: float, log_s2n: float) -> float:
    """Tail bound from the ghost-sample argument with the largest admissible
    symmetrization constant ``a = 1 - sqrt(1 / (2 n t^2))``.

    Returns 1 when ``n t^2 < 1/2``, where no such constant exists.
    """
    _check_n(n)
    _check_t(t)
    _check_log_s(log_s2n)
    if n * t * t < 0.5:
        return 1.0
    return _capped_exp(_improved_log_tail(n, t, log_s2n))


def _improved_log_tail(n: int, t: float, log_s2n: float) -> float:
    # (n t^2 / 2)(1 - sqrt(2 / (n t^2))) + 1/4 == (sqrt(n t^2 / 2) - 1/2)^2
    root = math.sqrt(n * t * t / 2.0) - 0.5
    return LOG4 + log_s2n - root * root


def improved_vc_bound(inp: BoundInput) -> BoundResult:
    n = inp.n
    log_s = inp.log_s(2 * n)
    total = math.sqrt(1.0 / (2.0 * n)) + math.sqrt(
        (2.0 / n) * (LOG4 - math.log(inp.delta) + log_s)
    )
    total = _round_up_until(total, lambda t: _improved_log_tail(n, t, log_s), math.log(inp.delta))
    return BoundResult(total, 0.0, total, True)


def relative_vc_bound(inp: BoundInput) -> BoundResult:
    n, p, delta = inp.n, inp.p, inp.delta
    threshold = (8.0 / 3.0) * (math.log(3.0) - math.log(delta))
    if n * p < threshold:
        return _invalid(f"needs np >= (8/3) log(3/delta) = {threshold:.6g}, got np = {n * p:.6g}")
    total = 2.0 * math.sqrt((2.0 * p / n) * (math.log(12.0) - math.log(delta) + inp.log_s(2 * n)))
    return BoundResult(total, 0.0, total, True)


def rare_sym_after_bound(inp: BoundInput) -> BoundResult:
    n, p, delta = inp.n, inp.p, inp.delta
    log4d = LOG4 - math.log(delta)
    if n * p < 4.0 * log4d:
        return _invalid(f"needs np >= 4 log(4/delta) = {4.0 * log4d:.6g}, got np = {n * p:.6g}")
    inv_n = (2.0 / (3.0 * n)) * log4d
    sq = math.sqrt(p / n) * (
        math.sqrt(2.0 * log4d)
        + 2.0 * math.sqrt(LOG8 - math.log(delta) + inp.log_s(4.0 * n * p))
        + 1.0
    )
    return BoundResult(inv_n + sq, inv_n, sq, True)


def rare_sym_before_bound(inp: BoundInput) -> BoundResult:
    n, p, delta = inp.n, inp.p, inp.delta
    log8d = LOG8 - math.log(delta)
    if n * p < 2.0 * log8d:
        return _invalid(f"needs np >= 2 log(8/delta) = {2.0 * log8d:.6g}, got np = {n * p:.6g}")
    total = math.sqrt(2.0 * p / n) * (2.0 * math.sqrt(log8d + inp.log_s(8.0 * n * p)) + 1.0)
    return BoundResult(total, 0.0, total, True)


def bernstein_tail(n: int, p: float, t: float) -> float:
    """Two-sided Bernstein bound on ``P(|K - np| >= t)`` for ``K ~ Bin(n, p)``."""
    _check_n(n)
    _check_t(t)
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    log_value = LOG2 - t * t / (2.0 * (n * p * (1.0 - p) + t / 3.0))
    return _capped_exp(log_value)


def expected_sup_bound(n: int, log_s2n: float) -> float:
    """Upper bound on the expected maximal deviation, ``sqrt(2 log(2 S_A(2n)) / n)``."""
    _check_n(n)
    _check_log_s(log_s2n)
    return math.sqrt(2.0 * (LOG2 + log_s2n) / n)


def sauer_log_cap(m: int, vc_dim: int) -> float:
    """Log of the Sauer cap ``(m + 1)^V``."""
    return vc_dim * math.log1p(m)


def mcdiarmid_concentration(n: int, p: float, delta: float, expectation_term: float) -> float:
    _check_n(n)
    _check_p(p)
    _check_delta(delta)
    if not (expectation_term >= 0.0):
        raise ValueError(f"expectation_term must be >= 0, got {expectation_term!r}")
    log1d = -math.log(delta)
    return (2.0 / (3.0 * n)) * log1d + 2.0 * math.sqrt((p / n) * log1d) + expectation_term


def expectation_jensen_bound(n: int, p: float, vc_dim: Optional[int]) -> float:
    _check_n(n)
    _check_p(p)
    _check_vc_dim(vc_dim)
    return math.sqrt((2.0 * p / n) * (LOG2 + vc_dim * math.log1p(2.0 * n * p)))


def expectation_cond_bound(n: int, p: float, vc_dim: Optional[int]) -> float:
    return expectation_jensen_bound(n, p, vc_dim) + math.sqrt(p / n)


def expectation_route_bound(inp: BoundInput) -> BoundResult:
    _check_vc_dim(inp.vc_dim)
    n, p = inp.n, inp.p
    log1d = -math.log(inp.delta)
    inv_n = (2.0 / (3.0 * n)) * log1d
    sq = math.sqrt(2.0 * p / n) * (
        math.sqrt(2.0 * log1d)
        + math.sqrt(LOG2 + inp.vc_dim * math.log1p(2.0 * n * p))
        + math.sqrt(2.0) / 2.0
    )
    return BoundResult(inv_n + sq, inv_n, sq, True)


_DISPATCH = {
    BoundKind.CLASSIC_VC: classic_vc_bound,
    BoundKind.IMPROVED_VC: improved_vc_bound,
    BoundKind.RELATIVE_VC: relative_vc_bound,
    BoundKind.RARE_SYM_AFTER: rare_sym_after_bound,
    BoundKind.RARE_SYM_BEFORE: rare_sym_before_bound,
    BoundKind.EXPECTATION_ROUTE: expectation_route_bound,
}


def evaluate(kind: "BoundKind | str", inp: BoundInput) -> BoundResult:
    return _DISPATCH[BoundKind.parse(kind)](inp)
