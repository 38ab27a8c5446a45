"""Set classes living inside a rare region, plus brute-force combinatorial oracles.

The built-in classes use ``mu = Uniform[0, 1]`` so that ``F(x) = x`` and the rare
region ``[0, q]`` has mass ``p = q``.  Set parameters are floats (dyadic
rationals), so each class is its own countable dense subclass and the supremum
over it is measurable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

__all__ = [
    "SetClass",
    "FiniteClassSpec",
    "shattering_at_real",
    "make_tail_halflines",
    "make_intervals",
    "brute_force_shattering",
    "brute_force_vc_dim",
    "get_class",
    "register_class",
    "CLASS_IDS",
]

MAX_GROUND = 20


@dataclass(frozen=True)
class SetClass:
    """Descriptor of a VC class contained in a rare region of mass ``rare_mass_p``.

    ``statistic(tail_points, n)`` returns the exact maximal deviation
    ``sup_A |nu(A) - mu(A)|`` where ``nu`` puts mass ``1/n`` on every point of
    ``tail_points`` (sorted, all inside the rare region).
    """

    identifier: str
    contains: Callable[[object, float], bool]
    log_shattering: Callable[[int], float]
    vc_dim: Optional[int]
    rare_mass_p: float
    quantile_q: float
    statistic: Callable[[np.ndarray, int], float] = field(repr=False)

    def sample_mu(self, rng: np.random.Generator, size: Optional[int] = None):
        return rng.random(size)

    def sample_conditional(self, rng: np.random.Generator, size: Optional[int] = None):
        return self.quantile_q * rng.random(size)

    def in_rare_region(self, x) -> "bool | np.ndarray":
        return x <= self.quantile_q


def shattering_at_real(set_class: SetClass, x: float) -> float:
    """``log S_A(floor(x))``, with ``S_A(0) = 1``."""
    if not (x >= 0.0):
        raise ValueError(f"x must be >= 0, got {x!r}")
    m = math.floor(x)
    if m == 0:
        return 0.0
    return set_class.log_shattering(m)


def _check_mass(p: float) -> None:
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p!r}")


def _halfline_log_shattering(m: int) -> float:
    return math.log1p(m)


def _interval_log_shattering(m: int) -> float:
    # Python ints keep m(m+1)/2 + 1 exact for any m
    m = int(m)
    return math.log(m * (m + 1) // 2 + 1)


def make_tail_halflines(p: float) -> SetClass:
    """Half-lines ``(-inf, t]`` with ``t <= Q(p) = p`` under uniform ``mu``."""
    _check_mass(p)
    from .empirical import sup_deviation_halflines

    q = float(p)

    def contains(t, x):
        return t <= q and x <= t

    return SetClass(
        identifier="tail-halflines",
        contains=contains,
        log_shattering=_halfline_log_shattering,
        vc_dim=1,
        rare_mass_p=q,
        quantile_q=q,
        statistic=lambda pts, n: sup_deviation_halflines(pts, n, q, q),
    )


def make_intervals(p: float) -> SetClass:
    """Closed intervals ``[a, b]`` with ``0 <= a <= b <= p`` under uniform ``mu``."""
    _check_mass(p)
    from .empirical import sup_deviation_intervals

    q = float(p)

    def contains(ab, x):
        a, b = ab
        return 0.0 <= a <= b <= q and a <= x <= b

    return SetClass(
        identifier="tail-intervals",
        contains=contains,
        log_shattering=_interval_log_shattering,
        vc_dim=2,
        rare_mass_p=q,
        quantile_q=q,
        statistic=lambda pts, n: sup_deviation_intervals(pts, n, q),
    )


_REGISTRY: dict[str, Callable[[float], SetClass]] = {
    "tail-halflines": make_tail_halflines,
    "tail-intervals": make_intervals,
}

CLASS_IDS = tuple(_REGISTRY)


def register_class(identifier: str, factory: Callable[[float], SetClass]) -> None:
    """Hook for classes built on another ``mu``; ``factory(p)`` must return a SetClass."""
    _REGISTRY[identifier] = factory


def get_class(identifier: str, p: float) -> SetClass:
    try:
        factory = _REGISTRY[identifier]
    except KeyError:
        raise KeyError(f"unknown class {identifier!r}; known: {sorted(_REGISTRY)}") from None
    return factory(p)


@dataclass(frozen=True)
class FiniteClassSpec:
    """A finite class given by explicit point subsets of a finite ground set."""

    ground_points: tuple
    sets: tuple

    def __init__(self, ground_points: Sequence[Hashable], sets: Sequence[Sequence[Hashable]]):
        ground = tuple(ground_points)
        if len(set(ground)) != len(ground):
            raise ValueError("ground points must be distinct")
        frozen = tuple(frozenset(s) for s in sets)
        if not frozen:
            raise ValueError("a class needs at least one set")
        ground_set = set(ground)
        for s in frozen:
            if not s <= ground_set:
                raise ValueError(f"set {sorted(s, key=repr)} is not inside the ground points")
        object.__setattr__(self, "ground_points", ground)
        object.__setattr__(self, "sets", frozen)


def brute_force_shattering(spec: FiniteClassSpec, points: Sequence[Hashable]) -> int:
    """Number of distinct traces ``{points} ∩ A`` as ``A`` ranges over the class."""
    pts = frozenset(points)
    if not pts:
        return 1
    return len({s & pts for s in spec.sets})


def brute_force_vc_dim(spec: FiniteClassSpec) -> int:
    ground = spec.ground_points
    if len(ground) > MAX_GROUND:
        raise OverflowError(
            f"brute-force VC dimension is limited to {MAX_GROUND} ground points, got {len(ground)}"
        )
    # shattering is hereditary: if no k-subset is shattered, no larger one is
    best = 0
    for k in range(1, len(ground) + 1):
        if len(spec.sets) < 2**k:
            break
        if any(brute_force_shattering(spec, c) == 2**k for c in itertools.combinations(ground, k)):
            best = k
        else:
            break
    return best
