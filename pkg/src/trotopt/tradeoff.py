"""Step-number tradeoffs for faulty product-formula simulation.

With per-step noise the distance to the ideal evolution splits into a
splitting error that shrinks with the step number and an accumulated noise
cost that grows with it:

    bound(n) = step_cost / n**(order - 1) + noise_cost * n

The coefficients come from channel norms of the second-order defect maps:
``commutator_strength`` measures how badly the terms fail to commute and
``jitter_strength`` how much one timing insertion hurts.  For timing jitter
over total time ``t`` with width ``sigma``,

    step_cost = commutator_strength * t**2 / 2,   noise_cost = jitter_strength * sigma**2

and for per-step depolarizing at rate ``p`` the noise cost is the full
depolarizing distance ``p * (2 - 2/dim**2)`` instead.  Everything in this
module is closed-form arithmetic on those coefficients plus the channel-norm
evaluations; nothing here simulates circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import commutator_defect_map, jitter_defect_map
from .metrics import JDistance, Metric, channel_norm

ORDER_SCAN_RANGE = range(2, 9)


@dataclass(frozen=True)
class TradeoffConstants:
    """Coefficients of one tradeoff curve.

    ``step_cost`` multiplies ``n**(1 - order)``, ``noise_cost`` multiplies
    ``n``.  The defect strengths, metric and dimension they were derived
    from ride along for reporting; they are optional because the curve
    itself only needs the two costs.
    """

    step_cost: float
    noise_cost: float
    order: int = 2
    commutator_strength: float | None = None
    jitter_strength: float | None = None
    metric: Metric | None = None
    dim: int | None = None

    def __post_init__(self):
        if self.step_cost < 0.0:
            raise ValueError(f"step_cost must be >= 0, got {self.step_cost}")
        if self.noise_cost < 0.0:
            raise ValueError(f"noise_cost must be >= 0, got {self.noise_cost}")
        if self.order < 2:
            raise ValueError(f"order must be >= 2, got {self.order}")
        for name in ("commutator_strength", "jitter_strength"):
            val = getattr(self, name)
            if val is not None and val < 0.0:
                raise ValueError(f"{name} must be >= 0, got {val}")


def defect_strengths(
    terms, metric: Metric = JDistance(), sdp_tol: float = 1e-7
) -> tuple[float, float]:
    """Channel norms of the two per-step defect maps.

    Returns ``(commutator_strength, jitter_strength)``: the chosen-metric
    norms of the splitting defect and of the single-insertion timing defect.
    The first vanishes when all terms commute.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("at least one Hamiltonian term is required")
    return (
        channel_norm(commutator_defect_map(terms), metric, sdp_tol),
        channel_norm(jitter_defect_map(terms), metric, sdp_tol),
    )


def pairwise_commutator_strengths(
    terms, metric: Metric = JDistance(), sdp_tol: float = 1e-7
) -> list[float]:
    """Norm of each pairwise-commutator defect separately.

    Their sum upper-bounds ``commutator_strength`` by the triangle
    inequality; there are at most ``k*(k-1)/2`` of them.
    """
    terms = list(terms)
    out = []
    for j in range(len(terms)):
        for l in range(j + 1, len(terms)):
            out.append(
                channel_norm(commutator_defect_map([terms[j], terms[l]]), metric, sdp_tol)
            )
    return out


def _check_costs(step_cost: float, noise_cost: float, order: int):
    if step_cost <= 0.0:
        raise ValueError(f"step_cost must be > 0, got {step_cost}")
    if noise_cost <= 0.0:
        raise ValueError(f"noise_cost must be > 0, got {noise_cost}")
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")


def optimal_steps(step_cost: float, noise_cost: float, order: int = 2) -> float:
    """Real-valued minimizer of the tradeoff curve.

    Equals ``(step_cost * (order - 1) / noise_cost)**(1 / order)``; for
    order 2 this is ``sqrt(step_cost / noise_cost)``.
    """
    _check_costs(step_cost, noise_cost, order)
    return (step_cost * (order - 1) / noise_cost) ** (1.0 / order)


def distance_at_optimum(step_cost: float, noise_cost: float, order: int = 2) -> float:
    """Bound value at the real-valued optimal step number.

    For order 2 this is ``2 * sqrt(step_cost * noise_cost)``.
    """
    _check_costs(step_cost, noise_cost, order)
    n = optimal_steps(step_cost, noise_cost, order)
    return noise_cost * n * order / (order - 1)


def best_integer_steps(step_cost: float, noise_cost: float) -> int | None:
    """Positive integer minimizing ``step_cost / n + noise_cost * n``.

    Evaluates the bound at the floor and ceiling of the real optimum and
    keeps the better one; an exact tie goes to the floor (fewer gates).
    Returns ``None`` when ``noise_cost`` is zero: the bound then decreases
    forever and there is no finite optimum.
    """
    if step_cost <= 0.0:
        raise ValueError(f"step_cost must be > 0, got {step_cost}")
    if noise_cost < 0.0:
        raise ValueError(f"noise_cost must be >= 0, got {noise_cost}")
    if noise_cost == 0.0:
        return None
    n_real = math.sqrt(step_cost / noise_cost)
    lo = max(1, math.floor(n_real))
    hi = math.ceil(n_real)
    if hi <= lo:
        return lo
    if step_cost / lo + noise_cost * lo <= step_cost / hi + noise_cost * hi:
        return lo
    return hi


def jitter_costs(
    commutator_strength: float, jitter_strength: float, t: float, sigma: float
) -> tuple[float, float]:
    """Tradeoff coefficients for timing jitter of width ``sigma`` over time ``t``."""
    for name, val in (
        ("commutator_strength", commutator_strength),
        ("jitter_strength", jitter_strength),
        ("t", t),
        ("sigma", sigma),
    ):
        if val < 0.0:
            raise ValueError(f"{name} must be >= 0, got {val}")
    return commutator_strength * t * t / 2.0, jitter_strength * sigma * sigma


def max_simulation_time(
    distance_budget: float,
    commutator_strength: float,
    jitter_strength: float,
    sigma: float,
) -> float:
    """Longest time simulable under jitter before the optimal-step bound
    exceeds ``distance_budget``.

    Inverts ``distance_at_optimum`` in ``t``:
    ``t_max = budget / (sigma * sqrt(2 * commutator_strength * jitter_strength))``.
    """
    for name, val in (
        ("distance_budget", distance_budget),
        ("commutator_strength", commutator_strength),
        ("jitter_strength", jitter_strength),
        ("sigma", sigma),
    ):
        if val <= 0.0:
            raise ValueError(f"{name} must be > 0, got {val}")
    return distance_budget / (sigma * math.sqrt(2.0 * commutator_strength * jitter_strength))


def _check_depolarizing(p: float, t: float, dim: int):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing rate must be in [0, 1], got {p}")
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")


def depolarizing_costs(
    commutator_strength: float, p: float, t: float, dim: int, large_d: bool = False
) -> tuple[float, float]:
    """Tradeoff coefficients for per-step depolarizing noise.

    The surviving fraction ``1 - p`` discounts the splitting error; each
    step pays the full depolarizing distance ``p * (2 - 2/dim**2)``, or
    ``2 * p`` with ``large_d`` set, which drops the ``1/dim**2`` correction.
    """
    if commutator_strength < 0.0:
        raise ValueError(f"commutator_strength must be >= 0, got {commutator_strength}")
    _check_depolarizing(p, t, dim)
    weight = 2.0 if large_d else 2.0 - 2.0 / (dim * dim)
    return (1.0 - p) * commutator_strength * t * t / 2.0, p * weight


def depolarizing_optimal_steps(
    commutator_strength: float, p: float, t: float, dim: int, large_d: bool = False
) -> float:
    """Real-valued optimal step count under per-step depolarizing noise.

    Degenerate rates get sentinels: ``p = 0`` returns ``inf`` (no finite
    optimum) and ``p = 1`` returns ``0.0`` (the channel is complete noise
    whatever the step count).
    """
    step_cost, noise_cost = depolarizing_costs(commutator_strength, p, t, dim, large_d)
    if p == 0.0 or noise_cost == 0.0:
        return math.inf
    if p == 1.0 or step_cost == 0.0:
        return 0.0
    return optimal_steps(step_cost, noise_cost)


def depolarizing_distance_at_optimum(
    commutator_strength: float, p: float, t: float, dim: int, large_d: bool = False
) -> float:
    """Bound value at the depolarizing optimum; ``2*t*sqrt(A*p*(1-p))`` for
    large ``dim`` with ``A`` the commutator strength.

    Sentinels at degenerate rates: ``p = 0`` gives 0 (splitting error alone,
    driven to zero), ``p = 1`` gives the single-step noise cost.
    """
    step_cost, noise_cost = depolarizing_costs(commutator_strength, p, t, dim, large_d)
    if p == 0.0 or noise_cost == 0.0:
        return 0.0
    if p == 1.0 or step_cost == 0.0:
        return noise_cost
    return distance_at_optimum(step_cost, noise_cost)


def bound_curve(n, constants: TradeoffConstants):
    """Evaluate the tradeoff bound at integer step count(s) ``n``.

    ``n`` may be a scalar or an array; every entry must be >= 1.
    """
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("step count must be >= 1")
    vals = constants.step_cost / n ** (constants.order - 1) + constants.noise_cost * n
    return float(vals) if vals.ndim == 0 else vals


def decoherence_bound(
    n, t: float, gamma: float, a: float, commutator_strength: float, dim: int
) -> float:
    """Bound for end-of-run decoherence at rate ``gamma`` with speedup ``a``.

    The wall-clock exposure is ``t / a``, giving an error weight
    ``p = 1 - exp(-gamma * t / a)`` that does not depend on the step count:
    the bound decreases in ``n`` forever, so there is no finite optimum, and
    running faster (larger ``a``) always helps.
    """
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    if a <= 0.0:
        raise ValueError(f"a must be > 0, got {a}")
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if commutator_strength < 0.0:
        raise ValueError(f"commutator_strength must be >= 0, got {commutator_strength}")
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("step count must be >= 1")
    p = 1.0 - math.exp(-gamma * t / a)
    vals = (1.0 - p) * commutator_strength * t * t / (2.0 * n) + p * (
        2.0 - 2.0 / (dim * dim)
    )
    return float(vals) if vals.ndim == 0 else vals


def best_order(step_cost_of, noise_cost_of, orders=ORDER_SCAN_RANGE):
    """Scan over splitting orders with caller-supplied cost functions.

    ``step_cost_of(order)`` and ``noise_cost_of(order)`` must return the two
    coefficients for that order; the scan returns
    ``(order, real-valued steps, bound at optimum)`` for the order with the
    smallest optimal bound.  Building the higher-order formulas themselves
    is up to the caller.
    """
    orders = list(orders)
    if not orders:
        raise ValueError("at least one order is required")
    best = None
    for order in orders:
        if order < 2:
            raise ValueError(f"order must be >= 2, got {order}")
        step_cost = step_cost_of(order)
        noise_cost = noise_cost_of(order)
        dist = distance_at_optimum(step_cost, noise_cost, order)
        if best is None or dist < best[2]:
            best = (order, optimal_steps(step_cost, noise_cost, order), dist)
    return best


def jitter_tradeoff(
    terms,
    t: float,
    sigma: float,
    metric: Metric = JDistance(),
    sdp_tol: float = 1e-7,
) -> TradeoffConstants:
    """Full tradeoff coefficients for timing jitter on the given terms."""
    strengths = defect_strengths(terms, metric, sdp_tol)
    step_cost, noise_cost = jitter_costs(strengths[0], strengths[1], t, sigma)
    return TradeoffConstants(
        step_cost=step_cost,
        noise_cost=noise_cost,
        commutator_strength=strengths[0],
        jitter_strength=strengths[1],
        metric=metric,
        dim=np.asarray(terms[0]).shape[0],
    )


def depolarizing_tradeoff(
    terms,
    p: float,
    t: float,
    metric: Metric = JDistance(),
    large_d: bool = False,
    sdp_tol: float = 1e-7,
) -> TradeoffConstants:
    """Full tradeoff coefficients for per-step depolarizing noise."""
    terms = list(terms)
    strengths = defect_strengths(terms, metric, sdp_tol)
    dim = np.asarray(terms[0]).shape[0]
    step_cost, noise_cost = depolarizing_costs(strengths[0], p, t, dim, large_d)
    return TradeoffConstants(
        step_cost=step_cost,
        noise_cost=noise_cost,
        commutator_strength=strengths[0],
        jitter_strength=strengths[1],
        metric=metric,
        dim=dim,
    )
