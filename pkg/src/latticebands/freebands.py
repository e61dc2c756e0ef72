"""Closed-form levels of the zero-potential operator and their local geometry.

With zero potential the fiber eigenvalues are known explicitly: for each
frequency offset l the level at reduced phase theta is

    e_l(theta) = sum_i 2 cos(2 pi (theta_i + l_i / q_i)),

and the d free bands machinery (gradient, directional curvature, energy
witnesses) all reduce to trigonometry on these levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bandedges
from .errors import DomainError
from .floquet import zero_potential
from .lattice import (
    FourierIndex,
    PeriodVector,
    Phase,
    check_index,
    theta_values,
)

__all__ = [
    "WitnessResult",
    "free_level",
    "free_gradient",
    "second_order_coeff",
    "construct_theta_for_energy",
    "interior_witness",
]

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class WitnessResult:
    """Certificate that an energy lies strictly inside band `band_index`.

    margin is min(band max - E, E - band min) over the sampled table; a
    positive margin certifies strict interiority because sampled extrema are
    attained band values.  theta_witness is the phase attaining the edge
    that realizes the margin.  touching_at_zero marks the all-even-period
    outcome at E = 0, where the middle bands meet in a single point and no
    interior witness exists.
    """

    band_index: int
    theta_witness: Phase
    margin: float
    touching_at_zero: bool = False


def _full_angles(q: PeriodVector, theta, l) -> list[float]:
    th = theta_values(theta)
    if len(th) != q.d:
        raise DomainError(f"phase has {len(th)} coordinates, expected {q.d}")
    lv = check_index(q, l)
    return [th[i] + lv[i] / q.q[i] for i in range(q.d)]


def free_level(q: PeriodVector, theta: Phase | Sequence[float], l: FourierIndex | Sequence[int]) -> float:
    """Closed-form free level; 1-periodic in each full-circle coordinate."""
    return sum(2.0 * math.cos(2.0 * math.pi * x) for x in _full_angles(q, theta, l))


def free_gradient(q: PeriodVector, theta: Phase | Sequence[float], l: FourierIndex | Sequence[int]) -> np.ndarray:
    """Gradient of the free level: component i is -4 pi sin(2 pi x_i)."""
    return np.array([-4.0 * math.pi * math.sin(2.0 * math.pi * x) for x in _full_angles(q, theta, l)])


def _check_unit(beta: Sequence[float]) -> np.ndarray:
    b = np.asarray(beta, dtype=float)
    if abs(float(np.linalg.norm(b)) - 1.0) > _UNIT_TOL:
        raise DomainError(f"direction must be a unit vector, got norm {np.linalg.norm(b)}")
    return b


def second_order_coeff(
    q: PeriodVector,
    theta: Phase | Sequence[float],
    l: FourierIndex | Sequence[int],
    beta: Sequence[float],
) -> float:
    """Directional curvature of the free level along a unit direction beta.

    Returns the coefficient S of t^2/2 in e(theta + t beta), namely
    -4 pi^2 sum_i 2 cos(2 pi x_i) beta_i^2.
    """
    b = _check_unit(beta)
    if b.size != q.d:
        raise DomainError(f"direction has {b.size} coordinates, expected {q.d}")
    xs = _full_angles(q, theta, l)
    return float(
        -4.0 * math.pi**2 * sum(2.0 * math.cos(2.0 * math.pi * x) * bi**2 for x, bi in zip(xs, b))
    )


def construct_theta_for_energy(d: int, E: float) -> np.ndarray:
    """Full-circle phase at which some free level equals E with zero sine sum.

    The returned x in [0, 1)^d satisfies, up to roundoff,

        sum_i 2 cos(2 pi x_i) = E,   sum_i sin(2 pi x_i) = 0,
        sum_i sin^2(2 pi x_i) > 0.

    Construction: pair coordinates as (a, 1 - a) so sines cancel, choosing
    cos(2 pi a) to hit the target; an odd leftover coordinate is parked at 0
    (contributing +2) or 1/2 (contributing -2) depending on the energy
    range, and negative energies are handled by shifting every coordinate by
    a half period, which flips all cosines and sines.
    """
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    E = float(E)
    if not abs(E) < 2 * d:
        raise DomainError(f"energy must satisfy |E| < {2 * d}, got {E}")
    if E < 0:
        return (construct_theta_for_energy(d, -E) + 0.5) % 1.0
    if d % 2 == 0:
        pairs = d // 2
        ratio = E / (4.0 * pairs)
        extra: list[float] = []
    else:
        pairs = (d - 1) // 2
        if E >= 2.0:
            ratio = (E - 2.0) / (4.0 * pairs)
            extra = [0.0]
        else:
            ratio = (E + 2.0) / (4.0 * pairs)
            extra = [0.5]
    a = math.acos(ratio) / (2.0 * math.pi)
    return np.array([a] * pairs + [1.0 - a] * pairs + extra)


def interior_witness(
    q: PeriodVector,
    E: float,
    grid: bandedges.GridSpec | None = None,
    table: bandedges.BandTable | None = None,
    workers: int = 1,
) -> WitnessResult:
    """Find a band holding E strictly inside, with a sampled certificate.

    Scans certified free band edges and picks the band with the largest
    margin (smallest band index on ties).  A nonpositive margin means the
    sampling could not certify interiority at this energy.

    At E = 0 with all periods even no band can hold 0 inside: the fiber
    spectrum is symmetric under negation at every phase, so the middle
    bands pinch to a point there.  That case reports touching_at_zero with
    zero margin instead of failing.
    """
    if not abs(E) < 2 * q.d:
        raise DomainError(f"energy must satisfy |E| < {2 * q.d}, got {E}")
    if table is None:
        if grid is None:
            grid = _default_witness_grid(q)
        table = bandedges.certified_edges(q, zero_potential(q), grid, workers=workers)
    if E == 0.0 and q.all_even:
        k = q.Q // 2
        return WitnessResult(k, table.theta_min(k), 0.0, touching_at_zero=True)
    best_k = 1
    best_margin = -math.inf
    for k in range(1, table.Q + 1):
        margin = min(table.band_max(k) - E, E - table.band_min(k))
        if margin > best_margin:
            best_margin = margin
            best_k = k
    up = table.band_max(best_k) - E
    down = E - table.band_min(best_k)
    theta = table.theta_max(best_k) if up <= down else table.theta_min(best_k)
    return WitnessResult(best_k, theta, float(best_margin), touching_at_zero=False)


def _default_witness_grid(q: PeriodVector, budget: int = 4096) -> bandedges.GridSpec:
    m = int(budget ** (1.0 / q.d))
    m -= m % 2
    m = max(2, m)
    while m**q.d > budget:
        m = max(2, m - 2)
    return bandedges.GridSpec((m,) * q.d, budget=budget)
