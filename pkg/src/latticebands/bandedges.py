"""Certified band edges, overlaps, and spectrum assembly on phase grids.

Band k (1-based, k = 1 the largest eigenvalue) traces the k-th fiber
eigenvalue over the reduced phase torus.  Sampled extrema are attained
values, so they bound each band from the inside; a Lipschitz argument turns
the grid spacing into an outer enclosure radius (the slack).  Everything
here is deterministic: reductions use a total order on (value, node index),
so results do not depend on evaluation order or worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .floquet import Potential, _hopping_structure, zero_potential
from .lattice import PeriodVector, Phase

__all__ = [
    "GridSpec",
    "BandTable",
    "Interval",
    "SpectrumReport",
    "CqEstimate",
    "default_grid",
    "lipschitz_constant",
    "certified_slack",
    "sample_bands",
    "certified_edges",
    "iter_band_rows",
    "overlaps",
    "assemble_spectrum",
    "overlap_after_potential",
    "estimate_cq",
    "min_abs_eigenvalue",
]


@dataclass(frozen=True)
class GridSpec:
    """Per-direction sample counts over the reduced torus plus refinement knobs."""

    m: tuple[int, ...]
    refine_rounds: int = 10
    shrink: float = 0.5
    budget: int = 1 << 16

    def __post_init__(self) -> None:
        vals = tuple(int(x) for x in self.m)
        object.__setattr__(self, "m", vals)
        if any(mi < 2 for mi in vals):
            raise ConfigurationError(f"need at least 2 samples per direction, got {vals}")
        if self.refine_rounds < 0:
            raise ConfigurationError("refine_rounds must be nonnegative")
        if not 0.0 < self.shrink < 1.0:
            raise ConfigurationError(f"shrink factor must be in (0, 1), got {self.shrink}")
        if self.n_nodes > self.budget:
            raise ConfigurationError(
                f"grid has {self.n_nodes} nodes, over the budget of {self.budget}"
            )

    @property
    def n_nodes(self) -> int:
        return math.prod(self.m)

    def steps(self, q: PeriodVector) -> tuple[float, ...]:
        """Grid spacing per direction: coordinate i advances by 1/(q_i m_i)."""
        if len(self.m) != q.d:
            raise ConfigurationError(f"grid has {len(self.m)} directions, expected {q.d}")
        return tuple(1.0 / (qi * mi) for qi, mi in zip(q.q, self.m))


@dataclass(frozen=True, eq=False)
class BandTable:
    """Sampled extrema of every band with their locations and enclosure slack.

    Row k-1 holds band k.  True edges are certified to lie within
    [min_values - slack, max_values + slack]; the sampled values themselves
    are attained, hence inside the true band.
    """

    q: PeriodVector
    grid: GridSpec
    min_values: np.ndarray
    max_values: np.ndarray
    argmin: tuple[Phase, ...]
    argmax: tuple[Phase, ...]
    slack: float
    refined: bool = False

    @property
    def Q(self) -> int:
        return self.q.Q

    def _check(self, k: int) -> int:
        if not 1 <= k <= self.Q:
            raise DomainError(f"band index {k} out of range 1..{self.Q}")
        return k - 1

    def band_min(self, k: int) -> float:
        return float(self.min_values[self._check(k)])

    def band_max(self, k: int) -> float:
        return float(self.max_values[self._check(k)])

    def theta_min(self, k: int) -> Phase:
        return self.argmin[self._check(k)]

    def theta_max(self, k: int) -> Phase:
        return self.argmax[self._check(k)]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise DomainError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Merged band intervals with the overlap table and gap certification."""

    q: PeriodVector
    intervals: tuple[Interval, ...]
    overlaps: tuple[float, ...]
    gaps: tuple[Interval, ...]
    certified: bool
    slack: float
    merge_tol: float
    grid: GridSpec


@dataclass(frozen=True, eq=False)
class CqEstimate:
    """Certified coupling threshold below which no new gap can open.

    For all-even periods the band pair(s) whose overlap segment collapses
    onto 0 are excluded (they touch by symmetry and never contribute), and
    touching_at_zero records that exclusion.
    """

    c_q: float
    touching_at_zero: bool
    inconclusive: bool
    min_overlap: float
    overlaps: tuple[float, ...]
    excluded_pairs: tuple[int, ...]
    slack: float


def lipschitz_constant(q: PeriodVector, axis: int, free: bool = False) -> float:
    """Per-coordinate Lipschitz bound for every band function.

    The general bound 4 pi q_i follows from a norm estimate on the phase
    derivative of the fiber matrix.  With zero potential every band is a
    pointwise sort of smooth explicit levels, each 4 pi Lipschitz per
    coordinate, so the tighter constant applies.
    """
    if not 0 <= axis < q.d:
        raise DomainError(f"axis {axis} out of range for d={q.d}")
    if free:
        return 4.0 * math.pi
    return 4.0 * math.pi * q.q[axis]


def certified_slack(q: PeriodVector, grid: GridSpec, free: bool = False) -> float:
    """Enclosure radius: sum over directions of L_i times half the grid step."""
    steps = grid.steps(q)
    return sum(lipschitz_constant(q, i, free=free) * h / 2.0 for i, h in enumerate(steps))


def default_grid(q: PeriodVector, budget: int = 1 << 16, refine_rounds: int = 10) -> GridSpec:
    """Largest even per-direction sample count that fits the node budget."""
    if budget < 2**q.d:
        raise ConfigurationError(f"budget {budget} too small for d={q.d}")
    m = int(budget ** (1.0 / q.d))
    m -= m % 2
    m = max(2, m)
    while m**q.d > budget:
        m = max(2, m - 2)
    return GridSpec((m,) * q.d, refine_rounds=refine_rounds, budget=budget)


def _chunk_size(Q: int) -> int:
    return max(32, min(4096, (1 << 22) // (Q * Q)))


def _chunk_values(q: PeriodVector, V: Potential, grid: GridSpec, start: int, stop: int):
    """Eigenvalues (descending) for grid nodes [start, stop), row-major order."""
    steps = grid.steps(q)
    idx = np.arange(start, stop)
    coords = np.unravel_index(idx, grid.m)
    thetas = np.stack([coords[i] * steps[i] for i in range(q.d)], axis=1)
    interior, wraps = _hopping_structure(q.q)
    n = stop - start
    Q = q.Q
    M = np.empty((n, Q, Q), dtype=complex)
    M[:] = interior
    for i, qi in enumerate(q.q):
        p = np.exp(2j * math.pi * qi * thetas[:, i])
        M += p[:, None, None] * wraps[i]
        M += np.conj(p)[:, None, None] * wraps[i].T
    diag = np.arange(Q)
    M[:, diag, diag] += V.values
    vals = np.linalg.eigvalsh(M)
    return thetas, vals[:, ::-1]


def _iter_chunks(q: PeriodVector, V: Potential, grid: GridSpec, workers: int):
    N = grid.n_nodes
    cs = _chunk_size(q.Q)
    ranges = [(s, min(s + cs, N)) for s in range(0, N, cs)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(_chunk_values, q, V, grid, a, b) for a, b in ranges]
            for (a, b), fut in zip(ranges, futures):
                yield a, fut.result()
    else:
        for a, b in ranges:
            yield a, _chunk_values(q, V, grid, a, b)


def _node_phase(q: PeriodVector, grid: GridSpec, node: int) -> Phase:
    steps = grid.steps(q)
    coords = np.unravel_index(node, grid.m)
    return Phase(tuple(float(coords[i]) * steps[i] for i in range(q.d)))


def sample_bands(q: PeriodVector, V: Potential, grid: GridSpec, workers: int = 1) -> BandTable:
    """Sweep the grid and record per-band extrema.

    Parameters
    ----------
    q, V : periods and potential (V must match q).
    grid : GridSpec
        Node j of direction i sits at j/(q_i m_i), so the nodes tile the
        reduced torus with spacing h_i = 1/(q_i m_i).
    workers : int
        Worker threads for the sweep.  The reduction orders ties by the
        row-major node index, so the result is independent of scheduling.

    Returns
    -------
    BandTable
        Extrema, their phases (lexicographically smallest on ties), and the
        Lipschitz slack for this grid.
    """
    if V.q != q:
        raise DomainError(f"potential periods {V.q.q} do not match {q.q}")
    grid.steps(q)  # validates dimension match
    Q = q.Q
    min_vals = np.full(Q, np.inf)
    max_vals = np.full(Q, -np.inf)
    min_idx = np.zeros(Q, dtype=int)
    max_idx = np.zeros(Q, dtype=int)
    cols = np.arange(Q)
    for start, (_, vals) in _iter_chunks(q, V, grid, workers):
        loc = vals.argmin(axis=0)
        cand = vals[loc, cols]
        better = cand < min_vals
        min_vals[better] = cand[better]
        min_idx[better] = start + loc[better]
        loc = vals.argmax(axis=0)
        cand = vals[loc, cols]
        better = cand > max_vals
        max_vals[better] = cand[better]
        max_idx[better] = start + loc[better]
    free = V.sup_norm == 0.0
    slack = certified_slack(q, grid, free=free)
    min_vals.flags.writeable = False
    max_vals.flags.writeable = False
    return BandTable(
        q=q,
        grid=grid,
        min_values=min_vals,
        max_values=max_vals,
        argmin=tuple(_node_phase(q, grid, int(i)) for i in min_idx),
        argmax=tuple(_node_phase(q, grid, int(i)) for i in max_idx),
        slack=slack,
    )


def _band_value(q: PeriodVector, V: Potential, theta: Sequence[float], k: int) -> float:
    from .floquet import assemble, eigenvalues_sorted_desc

    ev = eigenvalues_sorted_desc(assemble(q, V, theta))
    return float(ev.values[k - 1])


def _refine_extremum(
    q: PeriodVector,
    V: Potential,
    grid: GridSpec,
    k: int,
    theta0: Phase,
    value0: float,
    maximize: bool,
) -> tuple[Phase, float]:
    """Coordinate descent from a grid extremum with geometrically shrinking steps.

    Only strict improvements are accepted, so the sampled extremum can only
    tighten; phases fold back onto the torus (band functions are periodic
    with period 1/q_i per coordinate).
    """
    th = list(theta0.theta)
    best = value0
    steps = list(grid.steps(q))
    for _ in range(grid.refine_rounds):
        for i in range(q.d):
            width = 1.0 / q.q[i]
            for sgn in (1.0, -1.0):
                cand = list(th)
                cand[i] = (cand[i] + sgn * steps[i]) % width
                v = _band_value(q, V, cand, k)
                if (maximize and v > best) or (not maximize and v < best):
                    th = cand
                    best = v
        steps = [s * grid.shrink for s in steps]
    return Phase(tuple(th)), best


def certified_edges(q: PeriodVector, V: Potential, grid: GridSpec, workers: int = 1) -> BandTable:
    """Grid sweep plus local refinement of every band extremum.

    The slack is inherited from the grid; refinement only moves sampled
    extrema outward (toward the true edges), never loosens the enclosure.
    """
    table = sample_bands(q, V, grid, workers=workers)
    if grid.refine_rounds == 0:
        return table
    Q = q.Q
    min_vals = table.min_values.copy()
    max_vals = table.max_values.copy()
    argmin = list(table.argmin)
    argmax = list(table.argmax)
    for k in range(1, Q + 1):
        argmin[k - 1], min_vals[k - 1] = _refine_extremum(
            q, V, grid, k, argmin[k - 1], min_vals[k - 1], maximize=False
        )
        argmax[k - 1], max_vals[k - 1] = _refine_extremum(
            q, V, grid, k, argmax[k - 1], max_vals[k - 1], maximize=True
        )
    min_vals.flags.writeable = False
    max_vals.flags.writeable = False
    return BandTable(
        q=q,
        grid=grid,
        min_values=min_vals,
        max_values=max_vals,
        argmin=tuple(argmin),
        argmax=tuple(argmax),
        slack=table.slack,
        refined=True,
    )


def iter_band_rows(q: PeriodVector, V: Potential, grid: GridSpec) -> Iterator[tuple[tuple[float, ...], np.ndarray]]:
    """Yield (theta, descending eigenvalues) per grid node in row-major order."""
    for _, (thetas, vals) in _iter_chunks(q, V, grid, workers=1):
        for j in range(vals.shape[0]):
            yield tuple(float(x) for x in thetas[j]), vals[j]


def overlaps(table: BandTable) -> tuple[float, ...]:
    """Per-pair overlap: max of band k+1 minus min of band k, k = 1..Q-1."""
    return tuple(
        float(table.max_values[k + 1] - table.min_values[k]) for k in range(table.Q - 1)
    )


def assemble_spectrum(table: BandTable, merge_tol: float | None = None) -> SpectrumReport:
    """Merge band intervals into disjoint spectrum intervals plus gap list.

    merge_tol defaults to 2 * slack, the smallest sound choice: two sampled
    intervals that close could belong to bands that truly meet.  Smaller
    tolerances are rejected.
    """
    slack = table.slack
    tol = 2.0 * slack if merge_tol is None else float(merge_tol)
    if tol < 2.0 * slack:
        raise ConfigurationError(
            f"merge tolerance {tol} below the sound minimum {2.0 * slack}"
        )
    spans = sorted(
        (float(lo), float(hi)) for lo, hi in zip(table.min_values, table.max_values)
    )
    merged: list[list[float]] = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    intervals = tuple(Interval(lo, hi) for lo, hi in merged)
    gaps = tuple(
        Interval(intervals[i].hi, intervals[i + 1].lo) for i in range(len(intervals) - 1)
    )
    certified = all(g.width > 2.0 * slack for g in gaps)
    return SpectrumReport(
        q=table.q,
        intervals=intervals,
        overlaps=overlaps(table),
        gaps=gaps,
        certified=certified,
        slack=slack,
        merge_tol=tol,
        grid=table.grid,
    )


def overlap_after_potential(delta: float, v_norm: float) -> float:
    """Guaranteed overlap after adding a potential of sup norm v_norm."""
    if v_norm < 0:
        raise DomainError(f"potential norm must be nonnegative, got {v_norm}")
    return delta - 2.0 * v_norm


def estimate_cq(
    q: PeriodVector,
    grid: GridSpec | None = None,
    workers: int = 1,
) -> CqEstimate:
    """Certified coupling threshold from the free band overlaps.

    Computes certified free band edges, takes the per-pair overlaps, and
    returns (min overlap - 2 slack) / 2 clipped at zero.  A potential with
    sup norm below the returned value shrinks every counted overlap by at
    most twice its norm, so those pairs keep overlapping.

    For all-even periods the overlap segment of the middle pair(s) collapses
    onto zero (the bands touch there by symmetry); such pairs are excluded
    and flagged through touching_at_zero.  If the grid is too coarse to
    certify a positive threshold the estimate is marked inconclusive.
    """
    if grid is None:
        grid = default_grid(q)
    table = certified_edges(q, zero_potential(q), grid, workers=workers)
    deltas = overlaps(table)
    slack = table.slack
    excluded: list[int] = []
    if q.all_even:
        for k in range(1, table.Q):
            near_zero = (
                abs(table.band_min(k)) <= 2.0 * slack
                and abs(table.band_max(k + 1)) <= 2.0 * slack
            )
            if near_zero:
                excluded.append(k)
    kept = [d for k, d in enumerate(deltas, start=1) if k not in excluded]
    touching = bool(excluded)
    if not kept:
        return CqEstimate(
            c_q=math.inf if not deltas else 0.0,
            touching_at_zero=touching,
            inconclusive=bool(deltas),
            min_overlap=math.inf if not deltas else min(deltas),
            overlaps=deltas,
            excluded_pairs=tuple(excluded),
            slack=slack,
        )
    min_overlap = min(kept)
    raw = (min_overlap - 2.0 * slack) / 2.0
    return CqEstimate(
        c_q=max(raw, 0.0),
        touching_at_zero=touching,
        inconclusive=raw <= 0.0,
        min_overlap=min_overlap,
        overlaps=deltas,
        excluded_pairs=tuple(excluded),
        slack=slack,
    )


def min_abs_eigenvalue(
    q: PeriodVector, V: Potential, grid: GridSpec, workers: int = 1
) -> tuple[float, Phase]:
    """Smallest |eigenvalue| over the grid with the phase attaining it."""
    if V.q != q:
        raise DomainError(f"potential periods {V.q.q} do not match {q.q}")
    best = math.inf
    best_idx = 0
    for start, (_, vals) in _iter_chunks(q, V, grid, workers):
        a = np.abs(vals).min(axis=1)
        j = int(a.argmin())
        if a[j] < best:
            best = float(a[j])
            best_idx = start + j
    return best, _node_phase(q, grid, best_idx)
