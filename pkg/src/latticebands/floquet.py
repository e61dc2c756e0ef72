"""Fiber operators of a periodic lattice Schrodinger operator.

The operator acts on complex sequences over the integer lattice as the sum
of nearest-neighbor hops plus a real periodic on-site potential.  Restricting
to quasi-periodic boundary conditions with phase theta turns it into a finite
Hermitian matrix on one period cell; the spectrum of the full operator is the
union of the fiber spectra over the reduced phase torus.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ComputationError, DomainError
from .lattice import (
    PeriodVector,
    Phase,
    enumerate_lambda,
    period,
    site_from_linear,
    theta_values,
)

__all__ = [
    "Potential",
    "FiberMatrix",
    "EigenList",
    "potential",
    "zero_potential",
    "random_potential",
    "load_potential",
    "parse_potential",
    "assemble",
    "eigenvalues_sorted_desc",
    "minimal_period",
]


@dataclass(frozen=True, eq=False)
class Potential:
    """Real potential values over one period cell, row-major site order."""

    q: PeriodVector
    values: np.ndarray

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def value_at(self, linear: int) -> float:
        return float(self.values[linear])


@dataclass(frozen=True, eq=False)
class FiberMatrix:
    """Hermitian fiber matrix at a fixed reduced phase."""

    q: PeriodVector
    theta: Phase
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class EigenList:
    """Fiber eigenvalues sorted non-increasing, tagged with their phase."""

    theta: Phase
    values: np.ndarray


def potential(q: PeriodVector, values: Sequence[float]) -> Potential:
    """Validate and freeze a potential given as Q reals in row-major order."""
    arr = np.asarray(values, dtype=float).reshape(-1).copy()
    if arr.size != q.Q:
        raise DomainError(
            f"potential has {arr.size} values, expected Q={q.Q} for periods {q.q}"
        )
    if not np.all(np.isfinite(arr)):
        raise DomainError("potential values must be finite")
    arr.flags.writeable = False
    return Potential(q, arr)


def zero_potential(q: PeriodVector) -> Potential:
    return potential(q, np.zeros(q.Q))


def random_potential(q: PeriodVector, amplitude: float, seed: int) -> Potential:
    """Uniform random potential rescaled to sup norm exactly `amplitude`."""
    if amplitude < 0:
        raise DomainError(f"amplitude must be nonnegative, got {amplitude}")
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-1.0, 1.0, q.Q)
    peak = np.max(np.abs(vals))
    if amplitude > 0 and peak > 0:
        vals *= amplitude / peak
    else:
        vals[:] = 0.0
    return potential(q, vals)


def parse_potential(payload: dict) -> Potential:
    """Build a potential from the JSON payload {"q": [...], "values": [...]}."""
    if not isinstance(payload, dict) or "q" not in payload or "values" not in payload:
        raise DomainError('potential payload must be an object with "q" and "values"')
    q = period(payload["q"])
    values = payload["values"]
    if len(values) != q.Q:
        raise DomainError(
            f"potential file has {len(values)} values, expected Q={q.Q} for periods {q.q}"
        )
    return potential(q, values)


def load_potential(path: str) -> Potential:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_potential(json.load(fh))


@functools.lru_cache(maxsize=32)
def _hopping_structure(q_tuple: tuple[int, ...]):
    """Interior adjacency and per-direction wrap matrices for one cell.

    Returns (interior, wraps) where interior is the real symmetric matrix of
    bonds staying inside the cell and wraps[i] marks the directed bonds that
    leave the cell along direction i (entry 1 at (site, wrapped neighbor)).
    The fiber matrix is then

        interior + sum_i (p_i * wraps[i] + conj(p_i) * wraps[i].T) + diag(V)

    with p_i = exp(2 pi i q_i theta_i).  For q_i = 1 the wrap bond starts and
    ends at the same site, so forward and backward contributions accumulate
    on the diagonal; for q_i = 2 they stack on top of the interior bond.
    """
    q = period(q_tuple)
    Q = q.Q
    interior = np.zeros((Q, Q))
    wraps = [np.zeros((Q, Q)) for _ in range(q.d)]
    strides = []
    s = 1
    for qi in reversed(q.q):
        strides.append(s)
        s *= qi
    strides = list(reversed(strides))
    for a in range(Q):
        site = site_from_linear(q, a)
        for i, qi in enumerate(q.q):
            if site.n[i] + 1 < qi:
                b = a + strides[i]
                interior[a, b] += 1.0
                interior[b, a] += 1.0
            else:
                b = a - site.n[i] * strides[i]
                wraps[i][a, b] += 1.0
    return interior, wraps


def assemble(q: PeriodVector, V: Potential, theta: Phase | Sequence[float]) -> FiberMatrix:
    """Assemble the Q x Q Hermitian fiber matrix at one reduced phase.

    Parameters
    ----------
    q : PeriodVector
        Componentwise periods.
    V : Potential
        On-site potential over the cell; must match q.
    theta : Phase or sequence of float
        Reduced phase, coordinate i taken modulo 1/q_i.

    Returns
    -------
    FiberMatrix
        Matrix with interior bonds of weight 1, wrap bonds carrying the
        phase exp(2 pi i q_i theta_i), and V on the diagonal.  Hermiticity
        is exact by construction.
    """
    if V.q != q:
        raise DomainError(f"potential periods {V.q.q} do not match {q.q}")
    th = theta_values(theta)
    if len(th) != q.d:
        raise DomainError(f"phase has {len(th)} coordinates, expected {q.d}")
    interior, wraps = _hopping_structure(q.q)
    M = interior.astype(complex)
    for i, qi in enumerate(q.q):
        p = np.exp(2j * math.pi * qi * th[i])
        M += p * wraps[i] + np.conj(p) * wraps[i].T
    M[np.diag_indices_from(M)] += V.values
    phase_obj = theta if isinstance(theta, Phase) else Phase(th)
    return FiberMatrix(q, phase_obj, M)


def eigenvalues_sorted_desc(M: FiberMatrix) -> EigenList:
    """Eigenvalues of a fiber matrix, sorted non-increasing.

    Raises
    ------
    ComputationError
        If the dense Hermitian eigensolver fails to converge; the message
        carries the offending phase.
    """
    try:
        vals = np.linalg.eigvalsh(M.matrix)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(
            f"eigensolver failed at theta={M.theta.theta}: {exc}"
        ) from exc
    out = vals[::-1].copy()
    out.flags.writeable = False
    return EigenList(M.theta, out)


def _divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def minimal_period(V: Potential) -> tuple[int, ...]:
    """Componentwise smallest periods dividing q under which V is invariant.

    Exact comparison: shifting by p_i sites along direction i must reproduce
    the stored values bit for bit.
    """
    arr = V.values.reshape(V.q.q)
    result = []
    for axis, qi in enumerate(V.q.q):
        for p in _divisors(qi):
            if np.array_equal(arr, np.roll(arr, p, axis=axis)):
                result.append(p)
                break
    return tuple(result)
