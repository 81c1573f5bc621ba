"""Log-domain forward-backward sums over one trellis, and their pairing.

For a trellis T and exponents ``mu`` (``mu[j] = lam * w[j]``) every path
with labels ``s`` gets log-weight ``mu . s``.  An infinite ``mu[j]`` pins
position ``j``: edges agreeing with its sign get log-weight 0, the others
``-inf``.  Sums for the pair (C1, w1), (C2, w2) factor into the two
single-trellis sums because the exponent separates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .trellis import Trellis

NEG_INF = -math.inf


@numba.njit(cache=True, inline="always")
def _lae(a, b):
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


@numba.njit(cache=True, inline="always")
def _edge_weight(mu, label, offset):
    if math.isinf(mu):
        if (mu > 0.0) == (label > 0):
            return offset
        return NEG_INF
    return mu * label + offset


@numba.njit(cache=True)
def _forward_backward(n, num_states, e_from, e_to, e_label, ptr, end_mask, positions, mu, offset):
    alpha = np.full((n + 1, num_states), NEG_INF)
    beta = np.full((n + 1, num_states), NEG_INF)
    alpha[0, 0] = 0.0
    for k in range(n):
        m = mu[positions[k]]
        for e in range(ptr[k], ptr[k + 1]):
            a = alpha[k, e_from[e]]
            if a != NEG_INF:
                w = _edge_weight(m, e_label[e], offset)
                alpha[k + 1, e_to[e]] = _lae(alpha[k + 1, e_to[e]], a + w)
    for s in range(num_states):
        if end_mask[s]:
            beta[n, s] = 0.0
    for k in range(n - 1, -1, -1):
        m = mu[positions[k]]
        for e in range(ptr[k], ptr[k + 1]):
            b = beta[k + 1, e_to[e]]
            if b != NEG_INF:
                w = _edge_weight(m, e_label[e], offset)
                beta[k, e_from[e]] = _lae(beta[k, e_from[e]], b + w)
    total = beta[0, 0]
    per_position = np.full((n, 2), NEG_INF)
    for k in range(n):
        m = mu[positions[k]]
        j = positions[k]
        for e in range(ptr[k], ptr[k + 1]):
            a = alpha[k, e_from[e]]
            b = beta[k + 1, e_to[e]]
            if a == NEG_INF or b == NEG_INF:
                continue
            w = _edge_weight(m, e_label[e], offset)
            col = 1 if e_label[e] > 0 else 0
            per_position[j, col] = _lae(per_position[j, col], a + w + b)
    return total, per_position


@dataclass(frozen=True)
class MarginalTable:
    """Log-sum over all codewords and per-position splits.

    ``per_position[j, 0]`` sums codewords with ``s_j = -1`` and
    ``per_position[j, 1]`` those with ``s_j = +1``.
    """

    total: float
    per_position: np.ndarray

    @property
    def n(self) -> int:
        return self.per_position.shape[0]

    def log_ratio(self) -> np.ndarray:
        """Per-position ``ln P(+1) - ln P(-1)``; infinite where one side is empty."""
        plus, minus = self.per_position[:, 1], self.per_position[:, 0]
        out = np.zeros(self.n)
        both = np.isfinite(plus) & np.isfinite(minus)
        out[both] = plus[both] - minus[both]
        out[np.isfinite(plus) & ~np.isfinite(minus)] = math.inf
        out[~np.isfinite(plus) & np.isfinite(minus)] = -math.inf
        return out


@dataclass(frozen=True)
class XiSplit:
    log_xi_m1: float
    log_xi_0: float
    log_xi_p1: float

    @property
    def total(self) -> float:
        return float(np.logaddexp.reduce([self.log_xi_m1, self.log_xi_0, self.log_xi_p1]))


def forward_backward(trellis: Trellis, mu, offset: float = 0.0) -> MarginalTable:
    """Exact log-domain path sums; ``offset`` is added to every edge log-weight."""
    mu = np.ascontiguousarray(mu, dtype=np.float64)
    if mu.shape != (trellis.n,):
        raise ValueError(f"weight vector has shape {mu.shape}, expected ({trellis.n},)")
    if np.isnan(mu).any():
        raise ValueError("weight vector contains NaN")
    if trellis.num_edges == 0:
        raise ValueError("empty trellis")
    total, pp = _forward_backward(
        trellis.n, trellis.num_states, trellis.edge_from, trellis.edge_to,
        trellis.edge_label, trellis.section_ptr, trellis.end_mask, trellis.positions,
        mu, float(offset),
    )
    return MarginalTable(float(total), pp)


def xi_split(mt1: MarginalTable, mt2: MarginalTable, j: int) -> XiSplit:
    """Three-way split of the pair sum by the agreement pattern at position ``j`` (0-based)."""
    if mt1.n != mt2.n:
        raise ValueError("marginal tables have different lengths")
    if not 0 <= j < mt1.n:
        raise IndexError(f"position {j} out of range for length {mt1.n}")
    a, b = mt1.per_position[j], mt2.per_position[j]
    return XiSplit(
        log_xi_m1=float(a[0] + b[1]),
        log_xi_0=float(np.logaddexp(a[0] + b[0], a[1] + b[1])),
        log_xi_p1=float(a[1] + b[0]),
    )


def xi_split_all(mt1: MarginalTable, mt2: MarginalTable):
    """Vectorised :func:`xi_split`: arrays ``(m1, zero, p1)`` over all positions."""
    if mt1.n != mt2.n:
        raise ValueError("marginal tables have different lengths")
    a, b = mt1.per_position, mt2.per_position
    return a[:, 0] + b[:, 1], np.logaddexp(a[:, 0] + b[:, 0], a[:, 1] + b[:, 1]), a[:, 1] + b[:, 0]


def log_xi_total(mt1: MarginalTable, mt2: MarginalTable) -> float:
    if mt1.n != mt2.n:
        raise ValueError("marginal tables have different lengths")
    return mt1.total + mt2.total
