"""Turbo-style loopy belief propagation between the two constituent trellises.

Messages are per-symbol half log-ratios, the same units as ``lam * r``, so
a trellis fed ``lam * r + e`` sees edge log-weights ``(lam * r_j + e_j) * s_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amp import ITERATION_LIMIT, STALLED, SUCCESS, DecodeResult, TraceRecord
from .channels import ChannelModel, exponent, validate_received
from .marginals import forward_backward
from .trellis import IntersectionCode


@dataclass(frozen=True)
class BpConfig:
    max_iter: int = 50
    damping: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError(f"damping must be in [0, 1), got {self.damping}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _add(a, b):
    """Elementwise sum where a conflict of opposite infinities gives 0."""
    with np.errstate(invalid="ignore"):
        out = a + b
    return np.where(np.isnan(out), 0.0, out)


def extrinsic(trellis, prior):
    """Run one trellis on ``prior``; return ``(posterior, extrinsic, table)``.

    Positions already pinned by the prior carry no extrinsic information.
    """
    table = forward_backward(trellis, prior)
    post = 0.5 * table.log_ratio()
    with np.errstate(invalid="ignore"):
        ext = post - prior
    ext = np.where(np.isinf(prior) | np.isnan(ext), 0.0, ext)
    return post, ext, table


def bp_decode(code: IntersectionCode, channel: ChannelModel, r, config: BpConfig | None = None) -> DecodeResult:
    config = config or BpConfig()
    r = validate_received(channel, r)
    if r.shape[0] != code.n:
        raise ValueError(f"received word has length {r.shape[0]}, code length is {code.n}")
    chan = np.asarray(exponent(channel.lam, r), dtype=float).reshape(code.n)
    e21 = np.zeros(code.n)
    e12 = np.zeros(code.n)
    trace = []
    c_hat = np.where(chan >= 0, 1, -1).astype(np.int8)
    for it in range(1, config.max_iter + 1):
        _, new12, t1 = extrinsic(code.trellis1, _add(chan, e21))
        new12 = _damp(new12, e12, config.damping)
        post2, new21, t2 = extrinsic(code.trellis2, _add(chan, new12))
        new21 = _damp(new21, e21, config.damping)
        settled = np.array_equal(new12, e12) and np.array_equal(new21, e21)
        e12, e21 = new12, new21
        c_hat = np.where(post2 >= 0, 1, -1).astype(np.int8)
        trace.append(TraceRecord(it, "bp", t1.total + t2.total, math.nan, math.nan, config.damping))
        # a zero posterior ratio is a tie, not a decision
        if not np.any(post2 == 0.0) and code.contains(c_hat):
            return DecodeResult(SUCCESS, c_hat, it, trace)
        if settled:
            return DecodeResult(STALLED, c_hat, it, trace)
    return DecodeResult(ITERATION_LIMIT, c_hat, config.max_iter, trace)


def _damp(new, old, damping):
    if damping == 0.0:
        return new
    with np.errstate(invalid="ignore"):
        out = (1.0 - damping) * new + damping * old
    return np.where(np.isnan(out), new, out)
