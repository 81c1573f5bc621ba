"""Memoryless binary channels with P(r|s) proportional to gamma**(r*s).

Everything downstream works with ``lam = ln(gamma)``.  The erasure channel
(and the noiseless BSC) has ``lam = inf``; that value is never multiplied
as a float, see :func:`exponent`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("bsc", "bec", "awgn")


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    param: float

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        p = float(self.param)
        object.__setattr__(self, "param", p)
        if kind == "bsc":
            # p > 1/2 would flip the sign of lam and invert the decoder objective
            if not 0.0 <= p <= 0.5:
                raise ValueError(f"BSC crossover probability must be in [0, 0.5], got {p}")
        elif kind == "bec":
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"BEC erasure probability must be in [0, 1], got {p}")
        elif kind == "awgn":
            if not (p > 0.0 and math.isfinite(p)):
                raise ValueError(f"AWGN sigma must be positive, got {p}")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}; expected one of {KINDS}")

    @property
    def lam(self) -> float:
        return lam(self)

    def __str__(self):
        return f"{self.kind}:{self.param:g}"


def parse_channel(spec: str) -> ChannelModel:
    """Parse ``bsc:0.05``, ``bec:0.3`` or ``awgn:0.8``."""
    kind, sep, value = spec.strip().partition(":")
    if not sep:
        raise ValueError(f"channel spec {spec!r} must look like kind:param")
    try:
        param = float(value)
    except ValueError:
        raise ValueError(f"bad channel parameter in {spec!r}") from None
    return ChannelModel(kind, param)


def lam(channel: ChannelModel) -> float:
    """Return ln(gamma) for the channel; ``math.inf`` for hard channels."""
    p = channel.param
    if channel.kind == "bsc":
        if p == 0.0:
            return math.inf
        return 0.5 * math.log((1.0 - p) / p)
    if channel.kind == "bec":
        return math.inf
    return 1.0 / (p * p)


def llr(channel: ChannelModel, r: float) -> float:
    """Half log-likelihood ratio L(r) = lam * r, with inf * 0 = 0."""
    r = float(r)
    if channel.kind == "bec" and r not in (-1.0, 0.0, 1.0):
        raise ValueError(f"BEC output must be -1, 0 or +1, got {r}")
    if channel.kind == "bsc" and r not in (-1.0, 1.0):
        raise ValueError(f"BSC output must be -1 or +1, got {r}")
    return exponent(lam(channel), r)


def exponent(lam_value: float, w):
    """``lam * w`` elementwise, with the convention inf * 0 = 0."""
    w = np.asarray(w, dtype=float)
    if math.isinf(lam_value):
        out = np.where(w > 0, math.inf, np.where(w < 0, -math.inf, 0.0))
    else:
        out = lam_value * w
    return float(out) if out.ndim == 0 else out


def transmit(channel: ChannelModel, c, rng_seed) -> np.ndarray:
    """Send bipolar word ``c`` through the channel; deterministic in the seed."""
    c = np.asarray(c, dtype=float)
    rng = np.random.default_rng(rng_seed)
    p = channel.param
    if channel.kind == "bsc":
        flips = rng.random(c.shape) < p
        return np.where(flips, -c, c)
    if channel.kind == "bec":
        erased = rng.random(c.shape) < p
        return np.where(erased, 0.0, c)
    return c + p * rng.standard_normal(c.shape)


def validate_received(channel: ChannelModel, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.ndim != 1:
        raise ValueError("received word must be one-dimensional")
    if not np.all(np.isfinite(r)):
        raise ValueError("received word must be finite")
    if channel.kind == "bsc" and not np.all(np.abs(r) == 1.0):
        raise ValueError("BSC outputs must be -1 or +1")
    if channel.kind == "bec" and not np.all(np.isin(r, (-1.0, 0.0, 1.0))):
        raise ValueError("BEC outputs must be -1, 0 or +1")
    return r
