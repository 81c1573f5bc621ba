"""Brute-force references over the whole space {-1, +1}^n.

These deliberately avoid the forward-backward engine: codeword sets come
from filtering every word of the space through trellis membership, and
sums are taken term by term.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .marginals import XiSplit
from .trellis import IntersectionCode, Trellis, contains_many

MAX_ML_N = 20
MAX_XI_N = 14


def all_words(n: int) -> np.ndarray:
    """Every word of {-1, +1}^n, lexicographic with -1 < +1."""
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


@lru_cache(maxsize=64)
def _members(trellis: Trellis) -> np.ndarray:
    words = all_words(trellis.n)
    out = words[contains_many(trellis, words)]
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _intersection(code: IntersectionCode) -> np.ndarray:
    words = all_words(code.n)
    keep = contains_many(code.trellis1, words) & contains_many(code.trellis2, words)
    out = words[keep]
    out.setflags(write=False)
    return out


def code_members(trellis: Trellis) -> np.ndarray:
    if trellis.n > MAX_ML_N:
        raise ValueError(f"refusing brute force over 2^{trellis.n} words")
    return _members(trellis)


def intersection_codewords(code: IntersectionCode) -> np.ndarray:
    if code.n > MAX_ML_N:
        raise ValueError(f"refusing brute force over 2^{code.n} words (n > {MAX_ML_N})")
    return _intersection(code)


def _scores(words: np.ndarray, lam: float, w) -> np.ndarray:
    """``lam * w . s`` for each row, hard positions scored 0 / -inf."""
    w = np.asarray(w, dtype=float)
    if math.isinf(lam):
        pinned = w != 0
        agree = np.all((words[:, pinned] * np.sign(w[pinned])) > 0, axis=1)
        return np.where(agree, 0.0, -math.inf)
    return lam * (words.astype(float) @ w)


def ml_codeword_bruteforce(code: IntersectionCode, channel, r):
    """Maximum-likelihood member of C1 ∩ C2 for received word ``r``.

    Returns ``(word, score, tied)`` where ``score`` is ``lam * r . word``
    (``r . word`` for hard channels) and ``tied`` says whether another
    codeword reaches the same score.  Ties go to the lexicographically
    smallest word.
    """
    words = intersection_codewords(code)
    if words.shape[0] == 0:
        raise ValueError("the intersection code is empty")
    r = np.asarray(r, dtype=float)
    if r.shape != (code.n,):
        raise ValueError(f"received word has length {r.shape[0]}, expected {code.n}")
    lam = channel.lam
    raw = words.astype(float) @ r
    if math.isinf(lam):
        score = raw
    else:
        score = lam * raw
    best = int(np.argmax(score))  # first maximum = lexicographically smallest
    tied = int(np.count_nonzero(score == score[best])) > 1
    return words[best].copy(), float(score[best]), tied


def xi_bruteforce(code: IntersectionCode, w1, w2, lam: float):
    """Double enumeration of C1 x C2.

    Returns ``(log_xi, splits)`` with one :class:`XiSplit` per position.
    """
    if code.n > MAX_XI_N:
        raise ValueError(f"refusing double enumeration for n = {code.n} > {MAX_XI_N}")
    c1 = code_members(code.trellis1)
    c2 = code_members(code.trellis2)
    s1 = _scores(c1, lam, w1)
    s2 = _scores(c2, lam, w2)
    pair = s1[:, None] + s2[None, :]
    log_xi = _lse(pair.ravel())
    splits = []
    for j in range(code.n):
        a = c1[:, j][:, None]
        b = c2[:, j][None, :]
        splits.append(XiSplit(
            log_xi_m1=_lse(pair[(a == -1) & (b == 1)]),
            log_xi_0=_lse(pair[a == b]),
            log_xi_p1=_lse(pair[(a == 1) & (b == -1)]),
        ))
    return log_xi, splits


def log_sum_bruteforce(trellis: Trellis, mu) -> tuple[float, np.ndarray]:
    """Single-trellis total and per-position (minus, plus) log-sums."""
    words = code_members(trellis)
    mu = np.asarray(mu, dtype=float)
    sc = np.zeros(words.shape[0])
    for j in range(trellis.n):
        if math.isinf(mu[j]):
            sc += np.where(words[:, j] * np.sign(mu[j]) > 0, 0.0, -math.inf)
        else:
            sc += mu[j] * words[:, j]
    per = np.array([[_lse(sc[words[:, j] == -1]), _lse(sc[words[:, j] == 1])]
                    for j in range(trellis.n)])
    return _lse(sc), per


def _lse(values) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return -math.inf
    top = values.max()
    if top == -math.inf:
        return -math.inf
    return float(top + math.log(np.exp(values - top).sum()))
