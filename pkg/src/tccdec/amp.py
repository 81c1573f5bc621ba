"""Likelihood-amplification decoder.

The received word is split into two weight vectors ``w1 + w2 = r``, one
per constituent trellis.  Even iterations move weight between the two
(``w1 += D``, ``w2 -= D``), which leaves the likelihood of every word of
C1 ∩ C2 unchanged while shrinking the pair sum Xi over C1 x C2.  Odd
iterations scale both vectors by a common factor.  Every accepted step
keeps ``J = log p_est - log Xi`` from decreasing, where ``p_est`` stands
in for the unknown likelihood of the best codeword.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .channels import ChannelModel, exponent, validate_received
from .marginals import MarginalTable, forward_backward, log_xi_total, xi_split_all
from .trellis import IntersectionCode

SUCCESS = "Success"
ITERATION_LIMIT = "IterationLimit"
STALLED = "Stalled"

TRACE_COLUMNS = ("iteration", "step_kind", "log_xi", "log_p_est", "J", "accepted_factor")


@dataclass(frozen=True)
class DecoderConfig:
    kappa: float = 0.5
    delta_max: Optional[float] = None  # None means 10 / lam
    rho_grid: tuple = (0.8, 0.9, 1.0, 1.1, 1.25, 1.5)
    max_iter: int = 200
    backtrack_limit: int = 20

    def __post_init__(self):
        object.__setattr__(self, "rho_grid", tuple(float(x) for x in self.rho_grid))
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError(f"kappa must be in (0, 1], got {self.kappa}")
        if self.delta_max is not None and not self.delta_max > 0:
            raise ValueError(f"delta_max must be positive, got {self.delta_max}")
        if 1.0 not in self.rho_grid:
            raise ValueError("rho_grid must contain 1")
        if any(not (x > 0 and math.isfinite(x)) for x in self.rho_grid):
            raise ValueError("rho values must be positive and finite")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if self.backtrack_limit < 0:
            raise ValueError("backtrack_limit must be >= 0")

    def delta_cap(self, lam: float) -> float:
        if self.delta_max is not None:
            return self.delta_max
        return 10.0 / lam


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    step_kind: str
    log_xi: float
    log_p_est: float
    J: float
    accepted_factor: float

    def row(self):
        return [self.iteration, self.step_kind, repr(self.log_xi), repr(self.log_p_est),
                repr(self.J), repr(self.accepted_factor)]


@dataclass(frozen=True)
class DecodeResult:
    status: str
    c_hat: np.ndarray
    iterations: int
    trace: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status == SUCCESS

    @property
    def final_J(self) -> float:
        return self.trace[-1].J if self.trace else math.nan


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in trace:
            writer.writerow(rec.row())


@dataclass
class DecoderState:
    """Weights, the best-codeword likelihood estimate and the iteration count.

    ``p_est_exponent`` is log_gamma of the estimate (``sum |r|`` at start,
    scaled by every accepted rho) and ``log_p_best_est`` its natural log.
    For hard channels the trellis sums normalise pinned positions to
    log-weight 0, so the natural-log estimate is 0 there.  ``scale`` is
    the product of the accepted rho factors: ``w1 + w2 == scale * r``.
    """

    r: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    lam: float
    p_est_exponent: float
    log_p_best_est: float
    iter: int = 0
    scale: float = 1.0
    last_factor: float = 1.0  # kappa or rho accepted by the latest step, 0 for an idle delta step
    tables: Optional[tuple] = field(default=None, repr=False, compare=False)

    @property
    def hard(self) -> bool:
        return math.isinf(self.lam)


def _tables(code: IntersectionCode, lam: float, w1, w2):
    return (forward_backward(code.trellis1, exponent(lam, w1)),
            forward_backward(code.trellis2, exponent(lam, w2)))


def state_tables(state: DecoderState, code: IntersectionCode) -> tuple[MarginalTable, MarginalTable]:
    if state.tables is None:
        state.tables = _tables(code, state.lam, state.w1, state.w2)
    return state.tables


def state_log_xi(state: DecoderState, code: IntersectionCode) -> float:
    return log_xi_total(*state_tables(state, code))


def objective(state: DecoderState, code: IntersectionCode) -> float:
    return state.log_p_best_est - state_log_xi(state, code)


def init_state(code: IntersectionCode, channel: ChannelModel, r) -> DecoderState:
    r = validate_received(channel, r)
    if r.shape[0] != code.n:
        raise ValueError(f"received word has length {r.shape[0]}, code length is {code.n}")
    half = r / 2.0
    lam = channel.lam
    exponent_sum = float(np.abs(r).sum())
    return DecoderState(r=r.copy(), w1=half.copy(), w2=half.copy(), lam=lam,
                        p_est_exponent=exponent_sum,
                        log_p_best_est=0.0 if math.isinf(lam) else lam * exponent_sum)


def delta_vector(state: DecoderState, code: IntersectionCode, cap: Optional[float] = None) -> np.ndarray:
    """Per-position minimisers of Xi along ``w1 += d, w2 -= d``.

    ``d_j = (ln Xi_-1 - ln Xi_+1) / (4 lam)``, clamped to ``+-cap``.
    Pass ``cap=math.inf`` for the raw closed form.
    """
    lam = state.lam
    n = code.n
    if state.hard or lam == 0.0:
        return np.zeros(n)
    m1, _, p1 = xi_split_all(*state_tables(state, code))
    if cap is None:
        cap = 10.0 / lam
    d = np.zeros(n)
    both = np.isfinite(m1) & np.isfinite(p1)
    d[both] = (m1[both] - p1[both]) / (4.0 * lam)
    d[np.isfinite(m1) & ~np.isfinite(p1)] = cap
    d[~np.isfinite(m1) & np.isfinite(p1)] = -cap
    return np.clip(d, -cap, cap)


def delta_step(state: DecoderState, code: IntersectionCode, config: DecoderConfig) -> DecoderState:
    if state.iter % 2 != 0:
        raise ValueError("delta_step runs on even iterations")
    log_xi = state_log_xi(state, code)
    delta = delta_vector(state, code, None if state.hard or state.lam == 0 else config.delta_cap(state.lam))
    kappa = config.kappa
    if np.any(delta != 0.0):
        for _ in range(config.backtrack_limit + 1):
            step = kappa * delta
            w1, w2 = state.w1 + step, state.w2 - step
            tables = _tables(code, state.lam, w1, w2)
            if log_xi_total(*tables) <= log_xi:
                return replace(state, w1=w1, w2=w2, iter=state.iter + 1, last_factor=kappa, tables=tables)
            kappa *= 0.5
    # exhausted or nothing to move: D = 0
    return replace(state, iter=state.iter + 1, last_factor=0.0)


def rho_candidates(state: DecoderState, code: IntersectionCode, config: DecoderConfig):
    """``[(rho, J(rho), tables)]`` for every grid value, grid order."""
    out = []
    for rho in config.rho_grid:
        if rho == 1.0:
            tables = state_tables(state, code)
        else:
            tables = _tables(code, state.lam, rho * state.w1, rho * state.w2)
        out.append((rho, rho * state.log_p_best_est - log_xi_total(*tables), tables))
    return out


def rho_step(state: DecoderState, code: IntersectionCode, config: DecoderConfig) -> DecoderState:
    if state.iter % 2 != 1:
        raise ValueError("rho_step runs on odd iterations")
    cands = rho_candidates(state, code, config)
    best_rho, best_j, best_tables = next(c for c in cands if c[0] == 1.0)
    for rho, j, tables in cands:
        if j > best_j:
            best_rho, best_j, best_tables = rho, j, tables
    if best_rho == 1.0:
        return replace(state, iter=state.iter + 1, last_factor=1.0)
    return replace(
        state,
        w1=best_rho * state.w1, w2=best_rho * state.w2,
        p_est_exponent=best_rho * state.p_est_exponent,
        log_p_best_est=best_rho * state.log_p_best_est,
        scale=best_rho * state.scale,
        iter=state.iter + 1, last_factor=best_rho, tables=best_tables,
    )


def _agreeing_sums(state, code):
    mt1, mt2 = state_tables(state, code)
    plus = mt1.per_position[:, 1] + mt2.per_position[:, 1]
    minus = mt1.per_position[:, 0] + mt2.per_position[:, 0]
    return plus, minus


def hard_decision(state: DecoderState, code: IntersectionCode) -> np.ndarray:
    """Symbolwise comparison of agreeing-pair sums; ties go to +1."""
    plus, minus = _agreeing_sums(state, code)
    return np.where(plus >= minus, 1, -1).astype(np.int8)


def is_decoded(state: DecoderState, code: IntersectionCode, c_hat) -> bool:
    """Stopping test: ``c_hat`` lies in both codes and no symbol was a tie.

    A tied position means the pair posterior cannot tell the two symbols
    apart, so a codeword produced by the tie-break is not a decision.
    """
    plus, minus = _agreeing_sums(state, code)
    return not np.any(plus == minus) and code.contains(c_hat)


def _record(state, code, kind, factor):
    log_xi = state_log_xi(state, code)
    lp = state.log_p_best_est
    return TraceRecord(state.iter, kind, log_xi, lp, lp - log_xi, factor)


def decode(code: IntersectionCode, channel: ChannelModel, r, config: DecoderConfig | None = None) -> DecodeResult:
    config = config or DecoderConfig()
    state = init_state(code, channel, r)
    trace = [_record(state, code, "init", 1.0)]
    c_hat = hard_decision(state, code)
    if is_decoded(state, code, c_hat):
        return DecodeResult(SUCCESS, c_hat, 0, trace)
    idle_rounds = 0
    delta_idle = False
    while state.iter < config.max_iter:
        if state.iter % 2 == 0:
            state = delta_step(state, code, config)
            kind = "delta"
            delta_idle = state.last_factor == 0.0
        else:
            state = rho_step(state, code, config)
            kind = "rho"
            idle_rounds = idle_rounds + 1 if (delta_idle and state.last_factor == 1.0) else 0
        trace.append(_record(state, code, kind, state.last_factor))
        c_hat = hard_decision(state, code)
        if is_decoded(state, code, c_hat):
            return DecodeResult(SUCCESS, c_hat, state.iter, trace)
        if idle_rounds >= 2:
            return DecodeResult(STALLED, c_hat, state.iter, trace)
    return DecodeResult(ITERATION_LIMIT, c_hat, state.iter, trace)
