"""Seeded Monte Carlo experiments over channel sweeps.

Each (sweep point, trial) pair owns the random stream
``SeedSequence([base_seed, sweep_index, trial_index])``, so records do not
depend on execution order or on how trials are spread across workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import binomtest

from .amp import DecoderConfig, decode
from .bp import BpConfig, bp_decode
from .channels import ChannelModel, parse_channel, transmit
from .codefile import load_code
from .oracle import MAX_ML_N, intersection_codewords, ml_codeword_bruteforce
from .trellis import IntersectionCode, contains

RAW_COLUMNS = ("sweep", "trial", "decoder", "status", "iters", "bit_errors",
               "frame_error", "ml_match", "final_J")
AGG_COLUMNS = ("sweep", "decoder", "trials", "fer", "fer_lo", "fer_hi", "ber")
DECODERS = ("amp", "bp")

SAMPLE_ATTEMPTS = 10_000


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    code: str
    channels: list
    decoders: tuple = ("amp",)
    trials: int = 100
    seed: int = 0
    raw_csv: Optional[str] = None
    agg_csv: Optional[str] = None
    oracle_compare: bool = False
    all_ones: bool = False
    workers: int = 1
    amp: DecoderConfig = field(default_factory=DecoderConfig)
    bp: BpConfig = field(default_factory=BpConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.channels:
            raise ConfigError("the channel sweep is empty")
        self.channels = [parse_channel(c) if isinstance(c, str) else c for c in self.channels]
        for d in self.decoders:
            if d not in DECODERS:
                raise ConfigError(f"unknown decoder {d!r}; expected one of {DECODERS}")


@dataclass(frozen=True)
class TrialRecord:
    sweep: str
    trial: int
    decoder: str
    status: str
    iters: int
    bit_errors: int
    frame_error: bool
    ml_match: Optional[bool]
    final_J: float

    def row(self):
        return [
            self.sweep, self.trial, self.decoder, self.status, self.iters, self.bit_errors,
            int(self.frame_error),
            "" if self.ml_match is None else int(self.ml_match),
            "" if math.isnan(self.final_J) else repr(self.final_J),
        ]


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _floats(value: str):
    return tuple(float(x) for x in value.replace(",", " ").split())


def parse_config(text: str, base_dir=".") -> SimConfig:
    """Parse the flat ``key = value`` config format."""
    kv = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        kv[key.strip().lower().replace("-", "_")] = value.strip()

    def path(key):
        if key not in kv:
            return None
        p = Path(kv.pop(key))
        return str(p if p.is_absolute() else Path(base_dir) / p)

    try:
        code = path("code")
        if code is None:
            raise ConfigError("missing 'code'")
        channels = [c for c in kv.pop("channels", "").replace(",", " ").split()]
        amp_kw, bp_kw = {}, {}
        for key, conv, target, name in (
            ("kappa", float, amp_kw, "kappa"),
            ("delta_max", float, amp_kw, "delta_max"),
            ("rho_grid", _floats, amp_kw, "rho_grid"),
            ("max_iter", int, amp_kw, "max_iter"),
            ("backtrack_limit", int, amp_kw, "backtrack_limit"),
            ("bp_max_iter", int, bp_kw, "max_iter"),
            ("bp_damping", float, bp_kw, "damping"),
        ):
            if key in kv:
                target[name] = conv(kv.pop(key))
        flags = {}
        for key in ("oracle_compare", "all_ones"):
            if key in kv:
                v = kv.pop(key).lower()
                if v not in _BOOL:
                    raise ConfigError(f"{key}: expected a boolean, got {v!r}")
                flags[key] = _BOOL[v]
        cfg = SimConfig(
            code=code,
            channels=channels,
            decoders=tuple(kv.pop("decoders", "amp").replace(",", " ").split()),
            trials=int(kv.pop("trials", "100")),
            seed=int(kv.pop("seed", "0")),
            raw_csv=path("raw_csv"),
            agg_csv=path("agg_csv"),
            workers=int(kv.pop("workers", "1")),
            amp=DecoderConfig(**amp_kw),
            bp=BpConfig(**bp_kw),
            **flags,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if kv:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(kv))}")
    return cfg


def load_config(path) -> SimConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def sample_codeword(code: IntersectionCode, rng_seed) -> np.ndarray:
    """Uniform member of C1 ∩ C2.

    Small codes draw from the enumerated intersection; longer ones sample
    uniform C1 paths and reject those outside C2.
    """
    rng = np.random.default_rng(rng_seed)
    if code.n <= MAX_ML_N:
        words = intersection_codewords(code)
        if words.shape[0] == 0:
            raise ValueError("the intersection code is empty")
        return words[rng.integers(words.shape[0])].copy()
    for _ in range(SAMPLE_ATTEMPTS):
        word = sample_path(code.trellis1, rng)
        if contains(code.trellis2, word):
            return word
    raise ValueError(f"no codeword of C2 found in {SAMPLE_ATTEMPTS} C1 samples; "
                     "rerun with --all-ones")


def sample_path(trellis, rng) -> np.ndarray:
    """Uniformly random codeword of one trellis via backward path counts."""
    n = trellis.n
    counts = np.zeros((n + 1, trellis.num_states))
    counts[n] = trellis.end_mask
    for k in range(n - 1, -1, -1):
        src, dst, _ = trellis.section(k)
        np.add.at(counts[k], src, counts[k + 1, dst])
    word = np.empty(n, dtype=np.int8)
    state = 0
    for k in range(n):
        src, dst, lab = trellis.section(k)
        idx = np.flatnonzero(src == state)
        weights = counts[k + 1, dst[idx]]
        e = idx[rng.choice(idx.shape[0], p=weights / weights.sum())]
        word[trellis.positions[k]] = lab[e]
        state = dst[e]
    return word


def trial_seeds(base_seed: int, sweep_index: int, trial_index: int):
    ss = np.random.SeedSequence([base_seed, sweep_index, trial_index])
    codeword_ss, channel_ss = ss.spawn(2)
    return codeword_ss, channel_ss


def run_trial(code: IntersectionCode, cfg: SimConfig, sweep_index: int, trial_index: int,
              oracle: bool) -> list[TrialRecord]:
    channel: ChannelModel = cfg.channels[sweep_index]
    cw_seed, ch_seed = trial_seeds(cfg.seed, sweep_index, trial_index)
    c = np.ones(code.n, dtype=np.int8) if cfg.all_ones else sample_codeword(code, cw_seed)
    r = transmit(channel, c, ch_seed)
    sweep = str(channel)
    records = []
    ml_word = None
    if oracle:
        ml_word, _, _ = ml_codeword_bruteforce(code, channel, r)
    for name in cfg.decoders:
        if name == "amp":
            res = decode(code, channel, r, cfg.amp)
        else:
            res = bp_decode(code, channel, r, cfg.bp)
        errs = int(np.count_nonzero(res.c_hat != c))
        records.append(TrialRecord(
            sweep, trial_index, name, res.status, res.iterations, errs, errs > 0,
            None if ml_word is None else bool(np.array_equal(res.c_hat, ml_word)),
            res.final_J,
        ))
    if oracle:
        errs = int(np.count_nonzero(ml_word != c))
        records.append(TrialRecord(sweep, trial_index, "ml", "ML", 0, errs, errs > 0, True, math.nan))
    return records


def _run_chunk(args):
    code_path, cfg, jobs, oracle = args
    code = load_code(code_path)
    return [run_trial(code, cfg, s, t, oracle) for s, t in jobs]


def run_experiment(cfg: SimConfig, code: IntersectionCode | None = None):
    """Run every (sweep, trial); return ``(records, aggregate_rows)``.

    Writes the raw and aggregate CSV files when the config names them.
    """
    if code is None:
        code = load_code(cfg.code)
    oracle = cfg.oracle_compare and code.n <= MAX_ML_N
    jobs = [(s, t) for s in range(len(cfg.channels)) for t in range(cfg.trials)]
    if cfg.workers > 1:
        chunks = [jobs[i::cfg.workers] for i in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_chunk, [(cfg.code, cfg, ch, oracle) for ch in chunks]))
        by_job = {}
        for chunk, res in zip(chunks, results):
            by_job.update(zip(chunk, res))
        per_trial = [by_job[j] for j in jobs]
    else:
        per_trial = [run_trial(code, cfg, s, t, oracle) for s, t in jobs]
    records = [rec for recs in per_trial for rec in recs]
    agg = aggregate(records, code.n)
    if cfg.raw_csv:
        write_raw_csv(records, cfg.raw_csv)
    if cfg.agg_csv:
        write_agg_csv(agg, cfg.agg_csv)
    return records, agg


def wilson_interval(k: int, n: int):
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return ci.low, ci.high


def aggregate(records, n: int) -> list[dict]:
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.sweep, rec.decoder), []).append(rec)
    rows = []
    for (sweep, dec), recs in groups.items():
        trials = len(recs)
        fe = sum(r.frame_error for r in recs)
        lo, hi = wilson_interval(fe, trials)
        rows.append({
            "sweep": sweep, "decoder": dec, "trials": trials,
            "fer": fe / trials, "fer_lo": lo, "fer_hi": hi,
            "ber": sum(r.bit_errors for r in recs) / (trials * n),
        })
    return rows


def _ensure_parent(path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)


def write_raw_csv(records, path):
    _ensure_parent(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_COLUMNS)
        for rec in records:
            w.writerow(rec.row())


def write_agg_csv(rows, path):
    _ensure_parent(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_COLUMNS)
        for row in rows:
            w.writerow([row["sweep"], row["decoder"], row["trials"]]
                       + [repr(float(row[k])) for k in ("fer", "fer_lo", "fer_hi", "ber")])


def read_agg_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def gnuplot_blocks(rows) -> str:
    """One data block per decoder, ``param fer fer_lo fer_hi ber``.

    Blocks are separated by two blank lines so ``plot ... index i`` picks
    a decoder.
    """
    blocks: dict[str, list[str]] = {}
    for row in rows:
        param = str(row["sweep"]).partition(":")[2]
        blocks.setdefault(row["decoder"], []).append(
            f"{param} {row['fer']} {row['fer_lo']} {row['fer_hi']} {row['ber']}")
    out = []
    for dec, lines in blocks.items():
        out.append(f"# decoder {dec}\n# param fer fer_lo fer_hi ber\n" + "\n".join(lines))
    return "\n\n\n".join(out) + "\n"


def fer_table(rows) -> str:
    """Plain-text FER comparison, one line per (sweep, decoder)."""
    lines = [f"{'sweep':<14}{'decoder':<8}{'trials':>8}{'fer':>10}{'95% CI':>22}{'ber':>11}"]
    for row in rows:
        ci = f"[{float(row['fer_lo']):.4f}, {float(row['fer_hi']):.4f}]"
        lines.append(f"{row['sweep']:<14}{row['decoder']:<8}{int(row['trials']):>8}"
                     f"{float(row['fer']):>10.4f}{ci:>22}{float(row['ber']):>11.5f}")
    return "\n".join(lines)
