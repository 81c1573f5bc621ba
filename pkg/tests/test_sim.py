import csv

import numpy as np
import pytest
from scipy.stats import chisquare

from conftest import CODES
from tccdec import sim
from tccdec.oracle import intersection_codewords
from tccdec.sim import (
    ConfigError,
    SimConfig,
    parse_config,
    run_experiment,
    sample_codeword,
    sample_path,
)
from tccdec.trellis import IntersectionCode, build_check_trellis, full_trellis, repetition_trellis

LDPC = str(CODES / "ldpc12.tcc")


class TestSampleCodeword:
    def test_uniform_on_repetition(self):
        code = IntersectionCode(repetition_trellis(3), repetition_trellis(3))
        draws = np.array([sample_codeword(code, [5, i])[0] for i in range(10_000)])
        frac = np.mean(draws == 1)
        assert abs(frac - 0.5) < 0.05
        assert chisquare([np.sum(draws == 1), np.sum(draws == -1)]).pvalue > 1e-3

    def test_single_codeword(self):
        t = build_check_trellis(np.eye(4, dtype=int))
        np.testing.assert_array_equal(sample_codeword(IntersectionCode(t, t), 1), np.ones(4))

    def test_empty(self):
        from test_oracle import word_trellis
        code = IntersectionCode(word_trellis([1, 1]), word_trellis([-1, -1]))
        with pytest.raises(ValueError, match="empty"):
            sample_codeword(code, 0)

    def test_path_sampler_uniform(self, ldpc12):
        rng = np.random.default_rng(3)
        words = intersection_codewords(ldpc12)
        t = ldpc12.trellis1
        from tccdec.trellis import enumerate_codewords
        members = enumerate_codewords(t)
        index = {tuple(w): i for i, w in enumerate(members)}
        counts = np.zeros(len(members))
        for _ in range(20 * len(members)):
            counts[index[tuple(sample_path(t, rng))]] += 1
        assert chisquare(counts).pvalue > 1e-3
        assert len(words) <= len(members)

    def test_long_code_rejection_sampling(self):
        code = IntersectionCode(repetition_trellis(22), full_trellis(22))
        w = sample_codeword(code, 4)
        assert abs(w.sum()) == 22

    def test_rejection_cap(self):
        code = IntersectionCode(full_trellis(22), repetition_trellis(22))
        with pytest.raises(ValueError, match="--all-ones"):
            sample_codeword(code, 4)


def _cfg(tmp_path, **kw):
    base = dict(code=LDPC, channels=["bsc:0.05"], trials=20, seed=3,
                raw_csv=str(tmp_path / "raw.csv"), agg_csv=str(tmp_path / "agg.csv"))
    base.update(kw)
    return SimConfig(**base)


class TestRunExperiment:
    def test_near_noiseless(self, tmp_path):
        _, agg = run_experiment(_cfg(tmp_path, channels=["bsc:1e-6"], trials=100))
        assert agg[0]["fer"] == 0.0

    def test_uninformative_channel(self, tmp_path):
        cfg = _cfg(tmp_path, channels=["bsc:0.5"], trials=1000, decoders=("amp",), oracle_compare=True)
        _, agg = run_experiment(cfg)
        by_dec = {row["decoder"]: row for row in agg}
        assert by_dec["amp"]["fer"] >= 0.5
        assert by_dec["ml"]["fer"] >= 0.5

    def test_reproducible_bytes(self, tmp_path):
        a = _cfg(tmp_path / "a", decoders=("amp", "bp"), oracle_compare=True)
        b = _cfg(tmp_path / "b", decoders=("amp", "bp"), oracle_compare=True)
        run_experiment(a)
        run_experiment(b)
        assert (tmp_path / "a" / "raw.csv").read_bytes() == (tmp_path / "b" / "raw.csv").read_bytes()
        assert (tmp_path / "a" / "agg.csv").read_bytes() == (tmp_path / "b" / "agg.csv").read_bytes()

    def test_workers_do_not_change_records(self, tmp_path):
        one, _ = run_experiment(_cfg(tmp_path, channels=["bsc:0.05", "awgn:0.9"], trials=6))
        two, _ = run_experiment(_cfg(tmp_path, channels=["bsc:0.05", "awgn:0.9"], trials=6, workers=2))
        assert one == two

    def test_aggregates_recomputed_from_raw(self, tmp_path):
        cfg = _cfg(tmp_path, channels=["bsc:0.05", "bsc:0.1"], decoders=("amp", "bp"), trials=30)
        run_experiment(cfg)
        with open(cfg.raw_csv) as fh:
            raw = list(csv.DictReader(fh))
        with open(cfg.agg_csv) as fh:
            agg = list(csv.DictReader(fh))
        assert len(raw) == 2 * 2 * 30
        for row in agg:
            sel = [r for r in raw if r["sweep"] == row["sweep"] and r["decoder"] == row["decoder"]]
            fe = sum(int(r["frame_error"]) for r in sel)
            assert int(row["trials"]) == len(sel)
            assert float(row["fer"]) == fe / len(sel)
            assert float(row["ber"]) == sum(int(r["bit_errors"]) for r in sel) / (12 * len(sel))
            lo, hi = sim.wilson_interval(fe, len(sel))
            assert float(row["fer_lo"]) == lo and float(row["fer_hi"]) == hi
            for r in sel:
                assert 0 <= int(r["bit_errors"]) <= 12

    def test_raw_columns(self, tmp_path):
        cfg = _cfg(tmp_path, trials=2, oracle_compare=True)
        run_experiment(cfg)
        header = open(cfg.raw_csv).readline().strip()
        assert header == "sweep,trial,decoder,status,iters,bit_errors,frame_error,ml_match,final_J"
        header = open(cfg.agg_csv).readline().strip()
        assert header == "sweep,decoder,trials,fer,fer_lo,fer_hi,ber"

    def test_all_ones(self, tmp_path):
        records, _ = run_experiment(_cfg(tmp_path, channels=["bsc:1e-6"], trials=5, all_ones=True))
        assert all(not r.frame_error for r in records)


class TestConfig:
    def test_parse(self, tmp_path):
        text = f"""
        # sweep
        code = {LDPC}
        channels = bsc:0.02, bsc:0.05
        decoders = amp bp
        trials = 7
        seed = 9
        oracle_compare = yes
        kappa = 0.25
        rho_grid = 0.9 1 1.2
        bp_damping = 0.1
        raw_csv = out/raw.csv
        """
        cfg = parse_config(text, base_dir=tmp_path)
        assert [str(c) for c in cfg.channels] == ["bsc:0.02", "bsc:0.05"]
        assert cfg.decoders == ("amp", "bp") and cfg.trials == 7 and cfg.oracle_compare
        assert cfg.amp.kappa == 0.25 and cfg.amp.rho_grid == (0.9, 1.0, 1.2)
        assert cfg.bp.damping == 0.1
        assert cfg.raw_csv == str(tmp_path / "out" / "raw.csv")

    @pytest.mark.parametrize("text", [
        "channels = bsc:0.1\n",
        f"code = {LDPC}\n",
        f"code = {LDPC}\nchannels = bsc:0.1\ntrials = 0\n",
        f"code = {LDPC}\nchannels = bsc:0.9\n",
        f"code = {LDPC}\nchannels = bsc:0.1\nfoo = 1\n",
        f"code = {LDPC}\nchannels = bsc:0.1\ndecoders = viterbi\n",
        f"code = {LDPC}\nchannels = bsc:0.1\nkappa = 2\n",
        f"code = {LDPC}\nchannels = bsc:0.1\noracle_compare = maybe\n",
        "just a line\n",
    ])
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)


def test_gnuplot_blocks():
    rows = [
        {"sweep": "bsc:0.02", "decoder": "amp", "fer": 0.1, "fer_lo": 0.05, "fer_hi": 0.2, "ber": 0.01},
        {"sweep": "bsc:0.05", "decoder": "amp", "fer": 0.3, "fer_lo": 0.2, "fer_hi": 0.4, "ber": 0.03},
        {"sweep": "bsc:0.02", "decoder": "bp", "fer": 0.2, "fer_lo": 0.1, "fer_hi": 0.3, "ber": 0.02},
    ]
    text = sim.gnuplot_blocks(rows)
    blocks = text.strip().split("\n\n\n")
    assert len(blocks) == 2
    assert blocks[0].splitlines()[2] == "0.02 0.1 0.05 0.2 0.01"
