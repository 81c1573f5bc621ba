"""Command line entry point: ``tcc decode | simulate | oracle-check | gnuplot``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import amp, bp, oracle, sim
from .channels import parse_channel, transmit
from .codefile import CodeFileError, load_code
from .marginals import forward_backward, log_xi_total, xi_split

log = logging.getLogger("tccdec")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _word(arr) -> str:
    return " ".join("+1" if x > 0 else "-1" for x in arr)


def _read_received(path) -> np.ndarray:
    with open(path) as fh:
        text = fh.read()
    values = [float(tok) for line in text.splitlines()
              for tok in line.split("#", 1)[0].split()]
    return np.array(values)


def cmd_decode(args) -> int:
    code = _load_code(args.code)
    channel = _channel(args.channel)
    sent = None
    if args.random:
        cw_seed, ch_seed = sim.trial_seeds(args.seed, 0, 0)
        sent = sim.sample_codeword(code, cw_seed)
        r = transmit(channel, sent, ch_seed)
    else:
        try:
            r = _read_received(args.input)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read received word: {exc}") from None
    if r.shape[0] != code.n:
        raise UsageError(f"received word has length {r.shape[0]}, code length is {code.n}")
    try:
        if args.decoder == "amp":
            cfg = amp.DecoderConfig(
                kappa=args.kappa, delta_max=args.delta_max,
                rho_grid=args.rho_grid or amp.DecoderConfig().rho_grid,
                max_iter=args.max_iter)
            res = amp.decode(code, channel, r, cfg)
        else:
            res = bp.bp_decode(code, channel, r, bp.BpConfig(max_iter=args.max_iter, damping=args.damping))
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    print(f"status: {res.status}")
    print(f"iterations: {res.iterations}")
    print(f"c_hat: {_word(res.c_hat)}")
    if sent is not None:
        print(f"sent: {_word(sent)}")
        print(f"frame_error: {int(not np.array_equal(sent, res.c_hat))}")
    if args.oracle:
        ml, score, tied = oracle.ml_codeword_bruteforce(code, channel, r)
        print(f"ml: {_word(ml)}{' (tie)' if tied else ''}")
        print(f"ml_match: {int(np.array_equal(ml, res.c_hat))}")
    if args.trace_csv:
        amp.write_trace_csv(res.trace, args.trace_csv)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        cfg = sim.load_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"bad config: {exc}") from None
    code = _load_code(cfg.code)
    if cfg.oracle_compare and code.n > oracle.MAX_ML_N:
        log.warning("oracle comparison disabled for n = %d > %d", code.n, oracle.MAX_ML_N)
    _, agg = sim.run_experiment(cfg, code)
    print(sim.fer_table(agg))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    """Cross-check the trellis engine and the decoders against brute force."""
    code = _load_code(args.code)
    channel = _channel(args.channel)
    if code.n > oracle.MAX_XI_N:
        raise UsageError(f"oracle-check needs n <= {oracle.MAX_XI_N}, code has n = {code.n}")
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    member_failures = 0
    ml_matches = 0
    successes = 0
    for t in range(args.n_trials):
        lam = float(rng.uniform(0.2, 2.0))
        w1, w2 = rng.normal(size=code.n), rng.normal(size=code.n)
        mt1 = forward_backward(code.trellis1, lam * w1)
        mt2 = forward_backward(code.trellis2, lam * w2)
        ref_total, ref_splits = oracle.xi_bruteforce(code, w1, w2, lam)
        worst = max(worst, _rel(log_xi_total(mt1, mt2), ref_total))
        for j, ref in enumerate(ref_splits):
            got = xi_split(mt1, mt2, j)
            for a, b in ((got.log_xi_m1, ref.log_xi_m1), (got.log_xi_0, ref.log_xi_0),
                         (got.log_xi_p1, ref.log_xi_p1)):
                worst = max(worst, _rel(a, b))
        cw_seed, ch_seed = sim.trial_seeds(args.seed, 1, t)
        c = sim.sample_codeword(code, cw_seed)
        r = transmit(channel, c, ch_seed)
        res = amp.decode(code, channel, r)
        if res.success:
            successes += 1
            member_failures += not code.contains(res.c_hat)
            ml, _, _ = oracle.ml_codeword_bruteforce(code, channel, r)
            ml_matches += bool(np.array_equal(ml, res.c_hat))
    ok = worst <= 1e-9 and member_failures == 0
    print(f"xi max relative error: {worst:.3e} ({'PASS' if worst <= 1e-9 else 'FAIL'})")
    print(f"decodes: {args.n_trials}, success: {successes}, "
          f"success outside C1∩C2: {member_failures} ({'PASS' if member_failures == 0 else 'FAIL'})")
    if successes:
        print(f"ml match rate among successes: {ml_matches / successes:.4f}")
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_gnuplot(args) -> int:
    try:
        rows = sim.read_agg_csv(args.agg)
    except OSError as exc:
        raise UsageError(f"cannot read {args.agg}: {exc}") from None
    text = sim.gnuplot_blocks(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _rel(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(1.0, abs(b))


def _load_code(path):
    try:
        return load_code(path)
    except OSError as exc:
        raise UsageError(f"cannot read code file: {exc}") from None
    except CodeFileError as exc:
        raise UsageError(f"bad code file {path}: {exc}") from None


def _channel(spec):
    try:
        return parse_channel(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _float_list(text):
    try:
        return tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tcc", description="Decoders for trellis-constrained codes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("decode", help="decode one received word")
    d.add_argument("--code", required=True)
    d.add_argument("--channel", required=True, help="bsc:P, bec:P or awgn:SIGMA")
    d.add_argument("--decoder", choices=("amp", "bp"), default="amp")
    d.add_argument("--kappa", type=float, default=0.5)
    d.add_argument("--delta-max", type=float, default=None)
    d.add_argument("--rho-grid", type=_float_list, default=None)
    d.add_argument("--max-iter", type=int, default=200)
    d.add_argument("--damping", type=float, default=0.0, help="bp only")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="file with the received values")
    src.add_argument("--random", action="store_true", help="sample a codeword and transmit it")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--oracle", action="store_true", help="also report the brute-force ML codeword")
    d.add_argument("--trace-csv")
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("simulate", help="run a Monte Carlo sweep")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle-check", help="cross-check against brute force")
    o.add_argument("--code", required=True)
    o.add_argument("--n-trials", type=int, default=20)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--channel", default="bsc:0.05")
    o.set_defaults(func=cmd_oracle_check)

    g = sub.add_parser("gnuplot", help="convert an aggregate CSV to gnuplot data blocks")
    g.add_argument("--agg", required=True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gnuplot)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tcc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"tcc: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
