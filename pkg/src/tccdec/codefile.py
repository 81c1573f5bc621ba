"""Reader for the line-oriented code-definition format.

Example::

    # C1: rate-1/2 (7,5) convolutional code, C2: interleaved copy
    conv 2 5 7 5
    conv 2 5 7 5
    perm 14
    3 7 1 ...

``conv <memory> <info_len> <gen_octal>...`` and ``checks <m> <n>`` (followed
by ``m`` rows of 0/1) each define one constituent; exactly two are
required.  ``perm <n>`` followed by a permutation of ``1..n`` moves the
second constituent's sections to those transmitted positions.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .trellis import IntersectionCode, Trellis, build_check_trellis, build_conv_trellis


class CodeFileError(ValueError):
    pass


def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for tok in line.split():
            yield lineno, tok


def _int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise CodeFileError(f"line {lineno}: expected an integer, got {tok!r}") from None


def parse_code(text: str) -> IntersectionCode:
    toks = list(_tokens(text))
    pos = 0
    trellises: list[Trellis] = []
    perm = None

    def take():
        nonlocal pos
        if pos >= len(toks):
            raise CodeFileError("unexpected end of code file")
        pos += 1
        return toks[pos - 1]

    def take_row_bits(n):
        # rows may be written as separate digits or as one 0/1 string
        lineno, tok = take()
        if len(tok) == n and len(tok) > 1 and set(tok) <= {"0", "1"}:
            return [int(c) for c in tok]
        row = [_int(tok, lineno)]
        while len(row) < n:
            lineno, tok = take()
            row.append(_int(tok, lineno))
        return row

    while pos < len(toks):
        lineno, kw = take()
        kw = kw.lower()
        if kw == "conv":
            memory = _int(take()[1], lineno)
            info_len = _int(take()[1], lineno)
            gens = []
            while pos < len(toks) and toks[pos][0] == lineno:
                gens.append(take()[1])
            try:
                for g in gens:
                    int(g, 8)
                trellises.append(build_conv_trellis(gens, memory, info_len))
            except ValueError as exc:
                raise CodeFileError(f"line {lineno}: {exc}") from None
        elif kw == "checks":
            m = _int(take()[1], lineno)
            n = _int(take()[1], lineno)
            if m < 1 or n < 1:
                raise CodeFileError(f"line {lineno}: checks needs m >= 1 and n >= 1")
            rows = [take_row_bits(n) for _ in range(m)]
            try:
                trellises.append(build_check_trellis(np.array(rows)))
            except ValueError as exc:
                raise CodeFileError(f"line {lineno}: {exc}") from None
        elif kw == "perm":
            n = _int(take()[1], lineno)
            perm = [_int(tok, ln) - 1 for ln, tok in (take() for _ in range(n))]
        else:
            raise CodeFileError(f"line {lineno}: unknown directive {kw!r}")

    if len(trellises) != 2:
        raise CodeFileError(f"expected exactly two constituent codes, found {len(trellises)}")
    t1, t2 = trellises
    if t1.n != t2.n:
        raise CodeFileError(f"constituent lengths differ: {t1.n} != {t2.n}")
    if perm is not None:
        if len(perm) != t2.n:
            raise CodeFileError(f"perm has length {len(perm)}, code length is {t2.n}")
        try:
            t2 = t2.permuted(perm)
        except ValueError as exc:
            raise CodeFileError(str(exc)) from None
    return IntersectionCode(t1, t2)


def load_code(path) -> IntersectionCode:
    return parse_code(Path(path).read_text())
