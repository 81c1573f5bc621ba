import numpy as np
import pytest

from reference import conv_codebook
from tccdec.codefile import CodeFileError, load_code, parse_code
from tccdec.trellis import enumerate_codewords


def test_checks_and_comments():
    code = parse_code("""
        # repetition-ish
        checks 1 3
        1 1 0   # first check
        checks 1 3
        011
    """)
    assert code.n == 3
    words = {tuple(w) for w in enumerate_codewords(code.trellis1)}
    assert (1, 1, -1) in words and (1, -1, 1) not in words
    assert code.contains([1, 1, 1]) and code.contains([-1, -1, -1])
    assert not code.contains([1, 1, -1])


def test_conv_with_perm():
    code = parse_code("conv 2 2 7 5\nconv 2 2 7 5\nperm 8\n2 1 3 4 5 6 8 7\n")
    base = conv_codebook(["7", "5"], 2, 2)
    np.testing.assert_array_equal(enumerate_codewords(code.trellis1), base)
    moved = np.empty_like(base)
    moved[:, [1, 0, 2, 3, 4, 5, 7, 6]] = base
    np.testing.assert_array_equal(enumerate_codewords(code.trellis2), np.unique(moved, axis=0))


@pytest.mark.parametrize("text,match", [
    ("checks 1 3\n1 1 1\n", "exactly two"),
    ("checks 1 3\n1 1 1\nchecks 1 4\n1 1 1 1\n", "lengths differ"),
    ("checks 1 3\n0 0 0\nchecks 1 3\n1 1 1\n", "degenerate"),
    ("conv 2 2 0\nconv 2 2 7 5\n", "zero polynomial"),
    ("conv 2 2 7 9\nconv 2 2 7 5\n", "line 1"),
    ("bogus 1\n", "unknown directive"),
    ("checks 1 3\n1 1 1\nchecks 1 3\n1 1 1\nperm 3\n1 1 2\n", "permutation"),
    ("checks 1 3\n1 1 1\nchecks 1 3\n1 1 1\nperm 2\n1 2\n", "perm has length"),
    ("checks 1 3\n1 1\n", "end of code file"),
])
def test_errors(text, match):
    with pytest.raises(CodeFileError, match=match):
        parse_code(text)


def test_shipped_codes(ldpc12, conv14):
    assert ldpc12.n == 12 and conv14.n == 14


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_code(tmp_path / "nope.tcc")
