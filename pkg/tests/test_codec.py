"""Pairing, tupling, sequence codes, and bit-string sets."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from forge import codec
from forge.errors import DecodeError, SliceExceededError


def diagonal_enumeration(count: int) -> list[tuple[int, int]]:
    """Oracle: walk the diagonals x+y = 0, 1, 2, ... upward along y."""
    out: list[tuple[int, int]] = []
    s = 0
    while len(out) < count:
        for y in range(s + 1):
            out.append((s - y, y))
        s += 1
    return out[:count]


def test_pair_matches_diagonal_enumeration():
    for index, (x, y) in enumerate(diagonal_enumeration(3000)):
        assert codec.pair(x, y) == index
        assert codec.unpair(index) == (x, y)


def test_pair_frozen_values():
    assert codec.pair(0, 0) == 0
    assert codec.pair(1, 0) == 1
    assert codec.pair(0, 1) == 2


def test_unpair_frozen_values():
    assert codec.unpair(0) == (0, 0)
    assert codec.unpair(1) == (1, 0)
    assert codec.unpair(2) == (0, 1)


def test_pair_injective_and_monotone_exhaustive():
    seen = {}
    for x in range(512):
        for y in range(512):
            v = codec.pair(x, y)
            assert v not in seen, (x, y, seen[v])
            seen[v] = (x, y)
            if x:
                assert v > codec.pair(x - 1, y)
            if y:
                assert v > codec.pair(x, y - 1)


@given(st.integers(min_value=0, max_value=10**30))
def test_unpair_is_left_inverse(n):
    x, y = codec.unpair(n)
    assert codec.pair(x, y) == n


def test_tuple_unary_is_identity():
    assert codec.tuple_k([5]) == 5


def test_project_frozen_values():
    # oracle: peel with unpair by hand
    t = codec.tuple_k([3, 4, 7])
    inner, last = codec.unpair(t)
    first, second = codec.unpair(inner)
    assert (first, second, last) == (3, 4, 7)
    assert codec.project(t, 0, 3) == 3
    assert codec.project(t, 1, 3) == 4
    assert codec.project(t, 2, 3) == 7


def test_tuple_project_roundtrip_exhaustive():
    for a in range(16):
        for b in range(16):
            for c in range(16):
                t = codec.tuple_k([a, b, c])
                assert [codec.project(t, i, 3) for i in range(3)] == [a, b, c]


def test_project_bad_index():
    with pytest.raises(IndexError):
        codec.project(0, 3, 3)
    with pytest.raises(ValueError):
        codec.tuple_k([])


@given(st.lists(st.integers(min_value=0, max_value=2**31 - 1), max_size=40))
def test_encode_decode_roundtrip(xs):
    assert codec.decode_seq(codec.encode_seq(xs)) == xs


def test_seq_get_examples():
    code = codec.encode_seq([4, 9])
    assert codec.seq_get(code, 1) == 9
    assert codec.seq_get(code, 5) == 0
    assert codec.seq_get(codec.encode_seq([]), 0) == 0


def test_seq_get_rejects_noncanonical():
    # [1, 1] packed at width 2 instead of the canonical width 1
    body = (1 | (1 << 2)) | (1 << 4)
    wide = body * 32 + 2
    with pytest.raises(DecodeError):
        codec.seq_get(wide, 0)
    with pytest.raises(DecodeError):
        codec.seq_len(wide)
    assert codec.seq_get_total(wide, 0) == 1
    assert codec.seq_get_total(wide, 1) == 1
    assert codec.seq_len_total(wide) == 2


@given(st.integers(min_value=0, max_value=10**40), st.integers(min_value=0, max_value=300))
def test_total_reads_never_raise(code, j):
    v = codec.seq_get_total(code, j)
    assert 0 <= v
    assert codec.seq_len_total(code) >= 0


def test_encode_width_cap():
    with pytest.raises(ValueError):
        codec.encode_seq([1 << 31])
    codec.encode_seq([(1 << 31) - 1])


def test_seq_code_bound_covers_all_codes():
    for n in range(5):
        for w in (1, 2, 3):
            bound = codec.seq_code_bound(n, w)
            top = (1 << w) - 1
            assert codec.encode_seq([top] * n) <= bound
            if n:
                assert codec.encode_seq([0] * n) <= bound


def test_seq_code_bound_excludes_wider_padding():
    # no width-2 code of the same element count fits under the width-1 bound
    for n in range(1, 6):
        bound = codec.seq_code_bound(n, 1)
        for payload in range(1 << (2 * n)):
            body = payload | (1 << (2 * n))
            assert body * 32 + 2 > bound


def test_str_num_identification():
    x = codec.str_to_num("101")
    assert [codec.seq_get(x, i) for i in range(3)] == [1, 0, 1]
    assert codec.num_to_str(codec.str_to_num("0110"), 4) == "0110"
    assert codec.str_to_num("") == codec.encode_seq([])


def test_str_roundtrip_exhaustive_to_length_10():
    codes = set()
    for n in range(11):
        for mask in range(1 << n):
            s = format(mask, f"0{n}b")[::-1] if n else ""
            x = codec.str_to_num(s)
            assert codec.num_to_str(x, n) == s
            assert x not in codes  # injective even across lengths
            codes.add(x)


def test_str_to_num_width_guard():
    with pytest.raises(SliceExceededError):
        codec.str_to_num("0101", width=3)
    codec.str_to_num("0101", width=4)


def test_set_semantics():
    assert codec.set_length("0110") == 3
    assert codec.set_length("") == 0
    assert codec.set_length("000") == 0
    assert codec.trim("0110") == "011"
    assert codec.sets_equal("011", "0110")
    assert codec.sets_equal("", "000")
    assert not codec.sets_equal("01", "10")


def test_mask_string_conversions():
    for mask in range(256):
        s = codec.mask_to_bits(mask)
        assert codec.bits_to_mask(s) == mask
        assert s == codec.trim(s)


def test_all_strings_distinct():
    seen = list(codec.all_strings(3))
    assert len(seen) == 8
    assert len(set(seen)) == 8
    assert "" in seen and "11" in seen and "101" in seen
