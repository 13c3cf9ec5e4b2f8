from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bundlegraphs.coding import (
    INCLUDE_ZERO,
    POSITIVE,
    Code,
    CodeError,
    Vertex,
    is_prefix,
    meet,
    nm,
    p_param,
    p_params,
    parse_address,
    parse_code,
    parse_vertex,
    updown,
    xy_tables,
    xyz,
)
from conftest import DIAMOND, FIGURE_1, all_codes

import numpy as np

codes_st = st.lists(st.integers(0, 3), min_size=0, max_size=8).map(lambda t: Code((0, *t, 0)))
addr_st = st.lists(st.integers(0, 2), max_size=5).map(tuple)


def scan_xy(code: Code, r: int, i: int) -> tuple[int, int]:
    if i == 0:
        return 0, code.height
    return max(t for t in range(r + 1) if code[t] < i), min(t for t in range(r, code.height + 1) if code[t] < i)


def literal_p(code: Code, first: int) -> int:
    """Smallest p meeting both midpoint conditions, scanning i well past max W."""
    top = code.maxdepth + 4
    for p in range(1, top):
        good = True
        for r in range(code.height + 1):
            for i in range(first, top):
                x, y = scan_xy(code, r, i)
                x2, y2 = scan_xy(code, r, i + p)
                if 2 * r >= x + y and 2 * x2 < x + y:
                    good = False
                if 2 * r <= x + y and 2 * y2 > x + y:
                    good = False
        if good:
            return p
    raise AssertionError("no p found")


def test_code_validation():
    with pytest.raises(CodeError):
        Code((0,))
    with pytest.raises(CodeError):
        Code((1, 0))
    with pytest.raises(CodeError):
        Code((0, -1, 0))
    assert parse_code("0,0,1,0,0,2,1,1,1,2,1,0") == FIGURE_1
    assert FIGURE_1.height == 11 and FIGURE_1.maxdepth == 2
    with pytest.raises(CodeError):
        parse_code("0,x,0")


def test_text_formats():
    assert parse_address("()") == ()
    assert parse_address("(1, 0)") == (1, 0)
    assert parse_vertex("5:(1,1)") == Vertex(5, (1, 1))
    assert str(Vertex(2, ())) == "2:()"


def test_meet_examples():
    assert meet((1, 1), (1, 1)) == (1, 1)
    assert meet((1, 1), (0, 1)) == ()
    assert meet((1, 1), (1, 0)) == (1,)


@given(addr_st, addr_st)
def test_meet_properties(a, b):
    m = meet(a, b)
    assert meet(a, a) == a
    assert m == meet(b, a)
    assert is_prefix(m, a) and is_prefix(m, b)
    assert len(m) <= min(len(a), len(b))


@given(addr_st, addr_st, addr_st)
def test_prefix_stability(a1, tail, b):
    a2 = a1 + tail
    if not is_prefix(a1, b):
        assert meet(a2, b) == meet(a1, b)


def test_xyz_examples():
    assert xyz(FIGURE_1, 5, 1) == (4, 11, 1)
    assert xyz(FIGURE_1, 5, 2) == (4, 6, 1)
    for r in range(FIGURE_1.height + 1):
        assert xyz(FIGURE_1, r, 0) == (0, 11, r)
    with pytest.raises(ValueError):
        xyz(FIGURE_1, 12, 1)


@given(codes_st)
def test_xyz_matches_scan_and_is_monotone(code):
    for r in range(code.height + 1):
        for i in range(code.maxdepth + 3):
            got = xyz(code, r, i)
            assert (got.x, got.y) == scan_xy(code, r, i)
            assert 0 <= got.x <= r <= got.y <= code.height
            assert got.z == (r if i == 0 else min(r - got.x, got.y - r))
            if i >= 1:
                nxt = xyz(code, r, i + 1)
                assert got.x <= nxt.x and got.y >= nxt.y
        top = xyz(code, r, code.maxdepth + 1)
        assert top.x == top.y == r


def test_updown_and_nm_examples():
    u = Vertex(5, (1, 1))
    assert updown(FIGURE_1, u, Vertex(9, (1, 0)))
    assert not updown(FIGURE_1, u, Vertex(9, (0, 1)))
    assert updown(FIGURE_1, u, u)
    assert nm(FIGURE_1, u, Vertex(9, (0, 1))) == (4, 11)
    assert nm(DIAMOND, Vertex(1, (0,)), Vertex(1, (1,))) == (0, 2)
    assert nm(FIGURE_1, Vertex(0, ()), Vertex(11, ())) == (0, 11)


def test_p_param_examples():
    assert p_param(DIAMOND, POSITIVE) == 1
    assert p_param(Code((0, 0)), POSITIVE) == 1
    assert p_param(DIAMOND, INCLUDE_ZERO) == 2
    with pytest.raises(ValueError):
        p_param(DIAMOND, "other")


def test_p_param_matches_literal_oracle():
    for code in all_codes(6, 2):
        pos, inc = p_param(code, POSITIVE), p_param(code, INCLUDE_ZERO)
        assert pos == literal_p(code, 1)
        assert inc == literal_p(code, 0)
        assert pos <= inc <= code.maxdepth + 1


@given(st.integers(1, 7), st.integers(0, 3), st.data())
def test_batched_tables_match_scalar(height, depth, data):
    rows = [
        (0, *data.draw(st.lists(st.integers(0, depth), min_size=height - 1, max_size=height - 1)), 0)
        for _ in range(3)
    ]
    stack = np.asarray(rows)
    levels = depth + 2
    xs, ys = xy_tables(stack, levels)
    for b, row in enumerate(rows):
        code = Code(row)
        for i in range(levels):
            for r in range(code.height + 1):
                assert (xs[i, b, r], ys[i, b, r]) == scan_xy(code, r, i)
    for conv in (POSITIVE, INCLUDE_ZERO):
        assert list(p_params(stack, conv)) == [p_param(Code(r), conv) for r in rows]
