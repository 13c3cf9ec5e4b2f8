from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from bundlegraphs.coding import Code, Vertex
from bundlegraphs.embed_l1 import (
    PAPER_EXACT,
    SEPARATED,
    ScaleRegistry,
    build_l1,
    check_levels,
    check_pair,
    check_selection_lemma,
    dist_l1,
    expected_intersection,
    grid_base,
)
from bundlegraphs.intervals import RationalIntervalSet, flatten, piece_count
from conftest import DIAMOND, FIGURE_1, all_codes

U, V = Vertex(1, (0,)), Vertex(1, (1,))


def flat_union(emb, v):
    out = []
    for p in emb.sx[v]:
        if p is not None:
            out.extend(flatten(p).intervals)
    return RationalIntervalSet(tuple(sorted(out)))


def test_grid_base():
    assert grid_base(DIAMOND) == 2
    assert grid_base(FIGURE_1) == 27720


def test_diamond_examples():
    emb = build_l1(DIAMOND, 2)
    assert emb.measure(U) == emb.measure(V) == 1
    assert emb.intersection(U, V) == Fraction(1, 2)
    assert dist_l1(emb, U, V) == 1
    assert emb.measure(Vertex(0, ())) == 0
    assert dist_l1(emb, Vertex(0, ()), Vertex(2, ())) == 2
    assert [r.theta for r in emb.registry.order] == [0, 1]


def test_figure_1_pair():
    emb = build_l1(FIGURE_1, 2)
    u, v = Vertex(5, (1, 1)), Vertex(9, (0, 1))
    assert emb.intersection(u, v) == expected_intersection(FIGURE_1, u, v) == Fraction(33, 7)
    assert dist_l1(emb, u, v) == Fraction(32, 7)


def test_pattern_sets_match_flat_oracle():
    # expand every S(v) to plain intervals and redo the measures independently
    checked = 0
    for code in all_codes(5, 2):
        emb = build_l1(code, 2)
        if max(sum(piece_count(p) for p in emb.sx[v]) for v in emb.vertices) > 5000:
            continue
        checked += 1
        flat = {v: flat_union(emb, v) for v in emb.vertices}
        for v in emb.vertices:
            assert flat[v].measure == v.height
        for u, v in itertools.combinations(emb.vertices, 2):
            assert flat[u].intersection(flat[v]).measure == emb.intersection(u, v)
    assert checked >= 25


def test_suites_on_small_corpus():
    for code in all_codes(5, 2):
        emb = build_l1(code, 2)
        assert not list(check_selection_lemma(emb))
        for v in emb.vertices:
            assert not list(check_levels(emb, v))
        for u, v in itertools.combinations(emb.vertices, 2):
            assert not list(check_pair(emb, u, v))


def test_kappa_three_sample():
    for code in all_codes(4, 2)[::4]:
        emb = build_l1(code, 3)
        for u, v in itertools.combinations(emb.vertices, 2):
            assert not list(check_pair(emb, u, v))


def test_paper_exact_diamond():
    emb = build_l1(DIAMOND, 2, PAPER_EXACT)
    sep = build_l1(DIAMOND, 2, SEPARATED)
    assert [r.theta for r in emb.registry.order] == [6, 12]
    assert not list(check_selection_lemma(emb))
    for u, v in itertools.combinations(emb.vertices, 2):
        assert dist_l1(emb, u, v) == dist_l1(sep, u, v)


def test_unknown_mode():
    with pytest.raises(ValueError):
        build_l1(DIAMOND, 2, "other")


def test_equal_scales_break_the_intersection_formula(monkeypatch):
    monkeypatch.setattr(ScaleRegistry, "_aligned_theta", lambda self, base: 0)
    emb = build_l1(DIAMOND, 2)
    assert emb.intersection(U, V) == 1
    assert any(f.check == "intersection" for f in check_pair(emb, U, V))


def test_invalid_vertex_rejected():
    from bundlegraphs.embed_l1 import psi_l1_summary

    emb = build_l1(Code((0, 1, 0)), 2)
    with pytest.raises(ValueError):
        psi_l1_summary(emb, Vertex(1, ()))
