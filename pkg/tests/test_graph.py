from __future__ import annotations

import itertools

import pytest

from bundlegraphs.coding import Code, Vertex, updown
from bundlegraphs.graph import (
    Init,
    Parallel,
    Series,
    SizeGuardError,
    bfs_from,
    build_recursive,
    dist_bfs,
    dist_formula,
    is_edge,
    materialize,
    verify_code_roundtrip,
)
from conftest import DIAMOND, FIGURE_1, all_codes

DIAMOND_SCRIPT = Series(Parallel(Init(), Init()), 2)


def test_materialize_examples():
    g = materialize(DIAMOND, 2)
    assert len(g) == 4 and g.edge_count() == 4
    fig = materialize(FIGURE_1, 2)
    assert len(fig) == 23 and fig.edge_count() == 28
    assert fig.bottom == Vertex(0, ()) and fig.top == Vertex(11, ())


def test_materialize_invariants(small_codes):
    for code in small_codes:
        for kappa in (1, 2, 3):
            g = materialize(code, kappa)
            assert len(g) == sum(kappa ** w for w in code.depths)
            for a, b in g.edges():
                assert is_edge(a, b)
            assert list(g.vertices) == sorted(g.vertices)


def test_size_guard():
    with pytest.raises(SizeGuardError) as err:
        materialize(Code((0, 9, 0)), 3, limit=1000)
    assert "19685" in str(err.value)


def test_dump_format():
    lines = materialize(DIAMOND, 2).dump().splitlines()
    assert lines[:4] == ["0:()", "1:(0)", "1:(1)", "2:()"]
    assert "0:() -- 1:(0)" in lines


def test_distance_examples():
    fig = materialize(FIGURE_1, 2)
    cases = [((5, (1, 1)), (9, (1, 0)), 4), ((5, (1, 1)), (9, (0, 1)), 6), ((2, (0,)), (2, (1,)), 2)]
    for u, v, d in cases:
        u, v = Vertex(*u), Vertex(*v)
        assert dist_formula(FIGURE_1, u, v) == d
        assert dist_bfs(fig, u, v) == d
    diamond = materialize(DIAMOND, 2)
    assert dist_bfs(diamond, diamond.bottom, diamond.top) == 2
    assert dist_bfs(diamond, diamond.top, diamond.top) == 0
    with pytest.raises(KeyError):
        dist_bfs(diamond, diamond.top, Vertex(1, (5,)))


def test_formula_is_a_metric_matching_bfs():
    for code in all_codes(5, 2):
        g = materialize(code, 2)
        table = {u: dict(zip(g.vertices, bfs_from(g, u))) for u in g.vertices}
        for u, v in itertools.product(g.vertices, repeat=2):
            d = dist_formula(code, u, v)
            assert d == table[u][v] == dist_formula(code, v, u)
            assert d >= abs(u.height - v.height)
            if is_edge(u, v):
                assert d == 1
        for u, v, w in itertools.product(g.vertices[:8], g.vertices, g.vertices):
            assert dist_formula(code, u, w) <= dist_formula(code, u, v) + dist_formula(code, v, w)


def test_tree_containment():
    code = Code((0, 1, 2, 3, 2, 1, 0))
    g = materialize(code, 2)
    leaves = [v for v in g.vertices if v.height <= 3 and len(v.address) == v.height]
    for u, v in itertools.combinations(leaves, 2):
        k = 0
        while k < min(len(u.address), len(v.address)) and u.address[k] == v.address[k]:
            k += 1
        assert dist_formula(code, u, v) == u.height + v.height - 2 * k


def test_build_recursive_examples():
    assert build_recursive(Init()).code == Code((0, 0))
    assert build_recursive(Parallel(Init(), Init())).code == Code((0, 0, 0))
    diamond = build_recursive(DIAMOND_SCRIPT)
    assert diamond.code == DIAMOND and len(diamond.vertices) == 4


def test_roundtrip_examples():
    assert verify_code_roundtrip(DIAMOND_SCRIPT)
    assert verify_code_roundtrip(Init())
    nested = Series(Parallel(Series(Parallel(Init(), Init()), 2), Init()), 2)
    assert build_recursive(nested).code == Code((0, 2, 1, 0))
    assert verify_code_roundtrip(nested)
    with pytest.raises(ValueError):
        verify_code_roundtrip(Series(Parallel(Series(Parallel(Init(), Init()), 3), Init()), 2))


def test_roundtrip_random_scripts():
    import random

    rng = random.Random(7)

    def script(depth: int):
        roll = rng.random()
        if depth == 0 or roll < 0.3:
            return Init()
        if roll < 0.65:
            return Parallel(script(depth - 1), script(depth - 1))
        return Series(script(depth - 1), 2)

    for _ in range(60):
        assert verify_code_roundtrip(script(4))


def test_comparable_pairs_are_height_apart():
    for code in all_codes(5, 2):
        g = materialize(code, 2)
        for u, v in itertools.combinations(g.vertices, 2):
            if updown(code, u, v):
                assert dist_formula(code, u, v) == abs(u.height - v.height)
