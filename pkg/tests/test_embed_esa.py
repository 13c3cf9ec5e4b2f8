from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bundlegraphs.coding import INCLUDE_ZERO, POSITIVE, Code, Vertex, enumerate_nodes, updown, xyz
from bundlegraphs.embed_esa import (
    BernoulliFamily,
    ESAGuardError,
    SummingVector,
    build_esa,
    check_block_lemma,
    check_bounds,
    check_esa_axioms,
    esa_separation_check,
    pair_norms,
    psi_esa,
    summing_norm,
    theoretical_bound,
)
from bundlegraphs.graph import dist_formula
from conftest import DIAMOND, all_codes

BOTTOM, TOP = Vertex(0, ()), Vertex(2, ())
U, V = Vertex(1, (0,)), Vertex(1, (1,))


def literal_Y(mu: int, i: int, j: int) -> int:
    period = 2 ** (mu - (i - 1))
    return int(any(j % period == n % period for n in range(1, 2 ** (mu - i) + 1)))


def literal_dense(code: Code, kappa: int, v: Vertex) -> list[int]:
    """Rebuild the image of ``v`` from scratch with plain sets."""
    nodes = enumerate_nodes(kappa, code.maxdepth)
    mu = len(nodes)
    m1 = code.height
    r, a = v
    out = [0] * (2 ** (mu + 1) * m1)
    for j in range(1, 2**mu + 1):
        block = list(range((j - 1) * m1 + 1, j * m1 + 1))
        sx = set(block[: xyz(code, r, 1).x])
        sy = set(block[: xyz(code, r, 1).y])
        support = set(sx)
        for i in range(1, len(a) + 1):
            rest = sorted(sy - sx)
            y = literal_Y(mu, nodes.index(a[:i]), j)
            kx = xyz(code, r, i + 1).x - xyz(code, r, i).x
            ky = xyz(code, r, i + 1).y - xyz(code, r, i).x
            pick = (lambda k: rest[:k]) if y else (lambda k: rest[len(rest) - k :])
            sx, sy = set(pick(kx)), set(pick(ky))
            support |= sx
        for n in support:
            out[(j - 1) * m1 + n - 1] += 1
            out[(3 * j - 1) * m1 + 1 - n - 1] -= 1
    return out


def norm(coeffs: list[int]) -> int:
    sums = list(itertools.accumulate(coeffs))
    return max((abs(s) for s in sums), default=0)


def test_summing_norm_examples():
    assert summing_norm(SummingVector(((1, 1), (2, -1)))) == 1
    assert summing_norm(SummingVector(((1, 1), (2, 1)))) == 2
    assert summing_norm(SummingVector.from_coefficients([1, -1] * 8)) == 1
    assert summing_norm(SummingVector(((1, 4),), Fraction(1, 2))) == 2
    with pytest.raises(ValueError):
        SummingVector(((0, 1),))


def test_axiom_examples():
    a = SummingVector.from_coefficients([2, 3])
    assert summing_norm(SummingVector.from_coefficients([5])) == summing_norm(a)
    assert summing_norm(SummingVector.from_coefficients([-1])) <= summing_norm(SummingVector.from_coefficients([2, -3]))
    spread = SummingVector(((2, 1), (5, -2), (9, 1)))
    assert summing_norm(spread) == summing_norm(SummingVector.from_coefficients([1, -2, 1]))
    ok, failure = check_esa_axioms(2000, seed=5)
    assert ok, failure


@given(st.lists(st.integers(-6, 6), max_size=20))
def test_norm_matches_prefix_scan(coeffs):
    assert summing_norm(SummingVector.from_coefficients(coeffs)) == norm(coeffs)


def test_bernoulli_selectors():
    fam = BernoulliFamily.for_tree(2, 2)
    assert fam.mu == 7 and fam.index[()] == 0 and fam.index[(0,)] == 1
    table = fam.table()
    for i in range(1, fam.mu + 1):
        assert [fam.Y(i, j) for j in range(1, fam.blocks + 1)] == [literal_Y(fam.mu, i, j) for j in range(1, fam.blocks + 1)]
        assert list(table[i]) == [fam.Y(i, j) for j in range(1, fam.blocks + 1)]
        assert table[i].sum() == fam.blocks // 2
    for size in (1, 2, 3):
        for subset in itertools.combinations(range(1, fam.mu + 1), size):
            for values in itertools.product((0, 1), repeat=size):
                hits = sum(all(table[i, j] == val for i, val in zip(subset, values)) for j in range(fam.blocks))
                assert hits == 2 ** (fam.mu - size)
    with pytest.raises(ValueError):
        fam.Y(0, 1)


def test_diamond_examples():
    emb = build_esa(DIAMOND, 2)
    assert emb.family.mu == 3 and emb.block == 2 and emb.p_w == 1 and emb.eta == 1
    for j in range(1, 9):
        front = emb.family.Y_node((0,), j)
        assert emb.S(U, j) == [emb.offset(j) + (1 if front else 2)]
        assert emb.S(BOTTOM, j) == []
        assert emb.S(TOP, j) == [emb.offset(j) + 1, emb.offset(j) + 2]
    assert summing_norm(psi_esa(emb, BOTTOM)) == 0
    assert summing_norm(psi_esa(emb, TOP) - psi_esa(emb, BOTTOM)) == 2
    assert summing_norm(psi_esa(emb, U) - psi_esa(emb, V)) == 1
    assert theoretical_bound(emb.p_w) == 8


def test_construction_matches_literal_rebuild():
    for code in all_codes(4, 2)[::2]:
        emb = build_esa(code, 2)
        for v in emb.vertices:
            assert list(emb.dense(v)) == literal_dense(code, 2, v)


def test_pair_norms_match_sparse_vectors():
    code = Code((0, 1, 2, 1, 0))
    emb = build_esa(code, 2)
    for u, v, val in pair_norms(emb):
        assert val == summing_norm(psi_esa(emb, u) - psi_esa(emb, v))


def test_separation_examples():
    emb = build_esa(DIAMOND, 2)
    assert esa_separation_check(emb, U, V) == (True, "")
    with pytest.raises(ValueError):
        esa_separation_check(emb, BOTTOM, TOP)
    wide = build_esa(Code((0, 2, 0)), 2)
    ok, msg = esa_separation_check(wide, Vertex(1, (0, 0)), Vertex(1, (1, 1)))
    assert ok, msg


def test_separation_counterexample_under_positive_convention():
    code = Code((0, 1, 1, 2, 0))
    u, v = Vertex(3, (0, 0)), Vertex(3, (1, 0))
    ok, msg = esa_separation_check(build_esa(code, 2, POSITIVE), u, v)
    assert not ok and msg.startswith("block 65")
    assert esa_separation_check(build_esa(code, 2, INCLUDE_ZERO), u, v) == (True, "")


def test_suites_on_small_corpus():
    for code in all_codes(5, 2):
        emb = build_esa(code, 2, INCLUDE_ZERO)
        pos = build_esa(code, 2, POSITIVE)
        for v in emb.vertices:
            assert not list(check_block_lemma(emb, v))
        assert not list(check_bounds(emb))
        assert not list(check_bounds(pos))
        for u, v in itertools.combinations(emb.vertices, 2):
            if not updown(code, u, v):
                assert esa_separation_check(emb, u, v)[0]


def test_bounds_are_exact_on_comparable_pairs():
    code = Code((0, 2, 1, 0))
    emb = build_esa(code, 2)
    for u, v, val in pair_norms(emb):
        d = dist_formula(code, u, v)
        if updown(code, u, v):
            assert val == d


def test_guard():
    with pytest.raises(ESAGuardError) as err:
        build_esa(Code((0, 3, 0)), 3)
    assert err.value.mu == 40
