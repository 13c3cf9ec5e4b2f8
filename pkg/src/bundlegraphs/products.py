"""Edge-replacement products of bundle graphs and their codes.

``G ⊘_n H`` replaces every edge between heights ``n`` and ``n+1`` of ``G``
by a copy of ``H``; ``G ⊘ H`` replaces every edge.  On codes both have
closed forms, and an explicit map carries the literal edge-replacement
graph onto ``T_{W'',kappa}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from bundlegraphs.coding import Code, Vertex, as_code, format_vertex, is_prefix, xy_tables, xyz
from bundlegraphs.graph import DEFAULT_VERTEX_LIMIT, SizeGuardError, materialize

DEFAULT_LENGTH_LIMIT = 10**6


def oslash_n(w: Code | Sequence[int], wp: Code | Sequence[int], n: int) -> Code:
    w, wp = as_code(w), as_code(wp)
    big_m = w.height - 1
    inner = wp.height - 1
    if not 0 <= n <= big_m:
        raise ValueError(f"level n={n} outside [0, {big_m}]")
    k = max(w[n], w[n + 1])
    out = list(w.depths[: n + 1])
    out += [k + wp[r - n] for r in range(n + 1, n + inner + 1)]
    out += list(w.depths[n + 1 :])
    return Code(tuple(out))


def oslash(w: Code | Sequence[int], wp: Code | Sequence[int]) -> Code:
    w, wp = as_code(w), as_code(wp)
    block = wp.height
    out = [0]
    for n in range(w.height):
        k = max(w[n], w[n + 1])
        out += [k + wp[t] for t in range(1, block)]
        out.append(w[n + 1])
    return Code(tuple(out))


def oslash_iterated(w: Code | Sequence[int], wp: Code | Sequence[int]) -> Code:
    """``W ⊘ W'`` by replacing one level at a time, top level first."""
    w, wp = as_code(w), as_code(wp)
    out = w
    for n in range(w.height - 1, -1, -1):
        out = oslash_n(out, wp, n)
    return out


def family(w: Code | Sequence[int], k: int, limit: int = DEFAULT_LENGTH_LIMIT) -> Code:
    """``G^{⊘k}``: ``family(w, 1) = w`` and ``family(w, k+1) = family(w, k) ⊘ w``."""
    w = as_code(w)
    if k < 1:
        raise ValueError(f"family index must be >= 1, got {k}")
    size = w.height**k + 1
    if size > limit:
        raise SizeGuardError("family code", size, limit)
    out = w
    for _ in range(k - 1):
        out = oslash(out, w)
    return out


# -- the literal edge-replacement graph ------------------------------------


class Original(NamedTuple):
    vertex: Vertex


class Composite(NamedTuple):
    """Interior vertex ``inner`` of the copy of ``H`` sitting on edge ``lower -- upper``."""

    lower: Vertex
    upper: Vertex
    inner: Vertex


ProductVertex = Union[Original, Composite]


@dataclass(frozen=True)
class ReplacedGraph:
    vertices: frozenset[ProductVertex]
    edges: frozenset[frozenset[ProductVertex]]


def replace_edges(
    w: Code,
    wp: Code,
    kappa: int,
    levels: Sequence[int] | None = None,
    limit: int = DEFAULT_VERTEX_LIMIT,
) -> ReplacedGraph:
    """Replace each edge of ``T_{W,kappa}`` starting at a height in ``levels`` by ``T_{W',kappa}``.

    ``levels=None`` replaces every edge.  The bottom of each copy is glued
    to the lower endpoint and the top to the upper one.
    """
    w, wp = as_code(w), as_code(wp)
    g = materialize(w, kappa, limit)
    h = materialize(wp, kappa, limit)
    chosen = set(range(w.height)) if levels is None else set(levels)
    verts: set[ProductVertex] = {Original(v) for v in g.vertices}
    edges: set[frozenset[ProductVertex]] = set()
    inner = [v for v in h.vertices if v not in (h.bottom, h.top)]
    h_edges = h.edges()
    for lo, hi in g.edges():
        if lo.height not in chosen:
            edges.add(frozenset((Original(lo), Original(hi))))
            continue

        def glue(v: Vertex) -> ProductVertex:
            if v == h.bottom:
                return Original(lo)
            if v == h.top:
                return Original(hi)
            return Composite(lo, hi, v)

        verts.update(Composite(lo, hi, v) for v in inner)
        edges.update(frozenset((glue(a), glue(b))) for a, b in h_edges)
    size = len(verts)
    if size > limit:
        raise SizeGuardError("edge-replaced graph", size, limit)
    return ReplacedGraph(frozenset(verts), frozenset(edges))


def _longer(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    if is_prefix(a, b):
        return b
    if is_prefix(b, a):
        return a
    raise ValueError(f"addresses {a} and {b} are not prefix-comparable")


def isomorphism_F(w: Code, wp: Code, n: int, v: ProductVertex) -> Vertex:
    """Image of a vertex of the ``⊘_n`` edge-replacement graph in ``T_{W'',kappa}``."""
    w, wp = as_code(w), as_code(wp)
    inner = wp.height - 1
    if isinstance(v, Original):
        r, a = v.vertex
        return Vertex(r, a) if r <= n else Vertex(r + inner, a)
    if isinstance(v, Composite):
        if (v.lower.height, v.upper.height) != (n, n + 1):
            raise ValueError(f"composite vertex does not sit on a level-{n} edge")
        t, c = v.inner
        if not 0 < t < wp.height:
            raise ValueError(f"inner height {t} is not interior to the factor")
        return Vertex(n + t, _longer(v.lower.address, v.upper.address) + c)
    raise TypeError(f"not a product vertex: {v!r}")


def isomorphism_full(w: Code, wp: Code, v: ProductVertex) -> Vertex:
    """Image of a vertex of the full ``⊘`` edge-replacement graph in ``T_{W⊘W',kappa}``."""
    w, wp = as_code(w), as_code(wp)
    block = wp.height
    if isinstance(v, Original):
        r, a = v.vertex
        return Vertex(r * block, a)
    if isinstance(v, Composite):
        n = v.lower.height
        if v.upper.height != n + 1:
            raise ValueError("composite vertex does not sit on an edge")
        t, c = v.inner
        return Vertex(n * block + t, _longer(v.lower.address, v.upper.address) + c)
    raise TypeError(f"not a product vertex: {v!r}")


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_isomorphism(
    w: Code | Sequence[int], wp: Code | Sequence[int], kappa: int, n: int | None = None
) -> CheckResult:
    """Map the edge-replacement graph through F and compare with the materialized product.

    ``n=None`` checks the full product, otherwise the single level ``n``.
    """
    w, wp = as_code(w), as_code(wp)
    if n is None:
        replaced = replace_edges(w, wp, kappa)
        target = materialize(oslash(w, wp), kappa)

        def image(v: ProductVertex) -> Vertex:
            return isomorphism_full(w, wp, v)
    else:
        replaced = replace_edges(w, wp, kappa, [n])
        target = materialize(oslash_n(w, wp, n), kappa)

        def image(v: ProductVertex) -> Vertex:
            return isomorphism_F(w, wp, n, v)

    mapping = {v: image(v) for v in replaced.vertices}
    if len(set(mapping.values())) != len(mapping):
        return CheckResult(False, "map is not injective")
    if set(mapping.values()) != set(target.vertices):
        missing = sorted(set(target.vertices) - set(mapping.values()))
        extra = sorted(set(mapping.values()) - set(target.vertices))
        bad = (missing or extra)[0]
        return CheckResult(False, f"vertex {format_vertex(bad)} not matched")
    mapped = {frozenset(mapping[x] for x in e) for e in replaced.edges}
    expected = {frozenset(e) for e in target.edges()}
    if mapped != expected:
        bad = sorted(sorted(e) for e in mapped ^ expected)[0]
        return CheckResult(False, "edge " + " -- ".join(format_vertex(x) for x in bad) + " not matched")
    return CheckResult(True)


# -- x'' and y'' from the factors ------------------------------------------


def composed_xy(w: Code, wp: Code, r: int, i: int) -> tuple[int, int]:
    """``x''(r, i)`` and ``y''(r, i)`` computed from ``W`` and ``W'`` alone."""
    block = wp.height
    if r == 0:
        return 0, (0 if i > 0 else w.height * block)
    n, t = divmod(r - 1, block)
    t += 1
    k = max(w[n], w[n + 1])
    if t == block:
        return block * xyz(w, n + 1, i).x, block * xyz(w, n + 1, i).y
    if i <= k:
        x = block * xyz(w, n, i).x
        y = block * xyz(w, n + 1, i).y
        return x, y
    inner = xyz(wp, t, i - k)
    return n * block + inner.x, n * block + inner.y


def check_composed_xy(w: Code | Sequence[int], wp: Code | Sequence[int]) -> CheckResult:
    w, wp = as_code(w), as_code(wp)
    composed = oslash(w, wp)
    for r in range(composed.height + 1):
        for i in range(composed.maxdepth + 2):
            direct = xyz(composed, r, i)
            x, y = composed_xy(w, wp, r, i)
            if (x, y) != (direct.x, direct.y):
                return CheckResult(
                    False,
                    f"(r, i) = ({r}, {i}): formula gives ({x}, {y}), direct scan ({direct.x}, {direct.y})",
                )
    return CheckResult(True)


def oslash_many(w: Code, wps: np.ndarray) -> np.ndarray:
    """``W ⊘ W'`` for a stack of equal-length codes ``W'`` (one per row)."""
    w = as_code(w)
    wps = np.asarray(wps, dtype=np.int64)
    block = wps.shape[1] - 1
    out = np.zeros((wps.shape[0], w.height * block + 1), dtype=np.int64)
    for n in range(w.height):
        k = max(w[n], w[n + 1])
        base = n * block
        out[:, base + 1 : base + block] = k + wps[:, 1:block]
        out[:, base + block] = w[n + 1]
    return out


def check_composed_xy_many(w: Code, wps: np.ndarray) -> np.ndarray:
    """Vectorized :func:`check_composed_xy`; one boolean per row of ``wps``."""
    w = as_code(w)
    wps = np.asarray(wps, dtype=np.int64)
    composed = oslash_many(w, wps)
    levels = int(composed.max(initial=0)) + 2
    xs2, ys2 = xy_tables(composed, levels)
    xs1, ys1 = xy_tables(np.asarray([w.depths]), levels)
    xsp, ysp = xy_tables(wps, levels)
    block = wps.shape[1] - 1
    ok = np.ones(wps.shape[0], dtype=bool)
    for i in range(levels):
        # r = 0 lies outside every block
        ok &= xs2[i, :, 0] == 0
        ok &= ys2[i, :, 0] == (0 if i > 0 else w.height * block)
        for n in range(w.height):
            k = max(w[n], w[n + 1])
            end = (n + 1) * block
            ok &= xs2[i, :, end] == block * xs1[i, 0, n + 1]
            ok &= ys2[i, :, end] == block * ys1[i, 0, n + 1]
            for t in range(1, block):
                r = n * block + t
                if i <= k:
                    ex = block * xs1[i, 0, n]
                    ey = block * ys1[i, 0, n + 1]
                else:
                    j = min(i - k, levels - 1)
                    ex = n * block + xsp[j, :, t]
                    ey = n * block + ysp[j, :, t]
                ok &= xs2[i, :, r] == ex
                ok &= ys2[i, :, r] == ey
    return ok
