"""Materialized bundle graphs, their metric, and the recursive construction."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Union

from bundlegraphs.coding import (
    Code,
    CodeError,
    Vertex,
    as_code,
    check_vertex,
    format_vertex,
    is_prefix,
    nm,
    updown,
)

DEFAULT_VERTEX_LIMIT = 10**6


class SizeGuardError(ValueError):
    """A construction would exceed its configured size cap."""

    def __init__(self, what: str, size: int, limit: int):
        super().__init__(f"{what} would have {size} elements, limit is {limit}")
        self.what = what
        self.size = size
        self.limit = limit


def vertex_count(code: Code, kappa: int) -> int:
    return sum(kappa**w for w in code.depths)


@dataclass(frozen=True, eq=False)
class BundleGraph:
    code: Code
    kappa: int
    vertices: tuple[Vertex, ...]
    adjacency: tuple[tuple[int, ...], ...]
    index: dict[Vertex, int] = field(repr=False)

    @property
    def bottom(self) -> Vertex:
        return Vertex(0, ())

    @property
    def top(self) -> Vertex:
        return Vertex(self.code.height, ())

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v: object) -> bool:
        return v in self.index

    def edges(self) -> list[tuple[Vertex, Vertex]]:
        """Each edge once, lower endpoint first."""
        out = []
        for i, nbrs in enumerate(self.adjacency):
            u = self.vertices[i]
            for j in nbrs:
                v = self.vertices[j]
                if v.height > u.height:
                    out.append((u, v))
        return out

    def edge_count(self) -> int:
        return sum(len(n) for n in self.adjacency) // 2

    def dump(self) -> str:
        lines = [format_vertex(v) for v in self.vertices]
        lines += [f"{format_vertex(u)} -- {format_vertex(v)}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"


def materialize(code: Code, kappa: int, limit: int = DEFAULT_VERTEX_LIMIT) -> BundleGraph:
    """Build ``T_{W,kappa}``: vertices height-major, addresses lexicographic."""
    code = as_code(code)
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    count = vertex_count(code, kappa)
    if count > limit:
        raise SizeGuardError("bundle graph", count, limit)

    vertices = [
        Vertex(r, a)
        for r, w in enumerate(code.depths)
        for a in itertools.product(range(kappa), repeat=w)
    ]
    index = {v: i for i, v in enumerate(vertices)}
    adj: list[list[int]] = [[] for _ in vertices]
    for r in range(code.height):
        lo, hi = code[r], code[r + 1]
        # one edge per address of the longer endpoint
        for a in itertools.product(range(kappa), repeat=max(lo, hi)):
            u = index[Vertex(r, a[:lo])]
            v = index[Vertex(r + 1, a[:hi])]
            adj[u].append(v)
            adj[v].append(u)
    return BundleGraph(
        code=code,
        kappa=kappa,
        vertices=tuple(vertices),
        adjacency=tuple(tuple(sorted(n)) for n in adj),
        index=index,
    )


def dist_formula(code: Code, u: Vertex, v: Vertex) -> int:
    """Closed-form shortest-path distance; valid for any branching."""
    code = as_code(code)
    check_vertex(code, u)
    check_vertex(code, v)
    r, s = u.height, v.height
    if updown(code, u, v):
        return abs(r - s)
    n, m = nm(code, u, v)
    return min(r + s - 2 * n, 2 * m - (r + s))


def bfs_from(graph: BundleGraph, u: Vertex) -> list[int]:
    if u not in graph.index:
        raise KeyError(f"vertex {format_vertex(u)} not in graph")
    dist = [-1] * len(graph.vertices)
    start = graph.index[u]
    dist[start] = 0
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j in graph.adjacency[i]:
            if dist[j] < 0:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def dist_bfs(graph: BundleGraph, u: Vertex, v: Vertex) -> int:
    if v not in graph.index:
        raise KeyError(f"vertex {format_vertex(v)} not in graph")
    return bfs_from(graph, u)[graph.index[v]]


# -- recursive construction -------------------------------------------------


@dataclass(frozen=True)
class Init:
    pass


@dataclass(frozen=True)
class Parallel:
    lower: "BuildScript"
    upper: "BuildScript"


@dataclass(frozen=True)
class Series:
    inner: "BuildScript"
    kappa: int


BuildScript = Union[Init, Parallel, Series]


@dataclass
class _Raw:
    # Anonymous node ids; labels come from the copy history, not from T_{W,kappa}.
    size: int
    bottom: int
    top: int
    edges: list[tuple[int, int]]
    depth: list[int]
    copies: list[tuple[int, ...]]


def _build(script: BuildScript) -> _Raw:
    if isinstance(script, Init):
        return _Raw(2, 0, 1, [(0, 1)], [0, 0], [(), ()])
    if isinstance(script, Parallel):
        g1, g2 = _build(script.lower), _build(script.upper)
        # g2's bottom becomes g1's top; other g2 nodes are shifted past g1.
        remap = {}
        nxt = g1.size
        for i in range(g2.size):
            if i == g2.bottom:
                remap[i] = g1.top
            else:
                remap[i] = nxt
                nxt += 1
        depth = g1.depth + [0] * (nxt - g1.size)
        copies = g1.copies + [()] * (nxt - g1.size)
        for i in range(g2.size):
            if i != g2.bottom:
                depth[remap[i]] = g2.depth[i]
                copies[remap[i]] = g2.copies[i]
        edges = g1.edges + [(remap[a], remap[b]) for a, b in g2.edges]
        return _Raw(nxt, g1.bottom, remap[g2.top], edges, depth, copies)
    if isinstance(script, Series):
        g = _build(script.inner)
        if script.kappa < 1:
            raise ValueError("series multiplicity must be >= 1")
        inner = [i for i in range(g.size) if i not in (g.bottom, g.top)]
        bottom, top = 0, 1
        ids = {}
        depth = [0, 0]
        copies: list[tuple[int, ...]] = [(), ()]
        for c in range(script.kappa):
            for i in inner:
                ids[c, i] = len(depth)
                depth.append(g.depth[i] + 1)
                # the outermost copy index leads the address
                copies.append((c,) + g.copies[i])

        def node(c: int, i: int) -> int:
            if i == g.bottom:
                return bottom
            if i == g.top:
                return top
            return ids[c, i]

        edges = [(node(c, a), node(c, b)) for c in range(script.kappa) for a, b in g.edges]
        return _Raw(len(depth), bottom, top, edges, depth, copies)
    raise TypeError(f"not a build script: {script!r}")


@dataclass(frozen=True)
class LabelledGraph:
    code: Code
    vertices: frozenset[Vertex]
    edges: frozenset[frozenset[Vertex]]
    kappas: frozenset[int]


def build_recursive(script: BuildScript) -> LabelledGraph:
    """Run the parallel/series operations and label each vertex by (height, copy path).

    Heights are breadth-first distances from the bottom; the depth recorded
    at every height gives the derived code.
    """
    raw = _build(script)
    adj: list[list[int]] = [[] for _ in range(raw.size)]
    for a, b in raw.edges:
        adj[a].append(b)
        adj[b].append(a)
    height = [-1] * raw.size
    height[raw.bottom] = 0
    queue = deque([raw.bottom])
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if height[j] < 0:
                height[j] = height[i] + 1
                queue.append(j)
    h = height[raw.top]
    depths: list[int | None] = [None] * (h + 1)
    for i in range(raw.size):
        r = height[i]
        if depths[r] is None:
            depths[r] = raw.depth[i]
        elif depths[r] != raw.depth[i]:
            raise CodeError(f"height {r} carries depths {depths[r]} and {raw.depth[i]}")
        if len(raw.copies[i]) != raw.depth[i]:
            raise AssertionError("copy path length differs from depth")
    code = Code(tuple(int(d) for d in depths if d is not None))
    label = [Vertex(height[i], raw.copies[i]) for i in range(raw.size)]
    return LabelledGraph(
        code=code,
        vertices=frozenset(label),
        edges=frozenset(frozenset((label[a], label[b])) for a, b in raw.edges),
        kappas=frozenset(_multiplicities(script)),
    )


def _multiplicities(script: BuildScript) -> set[int]:
    if isinstance(script, Init):
        return set()
    if isinstance(script, Parallel):
        return _multiplicities(script.lower) | _multiplicities(script.upper)
    return {script.kappa} | _multiplicities(script.inner)


@dataclass(frozen=True)
class RoundTrip:
    ok: bool
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_code_roundtrip(script: BuildScript) -> RoundTrip:
    """Compare the recursive construction with ``T_{W,kappa}`` of its derived code."""
    built = build_recursive(script)
    if len(built.kappas) > 1:
        raise ValueError(f"mixed series multiplicities {sorted(built.kappas)}")
    kappa = next(iter(built.kappas), 1)
    graph = materialize(built.code, kappa)
    expected = set(graph.vertices)
    for v in sorted(built.vertices ^ expected):
        side = "construction" if v in built.vertices else "materialized graph"
        return RoundTrip(False, f"vertex {format_vertex(v)} only in the {side}")
    expected_edges = {frozenset(e) for e in graph.edges()}
    for e in sorted(built.edges ^ expected_edges, key=lambda e: sorted(e)):
        u, v = sorted(e)
        side = "construction" if e in built.edges else "materialized graph"
        return RoundTrip(False, f"edge {format_vertex(u)} -- {format_vertex(v)} only in the {side}")
    if len(built.edges) != graph.edge_count():
        return RoundTrip(False, "construction has parallel edges")
    return RoundTrip(True)


def is_edge(u: Vertex, v: Vertex) -> bool:
    """Adjacency rule of ``T_{W,kappa}`` for two valid vertices."""
    if abs(u.height - v.height) != 1:
        return False
    return is_prefix(u.address, v.address) or is_prefix(v.address, u.address)
