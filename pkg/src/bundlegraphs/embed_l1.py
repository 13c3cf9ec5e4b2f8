"""Embedding into ``L1[0, M+1]`` by characteristic functions of interval sets.

Each vertex ``v = (r, A)`` gets a set ``S(v)`` of measure ``r``.  Depth
level ``i`` carves a piece ``S_x(v, i)`` out of the region left over by
level ``i-1`` with a selection map that behaves like an independent
Bernoulli variable for every node ``A|i`` of the address tree.

Independence is arranged by scale.  The registry keeps a global lattice
level ``L``: every set built so far is a union of cells of length
``D**-L``.  A new selection on a base interval cuts it into blocks that
divide those cells, so it splits every earlier set in the same proportion
``k/D``.  That is the property the intersection formula needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from bundlegraphs.coding import Address, Code, Vertex, as_code, check_vertex, enumerate_nodes, iter_vertices, nm, updown
from bundlegraphs.graph import DEFAULT_VERTEX_LIMIT, SizeGuardError, dist_formula, vertex_count
from bundlegraphs.intervals import (
    MaybePattern,
    NotGridRepresentable,
    Pattern,
    Rep,
    intersection_measure,
    measure,
    pattern_grid_level,
    subdivide,
    unit_cells,
)

SEPARATED = "separated"
PAPER_EXACT = "paper_exact"
SCALE_MODES = (SEPARATED, PAPER_EXACT)

# exponent of 2**i * 3**j beyond which paper_exact mode gives up
PAPER_THETA_LIMIT = 5000


class ConstructionError(RuntimeError):
    """An internal identity of the construction failed."""


@dataclass(frozen=True)
class Registration:
    order: int
    node: Address
    node_index: int
    base: Pattern
    base_index: int
    theta: int
    level_before: int
    level_after: int


class ScaleRegistry:
    """Assigns the subdivision exponent ``theta`` to each (node, base) pair, once."""

    def __init__(self, D: int, mode: str, node_index: dict[Address, int]):
        if mode not in SCALE_MODES:
            raise ValueError(f"unknown scale mode {mode!r}")
        self.D = D
        self.mode = mode
        self.node_index = node_index
        self.level = 0
        self.base_index: dict[Pattern, int] = {}
        self.calls: dict[tuple[Address, Pattern], Registration] = {}
        self.order: list[Registration] = []

    def index_of(self, base: Pattern) -> int:
        """Position of ``base`` in the enumeration of sets; 0 is reserved for the empty set."""
        j = self.base_index.get(base)
        if j is None:
            j = len(self.base_index) + 1
            if self.mode == PAPER_EXACT:
                # the enumeration needs N(P_j) <= j; skipping indices is allowed
                j = max(j, max(self.base_index.values(), default=0) + 1, self.grid_level(base))
            self.base_index[base] = j
        return j

    def grid_level(self, base: Pattern) -> int:
        return pattern_grid_level(base, self.D)

    def register(self, node: Address, base: Pattern) -> Registration:
        key = (node, base)
        reg = self.calls.get(key)
        if reg is not None:
            return reg
        j = self.index_of(base)
        i = self.node_index[node]
        before = self.level
        if self.mode == SEPARATED:
            theta = self._aligned_theta(base)
        else:
            exponent = 2**i * 3**j
            if exponent > PAPER_THETA_LIMIT:
                raise SizeGuardError("paper-mode subdivision exponent", exponent, PAPER_THETA_LIMIT)
            theta = exponent - self.grid_level(base)
            if theta < 0:
                raise ConstructionError(f"negative theta for node {node}")
        self.level = max(self.level, self._level_after(base, theta))
        reg = Registration(len(self.order), node, i, base, j, theta, before, self.level)
        self.calls[key] = reg
        self.order.append(reg)
        return reg

    def _lengths(self, base: Pattern) -> set[Fraction]:
        out = set()
        stack: list[Pattern] = [base]
        while stack:
            p = stack.pop()
            if isinstance(p, Rep):
                stack.append(p.child)
            else:
                out.add(p.measure)
        return out

    def _aligned_theta(self, base: Pattern) -> int:
        # least theta whose blocks |I| / D**theta divide the current cell D**-level
        cell = Fraction(1, self.D**self.level)
        theta = 0
        for length in self._lengths(base):
            t = 0
            while (cell * self.D**t / length).denominator != 1:
                t += 1
            theta = max(theta, t)
        return theta

    def _level_after(self, base: Pattern, theta: int) -> int:
        # least level whose cells divide every part |I| / D**(theta+1)
        level = self.level
        for length in self._lengths(base):
            part = length / self.D ** (theta + 1)
            while (part * self.D**level).denominator != 1:
                level += 1
        return level


@dataclass(frozen=True)
class Selection:
    """The selection data used at one depth level of one vertex."""

    registration: Registration
    k_x: int
    k_y: int


@dataclass
class L1Embedding:
    code: Code
    kappa: int
    D: int
    mode: str
    registry: ScaleRegistry
    sx: dict[Vertex, tuple[MaybePattern, ...]] = field(default_factory=dict)
    sy: dict[Vertex, tuple[MaybePattern, ...]] = field(default_factory=dict)
    leftover: dict[Vertex, tuple[MaybePattern, ...]] = field(default_factory=dict)
    selections: dict[Vertex, tuple[Selection, ...]] = field(default_factory=dict)
    _meets: dict[tuple[int, int], Fraction] = field(default_factory=dict, repr=False)

    @property
    def vertices(self) -> list[Vertex]:
        return list(self.sx)

    def measure(self, v: Vertex) -> Fraction:
        return sum((measure(p) for p in self.sx[v]), Fraction(0))

    def pieces(self, v: Vertex) -> tuple[MaybePattern, ...]:
        """The sets ``S_x(v, i)``; their union is ``S(v)`` up to finitely many points."""
        return self.sx[v]

    def piece_meet(self, p: MaybePattern, q: MaybePattern) -> Fraction:
        if p is None or q is None:
            return Fraction(0)
        if p is q:
            return p.measure
        key = (id(p), id(q)) if id(p) <= id(q) else (id(q), id(p))
        val = self._meets.get(key)
        if val is None:
            val = intersection_measure(p, q)
            self._meets[key] = val
        return val

    def intersection(self, u: Vertex, v: Vertex) -> Fraction:
        # pieces of one vertex are pairwise disjoint, so measures add
        return sum(
            (self.piece_meet(p, q) for p in self.sx[u] for q in self.sx[v]),
            Fraction(0),
        )


def grid_base(code: Code) -> int:
    return math.lcm(*range(1, code.height + 1))


def _count(numer: int, gap: int, D: int) -> int:
    k = Fraction(numer * D, gap)
    if k.denominator != 1 or not 0 <= k <= D:
        raise ConstructionError(f"selection count {k} is not an integer in [0, {D}]")
    return int(k)


def build_l1(
    code: Code,
    kappa: int,
    mode: str = SEPARATED,
    limit: int = DEFAULT_VERTEX_LIMIT,
) -> L1Embedding:
    code = as_code(code)
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    count = vertex_count(code, kappa)
    if count > limit:
        raise SizeGuardError("bundle graph", count, limit)
    D = grid_base(code)
    nodes = enumerate_nodes(kappa, code.maxdepth)
    registry = ScaleRegistry(D, mode, {a: i for i, a in enumerate(nodes)})
    emb = L1Embedding(code, kappa, D, mode, registry)
    canon: dict[Pattern, Pattern] = {}

    def intern(p: MaybePattern) -> MaybePattern:
        if p is None:
            return None
        return canon.setdefault(p, p)

    for v in iter_vertices(code, kappa):
        r, a = v
        x1, y1 = code.x(r, 1), code.y(r, 1)
        sx = [intern(unit_cells(0, x1))]
        sy = [intern(unit_cells(0, y1))]
        rest = [intern(unit_cells(x1, y1))]
        sels = []
        for i in range(1, len(a) + 1):
            base = rest[-1]
            if base is None:
                raise ConstructionError(f"empty base at level {i} for {v}")
            xi, yi = code.x(r, i), code.y(r, i)
            gap = yi - xi
            kx = _count(code.x(r, i + 1) - xi, gap, D)
            ky = _count(code.y(r, i + 1) - xi, gap, D)
            reg = registry.register(a[:i], base)
            sx.append(intern(subdivide(base, reg.theta, 0, kx, D)))
            sy.append(intern(subdivide(base, reg.theta, 0, ky, D)))
            rest.append(intern(subdivide(base, reg.theta, kx, ky, D)))
            sels.append(Selection(reg, kx, ky))
        emb.sx[v] = tuple(sx)
        emb.sy[v] = tuple(sy)
        emb.leftover[v] = tuple(rest)
        emb.selections[v] = tuple(sels)
    return emb


def dist_l1(emb: L1Embedding, u: Vertex, v: Vertex) -> Fraction:
    """``||chi_S(u) - chi_S(v)||_1``, exactly."""
    return emb.measure(u) + emb.measure(v) - 2 * emb.intersection(u, v)


def expected_intersection(code: Code, u: Vertex, v: Vertex) -> Fraction:
    """Closed form of ``measure(S(u) ∩ S(v))``."""
    r, s = u.height, v.height
    if updown(code, u, v):
        return Fraction(min(r, s))
    n, m = nm(code, u, v)
    return n + Fraction((r - n) * (s - n), m - n)


# -- verification suites ---------------------------------------------------


@dataclass(frozen=True)
class Failure:
    check: str
    detail: str


def check_selection_lemma(emb: L1Embedding) -> Iterator[Failure]:
    """Nesting in ``k``, exact measure, and proportional splitting of earlier sets.

    For each registered selection and each count ``k`` used with it, every
    set registered earlier (bases and selection outputs) must meet the output
    in exactly ``k/D`` of what it meets the base in.
    """
    D = emb.D
    used: dict[int, set[int]] = {}
    for sels in emb.selections.values():
        for sel in sels:
            used.setdefault(sel.registration.order, set()).update((sel.k_x, sel.k_y))
    earlier: list[Pattern] = []
    for reg in emb.registry.order:
        ks = sorted(used.get(reg.order, ()))
        outs = {k: subdivide(reg.base, reg.theta, 0, k, D) for k in ks}
        for k in ks:
            out = outs[k]
            if measure(out) != Fraction(k, D) * reg.base.measure:
                yield Failure("measure", f"call {reg.order}, k={k}")
            if intersection_measure(out, reg.base) != measure(out):
                yield Failure("nesting", f"call {reg.order}, k={k} leaves its base")
            for k2 in ks:
                if k <= k2 and intersection_measure(out, outs[k2]) != measure(out):
                    yield Failure("nesting", f"call {reg.order}, k={k} not inside k={k2}")
            for q in earlier:
                lhs = intersection_measure(q, out)
                rhs = Fraction(k, D) * intersection_measure(q, reg.base)
                if lhs != rhs:
                    yield Failure("independence", f"call {reg.order}, k={k}: {lhs} != {rhs}")
            if emb.mode == PAPER_EXACT and reg.base_index != 0 and k != 0:
                band = 2**reg.node_index * 3**reg.base_index
                try:
                    level = pattern_grid_level(out, D)  # type: ignore[arg-type]
                except NotGridRepresentable:
                    yield Failure("grid band", f"call {reg.order} output is off the grid")
                else:
                    if not band - 1 <= level <= band + 2:
                        yield Failure("grid band", f"call {reg.order}: level {level} outside [{band - 1}, {band + 2}]")
        earlier.append(reg.base)
        earlier.extend(o for o in outs.values() if o is not None)


def check_levels(emb: L1Embedding, v: Vertex) -> Iterator[Failure]:
    """Measures of the per-level sets, their disjointness and running totals."""
    code = emb.code
    r = v.height
    sx, sy = emb.sx[v], emb.sy[v]
    total = Fraction(0)
    for i in range(len(sx)):
        x0, x1, y1 = code.x(r, i), code.x(r, i + 1), code.y(r, i + 1)
        if measure(sx[i]) != x1 - x0:
            yield Failure("S_x measure", f"{v} level {i}: {measure(sx[i])} != {x1 - x0}")
        if measure(sy[i]) != y1 - x0:
            yield Failure("S_y measure", f"{v} level {i}: {measure(sy[i])} != {y1 - x0}")
        gap = measure(sy[i]) - emb.piece_meet(sx[i], sy[i])
        if gap != y1 - x1:
            yield Failure("S_y minus S_x", f"{v} level {i}: {gap} != {y1 - x1}")
        if emb.piece_meet(sx[i], sy[i]) != measure(sx[i]):
            yield Failure("S_x inside S_y", f"{v} level {i}")
        for j in range(i):
            if emb.piece_meet(sx[i], sx[j]) != 0:
                yield Failure("disjointness", f"{v} levels {j} and {i} overlap")
        total += measure(sx[i])
        if total != x1:
            yield Failure("cumulative", f"{v} up to level {i}: {total} != {x1}")


def check_pair(emb: L1Embedding, u: Vertex, v: Vertex) -> Iterator[Failure]:
    """Intersection formula, Lipschitz sandwich and equality on comparable pairs."""
    code = emb.code
    got = emb.intersection(u, v)
    want = expected_intersection(code, u, v)
    if got != want:
        yield Failure("intersection", f"{u}, {v}: {got} != {want}")
    d = dist_formula(code, u, v)
    dl = emb.measure(u) + emb.measure(v) - 2 * got
    if not Fraction(d, 2) <= dl <= d:
        yield Failure("bounds", f"{u}, {v}: distance {dl} outside [{d}/2, {d}]")
    if updown(code, u, v) and dl != d:
        yield Failure("comparable equality", f"{u}, {v}: {dl} != {d}")


def psi_l1_summary(emb: L1Embedding, v: Vertex) -> dict[str, object]:
    check_vertex(emb.code, v)
    return {
        "measure": emb.measure(v),
        "levels": [measure(p) for p in emb.sx[v]],
    }
