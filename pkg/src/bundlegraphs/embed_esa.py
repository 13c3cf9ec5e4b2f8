"""Embedding into the summing-basis space, an ESA target.

The norm of ``sum a_n e_n`` is the largest absolute partial sum
``max_k |a_1 + ... + a_k|``.  The basis positions are cut into blocks
``I_j`` of length ``M+1``.  Inside block ``j``, a vertex selects a run of
positions, choosing at every depth level between the front and the back of
the remaining run according to an explicit Bernoulli selector
``Y_A(j)``.  The selection is copied forwards into block ``2j-1`` and
mirrored into block ``2j`` with opposite sign.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from bundlegraphs.coding import (
    POSITIVE,
    Address,
    Code,
    Vertex,
    as_code,
    enumerate_nodes,
    iter_vertices,
    meet,
    p_param,
    restrict,
    updown,
)
from bundlegraphs.graph import dist_formula

DEFAULT_MU_LIMIT = 20
DEFAULT_LENGTH_LIMIT = 10**7


class ESAGuardError(ValueError):
    def __init__(self, mu: int, length: int, mu_limit: int, length_limit: int):
        super().__init__(
            f"mu = {mu} and vector length {length} exceed the caps "
            f"mu <= {mu_limit}, length <= {length_limit}"
        )
        self.mu = mu
        self.length = length


# -- the summing norm ------------------------------------------------------


@dataclass(frozen=True)
class SummingVector:
    """Sparse vector over basis positions ``1, 2, ...`` with a scalar normalizer."""

    entries: tuple[tuple[int, int], ...] = ()
    scale: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        merged: dict[int, int] = {}
        for pos, c in self.entries:
            if pos < 1:
                raise ValueError(f"basis positions start at 1, got {pos}")
            merged[pos] = merged.get(pos, 0) + c
        object.__setattr__(self, "entries", tuple(sorted((p, c) for p, c in merged.items() if c)))
        object.__setattr__(self, "scale", Fraction(self.scale))

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[int], scale: Fraction = Fraction(1)) -> "SummingVector":
        return cls(tuple((n + 1, c) for n, c in enumerate(coeffs)), scale)

    def __sub__(self, other: "SummingVector") -> "SummingVector":
        if self.scale != other.scale:
            raise ValueError("vectors carry different normalizers")
        return SummingVector(self.entries + tuple((p, -c) for p, c in other.entries), self.scale)

    def dense(self, length: int | None = None) -> list[int]:
        n = length if length is not None else (self.entries[-1][0] if self.entries else 0)
        out = [0] * n
        for p, c in self.entries:
            out[p - 1] = c
        return out


def summing_norm(v: SummingVector) -> Fraction:
    best = 0
    running = 0
    for _, c in v.entries:
        running += c
        best = max(best, abs(running))
    return best * v.scale


def _norm(coeffs: Sequence[int]) -> int:
    best = running = 0
    for c in coeffs:
        running += c
        best = max(best, abs(running))
    return best


@dataclass(frozen=True)
class AxiomFailure:
    axiom: str
    vector: tuple[int, ...]
    detail: str


def check_esa_axioms(trials: int, seed: int) -> tuple[bool, AxiomFailure | None]:
    """Random check of equal-signs-additivity, subadditivity and spreading invariance."""
    rng = random.Random(seed)
    for _ in range(trials):
        n = rng.randint(2, 12)
        a = [rng.randint(-5, 5) for _ in range(n)]
        base = _norm(a)
        k = rng.randrange(n - 1)
        merged = a[:k] + [a[k] + a[k + 1]] + a[k + 2 :]
        if a[k] * a[k + 1] >= 0 and _norm(merged) != base:
            return False, AxiomFailure("ESA", tuple(a), f"merging at {k + 1} changes the norm")
        if _norm(merged) > base:
            return False, AxiomFailure("SA", tuple(a), f"merging at {k + 1} increases the norm")
        positions = sorted(rng.sample(range(1, 4 * n + 1), n))
        spread = SummingVector(tuple(zip(positions, a)))
        if summing_norm(spread) != base:
            return False, AxiomFailure("IS", tuple(a), f"spreading to {positions} changes the norm")
    return True, None


# -- Bernoulli selectors ---------------------------------------------------


@dataclass(frozen=True)
class BernoulliFamily:
    """Selectors ``Y_1..Y_mu`` on ``{1..2**mu}`` and the node-to-selector map.

    ``Y_i(j) = 1`` iff ``j`` is congruent modulo ``2**(mu-i+1)`` to one of
    ``1..2**(mu-i)``.  Nodes are numbered by length then lexicographically,
    so the empty address gets 0 (it never selects) and the others ``1..mu-1``.
    """

    mu: int
    index: dict[Address, int] = field(repr=False)

    @classmethod
    def for_tree(cls, kappa: int, depth: int) -> "BernoulliFamily":
        nodes = enumerate_nodes(kappa, depth)
        return cls(len(nodes), {a: i for i, a in enumerate(nodes)})

    @property
    def blocks(self) -> int:
        return 2**self.mu

    def Y(self, i: int, j: int) -> int:
        if not 1 <= i <= self.mu:
            raise ValueError(f"selector index {i} outside [1, {self.mu}]")
        if not 1 <= j <= self.blocks:
            raise ValueError(f"block index {j} outside [1, {self.blocks}]")
        period = 2 ** (self.mu - i + 1)
        return 1 if 1 <= j % period <= 2 ** (self.mu - i) else 0

    def Y_node(self, a: Address, j: int) -> int:
        return self.Y(self.index[a], j)

    def table(self) -> np.ndarray:
        """``table[i, j-1] = Y_i(j)``; row 0 is unused."""
        j = np.arange(1, self.blocks + 1)
        out = np.zeros((self.mu + 1, self.blocks), dtype=np.int8)
        for i in range(1, self.mu + 1):
            period = 2 ** (self.mu - i + 1)
            rem = j % period
            out[i] = (rem >= 1) & (rem <= period // 2)
        return out


# -- the construction ------------------------------------------------------


def _minus(p: range, q: range) -> range:
    """``p`` without ``q`` for runs; the result must again be a run."""
    if not q or q.stop <= p.start or q.start >= p.stop:
        return p
    left = range(p.start, max(p.start, q.start))
    right = range(min(p.stop, q.stop), p.stop)
    if left and right:
        raise ValueError(f"{p} minus {q} is not a run")
    return left or right


def _select(p: range, k: int, front: int) -> range:
    if k > len(p):
        raise ValueError(f"cannot select {k} elements from a run of {len(p)}")
    return range(p.start, p.start + k) if front else range(p.stop - k, p.stop)


@dataclass(frozen=True)
class BlockSets:
    """``S_x`` and ``S_y`` of one vertex at every level, as runs in ``1..M+1``."""

    sx: tuple[range, ...]
    sy: tuple[range, ...]

    @property
    def support(self) -> list[int]:
        return sorted(n for run in self.sx for n in run)


def _block_sets(code: Code, v: Vertex, pattern: tuple[int, ...]) -> BlockSets:
    r, a = v
    x1, y1 = code.x(r, 1), code.y(r, 1)
    sx = [range(1, x1 + 1)]
    sy = [range(1, y1 + 1)]
    for i in range(1, len(a) + 1):
        rest = _minus(sy[-1], sx[-1])
        front = pattern[i - 1]
        sx.append(_select(rest, code.x(r, i + 1) - code.x(r, i), front))
        sy.append(_select(rest, code.y(r, i + 1) - code.x(r, i), front))
    return BlockSets(tuple(sx), tuple(sy))


@dataclass
class ESAEmbedding:
    code: Code
    kappa: int
    family: BernoulliFamily
    p_w: int
    eta: Fraction
    patterns: dict[Vertex, np.ndarray] = field(repr=False)
    _cache: dict[tuple[Vertex, tuple[int, ...]], BlockSets] = field(default_factory=dict, repr=False)

    @property
    def block(self) -> int:
        return self.code.height

    @property
    def length(self) -> int:
        return 2 * self.family.blocks * self.block

    @property
    def vertices(self) -> list[Vertex]:
        return list(self.patterns)

    def offset(self, j: int) -> int:
        return (j - 1) * self.block

    def sets(self, v: Vertex, j: int) -> BlockSets:
        """Level sets of ``v`` in block ``j``, relative to the block start."""
        pattern = tuple(int(b) for b in self.patterns[v][:, j - 1])
        key = (v, pattern)
        got = self._cache.get(key)
        if got is None:
            got = _block_sets(self.code, v, pattern)
            self._cache[key] = got
        return got

    def sx(self, v: Vertex, j: int, i: int) -> range:
        run = self.sets(v, j).sx[i]
        return range(run.start + self.offset(j), run.stop + self.offset(j))

    def sy(self, v: Vertex, j: int, i: int) -> range:
        run = self.sets(v, j).sy[i]
        return range(run.start + self.offset(j), run.stop + self.offset(j))

    def S(self, v: Vertex, j: int) -> list[int]:
        return [n + self.offset(j) for n in self.sets(v, j).support]

    def S_plus(self, v: Vertex, j: int) -> list[int]:
        return [self.offset(j) + n for n in self.S(v, j)]

    def S_minus(self, v: Vertex, j: int) -> list[int]:
        # the reflection of block 2j-1 onto block 2j
        return sorted((3 * j - 1) * self.block + 1 - n for n in self.S(v, j))

    def dense(self, v: Vertex) -> np.ndarray:
        out = np.zeros(self.length, dtype=np.int8)
        for j in range(1, self.family.blocks + 1):
            for n in self.S_plus(v, j):
                out[n - 1] = 1
            for n in self.S_minus(v, j):
                out[n - 1] = -1
        return out

    def prefix_sums(self) -> np.ndarray:
        """Row ``t`` holds the partial sums of the (unnormalized) image of vertex ``t``."""
        rows = [self.dense(v) for v in self.vertices]
        return np.cumsum(np.asarray(rows, dtype=np.int32), axis=1)


def build_esa(
    code: Code,
    kappa: int,
    index_convention: str = POSITIVE,
    mu_limit: int = DEFAULT_MU_LIMIT,
    length_limit: int = DEFAULT_LENGTH_LIMIT,
) -> ESAEmbedding:
    code = as_code(code)
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    mu = sum(kappa**n for n in range(code.maxdepth + 1))
    length = 2 ** (mu + 1) * code.height
    if mu > mu_limit or length > length_limit:
        raise ESAGuardError(mu, length, mu_limit, length_limit)
    family = BernoulliFamily.for_tree(kappa, code.maxdepth)
    table = family.table()
    eta = Fraction(_norm([1, -1] * family.blocks))
    patterns = {}
    for v in iter_vertices(code, kappa):
        rows = [family.index[v.address[:i]] for i in range(1, len(v.address) + 1)]
        patterns[v] = table[rows] if rows else np.zeros((0, family.blocks), dtype=np.int8)
    return ESAEmbedding(code, kappa, family, p_param(code, index_convention), eta, patterns)


def psi_esa(emb: ESAEmbedding, v: Vertex) -> SummingVector:
    entries = []
    for j in range(1, emb.family.blocks + 1):
        entries += [(n, 1) for n in emb.S_plus(v, j)]
        entries += [(n, -1) for n in emb.S_minus(v, j)]
    return SummingVector(tuple(entries), 1 / emb.eta)


def theoretical_bound(p_w: int) -> int:
    return 2 ** (2 * p_w + 1)


# -- verification ----------------------------------------------------------


@dataclass(frozen=True)
class Failure:
    check: str
    detail: str


def esa_separation_check(emb: ESAEmbedding, u: Vertex, v: Vertex) -> tuple[bool, str]:
    """Blocks where the selectors pull ``v`` forward and ``u`` back leave enough room.

    Returns ``(ok, diagnostic)``; the precondition is that ``u`` and ``v``
    are not comparable.
    """
    code = emb.code
    if updown(code, u, v):
        raise ValueError("separation is only defined for incomparable pairs")
    if u.height > v.height:
        u, v = v, u
    (r, a), (s, b) = u, v
    k = len(meet(a, b))
    d = dist_formula(code, u, v)
    fam = emb.family
    pull = [fam.index[restrict(b, k + n)] for n in range(1, emb.p_w + 1)]
    push = [fam.index[restrict(a, k + n)] for n in range(1, emb.p_w + 1)]
    table = fam.table()
    mask = np.ones(fam.blocks, dtype=bool)
    for i in pull:
        mask &= table[i] == 1
    for i in push:
        mask &= table[i] == 0
    chosen = np.flatnonzero(mask) + 1
    nu = len(set(pull) | set(push))
    if len(chosen) != 2 ** (fam.mu - nu) or nu > 2 * emb.p_w:
        return False, f"|I_uv| = {len(chosen)} with {nu} constrained selectors"
    for j in chosen:
        mine = [n for i in range(k + 1, len(a) + 1) for n in emb.sx(u, int(j), i)]
        theirs = [n for i in range(k + 1, len(b) + 1) for n in emb.sx(v, int(j), i)]
        if not mine:
            return False, f"block {j}: u has nothing above the common level"
        below = sum(1 for n in theirs if n < min(mine))
        if 2 * below < d:
            return False, f"block {j}: only {below} elements of v below u, need {d}/2"
    return True, ""


def check_block_lemma(emb: ESAEmbedding, v: Vertex) -> Iterator[Failure]:
    """Counting, disjointness, placement and contiguity of ``v``'s block sets.

    Level sets in block ``j`` are translates of the sets for ``j``'s selector
    pattern, so the relative checks run once per distinct pattern and the
    placement checks once per block.
    """
    code = emb.code
    r, a = v
    m1 = code.height
    table = emb.family.table()
    seen: set[tuple[int, ...]] = set()
    for j in range(1, emb.family.blocks + 1):
        pattern = tuple(int(b) for b in emb.patterns[v][:, j - 1])
        if pattern not in seen:
            seen.add(pattern)
            yield from _relative_checks(emb, v, j)
        plus, minus = emb.S_plus(v, j), emb.S_minus(v, j)
        if len(plus) != r or len(minus) != r:
            yield Failure("(vi)", f"{v} block {j}")
        lo_plus, lo_minus = (2 * j - 2) * m1, (2 * j - 1) * m1
        if any(not lo_plus < n <= lo_plus + m1 for n in plus) or any(
            not lo_minus < n <= lo_minus + m1 for n in minus
        ):
            yield Failure("(vii)", f"{v} block {j}")


def _relative_checks(emb: ESAEmbedding, v: Vertex, j: int) -> Iterator[Failure]:
    code = emb.code
    r, a = v
    table = emb.family.table()
    block = range(emb.offset(j) + 1, emb.offset(j) + code.height + 1)
    sx = [emb.sx(v, j, i) for i in range(len(a) + 1)]
    sy = [emb.sy(v, j, i) for i in range(len(a) + 1)]
    union: set[int] = set()
    for i in range(len(a) + 1):
        x0, x1, y1 = code.x(r, i), code.x(r, i + 1), code.y(r, i + 1)
        if len(sx[i]) != x1 - x0:
            yield Failure("(i)", f"{v} block {j} level {i}")
        if len(sy[i]) != y1 - x0:
            yield Failure("(ii)", f"{v} block {j} level {i}")
        if len(set(sy[i]) - set(sx[i])) != y1 - x1:
            yield Failure("(iii)", f"{v} block {j} level {i}")
        if union & set(sx[i]):
            yield Failure("(iv)", f"{v} block {j} level {i} overlaps a lower level")
        union |= set(sx[i])
        if len(union) != x1:
            yield Failure("(v)", f"{v} block {j} up to level {i}")
        if not set(sy[i]) <= set(block):
            yield Failure("block", f"{v} block {j} level {i} leaves I_j")
    yield from _contiguity(emb, v, j, table, sx, sy)


def _contiguity(emb, v, j, table, sx, sy) -> Iterator[Failure]:
    code = emb.code
    r, a = v
    w = len(a)
    ys = [int(table[emb.family.index[a[:n]], j - 1]) for n in range(1, w + 1)]
    for i in range(w + 1):
        rest = sorted(set(sy[i]) - set(sx[i]))
        for i2 in range(i + 1, w + 1):
            run = ys[i:i2]
            if not (all(run) or not any(run)):
                continue
            front = bool(run[0])
            got_x = sorted(n for k in range(i + 1, i2 + 1) for n in sx[k])
            got_rest = sorted(set(sy[i2]) - set(sx[i2]))
            nx = code.x(r, i2 + 1) - code.x(r, i + 1)
            ny = code.y(r, i2 + 1) - code.x(r, i + 1)
            if not rest:
                continue
            if front:
                want_x = [rest[0] + ell for ell in range(nx)]
                want_rest = [rest[0] + ell for ell in range(nx, ny)]
            else:
                want_x = sorted(rest[-1] - ell for ell in range(nx))
                want_rest = sorted(rest[-1] - ell for ell in range(nx, ny))
            label = "(viii)" if front else "(ix)"
            if got_x != want_x or got_rest != want_rest:
                yield Failure(label, f"{v} block {j} levels {i}..{i2}")


def pair_norms(emb: ESAEmbedding) -> Iterator[tuple[Vertex, Vertex, Fraction]]:
    """``||psi(u) - psi(v)||`` for every unordered pair, exactly."""
    verts = emb.vertices
    sums = emb.prefix_sums()
    for t, u in enumerate(verts):
        if t + 1 == len(verts):
            break
        diffs = np.abs(sums[t + 1 :] - sums[t]).max(axis=1)
        for v, val in zip(verts[t + 1 :], diffs):
            yield u, v, Fraction(int(val)) / emb.eta


def check_bounds(emb: ESAEmbedding, pairs: Iterable[tuple[Vertex, Vertex, Fraction]] | None = None) -> Iterator[Failure]:
    bound = theoretical_bound(emb.p_w)
    for u, v, val in pairs if pairs is not None else pair_norms(emb):
        d = dist_formula(emb.code, u, v)
        if not Fraction(d, bound) <= val <= d:
            yield Failure("bounds", f"{u}, {v}: {val} outside [{d}/{bound}, {d}]")
        if updown(emb.code, u, v) and val != d:
            yield Failure("comparable equality", f"{u}, {v}: {val} != {d}")
