"""Exact finite unions of open intervals, flat and in compressed form.

Two representations of the same kind of set are provided.

``RationalIntervalSet`` is the plain one: a sorted tuple of disjoint open
intervals with ``Fraction`` endpoints.  It is simple enough to serve as the
reference implementation, but the subdivision map used by the L1 embedding
multiplies the interval count by ``D**theta`` per application, so it only
works for small instances.

Patterns are the compressed form.  A ``Seg(lo, hi)`` is one open interval;
a ``Rep(start, stride, count, child)`` is ``count`` translates of ``child``
placed ``stride`` apart, with ``child`` living inside ``[0, stride]``.
Translates never merge: the shared endpoint of two touching copies is not
in the set.  Measures of intersections are computed without expanding
repetitions, by grouping the copies of the coarser pattern that sit
identically on the finer one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Union

Number = Union[int, Fraction]


class NotGridRepresentable(ValueError):
    """The set is not a union of grid cells ``(qD, qD+r) / D**(N+1)``."""


class UnalignedPatterns(ValueError):
    """Two repetitions have strides whose ratio cycles too slowly to group."""


def _frac(x: Number) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# -- flat sets -------------------------------------------------------------


@dataclass(frozen=True)
class RationalIntervalSet:
    intervals: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self) -> None:
        cleaned = tuple((_frac(a), _frac(b)) for a, b in self.intervals if a < b)
        cleaned = tuple(sorted(cleaned))
        for (a0, b0), (a1, _) in zip(cleaned, cleaned[1:]):
            if a1 < b0:
                raise ValueError(f"intervals ({a0}, {b0}) and ({a1}, ...) overlap")
        object.__setattr__(self, "intervals", cleaned)

    @classmethod
    def of(cls, *pairs: tuple[Number, Number]) -> "RationalIntervalSet":
        return cls(tuple(pairs))

    def __iter__(self) -> Iterator[tuple[Fraction, Fraction]]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def intersection(self, other: "RationalIntervalSet") -> "RationalIntervalSet":
        out = []
        i = j = 0
        xs, ys = self.intervals, other.intervals
        while i < len(xs) and j < len(ys):
            a = max(xs[i][0], ys[j][0])
            b = min(xs[i][1], ys[j][1])
            if a < b:
                out.append((a, b))
            if xs[i][1] <= ys[j][1]:
                i += 1
            else:
                j += 1
        return RationalIntervalSet(tuple(out))

    def minus_closure(self, other: "RationalIntervalSet") -> "RationalIntervalSet":
        """``self`` without the closure of ``other``."""
        out = []
        for a, b in self.intervals:
            pieces = [(a, b)]
            for c, d in other.intervals:
                if d <= a or c >= b:
                    continue
                nxt = []
                for p, q in pieces:
                    if p < c:
                        nxt.append((p, min(q, c)))
                    if q > d:
                        nxt.append((max(p, d), q))
                pieces = nxt
            out.extend(pieces)
        return RationalIntervalSet(tuple(out))

    def subdivide(self, theta: int, k: int, D: int) -> "RationalIntervalSet":
        """Cut each interval into ``D**theta`` blocks and keep the first ``k``/``D`` of each."""
        if not 0 <= k <= D:
            raise ValueError(f"k={k} outside [0, {D}]")
        blocks = D**theta
        out = []
        for a, b in self.intervals:
            part = (b - a) / (blocks * D)
            for m in range(blocks):
                left = a + m * D * part
                out.append((left, left + k * part))
        return RationalIntervalSet(tuple(out))

    def grid_level(self, D: int, max_level: int = 10_000) -> int:
        """Least ``N`` with every interval of the form ``(qD, qD+r) / D**(N+1)``, ``0 <= r <= D``."""
        if not self.intervals:
            raise NotGridRepresentable("the empty set has no grid level")
        lefts = [a for a, _ in self.intervals]
        lengths = [b - a for a, b in self.intervals]
        return _least_level(lefts, lengths, D, max_level)

    def dump(self) -> str:
        return "".join(f"{_fmt(a)} .. {_fmt(b)}\n" for a, b in self.intervals)


def _least_level(lefts: list[Fraction], lengths: list[Fraction], D: int, max_level: int) -> int:
    # Divisibility only gets easier as N grows while the cap r <= D gets
    # harder, so the first N passing the divisibility tests decides.
    for n in range(max_level + 1):
        cell = Fraction(1, D**n)
        if all((a / cell).denominator == 1 for a in lefts) and all(
            (ln * D / cell).denominator == 1 for ln in lengths
        ):
            if all(ln * D / cell <= D for ln in lengths):
                return n
            raise NotGridRepresentable(f"an interval is longer than a level-{n} cell")
    raise NotGridRepresentable(f"no grid level <= {max_level} for base {D}")


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_dump(text: str) -> RationalIntervalSet:
    pairs = []
    for line in text.splitlines():
        if line.strip():
            a, b = line.split("..")
            pairs.append((Fraction(a.strip()), Fraction(b.strip())))
    return RationalIntervalSet(tuple(pairs))


# -- patterns --------------------------------------------------------------


@dataclass(frozen=True)
class Seg:
    lo: Fraction
    hi: Fraction
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", _frac(self.lo))
        object.__setattr__(self, "hi", _frac(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"empty segment ({self.lo}, {self.hi})")
        object.__setattr__(self, "_hash", hash((self.lo, self.hi)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def span(self) -> tuple[Fraction, Fraction]:
        return self.lo, self.hi

    @property
    def measure(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class Rep:
    start: Fraction
    stride: Fraction
    count: int
    child: "Pattern"
    _hash: int = field(init=False, repr=False, compare=False)
    _measure: Fraction = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", _frac(self.start))
        object.__setattr__(self, "stride", _frac(self.stride))
        if self.count < 1 or self.stride <= 0:
            raise ValueError("a repetition needs count >= 1 and a positive stride")
        lo, hi = self.child.span
        if lo < 0 or hi > self.stride:
            raise ValueError(f"child span ({lo}, {hi}) exceeds stride {self.stride}")
        object.__setattr__(self, "_hash", hash((self.start, self.stride, self.count, self.child)))
        object.__setattr__(self, "_measure", self.count * self.child.measure)

    def __hash__(self) -> int:
        return self._hash

    @property
    def span(self) -> tuple[Fraction, Fraction]:
        return self.start, self.start + self.count * self.stride

    @property
    def measure(self) -> Fraction:
        return self._measure


Pattern = Union[Seg, Rep]
# None stands for the empty set throughout.
MaybePattern = Optional[Pattern]


def measure(p: MaybePattern) -> Fraction:
    return Fraction(0) if p is None else p.measure


def piece_count(p: MaybePattern) -> int:
    if p is None:
        return 0
    if isinstance(p, Seg):
        return 1
    return p.count * piece_count(p.child)


def leaves(p: MaybePattern) -> Iterator[Seg]:
    if p is None:
        return
    if isinstance(p, Seg):
        yield p
    else:
        yield from leaves(p.child)


def depth(p: MaybePattern) -> int:
    if p is None or isinstance(p, Seg):
        return 0
    return 1 + depth(p.child)


def flatten(p: MaybePattern, limit: int = 10**6) -> RationalIntervalSet:
    """Expand into the flat form; refuses beyond ``limit`` intervals."""
    n = piece_count(p)
    if n > limit:
        raise ValueError(f"pattern has {n} pieces, limit is {limit}")
    return RationalIntervalSet(tuple(_expand(p, Fraction(0))))


def _expand(p: MaybePattern, offset: Fraction) -> Iterator[tuple[Fraction, Fraction]]:
    if p is None:
        return
    if isinstance(p, Seg):
        yield offset + p.lo, offset + p.hi
        return
    for m in range(p.count):
        yield from _expand(p.child, offset + p.start + m * p.stride)


def unit_cells(lo: int, hi: int) -> MaybePattern:
    """``(lo, hi)`` minus the integers."""
    if hi <= lo:
        return None
    return Rep(Fraction(lo), Fraction(1), hi - lo, Seg(0, 1))


def _map_leaves(p: Pattern, fn) -> MaybePattern:
    if isinstance(p, Seg):
        return fn(p)
    child = _map_leaves(p.child, fn)
    if child is None:
        return None
    return Rep(p.start, p.stride, p.count, child)


def subdivide(p: MaybePattern, theta: int, k_lo: int, k_hi: int, D: int) -> MaybePattern:
    """Cut every interval into ``D**theta`` blocks of ``D`` parts and keep parts ``k_lo..k_hi-1``.

    With ``k_lo = 0`` this is the selection map of the L1 construction; the
    general form gives the difference of two selections on the same base.
    """
    if not 0 <= k_lo <= k_hi <= D:
        raise ValueError(f"part range [{k_lo}, {k_hi}) outside [0, {D}]")
    if p is None or k_lo == k_hi:
        return None
    blocks = D**theta

    def fn(s: Seg) -> Pattern:
        block = s.measure / blocks
        part = block / D
        return Rep(s.lo, block, blocks, Seg(k_lo * part, k_hi * part))

    return _map_leaves(p, fn)


@lru_cache(maxsize=1 << 20)
def window(p: Pattern, w0: Fraction, w1: Fraction) -> Fraction:
    """``measure(p ∩ (w0, w1))``."""
    if isinstance(p, Seg):
        return max(Fraction(0), min(p.hi, w1) - max(p.lo, w0))
    s0, s1 = p.span
    lo, hi = max(w0, s0), min(w1, s1)
    if lo >= hi:
        return Fraction(0)
    if lo == s0 and hi == s1:
        return p.measure
    t = p.stride
    m0 = math.floor((lo - s0) / t)
    m1 = math.ceil((hi - s0) / t)
    first = s0 + m0 * t
    if m1 - m0 == 1:
        return window(p.child, lo - first, hi - first)
    last = s0 + (m1 - 1) * t
    return (
        window(p.child, lo - first, t)
        + (m1 - m0 - 2) * p.child.measure
        + window(p.child, Fraction(0), hi - last)
    )


def intersection_measure(x: MaybePattern, y: MaybePattern) -> Fraction:
    if x is None or y is None:
        return Fraction(0)
    return _inter(x, y, Fraction(0))


@lru_cache(maxsize=1 << 20)
def _inter(x: Pattern, y: Pattern, delta: Fraction) -> Fraction:
    # measure(x ∩ (y + delta))
    if isinstance(x, Seg):
        return window(y, x.lo - delta, x.hi - delta)
    if isinstance(y, Seg):
        return window(x, y.lo + delta, y.hi + delta)
    x0, x1 = x.span
    y0, y1 = y.span
    y0, y1 = y0 + delta, y1 + delta
    lo, hi = max(x0, y0), min(x1, y1)
    if lo >= hi:
        return Fraction(0)
    if x.stride < y.stride:
        return _inter(y, x, -delta)
    t = x.stride
    m0 = math.floor((lo - x0) / t)
    m1 = math.ceil((hi - x0) / t)
    # copies m in [f0, f1) lie entirely inside the span of y
    f0 = max(m0, math.ceil((y0 - x0) / t))
    f1 = min(m1, math.floor((y1 - x0) / t))
    total = Fraction(0)
    if f0 >= f1:
        for m in range(m0, m1):
            total += _inter(x.child, y, delta - x0 - m * t)
        return total
    for m in [*range(m0, f0), *range(f1, m1)]:
        total += _inter(x.child, y, delta - x0 - m * t)
    inside = f1 - f0
    # copies whose offsets agree modulo y's stride meet identical pieces of y
    period = (t / y.stride).denominator
    if period > inside:
        period = inside
    if period > 4096:
        raise UnalignedPatterns(f"stride ratio {t / y.stride} needs {period} phase classes")
    for rho in range(period):
        copies = (inside - rho + period - 1) // period
        total += copies * _inter(x.child, y, delta - x0 - (f0 + rho) * t)
    return total


def pattern_grid_level(p: Pattern, D: int, max_level: int = 10_000) -> int:
    """Grid level computed from the pattern, without expanding it.

    Every left endpoint must be a multiple of ``D**-N`` (so the start, every
    stride of a repetition with more than one copy, and every leaf offset
    must be) and every interval length must be ``r / D**(N+1)`` with
    ``0 <= r <= D``.
    """
    offsets: list[Fraction] = []
    lengths: list[Fraction] = []

    def walk(q: Pattern) -> None:
        if isinstance(q, Seg):
            offsets.append(q.lo)
            lengths.append(q.measure)
            return
        offsets.append(q.start)
        if q.count > 1:
            offsets.append(q.stride)
        walk(q.child)

    walk(p)
    return _least_level(offsets, lengths, D, max_level)
