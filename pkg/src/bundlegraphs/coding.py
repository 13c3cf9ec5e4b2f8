"""Depth words, addresses and the height functions derived from them.

A bundle graph of height ``M+1`` is coded by its depth word
``W = (w_0, ..., w_{M+1})`` with ``w_0 = w_{M+1} = 0``.  Vertices are pairs
``(r, A)`` where ``A`` is an address (a tuple of branch indices) of length
``w_r``.  Everything here is pure integer arithmetic.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

import numpy as np

Address = tuple[int, ...]

POSITIVE = "positive"
INCLUDE_ZERO = "include_zero"
CONVENTIONS = (POSITIVE, INCLUDE_ZERO)


class CodeError(ValueError):
    """Malformed depth word, address or vertex."""


@dataclass(frozen=True)
class Code:
    depths: tuple[int, ...]

    def __post_init__(self) -> None:
        depths = tuple(int(w) for w in self.depths)
        object.__setattr__(self, "depths", depths)
        if len(depths) < 2:
            raise CodeError(f"a code needs at least two entries, got {depths}")
        if depths[0] != 0 or depths[-1] != 0:
            raise CodeError(f"a code must start and end with 0, got {depths}")
        if any(w < 0 for w in depths):
            raise CodeError(f"depths must be nonnegative, got {depths}")

    @property
    def height(self) -> int:
        """``M+1``, the distance from bottom to top."""
        return len(self.depths) - 1

    @property
    def maxdepth(self) -> int:
        return max(self.depths)

    def __len__(self) -> int:
        return len(self.depths)

    def __getitem__(self, r: int) -> int:
        return self.depths[r]

    def __str__(self) -> str:
        return format_code(self)

    @cached_property
    def _tables(self) -> tuple[list[list[int]], list[list[int]]]:
        # xs[i][r], ys[i][r] for i in 0..maxdepth+1; constant beyond.
        n = self.height
        w = self.depths
        xs = [[0] * (n + 1)]
        ys = [[n] * (n + 1)]
        for i in range(1, self.maxdepth + 2):
            xrow = [0] * (n + 1)
            last = 0
            for r in range(n + 1):
                if w[r] < i:
                    last = r
                xrow[r] = last
            yrow = [0] * (n + 1)
            nxt = n
            for r in range(n, -1, -1):
                if w[r] < i:
                    nxt = r
                yrow[r] = nxt
            xs.append(xrow)
            ys.append(yrow)
        return xs, ys

    def x(self, r: int, i: int) -> int:
        xs, _ = self._tables
        return xs[min(i, len(xs) - 1)][r]

    def y(self, r: int, i: int) -> int:
        _, ys = self._tables
        return ys[min(i, len(ys) - 1)][r]


class Vertex(NamedTuple):
    height: int
    address: Address

    def __str__(self) -> str:
        return format_vertex(self)


class XYZ(NamedTuple):
    x: int
    y: int
    z: int


def as_code(w: Code | Sequence[int] | str) -> Code:
    if isinstance(w, Code):
        return w
    if isinstance(w, str):
        return parse_code(w)
    return Code(tuple(w))


# -- text formats ---------------------------------------------------------


def parse_code(text: str) -> Code:
    """Parse ``"0,1,0"`` (surrounding parentheses tolerated)."""
    body = text.strip().strip("()").strip()
    if not body:
        raise CodeError(f"empty code string {text!r}")
    try:
        return Code(tuple(int(tok) for tok in body.split(",")))
    except ValueError as exc:
        if isinstance(exc, CodeError):
            raise
        raise CodeError(f"cannot parse code {text!r}") from None


def format_code(code: Code) -> str:
    return ",".join(str(w) for w in code.depths)


def parse_address(text: str) -> Address:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise CodeError(f"address must be parenthesized, got {text!r}")
    inner = body[1:-1].strip()
    if not inner:
        return ()
    try:
        entries = tuple(int(tok) for tok in inner.split(",") if tok.strip())
    except ValueError:
        raise CodeError(f"cannot parse address {text!r}") from None
    if any(a < 0 for a in entries):
        raise CodeError(f"address entries must be nonnegative: {text!r}")
    return entries


def format_address(a: Address) -> str:
    return "(" + ",".join(str(e) for e in a) + ")"


_VERTEX_RE = re.compile(r"^\s*(\d+)\s*:\s*(\(.*\))\s*$")


def parse_vertex(text: str) -> Vertex:
    """Parse the ``r:(a1,a2,...)`` vertex syntax."""
    m = _VERTEX_RE.match(text)
    if not m:
        raise CodeError(f"vertex must look like 'r:(a1,...)', got {text!r}")
    return Vertex(int(m.group(1)), parse_address(m.group(2)))


def format_vertex(v: Vertex) -> str:
    return f"{v.height}:{format_address(v.address)}"


def check_vertex(code: Code, v: Vertex, kappa: int | None = None) -> None:
    r, a = v
    if not 0 <= r <= code.height:
        raise CodeError(f"height {r} outside [0, {code.height}]")
    if len(a) != code[r]:
        raise CodeError(f"vertex {format_vertex(v)} needs an address of length {code[r]}")
    if kappa is not None and any(e >= kappa for e in a):
        raise CodeError(f"vertex {format_vertex(v)} has an entry >= kappa={kappa}")


# -- prefix algebra -------------------------------------------------------


def meet(a: Address, b: Address) -> Address:
    """Longest common prefix of two addresses."""
    n = 0
    for p, q in zip(a, b):
        if p != q:
            break
        n += 1
    return tuple(a[:n])


def is_prefix(a: Address, b: Address) -> bool:
    return len(a) <= len(b) and tuple(b[: len(a)]) == tuple(a)


def restrict(a: Address, m: int) -> Address:
    """``A`` cut to its first ``m`` entries (all of ``A`` if shorter)."""
    return tuple(a[:m])


def enumerate_nodes(kappa: int, depth: int) -> list[Address]:
    """All addresses of length at most ``depth``, by length then lexicographically."""
    out: list[Address] = []
    for n in range(depth + 1):
        out.extend(itertools.product(range(kappa), repeat=n))
    return out


def iter_vertices(code: Code, kappa: int) -> Iterator[Vertex]:
    for r, w in enumerate(code.depths):
        for a in itertools.product(range(kappa), repeat=w):
            yield Vertex(r, a)


# -- height functions -----------------------------------------------------


def xyz(code: Code, r: int, i: int) -> XYZ:
    """Nearest heights at/below and at/above ``r`` with depth below ``i``.

    ``i = 0`` is the base case ``(0, M+1, r)``.
    """
    if not 0 <= r <= code.height:
        raise CodeError(f"height {r} outside [0, {code.height}]")
    if i < 0:
        raise CodeError(f"depth threshold must be >= 0, got {i}")
    if i == 0:
        return XYZ(0, code.height, r)
    x, y = code.x(r, i), code.y(r, i)
    return XYZ(x, y, min(r - x, y - r))


def updown(code: Code, u: Vertex, v: Vertex) -> bool:
    """True when some height between ``u`` and ``v`` has depth at most ``|A^B|``."""
    (r, a), (s, b) = u, v
    k = len(meet(a, b))
    lo, hi = min(r, s), max(r, s)
    return any(code[t] <= k for t in range(lo, hi + 1))


def nm(code: Code, u: Vertex, v: Vertex) -> tuple[int, int]:
    """Heights of the highest common ancestor and lowest common descendant."""
    (r, a), (s, b) = u, v
    k = len(meet(a, b))
    lo, hi = min(r, s), max(r, s)
    n = max(t for t in range(lo + 1) if code[t] <= k)
    m = min(t for t in range(hi, code.height + 1) if code[t] <= k)
    return n, m


def _needed_p(code: Code, r: int, i: int) -> int:
    x, y = code.x(r, i), code.y(r, i)
    twice_mid = x + y
    top = code.maxdepth + 1
    for p in range(1, top + 1):
        ok = True
        if 2 * r >= twice_mid and 2 * code.x(r, i + p) < twice_mid:
            ok = False
        if ok and 2 * r <= twice_mid and 2 * code.y(r, i + p) > twice_mid:
            ok = False
        if ok:
            return p
    # unreachable: x(r, i+p) = y(r, i+p) = r once i+p > maxdepth
    raise AssertionError(f"no p <= {top} works at (r, i) = ({r}, {i}) for {code}")


def p_param(code: Code | Sequence[int], index_convention: str = POSITIVE) -> int:
    """Smallest ``p`` so that ``p`` more levels always reach the near half of the bracket.

    ``index_convention`` selects the range of the depth threshold ``i``:
    ``"positive"`` uses ``i >= 1``, ``"include_zero"`` also checks ``i = 0``.
    The conditions are monotone in ``p``, so the answer is the maximum over
    ``(r, i)`` of the smallest ``p`` that works there.
    """
    code = as_code(code)
    if index_convention not in CONVENTIONS:
        raise ValueError(f"unknown index convention {index_convention!r}")
    first = 1 if index_convention == POSITIVE else 0
    best = 1
    for i in range(first, code.maxdepth + 2):
        for r in range(code.height + 1):
            best = max(best, _needed_p(code, r, i))
    if best > code.maxdepth + 1:
        raise AssertionError(f"p_W = {best} exceeds max W + 1 for {code}")
    return best


# -- batched forms --------------------------------------------------------
#
# Corpus-wide checks evaluate these for ~10^5 codes; rows of equal length
# are stacked into one array and processed together.


def xy_tables(depths: np.ndarray, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """``x`` and ``y`` for a stack of equal-length codes.

    ``depths`` has shape ``(B, M+2)``; the result arrays have shape
    ``(levels, B, M+2)`` with row ``i`` holding ``x(., i)`` (resp. ``y``).
    Row 0 is the base case ``(0, M+1)``.
    """
    depths = np.asarray(depths)
    b, n = depths.shape
    heights = np.arange(n)
    xs = np.empty((levels, b, n), dtype=np.int64)
    ys = np.empty((levels, b, n), dtype=np.int64)
    xs[0] = 0
    ys[0] = n - 1
    for i in range(1, levels):
        low = depths < i
        xs[i] = np.maximum.accumulate(np.where(low, heights, 0), axis=1)
        rev = np.where(low, heights, n - 1)[:, ::-1]
        ys[i] = np.minimum.accumulate(rev, axis=1)[:, ::-1]
    return xs, ys


def p_params(depths: np.ndarray, index_convention: str = POSITIVE) -> np.ndarray:
    """Vectorized :func:`p_param` over a stack of equal-length codes."""
    if index_convention not in CONVENTIONS:
        raise ValueError(f"unknown index convention {index_convention!r}")
    depths = np.asarray(depths)
    levels = int(depths.max(initial=0)) + 2
    xs, ys = xy_tables(depths, levels)
    heights = 2 * np.arange(depths.shape[1])
    first = 1 if index_convention == POSITIVE else 0
    mids = xs + ys
    upper_half = heights >= mids
    lower_half = heights <= mids
    result = np.zeros(depths.shape[0], dtype=np.int64)
    for p in range(1, levels):
        shifted = np.minimum(np.arange(levels) + p, levels - 1)
        ok = ~upper_half | (2 * xs[shifted] >= mids)
        ok &= ~lower_half | (2 * ys[shifted] <= mids)
        good = ok[first:].all(axis=(0, 2))
        result[(result == 0) & good] = p
    if (result == 0).any() or (result > depths.max(axis=1) + 1).any():
        raise AssertionError("p_W exceeds max W + 1")
    return result
