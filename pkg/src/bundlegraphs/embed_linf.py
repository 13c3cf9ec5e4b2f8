"""Embedding into the canonical tree-indexed ``l_inf`` model.

Every node ``B`` of ``kappa^{<= max W}`` owns one coordinate; the norm is the
largest absolute coordinate.  A vertex ``(r, A)`` is sent to the map with
value ``z(r, |B|)`` at each prefix ``B`` of ``A``.
"""

from __future__ import annotations

import random
from typing import Mapping

from bundlegraphs.coding import Address, Code, Vertex, as_code, check_vertex, enumerate_nodes, xyz

NodeCoefficients = dict[Address, int]


def psi_linf(code: Code, v: Vertex) -> NodeCoefficients:
    code = as_code(code)
    check_vertex(code, v)
    r, a = v
    return {a[:i]: xyz(code, r, i).z for i in range(len(a) + 1)}


def dist_linf(a: Mapping[Address, int], b: Mapping[Address, int]) -> int:
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0) - b.get(k, 0)) for k in keys), default=0)


def branch_norm(coeffs: Mapping[Address, int], branch: Address) -> int:
    """Norm of a combination supported on the prefixes of ``branch``."""
    return max((abs(c) for node, c in coeffs.items() if branch[: len(node)] == node), default=0)


def check_model(kappa: int, depth: int, trials: int, seed: int) -> bool:
    """Random check that branches behave like the ``l_inf`` basis and truncation is contractive."""
    rng = random.Random(seed)
    branches = [a for a in enumerate_nodes(kappa, depth) if len(a) == depth]
    for _ in range(trials):
        branch = rng.choice(branches)
        coeffs = {branch[:i]: rng.randint(-50, 50) for i in range(depth + 1)}
        norm = branch_norm(coeffs, branch)
        if norm != max(abs(c) for c in coeffs.values()):
            return False
        cut = rng.randint(0, depth)
        truncated = {node: c for node, c in coeffs.items() if len(node) <= cut}
        if branch_norm(truncated, branch) > norm:
            return False
    return True
