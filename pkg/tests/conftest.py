from __future__ import annotations

import itertools

import pytest

from bundlegraphs.coding import Code

FIGURE_1 = Code((0, 0, 1, 0, 0, 2, 1, 1, 1, 2, 1, 0))
DIAMOND = Code((0, 1, 0))
LAAKSO = Code((0, 0, 1, 0, 0))
PARASOL = Code((0, 0, 1, 0))


def all_codes(max_height: int, max_depth: int) -> list[Code]:
    return [
        Code((0, *inner, 0))
        for h in range(1, max_height + 1)
        for inner in itertools.product(range(max_depth + 1), repeat=h - 1)
    ]


@pytest.fixture(scope="session")
def small_codes() -> list[Code]:
    return all_codes(5, 2)
