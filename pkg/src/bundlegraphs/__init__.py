"""Bundle graphs from their depth coding, and exact checks of their
bi-Lipschitz embeddings into l-infinity trees, L1 and a summing-basis space."""

from bundlegraphs.coding import (
    Code,
    Vertex,
    XYZ,
    meet,
    nm,
    p_param,
    parse_address,
    parse_code,
    parse_vertex,
    updown,
    xyz,
)
from bundlegraphs.graph import BundleGraph, dist_bfs, dist_formula, materialize

__all__ = [
    "BundleGraph",
    "Code",
    "Vertex",
    "XYZ",
    "dist_bfs",
    "dist_formula",
    "materialize",
    "meet",
    "nm",
    "p_param",
    "parse_address",
    "parse_code",
    "parse_vertex",
    "updown",
    "xyz",
]

__version__ = "0.1.0"
