"""Exact tessellation machinery over PSL(2,Z).

Subpackages cover exact Moebius arithmetic, finite-index subgroups as coset
tables, equivariant tessellations of the disk with Whitehead moves,
characteristic boundary maps, the local structure of the triangulation
complex, and truncated presentation emission.
"""

from .moebius import (
    ExtendedRational,
    Geodesic,
    MoebiusMap,
    OrientedGeodesic,
    circular_order,
    solve_edge_map,
    word_in_generators,
)
from .subgroup import Subgroup, commutator_torus, congruence, full_group, intersect
from .tessellation import Tessellation, farey, flip

__all__ = [
    "ExtendedRational",
    "Geodesic",
    "MoebiusMap",
    "OrientedGeodesic",
    "circular_order",
    "solve_edge_map",
    "word_in_generators",
    "Subgroup",
    "congruence",
    "commutator_torus",
    "full_group",
    "intersect",
    "Tessellation",
    "farey",
    "flip",
]
