"""Characteristic maps and Whitehead homeomorphisms as evaluable boundary maps.

The characteristic map of a tessellation with a distinguished oriented edge
carries the base tessellation onto it: the standard oriented edge goes to the
distinguished edge and neighbouring triangles correspond on matching sides.
Evaluation walks the base triangulation from the standard edge to the query
vertex and mirrors the walk combinatorially in the target tessellation.  The
walk is exact and total on rational boundary points, and both directions are
memoised per tessellation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .moebius import (
    E0,
    ExtendedRational,
    Geodesic,
    INFINITY,
    MoebiusMap,
    ONE,
    OrientedGeodesic,
    ZERO,
    circular_order,
    moebius_from_base_triple,
)
from .subgroup import Subgroup, subgroup_via_membership
from .tessellation import Tessellation, farey_apex_left, flip

__all__ = [
    "NotMoebiusError",
    "CharAtom",
    "MoebiusAtom",
    "ModularMap",
    "identity_map",
    "charmap",
    "moebius_map",
    "evaluate_charmap",
    "charmap_preimage",
    "conjugate_element",
    "try_conjugate_element",
    "conjugated_subgroup",
    "whitehead_homeo",
    "WITNESS_POINTS",
]

_MAX_WALK = 100_000

WITNESS_POINTS = tuple(
    ExtendedRational(p, q)
    for p, q in ((2, 1), (-1, 2), (1, 2), (-2, 1), (3, 1), (-1, 3), (1, 3), (-3, 1), (2, 3), (5, 2))
)


class NotMoebiusError(ValueError):
    """A boundary map expected to be a Moebius transformation is not one."""


def _mirror_walk(src_apex, dst_apex, src_base: OrientedGeodesic,
                 dst_base: OrientedGeodesic, q: ExtendedRational) -> ExtendedRational:
    """Carry q across the correspondence determined by the two based tessellations."""
    if q == src_base.start:
        return dst_base.start
    if q == src_base.end:
        return dst_base.end
    if circular_order(src_base.start, src_base.end, q) == 1:
        s, d = src_base, dst_base
    else:
        s, d = src_base.reversed(), dst_base.reversed()
    # invariant: q lies strictly to the left of s
    for _ in range(_MAX_WALK):
        w = src_apex(s)
        w2 = dst_apex(d)
        if w == q:
            return w2
        if circular_order(s.end, q, w) == 1:
            s = OrientedGeodesic(w, s.end)
            d = OrientedGeodesic(w2, d.end)
        else:
            s = OrientedGeodesic(s.start, w)
            d = OrientedGeodesic(d.start, w2)
    raise RuntimeError("combinatorial walk did not terminate")  # pragma: no cover


def evaluate_charmap(t: Tessellation, e: OrientedGeodesic, q: ExtendedRational) -> ExtendedRational:
    """Value at q of the characteristic map of (t, e)."""
    memo = t._walk_memo
    key = ("fwd", e, q)
    if key not in memo:
        memo[key] = _mirror_walk(farey_apex_left, t.apex_left, E0, e, q)
    return memo[key]


def charmap_preimage(t: Tessellation, e: OrientedGeodesic, q: ExtendedRational) -> ExtendedRational:
    """Value at q of the inverse of the characteristic map of (t, e)."""
    memo = t._walk_memo
    key = ("inv", e, q)
    if key not in memo:
        memo[key] = _mirror_walk(t.apex_left, farey_apex_left, e, E0, q)
    return memo[key]


@dataclass(frozen=True, eq=False)
class CharAtom:
    """A characteristic map of (tessellation, oriented edge), or its inverse."""

    tess: Tessellation
    edge: OrientedGeodesic
    inverse: bool = False

    def __post_init__(self) -> None:
        if self.tess.locate(self.edge.geodesic()) is None:
            raise ValueError(f"{self.edge} is not an edge of the tessellation")

    def __call__(self, q: ExtendedRational) -> ExtendedRational:
        if self.inverse:
            return charmap_preimage(self.tess, self.edge, q)
        return evaluate_charmap(self.tess, self.edge, q)

    def inverted(self) -> "CharAtom":
        return CharAtom(self.tess, self.edge, not self.inverse)


@dataclass(frozen=True)
class MoebiusAtom:
    map: MoebiusMap

    def __call__(self, q: ExtendedRational) -> ExtendedRational:
        return self.map(q)

    def inverted(self) -> "MoebiusAtom":
        return MoebiusAtom(self.map.inverse())


@dataclass(frozen=True, eq=False)
class ModularMap:
    """A composable boundary map: factors compose right to left."""

    factors: tuple

    def __call__(self, q: ExtendedRational) -> ExtendedRational:
        for atom in reversed(self.factors):
            q = atom(q)
        return q

    def __mul__(self, other: "ModularMap") -> "ModularMap":
        return ModularMap(self.factors + other.factors)

    def inverse(self) -> "ModularMap":
        return ModularMap(tuple(atom.inverted() for atom in reversed(self.factors)))

    def apply_oriented(self, e: OrientedGeodesic) -> OrientedGeodesic:
        return OrientedGeodesic(self(e.start), self(e.end))

    def apply_geodesic(self, g: Geodesic) -> Geodesic:
        return Geodesic(self(g.x), self(g.y))


def identity_map() -> ModularMap:
    return ModularMap(())


def charmap(t: Tessellation, e: OrientedGeodesic) -> ModularMap:
    return ModularMap((CharAtom(t, e),))


def moebius_map(m: MoebiusMap) -> ModularMap:
    return ModularMap((MoebiusAtom(m),))


# ---------------------------------------------------------------------------
# Extraction of Moebius elements from boundary maps.

def try_conjugate_element(m: ModularMap, g: MoebiusMap) -> MoebiusMap | None:
    """The matrix of m g m^-1 when that composite is in PSL(2,Z), else None.

    Interpolates through three points and verifies on ten more; verification
    is exact, with no tolerance.
    """
    comp = m * moebius_map(g) * m.inverse()
    try:
        y0, y1, yinf = comp(ZERO), comp(ONE), comp(INFINITY)
    except ValueError:
        return None
    cand = moebius_from_base_triple(y0, y1, yinf)
    if cand is None:
        return None
    for x in WITNESS_POINTS:
        if comp(x) != cand(x):
            return None
    return cand


def conjugate_element(m: ModularMap, g: MoebiusMap) -> MoebiusMap:
    result = try_conjugate_element(m, g)
    if result is None:
        raise NotMoebiusError(f"conjugate of {g} is not a Moebius transformation")
    return result


def extract_moebius(m: ModularMap) -> MoebiusMap:
    """The matrix of m itself when m is in PSL(2,Z), verified on witnesses."""
    y0, y1, yinf = m(ZERO), m(ONE), m(INFINITY)
    cand = moebius_from_base_triple(y0, y1, yinf)
    if cand is None:
        raise NotMoebiusError("boundary map does not interpolate to a Moebius map")
    for x in WITNESS_POINTS:
        if m(x) != cand(x):
            raise NotMoebiusError("boundary map disagrees with its Moebius interpolation")
    return cand


def conjugated_subgroup(t: Tessellation, e: OrientedGeodesic) -> Subgroup:
    """The group carried onto the invariance group by the characteristic map.

    The characteristic map h of (t, e) conjugates a finite-index subgroup H
    onto the invariance group K; membership in H is decidable by conjugating
    forward and testing membership in K, and the coset table of H is built by
    breadth-first closure over that oracle.  The index always equals the index
    of K, and the conjugated Schreier generators of K land in H.
    """
    h = charmap(t, e)
    K = t.group

    def member(x: MoebiusMap) -> bool:
        y = try_conjugate_element(h, x)
        return y is not None and K.contains(y)

    H = subgroup_via_membership(member, expected_index=K.index)
    h_inv = h.inverse()
    for g in K.schreier_generators():
        back = conjugate_element(h_inv, g)
        if not H.contains(back):  # pragma: no cover - contradicts the construction
            raise AssertionError("conjugated generator escapes the computed subgroup")
    return H


def whitehead_homeo(t: Tessellation, e: OrientedGeodesic, label: str) -> ModularMap:
    """The Whitehead homeomorphism for (t, e) along the given edge orbit.

    Composes the characteristic map of the flipped tessellation (with the
    transported oriented edge) with the inverse characteristic map of (t, e).
    """
    based = t.with_distinguished(e)
    t2, _corr = flip(based, label)
    return ModularMap((CharAtom(t2, t2.distinguished), CharAtom(based, e, inverse=True)))
