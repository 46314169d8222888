"""Equivariant tessellations of the disk and Whitehead moves.

A tessellation is stored as its invariance group together with one
representative per orbit of edges.  Each representative carries the ideal
quadrilateral around it: the quad (a, b, c, d) is counterclockwise, the edge
is {a, c}, and b, d are the apexes of the two neighbouring triangles.  That
local data is maintained incrementally under flips and suffices for all
navigation; the quotient triangle classes are derived from it on demand.

Orientation conventions: counterclockwise is increasing cyclic order on
R u {oo}; the apex to the left of the oriented edge (a -> c) is d, the apex
to the right is b.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .moebius import (
    E0,
    E0_GEO,
    ExtendedRational,
    Geodesic,
    INFINITY,
    MINUS_ONE,
    MoebiusMap,
    ONE,
    OrientedGeodesic,
    ZERO,
    circular_order,
    interleave,
    solve_edge_map,
)
from .subgroup import Subgroup, coset_graph_diameter, coset_split, intersect, psl2z_ball_in

__all__ = [
    "EdgeOrbit",
    "EdgeCorrespondence",
    "Tessellation",
    "FlipError",
    "farey",
    "flip",
    "flippable",
    "flippable_labels",
    "edge_orbit_of",
    "equals",
    "refine",
    "stabilizer",
    "fingerprint",
    "triangle_classes",
    "check_non_crossing",
    "farey_apex_left",
]


class FlipError(ValueError):
    """A requested Whitehead move is not defined for this tessellation."""


@dataclass(frozen=True)
class EdgeOrbit:
    """One orbit of edges: oriented representative (a -> c) and its quad."""

    label: str
    a: ExtendedRational
    b: ExtendedRational
    c: ExtendedRational
    d: ExtendedRational

    def __post_init__(self) -> None:
        if len({self.a, self.b, self.c, self.d}) != 4:
            raise ValueError("quad corners must be distinct")
        if circular_order(self.a, self.b, self.c) != 1 or circular_order(self.a, self.c, self.d) != 1:
            raise ValueError("quad corners must be in counterclockwise order")

    @property
    def rep(self) -> OrientedGeodesic:
        return OrientedGeodesic(self.a, self.c)

    @property
    def geodesic(self) -> Geodesic:
        return Geodesic(self.a, self.c)

    def quad(self) -> tuple[ExtendedRational, ...]:
        return (self.a, self.b, self.c, self.d)

    def transform(self, m: MoebiusMap, label: str | None = None) -> "EdgeOrbit":
        return EdgeOrbit(label or self.label, m(self.a), m(self.b), m(self.c), m(self.d))


@dataclass(frozen=True)
class EdgeCorrespondence:
    """Bijection between edge-orbit labels across a flip; identity off the move."""

    mapping: tuple[tuple[str, str], ...]

    def __getitem__(self, label: str) -> str:
        for old, new in self.mapping:
            if old == label:
                return new
        raise KeyError(label)

    def inverse(self) -> "EdgeCorrespondence":
        return EdgeCorrespondence(tuple((new, old) for old, new in self.mapping))

    def to_json(self) -> dict:
        return {old: new for old, new in self.mapping}


@dataclass(frozen=True, eq=False)
class Tessellation:
    """Immutable tessellation value; use equals() for semantic equality."""

    group: Subgroup
    orbits: tuple[EdgeOrbit, ...]
    distinguished: OrientedGeodesic

    def __post_init__(self) -> None:
        object.__setattr__(self, "_locate_memo", {})
        object.__setattr__(self, "_walk_memo", {})
        object.__setattr__(self, "_tri_memo", None)

    def orbit(self, label: str) -> EdgeOrbit:
        for o in self.orbits:
            if o.label == label:
                return o
        raise KeyError(label)

    def labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.orbits)

    # -- navigation ---------------------------------------------------------

    def locate(self, g: Geodesic) -> tuple[str, MoebiusMap] | None:
        """The orbit containing g and a group element carrying the rep onto g."""
        memo = self._locate_memo
        if g in memo:
            return memo[g]
        result = None
        for o in self.orbits:
            for m in solve_edge_map(o.geodesic, g):
                if self.group.contains(m):
                    result = (o.label, m)
                    break
            if result:
                break
        memo[g] = result
        return result

    def apex_left(self, e: OrientedGeodesic) -> ExtendedRational:
        """Apex of the triangle to the left of the oriented edge e."""
        hit = self.locate(e.geodesic())
        if hit is None:
            raise ValueError(f"{e} is not an edge of the tessellation")
        label, m = hit
        o = self.orbit(label)
        if m(o.a) == e.start:
            return m(o.d)
        return m(o.b)

    def transform(self, g: MoebiusMap) -> "Tessellation":
        """The image tessellation under an element of PSL(2,Z)."""
        return Tessellation(
            self.group.conjugated_by(g),
            tuple(o.transform(g) for o in self.orbits),
            self.distinguished.transform(g),
        )

    def with_distinguished(self, e: OrientedGeodesic) -> "Tessellation":
        if self.locate(e.geodesic()) is None:
            raise ValueError(f"{e} is not an edge of the tessellation")
        return replace(self, distinguished=e)

    # -- serialisation --------------------------------------------------------

    def to_json(self) -> dict:
        tris = []
        for cls in triangle_classes(self):
            u, v, w = cls.vertices
            sides = []
            for side in cls.sides:
                sides.append({"orbit": side[0], "map": str(side[1])})
            tris.append({"vertices": [str(u), str(v), str(w)], "sides": sides})
        return {
            "group": self.group.to_json(),
            "orbits": [str(o.geodesic) for o in self.orbits],
            "labels": list(self.labels()),
            "distinguished": str(self.distinguished),
            "triangles": tris,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "Tessellation":
        group = Subgroup.from_json(data["group"])
        labels = data.get("labels") or [f"o{i}" for i in range(len(data["orbits"]))]
        reps = {lab: Geodesic.parse(s) for lab, s in zip(labels, data["orbits"])}
        # rebuild quads from the triangle records
        slots: dict[str, dict[str, ExtendedRational]] = {lab: {} for lab in labels}
        for tri in data["triangles"]:
            verts = [ExtendedRational.parse(s) for s in tri["vertices"]]
            for i, side in enumerate(tri["sides"]):
                lab = side["orbit"]
                m = MoebiusMap.parse(side["map"])
                u, v = verts[i], verts[(i + 1) % 3]
                w = verts[(i + 2) % 3]  # apex left of (u -> v) since the triple is ccw
                rep = reps[lab]
                if m(rep.x) == u and m(rep.y) == v:
                    slots[lab]["d"] = m.inverse()(w)
                elif m(rep.x) == v and m(rep.y) == u:
                    slots[lab]["b"] = m.inverse()(w)
                else:
                    raise ValueError("triangle side map does not carry the orbit representative")
        orbits = []
        for lab in labels:
            rep = reps[lab]
            got = slots[lab]
            if "b" not in got or "d" not in got:
                raise ValueError(f"orbit {lab} is missing a neighbouring triangle")
            orbits.append(EdgeOrbit(lab, rep.x, got["b"], rep.y, got["d"]))
        return cls(group, tuple(orbits), OrientedGeodesic.parse(data["distinguished"]))


# ---------------------------------------------------------------------------
# The base tessellation.

def farey_apex_left(e: OrientedGeodesic) -> ExtendedRational:
    """Apex to the left of an oriented edge of the base tessellation."""
    u, v = e.start, e.end
    det = u.p * v.q - u.q * v.p
    if det not in (1, -1):
        raise ValueError(f"{e} is not an edge of the base tessellation")
    med = ExtendedRational(u.p + v.p, u.q + v.q)
    if circular_order(u, v, med) == 1:
        return med
    other = ExtendedRational(u.p - v.p, u.q - v.q)
    assert circular_order(u, v, other) == 1
    return other


def farey(K: Subgroup) -> Tessellation:
    """The base tessellation viewed as K-invariant.

    Edge orbits correspond to sigma orbits on the cosets; each representative
    is the base-edge translate by the coset representative, with the quad
    carried along.
    """
    reps = K.rep_matrices()
    seen = [False] * K.index
    orbits = []
    base_quad = (ZERO, ONE, INFINITY, MINUS_ONE)
    for i in range(K.index):
        if seen[i]:
            continue
        seen[i] = True
        seen[K.sigma[i]] = True
        m = reps[i]
        orbits.append(
            EdgeOrbit(f"o{len(orbits)}", *(m(x) for x in base_quad))
        )
    return Tessellation(K, tuple(orbits), E0)


# ---------------------------------------------------------------------------
# Whitehead moves.

def _fresh_label(t: Tessellation) -> str:
    best = 0
    for lab in t.labels():
        head = lab.split(".")[0]
        if head.startswith("f") and head[1:].isdigit():
            best = max(best, int(head[1:]) + 1)
    return f"f{best}"


def _side_updates(t: Tessellation, o: EdgeOrbit):
    """Per-side apex replacements induced by flipping the orbit of o."""
    a, b, c, d = o.a, o.b, o.c, o.d
    sides = (
        (Geodesic(a, b), c, d),
        (Geodesic(b, c), a, d),
        (Geodesic(c, d), a, b),
        (Geodesic(d, a), c, b),
    )
    updates: dict[tuple[str, str], ExtendedRational] = {}
    for side, old_apex, new_apex in sides:
        hit = t.locate(side)
        if hit is None:  # pragma: no cover - quads are made of edges
            raise AssertionError("quad side is not an edge")
        lab, m = hit
        if lab == o.label:
            raise FlipError(
                f"orbit {o.label} touches its own quadrilateral; the move is undefined"
            )
        minv = m.inverse()
        back_old = minv(old_apex)
        target = t.orbit(lab)
        if back_old == target.b:
            slot = "b"
        elif back_old == target.d:
            slot = "d"
        else:  # pragma: no cover - quad data is consistent by induction
            raise AssertionError("side apex does not match stored quad")
        key = (lab, slot)
        if key in updates:  # pragma: no cover - excluded by the flip precondition
            raise AssertionError("conflicting apex updates")
        updates[key] = minv(new_apex)
    return updates


def flippable(t: Tessellation, label: str) -> bool:
    if not t.group.is_torsion_free():
        return False
    o = t.orbit(label)
    try:
        _side_updates(t, o)
    except FlipError:
        return False
    return True


def flippable_labels(t: Tessellation) -> tuple[str, ...]:
    return tuple(lab for lab in t.labels() if flippable(t, lab))


def flip(t: Tessellation, label: str) -> tuple[Tessellation, EdgeCorrespondence]:
    """Perform the equivariant Whitehead move along the given edge orbit.

    Returns the new tessellation and the label correspondence.  The
    distinguished oriented edge follows the standard rule: it is unchanged
    unless its orbit is the flipped one, in which case it moves to the new
    diagonal, oriented so that the two edges cross positively.
    """
    if not t.group.is_torsion_free():
        raise FlipError("Whitehead moves require a torsion-free invariance group")
    o = t.orbit(label)
    updates = _side_updates(t, o)

    new_label = _fresh_label(t)
    flipped = EdgeOrbit(new_label, o.b, o.c, o.d, o.a)

    new_orbits = []
    for orb in t.orbits:
        if orb.label == label:
            new_orbits.append(flipped)
            continue
        b, d = orb.b, orb.d
        if (orb.label, "b") in updates:
            b = updates[(orb.label, "b")]
        if (orb.label, "d") in updates:
            d = updates[(orb.label, "d")]
        new_orbits.append(EdgeOrbit(orb.label, orb.a, b, orb.c, d))

    dist = t.distinguished
    hit = t.locate(dist.geodesic())
    if hit is not None and hit[0] == label:
        m = hit[1]
        if m(o.a) == dist.start:
            dist = OrientedGeodesic(m(o.b), m(o.d))
        else:
            dist = OrientedGeodesic(m(o.d), m(o.b))

    corr = EdgeCorrespondence(
        tuple((lab, new_label if lab == label else lab) for lab in t.labels())
    )
    return Tessellation(t.group, tuple(new_orbits), dist), corr


# ---------------------------------------------------------------------------
# Membership, equality, refinement.

def edge_orbit_of(t: Tessellation, g: Geodesic) -> str | None:
    hit = t.locate(g)
    return hit[0] if hit else None


def refine(t: Tessellation, H: Subgroup) -> Tessellation:
    """The same tessellation with orbits split under a finite-index subgroup."""
    if H == t.group:
        return t
    _, reps = coset_split(t.group, H)
    orbits = []
    for o in t.orbits:
        kept: list[EdgeOrbit] = []
        for g in reps:
            cand = o.transform(g)
            if any(
                any(H.contains(m) for m in solve_edge_map(prev.geodesic, cand.geodesic))
                for prev in kept
            ):
                continue
            kept.append(cand)
        for i, cand in enumerate(kept):
            orbits.append(replace(cand, label=f"{o.label}.{i}"))
    return Tessellation(H, tuple(orbits), t.distinguished)


def equals(t1: Tessellation, t2: Tessellation) -> bool:
    """Exact equality of edge sets, refining to a common invariance group."""
    if t1 is t2:
        return True
    if t1.group != t2.group:
        K = intersect(t1.group, t2.group)
        t1 = refine(t1, K)
        t2 = refine(t2, K)
    if len(t1.orbits) != len(t2.orbits):
        return False
    return all(edge_orbit_of(t2, o.geodesic) is not None for o in t1.orbits) and all(
        edge_orbit_of(t1, o.geodesic) is not None for o in t2.orbits
    )


def _delta(g: Geodesic) -> int:
    return abs(g.x.p * g.y.q - g.x.q * g.y.p)


def fingerprint(t: Tessellation) -> tuple:
    """A cheap invariant of the underlying tessellation, for search dedup.

    Built from determinant invariants of each orbit's quad, so it does not
    depend on the choice of representatives; exact equality remains the
    authority.
    """
    profile = []
    for o in t.orbits:
        a, b, c, d = o.quad()
        sides = sorted(
            _delta(Geodesic(x, y)) for x, y in ((a, b), (b, c), (c, d), (d, a))
        )
        profile.append((_delta(o.geodesic), tuple(sides), _delta(Geodesic(b, d))))
    return (t.group.index, tuple(sorted(profile)))


def stabilizer(t: Tessellation) -> Subgroup:
    """The maximal subgroup of PSL(2,Z) fixing the tessellation setwise.

    Scans the cosets of the invariance group, keeps those whose
    representatives map the tessellation onto itself, and returns the union
    as a coset table.
    """
    K = t.group
    reps = K.rep_matrices()
    if K.is_normal():
        def fixes(g: MoebiusMap) -> bool:
            return all(edge_orbit_of(t, o.geodesic.transform(g)) is not None for o in t.orbits)
    else:
        def fixes(g: MoebiusMap) -> bool:
            return equals(t, t.transform(g))

    passing = [i for i, r in enumerate(reps) if fixes(r)]
    passing_set = set(passing)

    block_of: dict[int, int] = {}
    block_reps: list[int] = []
    for i in range(K.index):
        for b, j in enumerate(block_reps):
            if K.coset_of(reps[i] * reps[j].inverse()) in passing_set:
                block_of[i] = b
                break
        else:
            block_of[i] = len(block_reps)
            block_reps.append(i)

    n = len(block_reps)
    sigma = [-1] * n
    rho = [-1] * n
    for i in range(K.index):
        b = block_of[i]
        for table, perm in ((sigma, K.sigma), (rho, K.rho)):
            img = block_of[perm[i]]
            if table[b] == -1:
                table[b] = img
            elif table[b] != img:  # pragma: no cover - blocks are well defined
                raise AssertionError("stabiliser blocks are inconsistent")
    return Subgroup(tuple(sigma), tuple(rho))


# ---------------------------------------------------------------------------
# Derived quotient combinatorics.

@dataclass(frozen=True)
class TriangleClass:
    """A quotient triangle: ccw vertex triple and its three (orbit, map) sides."""

    vertices: tuple[ExtendedRational, ExtendedRational, ExtendedRational]
    sides: tuple[tuple[str, MoebiusMap], ...]


def _raw_transport(triple: tuple[ExtendedRational, ...]) -> tuple[int, int, int, int]:
    """Integer matrix (up to scale) carrying (0, 1, oo) to the given triple."""
    x, y, z = ((p.p, p.q) for p in triple)

    def cross(p, q):
        return p[0] * q[1] - p[1] * q[0]

    alpha = cross(y, x)
    beta = cross(z, y)
    return (alpha * z[0], beta * x[0], alpha * z[1], beta * x[1])


def _triangle_equiv(
    K: Subgroup,
    t1: tuple[ExtendedRational, ...],
    t2: tuple[ExtendedRational, ...],
) -> bool:
    """Whether some element of K maps one ccw triple onto the other cyclically."""
    from math import gcd

    a1, b1, c1, d1 = _raw_transport(t1)
    adj = (d1, -b1, -c1, a1)
    for rot in range(3):
        rotated = (t2[rot], t2[(rot + 1) % 3], t2[(rot + 2) % 3])
        a2, b2, c2, d2 = _raw_transport(rotated)
        # candidate = M2 * adj(M1), integral up to overall scale
        cand = (
            a2 * adj[0] + b2 * adj[2],
            a2 * adj[1] + b2 * adj[3],
            c2 * adj[0] + d2 * adj[2],
            c2 * adj[1] + d2 * adj[3],
        )
        g = 0
        for v in cand:
            g = gcd(g, abs(v))
        if g == 0:
            continue
        a, b, c, d = (v // g for v in cand)
        if a * d - b * c != 1:
            continue
        if K.contains(MoebiusMap(a, b, c, d)):
            return True
    return False


def triangle_classes(t: Tessellation) -> tuple[TriangleClass, ...]:
    """The quotient triangles, each with its side orbits and gluing maps."""
    if t._tri_memo is not None:
        return t._tri_memo
    classes: list[tuple[ExtendedRational, ...]] = []
    for o in t.orbits:
        for tri in ((o.a, o.b, o.c), (o.a, o.c, o.d)):
            if not any(_triangle_equiv(t.group, verts, tri) for verts in classes):
                classes.append(tri)
    out = []
    for verts in classes:
        sides = []
        for i in range(3):
            side = Geodesic(verts[i], verts[(i + 1) % 3])
            hit = t.locate(side)
            if hit is None:  # pragma: no cover
                raise AssertionError("triangle side is not an edge")
            sides.append(hit)
        out.append(TriangleClass(verts, tuple(sides)))
    result = tuple(out)
    object.__setattr__(t, "_tri_memo", result)
    return result


def incident_triangle_keys(t: Tessellation, label: str) -> tuple[int, ...]:
    """Indexes into triangle_classes(t) of the classes flanking the orbit."""
    classes = triangle_classes(t)
    o = t.orbit(label)
    out = []
    for tri in ((o.a, o.b, o.c), (o.a, o.c, o.d)):
        for idx, cls in enumerate(classes):
            if _triangle_equiv(t.group, cls.vertices, tri):
                out.append(idx)
                break
        else:  # pragma: no cover
            raise AssertionError("flank triangle missing from class list")
    return tuple(out)


# ---------------------------------------------------------------------------
# Validation.

def check_non_crossing(t: Tessellation, extra: int = 0) -> None:
    """Verify that no two edges cross, over a bounded set of translates.

    The bound is the coset-graph diameter plus two (plus any audit margin);
    any crossing pair has a witness within that distance of the quotient.
    """
    radius = coset_graph_diameter(t.group) + 2 + extra
    members = psl2z_ball_in(t.group, radius)
    geos = [o.geodesic for o in t.orbits]
    for g1 in geos:
        for g2 in geos:
            for m in members:
                moved = g2.transform(m)
                if interleave(g1, moved):
                    raise AssertionError(f"edges cross: {g1} and {moved}")


def validate(t: Tessellation) -> None:
    """Internal consistency checks: counts, distinctness, quads, crossings."""
    for i, o1 in enumerate(t.orbits):
        for o2 in t.orbits[i + 1 :]:
            if any(t.group.contains(m) for m in solve_edge_map(o1.geodesic, o2.geodesic)):
                raise AssertionError(f"orbits {o1.label} and {o2.label} coincide")
    if t.group.is_torsion_free():
        n = t.group.index
        if len(t.orbits) != n // 2:
            raise AssertionError("edge orbit count is not index/2")
        if len(triangle_classes(t)) != n // 3:
            raise AssertionError("triangle class count is not index/3")
    if t.locate(t.distinguished.geodesic()) is None:
        raise AssertionError("distinguished edge is not in the tessellation")
    for o in t.orbits:
        for side in (
            Geodesic(o.a, o.b),
            Geodesic(o.b, o.c),
            Geodesic(o.c, o.d),
            Geodesic(o.d, o.a),
        ):
            if t.locate(side) is None:
                raise AssertionError("quad side is not an edge")
    check_non_crossing(t)
