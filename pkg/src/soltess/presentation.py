"""Basepoint edges, chosen generators, and truncated presentation emission.

The generator set is one characteristic map per edge at the basepoint, fixed
by the convention that the standard oriented edge is preserved unless the
move flips its own orbit, in which case it goes to the standard image of the
flip.  Relation records come in four families: isotropy inclusions for plain
and inverted edges, boundary relations of the two-cells, and redundancy
relations between group translates of basepoint edges.

Any finite emission must truncate the countable generator and cell sets; the
truncation parameters are stamped into the document.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .moebius import (
    E0,
    E0_GEO,
    ExtendedRational,
    Geodesic,
    IDENTITY,
    INFINITY,
    MoebiusMap,
    OrientedGeodesic,
    SIGMA,
    RHO,
    ZERO,
    edge_involution,
    psl2z_ball,
    solve_edge_map,
)
from .charmap import ModularMap, WITNESS_POINTS, charmap, moebius_map
from .complex import (
    ComplexEdge,
    InversionWitness,
    RelationReport,
    coset_cell,
    edge_isotropy,
    make_edge,
    pentagon_cell,
    pentagon_pairs,
    relation_element,
    square_cell,
    square_pairs,
)
from .subgroup import CATALOG_NAMES, Subgroup, catalog_group, coset_split
from .tessellation import (
    Tessellation,
    edge_orbit_of,
    equals,
    farey,
    fingerprint,
    flip,
    flippable_labels,
    stabilizer,
)

__all__ = [
    "BasepointEdge",
    "gamma_e0",
    "enumerate_edges",
    "chosen_generator",
    "redundancy_relation",
    "emit_presentation",
    "scan_stabilizers",
    "VERIFY_POINTS",
]

VERIFY_POINTS = WITNESS_POINTS + tuple(
    ExtendedRational(p, q)
    for p, q in (
        (7, 3), (-5, 3), (4, 7), (-7, 4), (9, 5),
        (1, 7), (-1, 7), (11, 4), (-3, 8), (8, 3),
    )
)


def gamma_e0(e2: Geodesic, shared_is_terminal: bool) -> MoebiusMap:
    """The element carrying the standard edge onto e2 with reversed orientation.

    Composes the primitive parabolic fixing the indicated endpoint of the
    standard edge (terminal point oo, initial point 0) that maps the standard
    edge onto e2 with the involution reversing e2.  The defining property is
    checked, and the opposite composition order is used if it fails.
    """
    shared = INFINITY if shared_is_terminal else ZERO
    ends = set(e2.endpoints())
    if shared not in ends:
        raise ValueError(f"{e2} does not meet the standard edge at {shared}")
    other = next(x for x in ends if x != shared)
    if shared_is_terminal:
        if other.q != 1:
            raise ValueError(f"no primitive parabolic at oo carries the standard edge to {e2}")
        parabolic = MoebiusMap(1, other.p, 0, 1)
    else:
        if abs(other.p) != 1:
            raise ValueError(f"no primitive parabolic at 0 carries the standard edge to {e2}")
        parabolic = MoebiusMap(1, 0, other.q * other.p, 1)
    involution = edge_involution(e2)
    expected = (shared, other) if shared_is_terminal else (other, shared)
    for g in (involution * parabolic, parabolic * involution):
        if (g(ZERO), g(INFINITY)) == expected:
            return g
    raise AssertionError(f"no composition order realises the reversing map onto {e2}")


@dataclass(frozen=True, eq=False)
class BasepointEdge:
    """A Whitehead move at the basepoint with its chosen generator and isotropy."""

    name: str
    group_name: str
    edge: ComplexEdge
    flips_e0: bool
    chosen: ModularMap
    e_hat: OrientedGeodesic
    kprime: Subgroup
    witness: InversionWitness | None

    @property
    def inverted(self) -> bool:
        return self.witness is not None

    def to_json(self) -> dict:
        data = {
            "name": self.name,
            "group": self.group_name,
            "group_index": self.edge.group.index,
            "orbit": self.edge.orbit_label,
            "rep": str(self.edge.flip_rep),
            "flips_standard_edge": self.flips_e0,
            "distinguished_image": str(self.e_hat),
            "isotropy_index": self.kprime.index,
            "inverted": self.inverted,
        }
        if self.witness is not None:
            data["witness_square"] = str(self.witness.square)
            data["witness_fourth_power_trivial"] = self.witness.fourth_power_trivial
        return data


def chosen_generator(edge: ComplexEdge) -> tuple[ModularMap, OrientedGeodesic, bool]:
    """The fixed characteristic map for a basepoint edge.

    The map carries the base tessellation to the terminal one; the standard
    oriented edge is fixed unless the move is along its own orbit, in which
    case it goes to the standard flipped image.  Uniqueness holds because a
    characteristic map is determined by the image of the standard edge.
    """
    base = edge.from_t
    flips_e0 = edge_orbit_of(base, E0_GEO) == edge.orbit_label
    t2 = edge.to_t
    e_hat = t2.distinguished
    if base.distinguished != E0:  # rebuild with the standard basing
        t2, _ = flip(base.with_distinguished(E0), edge.orbit_label)
        e_hat = t2.distinguished
    return charmap(t2, e_hat), e_hat, flips_e0


def enumerate_edges(max_index: int, groups: tuple[str, ...] | None = None) -> tuple[BasepointEdge, ...]:
    """One record per edge orbit of the base tessellation per catalogue group."""
    out = []
    for name in groups or CATALOG_NAMES:
        K = catalog_group(name)
        if K.index > max_index or not K.is_torsion_free():
            continue
        t0 = farey(K)
        for label in t0.labels():
            edge = make_edge(t0, label)
            kprime, witness = edge_isotropy(edge)
            gen, e_hat, flips_e0 = chosen_generator(edge)
            out.append(
                BasepointEdge(
                    f"{name}/{label}", name, edge, flips_e0, gen, e_hat, kprime, witness
                )
            )
    return tuple(out)


def redundancy_relation(E: BasepointEdge, E2: BasepointEdge, gamma: MoebiusMap) -> dict:
    """The relation tying the chosen generators of two translate-related edges.

    Requires gamma to carry E's terminal tessellation onto E2's.  Solves for
    the unique element carrying the standard oriented edge to the pulled-back
    image of the standard edge and verifies the two compositions agree
    pointwise on twenty rationals.  When the move of E is along the standard
    edge's own orbit, the standard edge is not an edge of the target, and the
    pullback runs through its image under the chosen generator instead (the
    role-reversed reading of the same relation).
    """
    if not equals(E.edge.to_t.transform(gamma), E2.edge.to_t):
        raise ValueError("gamma does not carry the edge onto the target edge")
    start = E.chosen.apply_oriented(E0) if E.flips_e0 else E0
    image = OrientedGeodesic(gamma(start.start), gamma(start.end))
    pulled = E2.chosen.inverse().apply_oriented(image)
    gamma_prime = None
    for m in solve_edge_map(E0_GEO, pulled.geodesic()):
        if m(ZERO) == pulled.start and m(INFINITY) == pulled.end:
            gamma_prime = m
            break
    if gamma_prime is None:
        raise ValueError("no group element carries the standard edge to the pullback")
    lhs = E2.chosen * moebius_map(gamma_prime)
    rhs = moebius_map(gamma) * E.chosen
    for q in VERIFY_POINTS:
        if lhs(q) != rhs(q):
            raise AssertionError("redundancy relation fails pointwise verification")
    return {
        "type": "d",
        "edge": E.name,
        "edge_target": E2.name,
        "gamma": str(gamma),
        "gamma_prime": str(gamma_prime),
        "witnesses": [[str(q), str(lhs(q))] for q in VERIFY_POINTS[:5]],
    }


def _relation_record(report: RelationReport, group_name: str) -> dict:
    data = report.to_json()
    data["type"] = "c"
    data["group"] = group_name
    data["witnesses"] = [str(q) for q in WITNESS_POINTS]
    return data


def _catalog_pairs(max_index: int, subgroup_cap: int):
    """Nested catalogue pairs (K, K1) with K at or under the truncation index."""
    groups = [(n, catalog_group(n)) for n in CATALOG_NAMES]
    pairs = []
    for name, K in groups:
        if K.index > max_index or not K.is_torsion_free():
            continue
        for name1, K1 in groups:
            if K1.index <= K.index or K1.index > subgroup_cap:
                continue
            try:
                coset_split(K, K1)
            except ValueError:
                continue
            pairs.append((name, K, name1, K1))
    return pairs


def emit_presentation(
    max_index: int,
    coset_subgroup_cap: int = 24,
    redundancy_ball: int = 3,
    groups: tuple[str, ...] | None = None,
) -> dict:
    """Assemble the truncated presentation document.

    Contains the basepoint isotropy generators, one chosen generator per
    enumerated edge with its isotropy inclusions, the boundary relations of
    every pentagon, square and coset cell inside the truncation, and the
    redundancy relations over a bounded ball of group translates.  Every
    relation record is replayed during assembly.
    """
    edges = enumerate_edges(max_index, groups)
    generators = [
        {"kind": "moebius", "name": "sigma", "matrix": str(SIGMA), "order": 2},
        {"kind": "moebius", "name": "rho", "matrix": str(RHO), "order": 3},
    ]
    relations: list[dict] = []
    for E in edges:
        generators.append({"kind": "g_E", **E.to_json()})
        record = {
            "type": "b" if E.inverted else "a",
            "edge": E.name,
            "kprime": E.kprime.to_json(),
        }
        if E.inverted:
            record["witness_square"] = str(E.witness.square)
        relations.append(record)

    seen_groups = sorted({E.group_name for E in edges})
    for name in seen_groups:
        K = catalog_group(name)
        if K.index >= 9:
            for e1, e2 in pentagon_pairs(K):
                report = relation_element(pentagon_cell(K, e1, e2))
                relations.append(_relation_record(report, name))
        squares = square_pairs(K)
        for e1, e2 in squares:
            report = relation_element(square_cell(K, e1, e2))
            relations.append(_relation_record(report, name))
        if not squares:
            relations.append(
                {"type": "c", "cell_kind": "square", "group": name, "note": "no admissible pairs"}
            )

    for name, K, name1, K1 in _catalog_pairs(max_index, coset_subgroup_cap):
        t0 = farey(K)
        for label in t0.labels():
            cell = coset_cell(K, K1, t0.orbit(label).geodesic)
            report = relation_element(cell)
            rec = _relation_record(report, name)
            rec["subgroup"] = name1
            relations.append(rec)

    ball = psl2z_ball(redundancy_ball)
    by_group: dict[str, list[BasepointEdge]] = {}
    for E in edges:
        by_group.setdefault(E.group_name, []).append(E)
    for name, group_edges in by_group.items():
        for E in group_edges:
            for gamma in ball:
                target = E.edge.to_t.transform(gamma)
                for E2 in group_edges:
                    if equals(target, E2.edge.to_t):
                        relations.append(redundancy_relation(E, E2, gamma))
                        break

    return {
        "truncation": {
            "max_index": max_index,
            "catalog": list(groups or CATALOG_NAMES),
            "coset_subgroup_cap": coset_subgroup_cap,
            "redundancy_ball": redundancy_ball,
        },
        "notes": [
            "isotropy inclusions for inverted edges are recorded as type b with "
            "the orientation-preserving part equal to the stated table",
            "coset relation records compose the generators of all path edges, "
            "one long edge plus one per suborbit",
            "reversing-map order: involution after parabolic, property-checked "
            "with automatic fallback to the opposite order",
        ],
        "generators": generators,
        "relations": relations,
    }


def scan_stabilizers(
    max_index: int,
    radius: int,
    groups: tuple[str, ...] | None = None,
    budget: int | None = None,
) -> dict:
    """Stabiliser indexes of every tessellation near the base vertex.

    Enumerates the flip ball of the given radius for each catalogue group and
    reports the stabiliser index of each vertex; the base tessellation must
    be the unique vertex with full stabiliser.
    """
    from .complex import bfs_budget

    budget = budget if budget is not None else bfs_budget()
    report = {"max_index": max_index, "radius": radius, "groups": [], "unique_full_stabilizer": True}
    for name in groups or CATALOG_NAMES:
        K = catalog_group(name)
        if K.index > max_index or not K.is_torsion_free():
            continue
        t0 = farey(K)
        buckets: dict = {}
        entries = []

        def register(t: Tessellation, dist: int) -> bool:
            key = fingerprint(t)
            bucket = buckets.setdefault(key, [])
            for seen, _d in bucket:
                if equals(seen, t):
                    return False
            bucket.append((t, dist))
            return True

        register(t0, 0)
        frontier = [t0]
        entries.append((t0, 0))
        nodes = 1
        for dist in range(1, radius + 1):
            nxt = []
            for t in frontier:
                for label in flippable_labels(t):
                    t2, _ = flip(t, label)
                    if register(t2, dist):
                        entries.append((t2, dist))
                        nxt.append(t2)
                        nodes += 1
                        if nodes > budget:
                            raise ValueError("stabiliser scan exceeded the node budget")
            frontier = nxt

        group_report = {"group": name, "index": K.index, "vertices": []}
        full_count = 0
        for t, dist in entries:
            stab = stabilizer(t)
            is_base = equals(t, t0)
            if stab.index == 1:
                full_count += 1
                if not is_base:
                    report["unique_full_stabilizer"] = False
            group_report["vertices"].append(
                {
                    "distance": dist,
                    "stabilizer_index": stab.index,
                    "is_base": is_base,
                    "orbits": [str(o.geodesic) for o in t.orbits],
                }
            )
        group_report["full_stabilizer_count"] = full_count
        if full_count != 1:
            report["unique_full_stabilizer"] = False
        report["groups"].append(group_report)
    return report
