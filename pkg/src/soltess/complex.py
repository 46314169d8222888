"""Local structure of the triangulation complex.

Vertices are tessellations, edges are equivariant Whitehead moves, and the
two-cell families are the pentagon, square and coset relations.  Cells are
constructed based at the base tessellation, their closure is verified
exactly, and each closed cell yields a relation element of PSL(2,Z) by
translating every path edge back to the basepoint and composing the chosen
characteristic maps.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .moebius import (
    E0,
    E0_GEO,
    ExtendedRational,
    Geodesic,
    IDENTITY,
    INFINITY,
    MINUS_ONE,
    MoebiusMap,
    ONE,
    OrientedGeodesic,
    SIGMA,
    ZERO,
    solve_edge_map,
)
from .charmap import (
    CharAtom,
    ModularMap,
    NotMoebiusError,
    charmap,
    extract_moebius,
    moebius_map,
    try_conjugate_element,
)
from .subgroup import Subgroup, subgroup_via_membership
from .tessellation import (
    EdgeCorrespondence,
    Tessellation,
    edge_orbit_of,
    equals,
    farey,
    fingerprint,
    flip,
    flippable_labels,
    incident_triangle_keys,
    refine,
    stabilizer,
    triangle_classes,
)

__all__ = [
    "ComplexEdge",
    "TwoCell",
    "EdgePath",
    "InversionWitness",
    "make_edge",
    "pentagon_cell",
    "square_cell",
    "coset_cell",
    "pentagon_pairs",
    "square_pairs",
    "relation_element",
    "RelationReport",
    "flip_path",
    "replay_path",
    "inversion_witness",
    "edge_isotropy",
    "bfs_budget",
]


def bfs_budget(default: int = 20000) -> int:
    raw = os.environ.get("SOLENOID_BFS_BUDGET")
    if raw is None:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


@dataclass(frozen=True, eq=False)
class ComplexEdge:
    """One Whitehead move: a flip of from_t along an orbit of its group."""

    from_t: Tessellation
    to_t: Tessellation
    group: Subgroup
    orbit_label: str
    flip_rep: Geodesic
    correspondence: EdgeCorrespondence

    def to_json(self) -> dict:
        return {
            "group_index": self.group.index,
            "orbit": self.orbit_label,
            "rep": str(self.flip_rep),
            "correspondence": self.correspondence.to_json(),
        }


def make_edge(t: Tessellation, label: str) -> ComplexEdge:
    rep = t.orbit(label).geodesic
    t2, corr = flip(t, label)
    return ComplexEdge(t, t2, t.group, label, rep, corr)


@dataclass(frozen=True, eq=False)
class EdgePath:
    edges: tuple[ComplexEdge, ...]

    def __len__(self) -> int:
        return len(self.edges)

    def to_json(self) -> list:
        return [e.to_json() for e in self.edges]


@dataclass(frozen=True, eq=False)
class TwoCell:
    """A closed boundary path of a two-cell based at the base tessellation."""

    kind: str  # pentagon | square | coset
    path: tuple[ComplexEdge, ...]
    base: Tessellation
    # which diagonal carries the standard edge's orbit: None, "first", "second"
    e0_slot: str | None
    # normalised defining edges; for coset cells e2 is None
    e1: Geodesic | None = None
    e2: Geodesic | None = None
    shared: ExtendedRational | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        data = {
            "kind": self.kind,
            "length": len(self.path),
            "edges": [e.to_json() for e in self.path],
            "e0_slot": self.e0_slot,
        }
        if self.e1 is not None:
            data["e1"] = str(self.e1)
        if self.e2 is not None:
            data["e2"] = str(self.e2)
        if self.shared is not None:
            data["shared"] = str(self.shared)
        data.update(self.meta)
        return data


class CellError(ValueError):
    """The requested two-cell does not satisfy its preconditions."""


def _normalise_to_e0(t0: Tessellation, geos: list[Geodesic], which: int) -> list[Geodesic]:
    """Translate the configuration inside K so that geos[which] becomes the base edge."""
    target = geos[which]
    if target == E0_GEO:
        return geos
    for m in solve_edge_map(target, E0_GEO):
        if t0.group.contains(m):
            return [g.transform(m) for g in geos]
    raise CellError("edge lies in the base orbit but no group translate realises it")


def _shared_vertex(e1: Geodesic, e2: Geodesic) -> ExtendedRational:
    common = set(e1.endpoints()) & set(e2.endpoints())
    if len(common) != 1:
        raise CellError("edges must share exactly one ideal endpoint")
    return common.pop()


def _alternating_cell(t0: Tessellation, lab1: str, lab2: str, steps: int) -> tuple[ComplexEdge, ...]:
    """Flip alternately the tracked first and second orbit for `steps` moves."""
    edges = []
    t = t0
    cur = [lab1, lab2]
    for step in range(steps):
        pick = step % 2
        e = make_edge(t, cur[pick])
        edges.append(e)
        cur[pick] = e.correspondence[cur[pick]]
        cur[1 - pick] = e.correspondence[cur[1 - pick]]
        t = e.to_t
    if not equals(t, t0):
        raise AssertionError("cell boundary failed to close")
    return tuple(edges)


def pentagon_cell(K: Subgroup, e1: Geodesic, e2: Geodesic) -> TwoCell:
    """The five-flip cell for two diagonals of a pentagon sharing an endpoint."""
    if not K.is_torsion_free():
        raise CellError("pentagon cells need a torsion-free group")
    if K.index < 9:
        raise CellError("pentagon cells need index at least 9")
    t0 = farey(K)
    lab1 = edge_orbit_of(t0, e1)
    lab2 = edge_orbit_of(t0, e2)
    if lab1 is None or lab2 is None:
        raise CellError("defining edges must be edges of the base tessellation")
    if lab1 == lab2:
        raise CellError("defining edges must lie in distinct orbits")
    e0_lab = edge_orbit_of(t0, E0_GEO)
    e0_slot = None
    geos = [e1, e2]
    if e0_lab == lab1:
        geos = _normalise_to_e0(t0, geos, 0)
        e0_slot = "first"
    elif e0_lab == lab2:
        geos = _normalise_to_e0(t0, geos, 1)
        e0_slot = "second"
    e1, e2 = geos
    shared = _shared_vertex(e1, e2)
    u = next(x for x in e1.endpoints() if x != shared)
    v = next(x for x in e2.endpoints() if x != shared)
    if edge_orbit_of(t0, Geodesic(u, v)) is None:
        raise CellError("defining edges do not bound a common triangle")
    tri_mid = _class_key(t0, (shared, u, v))
    flanks1 = incident_triangle_keys(t0, lab1)
    flanks2 = incident_triangle_keys(t0, lab2)
    outer1 = [k for k in flanks1 if k != tri_mid]
    outer2 = [k for k in flanks2 if k != tri_mid]
    if tri_mid not in flanks1 or tri_mid not in flanks2 or len(outer1) != 1 or len(outer2) != 1:
        raise CellError("pentagon triangles are identified in the quotient")
    if len({tri_mid, outer1[0], outer2[0]}) != 3:
        raise CellError("pentagon triangles are identified in the quotient")
    path = _alternating_cell(t0, lab1, lab2, 5)
    return TwoCell("pentagon", path, t0, e0_slot, e1, e2, shared)


def _class_key(t: Tessellation, tri: tuple[ExtendedRational, ...]) -> int:
    from .tessellation import _triangle_equiv

    for idx, cls in enumerate(triangle_classes(t)):
        if _triangle_equiv(t.group, cls.vertices, tri):
            return idx
    raise CellError("triple is not a triangle of the tessellation")


def square_cell(K: Subgroup, e1: Geodesic, e2: Geodesic) -> TwoCell:
    """The four-flip cell for two orbits with no common quotient triangle."""
    if not K.is_torsion_free():
        raise CellError("square cells need a torsion-free group")
    t0 = farey(K)
    lab1 = edge_orbit_of(t0, e1)
    lab2 = edge_orbit_of(t0, e2)
    if lab1 is None or lab2 is None:
        raise CellError("defining edges must be edges of the base tessellation")
    if lab1 == lab2:
        raise CellError("defining edges must lie in distinct orbits")
    if set(incident_triangle_keys(t0, lab1)) & set(incident_triangle_keys(t0, lab2)):
        raise CellError("orbits share a complementary triangle")
    e0_lab = edge_orbit_of(t0, E0_GEO)
    e0_slot = None
    geos = [e1, e2]
    if e0_lab == lab1:
        geos = _normalise_to_e0(t0, geos, 0)
        e0_slot = "first"
    elif e0_lab == lab2:
        geos = _normalise_to_e0(t0, geos, 1)
        e0_slot = "second"
    e1, e2 = geos
    path = _alternating_cell(t0, lab1, lab2, 4)
    return TwoCell("square", path, t0, e0_slot, e1, e2, None)


def coset_cell(
    K: Subgroup, K1: Subgroup, e: Geodesic, ordering: tuple[int, ...] | None = None
) -> TwoCell:
    """One long equivariant flip undone by the subgroup's short flips.

    The long edge flips the K-orbit of e; the new orbit decomposes into
    [K:K1] suborbits, which the short edges flip back in the given order.
    """
    if not K.is_torsion_free():
        raise CellError("coset cells need a torsion-free group")
    t0 = farey(K)
    lab = edge_orbit_of(t0, e)
    if lab is None:
        raise CellError("the defining edge must be an edge of the base tessellation")
    e0_lab = edge_orbit_of(t0, E0_GEO)
    e0_slot = None
    if e0_lab == lab:
        e = _normalise_to_e0(t0, [e], 0)[0]
        e0_slot = "first"
    long_edge = make_edge(t0, lab)
    new_lab = long_edge.correspondence[lab]
    refined = refine(long_edge.to_t, K1)
    if refined is long_edge.to_t:
        sublabels = [new_lab]
    else:
        sublabels = sorted(
            (l for l in refined.labels() if l.rsplit(".", 1)[0] == new_lab),
            key=lambda l: int(l.rsplit(".", 1)[1]),
        )
    k = len(sublabels)
    if ordering is None:
        ordering = tuple(range(k))
    if sorted(ordering) != list(range(k)):
        raise CellError(f"ordering must be a permutation of 0..{k - 1}")
    edges = [long_edge]
    t = refined
    pending = [sublabels[i] for i in ordering]
    while pending:
        nxt = pending.pop(0)
        edge = make_edge(t, nxt)
        edges.append(edge)
        pending = [edge.correspondence[l] for l in pending]
        t = edge.to_t
    if not equals(t, t0):
        raise AssertionError("coset cell boundary failed to close")
    return TwoCell(
        "coset",
        tuple(edges),
        t0,
        e0_slot,
        e,
        None,
        None,
        meta={"k": k, "subgroup_index": K1.index, "ordering": list(ordering)},
    )


# ---------------------------------------------------------------------------
# Admissible configurations for the verification campaigns.

def pentagon_pairs(K: Subgroup):
    """Admissible (e1, e2) pentagon configurations of the base tessellation."""
    t0 = farey(K)
    out = []
    for cls in triangle_classes(t0):
        verts = cls.vertices
        sides = [Geodesic(verts[i], verts[(i + 1) % 3]) for i in range(3)]
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                try:
                    cell_ok = _pentagon_admissible(t0, sides[i], sides[j])
                except CellError:
                    continue
                if cell_ok:
                    out.append((sides[i], sides[j]))
    return out


def _pentagon_admissible(t0: Tessellation, e1: Geodesic, e2: Geodesic) -> bool:
    lab1 = edge_orbit_of(t0, e1)
    lab2 = edge_orbit_of(t0, e2)
    if lab1 is None or lab2 is None or lab1 == lab2:
        return False
    shared = set(e1.endpoints()) & set(e2.endpoints())
    if len(shared) != 1:
        return False
    sh = shared.pop()
    u = next(x for x in e1.endpoints() if x != sh)
    v = next(x for x in e2.endpoints() if x != sh)
    if edge_orbit_of(t0, Geodesic(u, v)) is None:
        return False
    tri_mid = _class_key(t0, (sh, u, v))
    flanks1 = incident_triangle_keys(t0, lab1)
    flanks2 = incident_triangle_keys(t0, lab2)
    if tri_mid not in flanks1 or tri_mid not in flanks2:
        return False
    outer1 = [x for x in flanks1 if x != tri_mid]
    outer2 = [x for x in flanks2 if x != tri_mid]
    if len(outer1) != 1 or len(outer2) != 1:
        return False
    return len({tri_mid, outer1[0], outer2[0]}) == 3


def square_pairs(K: Subgroup):
    """Admissible (e1, e2) square configurations: one per non-adjacent orbit pair."""
    t0 = farey(K)
    out = []
    labels = t0.labels()
    for i, l1 in enumerate(labels):
        for l2 in labels:
            if l1 == l2:
                continue
            if set(incident_triangle_keys(t0, l1)) & set(incident_triangle_keys(t0, l2)):
                continue
            out.append((t0.orbit(l1).geodesic, t0.orbit(l2).geodesic))
    return out


# ---------------------------------------------------------------------------
# Relation elements.

@dataclass(frozen=True, eq=False)
class RelationReport:
    cell: TwoCell
    element: MoebiusMap
    predicted: MoebiusMap
    matched: bool
    generators: tuple[ModularMap, ...]

    def to_json(self) -> dict:
        data = self.cell.to_json()
        data.update(
            {
                "element": str(self.element),
                "predicted": str(self.predicted),
                "matched": self.matched,
            }
        )
        return data


def _farey_vertices(depth: int) -> tuple[ExtendedRational, ...]:
    verts = {ZERO, ONE, INFINITY, MINUS_ONE}
    frontier = [
        (ZERO, ONE),
        (ONE, INFINITY),
        (MINUS_ONE, ZERO),
        (MINUS_ONE, INFINITY),
    ]
    for _ in range(depth):
        nxt = []
        for u, v in frontier:
            med = ExtendedRational(u.p + v.p, u.q + v.q)
            if med not in verts:
                verts.add(med)
                nxt.extend(((u, med), (med, v)))
        frontier = nxt
    return tuple(sorted(verts, key=lambda r: (r.q, r.p)))


def _conjugated_table(H: Subgroup, g: ModularMap) -> Subgroup:
    """The table of g^-1 H g, via the forward-conjugation membership oracle."""

    def member(x: MoebiusMap) -> bool:
        y = try_conjugate_element(g, x)
        return y is not None and H.contains(y)

    return subgroup_via_membership(member, expected_index=H.index)


def _predicted_element(cell: TwoCell) -> MoebiusMap:
    from .presentation import gamma_e0

    if cell.e0_slot is None:
        return IDENTITY
    if cell.kind == "pentagon":
        other = cell.e2 if cell.e0_slot == "first" else cell.e1
        return gamma_e0(other, shared_is_terminal=(cell.shared == INFINITY))
    return SIGMA


def relation_element(cell: TwoCell, certify_depth: int = 5) -> RelationReport:
    """Translate the cell boundary to the basepoint and compose its generators.

    Every path edge is pulled back to an edge at the base tessellation, the
    chosen characteristic map of each pulled-back edge is taken as its
    generator, and the composite is extracted as a Moebius element, certified
    pointwise on witness vertices.  The element is compared with the
    predicted value determined by whether and where the standard edge's orbit
    is flipped.
    """
    pulled = [edge.flip_rep for edge in cell.path]
    conj: dict[int, Subgroup] = {}
    for edge in cell.path:
        conj.setdefault(id(edge.group), edge.group)

    gens: list[ModularMap] = []
    for i, edge in enumerate(cell.path):
        H = conj[id(edge.group)]
        base = farey(H)
        lab = edge_orbit_of(base, pulled[i])
        if lab is None:
            raise AssertionError("pulled-back flip representative is not an edge")
        t2, _corr = flip(base, lab)
        g = ModularMap((CharAtom(t2, t2.distinguished),))
        gens.append(g)
        if i + 1 < len(cell.path):
            g_inv = g.inverse()
            for j in range(i + 1, len(cell.path)):
                pulled[j] = g_inv.apply_geodesic(pulled[j])
            # Only groups still flipped later may be carried across this step;
            # each is contained in the invariance group of the step, which
            # keeps its conjugate inside PSL(2,Z).
            remaining = {id(cell.path[j].group) for j in range(i + 1, len(cell.path))}
            conj = {
                key: _conjugated_table(table, g) if key in remaining else table
                for key, table in conj.items()
                if key in remaining
            }

    composite = ModularMap(tuple(atom for g in gens for atom in g.factors))
    image = composite.apply_oriented(E0)
    element = None
    for m in solve_edge_map(E0_GEO, image.geodesic()):
        if m(ZERO) == image.start and m(INFINITY) == image.end:
            element = m
            break
    if element is None:
        raise NotMoebiusError("composite does not carry the standard edge to a group translate")
    for q in _farey_vertices(certify_depth):
        if composite(q) != element(q):
            raise NotMoebiusError("composite disagrees with its Moebius certificate")
    predicted = _predicted_element(cell)
    return RelationReport(cell, element, predicted, element == predicted, tuple(gens))


# ---------------------------------------------------------------------------
# Connectivity: flip paths by bidirectional breadth-first search.

def _expand_plans(t: Tessellation, plan: tuple[Geodesic, ...], forward: bool):
    """Neighbour tessellations of t with extended flip plans.

    Forward plans record the geodesics flipped from the start; backward plans
    record the geodesics to flip from the node to reach the goal.
    """
    out = []
    for lab in flippable_labels(t):
        edge = make_edge(t, lab)
        if forward:
            out.append((edge.to_t, plan + (edge.flip_rep,)))
        else:
            back = edge.to_t.orbit(edge.correspondence[lab]).geodesic
            out.append((edge.to_t, (back,) + plan))
    return out


def _bucket_insert(buckets: dict, t: Tessellation, plan) -> bool:
    key = fingerprint(t)
    bucket = buckets.setdefault(key, [])
    for existing, _plan in bucket:
        if equals(existing, t):
            return False
    bucket.append((t, plan))
    return True


def _bucket_find(buckets: dict, t: Tessellation):
    for existing, plan in buckets.get(fingerprint(t), []):
        if equals(existing, t):
            return plan
    return None


def replay_path(t_start: Tessellation, plan: tuple[Geodesic, ...]) -> tuple[Tessellation, EdgePath]:
    t = t_start
    edges = []
    for geo in plan:
        lab = edge_orbit_of(t, geo)
        if lab is None:
            raise ValueError("plan geodesic is not an edge during replay")
        edge = make_edge(t, lab)
        edges.append(edge)
        t = edge.to_t
    return t, EdgePath(tuple(edges))


def flip_path(
    t_from: Tessellation, t_to: Tessellation, budget: int | None = None
) -> EdgePath | None:
    """A shortest path of equivariant flips between the two tessellations.

    Bidirectional breadth-first search over exact tessellation equality with
    fingerprint buckets; returns None when the node budget is exhausted,
    never a wrong path.
    """
    if t_from.group != t_to.group:
        from .subgroup import intersect

        K = intersect(t_from.group, t_to.group)
        t_from = refine(t_from, K)
        t_to = refine(t_to, K)
    if equals(t_from, t_to):
        return EdgePath(())
    budget = budget if budget is not None else bfs_budget()
    fwd: dict = {}
    bwd: dict = {}
    _bucket_insert(fwd, t_from, ())
    _bucket_insert(bwd, t_to, ())
    frontier_f = [(t_from, ())]
    frontier_b = [(t_to, ())]
    nodes = 2

    def finish(plan) -> EdgePath:
        end, path = replay_path(t_from, plan)
        if not equals(end, t_to):  # pragma: no cover - assembly is verified
            raise AssertionError("assembled path does not reach the target")
        return path

    while frontier_f and frontier_b:
        expand_forward = len(frontier_f) <= len(frontier_b)
        frontier = frontier_f if expand_forward else frontier_b
        nxt = []
        for t, plan in sorted(frontier, key=lambda item: fingerprint(item[0])):
            for t2, plan2 in _expand_plans(t, plan, forward=expand_forward):
                own = fwd if expand_forward else bwd
                if not _bucket_insert(own, t2, plan2):
                    continue
                nodes += 1
                other_plan = _bucket_find(bwd if expand_forward else fwd, t2)
                if other_plan is not None:
                    if expand_forward:
                        return finish(plan2 + other_plan)
                    return finish(other_plan + plan2)
                nxt.append((t2, plan2))
                if nodes > budget:
                    return None
        if expand_forward:
            frontier_f = nxt
        else:
            frontier_b = nxt
    return None  # pragma: no cover - the complex is connected at fixed group


# ---------------------------------------------------------------------------
# Edge inversion and isotropy.

@dataclass(frozen=True, eq=False)
class InversionWitness:
    map: ModularMap
    square: MoebiusMap
    fourth_power_trivial: bool


def _is_inverting(k: ModularMap, tau: Tessellation, base: Tessellation) -> MoebiusMap | None:
    """The matrix of k^2 when k swaps the two tessellations, else None."""
    for orb in tau.orbits:
        if edge_orbit_of(base, k.apply_geodesic(orb.geodesic)) is None:
            return None
    try:
        mu = extract_moebius(k * k)
    except NotMoebiusError:
        return None
    return mu


def inversion_witness(E: ComplexEdge) -> InversionWitness | None:
    """A boundary map swapping the two endpoint tessellations, if one exists.

    Candidates are the characteristic maps at one oriented edge per orbit of
    the terminal tessellation, which is a complete set up to the flip group;
    when the edge is inverted, the normalised candidates adapted to the
    crossing pair of the move provide a witness whose fourth power is the
    identity.
    """
    tau = E.to_t
    base = E.from_t
    hits: list[tuple[ModularMap, MoebiusMap]] = []
    for orb in tau.orbits:
        for e in (orb.rep, orb.rep.reversed()):
            k = charmap(tau, e)
            mu = _is_inverting(k, tau, base)
            if mu is not None:
                hits.append((k, mu))
    if not hits:
        return None
    # prefer a witness with trivial fourth power, normalising to the crossing
    # pair of the move when needed
    for k, mu in hits:
        if (mu * mu).is_identity:
            return InversionWitness(k, mu, True)
    old = E.flip_rep
    new = tau.orbit(E.correspondence[E.orbit_label]).geodesic
    for old_or in (OrientedGeodesic(old.x, old.y), OrientedGeodesic(old.y, old.x)):
        delta = None
        for m in solve_edge_map(E0_GEO, old_or.geodesic()):
            if m(ZERO) == old_or.start and m(INFINITY) == old_or.end:
                delta = m
                break
        if delta is None:
            continue
        for new_or in (OrientedGeodesic(new.x, new.y), OrientedGeodesic(new.y, new.x)):
            k = ModularMap((CharAtom(tau, new_or),)) * moebius_map(delta.inverse())
            mu = _is_inverting(k, tau, base)
            if mu is not None and (mu * mu).is_identity:
                return InversionWitness(k, mu, True)
    k, mu = hits[0]
    return InversionWitness(k, mu, (mu * mu).is_identity)


def edge_isotropy(E: ComplexEdge) -> tuple[Subgroup, InversionWitness | None]:
    """The stabiliser data of an edge based at the base tessellation."""
    return stabilizer(E.to_t), inversion_witness(E)
