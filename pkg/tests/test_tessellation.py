import json
import random

import pytest

from conftest import random_moebius
from soltess.moebius import (
    E0,
    E0_GEO,
    ExtendedRational,
    Geodesic,
    INFINITY,
    MINUS_ONE,
    ONE,
    OrientedGeodesic,
    SIGMA,
    ZERO,
    interleave,
    solve_edge_map,
)
from soltess.subgroup import (
    catalog_group,
    commutator_torus,
    congruence,
    full_group,
    intersect,
)
from soltess.tessellation import (
    FlipError,
    Tessellation,
    check_non_crossing,
    edge_orbit_of,
    equals,
    farey,
    fingerprint,
    flip,
    flippable_labels,
    farey_apex_left,
    refine,
    stabilizer,
    triangle_classes,
    validate,
)


def same_orbit(t, g1: Geodesic, g2: Geodesic) -> bool:
    return any(t.group.contains(m) for m in solve_edge_map(g1, g2))


# ---------------------------------------------------------------------------
# The base tessellation.

def test_farey_counts():
    for name, orbits, tris in (("gamma2", 3, 2), ("gamma3", 6, 4), ("torus", 3, 2)):
        t = farey(catalog_group(name))
        assert len(t.orbits) == orbits
        assert len(triangle_classes(t)) == tris
        validate(t)


def test_farey_gamma2_orbit_representatives():
    t = farey(congruence(2))
    expected = [E0_GEO, Geodesic(ZERO, ONE), Geodesic(ONE, INFINITY)]
    for e in expected:
        assert edge_orbit_of(t, e) is not None
    labels = {edge_orbit_of(t, e) for e in expected}
    assert len(labels) == 3


def test_farey_distinguished_edge():
    assert farey(congruence(2)).distinguished == E0


def test_farey_full_group():
    t = farey(full_group())
    assert len(t.orbits) == 1
    assert len(triangle_classes(t)) == 1
    with pytest.raises(FlipError):
        flip(t, t.labels()[0])


def test_farey_apex_left():
    assert farey_apex_left(E0) == MINUS_ONE
    assert farey_apex_left(E0.reversed()) == ONE
    assert farey_apex_left(OrientedGeodesic(ZERO, ONE)) == INFINITY
    assert farey_apex_left(OrientedGeodesic(ONE, ZERO)) == ExtendedRational(1, 2)


# ---------------------------------------------------------------------------
# Whitehead moves.

def test_flip_example_gamma2():
    t = farey(congruence(2))
    lab = edge_orbit_of(t, E0_GEO)
    t2, corr = flip(t, lab)
    new_lab = corr[lab]
    assert same_orbit(t2, t2.orbit(new_lab).geodesic, Geodesic(MINUS_ONE, ONE))
    assert t2.distinguished == OrientedGeodesic(ONE, MINUS_ONE)
    assert not equals(t, t2)
    validate(t2)


def test_flip_is_involution():
    for name in ("gamma2", "gamma3", "torus"):
        t = farey(catalog_group(name))
        for lab in flippable_labels(t):
            t2, corr = flip(t, lab)
            t3, _ = flip(t2, corr[lab])
            assert equals(t, t3)


def test_flip_keeps_counts():
    rng = random.Random(5150)
    for name in ("gamma2", "gamma3"):
        K = catalog_group(name)
        t = farey(K)
        for _ in range(12):
            lab = rng.choice(flippable_labels(t))
            t, _ = flip(t, lab)
            assert len(t.orbits) == K.index // 2
            assert len(triangle_classes(t)) == K.index // 3


def test_disjoint_flips_commute():
    from soltess.complex import square_pairs

    K = congruence(3)
    t0 = farey(K)
    for e1, e2 in square_pairs(K):
        l1 = edge_orbit_of(t0, e1)
        l2 = edge_orbit_of(t0, e2)
        ta, corr_a = flip(t0, l1)
        tab, _ = flip(ta, corr_a[l2])
        tb, corr_b = flip(t0, l2)
        tba, _ = flip(tb, corr_b[l1])
        assert equals(tab, tba)


def test_flip_requires_torsion_free():
    t = farey(full_group())
    assert flippable_labels(t) == ()


def test_flip_refuses_self_adjacent_orbit():
    # after flipping the base-edge orbit at gamma2, the two surviving old
    # orbits become inner edges of folded triangles and cannot be flipped
    t = farey(congruence(2))
    lab = edge_orbit_of(t, E0_GEO)
    t2, corr = flip(t, lab)
    flippable = flippable_labels(t2)
    assert flippable == (corr[lab],)
    stuck = [l for l in t2.labels() if l != corr[lab]]
    for l in stuck:
        with pytest.raises(FlipError):
            flip(t2, l)


# ---------------------------------------------------------------------------
# Membership.

def test_edge_orbit_examples():
    t = farey(congruence(2))
    lab0 = edge_orbit_of(t, E0_GEO)
    assert edge_orbit_of(t, Geodesic(ExtendedRational(2, 1), INFINITY)) == lab0
    assert edge_orbit_of(t, Geodesic(MINUS_ONE, ONE)) is None
    for o in t.orbits:
        assert edge_orbit_of(t, o.geodesic) == o.label


# ---------------------------------------------------------------------------
# Equality.

def test_equals_base_tessellations():
    assert equals(farey(congruence(2)), farey(congruence(3)))
    assert equals(farey(congruence(2)), farey(commutator_torus()))


def test_equals_examples():
    t = farey(congruence(2))
    lab = edge_orbit_of(t, E0_GEO)
    t2, corr = flip(t, lab)
    assert not equals(t, t2)
    t3, _ = flip(t2, corr[lab])
    assert equals(t, t3)


def test_equals_is_equivalence_and_refine_stable(rng):
    K2, K3 = congruence(2), congruence(3)
    pool = [farey(K2), farey(K3), farey(commutator_torus())]
    t = farey(K2)
    lab = edge_orbit_of(t, E0_GEO)
    t2, corr = flip(t, lab)
    pool.append(t2)
    pool.append(flip(t2, corr[lab])[0])
    for a in pool:
        assert equals(a, a)
    for a in pool:
        for b in pool:
            assert equals(a, b) == equals(b, a)
            if a.group == b.group == K2:
                assert equals(a, b) == equals(refine(a, congruence(4)), b)
    matrix = [[equals(a, b) for b in pool] for a in pool]
    for i in range(len(pool)):
        for j in range(len(pool)):
            for k in range(len(pool)):
                if matrix[i][j] and matrix[j][k]:
                    assert matrix[i][k]


# ---------------------------------------------------------------------------
# Refinement.

def test_refine_counts():
    t = farey(congruence(2))
    assert len(refine(t, congruence(4)).orbits) == 12
    assert len(refine(t, congruence(6)).orbits) == 36
    assert refine(t, congruence(2)) is t


def test_refine_preserves_edges():
    t = farey(congruence(2))
    r = refine(t, congruence(4))
    for o in r.orbits:
        assert edge_orbit_of(t, o.geodesic) is not None
    for o in t.orbits:
        assert edge_orbit_of(r, o.geodesic) is not None
    validate(r)


def test_refine_from_torsion_group():
    # each orbit of the full-group base tessellation splits into the
    # subgroup's orbits, adjusted by the order-two edge stabiliser
    t = farey(full_group())
    r = refine(t, congruence(2))
    assert len(r.orbits) == 3


# ---------------------------------------------------------------------------
# Stabilizers.

def test_stabilizer_of_base_is_full_group():
    assert stabilizer(farey(congruence(2))).index == 1
    assert stabilizer(farey(congruence(3))).index == 1


def test_stabilizer_of_flip_contains_group():
    K = congruence(2)
    t = farey(K)
    t2, _ = flip(t, edge_orbit_of(t, E0_GEO))
    s = stabilizer(t2)
    assert s.index == 3  # frozen from the coset scan
    for g in K.schreier_generators():
        assert s.contains(g)
    assert s.contains(SIGMA)


def test_stabilizer_of_torus_flip():
    G = commutator_torus()
    t = farey(G)
    t2, _ = flip(t, t.labels()[0])
    s = stabilizer(t2)
    assert s.index == 3  # an extension of the index-6 commutator subgroup
    for g in G.schreier_generators():
        assert s.contains(g)


# ---------------------------------------------------------------------------
# Non-crossing and long random runs.

@pytest.mark.slow
def test_non_crossing_in_200_flip_runs():
    rng = random.Random(31337)
    for name in ("gamma2", "gamma3"):
        t = farey(catalog_group(name))
        for _ in range(100):
            lab = rng.choice(flippable_labels(t))
            t, _ = flip(t, lab)
            check_non_crossing(t)


def test_non_crossing_audit_mode():
    t = farey(congruence(2))
    t2, _ = flip(t, edge_orbit_of(t, E0_GEO))
    check_non_crossing(t2, extra=2)


def test_crossing_is_detected():
    # manufacture a corrupted tessellation and ensure the check fires
    t = farey(congruence(2))
    bad_orbit = t.orbits[0]
    with pytest.raises((AssertionError, ValueError)):
        corrupted = Tessellation(
            t.group,
            (
                type(bad_orbit)(
                    "bad",
                    ZERO,
                    ONE,
                    INFINITY,
                    MINUS_ONE,
                ),
                type(bad_orbit)(
                    "bad2",
                    MINUS_ONE,
                    ZERO,
                    ONE,
                    ExtendedRational(-2, 1),
                ),
            )
            + t.orbits[2:],
            t.distinguished,
        )
        check_non_crossing(corrupted)


# ---------------------------------------------------------------------------
# Fingerprints.

def test_fingerprint_invariant_under_construction_path():
    K = congruence(3)
    t0 = farey(K)
    labs = list(t0.labels())
    a1, corr1 = flip(t0, labs[0])
    a2, _ = flip(a1, corr1[labs[1]])
    b1, corr2 = flip(t0, labs[1])
    b2, _ = flip(b1, corr2[labs[0]])
    if equals(a2, b2):
        assert fingerprint(a2) == fingerprint(b2)
    assert fingerprint(t0) != fingerprint(a1)


# ---------------------------------------------------------------------------
# Serialisation.

def test_json_round_trip():
    t = farey(congruence(2))
    t2, _ = flip(t, edge_orbit_of(t, E0_GEO))
    for sample in (t, t2, refine(t, congruence(4))):
        data = json.loads(sample.to_json_str())
        back = Tessellation.from_json(data)
        assert back.group == sample.group
        assert equals(back, sample)
        assert back.distinguished == sample.distinguished


def test_json_rejects_corrupt_records():
    t = farey(congruence(2))
    data = json.loads(t.to_json_str())
    data["triangles"] = data["triangles"][:1]
    with pytest.raises(ValueError):
        Tessellation.from_json(data)
