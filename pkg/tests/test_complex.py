import random
from itertools import product

import pytest

from soltess.moebius import (
    E0_GEO,
    ExtendedRational,
    Geodesic,
    IDENTITY,
    INFINITY,
    MINUS_ONE,
    ONE,
    SIGMA,
    ZERO,
)
from soltess.complex import (
    CellError,
    coset_cell,
    edge_isotropy,
    flip_path,
    inversion_witness,
    make_edge,
    pentagon_cell,
    pentagon_pairs,
    relation_element,
    replay_path,
    square_cell,
    square_pairs,
)
from soltess.presentation import gamma_e0
from soltess.subgroup import catalog_group, commutator_torus, congruence
from soltess.tessellation import (
    edge_orbit_of,
    equals,
    farey,
    flip,
    flippable_labels,
    stabilizer,
)
from soltess.verify import random_flip_sequence


# ---------------------------------------------------------------------------
# Pentagon cells.

def test_pentagon_campaign_gamma3():
    K = congruence(3)
    pairs = pentagon_pairs(K)
    assert pairs, "no admissible pentagon configurations found"
    through_e0 = 0
    for e1, e2 in pairs:
        cell = pentagon_cell(K, e1, e2)
        assert len(cell.path) == 5
        report = relation_element(cell)
        assert report.matched
        if cell.e0_slot is None:
            assert report.element == IDENTITY
        else:
            through_e0 += 1
            assert report.element != IDENTITY
            other = cell.e2 if cell.e0_slot == "first" else cell.e1
            assert report.element == gamma_e0(other, cell.shared == INFINITY)
    assert through_e0 > 0


def test_pentagon_spec_example():
    K = congruence(3)
    cell = pentagon_cell(K, Geodesic(ZERO, INFINITY), Geodesic(ONE, INFINITY))
    assert len(cell.path) == 5
    assert relation_element(cell).matched


def test_pentagon_rejects_low_index():
    with pytest.raises(CellError):
        pentagon_cell(congruence(2), Geodesic(ZERO, INFINITY), Geodesic(ONE, INFINITY))


def test_pentagon_rejects_same_orbit():
    K = congruence(3)
    e = Geodesic(ZERO, INFINITY)
    with pytest.raises(CellError):
        pentagon_cell(K, e, e)


# ---------------------------------------------------------------------------
# Square cells.

def test_square_campaign_gamma3():
    K = congruence(3)
    pairs = square_pairs(K)
    assert pairs
    through_e0 = 0
    for e1, e2 in pairs:
        cell = square_cell(K, e1, e2)
        assert len(cell.path) == 4
        report = relation_element(cell)
        assert report.matched
        if cell.e0_slot is None:
            assert report.element == IDENTITY
        else:
            through_e0 += 1
            assert report.element == SIGMA
    assert through_e0 > 0


def test_square_gamma2_has_no_admissible_pairs():
    assert square_pairs(congruence(2)) == []


def test_square_rejects_adjacent_orbits():
    K = congruence(3)
    with pytest.raises(CellError):
        square_cell(K, Geodesic(ZERO, INFINITY), Geodesic(ONE, INFINITY))


# ---------------------------------------------------------------------------
# Coset cells.

def test_coset_cell_gamma2_gamma4():
    K, K1 = congruence(2), congruence(4)
    cell = coset_cell(K, K1, E0_GEO)
    # suborbit count frozen from the subgroup-index oracle: [G2:G4] = 24/6
    assert cell.meta["k"] == 4
    assert len(cell.path) == 5
    report = relation_element(cell)
    assert report.matched and report.element == SIGMA


def test_coset_cell_identity_subgroup():
    K = congruence(2)
    cell = coset_cell(K, K, E0_GEO)
    assert len(cell.path) == 2
    report = relation_element(cell)
    assert report.matched and report.element == SIGMA


def test_coset_cell_off_standard_orbit():
    K, K1 = congruence(2), congruence(4)
    t0 = farey(K)
    label = next(l for l in t0.labels() if l != edge_orbit_of(t0, E0_GEO))
    cell = coset_cell(K, K1, t0.orbit(label).geodesic)
    report = relation_element(cell)
    assert report.matched and report.element == IDENTITY


def test_coset_cell_orderings_differ_but_close():
    K, K1 = congruence(2), congruence(4)
    a = coset_cell(K, K1, E0_GEO, (0, 1, 2, 3))
    b = coset_cell(K, K1, E0_GEO, (3, 2, 1, 0))
    assert [e.flip_rep for e in a.path] != [e.flip_rep for e in b.path]
    assert relation_element(a).matched and relation_element(b).matched


def test_coset_cell_requires_containment():
    with pytest.raises(ValueError):
        coset_cell(congruence(3), congruence(4), E0_GEO)


def test_coset_cell_rejects_bad_ordering():
    with pytest.raises(CellError):
        coset_cell(congruence(2), congruence(4), E0_GEO, (0, 1))


# ---------------------------------------------------------------------------
# Flip paths.

def test_flip_path_trivial():
    t = farey(congruence(2))
    assert len(flip_path(t, t)) == 0


def test_flip_path_single_move():
    t = farey(congruence(2))
    t2, _ = flip(t, t.labels()[0])
    path = flip_path(t, t2)
    assert len(path) == 1


def test_flip_path_reconnects_scrambles():
    rng = random.Random(20240901)
    for name in ("gamma2", "gamma3"):
        K = catalog_group(name)
        t0 = farey(K)
        for _ in range(5):
            target, labels = random_flip_sequence(K, 3, rng)
            path = flip_path(t0, target)
            assert path is not None
            assert len(path) <= 3
            end, _ = replay_path(t0, tuple(e.flip_rep for e in path.edges))
            assert equals(end, target)


def test_flip_path_budget_exhaustion():
    rng = random.Random(7)
    K = congruence(3)
    t0 = farey(K)
    target, _ = random_flip_sequence(K, 4, rng)
    if equals(t0, target):
        target, _ = random_flip_sequence(K, 3, rng)
    assert flip_path(t0, target, budget=2) is None


def test_flip_path_across_groups():
    # same tessellation declared under different groups reconnects trivially
    t2 = farey(congruence(2))
    t3 = farey(congruence(3))
    assert len(flip_path(t2, t3)) == 0


# ---------------------------------------------------------------------------
# Inversion witnesses and isotropy.

def test_torus_edges_all_inverted():
    G = commutator_torus()
    t0 = farey(G)
    for lab in t0.labels():
        E = make_edge(t0, lab)
        w = inversion_witness(E)
        assert w is not None
        assert w.fourth_power_trivial
        assert (w.square * w.square).is_identity
        kprime = stabilizer(E.to_t)
        assert kprime.contains(w.square)
        assert not G.contains(w.square)


def test_gamma3_edges_not_inverted():
    K = congruence(3)
    t0 = farey(K)
    for lab in t0.labels():
        assert inversion_witness(make_edge(t0, lab)) is None


def test_gamma2_edges_inverted_with_involution_square():
    # the three moves at index six admit swaps; their squares are elliptic
    # involutions fixing a point on the flipped edge
    K = congruence(2)
    t0 = farey(K)
    for lab in t0.labels():
        w = inversion_witness(make_edge(t0, lab))
        assert w is not None
        assert w.fourth_power_trivial


def test_witness_swaps_tessellations_pointwise(rng):
    G = commutator_torus()
    t0 = farey(G)
    E = make_edge(t0, t0.labels()[0])
    w = inversion_witness(E)
    k = w.map
    # k carries the flip onto the base and squares to its matrix
    for o in E.to_t.orbits:
        assert edge_orbit_of(t0, k.apply_geodesic(o.geodesic)) is not None
    kk = k * k
    for _ in range(50):
        p = rng.randint(-40, 40)
        q = rng.randint(0, 40)
        if (p, q) == (0, 0):
            continue
        x = ExtendedRational(p, q)
        assert kk(x) == w.square(x)


def test_edge_isotropy():
    K = congruence(2)
    t0 = farey(K)
    E = make_edge(t0, edge_orbit_of(t0, E0_GEO))
    kprime, witness = edge_isotropy(E)
    assert kprime.index == 3
    for g in K.schreier_generators():
        assert kprime.contains(g)
    assert witness is not None

    G = commutator_torus()
    tG = farey(G)
    EG = make_edge(tG, tG.labels()[0])
    kpG, wG = edge_isotropy(EG)
    assert kpG.index == 3
    assert wG is not None and kpG.contains(wG.square) and not G.contains(wG.square)

    K3 = congruence(3)
    t3 = farey(K3)
    E3 = make_edge(t3, t3.labels()[0])
    kp3, w3 = edge_isotropy(E3)
    assert w3 is None
    for g in K3.schreier_generators():
        assert kp3.contains(g)
