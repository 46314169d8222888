import random
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GENS, random_moebius, random_rational
from soltess.moebius import (
    E0_GEO,
    ExtendedRational,
    Geodesic,
    IDENTITY,
    INFINITY,
    MINUS_ONE,
    MoebiusMap,
    ONE,
    OrientedGeodesic,
    RHO,
    RHO_SQ,
    SIGMA,
    T_MAP,
    ZERO,
    circular_order,
    edge_involution,
    evaluate_word,
    interleave,
    moebius_from_base_triple,
    solve_edge_map,
    word_in_generators,
)

# ---------------------------------------------------------------------------
# Independent oracle: all canonical determinant-one matrices with bounded
# entries, enumerated directly; used to cross-check the edge-map solver.

_ORACLE_BOUND = 50


def _enumerate_psl2z(bound: int) -> np.ndarray:
    rng_vals = np.arange(-bound, bound + 1)
    cs, ds = np.meshgrid(rng_vals, rng_vals, indexing="ij")
    rows = []
    for a in rng_vals:
        for b in rng_vals:
            det = a * ds - b * cs
            mask = det == 1
            if mask.any():
                c_hit = cs[mask]
                d_hit = ds[mask]
                block = np.empty((c_hit.size, 4), dtype=np.int64)
                block[:, 0] = a
                block[:, 1] = b
                block[:, 2] = c_hit
                block[:, 3] = d_hit
                rows.append(block)
    mats = np.concatenate(rows)
    # canonical sign: first nonzero entry positive
    first = np.zeros(len(mats), dtype=np.int64)
    for col in range(4):
        undecided = first == 0
        first[undecided] = mats[undecided, col]
    mats[first < 0] *= -1
    return np.unique(mats, axis=0)


@pytest.fixture(scope="module")
def psl2z_matrices() -> np.ndarray:
    return _enumerate_psl2z(_ORACLE_BOUND)


def _oracle_edge_maps(mats: np.ndarray, f: Geodesic, e: Geodesic) -> set:
    """Brute force: bounded-entry maps with m({f}) = {e}."""
    a, b, c, d = mats[:, 0], mats[:, 1], mats[:, 2], mats[:, 3]

    def image(x: ExtendedRational):
        return a * x.p + b * x.q, c * x.p + d * x.q

    def same_point(num, den, y: ExtendedRational):
        return (num * y.q == den * y.p) & ((num != 0) | (den != 0))

    n1, d1 = image(f.x)
    n2, d2 = image(f.y)
    direct = same_point(n1, d1, e.x) & same_point(n2, d2, e.y)
    swapped = same_point(n1, d1, e.y) & same_point(n2, d2, e.x)
    hits = mats[direct | swapped]
    return {tuple(int(v) for v in row) for row in hits}


def test_solver_agrees_with_brute_force_on_grid(psl2z_matrices):
    pts = [
        ExtendedRational(p, q)
        for p in range(-3, 4)
        for q in range(0, 4)
        if (p, q) != (0, 0)
    ]
    pts = sorted(set(pts), key=lambda r: (r.q, r.p))
    geodesics = [Geodesic(x, y) for x, y in combinations(pts, 2)]
    rng = random.Random(424242)
    pairs = [(rng.choice(geodesics), rng.choice(geodesics)) for _ in range(200)]
    for f, e in pairs:
        got = {
            m.entries()
            for m in solve_edge_map(f, e)
            if all(abs(v) <= _ORACLE_BOUND for v in m.entries())
        }
        expected = _oracle_edge_maps(psl2z_matrices, f, e)
        assert got == expected, (str(f), str(e))


def test_solver_examples():
    assert set(solve_edge_map(E0_GEO, E0_GEO)) == {IDENTITY, SIGMA}
    assert solve_edge_map(E0_GEO, Geodesic(MINUS_ONE, ONE)) == ()
    sols = solve_edge_map(Geodesic(ZERO, ONE), Geodesic(ONE, INFINITY))
    assert 1 <= len(sols) <= 2
    for m in sols:
        assert {m(ZERO), m(ONE)} == {ONE, INFINITY}


def test_solver_outputs_always_carry_edge(rng):
    for _ in range(100):
        while True:
            x, y = random_rational(rng, 8), random_rational(rng, 8)
            if x != y:
                f = Geodesic(x, y)
                break
        while True:
            x, y = random_rational(rng, 8), random_rational(rng, 8)
            if x != y:
                e = Geodesic(x, y)
                break
        sols = solve_edge_map(f, e)
        assert len(sols) <= 2
        for m in sols:
            assert {m(f.x), m(f.y)} == {e.x, e.y}


# ---------------------------------------------------------------------------
# Group arithmetic.

def test_generator_relations():
    assert (SIGMA * SIGMA).is_identity
    assert (RHO * RHO * RHO).is_identity
    assert RHO * SIGMA == T_MAP
    assert T_MAP == MoebiusMap(1, 1, 0, 1)


def test_group_axioms_on_random_products(rng):
    for _ in range(1000):
        m = random_moebius(rng)
        assert (m * m.inverse()).is_identity
        assert (m.inverse() * m).is_identity


def test_apply_is_homomorphism(rng):
    for _ in range(300):
        m1 = random_moebius(rng)
        m2 = random_moebius(rng)
        x = random_rational(rng)
        assert (m1 * m2)(x) == m1(m2(x))


def test_projective_action_examples():
    assert SIGMA(ZERO) == INFINITY
    assert T_MAP(INFINITY) == INFINITY
    assert RHO(INFINITY) == ONE and RHO(ONE) == ZERO and RHO(ZERO) == INFINITY


def test_determinant_enforced():
    with pytest.raises(ValueError):
        MoebiusMap(1, 0, 0, 2)
    with pytest.raises(ValueError):
        MoebiusMap(0, 1, 1, 0)


# ---------------------------------------------------------------------------
# Words in the generators.

def test_word_examples():
    assert word_in_generators(IDENTITY) == ()
    assert word_in_generators(SIGMA) == ("s",)
    assert word_in_generators(T_MAP) == ("r", "s")


def test_word_round_trip_1000(rng):
    for _ in range(1000):
        m = IDENTITY
        for _ in range(rng.randint(0, 40)):
            m = m * rng.choice(GENS)
        assert evaluate_word(word_in_generators(m)) == m


def test_word_length_stays_moderate(rng):
    for _ in range(50):
        m = random_moebius(rng, 40)
        size = max(abs(v) for v in m.entries())
        word = word_in_generators(m)
        assert len(word) <= 8 * (size.bit_length() + 1) ** 2 + 8


# ---------------------------------------------------------------------------
# Circular order.

def test_circular_order_examples():
    assert circular_order(ZERO, ONE, INFINITY) == 1
    assert circular_order(ONE, ZERO, INFINITY) == -1
    assert circular_order(MINUS_ONE, ZERO, ONE) == 1


_POINT_POOL = sorted(
    {
        ExtendedRational(p, q)
        for p in range(-12, 13)
        for q in range(0, 13)
        if (p, q) != (0, 0)
    },
    key=lambda r: (r.q, r.p),
)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(_POINT_POOL), min_size=3, max_size=3, unique=True))
def test_circular_order_is_cyclic_and_antisymmetric(triple):
    x, y, z = triple
    assert circular_order(x, y, z) == circular_order(y, z, x) == circular_order(z, x, y)
    assert circular_order(x, y, z) == -circular_order(y, x, z)


def test_circular_order_rejects_duplicates():
    with pytest.raises(ValueError):
        circular_order(ZERO, ZERO, ONE)


def test_moebius_preserves_circular_order(rng):
    for _ in range(200):
        m = random_moebius(rng)
        pts = set()
        while len(pts) < 3:
            pts.add(random_rational(rng))
        x, y, z = sorted(pts, key=lambda r: (r.q, r.p))
        assert circular_order(x, y, z) == circular_order(m(x), m(y), m(z))


# ---------------------------------------------------------------------------
# Odds and ends used across the package.

def test_edge_involution():
    assert edge_involution(E0_GEO) == SIGMA
    e = Geodesic(ONE, INFINITY)
    inv = edge_involution(e)
    assert inv(ONE) == INFINITY and inv(INFINITY) == ONE
    assert inv == MoebiusMap(1, -2, 1, -1)


def test_interleave():
    assert interleave(E0_GEO, Geodesic(MINUS_ONE, ONE))
    assert not interleave(E0_GEO, Geodesic(ONE, ExtendedRational(2, 1)))
    assert not interleave(E0_GEO, Geodesic(ZERO, ONE))


def test_moebius_from_base_triple(rng):
    for _ in range(200):
        m = random_moebius(rng)
        assert moebius_from_base_triple(m(ZERO), m(ONE), m(INFINITY)) == m
    assert moebius_from_base_triple(ZERO, ONE, ExtendedRational(3, 1)) is None


def test_rational_normalisation_and_parsing():
    assert ExtendedRational(2, 4) == ExtendedRational(1, 2)
    assert ExtendedRational(-3, -6) == ExtendedRational(1, 2)
    assert ExtendedRational(5, 0) == INFINITY
    assert str(ExtendedRational.parse("-4/2")) == "-2/1"
    assert ExtendedRational.parse("1/0").is_infinity
    with pytest.raises(ValueError):
        ExtendedRational(0, 0)
    g = Geodesic.parse("0/1..1/0")
    assert g == E0_GEO
    og = OrientedGeodesic.parse("1/1->-1/1")
    assert og.start == ONE and og.end == MINUS_ONE
