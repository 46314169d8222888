"""Finite-index subgroups of PSL(2,Z) as pointed coset permutation tables.

A subgroup is the stabiliser of coset 0 in a transitive action of the two
finite-order generators on {0..n-1}; the action is by right multiplication on
right cosets, so a word applies left to right.  Tables are canonically
relabelled (breadth-first from the base point, generator order sigma then
rho) on construction, which makes dataclass equality and hashing agree with
equality of pointed subgroups.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .moebius import (
    IDENTITY,
    MoebiusMap,
    RHO,
    SIGMA,
    evaluate_word,
    psl2z_ball,
    word_in_generators,
)

__all__ = [
    "Subgroup",
    "full_group",
    "congruence",
    "commutator_torus",
    "intersect",
    "coset_split",
    "subgroup_via_membership",
    "low_index_subgroups",
    "CATALOG_NAMES",
    "catalog_group",
]


def _canonical_relabel(sigma: tuple[int, ...], rho: tuple[int, ...]):
    n = len(sigma)
    new = [-1] * n
    new[0] = 0
    order = [0]
    for i in order:
        for perm in (sigma, rho):
            j = perm[i]
            if new[j] < 0:
                new[j] = len(order)
                order.append(j)
    if len(order) != n:
        raise ValueError("permutation pair is not transitive")
    out_s = [0] * n
    out_r = [0] * n
    for old in range(n):
        out_s[new[old]] = new[sigma[old]]
        out_r[new[old]] = new[rho[old]]
    return tuple(out_s), tuple(out_r)


@dataclass(frozen=True)
class Subgroup:
    """Pointed transitive action of (sigma, rho) on cosets; base point 0."""

    sigma: tuple[int, ...]
    rho: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.sigma)
        if n == 0 or len(self.rho) != n:
            raise ValueError("permutations must be nonempty and equal length")
        if sorted(self.sigma) != list(range(n)) or sorted(self.rho) != list(range(n)):
            raise ValueError("tables must be permutations of 0..n-1")
        if any(self.sigma[self.sigma[i]] != i for i in range(n)):
            raise ValueError("sigma permutation must be an involution")
        if any(self.rho[self.rho[self.rho[i]]] != i for i in range(n)):
            raise ValueError("rho permutation must have order dividing 3")
        s, r = _canonical_relabel(tuple(self.sigma), tuple(self.rho))
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "rho", r)

    @property
    def index(self) -> int:
        return len(self.sigma)

    # -- action ------------------------------------------------------------

    def apply_atom(self, i: int, atom: str) -> int:
        if atom == "s":
            return self.sigma[i]
        if atom == "r":
            return self.rho[i]
        if atom == "rr":
            return self.rho[self.rho[i]]
        raise ValueError(f"unknown atom {atom!r}")

    def coset_of_word(self, word: tuple[str, ...], start: int = 0) -> int:
        i = start
        for atom in word:
            i = self.apply_atom(i, atom)
        return i

    def coset_of(self, m: MoebiusMap) -> int:
        return self.coset_of_word(word_in_generators(m))

    def contains(self, m: MoebiusMap) -> bool:
        return self.coset_of(m) == 0

    # -- structure ---------------------------------------------------------

    def is_torsion_free(self) -> bool:
        n = self.index
        return all(self.sigma[i] != i for i in range(n)) and all(
            self.rho[i] != i for i in range(n)
        )

    def rep_matrices(self) -> tuple[MoebiusMap, ...]:
        """Coset representatives from the breadth-first spanning tree."""
        return _rep_matrices(self)

    def tree_edges(self) -> frozenset[tuple[int, str, int]]:
        return _tree_edges(self)

    def conjugated_by(self, g: MoebiusMap) -> "Subgroup":
        """The table of g K g^-1 (same action, repointed at the coset of g^-1)."""
        base = self.coset_of(g.inverse())
        n = self.index
        shift = list(range(n))
        shift[0], shift[base] = base, 0
        # swap relabel, then the constructor re-canonicalises
        sigma = tuple(shift.index(self.sigma[shift[i]]) for i in range(n))
        rho = tuple(shift.index(self.rho[shift[i]]) for i in range(n))
        return Subgroup(sigma, rho)

    def is_normal(self) -> bool:
        return _is_normal(self)

    def cusp_count(self) -> int:
        """Number of vertex classes: orbits of the translation x -> x + 1."""
        seen = [False] * self.index
        count = 0
        for i in range(self.index):
            if seen[i]:
                continue
            count += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = self.sigma[self.rho[j]]  # right multiplication by rho*sigma
        return count

    def schreier_generators(self) -> tuple[MoebiusMap, ...]:
        return _schreier_generators(self)

    def rewrite_in_raw_schreier(self, m: MoebiusMap) -> tuple[MoebiusMap, ...]:
        """Express a member as a product of raw Schreier generators.

        Traces the generator word through the coset graph; the returned
        factors multiply to m in order.  Raises if m is not in the subgroup.
        """
        if not self.contains(m):
            raise ValueError("element is not in the subgroup")
        reps = self.rep_matrices()
        factors = []
        i = 0
        for atom in word_in_generators(m):
            letters = ("s",) if atom == "s" else ("r",) if atom == "r" else ("r", "r")
            for letter in letters:
                gen = SIGMA if letter == "s" else RHO
                j = self.apply_atom(i, letter)
                factors.append(reps[i] * gen * reps[j].inverse())
                i = j
        assert i == 0
        return tuple(f for f in factors if not f.is_identity)

    def to_json(self) -> dict:
        return {"index": self.index, "sigma": list(self.sigma), "rho": list(self.rho)}

    @classmethod
    def from_json(cls, data: dict) -> "Subgroup":
        try:
            sigma = tuple(int(v) for v in data["sigma"])
            rho = tuple(int(v) for v in data["rho"])
            index = int(data["index"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed subgroup record: {exc}") from exc
        if len(sigma) != index or len(rho) != index:
            raise ValueError("subgroup record index does not match table length")
        return cls(sigma, rho)


@lru_cache(maxsize=None)
def _bfs_tree(K: Subgroup):
    reps: list[MoebiusMap | None] = [None] * K.index
    reps[0] = IDENTITY
    tree: set[tuple[int, str, int]] = set()
    order = [0]
    for i in order:
        for letter, gen in (("s", SIGMA), ("r", RHO)):
            j = K.apply_atom(i, letter)
            if reps[j] is None:
                reps[j] = reps[i] * gen
                tree.add((i, letter, j))
                order.append(j)
    return tuple(reps), frozenset(tree)


def _rep_matrices(K: Subgroup) -> tuple[MoebiusMap, ...]:
    return _bfs_tree(K)[0]


def _tree_edges(K: Subgroup) -> frozenset[tuple[int, str, int]]:
    return _bfs_tree(K)[1]


@lru_cache(maxsize=None)
def _is_normal(K: Subgroup) -> bool:
    return all(K.conjugated_by(r) == K for r in K.rep_matrices())


@lru_cache(maxsize=None)
def _schreier_generators(K: Subgroup) -> tuple[MoebiusMap, ...]:
    """Generators of K from the spanning tree, pruned to an independent set.

    From each sigma pair one generator survives; from each rho cycle the last
    nontrivial generator is the inverse of the product of the earlier ones and
    is dropped.  The dropped elements are verified to be products of the kept
    ones, so the kept set still generates.
    """
    reps, tree = _bfs_tree(K)
    gens: list[MoebiusMap] = []

    for i in range(K.index):
        j = K.sigma[i]
        if j < i:
            continue
        if (i, "s", j) in tree or (j, "s", i) in tree:
            continue
        g = reps[i] * SIGMA * reps[j].inverse()
        if not g.is_identity:
            gens.append(g)

    seen = [False] * K.index
    for i in range(K.index):
        if seen[i]:
            continue
        cycle = [i]
        j = K.rho[i]
        while j != i:
            cycle.append(j)
            j = K.rho[j]
        for c in cycle:
            seen[c] = True
        if len(cycle) == 1:
            gens.append(reps[i] * RHO * reps[i].inverse())
            continue
        cycle_gens = []
        for k, c in enumerate(cycle):
            nxt = cycle[(k + 1) % len(cycle)]
            g = reps[c] * RHO * reps[nxt].inverse()
            if not g.is_identity:
                cycle_gens.append(g)
        if cycle_gens:
            # relation: the ordered product of all cycle generators is trivial
            dropped = cycle_gens[-1]
            prod = IDENTITY
            for g in cycle_gens[:-1]:
                prod = prod * g
            assert (prod * dropped).is_identity
            gens.extend(cycle_gens[:-1])
    return tuple(gens)


# ---------------------------------------------------------------------------
# Constructors.

def full_group() -> Subgroup:
    return Subgroup((0,), (0,))


@lru_cache(maxsize=None)
def congruence(level: int) -> Subgroup:
    """The principal congruence subgroup of the given level, as a coset table.

    The action is right multiplication on PSL(2, Z/level), pointed at the
    identity class.
    """
    if level < 2:
        raise ValueError("level must be at least 2; use full_group() for level 1")

    def canon(m: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
        neg = tuple((-v) % level for v in m)
        return min(m, neg)

    def mul(m1, m2) -> tuple[int, int, int, int]:
        a1, b1, c1, d1 = m1
        a2, b2, c2, d2 = m2
        return canon(
            (
                (a1 * a2 + b1 * c2) % level,
                (a1 * b2 + b1 * d2) % level,
                (c1 * a2 + d1 * c2) % level,
                (c1 * b2 + d1 * d2) % level,
            )
        )

    s_mod = canon(tuple(v % level for v in SIGMA.entries()))
    r_mod = canon(tuple(v % level for v in RHO.entries()))
    ident = canon((1, 0, 0, 1))
    index_of = {ident: 0}
    elems = [ident]
    for g in elems:
        for gen in (s_mod, r_mod):
            h = mul(g, gen)
            if h not in index_of:
                index_of[h] = len(elems)
                elems.append(h)
    sigma = tuple(index_of[mul(g, s_mod)] for g in elems)
    rho = tuple(index_of[mul(g, r_mod)] for g in elems)
    return Subgroup(sigma, rho)


@lru_cache(maxsize=None)
def commutator_torus() -> Subgroup:
    """The commutator subgroup: index six, torsion free, once-punctured torus."""
    # cosets = the abelianisation Z/2 x Z/3; sigma and rho translate the factors
    pairs = [(a, b) for a in range(2) for b in range(3)]
    idx = {p: i for i, p in enumerate(pairs)}
    sigma = tuple(idx[((a + 1) % 2, b)] for a, b in pairs)
    rho = tuple(idx[(a, (b + 1) % 3)] for a, b in pairs)
    return Subgroup(sigma, rho)


def intersect(K1: Subgroup, K2: Subgroup) -> Subgroup:
    """The intersection: orbit of the pair of base points in the product action."""
    if K1 == K2:
        return K1
    start = (0, 0)
    index_of = {start: 0}
    states = [start]
    for st in states:
        for atom in ("s", "r"):
            nxt = (K1.apply_atom(st[0], atom), K2.apply_atom(st[1], atom))
            if nxt not in index_of:
                index_of[nxt] = len(states)
                states.append(nxt)
    sigma = tuple(index_of[(K1.sigma[a], K2.sigma[b])] for a, b in states)
    rho = tuple(index_of[(K1.rho[a], K2.rho[b])] for a, b in states)
    return Subgroup(sigma, rho)


def coset_split(K: Subgroup, H: Subgroup) -> tuple[int, tuple[MoebiusMap, ...]]:
    """Representatives of the cosets of H inside K.

    Requires H to be contained in K (checked on the Schreier generators of H,
    which generate it).  Returns k = index(H)/index(K) and k coset
    representatives of H in K, the identity first.
    """
    for g in H.schreier_generators():
        if not K.contains(g):
            raise ValueError("H is not contained in K")
    if H.index % K.index:
        raise ValueError("index of H is not a multiple of the index of K")
    reps = [r for r in H.rep_matrices() if K.contains(r)]
    k = H.index // K.index
    if len(reps) != k:  # pragma: no cover - containment guarantees the count
        raise AssertionError("coset representative count mismatch")
    return k, tuple(reps)


def subgroup_via_membership(member, expected_index: int | None = None, cap: int = 4096) -> Subgroup:
    """Build a coset table from a membership oracle by breadth-first closure.

    The oracle decides membership in the target subgroup for arbitrary
    elements of PSL(2,Z); cosets are discovered by right multiplication with
    the generators and identified through the oracle.
    """
    reps: list[MoebiusMap] = [IDENTITY]
    sigma: list[int | None] = [None]
    rho: list[int | None] = [None]
    tables = {"s": sigma, "r": rho}
    i = 0
    while i < len(reps):
        for atom, gen in (("s", SIGMA), ("r", RHO)):
            if tables[atom][i] is not None:
                continue
            img = reps[i] * gen
            target = None
            for j, r in enumerate(reps):
                if member(img * r.inverse()):
                    target = j
                    break
            if target is None:
                reps.append(img)
                sigma.append(None)
                rho.append(None)
                target = len(reps) - 1
            tables[atom][i] = target
            if atom == "s":
                if sigma[target] is not None and sigma[target] != i:
                    raise ValueError("membership oracle is inconsistent")
                sigma[target] = i
            limit = cap if expected_index is None else 2 * expected_index
            if len(reps) > limit:
                raise ValueError("membership closure exceeded the coset cap")
        i += 1
    n = len(reps)
    if expected_index is not None and n != expected_index:
        raise ValueError(f"expected index {expected_index}, closure found {n}")
    rho_t = tuple(int(v) for v in rho)
    sigma_t = tuple(int(v) for v in sigma)
    return Subgroup(sigma_t, rho_t)


# ---------------------------------------------------------------------------
# Exhaustive low-index enumeration (index <= 12).

def _order3_perms(n: int):
    """All permutations of 0..n-1 with cube the identity, as tuples."""
    perm = [-1] * n

    def rec(avail: list[int]):
        if not avail:
            yield tuple(perm)
            return
        i = avail[0]
        rest = avail[1:]
        perm[i] = i
        yield from rec(rest)
        for a, b in combinations(rest, 2):
            remaining = [x for x in rest if x not in (a, b)]
            for x, y in ((a, b), (b, a)):
                perm[i], perm[x], perm[y] = x, y, i
                yield from rec(remaining)
                perm[x] = perm[y] = -1
        perm[i] = -1

    yield from rec(list(range(n)))


def _involution_shapes(n: int):
    """Involutions up to relabelling fixing the base point 0."""
    for fixed in range(n % 2, n + 1, 2):
        # base point fixed
        perm = list(range(n))
        for k in range(fixed, n, 2):
            perm[k], perm[k + 1] = perm[k + 1], perm[k]
        yield tuple(perm)
        # base point paired with 1 (needs at least one transposition)
        if n >= 2 and fixed <= n - 2:
            perm = list(range(n))
            perm[0], perm[1] = 1, 0
            start = 2 + fixed
            for k in range(start, n, 2):
                perm[k], perm[k + 1] = perm[k + 1], perm[k]
            yield tuple(perm)


def _is_transitive(sigma, rho) -> bool:
    n = len(sigma)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        i = stack.pop()
        for j in (sigma[i], rho[i]):
            if not seen[j]:
                seen[j] = True
                count += 1
                stack.append(j)
    return count == n


def low_index_subgroups(max_index: int) -> tuple[Subgroup, ...]:
    """All subgroups of index at most max_index, as pointed tables.

    Exhaustive permutation search; supported up to index 12 (larger indexes
    get slow).
    """
    if max_index > 12:
        raise ValueError("low-index enumeration is capped at index 12")
    out: list[Subgroup] = []
    seen: set[tuple] = set()
    for n in range(1, max_index + 1):
        for sigma in _involution_shapes(n):
            for rho in _order3_perms(n):
                if not _is_transitive(sigma, rho):
                    continue
                K = Subgroup(sigma, rho)
                key = (K.sigma, K.rho)
                if key not in seen:
                    seen.add(key)
                    out.append(K)
    return tuple(out)


# ---------------------------------------------------------------------------
# Named catalogue used by the verification campaigns and the CLI.

CATALOG_NAMES = ("gamma2", "torus", "gamma3", "gamma4", "gamma6")


def catalog_group(name: str) -> Subgroup:
    if name == "gamma2":
        return congruence(2)
    if name == "gamma3":
        return congruence(3)
    if name == "gamma4":
        return congruence(4)
    if name == "gamma6":
        return congruence(6)
    if name == "torus":
        return commutator_torus()
    raise ValueError(f"unknown catalogue group {name!r}")


def coset_graph_diameter(K: Subgroup) -> int:
    """Eccentricity of the base point in the coset graph over {s, r, rr}."""
    dist = [-1] * K.index
    dist[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for atom in ("s", "r", "rr"):
                j = K.apply_atom(i, atom)
                if dist[j] < 0:
                    dist[j] = dist[i] + 1
                    nxt.append(j)
        frontier = nxt
    return max(dist)


def psl2z_ball_in(K: Subgroup, radius: int) -> tuple[MoebiusMap, ...]:
    """Members of K among words of length <= radius over the generators."""
    return tuple(m for m in psl2z_ball(radius) if K.contains(m))
