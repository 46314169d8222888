"""Exact arithmetic for the modular group acting on the rational boundary circle.

Boundary points live in upper-half-plane coordinates: the extended rationals
Q u {oo}, with oo stored as 1/0.  Under the fixed Cayley correspondence with
the disk model (disk point w maps to i(1+w)/(1-w)), counterclockwise on the
circle is increasing cyclic order on R u {oo}, the standard oriented base
edge becomes (0 -> oo), and its flipped image becomes (1 -> -1).

Everything here is immutable, hashable and pure; values can be shared across
threads without synchronisation.  No floating point is used anywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

__all__ = [
    "ExtendedRational",
    "MoebiusMap",
    "Geodesic",
    "OrientedGeodesic",
    "INFINITY",
    "ZERO",
    "ONE",
    "MINUS_ONE",
    "IDENTITY",
    "SIGMA",
    "RHO",
    "RHO_SQ",
    "T_MAP",
    "E0",
    "E0_GEO",
    "F0",
    "circular_order",
    "interleave",
    "word_in_generators",
    "evaluate_word",
    "solve_edge_map",
    "edge_involution",
    "moebius_from_base_triple",
    "psl2z_ball",
]


@dataclass(frozen=True)
class ExtendedRational:
    """A point of Q u {oo}: a primitive pair p/q with q > 0, or 1/0 for oo."""

    p: int
    q: int

    def __post_init__(self) -> None:
        p, q = self.p, self.q
        if p == 0 and q == 0:
            raise ValueError("0/0 is not a point of the boundary circle")
        g = gcd(abs(p), abs(q))
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def is_infinity(self) -> bool:
        return self.q == 0

    def __lt__(self, other: "ExtendedRational") -> bool:
        # Linear order on R with oo as the largest element.
        return self.p * other.q < other.p * self.q

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"

    @classmethod
    def parse(cls, text: str) -> "ExtendedRational":
        m = re.fullmatch(r"\s*(-?\d+)\s*/\s*(-?\d+)\s*", text)
        if m:
            return cls(int(m.group(1)), int(m.group(2)))
        m = re.fullmatch(r"\s*(-?\d+)\s*", text)
        if m:
            return cls(int(m.group(1)), 1)
        raise ValueError(f"not a rational boundary point: {text!r}")


INFINITY = ExtendedRational(1, 0)
ZERO = ExtendedRational(0, 1)
ONE = ExtendedRational(1, 1)
MINUS_ONE = ExtendedRational(-1, 1)


def circular_order(x: ExtendedRational, y: ExtendedRational, z: ExtendedRational) -> int:
    """+1 if (x, y, z) are in counterclockwise cyclic order on the circle, else -1.

    Counterclockwise means cyclically increasing in R u {oo}.
    """
    if x == y or y == z or x == z:
        raise ValueError("circular_order needs pairwise distinct points")
    if (x < y < z) or (y < z < x) or (z < x < y):
        return 1
    return -1


@dataclass(frozen=True)
class MoebiusMap:
    """An element of PSL(2,Z): integer matrix [[a,b],[c,d]], det 1, canonical sign.

    The canonical representative has its first nonzero entry (in row-major
    order) positive, so equality of maps is equality of fields.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("matrix must have determinant 1")
        for entry in (self.a, self.b, self.c, self.d):
            if entry != 0:
                if entry < 0:
                    object.__setattr__(self, "a", -self.a)
                    object.__setattr__(self, "b", -self.b)
                    object.__setattr__(self, "c", -self.c)
                    object.__setattr__(self, "d", -self.d)
                break

    def __call__(self, x: ExtendedRational) -> ExtendedRational:
        return ExtendedRational(self.a * x.p + self.b * x.q, self.c * x.p + self.d * x.q)

    def __mul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    @property
    def is_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __str__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"

    @classmethod
    def parse(cls, text: str) -> "MoebiusMap":
        m = re.fullmatch(
            r"\s*\[\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*,\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*\]\s*",
            text,
        )
        if not m:
            raise ValueError(f"not a matrix: {text!r}")
        return cls(*(int(g) for g in m.groups()))


IDENTITY = MoebiusMap(1, 0, 0, 1)
SIGMA = MoebiusMap(0, -1, 1, 0)      # order 2: x -> -1/x
RHO = MoebiusMap(1, -1, 1, 0)        # order 3: rotates the triangle (0, 1, oo)
RHO_SQ = RHO * RHO
T_MAP = RHO * SIGMA                  # x -> x + 1


@dataclass(frozen=True)
class Geodesic:
    """An unordered pair of distinct boundary points, stored sorted."""

    x: ExtendedRational
    y: ExtendedRational

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise ValueError("geodesic endpoints must be distinct")
        if self.y < self.x:
            lo, hi = self.y, self.x
            object.__setattr__(self, "x", lo)
            object.__setattr__(self, "y", hi)

    def endpoints(self) -> tuple[ExtendedRational, ExtendedRational]:
        return (self.x, self.y)

    def transform(self, m: MoebiusMap) -> "Geodesic":
        return Geodesic(m(self.x), m(self.y))

    def __str__(self) -> str:
        return f"{self.x}..{self.y}"

    @classmethod
    def parse(cls, text: str) -> "Geodesic":
        left, sep, right = text.partition("..")
        if not sep:
            raise ValueError(f"not a geodesic: {text!r}")
        return cls(ExtendedRational.parse(left), ExtendedRational.parse(right))


@dataclass(frozen=True)
class OrientedGeodesic:
    """An ordered pair of distinct boundary points."""

    start: ExtendedRational
    end: ExtendedRational

    def __post_init__(self) -> None:
        if self.start == self.end:
            raise ValueError("oriented geodesic endpoints must be distinct")

    def reversed(self) -> "OrientedGeodesic":
        return OrientedGeodesic(self.end, self.start)

    def geodesic(self) -> Geodesic:
        return Geodesic(self.start, self.end)

    def transform(self, m: MoebiusMap) -> "OrientedGeodesic":
        return OrientedGeodesic(m(self.start), m(self.end))

    def __str__(self) -> str:
        return f"{self.start}->{self.end}"

    @classmethod
    def parse(cls, text: str) -> "OrientedGeodesic":
        left, sep, right = text.partition("->")
        if not sep:
            raise ValueError(f"not an oriented geodesic: {text!r}")
        return cls(ExtendedRational.parse(left), ExtendedRational.parse(right))


E0 = OrientedGeodesic(ZERO, INFINITY)   # the standard distinguished oriented edge
E0_GEO = E0.geodesic()
F0 = OrientedGeodesic(ONE, MINUS_ONE)   # its image under the flip along its own orbit


def interleave(g1: Geodesic, g2: Geodesic) -> bool:
    """True iff the two geodesics cross (endpoints strictly interleaved)."""
    a, c = g1.endpoints()
    x, y = g2.endpoints()
    if len({a, c, x, y}) < 4:
        return False
    return circular_order(a, x, c) != circular_order(a, y, c)


# ---------------------------------------------------------------------------
# Words in the finite-order generators.
#
# Words are tuples over the atoms "s" (sigma), "r" (rho), "rr" (rho squared);
# evaluate_word multiplies the matrices in the given order, so the word reads
# left to right as a matrix product.

WordAtom = str
_ATOMS = {"s": SIGMA, "r": RHO, "rr": RHO_SQ}


def evaluate_word(word: tuple[WordAtom, ...]) -> MoebiusMap:
    m = IDENTITY
    for atom in word:
        m = m * _ATOMS[atom]
    return m


@lru_cache(maxsize=65536)
def word_in_generators(m: MoebiusMap) -> tuple[WordAtom, ...]:
    """A word over {sigma, rho, rho^2} evaluating to m.

    Peels powers of the unit translation via Euclidean reduction of the
    matrix, emitting sigma at each row swap; the word length is linear in the
    number of Euclidean steps.
    """
    steps: list[tuple[str, int]] = []  # reduction applied on the left, in order
    a, b, c, d = m.entries()
    while c != 0:
        q = a // c
        if q != 0:
            # left-multiply by T^-q
            a, b = a - q * c, b - q * d
            steps.append(("T", q))
        # left-multiply by sigma^-1: swaps rows up to sign
        a, b, c, d = c, d, -a, -b
        steps.append(("S", 1))
    # now the matrix is +-T^k
    if a == 1 and d == 1:
        k = b
    elif a == -1 and d == -1:
        k = -b
    else:  # pragma: no cover - determinant invariant makes this unreachable
        raise AssertionError("reduction failed")
    if k != 0:
        steps.append(("T", k))

    word: list[WordAtom] = []
    # m equals the product of the recorded steps in order.
    for kind, value in steps:
        if kind == "S":
            word.append("s")
        elif value > 0:
            word.extend(("r", "s") * value)     # T = rho sigma
        else:
            word.extend(("s", "rr") * (-value))  # T^-1 = sigma rho^2
    result = tuple(word)
    assert evaluate_word(result) == m
    return result


# ---------------------------------------------------------------------------
# Geodesic-to-geodesic Diophantine solver.

def _primitive_vector(x: ExtendedRational) -> tuple[int, int]:
    return (x.p, x.q)


def solve_edge_map(f: Geodesic, e: Geodesic) -> tuple[MoebiusMap, ...]:
    """All m in PSL(2,Z) with m({f}) = {e}, as canonical matrices.

    A determinant-one integer matrix sends a primitive vector to a primitive
    vector, so each endpoint assignment forces m(u) = +-w exactly; solving the
    four sign/assignment patterns linearly and keeping integral determinant-one
    solutions yields every solution (at most two).
    """
    u = _primitive_vector(f.x)
    v = _primitive_vector(f.y)
    det_uv = u[0] * v[1] - u[1] * v[0]
    found = set()
    for w, x in ((e.x, e.y), (e.y, e.x)):
        wv = _primitive_vector(w)
        xv = _primitive_vector(x)
        for eps in (1, -1):
            # M [u v] = [w eps*x], so M = [w eps*x] adj([u v]) / det
            ta, tb = wv[0], eps * xv[0]
            tc, td = wv[1], eps * xv[1]
            # adj([u v]) = [[v.q, -v.p], [-u.q, u.p]]
            na = ta * v[1] - tb * u[1]
            nb = -ta * v[0] + tb * u[0]
            nc = tc * v[1] - td * u[1]
            nd = -tc * v[0] + td * u[0]
            if any(val % det_uv for val in (na, nb, nc, nd)):
                continue
            na, nb, nc, nd = (val // det_uv for val in (na, nb, nc, nd))
            if na * nd - nb * nc != 1:
                continue
            found.add(MoebiusMap(na, nb, nc, nd))
    return tuple(sorted(found, key=MoebiusMap.entries))


def edge_involution(e: Geodesic) -> MoebiusMap:
    """The involution in PSL(2,Z) swapping the endpoints of e.

    Exists for every edge of the base tessellation; raises if there is none.
    """
    for m in solve_edge_map(e, e):
        if not m.is_identity:
            if m(e.x) != e.y:  # pragma: no cover - solver guarantees the swap
                raise AssertionError("non-identity stabiliser fixing endpoints")
            return m
    raise ValueError(f"no integral involution reverses {e}")


def moebius_from_base_triple(
    y0: ExtendedRational, y1: ExtendedRational, yinf: ExtendedRational
) -> MoebiusMap | None:
    """The element of PSL(2,Z) sending (0, 1, oo) to (y0, y1, yinf), or None.

    Returns None when the unique projective map through the three points is
    not integral of determinant one.
    """
    if y0 == y1 or y1 == yinf or y0 == yinf:
        return None
    w0 = _primitive_vector(y0)
    w1 = _primitive_vector(y1)
    winf = _primitive_vector(yinf)

    def cross(p: tuple[int, int], q: tuple[int, int]) -> int:
        return p[0] * q[1] - p[1] * q[0]

    alpha = cross(w1, w0)
    beta = cross(winf, w1)
    # columns: M(1,0) = alpha*winf, M(0,1) = beta*w0
    a, c = alpha * winf[0], alpha * winf[1]
    b, d = beta * w0[0], beta * w0[1]
    g = gcd(gcd(abs(a), abs(b)), gcd(abs(c), abs(d)))
    if g == 0:
        return None
    a, b, c, d = a // g, b // g, c // g, d // g
    if a * d - b * c != 1:
        return None
    return MoebiusMap(a, b, c, d)


@lru_cache(maxsize=None)
def psl2z_ball(radius: int) -> tuple[MoebiusMap, ...]:
    """All elements expressible as words of length <= radius over {s, r, rr}."""
    seen = {IDENTITY}
    frontier = [IDENTITY]
    for _ in range(radius):
        new = []
        for m in frontier:
            for gen in (SIGMA, RHO, RHO_SQ):
                cand = m * gen
                if cand not in seen:
                    seen.add(cand)
                    new.append(cand)
        frontier = new
    return tuple(sorted(seen, key=MoebiusMap.entries))
