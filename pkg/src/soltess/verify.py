"""Verification campaigns behind the command-line interface.

Each campaign returns a JSON-ready report with a boolean "passed"; the CLI
turns falsified predictions into a nonzero exit code.
"""

from __future__ import annotations

import random
import time

from .moebius import E0_GEO, ExtendedRational, Geodesic, MoebiusMap, SIGMA
from .charmap import conjugated_subgroup
from .complex import (
    coset_cell,
    inversion_witness,
    make_edge,
    pentagon_cell,
    pentagon_pairs,
    relation_element,
    square_cell,
    square_pairs,
)
from .presentation import scan_stabilizers
from .subgroup import Subgroup, catalog_group, coset_split
from .tessellation import (
    edge_orbit_of,
    equals,
    farey,
    flip,
    flippable_labels,
    stabilizer,
)

__all__ = [
    "verify_pentagon",
    "verify_square",
    "verify_coset",
    "verify_conjugation",
    "verify_stabilizers",
    "random_flip_sequence",
]


def _cell_entry(report, corrupt: bool = False) -> dict:
    expected = report.predicted
    if corrupt:
        expected = expected * SIGMA if not expected == SIGMA else MoebiusMap(1, 1, 0, 1)
    entry = report.to_json()
    entry["expected"] = str(expected)
    entry["passed"] = report.element == expected
    return entry


def verify_pentagon(K: Subgroup, corrupt: bool = False) -> dict:
    start = time.monotonic()
    cells = []
    for e1, e2 in pentagon_pairs(K):
        cells.append(_cell_entry(relation_element(pentagon_cell(K, e1, e2)), corrupt))
    return {
        "suite": "pentagon",
        "group_index": K.index,
        "cells": cells,
        "count": len(cells),
        "passed": all(c["passed"] for c in cells),
        "seconds": round(time.monotonic() - start, 3),
    }


def verify_square(K: Subgroup, corrupt: bool = False) -> dict:
    start = time.monotonic()
    cells = []
    pairs = square_pairs(K)
    for e1, e2 in pairs:
        cells.append(_cell_entry(relation_element(square_cell(K, e1, e2)), corrupt))
    report = {
        "suite": "square",
        "group_index": K.index,
        "cells": cells,
        "count": len(cells),
        "passed": all(c["passed"] for c in cells),
        "seconds": round(time.monotonic() - start, 3),
    }
    if not pairs:
        report["note"] = "no admissible pairs"
    return report


def verify_coset(
    K: Subgroup,
    K1: Subgroup,
    orderings: int = 10,
    seed: int = 20240901,
    corrupt: bool = False,
) -> dict:
    start = time.monotonic()
    rng = random.Random(seed)
    k, _ = coset_split(K, K1)
    t0 = farey(K)
    cells = []
    for label in t0.labels():
        e = t0.orbit(label).geodesic
        plans = [tuple(range(k))]
        for _ in range(orderings):
            perm = list(range(k))
            rng.shuffle(perm)
            plans.append(tuple(perm))
        for plan in plans:
            cell = coset_cell(K, K1, e, plan)
            entry = _cell_entry(relation_element(cell), corrupt)
            entry["ordering"] = list(plan)
            cells.append(entry)
    return {
        "suite": "coset",
        "group_index": K.index,
        "subgroup_index": K1.index,
        "suborbits": k,
        "cells": cells,
        "count": len(cells),
        "passed": all(c["passed"] for c in cells),
        "seconds": round(time.monotonic() - start, 3),
    }


def random_flip_sequence(K: Subgroup, depth: int, rng: random.Random):
    """A random sequence of Whitehead moves from the base tessellation."""
    t = farey(K)
    labels = []
    for _ in range(depth):
        options = flippable_labels(t)
        lab = rng.choice(options)
        labels.append(lab)
        t, _ = flip(t, lab)
    return t, labels


def verify_conjugation(
    group_names: tuple[str, ...] = ("gamma2", "gamma3"),
    count: int = 25,
    depth: int = 4,
    seed: int = 20240901,
) -> dict:
    """Random flip-sequence tessellations conjugate to groups of equal index."""
    start = time.monotonic()
    rng = random.Random(seed)
    entries = []
    for i in range(count):
        name = group_names[i % len(group_names)]
        K = catalog_group(name)
        t, labels = random_flip_sequence(K, rng.randint(1, depth), rng)
        H = conjugated_subgroup(t, t.distinguished)
        entries.append(
            {
                "group": name,
                "flips": labels,
                "expected_index": K.index,
                "conjugated_index": H.index,
                "torsion_free": H.is_torsion_free(),
                "passed": H.index == K.index,
            }
        )
    return {
        "suite": "conjugation",
        "count": count,
        "entries": entries,
        "passed": all(e["passed"] for e in entries),
        "seconds": round(time.monotonic() - start, 3),
    }


def verify_stabilizers(max_index: int = 6, radius: int = 2, groups=None) -> dict:
    start = time.monotonic()
    report = scan_stabilizers(max_index, radius, groups)
    report["suite"] = "stabilizers"
    report["passed"] = report["unique_full_stabilizer"]
    report["seconds"] = round(time.monotonic() - start, 3)
    return report
