import math
import re
import xml.etree.ElementTree as ET

from soltess.moebius import E0_GEO, ExtendedRational, INFINITY, ONE, ZERO
from soltess.render import disk_point, render_svg
from soltess.subgroup import congruence
from soltess.tessellation import edge_orbit_of, farey, flip


def test_disk_point_dictionary():
    # the fixed correspondence: 0, oo, -1, 1 come from disk -1, 1, i, -i
    assert disk_point(ZERO) == (-1.0, 0.0)
    assert disk_point(INFINITY) == (1.0, 0.0)
    x, y = disk_point(ExtendedRational(-1, 1))
    assert abs(x) < 1e-12 and abs(y - 1.0) < 1e-12
    x, y = disk_point(ONE)
    assert abs(x) < 1e-12 and abs(y + 1.0) < 1e-12


def test_svg_is_valid_xml_and_deterministic():
    t = farey(congruence(2))
    a = render_svg(t, 3)
    b = render_svg(t, 3)
    assert a == b
    root = ET.fromstring(a)
    assert root.tag.endswith("svg")


def test_depth_zero_contains_base_arcs():
    t = farey(congruence(2))
    svg = render_svg(t, 0)
    root = ET.fromstring(svg)
    paths = [el for el in root if el.tag.endswith("path")]
    assert len(paths) == 3
    edges = {el.get("data-edge") for el in paths}
    assert str(E0_GEO) in edges


def test_flip_changes_exactly_the_flipped_orbit_arcs():
    t = farey(congruence(2))
    lab = edge_orbit_of(t, E0_GEO)
    t2, corr = flip(t, lab)
    base = render_svg(t, 4)
    flipped = render_svg(t2, 4)
    assert base != flipped

    def arcs(svg):
        root = ET.fromstring(svg)
        return {
            el.get("data-edge"): el.get("data-orbit")
            for el in root
            if el.tag.endswith("path")
        }

    arcs_a, arcs_b = arcs(base), arcs(flipped)
    only_a = set(arcs_a) - set(arcs_b)
    only_b = set(arcs_b) - set(arcs_a)
    assert only_a and only_b
    assert {arcs_a[k] for k in only_a} == {lab}
    assert {arcs_b[k] for k in only_b} == {corr[lab]}


def test_arcs_stay_inside_disk():
    t = farey(congruence(3))
    svg = render_svg(t, 3)
    # every arc endpoint sits on the boundary circle
    for match in re.finditer(r'd="M ([\d.-]+) ([\d.-]+) [AL] [^"]*? ([\d.-]+) ([\d.-]+)"', svg):
        x1, y1, x2, y2 = (float(v) for v in match.groups())
        for x, y in ((x1, y1), (x2, y2)):
            r = math.hypot(x - 500.0, y - 500.0)
            assert abs(r - 470.0) < 0.5
