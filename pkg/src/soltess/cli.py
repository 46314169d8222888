"""Command-line interface: verification campaigns, presentations, paths, SVG."""

from __future__ import annotations

import json
import random
import sys

import click

from .moebius import Geodesic
from .complex import bfs_budget, flip_path
from .presentation import emit_presentation
from .render import render_svg
from .subgroup import CATALOG_NAMES, Subgroup, catalog_group
from .tessellation import (
    Tessellation,
    edge_orbit_of,
    equals,
    farey,
    flip,
    triangle_classes,
)
from .verify import (
    random_flip_sequence,
    verify_conjugation,
    verify_coset,
    verify_pentagon,
    verify_square,
    verify_stabilizers,
)


def _load_group(name: str) -> Subgroup:
    if name.startswith("file:"):
        path = name[5:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return Subgroup.from_json(json.load(fh))
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise click.UsageError(f"cannot load subgroup from {path}: {exc}")
    try:
        return catalog_group(name)
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _emit(data, out: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


@click.group()
def main() -> None:
    """Exact tessellation machinery over the modular group."""


@main.command()
@click.argument(
    "suite",
    type=click.Choice(["pentagon", "square", "coset", "conjugation", "stabilizers", "all"]),
)
@click.option("--group", "group_name", default="gamma3", help="catalogue name or file:<path>")
@click.option("--subgroup", "subgroup_name", default="gamma4", help="subgroup for coset cells")
@click.option("--max-index", default=6, show_default=True)
@click.option("--radius", default=2, show_default=True)
@click.option("--orderings", default=10, show_default=True)
@click.option("--count", default=25, show_default=True)
@click.option("--depth", default=4, show_default=True)
@click.option("--seed", default=20240901, show_default=True)
@click.option("--out", default=None, help="write the JSON report to a file")
@click.option("--inject-corruption", is_flag=True, hidden=True)
def verify(
    suite,
    group_name,
    subgroup_name,
    max_index,
    radius,
    orderings,
    count,
    depth,
    seed,
    out,
    inject_corruption,
) -> None:
    """Run a verification campaign and exit 0 only if every prediction holds."""
    reports = []
    corrupt = inject_corruption
    if suite in ("pentagon", "all"):
        K = _load_group(group_name if suite == "pentagon" else "gamma3")
        reports.append(verify_pentagon(K, corrupt))
    if suite in ("square", "all"):
        K = _load_group(group_name if suite == "square" else "gamma3")
        reports.append(verify_square(K, corrupt))
        if suite == "all":
            reports.append(verify_square(_load_group("gamma2"), corrupt))
    if suite in ("coset", "all"):
        K = _load_group(group_name if suite == "coset" else "gamma2")
        K1 = _load_group(subgroup_name)
        reports.append(verify_coset(K, K1, orderings=orderings, seed=seed, corrupt=corrupt))
    if suite in ("conjugation", "all"):
        reports.append(verify_conjugation(count=count, depth=depth, seed=seed))
    if suite in ("stabilizers", "all"):
        reports.append(verify_stabilizers(max_index=max_index, radius=radius))
    passed = all(r["passed"] for r in reports)
    _emit({"reports": reports, "passed": passed}, out)
    sys.exit(0 if passed else 1)


@main.command()
@click.option("--max-index", default=12, show_default=True)
@click.option("--coset-cap", default=24, show_default=True)
@click.option("--redundancy-ball", default=3, show_default=True)
@click.option("--out", default=None)
def present(max_index, coset_cap, redundancy_ball, out) -> None:
    """Emit the truncated presentation document as JSON."""
    doc = emit_presentation(
        max_index, coset_subgroup_cap=coset_cap, redundancy_ball=redundancy_ball
    )
    _emit(doc, out)


@main.command()
@click.option("--group", "group_name", default="gamma2")
@click.option("--scramble", default=None, type=int, help="random scramble length")
@click.option("--seed", default=20240901, show_default=True)
@click.option("--from", "from_file", default=None, help="JSON tessellation file")
@click.option("--to", "to_file", default=None, help="JSON tessellation file")
@click.option("--out", default=None)
def path(group_name, scramble, seed, from_file, to_file, out) -> None:
    """Search for a flip path between two tessellations."""
    if scramble is not None:
        K = _load_group(group_name)
        rng = random.Random(seed)
        t_to, labels = random_flip_sequence(K, scramble, rng)
        t_from = farey(K)
        scramble_info = labels
    elif from_file and to_file:
        with open(from_file, "r", encoding="utf-8") as fh:
            t_from = Tessellation.from_json(json.load(fh))
        with open(to_file, "r", encoding="utf-8") as fh:
            t_to = Tessellation.from_json(json.load(fh))
        scramble_info = None
    else:
        raise click.UsageError("need either --scramble or both --from and --to")
    result = flip_path(t_from, t_to)
    if result is None:
        _emit({"status": "unknown within budget", "budget": bfs_budget()}, out)
        sys.exit(1)
    _emit(
        {
            "status": "found",
            "length": len(result),
            "scramble": scramble_info,
            "edges": result.to_json(),
        },
        out,
    )


@main.command()
@click.option("--group", "group_name", default="gamma2")
@click.option("--flips", default="", help="comma-separated orbit labels or p/q..r/s edges")
@click.option("--depth", default=4, show_default=True)
@click.option("--out", required=True)
def render(group_name, flips, depth, out) -> None:
    """Render a tessellation (after optional flips) to an SVG file."""
    K = _load_group(group_name)
    t = farey(K)
    for token in (tok.strip() for tok in flips.split(",") if tok.strip()):
        if ".." in token:
            label = edge_orbit_of(t, Geodesic.parse(token))
            if label is None:
                raise click.UsageError(f"{token} is not an edge of the current tessellation")
        else:
            if token not in t.labels():
                raise click.UsageError(
                    f"unknown orbit label {token}; current labels: {', '.join(t.labels())}"
                )
            label = token
        t, _ = flip(t, label)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(render_svg(t, depth))
    click.echo(json.dumps({"written": out, "orbits": list(t.labels())}))


@main.group()
def subgroup() -> None:
    """Subgroup utilities."""


@subgroup.command("info")
@click.argument("name")
@click.option("--out", default=None)
def subgroup_info(name, out) -> None:
    """Index, torsion and tessellation statistics of a catalogue subgroup."""
    K = _load_group(name)
    t = farey(K)
    _emit(
        {
            "name": name,
            "index": K.index,
            "torsion_free": K.is_torsion_free(),
            "normal": K.is_normal(),
            "cusps": K.cusp_count(),
            "edge_orbits": len(t.orbits),
            "triangle_classes": len(triangle_classes(t)),
            "generators": [str(g) for g in K.schreier_generators()],
            "table": K.to_json(),
            "catalog": list(CATALOG_NAMES),
        },
        out,
    )


if __name__ == "__main__":
    main()
