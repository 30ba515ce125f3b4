"""Command-line front end: ``fgdom {monodromy,dominate,network,verify}``.

Every shared flag can also be set through an environment variable with the
prefix ``FGDOM_`` (for example ``FGDOM_SEED=7`` or ``FGDOM_WORD_LEN=2,8``).
Exit status is 0 on success, 1 on a hard failure and 2 on unusable input or
configuration.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, NoReturn

import click
import numpy as np

from . import factory, harness, network, spectral, surface
from .coords import (
    EDGE_REVERSAL_MODES,
    CoordinateError,
    FGCoordinates,
    MonodromyWord,
    validate,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

MONODROMY_SCHEMA = "fgdom.monodromy/1"
VERIFY_SCHEMA = "fgdom.verify/1"


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def _read_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _word_length(value: str | None) -> tuple[int, int] | None:
    if value is None:
        return None
    try:
        parts = [int(p) for p in value.replace(":", ",").split(",")]
    except ValueError:
        raise click.BadParameter(f"expected L or LO,HI, got {value!r}") from None
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) == 2:
        return parts[0], parts[1]
    raise click.BadParameter(f"expected L or LO,HI, got {value!r}")


def _complex_pairs(m: np.ndarray) -> list[list[list[float]]]:
    c = factory.to_complex(m)
    return [[[float(v.real), float(v.imag)] for v in row] for row in c]


def _format_complex(v: complex) -> str:
    return f"{v.real:.12g}{v.imag:+.12g}j"


def _emit(doc: dict[str, Any]) -> None:
    click.echo(json.dumps(doc, indent=1, sort_keys=True))


def shared_options(f: Callable[..., Any]) -> Callable[..., Any]:
    """Flags accepted by every subcommand, each mirrored by an FGDOM_* variable."""
    options = [
        click.option("--seed", type=int, default=None, envvar="FGDOM_SEED",
                     help="RNG seed (overrides the config)."),
        click.option("--n", "n", type=int, default=None, envvar="FGDOM_N", help="Rank n."),
        click.option("--tol", type=float, default=None, envvar="FGDOM_TOL",
                     help="Absolute tolerance on lengths."),
        click.option("--samples", type=int, default=None, envvar="FGDOM_SAMPLES",
                     help="Samples per rank."),
        click.option("--word-len", type=str, default=None, envvar="FGDOM_WORD_LEN",
                     help="Word length L or range LO,HI."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                     envvar="FGDOM_FORMAT", help="Output format."),
        click.option("--edge-reversal", type=click.Choice(EDGE_REVERSAL_MODES), default=None,
                     envvar="FGDOM_EDGE_REVERSAL",
                     help="Rule relating the two orientations of an edge."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _settings(seed: int | None, n: int | None, tol: float | None, samples: int | None,
              word_len: str | None, fmt: str, edge_reversal: str | None) -> dict[str, Any]:
    if n is not None and n < 2:
        raise InputError(f"--n must be >= 2, got {n}")
    if samples is not None and samples < 0:
        raise InputError(f"--samples must be >= 0, got {samples}")
    return {"seed": seed, "n": n, "tol": tol, "samples": samples,
            "word_length": _word_length(word_len), "format": fmt,
            "edge_reversal": edge_reversal}


@click.group(context_settings={"show_default": True})
@click.option("-v", "--verbose", count=True, help="Log skipped samples and failures.")
@click.version_option(package_name="artifact")
def main(verbose: int) -> None:
    """Monodromy, planar networks and length domination for Fock-Goncharov coordinates."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _triangulation(ref: str | None, coords: FGCoordinates) -> surface.IdealTriangulation:
    name = ref or coords.triangulation_ref
    if not name:
        raise InputError("no triangulation given (use --triangulation NAME|FILE)")
    if name in surface.BUILTIN_NAMES:
        return surface.builtin_triangulation(name)
    try:
        return surface.IdealTriangulation.from_json(_read_json(name))
    except surface.TriangulationError as exc:
        raise InputError(str(exc)) from exc


@main.command("monodromy")
@click.argument("coords_file", type=click.Path(dir_okay=False))
@click.argument("walk_file", type=click.Path(dir_okay=False))
@click.option("--triangulation", "tri_ref", default=None,
              help="Builtin triangulation name or triangulation JSON file.")
@shared_options
def cmd_monodromy(coords_file: str, walk_file: str, tri_ref: str | None, **flags: Any) -> None:
    """Print the monodromy matrix of a closed walk and its lengths."""
    obj = _settings(**flags)
    try:
        doc = _read_json(coords_file)
        if obj["edge_reversal"] is not None and isinstance(doc, dict):
            doc = {**doc, "edge_reversal": obj["edge_reversal"]}
        coords = FGCoordinates.from_json(doc)
        walk = surface.CurveWalk.from_json(_read_json(walk_file))
        tri = _triangulation(tri_ref, coords)
        if obj["n"] is not None and obj["n"] != coords.n:
            raise InputError(f"--n {obj['n']} does not match coordinate rank {coords.n}")
        report = validate(coords, tri)
        if not report.ok:
            raise InputError("invalid coordinates: " + "; ".join(
                f"{k} at {w}: {m}" for k, w, m in report))
        word = surface.compile(walk, coords, tri)
    except (CoordinateError, surface.WalkError, surface.TriangulationError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from exc
    scaled = factory.monodromy_with_scale(word)
    lengths = spectral.length_report(harness.factored(word))
    if obj["format"] == "json":
        _emit({"schema_version": MONODROMY_SCHEMA, "n": word.n, "word_length": len(word),
               "deltas": list(word.deltas), "matrix": _complex_pairs(scaled.matrix),
               "log_scale": scaled.log_scale, "lengths": lengths.to_json()})
    else:
        for row in factory.to_complex(scaled.matrix):
            click.echo(",".join(_format_complex(v) for v in row))


@main.command("dominate")
@click.argument("config_file", required=False, type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="fgdom-report",
              help="Directory for report.json, report.csv and report.timing.json.")
@click.option("--threads", type=int, default=1, envvar="FGDOM_THREADS", help="Worker threads.")
@click.option("--mutate", type=click.Choice(sorted(harness.MUTATIONS)), default=None,
              hidden=True, help="Test hook: corrupt the factory on purpose.")
@shared_options
def cmd_dominate(config_file: str | None, out_dir: str, threads: int, mutate: str | None,
                 **flags: Any) -> None:
    """Run the invariant suites and the domination experiments."""
    obj = _settings(**flags)
    try:
        cfg = harness.load_config(
            config_file, seed=obj["seed"], n=obj["n"], tol=obj["tol"], samples=obj["samples"],
            word_length=list(obj["word_length"]) if obj["word_length"] else None,
            edge_reversal=obj["edge_reversal"], mutation=mutate)
    except harness.ConfigError as exc:
        raise InputError(str(exc)) from exc
    if threads < 1:
        raise InputError("--threads must be >= 1")
    report = harness.run_suite(cfg, threads)
    paths = report.write(out_dir)
    summary = {"schema_version": harness.SCHEMA_VERSION, "passed": report.passed,
               "experiments": [e.to_json() for e in report.experiments],
               "suite_failures": [f for s in report.suites for f in s.failures],
               "reports": {k: str(v) for k, v in paths.items()}}
    if obj["format"] == "json":
        _emit(summary)
    else:
        click.echo("n,samples,ok,failed,skipped,equal")
        for e in report.experiments:
            click.echo(f"{e.n},{e.samples},{e.ok},{e.failed},{e.skipped},{e.equal}")
    if not report.passed:
        _fail("domination run failed")


@main.command("network")
@click.argument("word_file", type=click.Path(dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="Output stem: writes STEM.json and STEM.dot.")
@shared_options
def cmd_network(word_file: str, out_path: str, **flags: Any) -> None:
    """Build the planar network of a word and compare it with the factory."""
    obj = _settings(**flags)
    try:
        word = MonodromyWord.from_json(_read_json(word_file))
    except (CoordinateError, ValueError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from exc
    if obj["n"] is not None and obj["n"] != word.n:
        raise InputError(f"--n {obj['n']} does not match word rank {word.n}")
    net = network.net_word(word)
    stem = Path(out_path)
    if stem.suffix == ".json":
        stem = stem.with_suffix("")
    stem.parent.mkdir(parents=True, exist_ok=True)
    stem.with_suffix(".json").write_text(json.dumps(net.to_json(), indent=1, sort_keys=True) + "\n")
    stem.with_suffix(".dot").write_text(net.to_dot())
    w = network.weight_matrix(net)
    match = factory.projective_equal(w, factory.monodromy(word))
    verdict = "projective-equal" if match else "mismatch"
    if obj["format"] == "json":
        _emit({"schema_version": network.SCHEMA_VERSION, "n": word.n,
               "layers": net.layers, "edges": len(net.edges),
               "slanted_runs": net.slanted_runs(),
               "weight_matrix": _complex_pairs(w), "verdict": verdict,
               "files": [str(stem.with_suffix(".json")), str(stem.with_suffix(".dot"))]})
    else:
        for row in factory.to_complex(w):
            click.echo(",".join(_format_complex(v) for v in row))
        click.echo(verdict)
    if not match:
        _fail("network weight matrix does not match the factory")


@main.command("verify")
@click.option("--filter", "filters", multiple=True, type=click.Choice(harness.SUITE_NAMES),
              help="Run only the named suite (repeatable).")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable summary.")
def cmd_verify(filters: tuple[str, ...], as_json: bool) -> None:
    """Run the module invariant suites with fixed internal seeds."""
    results = harness.run_invariant_suites(filters or harness.SUITE_NAMES)
    passed = all(r.passed for r in results)
    if as_json:
        _emit({"schema_version": VERIFY_SCHEMA, "passed": passed,
               "suites": [r.to_json() for r in results]})
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            click.echo(f"{status} {r.name}: {r.checks} checks, {len(r.failures)} failures")
            for f in r.failures:
                click.echo(f"  {f}")
    if not passed:
        _fail("invariant suite failed")


def _fail(message: str) -> NoReturn:
    click.echo(f"Error: {message}", err=True)
    sys.exit(EXIT_FAIL)


if __name__ == "__main__":  # pragma: no cover
    main()
