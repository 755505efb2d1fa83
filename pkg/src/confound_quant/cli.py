"""Command-line entry point.

Layout: ``confound-quant <group> <command>`` with groups for DAG queries
(``dag``), adjustment evaluation (``adjust``), feature-data inspection
(``data``), bias scoring (``bias``), rank statistics (``stats``), and
synthetic data (``synth``).

Conventions shared by every command:

* machine output is a single JSON report on stdout (or ``--out``), always
  carrying a ``version`` field;
* ``--verbose`` adds a short human-readable summary on stderr;
* failures print one line ``error: ...`` to stderr; exit code 1 means a
  domain error (inadmissible set, insufficient cohort, invalid data), exit
  code 2 means the command line or an input file could not be parsed.

Seeds: commands that take ``--seed`` fall back to the
``CONFOUND_QUANT_SEED`` environment variable, then to 1.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from dataclasses import replace

import click

from . import REPORT_VERSION, __version__
from .adjustment import backdoor_adjust, parse_model
from .bias import compute_bias, simpson_check
from .dag import (
    SeparationQuery,
    backdoor_paths,
    is_d_separated,
    minimal_adjustment_sets,
)
from .dsl import parse_dag
from .errors import ConfoundQuantError, ParseFailure
from .matching import BACKEND, DistanceKind
from .stats import (
    compare_movement_groups,
    rank_sum_test,
    read_grouped_csv,
    read_paired_csv,
    wilcoxon_signed_rank,
)
from .store import (
    DEFAULT_MIN_PEER_COUNT,
    build_cohort,
    dump_records,
    load_records_path,
    summarize,
)
from .synth import (
    GeneratorMode,
    ScenarioSpec,
    SynthError,
    generate_dataset,
    load_config,
    run_scenario,
)

ENV_SEED = "CONFOUND_QUANT_SEED"


def guarded(func):
    """Map domain errors to exit 1 and input-parse errors to exit 2."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ParseFailure as exc:
            _fail(str(exc), code=2)
        except ConfoundQuantError as exc:
            _fail(str(exc), code=1)
        except OSError as exc:
            _fail(str(exc), code=1)

    return wrapper


def _fail(message: str, code: int) -> None:
    click.echo("error: " + " ".join(message.split()), err=True)
    sys.exit(code)


def _emit(report: dict, out: str | None, verbose: bool, summary: str) -> None:
    payload = {"version": REPORT_VERSION, **report}
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    if verbose:
        click.echo(summary, err=True)


def _nodes(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _read_dag(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dag(fh.read())


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(ENV_SEED)
    if env:
        try:
            return int(env)
        except ValueError:
            raise click.UsageError(f"{ENV_SEED} must be an integer, got {env!r}")
    return 1


def _verbose(ctx: click.Context) -> bool:
    return bool(ctx.obj and ctx.obj.get("verbose"))


@click.group()
@click.version_option(version=__version__, prog_name="confound-quant")
@click.option("--verbose", is_flag=True, help="Human-readable summary on stderr.")
@click.pass_context
def main(ctx: click.Context, verbose: bool) -> None:
    """Quantify confounding bias in per-artist style evaluation."""
    ctx.obj = {"verbose": verbose}


# ---------------------------------------------------------------------------
# dag
# ---------------------------------------------------------------------------


@main.group()
def dag() -> None:
    """Causal-graph queries."""


@dag.command("validate")
@click.argument("dag_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def dag_validate(ctx: click.Context, dag_file: str, out: str | None) -> None:
    """Parse a DAG file and report its structure."""
    graph = _read_dag(dag_file)
    report = {
        "name": graph.name,
        "nodes": [
            {"id": n.id, "label": n.label, "latent": n.kind.value == "latent"}
            for n in graph.nodes
        ],
        "edges": [list(e) for e in graph.edges],
        "acyclic": True,
    }
    _emit(
        report,
        out,
        _verbose(ctx),
        f"ok: {len(graph.nodes)} nodes, {len(graph.edges)} edges",
    )


@dag.command("dsep")
@click.argument("dag_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--x", required=True, help="Comma-separated node ids.")
@click.option("--z", required=True, help="Comma-separated node ids.")
@click.option("--given", default="", help="Comma-separated conditioning ids.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def dag_dsep(ctx, dag_file, x, z, given, out) -> None:
    """Is X d-separated from Z given the conditioning set?"""
    graph = _read_dag(dag_file)
    query = SeparationQuery(
        x_set=frozenset(_nodes(x)),
        z_set=frozenset(_nodes(z)),
        conditioning_set=frozenset(_nodes(given)),
    )
    separated = is_d_separated(graph, query)
    report = {
        "x": sorted(query.x_set),
        "z": sorted(query.z_set),
        "given": sorted(query.conditioning_set),
        "separated": separated,
    }
    _emit(report, out, _verbose(ctx), f"separated: {separated}")


@dag.command("adjustment-sets")
@click.argument("dag_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--exposure", required=True)
@click.option("--outcome", required=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def dag_adjustment_sets(ctx, dag_file, exposure, outcome, out) -> None:
    """Minimal admissible adjustment sets for exposure -> outcome."""
    graph = _read_dag(dag_file)
    sets = minimal_adjustment_sets(graph, exposure, outcome)
    paths = backdoor_paths(graph, exposure, outcome)
    report = {
        "exposure": exposure,
        "outcome": outcome,
        "identifiable": bool(sets),
        "adjustment_sets": [sorted(s) for s in sets],
        "backdoor_paths": [p.arrow_str(graph) for p in paths],
    }
    if not sets:
        click.echo("warning: not identifiable via backdoor", err=True)
    _emit(
        report,
        out,
        _verbose(ctx),
        f"{len(sets)} minimal adjustment set(s), {len(paths)} backdoor path(s)",
    )


# ---------------------------------------------------------------------------
# adjust
# ---------------------------------------------------------------------------


@main.group()
def adjust() -> None:
    """Backdoor adjustment on discrete models."""


@adjust.command("compute")
@click.argument("dag_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--exposure", required=True)
@click.option("--value", "exposure_value", required=True, help="Exposure category.")
@click.option("--outcome", required=True)
@click.option("--adjust", "adjustment", required=True, help="Comma-separated set.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def adjust_compute(ctx, dag_file, model_file, exposure, exposure_value, outcome,
                   adjustment, out) -> None:
    """Evaluate P(outcome | do(exposure=value)) via the adjustment formula."""
    graph = _read_dag(dag_file)
    with open(model_file, "r", encoding="utf-8") as fh:
        model = parse_model(fh.read(), graph)
    report = backdoor_adjust(
        model, exposure, exposure_value, outcome, _nodes(adjustment)
    )
    payload = {
        "exposure": report.exposure,
        "exposure_value": report.exposure_value,
        "outcome": report.outcome,
        "adjustment_set": sorted(report.adjustment_set),
        "distribution": report.as_dict(),
        "skipped_strata": report.skipped_strata,
        "skipped_mass": report.skipped_mass,
    }
    top = max(report.as_dict().items(), key=lambda kv: kv[1])
    _emit(payload, out, _verbose(ctx), f"most likely outcome: {top[0]} ({top[1]:.4f})")


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------


@main.group()
def data() -> None:
    """Feature-record files."""


@data.command("validate")
@click.argument("data_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def data_validate(ctx, data_file, out) -> None:
    """Check a JSONL feature file against the interchange schema."""
    records = load_records_path(data_file)
    report = {"valid": True, "n_records": len(records)}
    _emit(report, out, _verbose(ctx), f"ok: {len(records)} records")


@data.command("summary")
@click.argument("data_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def data_summary(ctx, data_file, out) -> None:
    """Counts, dimensions, and category values present in a feature file."""
    records = load_records_path(data_file)
    summary = summarize(records)
    _emit(
        summary.as_dict(),
        out,
        _verbose(ctx),
        f"{summary.n_records} records, {summary.n_artists} artists, "
        f"dimension {summary.dimension}",
    )


# ---------------------------------------------------------------------------
# bias
# ---------------------------------------------------------------------------


_distance_option = click.option(
    "--distance",
    type=click.Choice([k.value for k in DistanceKind]),
    default=DistanceKind.EUCLIDEAN.value,
    show_default=True,
)


@main.group()
def bias() -> None:
    """Covariate-matching bias scores."""


@bias.command("compute")
@click.argument("data_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--artist", required=True, help="Focal artist.")
@click.option("--movement", required=True)
@click.option("--genre", required=True)
@click.option("--material", required=True)
@_distance_option
@click.option("--min-peer-count", type=int, default=DEFAULT_MIN_PEER_COUNT,
              show_default=True)
@click.option("--min-focal-count", type=int, default=None,
              help="Defaults to --min-peer-count.")
@click.option("--strict-threshold", is_flag=True,
              help="Require strictly more works than the threshold.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def bias_compute(ctx, data_file, artist, movement, genre, material, distance,
                 min_peer_count, min_focal_count, strict_threshold, out) -> None:
    """Score one focal artist within one (movement, genre, material) stratum."""
    records = load_records_path(data_file)
    cohort = build_cohort(
        records,
        artist,
        movement,
        genre,
        material,
        min_peer_count=min_peer_count,
        min_focal_count=min_focal_count,
        strict_threshold=strict_threshold,
    )
    report = compute_bias(cohort, DistanceKind(distance))
    _emit(
        report.as_dict(),
        out,
        _verbose(ctx),
        f"bias {report.bias:.4f} = {report.numerator:.4f} / {report.denominator:.4f} "
        f"({len(cohort.peers)} peers, backend {BACKEND})",
    )


@bias.command("simpson")
@click.argument("data_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--artist", required=True, help="Focal artist.")
@click.option("--movements", required=True, help="Comma-separated movements.")
@click.option("--genre", required=True)
@click.option("--material", required=True)
@_distance_option
@click.option("--min-peer-count", type=int, default=DEFAULT_MIN_PEER_COUNT,
              show_default=True)
@click.option("--min-focal-count", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def bias_simpson(ctx, data_file, artist, movements, genre, material, distance,
                 min_peer_count, min_focal_count, out) -> None:
    """Stratified scores per movement next to the pooled score."""
    records = load_records_path(data_file)
    report = simpson_check(
        records,
        artist,
        _nodes(movements),
        genre,
        material,
        kind=DistanceKind(distance),
        min_peer_count=min_peer_count,
        min_focal_count=min_focal_count,
    )
    strata = ", ".join(f"{m}={r.bias:.3f}" for m, r in report.stratified)
    _emit(
        report.as_dict(),
        out,
        _verbose(ctx),
        f"stratified: {strata}; pooled: {report.pooled.bias:.3f}; "
        f"understates: {report.understates}",
    )


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


@main.group()
def stats() -> None:
    """Rank-based significance tests."""


@stats.command("wilcoxon")
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def stats_wilcoxon(ctx, csv_file, out) -> None:
    """Signed-rank test on a two-column CSV of paired values."""
    with open(csv_file, "r", encoding="utf-8", newline="") as fh:
        sample = read_paired_csv(fh)
    result = wilcoxon_signed_rank(sample.x, sample.y)
    _emit(
        result.as_dict(),
        out,
        _verbose(ctx),
        f"p = {result.p_value:.6g} ({result.method}, n = {result.n_used})",
    )


@stats.command("ranksum")
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def stats_ranksum(ctx, csv_file, out) -> None:
    """Rank-sum test on a label,value CSV with exactly two labels."""
    with open(csv_file, "r", encoding="utf-8", newline="") as fh:
        groups = read_grouped_csv(fh)
    if len(groups) != 2:
        raise ConfoundQuantError(
            f"expected exactly two groups, found {len(groups)}: "
            + ", ".join(sorted(groups))
        )
    label_a, label_b = sorted(groups)
    result = rank_sum_test(groups[label_a], groups[label_b])
    payload = {"group_a": label_a, "group_b": label_b, **result.as_dict()}
    _emit(
        payload,
        out,
        _verbose(ctx),
        f"p = {result.p_value:.6g} ({result.method}, {result.n_a} vs {result.n_b})",
    )


@stats.command("compare")
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--single-label", default="single", show_default=True)
@click.option("--multi-label", default="multi", show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def stats_compare(ctx, csv_file, single_label, multi_label, alpha, out) -> None:
    """Compare single-movement vs multi-movement score groups."""
    with open(csv_file, "r", encoding="utf-8", newline="") as fh:
        groups = read_grouped_csv(fh)
    for label in (single_label, multi_label):
        if label not in groups:
            raise ConfoundQuantError(
                f"group {label!r} not in file (found: " + ", ".join(sorted(groups)) + ")"
            )
    result = compare_movement_groups(
        groups[single_label], groups[multi_label], alpha=alpha
    )
    _emit(
        result.as_dict(),
        out,
        _verbose(ctx),
        f"means {result.mean_single:.4f} vs {result.mean_multi:.4f}, "
        f"p = {result.test.p_value:.6g}, significant: {result.significant}",
    )


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


@main.group()
def synth() -> None:
    """Synthetic datasets and scenarios."""


_mode_option = click.option(
    "--mode",
    default=None,
    help="movement-aware|movement-blind (short: aware|blind).",
)


@synth.command("generate")
@click.option("--preset", default=None, help="Named preset configuration.")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config mirroring the generator fields.")
@_mode_option
@click.option("--seed", type=int, default=None, help=f"Falls back to ${ENV_SEED}, then 1.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def synth_generate(ctx, preset, config_file, mode, seed, out) -> None:
    """Write a synthetic dataset as JSONL (stdout without --out)."""
    if (preset is None) == (config_file is None):
        raise click.UsageError("give exactly one of --preset or --config")
    if preset is not None:
        spec = ScenarioSpec(
            preset,
            resolve_seed(seed),
            GeneratorMode.parse(mode) if mode else GeneratorMode.BLIND,
        )
        cfg = spec.resolve()
    else:
        cfg = load_config(config_file)
        if seed is not None or os.environ.get(ENV_SEED):
            cfg = replace(cfg, seed=resolve_seed(seed))
        if mode:
            cfg = replace(cfg, mode=GeneratorMode.parse(mode))
    records = generate_dataset(cfg)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            dump_records(records, fh)
    else:
        dump_records(records, sys.stdout)
    if _verbose(ctx):
        click.echo(
            f"{len(records)} records ({cfg.mode.value}, seed {cfg.seed})", err=True
        )


@synth.command("scenario")
@click.option("--preset", required=True)
@_mode_option
@click.option("--seed", type=int, default=None, help=f"Falls back to ${ENV_SEED}, then 1.")
@_distance_option
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@guarded
def synth_scenario(ctx, preset, mode, seed, distance, out) -> None:
    """Run a preset end to end and report every focal artist's score."""
    spec = ScenarioSpec(
        preset,
        resolve_seed(seed),
        GeneratorMode.parse(mode) if mode else GeneratorMode.BLIND,
    )
    report = run_scenario(spec, DistanceKind(distance))
    means = ", ".join(f"{m.artist}={m.mean_bias:.3f}" for m in report.artist_means)
    _emit(report.as_dict(), out, _verbose(ctx), f"artist means: {means}")


if __name__ == "__main__":
    main()
