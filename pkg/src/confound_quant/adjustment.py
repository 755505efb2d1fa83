"""Discrete models over causal DAGs and backdoor adjustment.

A :class:`DiscreteModel` attaches categorical domains and conditional
probability tables to a :class:`~confound_quant.dag.CausalDag`.
``backdoor_adjust`` evaluates the adjustment formula

    P(outcome | do(exposure = x)) = sum_v P(outcome | x, v) * P(v)

over the joint distribution implied by the tables, where ``v`` ranges over
the joint values of an admissible adjustment set.  ``intervention_oracle``
computes the same target by graph mutilation (drop edges into the exposure,
clamp its value, sum the full joint); on admissible sets the two must agree,
which the test suite exploits.

Strata with P(exposure = x, v) = 0 leave the conditional undefined; by
convention they contribute nothing and the report tracks the skipped
probability mass so the gap is visible instead of silently renormalized.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

from .dag import CausalDag, ViolatedCondition, is_admissible
from .errors import ConfoundQuantError, ParseFailure

ROW_SUM_TOL = 1e-9
DIST_SUM_TOL = 1e-9
MAX_JOINT_BITS = 22.0


class ModelError(ConfoundQuantError):
    pass


class ModelParseError(ModelError, ParseFailure):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"{message} (line {line})" if line is not None else message)


class ModelValidationError(ModelError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid model: " + "; ".join(violations))


class InadmissibleSetError(ModelError):
    def __init__(self, condition: ViolatedCondition, detail: str):
        self.condition = condition
        super().__init__(f"adjustment set not admissible ({condition.value}): {detail}")


class ModelTooLargeError(ModelError):
    pass


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """P(child | parents): one probability vector per parent-value tuple."""

    child: str
    parents: tuple[str, ...]
    rows: Mapping[tuple[str, ...], tuple[float, ...]]


@dataclass(frozen=True, eq=False)
class DiscreteModel:
    dag: CausalDag
    domains: Mapping[str, tuple[str, ...]]
    cpts: Mapping[str, ConditionalTable]


@dataclass(frozen=True, eq=False)
class CausalEffectReport:
    """Result of a backdoor adjustment evaluation."""

    exposure: str
    exposure_value: str
    outcome: str
    outcome_categories: tuple[str, ...]
    adjustment_set: frozenset[str]
    distribution: tuple[float, ...]
    skipped_strata: int = 0
    skipped_mass: float = 0.0

    def __post_init__(self) -> None:
        total = sum(self.distribution) + self.skipped_mass
        if abs(total - 1.0) > DIST_SUM_TOL:
            raise ModelError(f"effect distribution sums to {total}, expected 1")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.outcome_categories, self.distribution))


def model_violations(model: DiscreteModel) -> list[str]:
    """All invariant violations, one message each; empty list means valid."""
    out: list[str] = []
    node_ids = model.dag.node_ids
    for extra in sorted(set(model.domains) - node_ids):
        out.append(f"domain for unknown node {extra!r}")
    for extra in sorted(set(model.cpts) - node_ids):
        out.append(f"table for unknown node {extra!r}")
    for node in sorted(node_ids):
        dom = model.domains.get(node)
        if dom is None:
            out.append(f"node {node!r} has no domain")
            continue
        if len(dom) == 0:
            out.append(f"node {node!r} has an empty domain")
        if len(set(dom)) != len(dom):
            out.append(f"node {node!r} has duplicate category labels")
        table = model.cpts.get(node)
        if table is None:
            out.append(f"node {node!r} has no conditional table")
            continue
        if table.child != node:
            out.append(f"table for {node!r} declares child {table.child!r}")
            continue
        if set(table.parents) != set(model.dag.parents[node]):
            want = ",".join(sorted(model.dag.parents[node])) or "(none)"
            got = ",".join(table.parents) or "(none)"
            out.append(f"table for {node!r} indexed by [{got}] but parents are [{want}]")
            continue
        if any(p not in model.domains for p in table.parents):
            continue  # parent domain errors already reported above
        expected_rows = set(
            itertools.product(*(model.domains[p] for p in table.parents))
        )
        for key, probs in table.rows.items():
            if key not in expected_rows:
                out.append(f"table for {node!r}: unexpected row {key!r}")
                continue
            if len(probs) != len(dom):
                out.append(
                    f"table for {node!r} row {key!r}: {len(probs)} entries for "
                    f"{len(dom)} categories"
                )
                continue
            if any(p < 0 for p in probs):
                out.append(f"table for {node!r} row {key!r}: negative probability")
            elif abs(sum(probs) - 1.0) > ROW_SUM_TOL:
                out.append(f"table for {node!r} row {key!r}: sums to {sum(probs)}")
        for key in sorted(expected_rows - set(table.rows)):
            out.append(f"table for {node!r}: missing row {key!r}")
    return out


def validate_model(model: DiscreteModel) -> DiscreteModel:
    """Return the model unchanged, or raise listing every violation."""
    problems = model_violations(model)
    if problems:
        raise ModelValidationError(problems)
    return model


def _joint_bits(model: DiscreteModel) -> float:
    return sum(math.log2(len(model.domains[n])) for n in model.dag.node_ids)


def _factor_tensor(model: DiscreteModel, node: str, axis_of: dict[str, int]) -> np.ndarray:
    """CPT of ``node`` broadcast over the full joint axis layout."""
    table = model.cpts[node]
    parent_doms = [model.domains[p] for p in table.parents]
    child_dom = model.domains[node]
    arr = np.empty([len(d) for d in parent_doms] + [len(child_dom)])
    for idx in itertools.product(*(range(len(d)) for d in parent_doms)):
        key = tuple(dom[i] for dom, i in zip(parent_doms, idx))
        arr[idx] = table.rows[key]
    # Move (parents..., child) into the global axis order.
    src = list(range(arr.ndim))
    dst = [axis_of[p] for p in table.parents] + [axis_of[node]]
    full_shape = [1] * len(axis_of)
    for ax, size in zip(dst, arr.shape):
        full_shape[ax] = size
    order = sorted(range(arr.ndim), key=lambda i: dst[i])
    arr = np.transpose(arr, [src[i] for i in order])
    return arr.reshape(full_shape)


def _axis_layout(model: DiscreteModel) -> tuple[tuple[str, ...], dict[str, int]]:
    order = tuple(sorted(model.dag.node_ids))
    return order, {n: i for i, n in enumerate(order)}


def _check_size(model: DiscreteModel) -> None:
    bits = _joint_bits(model)
    if bits > MAX_JOINT_BITS:
        raise ModelTooLargeError(
            f"joint state space is {bits:.1f} binary-equivalent bits "
            f"(limit {MAX_JOINT_BITS:.0f})"
        )


def _joint_tensor(model: DiscreteModel) -> tuple[np.ndarray, tuple[str, ...], dict[str, int]]:
    _check_size(model)
    order, axis_of = _axis_layout(model)
    factors = [_factor_tensor(model, n, axis_of) for n in order]
    return reduce(np.multiply, factors), order, axis_of


def backdoor_adjust(
    model: DiscreteModel,
    exposure: str,
    exposure_value: str,
    outcome: str,
    adjustment: Iterable[str],
) -> CausalEffectReport:
    """Evaluate the backdoor adjustment formula for an admissible set.

    Refuses inadmissible sets (the formula would not identify the causal
    effect); the error names the violated criterion condition.
    """
    adj = frozenset(adjustment)
    result = is_admissible(model.dag, exposure, outcome, adj)
    if not result.admissible:
        assert result.violated_condition is not None
        if result.witness_path is not None:
            detail = f"unblocked path {result.witness_path.arrow_str(model.dag)}"
        else:
            detail = "candidate contains a descendant of the exposure"
        raise InadmissibleSetError(result.violated_condition, detail)
    if exposure_value not in model.domains[exposure]:
        raise ModelError(f"{exposure_value!r} not in domain of {exposure!r}")

    joint, order, axis_of = _joint_tensor(model)
    adj_nodes = tuple(sorted(adj))
    keep = {exposure, outcome, *adj_nodes}
    drop = tuple(axis_of[n] for n in order if n not in keep)
    reduced = joint.sum(axis=drop, keepdims=False) if drop else joint
    # Axes of ``reduced`` follow the sorted order of the kept nodes.
    kept_order = tuple(n for n in order if n in keep)
    pos = {n: i for i, n in enumerate(kept_order)}
    reduced = np.moveaxis(
        reduced,
        [pos[exposure], pos[outcome]],
        [len(kept_order) - 2, len(kept_order) - 1],
    )
    # reduced axes: (adjustment nodes in sorted order ..., exposure, outcome)
    x_index = model.domains[exposure].index(exposure_value)
    n_out = len(model.domains[outcome])

    dist = np.zeros(n_out)
    skipped_strata = 0
    skipped_mass = 0.0
    flat = reduced.reshape(-1, len(model.domains[exposure]), n_out)
    for stratum in flat:
        p_v = stratum.sum()
        p_xv = stratum[x_index].sum()
        if p_xv == 0.0:
            if p_v > 0.0:
                skipped_strata += 1
                skipped_mass += p_v
            continue
        dist += p_v * (stratum[x_index] / p_xv)

    return CausalEffectReport(
        exposure=exposure,
        exposure_value=exposure_value,
        outcome=outcome,
        outcome_categories=model.domains[outcome],
        adjustment_set=adj,
        distribution=tuple(dist.tolist()),
        skipped_strata=skipped_strata,
        skipped_mass=float(skipped_mass),
    )


def intervention_oracle(
    model: DiscreteModel,
    exposure: str,
    exposure_value: str,
    outcome: str,
) -> tuple[float, ...]:
    """P(outcome | do(exposure = value)) by explicit graph mutilation.

    Replaces the exposure's conditional table with a point mass on the
    clamped value (equivalently: deletes all edges into the exposure) and
    sums the resulting joint over every full assignment.  Exponential in the
    number of nodes; refuses models whose joint state space exceeds
    ``MAX_JOINT_BITS`` binary-equivalent bits.
    """
    model.dag.require_nodes([exposure, outcome])
    if exposure_value not in model.domains[exposure]:
        raise ModelError(f"{exposure_value!r} not in domain of {exposure!r}")
    _check_size(model)

    order, axis_of = _axis_layout(model)
    factors = []
    for node in order:
        if node == exposure:
            point = np.zeros(len(model.domains[exposure]))
            point[model.domains[exposure].index(exposure_value)] = 1.0
            shape = [1] * len(order)
            shape[axis_of[exposure]] = len(point)
            factors.append(point.reshape(shape))
        else:
            factors.append(_factor_tensor(model, node, axis_of))
    mutilated = reduce(np.multiply, factors)
    drop = tuple(ax for n, ax in axis_of.items() if n != outcome)
    dist = mutilated.sum(axis=drop)
    total = dist.sum()
    if abs(total - 1.0) > DIST_SUM_TOL:
        raise ModelError(f"interventional distribution sums to {total}")
    return tuple(dist.tolist())


# ---------------------------------------------------------------------------
# Model file format
# ---------------------------------------------------------------------------

_CPT_HEADER_RE = re.compile(r"cpt\s+(\S+)\s*\|\s*(.*)\Z")
_ROW_RE = re.compile(r"\(([^)]*)\)\s*:\s*(.+)\Z")


def _split_csv(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",")]
    return [t for t in items if t]


def parse_model(text: str, dag: CausalDag) -> DiscreteModel:
    """Parse the structured model text format and validate against ``dag``.

    Layout: a ``domains:`` section with ``node: label, label`` lines, then
    one ``cpt <node> | <parents>`` block per node whose rows look like
    ``(<parent values>) : <probabilities>``.  Probabilities may be separated
    by spaces or commas.
    """
    domains: dict[str, tuple[str, ...]] = {}
    tables: dict[str, ConditionalTable] = {}
    section: str | None = None
    current_child: str | None = None
    current_parents: tuple[str, ...] = ()
    current_rows: dict[tuple[str, ...], tuple[float, ...]] = {}

    def close_table(lineno: int) -> None:
        nonlocal current_child, current_rows
        if current_child is None:
            return
        if current_child in tables:
            raise ModelParseError(f"duplicate cpt for {current_child!r}", lineno)
        tables[current_child] = ConditionalTable(
            current_child, current_parents, dict(current_rows)
        )
        current_child = None
        current_rows = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "domains:":
            if section is not None:
                raise ModelParseError("domains: section must come first", lineno)
            section = "domains"
            continue
        if line.startswith("cpt"):
            close_table(lineno)
            m = _CPT_HEADER_RE.match(line)
            if not m:
                raise ModelParseError("expected: cpt <node> | <parents>", lineno)
            section = "cpt"
            current_child = m.group(1)
            current_parents = tuple(_split_csv(m.group(2)))
            continue
        if section == "domains":
            if ":" not in line:
                raise ModelParseError("expected: <node>: <categories>", lineno)
            node, _, cats = line.partition(":")
            node = node.strip()
            labels = tuple(_split_csv(cats))
            if not labels:
                raise ModelParseError(f"empty domain for {node!r}", lineno)
            if node in domains:
                raise ModelParseError(f"duplicate domain for {node!r}", lineno)
            domains[node] = labels
            continue
        if section == "cpt":
            m = _ROW_RE.match(line)
            if not m:
                raise ModelParseError("expected: (<parent values>) : <probabilities>", lineno)
            key = tuple(_split_csv(m.group(1)))
            try:
                probs = tuple(float(t) for t in m.group(2).replace(",", " ").split())
            except ValueError as exc:
                raise ModelParseError(f"bad probability literal: {exc}", lineno) from exc
            if key in current_rows:
                raise ModelParseError(f"duplicate row {key!r}", lineno)
            current_rows[key] = probs
            continue
        raise ModelParseError(f"unexpected line {line!r}", lineno)

    close_table(len(text.splitlines()))
    return validate_model(DiscreteModel(dag, domains, tables))
