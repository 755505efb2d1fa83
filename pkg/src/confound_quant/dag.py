"""Causal DAGs and the graphical queries needed for backdoor adjustment.

A :class:`CausalDag` is a labeled directed acyclic graph whose nodes are
either observed or latent.  On top of it this module answers the standard
graphical questions of causal analysis:

- triple classification (chain / fork / collider),
- d-separation of two node sets given a conditioning set,
- enumeration of backdoor paths (undirected paths whose first edge points
  into the exposure),
- admissibility of a candidate adjustment set (no descendant of the
  exposure, blocks every backdoor path),
- enumeration of all inclusion-minimal admissible adjustment sets, and
- backdoor identifiability.

d-separation follows the usual semantics: a path is blocked by a
conditioning set Y when some interior chain or fork node lies in Y, or when
some interior collider has neither itself nor any descendant in Y.
``is_d_separated`` is implemented as a reachability sweep over
(node, direction) states, which is linear in the graph size per query;
the test suite checks it against explicit path enumeration.

All functions are pure and a CausalDag is immutable after construction, so
instances can be shared freely across threads.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

from .errors import ConfoundQuantError


class GraphError(ConfoundQuantError):
    """Structural problem with a DAG (cycle, duplicate node, bad edge...)."""


class QueryError(ConfoundQuantError):
    """A query referenced unknown nodes or violated query preconditions."""


class NodeKind(str, Enum):
    OBSERVED = "observed"
    LATENT = "latent"


class TripleClass(str, Enum):
    CHAIN = "chain"
    FORK = "fork"
    COLLIDER = "collider"


class ViolatedCondition(str, Enum):
    DESCENDANT = "descendant-violation"
    UNBLOCKED_BACKDOOR = "unblocked-backdoor"


@dataclass(frozen=True)
class DagNode:
    id: str
    label: str
    kind: NodeKind = NodeKind.OBSERVED


@dataclass(frozen=True)
class CausalDag:
    """Immutable labeled DAG with observed/latent node kinds.

    Invariants enforced at construction: node ids unique and nonempty, no
    self-loops, no duplicate edges, every edge endpoint declared, and the
    edge set acyclic.
    """

    name: str
    nodes: tuple[DagNode, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for node in self.nodes:
            if not node.id:
                raise GraphError("node id must be nonempty")
            if node.id in seen:
                raise GraphError(f"duplicate node id {node.id!r}")
            seen.add(node.id)
        edge_seen: set[tuple[str, str]] = set()
        for src, dst in self.edges:
            if src == dst:
                raise GraphError(f"self-loop on node {src!r}")
            for end in (src, dst):
                if end not in seen:
                    raise GraphError(f"edge references unknown node {end!r}")
            if (src, dst) in edge_seen:
                raise GraphError(f"duplicate edge {src!r} -> {dst!r}")
            edge_seen.add((src, dst))
        self.topological_order  # raises on cycles

    @cached_property
    def node_ids(self) -> frozenset[str]:
        return frozenset(n.id for n in self.nodes)

    @cached_property
    def observed_ids(self) -> frozenset[str]:
        return frozenset(n.id for n in self.nodes if n.kind is NodeKind.OBSERVED)

    @cached_property
    def latent_ids(self) -> frozenset[str]:
        return self.node_ids - self.observed_ids

    @cached_property
    def node_map(self) -> dict[str, DagNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def parents(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = {n.id: set() for n in self.nodes}
        for src, dst in self.edges:
            acc[dst].add(src)
        return {k: frozenset(v) for k, v in acc.items()}

    @cached_property
    def children(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = {n.id: set() for n in self.nodes}
        for src, dst in self.edges:
            acc[src].add(dst)
        return {k: frozenset(v) for k, v in acc.items()}

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm; raises GraphError when the edges contain a cycle."""
        indegree = {n.id: 0 for n in self.nodes}
        for _, dst in self.edges:
            indegree[dst] += 1
        ready = deque(sorted(i for i, d in indegree.items() if d == 0))
        order: list[str] = []
        while ready:
            node = ready.popleft()
            order.append(node)
            for child in sorted(self.children[node]):
                indegree[child] -= 1
                if indegree[child] == 0:
                    ready.append(child)
        if len(order) != len(self.nodes):
            stuck = sorted(i for i, d in indegree.items() if d > 0)
            raise GraphError(f"cycle detected involving nodes {', '.join(stuck)}")
        return tuple(order)

    def has_edge(self, src: str, dst: str) -> bool:
        return dst in self.children.get(src, frozenset())

    def require_nodes(self, ids: Iterable[str]) -> None:
        unknown = sorted(set(ids) - self.node_ids)
        if unknown:
            raise QueryError(f"unknown node(s): {', '.join(unknown)}")


@dataclass(frozen=True)
class Path:
    """A simple undirected path with its interior triple classification."""

    nodes: tuple[str, ...]
    triple_classes: tuple[TripleClass, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) < 2:
            raise QueryError("a path needs at least two nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise QueryError("path nodes must not repeat")
        if len(self.triple_classes) != len(self.nodes) - 2:
            raise QueryError("one triple class per interior node required")

    def arrow_str(self, dag: CausalDag) -> str:
        """Render like ``X <- A -> Z`` using the DAG's edge directions."""
        parts = [self.nodes[0]]
        for a, b in zip(self.nodes, self.nodes[1:]):
            parts.append("->" if dag.has_edge(a, b) else "<-")
            parts.append(b)
        return " ".join(parts)

    @property
    def interior(self) -> tuple[str, ...]:
        return self.nodes[1:-1]


@dataclass(frozen=True)
class SeparationQuery:
    """x-set vs z-set given conditioning-set; the three sets must be disjoint."""

    x_set: frozenset[str]
    z_set: frozenset[str]
    conditioning_set: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not self.x_set or not self.z_set:
            raise QueryError("x-set and z-set must be nonempty")
        if (
            self.x_set & self.z_set
            or self.x_set & self.conditioning_set
            or self.z_set & self.conditioning_set
        ):
            raise QueryError("query sets must be pairwise disjoint")

    def validate_against(self, dag: CausalDag) -> None:
        dag.require_nodes(self.x_set | self.z_set | self.conditioning_set)


@dataclass(frozen=True)
class AdjustmentResult:
    admissible: bool
    violated_condition: ViolatedCondition | None = None
    witness_path: Path | None = None

    def __post_init__(self) -> None:
        witness_expected = self.violated_condition is ViolatedCondition.UNBLOCKED_BACKDOOR
        if witness_expected != (self.witness_path is not None):
            raise QueryError("witness path present iff an unblocked backdoor was found")


def classify_triple(dag: CausalDag, a: str, b: str, c: str) -> TripleClass:
    """Classify the pattern around ``b`` on the adjacent triple ``a - b - c``."""
    dag.require_nodes([a, b, c])
    ab = dag.has_edge(a, b)
    ba = dag.has_edge(b, a)
    bc = dag.has_edge(b, c)
    cb = dag.has_edge(c, b)
    if not (ab or ba) or not (bc or cb):
        raise QueryError(f"nodes {a!r}, {b!r}, {c!r} do not form an adjacent triple")
    if ab and cb:
        return TripleClass.COLLIDER
    if ba and bc:
        return TripleClass.FORK
    return TripleClass.CHAIN


def descendants(dag: CausalDag, node: str) -> frozenset[str]:
    """All nodes reachable from ``node`` along directed edges, excluding itself."""
    dag.require_nodes([node])
    out: set[str] = set()
    frontier = deque([node])
    while frontier:
        current = frontier.popleft()
        for child in dag.children[current]:
            if child not in out:
                out.add(child)
                frontier.append(child)
    return frozenset(out)


def is_d_separated(
    dag: CausalDag,
    query: SeparationQuery | None = None,
    *,
    x: Iterable[str] | None = None,
    z: Iterable[str] | None = None,
    given: Iterable[str] = (),
) -> bool:
    """True iff every undirected path between the x-set and z-set is blocked.

    Accepts either a :class:`SeparationQuery` or the ``x``/``z``/``given``
    keyword sets.  Reachability sweep: phase one marks the conditioning set
    and its ancestors (they open colliders), phase two explores
    (node, arrival-direction) states from the x-set, entering a node against
    an edge only when the corresponding triple would be active.
    """
    if query is None:
        if x is None or z is None:
            raise QueryError("provide a SeparationQuery or both x and z")
        query = SeparationQuery(frozenset(x), frozenset(z), frozenset(given))
    query.validate_against(dag)

    cond = query.conditioning_set
    # Nodes whose conditioning opens a collider: the conditioning set and all
    # of its ancestors.
    opens_collider: set[str] = set(cond)
    frontier = deque(cond)
    while frontier:
        current = frontier.popleft()
        for parent in dag.parents[current]:
            if parent not in opens_collider:
                opens_collider.add(parent)
                frontier.append(parent)

    FROM_CHILD, FROM_PARENT = 0, 1
    visited: set[tuple[str, int]] = set()
    todo: deque[tuple[str, int]] = deque((s, FROM_CHILD) for s in query.x_set)
    while todo:
        state = todo.popleft()
        if state in visited:
            continue
        visited.add(state)
        node, direction = state
        if node in query.z_set:
            return False
        if direction == FROM_CHILD and node not in cond:
            for parent in dag.parents[node]:
                todo.append((parent, FROM_CHILD))
            for child in dag.children[node]:
                todo.append((child, FROM_PARENT))
        elif direction == FROM_PARENT:
            if node not in cond:
                for child in dag.children[node]:
                    todo.append((child, FROM_PARENT))
            if node in opens_collider:
                for parent in dag.parents[node]:
                    todo.append((parent, FROM_CHILD))
    return True


def _classify_interior(dag: CausalDag, prev: str, mid: str, nxt: str) -> TripleClass:
    into_mid_left = dag.has_edge(prev, mid)
    into_mid_right = dag.has_edge(nxt, mid)
    if into_mid_left and into_mid_right:
        return TripleClass.COLLIDER
    if not into_mid_left and not into_mid_right:
        return TripleClass.FORK
    return TripleClass.CHAIN


def _make_path(dag: CausalDag, nodes: Sequence[str]) -> Path:
    classes = tuple(
        _classify_interior(dag, nodes[i - 1], nodes[i], nodes[i + 1])
        for i in range(1, len(nodes) - 1)
    )
    return Path(tuple(nodes), classes)


def backdoor_paths(dag: CausalDag, exposure: str, outcome: str) -> list[Path]:
    """All simple undirected exposure-outcome paths whose first edge points
    into the exposure, ordered lexicographically by node sequence."""
    dag.require_nodes([exposure, outcome])
    if exposure == outcome:
        raise QueryError("exposure and outcome must differ")

    neighbors: dict[str, frozenset[str]] = {
        n.id: dag.parents[n.id] | dag.children[n.id] for n in dag.nodes
    }
    found: list[tuple[str, ...]] = []

    def extend(trail: list[str]) -> None:
        tip = trail[-1]
        if tip == outcome:
            found.append(tuple(trail))
            return
        for nxt in sorted(neighbors[tip]):
            if nxt not in trail:
                trail.append(nxt)
                extend(trail)
                trail.pop()

    # First hop must traverse an edge oriented into the exposure.
    for parent in sorted(dag.parents[exposure]):
        extend([exposure, parent])
    found.sort()
    return [_make_path(dag, nodes) for nodes in found]


def path_is_blocked(dag: CausalDag, path: Path, conditioning: frozenset[str]) -> bool:
    """Blocking rule for a single path under a conditioning set."""
    for node, cls in zip(path.interior, path.triple_classes):
        if cls is TripleClass.COLLIDER:
            if node not in conditioning and not (descendants(dag, node) & conditioning):
                return True
        elif node in conditioning:
            return True
    return False


def is_admissible(
    dag: CausalDag,
    exposure: str,
    outcome: str,
    candidate: Iterable[str],
) -> AdjustmentResult:
    """Check the two-condition adjustment criterion for ``candidate``.

    Condition (a): no candidate element is a descendant of the exposure.
    Condition (b): the candidate blocks every backdoor path.  On failure the
    result names the violated condition, with the first unblocked backdoor
    path (in enumeration order) as witness for condition (b).
    """
    candidate_set = frozenset(candidate)
    dag.require_nodes([exposure, outcome])
    dag.require_nodes(candidate_set)
    latent = sorted(candidate_set & dag.latent_ids)
    if latent:
        raise QueryError(f"latent node(s) not adjustable: {', '.join(latent)}")
    if exposure in candidate_set or outcome in candidate_set:
        raise QueryError("candidate set must exclude exposure and outcome")

    if candidate_set & descendants(dag, exposure):
        return AdjustmentResult(False, ViolatedCondition.DESCENDANT)
    for path in backdoor_paths(dag, exposure, outcome):
        if not path_is_blocked(dag, path, candidate_set):
            return AdjustmentResult(False, ViolatedCondition.UNBLOCKED_BACKDOOR, path)
    return AdjustmentResult(True)


def _admissible_subsets(
    dag: CausalDag, exposure: str, outcome: str
) -> Iterable[frozenset[str]]:
    """Yield admissible observed subsets in (size, lexicographic) order."""
    universe = sorted(dag.observed_ids - {exposure, outcome})
    paths = backdoor_paths(dag, exposure, outcome)
    below = descendants(dag, exposure)
    for size in range(len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            cand = frozenset(combo)
            if cand & below:
                continue
            if all(path_is_blocked(dag, p, cand) for p in paths):
                yield cand


def minimal_adjustment_sets(
    dag: CausalDag, exposure: str, outcome: str
) -> list[frozenset[str]]:
    """All inclusion-minimal admissible observed sets, smallest first.

    Exhaustive subset search; the DAGs this library targets are small enough
    that exactness is cheap.  Returns an empty list when no admissible
    observed set exists (the effect is not identifiable via backdoor).
    """
    dag.require_nodes([exposure, outcome])
    if exposure == outcome:
        raise QueryError("exposure and outcome must differ")
    minimal: list[frozenset[str]] = []
    for cand in _admissible_subsets(dag, exposure, outcome):
        if not any(kept <= cand for kept in minimal):
            minimal.append(cand)
    return minimal


def is_identifiable_via_backdoor(dag: CausalDag, exposure: str, outcome: str) -> bool:
    """True iff at least one admissible observed adjustment set exists."""
    dag.require_nodes([exposure, outcome])
    if exposure == outcome:
        raise QueryError("exposure and outcome must differ")
    return next(iter(_admissible_subsets(dag, exposure, outcome)), None) is not None
