"""Line-oriented text format for causal DAGs.

Grammar (UTF-8, ``#`` starts a comment to end of line)::

    dag <identifier>            # optional header, first non-comment line
    node <id> "<label>"         # observed node
    node <id> "<label>" latent  # latent node
    edge <id> -> <id>           # directed edge

Identifiers match ``[A-Za-z_][A-Za-z0-9_]*``; labels are double-quoted and
may contain spaces.  ``parse_dag`` reports syntax errors with line and
column; structural violations (cycles, duplicate nodes, unknown edge
endpoints) are caught by CausalDag validation and re-raised with context.
"""

from __future__ import annotations

import re

from .dag import CausalDag, DagNode, GraphError, NodeKind
from .errors import ParseFailure

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
TOKEN_RE = re.compile(r'"[^"]*"|\S+')


class DagParseError(ParseFailure):
    """Syntax or structural error in DAG DSL source."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "")
            where = f" ({where})"
        super().__init__(f"{message}{where}")


def _strip_comment(line: str) -> str:
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def _tokens(line: str) -> list[tuple[str, int]]:
    """(token, 1-based column) pairs; quoted strings are single tokens."""
    return [(m.group(0), m.start() + 1) for m in TOKEN_RE.finditer(line)]


def parse_dag(text: str) -> CausalDag:
    """Parse DSL source into a validated :class:`CausalDag`."""
    name = ""
    nodes: list[DagNode] = []
    edges: list[tuple[str, str]] = []
    node_lines: dict[str, int] = {}
    header_allowed = True

    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(_strip_comment(raw))
        if not toks:
            continue
        keyword, kw_col = toks[0]

        if keyword == "dag":
            if not header_allowed:
                raise DagParseError("dag header must come first", lineno, kw_col)
            if len(toks) != 2:
                raise DagParseError("expected: dag <identifier>", lineno, kw_col)
            ident, col = toks[1]
            if not IDENT_RE.match(ident):
                raise DagParseError(f"invalid identifier {ident!r}", lineno, col)
            name = ident
            header_allowed = False
            continue
        header_allowed = False

        if keyword == "node":
            if len(toks) not in (3, 4):
                raise DagParseError('expected: node <id> "<label>" [latent]', lineno, kw_col)
            ident, id_col = toks[1]
            if not IDENT_RE.match(ident):
                raise DagParseError(f"invalid node id {ident!r}", lineno, id_col)
            label_tok, label_col = toks[2]
            if len(label_tok) < 2 or not (label_tok.startswith('"') and label_tok.endswith('"')):
                raise DagParseError("node label must be double-quoted", lineno, label_col)
            kind = NodeKind.OBSERVED
            if len(toks) == 4:
                flag, flag_col = toks[3]
                if flag != "latent":
                    raise DagParseError(f"unexpected token {flag!r}", lineno, flag_col)
                kind = NodeKind.LATENT
            if ident in node_lines:
                raise DagParseError(
                    f"duplicate node id {ident!r} (first declared on line {node_lines[ident]})",
                    lineno,
                    id_col,
                )
            node_lines[ident] = lineno
            nodes.append(DagNode(ident, label_tok[1:-1], kind))
            continue

        if keyword == "edge":
            if len(toks) != 4 or toks[2][0] != "->":
                raise DagParseError("expected: edge <id> -> <id>", lineno, kw_col)
            src, src_col = toks[1]
            dst, dst_col = toks[3]
            for ident, col in ((src, src_col), (dst, dst_col)):
                if not IDENT_RE.match(ident):
                    raise DagParseError(f"invalid node id {ident!r}", lineno, col)
            if src == dst:
                raise DagParseError(f"self-loop on node {src!r}", lineno, src_col)
            for ident, col in ((src, src_col), (dst, dst_col)):
                if ident not in node_lines:
                    raise DagParseError(f"edge references undeclared node {ident!r}", lineno, col)
            if (src, dst) in edges:
                raise DagParseError(f"duplicate edge {src!r} -> {dst!r}", lineno, kw_col)
            edges.append((src, dst))
            continue

        raise DagParseError(f"unknown directive {keyword!r}", lineno, kw_col)

    try:
        return CausalDag(name, tuple(nodes), tuple(edges))
    except GraphError as exc:
        raise DagParseError(str(exc)) from exc


def serialize_dag(dag: CausalDag) -> str:
    """Emit DSL source that parses back to the same semantic graph."""
    lines: list[str] = []
    if dag.name:
        lines.append(f"dag {dag.name}")
    for node in dag.nodes:
        latent = " latent" if node.kind is NodeKind.LATENT else ""
        lines.append(f'node {node.id} "{node.label}"{latent}')
    for src, dst in dag.edges:
        lines.append(f"edge {src} -> {dst}")
    return "\n".join(lines) + "\n"
