import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confound_quant.dag import CausalDag, DagNode, NodeKind
from confound_quant.dsl import DagParseError, parse_dag, serialize_dag
from confound_quant.errors import ConfoundQuantError, ParseFailure

GOOD = """\
dag demo
# a comment line
node X "model output"
node A "artist" latent   # trailing comment
node Z "real work"
edge A -> X
edge A -> Z
edge X -> Z
"""


class TestParse:
    def test_basic_document(self):
        dag = parse_dag(GOOD)
        assert dag.name == "demo"
        assert [n.id for n in dag.nodes] == ["X", "A", "Z"]
        assert dag.node_map["A"].kind is NodeKind.LATENT
        assert dag.node_map["A"].label == "artist"
        assert dag.edges == (("A", "X"), ("A", "Z"), ("X", "Z"))

    def test_header_optional(self):
        dag = parse_dag('node A "a"\n')
        assert dag.name == ""

    def test_hash_inside_label_kept(self):
        dag = parse_dag('node A "piece #4"\n')
        assert dag.node_map["A"].label == "piece #4"

    def test_parse_errors_are_both_domain_and_parse_failures(self):
        with pytest.raises(ParseFailure):
            parse_dag("bogus\n")
        with pytest.raises(ConfoundQuantError):
            parse_dag("bogus\n")

    @pytest.mark.parametrize(
        "source, line, fragment",
        [
            ("nodule A\n", 1, "unknown directive"),
            ('node A "a"\ndag late\n', 2, "must come first"),
            ("dag 9bad\n", 1, "invalid identifier"),
            ('node 9A "a"\n', 1, "invalid node id"),
            ("node A\n", 1, "expected: node"),
            ("node A unquoted\n", 1, "double-quoted"),
            ('node A "a" weird\n', 1, "unexpected token"),
            ('node A "a"\nnode A "again"\n', 2, "first declared on line 1"),
            ('node A "a"\nedge A B\n', 2, "expected: edge"),
            ('node A "a"\nedge A -> A\n', 2, "self-loop"),
            ('node A "a"\nedge A -> Q\n', 2, "undeclared node"),
            (
                'node A "a"\nnode B "b"\nedge A -> B\nedge A -> B\n',
                4,
                "duplicate edge",
            ),
        ],
    )
    def test_error_positions(self, source, line, fragment):
        with pytest.raises(DagParseError) as err:
            parse_dag(source)
        assert err.value.line == line
        assert fragment in str(err.value)
        assert f"line {line}" in str(err.value)

    def test_column_reported(self):
        with pytest.raises(DagParseError) as err:
            parse_dag('node A "a" weird\n')
        assert err.value.col == 12

    def test_cycle_reported_without_position(self):
        src = 'node A "a"\nnode B "b"\nedge A -> B\nedge B -> A\n'
        with pytest.raises(DagParseError, match="cycle") as err:
            parse_dag(src)
        assert err.value.line is None


class TestSerialize:
    def test_fixture_round_trip(self, artwork_dag):
        again = parse_dag(serialize_dag(artwork_dag))
        assert again == artwork_dag

    def test_latent_round_trip(self, latent_artwork_dag):
        again = parse_dag(serialize_dag(latent_artwork_dag))
        assert again.latent_ids == {"E"}
        assert again == latent_artwork_dag


IDENT = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True)
LABEL = st.text(
    alphabet=st.characters(
        codec="utf-8", exclude_characters='"\n\r', exclude_categories=("C",)
    ),
    max_size=12,
)


@st.composite
def dags(draw):
    ids = draw(st.lists(IDENT, min_size=1, max_size=6, unique=True))
    nodes = tuple(
        DagNode(i, draw(LABEL), draw(st.sampled_from(list(NodeKind)))) for i in ids
    )
    edges = []
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            if draw(st.booleans()):
                edges.append((ids[i], ids[j]))
    name = draw(st.one_of(st.just(""), IDENT))
    return CausalDag(name, nodes, tuple(edges))


@settings(max_examples=60, deadline=None)
@given(dags())
def test_round_trip_property(dag):
    assert parse_dag(serialize_dag(dag)) == dag
