import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import wavedmd as wd
from wavedmd.errors import (
    DisconnectedGraphError,
    EdgeListParseError,
    GraphValidationError,
)
from wavedmd.graphs import planted_labels


# ---------------------------------------------------------------------------
# parse_edge_list
# ---------------------------------------------------------------------------


def test_parse_basic():
    g = wd.parse_edge_list("0 1 5\n1 2 5\n")
    assert g.n == 3
    assert g.edges == ((0, 1, 5.0), (1, 2, 5.0))


def test_parse_one_based_default_weight():
    g = wd.parse_edge_list("1 2\n2 3\n", one_based=True, default_weight=1.0)
    assert g.n == 3
    assert g.edges == ((0, 1, 1.0), (1, 2, 1.0))


def test_parse_comments_blank_lines_crlf():
    g = wd.parse_edge_list("# header\r\n\r\n0 1 2.5\r\n  # indented comment\n1 2 2.5\n")
    assert g.n == 3
    assert g.edges == ((0, 1, 2.5), (1, 2, 2.5))


def test_parse_accepts_file_object():
    g = wd.parse_edge_list(io.StringIO("0 1\n"), default_weight=3.0)
    assert g.edges == ((0, 1, 3.0),)


def test_parse_collapses_equal_duplicates():
    g = wd.parse_edge_list("0 1 2\n1 0 2\n")
    assert g.edges == ((0, 1, 2.0),)


def test_parse_conflicting_duplicate_weights():
    with pytest.raises(GraphValidationError, match="conflicting"):
        wd.parse_edge_list("0 1 2\n1 0 3\n")


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("0 1 2 3\n", "line 1"),
        ("0 x\n", "line 1"),
        ("0 1 1\n0 0 1\n", "line 2"),
        ("0 1 -2\n", "line 1"),
        ("0 1 0\n", "line 1"),
    ],
)
def test_parse_reports_line_numbers(text, fragment):
    with pytest.raises(EdgeListParseError, match=fragment):
        wd.parse_edge_list(text)


def test_parse_one_based_rejects_zero_index():
    with pytest.raises(EdgeListParseError):
        wd.parse_edge_list("0 1\n", one_based=True)


def test_parse_empty_is_error():
    with pytest.raises(GraphValidationError):
        wd.parse_edge_list("# nothing\n")


# ---------------------------------------------------------------------------
# graph validation and serialization
# ---------------------------------------------------------------------------


def test_make_graph_rejects_self_loop():
    with pytest.raises(GraphValidationError, match="self-loop"):
        wd.make_graph(2, [(0, 0, 1.0)])


def test_make_graph_rejects_out_of_range():
    with pytest.raises(GraphValidationError):
        wd.make_graph(2, [(0, 2, 1.0)])


def test_serialize_roundtrip_exact():
    g = wd.make_graph(3, [(0, 1, 1 / 3), (1, 2, 0.1234567890123456789)])
    assert wd.parse_edge_list(wd.serialize_graph(g)) == g


@st.composite
def graphs(draw):
    n = draw(st.integers(min_value=2, max_value=12))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(
        st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True)
    )
    weights = draw(
        st.lists(
            st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
            min_size=len(chosen),
            max_size=len(chosen),
        )
    )
    used = sorted({i for e in chosen for i in e})
    relabel = {old: new for new, old in enumerate(used)}
    return wd.make_graph(
        len(used), [(relabel[i], relabel[j], w) for (i, j), w in zip(chosen, weights)]
    )


@given(graphs())
def test_serialize_roundtrip_property(g):
    assert wd.parse_edge_list(wd.serialize_graph(g)) == g


# ---------------------------------------------------------------------------
# build_laplacian
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("w", [1.0, 0.25, 7.5])
def test_laplacian_two_nodes(w):
    lap = wd.build_laplacian(wd.make_graph(2, [(0, 1, w)]))
    assert np.allclose(lap.dense(), [[1.0, -1.0], [-1.0, 1.0]])


def test_laplacian_path_rows():
    lap = wd.build_laplacian(wd.make_graph(3, [(0, 1, 2.0), (1, 2, 2.0)]))
    expected = np.array([[1, -1, 0], [-0.5, 1, -0.5], [0, -1, 1]])
    assert np.allclose(lap.dense(), expected)


def test_laplacian_rejects_isolated_node():
    # node 2 exists (index range) but has no incident edge
    g = wd.Graph(n=3, edges=((0, 1, 1.0),))
    with pytest.raises(DisconnectedGraphError, match="no neighbors"):
        wd.build_laplacian(g)


def test_laplacian_rejects_disconnected():
    g = wd.make_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(DisconnectedGraphError, match="disconnected"):
        wd.build_laplacian(g)


@given(graphs())
def test_laplacian_row_sums_property(g):
    if not g.is_connected() or np.any(g.weighted_degrees() == 0):
        return
    lap = wd.build_laplacian(g)
    dense = lap.dense()
    assert np.all(np.abs(dense.sum(axis=1)) <= 1e-12)
    assert np.allclose(np.diag(dense), 1.0)


def test_laplacian_entries_match_definition(karate):
    lap = wd.build_laplacian(karate)
    dense = lap.dense()
    w = karate.adjacency()
    deg = karate.weighted_degrees()
    for i, j, wij in karate.edges[:20]:
        assert dense[i, j] == -wij / deg[i]
        assert dense[j, i] == -wij / deg[j]
    assert np.count_nonzero(dense) == 2 * karate.num_edges + karate.n
    assert np.all(w.T == w)


def test_karate_spectrum_range(karate):
    es = wd.eigendecompose(wd.build_laplacian(karate))
    assert np.all(es.lambdas >= -1e-9)
    assert np.all(es.lambdas <= 2 + 1e-9)
    assert es.lambdas[0] <= 1e-9
    v1 = es.vector(1)
    assert np.allclose(v1 / v1[0], np.ones(karate.n), atol=1e-8)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def test_weak_line_paper_graph():
    g = wd.generate_weak_line(50, 25, 5.0, 1.0)
    assert g.n == 50
    assert g.num_edges == 49
    weights = {(i, j): w for i, j, w in g.edges}
    assert weights[(24, 25)] == 1.0
    assert all(w == 5.0 for (i, j), w in weights.items() if (i, j) != (24, 25))


def test_weak_line_small_example():
    g = wd.generate_weak_line(3, 2, 5.0, 1.0)
    assert g.edges == ((0, 1, 5.0), (1, 2, 1.0))


def test_weak_line_validation():
    with pytest.raises(GraphValidationError):
        wd.generate_weak_line(3, 3, 5.0, 1.0)
    with pytest.raises(GraphValidationError):
        wd.generate_weak_line(2, 1, 5.0, 1.0)


def test_planted_partition_connected_and_separated(planted):
    assert planted.n == 400
    assert planted.is_connected()
    labels = planted_labels(4, 100)
    intra = sum(1 for i, j, _ in planted.edges if labels[i] == labels[j])
    inter = planted.num_edges - intra
    # 4950 intra pairs per block at p_in vs 60000 inter pairs at p_out
    intra_density = intra / (4 * 4950)
    inter_density = inter / 60000
    assert 0.15 < intra_density < 0.25
    assert 0.005 < inter_density < 0.02


def test_planted_partition_deterministic():
    kwargs = dict(p_in=0.3, p_out=0.02, w_in=(1.0, 2.0), w_out=(0.1, 0.5), seed=11)
    a = wd.generate_planted_partition(3, 20, **kwargs)
    b = wd.generate_planted_partition(3, 20, **kwargs)
    assert wd.serialize_graph(a) == wd.serialize_graph(b)


def test_planted_partition_single_block():
    g = wd.generate_planted_partition(
        1, 30, 0.3, 0.3, (1.0, 1.0), (1.0, 1.0), seed=3
    )
    assert g.n == 30
    assert g.is_connected()


def test_planted_partition_validation():
    with pytest.raises(GraphValidationError):
        wd.generate_planted_partition(2, 10, 0.1, 0.2, (1, 2), (1, 2), seed=0)
    with pytest.raises(GraphValidationError):
        wd.generate_planted_partition(2, 10, 1.5, 0.1, (1, 2), (1, 2), seed=0)
    with pytest.raises(GraphValidationError):
        wd.generate_planted_partition(2, 10, 0.5, 0.1, (0, 2), (1, 2), seed=0)


def test_karate_shape(karate):
    assert karate.n == 34
    assert karate.num_edges == 78
    assert all(w == 1.0 for _, _, w in karate.edges)
