import pytest

from anoflip.assembly import IncomparableFlows, apply_flip, construction_7_3, two_holed_torus_flow
from anoflip.fatgraph import REFLECTOR_END, FatGraph, family_Xn, two_holed_torus_example
from anoflip.orbit_combinatorics import (STABLE_SIDE, FatTreeBall, NotInterior, TreeEdge,
                                         TreeVertex, UnsupportedMarking, compare_signs, fold_back,
                                         is_tree_of_scalloped, scalloped_lines_through, sign_of,
                                         unfold_tree)
from anoflip.seifert_piece import build_piece


@pytest.fixture(params=["two-holed-torus", "X1"])
def piece(request):
    g = two_holed_torus_example() if request.param == "two-holed-torus" else family_Xn(1)
    return build_piece(g)


def test_radius_zero(piece):
    ball = unfold_tree(piece, 0)
    assert ball.ball_vertices() == [0]
    assert len(ball.edges) == 4
    assert ball.interior_edges() == []


@pytest.mark.parametrize("r", [1, 2, 3])
def test_ball_growth(piece, r):
    ball = unfold_tree(piece, r)
    assert len(ball.ball_vertices()) == 1 + 2 * (3 ** r - 1)


def test_fold_back_recovers_cyclic_orders(piece):
    g = piece.graph
    for gv, seqs in fold_back(unfold_tree(piece, 3)).items():
        assert seqs == {g.vertices[gv]}


def test_tree_edges_cover_graph_edges(piece):
    ball = unfold_tree(piece, 3)
    g = piece.graph
    for te in ball.edges.values():
        (u, i), (w, j) = te.ends
        a, b = ball.vertices[u].darts[i], ball.vertices[w].darts[j]
        assert g.alpha[a] == b and g.edge_of[a] == te.graph_edge


def test_tree_of_scalloped(piece):
    assert is_tree_of_scalloped(unfold_tree(piece, 2))
    assert is_tree_of_scalloped(unfold_tree(piece, 3))


def test_lines_through_every_interior_lozenge(piece):
    ball = unfold_tree(piece, 3)
    for e in ball.interior_edges():
        s, u = scalloped_lines_through(e, ball)
        assert s != u
        assert set(s) & set(u) == {e}
        assert len(s) >= 3 and len(u) >= 3


def test_line_side_types(piece):
    ball = unfold_tree(piece, 3)
    s, _ = scalloped_lines_through(0, ball)
    for a, b in zip(s, s[1:]):
        shared = set(v for v, _ in ball.edges[a].ends) & set(v for v, _ in ball.edges[b].ends)
        (c,) = shared
        assert ball.lozenge(a).partner(STABLE_SIDE, c) == b


def test_frontier_lozenge_is_not_interior(piece):
    ball = unfold_tree(piece, 1)
    frontier = [e for e in ball.edges if e not in ball.interior_edges()]
    with pytest.raises(NotInterior):
        scalloped_lines_through(frontier[0], ball)


def path_ball(length):
    """Unfolding of a path: every vertex uses only two opposite quadrants."""
    vertices, edges = {}, {}
    for k in range(length):
        vertices[k] = TreeVertex(k, 0, abs(k - length // 2), (0, None, 1, None),
                                 ("in", "out", "in", "out"), [None] * 4)
    for k in range(length - 1):
        edges[k] = TreeEdge(k, ((k, 2), (k + 1, 0)), 0)
        vertices[k].edges[2] = k
        vertices[k + 1].edges[0] = k
    return FatTreeBall(length // 2, vertices, edges)


def test_path_unfolding_is_not_scalloped():
    assert not is_tree_of_scalloped(path_ball(7))


def test_reflector_end_unsupported():
    g = FatGraph(((0, 1), (2, 3)), ((0, 2), (1, 3)), markings=(REFLECTOR_END, REFLECTOR_END))
    p = build_piece(g)
    with pytest.raises(UnsupportedMarking):
        unfold_tree(p, 1)


def test_signs():
    f = construction_7_3([family_Xn(1), family_Xn(2)])
    assert compare_signs(f, f) == (True, True)
    for i in range(2):
        g = apply_flip(f, i)
        assert compare_signs(f, g) == tuple(k != i for k in range(2))
        assert sign_of(g, i) == -sign_of(f, i)
        assert compare_signs(f, apply_flip(g, i)) == (True, True)
    with pytest.raises(IncomparableFlows):
        compare_signs(f, two_holed_torus_flow())


def test_ball_serializes(piece):
    doc = unfold_tree(piece, 1).to_dict()
    assert doc["radius"] == 1 and len(doc["vertices"]) == 5 + 12  # ball plus frontier
