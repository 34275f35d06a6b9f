import random

import pytest

from anoflip.fatgraph import (CONE, IN, OUT, FatGraph, FatGraphAutomorphism, MalformedGraph,
                              DegenerateLattice, are_isomorphic, automorphisms, family_Xn,
                              invariant_vertex, is_admissible, isomorphisms,
                              lattice_quotient_graph, random_admissible, relabel,
                              special_vertices, trace_boundary_faces, two_holed_torus_example,
                              validate_admissible)

from oracles import naive_faces


def kinds(g):
    return {v.kind for v in validate_admissible(g)}


def test_two_holed_torus_is_admissible():
    g = two_holed_torus_example()
    assert validate_admissible(g) == []
    assert (g.num_vertices, g.num_edges) == (2, 4)


def test_trivalent_vertex_has_odd_valence():
    g = FatGraph(((0, 1, 2), (3, 4, 5)), ((0, 3), (1, 4), (2, 5)))
    assert "odd_valence" in kinds(g)


def test_loops_with_both_sides_on_one_face():
    # Two interleaved loops at one vertex: a single boundary face.
    g = FatGraph(((0, 1, 2, 3),), ((0, 2), (1, 3)))
    assert len(g.faces) == 1
    assert "same_face_sides" in kinds(g)


def test_single_loop_has_odd_faces():
    g = FatGraph(((0, 1),), ((0, 1),))
    assert "odd_face" in kinds(g)


def test_two_holed_torus_faces_and_euler():
    g = two_holed_torus_example()
    faces = trace_boundary_faces(g)
    assert len(faces) == 2
    assert g.euler_characteristic() == -2
    assert g.genus() == 1
    assert {f.role for f in faces} == {IN, OUT}


@pytest.mark.parametrize("n", [1, 2])
def test_xn_faces_match_naive_tracer(n):
    g = family_Xn(n)
    assert {frozenset(f.darts) for f in g.faces} == naive_faces(g)


def test_faces_partition_edge_sides():
    g = family_Xn(1)
    cells = [c for f in g.faces for c in f.cells]
    assert sorted(cells) == sorted((k, s) for k in range(g.num_edges) for s in (0, 1))


@pytest.mark.parametrize("v1,v2,nv,ne", [
    ((2, 0), (1, 1), 2, 4),
    ((1, 0), (0, 1), 1, 2),
    ((2, 0), (0, 2), 4, 8),
    ((3, 1), (1, 2), 5, 10),
])
def test_lattice_quotient_counts(v1, v2, nv, ne):
    g = lattice_quotient_graph(v1, v2)
    assert (g.num_vertices, g.num_edges) == (nv, ne)
    # Orbit-counting oracle: |det| vertices, two edge orbits per vertex.
    assert nv == abs(v1[0] * v2[1] - v1[1] * v2[0])


def test_degenerate_lattice():
    with pytest.raises(DegenerateLattice):
        lattice_quotient_graph((1, 2), (2, 4))


def test_malformed_graphs():
    with pytest.raises(MalformedGraph):
        FatGraph(((0, 1),), ((0, 2),))
    with pytest.raises(MalformedGraph):
        FatGraph(((0, 0),), ((0, 1),))
    with pytest.raises(MalformedGraph):
        FatGraph(((0, 1),), ((0, 1),), markings=("weird",))


def test_automorphisms_contain_identity():
    for g in (two_holed_torus_example(), family_Xn(1)):
        auts = automorphisms(g, True, True)
        assert any(a.is_identity() for a in auts)


def test_order_four_automorphism_of_two_holed_torus():
    g = two_holed_torus_example()
    auts = automorphisms(g, False, False)
    hits = [a for a in auts if a.order() == 4 and a.vertex_map == (1, 0)
            and all(a.face_image(g, g, f.index) == f.index for f in g.faces)]
    assert hits


def test_automorphism_group_closure():
    g = two_holed_torus_example()
    auts = automorphisms(g, True, True)
    keys = {a.key for a in auts}
    for a in auts:
        assert a.inverse().key in keys
        for b in auts:
            assert a.compose(b).key in keys


def test_xn_admissible_with_unique_special_vertex():
    for n in (1, 2, 3):
        g = family_Xn(n)
        assert is_admissible(g)
        assert len(special_vertices(g)) == 1
        v = invariant_vertex(g)
        for a in automorphisms(g, True, True):
            assert a.vertex_map[v] == v


def test_xn_pairwise_non_isomorphic():
    graphs = [family_Xn(n) for n in (1, 2, 3)]
    for i in range(3):
        for j in range(3):
            assert are_isomorphic(graphs[i], graphs[j]) == (i == j)


def test_xn_rejects_nonpositive():
    with pytest.raises(ValueError):
        family_Xn(0)


def test_relabelled_graph_is_isomorphic():
    rng = random.Random(5)
    g = random_admissible(rng, 2)
    darts = list(g.darts)
    image = darts[:]
    rng.shuffle(image)
    h = relabel(g, dict(zip(darts, image)))
    assert isomorphisms(g, h, allow_role_swap=True)


def test_json_round_trip_with_markings():
    g = FatGraph(((0, 1), (2, 3)), ((0, 2), (1, 3)), markings=(CONE, CONE))
    assert FatGraph.from_json(g.to_json()) == g
    doc = g.to_dict()
    assert doc["schema_version"] == 1


def test_automorphism_dict_round_trip():
    g = two_holed_torus_example()
    for a in automorphisms(g, True, True):
        assert FatGraphAutomorphism.from_dict(a.to_dict()) == a
