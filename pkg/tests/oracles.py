"""Slow, independent reference implementations used by the tests."""
from __future__ import annotations

import itertools
import random

import networkx as nx

from anoflip.assembly import (SWAP, EquivalenceCertificate, GluedFlow, Gluing, build_flow,
                              certificate_valid, canonical_rotation)
from anoflip.fatgraph import IN, OUT, FatGraph, FatGraphAutomorphism, random_admissible
from anoflip.seifert_piece import build_piece

# --- faces -----------------------------------------------------------------


def naive_faces(g: FatGraph) -> set[frozenset[int]]:
    """Boundary components as sets of corners, by union-find.

    Vertex ``v`` is drawn as a disk with its darts counterclockwise;
    corner ``d`` is the arc between ``d`` and its successor.  The ribbon
    side leaving corner ``d`` along the successor's edge arrives at the
    corner just before the opposite dart, so it joins corner ``d`` with
    the predecessor of ``opposite(next(d))``.
    """
    nxt, prev, opp = {}, {}, {}
    for v in g.vertices:
        for i, d in enumerate(v):
            nxt[d] = v[(i + 1) % len(v)]
            prev[d] = v[i - 1]
    for a, b in g.edges:
        opp[a], opp[b] = b, a
    parent = {d: d for d in nxt}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for d in nxt:
        e = opp[nxt[d]]
        parent[find(d)] = find(e)
    groups: dict[int, set[int]] = {}
    for d in nxt:
        groups.setdefault(find(d), set()).add(d)
    return {frozenset(s) for s in groups.values()}


# --- itineraries -----------------------------------------------------------


def naive_itineraries(f: GluedFlow, max_len: int) -> set[tuple]:
    """Simple cycles of the block-to-block graph, via networkx."""
    gl_index = {gl.source: k for k, gl in enumerate(f.gluings)}
    G = nx.DiGraph()
    label = {}
    for p, piece in enumerate(f.pieces):
        g = piece.graph
        for a, b in g.edges:
            d_in = a if g.dart_role(a) == IN else b
            d_out = g.alpha[d_in]
            out_face = g.face_of[d_out]
            k = gl_index[(p, out_face)]
            node = (p, g.edge_of[d_in])
            label[node] = k
            q, t = f.gluings[k].target
            h = f.pieces[q].graph
            for c, e in h.edges:
                c_in = c if h.dart_role(c) == IN else e
                if h.face_of[c_in] == t:
                    G.add_edge(node, (q, h.edge_of[c_in]))
    out = set()
    for cyc in nx.simple_cycles(G, length_bound=max_len):
        out.add(canonical_rotation([(p, e, label[(p, e)]) for p, e in cyc]))
    return out


# --- orbit equivalence ------------------------------------------------------


def _all_isomorphisms(src: FatGraph, dst: FatGraph) -> list[FatGraphAutomorphism]:
    """Every vertex bijection x rotation x reversal that is an isomorphism."""
    n = src.num_vertices
    if n != dst.num_vertices or sorted(map(len, src.vertices)) != sorted(map(len, dst.vertices)):
        return []
    found = []
    for vperm in itertools.permutations(range(n)):
        if any(len(src.vertices[v]) != len(dst.vertices[vperm[v]]) or
               src.markings[v] != dst.markings[vperm[v]] for v in range(n)):
            continue
        for rev in (False, True):
            for rots in itertools.product(*(range(len(src.vertices[v])) for v in range(n))):
                dm = {}
                for v in range(n):
                    sv, tv = src.vertices[v], dst.vertices[vperm[v]]
                    k = len(sv)
                    for i, d in enumerate(sv):
                        j = (rots[v] - i) % k if rev else (rots[v] + i) % k
                        dm[d] = tv[j]
                if any(dm[src.alpha[d]] != dst.alpha[dm[d]] for d in src.darts):
                    continue
                # Face roles must be mapped consistently.
                swaps = set()
                for face in src.faces:
                    e = dm[face.darts[0]]
                    if rev:
                        e = dst.alpha[e]
                    swaps.add(face.role != dst.dart_role(e))
                if len(swaps) != 1:
                    continue
                found.append(FatGraphAutomorphism(
                    tuple(vperm), tuple(sorted(dm.items())), rev, swaps.pop()))
    return found


def brute_force_equivalences(f1: GluedFlow, f2: GluedFlow) -> list[EquivalenceCertificate]:
    n = len(f1.pieces)
    if n != len(f2.pieces):
        return []
    out = []
    for perm in itertools.permutations(range(n)):
        per_piece = [_all_isomorphisms(f1.pieces[i].graph, f2.pieces[perm[i]].graph)
                     for i in range(n)]
        for maps in itertools.product(*per_piece):
            for fibers in itertools.product((1, -1), repeat=n):
                for direction in (1, -1):
                    cert = EquivalenceCertificate(tuple(perm), tuple(maps), fibers, direction)
                    if certificate_valid(f1, f2, cert):
                        out.append(cert)
    return out


# --- random flows -----------------------------------------------------------

MATRICES = (SWAP, ((1, 1), (1, 0)), ((2, 1), (1, 0)), ((1, 1), (0, -1)))


def role_swapped(g: FatGraph) -> FatGraph:
    roles = tuple(OUT if f.role == IN else IN for f in g.faces)
    return FatGraph(g.vertices, g.edges, g.markings, roles)


def random_flow(rng: random.Random, pairs: int, signs=(1, 1), lam: float = 10.0,
                same_matrix: bool = False) -> GluedFlow:
    """Two pieces over one random graph, the second with In and Out
    exchanged, so Out tori of each piece match In tori of the other."""
    g = random_admissible(rng, pairs)
    h = role_swapped(g)
    pieces = [build_piece(g, signs[0], lam), build_piece(h, signs[1], lam)]
    spec = []
    for a, b in ((0, 1), (1, 0)):
        outs = [t.index for t in pieces[a].tori if t.role == OUT]
        ins = [t.index for t in pieces[b].tori if t.role == IN]
        rng.shuffle(ins)
        for x, y in zip(outs, ins):
            m = SWAP if same_matrix else rng.choice(MATRICES)
            spec.append(Gluing((a, x), (b, y), m))
    return build_flow(pieces, spec, seed=None)
