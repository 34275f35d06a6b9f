"""Finite pieces of the orbit-space picture of a Seifert piece.

Unfolding a piece's fatgraph gives a 4-regular fat tree.  Its vertices
are corner orbits and its edges are lozenges.  Two lozenges in adjacent
quadrants at a corner share a side: a stable side when the corner
between them is an In corner, an unstable side otherwise.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .assembly import GluedFlow, IncomparableFlows
from .fatgraph import CONE, IN, REFLECTOR_END
from .seifert_piece import SeifertPiece

STABLE_SIDE = "s"
UNSTABLE_SIDE = "u"


class UnsupportedMarking(ValueError):
    pass


class NotInterior(ValueError):
    pass


@dataclass
class TreeVertex:
    id: int
    graph_vertex: int
    depth: int
    darts: tuple[int | None, ...]
    corner_roles: tuple[str | None, ...]
    edges: list[int | None] = field(default_factory=lambda: [None] * 4)


@dataclass(frozen=True)
class TreeEdge:
    id: int
    ends: tuple[tuple[int, int], tuple[int, int]]
    graph_edge: int


@dataclass(frozen=True)
class Lozenge:
    id: int
    corners: tuple[int, int]
    sides: tuple[tuple[str, int, int | None], ...]

    def partner(self, kind: str, corner: int) -> int | None:
        for k, c, other in self.sides:
            if k == kind and c == corner:
                return other
        raise KeyError((kind, corner))


@dataclass
class FatTreeBall:
    radius: int
    vertices: dict[int, TreeVertex]
    edges: dict[int, TreeEdge]

    def in_ball(self, v: int) -> bool:
        return self.vertices[v].depth <= self.radius

    def ball_vertices(self) -> list[int]:
        return [v for v in self.vertices if self.in_ball(v)]

    def interior_edges(self) -> list[int]:
        return [e for e, te in self.edges.items()
                if all(self.in_ball(v) for v, _ in te.ends)]

    def lozenge(self, e: int) -> Lozenge:
        te = self.edges[e]
        sides = []
        for v, slot in te.ends:
            tv = self.vertices[v]
            n = len(tv.darts)
            for step in (1, -1):
                corner = slot if step == 1 else (slot - 1) % n
                role = tv.corner_roles[corner]
                if role is None:
                    continue
                kind = STABLE_SIDE if role == IN else UNSTABLE_SIDE
                sides.append((kind, v, tv.edges[(slot + step) % n]))
        present = {(k, c) for k, c, _ in sides}
        for v, _ in te.ends:
            for kind in (STABLE_SIDE, UNSTABLE_SIDE):
                if (kind, v) not in present:
                    sides.append((kind, v, None))
        return Lozenge(e, tuple(v for v, _ in te.ends), tuple(sorted(sides, key=str)))

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "vertices": [
                {"id": tv.id, "graph_vertex": tv.graph_vertex, "depth": tv.depth,
                 "darts": list(tv.darts), "edges": list(tv.edges)}
                for tv in self.vertices.values()
            ],
            "edges": [{"id": te.id, "ends": [list(x) for x in te.ends],
                       "graph_edge": te.graph_edge} for te in self.edges.values()],
        }


def _lifted_slots(p: SeifertPiece, v: int) -> tuple[int, ...]:
    g = p.graph
    darts = g.vertices[v]
    if g.markings[v] == REFLECTOR_END:
        raise UnsupportedMarking(f"vertex {v} is a reflector end")
    if g.markings[v] == CONE:
        # Order-2 stabilizer: the lift sees the two darts twice.
        return darts + darts
    return darts


def unfold_tree(p: SeifertPiece, radius: int, root: int = 0) -> FatTreeBall:
    """Ball of the given radius about a lift of vertex ``root``."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    g = p.graph
    vertices: dict[int, TreeVertex] = {}
    edges: dict[int, TreeEdge] = {}

    def make_vertex(gv: int, depth: int) -> TreeVertex:
        slots = _lifted_slots(p, gv)
        roles = tuple(g.dart_role(d) for d in slots)
        tv = TreeVertex(len(vertices), gv, depth, slots, roles, [None] * len(slots))
        vertices[tv.id] = tv
        return tv

    root_v = make_vertex(root, 0)
    queue = deque([root_v])
    while queue:
        tv = queue.popleft()
        if tv.depth > radius:
            continue
        for slot, d in enumerate(tv.darts):
            if tv.edges[slot] is not None:
                continue
            back = g.alpha[d]
            child = make_vertex(g.vertex_of[back], tv.depth + 1)
            entry = child.darts.index(back)
            e = TreeEdge(len(edges), ((tv.id, slot), (child.id, entry)), g.edge_of[d])
            edges[e.id] = e
            tv.edges[slot] = e.id
            child.edges[entry] = e.id
            queue.append(child)
    return FatTreeBall(radius, vertices, edges)


def fold_back(ball: FatTreeBall) -> dict[int, set[tuple[int, ...]]]:
    """Graph vertex -> cyclic dart sequences seen at its lifts in the ball."""
    out: dict[int, set[tuple[int, ...]]] = {}
    for v in ball.ball_vertices():
        tv = ball.vertices[v]
        out.setdefault(tv.graph_vertex, set()).add(tv.darts)
    return out


def is_tree_of_scalloped(ball: FatTreeBall) -> bool:
    """Every interior lozenge shares all four of its sides."""
    if ball.radius < 2:
        raise ValueError("radius must be at least 2")
    for e in ball.interior_edges():
        for v, _ in ball.edges[e].ends:
            tv = ball.vertices[v]
            if len(tv.darts) != 4 or any(x is None for x in tv.edges):
                return False
        if any(other is None for _, _, other in ball.lozenge(e).sides):
            return False
    return True


def _extend(ball: FatTreeBall, start: int, corner: int, kind: str) -> list[int]:
    line = []
    cur, at = start, corner
    while ball.in_ball(at):
        nxt = ball.lozenge(cur).partner(kind, at)
        if nxt is None or nxt in line or nxt == start:
            break
        line.append(nxt)
        a, b = ball.edges[nxt].ends
        at = b[0] if a[0] == at else a[0]
        cur = nxt
    return line


def scalloped_lines_through(lozenge: int, ball: FatTreeBall) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """The two maximal lines of lozenges through ``lozenge``, truncated to
    the ball: one crossing its stable sides, one its unstable sides."""
    ends = ball.edges[lozenge].ends
    if not all(ball.in_ball(v) for v, _ in ends):
        raise NotInterior(f"lozenge {lozenge} touches the truncation boundary")
    x, y = ends[0][0], ends[1][0]
    lines = []
    for kind in (STABLE_SIDE, UNSTABLE_SIDE):
        back = _extend(ball, lozenge, x, kind)
        fwd = _extend(ball, lozenge, y, kind)
        lines.append(tuple(reversed(back)) + (lozenge,) + tuple(fwd))
    return lines[0], lines[1]


def sign_of(flow: GluedFlow, piece_index: int) -> int:
    return flow.signs[piece_index]


def compare_signs(f1: GluedFlow, f2: GluedFlow) -> tuple[bool, ...]:
    if f1.underlying() != f2.underlying():
        raise IncomparableFlows("flows do not share pieces and gluings")
    return tuple(a == b for a, b in zip(f1.signs, f2.signs))
