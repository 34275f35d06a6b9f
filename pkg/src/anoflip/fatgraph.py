"""Ribbon graphs with In/Out boundary data.

A fatgraph is stored as a set of integer darts (half-edges) with two
permutations: ``sigma`` (the cyclic order of darts at each vertex) and
``alpha`` (the fixed-point free involution pairing the two darts of an
edge).  Boundary faces are the orbits of ``alpha * sigma``; dart ``d``
stands for the edge-side lying to the left of ``d`` when walking away
from its vertex.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

REGULAR = "regular"
CONE = "cone"
REFLECTOR_END = "reflector_end"
MARKINGS = (REGULAR, CONE, REFLECTOR_END)

IN = "in"
OUT = "out"

SCHEMA_VERSION = 1


class MalformedGraph(ValueError):
    """Dangling, duplicated or unpaired darts."""


class DegenerateLattice(ValueError):
    pass


def other_role(role: str) -> str:
    return OUT if role == IN else IN


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.where}"


@dataclass(frozen=True)
class BoundaryFace:
    """One boundary component: a cyclic sequence of edge-sides."""

    index: int
    darts: tuple[int, ...]
    cells: tuple[tuple[int, int], ...]
    role: str | None

    @property
    def length(self) -> int:
        return len(self.darts)


@dataclass(frozen=True)
class FatGraph:
    vertices: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    markings: tuple[str, ...] = ()
    roles: tuple[str, ...] | None = None

    def __post_init__(self):
        vertices = tuple(tuple(int(d) for d in v) for v in self.vertices)
        edges = tuple(tuple(sorted((int(a), int(b)))) for a, b in self.edges)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        markings = tuple(self.markings) or (REGULAR,) * len(vertices)
        if len(markings) != len(vertices):
            raise MalformedGraph("one marking per vertex required")
        for m in markings:
            if m not in MARKINGS:
                raise MalformedGraph(f"unknown vertex marking {m!r}")
        object.__setattr__(self, "markings", markings)
        if self.roles is not None:
            object.__setattr__(self, "roles", tuple(self.roles))
        self._check_structure()

    def _check_structure(self) -> None:
        at_vertex: dict[int, int] = {}
        for i, v in enumerate(self.vertices):
            for d in v:
                if d in at_vertex:
                    raise MalformedGraph(f"dart {d} appears twice in vertex cyclic orders")
                at_vertex[d] = i
        in_edge: dict[int, int] = {}
        for k, (a, b) in enumerate(self.edges):
            if a == b:
                raise MalformedGraph(f"edge {k} pairs dart {a} with itself")
            for d in (a, b):
                if d in in_edge:
                    raise MalformedGraph(f"dart {d} belongs to two edges")
                in_edge[d] = k
        dangling = set(at_vertex) ^ set(in_edge)
        if dangling:
            raise MalformedGraph(f"dangling darts {sorted(dangling)}")

    # --- permutations -------------------------------------------------

    @cached_property
    def darts(self) -> tuple[int, ...]:
        return tuple(sorted(d for v in self.vertices for d in v))

    @cached_property
    def sigma(self) -> dict[int, int]:
        out = {}
        for v in self.vertices:
            for i, d in enumerate(v):
                out[d] = v[(i + 1) % len(v)]
        return out

    @cached_property
    def sigma_inv(self) -> dict[int, int]:
        return {b: a for a, b in self.sigma.items()}

    @cached_property
    def alpha(self) -> dict[int, int]:
        out = {}
        for a, b in self.edges:
            out[a], out[b] = b, a
        return out

    @cached_property
    def vertex_of(self) -> dict[int, int]:
        return {d: i for i, v in enumerate(self.vertices) for d in v}

    @cached_property
    def edge_of(self) -> dict[int, int]:
        return {d: k for k, e in enumerate(self.edges) for d in e}

    def side_of(self, d: int) -> int:
        return self.edges[self.edge_of[d]].index(d)

    def valence(self, v: int) -> int:
        return len(self.vertices[v])

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def faces(self) -> tuple[BoundaryFace, ...]:
        return tuple(trace_boundary_faces(self))

    @cached_property
    def face_of(self) -> dict[int, int]:
        return {d: f.index for f in self.faces for d in f.darts}

    def dart_role(self, d: int) -> str:
        return self.faces[self.face_of[d]].role

    def components(self) -> list[list[int]]:
        """Connected components as sorted vertex lists."""
        seen: set[int] = set()
        comps = []
        for start in range(self.num_vertices):
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                v = stack.pop()
                comp.append(v)
                for d in self.vertices[v]:
                    w = self.vertex_of[self.alpha[d]]
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges

    def genus(self) -> int:
        """Genus of the thickened surface (connected graphs only)."""
        return (2 - self.euler_characteristic() - len(self.faces)) // 2

    # --- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "vertices": [{"id": i, "darts": list(v)} for i, v in enumerate(self.vertices)],
            "edges": [list(e) for e in self.edges],
            "markings": {str(i): m for i, m in enumerate(self.markings)},
        }
        if self.roles is not None:
            out["roles"] = {str(i): r for i, r in enumerate(self.roles)}
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "FatGraph":
        try:
            verts = sorted(data["vertices"], key=lambda v: int(v["id"]))
            ids = [int(v["id"]) for v in verts]
            if ids != list(range(len(ids))):
                raise MalformedGraph("vertex ids must be 0..n-1")
            marks = data.get("markings") or {}
            markings = tuple(marks.get(str(i), REGULAR) for i in ids)
            roles = data.get("roles")
            if roles is not None:
                roles = tuple(roles[str(i)] for i in range(len(roles)))
            return cls(
                vertices=tuple(tuple(v["darts"]) for v in verts),
                edges=tuple(tuple(e) for e in data["edges"]),
                markings=markings,
                roles=roles,
            )
        except (KeyError, TypeError) as exc:
            raise MalformedGraph(f"bad fatgraph document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FatGraph":
        return cls.from_dict(json.loads(text))


# --- faces ----------------------------------------------------------------


def _orbits(darts: Sequence[int], step: Mapping[int, int]) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    out = []
    for d in darts:
        if d in seen:
            continue
        cyc = []
        x = d
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = step[x]
        out.append(tuple(cyc))
    return out


def _derive_roles(g: FatGraph, orbits: list[tuple[int, ...]]) -> tuple[str, ...] | None:
    """2-colour faces so that the two sides of each edge differ.

    The face holding the least dart of each connected component is In.
    Returns None when no such colouring exists.
    """
    face_of = {d: i for i, f in enumerate(orbits) for d in f}
    roles: list[str | None] = [None] * len(orbits)
    for i, f in enumerate(orbits):
        if roles[i] is not None:
            continue
        roles[i] = IN
        stack = [i]
        while stack:
            j = stack.pop()
            for d in orbits[j]:
                k = face_of[g.alpha[d]]
                want = other_role(roles[j])
                if roles[k] is None:
                    roles[k] = want
                    stack.append(k)
                elif roles[k] != want:
                    return None
    return tuple(roles)


def trace_boundary_faces(g: FatGraph) -> list[BoundaryFace]:
    """Trace boundary components, each starting at its least dart."""
    step = {d: g.alpha[g.sigma[d]] for d in g.darts}
    orbits = _orbits(g.darts, step)
    roles = g.roles if g.roles is not None else _derive_roles(g, orbits)
    if roles is not None and len(roles) != len(orbits):
        raise MalformedGraph(f"{len(roles)} roles supplied for {len(orbits)} faces")
    faces = []
    for i, orb in enumerate(orbits):
        cells = tuple((g.edge_of[d], g.side_of(d)) for d in orb)
        faces.append(BoundaryFace(i, orb, cells, None if roles is None else roles[i]))
    return faces


def validate_admissible(g: FatGraph) -> list[Violation]:
    """Check the three admissibility conditions; empty list means ok."""
    out = []
    for i, v in enumerate(g.vertices):
        if len(v) % 2:
            out.append(Violation("odd_valence", f"vertex {i} has valence {len(v)}"))
    faces = g.faces
    face_of = g.face_of
    for k, (a, b) in enumerate(g.edges):
        fa, fb = face_of[a], face_of[b]
        if fa == fb:
            out.append(Violation("same_face_sides", f"edge {k} has both sides on face {fa}"))
        elif faces[fa].role is not None and faces[fa].role == faces[fb].role:
            out.append(
                Violation("same_role_sides", f"edge {k} has both sides on {faces[fa].role} faces")
            )
    if faces and faces[0].role is None and not any(x.kind == "same_face_sides" for x in out):
        out.append(Violation("no_partition", "faces admit no In/Out partition"))
    for f in faces:
        if f.length % 2:
            out.append(Violation("odd_face", f"face {f.index} has {f.length} edge-sides"))
    return out


def is_admissible(g: FatGraph) -> bool:
    return not validate_admissible(g)


# --- automorphisms --------------------------------------------------------


@dataclass(frozen=True)
class FatGraphAutomorphism:
    """A fatgraph isomorphism ``source -> target`` given on darts.

    With ``reversing`` set the map sends every cyclic order to its
    reverse; ``swaps_roles`` records whether In faces go to Out faces.
    The same type is used for isomorphisms between distinct graphs.
    """

    vertex_map: tuple[int, ...]
    dart_map: tuple[tuple[int, int], ...]
    reversing: bool = False
    swaps_roles: bool = False

    @cached_property
    def darts(self) -> dict[int, int]:
        return dict(self.dart_map)

    def __call__(self, d: int) -> int:
        return self.darts[d]

    @property
    def key(self) -> tuple:
        return (self.reversing, self.swaps_roles, tuple(b for _, b in self.dart_map))

    def compose(self, other: "FatGraphAutomorphism") -> "FatGraphAutomorphism":
        """``self o other``: apply ``other`` first."""
        dm = tuple((d, self.darts[other.darts[d]]) for d, _ in other.dart_map)
        vm = tuple(self.vertex_map[w] for w in other.vertex_map)
        return FatGraphAutomorphism(
            vm, dm, self.reversing != other.reversing, self.swaps_roles != other.swaps_roles
        )

    def inverse(self) -> "FatGraphAutomorphism":
        dm = tuple(sorted((b, a) for a, b in self.dart_map))
        vm = [0] * len(self.vertex_map)
        for v, w in enumerate(self.vertex_map):
            vm[w] = v
        return FatGraphAutomorphism(tuple(vm), dm, self.reversing, self.swaps_roles)

    def is_identity(self) -> bool:
        return not self.reversing and all(a == b for a, b in self.dart_map)

    def order(self) -> int:
        k, power = 1, self
        while not power.is_identity():
            power = self.compose(power)
            k += 1
        return k

    def face_image(self, source: FatGraph, target: FatGraph, face: int) -> int:
        d = source.faces[face].darts[0]
        e = self.darts[d]
        if self.reversing:
            e = target.alpha[e]
        return target.face_of[e]

    def to_dict(self) -> dict:
        return {
            "vertex_map": list(self.vertex_map),
            "dart_map": {str(a): b for a, b in self.dart_map},
            "orientation": "reversing" if self.reversing else "preserving",
            "roles": "swap" if self.swaps_roles else "keep",
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FatGraphAutomorphism":
        dm = tuple(sorted((int(a), int(b)) for a, b in data["dart_map"].items()))
        return cls(
            tuple(data["vertex_map"]),
            dm,
            data["orientation"] == "reversing",
            data["roles"] == "swap",
        )


def _extend(src: FatGraph, dst: FatGraph, seed: int, image: int,
            reversing: bool, partial: dict[int, int], used: set[int]) -> dict[int, int] | None:
    """Propagate ``seed -> image`` through the component of ``seed``.

    Returns the new assignments or None on conflict.
    """
    rot = dst.sigma_inv if reversing else dst.sigma
    new: dict[int, int] = {}

    def assign(d, e):
        cur = partial.get(d, new.get(d))
        if cur is not None:
            return cur == e
        if e in used or e in new.values():
            return False
        new[d] = e
        stack.append(d)
        return True

    stack: list[int] = []
    if not assign(seed, image):
        return None
    while stack:
        d = stack.pop()
        e = new[d]
        if not assign(src.sigma[d], rot[e]):
            return None
        if not assign(src.alpha[d], dst.alpha[e]):
            return None
    return new


def _finish(src: FatGraph, dst: FatGraph, mapping: dict[int, int],
            reversing: bool) -> FatGraphAutomorphism | None:
    vmap = [0] * src.num_vertices
    for i, v in enumerate(src.vertices):
        w = dst.vertex_of[mapping[v[0]]]
        if src.markings[i] != dst.markings[w]:
            return None
        vmap[i] = w
    swaps = set()
    for f in src.faces:
        e = mapping[f.darts[0]]
        if reversing:
            e = dst.alpha[e]
        r = dst.faces[dst.face_of[e]].role
        if f.role is None or r is None:
            swaps.add(False)
        else:
            swaps.add(f.role != r)
    if len(swaps) != 1:
        return None
    return FatGraphAutomorphism(
        tuple(vmap), tuple(sorted(mapping.items())), reversing, swaps.pop()
    )


def isomorphisms(src: FatGraph, dst: FatGraph, allow_reversal: bool = False,
                 allow_role_swap: bool = False) -> list[FatGraphAutomorphism]:
    """All fatgraph isomorphisms ``src -> dst``, canonically ordered.

    Backtracks over the image of the least dart of each component of
    ``src``; the image of a single dart determines its whole component.
    """
    if (len(src.darts) != len(dst.darts)
            or sorted(map(len, src.vertices)) != sorted(map(len, dst.vertices))):
        return []
    found: list[FatGraphAutomorphism] = []
    seeds = [src.vertices[c[0]][0] for c in src.components()]
    for reversing in ((False, True) if allow_reversal else (False,)):
        def search(i: int, partial: dict[int, int], used: set[int]):
            if i == len(seeds):
                aut = _finish(src, dst, partial, reversing)
                if aut is not None and (allow_role_swap or not aut.swaps_roles):
                    found.append(aut)
                return
            seed = seeds[i]
            val = len(src.vertices[src.vertex_of[seed]])
            for image in dst.darts:
                if image in used or len(dst.vertices[dst.vertex_of[image]]) != val:
                    continue
                new = _extend(src, dst, seed, image, reversing, partial, used)
                if new is None:
                    continue
                search(i + 1, {**partial, **new}, used | set(new.values()))

        search(0, {}, set())
    found.sort(key=lambda a: a.key)
    return found


def automorphisms(g: FatGraph, allow_reversal: bool = False,
                  allow_role_swap: bool = False) -> list[FatGraphAutomorphism]:
    return isomorphisms(g, g, allow_reversal, allow_role_swap)


def are_isomorphic(g: FatGraph, h: FatGraph) -> bool:
    """Isomorphic as fatgraphs, allowing orientation reversal and role swap."""
    return bool(isomorphisms(g, h, True, True))


# --- lattice quotients ----------------------------------------------------

EAST, NORTH, WEST, SOUTH = range(4)


def _hermite_basis(v1: tuple[int, int], v2: tuple[int, int]) -> tuple[int, int, int]:
    """Basis ``(d1, 0), (t, d2)`` of the lattice spanned by ``v1, v2``."""
    det = v1[0] * v2[1] - v1[1] * v2[0]
    if det == 0:
        raise DegenerateLattice(f"{v1} and {v2} are linearly dependent")
    (a1, b1), (a2, b2) = v1, v2
    g, u, w = _xgcd(b1, b2)
    if g < 0:
        g, u, w = -g, -u, -w
    t = u * a1 + w * a2
    d1 = abs(det) // g
    return d1, t % d1, g


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _xgcd(b, a % b)
    return g, y, x - (a // b) * y


def lattice_quotient_graph(v1: Sequence[int], v2: Sequence[int],
                           reversed_vertices: Iterable[tuple[int, int]] = ()) -> FatGraph:
    """Square-grid fatgraph of the plane modulo the lattice ``<v1, v2>``.

    Grid vertices sit at half-integer points; the integer point ``(i, j)``
    below-left of a vertex names it.  Each vertex carries darts
    ``4n + EAST, NORTH, WEST, SOUTH`` in counterclockwise order, except
    those listed in ``reversed_vertices`` (given by representative),
    whose cyclic order is reversed.
    """
    d1, t, d2 = _hermite_basis(tuple(v1), tuple(v2))

    def reduce(i: int, j: int) -> tuple[int, int]:
        q = j // d2
        return (i - q * t) % d1, j - q * d2

    reps = sorted(((i, j) for j in range(d2) for i in range(d1)), key=lambda p: (p[1], p[0]))
    index = {p: n for n, p in enumerate(reps)}
    flipped = {reduce(*p) for p in reversed_vertices}
    vertices = []
    for n, p in enumerate(reps):
        order = (EAST, NORTH, WEST, SOUTH) if p not in flipped else (EAST, SOUTH, WEST, NORTH)
        vertices.append(tuple(4 * n + k for k in order))
    edges = []
    for n, (i, j) in enumerate(reps):
        east = index[reduce(i + 1, j)]
        north = index[reduce(i, j + 1)]
        edges.append((4 * n + EAST, 4 * east + WEST))
        edges.append((4 * n + NORTH, 4 * north + SOUTH))
    return FatGraph(tuple(vertices), tuple(edges))


def two_holed_torus_example() -> FatGraph:
    """Two vertices, four edges, two boundary faces."""
    return lattice_quotient_graph((2, 0), (1, 1))


XN_WIDTH = 4
XN_TOP_ROWS = 4


def family_Xn(n: int) -> FatGraph:
    """Torus grid of ``XN_WIDTH`` columns and ``XN_TOP_ROWS + 2n`` rows of
    squares, with the cyclic order reversed at the vertex at the origin.

    Reversing one vertex merges the four squares around it into two
    octagonal faces, so that vertex is the only one not touching a
    quadrilateral face.  Width and row counts differ for every ``n``,
    which keeps the grid free of diagonal symmetries.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rows = XN_TOP_ROWS + 2 * n
    return lattice_quotient_graph((XN_WIDTH, 0), (0, rows), reversed_vertices=[(0, 0)])


def special_vertices(g: FatGraph) -> list[int]:
    """Vertices not adjacent to any boundary face of length 4."""
    return [
        i for i, v in enumerate(g.vertices)
        if all(g.faces[g.face_of[d]].length != 4 for d in v)
    ]


def invariant_vertex(g: FatGraph) -> int:
    """The unique vertex fixed by every automorphism of an X_n graph."""
    cands = special_vertices(g)
    if len(cands) != 1:
        raise ValueError(f"expected one special vertex, found {cands}")
    return cands[0]


# --- random admissible graphs ----------------------------------------------


def random_admissible(rng: random.Random, pairs: int) -> FatGraph:
    """Random connected admissible 4-valent fatgraph on ``2 * pairs`` vertices.

    Vertices come in two colour classes.  Each vertex alternates darts
    of type A and B around its cyclic order, and every edge joins an A
    dart to a B dart across the two classes; this makes faces
    homogeneous in type (hence In/Out-colourable) and of even length.
    """
    while True:
        black, white = list(range(pairs)), list(range(pairs, 2 * pairs))
        vertices = [tuple(4 * n + k for k in range(4)) for n in range(2 * pairs)]
        a_black = [4 * n + k for n in black for k in (0, 2)]
        b_black = [4 * n + k for n in black for k in (1, 3)]
        a_white = [4 * n + k for n in white for k in (0, 2)]
        b_white = [4 * n + k for n in white for k in (1, 3)]
        rng.shuffle(b_white)
        rng.shuffle(a_white)
        edges = list(zip(a_black, b_white)) + list(zip(b_black, a_white))
        g = FatGraph(tuple(vertices), tuple(edges))
        if len(g.components()) == 1:
            return g


def relabel(g: FatGraph, perm: Mapping[int, int]) -> FatGraph:
    """Rename darts by ``perm``, keeping vertex order."""
    return FatGraph(
        tuple(tuple(perm[d] for d in v) for v in g.vertices),
        tuple((perm[a], perm[b]) for a, b in g.edges),
        g.markings,
        None,
    )

