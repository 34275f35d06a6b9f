"""Periodic Seifert pieces assembled from model blocks along a fatgraph.

Every edge of the fatgraph carries one block.  A dart whose left side
is an Out face is the ``x = -pi/2`` end (alpha_1) of its block; the
other dart of the edge is the ``x = +pi/2`` end (alpha_2).  Each block
is glued into the product ``Sigma x S^1`` with its z-axis either along
the global fiber or against it (``edge_z``), and adjacent half-faces
at a vertex are glued by ``z -> -z`` (plus a half-turn shift on the
unstable side at cone points, or a half-turn self-gluing at reflector
ends).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .fatgraph import CONE, IN, OUT, REFLECTOR_END, REGULAR, FatGraph, validate_admissible
from .model_block import DEFAULT_LAMBDA

STABLE = "stable"
UNSTABLE = "unstable"
FIBER_CLASS = (0, 1)
LOOP_CLASS = (1, 0)
REQUIRED_VALENCE = {REGULAR: 4, CONE: 2, REFLECTOR_END: 2}


class InvalidValence(ValueError):
    pass


class InconsistentOrientation(ValueError):
    pass


class NotAdmissible(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(map(str, self.violations)))


@dataclass(frozen=True)
class ZMap:
    """``z -> sign * z + shift`` on ``R/Z``."""

    sign: int
    shift: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "shift", Fraction(self.shift) % 1)

    def then(self, other: "ZMap") -> "ZMap":
        """Apply ``self`` first, then ``other``."""
        return ZMap(self.sign * other.sign, other.sign * self.shift + other.shift)

    def is_identity(self) -> bool:
        return self.sign == 1 and self.shift == 0


IDENTITY_Z = ZMap(1)


@dataclass(frozen=True)
class HalfFaceGluing:
    vertex: int
    source_dart: int
    target_dart: int
    kind: str
    zmap: ZMap


@dataclass(frozen=True)
class LaminationLeaf:
    vertex: int
    corner_dart: int
    kind: str
    homology: tuple[int, int] = FIBER_CLASS


@dataclass(frozen=True)
class BoundaryTorus:
    index: int
    cells: tuple[tuple[int, int], ...]
    role: str
    leaves: tuple[LaminationLeaf, ...]
    h1_basis: tuple[tuple[int, int], tuple[int, int]] = (LOOP_CLASS, FIBER_CLASS)


@dataclass(frozen=True)
class Annulus:
    edge: int
    alpha1_vertex: int
    alpha2_vertex: int
    z_orientation: int


@dataclass(frozen=True)
class SpineOrbit:
    vertex: int
    direction: int
    marking: str


@dataclass(frozen=True)
class Spine:
    annuli: tuple[Annulus, ...]
    orbits: tuple[SpineOrbit, ...]


@dataclass(frozen=True)
class SeifertPiece:
    graph: FatGraph
    block_sign: int
    lam: float
    orbit_dir: tuple[int, ...]
    edge_z: tuple[int, ...]
    tori: tuple[BoundaryTorus, ...]
    gluings: tuple[HalfFaceGluing, ...]
    monodromy: tuple[ZMap, ...]

    @property
    def is_regular(self) -> bool:
        return all(m == REGULAR for m in self.graph.markings)

    def torus_role(self, t: int) -> str:
        return self.tori[t].role

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "fatgraph": self.graph.to_dict(),
            "block_sign": self.block_sign,
            "lambda": self.lam,
            "orbit_dir": list(self.orbit_dir),
            "boundary_tori": [
                {
                    "index": t.index,
                    "role": t.role,
                    "cells": [list(c) for c in t.cells],
                    "h1_basis": [list(b) for b in t.h1_basis],
                    "leaves": [[lf.vertex, lf.corner_dart, lf.kind] for lf in t.leaves],
                }
                for t in self.tori
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SeifertPiece":
        piece = build_piece(
            FatGraph.from_dict(data["fatgraph"]),
            int(data.get("block_sign", 1)),
            float(data.get("lambda", DEFAULT_LAMBDA)),
        )
        if "orbit_dir" in data and list(data["orbit_dir"]) != list(piece.orbit_dir):
            raise InconsistentOrientation("stored orbit directions disagree with the rebuild")
        return piece

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _is_alpha1_end(g: FatGraph, d: int) -> bool:
    return g.dart_role(d) == OUT


def build_piece(g: FatGraph, block_sign: int = 1, lam: float = DEFAULT_LAMBDA) -> SeifertPiece:
    if block_sign not in (1, -1):
        raise ValueError("block_sign must be +1 or -1")
    violations = validate_admissible(g)
    if violations:
        raise NotAdmissible(violations)
    for v, marking in enumerate(g.markings):
        if g.valence(v) != REQUIRED_VALENCE[marking]:
            raise InvalidValence(
                f"vertex {v} marked {marking} has valence {g.valence(v)}, "
                f"needs {REQUIRED_VALENCE[marking]}"
            )

    # Reference orientation: the least vertex of each component runs
    # positively along the fiber for block_sign = +1.  Across every
    # block the two end orbits run in opposite fiber directions.
    colour: dict[int, int] = {}
    for comp in g.components():
        colour[comp[0]] = 1
        stack = [comp[0]]
        while stack:
            v = stack.pop()
            for d in g.vertices[v]:
                w = g.vertex_of[g.alpha[d]]
                if w == v:
                    raise InconsistentOrientation(f"edge {g.edge_of[d]} is a loop at vertex {v}")
                if w not in colour:
                    colour[w] = -colour[v]
                    stack.append(w)
                elif colour[w] == colour[v]:
                    raise InconsistentOrientation(
                        f"orbits at adjacent vertices {v} and {w} would run the same way"
                    )

    edge_z = []
    for a, b in g.edges:
        end1 = a if _is_alpha1_end(g, a) else b
        # alpha_1 of X+ runs along -z, so z agrees with the fiber iff the
        # orbit there runs against the fiber.
        edge_z.append(-colour[g.vertex_of[end1]])
    edge_z = tuple(edge_z)

    gluings = []
    monodromy = []
    for v, darts in enumerate(g.vertices):
        marking = g.markings[v]
        total = IDENTITY_Z
        for i, d in enumerate(darts):
            nxt = darts[(i + 1) % len(darts)]
            kind = STABLE if g.dart_role(d) == IN else UNSTABLE
            if edge_z[g.edge_of[d]] != -edge_z[g.edge_of[nxt]]:
                raise InconsistentOrientation(f"z-flip parity fails at vertex {v}")
            if marking == REFLECTOR_END and kind == UNSTABLE:
                zm = ZMap(1, Fraction(1, 2))
                gluings.append(HalfFaceGluing(v, d, d, kind, zm))
                gluings.append(HalfFaceGluing(v, nxt, nxt, kind, zm))
                continue
            shift = Fraction(1, 2) if (marking == CONE and kind == UNSTABLE) else Fraction(0)
            zm = ZMap(-1, shift)
            gluings.append(HalfFaceGluing(v, d, nxt, kind, zm))
            total = total.then(zm)
        if marking == REFLECTOR_END:
            total = ZMap(1, Fraction(1, 2))
        if marking == REGULAR and not total.is_identity():
            raise InconsistentOrientation(f"gluings around vertex {v} do not close up")
        monodromy.append(total)

    tori = []
    for f in g.faces:
        kind = STABLE if f.role == IN else UNSTABLE
        leaves = tuple(LaminationLeaf(g.vertex_of[d], d, kind) for d in f.darts)
        tori.append(BoundaryTorus(f.index, f.cells, f.role, leaves))

    orbit_dir = tuple(block_sign * colour[v] for v in range(g.num_vertices))
    return SeifertPiece(g, block_sign, float(lam), orbit_dir, edge_z, tuple(tori),
                        tuple(gluings), tuple(monodromy))


def flip_piece(p: SeifertPiece) -> SeifertPiece:
    return SeifertPiece(
        p.graph, -p.block_sign, p.lam, tuple(-d for d in p.orbit_dir), p.edge_z,
        p.tori, p.gluings, p.monodromy,
    )


def piece_transit(p: SeifertPiece) -> tuple[tuple[tuple[int, int], tuple[int, int]], ...]:
    """Pairs ``(in-cell, out-cell)``: an orbit entering a block leaves the same block."""
    g = p.graph
    out = []
    for d in g.darts:
        if g.dart_role(d) == IN:
            e = g.alpha[d]
            out.append(((g.edge_of[d], g.side_of(d)), (g.edge_of[e], g.side_of(e))))
    return tuple(sorted(out))


def spine(p: SeifertPiece) -> Spine:
    g = p.graph
    annuli = []
    for k, (a, b) in enumerate(g.edges):
        end1, end2 = (a, b) if _is_alpha1_end(g, a) else (b, a)
        annuli.append(Annulus(k, g.vertex_of[end1], g.vertex_of[end2], p.edge_z[k]))
    orbits = tuple(SpineOrbit(v, p.orbit_dir[v], g.markings[v]) for v in range(g.num_vertices))
    return Spine(tuple(annuli), orbits)
