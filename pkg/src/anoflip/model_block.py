"""The model block ``[-pi/2, pi/2]^2 x S^1`` and its pair of flows.

Coordinates are ``(x, y, z)`` with ``z`` in ``R/Z``.  The block field is

    x' = 0
    y' = cos(x)^2 + sin(y)^2 sin(x)^2
    z' = sign * lam * sin(x) cos(y)

Orbits enter through ``y = -pi/2`` and leave through ``y = +pi/2``; the
faces ``x = +-pi/2`` are tangent to the flow and carry the two closed
orbits at ``y = 0``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

HALF_PI = math.pi / 2
DEFAULT_LAMBDA = 10.0
HYPERBOLIC_LAMBDA_MIN = 5.0


class OutOfBlock(ValueError):
    pass


class FaceLabel(str, enum.Enum):
    INCOMING = "incoming"
    OUTGOING = "outgoing"
    TANGENT_LEFT = "tangent_left"
    TANGENT_RIGHT = "tangent_right"
    INTERIOR = "interior"


@dataclass(frozen=True)
class BlockField:
    sign: int = 1
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    @property
    def hyperbolic_regime(self) -> bool:
        return self.lam >= HYPERBOLIC_LAMBDA_MIN


@dataclass(frozen=True)
class BlockPoint:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not (-HALF_PI <= self.x <= HALF_PI and -HALF_PI <= self.y <= HALF_PI):
            raise OutOfBlock(f"({self.x}, {self.y}) outside [-pi/2, pi/2]^2")
        object.__setattr__(self, "z", self.z % 1.0)


def field_value(b: BlockField, p: BlockPoint) -> tuple[float, float, float]:
    sx, cx = math.sin(p.x), math.cos(p.x)
    sy, cy = math.sin(p.y), math.cos(p.y)
    return 0.0, cx * cx + sy * sy * sx * sx, b.sign * b.lam * sx * cy


def raw_velocity(sign: int, lam: float, x: float, y: float) -> tuple[float, float]:
    """``(dy, dz)`` without range checks, for the integrators."""
    sx = math.sin(x)
    sy = math.sin(y)
    cx = math.cos(x)
    return cx * cx + sy * sy * sx * sx, sign * lam * sx * math.cos(y)


def flip_field(b: BlockField) -> BlockField:
    return BlockField(-b.sign, b.lam)


def classify_face(p: BlockPoint, tol: float = 1e-12) -> FaceLabel:
    """Face containing ``p``; tangent faces win on edges and corners."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if abs(p.x + HALF_PI) <= tol:
        return FaceLabel.TANGENT_LEFT
    if abs(p.x - HALF_PI) <= tol:
        return FaceLabel.TANGENT_RIGHT
    if abs(p.y + HALF_PI) <= tol:
        return FaceLabel.INCOMING
    if abs(p.y - HALF_PI) <= tol:
        return FaceLabel.OUTGOING
    return FaceLabel.INTERIOR


@dataclass(frozen=True)
class ClosedOrbit:
    name: str
    x: float
    direction: int


def closed_orbits(b: BlockField) -> tuple[ClosedOrbit, ClosedOrbit]:
    """The orbits at ``x = -pi/2`` (alpha_1) and ``x = +pi/2`` (alpha_2).

    Directions are read off the z-component of the field at ``y = 0``.
    """
    out = []
    for name, x in (("alpha_1", -HALF_PI), ("alpha_2", HALF_PI)):
        dz = field_value(b, BlockPoint(x, 0.0, 0.0))[2]
        out.append(ClosedOrbit(name, x, 1 if dz > 0 else -1))
    return out[0], out[1]
