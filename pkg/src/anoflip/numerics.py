"""Numerical experiments on the model block.

Integration is fixed-step RK4 in ``(y, z)`` (``x`` is constant along
orbits), with the face-crossing time refined by bisection.  The cone
check composes the block transit map with a boundary gluing and
measures, by central differences in the flat ``(x, z)`` chart, how much
it stretches vectors in a thin cone around the image of the fiber.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .model_block import HALF_PI, BlockField, BlockPoint, FaceLabel, raw_velocity

EXIT_TOL = 1e-10
ASYMPTOTIC_EPS = 1e-3
FD_STEP = 1e-5
DEFAULT_DT = 1e-3
DEFAULT_T_MAX = 2500.0
X_TOL = 1e-12

Matrix = tuple[tuple[int, int], tuple[int, int]]


class FiberPreservingGluing(ValueError):
    """The gluing sends the fiber to +-fiber (reported as FiberGluedToFiber)."""

    kind = "FiberGluedToFiber"

    def __init__(self, matrix):
        self.matrix = matrix
        super().__init__(f"FiberGluedToFiber: {matrix} maps (0, 1) to +-(0, 1)")


FiberGluedToFiber = FiberPreservingGluing


@dataclass(frozen=True)
class ExitFace:
    face: FaceLabel
    point: BlockPoint
    time: float


@dataclass(frozen=True)
class AsymptoticToOrbit:
    orbit: str


@dataclass(frozen=True)
class Budget:
    time: float


@dataclass
class Trajectory:
    """Samples ``(t, x, y, z_unwrapped)``; ``points`` gives block points."""

    samples: list[tuple[float, float, float, float]]
    termination: ExitFace | AsymptoticToOrbit | Budget

    @property
    def points(self) -> list[tuple[float, BlockPoint]]:
        return [(t, BlockPoint(x, _clamp(y), z)) for t, x, y, z in self.samples]

    @property
    def delta_z(self) -> float:
        return self.samples[-1][3] - self.samples[0][3]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "z_unwrapped"])
        for row in self.samples:
            w.writerow([repr(v) for v in row])
        return buf.getvalue()


def _clamp(y: float) -> float:
    return max(-HALF_PI, min(HALF_PI, y))


def _rk4(sign, lam, x, y, dt):
    """One step; returns ``(dy, dz)`` increments."""
    k1y, k1z = raw_velocity(sign, lam, x, y)
    k2y, k2z = raw_velocity(sign, lam, x, y + 0.5 * dt * k1y)
    k3y, k3z = raw_velocity(sign, lam, x, y + 0.5 * dt * k2y)
    k4y, k4z = raw_velocity(sign, lam, x, y + dt * k3y)
    return (dt * (k1y + 2 * k2y + 2 * k3y + k4y) / 6,
            dt * (k1z + 2 * k2z + 2 * k3z + k4z) / 6)


def _on_tangent_face(x: float) -> bool:
    return abs(abs(x) - HALF_PI) <= X_TOL


def integrate_orbit(b: BlockField, p0: BlockPoint, dt: float = DEFAULT_DT,
                    t_max: float = DEFAULT_T_MAX, stride: int = 1,
                    asymptotic_eps: float = ASYMPTOTIC_EPS) -> Trajectory:
    if not (dt > 0 and t_max > 0):
        raise ValueError("dt and t_max must be positive")
    x, y, z = p0.x, p0.y, p0.z
    t = 0.0
    samples = [(t, x, y, z)]
    if y >= HALF_PI:
        return Trajectory(samples, ExitFace(FaceLabel.OUTGOING, p0, 0.0))
    tangent = _on_tangent_face(x)
    near_since = None
    step = 0
    while t < t_max:
        h = min(dt, t_max - t)
        dy, dz = _rk4(b.sign, b.lam, x, y, h)
        if y + dy >= HALF_PI:
            # Bisect the substep length at which y reaches the face.
            lo, hi = 0.0, h
            while hi - lo > EXIT_TOL:
                mid = 0.5 * (lo + hi)
                if y + _rk4(b.sign, b.lam, x, y, mid)[0] >= HALF_PI:
                    hi = mid
                else:
                    lo = mid
            dz = _rk4(b.sign, b.lam, x, y, hi)[1]
            t, z = t + hi, z + dz
            samples.append((t, x, HALF_PI, z))
            return Trajectory(samples, ExitFace(FaceLabel.OUTGOING, BlockPoint(x, HALF_PI, z), t))
        t, y, z = t + h, y + dy, z + dz
        step += 1
        if step % stride == 0:
            samples.append((t, x, y, z))
        if tangent and abs(y) < asymptotic_eps:
            if near_since is None:
                near_since = t
            if t >= t_max / 2:
                if samples[-1][0] != t:
                    samples.append((t, x, y, z))
                return Trajectory(samples, AsymptoticToOrbit("alpha_1" if x < 0 else "alpha_2"))
        else:
            near_since = None
    if samples[-1][0] != t:
        samples.append((t, x, y, z))
    return Trajectory(samples, Budget(t))


@dataclass(frozen=True)
class Transit:
    exit: BlockPoint
    time: float
    delta_z: float


def block_transit(b: BlockField, x: float, z: float = 0.0, dt: float = DEFAULT_DT,
                  t_max: float = DEFAULT_T_MAX) -> Transit | AsymptoticToOrbit:
    """Hitting map from the Incoming face to the Outgoing face."""
    traj = integrate_orbit(b, BlockPoint(x, -HALF_PI, z), dt, t_max, stride=1 << 30)
    term = traj.termination
    if isinstance(term, ExitFace):
        return Transit(term.point, term.time, traj.delta_z)
    if isinstance(term, AsymptoticToOrbit):
        return term
    raise RuntimeError(f"transit from x={x} did not finish within t_max={t_max}")


def transit_closed_form(sign: int, lam: float, x: float) -> tuple[float, float]:
    """Exact ``(time, delta_z)`` for ``|x| < pi/2``.

    Substituting ``u = sin y`` turns both integrals into arctangents,
    giving ``time = pi / cos x`` and ``delta_z = 2 sign lam x / cos x``.
    """
    c = math.cos(x)
    return math.pi / c, 2 * sign * lam * x / c


@dataclass(frozen=True)
class GridSpec:
    """Entry points ``x`` in ``[-x_max, x_max]`` times ``z`` in ``[0, 1)``."""

    nx: int = 30
    nz: int = 1
    x_max: float = 0.9 * HALF_PI

    def points(self) -> list[tuple[float, float]]:
        if self.nx < 1 or self.nz < 1:
            raise ValueError("grid needs at least one point per axis")
        xs = [0.0] if self.nx == 1 else [
            -self.x_max + 2 * self.x_max * i / (self.nx - 1) for i in range(self.nx)]
        zs = [j / self.nz for j in range(self.nz)]
        return [(x, z) for x in xs for z in zs]

    @classmethod
    def parse(cls, text: str | int | None) -> "GridSpec":
        if text is None:
            return cls()
        if isinstance(text, int):
            return cls(text)
        parts = str(text).lower().split("x")
        return cls(int(parts[0]), int(parts[1]) if len(parts) > 1 else 1)


@dataclass
class ConeReport:
    lam: float
    matrix: Matrix
    grid: GridSpec
    cone_halfwidth: float
    sign: int
    min_expansion: float
    max_expansion: float
    threshold: float
    excluded: int
    samples: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return self.min_expansion >= self.threshold

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "lambda": self.lam,
            "matrix": [list(r) for r in self.matrix],
            "grid": {"nx": self.grid.nx, "nz": self.grid.nz, "x_max": self.grid.x_max},
            "cone_halfwidth": self.cone_halfwidth,
            "sign": self.sign,
            "min_expansion": self.min_expansion,
            "max_expansion": self.max_expansion,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "excluded": self.excluded,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "z", "min_expansion"])
        for row in self.samples:
            w.writerow([repr(v) for v in row])
        return buf.getvalue()


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("ANOFLIP_THREADS", "1")))
    except ValueError:
        return 1


def _hit(sign, lam, A, x, z, dt):
    """``h o f_out,in`` in flat coordinates, or None when asymptotic."""
    tr = block_transit(BlockField(sign, lam), x, z % 1.0, dt)
    if not isinstance(tr, Transit):
        return None
    zx = z + tr.delta_z
    return (A[0][0] * x + A[0][1] * zx, A[1][0] * x + A[1][1] * zx)


def _point_expansion(args):
    sign, lam, A, x, z, center, halfwidth, n_dirs, dt = args
    h = FD_STEP
    if abs(x) + h >= HALF_PI:
        return None
    px, mx = _hit(sign, lam, A, x + h, z, dt), _hit(sign, lam, A, x - h, z, dt)
    pz, mz = _hit(sign, lam, A, x, z + h, dt), _hit(sign, lam, A, x, z - h, dt)
    if None in (px, mx, pz, mz):
        return None
    j = [[(px[0] - mx[0]) / (2 * h), (pz[0] - mz[0]) / (2 * h)],
         [(px[1] - mx[1]) / (2 * h), (pz[1] - mz[1]) / (2 * h)]]
    best = math.inf
    for k in range(n_dirs):
        phi = center - halfwidth + 2 * halfwidth * k / (n_dirs - 1)
        vx, vz = math.cos(phi), math.sin(phi)
        best = min(best, math.hypot(j[0][0] * vx + j[0][1] * vz, j[1][0] * vx + j[1][1] * vz))
    return best


def cone_expansion(lam: float, A: Sequence[Sequence[int]], grid: GridSpec | None = None,
                   cone_halfwidth: float = 0.1, sign: int = 1, threshold: float = 1.0,
                   dt: float = DEFAULT_DT, n_dirs: int = 17) -> ConeReport:
    """Minimal stretch of the cone about ``A (0, 1)`` under ``A o D(transit)``."""
    A = (tuple(int(v) for v in A[0]), tuple(int(v) for v in A[1]))
    grid = grid or GridSpec()
    fx, fz = A[0][1], A[1][1]
    if fx == 0:
        raise FiberPreservingGluing(A)
    center = math.atan2(fz, fx)
    # The cone must stay clear of the fiber direction.
    gap = abs(math.atan2(math.sin(center - HALF_PI), math.cos(center - HALF_PI)))
    gap = min(gap, math.pi - gap)
    if not 0 < cone_halfwidth < gap:
        raise ValueError(f"cone half-width must lie in (0, {gap:.6g})")
    jobs = [(sign, lam, A, x, z, center, cone_halfwidth, max(2, n_dirs), dt)
            for x, z in grid.points()]
    workers = _workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_point_expansion, jobs))
    else:
        results = [_point_expansion(j) for j in jobs]
    samples = [(j[3], j[4], r) for j, r in zip(jobs, results) if r is not None]
    excluded = len(jobs) - len(samples)
    values = [s[2] for s in samples]
    return ConeReport(lam, A, grid, cone_halfwidth, sign,
                      min(values) if values else math.nan,
                      max(values) if values else math.nan,
                      threshold, excluded, samples)


@dataclass
class CheckResult:
    name: str
    passed: bool
    failures: list[tuple[float, float]]


@dataclass
class BlockChecklist:
    sign: int
    lam: float
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "sign": self.sign,
            "lambda": self.lam,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "failures": len(c.failures),
                        "first_failure": list(c.failures[0]) if c.failures else None}
                       for c in self.checks],
        }


Field = Callable[[float, float], tuple[float, float, float]]


def block_field_function(b: BlockField) -> Field:
    def f(x, y):
        sx, cx, sy, cy = math.sin(x), math.cos(x), math.sin(y), math.cos(y)
        return 0.0, cx * cx + sy * sy * sx * sx, b.sign * b.lam * sx * cy
    return f


def verify_block_properties(b: BlockField, grid: int = 50, tol: float = 1e-12,
                            field_fn: Field | None = None) -> BlockChecklist:
    """Sampled checks (i)-(v) of the block's boundary behaviour.

    ``field_fn`` replaces the block field, e.g. for a negative control.
    """
    f = field_fn or block_field_function(b)
    n = grid
    open_pts = [-HALF_PI + math.pi * (i + 1) / (n + 1) for i in range(n)]
    closed_pts = [-HALF_PI + math.pi * i / (n - 1) for i in range(n)]
    tangents = (-HALF_PI, HALF_PI)

    def fails(pred, pts):
        return [(x, y) for x, y in pts if not pred(x, y)]

    interior = [(x, y) for x in open_pts for y in [-HALF_PI] + open_pts]
    i = fails(lambda x, y: f(x, y)[1] > tol, interior)
    ii = fails(lambda x, y: abs(f(x, y)[0]) <= tol,
               [(x, y) for x in closed_pts for y in closed_pts])
    iii = fails(lambda x, y: abs(f(x, y)[0]) <= tol and math.hypot(*f(x, y)[1:]) > tol,
                [(x, y) for x in tangents for y in closed_pts])
    annulus = [(x, 0.0) for x in open_pts]
    iv = fails(lambda x, y: f(x, y)[1] > tol, annulus)
    iv += fails(lambda x, y: abs(f(x, y)[1]) <= tol and abs(f(x, y)[2]) > tol,
                [(x, 0.0) for x in tangents])
    # On the tangent faces y = 0 is a rest point of the y-motion: below
    # it y rises towards 0, above it y also rises, so it tends to 0 in
    # backward time.
    half = [(x, y) for x in tangents for y in open_pts if abs(y) > tol]
    v = fails(lambda x, y: f(x, y)[1] > tol, half)
    checks = [
        CheckResult("i_transverse", not i, i),
        CheckResult("ii_dx_zero", not ii, ii),
        CheckResult("iii_tangent_faces", not iii, iii),
        CheckResult("iv_annulus_crossing", not iv, iv),
        CheckResult("v_half_faces", not v, v),
    ]
    return BlockChecklist(b.sign, b.lam, checks)
