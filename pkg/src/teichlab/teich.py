"""Upper half-plane model of the Teichmüller space of the torus.

The Teichmüller metric is half the curvature -1 hyperbolic metric, the
extremal length of the foliation (a, b) at tau is |a + b tau|^2 / Im tau,
and the Thin region of a slope is a horoball tangent to the real line at
the ideal point of that slope.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .foliation import FoliationVec, Slope, intersection

DEFAULT_EPSILON = 0.1


@dataclass(frozen=True)
class TeichPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"Teichmüller points need Im tau > 0, got {self.y}")

    @classmethod
    def from_complex(cls, z: complex) -> "TeichPoint":
        return cls(z.real, z.imag)

    @property
    def tau(self) -> complex:
        return complex(self.x, self.y)

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y}

    @classmethod
    def from_json(cls, data: dict) -> "TeichPoint":
        return cls(float(data["x"]), float(data["y"]))


BASEPOINT = TeichPoint(0.0, 1.0)


def teich_distance(s: TeichPoint, t: TeichPoint) -> float:
    # half of 2*asinh(|s - t| / (2 sqrt(y_s y_t))); stable for nearby points
    return math.asinh(abs(s.tau - t.tau) / (2.0 * math.sqrt(s.y * t.y)))


def teich_distance_array(x1, y1, x2, y2):
    """Vectorised :func:`teich_distance` on coordinate arrays."""
    return np.arcsinh(np.hypot(x1 - x2, y1 - y2) / (2.0 * np.sqrt(y1 * y2)))


def extremal_length(F: FoliationVec, t: TeichPoint, exact: bool = False):
    """|a + b tau|^2 / Im tau.  With ``exact`` and an exact F, the value is a
    Fraction computed from the binary coordinates of ``t`` without rounding."""
    if exact:
        if not F.is_exact:
            raise ValueError("exact extremal length needs an exact foliation vector")
        a, b, x, y = Fraction(F.a), Fraction(F.b), Fraction(t.x), Fraction(t.y)
        return ((a + b * x) ** 2 + (b * y) ** 2) / y
    a, b = float(F.a), float(F.b)
    return ((a + b * t.x) ** 2 + (b * t.y) ** 2) / t.y


@dataclass(frozen=True)
class QuadDiffFrame:
    """Quadratic differential on ``base`` with direction ``theta`` and norm ``norm``."""

    base: TeichPoint
    theta: float
    norm: float = 1.0

    def __post_init__(self):
        if not 0 < self.norm <= 1:
            raise ValueError("quadratic differential norm must lie in (0, 1]")

    def pair(self) -> tuple[FoliationVec, FoliationVec]:
        return hv_pair(self.base, self.theta, self.norm)


def hv_pair(base: TeichPoint, theta: float, norm: float) -> tuple[FoliationVec, FoliationVec]:
    """Horizontal and vertical foliations (H, V) of a quadratic differential.

    Built from the natural coordinate u = sqrt(norm / Im tau) e^{i theta/2};
    the construction forces i(H, V) = norm.
    """
    if not 0 < norm <= 1:
        raise ValueError("quadratic differential norm must lie in (0, 1]")
    u = math.sqrt(norm / base.y) * cmath.exp(0.5j * theta)
    ut = u * base.tau
    V = FoliationVec(-ut.real, u.real)
    H = FoliationVec(-ut.imag, u.imag)
    return H, V


class _Frame:
    """Möbius chart sending ``z0`` to i and the ideal point ``xi`` to 0.

    Geodesics from z0 toward xi become the segment i * e^{-s}, s >= 0, of the
    imaginary axis, where s is hyperbolic arclength.
    """

    def __init__(self, z0: TeichPoint, xi: float):
        self.x0, self.y0 = z0.x, z0.y
        if math.isinf(xi):
            self.c, self.s = 0.0, -1.0
        else:
            xr = (xi - self.x0) / self.y0
            r = math.hypot(1.0, xr)
            self.c, self.s = 1.0 / r, -xr / r

    def point(self, hyp: float) -> TeichPoint:
        w = 1j * math.exp(-hyp)
        # inverse rotation (c w - s) / (s w + c); imaginary part kept in
        # closed form so deep points retain relative precision
        den = self.s * w + self.c
        re = ((self.c * w - self.s) / den).real
        im = w.imag / abs(den) ** 2
        return TeichPoint(self.x0 + self.y0 * re, self.y0 * im)


def ray(start: TeichPoint, V: FoliationVec, t: float) -> TeichPoint:
    """Point at Teichmüller distance ``t`` from ``start`` toward the ideal point of ``V``."""
    if t < 0:
        raise ValueError("ray parameter must be non-negative")
    if t == 0:
        return start
    return _Frame(start, V.ideal_point()).point(2.0 * t)


def ray_points(start: TeichPoint, V: FoliationVec, ts: Iterable[float]) -> list[TeichPoint]:
    frame = _Frame(start, V.ideal_point())
    return [start if t == 0 else frame.point(2.0 * t) for t in ts]


def forward_endpoint(s: TeichPoint, t: TeichPoint) -> float:
    """Ideal endpoint reached by continuing the geodesic from s through t."""
    w = (t.tau - s.x) / s.y
    u, v = w.real, w.imag
    if u == 0.0:
        return math.inf if v > 1 else s.x
    # endpoints of the geodesic through i and w solve u x^2 - (|w|^2 - 1) x - u = 0
    B = -(u * u + v * v - 1.0)
    disc = math.sqrt(B * B + 4.0 * u * u)
    qq = -0.5 * (B + math.copysign(disc, B))
    roots = (qq / u, -u / qq)
    xr = max(roots) if u > 0 else min(roots)
    return s.x + s.y * xr


def geodesic_segment(s: TeichPoint, t: TeichPoint, n: int) -> list[TeichPoint]:
    """``n`` points at equal Teichmüller spacing from s to t (endpoints exact)."""
    if s == t:
        return [s]
    if n < 2:
        raise ValueError("need at least two sample points")
    hyp = 2.0 * teich_distance(s, t)
    frame = _Frame(s, forward_endpoint(s, t))
    pts = [frame.point(hyp * k / (n - 1)) for k in range(1, n - 1)]
    return [s, *pts, t]


@dataclass(frozen=True)
class ThinRegion:
    curve: Slope
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def contains(self, t: TeichPoint) -> bool:
        return thin_membership(self, t)

    def horoball(self) -> tuple[float, float]:
        """(tangency point, Euclidean diameter); diameter inf for the horoball at infinity."""
        p, q = self.curve.p, self.curve.q
        if q == 0:
            return math.inf, math.inf
        return -p / q, self.epsilon / q**2


def thin_membership(r: ThinRegion, t: TeichPoint) -> bool:
    return extremal_length(r.curve.as_foliation(), t) <= r.epsilon


def shortest_curve(t: TeichPoint) -> tuple[Slope, float]:
    """Slope of minimal extremal length at ``t`` (Lagrange-Gauss reduction)."""
    p, q = shortest_curves(np.array([t.x]), np.array([t.y]))
    s = Slope(int(p[0]), int(q[0]))
    return s, extremal_length(s.as_foliation(), t)


def shortest_curves(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised reduction of the lattice Z + Z tau; returns coprime (p, q) arrays.

    The shortest vector p + q tau minimises |p + q tau|, hence the extremal
    length of the slope p/q.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    # basis u = (1, 0) -> 1, v = (0, 1) -> tau, tracked as integer coefficients
    up = np.ones(n, dtype=np.int64)
    uq = np.zeros(n, dtype=np.int64)
    vp = np.zeros(n, dtype=np.int64)
    vq = np.ones(n, dtype=np.int64)
    for _ in range(200):
        ux, uy = up + uq * x, uq * y
        vx, vy = vp + vq * x, vq * y
        nu = ux * ux + uy * uy
        nv = vx * vx + vy * vy
        swap = nv < nu
        up, vp = np.where(swap, vp, up), np.where(swap, up, vp)
        uq, vq = np.where(swap, vq, uq), np.where(swap, uq, vq)
        ux, uy = up + uq * x, uq * y
        vx, vy = vp + vq * x, vq * y
        nu = ux * ux + uy * uy
        m = np.rint((vx * ux + vy * uy) / nu).astype(np.int64)
        if not m.any() and not swap.any():
            break
        vp = vp - m * up
        vq = vq - m * uq
    return up, uq


def modular_act(g: Sequence[int], t: TeichPoint) -> TeichPoint:
    """Möbius action of g = (a, b, c, d) in SL(2, Z) on tau."""
    a, b, c, d = g
    den = c * t.tau + d
    z = (a * t.tau + b) / den
    return TeichPoint(z.real, t.y / abs(den) ** 2)


def modular_act_foliation(g: Sequence[int], F: FoliationVec) -> FoliationVec:
    """Action on foliations paired with :func:`modular_act` so that
    extremal_length(g.F, g.tau) == extremal_length(F, tau)."""
    a, b, c, d = g
    # ext(F, g tau) = ext(M F, tau) with M = [[d, b], [c, a]]; apply M^{-1}
    return FoliationVec(a * F.a - b * F.b, -c * F.a + d * F.b)


def points_csv(ts: Sequence[float], points: Sequence[TeichPoint],
               curves: Sequence[FoliationVec] = ()) -> str:
    """CSV with columns t, x, y and one ext column per requested foliation."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y", *(f"ext_{i}" for i in range(len(curves)))])
    for t, z in zip(ts, points):
        w.writerow([repr(float(t)), repr(z.x), repr(z.y),
                    *(repr(extremal_length(F, z)) for F in curves)])
    return buf.getvalue()


__all__ = [
    "BASEPOINT", "DEFAULT_EPSILON", "QuadDiffFrame", "TeichPoint", "ThinRegion",
    "extremal_length", "geodesic_segment", "hv_pair", "intersection", "modular_act",
    "modular_act_foliation", "points_csv", "ray", "ray_points", "shortest_curve",
    "shortest_curves", "teich_distance", "thin_membership",
]
