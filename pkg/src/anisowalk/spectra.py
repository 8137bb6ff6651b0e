"""Arc geometry of constant-coin spectra, essential spectrum, thresholds, Mourre functions.

Angles are radians on the unit circle. Arcs are stored as ``(start, length)`` with
``start`` in [0, 2*pi) and ``length`` in (0, 2*pi]; an arc may wrap past 2*pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coin import CoinParams

__all__ = [
    "TWO_PI",
    "INF",
    "Infinite",
    "SpectralArcs",
    "ThresholdSet",
    "angular_distance",
    "arcs",
    "contains",
    "essential_spectrum",
    "thresholds",
    "rho_tilde_asymptotic",
    "mourre_lower_bound",
    "gaps",
    "union",
]

TWO_PI = 2.0 * math.pi
MERGE_TOL = 1e-10
BOUNDARY_TOL = 1e-12


class Infinite:
    """The value +infinity of a Mourre function, kept distinct from floats."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("anisowalk.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = Infinite()


def _mod(x):
    return np.mod(x, TWO_PI)


def angular_distance(x, y):
    """Distance on the circle between angles (broadcasting)."""
    d = np.abs(_mod(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))
    return np.minimum(d, TWO_PI - d)


@dataclass(frozen=True)
class SpectralArcs:
    """A closed subset of the circle: finitely many arcs plus isolated points.

    Isolated points stand for eigenvalues of infinite multiplicity.
    """

    arcs: tuple[tuple[float, float], ...] = ()
    points: tuple[float, ...] = ()

    @property
    def total_length(self) -> float:
        return sum(length for _, length in self.arcs)

    @property
    def is_full_circle(self) -> bool:
        return any(length >= TWO_PI - MERGE_TOL for _, length in self.arcs)

    def endpoints(self) -> list[float]:
        if self.is_full_circle:
            return []
        out = []
        for s, length in self.arcs:
            out += [s, float(_mod(s + length))]
        return out

    def to_dict(self) -> dict:
        return {
            "arcs": [[s, length] for s, length in self.arcs],
            "points": list(self.points),
        }


@dataclass(frozen=True)
class ThresholdSet:
    """Threshold angles, each tagged with the side(s) it comes from (``"l"``, ``"r"``)."""

    points: tuple[tuple[float, tuple[str, ...]], ...] = field(default=())

    @property
    def angles(self) -> list[float]:
        return [a for a, _ in self.points]

    def __len__(self):
        return len(self.points)

    def distance(self, gamma) -> np.ndarray | float:
        """Distance from gamma to the nearest threshold (inf when there are none)."""
        g = np.asarray(gamma, dtype=float)
        if not self.points:
            return np.full(g.shape, np.inf) if g.ndim else math.inf
        d = angular_distance(g[..., None], np.array(self.angles)).min(axis=-1)
        return d if g.ndim else float(d)


def _intervals(arc_list):
    """Split arcs into non-wrapping [lo, hi] intervals within [0, 2*pi]."""
    out = []
    for s, length in arc_list:
        if length >= TWO_PI - MERGE_TOL:
            return [(0.0, TWO_PI)]
        s = float(_mod(s))
        e = s + length
        if e > TWO_PI:
            out += [(s, TWO_PI), (0.0, e - TWO_PI)]
        else:
            out.append((s, e))
    return out


def _merge(intervals):
    merged = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1] + MERGE_TOL:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _to_arcs(merged):
    if not merged:
        return ()
    if merged[0][0] <= MERGE_TOL and merged[-1][1] >= TWO_PI - MERGE_TOL:
        if len(merged) == 1:
            return ((0.0, TWO_PI),)
        # rejoin the piece cut at angle 0
        first, last = merged[0], merged[-1]
        wrap = (last[0], (TWO_PI - last[0]) + first[1])
        merged = merged[1:-1]
        return tuple(sorted([(lo, hi - lo) for lo, hi in merged] + [wrap]))
    return tuple((lo, hi - lo) for lo, hi in merged)


def union(*sets: SpectralArcs) -> SpectralArcs:
    """Normalized union; overlapping arcs merged, points inside arcs dropped."""
    arc_list = [a for s in sets for a in s.arcs]
    merged = _merge(_intervals(arc_list))
    result = SpectralArcs(arcs=_to_arcs(merged))
    pts = []
    for s in sets:
        for p in s.points:
            p = float(_mod(p))
            if contains(result, p, tol=MERGE_TOL):
                continue
            if any(angular_distance(p, q) <= MERGE_TOL for q in pts):
                continue
            pts.append(p)
    return SpectralArcs(arcs=result.arcs, points=tuple(sorted(pts)))


def arcs(p: CoinParams) -> SpectralArcs:
    """Spectrum of the constant-coin walk with parameters p."""
    half = p.delta / 2.0
    case = p.case
    if case == "zero":
        pts = sorted(float(_mod(half + s)) for s in (math.pi / 2, 3 * math.pi / 2))
        return SpectralArcs(points=tuple(pts))
    if case == "one":
        return SpectralArcs(arcs=((0.0, TWO_PI),))
    th = p.theta
    length = math.pi - 2.0 * th
    starts = sorted(float(_mod(half + th + off)) for off in (0.0, math.pi))
    return SpectralArcs(arcs=tuple((s, length) for s in starts))


def contains(s: SpectralArcs, gamma, tol: float = BOUNDARY_TOL):
    """Membership of angle(s) gamma in the closed set s, with boundary slack tol."""
    g = _mod(np.asarray(gamma, dtype=float))
    inside = np.zeros(g.shape, dtype=bool)
    for start, length in s.arcs:
        if length >= TWO_PI - MERGE_TOL:
            inside[...] = True
            break
        off = _mod(g - start)
        inside |= (off <= length + tol) | (off >= TWO_PI - tol)
    for pt in s.points:
        inside |= angular_distance(g, pt) <= tol
    return bool(inside) if inside.ndim == 0 else inside


def essential_spectrum(left: CoinParams, right: CoinParams) -> SpectralArcs:
    return union(arcs(left), arcs(right))


def _boundary(p: CoinParams) -> list[float]:
    s = arcs(p)
    return list(s.points) if p.case == "zero" else s.endpoints()


def thresholds(left: CoinParams, right: CoinParams) -> ThresholdSet:
    """Boundary points of the left and right asymptotic spectra."""
    tagged = [(a, "l") for a in _boundary(left)] + [(a, "r") for a in _boundary(right)]
    pts: list[tuple[float, tuple[str, ...]]] = []
    for ang, side in sorted(tagged):
        for i, (q, sides) in enumerate(pts):
            if angular_distance(ang, q) <= MERGE_TOL:
                if side not in sides:
                    pts[i] = (q, tuple(sorted(sides + (side,))))
                break
        else:
            pts.append((ang, (side,)))
    return ThresholdSet(points=tuple(pts))


def rho_tilde_asymptotic(p: CoinParams, theta: float, tol: float = BOUNDARY_TOL):
    """Mourre function of the constant-coin walk at angle theta.

    Returns a float or :data:`INF`. On the interior of the spectrum (0 < a < 1)
    the value is the squared group velocity of the band through e^{i theta},
    ``(a^2 - c^2) / (1 - c^2)`` with ``c = cos(theta - delta/2)``.
    """
    case = p.case
    if case == "one":
        return 1.0
    if case == "zero":
        s = arcs(p)
        return 0.0 if contains(s, theta, tol=tol) else INF
    c = abs(math.cos(theta - p.delta / 2.0))
    if abs(c - p.a) <= tol:
        return 0.0
    if c > p.a:
        return INF
    return max((p.a**2 - c**2) / (1.0 - c**2), 0.0)


def mourre_lower_bound(left: CoinParams, right: CoinParams, theta: float):
    """Lower bound for the Mourre function of the anisotropic walk: min over both sides."""
    return min(rho_tilde_asymptotic(left, theta), rho_tilde_asymptotic(right, theta))


def gaps(s: SpectralArcs) -> SpectralArcs:
    """Open complement of the arcs, returned as arcs (isolated points are ignored)."""
    merged = _merge(_intervals(s.arcs))
    if not merged:
        return SpectralArcs(arcs=((0.0, TWO_PI),))
    comp = []
    prev = 0.0
    for lo, hi in merged:
        if lo - prev > MERGE_TOL:
            comp.append((prev, lo))
        prev = hi
    if TWO_PI - prev > MERGE_TOL:
        comp.append((prev, TWO_PI))
    return SpectralArcs(arcs=_to_arcs(comp))
