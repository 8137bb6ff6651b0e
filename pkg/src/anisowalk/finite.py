"""Finite-ring truncation of the walk and eigenstate diagnostics.

The ring has N sites ``x = -N/2, ..., N/2 - 1`` and a cyclic shift, so the
truncated evolution is exactly unitary. A coin field with distinct left and right
tails then has two interfaces: the physical one near x = 0 and a seam near
x = +-N/2 where the ring closes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .coin import CoinField
from .errors import NumericalError, ValidationError
from .spectra import (
    TWO_PI,
    SpectralArcs,
    ThresholdSet,
    angular_distance,
    contains,
    gaps,
)

__all__ = [
    "RingOperator",
    "EigReport",
    "Classification",
    "SpectralCoverage",
    "build_ring",
    "eigensystem",
    "eig",
    "classify",
    "spectral_histogram",
    "arc_coverage",
    "circular_com",
    "width_fraction",
    "tail_slope",
]

EIG_RESIDUAL_TOL = 1e-8
CLUSTER_TOL = 1e-8
INSIDE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RingOperator:
    N: int
    positions: np.ndarray
    matrix: np.ndarray  # (2N, 2N); index 2 * (x + N/2) + spin

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(len(m)))))


def build_ring(f: CoinField, N: int) -> RingOperator:
    """Dense matrix of ``S_ring C`` on N sites with periodic closure."""
    if int(N) != N or N < 8 or N % 2:
        raise ValidationError(f"ring size N must be an even integer >= 8, got {N}")
    N = int(N)
    xs = np.arange(-N // 2, N // 2)
    c = f.coins(xs)
    u = np.zeros((2 * N, 2 * N), dtype=complex)
    i = np.arange(N)
    cols = 2 * i[:, None] + np.arange(2)[None, :]
    # upper component arrives from the right neighbour, lower from the left
    u[(2 * ((i - 1) % N))[:, None], cols] = c[:, 0, :]
    u[(2 * ((i + 1) % N) + 1)[:, None], cols] = c[:, 1, :]
    return RingOperator(N=N, positions=xs, matrix=u)


@dataclass(frozen=True)
class EigReport:
    phase: float
    residual: float
    ipr: float
    com: float
    width99: int
    tail_slope: float
    classification: str | None = None
    nearest_threshold_dist: float | None = None
    probabilities: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "residual": self.residual,
            "ipr": self.ipr,
            "com": self.com,
            "width99": self.width99,
            "tail_slope": self.tail_slope,
            "classification": self.classification,
            "nearest_threshold_dist": self.nearest_threshold_dist,
        }


def _clusters(phases: np.ndarray, tol: float) -> list[np.ndarray]:
    # phases sorted ascending in [0, 2pi); consecutive ones within tol are grouped
    n = len(phases)
    if n == 0:
        return []
    breaks = np.flatnonzero(np.diff(phases) > tol) + 1
    groups = np.split(np.arange(n), breaks)
    if len(groups) > 1 and phases[0] + TWO_PI - phases[-1] <= tol:
        groups[0] = np.concatenate([groups[-1], groups[0]])
        groups.pop()
    return groups


def eigensystem(r: RingOperator) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases (ascending, in [0, 2pi)) and orthonormal eigenvectors (columns).

    Uses the complex Schur form, which is diagonal for a normal matrix. Within
    groups of (near-)degenerate phases the basis is rotated to diagonalize a
    circular position observable, which separates states living on different
    interfaces.
    """
    t, z = scipy.linalg.schur(r.matrix, output="complex")
    lam = np.diag(t)
    phases = np.mod(np.angle(lam), TWO_PI)
    order = np.argsort(phases, kind="stable")
    phases, z = phases[order], z[:, order]
    pos = np.repeat(np.cos(TWO_PI * r.positions / r.N - 0.3), 2)
    for g in _clusters(phases, CLUSTER_TOL):
        if len(g) < 2:
            continue
        zg = z[:, g]
        _, rot = np.linalg.eigh(zg.conj().T @ (pos[:, None] * zg))
        z[:, g] = zg @ rot
    return phases, z


def circular_com(p: np.ndarray, positions: np.ndarray, N: int) -> float:
    """Center of mass on the ring, in [-N/2, N/2)."""
    z = np.sum(p * np.exp(1j * TWO_PI * positions / N))
    c = math.atan2(z.imag, z.real) * N / TWO_PI
    return float(((c + N / 2) % N) - N / 2)


def width_fraction(p: np.ndarray, frac: float = 0.99) -> int:
    """Number of sites in the smallest cyclic window holding ``frac`` of the mass."""
    n = len(p)
    total = p.sum()
    cs = np.concatenate([[0.0], np.cumsum(np.concatenate([p, p]))])
    target = frac * total
    starts = np.arange(n)
    # smallest end with cs[end] - cs[start] >= target
    ends = np.searchsorted(cs, cs[starts] + target * (1 - 1e-12), side="left")
    return int(min(np.min(ends - starts), n))


def tail_slope(p: np.ndarray, positions: np.ndarray, N: int, com: float,
               floor: float = 1e-26) -> float:
    """Slope of log-probability versus distance from the center over the middle of the tail.

    The tail runs from the peak out to the last distance whose mass exceeds
    ``floor`` times the peak; only its middle half enters the linear fit.
    Returns nan if fewer than three usable points remain.
    """
    d = np.rint(angular_distance(TWO_PI * positions / N, TWO_PI * com / N) * N / TWO_PI)
    d = d.astype(int)
    prof = np.bincount(d, weights=p, minlength=N // 2 + 1)
    peak = int(np.argmax(prof))
    above = np.flatnonzero(prof > floor * prof[peak])
    end = int(above[-1])
    length = end - peak
    lo, hi = peak + length // 4, peak + (3 * length) // 4
    sel = np.arange(lo, hi + 1)
    sel = sel[prof[sel] > floor * prof[peak]]
    if sel.size < 3:
        return float("nan")
    slope, _ = np.polyfit(sel, np.log(prof[sel]), 1)
    return float(slope)


def eig(r: RingOperator) -> list[EigReport]:
    """All 2N eigenpairs with localization diagnostics, sorted by phase.

    Raises :class:`NumericalError` if any residual exceeds ``EIG_RESIDUAL_TOL``.
    """
    phases, z = eigensystem(r)
    lam = np.exp(1j * phases)
    res = np.linalg.norm(r.matrix @ z - z * lam[None, :], axis=0)
    worst = float(res.max())
    if worst > EIG_RESIDUAL_TOL:
        raise NumericalError(f"eigen-residual {worst:.3e} exceeds {EIG_RESIDUAL_TOL:g}")
    probs = (np.abs(z) ** 2).reshape(r.N, 2, -1).sum(axis=1)
    out = []
    for m in range(len(phases)):
        p = probs[:, m]
        com = circular_com(p, r.positions, r.N)
        out.append(
            EigReport(
                phase=float(phases[m]),
                residual=float(res[m]),
                ipr=float(np.sum(p**2)),
                com=com,
                width99=width_fraction(p),
                tail_slope=tail_slope(p, r.positions, r.N, com),
                probabilities=p,
            )
        )
    return out


@dataclass(frozen=True)
class Classification:
    reports: list[EigReport]
    inside_fraction: float
    gap_states: list[dict]
    counts: dict
    thresholds: list[float]

    def to_dict(self) -> dict:
        return {
            "inside_fraction": self.inside_fraction,
            "gap_states": self.gap_states,
            "counts": self.counts,
            "thresholds": self.thresholds,
        }


def classify(reports: list[EigReport], ess: SpectralArcs, tau: ThresholdSet, N: int,
             gap_margin: float = 0.05, loc_frac: float = 1 / 8) -> Classification:
    """Label each eigenpair as bulk, gap_localized, or threshold_adjacent.

    Gap-localized states are attributed to the interface nearer their center of
    mass: ``"defect"`` (near x = 0) or ``"seam"`` (near x = +-N/2).
    """
    if not gap_margin > 0:
        raise ValidationError("gap_margin must be > 0")
    gap_arcs = gaps(ess).arcs
    labelled = []
    gap_states = []
    counts = {"bulk": 0, "gap_localized": 0, "threshold_adjacent": 0,
              "defect": 0, "seam": 0}
    per_gap = [0] * len(gap_arcs)
    for rep in reports:
        dist = float(tau.distance(rep.phase))
        if contains(ess, rep.phase, tol=INSIDE_TOL):
            label = "bulk"
        elif dist > gap_margin and rep.width99 <= loc_frac * N:
            label = "gap_localized"
        else:
            label = "threshold_adjacent"
        counts[label] += 1
        rep = replace(rep, classification=label,
                      nearest_threshold_dist=None if math.isinf(dist) else dist)
        labelled.append(rep)
        if label == "gap_localized":
            side = "defect" if abs(rep.com) < N / 4 else "seam"
            counts[side] += 1
            g = next((i for i, (s, ln) in enumerate(gap_arcs)
                      if (rep.phase - s) % TWO_PI <= ln), None)
            if g is not None:
                per_gap[g] += 1
            gap_states.append({"phase": rep.phase, "gap": g, "interface": side,
                               "com": rep.com, "width99": rep.width99})
    counts["per_gap"] = per_gap
    inside = counts["bulk"] / len(reports) if reports else 0.0
    return Classification(labelled, inside, gap_states, counts, tau.angles)


def arc_coverage(phases, ess: SpectralArcs, samples: int = 4096) -> float:
    """Largest distance from an arc-interior sample point to the nearest phase."""
    ph = np.sort(np.mod(np.asarray(phases, dtype=float), TWO_PI))
    if ph.size == 0:
        return math.pi
    worst = 0.0
    for s, length in ess.arcs:
        g = np.mod(s + length * (np.arange(1, samples + 1) / (samples + 1)), TWO_PI)
        i = np.searchsorted(ph, g)
        lo = ph[(i - 1) % ph.size]
        hi = ph[i % ph.size]
        d = np.minimum(angular_distance(g, lo), angular_distance(g, hi))
        worst = max(worst, float(d.max()))
    return worst


@dataclass(frozen=True)
class SpectralCoverage:
    inside_fraction: float
    edges: np.ndarray
    counts: np.ndarray
    arc_coverage: float
    outside: int


def spectral_histogram(reports, ess: SpectralArcs, bins: int = 64,
                       samples: int = 4096) -> SpectralCoverage:
    if bins < 16:
        raise ValidationError("bins must be >= 16")
    ph = np.array([r.phase if isinstance(r, EigReport) else r for r in reports], dtype=float)
    inside = contains(ess, ph, tol=INSIDE_TOL)
    counts, edges = np.histogram(ph, bins=bins, range=(0.0, TWO_PI))
    return SpectralCoverage(
        inside_fraction=float(np.mean(inside)) if ph.size else 0.0,
        edges=edges,
        counts=counts,
        arc_coverage=arc_coverage(ph, ess, samples),
        outside=int(np.sum(~inside)),
    )
