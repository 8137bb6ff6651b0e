"""Finitely supported walk states on the integer lattice and the evolution U = SC.

A :class:`WalkState` stores a contiguous block of C^2 amplitudes starting at an
integer offset; everything outside the block is exactly zero. The shift moves the
upper component one site to the left and the lower component one site to the
right, so the support grows by at most one site per side and step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coin import CoinField, constant
from .errors import ValidationError

__all__ = [
    "WalkState",
    "ObservableReport",
    "VelocityHistogram",
    "apply_shift",
    "apply_coin",
    "step",
    "evolve",
    "observe",
    "velocity_histogram",
    "join",
    "split",
    "interface_defect",
    "parse_initial",
]


def _trim(offset: int, amps: np.ndarray) -> tuple[int, np.ndarray]:
    # keep at most one all-zero guard cell on each side
    nz = np.flatnonzero(np.any(amps != 0, axis=1))
    if nz.size == 0:
        return offset, amps[:0].copy()
    lo = max(int(nz[0]) - 1, 0)
    hi = min(int(nz[-1]) + 2, len(amps))
    return offset + lo, amps[lo:hi].copy()


@dataclass(frozen=True, eq=False)
class WalkState:
    """Amplitudes ``amplitudes[i]`` at site ``offset + i``; zero elsewhere."""

    offset: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 2 or amps.shape[1] != 2:
            raise ValidationError(f"amplitudes must have shape (n, 2), got {amps.shape}")
        offset, amps = _trim(int(self.offset), amps)
        amps.setflags(write=False)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def delta(cls, x: int = 0, spinor=(1.0, 0.0)) -> "WalkState":
        return cls(x, np.asarray(spinor, dtype=complex).reshape(1, 2))

    @classmethod
    def from_sites(cls, sites: dict) -> "WalkState":
        if not sites:
            return cls(0, np.zeros((0, 2)))
        lo, hi = min(sites), max(sites)
        amps = np.zeros((hi - lo + 1, 2), dtype=complex)
        for x, v in sites.items():
            amps[x - lo] = v
        return cls(lo, amps)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.amplitudes))

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Amplitudes on sites lo..hi-1 as an ``(hi - lo, 2)`` array."""
        out = np.zeros((hi - lo, 2), dtype=complex)
        a, b = max(lo, self.offset), min(hi, self.offset + len(self.amplitudes))
        if a < b:
            out[a - lo:b - lo] = self.amplitudes[a - self.offset:b - self.offset]
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def support(self) -> tuple[int, int] | None:
        """Inclusive range of sites with a nonzero amplitude."""
        nz = np.flatnonzero(np.any(self.amplitudes != 0, axis=1))
        if nz.size == 0:
            return None
        return self.offset + int(nz[0]), self.offset + int(nz[-1])

    def equals(self, other: "WalkState") -> bool:
        """Exact equality of the represented lattice functions."""
        lo = min(self.offset, other.offset)
        hi = max(self.offset + len(self.amplitudes), other.offset + len(other.amplitudes))
        return bool(np.array_equal(self.window(lo, hi), other.window(lo, hi)))

    def __add__(self, other: "WalkState") -> "WalkState":
        lo = min(self.offset, other.offset)
        hi = max(self.offset + len(self.amplitudes), other.offset + len(other.amplitudes))
        return WalkState(lo, self.window(lo, hi) + other.window(lo, hi))

    def __sub__(self, other: "WalkState") -> "WalkState":
        lo = min(self.offset, other.offset)
        hi = max(self.offset + len(self.amplitudes), other.offset + len(other.amplitudes))
        return WalkState(lo, self.window(lo, hi) - other.window(lo, hi))


def apply_shift(s: WalkState) -> WalkState:
    n = len(s.amplitudes)
    new = np.zeros((n + 2, 2), dtype=complex)
    new[0:n, 0] = s.amplitudes[:, 0]
    new[2:n + 2, 1] = s.amplitudes[:, 1]
    return WalkState(s.offset - 1, new)


def apply_coin(f: CoinField, s: WalkState) -> WalkState:
    if len(s.amplitudes) == 0:
        return s
    c = f.coins(s.positions)
    return WalkState(s.offset, np.einsum("nij,nj->ni", c, s.amplitudes))


def evolve(f: CoinField, s: WalkState, t: int) -> WalkState:
    """Apply U = S C ``t`` times. Cost per step is linear in the current support."""
    t = int(t)
    if t < 0:
        raise ValidationError(f"number of steps must be >= 0, got {t}")
    n = len(s.amplitudes)
    if t == 0 or n == 0:
        return s
    # buffer covers the full light cone; sites base .. base + n + 2t - 1
    base = s.offset - t
    buf = np.zeros((n + 2 * t, 2), dtype=complex)
    coins = f.coins(np.arange(base, base + n + 2 * t))
    lo, hi = t, t + n
    buf[lo:hi] = s.amplitudes
    for _ in range(t):
        buf[lo:hi] = np.einsum("nij,nj->ni", coins[lo:hi], buf[lo:hi])
        buf[lo - 1:hi - 1, 0] = buf[lo:hi, 0]
        buf[hi - 1, 0] = 0
        buf[lo + 1:hi + 1, 1] = buf[lo:hi, 1]
        buf[lo, 1] = 0
        lo, hi = lo - 1, hi + 1
    return WalkState(base, buf)


def step(f: CoinField, s: WalkState) -> WalkState:
    return evolve(f, s, 1)


@dataclass(frozen=True)
class ObservableReport:
    norm: float
    mean_position: float
    second_moment: float
    positions: np.ndarray
    distribution: np.ndarray


def observe(s: WalkState) -> ObservableReport:
    """Position distribution ``p(x) = ||psi(x)||^2`` and its first two moments."""
    x = s.positions.astype(float)
    p = np.sum(np.abs(s.amplitudes) ** 2, axis=1)
    tot = p.sum()
    mean = float((x * p).sum() / tot) if tot > 0 else 0.0
    second = float((x**2 * p).sum() / tot) if tot > 0 else 0.0
    return ObservableReport(
        norm=float(np.sqrt(tot)),
        mean_position=mean,
        second_moment=second,
        positions=s.positions,
        distribution=p,
    )


@dataclass(frozen=True)
class VelocityHistogram:
    edges: np.ndarray
    mass: np.ndarray
    max_speed: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def velocity_histogram(f: CoinField, s: WalkState, t: int, bins=41) -> VelocityHistogram:
    """Histogram of x/t for the evolved state (exploratory diagnostic).

    ``bins`` is a count of equal bins on [-1 - 1/t, 1 + 1/t] or an array of edges.
    """
    if t < 1:
        raise ValidationError("velocity histogram needs t >= 1")
    rep = observe(evolve(f, s, t))
    v = rep.positions / t
    if np.isscalar(bins):
        if int(bins) < 1:
            raise ValidationError("bins must be >= 1")
        span = 1.0 + (abs(s.offset) + len(s.amplitudes)) / t
        edges = np.linspace(-span, span, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    mass, _ = np.histogram(v, bins=edges, weights=rep.distribution)
    sup = rep.distribution > 0
    max_speed = float(np.max(np.abs(v[sup]))) if sup.any() else 0.0
    return VelocityHistogram(edges=edges, mass=mass, max_speed=max_speed)


def _restrict(s: WalkState, right: bool) -> WalkState:
    mask = (s.positions >= 0) if right else (s.positions < 0)
    return WalkState(s.offset, np.where(mask[:, None], s.amplitudes, 0))


def split(s: WalkState) -> tuple[WalkState, WalkState]:
    """Adjoint identification map: ``psi -> (j_l psi, j_r psi)`` with j_r the indicator of x >= 0."""
    return _restrict(s, False), _restrict(s, True)


def join(pair: tuple[WalkState, WalkState]) -> WalkState:
    """Identification map: ``(psi_l, psi_r) -> j_l psi_l + j_r psi_r``."""
    left, right = pair
    return _restrict(left, False) + _restrict(right, True)


def interface_defect(f: CoinField, pair: tuple[WalkState, WalkState]) -> WalkState:
    """``J U_0 (psi_l, psi_r) - U J (psi_l, psi_r)`` with U_0 the pair of asymptotic walks."""
    left, right = pair
    u0 = (step(constant(f.left), left), step(constant(f.right), right))
    return join(u0) - step(f, join(pair))


def parse_initial(text: str) -> WalkState:
    """Parse ``"x:c0,c1[;x:c0,c1...]"`` with complex literals, e.g. ``"0:1,0"`` or ``"0:0.7071,0.7071j"``."""
    sites = {}
    try:
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            x, spin = chunk.split(":")
            c0, c1 = (complex(v.strip().replace(" ", "")) for v in spin.split(","))
            sites[int(x)] = (c0, c1)
    except ValueError as exc:
        raise ValidationError(f"cannot parse initial state {text!r}: {exc}") from None
    if not sites:
        raise ValidationError("initial state is empty")
    return WalkState.from_sites(sites)
