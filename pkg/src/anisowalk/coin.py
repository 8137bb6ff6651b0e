"""Coin matrices, their (a, b, alpha, beta, delta) parametrization, and coin fields.

A coin field assigns a 2x2 unitary C(x) to every site x of the integer lattice and
declares the constant coins it converges to at -infinity (left) and +infinity
(right), together with the decay constants of that convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import ValidationError

__all__ = [
    "UNITARY_TOL",
    "DEGENERACY_TOL",
    "CoinMatrix",
    "CoinParams",
    "CoinField",
    "ShortRangeReport",
    "op_norm_2x2",
    "wrap_angle",
    "parametrize",
    "reconstruct",
    "hadamard",
    "rotation",
    "constant",
    "two_phase",
    "split_step_profile",
    "table",
    "verify_short_range",
]

UNITARY_TOL = 1e-12
# a < DEGENERACY_TOL is treated as a = 0, 1 - a < DEGENERACY_TOL as a = 1
DEGENERACY_TOL = 1e-12


def wrap_angle(x: float) -> float:
    """Map an angle to (-pi, pi]."""
    r = math.remainder(float(x), 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


def op_norm_2x2(m) -> float | np.ndarray:
    """Operator norm (largest singular value) of 2x2 matrices, in closed form.

    Accepts a single ``(2, 2)`` array or a stack ``(..., 2, 2)``.
    """
    m = np.asarray(m)
    fro2 = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    disc = np.maximum(fro2**2 - 4.0 * np.abs(det) ** 2, 0.0)
    out = np.sqrt(0.5 * (fro2 + np.sqrt(disc)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CoinMatrix:
    """A 2x2 unitary matrix, validated on construction."""

    c00: complex
    c01: complex
    c10: complex
    c11: complex

    def __post_init__(self):
        m = self.array
        if not np.all(np.isfinite(m)):
            raise ValidationError("coin entries must be finite")
        err = op_norm_2x2(m.conj().T @ m - np.eye(2))
        if err > UNITARY_TOL:
            raise ValidationError(
                f"coin is not unitary: ||C*C - I||_op = {err:.3e} > {UNITARY_TOL:g}"
            )
        det_err = abs(abs(np.linalg.det(m)) - 1.0)
        if det_err > UNITARY_TOL:
            raise ValidationError(f"coin has |det C| - 1 = {det_err:.3e}")

    @classmethod
    def from_array(cls, m) -> "CoinMatrix":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValidationError(f"coin must be 2x2, got shape {m.shape}")
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.c00, self.c01], [self.c10, self.c11]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.c00 * self.c11 - self.c01 * self.c10

    def distance(self, other: "CoinMatrix") -> float:
        return op_norm_2x2(self.array - other.array)


@dataclass(frozen=True)
class CoinParams:
    """Parameters (a, b, alpha, beta, delta) of a unitary coin.

    The coin is ``e^{i delta/2} [[a e^{i(alpha - delta/2)}, b e^{i(beta - delta/2)}],
    [-b e^{-i(beta - delta/2)}, a e^{-i(alpha - delta/2)}]]``. Angles are stored
    wrapped to (-pi, pi].
    """

    a: float
    b: float
    alpha: float = 0.0
    beta: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "alpha", "beta", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if not (-UNITARY_TOL <= self.a <= 1 + UNITARY_TOL):
            raise ValidationError(f"a must lie in [0, 1], got {self.a}")
        if not (-UNITARY_TOL <= self.b <= 1 + UNITARY_TOL):
            raise ValidationError(f"b must lie in [0, 1], got {self.b}")
        if abs(self.a**2 + self.b**2 - 1.0) > UNITARY_TOL:
            raise ValidationError(
                f"a^2 + b^2 must equal 1, got {self.a**2 + self.b**2!r}"
            )
        object.__setattr__(self, "a", float(min(max(self.a, 0.0), 1.0)))
        object.__setattr__(self, "b", float(min(max(self.b, 0.0), 1.0)))
        for name in ("alpha", "beta", "delta"):
            object.__setattr__(self, name, wrap_angle(getattr(self, name)))

    @classmethod
    def from_a(cls, a: float, alpha: float = 0.0, beta: float = 0.0, delta: float = 0.0):
        """Build parameters from ``a`` alone, with ``b = sqrt(1 - a^2)``."""
        if not (0.0 <= a <= 1.0):
            raise ValidationError(f"a must lie in [0, 1], got {a}")
        return cls(a, math.sqrt(max(1.0 - a * a, 0.0)), alpha, beta, delta)

    @property
    def case(self) -> str:
        """One of ``"zero"``, ``"mixed"``, ``"one"`` according to the value of a."""
        if self.a < DEGENERACY_TOL:
            return "zero"
        if 1.0 - self.a < DEGENERACY_TOL:
            return "one"
        return "mixed"

    @property
    def theta(self) -> float:
        """Half the angular width of each spectral gap, ``arccos(a)``."""
        return math.acos(self.a)


def parametrize(c: CoinMatrix) -> CoinParams:
    """Return the canonical parameters of a unitary coin.

    For a unitary 2x2 matrix ``c11 = det * conj(c00)`` and ``c10 = -det * conj(c01)``,
    so the first row and the determinant fix the matrix; phases of vanishing
    entries are set to zero.
    """
    if not isinstance(c, CoinMatrix):
        c = CoinMatrix.from_array(c)
    a = min(abs(c.c00), 1.0)
    b = min(abs(c.c01), 1.0)
    # renormalise away rounding so that a^2 + b^2 = 1 holds tightly
    s = math.hypot(a, b)
    a, b = a / s, b / s
    alpha = math.atan2(c.c00.imag, c.c00.real) if a >= DEGENERACY_TOL else 0.0
    beta = math.atan2(c.c01.imag, c.c01.real) if b >= DEGENERACY_TOL else 0.0
    d = c.det
    delta = math.atan2(d.imag, d.real)
    return CoinParams(a, b, alpha, beta, delta)


def reconstruct(p: CoinParams) -> CoinMatrix:
    """Inverse of :func:`parametrize`."""
    h = p.delta / 2.0
    g = np.exp(1j * h)
    m = g * np.array(
        [
            [p.a * np.exp(1j * (p.alpha - h)), p.b * np.exp(1j * (p.beta - h))],
            [-p.b * np.exp(-1j * (p.beta - h)), p.a * np.exp(-1j * (p.alpha - h))],
        ]
    )
    return CoinMatrix.from_array(m)


def hadamard() -> CoinMatrix:
    return CoinMatrix.from_array(np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def rotation(theta: float) -> CoinMatrix:
    """Real rotation by theta/2: ``[[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]]``."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return CoinMatrix.from_array([[c, -s], [s, c]])


def _rotation_stack(theta: np.ndarray) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


@dataclass(frozen=True)
class CoinField:
    """Position-dependent coin x -> C(x) with declared asymptotic coins.

    ``rule`` is vectorized: it maps an integer array of sites to a stacked
    ``(n, 2, 2)`` complex array. ``config`` holds the JSON-serializable
    description the field was built from.
    """

    rule: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    left: CoinMatrix
    right: CoinMatrix
    eps_l: float = 1.0
    eps_r: float = 1.0
    kappa_l: float = 1.0
    kappa_r: float = 1.0
    config: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("eps_l", "eps_r", "kappa_l", "kappa_r"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0")

    def __call__(self, x: int) -> CoinMatrix:
        return CoinMatrix.from_array(self.coins(np.array([x]))[0])

    def coins(self, xs) -> np.ndarray:
        """Coins at the given sites as an ``(n, 2, 2)`` array."""
        xs = np.asarray(xs, dtype=np.int64).reshape(-1)
        return np.asarray(self.rule(xs), dtype=complex).reshape(xs.size, 2, 2)

    def check_unitary(self, xs) -> float:
        """Largest ``||C(x)*C(x) - I||_op`` over the given sites."""
        c = self.coins(xs)
        g = np.conj(np.swapaxes(c, -1, -2)) @ c - np.eye(2)
        return float(np.max(op_norm_2x2(g))) if len(c) else 0.0

    @property
    def left_params(self) -> CoinParams:
        return parametrize(self.left)

    @property
    def right_params(self) -> CoinParams:
        return parametrize(self.right)

    def with_global_phase(self, phi: float) -> "CoinField":
        """Field with every coin (tails included) multiplied by ``e^{i phi}``."""
        ph = np.exp(1j * phi)
        rule = self.rule
        return CoinField(
            rule=lambda xs: ph * rule(xs),
            left=CoinMatrix.from_array(ph * self.left.array),
            right=CoinMatrix.from_array(ph * self.right.array),
            eps_l=self.eps_l,
            eps_r=self.eps_r,
            kappa_l=self.kappa_l,
            kappa_r=self.kappa_r,
            config={**self.config, "global_phase": phi},
        )


def constant(c: CoinMatrix) -> CoinField:
    """Homogeneous field C(x) = c."""
    m = c.array

    def rule(xs):
        return np.broadcast_to(m, (len(xs), 2, 2)).copy()

    return CoinField(rule=rule, left=c, right=c, config={"family": "constant", "matrix": m})


def _two_phase_coin(sigma: float) -> np.ndarray:
    return np.array([[1, np.exp(1j * sigma)], [np.exp(-1j * sigma), -1]]) / math.sqrt(2)


def two_phase(sigma_plus: float, sigma_minus: float, with_defect: bool = False) -> CoinField:
    """Two-phase walk: one Hadamard-type coin for x >= 0, another for x <= -1.

    With ``with_defect`` the coin at the origin is replaced by ``diag(1, -1)``.
    """
    sigma_plus = float(sigma_plus) % (2 * math.pi)
    sigma_minus = float(sigma_minus) % (2 * math.pi)
    cp, cm = _two_phase_coin(sigma_plus), _two_phase_coin(sigma_minus)
    defect = np.diag([1.0, -1.0]).astype(complex)

    def rule(xs):
        out = np.where((xs >= 0)[:, None, None], cp, cm)
        if with_defect:
            out[xs == 0] = defect
        return out

    return CoinField(
        rule=rule,
        left=CoinMatrix.from_array(cm),
        right=CoinMatrix.from_array(cp),
        config={
            "family": "two_phase",
            "sigma_plus": sigma_plus,
            "sigma_minus": sigma_minus,
            "with_defect": bool(with_defect),
        },
    )


def split_step_profile(theta_minus: float, theta_plus: float, scale: float = 3.0) -> CoinField:
    """Rotation coins R(theta(x)) with a tanh profile between theta_minus and theta_plus."""
    if not scale > 0:
        raise ValidationError(f"scale must be > 0, got {scale}")
    mid = 0.5 * (theta_minus + theta_plus)
    half = 0.5 * (theta_plus - theta_minus)

    def rule(xs):
        return _rotation_stack(mid + half * np.tanh(xs / scale))

    # the tanh tail decays exponentially, so |x|^-2 with kappa = |dtheta| dominates
    kappa = abs(theta_plus - theta_minus) or 1.0
    return CoinField(
        rule=rule,
        left=rotation(theta_minus),
        right=rotation(theta_plus),
        kappa_l=kappa,
        kappa_r=kappa,
        config={
            "family": "split_step",
            "theta_minus": float(theta_minus),
            "theta_plus": float(theta_plus),
            "scale": float(scale),
        },
    )


def table(sites: Mapping[int, object], left: CoinMatrix, right: CoinMatrix, **decay) -> CoinField:
    """Explicit per-site coins; sites not listed use the left (x < 0) or right tail coin."""
    tab = {int(x): CoinMatrix.from_array(m) if not isinstance(m, CoinMatrix) else m
           for x, m in sites.items()}
    lm, rm = left.array, right.array
    arrs = {x: c.array for x, c in tab.items()}

    def rule(xs):
        out = np.where((xs < 0)[:, None, None], lm, rm)
        for i, x in enumerate(xs.tolist()):
            m = arrs.get(x)
            if m is not None:
                out[i] = m
        return out

    return CoinField(
        rule=rule,
        left=left,
        right=right,
        config={
            "family": "table",
            "sites": {x: c.array for x, c in sorted(tab.items())},
            "left": lm,
            "right": rm,
        },
        **decay,
    )


@dataclass(frozen=True)
class ShortRangeReport:
    passed: bool
    worst_ratio: float
    worst_x: int | None
    checked: int


def verify_short_range(f: CoinField, window: range | tuple[int, int], kappa: float, eps: float
                       ) -> ShortRangeReport:
    """Check ``||C(x) - C_tail|| <= kappa |x|^(-1-eps)`` on a finite window.

    ``window`` is a ``range`` or an inclusive ``(lo, hi)`` pair. The origin is
    not constrained. Failures are reported, not raised.
    """
    if isinstance(window, tuple):
        lo, hi = window
        window = range(int(lo), int(hi) + 1)
    xs = np.array([x for x in window if x != 0], dtype=np.int64)
    if len(window) == 0:
        raise ValidationError("window must be nonempty")
    if xs.size == 0:
        return ShortRangeReport(True, 0.0, None, 0)
    c = f.coins(xs)
    tails = np.where((xs < 0)[:, None, None], f.left.array, f.right.array)
    dev = op_norm_2x2(c - tails)
    bound = kappa * np.abs(xs).astype(float) ** (-1.0 - eps)
    ratio = dev / bound
    i = int(np.argmax(ratio))
    worst = float(ratio[i])
    return ShortRangeReport(worst <= 1.0, worst, int(xs[i]), int(xs.size))
