"""JSON forms of coin fields and CLI run configurations.

Coin-field files look like::

    {"family": "two_phase", "sigma_plus": 0.0, "sigma_minus": 3.14159, "with_defect": true}
    {"family": "split_step", "theta_minus": 0.0, "theta_plus": 1.5708, "scale": 3}
    {"family": "constant", "params": {"a": 0.7071, "alpha": 0, "beta": 0, "delta": 3.14159}}
    {"family": "constant", "matrix": [[[re, im], [re, im]], [[re, im], [re, im]]]}
    {"family": "table", "sites": {"0": <matrix>, ...}, "left": <matrix>, "right": <matrix>}

Complex numbers are ``[re, im]`` pairs; angles are radians unless the caller
asks for degrees.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import coin as coins
from .coin import CoinField, CoinMatrix, CoinParams, parametrize, reconstruct
from .errors import ValidationError

__all__ = [
    "load_coin_field",
    "coin_field_from_dict",
    "coin_field_to_dict",
    "params_from_dict",
    "parse_params",
    "RunConfig",
]

_FAMILY_KEYS = {
    "two_phase": {"sigma_plus", "sigma_minus", "with_defect"},
    "split_step": {"theta_minus", "theta_plus", "scale"},
    "constant": {"params", "matrix"},
    "table": {"sites", "left", "right", "kappa_l", "kappa_r", "eps_l", "eps_r"},
}
_ANGLE_KEYS = {"sigma_plus", "sigma_minus", "theta_minus", "theta_plus"}


def _angle(x, degrees: bool) -> float:
    x = float(x)
    return math.radians(x) if degrees else x


def _matrix_from_json(obj) -> CoinMatrix:
    try:
        m = np.array([[complex(e[0], e[1]) for e in row] for row in obj])
    except (TypeError, IndexError, ValueError):
        raise ValidationError("matrix entries must be [re, im] pairs in a 2x2 nested list") from None
    return CoinMatrix.from_array(m)


def _matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(e.real), float(e.imag)] for e in row] for row in m]


def params_from_dict(d: dict, degrees: bool = False) -> CoinParams:
    unknown = set(d) - {"a", "b", "alpha", "beta", "delta"}
    if unknown:
        raise ValidationError(f"unknown coin parameter(s): {sorted(unknown)}")
    if "a" not in d:
        raise ValidationError("coin parameters need 'a'")
    a = float(d["a"])
    angles = [_angle(d.get(k, 0.0), degrees) for k in ("alpha", "beta", "delta")]
    if "b" in d:
        return CoinParams(a, float(d["b"]), *angles)
    return CoinParams.from_a(a, *angles)


def parse_params(text: str, degrees: bool = False) -> CoinParams:
    """Parse ``"a,alpha,beta,delta"`` (b is derived from a)."""
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"coin parameters must be 'a,alpha,beta,delta', got {text!r}") from None
    if len(vals) != 4:
        raise ValidationError(f"coin parameters must be 'a,alpha,beta,delta', got {text!r}")
    return params_from_dict(dict(zip(("a", "alpha", "beta", "delta"), vals)), degrees)


def coin_field_from_dict(d: dict, degrees: bool = False) -> CoinField:
    if not isinstance(d, dict) or "family" not in d:
        raise ValidationError("coin config must be an object with a 'family' key")
    fam = d["family"]
    if fam not in _FAMILY_KEYS:
        raise ValidationError(f"unknown coin family {fam!r}; expected one of {sorted(_FAMILY_KEYS)}")
    unknown = set(d) - _FAMILY_KEYS[fam] - {"family"}
    if unknown:
        raise ValidationError(f"unknown field(s) for family {fam!r}: {sorted(unknown)}")
    try:
        if fam == "two_phase":
            return coins.two_phase(
                _angle(d["sigma_plus"], degrees),
                _angle(d["sigma_minus"], degrees),
                bool(d.get("with_defect", False)),
            )
        if fam == "split_step":
            return coins.split_step_profile(
                _angle(d["theta_minus"], degrees),
                _angle(d["theta_plus"], degrees),
                float(d.get("scale", 3.0)),
            )
        if fam == "constant":
            if ("params" in d) == ("matrix" in d):
                raise ValidationError("constant coin needs exactly one of 'params' or 'matrix'")
            if "params" in d:
                return coins.constant(reconstruct(params_from_dict(d["params"], degrees)))
            return coins.constant(_matrix_from_json(d["matrix"]))
        sites = {int(x): _matrix_from_json(m) for x, m in d["sites"].items()}
        decay = {k: float(d[k]) for k in ("kappa_l", "kappa_r", "eps_l", "eps_r") if k in d}
        return coins.table(sites, _matrix_from_json(d["left"]), _matrix_from_json(d["right"]),
                           **decay)
    except KeyError as exc:
        raise ValidationError(f"coin family {fam!r} is missing field {exc.args[0]!r}") from None


def coin_field_to_dict(f: CoinField) -> dict:
    cfg = dict(f.config)
    fam = cfg.get("family")
    if fam == "constant":
        return {"family": "constant", "matrix": _matrix_to_json(cfg["matrix"])}
    if fam == "table":
        out = {
            "family": "table",
            "sites": {str(x): _matrix_to_json(m) for x, m in cfg["sites"].items()},
            "left": _matrix_to_json(cfg["left"]),
            "right": _matrix_to_json(cfg["right"]),
        }
        for k in ("kappa_l", "kappa_r", "eps_l", "eps_r"):
            out[k] = getattr(f, k)
        return out
    if fam in ("two_phase", "split_step"):
        return {k: cfg[k] for k in ["family", *sorted(_FAMILY_KEYS[fam])] if k in cfg}
    raise ValidationError("coin field has no serializable description")


def load_coin_field(source: str, degrees: bool = False) -> CoinField:
    """Load a coin field from a JSON file path or an inline JSON object string."""
    text = source.strip()
    if not text.startswith("{"):
        path = Path(source)
        if not path.is_file():
            raise ValidationError(f"coin config file not found: {source}")
        text = path.read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"coin config is not valid JSON: {exc}") from None
    return coin_field_from_dict(obj, degrees)


@dataclass
class RunConfig:
    """Everything one CLI invocation depends on; round-trips through JSON."""

    subcommand: str
    coin: Any = None  # coin config: inline dict or path string
    coin_params: str | None = None
    left_params: str | None = None
    right_params: str | None = None
    theta: float | None = None
    sites: int | None = None
    grid: int | None = None
    band: int | None = None
    steps: int | None = None
    initial: str | None = None
    bins: int | None = None
    points: int | None = None
    window: list[int] | None = None
    kappa: float | None = None
    eps: float | None = None
    gap_margin: float | None = None
    loc_frac: float | None = None
    tol: float | None = None
    degrees: bool = False
    format: str = "json"
    out: str | None = None
    extra: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        return {k: v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)} - {"extra"}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown run-config field(s): {sorted(unknown)}")
        if "subcommand" not in d:
            raise ValidationError("run config needs 'subcommand'")
        return cls(**d)

    def coin_field(self) -> CoinField:
        if self.coin is None:
            if self.coin_params is None:
                raise ValidationError("a coin is required: pass --coin or --coin-params")
            return coins.constant(reconstruct(parse_params(self.coin_params, self.degrees)))
        if isinstance(self.coin, dict):
            return coin_field_from_dict(self.coin, self.degrees)
        return load_coin_field(str(self.coin), self.degrees)

    def sides(self) -> tuple[CoinParams, CoinParams]:
        """Left and right asymptotic coin parameters from whichever source was given."""
        if self.left_params or self.right_params:
            if not (self.left_params and self.right_params):
                raise ValidationError("--left-params and --right-params must be given together")
            return (parse_params(self.left_params, self.degrees),
                    parse_params(self.right_params, self.degrees))
        if self.coin is not None:
            f = self.coin_field()
            return parametrize(f.left), parametrize(f.right)
        if self.coin_params is not None:
            p = parse_params(self.coin_params, self.degrees)
            return p, p
        raise ValidationError("coin parameters are required: --coin-params, --coin, or --left/--right-params")
