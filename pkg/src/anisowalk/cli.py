"""Command-line entry point: ``anisowalk <subcommand> [options]``.

JSON output always carries ``"schema": 1``, keeps a fixed key order, and
formats floats with 12 significant digits, so an identical invocation produces
byte-identical output. Exit status is 0 on success, 2 for invalid input and 1
for a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import finite, kgrid, lattice, spectra, symbol
from .coin import verify_short_range
from .config import RunConfig, parse_params
from .errors import NumericalError, ValidationError

SCHEMA = 1
_DIGITS = 12


def _num(x: float):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{_DIGITS}g}")


def clean(obj):
    """Recursively convert to JSON-ready values with fixed float precision."""
    if obj is spectra.INF:
        return "inf"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [clean(v) for v in obj]
    return obj


def dumps(payload: dict) -> str:
    return json.dumps(clean({"schema": SCHEMA, **payload}), indent=2, ensure_ascii=False) + "\n"


def _fmt(x) -> str:
    return f"{float(x):.{_DIGITS}g}"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _text_lines(payload: dict) -> str:
    return "".join(f"{k}: {json.dumps(clean(v))}\n" for k, v in payload.items())


def _emit(payload: dict, cfg: RunConfig) -> None:
    _write(dumps(payload) if cfg.format == "json" else _text_lines(payload), cfg.out)


def _require(value, name: str):
    if value is None:
        raise ValidationError(f"--{name.replace('_', '-')} is required")
    return value


def _positive_int(value, name: str, minimum: int = 1) -> int:
    if int(value) != value or value < minimum:
        raise ValidationError(f"--{name} must be an integer >= {minimum}, got {value}")
    return int(value)


def _theta(cfg: RunConfig) -> float:
    theta = float(_require(cfg.theta, "theta"))
    return math.radians(theta) if cfg.degrees else theta


# ---- subcommands -----------------------------------------------------------


def cmd_arcs(cfg: RunConfig) -> None:
    left, right = cfg.sides()
    ess = spectra.essential_spectrum(left, right)
    _emit({**ess.to_dict(), "gaps": [list(g) for g in spectra.gaps(ess).arcs]}, cfg)


def cmd_thresholds(cfg: RunConfig) -> None:
    left, right = cfg.sides()
    tau = spectra.thresholds(left, right)
    _emit({"thresholds": tau.angles, "sides": ["".join(s) for _, s in tau.points]}, cfg)


def cmd_mourre(cfg: RunConfig) -> None:
    theta = _theta(cfg)
    left, right = cfg.sides()
    _emit({
        "theta": theta,
        "rho": spectra.mourre_lower_bound(left, right, theta),
        "rho_left": spectra.rho_tilde_asymptotic(left, theta),
        "rho_right": spectra.rho_tilde_asymptotic(right, theta),
    }, cfg)


def cmd_dispersion(cfg: RunConfig) -> None:
    p = parse_params(_require(cfg.coin_params, "coin_params"), cfg.degrees)
    n = _positive_int(cfg.points if cfg.points is not None else 256, "points", 2)
    k = 2 * np.pi * np.arange(n) / n
    lam = symbol.eigenvalues(p, k)
    v = symbol.velocities(p, k)
    rows = zip(k, lam[:, 0].real, lam[:, 0].imag, lam[:, 1].real, lam[:, 1].imag, v[:, 0], v[:, 1])
    header = ["k", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "v1", "v2"]
    _write(_csv_text(header, rows), cfg.out)


def _walk_inputs(cfg: RunConfig):
    f = cfg.coin_field()
    t = _positive_int(_require(cfg.steps, "steps"), "steps", 0)
    s = lattice.parse_initial(cfg.initial or "0:1,0")
    if not s.norm() > 0:
        raise ValidationError("initial state must be nonzero")
    return f, s, t


def cmd_evolve(cfg: RunConfig) -> None:
    f, s, t = _walk_inputs(cfg)
    rep = lattice.observe(lattice.evolve(f, s, t))
    text = _csv_text(["x", "p"], zip(rep.positions, rep.distribution))
    if cfg.out:
        _write(text, cfg.out)
        sys.stdout.write(dumps({
            "steps": t,
            "norm": rep.norm,
            "mean_position": rep.mean_position,
            "second_moment": rep.second_moment,
            "out": cfg.out,
        }))
    else:
        sys.stdout.write(text)


def cmd_velocity_hist(cfg: RunConfig) -> None:
    f, s, t = _walk_inputs(cfg)
    if t < 1:
        raise ValidationError("--steps must be >= 1 for a velocity histogram")
    bins = _positive_int(cfg.bins if cfg.bins is not None else 41, "bins")
    h = lattice.velocity_histogram(f, s, t, bins)
    _write(_csv_text(["bin_center", "mass"], zip(h.centers, h.mass)), cfg.out)


def cmd_eigs(cfg: RunConfig) -> None:
    f = cfg.coin_field()
    n = _require(cfg.sites, "sites")
    if int(n) != n or n < 8 or n % 2:
        raise ValidationError(f"--sites must be an even integer >= 8, got {n}")
    gap_margin = 0.05 if cfg.gap_margin is None else cfg.gap_margin
    loc_frac = 1 / 8 if cfg.loc_frac is None else cfg.loc_frac
    if not gap_margin > 0 or not 0 < loc_frac <= 1:
        raise ValidationError("--gap-margin must be > 0 and --loc-frac in (0, 1]")
    left, right = f.left_params, f.right_params
    ess = spectra.essential_spectrum(left, right)
    tau = spectra.thresholds(left, right)
    reports = finite.eig(finite.build_ring(f, int(n)))
    cl = finite.classify(reports, ess, tau, int(n), gap_margin, loc_frac)
    summary = {
        "sites": int(n),
        "inside_fraction": cl.inside_fraction,
        "gap_states": cl.gap_states,
        "thresholds": cl.thresholds,
        "counts": cl.counts,
        "essential_spectrum": ess.to_dict(),
    }
    _emit({"eigenpairs": [r.to_dict() for r in cl.reports], "summary": summary}, cfg)


def cmd_check_commutators(cfg: RunConfig) -> None:
    p = parse_params(_require(cfg.coin_params, "coin_params"), cfg.degrees)
    K = cfg.grid if cfg.grid is not None else 256
    res = kgrid.check_identities(p, K, cfg.band)
    payload = {"K": res.K, "band": res.band, "residuals": res.residuals(), "max": res.max()}
    if cfg.tol is not None:
        payload["tol"] = cfg.tol
        payload["passed"] = res.max() <= cfg.tol
    _emit(payload, cfg)
    if cfg.tol is not None and res.max() > cfg.tol:
        raise NumericalError(f"largest residual {res.max():.3e} exceeds tolerance {cfg.tol:g}")


def _parse_window(window) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in window)
    except (TypeError, ValueError):
        raise ValidationError(f"--window must be two integers LO HI, got {window!r}") from None
    if hi < lo:
        raise ValidationError("--window needs LO <= HI")
    return lo, hi


def cmd_verify_coin(cfg: RunConfig) -> None:
    f = cfg.coin_field()
    lo, hi = _parse_window(cfg.window or (-64, 64))
    kappa = cfg.kappa if cfg.kappa is not None else max(f.kappa_l, f.kappa_r)
    eps = cfg.eps if cfg.eps is not None else min(f.eps_l, f.eps_r)
    if not kappa > 0 or not eps > 0:
        raise ValidationError("--kappa and --eps must be > 0")
    rep = verify_short_range(f, (lo, hi), kappa, eps)
    unit = f.check_unitary(np.arange(lo, hi + 1))
    lp, rp = f.left_params, f.right_params
    side = lambda p: {"a": p.a, "b": p.b, "alpha": p.alpha, "beta": p.beta, "delta": p.delta}
    _emit({
        "passed": rep.passed,
        "worst_ratio": rep.worst_ratio,
        "worst_x": rep.worst_x,
        "checked": rep.checked,
        "kappa": kappa,
        "eps": eps,
        "unitarity_error": unit,
        "left": side(lp),
        "right": side(rp),
    }, cfg)


COMMANDS = {
    "arcs": cmd_arcs,
    "thresholds": cmd_thresholds,
    "mourre": cmd_mourre,
    "dispersion": cmd_dispersion,
    "evolve": cmd_evolve,
    "velocity-hist": cmd_velocity_hist,
    "eigs": cmd_eigs,
    "check-commutators": cmd_check_commutators,
    "verify-coin": cmd_verify_coin,
}


# ---- argument parsing ------------------------------------------------------


def _add_common(sp, json_output: bool = True):
    sp.add_argument("--degrees", action="store_true", help="angles given in degrees")
    sp.add_argument("--out", help="write output to this file instead of stdout")
    sp.add_argument("--config", help="JSON run config; command-line flags override it")
    sp.add_argument("--save-config", help="write the effective run config as JSON and continue")
    if json_output:
        sp.add_argument("--format", choices=["json", "text"])
        sp.add_argument("--json", dest="format", action="store_const", const="json")


def _add_sides(sp):
    sp.add_argument("--coin-params", help='constant coin "a,alpha,beta,delta"')
    sp.add_argument("--coin", help="coin-field config (JSON file or inline object)")
    sp.add_argument("--left-params", help='left tail coin "a,alpha,beta,delta"')
    sp.add_argument("--right-params", help='right tail coin "a,alpha,beta,delta"')


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anisowalk", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    for name, help_ in [("arcs", "spectral arcs and gaps"),
                        ("thresholds", "threshold angles of the two tails")]:
        sp = sub.add_parser(name, help=help_)
        _add_sides(sp)
        _add_common(sp)

    sp = sub.add_parser("mourre", help="Mourre-function lower bound at an angle")
    _add_sides(sp)
    sp.add_argument("--theta", type=float)
    _add_common(sp)

    sp = sub.add_parser("dispersion", help="eigenvalues and velocities on a k-grid (CSV)")
    sp.add_argument("--coin-params")
    sp.add_argument("--points", type=int)
    _add_common(sp, json_output=False)

    for name, help_ in [("evolve", "position distribution after t steps (CSV)"),
                        ("velocity-hist", "histogram of x/t after t steps (CSV)")]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--coin")
        sp.add_argument("--coin-params")
        sp.add_argument("--steps", type=int)
        sp.add_argument("--initial", help='"x:c0,c1[;x:c0,c1...]", default "0:1,0"')
        if name == "velocity-hist":
            sp.add_argument("--bins", type=int)
        _add_common(sp, json_output=False)

    sp = sub.add_parser("eigs", help="finite-ring eigenpairs and classification")
    sp.add_argument("--coin")
    sp.add_argument("--coin-params")
    sp.add_argument("--sites", type=int)
    sp.add_argument("--gap-margin", type=float)
    sp.add_argument("--loc-frac", type=float)
    _add_common(sp)

    sp = sub.add_parser("check-commutators", help="commutator identity residuals on a k-grid")
    sp.add_argument("--coin-params")
    sp.add_argument("--grid", type=int)
    sp.add_argument("--band", type=int)
    sp.add_argument("--tol", type=float, help="exit 1 if any residual exceeds this")
    _add_common(sp)

    sp = sub.add_parser("verify-coin", help="short-range decay check of a coin field")
    sp.add_argument("--coin")
    sp.add_argument("--coin-params")
    sp.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"),
                    help="inclusive site range, default -64 64")
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--eps", type=float)
    _add_common(sp)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = {}
    if getattr(ns, "config", None):
        path = Path(ns.config)
        if not path.is_file():
            raise ValidationError(f"run config file not found: {ns.config}")
        try:
            base = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"run config is not valid JSON: {exc}") from None
        if base.get("subcommand", ns.subcommand) != ns.subcommand:
            raise ValidationError(
                f"run config is for {base['subcommand']!r}, not {ns.subcommand!r}")
    skip = {"config", "save_config"}
    overrides = {k: v for k, v in vars(ns).items()
                 if k not in skip and v is not None and not (k == "degrees" and v is False)}
    cfg = RunConfig.from_dict({**base, **overrides})
    if cfg.format not in ("json", "text"):
        raise ValidationError(f"format must be 'json' or 'text', got {cfg.format!r}")
    return cfg


def run(cfg: RunConfig) -> None:
    try:
        cmd = COMMANDS[cfg.subcommand]
    except KeyError:
        raise ValidationError(f"unknown subcommand {cfg.subcommand!r}") from None
    cmd(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        if getattr(ns, "save_config", None):
            Path(ns.save_config).write_text(
                json.dumps(cfg.to_dict(), indent=2) + "\n", encoding="utf-8")
        run(cfg)
    except ValidationError as exc:
        print(f"anisowalk: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"anisowalk: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
