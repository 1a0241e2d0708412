"""Command-line entry point.

Every command reads an optional JSON config, runs one family of checks and
writes a JSON report (stdout unless ``--report`` is given). Exit codes:
0 when every check passes, 1 when a check ran and failed, 2 for usage,
config or resource errors.

R-matrix entries in a config (keys ``R1``..``R4``, ``r``) take one of::

    {"kitaev": "A" | "B" | "A_inv", "parameter": "u"}
    {"pauli": "1 IIII\\nu XXXX", "convention": "check"}
    {"pauli_file": "path.txt"}
    {"dense": {"shape": [16, 16], "entries": [[re, im], ...]}}
    {"dense_file": "path.json"}
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .cubic import (
    cubic_residual,
    cubic_residual_symbolic,
    kitaev_quadruple,
    verify_railway_row,
    yang_baxter_residual,
)
from .errors import ConfigError, CubicEqError
from .lattice import (
    GEOMETRIES,
    LatticeSpec,
    build_transfer,
    commutator_norm,
    extract_hamiltonian,
    kitaev_transfers,
    partition_trace,
)
from .pauli import PauliOperator
from .report import CONVENTIONS, SCHEMA_VERSION, jsonable
from .rmatrix import RMatrixFour, from_dense, kitaev_A, kitaev_A_inv, kitaev_B
from .solver import AlsConfig, als_search
from .tensor_core import dense_from_json

COMMANDS = (
    "verify-kitaev",
    "verify-cubic",
    "railway",
    "transfer-commute",
    "extract-hamiltonian",
    "partition",
    "yb-check",
    "search-intertwiner",
)

DEFAULTS = {
    "d": 2,
    "backend": "exact",
    "tolerance": 1e-12,
    "seed": 0,
    "grid_points": 20,
    "grid_range": [-2.0, 2.0],
    "swap_uv_assignment": False,
    "leg_order": None,
}

_KITAEV = {"A": kitaev_A, "B": kitaev_B, "A_inv": kitaev_A_inv}


class _Config:
    """Typed access to the merged config; errors name the offending key."""

    def __init__(self, raw: dict):
        self.raw = raw

    def get(self, key, kind=None, default=None):
        value = self.raw.get(key, default)
        if value is None or kind is None:
            return value
        try:
            if kind is bool:
                if not isinstance(value, bool):
                    raise TypeError
                return value
            if kind is int:
                if isinstance(value, bool) or int(value) != value:
                    raise TypeError
                return int(value)
            return kind(value)
        except (TypeError, ValueError):
            raise ConfigError(f"expected {kind.__name__}, got {value!r}", key) from None


def load_config(path: str | None) -> dict:
    if path is None:
        return dict(DEFAULTS)
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "--config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "--config") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", "--config")
    if "d" not in raw:
        raise ConfigError("missing required field", "d")
    merged = dict(DEFAULTS)
    merged.update(raw)
    return merged


def _validate_common(cfg: _Config) -> None:
    d = cfg.get("d", int)
    if d < 2:
        raise ConfigError(f"local dimension must be >= 2, got {d}", "d")
    if cfg.get("backend") not in ("exact", "dense"):
        raise ConfigError(f"backend must be 'exact' or 'dense', got {cfg.get('backend')!r}", "backend")
    if cfg.get("backend") == "exact" and d != 2:
        raise ConfigError("the exact backend is qubit-only (d=2)", "d")
    if cfg.get("tolerance", float) <= 0:
        raise ConfigError("tolerance must be positive", "tolerance")
    rng = cfg.get("grid_range")
    if not (isinstance(rng, list) and len(rng) == 2 and all(isinstance(x, (int, float)) for x in rng)):
        raise ConfigError(f"expected [low, high], got {rng!r}", "grid_range")
    leg = cfg.get("leg_order")
    if leg is not None and (not isinstance(leg, list) or sorted(leg) != [1, 2, 3, 4]):
        raise ConfigError(f"expected a permutation of [1, 2, 3, 4], got {leg!r}", "leg_order")


def _grid(cfg: _Config) -> list:
    if "uv" in cfg.raw:
        points = cfg.raw["uv"]
        if not isinstance(points, list) or not all(isinstance(p, list) and len(p) == 2 for p in points):
            raise ConfigError("expected a list of [u, v] pairs", "uv")
        return [(float(a), float(b)) for a, b in points]
    lo, hi = cfg.get("grid_range")
    n = cfg.get("grid_points", int)
    rng = np.random.default_rng(cfg.get("seed", int))
    return [tuple(float(x) for x in rng.uniform(lo, hi, 2)) for _ in range(n)]


def _rmatrix(entry, key: str, base: Path) -> RMatrixFour:
    if not isinstance(entry, dict):
        raise ConfigError("expected an R-matrix object", key)
    convention = entry.get("convention", "check")
    if convention not in ("check", "plain"):
        raise ConfigError(f"convention must be 'check' or 'plain', got {convention!r}", f"{key}.convention")
    try:
        if "kitaev" in entry:
            make = _KITAEV.get(entry["kitaev"])
            if make is None:
                raise ConfigError(f"unknown Kitaev matrix {entry['kitaev']!r}", f"{key}.kitaev")
            m = make(entry.get("parameter", "u"))
        elif "pauli" in entry or "pauli_file" in entry:
            text = entry["pauli"] if "pauli" in entry else (base / entry["pauli_file"]).read_text()
            m = RMatrixFour(PauliOperator.from_text(text), convention, 2, None, key)
        elif "dense" in entry or "dense_file" in entry:
            source = entry["dense"] if "dense" in entry else base / entry["dense_file"]
            m = from_dense(dense_from_json(source), convention, key)
        else:
            raise ConfigError("needs one of kitaev, pauli, pauli_file, dense, dense_file", key)
    except ConfigError:
        raise
    except (CubicEqError, OSError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), key) from None
    if m.convention == "plain":
        from .rmatrix import to_checked

        m = to_checked(m)
    return m


def _quadruple(cfg: _Config, base: Path, u="u", v="v") -> tuple:
    if all(k not in cfg.raw for k in ("R1", "R2", "R3", "R4")):
        return kitaev_quadruple(u, v, cfg.get("swap_uv_assignment", bool))
    missing = [k for k in ("R1", "R2", "R3", "R4") if k not in cfg.raw]
    if missing:
        raise ConfigError("missing R-matrix", missing[0])
    return tuple(_rmatrix(cfg.raw[k], k, base) for k in ("R1", "R2", "R3", "R4"))


# ---------------------------------------------------------------------------
# commands


def _cubic_checks(quad, cfg: _Config, backend: str) -> tuple[bool, dict]:
    tol = cfg.get("tolerance", float)
    results: dict = {}
    ok = True
    if backend == "exact":
        if not all(m.backend == "pauli" for m in quad):
            raise ConfigError("the exact backend needs Pauli-backed R-matrices", "backend")
        diff = cubic_residual_symbolic(quad)
        results["symbolic"] = {"exact_zero": diff.is_zero(), "difference_terms": len(diff)}
        ok = diff.is_zero()
    points = []
    worst = 0.0
    for u, v in _grid(cfg):
        rep = cubic_residual(quad, u, v, tol)
        worst = max(worst, rep.relative)
        points.append({"u": u, "v": v, "absolute": rep.absolute, "relative": rep.relative})
    results["numeric"] = {"points": points, "max_relative": worst, "tolerance": tol, "passed": worst <= tol}
    return ok and worst <= tol, results


def cmd_verify_kitaev(cfg: _Config, base: Path) -> tuple[bool, dict]:
    if cfg.get("d", int) != 2:
        raise ConfigError("the Kitaev family is defined for d=2", "d")
    swap = cfg.get("swap_uv_assignment", bool)
    ok, results = _cubic_checks(kitaev_quadruple(swap_uv_assignment=swap), cfg, cfg.get("backend"))
    # the other assignment is reported for reference; it does not affect the exit code
    other = cubic_residual_symbolic(kitaev_quadruple(swap_uv_assignment=not swap))
    results["other_assignment"] = {"swap_uv_assignment": not swap, "exact_zero": other.is_zero()}
    return ok, results


def cmd_verify_cubic(cfg: _Config, base: Path) -> tuple[bool, dict]:
    quad = _quadruple(cfg, base)
    backend = cfg.get("backend")
    if backend == "exact" and not all(m.backend == "pauli" for m in quad):
        backend = "dense"
    ok, results = _cubic_checks(quad, cfg, backend)
    results["backend_used"] = backend
    return ok, results


def _lattice(cfg: _Config) -> LatticeSpec:
    try:
        return LatticeSpec(cfg.get("L", int, 4), cfg.get("d", int))
    except CubicEqError as exc:
        raise ConfigError(str(exc), "L") from None


def _geometry(cfg: _Config) -> str:
    g = cfg.get("geometry", str, "edge")
    if g not in GEOMETRIES:
        raise ConfigError(f"geometry must be one of {GEOMETRIES}, got {g!r}", "geometry")
    return g


def cmd_railway(cfg: _Config, base: Path) -> tuple[bool, dict]:
    spec = _lattice(cfg)
    quad = _quadruple(cfg, base)
    backend = cfg.get("backend")
    if backend == "exact":
        rep = verify_railway_row(spec.L, quad, backend="exact")
    else:
        rep = verify_railway_row(
            spec.L, quad, cfg.get("u", float, 0.3), cfg.get("v", float, 0.7), "dense", cfg.get("tolerance", float)
        )
    return rep.passed, rep.to_dict()


def cmd_transfer_commute(cfg: _Config, base: Path) -> tuple[bool, dict]:
    spec = _lattice(cfg)
    geometry = _geometry(cfg)
    leg = cfg.get("leg_order")
    backend = cfg.get("backend")
    if backend == "exact":
        u, v = "u", "v"
    else:
        u, v = cfg.get("u", float, 0.3), cfg.get("v", float, 0.7)

    def full(p):
        ta = build_transfer(spec, kitaev_A, "white", p, backend, geometry, leg)
        tb = build_transfer(spec, kitaev_B, "dark", p, backend, geometry, leg)
        return ta @ tb

    tol = cfg.get("commutator_tolerance", float, 1e-10)
    rep = commutator_norm(full(u), full(v), tol) if backend == "dense" else commutator_norm(full(u), full(v))
    return rep.passed, rep.to_dict()


def cmd_extract_hamiltonian(cfg: _Config, base: Path) -> tuple[bool, dict]:
    spec = _lattice(cfg)
    order = cfg.get("order", str, "AB")
    if order not in ("AB", "BA"):
        raise ConfigError(f"order must be 'AB' or 'BA', got {order!r}", "order")
    h1, rep = extract_hamiltonian(spec, _geometry(cfg), order)
    out = rep.to_dict()
    out["hamiltonian"] = h1.to_text()
    return rep.passed, out


def cmd_partition(cfg: _Config, base: Path) -> tuple[bool, dict]:
    spec = _lattice(cfg)
    n = cfg.get("N", int, 2)
    if n < 0:
        raise ConfigError("N must be >= 0", "N")
    which = cfg.get("transfer", str, "AB")
    if which not in ("A", "B", "AB"):
        raise ConfigError(f"transfer must be 'A', 'B' or 'AB', got {which!r}", "transfer")
    backend = cfg.get("backend")
    u = "u" if backend == "exact" else cfg.get("u", float, 0.3)
    ta, tb = kitaev_transfers(spec, u, backend, _geometry(cfg))
    t = {"A": ta, "B": tb, "AB": ta @ tb}[which]
    value = partition_trace(t, n)
    result = {"N": n, "transfer": which, "L": spec.L}
    result["trace"] = str(value) if backend == "exact" else [value.real, value.imag]
    return True, result


def cmd_yb_check(cfg: _Config, base: Path) -> tuple[bool, dict]:
    d = cfg.get("d", int)
    preset = cfg.get("preset", str, "swap")
    tol = cfg.get("tolerance", float)
    if "r" in cfg.raw:
        try:
            r = dense_from_json(cfg.raw["r"] if isinstance(cfg.raw["r"], dict) else base / cfg.raw["r"])
        except (CubicEqError, OSError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "r") from None
        matrices = [("r", r)]
    elif preset == "swap":
        eye = np.eye(d * d)
        matrices = [("swap", eye[[(k % d) * d + k // d for k in range(d * d)]])]
    elif preset == "identity":
        matrices = [("identity", np.eye(d * d))]
    elif preset == "random":
        rng = np.random.default_rng(cfg.get("seed", int))
        matrices = [(f"random{k}", rng.standard_normal((d * d, d * d))) for k in range(cfg.get("samples", int, 10))]
    else:
        raise ConfigError(f"unknown preset {preset!r}", "preset")
    residuals = {name: yang_baxter_residual(r) for name, r in matrices}
    return all(x <= tol for x in residuals.values()), {"residuals": residuals, "tolerance": tol}


def cmd_search_intertwiner(cfg: _Config, base: Path) -> tuple[bool, dict]:
    u, v = cfg.get("u", float, 0.3), cfg.get("v", float, 0.7)
    if "R1" in cfg.raw or "R2" in cfg.raw:
        r1 = _rmatrix(cfg.raw.get("R1"), "R1", base)
        r2 = _rmatrix(cfg.raw.get("R2"), "R2", base)
    else:
        r1, r2 = kitaev_A(), kitaev_B("v")
    try:
        als = AlsConfig(
            max_iterations=cfg.get("max_iterations", int, 500),
            residual_tolerance=cfg.get("residual_tolerance", float, 1e-8),
            stall_tolerance=cfg.get("stall_tolerance", float, 1e-10),
            seed=cfg.get("seed", int),
        )
    except CubicEqError as exc:
        raise ConfigError(str(exc), "max_iterations") from None
    trace = als_search(r1, r2, u, v, als)
    out = trace.to_dict(include_pair=cfg.get("export_pair", bool, False))
    out["u"], out["v"] = u, v
    return trace.converged and trace.monotone, out


HANDLERS = {
    "verify-kitaev": cmd_verify_kitaev,
    "verify-cubic": cmd_verify_cubic,
    "railway": cmd_railway,
    "transfer-commute": cmd_transfer_commute,
    "extract-hamiltonian": cmd_extract_hamiltonian,
    "partition": cmd_partition,
    "yb-check": cmd_yb_check,
    "search-intertwiner": cmd_search_intertwiner,
}


def _strip_timing(x):
    if isinstance(x, dict):
        return {k: _strip_timing(v) for k, v in x.items() if k not in ("wall_time_ms", "timestamp")}
    if isinstance(x, list):
        return [_strip_timing(v) for v in x]
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubiceq", description="Verify and search solutions of the cubic equations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config file (must contain 'd')")
    parser.add_argument("--report", help="write the JSON report here instead of stdout")
    parser.add_argument("--deterministic", action="store_true", help="omit timestamps and timings from the report")
    parser.add_argument("--backend", choices=("exact", "dense"), help="override the config backend")
    parser.add_argument("--seed", type=int, help="override the config seed")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        raw = load_config(args.config)
        if args.backend is not None:
            raw["backend"] = args.backend
        if args.seed is not None:
            raw["seed"] = args.seed
        cfg = _Config(raw)
        _validate_common(cfg)
        base = Path(args.config).parent if args.config else Path.cwd()
        passed, results = HANDLERS[args.command](cfg, base)
    except ConfigError as exc:
        print(f"cubiceq: config error in key {exc.key!r}: {exc}", file=sys.stderr)
        return 2
    except CubicEqError as exc:
        print(f"cubiceq: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    report = {
        "schema": SCHEMA_VERSION,
        "command": args.command,
        "version": __version__,
        "passed": bool(passed),
        "conventions": dict(
            CONVENTIONS,
            swap_uv_assignment=bool(raw.get("swap_uv_assignment")),
            uv_assignment="R1(v) R2(u)" if raw.get("swap_uv_assignment") else "R1(u) R2(v)",
        ),
        "config": raw,
        "results": results,
        "wall_time_ms": 1e3 * (time.perf_counter() - t0),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    report = jsonable(report)
    if args.deterministic:
        report = _strip_timing(report)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
