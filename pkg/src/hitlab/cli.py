"""Command-line driver.

Subcommands:
  eval    evaluate phi, u1, w, h, v on a grid to CSV files
  verify  run the verification suite (residuals, bound, boundary limit) to JSON
  mc      Monte Carlo cross-check of v plus a first-passage histogram
  sweep   vary one scalar config key and emit long-format CSV

Everything is driven by a single JSON config (reproducible experiment
records); the only flags are --config, --seed (override), and --out
(override).  Exit codes: 0 pass, 1 verification failure, 2 config error,
3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .boundary import PolyBoundary
from .closed_forms import (
    ExponentialOmega,
    GaussOmega,
    ImagesOmega,
    PhiParams,
    U1Params,
    hitting_density,
)
from .errors import ConfigError, HitlabError
from .montecarlo import MCConfig, hitting_time_histogram, v_mc_estimate
from .residual import (
    Grid,
    bound_check,
    boundary_limit_check,
    conservation_check,
    residual_adjoint,
    residual_backward,
)
from .transform import (
    TransformConfig,
    TransformedField,
    hitting_target_config,
    is_canonical_target,
    v_from_w,
    w_eval,
)

_RATIO_WINDOW = (3.5, 4.5)
_EXACT_FLOOR = 1e-12
_MC_ALLOWANCE = 2e-3

_SCHEMA = {
    "problem": {
        "f": None,
        "s": None,
        "lambda": None,
        "sign_x": None,
        "sign_int": None,
        "omega": {"kind": None, "mu": None, "sign": None, "y": None},
        "k": None,
        "b2_at_zero": None,
        "tol": None,
    },
    "grid": {"t0": None, "t1": None, "x0": None, "x1": None, "nt": None, "nx": None},
    "mc": {
        "n_paths": None,
        "n_steps": None,
        "seed": None,
        "t": None,
        "x": None,
        "horizon": None,
        "dt": None,
        "n_bins": None,
    },
    "sweep": {"key": None, "values": None, "field": None},
    "output": {"prefix": None},
}


def _check_keys(doc, schema, path=""):
    if not isinstance(doc, dict):
        return
    for key, value in doc.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown config key: {where}")
        sub = schema[key]
        if isinstance(sub, dict):
            _check_keys(value, sub, where)


def load_config(path: str) -> dict:
    """Parse and validate the JSON run configuration."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(doc, _SCHEMA)
    return doc


def _build_omega(spec: dict):
    kind = spec.get("kind", "exponential")
    if kind == "exponential":
        return ExponentialOmega(mu=spec.get("mu", 0.0), sign=spec.get("sign", 1))
    if kind == "gauss":
        return GaussOmega(y=spec.get("y", 0.0))
    if kind == "images":
        return ImagesOmega(y=spec["y"])
    if kind == "target":
        return None  # resolved by hitting_target_config
    raise ConfigError(f"unknown omega kind {kind!r}")


def build_problem(doc: dict) -> tuple[TransformConfig, float, float]:
    """(TransformConfig, horizon s, quadrature tol) from the problem section."""
    prob = doc.get("problem", {})
    f = PolyBoundary(prob.get("f", [0.0]))
    s = float(prob.get("s", 1.0))
    tol = float(prob.get("tol", 1e-10))
    omega_spec = prob.get("omega", {"kind": "exponential"})
    kind = omega_spec.get("kind", "exponential")
    if kind == "target":
        if prob.get("lambda", 0.0) != 0.0:
            raise ConfigError("the hitting target pairs with lambda = 0 only")
        if prob.get("k", 0.0) != 0.0 or prob.get("b2_at_zero", 0.0) != 0.0:
            raise ConfigError("the hitting target requires k = 0 and b2_at_zero = 0")
        return hitting_target_config(f, s), s, tol
    phi = PhiParams(
        f,
        lam=float(prob.get("lambda", 0.0)),
        sign_x=int(prob.get("sign_x", 1)),
        sign_int=int(prob.get("sign_int", -1)),
    )
    u1 = U1Params(f, s, _build_omega(omega_spec))
    cfg = TransformConfig(
        phi=phi,
        u1=u1,
        k=float(prob.get("k", 0.0)),
        b2_at_zero=float(prob.get("b2_at_zero", 0.0)),
    )
    return cfg, s, tol


def build_grid(doc: dict) -> Grid:
    sect = doc.get("grid")
    if sect is None:
        raise ConfigError("config needs a grid section")
    try:
        grid = Grid(
            t0=float(sect.get("t0", 0.0)),
            t1=float(sect["t1"]),
            x0=float(sect.get("x0", 0.1)),
            x1=float(sect["x1"]),
            nt=int(sect["nt"]),
            nx=int(sect["nx"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid grid section: {exc}") from exc
    if grid.nt < 3 or grid.nx < 3:
        raise ConfigError("grid too small: need nt >= 3 and nx >= 3")
    return grid


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_field_csv(path: str, grid: Grid, rows) -> None:
    with open(path, "w") as fh:
        fh.write("t,x,value\n")
        for t in grid.ts:
            vals = np.asarray(rows(float(t), grid.xs), dtype=float)
            for x, v in zip(grid.xs, vals):
                fh.write(f"{_fmt(t)},{_fmt(x)},{_fmt(v)}\n")


def run_eval(doc: dict, prefix: str) -> int:
    cfg, s, tol = build_problem(doc)
    grid = build_grid(doc)
    b2_mode = "zero" if is_canonical_target(cfg) else "solve"
    field = TransformedField(cfg, t_max=grid.t1, b2_mode=b2_mode, abs_tol=tol)
    _write_field_csv(f"{prefix}_phi.csv", grid, cfg.phi.value)
    _write_field_csv(f"{prefix}_u1.csv", grid, cfg.u1.value)
    _write_field_csv(f"{prefix}_w.csv", grid, field.row)
    _write_field_csv(f"{prefix}_h.csv", grid,
                     lambda t, xs: hitting_density(s - t, xs))
    _write_field_csv(f"{prefix}_v.csv", grid,
                     lambda t, xs: v_from_w(field.row(t, xs), t, xs, s))
    return 0


def _residual_passed(report) -> bool:
    if report.max_abs <= _EXACT_FLOOR:
        return True
    ratio = report.convergence_ratio
    return ratio is not None and _RATIO_WINDOW[0] <= ratio <= _RATIO_WINDOW[1]


def run_verify(doc: dict, prefix: str) -> int:
    cfg, s, tol = build_problem(doc)
    grid = build_grid(doc)
    b2_mode = "zero" if is_canonical_target(cfg) else "solve"
    field = TransformedField(cfg, t_max=grid.t1, b2_mode=b2_mode, abs_tol=tol)

    backward = residual_backward(field, cfg.phi.f, grid)
    adjoint = residual_adjoint(cfg.phi, cfg.phi.f, grid)
    conservation = conservation_check(cfg, grid)
    bound = bound_check(cfg, s, grid, tol=1e-9 + tol)

    b2_span = float(np.max(np.abs(field.b2(grid.ts))))
    mode = "all_t" if b2_span < 1e-12 else "t0_only"
    limit_ts = grid.ts if mode == "all_t" else np.array([0.0])
    limit = boundary_limit_check(field, limit_ts, mode=mode)

    report = {
        "backward": {**backward.to_dict(), "passed": _residual_passed(backward)},
        "adjoint": {**adjoint.to_dict(), "passed": _residual_passed(adjoint)},
        "conservation": {**conservation.to_dict(),
                         "passed": _residual_passed(conservation)},
        "bound": {
            "n_checked": bound.n_checked,
            "n_violations": len(bound.violations),
            "skipped": bound.skipped,
            "passed": bound.passed or bound.skipped is not None,
        },
        "boundary_limit": {
            "mode": limit.mode,
            "slopes": [[t, slope] for t, slope in limit.slopes],
            "passed": limit.passed,
        },
    }
    with open(f"{prefix}_verify.json", "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    all_pass = all(section["passed"] for section in report.values())
    print(json.dumps({k: v["passed"] for k, v in report.items()}))
    return 0 if all_pass else 1


def run_mc(doc: dict, prefix: str, seed_override: int | None) -> int:
    sect = doc.get("mc")
    if sect is None:
        raise ConfigError("config needs an mc section")
    prob_cfg, s, tol = build_problem(doc)
    f = prob_cfg.phi.f
    try:
        mc_cfg = MCConfig(
            f=f,
            t=float(sect.get("t", 0.0)),
            x=float(sect["x"]),
            s=s,
            n_paths=int(sect.get("n_paths", 10_000)),
            n_steps=int(sect.get("n_steps", 500)),
            seed=int(sect["seed"] if seed_override is None else seed_override),
        )
    except KeyError as exc:
        raise ConfigError(f"mc section missing key: {exc}") from exc

    estimate = v_mc_estimate(mc_cfg)
    with open(f"{prefix}_v_mc.json", "w") as fh:
        json.dump(estimate.to_dict(), fh, indent=2)
        fh.write("\n")

    target = hitting_target_config(f, s)
    w = w_eval(target, mc_cfg.t, mc_cfg.x, abs_tol=tol)
    v_quad = float(v_from_w(w, mc_cfg.t, mc_cfg.x, s))
    gap = abs(estimate.mean - v_quad)
    allowance = 3.0 * estimate.std_error + _MC_ALLOWANCE
    verdict = "PASS" if gap <= allowance else "FAIL"
    print(f"v_mc = {_fmt(estimate.mean)} +/- {_fmt(estimate.std_error)}")
    print(f"v_quadrature = {_fmt(v_quad)}")
    print(f"|v_mc - v_quadrature| = {_fmt(gap)} (tolerance {_fmt(allowance)})")
    print(f"verdict: {verdict}")

    horizon = float(sect.get("horizon", s))
    dt = float(sect.get("dt", horizon / 1000.0))
    hist = hitting_time_histogram(
        mc_cfg.x, horizon, dt,
        n_paths=mc_cfg.n_paths, seed=mc_cfg.seed,
        n_bins=int(sect.get("n_bins", 50)),
    )
    with open(f"{prefix}_hist.csv", "w") as fh:
        fh.write("bin_left,bin_right,density\n")
        for left, right, dens in zip(hist.bin_edges[:-1], hist.bin_edges[1:],
                                     hist.density):
            fh.write(f"{_fmt(left)},{_fmt(right)},{_fmt(dens)}\n")
    return 0 if verdict == "PASS" else 1


def _set_nested(doc: dict, dotted: str, value) -> dict:
    out = json.loads(json.dumps(doc))  # deep copy via round-trip
    node = out
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return out


def run_sweep(doc: dict, prefix: str) -> int:
    sect = doc.get("sweep")
    if sect is None:
        raise ConfigError("config needs a sweep section")
    try:
        key = sect["key"]
        values = sect["values"]
    except KeyError as exc:
        raise ConfigError(f"sweep section missing key: {exc}") from exc
    field_name = sect.get("field", "w")
    if field_name not in ("w", "phi", "u1", "v"):
        raise ConfigError(f"unknown sweep field {field_name!r}")
    grid = build_grid(doc)
    with open(f"{prefix}_sweep.csv", "w") as fh:
        fh.write("param,t,x,value\n")
        for value in values:
            cfg, s, tol = build_problem(_set_nested(doc, key, value))
            if field_name == "phi":
                rows = cfg.phi.value
            elif field_name == "u1":
                rows = cfg.u1.value
            else:
                tf = TransformedField(cfg, t_max=grid.t1, abs_tol=tol)
                if field_name == "w":
                    rows = tf.row
                else:
                    rows = lambda t, xs: v_from_w(tf.row(t, xs), t, xs, s)
            for t in grid.ts:
                vals = np.asarray(rows(float(t), grid.xs), dtype=float)
                for x, v in zip(grid.xs, vals):
                    fh.write(f"{_fmt(value)},{_fmt(t)},{_fmt(x)},{_fmt(v)}\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hitlab",
        description="Evaluate, verify, and cross-check conservation-law "
                    "transformed fields and their hitting-density targets.",
    )
    parser.add_argument("command", choices=["eval", "verify", "mc", "sweep"])
    parser.add_argument("--config", required=True, help="path to JSON run config")
    parser.add_argument("--seed", type=int, default=None, help="override mc seed")
    parser.add_argument("--out", default=None, help="override output prefix")
    args = parser.parse_args(argv)

    try:
        doc = load_config(args.config)
        prefix = args.out or doc.get("output", {}).get("prefix", "hitlab")
        if args.command == "eval":
            return run_eval(doc, prefix)
        if args.command == "verify":
            return run_verify(doc, prefix)
        if args.command == "mc":
            return run_mc(doc, prefix, args.seed)
        return run_sweep(doc, prefix)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (HitlabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
