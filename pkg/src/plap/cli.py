"""Command-line surface: constants, integration, shooting, portraits,
the critical exponent, and the regime classifier.

Output formats
--------------
* trajectories: CSV with columns ``tau,y,Y,r,w,dw`` (12 significant
  digits), events in a sibling ``*.events.csv`` with ``kind,tau,y,Y``;
* reports: JSON with 17 significant digits (round-trip exact);
* portraits: plain-geometry SVG with 9 significant digits;
* every file-producing run emits a ``*.manifest.json`` listing each
  output with its SHA-256 checksum.

The environment variable ``PLAP_CONFIG`` may point at a ``key=value``
file holding :class:`~plap.integrate.IntegrationConfig` overrides;
``--tol`` and ``--tau-max`` override in turn.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .params import ParameterError, ProblemParams, derive_constants, m_ell_point
from .integrate import IntegrationConfig, PhaseState, Trajectory, integrate_s
from .trajectories import (
    TRAJECTORY_KINDS,
    SpecialTrajectorySpec,
    IntegrationError,
    shoot,
)
from .analysis import (
    AnalysisError,
    BracketError,
    classify_regime,
    find_alpha_c,
)

SCHEMA_VERSION = 1
RECIPE_DIR = Path(__file__).parent / "recipes"

EXIT_BAD_PARAMS = 2


# ---------------------------------------------------------------------------
# deterministic serialization


def _num(x: float, sig: int) -> str:
    """Fixed significant-digit decimal rendering (deterministic across runs)."""
    if isinstance(x, float) and not math.isfinite(x):
        return "null"
    return format(float(x), f".{sig}g")


def _to_json(obj, sig: int = 17, indent: int = 0) -> str:
    """JSON text with floats at a fixed number of significant digits.

    The stdlib encoder renders floats with ``repr``; a hand-rolled walk
    over the (small, simple) report structures keeps the digit count and
    key order fixed so identical runs are byte-identical.
    """
    pad = "  " * indent
    pad1 = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj), sig)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{pad1}{json.dumps(str(k))}: {_to_json(v, sig, indent + 1)}"
            for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = ",\n".join(f"{pad1}{_to_json(v, sig, indent + 1)}" for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    raise TypeError(f"unserializable object of type {type(obj)!r}")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclasses.dataclass
class RunManifest:
    """Record of one file-producing CLI run: what was asked, with which
    configuration, and the checksums of everything written."""

    command: str
    params: Optional[dict]
    config_hash: str
    tool_version: str
    outputs: list  # [{"path": ..., "sha256": ...}]
    wall_time: float

    def write(self, path: Path) -> None:
        path.write_text(_to_json(dataclasses.asdict(self)) + "\n")


# ---------------------------------------------------------------------------
# parameter / config plumbing


def _build_params(args) -> ProblemParams:
    missing = [f for f in ("N", "p", "alpha", "eps")
               if getattr(args, f, None) is None]
    if missing:
        raise ParameterError("missing required flags: " +
                             ", ".join("--" + m for m in missing))
    return ProblemParams(N=args.N, p=args.p, alpha=args.alpha, epsilon=args.eps)


def _build_config(args) -> IntegrationConfig:
    overrides: dict = {}
    cfg_file = os.environ.get("PLAP_CONFIG")
    if cfg_file:
        valid = {f.name: f.type for f in dataclasses.fields(IntegrationConfig)}
        for line in Path(cfg_file).read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"malformed config line {line!r} "
                                     f"in {cfg_file}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in valid:
                raise ParameterError(f"unknown config key {key!r} in {cfg_file}")
            overrides[key] = float(val.strip())
    if getattr(args, "tol", None) is not None:
        overrides["rel_tol"] = args.tol
        overrides.setdefault("abs_tol", min(1e-10, args.tol))
    if getattr(args, "tau_max", None) is not None:
        overrides["max_time_span"] = args.tau_max
    return IntegrationConfig(**overrides)


def _config_hash(cfg: IntegrationConfig) -> str:
    blob = ",".join(f"{f.name}={getattr(cfg, f.name)!r}"
                    for f in dataclasses.fields(cfg))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _params_dict(params: ProblemParams) -> dict:
    return {"N": params.N, "p": params.p, "alpha": params.alpha,
            "eps": params.epsilon}


# ---------------------------------------------------------------------------
# CSV / SVG emission


def _write_trajectory_csv(traj: Trajectory, out: Path) -> list[Path]:
    r, w, dw = traj.profile()
    lines = ["tau,y,Y,r,w,dw"]
    for i in range(traj.tau.size):
        lines.append(",".join(_num(v, 12) for v in
                              (traj.tau[i], traj.ys[0][i], traj.ys[1][i],
                               r[i], w[i], dw[i])))
    out.write_text("\n".join(lines) + "\n")
    ev_path = out.with_suffix(".events.csv") if out.suffix else \
        out.parent / (out.name + ".events.csv")
    ev_lines = ["kind,tau,y,Y"]
    for ev in traj.events:
        ev_lines.append(",".join([ev.kind] + [_num(v, 12) for v in
                                              (ev.time, ev.state.y, ev.state.Y)]))
    ev_path.write_text("\n".join(ev_lines) + "\n")
    return [out, ev_path]


def _write_portrait_svg(trajs: Sequence[Trajectory], params: ProblemParams,
                        out: Path) -> None:
    """Phase-plane polylines with the stationary points marked; plain
    geometry, no scripts, 9 significant digits."""
    points = [(0.0, 0.0)]
    m = m_ell_point(params)
    if m is not None:
        points += [m, (-m[0], -m[1])]

    # view bounds from the bulk of the samples (2nd..98th percentile) so a
    # single escaping arc does not collapse everything else to one pixel
    all_y = np.concatenate([t.ys[0] for t in trajs] or [np.zeros(1)])
    all_Y = np.concatenate([t.ys[1] for t in trajs] or [np.zeros(1)])
    xs = [p[0] for p in points] + list(np.percentile(all_y, (2.0, 98.0)))
    ys = [p[1] for p in points] + list(np.percentile(all_Y, (2.0, 98.0)))
    span_x = max(max(xs) - min(xs), 1e-3)
    span_y = max(max(ys) - min(ys), 1e-3)
    x0, y0 = min(xs) - 0.05 * span_x, min(ys) - 0.05 * span_y
    span_x *= 1.1
    span_y *= 1.1
    width = 640.0
    height = 480.0

    def to_px(y, Y):
        # clamp to one frame beyond the viewBox: escaping arcs stay legal
        # SVG without astronomically large coordinates
        px = min(max((y - x0) / span_x * width, -width), 2.0 * width)
        py = min(max(height - (Y - y0) / span_y * height, -height),
                 2.0 * height)
        return px, py

    def n9(v):
        return _num(v, 9)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(width)}" '
        f'height="{int(height)}" viewBox="0 0 {int(width)} {int(height)}">',
        f'<rect width="{int(width)}" height="{int(height)}" fill="white"/>',
    ]
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#17becf", "#7f7f7f"]
    for i, t in enumerate(trajs):
        pts = " ".join(f"{n9(px)},{n9(py)}" for px, py in
                       (to_px(t.ys[0][j], t.ys[1][j])
                        for j in range(t.tau.size)))
        color = palette[i % len(palette)]
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1"/>')
    for (py, pY) in points:
        px, pz = to_px(py, pY)
        parts.append(f'<circle cx="{n9(px)}" cy="{n9(pz)}" r="3" '
                     f'fill="black"/>')
    parts.append("</svg>")
    out.write_text("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args) -> int:
    params = _build_params(args)
    dc = derive_constants(params)
    rec = dataclasses.asdict(dc)
    rec["ell_exists"] = dc.ell is not None
    rec["alpha_2_exists"] = dc.alpha_2 is not None
    rec["nu_alpha_exists"] = dc.nu_alpha is not None
    out = {"schema_version": SCHEMA_VERSION, "params": _params_dict(params),
           "constants": rec}
    print(_to_json(out))
    return 0


def _emit(traj: Trajectory, args, command: str, params: ProblemParams,
          cfg: IntegrationConfig, t_start: float) -> int:
    out = Path(args.out) if args.out else Path(f"{command}.csv")
    files = _write_trajectory_csv(traj, out)
    manifest = RunManifest(
        command=command,
        params=_params_dict(params),
        config_hash=_config_hash(cfg),
        tool_version=__version__,
        outputs=[{"path": str(f), "sha256": _sha256(f)} for f in files],
        wall_time=time.monotonic() - t_start,
    )
    mpath = out.parent / (out.stem + ".manifest.json")
    manifest.write(mpath)
    print(f"wrote {', '.join(str(f) for f in files)} and {mpath}")
    print(f"termination: {traj.termination}  samples: {traj.tau.size}  "
          f"events: {len(traj.events)}")
    return 0


def cmd_integrate(args) -> int:
    t_start = time.monotonic()
    params = _build_params(args)
    cfg = _build_config(args)
    derive_constants(params)  # rejects alpha = 0 before any integration
    state = PhaseState(args.tau0, args.y0, args.Y0)
    traj = integrate_s(state, params, direction=args.direction, config=cfg)
    return _emit(traj, args, "integrate", params, cfg, t_start)


def cmd_shoot(args) -> int:
    t_start = time.monotonic()
    params = _build_params(args)
    cfg = _build_config(args)
    extra: tuple = ()
    if args.kind in ("T_r", "T_eps") and args.a is not None:
        extra = (args.a,)
    elif args.kind in ("T_plus", "T_minus"):
        extra = (args.a if args.a is not None else 1.0,
                 args.c if args.c is not None else
                 (1.0 if args.kind == "T_plus" else -1.0))
    spec = SpecialTrajectorySpec(kind=args.kind, offset=args.offset,
                                 extra=extra)
    traj = shoot(spec, params, cfg)
    return _emit(traj, args, f"shoot-{args.kind}", params, cfg, t_start)


def _load_recipe(args) -> tuple[ProblemParams, list]:
    """Parameters and seed states from --recipe / --seed-file / flags."""
    seeds: list = []
    params = None
    if args.recipe:
        path = Path(args.recipe)
        if not path.exists():
            path = RECIPE_DIR / f"{args.recipe}.json"
        if not path.exists():
            raise ParameterError(f"unknown recipe {args.recipe!r}")
        rec = json.loads(path.read_text())
        params = ProblemParams(N=rec["N"], p=rec["p"], alpha=rec["alpha"],
                               epsilon=rec["eps"])
        seeds = [tuple(s) for s in rec.get("seeds", [])]
    else:
        params = _build_params(args)
    if args.seed_file:
        seeds = []
        for line in Path(args.seed_file).read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            y, Y = line.replace(",", " ").split()
            seeds.append((float(y), float(Y)))
    return params, seeds


def cmd_portrait(args) -> int:
    t_start = time.monotonic()
    params, seeds = _load_recipe(args)
    cfg = _build_config(args)
    derive_constants(params)
    trajs = []
    for (y, Y) in seeds:
        for direction in (1, -1):
            trajs.append(integrate_s(PhaseState(0.0, y, Y), params,
                                     direction=direction, config=cfg))
    out = Path(args.out) if args.out else Path("portrait.svg")
    _write_portrait_svg(trajs, params, out)
    manifest = RunManifest(
        command="portrait",
        params=_params_dict(params),
        config_hash=_config_hash(cfg),
        tool_version=__version__,
        outputs=[{"path": str(out), "sha256": _sha256(out)}],
        wall_time=time.monotonic() - t_start,
    )
    mpath = out.parent / (out.stem + ".manifest.json")
    manifest.write(mpath)
    print(f"wrote {out} and {mpath} ({len(trajs)} arcs)")
    return 0


def cmd_alpha_c(args) -> int:
    if args.N is None or args.p is None:
        raise ParameterError("alpha-c requires --N and --p")
    cfg = _build_config(args)
    try:
        res = find_alpha_c(args.N, args.p, tol=args.tol or 1e-6, config=cfg,
                           force_bisection=args.force_bisection)
    except BracketError as exc:
        out = {"schema_version": SCHEMA_VERSION, "error": str(exc),
               "phi_at_ends": getattr(exc, "phi_at_ends", None),
               "bracket": getattr(exc, "bracket", None)}
        print(_to_json(out))
        return 1
    out = {"schema_version": SCHEMA_VERSION,
           "N": args.N, "p": args.p,
           "alpha_c": res.value,
           "bracket": list(res.bracket),
           "iterations": res.iterations,
           "phi_at_ends": list(res.phi_at_ends),
           "method": res.method}
    print(_to_json(out))
    return 0


def cmd_classify(args) -> int:
    params = _build_params(args)
    cfg = _build_config(args)
    report = classify_regime(params, config=cfg)
    dc = report.constants
    const_rec = dataclasses.asdict(dc)
    out = {
        "schema_version": SCHEMA_VERSION,
        "params": _params_dict(params),
        "constants": const_rec,
        "regime_tag": report.theorem_tag,
        "stationary_points": [
            {"point_id": sp.point_id,
             "location": list(sp.location),
             "local_type": sp.local_type,
             "eigenvalues": (None if sp.eigenvalues is None else
                             [[z.real, z.imag] for z in sp.eigenvalues]),
             "eigenvectors": (None if sp.eigenvectors is None else
                              [list(v) for v in sp.eigenvectors])}
            for sp in report.stationary_points],
        "trajectories": report.trajectories,
        "cycles": [
            {"section": c.section,
             "fixed_point": c.fixed_point,
             "period_tau": c.period_tau,
             "stability": c.stability,
             "floquet_mean": c.floquet_mean,
             "source": c.meta.get("source")}
            for c in report.cycles],
        "checks": [
            {"clause": desc, "source_theorem": report.theorem_tag,
             "status": status}
            for desc, status in report.checks],
        "phi_value": report.phi_value,
        "alpha_c_bracket": (list(report.alpha_c_bracket)
                            if report.alpha_c_bracket else None),
        "passed": report.passed(),
    }
    print(_to_json(out))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_param_flags(sp, need_alpha=True):
    sp.add_argument("--N", type=int, help="space dimension (integer >= 1)")
    sp.add_argument("--p", type=float, help="diffusion exponent (> 2)")
    if need_alpha:
        sp.add_argument("--alpha", type=float, help="similarity exponent")
        sp.add_argument("--eps", type=int, choices=(-1, 1),
                        help="time-direction sign")
    sp.add_argument("--tol", type=float, help="relative tolerance override")
    sp.add_argument("--tau-max", dest="tau_max", type=float,
                    help="maximum tau span")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plap",
        description="Phase-plane analysis of radial self-similar profiles "
                    "of the p-Laplacian heat equation (p > 2).")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constants", help="closed-form derived constants")
    _add_param_flags(sp)
    sp.set_defaults(fn=cmd_constants)

    sp = sub.add_parser("integrate", help="integrate from an explicit state")
    _add_param_flags(sp)
    sp.add_argument("--y0", type=float, required=True)
    sp.add_argument("--Y0", type=float, required=True)
    sp.add_argument("--tau0", type=float, default=0.0)
    sp.add_argument("--direction", type=int, choices=(-1, 1), default=1)
    sp.add_argument("--out", help="CSV output path")
    sp.set_defaults(fn=cmd_integrate)

    sp = sub.add_parser("shoot", help="construct a special trajectory")
    _add_param_flags(sp)
    sp.add_argument("--kind", required=True, choices=TRAJECTORY_KINDS)
    sp.add_argument("--a", type=float, help="amplitude (T_r: w(0); "
                    "T_eps: edge radius; T_plus/T_minus: leading amplitude)")
    sp.add_argument("--c", type=float, help="tail coefficient (T_plus/T_minus)")
    sp.add_argument("--offset", type=float, default=1e-7,
                    help="launch offset from the organizing point")
    sp.add_argument("--out", help="CSV output path")
    sp.set_defaults(fn=cmd_shoot)

    sp = sub.add_parser("portrait", help="render a phase portrait SVG")
    _add_param_flags(sp)
    sp.add_argument("--recipe", help="recipe name (fig01..fig17) or path")
    sp.add_argument("--seed-file", dest="seed_file",
                    help="file of seed states, one 'y Y' pair per line")
    sp.add_argument("--out", help="SVG output path")
    sp.set_defaults(fn=cmd_portrait)

    sp = sub.add_parser("alpha-c", help="critical exponent by bisection")
    _add_param_flags(sp, need_alpha=False)
    sp.add_argument("--force-bisection", action="store_true",
                    help="bisect even when a closed form is available")
    sp.set_defaults(fn=cmd_alpha_c)

    sp = sub.add_parser("classify", help="full regime report as JSON")
    _add_param_flags(sp)
    sp.set_defaults(fn=cmd_classify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    except (AnalysisError, IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
