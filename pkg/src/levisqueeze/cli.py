"""Command line front end.

    levisqueeze <command> [figure-id] [--config cfg.json] [--set key=value]...
                [--out path] [--format csv|json]

Commands: evolve, steady, stability, threshold, sweep, figure, mc-validate.
Configuration is one flat JSON object whose keys are the SystemParams fields
(with q_m accepted alongside gamma) plus run controls; --set overrides
config entries and --out/--format override their config counterparts.  Every
data file is accompanied by a sidecar JSON that doubles as a config: running
the same command with the sidecar reproduces the data file byte for byte.

Exit codes: 0 success, 2 invalid configuration or parameters, 3 numerical
failure (diverged integration, no steady state, ensemble mismatch).
"""

from __future__ import annotations

import argparse
import functools
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import evolve, find_threshold, stability, steady_state
from .errors import (
    BasisError,
    BracketError,
    ConfigError,
    CovarianceError,
    IntegrationError,
    NumericalError,
    ParameterError,
    UnstableModelError,
)
from .figures import FIGURES, FigureJob, run_figure
from .metrics import SweepAxis, mechanical_block, squeezing_metrics, sweep
from .models import (
    FREQUENCY_VARIANTS,
    SystemParams,
    build_eliminated_modulated,
    builder_for,
    initial_covariance,
)
from .montecarlo import EM_RESOLUTION, EnsembleSpec, compare, simulate_ensemble

PARAM_KEYS = (
    "omega_x",
    "kappa",
    "gamma",
    "q_m",
    "delta",
    "lam",
    "nbar",
    "nbar0",
    "alpha",
    "phi",
)
RUN_KEYS = (
    "model",
    "frequency_variant",
    "evaluation",
    "t_end",
    "dt",
    "points",
    "axis",
    "axis_start",
    "axis_stop",
    "axis_points",
    "axis_scale",
    "axis_values",
    "bracket_lo",
    "bracket_hi",
    "tol",
    "seed",
    "n_traj",
    "n_checkpoints",
    "workers",
    "figure",
    "out",
    "format",
)
ALLOWED_KEYS = set(PARAM_KEYS) | set(RUN_KEYS)


@dataclass(frozen=True)
class RunConfig:
    """Validated flat configuration of one command invocation."""

    raw: dict

    def get(self, key: str, default=None):
        return self.raw.get(key, default)

    def require(self, key: str):
        if key not in self.raw:
            raise ConfigError(f"missing required config key {key!r}")
        return self.raw[key]

    def params(self) -> SystemParams:
        kwargs = {k: self.raw[k] for k in PARAM_KEYS if k in self.raw}
        return SystemParams(**kwargs)

    def builder(self):
        name = self.require("model")
        if name == "eliminated-modulated":
            variant = self.get("frequency_variant", FREQUENCY_VARIANTS[0])
            return functools.partial(build_eliminated_modulated, variant=variant)
        return builder_for(name)


@dataclass(frozen=True)
class OutputSpec:
    """Destination and format of one data file."""

    path: Path
    fmt: str

    @property
    def sidecar(self) -> Path:
        return self.path.with_name(self.path.stem + ".sidecar.json")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


def apply_sets(cfg: dict, assignments: list[str]) -> dict:
    out = dict(cfg)
    for item in assignments:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def validate_keys(cfg: dict) -> dict:
    unknown = sorted(set(cfg) - ALLOWED_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}; allowed: {sorted(ALLOWED_KEYS)}")
    return cfg


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _jsonable(obj):
    if isinstance(obj, SystemParams):
        return asdict(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _dump_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")


def write_sidecar(out: OutputSpec, cfg: RunConfig, provenance: dict) -> None:
    doc = dict(cfg.raw)
    doc["out"] = str(out.path)
    doc["format"] = out.fmt
    doc["_provenance"] = {"tool": "levisqueeze", "version": __version__, **provenance}
    _dump_json(out.sidecar, doc)


def write_table(
    out: OutputSpec, columns: tuple[str, ...], rows, cfg: RunConfig, provenance: dict
) -> None:
    if out.fmt == "csv":
        with open(out.path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_cell(x) for x in row) + "\n")
    else:
        _dump_json(out.path, {"columns": list(columns), "rows": [list(r) for r in rows]})
    write_sidecar(out, cfg, provenance)


def write_report(out: OutputSpec | None, report: dict, cfg: RunConfig, provenance: dict) -> None:
    if out is None:
        json.dump(_jsonable(report), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    if out.fmt == "csv":
        flat = _flatten(report)
        with open(out.path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("key,value\n")
            for key, val in flat:
                fh.write(f"{key},{_cell(val)}\n")
    else:
        _dump_json(out.path, report)
    write_sidecar(out, cfg, provenance)


def _flatten(report: dict, prefix: str = "") -> list[tuple[str, object]]:
    items: list[tuple[str, object]] = []
    for key, val in report.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            items.extend(_flatten(val, name + "."))
        elif isinstance(val, (list, tuple)):
            for i, x in enumerate(val):
                items.append((f"{name}[{i}]", x))
        else:
            items.append((name, val))
    return items


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _trajectory_table(result) -> tuple[tuple[str, ...], list[tuple]]:
    labels = result.covariances[0].basis.labels
    stack = result.stacked()
    ix, ip = labels.index("x"), labels.index("p")
    a, b, c = stack[:, ix, ix], stack[:, ix, ip], stack[:, ip, ip]
    mean, rad = 0.5 * (a + c), np.sqrt((0.5 * (a - c)) ** 2 + b**2)
    v_sq, v_asq = mean - rad, mean + rad
    columns = ["t", "Vxx", "Vxp", "Vpp", "v_sq", "v_asq", "eta"]
    cavity = len(labels) == 4
    if cavity:
        columns += ["VXX", "VXY", "VYY"]
        jx, jy = labels.index("X"), labels.index("Y")
    rows = []
    for k, t in enumerate(result.times):
        row = [
            float(t),
            float(a[k]),
            float(b[k]),
            float(c[k]),
            float(v_sq[k]),
            float(v_asq[k]),
            float(v_sq[k] / v_asq[k]),
        ]
        if cavity:
            row += [float(stack[k, jx, jx]), float(stack[k, jx, jy]), float(stack[k, jy, jy])]
        rows.append(tuple(row))
    return tuple(columns), rows


def cmd_evolve(cfg: RunConfig, out: OutputSpec) -> int:
    params = cfg.params()
    model = cfg.builder()(params)
    t_end = float(cfg.require("t_end"))
    dt = cfg.get("dt")
    result = evolve(model, initial_covariance(params, model.basis), t_end, dt)
    columns, rows = _trajectory_table(result)
    write_table(out, columns, rows, cfg, {"command": "evolve", "stats": asdict(result.stats)})
    return 0


def _steady_report(cfg: RunConfig) -> dict:
    params = cfg.params()
    result = steady_state(cfg.builder()(params))
    rep = squeezing_metrics(mechanical_block(result.covariance))
    labels = result.covariance.basis.labels
    entries = {
        f"{labels[i]}{labels[j]}": float(result.covariance.entries[i, j])
        for i in range(len(labels))
        for j in range(i, len(labels))
    }
    return {
        "stable": True,
        "max_real_part": result.stability.max_real_part,
        "residual_norm": result.residual_norm,
        "covariance": entries,
        "v_sq": rep.v_sq,
        "v_asq": rep.v_asq,
        "eta": rep.eta,
        "angle": rep.angle,
        "nonclassical": rep.nonclassical,
    }


def cmd_steady(cfg: RunConfig, out: OutputSpec | None) -> int:
    write_report(out, _steady_report(cfg), cfg, {"command": "steady"})
    return 0


def cmd_stability(cfg: RunConfig, out: OutputSpec | None) -> int:
    report = stability(cfg.builder()(cfg.params()))
    payload = {
        "eigenvalues": [[float(v.real), float(v.imag)] for v in report.eigenvalues],
        "max_real_part": report.max_real_part,
        "stable": report.stable,
    }
    write_report(out, payload, cfg, {"command": "stability"})
    return 0


def cmd_threshold(cfg: RunConfig, out: OutputSpec | None) -> int:
    params = cfg.params()
    build = cfg.builder()
    axis = cfg.get("axis", "lam")
    lo = float(cfg.require("bracket_lo"))
    hi = float(cfg.require("bracket_hi"))
    tol = float(cfg.get("tol", 1e-6))
    critical = find_threshold(
        lambda x: build(params.with_value(axis, x)), (lo, hi), tol=tol
    )
    payload = {
        "axis": axis,
        "bracket_lo": lo,
        "bracket_hi": hi,
        "tol": tol,
        "critical_value": critical,
    }
    write_report(out, payload, cfg, {"command": "threshold"})
    return 0


def cmd_sweep(cfg: RunConfig, out: OutputSpec) -> int:
    params = cfg.params()
    name = cfg.require("axis")
    if "axis_values" in cfg.raw:
        values = cfg.raw["axis_values"]
        if not isinstance(values, (list, tuple)) or not values:
            raise ConfigError("axis_values must be a nonempty list")
        axis = SweepAxis(name, tuple(float(v) for v in values))
    else:
        scale = cfg.get("axis_scale", "linear")
        maker = {"linear": SweepAxis.linear, "log": SweepAxis.log}.get(scale)
        if maker is None:
            raise ConfigError(f"axis_scale must be linear or log, got {scale!r}")
        axis = maker(
            name,
            float(cfg.require("axis_start")),
            float(cfg.require("axis_stop")),
            int(cfg.require("axis_points")),
        )
    evaluation = cfg.get("evaluation", "steady")
    t_end = cfg.get("t_end")
    table = sweep(
        axis,
        cfg.builder(),
        params,
        evaluation,
        t_end=None if t_end is None else float(t_end),
        dt=cfg.get("dt"),
        workers=int(cfg.get("workers", 1)),
    )
    columns = (name, "status", "v_sq", "v_asq", "eta", "angle", "nonclassical", "t_opt")
    rows = []
    for point in table.points:
        rep = point.report
        rows.append(
            (
                point.value,
                point.status,
                None if rep is None else rep.v_sq,
                None if rep is None else rep.v_asq,
                None if rep is None else rep.eta,
                None if rep is None else rep.angle,
                None if rep is None else rep.nonclassical,
                None if rep is None else rep.time,
            )
        )
    write_table(
        out, columns, rows, cfg, {"command": "sweep", "evaluation": evaluation, "axis": name}
    )
    return 0


def cmd_figure(cfg: RunConfig, out: OutputSpec | None, figure_id: str | None) -> int:
    fig = figure_id or cfg.get("figure")
    if fig is None:
        raise ConfigError(f"no figure id given; known ids: {sorted(FIGURES)}")
    overrides = {
        k: cfg.raw[k] for k in cfg.raw if k in PARAM_KEYS or k in ("t_end", "dt", "points")
    }
    data = run_figure(FigureJob(fig, overrides))
    if out is None:
        out = OutputSpec(Path(f"{fig}.csv"), "csv")
    merged = RunConfig({**cfg.raw, "figure": fig})
    write_table(out, data.columns, data.rows, merged, {"command": "figure", "meta": data.meta})
    return 0


def cmd_mc_validate(cfg: RunConfig, out: OutputSpec | None) -> int:
    params = cfg.params()
    model = cfg.builder()(params)
    t_end = float(cfg.get("t_end", 15.0))
    if cfg.get("dt") is not None:
        dt = float(cfg.get("dt"))
    elif model.fastest_rate > 0.0:
        dt = EM_RESOLUTION / model.fastest_rate
    else:
        raise ConfigError("model advertises no intrinsic rate; set dt explicitly")
    spec = EnsembleSpec(
        n_traj=int(cfg.get("n_traj", 10000)),
        t_end=t_end,
        dt=dt,
        seed=int(cfg.get("seed", 0)),
        n_checkpoints=int(cfg.get("n_checkpoints", 25)),
    )
    v0 = initial_covariance(params, model.basis)
    ensemble = simulate_ensemble(model, v0, spec)
    reference = evolve(model, v0, t_end)
    report = compare(ensemble, reference)
    payload = {
        "passed": report.passed,
        "max_z": report.max_z,
        "z_limit": report.z_limit,
        "n_traj": spec.n_traj,
        "dt": spec.dt,
        "t_end": spec.t_end,
        "seed": spec.seed,
        "checkpoints": [float(t) for t in report.times],
    }
    write_report(out, payload, cfg, {"command": "mc-validate"})
    if not report.passed:
        print(
            f"ensemble disagrees with Lyapunov result: max |z| = {report.max_z:.2f}",
            file=sys.stderr,
        )
        return 3
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config entry (repeatable)",
    )
    common.add_argument("--out", help="output file path")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    parser = argparse.ArgumentParser(
        prog="levisqueeze",
        description="Gaussian dynamics of cavity-levitated nanoparticle squeezing",
    )
    parser.add_argument("--version", action="version", version=f"levisqueeze {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("evolve", "steady", "stability", "threshold", "sweep", "mc-validate"):
        subs.add_parser(name, parents=[common])
    fig = subs.add_parser("figure", parents=[common])
    fig.add_argument("figure_id", nargs="?", help=f"one of {sorted(FIGURES)}")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        raw = validate_keys(apply_sets(load_config(args.config), args.assignments))
        cfg = RunConfig(raw)
        fmt = args.format or cfg.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {fmt!r}")
        out_path = args.out or cfg.get("out")
        out = None if out_path is None else OutputSpec(Path(out_path), fmt)

        if args.command == "evolve":
            return cmd_evolve(cfg, out or OutputSpec(Path("evolve.csv"), fmt))
        if args.command == "steady":
            return cmd_steady(cfg, out)
        if args.command == "stability":
            return cmd_stability(cfg, out)
        if args.command == "threshold":
            return cmd_threshold(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out or OutputSpec(Path("sweep.csv"), fmt))
        if args.command == "figure":
            return cmd_figure(cfg, out, args.figure_id)
        if args.command == "mc-validate":
            return cmd_mc_validate(cfg, out)
        raise ConfigError(f"unknown command {args.command!r}")
    except (
        ConfigError,
        ParameterError,
        BasisError,
        CovarianceError,
        BracketError,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnstableModelError, IntegrationError, NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
