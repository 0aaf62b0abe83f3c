"""Command-line front end: ``lagmcf {profile,curvature,flow,verify}``.

Settings come from built-in defaults, then an optional TOML file
(``--config``), then command-line flags. Output is rendered in full before
anything is written, so a usage error never leaves a partial file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import tomli

from .curvature import coefficient_function, embed
from .errors import MCFError
from .flow import FlowConfig, integrate_flow
from .oracle import EmbeddingChart, oracle_evaluate, random_sphere_point
from .profile import (
    DEFAULT_S_MAX,
    ExpanderParams,
    ExpanderProfile,
    ProfileCurve,
    TableProfile,
    eval_w,
    eval_wdot,
    make_profile,
)
from .verify import REGISTRY, build_report, run_checks

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
ORACLE_MIN_S = 1e-2
COMMANDS = ("profile", "curvature", "flow", "verify")
PRESETS = ("expander", "line", "circle", "table")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Grid:
    s_min: float = 0.1
    s_max: float = 3.0
    count: int = 30

    def __post_init__(self) -> None:
        if not 2 <= self.count <= 10**6:
            raise UsageError("grid count must lie in [2, 1e6]")
        if not self.s_min < self.s_max:
            raise UsageError("grid needs s_min < s_max")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        try:
            lo, hi, count = text.split(":")
            return cls(float(lo), float(hi), int(count))
        except ValueError as exc:
            raise UsageError(f"bad grid {text!r}, expected min:max:count") from exc

    def points(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.count)


@dataclass(frozen=True)
class RunConfig:
    command: str
    preset: str = "expander"
    a: float = 1.0
    E: float = 1.0
    alpha: float = 0.0
    n: int = 2
    s_max: float = DEFAULT_S_MAX
    table: str | None = None
    grid: Grid = field(default_factory=Grid)
    f0: float = 2.0
    t_end: float = 10.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    f_min: float = 1e-8
    out: str | None = None
    format: str = "csv"
    seed: int = 0
    checks: tuple[str, ...] | None = None

    def params(self) -> ExpanderParams:
        return ExpanderParams(a=self.a, E=self.E, alpha=self.alpha, n=self.n)

    def profile(self) -> ProfileCurve:
        if self.preset == "table":
            if not self.table:
                raise UsageError("preset 'table' needs --table PATH")
            try:
                return TableProfile.from_csv(self.table, n=self.n)
            except OSError as exc:
                raise UsageError(str(exc)) from exc
        if self.preset == "expander":
            return make_profile("expander", self.params(), s_max=self.s_max)
        return make_profile(self.preset, n=self.n)

    def flow(self) -> FlowConfig:
        return FlowConfig(
            f0=self.f0, t_end=self.t_end, rel_tol=self.rel_tol, abs_tol=self.abs_tol, f_min=self.f_min
        )


# TOML section -> RunConfig keys it may hold
_SECTIONS = {
    "params": ("preset", "a", "E", "alpha", "n", "s_max", "table"),
    "flow": ("f0", "t_end", "rel_tol", "abs_tol", "f_min"),
    "output": ("out", "format"),
}
_OUTPUT_ALIASES = {"path": "out"}


def load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    flat: dict = {}
    for key, value in doc.items():
        if key in _SECTIONS and isinstance(value, dict):
            for sub, v in value.items():
                sub = _OUTPUT_ALIASES.get(sub, sub) if key == "output" else sub
                if sub not in _SECTIONS[key]:
                    raise UsageError(f"unknown key {key}.{sub} in {path}")
                flat[sub] = v
        elif key == "grid":
            try:
                flat["grid"] = Grid.parse(value) if isinstance(value, str) else Grid(**value)
            except TypeError as exc:
                raise UsageError(f"bad grid table in {path}: {exc}") from exc
        elif key in known:
            flat[key] = tuple(value) if key == "checks" else value
        else:
            raise UsageError(f"unknown key {key!r} in {path}")
    return flat


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with run settings")
    common.add_argument("--preset", choices=PRESETS, default=argparse.SUPPRESS)
    common.add_argument("--table", help="s,re_w,im_w CSV for --preset table", default=argparse.SUPPRESS)
    common.add_argument("--a", type=float, default=argparse.SUPPRESS)
    common.add_argument("--E", type=float, default=argparse.SUPPRESS)
    common.add_argument("--alpha", type=float, default=argparse.SUPPRESS)
    common.add_argument("--n", type=int, default=argparse.SUPPRESS)
    common.add_argument("--s-max", dest="s_max", type=float, default=argparse.SUPPRESS)
    common.add_argument("--grid", type=str, default=argparse.SUPPRESS, help="min:max:count")
    common.add_argument("--f0", type=float, default=argparse.SUPPRESS)
    common.add_argument("--t-end", dest="t_end", type=float, default=argparse.SUPPRESS)
    common.add_argument("--rel-tol", dest="rel_tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--abs-tol", dest="abs_tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--f-min", dest="f_min", type=float, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="lagmcf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("profile", parents=[common], help="tabulate w, w' on a grid")
    sub.add_parser("curvature", parents=[common], help="closed-form vs oracle flow coefficient")
    sub.add_parser("flow", parents=[common], help="integrate the reduced flow")
    v = sub.add_parser("verify", parents=[common], help="run the verification suite")
    v.add_argument(
        "--check", dest="checks", action="append", choices=list(REGISTRY), default=argparse.SUPPRESS,
        help="run only this check (repeatable)",
    )
    v.add_argument("--list", action="store_true", help="list check names and exit")
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values: dict = {}
    opts = vars(ns).copy()
    path = opts.pop("config", None)
    opts.pop("list", None)
    if path:
        values.update(load_toml(path))
    if "grid" in opts:
        opts["grid"] = Grid.parse(opts["grid"])
    if "checks" in opts:
        opts["checks"] = tuple(opts["checks"])
    values.update(opts)
    values.setdefault("format", "json" if values.get("command") == "verify" else "csv")
    if values.get("format", "csv") not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {values['format']!r}")
    if values.get("preset", "expander") not in PRESETS:
        raise UsageError(f"unknown preset {values['preset']!r}")
    if values.get("checks"):
        unknown = [c for c in values["checks"] if c not in REGISTRY]
        if unknown:
            raise UsageError(f"unknown checks: {', '.join(unknown)}")
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


def fmt(x) -> str:
    """Shortest round-trip decimal; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def render_table(columns, rows, fmt_name: str, extra: dict | None = None) -> str:
    if fmt_name == "json":
        doc = {"columns": list(columns), "rows": [dict(zip(columns, map(_json_value, r))) for r in rows]}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _grid_in_domain(profile: ProfileCurve, grid: Grid) -> np.ndarray:
    pts = grid.points()
    inside = [float(s) in profile.domain for s in pts]
    if not all(inside):
        raise UsageError(f"grid {grid.s_min}:{grid.s_max} leaves the {profile.kind} domain {profile.domain}")
    return pts


def run_profile(cfg: RunConfig) -> str:
    profile = cfg.profile()
    rows = []
    for s in _grid_in_domain(profile, cfg.grid):
        w, wd = eval_w(profile, s), eval_wdot(profile, s)
        if isinstance(profile, ExpanderProfile):
            r, phi = profile.r(s), profile.phi(s)
        else:
            r, phi = abs(w), math.atan2(w.imag, w.real)
        rows.append((float(s), r, phi, w.real, w.imag, wd.real, wd.imag))
    cols = ("s", "r", "phi", "re_w", "im_w", "re_wdot", "im_wdot")
    return render_table(cols, rows, cfg.format)


def run_curvature(cfg: RunConfig) -> str:
    """Closed-form coefficient G(s) against -(H_oracle . d/ds) / |d/ds|^2."""
    profile = cfg.profile()
    G = coefficient_function(profile)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for s in _grid_in_domain(profile, cfg.grid):
        s = float(s)
        x = random_sphere_point(rng, profile.n)
        note = ""
        try:
            closed = G(s)
        except MCFError as exc:
            rows.append((s, None, None, None, f"{type(exc).__name__}: {exc}"))
            continue
        oracle = diff = None
        if abs(s) >= ORACLE_MIN_S:
            try:
                H = oracle_evaluate(EmbeddingChart(profile, x), s).H
                ds = embed(x * eval_wdot(profile, s))
                oracle = float(-(H @ ds) / (ds @ ds))
                diff = abs(oracle - closed)
            except MCFError as exc:
                note = f"{type(exc).__name__}: {exc}"
        rows.append((s, closed, oracle, diff, note))
    cols = ("s", "coefficient_closed", "coefficient_oracle", "abs_diff", "note")
    return render_table(cols, rows, cfg.format)


def run_flow(cfg: RunConfig) -> str:
    trace = integrate_flow(cfg.profile(), cfg.flow())
    rows = list(zip(trace.t.tolist(), trace.f.tolist()))
    extra = {"termination": {"kind": trace.termination.value, "value": _json_value(trace.termination_value)}}
    print(f"termination: {trace.termination.value} {fmt(trace.termination_value)}", file=sys.stderr)
    return render_table(("t", "f"), rows, cfg.format, extra)


def run_verify(cfg: RunConfig) -> tuple[str, bool]:
    checks = run_checks(cfg.checks, seed=cfg.seed)
    ok = all(c.passed for c in checks)
    if cfg.format == "csv":
        rows = [(c.name, c.measured_error, c.tolerance, c.passed) for c in checks]
        text = render_table(("name", "measured_error", "tolerance", "passed"), rows, "csv")
    else:
        text = json.dumps(build_report(checks, cfg.seed), indent=2, allow_nan=False) + "\n"
    return text, ok


def write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        os.unlink(tmp)
        raise


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if getattr(ns, "list", False):
        print("\n".join(REGISTRY))
        return EXIT_OK
    try:
        try:
            cfg = resolve_config(ns)
            # reject bad parameters before any work is done
            if cfg.preset == "expander" or cfg.command == "verify":
                cfg.params()
            if cfg.command == "flow":
                cfg.flow()
        except (TypeError, ValueError) as exc:
            raise UsageError(f"invalid configuration: {exc}") from exc
        if cfg.command == "verify":
            text, ok = run_verify(cfg)
            status = EXIT_OK if ok else EXIT_FAILED
        else:
            text = {"profile": run_profile, "curvature": run_curvature, "flow": run_flow}[cfg.command](cfg)
            status = EXIT_OK
    except (UsageError, MCFError, ValueError) as exc:
        # ValueError here comes from malformed table input
        print(f"lagmcf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_output(text, cfg.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
