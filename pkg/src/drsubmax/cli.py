"""Command-line runner: ``drsubmax {run,verify,gen,plot}``.

Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 a
verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import verify
from .instances import GENERATORS, Instance, InstanceError
from .solvers import CSV_HEADER, SOLVERS, SolverConfig, solve

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3
SEED_ENV = "DRSUBMAX_SEED"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- config models


class SolverConfigModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    iterations: int = Field(100, ge=1)
    iterations2: Optional[int] = Field(None, ge=1)
    step: Optional[str] = None
    alpha: float = Field(1.0, gt=0.0, le=1.0)
    delta: float = Field(0.0, ge=0.0)
    eps: float = Field(0.0, ge=0.0)
    eps2: Optional[float] = Field(None, ge=0.0)
    C: Optional[float] = Field(None, gt=0.0)
    lipschitz: Optional[float] = Field(None, ge=0.0)
    force: bool = False
    timing: bool = False


class SolverSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Literal["submodular_fw", "shrunken_fw", "nonconvex_fw", "pga", "two_phase"]
    config: SolverConfigModel = Field(default_factory=SolverConfigModel)


class GenerateSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal[tuple(GENERATORS)]
    n: int = Field(ge=1)


class InlineInstance(BaseModel):
    model_config = ConfigDict(extra="forbid")

    objective: dict
    constraint: dict
    seed: int = 0


class GeneratedInstance(BaseModel):
    model_config = ConfigDict(extra="forbid")

    generate: GenerateSpec


class RunConfig(BaseModel):
    """Experiment description.

    ``instance`` is a path, an inline instance, or ``{"generate": {...}}``;
    generated instances are re-drawn for every repeat with its own seed.
    ``solver``/``config`` is shorthand for a single-entry ``solvers`` list.
    """

    model_config = ConfigDict(extra="forbid")

    instance: Union[str, InlineInstance, GeneratedInstance]
    solvers: List[SolverSpec] = Field(min_length=1)
    output_dir: str = "."
    repeat: int = Field(1, ge=1)
    parallel: int = Field(1, ge=1)
    seed: Optional[int] = None

    @model_validator(mode="before")
    @classmethod
    def _single_solver(cls, data):
        if isinstance(data, dict) and "solver" in data:
            data = dict(data)
            spec = {"name": data.pop("solver")}
            if "config" in data:
                spec["config"] = data.pop("config")
            data.setdefault("solvers", []).append(spec)
        return data


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"  {loc}: {err['msg']}")
    return "invalid config:\n" + "\n".join(lines)


def load_run_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_VALIDATION) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"config is not valid JSON: {exc}", EXIT_VALIDATION) from None
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise CliError(_format_validation(exc), EXIT_VALIDATION) from None


# ---------------------------------------------------------------- run


def _env_seed() -> Optional[int]:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {raw!r}", EXIT_VALIDATION) from None


def _instance_for_run(cfg: RunConfig, base_dir: Path, seed: int) -> Instance:
    inst = cfg.instance
    try:
        if isinstance(inst, GeneratedInstance):
            return GENERATORS[inst.generate.family](inst.generate.n, seed)
        if isinstance(inst, InlineInstance):
            return Instance.from_dict(inst.model_dump(), base_dir)
        path = Path(inst)
        return Instance.load(path if path.is_absolute() else base_dir / path)
    except (InstanceError, ValueError, KeyError) as exc:
        raise CliError(f"instance: {exc}", EXIT_VALIDATION) from None
    except OSError as exc:
        raise CliError(f"instance: {exc}", EXIT_RUNTIME) from None


def _base_seed(cfg: RunConfig, base_dir: Path) -> int:
    env = _env_seed()
    if env is not None:
        return env
    if cfg.seed is not None:
        return cfg.seed
    if isinstance(cfg.instance, InlineInstance):
        return cfg.instance.seed
    if isinstance(cfg.instance, str):
        return _instance_for_run(cfg, base_dir, 0).seed
    return 0


def _one_run(cfg: RunConfig, base_dir: Path, out_dir: Path, run: int, seed: int):
    instance = _instance_for_run(cfg, base_dir, seed)
    results = []
    for spec in cfg.solvers:
        options = spec.config.model_dump()
        config = SolverConfig(seed=seed, **options)
        try:
            traj = solve(spec.name, instance.objective, instance.constraint, config)
        except Exception as exc:  # any solver failure is a runtime error
            raise CliError(f"run {run}, {spec.name}: {type(exc).__name__}: {exc}",
                           EXIT_RUNTIME) from None
        (out_dir / f"trajectory_{spec.name}_{run}.csv").write_text(traj.to_csv(),
                                                                    encoding="utf-8")
        results.append({"run": run, "seed": seed, **traj.summary()})
    return results


def run(cfg: RunConfig, base_dir=".", output_dir=None) -> dict:
    """Execute a validated config; returns the summary written to ``summary.json``."""
    base_dir = Path(base_dir)
    out_dir = Path(output_dir if output_dir is not None else base_dir / cfg.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory: {exc}", EXIT_RUNTIME) from None
    base_seed = _base_seed(cfg, base_dir)
    seeds = [base_seed + r for r in range(cfg.repeat)]
    if cfg.parallel > 1 and cfg.repeat > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallel) as pool:
            futures = [pool.submit(_one_run, cfg, base_dir, out_dir, r, s)
                       for r, s in enumerate(seeds)]
            batches = [f.result() for f in futures]
    else:
        batches = [_one_run(cfg, base_dir, out_dir, r, s) for r, s in enumerate(seeds)]
    summary = {"runs": [row for batch in batches for row in batch],
               "config": cfg.model_dump(mode="json")}
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8")
    return summary


def cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    summary = run(cfg, Path(args.config).resolve().parent, args.output)
    for row in summary["runs"]:
        print(f"run {row['run']} {row['solver']}: best value {row['best_value']:.6g}")
    return EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    names = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [n for n in names if n not in verify.CHECKS]
    if not names or unknown:
        raise CliError(f"unknown check(s): {', '.join(unknown) or '<none>'}; "
                       f"available: {', '.join(verify.CHECKS)}", EXIT_VALIDATION)
    try:
        instance = Instance.load(args.instance)
    except OSError as exc:
        raise CliError(f"cannot read instance: {exc}", EXIT_RUNTIME) from None
    except (InstanceError, ValueError) as exc:
        raise CliError(f"instance: {exc}", EXIT_VALIDATION) from None
    seed = _env_seed()
    seed = instance.seed if seed is None else seed
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    failed = False
    for name in names:
        kwargs = {"seed": seed}
        if args.samples is not None:
            kwargs["samples"] = args.samples
        report = verify.CHECKS[name](instance.objective, **kwargs)
        (out_dir / f"report_{name}.json").write_text(report.to_json() + "\n", encoding="utf-8")
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {name}: {report.n_violations} violations in {report.samples} samples, "
              f"worst margin {report.worst_margin:.3g}")
        failed |= not report.passed
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------- gen


def cmd_gen(args) -> int:
    if args.family not in GENERATORS:
        raise CliError(f"unknown family {args.family!r}; choose from {', '.join(GENERATORS)}",
                       EXIT_VALIDATION)
    if args.n < 1:
        raise CliError("-n must be positive", EXIT_VALIDATION)
    seed = _env_seed()
    seed = args.seed if seed is None else seed
    instance = GENERATORS[args.family](args.n, seed)
    instance.save(args.output)
    print(f"wrote {args.family} instance (n={instance.objective.n}, seed={seed}) to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------- plot

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
DASHES = ("", "8 4", "2 3", "10 3 2 3", "4 4", "1 5")
WIDTH, HEIGHT = 800, 600
MARGIN = {"left": 80, "right": 30, "top": 40, "bottom": 60}


def read_trajectory_csv(path) -> Dict[str, list]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CliError(f"{path}: empty file", EXIT_VALIDATION)
    if tuple(rows[0]) != CSV_HEADER:
        raise CliError(f"{path}: header {rows[0]} does not match {list(CSV_HEADER)}",
                       EXIT_VALIDATION)
    body = rows[1:]
    if not body:
        raise CliError(f"{path}: no trajectory rows", EXIT_VALIDATION)
    try:
        return {"iter": [int(r[0]) for r in body], "f": [float(r[2]) for r in body]}
    except (ValueError, IndexError):
        raise CliError(f"{path}: malformed row", EXIT_VALIDATION) from None


def nice_ticks(lo: float, hi: float, count: int = 6) -> List[float]:
    """Increasing, evenly spaced round-number ticks covering ``[lo, hi]``."""
    import math

    if hi <= lo:
        hi = lo + (abs(lo) if lo else 1.0)
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    if ticks[-1] < hi:
        ticks.append(round(t, 12))
    return ticks


def render_svg(series: List[tuple], title: str = "") -> str:
    """One polyline per ``(label, xs, ys)`` with a legend."""
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    xt = nice_ticks(min(xs_all), max(xs_all))
    yt = nice_ticks(min(ys_all), max(ys_all))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
                   f'font-size="16">{_esc(title)}</text>')
    bottom, left = MARGIN["top"] + ph, MARGIN["left"]
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{left + pw}" y2="{bottom}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{MARGIN["top"]}" x2="{left}" y2="{bottom}" stroke="black"/>')
    for t in xt:
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{bottom}" x2="{X:.2f}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{bottom + 20}" text-anchor="middle">{t:g}</text>')
    for t in yt:
        Y = py(t)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">iteration</text>')
    out.append(f'<text x="20" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {MARGIN["top"] + ph / 2:.1f})">f</text>')
    for k, (label, xs, ys) in enumerate(series):
        color, dash = PALETTE[k % len(PALETTE)], DASHES[k % len(DASHES)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2"{dash_attr} '
                   f'points="{pts}"><title>{_esc(label)}</title></polyline>')
        ly = MARGIN["top"] + 15 + 18 * k
        lx = left + pw - 180
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{lx + 36}" y="{ly + 4}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def cmd_plot(args) -> int:
    labels = args.labels.split(",") if args.labels else [Path(p).stem for p in args.csv]
    if len(labels) != len(args.csv):
        raise CliError("need one label per CSV", EXIT_VALIDATION)
    series = []
    for label, path in zip(labels, args.csv):
        try:
            data = read_trajectory_csv(path)
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}", EXIT_RUNTIME) from None
        series.append((label, data["iter"], data["f"]))
    Path(args.output).write_text(render_svg(series, args.title or ""), encoding="utf-8")
    print(f"wrote {len(series)} series to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drsubmax",
                                     description="Continuous DR-submodular maximization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run solvers from a JSON config")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--output", help="output directory (overrides output_dir)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run property checks on an instance")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("--checks", required=True, help=f"comma list from: {', '.join(verify.CHECKS)}")
    p.add_argument("--samples", type=int)
    p.add_argument("-o", "--output", default=".", help="directory for report_<check>.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--family", required=True, help=f"one of: {', '.join(GENERATORS)}")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("plot", help="line chart of trajectory CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--labels", help="comma-separated legend labels")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["RunConfig", "SOLVERS", "main", "run"]
