"""Frank-Wolfe style and projected-gradient maximizers for DR-submodular objectives.

Five solvers share one configuration type and one trajectory format:

* :func:`submodular_fw` for monotone DR-submodular objectives, ``1 - 1/e``;
* :func:`shrunken_fw` for non-monotone ones, ``1/e``, via a capped LMO;
* :func:`nonconvex_fw`, the classical FW direction returning the min-gap iterate;
* :func:`pga`, projected gradient ascent returning the best iterate;
* :func:`two_phase`, two rounds of :func:`nonconvex_fw`, ``1/4`` two-point bound.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .constraints import Constraint
from .core import Objective, as_point
from .rng import make_rng

SOLVERS = ("submodular_fw", "shrunken_fw", "nonconvex_fw", "pga", "two_phase")
FW_STEPS = ("constant",)
NONCONVEX_STEPS = ("line_search", "curvature", "oblivious", "lipschitz")
PGA_STEPS = ("adaptive", "lipschitz")
PGA_DEFAULT_C = 100.0

CSV_HEADER = ("iter", "t_cum", "f", "gap", "step", "elapsed_ms")
GOLDEN_ITERATIONS = 30


class SolverError(RuntimeError):
    """A solver was asked to run outside its preconditions."""


@dataclass
class SolverConfig:
    """Knobs shared by all solvers; irrelevant fields are ignored.

    ``iterations2`` and ``eps2`` apply to the second phase of
    :func:`two_phase` (they default to ``iterations`` and ``eps``).
    ``alpha``/``delta`` deliberately degrade the LMO for robustness tests.
    In the two capped FW variants ``delta`` is relative, costing
    ``½ delta γ L D²`` per step; elsewhere it is an absolute amount.
    """

    iterations: int = 100
    iterations2: Optional[int] = None
    step: Optional[str] = None
    alpha: float = 1.0
    delta: float = 0.0
    eps: float = 0.0
    eps2: Optional[float] = None
    C: Optional[float] = None
    lipschitz: Optional[float] = None
    seed: int = 0
    force: bool = False
    keep_points: bool = False
    timing: bool = False

    def __post_init__(self):
        if self.iterations < 1 or (self.iterations2 is not None and self.iterations2 < 1):
            raise ValueError("iteration counts must be positive")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.eps < 0 or (self.eps2 is not None and self.eps2 < 0):
            raise ValueError("stopping tolerances must be nonnegative")
        if self.C is not None and self.C <= 0:
            raise ValueError("C must be positive")
        if self.lipschitz is not None and self.lipschitz < 0:
            raise ValueError("Lipschitz override must be nonnegative")


@dataclass
class IterationRecord:
    iter: int
    t_cum: float
    f: float
    gap: float
    step: float
    elapsed_ms: float = 0.0


@dataclass
class Trajectory:
    solver: str
    records: List[IterationRecord] = field(default_factory=list)
    final_point: Optional[np.ndarray] = None
    best_point: Optional[np.ndarray] = None
    best_value: float = -math.inf
    points: List[np.ndarray] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    @property
    def gaps(self) -> np.ndarray:
        return np.array([r.gap for r in self.records])

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.step for r in self.records])

    def to_csv(self) -> str:
        """Render the records; ``repr`` of floats keeps the text reproducible."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.records:
            writer.writerow([r.iter, repr(float(r.t_cum)), repr(float(r.f)),
                             repr(float(r.gap)), repr(float(r.step)),
                             repr(float(r.elapsed_ms))])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "solver": self.solver,
            "best_value": float(self.best_value),
            "best_point": [float(v) for v in self.best_point],
            "iterations": len(self.records),
            **{k: v for k, v in self.meta.items() if _jsonable(v)},
        }


def _jsonable(v):
    return isinstance(v, (int, float, str, bool, type(None), list, dict))


class _Recorder:
    def __init__(self, name: str, config: SolverConfig):
        self.traj = Trajectory(name)
        self.keep = config.keep_points
        self.timing = config.timing
        self.start = time.perf_counter()

    def add(self, k, t, f, gap, step, x):
        elapsed = (time.perf_counter() - self.start) * 1e3 if self.timing else 0.0
        self.traj.records.append(IterationRecord(k, t, f, gap, step, elapsed))
        if self.keep:
            self.traj.points.append(x.copy())

    def finish(self, final, best, best_value, **meta):
        self.traj.final_point = final.copy()
        self.traj.best_point = best.copy()
        self.traj.best_value = float(best_value)
        self.traj.meta.update(meta)
        self.traj.meta["wall_ms"] = (time.perf_counter() - self.start) * 1e3
        return self.traj


# ---------------------------------------------------------------- helpers


def non_stationarity(obj: Objective, constraint: Constraint, x, grad=None,
                     cap=None) -> float:
    """``max_{v in region} ⟨v - x, ∇f(x)⟩`` by a single LMO call."""
    x = as_point(x, constraint.n)
    g = obj.gradient(x) if grad is None else grad
    v = constraint.lmo(g, cap)
    return float(np.dot(v - x, g))


def estimate_lipschitz(obj: Objective, pairs: int = 200, seed=0,
                       safety: float = 2.0) -> float:
    """Gradient-Lipschitz heuristic: ``safety`` times the largest sampled ratio."""
    rng = make_rng(seed)
    upper = obj.domain.upper
    best = 0.0
    for _ in range(pairs):
        a = rng.uniform(0.0, 1.0, obj.n) * upper
        b = rng.uniform(0.0, 1.0, obj.n) * upper
        dist = np.linalg.norm(a - b)
        if dist > 0:
            ratio = np.linalg.norm(obj.gradient(a) - obj.gradient(b)) / dist
            best = max(best, float(ratio))
    return safety * best


def resolve_lipschitz(obj: Objective, config: SolverConfig) -> float:
    if config.lipschitz is not None:
        return float(config.lipschitz)
    if obj.flags.lipschitz is not None:
        return float(obj.flags.lipschitz)
    return estimate_lipschitz(obj, seed=config.seed)


def guarantee_slack(L: float, D: float, K: int) -> float:
    """The additive ``L D² / (2K)`` term shared by the FW guarantees."""
    return L * D * D / (2.0 * K)


def _perturb(v, g, alpha, delta):
    """Scale an exact LMO output down so ``⟨v, g⟩ = α max - delta`` (floored at 0).

    Shrinking toward 0 keeps it feasible because regions are down-closed.
    """
    if alpha == 1.0 and delta == 0.0:
        return v
    v = alpha * v
    score = float(np.dot(v, g))
    if delta > 0 and score > 0:
        v = v * max(0.0, 1.0 - delta / score)
    return v


def _check_domain(obj: Objective, constraint: Constraint):
    if obj.n != constraint.n:
        raise SolverError(f"objective has n={obj.n}, constraint has n={constraint.n}")
    if np.any(constraint.upper > obj.domain.upper + 1e-9):
        raise SolverError("constraint region extends beyond the objective's domain")


def _check_start(constraint: Constraint, x0, name):
    x0 = np.zeros(constraint.n) if x0 is None else as_point(x0, constraint.n).copy()
    if not constraint.contains(x0, 1e-8):
        raise SolverError(f"{name}: starting point is infeasible")
    return x0


def _uniform_steps(K: int):
    """Constant step ``1/K`` run while ``t < 1``; the last step is clamped to hit 1."""
    gamma = 1.0 / K
    t = 0.0
    while t < 1.0:
        step = min(gamma, 1.0 - t)
        if 1.0 - (t + step) < 1e-12:
            step = 1.0 - t
        yield t, step
        t = 1.0 if step == 1.0 - t else t + step


# ---------------------------------------------------------------- FW family


def _capped_fw(obj, constraint, config, name, shrunken):
    if (config.step or "constant") not in FW_STEPS:
        raise ValueError(f"{name} only supports the constant step rule")
    _check_domain(obj, constraint)
    rec = _Recorder(name, config)
    x = np.zeros(obj.n)
    upper = constraint.upper
    # the additive oracle error is measured in units of ½ γ L D²
    scale = 0.0
    if config.delta > 0:
        scale = 0.5 * resolve_lipschitz(obj, config) * constraint.diameter_bound ** 2
    t_cum = 0.0
    for k, (t, step) in enumerate(_uniform_steps(config.iterations)):
        f, g = obj.value_and_grad(x)
        cap = np.maximum(upper - x, 0.0) if shrunken else None
        v = _perturb(constraint.lmo(g, cap), g, config.alpha, config.delta * step * scale)
        rec.add(k, t, f, float(np.dot(v - x, g)), step, x)
        x = x + step * v
        if shrunken:
            x = np.minimum(x, upper)
        t_cum = t + step
    f = obj.value(x)
    rec.add(len(rec.traj.records), 1.0, f, non_stationarity(obj, constraint, x), 0.0, x)
    return rec.finish(x, x, f, t_final=t_cum)


def submodular_fw(obj: Objective, constraint: Constraint,
                  config: SolverConfig = None) -> Trajectory:
    """Frank-Wolfe variant for monotone DR-submodular maximization.

    Starts at 0 and adds ``γ v`` (not ``γ (v - x)``) with ``γ = 1/K`` until the
    cumulative step reaches 1, so the output is a convex combination of LMO
    outputs. With exact oracles::

        f(x_K) >= (1 - 1/e) OPT - L D² / (2K)

    Refuses objectives not flagged monotone and DR-submodular unless
    ``config.force`` is set.
    """
    config = config or SolverConfig()
    if not config.force and not (obj.flags.monotone and obj.flags.dr_submodular):
        raise SolverError("submodular_fw requires a monotone DR-submodular objective "
                          "(set force=True to run anyway)")
    return _capped_fw(obj, constraint, config, "submodular_fw", shrunken=False)


def shrunken_fw(obj: Objective, constraint: Constraint,
                config: SolverConfig = None) -> Trajectory:
    """Frank-Wolfe with the LMO capped at ``ū - x``, for non-monotone objectives.

    Each iterate obeys ``x_i <= ū_i [1 - (1 - γ)^(t/γ)]`` (see
    :func:`growth_bound`), which yields ``f(x_K) >= OPT/e - L D² / (2K)``.
    Always starts from 0.
    """
    config = config or SolverConfig()
    if not config.force and not obj.flags.dr_submodular:
        raise SolverError("shrunken_fw requires a DR-submodular objective "
                          "(set force=True to run anyway)")
    return _capped_fw(obj, constraint, config, "shrunken_fw", shrunken=True)


def growth_bound(upper, t: float, gamma: float) -> np.ndarray:
    """Coordinate-wise bound ``ū [1 - (1-γ)^(t/γ)]`` on shrunken FW iterates."""
    return np.asarray(upper, dtype=float) * (1.0 - (1.0 - gamma) ** (t / gamma))


def _golden_section(phi, lo=0.0, hi=1.0, iterations=GOLDEN_ITERATIONS):
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - ratio * (b - a), a + ratio * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = phi(d)
    mid = 0.5 * (a + b)
    # the restriction need not be unimodal, so compare with the full step
    return 1.0 if phi(1.0) > phi(mid) else mid


def nonconvex_fw(obj: Objective, constraint: Constraint, config: SolverConfig = None,
                 x0=None, cap=None, eps: Optional[float] = None,
                 iterations: Optional[int] = None, name: str = "nonconvex_fw") -> Trajectory:
    """Classical Frank-Wolfe (direction ``v - x``) returning the min-gap iterate.

    Stops once the gap ``g_k = ⟨v - x, ∇f(x)⟩`` drops to ``eps``. Step rules:
    ``line_search`` (golden section on [0, 1], default), ``curvature``
    (``min(g/C, 1)`` with ``C`` defaulting to ``L D²``), ``oblivious``
    (``2/(k+2)``) and ``lipschitz`` (``min(1, g / (L ‖d‖²))``).

    ``cap`` restricts every LMO to ``{v <= cap}``; :func:`two_phase` uses it
    for its second phase. The result's ``best_point`` is the iterate with the
    smallest recorded gap and ``meta["gap"]`` that gap.
    """
    config = config or SolverConfig()
    rule = config.step or "line_search"
    if rule not in NONCONVEX_STEPS:
        raise ValueError(f"unknown nonconvex_fw step rule {rule!r}")
    _check_domain(obj, constraint)
    K = config.iterations if iterations is None else iterations
    eps = config.eps if eps is None else eps
    x = _check_start(constraint, x0, name)
    if cap is not None and np.any(x > np.asarray(cap) + 1e-8):
        raise SolverError(f"{name}: starting point exceeds the cap")

    L = C = None
    if rule in ("curvature", "lipschitz"):
        L = max(resolve_lipschitz(obj, config), 1e-12)
        D = constraint.diameter_bound if cap is None else float(
            np.linalg.norm(np.minimum(constraint.upper, cap)))
        C = config.C if config.C is not None else max(L * D * D, 1e-12)

    rec = _Recorder(name, config)
    best_x, best_gap, best_f = x.copy(), math.inf, -math.inf
    t_cum = 0.0
    for k in range(K + 1):
        f, g = obj.value_and_grad(x)
        v = _perturb(constraint.lmo(g, cap), g, config.alpha, config.delta)
        d = v - x
        gap = float(np.dot(d, g))
        if gap < best_gap:
            best_x, best_gap, best_f = x.copy(), gap, f
        if k == K or gap <= eps:
            rec.add(k, t_cum, f, gap, 0.0, x)
            break
        if rule == "line_search":
            step = _golden_section(lambda s: obj.value(np.clip(x + s * d, 0.0, obj.domain.upper)))
        elif rule == "curvature":
            step = min(gap / C, 1.0)
        elif rule == "oblivious":
            step = 2.0 / (k + 2.0)
        else:
            dd = float(np.dot(d, d))
            step = 1.0 if dd == 0 else min(1.0, gap / (L * dd))
        rec.add(k, t_cum, f, gap, step, x)
        x = x + step * d
        t_cum += step
    return rec.finish(x, best_x, best_f, gap=best_gap, step_rule=rule)


def pga(obj: Objective, constraint: Constraint, config: SolverConfig = None,
        x0=None) -> Trajectory:
    """Projected gradient ascent returning the best iterate seen.

    Step rules: ``adaptive`` (``C / sqrt(k + 1)``, default, ``C`` defaulting
    to 100) and ``lipschitz`` (``1/L``; gives ``f >= OPT/2 - D² L / (2K)``
    for monotone DR-submodular ``f``).
    """
    config = config or SolverConfig()
    rule = config.step or "adaptive"
    if rule not in PGA_STEPS:
        raise ValueError(f"unknown pga step rule {rule!r}")
    if not constraint.supports_projection:
        from .constraints import UnsupportedOperation

        raise UnsupportedOperation(f"pga needs a projection; {constraint.family} has none")
    _check_domain(obj, constraint)
    x = _check_start(constraint, x0, "pga")
    L = max(resolve_lipschitz(obj, config), 1e-12) if rule == "lipschitz" else None
    C = config.C if config.C is not None else PGA_DEFAULT_C

    rec = _Recorder("pga", config)
    best_x, best_f = x.copy(), -math.inf
    t_cum = 0.0
    for k in range(config.iterations + 1):
        f, g = obj.value_and_grad(x)
        gap = float(np.dot(constraint.lmo(g) - x, g))
        if f > best_f:
            best_x, best_f = x.copy(), f
        if k == config.iterations:
            rec.add(k, t_cum, f, gap, 0.0, x)
            break
        step = 1.0 / L if rule == "lipschitz" else C / math.sqrt(k + 1.0)
        rec.add(k, t_cum, f, gap, step, x)
        x = constraint.project(x + step * g)
        t_cum += step
    return rec.finish(x, best_x, best_f, step_rule=rule,
                      lipschitz=None if L is None else float(L))


def two_phase(obj: Objective, constraint: Constraint, config: SolverConfig = None,
              x0=None, z0=None) -> Trajectory:
    """Two runs of :func:`nonconvex_fw` for non-monotone DR-submodular objectives.

    Phase one works on the region ``P`` and yields ``x``; phase two works on
    ``Q = P ∩ {y <= ū - x}`` and yields ``z``. The better of the two is
    returned, and ``max(f(x), f(z)) >= ¼ [OPT - g_P(x) - g_Q(z)]``.

    The concatenated records keep counting iterations across phases; the
    phase-one and phase-two points and gaps are in ``meta``.
    """
    config = config or SolverConfig()
    if not config.force and not obj.flags.dr_submodular:
        raise SolverError("two_phase requires a DR-submodular objective "
                          "(set force=True to run anyway)")
    first = nonconvex_fw(obj, constraint, config, x0=x0, name="two_phase")
    x = first.best_point
    cap = np.maximum(constraint.upper - x, 0.0)
    z0 = np.zeros(obj.n) if z0 is None else as_point(z0, obj.n)
    second = nonconvex_fw(obj, constraint, config, x0=z0, cap=cap,
                          eps=config.eps if config.eps2 is None else config.eps2,
                          iterations=config.iterations2 or config.iterations,
                          name="two_phase")
    z = second.best_point
    fx, fz = first.best_value, second.best_value

    traj = Trajectory("two_phase")
    offset = len(first.records)
    t_offset = first.records[-1].t_cum if first.records else 0.0
    traj.records = list(first.records) + [
        IterationRecord(r.iter + offset, r.t_cum + t_offset, r.f, r.gap, r.step, r.elapsed_ms)
        for r in second.records
    ]
    traj.points = first.points + second.points
    traj.final_point = second.final_point
    traj.best_point, traj.best_value = (x.copy(), fx) if fx >= fz else (z.copy(), fz)
    traj.meta.update(
        x=[float(v) for v in x], z=[float(v) for v in z],
        f_x=float(fx), f_z=float(fz),
        gap_p=float(first.meta["gap"]), gap_q=float(second.meta["gap"]),
        phase1_iterations=offset,
        step_rule=first.meta["step_rule"],
        wall_ms=first.meta["wall_ms"] + second.meta["wall_ms"],
    )
    return traj


def solve(name: str, obj: Objective, constraint: Constraint,
          config: SolverConfig = None) -> Trajectory:
    """Dispatch by solver name."""
    try:
        fn = {"submodular_fw": submodular_fw, "shrunken_fw": shrunken_fw,
              "nonconvex_fw": nonconvex_fw, "pga": pga, "two_phase": two_phase}[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {', '.join(SOLVERS)}") from None
    return fn(obj, constraint, config)


def config_dict(config: SolverConfig) -> dict:
    return asdict(config)
