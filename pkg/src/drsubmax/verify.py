"""Sampled property checks and brute-force oracles.

The property checks can only falsify: a passing report means no violation
was found among the sampled witnesses. Every report records the worst margin
observed so near-violations stay visible. All checks are deterministic given
a seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .constraints import Constraint
from .core import DimensionError, Objective, as_point, join, meet
from .rng import make_rng
from .solvers import non_stationarity

DEFAULT_SAMPLES = 1000
DEFAULT_TOL = 1e-7
FD_STEP = 1e-5
FD_STEP_2 = 1e-4
MAX_WITNESSES = 20


@dataclass
class CheckReport:
    name: str
    samples: int
    tol: float
    violations: List[dict] = field(default_factory=list)
    n_violations: int = 0
    worst_margin: float = float("inf")

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    def record(self, margin: float, **witness):
        """Log one evaluated instance of the inequality ``margin >= -tol``."""
        margin = float(margin)
        self.worst_margin = min(self.worst_margin, margin)
        if margin < -self.tol:
            self.n_violations += 1
            if len(self.violations) < MAX_WITNESSES:
                self.violations.append(
                    {"margin": margin, **{k: _listify(v) for k, v in witness.items()}})

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "samples": self.samples,
                "tol": self.tol, "n_violations": self.n_violations,
                "worst_margin": self.worst_margin, "violations": self.violations}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def __bool__(self):
        return self.passed


def _listify(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    return v


# ---------------------------------------------------------------- sampling


def _ordered_pair(rng, upper):
    a = rng.uniform(0.0, 1.0, upper.size) * upper
    b = a + rng.uniform(0.0, 1.0, upper.size) * (upper - a)
    return a, b


def _interior(rng, upper, margin):
    lo = np.minimum(margin, 0.5 * upper)
    return lo + rng.uniform(0.0, 1.0, upper.size) * (upper - 2.0 * lo)


def sample_feasible(constraint: Constraint, rng, cap=None) -> np.ndarray:
    """Random point of the region (intersected with ``{x <= cap}``).

    Draws uniformly in the enclosing box and, if needed, scales toward the
    origin by bisection; down-closedness guarantees a feasible scale.
    """
    top = constraint.upper if cap is None else np.minimum(constraint.upper, cap)
    y = rng.uniform(0.0, 1.0, constraint.n) * top
    if constraint.contains(y, 0.0):
        return y
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if constraint.contains(mid * y, 0.0):
            lo = mid
        else:
            hi = mid
    return lo * y


# ---------------------------------------------------------------- finite differences


def fd_gradient(obj: Objective, x, h: float = FD_STEP) -> np.ndarray:
    """Central differences ``(f(x + h e_i) - f(x - h e_i)) / 2h``."""
    x = as_point(x, obj.n)
    g = np.empty(obj.n)
    for i in range(obj.n):
        e = np.zeros(obj.n)
        e[i] = h
        g[i] = (obj.value(x + e) - obj.value(x - e)) / (2.0 * h)
    return g


def fd_hessian(obj: Objective, x, h: float = FD_STEP_2) -> np.ndarray:
    """Hessian by central differences of the analytic gradient, symmetrized."""
    x = as_point(x, obj.n)
    Hs = np.empty((obj.n, obj.n))
    for j in range(obj.n):
        e = np.zeros(obj.n)
        e[j] = h
        Hs[:, j] = (obj.gradient(x + e) - obj.gradient(x - e)) / (2.0 * h)
    return 0.5 * (Hs + Hs.T)


# ---------------------------------------------------------------- characterizations


def check_weak_dr(obj: Objective, samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOL,
                  seed=0) -> CheckReport:
    """Diminishing returns along coordinates where ``a <= b`` agree."""
    rng = make_rng(seed)
    upper = obj.domain.upper
    report = CheckReport("weak_dr", samples, tol)
    for _ in range(samples):
        a, b = _ordered_pair(rng, upper)
        i = int(rng.integers(obj.n))
        b[i] = a[i]
        k = rng.uniform(0.0, 1.0) * (upper[i] - a[i])
        e = np.zeros(obj.n)
        e[i] = k
        margin = (obj(a + e) - obj(a)) - (obj(b + e) - obj(b))
        report.record(margin, a=a, b=b, i=i, k=k)
    return report


def check_dr(obj: Objective, samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOL,
             seed=0) -> CheckReport:
    """Diminishing returns for every ``a <= b`` plus coordinate-wise concavity."""
    rng = make_rng(seed)
    upper = obj.domain.upper
    report = CheckReport("dr", samples, tol)
    for _ in range(samples):
        a, b = _ordered_pair(rng, upper)
        i = int(rng.integers(obj.n))
        k = rng.uniform(0.0, 1.0) * (upper[i] - b[i])
        e = np.zeros(obj.n)
        e[i] = k
        margin = (obj(a + e) - obj(a)) - (obj(b + e) - obj(b))
        report.record(margin, test="dr", a=a, b=b, i=i, k=k)

        x = rng.uniform(0.0, 1.0, obj.n) * upper
        j = int(rng.integers(obj.n))
        room = upper[j] - x[j]
        k, l = rng.uniform(0.0, 1.0, 2) * room / 2.0
        ek, el = np.zeros(obj.n), np.zeros(obj.n)
        ek[j], el[j] = k, l
        margin = (obj(x + ek) - obj(x)) - (obj(x + ek + el) - obj(x + el))
        report.record(margin, test="coordinate_concavity", x=x, i=j, k=k, l=l)
    return report


def check_antitone(obj: Objective, samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOL,
                   weak: bool = False, seed=0) -> CheckReport:
    """``∇f(a) >= ∇f(b)`` for ``a <= b``; the weak mode compares only agreeing coordinates."""
    rng = make_rng(seed)
    upper = obj.domain.upper
    report = CheckReport("weak_antitone" if weak else "antitone", samples, tol)
    for _ in range(samples):
        a, b = _ordered_pair(rng, upper)
        if weak:
            same = rng.uniform(size=obj.n) < 0.5
            same[int(rng.integers(obj.n))] = True
            b[same] = a[same]
        diff = obj.gradient(a) - obj.gradient(b)
        if weak:
            diff = diff[same]
        worst = int(np.argmin(diff))
        report.record(diff[worst], a=a, b=b, coordinate=worst)
    return report


def check_cross_partials(obj: Objective, samples: int = 100, tol: float = DEFAULT_TOL,
                         mode: str = "off_diagonal", seed=0,
                         h: float = FD_STEP_2) -> CheckReport:
    """Finite-difference second derivatives are ``<= tol``.

    ``mode="off_diagonal"`` tests submodularity, ``mode="all"`` tests DR.
    """
    if mode not in ("off_diagonal", "all"):
        raise ValueError("mode must be 'off_diagonal' or 'all'")
    rng = make_rng(seed)
    upper = obj.domain.upper
    report = CheckReport(f"cross_partials[{mode}]", samples, tol)
    mask = np.ones((obj.n, obj.n), dtype=bool)
    if mode == "off_diagonal":
        np.fill_diagonal(mask, False)
    if not mask.any():
        return report
    for _ in range(samples):
        x = _interior(rng, upper, np.maximum(2.0 * h, 1e-3 * upper))
        H = fd_hessian(obj, x, h)
        entries = np.where(mask, H, -np.inf)
        i, j = np.unravel_index(int(np.argmax(entries)), H.shape)
        report.record(-H[i, j], x=x, i=int(i), j=int(j))
    return report


def check_directional_concavity(obj: Objective, samples: int = DEFAULT_SAMPLES,
                                tol: float = DEFAULT_TOL, seed=0) -> CheckReport:
    """Concavity along nonnegative and nonpositive directions."""
    rng = make_rng(seed)
    upper = obj.domain.upper
    report = CheckReport("directional_concavity", samples, tol)
    for s in range(samples):
        lo, hi = _ordered_pair(rng, upper)
        x, v = (lo, hi - lo) if s % 2 == 0 else (hi, lo - hi)
        lam = rng.uniform(0.0, 1.0)
        margin = obj(x + lam * v) - (lam * obj(x + v) + (1.0 - lam) * obj(x))
        report.record(margin, x=x, v=v, lam=lam)
    return report


def check_monotone(obj: Objective, samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOL,
                   seed=0) -> CheckReport:
    """``f(a) <= f(b)`` for random ``a <= b``."""
    rng = make_rng(seed)
    report = CheckReport("monotone", samples, tol)
    for _ in range(samples):
        a, b = _ordered_pair(rng, obj.domain.upper)
        report.record(obj(b) - obj(a), a=a, b=b)
    return report


def check_gradient(obj: Objective, samples: int = 100, rtol: float = 1e-4, seed=0,
                   h: float = FD_STEP) -> CheckReport:
    """Analytic vs central-difference gradient, relative error ``<= rtol``.

    The error is relative to ``max(‖fd‖, 1)`` so vanishing gradients do not
    turn rounding noise into failures.
    """
    rng = make_rng(seed)
    upper = obj.domain.upper
    report = CheckReport("gradient", samples, rtol)
    for _ in range(samples):
        x = _interior(rng, upper, np.maximum(2.0 * h, 1e-3 * upper))
        fd = fd_gradient(obj, x, h)
        err = np.linalg.norm(obj.gradient(x) - fd) / max(np.linalg.norm(fd), 1.0)
        report.record(-err, x=x)
    return report


CHECKS = {
    "weak_dr": check_weak_dr,
    "dr": check_dr,
    "antitone": check_antitone,
    "weak_antitone": lambda obj, **kw: check_antitone(obj, weak=True, **kw),
    "cross_partials": check_cross_partials,
    "cross_partials_all": lambda obj, **kw: check_cross_partials(obj, mode="all", **kw),
    "directional_concavity": check_directional_concavity,
    "monotone": check_monotone,
    "gradient": check_gradient,
}


# ---------------------------------------------------------------- oracles


def _all_masks(n: int) -> np.ndarray:
    codes = np.arange(2 ** n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(bool)


def brute_force_multilinear(F, x, n_max: int = 20) -> float:
    """Exact ``Σ_S F(S) Π_{i∈S} x_i Π_{j∉S} (1 - x_j)`` by enumerating ``2^n`` sets.

    ``F`` is a callable on boolean masks; a ``batch`` method is used when present.
    """
    x = as_point(x)
    n = x.size
    if n > n_max:
        raise DimensionError(f"brute-force enumeration limited to n <= {n_max}")
    masks = _all_masks(n)
    if hasattr(F, "batch"):
        vals = np.asarray(F.batch(masks), dtype=float)
    else:
        vals = np.array([F(m) for m in masks], dtype=float)
    probs = np.prod(np.where(masks, x, 1.0 - x), axis=1)
    return float(probs @ vals)


def grid_points(upper, resolution: float) -> List[np.ndarray]:
    axes = []
    for u in np.asarray(upper, dtype=float):
        k = int(np.floor(u / resolution + 1e-9))
        ax = np.arange(k + 1) * resolution
        if u - ax[-1] > 1e-12:
            ax = np.append(ax, u)
        axes.append(np.minimum(ax, u))
    return axes


def brute_force_grid_max(obj: Objective, constraint: Constraint, resolution: float,
                         n_max: int = 4, chunk: int = 200_000):
    """Best feasible point on the grid of spacing ``resolution``; returns ``(x, value)``.

    For any feasible ``x*`` its downward rounding is a feasible grid point
    within ``√n · resolution``, so the true optimum exceeds the returned
    value by at most :func:`grid_slack`.
    """
    n = obj.n
    if n > n_max:
        raise DimensionError(f"grid search limited to n <= {n_max}")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    axes = grid_points(constraint.upper, resolution)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    best_x, best_v = None, -np.inf
    for start in range(0, mesh.shape[0], chunk):
        block = mesh[start:start + chunk]
        block = block[constraint.feasible_mask(block, 1e-12)]
        if block.shape[0] == 0:
            continue
        vals = obj.values(block)
        i = int(np.argmax(vals))
        if vals[i] > best_v:
            best_x, best_v = block[i].copy(), float(vals[i])
    return best_x, best_v


def gradient_norm_bound(obj: Objective, samples: int = 2000, seed=0) -> float:
    """Upper estimate of ``max ‖∇f‖`` over the domain.

    Exact for quadratics (a convex function of ``x`` peaks at a box vertex);
    otherwise twice the largest sampled norm, corners included.
    """
    from .objectives.quadratic import QuadraticObjective

    upper = obj.domain.upper
    if isinstance(obj, QuadraticObjective) and obj.n <= 16:
        corners = _all_masks(obj.n) * upper
        return float(np.max(np.linalg.norm(corners @ obj.H.T + obj.h, axis=1)))
    rng = make_rng(seed)
    best = max(np.linalg.norm(obj.gradient(np.zeros(obj.n))),
               np.linalg.norm(obj.gradient(upper.copy())))
    for _ in range(samples):
        best = max(best, np.linalg.norm(obj.gradient(rng.uniform(0, 1, obj.n) * upper)))
    return 2.0 * float(best)


def grid_slack(obj: Objective, resolution: float) -> float:
    """``G · √n · resolution`` with ``G`` bounding ``‖∇f‖`` on the domain."""
    return gradient_norm_bound(obj) * np.sqrt(obj.n) * resolution


# ---------------------------------------------------------------- local-global relations


def check_local_global(obj: Objective, constraint: Constraint, x, opt_value: float,
                       z=None, x_star=None, mu: Optional[float] = None,
                       tol: float = DEFAULT_TOL) -> CheckReport:
    """Check the stationarity-to-optimality bounds at given points.

    Without ``z``: ``f(x) >= ½ [OPT - g_P(x)] + (μ/4) ‖x - x*‖²`` (the μ term
    needs ``x_star``). With ``z`` (a point of ``Q = P ∩ {y <= ū - x}``):
    ``max(f(x), f(z)) >= ¼ [OPT - g_P(x) - g_Q(z)]``.
    """
    x = as_point(x, obj.n)
    mu = (obj.flags.strong_dr or 0.0) if mu is None else mu
    report = CheckReport("local_global", 1, tol)
    gp = non_stationarity(obj, constraint, x)
    if z is None:
        bound = 0.5 * (opt_value - gp)
        if x_star is not None:
            bound += 0.25 * mu * float(np.sum((x - as_point(x_star, obj.n)) ** 2))
        report.record(obj(x) - bound, x=x, gap_p=gp)
    else:
        z = as_point(z, obj.n)
        cap = np.maximum(constraint.upper - x, 0.0)
        if np.any(z > cap + 1e-8) or not constraint.contains(z, 1e-8):
            raise ValueError("z must lie in the shrunken region for x")
        gq = non_stationarity(obj, constraint, z, cap=cap)
        bound = 0.25 * (opt_value - gp - gq)
        report.record(max(obj(x), obj(z)) - bound, x=x, z=z, gap_p=gp, gap_q=gq)
    return report


def local_global_margin(obj: Objective, x, y, mu: float = 0.0) -> float:
    """``(y-x)ᵀ∇f(x) - [f(x∨y) + f(x∧y) - 2f(x)] - (μ/2)‖x-y‖²`` (nonnegative for DR f)."""
    fx, g = obj.value_and_grad(x)
    lhs = float(np.dot(y - x, g))
    rhs = obj(join(x, y)) + obj(meet(x, y)) - 2.0 * fx + 0.5 * mu * float(np.sum((x - y) ** 2))
    return lhs - rhs


def check_local_global_pairs(obj: Objective, samples: int = DEFAULT_SAMPLES,
                             tol: float = DEFAULT_TOL, mu: float = 0.0,
                             seed=0) -> CheckReport:
    """The pairwise relation behind the local-global bounds, on random ``x, y``."""
    rng = make_rng(seed)
    upper = obj.domain.upper
    report = CheckReport("local_global_pairs", samples, tol)
    for _ in range(samples):
        x = rng.uniform(0.0, 1.0, obj.n) * upper
        y = rng.uniform(0.0, 1.0, obj.n) * upper
        report.record(local_global_margin(obj, x, y, mu), x=x, y=y)
    return report


def key_claim_margin(obj: Objective, x, z, x_star) -> float:
    """``f(x∨x*) + f(x∧x*) + f(z∨z*) + f(z∧z*) - f(x*)`` with ``z* = x∨x* - x``."""
    x, z, x_star = (as_point(v, obj.n) for v in (x, z, x_star))
    z_star = join(x, x_star) - x
    return (obj(join(x, x_star)) + obj(meet(x, x_star))
            + obj(join(z, z_star)) + obj(meet(z, z_star)) - obj(x_star))


def check_key_claim(obj: Objective, constraint: Constraint, x_star,
                    samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOL,
                    seed=0) -> CheckReport:
    """Key claim on random feasible ``x`` and ``z`` drawn from ``P ∩ {z <= ū - x}``.

    The claim is only guaranteed for DR-submodular ``f`` that is nonnegative
    on the whole box; negative values can produce genuine violations.
    """
    rng = make_rng(seed)
    report = CheckReport("key_claim", samples, tol)
    for _ in range(samples):
        x = sample_feasible(constraint, rng)
        z = sample_feasible(constraint, rng, cap=np.maximum(constraint.upper - x, 0.0))
        report.record(key_claim_margin(obj, x, z, x_star), x=x, z=z)
    return report


def run_checks(obj: Objective, names, **kwargs) -> List[CheckReport]:
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    return [CHECKS[n](obj, **kwargs) for n in names]
