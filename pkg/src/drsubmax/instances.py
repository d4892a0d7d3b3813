"""Reproducible problem instances: synthetic generators, graph loaders and JSON files.

An instance file looks like::

    {"objective": {"family": "softmax", "params": {"L": [[...]]}},
     "constraint": {"type": "cardinality", "u": 1.0, "b": 25.0, "n": 50},
     "seed": 7}

Graph-backed families may give ``"path"`` (relative to the instance file)
instead of inline parameters. Floats are written with ``repr`` precision,
so saving and reloading reproduces every matrix bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .constraints import BoxConstraint, CardinalityPolytope, Constraint, DownClosedPolytope
from .core import Box, Objective
from .objectives import (
    FlidObjective,
    GibbsPolynomial,
    IndependentActivation,
    InfluenceObjective,
    MeanFieldKLObjective,
    QuadraticObjective,
    RevenueIEObjective,
    SetCoverObjective,
    SoftmaxObjective,
)
from .objectives import zoo
from .rng import make_rng

#: parameters of the two social graphs used in the revenue experiments
REVENUE_PRESETS = {
    "reality_mining": {"q": 0.75, "u": 10.0, "budget_fraction": 0.2},
    "infectious": {"q": 0.7, "u": 20.0, "budget_fraction": 0.2},
}


class ParseError(ValueError):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path, self.line_no = path, line_no


class InstanceError(ValueError):
    """An instance description is malformed."""


# ---------------------------------------------------------------- graphs


@dataclass
class BipartiteGraph:
    """Users on one side, forums (marketing targets) on the other.

    ``edges`` rows are ``(user, forum, weight)`` with duplicates already
    summed. ``user_ids``/``forum_ids`` map compact indices back to file ids.
    """

    n_users: int
    n_forums: int
    edges: np.ndarray
    user_ids: Optional[list] = None
    forum_ids: Optional[list] = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float).reshape(-1, 3)
        e = self.edges
        if e.size and (np.any(e[:, 0] < 0) or np.any(e[:, 0] >= self.n_users)
                       or np.any(e[:, 1] < 0) or np.any(e[:, 1] >= self.n_forums)):
            raise ValueError("edge endpoint out of range")
        if e.size and (not np.all(np.isfinite(e[:, 2])) or np.any(e[:, 2] < 0)):
            raise ValueError("edge weights must be finite and nonnegative")

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def weight_matrix(self) -> np.ndarray:
        W = np.zeros((self.n_users, self.n_forums))
        np.add.at(W, (self.edges[:, 0].astype(int), self.edges[:, 1].astype(int)),
                  self.edges[:, 2])
        return W

    def degrees(self) -> np.ndarray:
        """Number of distinct forums each user touches (``‖W_i:‖₀``)."""
        return np.count_nonzero(self.weight_matrix(), axis=1)


@dataclass
class SocialGraph:
    """Directed weighted graph; self loops are dropped."""

    W: np.ndarray
    node_ids: Optional[list] = None

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.all(np.isfinite(W)) or np.any(W < 0):
            raise ValueError("edge weights must be finite and nonnegative")
        np.fill_diagonal(W, 0.0)
        self.W = W

    @property
    def n(self) -> int:
        return self.W.shape[0]


def _read_edges(path):
    """Yield ``(line_no, src, dst, weight)`` from a whitespace edge list.

    Lines starting with ``#`` or ``%`` are comments. Columns after the
    third (e.g. timestamps) are ignored.
    """
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text[0] in "#%":
                continue
            parts = text.split()
            if len(parts) < 2:
                raise ParseError(path, line_no, f"expected 'src dst [weight]', got {text!r}")
            try:
                src, dst = int(parts[0]), int(parts[1])
                weight = float(parts[2]) if len(parts) > 2 else 1.0
            except ValueError:
                raise ParseError(path, line_no, f"non-numeric field in {text!r}") from None
            if not np.isfinite(weight) or weight < 0:
                raise ParseError(path, line_no, f"weight must be finite and >= 0, got {weight}")
            yield line_no, src, dst, weight


def _aggregate(pairs):
    """Sum weights of repeated ``(src, dst)`` pairs; keeps first-seen order."""
    total = {}
    for _, s, d, w in pairs:
        total[(s, d)] = total.get((s, d), 0.0) + w
    return total


def load_bipartite(path) -> BipartiteGraph:
    """Parse a ``user forum [weight]`` edge list, summing duplicate pairs.

    Ids are relabeled to ``0..n-1`` in ascending id order.
    """
    total = _aggregate(_read_edges(path))
    users = sorted({u for u, _ in total})
    forums = sorted({f for _, f in total})
    u_idx = {u: i for i, u in enumerate(users)}
    f_idx = {f: i for i, f in enumerate(forums)}
    edges = sorted((u_idx[u], f_idx[f], w) for (u, f), w in total.items())
    return BipartiteGraph(len(users), len(forums), np.array(edges, dtype=float).reshape(-1, 3),
                          users, forums)


def load_social(path) -> SocialGraph:
    """Parse a directed ``src dst [weight]`` edge list; repeated contacts add up."""
    total = _aggregate(_read_edges(path))
    nodes = sorted({v for pair in total for v in pair})
    idx = {v: i for i, v in enumerate(nodes)}
    W = np.zeros((len(nodes), len(nodes)))
    for (s, d), w in total.items():
        if s != d:
            W[idx[s], idx[d]] += w
    return SocialGraph(W, nodes)


def synthetic_bipartite(n_users: int, n_forums: int, seed=0,
                        mean_degree: float = 4.0) -> BipartiteGraph:
    """Forum-posting graph with skewed forum popularity and post counts.

    Stands in for real forum data when none is available: each user picks
    ``1 + Poisson(mean_degree - 1)`` forums weighted by a Zipf-like
    popularity and posts a geometric number of times on each.
    """
    rng = make_rng(seed)
    popularity = 1.0 / np.arange(1, n_forums + 1)
    popularity /= popularity.sum()
    edges = []
    for u in range(n_users):
        k = min(n_forums, 1 + int(rng.poisson(max(mean_degree - 1.0, 0.0))))
        forums = np.sort(rng.choice(n_forums, size=k, replace=False, p=popularity))
        for f in forums:
            edges.append((u, int(f), float(rng.geometric(0.3))))
    return BipartiteGraph(n_users, n_forums, np.array(edges, dtype=float).reshape(-1, 3))


def synthetic_social(n: int, seed=0, density: float = 0.1,
                     max_contacts: int = 20) -> SocialGraph:
    """Directed contact graph with integer contact counts as weights."""
    rng = make_rng(seed)
    mask = rng.random((n, n)) < density
    W = np.where(mask, rng.integers(1, max_contacts + 1, size=(n, n)), 0).astype(float)
    return SocialGraph(W)


def subsample_bipartite(g: BipartiteGraph, n_users: int, n_forums: int) -> BipartiteGraph:
    """Sub-graph on the busiest forums and then the busiest users among them.

    Ties go to the lower index, so the result is deterministic.
    """
    W = g.weight_matrix()
    forum_rank = np.lexsort((np.arange(g.n_forums), -W.sum(axis=0)))
    forums = np.sort(forum_rank[:n_forums])
    Wf = W[:, forums]
    user_rank = np.lexsort((np.arange(g.n_users), -Wf.sum(axis=1)))
    users = np.sort(user_rank[:n_users])
    sub = Wf[users]
    r, c = np.nonzero(sub)
    edges = np.column_stack([r, c, sub[r, c]]).astype(float)
    return BipartiteGraph(len(users), len(forums), edges)


# ---------------------------------------------------------------- builders


def logistic(z):
    return 1.0 / (1.0 + np.exp(-np.asarray(z, dtype=float)))


def build_influence_instance(g: BipartiteGraph, upper: float = 10.0) -> InfluenceObjective:
    """Facility-location influence over forums with activations ``p_i = σ(-d_i)``.

    Heavier posters are harder to activate; ``d_i`` counts distinct forums.
    """
    if g.n_users == 0:
        raise ValueError("graph has no users")
    p = logistic(-g.degrees())
    return InfluenceObjective(FlidObjective(g.weight_matrix()), IndependentActivation(p),
                              upper)


def build_revenue_instance(g: SocialGraph, q: float, u: float, budget_fraction: float):
    """Revenue objective with ``0 <= x <= u`` and ``Σ x <= fraction · n · u``."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    if u <= 0:
        raise ValueError("u must be positive")
    if budget_fraction < 0:
        raise ValueError("budget fraction must be nonnegative")
    obj = RevenueIEObjective(g.W, q, u)
    return obj, CardinalityPolytope(u, budget_fraction * g.n * u, n=g.n)


# ---------------------------------------------------------------- instances


@dataclass
class Instance:
    """A serializable (objective, constraint, seed) triple.

    Unpacks as ``objective, constraint = instance``.
    """

    objective_spec: dict
    constraint_spec: dict
    seed: int = 0
    base_dir: Optional[Path] = None
    objective: Objective = field(init=False, repr=False)
    constraint: Constraint = field(init=False, repr=False)

    def __post_init__(self):
        self.objective = build_objective(self.objective_spec, self.base_dir)
        self.constraint = build_constraint(self.constraint_spec, self.objective.n)

    def __iter__(self):
        yield self.objective
        yield self.constraint

    def to_dict(self) -> dict:
        return {"objective": self.objective_spec, "constraint": self.constraint_spec,
                "seed": int(self.seed)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path):
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "Instance":
        if not isinstance(data, dict):
            raise InstanceError("instance must be a JSON object")
        for key in ("objective", "constraint"):
            if not isinstance(data.get(key), dict):
                raise InstanceError(f"instance.{key} must be an object")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise InstanceError("instance.seed must be an integer")
        return cls(data["objective"], data["constraint"], seed,
                   None if base_dir is None else Path(base_dir))

    @classmethod
    def load(cls, path) -> "Instance":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, path.parent)


def _arr(params, key, required=True):
    if key not in params:
        if required:
            raise InstanceError(f"objective.params.{key} is required")
        return None
    return np.asarray(params[key], dtype=float)


def _resolve(path, base_dir):
    p = Path(path)
    return p if p.is_absolute() or base_dir is None else Path(base_dir) / p


def build_objective(spec: dict, base_dir=None) -> Objective:
    family = spec.get("family")
    params = spec.get("params", {})
    try:
        if family == "quadratic":
            H = _arr(params, "H")
            upper = params.get("upper", 1.0)
            domain = Box(np.broadcast_to(np.asarray(upper, float), (H.shape[0],)).copy())
            return QuadraticObjective(H, _arr(params, "h", False), params.get("c", 0.0), domain)
        if family == "softmax":
            return SoftmaxObjective(_arr(params, "L"))
        if family == "gibbs":
            return GibbsPolynomial(int(params["n"]), [(t, idx) for t, idx in params["terms"]])
        if family == "cut":
            n, edges = int(params["n"]), params["edges"]
            if params.get("directed", False):
                return GibbsPolynomial.directed_cut(n, edges)
            return GibbsPolynomial.undirected_cut(n, edges)
        if family == "ising":
            return GibbsPolynomial.ising(params["unary"], params["edges"])
        if family == "flid":
            return FlidObjective(_arr(params, "W"), _arr(params, "utilities", False))
        if family == "setcover":
            return SetCoverObjective(int(params["n"]), params["weights"], params["covers"])
        if family == "influence":
            if "path" in spec:
                g = load_bipartite(_resolve(spec["path"], base_dir))
                if "users" in spec or "forums" in spec:
                    g = subsample_bipartite(g, int(spec.get("users", g.n_users)),
                                            int(spec.get("forums", g.n_forums)))
                return build_influence_instance(g, float(spec.get("upper", 10.0)))
            return InfluenceObjective(FlidObjective(_arr(params, "W")),
                                      IndependentActivation(_arr(params, "p")),
                                      params.get("upper", 1.0))
        if family == "revenue":
            if "path" in spec:
                g = load_social(_resolve(spec["path"], base_dir))
                return RevenueIEObjective(g.W, float(spec["q"]), float(spec.get("upper", 1.0)))
            return RevenueIEObjective(_arr(params, "W"), float(params["q"]),
                                      params.get("upper", 1.0))
        if family == "meanfield":
            return MeanFieldKLObjective(build_objective(params["model"], base_dir))
        if family == "intro_quadratic":
            return zoo.indefinite_dr_quadratic(_arr(params, "h", False),
                                               params.get("c", 0.0), params.get("upper", 1.0))
        if family == "swapped_quadratic":
            return zoo.swapped_quadratic()
        if family == "two_bump":
            return zoo.two_bump_submodular()
    except KeyError as exc:
        raise InstanceError(f"objective.params is missing {exc}") from None
    raise InstanceError(f"unknown objective family {family!r}")


def build_constraint(spec: dict, n: int) -> Constraint:
    kind = spec.get("type")
    try:
        if kind == "box":
            upper = np.broadcast_to(np.asarray(spec.get("upper", 1.0), float), (n,)).copy()
            return BoxConstraint(upper)
        if kind == "cardinality":
            return CardinalityPolytope(spec["u"], float(spec["b"]), n=n)
        if kind == "polytope":
            return DownClosedPolytope(spec["A"], spec["b"], spec.get("cap"))
    except KeyError as exc:
        raise InstanceError(f"constraint is missing {exc}") from None
    raise InstanceError(f"unknown constraint type {kind!r}")


def _tolist(a):
    return np.asarray(a, dtype=float).tolist()


def softmax_kernel(n: int, seed=0) -> np.ndarray:
    """``L = U diag(d) Uᵀ`` with ``d`` evenly spaced on [0, 10] and ``U`` random orthogonal."""
    rng = make_rng(seed)
    d = np.linspace(0.0, 10.0, n)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    U = Q * signs
    L = (U * d) @ U.T
    return 0.5 * (L + L.T)


def gen_softmax_instance(n: int, seed=0) -> Instance:
    """Softmax extension with ``Σ x <= n/2`` on the unit box."""
    if n < 1:
        raise ValueError("n must be positive")
    L = softmax_kernel(n, seed)
    return Instance({"family": "softmax", "params": {"L": _tolist(L)}},
                    {"type": "cardinality", "u": 1.0, "b": 0.5 * n, "n": n}, int(seed))


def gen_quadratic_instance(n: int, monotone: bool, seed=0, constraint: str = "cardinality",
                           upper=1.0, margin: float = 0.1) -> Instance:
    """DR-submodular quadratic with entries of ``H`` in [-1, 0].

    Monotone mode: ``h_i = -Σ_j H_ij ū_j + margin`` so ``∇f >= margin`` on the box,
    and ``c = 0``. Otherwise ``h = -0.2 Hᵀū`` and ``c = -½ ūᵀHū``, the exact
    minimum of ``½ xᵀHx`` over the box, which keeps ``f >= 0``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = make_rng(seed)
    A = -rng.uniform(0.0, 1.0, (n, n))
    H = 0.5 * (A + A.T)
    u = np.broadcast_to(np.asarray(upper, float), (n,)).copy()
    if monotone:
        h = -H @ u + margin
        c = 0.0
    else:
        h = -0.2 * H.T @ u
        c = -0.5 * float(u @ H @ u)
    if constraint == "cardinality":
        cons = {"type": "cardinality", "u": _tolist(u), "b": 0.5 * float(u.sum()), "n": n}
    elif constraint == "box":
        cons = {"type": "box", "upper": _tolist(u)}
    elif constraint == "polytope":
        m = max(1, n // 2)
        Ap = rng.uniform(0.0, 1.0, (m, n)) + 0.01
        cons = {"type": "polytope", "A": _tolist(Ap), "b": [1.0] * m, "cap": _tolist(u)}
    else:
        raise ValueError(f"unknown constraint kind {constraint!r}")
    params = {"H": _tolist(H), "h": _tolist(h), "c": c, "upper": _tolist(u)}
    return Instance({"family": "quadratic", "params": params}, cons, int(seed))


def gen_influence_instance(n_users: int = 50, n_forums: int = 10, seed=0, upper: float = 10.0,
                           budget_fraction: float = 0.2, pool: int = 4) -> Instance:
    """Influence instance on a subsample of a synthetic forum graph.

    A graph ``pool`` times larger is generated and its busiest
    ``n_users`` x ``n_forums`` part kept, mirroring subgraph extraction from
    a real dataset.
    """
    g = synthetic_bipartite(pool * n_users, pool * n_forums, seed)
    g = subsample_bipartite(g, n_users, n_forums)
    p = logistic(-g.degrees())
    params = {"W": _tolist(g.weight_matrix()), "p": _tolist(p), "upper": float(upper)}
    cons = {"type": "cardinality", "u": float(upper),
            "b": budget_fraction * g.n_users * upper, "n": g.n_users}
    return Instance({"family": "influence", "params": params}, cons, int(seed))


def gen_revenue_instance(n: int, seed=0, preset: str = "reality_mining") -> Instance:
    cfg = REVENUE_PRESETS[preset]
    g = synthetic_social(n, seed)
    params = {"W": _tolist(g.W), "q": cfg["q"], "upper": cfg["u"]}
    cons = {"type": "cardinality", "u": cfg["u"],
            "b": cfg["budget_fraction"] * n * cfg["u"], "n": n}
    return Instance({"family": "revenue", "params": params}, cons, int(seed))


GENERATORS = {
    "softmax": lambda n, seed: gen_softmax_instance(n, seed),
    "quadratic": lambda n, seed: gen_quadratic_instance(n, False, seed),
    "quadratic_monotone": lambda n, seed: gen_quadratic_instance(n, True, seed),
    "influence": lambda n, seed: gen_influence_instance(n, max(1, n // 5), seed),
    "revenue": lambda n, seed: gen_revenue_instance(n, seed),
}
