"""Set functions and their multilinear extensions.

A set function takes a boolean membership mask of length ``n``. Closed-form
extensions (Gibbs polynomials, FLID, set cover) are exact; anything else can
be estimated by sampling.
"""

import math

import numpy as np

from ..core import Box, Objective, ObjectiveFlags, as_point
from ..rng import make_rng


class SetFunction:
    """Oracle ``F: 2^V -> R`` over ``n`` items, called on boolean masks."""

    def __init__(self, n: int):
        self.n = int(n)

    def __call__(self, mask) -> float:
        raise NotImplementedError

    def batch(self, masks) -> np.ndarray:
        masks = np.atleast_2d(np.asarray(masks, dtype=bool))
        return np.array([self(m) for m in masks], dtype=float)


class CallableSetFunction(SetFunction):
    def __init__(self, fn, n: int):
        super().__init__(n)
        self.fn = fn

    def __call__(self, mask):
        return float(self.fn(np.asarray(mask, dtype=bool)))


class ModularFunction(SetFunction):
    """``F(S) = c + Σ_{i∈S} w_i``."""

    def __init__(self, weights, constant: float = 0.0):
        self.weights = np.asarray(weights, dtype=float)
        self.constant = float(constant)
        super().__init__(self.weights.size)

    def __call__(self, mask):
        return self.constant + float(self.weights[np.asarray(mask, dtype=bool)].sum())

    def batch(self, masks):
        masks = np.atleast_2d(np.asarray(masks, dtype=bool))
        return self.constant + masks.astype(float) @ self.weights


class CutFunction(SetFunction):
    """Weighted cut value of an undirected (or directed) graph."""

    def __init__(self, n: int, edges, directed: bool = False):
        super().__init__(n)
        edges = list(edges)
        self.src = np.array([e[0] for e in edges], dtype=int)
        self.dst = np.array([e[1] for e in edges], dtype=int)
        self.w = np.array([e[2] if len(e) > 2 else 1.0 for e in edges], dtype=float)
        self.directed = directed

    def batch(self, masks):
        masks = np.atleast_2d(np.asarray(masks, dtype=bool))
        a = masks[:, self.src]
        b = masks[:, self.dst]
        crossing = a & ~b if self.directed else a ^ b
        return crossing.astype(float) @ self.w

    def __call__(self, mask):
        return float(self.batch(mask)[0])

    def max_abs(self) -> float:
        """Upper bound on ``max_S |F(S)|``."""
        return float(np.abs(self.w).sum())


def _leave_one_out(P):
    """Row-wise products of all entries but one: ``out[t, j] = Π_{k≠j} P[t, k]``."""
    ones = np.ones((P.shape[0], 1))
    left = np.cumprod(np.hstack([ones, P[:, :-1]]), axis=1)
    right = np.cumprod(np.hstack([ones, P[:, :0:-1]]), axis=1)[:, ::-1]
    return left * right


class MultilinearObjective(Objective):
    """Base class for closed-form multilinear extensions on ``[0, 1]^n``."""

    def __init__(self, n: int, flags: ObjectiveFlags):
        super().__init__(Box.unit(n), flags)

    def set_value(self, mask) -> float:
        raise NotImplementedError

    def set_function(self) -> SetFunction:
        return CallableSetFunction(self.set_value, self.n)


class GibbsPolynomial(MultilinearObjective):
    """Multilinear polynomial ``Σ_T θ_T Π_{i∈T} x_i``.

    Covers graph cuts, hypergraph cuts and Ising models. When ``flags`` is
    omitted, conservative flags are derived: DR-submodular if every
    coefficient on a term with two or more variables is nonpositive, monotone
    if each partial derivative is nonnegative on the whole cube.
    """

    family = "gibbs"

    def __init__(self, n: int, terms, flags: ObjectiveFlags = None):
        self.terms = []
        for theta, idx in terms:
            idx = tuple(sorted({int(i) for i in idx}))
            if any(i < 0 or i >= n for i in idx):
                raise ValueError(f"term index out of range: {idx}")
            self.terms.append((float(theta), idx))
        if flags is None:
            flags = self._derive_flags(n)
        super().__init__(n, flags)

    def _derive_flags(self, n):
        dr = all(theta <= 0 for theta, idx in self.terms if len(idx) >= 2)
        grad_lb = np.zeros(n)
        for theta, idx in self.terms:
            for i in idx:
                grad_lb[i] += theta if len(idx) == 1 else min(theta, 0.0)
        return ObjectiveFlags(
            monotone=bool(np.all(grad_lb >= 0)), dr_submodular=dr, submodular=dr
        )

    @classmethod
    def undirected_cut(cls, n: int, edges):
        """``Σ w_ij (x_i + x_j - 2 x_i x_j)`` over edges ``(i, j[, w])``.

        Each undirected edge is listed once, so this equals the halved sum
        over both orientations of a symmetric weight matrix.
        """
        terms = []
        for e in edges:
            i, j, w = e[0], e[1], (e[2] if len(e) > 2 else 1.0)
            terms += [(w, (i,)), (w, (j,)), (-2.0 * w, (i, j))]
        # a cut function of a nonnegative graph is submodular, not monotone
        nonneg = all((e[2] if len(e) > 2 else 1.0) >= 0 for e in edges)
        flags = ObjectiveFlags(dr_submodular=nonneg, submodular=nonneg)
        return cls(n, terms, flags)

    @classmethod
    def directed_cut(cls, n: int, edges):
        """``Σ w_ij x_i (1 - x_j)``."""
        terms = []
        for e in edges:
            i, j, w = e[0], e[1], (e[2] if len(e) > 2 else 1.0)
            terms += [(w, (i,)), (-w, (i, j))]
        nonneg = all((e[2] if len(e) > 2 else 1.0) >= 0 for e in edges)
        flags = ObjectiveFlags(dr_submodular=nonneg, submodular=nonneg)
        return cls(n, terms, flags)

    @classmethod
    def ising(cls, unary, edges):
        """``Σ θ_s x_s + Σ θ_st x_s x_t``; submodular when all ``θ_st ≤ 0``."""
        unary = np.asarray(unary, dtype=float)
        terms = [(t, (s,)) for s, t in enumerate(unary)]
        terms += [(e[2], (e[0], e[1])) for e in edges]
        return cls(unary.size, terms)

    def _groups(self):
        # terms bucketed by degree so each bucket evaluates as one array op
        if getattr(self, "_cache", None) is None:
            buckets = {}
            for theta, idx in self.terms:
                buckets.setdefault(len(idx), ([], []))
                buckets[len(idx)][0].append(theta)
                buckets[len(idx)][1].append(idx)
            const = sum(buckets.pop(0, ([], []))[0])
            self._cache = (const, [(np.array(t), np.array(i, dtype=int).reshape(len(t), d))
                                   for d, (t, i) in sorted(buckets.items())])
        return self._cache

    def _eval(self, x):
        const, groups = self._groups()
        value = const
        grad = np.zeros(self.n)
        for theta, idx in groups:
            xs = x[idx]
            value += float(theta @ np.prod(xs, axis=1))
            grad += np.bincount(idx.ravel(), (theta[:, None] * _leave_one_out(xs)).ravel(),
                                minlength=self.n)
        return value, grad

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        const, groups = self._groups()
        out = np.full(X.shape[0], float(const))
        for theta, idx in groups:
            out += np.prod(X[:, idx], axis=2) @ theta
        return out

    def set_value(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return float(sum(theta for theta, idx in self.terms if all(mask[list(idx)])))


class FlidObjective(MultilinearObjective):
    """Multilinear extension of FLID ``Σ_{i∈S} u'_i + Σ_d max_{i∈S} W_{i,d}``.

    With ``u' = 0`` this is the facility-location objective. Per column of
    ``W`` the items are sorted ascending (stable, ties by index), and the
    extension becomes ``Σ_l W_(l) x_(l) Π_{m>l} (1 - x_(m))``.
    """

    family = "flid"

    def __init__(self, W, utilities=None):
        W = np.array(W, dtype=float)
        if W.ndim != 2:
            raise ValueError("W must be an n x D matrix")
        if np.any(W < 0):
            raise ValueError("FLID weights must be nonnegative")
        n = W.shape[0]
        u = np.zeros(n) if utilities is None else as_point(utilities, n).copy()
        self.W, self.utilities = W, u
        self.order = np.argsort(W, axis=0, kind="stable")
        monotone = bool(np.all(u >= 0))
        super().__init__(n, ObjectiveFlags(monotone=monotone, dr_submodular=True,
                                           submodular=True))

    def _check_order(self):
        sorted_w = np.take_along_axis(self.W, self.order, axis=0)
        if np.any(np.diff(sorted_w, axis=0) < 0):
            raise RuntimeError("FLID permutation cache is stale: sorted order violated")

    def _eval(self, x):
        self._check_order()
        value = float(self.utilities @ x)
        grad = self.utilities.copy()
        o = self.order
        w = np.take_along_axis(self.W, o, axis=0)
        xs = x[o]
        one_minus = 1.0 - xs
        # suffix[l, d] = Π_{m>l} (1 - xs_m), per column
        suffix = np.ones_like(xs)
        suffix[:-1] = np.cumprod(one_minus[::-1], axis=0)[::-1][1:]
        value += float(np.sum(w * xs * suffix))
        # lower[k, d] = Σ_{l<k} w_l xs_l Π_{l<m<k} (1 - xs_m)
        lower = np.zeros_like(xs)
        acc = np.zeros(xs.shape[1])
        for k in range(xs.shape[0]):
            lower[k] = acc
            acc = acc * one_minus[k] + w[k] * xs[k]
        # F(x; x_k=1) - F(x; x_k=0), exactly
        grad += np.bincount(o.ravel(), (suffix * (w - lower)).ravel(), minlength=self.n)
        return value, grad

    def set_value(self, mask):
        mask = np.asarray(mask, dtype=bool)
        value = float(self.utilities[mask].sum())
        if mask.any():
            value += float(self.W[mask].max(axis=0).sum())
        return value


class SetCoverObjective(MultilinearObjective):
    """``Σ_c m_c [1 - Π_{i∈Γ⁻¹(c)} (1 - x_i)]`` with nonnegative concept weights."""

    family = "setcover"

    def __init__(self, n: int, weights, covers):
        weights = np.asarray(weights, dtype=float)
        covers = [tuple(sorted({int(i) for i in c})) for c in covers]
        if weights.size != len(covers):
            raise ValueError("one weight per concept is required")
        if np.any(weights < 0):
            raise ValueError("concept weights must be nonnegative")
        for c in covers:
            if not c:
                raise ValueError("every concept must be covered by at least one item")
            if c[0] < 0 or c[-1] >= n:
                raise ValueError(f"cover index out of range: {c}")
        self.weights, self.covers = weights, covers
        super().__init__(n, ObjectiveFlags(monotone=True, dr_submodular=True,
                                           submodular=True))

    def _groups(self):
        if getattr(self, "_cache", None) is None:
            buckets = {}
            for m, items in zip(self.weights, self.covers):
                w, idx = buckets.setdefault(len(items), ([], []))
                w.append(m)
                idx.append(items)
            self._cache = [(np.array(w), np.array(i, dtype=int))
                           for _, (w, i) in sorted(buckets.items())]
        return self._cache

    def _eval(self, x):
        value = 0.0
        grad = np.zeros(self.n)
        for w, idx in self._groups():
            miss = 1.0 - x[idx]
            value += float(w @ (1.0 - np.prod(miss, axis=1)))
            grad += np.bincount(idx.ravel(), (w[:, None] * _leave_one_out(miss)).ravel(),
                                minlength=self.n)
        return value, grad

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros(X.shape[0])
        for w, idx in self._groups():
            out += (1.0 - np.prod(1.0 - X[:, idx], axis=2)) @ w
        return out

    def set_value(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return float(sum(m for m, c in zip(self.weights, self.covers)
                         if mask[list(c)].any()))


def hoeffding_epsilon(k: int, failure_prob: float) -> float:
    """Smallest ``ε`` with ``exp(-k ε² / 2) <= failure_prob``."""
    return math.sqrt(2.0 * math.log(1.0 / failure_prob) / k)


def multilinear_sample_estimate(F, x, k: int = 1000, seed: int = 0,
                                gradient: bool = True):
    """Monte Carlo estimate of the multilinear extension of ``F`` at ``x``.

    Draws ``k`` subsets with independent inclusion probabilities ``x``. The
    gradient estimate uses the same draws for both halves of each
    ``F(S + i) - F(S - i)`` pair. Returns ``(value, gradient_or_None)``.
    """
    if k < 1:
        raise ValueError("sample count must be at least 1")
    x = as_point(x, F.n)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("x must lie in [0, 1]^n")
    rng = make_rng(seed)
    masks = rng.random((k, F.n)) < x
    value = float(np.mean(F.batch(masks)))
    if not gradient:
        return value, None
    grad = np.zeros(F.n)
    for i in range(F.n):
        hi = masks.copy()
        hi[:, i] = True
        lo = masks.copy()
        lo[:, i] = False
        grad[i] = float(np.mean(F.batch(hi) - F.batch(lo)))
    return value, grad


class SampledMultilinear(Objective):
    """Multilinear extension of an arbitrary set function, estimated by sampling.

    Every evaluation reuses ``seed``, so the estimate is a deterministic
    function of ``x``. Flags are whatever the caller asserts about ``F``.
    """

    family = "sampled"

    def __init__(self, F: SetFunction, k: int = 1000, seed: int = 0,
                 flags: ObjectiveFlags = ObjectiveFlags()):
        self.F, self.k, self.seed = F, int(k), int(seed)
        super().__init__(Box.unit(F.n), flags)

    def _eval(self, x):
        return multilinear_sample_estimate(self.F, x, self.k, self.seed)

    def set_value(self, mask):
        return self.F(mask)
