"""Composition ``g = f ∘ h`` with structure flags derived from the preservation rules.

For monotone ``h`` the four DR/IR cases apply:

1. f DR-submodular and nondecreasing, h DR-submodular  -> g DR-submodular
2. f DR-submodular and nonincreasing, h IR-supermodular -> g DR-submodular
3. f IR-supermodular and nondecreasing, h IR-supermodular -> g IR-supermodular
4. f IR-supermodular and nonincreasing, h DR-submodular -> g IR-supermodular

A separable monotone ``h`` additionally keeps plain submodularity of ``f``,
and a separable monotone *affine* ``h`` keeps every sign of ``f``'s Hessian.
If no rule applies the structure flags are cleared.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..core import Box, DomainError, Objective, ObjectiveFlags

NONDECREASING = "nondecreasing"
NONINCREASING = "nonincreasing"


class VectorMap:
    """Differentiable map ``h: [0, ū] -> R^n`` returning ``(h(x), Jacobian)``.

    ``direction`` is ``"nondecreasing"``, ``"nonincreasing"`` or ``None``
    (not monotone). ``curvature`` is ``"dr"``, ``"ir"``, ``"linear"`` or
    ``None``.
    """

    def __init__(self, fn, domain: Box, out_dim: int, direction: Optional[str] = None,
                 curvature: Optional[str] = None, separable: bool = False):
        self.fn = fn
        self.domain = domain
        self.out_dim = int(out_dim)
        self.direction = direction
        self.curvature = curvature
        self.separable = separable

    def __call__(self, x):
        return self.fn(x)


class IdentityMap(VectorMap):
    def __init__(self, domain: Box):
        n = domain.n
        super().__init__(lambda x: (x.copy(), np.eye(n)), domain, n,
                         NONDECREASING, "linear", True)


def separable_map(funcs, derivs, domain: Box, direction=NONDECREASING,
                  curvature=None) -> VectorMap:
    """Coordinate-wise map ``h^i(x_i)`` from per-coordinate callables."""
    if len(funcs) != domain.n or len(derivs) != domain.n:
        raise ValueError("need one function and derivative per coordinate")

    def fn(x):
        y = np.array([f(xi) for f, xi in zip(funcs, x)], dtype=float)
        d = np.array([g(xi) for g, xi in zip(derivs, x)], dtype=float)
        return y, np.diag(d)

    return VectorMap(fn, domain, domain.n, direction, curvature, separable=True)


def advocate_map(q: float, upper) -> VectorMap:
    """``h^i(x_i) = 1 - q^{x_i}``: nondecreasing, concave and separable."""
    log_q = float(np.log(q))
    domain = Box(np.asarray(upper, dtype=float))

    def fn(x):
        r = np.exp(x * log_q)
        return 1.0 - r, np.diag(-log_q * r)

    return VectorMap(fn, domain, domain.n, NONDECREASING, "dr", separable=True)


def activation_map(activation, upper) -> VectorMap:
    """Wrap an influence activation (independent or bipartite) as a map."""
    from .influence import IndependentActivation

    m = activation.n_actions
    domain = Box(np.broadcast_to(np.asarray(upper, dtype=float), (m,)).copy())
    separable = isinstance(activation, IndependentActivation)
    return VectorMap(activation, domain, activation.n_customers, NONDECREASING, "dr",
                     separable=separable)


def composed_flags(f: ObjectiveFlags, h: VectorMap) -> ObjectiveFlags:
    if h.direction not in (NONDECREASING, NONINCREASING):
        return ObjectiveFlags()
    f_inc, f_dec = f.monotone, f.nonincreasing
    h_inc = h.direction == NONDECREASING
    h_dr = h.curvature in ("dr", "linear")
    h_ir = h.curvature in ("ir", "linear")
    affine_separable = h.separable and h.curvature == "linear"

    dr = (f.dr_submodular and f_inc and h_dr) or (f.dr_submodular and f_dec and h_ir)
    ir = (f.ir_supermodular and f_inc and h_ir) or (f.ir_supermodular and f_dec and h_dr)
    if affine_separable:
        dr = dr or f.dr_submodular
        ir = ir or f.ir_supermodular
    submodular = dr or (h.separable and f.submodular)

    monotone = (f_inc and h_inc) or (f_dec and not h_inc)
    nonincreasing = (f_inc and not h_inc) or (f_dec and h_inc)
    return ObjectiveFlags(
        monotone=monotone,
        nonincreasing=nonincreasing,
        dr_submodular=dr,
        submodular=submodular,
        ir_supermodular=ir,
        lipschitz=f.lipschitz if isinstance(h, IdentityMap) else None,
        strong_dr=f.strong_dr if isinstance(h, IdentityMap) else None,
    )


class ComposedObjective(Objective):
    family = "composed"

    def __init__(self, f: Objective, h: VectorMap):
        if h.out_dim != f.n:
            raise DomainError(f"map output dimension {h.out_dim} != objective dimension {f.n}")
        # a coordinate-wise monotone map attains its range at the box corners
        for corner in (np.zeros(h.domain.n), h.domain.upper):
            y, _ = h(np.array(corner, dtype=float))
            if not f.domain.contains(y, 1e-9):
                raise DomainError("map sends its domain outside the objective's domain")
        self.f, self.h = f, h
        super().__init__(h.domain, composed_flags(f.flags, h))

    def _eval(self, x):
        y, jac = self.h(x)
        y = f_clip(self.f.domain, y)
        value, g = self.f.value_and_grad(y)
        return value, jac.T @ g


def f_clip(domain: Box, y):
    return np.clip(y, 0.0, domain.upper)


def compose(f: Objective, h, h_flags: Optional[dict] = None,
            domain: Optional[Box] = None) -> ComposedObjective:
    """Return ``g = f ∘ h`` with flags derived from the preservation rules.

    ``h`` is either a :class:`VectorMap` or a list of ``(fn, derivative)``
    pairs, one per coordinate; in the latter case ``h_flags`` supplies
    ``direction`` and ``curvature`` and ``domain`` the outer box.
    """
    if not isinstance(h, VectorMap):
        h_flags = dict(h_flags or {})
        domain = domain if domain is not None else f.domain
        funcs = [p[0] for p in h]
        derivs = [p[1] for p in h]
        h = separable_map(funcs, derivs, domain,
                          direction=h_flags.get("direction", NONDECREASING),
                          curvature=h_flags.get("curvature"))
    return ComposedObjective(f, h)
