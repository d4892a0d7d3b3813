"""Influence maximization with marketing strategies.

A multilinear model ``F`` over customers is composed with activation
probabilities ``a(x)`` driven by the investment vector ``x``.
"""

import numpy as np

from ..core import Box, Objective, ObjectiveFlags, as_point

# log(1 - p) for p = 1 would be -inf; the floor keeps derivatives finite while
# making (1 - p)^x vanish for any x > 0
_LOG_FLOOR = float(np.log(np.finfo(float).tiny))


def _log1m(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.log1p(-p)
    return np.where(p >= 1.0, _LOG_FLOOR, out)


class IndependentActivation:
    """One action per customer: ``a_i(x_i) = 1 - (1 - p_i)^{x_i}``."""

    kind = "independent"

    def __init__(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("activation probabilities must lie in [0, 1]")
        self.p = p
        self.log1m = _log1m(p)

    @property
    def n_actions(self):
        return self.p.size

    @property
    def n_customers(self):
        return self.p.size

    def __call__(self, x):
        """Return activations and the (diagonal) Jacobian as a dense matrix."""
        stay = np.exp(x * self.log1m)
        stay = np.where((self.p >= 1.0) & (x > 0), 0.0, stay)
        a = 1.0 - stay
        return a, np.diag(-stay * self.log1m)


class BipartiteActivation:
    """Actions ``s`` reach customers ``t``: ``a_t(x) = 1 - Π_s (1 - p_st)^{x_s}``.

    ``P`` has shape (actions, customers); zero entries mean no edge.
    """

    kind = "bipartite"

    def __init__(self, P):
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if np.any(P < 0) or np.any(P > 1):
            raise ValueError("activation probabilities must lie in [0, 1]")
        self.P = P
        self.log1m = _log1m(P)

    @property
    def n_actions(self):
        return self.P.shape[0]

    @property
    def n_customers(self):
        return self.P.shape[1]

    def __call__(self, x):
        stay = np.exp(x @ self.log1m)
        saturated = ((self.P >= 1.0) & (x[:, None] > 0)).any(axis=0)
        stay = np.where(saturated, 0.0, stay)
        a = 1.0 - stay
        # ∂a_t/∂x_s = -(1 - a_t) log(1 - p_st); rows are customers
        jac = -(stay[:, None] * self.log1m.T)
        return a, jac


class InfluenceObjective(Objective):
    """Expected influence ``Σ_S F(S) Π_{i∈S} a_i(x) Π_{j∉S} (1 - a_j(x))``.

    ``model`` is any multilinear objective over the customers. Since the
    activations are nondecreasing and DR-submodular, the result is
    DR-submodular whenever the model is, and monotone whenever it is.
    """

    family = "influence"

    def __init__(self, model: Objective, activation, upper=1.0):
        if activation.n_customers != model.n:
            raise ValueError("activation customers do not match the model dimension")
        m = activation.n_actions
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (m,)).copy()
        mf = model.flags
        dr = mf.dr_submodular and mf.monotone
        # a separable monotone reparameterization keeps plain submodularity
        separable = isinstance(activation, IndependentActivation)
        flags = ObjectiveFlags(
            monotone=mf.monotone,
            dr_submodular=dr,
            submodular=dr or (separable and mf.submodular),
        )
        self.model, self.activation = model, activation
        super().__init__(Box(upper), flags)

    def _eval(self, x):
        a, jac = self.activation(x)
        a = np.clip(a, 0.0, 1.0)
        value, g = self.model.value_and_grad(a)
        return value, jac.T @ g
