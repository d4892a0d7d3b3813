import numpy as np

from ..core import Box, Objective, ObjectiveFlags


class RevenueIEObjective(Objective):
    """Expected revenue of the influence-and-exploit strategy.

    ``f(x) = Σ_i Σ_{j≠i} W_ij (1 - q^{x_i}) q^{x_j}``: user ``i`` becomes an
    advocate with probability ``1 - q^{x_i}`` and earns ``W_ij`` from every
    non-advocate ``j``. Submodular (a separable monotone reparameterization of
    a directed cut), but neither monotone nor DR-submodular in general.
    """

    family = "revenue"

    def __init__(self, W, q: float, upper=1.0):
        W = np.array(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError("W must be square")
        if np.any(W < 0):
            raise ValueError("W must be nonnegative")
        if not 0.0 < q < 1.0:
            raise ValueError("q must lie strictly inside (0, 1)")
        np.fill_diagonal(W, 0.0)
        n = W.shape[0]
        self.W, self.q, self.log_q = W, float(q), float(np.log(q))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,)).copy()
        super().__init__(Box(upper), ObjectiveFlags(submodular=True))

    def _eval(self, x):
        r = np.exp(x * self.log_q)
        a = 1.0 - r
        value = a @ self.W @ r
        grad = -self.log_q * r * (self.W @ r - self.W.T @ a)
        return value, grad

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        R = np.exp(X * self.log_q)
        return np.einsum("ki,ij,kj->k", 1.0 - R, self.W, R)
