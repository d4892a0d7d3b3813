import numpy as np

from ..core import Box, Objective, ObjectiveFlags, as_point


def spectral_norm(H, iterations: int = 50) -> float:
    """Largest absolute eigenvalue of a symmetric matrix by power iteration."""
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    # a fixed, slightly tilted start vector keeps the estimate deterministic
    v = np.ones(n) + 1e-3 * np.arange(n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iterations):
        w = H @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        estimate = norm
        v = w / norm
    return float(estimate)


class QuadraticObjective(Objective):
    """``f(x) = ½ xᵀHx + hᵀx + c`` over a box.

    Structure flags are read off ``H``: submodular iff every off-diagonal
    entry is nonpositive, DR-submodular iff every entry is. Monotonicity is
    certified exactly by checking the smallest gradient entry over the box.
    """

    family = "quadratic"

    def __init__(self, H, h=None, c: float = 0.0, domain: Box = None):
        H = np.array(H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("H must be square")
        if not np.allclose(H, H.T, atol=1e-12, rtol=0):
            raise ValueError("H must be symmetric")
        n = H.shape[0]
        H = 0.5 * (H + H.T)
        h = np.zeros(n) if h is None else as_point(h, n).copy()
        domain = Box.unit(n) if domain is None else domain
        if domain.n != n:
            raise ValueError("domain dimension does not match H")
        self.H, self.h, self.c = H, h, float(c)

        off = H[~np.eye(n, dtype=bool)]
        submodular = bool(np.all(off <= 0))
        dr = bool(np.all(H <= 0))
        # min over the box of (Hx + h)_i splits across coordinates
        grad_min = h + np.minimum(H * domain.upper, 0.0).sum(axis=1)
        monotone = bool(np.all(grad_min >= 0))
        # for entrywise nonpositive H, vᵀHv ≤ min_i H_ii ‖v‖² on ±ℝ₊ⁿ
        mu = float(max(0.0, np.min(-np.diag(H)))) if dr else None
        flags = ObjectiveFlags(
            monotone=monotone,
            dr_submodular=dr,
            submodular=submodular,
            lipschitz=spectral_norm(H),
            strong_dr=mu,
        )
        super().__init__(domain, flags)

    def _eval(self, x):
        Hx = self.H @ x
        return 0.5 * x @ Hx + self.h @ x + self.c, Hx + self.h

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.H, X) + X @ self.h + self.c

    def hessian(self, x=None) -> np.ndarray:
        return self.H.copy()
