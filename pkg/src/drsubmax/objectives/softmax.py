import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ..core import Box, Objective, ObjectiveFlags

#: Determinants with magnitude below this are treated as singular.
DET_FLOOR = 1e-300


class SingularMatrixError(ArithmeticError):
    """``diag(x)(L - I) + I`` is numerically singular or has nonpositive determinant."""


def lu_logdet(M):
    """Return ``(log det M, lu_piv)`` using LU with partial pivoting.

    Raises :class:`SingularMatrixError` if the determinant is nonpositive or
    smaller in magnitude than :data:`DET_FLOOR`.
    """
    with warnings.catch_warnings():
        # an exact zero pivot is reported below as SingularMatrixError
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(M, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        raise SingularMatrixError("zero pivot in LU factorization")
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    sign = (-1) ** swaps * np.prod(np.sign(diag))
    logabs = float(np.sum(np.log(np.abs(diag))))
    if sign <= 0 or logabs < np.log(DET_FLOOR):
        raise SingularMatrixError(
            f"determinant sign {sign:+.0f}, log|det| = {logabs:.3g}"
        )
    return logabs, (lu, piv)


class SoftmaxObjective(Objective):
    """Softmax extension ``log det(diag(x)(L - I) + I)`` of a DPP with kernel ``L``.

    DR-submodular on ``[0, 1]^n`` for any PSD kernel; generally non-monotone.
    """

    family = "softmax"

    def __init__(self, L, lipschitz=None):
        L = np.array(L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError("kernel must be square")
        if not np.allclose(L, L.T, atol=1e-10, rtol=0):
            raise ValueError("kernel must be symmetric")
        L = 0.5 * (L + L.T)
        lam_min = float(np.linalg.eigvalsh(L)[0])
        if lam_min < -1e-8:
            raise ValueError(f"kernel is not PSD (smallest eigenvalue {lam_min:.3g})")
        n = L.shape[0]
        self.L = L
        self.D = L - np.eye(n)
        flags = ObjectiveFlags(
            monotone=False, dr_submodular=True, submodular=True, lipschitz=lipschitz
        )
        super().__init__(Box.unit(n), flags)

    def matrix(self, x) -> np.ndarray:
        return x[:, None] * self.D + np.eye(self.n)

    def _eval(self, x):
        value, lu_piv = lu_logdet(self.matrix(x))
        C = lu_solve(lu_piv, np.eye(self.n), check_finite=False)
        # ∇_i f = (row i of L - I) · (column i of C)
        grad = np.einsum("ik,ki->i", self.D, C)
        return value, grad
