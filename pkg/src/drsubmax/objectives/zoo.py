"""Small named instances used as fixtures and counterexamples."""

import numpy as np

from ..core import Box, FunctionObjective, ObjectiveFlags
from .quadratic import QuadraticObjective
from .softmax import SoftmaxObjective

#: 2x2 DR-submodular but indefinite Hessian (eigenvalues 1 and -3).
INDEFINITE_H = np.array([[-1.0, -2.0], [-2.0, -1.0]])

#: Kernel of the two-dimensional softmax extension used in illustrations.
SMALL_KERNEL = np.array([[2.25, 3.0], [3.0, 4.25]])


def indefinite_dr_quadratic(h=None, c=0.0, upper=1.0) -> QuadraticObjective:
    """DR-submodular quadratic that is neither convex nor concave."""
    return QuadraticObjective(INDEFINITE_H, h, c, Box(np.full(2, float(upper))))


def swapped_quadratic() -> QuadraticObjective:
    """``H = [[0, 1], [1, 0]]``: supermodular, fails both DR and weak DR."""
    return QuadraticObjective(np.array([[0.0, 1.0], [1.0, 0.0]]))


def small_softmax() -> SoftmaxObjective:
    return SoftmaxObjective(SMALL_KERNEL)


def _bump(x, c):
    return np.exp(-4.0 * (2.0 * x - c) ** 2)


def two_bump_submodular() -> FunctionObjective:
    """Submodular on [0, 1]^2 yet not coordinate-wise concave.

    ``0.7 (x1 - x2)^2`` gives the nonpositive cross term; the Gaussian bumps
    along each axis break concavity along the coordinates.
    """

    def fun(x):
        x1, x2 = x
        return (0.7 * (x1 - x2) ** 2 + _bump(x1, 5 / 3) + 0.6 * _bump(x1, 1 / 3)
                + _bump(x2, 5 / 3) + _bump(x2, 1 / 3))

    def grad(x):
        x1, x2 = x
        d = 1.4 * (x1 - x2)
        g1 = (d - 16 * (2 * x1 - 5 / 3) * _bump(x1, 5 / 3)
              - 0.6 * 16 * (2 * x1 - 1 / 3) * _bump(x1, 1 / 3))
        g2 = (-d - 16 * (2 * x2 - 5 / 3) * _bump(x2, 5 / 3)
              - 16 * (2 * x2 - 1 / 3) * _bump(x2, 1 / 3))
        return np.array([g1, g2])

    return FunctionObjective(fun, grad, Box.unit(2), ObjectiveFlags(submodular=True),
                             name="two_bump")


def linear(g, upper) -> QuadraticObjective:
    """``f(x) = ⟨g, x⟩`` as a degenerate quadratic."""
    g = np.asarray(g, dtype=float)
    return QuadraticObjective(np.zeros((g.size, g.size)), g, 0.0,
                              Box(np.broadcast_to(np.asarray(upper, float), g.shape).copy()))
