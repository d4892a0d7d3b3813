import numpy as np

from ..core import Box, Objective, ObjectiveFlags

#: Coordinates are clamped into [EPS, 1 - EPS] before taking logarithms.
EPS = 1e-9


def entropy(x) -> float:
    """Sum of binary entropies ``-Σ [x log x + (1 - x) log(1 - x)]``."""
    x = np.clip(x, EPS, 1.0 - EPS)
    return float(-np.sum(x * np.log(x) + (1.0 - x) * np.log1p(-x)))


class MeanFieldKLObjective(Objective):
    """Negated mean-field KL divergence, up to the constant ``log Z``.

    ``f(x) = F̃(x) + H(x)`` where ``F̃`` is the multilinear extension of the
    log-density and ``H`` the factorized entropy. DR-submodular whenever the
    log-density is submodular.
    """

    family = "meanfield"

    def __init__(self, model: Objective):
        mf = model.flags
        flags = ObjectiveFlags(dr_submodular=mf.submodular, submodular=mf.submodular)
        self.model = model
        super().__init__(Box.unit(model.n), flags)

    @staticmethod
    def clamp(x):
        return np.clip(x, EPS, 1.0 - EPS)

    def was_clamped(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.any(x < EPS) or np.any(x > 1.0 - EPS))

    def _eval(self, x):
        xc = self.clamp(x)
        value, grad = self.model.value_and_grad(xc)
        value += entropy(xc)
        grad = grad - (np.log(xc) - np.log1p(-xc))
        return value, grad
