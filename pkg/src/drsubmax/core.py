"""Lattice primitives, domain boxes and the objective interface."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

#: Absolute tolerance used for equality / membership comparisons.
TOL = 1e-9


class DimensionError(ValueError):
    """Raised when two points (or a point and a domain) disagree in dimension."""


class DomainError(ValueError):
    """Raised when an evaluation point lies outside the objective's domain."""


def as_point(x, n: Optional[int] = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-d float array, optionally checking its length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"expected a non-empty vector, got shape {arr.shape}")
    if n is not None and arr.size != n:
        raise DimensionError(f"expected dimension {n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite entries")
    return arr


def _pair(x, y):
    x = as_point(x)
    y = as_point(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.size} vs {y.size}")
    return x, y


def join(x, y) -> np.ndarray:
    """Coordinate-wise maximum ``x ∨ y``."""
    x, y = _pair(x, y)
    return np.maximum(x, y)


def meet(x, y) -> np.ndarray:
    """Coordinate-wise minimum ``x ∧ y``."""
    x, y = _pair(x, y)
    return np.minimum(x, y)


def sete(x, i: int, k: float) -> np.ndarray:
    """Copy of ``x`` with coordinate ``i`` set to ``k``."""
    out = np.array(x, dtype=float)
    out[i] = k
    return out


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned domain ``[0, upper]`` with strictly positive upper bounds."""

    upper: np.ndarray

    def __post_init__(self):
        upper = as_point(self.upper).copy()
        if np.any(upper <= 0):
            raise ValueError("box upper bounds must be strictly positive")
        upper.setflags(write=False)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unit(cls, n: int) -> "Box":
        return cls(np.ones(n))

    @property
    def n(self) -> int:
        return self.upper.size

    @property
    def lower(self) -> np.ndarray:
        return np.zeros(self.n)

    def contains(self, x, tol: float = TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return x.shape == (self.n,) and bool(
            np.all(x >= -tol) and np.all(x <= self.upper + tol)
        )

    def clip(self, x) -> np.ndarray:
        return np.clip(x, 0.0, self.upper)

    def __eq__(self, other):
        return isinstance(other, Box) and np.array_equal(self.upper, other.upper)

    def __repr__(self):
        return f"Box(upper={self.upper.tolist()})"


@dataclass(frozen=True)
class ObjectiveFlags:
    """Structural facts an objective declares about itself.

    ``monotone`` means nondecreasing. ``nonincreasing`` and ``ir_supermodular``
    are only consulted by :func:`drsubmax.objectives.compose`.
    """

    monotone: bool = False
    dr_submodular: bool = False
    submodular: bool = False
    lipschitz: Optional[float] = None
    strong_dr: Optional[float] = None
    nonincreasing: bool = False
    ir_supermodular: bool = False

    def __post_init__(self):
        if self.dr_submodular and not self.submodular:
            raise ValueError("dr_submodular implies submodular")
        if self.lipschitz is not None and self.lipschitz < 0:
            raise ValueError("Lipschitz constant must be nonnegative")
        if self.strong_dr is not None and self.strong_dr < 0:
            raise ValueError("strong DR modulus must be nonnegative")

    def with_(self, **changes) -> "ObjectiveFlags":
        return replace(self, **changes)


UNKNOWN_FLAGS = ObjectiveFlags()


class Objective:
    """Base class for a differentiable objective over a :class:`Box`.

    Subclasses implement :meth:`_eval`, returning ``(value, gradient)`` for a
    validated point. Instances are immutable after construction, so
    evaluation is safe to share between threads.
    """

    #: Name used in instance files and reports.
    family = "objective"

    def __init__(self, domain: Box, flags: ObjectiveFlags = UNKNOWN_FLAGS):
        self.domain = domain
        self.flags = flags

    @property
    def n(self) -> int:
        return self.domain.n

    def check_point(self, x, tol: float = 1e-7) -> np.ndarray:
        x = as_point(x, self.n)
        if not self.domain.contains(x, tol):
            raise DomainError(f"{self.family}: point outside domain {self.domain}")
        return x

    def value_and_grad(self, x):
        x = self.check_point(x)
        value, grad = self._eval(x)
        return float(value), np.asarray(grad, dtype=float)

    def value(self, x) -> float:
        return self.value_and_grad(x)[0]

    def gradient(self, x) -> np.ndarray:
        return self.value_and_grad(x)[1]

    __call__ = value

    def values(self, X) -> np.ndarray:
        """Evaluate on each row of ``X``. Subclasses may vectorize."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.value(row) for row in X])

    def _eval(self, x):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class FunctionObjective(Objective):
    """Objective built from plain callables ``fun(x)`` and ``grad(x)``."""

    family = "function"

    def __init__(self, fun, grad, domain: Box, flags: ObjectiveFlags = UNKNOWN_FLAGS,
                 name: str = "function"):
        super().__init__(domain, flags)
        self._fun = fun
        self._grad = grad
        self.name = name

    def _eval(self, x):
        return self._fun(x), self._grad(x)

