from .compose import (
    ComposedObjective,
    IdentityMap,
    VectorMap,
    activation_map,
    advocate_map,
    compose,
    separable_map,
)
from .influence import BipartiteActivation, IndependentActivation, InfluenceObjective
from .meanfield import MeanFieldKLObjective
from .multilinear import (
    CallableSetFunction,
    CutFunction,
    FlidObjective,
    GibbsPolynomial,
    ModularFunction,
    MultilinearObjective,
    SampledMultilinear,
    SetCoverObjective,
    SetFunction,
    hoeffding_epsilon,
    multilinear_sample_estimate,
)
from .quadratic import QuadraticObjective, spectral_norm
from .revenue import RevenueIEObjective
from .softmax import SingularMatrixError, SoftmaxObjective, lu_logdet

__all__ = [
    "BipartiteActivation",
    "CallableSetFunction",
    "ComposedObjective",
    "CutFunction",
    "FlidObjective",
    "GibbsPolynomial",
    "IdentityMap",
    "IndependentActivation",
    "InfluenceObjective",
    "MeanFieldKLObjective",
    "ModularFunction",
    "MultilinearObjective",
    "QuadraticObjective",
    "RevenueIEObjective",
    "SampledMultilinear",
    "SetCoverObjective",
    "SetFunction",
    "SingularMatrixError",
    "SoftmaxObjective",
    "VectorMap",
    "activation_map",
    "advocate_map",
    "compose",
    "hoeffding_epsilon",
    "lu_logdet",
    "multilinear_sample_estimate",
    "separable_map",
    "spectral_norm",
]
