"""Random instance builders shared by the test modules."""

import numpy as np

from drsubmax.objectives import FlidObjective, GibbsPolynomial, SetCoverObjective


def random_gibbs(rng, n, n_terms=None, max_degree=3):
    n_terms = n_terms or 2 * n
    terms = [(float(rng.normal()), ())]
    for _ in range(n_terms):
        d = int(rng.integers(1, min(max_degree, n) + 1))
        idx = tuple(int(i) for i in rng.choice(n, size=d, replace=False))
        terms.append((float(rng.normal()), idx))
    return GibbsPolynomial(n, terms)


def random_flid(rng, n, D=3):
    return FlidObjective(rng.uniform(0, 1, (n, D)), rng.normal(size=n))


def random_setcover(rng, n, concepts=None):
    concepts = concepts or n + 2
    covers = []
    for _ in range(concepts):
        k = int(rng.integers(1, n + 1))
        covers.append(tuple(int(i) for i in rng.choice(n, size=k, replace=False)))
    return SetCoverObjective(n, rng.uniform(0, 2, concepts), covers)


def random_edges(rng, n, p=0.5):
    return [(i, j, float(rng.uniform(0.1, 2.0)))
            for i in range(n) for j in range(i + 1, n) if rng.random() < p]
