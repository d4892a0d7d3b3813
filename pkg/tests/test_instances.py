import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drsubmax.constraints import BoxConstraint, CardinalityPolytope, DownClosedPolytope
from drsubmax.instances import (
    GENERATORS,
    REVENUE_PRESETS,
    BipartiteGraph,
    Instance,
    InstanceError,
    ParseError,
    SocialGraph,
    build_influence_instance,
    build_revenue_instance,
    gen_influence_instance,
    gen_quadratic_instance,
    gen_revenue_instance,
    gen_softmax_instance,
    load_bipartite,
    load_social,
    logistic,
    softmax_kernel,
    subsample_bipartite,
    synthetic_bipartite,
    synthetic_social,
)
from drsubmax.verify import check_dr, check_gradient, check_monotone, check_weak_dr

DATA = Path(__file__).parent / "data"


# ---------------------------------------------------------------- softmax generator


@pytest.mark.parametrize("n", [1, 2, 4, 9])
def test_softmax_kernel_spectrum(n):
    L = softmax_kernel(n, seed=3)
    np.testing.assert_allclose(np.linalg.eigvalsh(L), np.linspace(0, 10, n), atol=1e-8)
    assert np.array_equal(L, L.T)
    assert np.linalg.eigvalsh(L).min() >= -1e-9


def test_softmax_kernel_char_poly_small():
    # independent of eigvalsh: det(L - d I) vanishes at each prescribed eigenvalue
    L = softmax_kernel(4, seed=1)
    for d in np.linspace(0, 10, 4):
        assert abs(np.linalg.det(L - d * np.eye(4))) <= 1e-9


def test_softmax_instance_layout_and_determinism():
    a, b = gen_softmax_instance(6, seed=7), gen_softmax_instance(6, seed=7)
    assert a.to_json() == b.to_json()
    assert np.array_equal(a.objective.L, b.objective.L)
    assert a.to_json() != gen_softmax_instance(6, seed=8).to_json()
    P = a.constraint
    assert isinstance(P, CardinalityPolytope)
    assert P.budget == 3.0 and np.all(P.upper == 1.0)


# ---------------------------------------------------------------- quadratic generator


@pytest.mark.parametrize("monotone", [True, False])
def test_quadratic_generator(monotone):
    inst = gen_quadratic_instance(4, monotone, seed=2, upper=[1.0, 2.0, 0.5, 1.0])
    f, P = inst
    assert np.all(f.H <= 0) and np.all(f.H >= -1)
    assert check_dr(f, samples=300).passed
    assert P.budget == pytest.approx(0.5 * 4.5)
    if monotone:
        assert np.all(f.gradient(P.upper) >= 0)
        assert check_monotone(f, samples=300).passed
    # f >= 0 on the box
    corners = ((np.arange(16)[:, None] >> np.arange(4)) & 1) * P.upper
    assert f.values(corners).min() >= -1e-12
    assert gen_quadratic_instance(4, monotone, seed=2, upper=[1.0, 2.0, 0.5, 1.0]).to_json() \
        == inst.to_json()


def test_quadratic_generator_constraint_kinds():
    assert isinstance(gen_quadratic_instance(3, True, 0, "box").constraint, BoxConstraint)
    P = gen_quadratic_instance(3, True, 0, "polytope").constraint
    assert isinstance(P, DownClosedPolytope) and np.all(P.upper <= 1.0)
    with pytest.raises(ValueError):
        gen_quadratic_instance(3, True, 0, "simplex")
    with pytest.raises(ValueError):
        gen_quadratic_instance(0, True, 0)


# ---------------------------------------------------------------- loaders


def test_load_bipartite_aggregates(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("0 0 3\n0 0 2\n")
    g = load_bipartite(p)
    assert (g.n_users, g.n_forums, g.n_edges) == (1, 1, 1)
    assert g.edges[0, 2] == 5.0


def test_load_bipartite_empty(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("")
    g = load_bipartite(p)
    assert g.n_edges == 0 and g.n_users == 0 and g.weight_matrix().shape == (0, 0)


def test_load_bipartite_forum_fixture():
    g = load_bipartite(DATA / "ucforum_sample.txt")
    # hand count: users {1..5}, forums {1,2,3,5}; pairs (1,1)x3 (1,2) (2,1)x2 (3,5)x2 (4,2) (5,3)
    assert (g.n_users, g.n_forums, g.n_edges) == (5, 4, 6)
    assert g.user_ids == [1, 2, 3, 4, 5] and g.forum_ids == [1, 2, 3, 5]
    W = g.weight_matrix()
    assert W.sum() == 10.0
    assert W[0, 0] == 3.0 and W[1, 0] == 2.0 and W[2, 3] == 2.0
    assert g.degrees().tolist() == [2, 1, 1, 1, 1]


def test_parse_error_has_line_number(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("# header\n0 1 2\n0 x 1\n")
    with pytest.raises(ParseError) as err:
        load_bipartite(p)
    assert err.value.line_no == 3 and ":3:" in str(err.value)
    p.write_text("0 1 -2\n")
    with pytest.raises(ParseError):
        load_bipartite(p)
    p.write_text("7\n")
    with pytest.raises(ParseError):
        load_bipartite(p)


def test_load_social(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("% contacts\n10 20\n10 20 2\n20 10 1\n10 10 5\n")
    g = load_social(p)
    assert g.node_ids == [10, 20]
    np.testing.assert_array_equal(g.W, [[0.0, 3.0], [1.0, 0.0]])


def test_graph_validation():
    with pytest.raises(ValueError):
        BipartiteGraph(1, 1, [[0, 1, 1.0]])
    with pytest.raises(ValueError):
        BipartiteGraph(1, 1, [[0, 0, -1.0]])
    with pytest.raises(ValueError):
        SocialGraph(np.ones((2, 3)))
    assert SocialGraph(np.ones((2, 2))).W.trace() == 0


# ---------------------------------------------------------------- influence


def test_logistic_examples():
    assert logistic(0.0) == 0.5
    assert logistic(-2.0) == pytest.approx(0.11920292202211755, abs=1e-12)
    assert np.all(np.diff(logistic(-np.arange(6))) < 0)


def test_influence_activation_from_degree():
    g = BipartiteGraph(3, 2, [[0, 0, 1.0], [0, 1, 4.0], [1, 0, 2.0]])
    obj = build_influence_instance(g, upper=5.0)
    np.testing.assert_allclose(obj.activation.p, logistic(-np.array([2.0, 1.0, 0.0])))
    assert obj.activation.p[2] == 0.5
    with pytest.raises(ValueError):
        build_influence_instance(BipartiteGraph(0, 0, np.zeros((0, 3))))


def test_influence_instances_are_dr():
    f, P = gen_influence_instance(12, 4, seed=1, upper=3.0)
    assert f.n == 12 and P.budget == pytest.approx(0.2 * 12 * 3.0)
    assert check_dr(f, samples=300).passed
    assert check_monotone(f, samples=300).passed
    assert check_gradient(f, samples=20).passed


def test_subsample_keeps_busiest():
    g = synthetic_bipartite(40, 12, seed=0)
    sub = subsample_bipartite(g, 10, 3)
    assert (sub.n_users, sub.n_forums) == (10, 3)
    W = g.weight_matrix()
    top = np.sort(np.argsort(-W.sum(axis=0), kind="stable")[:3])
    assert sub.weight_matrix().sum() <= W[:, top].sum()
    assert subsample_bipartite(g, 10, 3).edges.tolist() == sub.edges.tolist()


# ---------------------------------------------------------------- revenue


def test_revenue_presets():
    assert REVENUE_PRESETS["reality_mining"] == {"q": 0.75, "u": 10.0, "budget_fraction": 0.2}
    assert REVENUE_PRESETS["infectious"] == {"q": 0.7, "u": 20.0, "budget_fraction": 0.2}
    g = synthetic_social(15, seed=2)
    for name, cfg in REVENUE_PRESETS.items():
        f, P = build_revenue_instance(g, cfg["q"], cfg["u"], cfg["budget_fraction"])
        assert P.budget == pytest.approx(0.2 * 15 * cfg["u"])
        assert np.all(P.upper == cfg["u"]) and f.q == cfg["q"]


def test_revenue_full_budget_not_binding():
    g = synthetic_social(6, seed=0)
    _, P = build_revenue_instance(g, 0.5, 2.0, 1.0)
    assert P.contains(P.upper)
    with pytest.raises(ValueError):
        build_revenue_instance(g, 1.0, 2.0, 0.5)
    with pytest.raises(ValueError):
        build_revenue_instance(g, 0.5, 0.0, 0.5)


def test_revenue_instances_are_weakly_dr():
    for preset in REVENUE_PRESETS:
        f, _ = gen_revenue_instance(8, seed=3, preset=preset)
        assert check_weak_dr(f, samples=500).passed


# ---------------------------------------------------------------- JSON


@pytest.mark.parametrize("family", sorted(GENERATORS))
def test_generators_round_trip(family, tmp_path):
    inst = GENERATORS[family](10, 4)
    path = tmp_path / "inst.json"
    inst.save(path)
    back = Instance.load(path)
    assert back.to_json() == inst.to_json()
    x = np.full(inst.objective.n, 0.3)
    assert back.objective(x) == inst.objective(x)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
def test_quadratic_json_bitwise(seed, n):
    inst = gen_quadratic_instance(n, bool(seed % 2), seed)
    back = Instance.from_dict(json.loads(inst.to_json()))
    assert np.array_equal(back.objective.H, inst.objective.H)
    assert np.array_equal(back.objective.h, inst.objective.h)


def test_path_backed_instances(tmp_path):
    (tmp_path / "forum.txt").write_text((DATA / "ucforum_sample.txt").read_text())
    (tmp_path / "contacts.txt").write_text("0 1 3\n1 2 1\n2 0 2\n")
    spec = {"objective": {"family": "influence", "path": "forum.txt", "upper": 2.0},
            "constraint": {"type": "cardinality", "u": 2.0, "b": 2.0}}
    (tmp_path / "inf.json").write_text(json.dumps(spec))
    f, P = Instance.load(tmp_path / "inf.json")
    assert f.n == 5 and P.n == 5
    spec = {"objective": {"family": "revenue", "path": "contacts.txt", "q": 0.75, "upper": 10},
            "constraint": {"type": "box", "upper": 10}}
    (tmp_path / "rev.json").write_text(json.dumps(spec))
    f, _ = Instance.load(tmp_path / "rev.json")
    assert f.n == 3 and f([10.0, 0.0, 0.0]) == pytest.approx(3 * (1 - 0.75 ** 10))


@pytest.mark.parametrize("bad", [
    [],
    {"objective": {"family": "softmax", "params": {"L": [[1.0]]}}},
    {"objective": {"family": "nope"}, "constraint": {"type": "box"}},
    {"objective": {"family": "softmax", "params": {}}, "constraint": {"type": "box"}},
    {"objective": {"family": "softmax", "params": {"L": [[1.0]]}}, "constraint": {"type": "ball"}},
    {"objective": {"family": "softmax", "params": {"L": [[1.0]]}},
     "constraint": {"type": "box"}, "seed": "7"},
])
def test_malformed_instances(bad):
    with pytest.raises(InstanceError):
        Instance.from_dict(bad)


def test_invalid_json_file(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(InstanceError):
        Instance.load(p)
