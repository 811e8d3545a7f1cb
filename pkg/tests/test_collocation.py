import math

import numpy as np
import pytest

from sparse_hermite.collocation import (
    MAX_BRUTEFORCE_ENVELOPE,
    HermiteExpansion,
    ModelEvaluationError,
    SampledError,
    ValueStore,
    best_n_term_curve,
    build,
    c_nu_bruteforce,
    delta_apply,
    delta_norm_sum,
    evaluate,
    tensor_interp,
    to_hermite,
)
from sparse_hermite.hermite import GROWTH_K, gauss_hermite, hermite_eval
from sparse_hermite.multi_index import (
    ZERO,
    MonotoneSet,
    MultiIndex,
    NotMonotoneError,
    count_points,
    envelope,
    neighbors,
    td_set,
)

E1, E2 = MultiIndex.unit(1), MultiIndex.unit(2)


def random_monotone(rng, size, max_dim=3):
    lam = MonotoneSet([ZERO])
    while len(lam) < size:
        cands = neighbors(lam, 2, max_dim)
        lam = lam.with_index(cands[rng.integers(len(cands))])
    return lam


def hermite_poly(coeffs: dict):
    """Scalar model ``sum_nu a_nu H_nu(xi)``."""

    def f(xi):
        xi = np.atleast_1d(xi)
        total = 0.0
        for nu, a in coeffs.items():
            term = a
            for m, k in nu.items:
                term *= hermite_eval(k, xi[m - 1]) if m <= len(xi) else hermite_eval(k, 0.0)
            total += term
        return total

    return f


def test_build_examples():
    sc = build(MonotoneSet([ZERO]), lambda xi: 7.0)
    assert sc.store.n_evaluations == 1
    assert evaluate(sc, [1.0, -2.0, 3.0]) == pytest.approx(7.0)

    calls = []
    sc = build(MonotoneSet([ZERO, E1, E2]), lambda xi: calls.append(xi) or 1.0)
    assert len(calls) == 5 == count_points(sc.lam)[0]
    assert sc(np.array([0.3, -1.1])) == pytest.approx(1.0)

    sc = build(td_set(3, 2), lambda xi: 2.0 + xi[0] * xi[1] - xi[1], dim=2)
    assert sc([1.5, -0.5]) == pytest.approx(2.0 - 0.75 + 0.5, abs=1e-12)


def test_mixed_term_needs_mixed_index():
    sc = build(MonotoneSet([ZERO, E1, E2]), lambda xi: xi[0] * xi[1], dim=2)
    assert sc([1.0, 1.0]) == pytest.approx(0.0, abs=1e-14)


def test_build_refuses_non_monotone_sets():
    with pytest.raises(NotMonotoneError):
        build([ZERO, MultiIndex((1, 1))], lambda xi: 1.0)


def test_incremental_build_reuses_values():
    store = ValueStore(lambda xi: float(np.sum(xi)))
    build(MonotoneSet([ZERO, E1]), store)
    n = store.n_evaluations
    build(MonotoneSet([ZERO, E1, E2]), store)
    assert store.n_evaluations == n + 2


def test_fixed_dim_pads_parameters():
    seen = []
    build(MonotoneSet([ZERO, E1]), lambda xi: seen.append(len(xi)) or 0.0, dim=4)
    assert seen == [4, 4, 4]


def test_model_failure_reports_point():
    def model(xi):
        if len(xi) and xi[0] > 0:
            raise ValueError("boom")
        return 0.0

    with pytest.raises(ModelEvaluationError) as info:
        build(MonotoneSet([ZERO, E1]), model)
    np.testing.assert_allclose(info.value.xi, [1.0])


def test_threaded_store_is_deterministic():
    lam = td_set(4, 3)
    f = lambda xi: np.array([np.sum(np.sin(xi)), np.prod(np.cos(xi))])  # noqa: E731
    a = build(lam, f)
    b = build(lam, f, max_workers=4)
    assert list(a.store.values) == list(b.store.values)
    for key in a.store.values:
        np.testing.assert_array_equal(a.store.values[key], b.store.values[key])


def test_polynomial_exactness_on_random_sets():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        lam = random_monotone(rng, int(rng.integers(1, 16)))
        coeffs = {nu: rng.uniform(-1, 1) for nu in lam}
        p = hermite_poly(coeffs)
        sc = build(lam, p)
        d = max(lam.max_dim, 1)
        X = rng.uniform(-3, 3, (100, d))
        exact = np.array([p(x) for x in X])
        assert np.max(np.abs(sc.evaluate_many(X) - exact)) <= 1e-7


def test_vector_valued_model():
    lam = td_set(2, 2)
    f = lambda xi: np.array([1.0, xi[0], xi[0] ** 2 - xi[1]])  # noqa: E731
    sc = build(lam, f, dim=2)
    x = np.array([0.7, -1.2])
    np.testing.assert_allclose(sc(x), f(x), atol=1e-12)


def test_delta_examples():
    f = lambda xi: 5.0  # noqa: E731
    assert delta_apply(ZERO, f)([0.4]) == pytest.approx(5.0)
    assert delta_apply(E1, f)([0.4]) == pytest.approx(0.0, abs=1e-14)
    g = lambda xi: xi[0] ** 2  # noqa: E731
    # Delta_1 on x^2: U_1 x^2 = 1 (two nodes +-1), U_0 x^2 = 0
    assert delta_apply(E1, g, dim=1)([2.0]) == pytest.approx(1.0, abs=1e-13)
    X, vals = delta_apply(MultiIndex((2,)), g, dim=1).at_nodes()
    np.testing.assert_allclose(vals, X[:, 0] ** 2 - 1.0, atol=1e-13)


def test_telescoping_over_envelope():
    rng = np.random.default_rng(17)
    f = lambda xi: float(np.exp(0.3 * xi[0] - 0.2 * xi[-1]) + np.sin(np.sum(xi)))  # noqa: E731
    for _ in range(20):
        nu = MultiIndex(rng.integers(0, 4, size=3))
        store = ValueStore(f, dim=3)
        R = envelope(nu)
        X = rng.uniform(-2, 2, (10, 3))
        total = sum(delta_apply(i, store).at(X) for i in R)
        for k in R:
            store.require_grid(k)
        np.testing.assert_allclose(total, tensor_interp(nu, store, X)[:, 0], atol=1e-10)


# --- Hermite conversion -------------------------------------------------


def _quadrature_coefficients(f, nu, d, n=12):
    """Oracle: f_nu = E[f H_nu] by full tensor Gauss-Hermite quadrature in d dimensions."""
    rule = gauss_hermite(n)
    total = 0.0
    for idx in np.ndindex(*(n,) * d):
        xi = rule.nodes[list(idx)]
        w = np.prod(rule.weights[list(idx)])
        h = np.prod([hermite_eval(nu[m], xi[m - 1]) for m in range(1, d + 1)])
        total += w * f(xi) * h
    return total


def test_to_hermite_examples():
    he = to_hermite(build(MonotoneSet([ZERO, E1]), lambda xi: 3.0 * xi[0] if len(xi) else 0.0))
    assert set(he.terms) <= {ZERO, E1}
    assert float(he.terms[E1][0]) == pytest.approx(3.0, abs=1e-13)
    assert abs(float(he.terms.get(ZERO, [0.0])[0])) <= 1e-13


def test_to_hermite_terms_and_consistency():
    rng = np.random.default_rng(8)
    f = lambda xi: float(np.exp(0.4 * xi[0] + 0.3 * xi[1]))  # noqa: E731
    for _ in range(8):
        lam = random_monotone(rng, int(rng.integers(2, 12)), max_dim=2)
        sc = build(lam, f, dim=2)
        he = to_hermite(sc)
        assert all(nu in lam for nu in he.terms)
        X = rng.normal(size=(30, 2))
        np.testing.assert_allclose(he.evaluate_many(X), sc.evaluate_many(X), atol=1e-8)
        # Parseval: coefficients are the L2 projections of the interpolant
        for nu in list(he.terms)[:4]:
            oracle = _quadrature_coefficients(sc, nu, 2)
            assert float(he.terms[nu][0]) == pytest.approx(oracle, abs=1e-9)


def test_best_n_term_examples():
    he = HermiteExpansion({ZERO: np.array([1.0]), E1: np.array([0.1]), E2: np.array([-0.5])})
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 2))
    ref = he.evaluate_many(X)
    curve = best_n_term_curve(he, SampledError(X, ref))
    assert [n for n, _ in curve] == [1, 2, 3]
    assert curve[-1][1] == pytest.approx(0.0, abs=1e-14)
    # second term picked is e_2 (larger coefficient)
    expect = np.mean(np.linalg.norm(ref - (1.0 - 0.5 * X[:, 1:2]), axis=1))
    assert curve[1][1] == pytest.approx(expect)
    single = HermiteExpansion({ZERO: np.array([2.0])})
    assert len(best_n_term_curve(single, SampledError(X, np.full((200, 1), 2.0)))) == 1
    with pytest.raises(ValueError):
        best_n_term_curve(HermiteExpansion({}), SampledError(X, ref))


def test_best_n_term_full_matches_collocation_error():
    f = lambda xi: np.array([np.cos(xi[0]) * (1 + 0.1 * xi[1])])  # noqa: E731
    sc = build(td_set(3, 2), f, dim=2)
    he = to_hermite(sc)
    X = np.random.default_rng(1).normal(size=(100, 2))
    metric = SampledError(X, np.stack([f(x) for x in X]))
    curve = best_n_term_curve(he, metric)
    assert curve[-1][1] == pytest.approx(metric(sc.evaluate_many(X)), rel=1e-8)


# --- c_nu ---------------------------------------------------------------


def test_c_nu_examples():
    assert c_nu_bruteforce(ZERO) == pytest.approx(1.0)
    for nu in [E1, MultiIndex((2,)), MultiIndex((2, 1)), MultiIndex((1, 1, 1)), MultiIndex((5,))]:
        c = c_nu_bruteforce(nu)
        assert c >= 1.0 - 1e-12  # Lambda = empty set gives ||H_nu|| = 1
        assert c <= delta_norm_sum(nu) + 1e-12
        assert c <= math.prod((1 + GROWTH_K * k) ** 2 for _, k in nu.items) + 1e-12


def test_c_nu_refuses_large_envelope():
    big = MultiIndex((MAX_BRUTEFORCE_ENVELOPE,))
    with pytest.raises(ValueError, match="envelope"):
        c_nu_bruteforce(big)
