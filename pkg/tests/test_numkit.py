from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from semiage import numkit
from semiage.errors import MonotonicityViolation, QuadratureFailure
from semiage.numkit import Status


# ---------------------------------------------------------------------------
# monotone_inverse
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "f, target, bracket, expected",
    [
        (lambda x: math.exp(-x), 0.5, (0.0, 50.0), math.log(2.0)),
        (lambda x: x, 0.25, (0.0, 1.0), 0.25),
        # Weibull shape 2 survival e^{-x^2} = 0.5  =>  x = sqrt(ln 2)
        (lambda x: math.exp(-x * x), 0.5, (0.0, 10.0), 0.832554611157698),
    ],
)
def test_monotone_inverse_examples(f, target, bracket, expected):
    x = numkit.monotone_inverse(f, target, bracket)
    assert abs(x - expected) < 1e-9
    assert abs(f(x) - target) <= 1e-9 * (1 + abs(target))


def test_monotone_inverse_empty_set_is_zero():
    # increasing f with f > target everywhere: sup of the empty set is 0
    assert numkit.monotone_inverse(lambda x: x + 1.0, 0.5, (0.0, 1.0)) == 0.0


def test_monotone_inverse_target_beyond_far_end():
    assert numkit.monotone_inverse(lambda x: x, 5.0, (0.0, 1.0)) == 1.0


def test_monotone_inverse_flat_piece_returns_sup():
    # min(u, v) as a function of v at u = 0.3 is flat at 0.3 beyond v = 0.3
    x = numkit.monotone_inverse(lambda v: min(0.3, v), 0.3, (0.0, 1.0))
    assert x == pytest.approx(1.0)


def test_monotone_inverse_rejects_non_monotone():
    with pytest.raises(MonotonicityViolation):
        numkit.monotone_inverse(lambda x: (x - 0.5) ** 2, 0.1, (0.0, 1.0))


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(0.2, 5.0),
    b=st.floats(-3.0, 3.0),
    x=st.floats(0.01, 0.99),
)
def test_monotone_inverse_roundtrip(a, b, x):
    # f(x) = b + x^a is strictly increasing on [0, 1]
    f = lambda z: b + z**a  # noqa: E731
    got = numkit.monotone_inverse(f, f(x), (0.0, 1.0), tol=1e-12)
    assert abs(f(got) - f(x)) <= 1e-9 * (1 + abs(f(x)))


def test_monotone_inverse_array_matches_scalar():
    targets = np.array([0.9, 0.5, 0.1, 1e-6])
    got = numkit.monotone_inverse_array(lambda x: np.exp(-x), targets, 0.0, 50.0, increasing=False)
    assert_allclose(got, -np.log(targets), rtol=1e-12)


# ---------------------------------------------------------------------------
# integrate
# ---------------------------------------------------------------------------


def test_integrate_constant():
    assert numkit.integrate(lambda x: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_integrate_independence_kendall_integrand():
    # t/u on [t, 1] with t = 0.5: antiderivative t ln u
    got = numkit.integrate(lambda u: 0.5 / u, 0.5, 1.0)
    assert abs(got - 0.5 * math.log(2.0)) < 1e-9
    assert got == pytest.approx(0.346573590279973, abs=1e-12)


def test_integrate_generator_integrand():
    # 1/(s ln s) on [1/e, 0.5]: antiderivative ln|ln s|
    got = numkit.integrate(lambda s: 1.0 / (s * math.log(s)), 1.0 / math.e, 0.5)
    assert got == pytest.approx(math.log(math.log(2.0)), abs=1e-9)
    assert got == pytest.approx(-0.366512920581664, abs=1e-9)


def test_integrate_integrable_endpoint_singularity():
    # x^{-1/4}: the shell [g/10, g] contributes O(g^{3/4}), below 1e-5 before g = 1e-8
    got = numkit.integrate(lambda x: x**-0.25, 0.0, 1.0, tol=1e-5, singular=(True, False))
    assert got == pytest.approx(4.0 / 3.0, abs=1e-5)


def test_integrate_divergent_tail_raises():
    with pytest.raises(QuadratureFailure):
        numkit.integrate(lambda x: 1.0 / x if x > 0 else math.inf, 0.0, 1.0, singular=(True, False))


@settings(max_examples=40, deadline=None)
@given(
    k=st.floats(-3.0, 3.0),
    a=st.floats(0.0, 1.0),
    w1=st.floats(0.01, 1.0),
    w2=st.floats(0.01, 1.0),
)
def test_integrate_additive(k, a, w1, w2):
    f = lambda x: math.exp(k * x) * math.cos(x)  # noqa: E731
    b, c = a + w1, a + w1 + w2
    tol = 1e-9
    whole = numkit.integrate(f, a, c, tol)
    parts = numkit.integrate(f, a, b, tol) + numkit.integrate(f, b, c, tol)
    assert abs(whole - parts) <= 3 * tol


def test_integrate_batch_matches_closed_forms():
    t = np.array([0.1, 0.5, 0.9])
    got = numkit.integrate_batch(lambda u: np.broadcast_to(t[:, None], u.shape) / u, t, np.ones(3), tol=1e-12)
    assert_allclose(got, -t * np.log(t), atol=1e-12)


def test_integrate_batch_square_root_endpoint():
    got = numkit.integrate_batch(lambda u: np.sqrt(1.0 - u), np.array([0.0]), np.array([1.0]), tol=1e-11)
    assert got[0] == pytest.approx(2.0 / 3.0, abs=1e-10)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


def test_monotonicity_examples():
    assert numkit.monotonicity_verdict(lambda x: x**2, np.linspace(0, 1, 32), "increasing").holds
    v = numkit.monotonicity_verdict(lambda x: x**2, np.linspace(-1, 1, 32), "increasing")
    assert v.fails
    assert -1.0 <= v.witness[0] < 0.0


def test_monotonicity_mixture_rate_decreasing():
    r = lambda t: (np.exp(-t) + 5 * np.exp(-5 * t)) / (np.exp(-t) + np.exp(-5 * t))  # noqa: E731
    assert numkit.monotonicity_verdict(r, np.linspace(0, 5, 100), "decreasing").holds


def test_monotonicity_needs_sixteen_points():
    with pytest.raises(ValueError):
        numkit.monotonicity_verdict(lambda x: x, np.linspace(0, 1, 8))


def test_verdict_three_values():
    tol = 1e-6
    assert numkit.verdict_from_slack([0.0, 1.0], tol=tol).status is Status.HOLDS
    assert numkit.verdict_from_slack([-5e-7, 1.0], tol=tol).status is Status.INCONCLUSIVE
    v = numkit.verdict_from_slack([1.0, -1e-3], [[0.1, 0.2], [0.3, 0.4]], tol=tol)
    assert v.status is Status.FAILS
    assert v.witness == (0.3, 0.4)
    assert v.margin == pytest.approx(-1e-3)


def test_verdict_nan_counts_as_violation():
    assert numkit.verdict_from_slack([1.0, float("nan")], [0.0, 1.0]).fails


def test_fails_witness_reproduces_violation():
    g = np.linspace(-1, 1, 41)
    f = lambda x: np.sin(3 * x)  # noqa: E731
    v = numkit.monotonicity_verdict(f, g, "increasing", tol=1e-7)
    assert v.fails
    a, b = v.witness
    assert f(b) - f(a) < -v.tol


def test_equivalence_verdict_two_valued():
    assert numkit.equivalence_verdict([1e-4, -2e-4], tol=1e-3).holds
    v = numkit.equivalence_verdict([1e-4, -2e-3], [0.1, 0.2], tol=1e-3)
    assert v.fails and v.witness == (0.2,)


def test_verdict_to_dict_is_json_ready():
    import json

    v = numkit.verdict_from_slack([1.0, -1.0], [[0.0, 1.0], [2.0, 3.0]], tol=1e-6)
    d = v.to_dict()
    assert d["status"] == "Fails"
    json.dumps(d)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=16, max_size=40))
def test_monotone_verdict_symmetric_under_negation(values):
    g = np.arange(len(values), dtype=float)
    y = np.cumsum(np.abs(values))
    up = numkit.sequence_verdict(g, y, "increasing")
    down = numkit.sequence_verdict(g, -y, "decreasing")
    assert up.status is down.status is Status.HOLDS


def test_convexity_verdict():
    g = np.linspace(0, 2, 50)
    assert numkit.convexity_verdict(np.exp, g, "convex").holds
    assert numkit.convexity_verdict(np.log1p, g, "convex").fails


def test_real_function_derivative_matches_difference():
    f = numkit.RealFunction1D(np.exp, (0.0, 1.0), derivative=np.exp)
    for x in (0.1, 0.5, 0.9):
        fd = numkit.central_difference(f.eval, x)
        assert abs(fd / f.deriv(x) - 1.0) < 1e-6


def test_interior_grid_excludes_endpoints():
    g = numkit.interior_grid(19)
    assert_allclose(g, np.arange(1, 20) / 20)
