from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from semiage import kendall as kd
from semiage import semicopula as sc
from semiage import univariate as uv
from semiage.errors import GridMismatch, MissingDensity, NotPseudoArchimedean, SectionInversionFailure
from semiage.registry import parse_copula, parse_generator

T = kd.default_grid()
LN2 = math.log(2.0)
ROUTE_FAMILIES = ["pi", "clayton:0.5", "clayton:1", "clayton:2", "gumbel:1.5", "gumbel:2"]


def k_pi(t):
    return t - t * np.log(t)


# ---------------------------------------------------------------------------
# partition supremum
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "key, expected",
    [
        ("m", 0.5),
        ("w", 1.0),
        ("pi", 0.5 + 0.5 * LN2),
    ],
)
def test_partition_sup_golden(key, expected):
    assert kd.kendall_partition_sup(parse_copula(key), 0.5) == pytest.approx(expected, abs=1e-3)


def test_partition_sup_independence_frozen():
    assert 0.5 + 0.5 * LN2 == pytest.approx(0.846574, abs=1e-6)


def _exhaustive_partition_value(S, t, n):
    """Independent oracle: maximise the partition sum over all subsets of a fine mesh."""
    import itertools

    mesh = np.linspace(0.0, 1.0, n + 1)
    best = -np.inf
    inner = mesh[1:-1]
    for k in range(len(inner) + 1):
        for pts in itertools.combinations(inner, k):
            u = np.concatenate([[0.0], pts, [1.0]])
            total = 0.0
            for a, b in zip(u[:-1], u[1:]):
                v = sc.numkit.monotone_inverse(lambda x: float(S(b, x)), t, (0.0, 1.0))
                total += float(S(b, v) - S(a, v))
            best = max(best, total)
    return best


@pytest.mark.parametrize("key, expected", [("m", 0.5), ("w", 1.0)])
def test_partition_sup_small_partition_oracle(key, expected):
    S = parse_copula(key)
    assert _exhaustive_partition_value(S, 0.5, 8) == pytest.approx(expected, abs=1e-9)


def test_partition_detail_converges_for_product():
    res = kd.kendall_partition_detail(sc.product(), 0.3)
    assert res.converged
    assert res.value == pytest.approx(float(k_pi(0.3)), abs=1e-3)


def test_partition_warns_when_cap_reached():
    with pytest.warns(kd.KendallPrecisionWarning):
        kd.kendall_partition_sup(sc.product(), 0.3, start_n=2, max_n=4, tol=1e-12)


def test_partition_endpoint():
    assert kd.kendall_partition_sup(sc.product(), 1.0) == 1.0


# ---------------------------------------------------------------------------
# closed form
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "gen, t, expected",
    [
        ("clayton:1", 0.5, 0.75),
        # t - t ln t / 2
        ("gumbel:2", 0.5, 0.5 + 0.25 * LN2),
        # t + (2/pi) cot(pi t / 2)
        ("cosine", 0.5, 0.5 + 2.0 / math.pi),
        ("indep", 0.5, 0.5 + 0.5 * LN2),
    ],
)
def test_closed_form_golden(gen, t, expected):
    assert kd.kendall_archimedean(parse_generator(gen), t) == pytest.approx(expected, abs=1e-12)


def test_closed_form_frozen_values():
    assert kd.kendall_archimedean(parse_generator("gumbel:2"), 0.5) == pytest.approx(0.673287, abs=1e-6)
    assert kd.kendall_archimedean(parse_generator("cosine"), 0.5) == pytest.approx(1.136620, abs=1e-6)


def test_cosine_curve_exceeds_one_near_zero():
    k = kd.kendall_archimedean(parse_generator("cosine"), 0.01)
    assert k > 10
    assert k == pytest.approx(0.01 + (2 / math.pi) / math.tan(math.pi * 0.005), rel=1e-12)


@pytest.mark.filterwarnings("ignore::semiage.kendall.KendallPrecisionWarning")
def test_cosine_partition_matches_closed_form_away_from_zero():
    S = parse_copula("arch-gen:cosine")
    t = np.linspace(0.2, 0.9, 15)
    closed = kd.kendall_archimedean(parse_generator("cosine"), t)
    assert_allclose(kd.partition_curve(S, t).values, closed, atol=1e-3)


def test_cosine_partition_error_decays_like_one_over_n():
    S = parse_copula("arch-gen:cosine")
    exact = float(kd.kendall_archimedean(parse_generator("cosine"), 0.1))
    errs = [kd._partition_sum(S, 0.1, n) - exact for n in (2048, 4096, 8192)]
    assert errs[0] > errs[1] > errs[2] > 0
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.05)


# ---------------------------------------------------------------------------
# integral route
# ---------------------------------------------------------------------------


def test_integral_product():
    assert kd.kendall_integral(sc.product(), 0.5) == pytest.approx(0.5 + 0.5 * LN2, abs=1e-10)


def test_integral_matches_closed_form_clayton():
    got = kd.kendall_integral(parse_copula("clayton:1"), 0.5)
    assert got == pytest.approx(0.75, abs=1e-6)


def test_integral_rejects_minimum():
    with pytest.raises(SectionInversionFailure):
        kd.kendall_integral(sc.minimum(), 0.5)


def test_integral_non_archimedean_fgm():
    # oracle: partition sums for a copula without closed form
    S = parse_copula("fgm:0.5")
    for t in (0.2, 0.5, 0.8):
        assert kd.kendall_integral(S, t) == pytest.approx(kd.kendall_partition_sup(S, t), abs=1e-3)


@pytest.mark.parametrize("key", ROUTE_FAMILIES + ["frank:3", "frank:-3"])
def test_three_routes_agree(key):
    S = parse_copula(key)
    sup = kd.partition_curve(S, T).values
    closed = kd.archimedean_curve(S.generator, T).values
    integral = kd.integral_curve(S, T).values
    assert np.max(np.abs(sup - closed)) <= 1e-3
    assert np.max(np.abs(integral - closed)) <= 1e-6
    assert np.max(np.abs(sup - integral)) <= 1e-3


# ---------------------------------------------------------------------------
# classification and equivalence
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "curve, pkd, nkd",
    [
        (kd.KendallCurve(T, T.copy(), "partition-sup"), "Holds", "Fails"),
        (kd.KendallCurve(T, 2 * T - T**2, "archimedean-closed-form"), "Holds", "Fails"),
        (kd.KendallCurve(T, T - 2 * T * np.log(T), "archimedean-closed-form"), "Fails", "Holds"),
        (kd.KendallCurve(T, k_pi(T), "archimedean-closed-form"), "Holds", "Holds"),
    ],
)
def test_classify_pkd_nkd(curve, pkd, nkd):
    v = kd.classify_pkd_nkd(curve)
    assert (v["PKD"].status.value, v["NKD"].status.value) == (pkd, nkd)


def test_sqrtlog_generator_is_nkd():
    K = kd.archimedean_curve(parse_generator("sqrtlog"), T)
    assert_allclose(K.values, T - 2 * T * np.log(T), rtol=1e-12)
    assert kd.classify_pkd_nkd(K)["NKD"].holds


def test_kendall_equivalent():
    pi = kd.archimedean_curve(parse_generator("indep"))
    assert kd.kendall_equivalent(pi, pi).holds
    c1 = kd.archimedean_curve(parse_generator("clayton:1"))
    g2 = kd.archimedean_curve(parse_generator("gumbel:2"))
    v = kd.kendall_equivalent(c1, g2)
    assert v.fails


def test_kendall_equivalent_resamples_by_evaluation():
    a = kd.archimedean_curve(parse_generator("gumbel:2"), T)
    b = kd.archimedean_curve(parse_generator("gumbel:2"), np.linspace(0.1, 0.9, 7))
    assert kd.kendall_equivalent(a, b, tol=1e-12).holds


def test_kendall_equivalent_grid_mismatch():
    a = kd.KendallCurve(T, T, "partition-sup")
    b = kd.KendallCurve(T[:5], T[:5], "partition-sup")
    with pytest.raises(GridMismatch):
        kd.kendall_equivalent(a, b)


def test_weibull_two_ageing_function_equivalent_to_gumbel():
    K_C = kd.integral_curve(sc.product(), T)
    K_B = kd.transported_curve(K_C, uv.weibull(2.0), T)
    g2 = kd.archimedean_curve(parse_generator("gumbel:2"), T)
    assert kd.kendall_equivalent(K_B, g2, tol=1e-6).holds


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------


def test_reconstruct_independence():
    K = kd.archimedean_curve(parse_generator("indep"))
    g = kd.reconstruct_generator(K, 1.0 / math.e)
    t = np.array([0.1, 0.3, 0.6, 0.9])
    assert_allclose(g.phi(t), -np.log(t), rtol=1e-8)


def test_reconstruct_clayton():
    K = kd.archimedean_curve(parse_generator("clayton:1"))
    g = kd.reconstruct_generator(K, 0.5)
    t = np.array([0.1, 0.3, 0.6, 0.9])
    assert_allclose(g.phi(t), 1.0 / t - 1.0, rtol=1e-8)


def test_reconstruct_minimum_raises():
    K = kd.KendallCurve(T, T.copy(), "partition-sup")
    with pytest.raises(NotPseudoArchimedean) as err:
        kd.reconstruct_generator(K, 0.5)
    assert err.value.t_range == (T[0], T[-1])


@pytest.mark.parametrize("key", ROUTE_FAMILIES)
def test_reconstruction_roundtrip(key):
    K = kd.archimedean_curve(parse_generator(key if key != "pi" else "indep"))
    g = kd.reconstruct_generator(K, 0.5)
    back = kd.kendall_archimedean(g, T)
    assert np.max(np.abs(back - K.values)) <= 1e-3


def test_reconstruction_normalisation_invariance():
    K = kd.archimedean_curve(parse_generator("gumbel:2"))
    S1 = sc.archimedean(kd.reconstruct_generator(K, 0.3))
    S2 = sc.archimedean(kd.reconstruct_generator(K, 0.7))
    u = np.array([0.2, 0.5, 0.8])
    v = np.array([0.6, 0.4, 0.9])
    assert_allclose(S1(u, v), S2(u, v), atol=1e-6)


def test_reconstructed_generator_from_csv_roundtrip():
    K = kd.archimedean_curve(parse_generator("clayton:1"), np.linspace(0.01, 0.99, 99))
    K2 = kd.KendallCurve.from_csv(K.to_csv())
    g = kd.reconstruct_generator(K2, 0.5)
    assert float(g.phi(0.25)) == pytest.approx(3.0, rel=1e-3)


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------


def test_transport_exponential_identity():
    K_C = kd.integral_curve(parse_copula("clayton:2"), T)
    K_B = kd.transported_curve(K_C, uv.exponential(1.0), T)
    assert_allclose(K_B.values, K_C.values, atol=1e-12)


def test_transport_weibull_two_golden():
    K_C = kd.integral_curve(sc.product(), T)
    got = kd.transport_kendall_to_ageing(K_C, uv.weibull(2.0), 0.5)
    assert got == pytest.approx(0.5 + 0.25 * LN2, abs=1e-6)
    # intermediate quantities, evaluated directly
    z = math.exp(-(LN2**2))
    assert z == pytest.approx(0.618503, abs=1e-6)
    assert float(k_pi(z)) == pytest.approx(0.915665, abs=1e-6)
    assert 0.5 / (2 * LN2 * z) == pytest.approx(0.583140, abs=1e-6)


def test_transport_needs_density():
    m = uv.SurvivalModel("plain", "custom", sf=lambda x: np.exp(-x))
    with pytest.raises(MissingDensity):
        kd.transport_kendall_to_ageing(lambda z: z, m, 0.5)


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def test_csv_roundtrip():
    K = kd.archimedean_curve(parse_generator("gumbel:2"))
    text = K.to_csv(["semiage test"])
    assert text.splitlines()[1] == "# provenance: archimedean-closed-form"
    back = kd.KendallCurve.from_csv(text)
    assert back.provenance == K.provenance
    assert_allclose(back.values, K.values, rtol=1e-11)


def test_unknown_provenance_rejected():
    with pytest.raises(ValueError):
        kd.KendallCurve(T, T, "guess")


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------


semi_keys = st.sampled_from(
    ["pi", "m", "w", "clayton:1", "gumbel:2", "frank:-3", "fgm:-1", "arch-gen:cosine", "arch-gen:sqrtlog", "schur:weibull:2"]
)


@settings(max_examples=40, deadline=None)
@given(semi_keys, st.floats(0.02, 0.98))
def test_kendall_at_least_t(key, t):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", kd.KendallPrecisionWarning)
        k = kd.kendall_partition_sup(parse_copula(key), t)
    assert k >= t - 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["pi", "m", "w", "clayton:1", "gumbel:2", "frank:-3", "fgm:-1", "fgm:1"]), st.floats(0.02, 0.98))
def test_quasi_copula_kendall_at_most_one(key, t):
    assert kd.kendall_partition_sup(parse_copula(key), t) <= 1.0 + 1e-6


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0.2, 6.0), t=st.floats(0.05, 0.95))
def test_clayton_integral_matches_closed_form(theta, t):
    S = sc.archimedean(sc.clayton_generator(theta))
    assert kd.kendall_integral(S, t) == pytest.approx(kd.kendall_archimedean(S.generator, t), abs=1e-8)
