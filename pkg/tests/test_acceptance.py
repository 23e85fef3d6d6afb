"""End-to-end acceptance criteria; each test prints one PASS/FAIL line."""
from __future__ import annotations

import math
import time
import warnings

import numpy as np
import pytest

from semiage import bivmodel as bm
from semiage import harness as h
from semiage import kendall as kd
from semiage import semicopula as sc
from semiage import univariate as uv
from semiage.errors import NotPseudoArchimedean
from semiage.registry import parse_copula, parse_generator, parse_marginal, parse_mixture

T = kd.default_grid()
LN2 = math.log(2.0)


@pytest.fixture
def report(capsys):
    """Record (name, ok, detail) and print one summary line on teardown."""
    lines = []

    def record(n: int, title: str, failures: list[str]):
        ok = not failures
        detail = "" if ok else " :: " + "; ".join(failures[:5])
        lines.append(f"criterion {n} [{title}]: {'PASS' if ok else 'FAIL'}{detail}")
        return ok

    yield record
    with capsys.disabled():
        for line in lines:
            print("\n" + line, end="")


def _check(failures: list[str], ok: bool, what: str) -> None:
    if not ok:
        failures.append(what)


def test_criterion_1_kendall_golden_values(report):
    fails: list[str] = []
    sup = {"pi": 0.846574, "m": 0.5, "w": 1.0, "clayton:1": 0.75, "gumbel:2": 0.673287}
    for key, exp in sup.items():
        got = kd.kendall_partition_sup(parse_copula(key), 0.5)
        _check(fails, abs(got - exp) <= 1e-3, f"sup {key}: {got:.6f} vs {exp}")
    closed = {"indep": 0.846574, "clayton:1": 0.75, "gumbel:2": 0.673287, "cosine": 1.136620}
    for key, exp in closed.items():
        got = float(kd.kendall_archimedean(parse_generator(key), 0.5))
        _check(fails, abs(got - exp) <= 1e-6, f"closed {key}: {got:.7f} vs {exp}")
    for key, exp in {"pi": 0.846574, "clayton:1": 0.75, "gumbel:2": 0.673287}.items():
        got = float(kd.kendall_integral(parse_copula(key), 0.5))
        _check(fails, abs(got - exp) <= 1e-6, f"integral {key}: {got:.7f} vs {exp}")
    k01 = float(kd.kendall_archimedean(parse_generator("cosine"), 0.01))
    _check(fails, k01 > 10.0, f"cosine K(0.01) = {k01:.4g} not > 10")
    assert report(1, "Kendall golden values", fails)


def test_criterion_2_route_agreement(report):
    fails: list[str] = []
    start = time.perf_counter()
    for key in ["pi", "clayton:0.5", "clayton:1", "clayton:2", "gumbel:1.5", "gumbel:2"]:
        C = parse_copula(key)
        gen = parse_generator("indep" if key == "pi" else key)
        curves = {
            "sup": kd.partition_curve(C, T).values,
            "closed": kd.archimedean_curve(gen, T).values,
            "integral": kd.integral_curve(C, T).values,
        }
        for a, b in [("sup", "closed"), ("sup", "integral"), ("closed", "integral")]:
            gap = float(np.max(np.abs(curves[a] - curves[b])))
            _check(fails, gap <= 1e-3, f"{key} {a}/{b} gap {gap:.3g}")
    elapsed = time.perf_counter() - start
    _check(fails, elapsed < 30.0, f"runtime {elapsed:.1f}s")
    assert report(2, f"route agreement, {elapsed:.1f}s", fails)


def test_criterion_3_transport_formula(report):
    fails: list[str] = []
    m = uv.weibull(2.0)
    K_C = kd.integral_curve(sc.product(), T)
    K_B = kd.transported_curve(K_C, m, T)
    closed = T - T * np.log(T) / 2
    gap = float(np.max(np.abs(K_B.values - closed)))
    _check(fails, gap <= 1e-6, f"closed-form gap {gap:.3g}")
    B = bm.ageing_function(bm.BivariateModel(sc.product(), m))
    sup_gap = float(np.max(np.abs(kd.partition_curve(B, T).values - K_B.values)))
    _check(fails, sup_gap <= 1e-3, f"partition gap {sup_gap:.3g}")
    k05 = float(kd.transport_kendall_to_ageing(K_C, m, 0.5))
    _check(fails, abs(k05 - 0.673287) <= 1e-6, f"K_B(0.5) = {k05:.7f}")
    assert report(3, "transport formula", fails)


def test_criterion_4_reconstruction_roundtrip(report):
    fails: list[str] = []
    for key in ["indep", "clayton:1"]:
        K = kd.archimedean_curve(parse_generator(key), T)
        g = kd.reconstruct_generator(K, 0.5)
        err = float(np.max(np.abs(kd.kendall_archimedean(g, T) - K.values)))
        _check(fails, err <= 1e-3, f"{key} round-trip error {err:.3g}")
    K_M = kd.partition_curve(sc.minimum(), T)
    try:
        kd.reconstruct_generator(K_M, 0.5)
        fails.append("M did not raise NotPseudoArchimedean")
    except NotPseudoArchimedean:
        pass
    assert report(4, "reconstruction round-trip", fails)


def test_criterion_5_ageing_function_identities(report):
    fails: list[str] = []
    g = np.linspace(0.0, 1.0, 64)
    U, V = np.meshgrid(g, g)
    for key in ["pi", "m", "w", "clayton:2", "gumbel:2", "frank:-3", "fgm:0.5"]:
        C = parse_copula(key)
        gap = float(np.max(np.abs(bm.ageing_function(bm.BivariateModel(C, uv.exponential(1.0)))(U, V) - C(U, V))))
        _check(fails, gap <= 1e-10, f"exponential {key} gap {gap:.3g}")
    for mk in ["exp:1", "weibull:0.5", "pareto:2:1", "mixexp:1,5:0.5,0.5"]:
        mdl = bm.schur_constant_model(parse_marginal(mk))
        gap = float(np.max(np.abs(bm.ageing_function(mdl)(U, V) - U * V)))
        _check(fails, gap <= 1e-6, f"Schur-constant {mk} gap {gap:.3g}")
    B = bm.ageing_function(bm.BivariateModel(sc.product(), uv.weibull(2.0)))
    gap = float(np.max(np.abs(B(U, V) - parse_copula("gumbel:2")(U, V))))
    _check(fails, gap <= 1e-8, f"Weibull-2 vs Gumbel-2 gap {gap:.3g}")
    assert report(5, "ageing-function identities", fails)


def test_criterion_6_triangle_agreement(report):
    fails: list[str] = []
    models = [h.build_model(ck, mk) for ck, mk in h.BUILTIN_MODELS]
    models.append(bm.conditionally_iid_model(parse_mixture("mixexp:1,5:0.5,0.5")))
    for mdl in models:
        rep = bm.equivalence_triangle(mdl)
        _check(fails, rep.agree, f"{mdl.key} disagrees")
    assert report(6, f"triangle agreement on {len(models)} models", fails)


def test_criterion_7_harness_sweep(report):
    fails: list[str] = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", kd.KendallPrecisionWarning)
        records = list(h.run_registry())
    models = [r for r in records if r["kind"] == "model"]
    _check(fails, len(models) >= 20, f"only {len(models)} models")
    for r in records:
        _check(fails, r["violations"] == 0, f"{r['kind']} {r['model']}: {r['violations']} violations")
    demo = h.simpson_demo(parse_mixture("mixexp:1,5:0.5,0.5"))
    _check(fails, all(c["IFR"]["status"] == "Holds" for c in demo["components"]), "component IFR")
    _check(fails, demo["mixture-IFR"]["status"] == "Fails", "mixture IFR does not fail")
    _check(fails, demo["mixture-DFR"]["status"] == "Holds", "mixture DFR does not hold")
    assert report(7, f"harness sweep, {len(records)} records", fails)


# the cosine curve diverges as t -> 0, so its partition sums never settle
@pytest.mark.filterwarnings("ignore::semiage.kendall.KendallPrecisionWarning")
def test_criterion_8_universal_invariants(report):
    fails: list[str] = []
    arch = ["pi", "clayton:0.5", "clayton:1", "clayton:2", "gumbel:1.5", "gumbel:2", "frank:3", "frank:-3"]
    copulas = arch + ["m", "w", "fgm:0.5", "fgm:-0.5", "schur:weibull:0.5", "schur:pareto:2:1"]
    semis = ["arch-gen:cosine", "arch-gen:sqrtlog", "schur:weibull:2"]
    curves = []
    for key in copulas + semis:
        S = parse_copula(key)
        curves.append((key, kd.partition_curve(S, T)))
        if S.generator is not None:
            curves.append((key + " closed", kd.archimedean_curve(S.generator, T)))
    for key in arch:
        curves.append((key + " integral", kd.integral_curve(parse_copula(key), T)))
    for ck, mk in [("pi", "weibull:2"), ("clayton:1", "weibull:0.5"), ("frank:-3", "pareto:2:1")]:
        K_C = kd.integral_curve(parse_copula(ck), T)
        curves.append((f"B[{ck}|{mk}]", kd.transported_curve(K_C, parse_marginal(mk), T)))
    for name, K in curves:
        _check(fails, bool(np.all(K.values >= K.grid - 1e-12)), f"K < t for {name}")
    for key in copulas:
        K = kd.partition_curve(parse_copula(key), T)
        _check(fails, bool(np.all(K.values <= 1.0 + 1e-6)), f"K > 1 for copula {key}")
    objects = [parse_copula(k) for k in copulas + semis]
    objects += [bm.ageing_function(h.build_model(ck, mk)) for ck, mk in h.BUILTIN_MODELS[:12]]
    for S in objects:
        if sc.check_migrativity(S)["PMD"].holds:
            _check(fails, sc.check_pqd(S)["PQD"].holds, f"PMD without PQD for {S.name}")
    for key in arch + ["gumbel:3", "clayton:-0.5"]:
        S = parse_copula(key)
        ltd = sc.check_ltd_rti(S)["LTD"].status
        pmd = sc.check_migrativity(S)["PMD"].status
        _check(fails, ltd is pmd, f"{key}: LTD {ltd.value} vs PMD {pmd.value}")
    assert report(8, "universal invariants", fails)
