"""Numerical verification of dependence/ageing implications over model registries.

Each implication is a material conditional over grid verdicts: premises
that do not Hold make the case vacuous; a conclusion that Fails while all
premises Hold is a VIOLATION carrying a reproducible witness.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import bivmodel, kendall, numkit
from . import semicopula as sc
from . import univariate as uv
from .errors import NotACopula, NotPseudoArchimedean, RouteMismatch
from .numkit import Status, Verdict
from .registry import parse_copula, parse_generator, parse_marginal, parse_mixture
from .semicopula import Generator
from .univariate import MixtureModel, SurvivalModel

ROUTE_TOL = 1e-3
SELECTORS = ("C", "G", "B", "H1", "H2")
PROPERTIES = ("IFR", "DFR", "IFRA", "DFRA", "PMD", "NMD", "PKD", "NKD")


@dataclass(frozen=True)
class ImplicationCase:
    """``premises`` => ``conclusion``; each item is (selector, property)."""

    label: str
    premises: tuple[tuple[str, str], ...]
    conclusion: tuple[str, str]
    source: str

    def __post_init__(self):
        for sel, prop in self.premises + (self.conclusion,):
            if sel not in SELECTORS or prop not in PROPERTIES:
                raise ValueError(f"unknown selector/property {(sel, prop)}")


def _cases(source: str, table) -> tuple[ImplicationCase, ...]:
    return tuple(ImplicationCase(label, tuple(prem), concl, source) for label, prem, concl in table)


def _ageing_table(up: str, down: str, pos: str, neg: str):
    return [
        ("i", [("G", up), ("C", pos)], ("B", pos)),
        ("ii", [("G", down), ("C", neg)], ("B", neg)),
        ("iii", [("B", pos), ("G", down)], ("C", pos)),
        ("iv", [("B", neg), ("G", up)], ("C", neg)),
        ("v", [("C", pos), ("B", neg)], ("G", down)),
        ("vi", [("C", neg), ("B", pos)], ("G", up)),
    ]


MIGRATIVITY_CASES = _cases("migrativity", _ageing_table("IFR", "DFR", "PMD", "NMD"))
KENDALL_CASES = _cases("kendall", _ageing_table("IFRA", "DFRA", "PKD", "NKD"))
COMPOSITION_CASES = _cases(
    "composition",
    [
        ("i", [("G", "IFRA"), ("H1", "DFRA")], ("H2", "DFRA")),
        ("ii", [("G", "DFRA"), ("H1", "IFRA")], ("H2", "IFRA")),
        ("iii", [("H2", "DFRA"), ("G", "DFRA")], ("H1", "DFRA")),
        ("iv", [("H2", "IFRA"), ("G", "IFRA")], ("H1", "IFRA")),
        ("v", [("H1", "DFRA"), ("H2", "IFRA")], ("G", "DFRA")),
        ("vi", [("H1", "IFRA"), ("H2", "DFRA")], ("G", "IFRA")),
    ],
)


@dataclass
class VerificationReport:
    """Verdicts per object, outcome per implication, and tolerances used."""

    model: str
    check: str
    verdicts: dict = field(default_factory=dict)
    outcomes: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def violations(self) -> list:
        return [o for o in self.outcomes if o["outcome"] in ("VIOLATION", "DISAGREE")]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "check": self.check,
            "verdicts": {
                sel: {prop: v.to_dict() for prop, v in props.items()} for sel, props in self.verdicts.items()
            },
            "outcomes": self.outcomes,
            "tolerances": self.tolerances,
            "notes": self.notes,
        }


def evaluate_case(case: ImplicationCase, verdicts: dict, model: str) -> dict:
    """Outcome of one implication: vacuous, confirmed or VIOLATION."""
    prem = [verdicts[s][p] for s, p in case.premises]
    out = {"case": f"{case.source}:{case.label}", "outcome": "vacuous"}
    if all(v.status is Status.HOLDS for v in prem):
        concl = verdicts[case.conclusion[0]][case.conclusion[1]]
        if concl.status is Status.FAILS:
            out["outcome"] = "VIOLATION"
            out["witness"] = {"model": model, "point": list(concl.witness or ()), "margin": concl.margin}
        else:
            out["outcome"] = "confirmed"
    return out


def _evaluate_all(report: VerificationReport, cases) -> VerificationReport:
    report.outcomes = [evaluate_case(c, report.verdicts, report.model) for c in cases]
    return report


# ---------------------------------------------------------------------------
# per-model checks
# ---------------------------------------------------------------------------


def require_copula(mdl: bivmodel.BivariateModel) -> None:
    """Refuse to verify models whose survival copula is not a copula."""
    checks = sc.validate(mdl.copula)
    bad = [k for k, v in checks.items() if v.fails]
    if bad:
        k = bad[0]
        raise NotACopula(
            f"survival copula {mdl.copula.name} fails {', '.join(bad)} (witness {checks[k].witness}, margin {checks[k].margin:.3g})"
        )


def verify_migrativity_implications(mdl: bivmodel.BivariateModel, tol: float = numkit.VERDICT_TOL) -> VerificationReport:
    """Migrativity implications among (C^, Gbar, B)."""
    rep = VerificationReport(mdl.key, "migrativity", tolerances={"verdict": tol})
    B = bivmodel.ageing_function(mdl)
    rep.verdicts = {
        "G": uv.classify_ifr_dfr(mdl.marginal, tol=tol),
        "C": sc.check_migrativity(mdl.copula, tol=tol),
        "B": sc.check_migrativity(B, tol=tol),
    }
    return _evaluate_all(rep, MIGRATIVITY_CASES)


def _sections_ok(C) -> tuple[bool, float | None]:
    return sc.sections_strictly_increasing(C, numkit.interior_grid(15))


def verify_kendall_implications(
    mdl: bivmodel.BivariateModel, grid=None, tol: float = numkit.VERDICT_TOL, route_tol: float = ROUTE_TOL
) -> VerificationReport:
    """Kendall implications among (C^, Gbar, B).

    K of C^ comes from the integral route, K of B from transporting it
    through gamma; the transported curve is cross-checked against partition
    sums of B before any implication is evaluated.
    """
    grid = kendall.default_grid() if grid is None else np.asarray(grid, dtype=float)
    rep = VerificationReport(mdl.key, "kendall", tolerances={"verdict": tol, "route": route_tol})
    ok, u_bad = _sections_ok(mdl.copula)
    if not ok or not mdl.marginal.has_density:
        why = f"section not strictly increasing at u={u_bad:.4g}" if not ok else "marginal has no density"
        rep.notes["precondition"] = f"failed: {why}"
        rep.outcomes = [{"case": f"kendall:{c.label}", "outcome": "vacuous"} for c in KENDALL_CASES]
        return rep
    rep.notes["precondition"] = "ok"
    C = mdl.copula
    K_C = kendall.integral_curve(C, grid)
    K_B = kendall.transported_curve(K_C, mdl.marginal, grid)
    B = bivmodel.ageing_function(mdl)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", kendall.KendallPrecisionWarning)
        K_sup = kendall.partition_curve(B, grid)
    unconverged = sum(issubclass(w.category, kendall.KendallPrecisionWarning) for w in caught)
    if unconverged:
        rep.notes["partition_unconverged"] = unconverged
    gap = float(np.max(np.abs(K_sup.values - K_B.values)))
    rep.notes["route_gap"] = float(f"{gap:.6g}")
    if gap > route_tol:
        raise RouteMismatch(f"{mdl.key}: transported and partition-sup Kendall curves of B differ by {gap:.3g}")
    rep.verdicts = {
        "G": uv.classify_ifra_dfra(mdl.marginal, tol=tol),
        "C": kendall.classify_pkd_nkd(K_C, tol),
        "B": kendall.classify_pkd_nkd(K_B, tol),
    }
    rep.notes["generator_smoothness"] = _generator_smoothness(K_C, C)
    return _evaluate_all(rep, KENDALL_CASES)


def _generator_smoothness(K_C: kendall.KendallCurve, C) -> str | float:
    """Largest relative gap between a finite-difference phi' and phi/(t - K).

    Only recorded; differentiability of the pseudo-generator is not
    something a grid check can certify.
    """
    curve = K_C
    if C.generator is not None:
        curve = kendall.archimedean_curve(C.generator, K_C.grid)
    try:
        phi = kendall.reconstruct_generator(curve, 0.5)
    except NotPseudoArchimedean as exc:
        return f"not pseudo-Archimedean ({exc})"
    ts = np.array([0.25, 0.5, 0.75])
    fd = np.asarray(phi.derivative(ts))
    exact = np.asarray(phi.phi(ts)) / (ts - curve(ts))
    return float(f"{float(np.max(np.abs(fd / exact - 1.0))):.3g}")


def verify_composition_implications(h1: SurvivalModel, h2: SurvivalModel, tol: float = numkit.VERDICT_TOL) -> VerificationReport:
    """IFRA/DFRA implications for Gbar = H1bar o H2bar^{-1} o exp(-.)."""
    G = uv.composed(h1, h2)
    rep = VerificationReport(f"{h1.key}|{h2.key}", "composition", tolerances={"verdict": tol})
    grid = np.linspace(1e-3, 8.0, 200)
    rep.verdicts = {
        "G": uv.classify_ifra_dfra(G, grid, tol),
        "H1": uv.classify_ifra_dfra(h1, grid, tol),
        "H2": uv.classify_ifra_dfra(h2, grid, tol),
    }
    return _evaluate_all(rep, COMPOSITION_CASES)


def _biconditional(name: str, left: Verdict, right: Verdict) -> dict:
    statuses = {left.status, right.status}
    if Status.INCONCLUSIVE in statuses:
        outcome = "indeterminate"
    elif len(statuses) == 1:
        outcome = "agree"
    else:
        outcome = "DISAGREE"
    return {"case": name, "outcome": outcome, "left": left.status.value, "right": right.status.value}


def log_density_convexity(g: Generator, x_max: float, tol: float = numkit.VERDICT_TOL) -> Verdict:
    """Convexity of x -> log f(x), f the density of phi^{-1}."""
    xs = np.linspace(1e-3 * x_max, x_max, 200)
    with np.errstate(all="ignore"):
        return numkit.convexity_verdict(lambda x: np.log(g.inverse_density(x)), xs, "convex", tol)


def verify_generator_equivalences(g: Generator, tol: float = numkit.VERDICT_TOL) -> VerificationReport:
    """Dependence of C_phi versus ageing of the survival function phi^{-1}.

    PQD/NWU, PKD/DFRA, LTD/DFR and SI/log-convex density, each with its
    negative counterpart where one exists.
    """
    C = sc.archimedean(g)
    H = uv.from_generator(g)
    rep = VerificationReport(f"arch-gen:{g.name}", "generator-ageing", tolerances={"verdict": tol})
    pqd = sc.check_pqd(C, tol=tol)
    pkd = kendall.classify_pkd_nkd(kendall.archimedean_curve(g), tol)
    ltd = sc.check_ltd_rti(C, tol=tol)
    si = sc.check_si(C, tol=tol)
    nbu = uv.classify_nbu_nwu(H, tol=tol)
    ifra = uv.classify_ifra_dfra(H, tol=tol)
    ifr = uv.classify_ifr_dfr(H, tol=tol)
    logc = log_density_convexity(g, H.x_max, tol)
    rep.verdicts = {
        "C": {"PQD": pqd["PQD"], "NQD": pqd["NQD"], "PKD": pkd["PKD"], "NKD": pkd["NKD"],
              "LTD": ltd["LTD"], "LTI": ltd["LTI"], "SI": si},
        "H": {"NWU": nbu["NWU"], "NBU": nbu["NBU"], "DFRA": ifra["DFRA"], "IFRA": ifra["IFRA"],
              "DFR": ifr["DFR"], "IFR": ifr["IFR"], "log-density-convex": logc},
    }
    rep.outcomes = [
        _biconditional("PQD<=>NWU", pqd["PQD"], nbu["NWU"]),
        _biconditional("NQD<=>NBU", pqd["NQD"], nbu["NBU"]),
        _biconditional("PKD<=>DFRA", pkd["PKD"], ifra["DFRA"]),
        _biconditional("NKD<=>IFRA", pkd["NKD"], ifra["IFRA"]),
        _biconditional("LTD<=>DFR", ltd["LTD"], ifr["DFR"]),
        _biconditional("LTI<=>IFR", ltd["LTI"], ifr["IFR"]),
        _biconditional("SI<=>log-density-convex", si, logc),
    ]
    return rep


def simpson_demo(mix: MixtureModel, grid=None, tol: float = numkit.VERDICT_TOL) -> dict:
    """Components that are each IFR while their mixture is not.

    Conditionally on the component, two lifetimes are i.i.d. and satisfy the
    bivariate IFR inequality; the marginal of the mixture is DFR.
    """
    model = mix.as_model()
    g = np.linspace(0.0, model.x_max, 200) if grid is None else np.asarray(grid, dtype=float)
    comps = []
    for c in mix.components:
        cond = bivmodel.biv_ifr_check(bivmodel.BivariateModel(sc.product(), c), tol=tol)
        comps.append(
            {
                "component": c.key,
                "IFR": uv.classify_ifr_dfr(c, g, tol)["IFR"].to_dict(),
                "conditional-bivIFR": cond["bivIFR"].to_dict(),
            }
        )
    marg = uv.classify_ifr_dfr(model, g, tol)
    joint = bivmodel.biv_ifr_check(bivmodel.conditionally_iid_model(mix), tol=tol)
    return {
        "mixture": mix.key,
        "components": comps,
        "mixture-IFR": marg["IFR"].to_dict(),
        "mixture-DFR": marg["DFR"].to_dict(),
        "joint-bivIFR": joint["bivIFR"].to_dict(),
        "joint-bivDFR": joint["bivDFR"].to_dict(),
    }


# ---------------------------------------------------------------------------
# registry sweeps
# ---------------------------------------------------------------------------

BUILTIN_MODELS: tuple[tuple[str, str], ...] = (
    ("pi", "exp:1"),
    ("pi", "exp:2"),
    ("pi", "weibull:2"),
    ("pi", "weibull:0.5"),
    ("pi", "weibull:1.5"),
    ("pi", "pareto:2:1"),
    ("pi", "mixexp:1,5:0.5,0.5"),
    ("m", "exp:1"),
    ("m", "weibull:2"),
    ("w", "exp:1"),
    ("w", "weibull:0.5"),
    ("clayton:0.5", "weibull:0.5"),
    ("clayton:1", "exp:1"),
    ("clayton:1", "weibull:2"),
    ("clayton:2", "mixexp:1,5:0.5,0.5"),
    ("gumbel:1.5", "weibull:1.5"),
    ("gumbel:2", "exp:1"),
    ("gumbel:2", "pareto:2:1"),
    ("frank:3", "weibull:2"),
    ("frank:-3", "exp:1"),
    ("frank:-3", "weibull:0.5"),
    ("fgm:0.5", "weibull:2"),
    ("fgm:-0.5", "mixexp:1,5:0.5,0.5"),
    ("schur:exp:1", "exp:1"),
    ("schur:weibull:0.5", "weibull:0.5"),
    ("schur:pareto:2:1", "pareto:2:1"),
    ("schur:mixexp:1,5:0.5,0.5", "mixexp:1,5:0.5,0.5"),
)

BUILTIN_COMPOSITIONS: tuple[tuple[str, str], ...] = (
    ("exp:1", "exp:1"),
    ("weibull:2", "weibull:2"),
    ("weibull:0.5", "weibull:2"),
    ("weibull:2", "weibull:0.5"),
    ("weibull:1.5", "pareto:2:1"),
    ("pareto:2:1", "weibull:1.5"),
    ("gen-inv:clayton:1", "gen-inv:gumbel:2"),
    ("mixexp:1,5:0.5,0.5", "weibull:2"),
)

BUILTIN_GENERATORS: tuple[str, ...] = (
    "indep",
    "clayton:0.5",
    "clayton:1",
    "clayton:2",
    "gumbel:1.5",
    "gumbel:2",
    "frank:3",
    "frank:-3",
    "sqrtlog",
    "powerlog:3",
)

BUILTIN_MIXTURES: tuple[str, ...] = ("mixexp:1,5:0.5,0.5", "mixexp:1,5:0.9,0.1")


def build_model(copula_key: str, marginal_key: str) -> bivmodel.BivariateModel:
    return bivmodel.BivariateModel(parse_copula(copula_key), parse_marginal(marginal_key))


def verify_model(copula_key: str, marginal_key: str, tol: float = numkit.VERDICT_TOL) -> dict:
    """All per-model checks; one JSON-lines record."""
    mdl = build_model(copula_key, marginal_key)
    require_copula(mdl)
    mig = verify_migrativity_implications(mdl, tol)
    kend = verify_kendall_implications(mdl, tol=tol)
    tri = bivmodel.equivalence_triangle(mdl, tol=tol)
    violations = len(mig.violations) + len(kend.violations) + (0 if tri.agree else 1)
    return {
        "kind": "model",
        "model": mdl.key,
        "migrativity": mig.to_dict(),
        "kendall": kend.to_dict(),
        "triangle": tri.to_dict(),
        "violations": violations,
    }


def fuzz_models(seed: int, n: int) -> list[tuple[str, str]]:
    """Seeded random (copula, marginal) keys; Weibull shapes in [0.3, 3]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        fam = rng.choice(["clayton", "gumbel", "frank", "fgm", "pi"])
        if fam == "clayton":
            ck = f"clayton:{rng.uniform(0.2, 5.0):.4g}"
        elif fam == "gumbel":
            ck = f"gumbel:{rng.uniform(1.0, 4.0):.4g}"
        elif fam == "frank":
            th = rng.uniform(0.5, 8.0) * rng.choice([-1.0, 1.0])
            ck = f"frank:{th:.4g}"
        elif fam == "fgm":
            ck = f"fgm:{rng.uniform(-1.0, 1.0):.4g}"
        else:
            ck = "pi"
        out.append((ck, f"weibull:{rng.uniform(0.3, 3.0):.4g}"))
    return out


def run_registry(
    models=BUILTIN_MODELS,
    compositions=BUILTIN_COMPOSITIONS,
    generators=BUILTIN_GENERATORS,
    mixtures=BUILTIN_MIXTURES,
    tol: float = numkit.VERDICT_TOL,
):
    """Yield one JSON-serialisable record per model, in a fixed order."""
    for ck, mk in models:
        yield verify_model(ck, mk, tol)
    for k1, k2 in compositions:
        rep = verify_composition_implications(parse_marginal(k1), parse_marginal(k2), tol)
        yield {"kind": "composition", "model": rep.model, "report": rep.to_dict(), "violations": len(rep.violations)}
    for gk in generators:
        rep = verify_generator_equivalences(parse_generator(gk), tol)
        yield {"kind": "generator", "model": rep.model, "report": rep.to_dict(), "violations": len(rep.violations)}
    for mk in mixtures:
        demo = simpson_demo(parse_mixture(mk), tol=tol)
        yield {"kind": "mixture", "model": mk, "report": demo, "violations": 0}


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=False, separators=(",", ":"))


__all__ = [
    "ImplicationCase",
    "VerificationReport",
    "verify_migrativity_implications",
    "verify_kendall_implications",
    "verify_composition_implications",
    "verify_generator_equivalences",
    "simpson_demo",
    "run_registry",
    "verify_model",
    "fuzz_models",
]
