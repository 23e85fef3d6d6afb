"""Command-line interface: ``semiage <command> [options]``.

Exit codes: 0 success, 1 a checked property fails, 2 bad input,
3 internal error (route mismatch, model is not a copula, numerical failure).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import __version__, bivmodel, harness, kendall, numkit
from . import semicopula as sc
from . import univariate as uv
from .errors import (
    DegenerateGenerator,
    MissingDensity,
    NotPseudoArchimedean,
    SectionInversionFailure,
    SemiAgeError,
    SpecError,
)
from .registry import parse_copula, parse_marginal

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

PKD_NOTE = (
    "PKD means K(t) <= t - t ln t on the grid and NKD the reverse, so the comonotone "
    "copula M (K(t) = t) is PKD; the opposite inequality is sometimes printed for PKD."
)
ROUTES = ("sup", "closed", "integral", "transport-B")
CONFIG_KEYS = ("copula", "marginal", "grid", "tol", "xmax")


class PropertyFailure(Exception):
    """A requested computation is not applicable to the given model (exit 1)."""


@dataclass(frozen=True)
class ModelSpec:
    """Resolved model configuration: config file values overridden by flags."""

    copula: str | None
    marginal: str | None
    grid: int | None
    tol: float
    xmax: float | None

    def digest(self, command: str, extra: dict | None = None) -> str:
        payload = {"command": command, **self.__dict__, **(extra or {})}
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def load_spec(args: argparse.Namespace) -> ModelSpec:
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise SpecError("config must be a JSON object")
        unknown = sorted(set(cfg) - set(CONFIG_KEYS))
        if unknown:
            raise SpecError(f"unknown config keys {unknown}; valid keys: {', '.join(CONFIG_KEYS)}")

    def pick(name):
        val = getattr(args, name, None)
        return cfg.get(name) if val is None else val

    tol = pick("tol")
    grid = pick("grid")
    xmax = pick("xmax")
    try:
        tol = numkit.VERDICT_TOL if tol is None else float(tol)
        grid = None if grid is None else int(grid)
        xmax = None if xmax is None else float(xmax)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"bad numeric option: {exc}") from None
    if tol <= 0 or (grid is not None and grid < 2) or (xmax is not None and xmax <= 0):
        raise SpecError("need tol > 0, grid >= 2 and xmax > 0")
    return ModelSpec(pick("copula"), pick("marginal"), grid, tol, xmax)


def kendall_grid(spec: ModelSpec) -> np.ndarray:
    """Interior grid i/(n+1); the default n = 19 gives 0.05, ..., 0.95."""
    if spec.grid is None:
        return kendall.default_grid()
    n = spec.grid
    return np.arange(1, n + 1) / (n + 1)


def _need(value, what: str):
    if value is None:
        raise SpecError(f"missing --{what}")
    return value


def _header(spec: ModelSpec, command: str, extra: dict | None = None) -> list[str]:
    return [f"semiage {__version__} spec-sha256={spec.digest(command, extra)} tol={spec.tol:g}"]


def _write_csv(out, header: list[str], columns: list[str], rows) -> None:
    for line in header:
        out.write(f"# {line}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(f"{float(x):.12g}" for x in row) + "\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _statuses(verdicts: dict) -> dict:
    return {k: v.to_dict() for k, v in verdicts.items()}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def marginal_invariants(m: uv.SurvivalModel, x_max: float, tol: float) -> dict[str, numkit.Verdict]:
    """Gbar(0) = 1, values in [0, 1], nonincreasing on [0, x_max]."""
    x = np.linspace(0.0, x_max, 201)
    s = m.survival(x)
    start = numkit.equivalence_verdict(np.array([abs(float(s[0]) - 1.0)]), np.array([0.0]), 1e-12)
    rng = numkit.verdict_from_slack(np.minimum(s, 1.0 - s), x, tol)
    mono = numkit.sequence_verdict(x, s, "decreasing", tol)
    return {"starts-at-one": start, "in-unit-interval": rng, "nonincreasing": mono}


def cmd_validate(args, out) -> int:
    spec = load_spec(args)
    report: dict = {}
    if spec.copula is None and spec.marginal is None:
        raise SpecError("validate needs --copula and/or --marginal")
    verdicts = []
    if spec.copula is not None:
        C = parse_copula(spec.copula)
        grid = None if spec.grid is None else np.linspace(0.0, 1.0, spec.grid)
        checks = sc.validate(C, grid, spec.tol)
        report["copula"] = {"key": spec.copula, **_statuses(checks)}
        verdicts += checks.values()
    if spec.marginal is not None:
        m = parse_marginal(spec.marginal)
        checks = marginal_invariants(m, spec.xmax or m.x_max, spec.tol)
        report["marginal"] = {"key": spec.marginal, **_statuses(checks)}
        verdicts += checks.values()
    ok = all(v.holds for v in verdicts)
    report["valid"] = ok
    out.write(_json(report) + "\n")
    return EXIT_OK if ok else EXIT_PROPERTY


def kendall_curve_for(C: sc.SemiCopula, route: str, grid, marginal: uv.SurvivalModel | None = None):
    """Dispatch to one Kendall route; inapplicable routes raise PropertyFailure."""
    try:
        if route == "sup":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", kendall.KendallPrecisionWarning)
                return kendall.partition_curve(C, grid)
        if route == "closed":
            if C.generator is None:
                raise PropertyFailure(f"closed-form route needs an Archimedean copula; {C.name} is not")
            return kendall.archimedean_curve(C.generator, grid)
        if route == "integral":
            return kendall.integral_curve(C, grid)
        if route == "transport-B":
            if marginal is None:
                raise SpecError("route transport-B needs --marginal")
            K_C = kendall.integral_curve(C, grid)
            return kendall.transported_curve(K_C, marginal, grid)
    except (SectionInversionFailure, DegenerateGenerator, MissingDensity) as exc:
        raise PropertyFailure(f"route {route} not applicable: {exc}") from None
    raise SpecError(f"unknown route {route!r}; valid routes: {', '.join(ROUTES)}")


def cmd_kendall(args, out) -> int:
    spec = load_spec(args)
    C = parse_copula(_need(spec.copula, "copula"))
    m = parse_marginal(spec.marginal) if spec.marginal is not None else None
    curve = kendall_curve_for(C, args.route, kendall_grid(spec), m)
    header = _header(spec, "kendall", {"route": args.route}) + [f"provenance: {curve.provenance}"]
    _write_csv(out, header, ["t", "K"], zip(curve.grid, curve.values))
    return EXIT_OK


def _copula_kendall(C: sc.SemiCopula, grid) -> kendall.KendallCurve:
    ok, _ = sc.sections_strictly_increasing(C, grid)
    if ok:
        return kendall.integral_curve(C, grid)
    if C.generator is not None:
        return kendall.archimedean_curve(C.generator, grid)
    return kendall_curve_for(C, "sup", grid)


def cmd_classify(args, out) -> int:
    spec = load_spec(args)
    C = parse_copula(_need(spec.copula, "copula"))
    m = parse_marginal(_need(spec.marginal, "marginal"))
    tol = spec.tol
    x_max = spec.xmax or m.x_max
    xg = np.linspace(0.0, x_max, 200)
    marg = {}
    marg.update(uv.classify_ifr_dfr(m, xg, tol))
    marg.update(uv.classify_ifra_dfra(m, np.linspace(1e-6, x_max, 200), tol))
    marg.update(uv.classify_nbu_nwu(m, tol=tol))

    grid = kendall_grid(spec)
    K_C = _copula_kendall(C, grid)
    cop = {"PQD": sc.check_pqd(C, tol=tol)["PQD"]}
    cop.update(sc.check_migrativity(C, tol=tol))
    cop["LTD"] = sc.check_ltd_rti(C, tol=tol)["LTD"]
    cop["SI"] = sc.check_si(C, tol=tol)
    cop.update(kendall.classify_pkd_nkd(K_C, tol))

    mdl = bivmodel.BivariateModel(C, m)
    B = bivmodel.ageing_function(mdl)
    if K_C.provenance == "integral-form" and m.has_density:
        K_B = kendall.transported_curve(K_C, m, grid)
    else:
        K_B = kendall_curve_for(B, "sup", grid)
    age = dict(sc.check_migrativity(B, tol=tol))
    age.update(kendall.classify_pkd_nkd(K_B, tol))

    report = {
        "model": mdl.key,
        "tolerance": tol,
        "marginal": _statuses(marg),
        "copula": _statuses(cop),
        "ageing_function": _statuses(age),
        "kendall_routes": {"copula": K_C.provenance, "ageing_function": K_B.provenance},
        "note": PKD_NOTE,
    }
    out.write(_json(report) + "\n")
    return EXIT_OK


def _load_registry(source: str) -> dict:
    if source == "builtin":
        return {}
    try:
        with open(source, encoding="utf-8") as fh:
            reg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read registry {source}: {exc}") from None
    allowed = {"models", "compositions", "generators", "mixtures"}
    if not isinstance(reg, dict) or set(reg) - allowed:
        raise SpecError(f"registry must be a JSON object with keys among {sorted(allowed)}")
    return {
        "models": [tuple(p) for p in reg.get("models", [])],
        "compositions": [tuple(p) for p in reg.get("compositions", [])],
        "generators": list(reg.get("generators", [])),
        "mixtures": list(reg.get("mixtures", [])),
    }


def _summary_line(rec: dict) -> str:
    extra = ""
    if rec["kind"] == "model":
        extra = "triangle-agree" if rec["triangle"]["agree"] else "triangle-DISAGREE"
    return f"{rec['kind']:<12} {rec['model']:<48} violations={rec['violations']} {extra}".rstrip()


def cmd_verify(args, out) -> int:
    spec = load_spec(args)
    reg = _load_registry(args.source)
    if args.fuzz:
        reg = {"models": harness.fuzz_models(args.seed, args.n), "compositions": (), "generators": (), "mixtures": ()}
    total = 0
    count = 0
    sys.stderr.write(f"{'kind':<12} {'model':<48} result\n")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", kendall.KendallPrecisionWarning)
        for rec in harness.run_registry(**reg, tol=spec.tol):
            out.write(harness.dumps(rec) + "\n")
            sys.stderr.write(_summary_line(rec) + "\n")
            total += rec["violations"]
            count += 1
    sys.stderr.write(f"{count} records, {total} violations\n")
    return EXIT_OK if total == 0 else EXIT_PROPERTY


def cmd_reconstruct(args, out) -> int:
    spec = load_spec(args)
    grid = kendall_grid(spec)
    if args.kendall_csv:
        try:
            with open(args.kendall_csv, encoding="utf-8") as fh:
                K = kendall.KendallCurve.from_csv(fh.read())
        except OSError as exc:
            raise SpecError(f"cannot read {args.kendall_csv}: {exc}") from None
    else:
        K = _copula_kendall(parse_copula(_need(spec.copula, "copula or --kendall-csv")), grid)
    t0 = args.t0
    if not 0.0 < t0 < 1.0:
        raise SpecError("--t0 must lie in (0, 1)")
    try:
        g = kendall.reconstruct_generator(K, t0)
    except NotPseudoArchimedean as exc:
        where = f"for t in [{exc.t_range[0]:.6g}, {exc.t_range[1]:.6g}]" if exc.t_range else str(exc)
        raise PropertyFailure(f"not pseudo-Archimedean: s - K(s) vanishes {where}") from None
    phi = np.asarray(g.phi(K.grid), dtype=float)
    err = np.abs(kendall.kendall_archimedean(g, K.grid) - K.values)
    header = _header(spec, "reconstruct", {"t0": t0, "source": args.kendall_csv or spec.copula})
    header.append(f"normalisation: phi({t0:g}) = 1")
    _write_csv(out, header, ["t", "phi", "roundtrip_error"], zip(K.grid, phi, err))
    return EXIT_OK


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SpecError(f"cannot parse {what} {text!r}") from None


def cmd_demo_mixture(args, out) -> int:
    spec = load_spec(args)
    rates = _floats(args.rates, "rates")
    weights = _floats(args.weights, "weights") if args.weights else [1.0 / len(rates)] * len(rates)
    mix = uv.exponential_mixture(rates, weights)
    n = spec.grid or 41
    t = np.linspace(0.0, spec.xmax or 4.0, n)
    rate = uv.predictive_failure_rate(mix, t)
    post = uv.posterior_weights(mix, t)
    cols = ["t", "rate"] + [f"w{j + 1}" for j in range(len(rates))]
    header = _header(spec, "demo-mixture", {"rates": rates, "weights": weights})
    _write_csv(out, header, cols, zip(t, rate, *post))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _model_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--copula", help="copula key, e.g. pi, clayton:1, gumbel:2, schur:weibull:0.5")
    p.add_argument("--marginal", help="marginal key, e.g. exp:1, weibull:2, mixexp:1,5:0.5,0.5")
    p.add_argument("--config", help="JSON file with keys " + ", ".join(CONFIG_KEYS))


def _common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, help="grid size override")
    p.add_argument("--tol", type=float, help=f"verdict tolerance (default {numkit.VERDICT_TOL:g})")
    p.add_argument("--xmax", type=float, help="upper end of lifetime grids")
    p.add_argument("--out", help="write output to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semiage", description="Semi-copula ageing and Kendall dependence checks")
    parser.add_argument("--version", action="version", version=f"semiage {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check copula and marginal invariants")
    _model_options(p)
    _common_options(p)

    p = sub.add_parser("kendall", help="tabulate a Kendall curve as CSV")
    _model_options(p)
    _common_options(p)
    p.add_argument("--route", choices=ROUTES, default="sup")

    p = sub.add_parser("classify", help="JSON report of ageing and dependence verdicts")
    _model_options(p)
    _common_options(p)

    p = sub.add_parser("verify", help="run the implication checks over a registry")
    p.add_argument("source", nargs="?", default="builtin", help="'builtin' or a JSON registry file")
    p.add_argument("--config")
    _common_options(p)
    p.add_argument("--fuzz", action="store_true", help="replace the registry by seeded random models")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=20)

    p = sub.add_parser("reconstruct", help="recover a generator from a Kendall curve")
    _model_options(p)
    _common_options(p)
    p.add_argument("--kendall-csv", help="Kendall curve CSV (t,K) instead of --copula")
    p.add_argument("--t0", type=float, default=0.5, help="normalisation point, phi(t0) = 1")

    p = sub.add_parser("demo-mixture", help="predictive failure rate of an exponential mixture")
    p.add_argument("--rates", required=True, help="comma-separated component rates")
    p.add_argument("--weights", help="comma-separated prior weights (default uniform)")
    p.add_argument("--config")
    _common_options(p)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "kendall": cmd_kendall,
    "classify": cmd_classify,
    "verify": cmd_verify,
    "reconstruct": cmd_reconstruct,
    "demo-mixture": cmd_demo_mixture,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except PropertyFailure as exc:
        sys.stderr.write(f"semiage: {exc}\n")
        return EXIT_PROPERTY
    except (SpecError, ValueError) as exc:
        sys.stderr.write(f"semiage: input error: {exc}\n")
        return EXIT_INPUT
    except SemiAgeError as exc:
        sys.stderr.write(f"semiage: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    finally:
        if out is not sys.stdout:
            out.close()
