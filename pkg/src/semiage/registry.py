"""String keys for model families.

Copulas: ``pi``, ``m``, ``w``, ``clayton:<theta>``, ``gumbel:<theta>``,
``frank:<theta>``, ``fgm:<theta>``, ``arch-gen:<generator>``,
``schur:<marginal>``, ``offset:<eps>:<copula>`` (deliberately broken).

Marginals: ``exp:<rate>``, ``weibull:<shape>[:<scale>]``,
``pareto:<shape>[:<scale>]``, ``mixexp:<r1,r2,...>:<w1,w2,...>``,
``gen-inv:<generator>``.

Generators: ``indep``, ``cosine``, ``sqrtlog``, ``linear``,
``powerlog:<a>``, ``clayton:<theta>``, ``gumbel:<theta>``, ``frank:<theta>``.
"""
from __future__ import annotations

import math

from . import semicopula as sc
from . import univariate as uv
from .errors import SpecError
from .semicopula import Generator, SemiCopula
from .univariate import MixtureModel, SurvivalModel

COPULA_KEYS = (
    "pi",
    "m",
    "w",
    "clayton:<theta>",
    "gumbel:<theta>",
    "frank:<theta>",
    "fgm:<theta>",
    "arch-gen:<generator>",
    "schur:<marginal>",
    "offset:<eps>:<copula>",
)
MARGINAL_KEYS = (
    "exp:<rate>",
    "weibull:<shape>[:<scale>]",
    "pareto:<shape>[:<scale>]",
    "mixexp:<r1,r2,...>:<w1,w2,...>",
    "gen-inv:<generator>",
)
GENERATOR_KEYS = (
    "indep",
    "cosine",
    "sqrtlog",
    "linear",
    "powerlog:<a>",
    "clayton:<theta>",
    "gumbel:<theta>",
    "frank:<theta>",
)


def _num(text: str, what: str) -> float:
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise SpecError(f"cannot parse {what} {text!r} as a number") from None
    if not math.isfinite(x):
        raise SpecError(f"{what} must be finite, got {text!r}")
    return x


def _nums(text: str, what: str) -> list[float]:
    return [_num(p, what) for p in text.split(",") if p.strip() != ""]


def _unknown(kind: str, key: str, valid) -> SpecError:
    return SpecError(f"unknown {kind} key {key!r}; valid keys: {', '.join(valid)}")


def parse_generator(key: str) -> Generator:
    name, _, arg = key.partition(":")
    if name in ("indep", "cosine", "sqrtlog", "linear"):
        if arg:
            raise _unknown("generator", key, GENERATOR_KEYS)
        return sc.NAMED_GENERATORS[name]()
    if name in ("powerlog", "clayton", "gumbel", "frank"):
        if not arg:
            raise SpecError(f"generator {name!r} needs a parameter, e.g. {name}:2")
        return sc.NAMED_GENERATORS[name](_num(arg, f"{name} parameter"))
    raise _unknown("generator", key, GENERATOR_KEYS)


def parse_marginal(key: str) -> SurvivalModel:
    key = key.strip()
    name, _, rest = key.partition(":")
    if name == "exp":
        return uv.exponential(_num(rest, "exponential rate") if rest else 1.0)
    if name in ("weibull", "pareto"):
        parts = rest.split(":") if rest else []
        if not 1 <= len(parts) <= 2:
            raise SpecError(f"{name} needs <shape>[:<scale>], got {key!r}")
        shape = _num(parts[0], f"{name} shape")
        scale = _num(parts[1], f"{name} scale") if len(parts) == 2 else 1.0
        return (uv.weibull if name == "weibull" else uv.pareto)(shape, scale)
    if name == "mixexp":
        return parse_mixture(key).as_model()
    if name == "gen-inv":
        return uv.from_generator(parse_generator(rest))
    raise _unknown("marginal", key, MARGINAL_KEYS)


def parse_mixture(key: str) -> MixtureModel:
    name, _, rest = key.strip().partition(":")
    if name != "mixexp":
        raise _unknown("mixture", key, ("mixexp:<r1,r2,...>:<w1,w2,...>",))
    rates_s, _, weights_s = rest.partition(":")
    rates = _nums(rates_s, "mixture rate")
    weights = _nums(weights_s, "mixture weight") if weights_s else [1.0 / len(rates)] * len(rates)
    return uv.exponential_mixture(rates, weights)


def parse_copula(key: str) -> SemiCopula:
    key = key.strip()
    name, _, rest = key.partition(":")
    if name == "pi" and not rest:
        return sc.product()
    if name == "m" and not rest:
        return sc.minimum()
    if name == "w" and not rest:
        return sc.lower_bound()
    if name in ("clayton", "gumbel", "frank"):
        return sc.archimedean(parse_generator(key), name=key)
    if name == "fgm":
        return sc.fgm(_num(rest, "fgm parameter"))
    if name == "arch-gen":
        return sc.archimedean(parse_generator(rest), name=key)
    if name == "schur":
        return sc.schur_constant_semicopula(parse_marginal(rest))
    if name == "offset":
        eps_s, _, base = rest.partition(":")
        return sc.offset(parse_copula(base), _num(eps_s, "offset"))
    raise _unknown("copula", key, COPULA_KEYS)
