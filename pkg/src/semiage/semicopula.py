"""Semi-copulas, Archimedean generators and grid dependence checks.

A semi-copula is any S on [0,1]^2 with uniform margins (S(u,1)=u,
S(1,v)=v) that is nondecreasing in each argument.  Copulas additionally
are 2-increasing.  All dependence properties are certified on explicit
grids and returned as :class:`~semiage.numkit.Verdict` objects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numkit
from .errors import InvalidGenerator, SpecError
from .numkit import Verdict, interior_grid
from .univariate import SurvivalModel

BOUNDARY_TOL = 1e-12
TWO_INCREASING_TOL = 1e-10


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Generator:
    """Decreasing phi on (0,1] with phi(1)=0.

    ``phi_inv`` is the pseudo-inverse: it returns 0 for arguments at or
    beyond ``phi_zero`` = phi(0+), so generators with a finite value at 0
    are allowed.  ``convex`` is one of ``"yes"``, ``"no"``, ``"unchecked"``.
    """

    name: str
    phi: Callable
    phi_inv: Callable
    phi_prime: Callable | None = None
    convex: str = "unchecked"
    phi_zero: float = math.inf

    def __call__(self, t):
        return self.phi(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            if self.phi_prime is not None:
                return self.phi_prime(t)
            return numkit.central_difference(self.phi, t, h=1e-6, domain=(0.0, 1.0))

    def inverse_density(self, x):
        """Density of the survival function phi^{-1}: -1/phi'(phi^{-1}(x))."""
        t = self.phi_inv(np.asarray(x, dtype=float))
        with np.errstate(all="ignore"):
            return np.where(t > 0, -1.0 / self.derivative(t), 0.0)


def check_generator(g: Generator, n: int = 64, tol: float = 1e-8) -> dict[str, Verdict]:
    """Grid checks: strict decrease of phi and phi(phi_inv(x)) = x."""
    t = interior_grid(n)
    with np.errstate(all="ignore"):
        phi_t = np.asarray(g.phi(t), dtype=float)
    drop = phi_t[:-1] - phi_t[1:]
    k = int(np.argmin(drop))
    if drop[k] > 0:
        decreasing = Verdict(numkit.Status.HOLDS, float(drop[k]), 0.0, checked=drop.size)
    else:
        decreasing = Verdict(numkit.Status.FAILS, float(drop[k]), 0.0, (float(t[k]), float(t[k + 1])), drop.size)
    x = phi_t[np.isfinite(phi_t)]
    with np.errstate(all="ignore"):
        roundtrip = np.abs(np.asarray(g.phi(g.phi_inv(x)), dtype=float) - x)
    inverse = numkit.equivalence_verdict(roundtrip, x, tol)
    return {"decreasing": decreasing, "inverse": inverse}


def indep_generator() -> Generator:
    return Generator(
        "indep",
        phi=lambda t: -np.log(t),
        phi_inv=lambda x: np.exp(-np.asarray(x, dtype=float)),
        phi_prime=lambda t: -1.0 / np.asarray(t, dtype=float),
        convex="yes",
    )


def clayton_generator(theta: float) -> Generator:
    th = float(theta)
    if th == 0 or th < -1:
        raise SpecError(f"clayton parameter must lie in [-1, 0) or (0, inf), got {theta}")

    def phi_inv(x):
        base = np.maximum(1.0 + th * np.asarray(x, dtype=float), 0.0)
        return base ** (-1.0 / th)

    return Generator(
        f"clayton:{th:g}",
        phi=lambda t: (np.asarray(t, dtype=float) ** (-th) - 1.0) / th,
        phi_inv=phi_inv,
        phi_prime=lambda t: -(np.asarray(t, dtype=float) ** (-th - 1.0)),
        convex="yes",
        phi_zero=math.inf if th > 0 else -1.0 / th,
    )


def powerlog_generator(a: float, name: str | None = None) -> Generator:
    """phi(t) = (-ln t)^a; convex exactly when a >= 1."""
    a = float(a)
    if not a > 0:
        raise SpecError(f"powerlog exponent must be positive, got {a}")

    def phi_prime(t):
        t = np.asarray(t, dtype=float)
        return -a * (-np.log(t)) ** (a - 1.0) / t

    return Generator(
        name or f"powerlog:{a:g}",
        phi=lambda t: (-np.log(t)) ** a,
        phi_inv=lambda x: np.exp(-(np.asarray(x, dtype=float) ** (1.0 / a))),
        phi_prime=phi_prime,
        convex="yes" if a >= 1 else "no",
    )


def gumbel_generator(theta: float) -> Generator:
    th = float(theta)
    if th < 1:
        raise SpecError(f"gumbel parameter must be >= 1, got {theta}")
    return powerlog_generator(th, name=f"gumbel:{th:g}")


def frank_generator(theta: float) -> Generator:
    th = float(theta)
    if th == 0:
        raise SpecError("frank parameter must be nonzero")
    c = math.expm1(-th)

    def phi(t):
        return -np.log(np.expm1(-th * np.asarray(t, dtype=float)) / c)

    def phi_inv(x):
        return -np.log1p(np.exp(-np.asarray(x, dtype=float)) * c) / th

    def phi_prime(t):
        t = np.asarray(t, dtype=float)
        return th * np.exp(-th * t) / np.expm1(-th * t)

    return Generator(f"frank:{th:g}", phi, phi_inv, phi_prime, convex="yes")


def cosine_generator() -> Generator:
    """phi(t) = cos(pi t / 2): concave, with the finite value phi(0) = 1."""

    def phi_inv(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 1.0, 0.0, (2.0 / np.pi) * np.arccos(np.clip(x, 0.0, 1.0)))

    return Generator(
        "cosine",
        phi=lambda t: np.cos(np.pi * np.asarray(t, dtype=float) / 2.0),
        phi_inv=phi_inv,
        phi_prime=lambda t: -(np.pi / 2.0) * np.sin(np.pi * np.asarray(t, dtype=float) / 2.0),
        convex="no",
        phi_zero=1.0,
    )


def linear_generator() -> Generator:
    """phi(t) = 1 - t, whose Archimedean copula is the lower bound W."""
    return Generator(
        "linear",
        phi=lambda t: 1.0 - np.asarray(t, dtype=float),
        phi_inv=lambda x: np.maximum(1.0 - np.asarray(x, dtype=float), 0.0),
        phi_prime=lambda t: -np.ones_like(np.asarray(t, dtype=float)),
        convex="yes",
        phi_zero=1.0,
    )


def survival_generator(m: SurvivalModel, convex: str | None = None) -> Generator:
    """phi = Gbar^{-1}, so that phi^{-1} = Gbar."""
    if convex is None:
        convex = "no" if survival_convexity(m).fails else "yes"

    def phi_prime(t):
        x = m.inverse(np.asarray(t, dtype=float))
        with np.errstate(all="ignore"):
            return -1.0 / m.density(x)

    return Generator(f"inv:{m.key}", phi=m.inverse, phi_inv=m.survival, phi_prime=phi_prime, convex=convex)


def survival_convexity(m: SurvivalModel, n: int = 400, tol: float = numkit.VERDICT_TOL) -> Verdict:
    """Convexity of Gbar on [0, x_max]."""
    return numkit.convexity_verdict(m.survival, np.linspace(0.0, m.x_max, n), "convex", tol)


NAMED_GENERATORS: dict[str, Callable[..., Generator]] = {
    "indep": indep_generator,
    "cosine": cosine_generator,
    "sqrtlog": lambda: powerlog_generator(0.5, name="sqrtlog"),
    "linear": linear_generator,
    "powerlog": powerlog_generator,
    "clayton": clayton_generator,
    "gumbel": gumbel_generator,
    "frank": frank_generator,
}


# ---------------------------------------------------------------------------
# semi-copulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SemiCopula:
    """A bivariate function on [0,1]^2 claimed to be a semi-copula.

    ``kind`` records the claim (``copula``, ``quasi-copula`` or
    ``semi-copula``); :func:`validate` checks it.  ``partial_u(u, v)`` and
    ``section_inv(u, t)`` are optional closed forms for dS/du and for
    ``sup{v : S(u, v) <= t}``.
    """

    name: str
    func: Callable
    kind: str = "semi-copula"
    generator: Generator | None = None
    partial_u: Callable | None = None
    section_inv: Callable | None = None

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        with np.errstate(all="ignore"):
            return np.asarray(self.func(u, v), dtype=float)

    @property
    def is_archimedean(self) -> bool:
        return self.generator is not None

    def dU(self, u, v, h: float = 1e-6):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if self.partial_u is not None:
            with np.errstate(all="ignore"):
                return np.asarray(self.partial_u(u, v), dtype=float)
        lo = np.maximum(u - h, 0.0)
        hi = np.minimum(u + h, 1.0)
        return (self(hi, v) - self(lo, v)) / (hi - lo)

    def section_inverse(self, u, t):
        """sup{v in [0,1] : S(u, v) <= t}, with sup(empty) = 0."""
        u, t = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(t, dtype=float))
        if self.section_inv is not None:
            with np.errstate(all="ignore"):
                return np.asarray(self.section_inv(u, t), dtype=float)
        return numkit.monotone_inverse_array(lambda v: self(u, v), t, 0.0, 1.0, increasing=True)


def product() -> SemiCopula:
    return SemiCopula(
        "pi",
        lambda u, v: u * v,
        kind="copula",
        generator=indep_generator(),
        partial_u=lambda u, v: np.broadcast_to(v, np.broadcast(u, v).shape).astype(float),
        section_inv=lambda u, t: np.where(u > t, t / np.where(u > 0, u, 1.0), 1.0),
    )


def minimum() -> SemiCopula:
    return SemiCopula(
        "m",
        np.minimum,
        kind="copula",
        partial_u=lambda u, v: (u < v).astype(float),
        section_inv=lambda u, t: np.where(u > t, t, 1.0),
    )


def lower_bound() -> SemiCopula:
    return SemiCopula(
        "w",
        lambda u, v: np.maximum(u + v - 1.0, 0.0),
        kind="copula",
        partial_u=lambda u, v: (u + v > 1.0).astype(float),
        section_inv=lambda u, t: np.minimum(1.0, t + 1.0 - u),
    )


def fgm(theta: float) -> SemiCopula:
    th = float(theta)
    if not -1.0 <= th <= 1.0:
        raise SpecError(f"fgm parameter must lie in [-1, 1], got {theta}")
    def section_inv(u, t):
        # root in [0, 1] of -th*u*(1-u) v^2 + u*(1 + th*(1-u)) v - t
        a = -th * u * (1.0 - u)
        b = u * (1.0 + th * (1.0 - u))
        disc = np.sqrt(np.maximum(b * b + 4.0 * a * t, 0.0))
        v = 2.0 * t / np.where(b + disc > 0, b + disc, 1.0)
        return np.where(u > t, np.clip(v, 0.0, 1.0), 1.0)

    return SemiCopula(
        f"fgm:{th:g}",
        lambda u, v: u * v * (1.0 + th * (1.0 - u) * (1.0 - v)),
        kind="copula",
        partial_u=lambda u, v: v * (1.0 + th * (1.0 - v) * (1.0 - 2.0 * u)),
        section_inv=section_inv,
    )


def archimedean(g: Generator, name: str | None = None) -> SemiCopula:
    """S(u,v) = phi^{-1}(phi(u) + phi(v)); a copula when phi is convex."""
    verdicts = check_generator(g)
    if verdicts["decreasing"].fails:
        raise InvalidGenerator(f"generator {g.name} is not strictly decreasing near {verdicts['decreasing'].witness}")
    phi, phi_inv = g.phi, g.phi_inv

    def func(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        out = phi_inv(phi(u) + phi(v))
        # phi(1) = 0 makes the upper boundary exact; phi_inv o phi need not be
        return np.where(v >= 1.0, u, np.where(u >= 1.0, v, out))

    def partial_u(u, v):
        s = func(u, v)
        d = g.derivative(u) / g.derivative(s)
        return np.where(s > 0, d, 0.0)

    def section_inv(u, t):
        # u <= t: S(u, v) <= u <= t for every v
        return np.where(u > t, phi_inv(phi(t) - phi(u)), 1.0)

    return SemiCopula(
        name or f"arch-gen:{g.name}",
        func,
        kind="copula" if g.convex == "yes" else "semi-copula",
        generator=g,
        partial_u=partial_u,
        section_inv=section_inv,
    )


def survival_from_connecting(C: SemiCopula) -> SemiCopula:
    """Survival copula C^(u,v) = u + v - 1 + C(1-u, 1-v)."""

    def func(u, v):
        return u + v - 1.0 + C(1.0 - u, 1.0 - v)

    return SemiCopula(
        f"survival({C.name})",
        func,
        kind=C.kind,
        partial_u=lambda u, v: 1.0 - C.dU(1.0 - u, 1.0 - v),
    )


def schur_constant_semicopula(m: SurvivalModel) -> SemiCopula:
    """Archimedean semi-copula generated by Gbar^{-1}; a copula iff Gbar convex."""
    return archimedean(survival_generator(m), name=f"schur:{m.key}")


def offset(base: SemiCopula, eps: float) -> SemiCopula:
    """``base + eps`` everywhere: a deliberately broken model for negative tests."""
    return SemiCopula(f"offset:{eps:g}:{base.name}", lambda u, v: base(u, v) + eps, kind=base.kind)


# ---------------------------------------------------------------------------
# grid checks
# ---------------------------------------------------------------------------


def _grid(grid, n: int, closed: bool = True) -> np.ndarray:
    if grid is not None:
        return np.asarray(grid, dtype=float)
    return np.linspace(0.0, 1.0, n) if closed else interior_grid(n)


def validate(S: SemiCopula, grid=None, tol: float = numkit.VERDICT_TOL) -> dict[str, Verdict]:
    """Boundary conditions, monotonicity and 2-increasingness on a grid."""
    w = _grid(grid, 64)
    one, zero = np.ones_like(w), np.zeros_like(w)
    dev = np.concatenate(
        [np.abs(S(w, one) - w), np.abs(S(one, w) - w), np.abs(S(w, zero)), np.abs(S(zero, w))]
    )
    pts = np.concatenate([np.stack([w, one], 1), np.stack([one, w], 1), np.stack([w, zero], 1), np.stack([zero, w], 1)])
    boundary = numkit.equivalence_verdict(dev, pts, BOUNDARY_TOL)

    U, V = np.meshgrid(w, w, indexing="ij")
    Z = S(U, V)
    du = Z[1:, :] - Z[:-1, :]
    dv = Z[:, 1:] - Z[:, :-1]
    slack = np.concatenate([du.ravel(), dv.ravel()])
    pts = np.concatenate(
        [
            np.stack([U[:-1, :].ravel(), V[:-1, :].ravel(), U[1:, :].ravel(), V[1:, :].ravel()], 1),
            np.stack([U[:, :-1].ravel(), V[:, :-1].ravel(), U[:, 1:].ravel(), V[:, 1:].ravel()], 1),
        ]
    )
    monotone = numkit.verdict_from_slack(slack, pts, tol)

    vol = Z[1:, 1:] - Z[:-1, 1:] - Z[1:, :-1] + Z[:-1, :-1]
    rect = np.stack([U[:-1, :-1].ravel(), V[:-1, :-1].ravel(), U[1:, 1:].ravel(), V[1:, 1:].ravel()], 1)
    two_inc = numkit.verdict_from_slack(vol.ravel(), rect, tol=TWO_INCREASING_TOL, floor=TWO_INCREASING_TOL / 100)
    return {"boundary": boundary, "monotone": monotone, "two_increasing": two_inc}


def check_lipschitz(S: SemiCopula, grid=None, tol: float = numkit.VERDICT_TOL) -> Verdict:
    """1-Lipschitz in each argument: |S(u2,v)-S(u1,v)| <= |u2-u1|."""
    w = _grid(grid, 64)
    U, V = np.meshgrid(w, w, indexing="ij")
    Z = S(U, V)
    slack_u = (U[1:, :] - U[:-1, :]) - np.abs(Z[1:, :] - Z[:-1, :])
    slack_v = (V[:, 1:] - V[:, :-1]) - np.abs(Z[:, 1:] - Z[:, :-1])
    pts = np.concatenate([np.stack([U[1:, :].ravel(), V[1:, :].ravel()], 1), np.stack([U[:, 1:].ravel(), V[:, 1:].ravel()], 1)])
    return numkit.verdict_from_slack(np.concatenate([slack_u.ravel(), slack_v.ravel()]), pts, tol)


def check_frechet(S: SemiCopula, grid=None, tol: float = numkit.VERDICT_TOL) -> Verdict:
    """W <= S <= M pointwise."""
    w = _grid(grid, 64)
    U, V = np.meshgrid(w, w, indexing="ij")
    Z = S(U, V)
    lower = Z - np.maximum(U + V - 1.0, 0.0)
    upper = np.minimum(U, V) - Z
    pts = np.stack([U.ravel(), V.ravel()], 1)
    return numkit.verdict_from_slack(np.minimum(lower, upper).ravel(), pts, tol)


def check_pqd(S: SemiCopula, grid=None, tol: float = numkit.VERDICT_TOL) -> dict[str, Verdict]:
    """PQD: S >= uv; NQD: S <= uv."""
    w = _grid(grid, 31, closed=False)
    U, V = np.meshgrid(w, w, indexing="ij")
    diff = (S(U, V) - U * V).ravel()
    pts = np.stack([U.ravel(), V.ravel()], 1)
    return {
        "PQD": numkit.verdict_from_slack(diff, pts, tol),
        "NQD": numkit.verdict_from_slack(-diff, pts, tol),
    }


def migrativity_grid(n_uv: int = 24, n_s: int = 12) -> np.ndarray:
    """Points (u, v, s) with v <= u and s in (0, 1)."""
    w = interior_grid(n_uv)
    s = interior_grid(n_s)
    U, V, Sg = np.meshgrid(w, w, s, indexing="ij")
    keep = V <= U
    return np.stack([U[keep], V[keep], Sg[keep]], 1)


def check_migrativity(S: SemiCopula, grid3d=None, tol: float = numkit.VERDICT_TOL) -> dict[str, Verdict]:
    """PMD: S(us, v) >= S(u, sv) for v <= u; NMD the reverse."""
    pts = migrativity_grid() if grid3d is None else np.asarray(grid3d, dtype=float)
    u, v, s = pts[:, 0], pts[:, 1], pts[:, 2]
    diff = S(u * s, v) - S(u, s * v)
    return {
        "PMD": numkit.verdict_from_slack(diff, pts, tol),
        "NMD": numkit.verdict_from_slack(-diff, pts, tol),
    }


def _ltd_verdicts(S: SemiCopula, u: np.ndarray, v: np.ndarray, tol: float):
    U, V = np.meshgrid(u, v, indexing="ij")
    ratio = S(U, V) / U
    d = ratio[1:, :] - ratio[:-1, :]
    pts = np.stack([U[:-1, :].ravel(), U[1:, :].ravel(), V[1:, :].ravel()], 1)
    return (
        numkit.verdict_from_slack(-d.ravel(), pts, tol),
        numkit.verdict_from_slack(d.ravel(), pts, tol),
    )


def check_ltd_rti(S: SemiCopula, grid=None, tol: float = numkit.VERDICT_TOL) -> dict[str, Verdict]:
    """Tail monotonicity of S(u,v)/u in u, with u kept above 1e-4.

    ``LTD``: decreasing; ``LTI``: increasing; ``RTI-as-survival``: LTD of
    the survival transform, i.e. P(V > v | U > u) increasing in u.
    """
    if grid is None:
        u = np.linspace(1e-4, 1.0, 48)
        v = interior_grid(16)
    else:
        u = v = np.asarray(grid, dtype=float)
    u = u[u >= 1e-4]
    ltd, lti = _ltd_verdicts(S, u, v, tol)
    rti, _ = _ltd_verdicts(survival_from_connecting(S), u, v, tol)
    return {"LTD": ltd, "LTI": lti, "RTI-as-survival": rti}


def check_si(S: SemiCopula, grid=None, tol: float = numkit.VERDICT_TOL) -> Verdict:
    """Stochastic increasingness read as: dS/du nonincreasing in u for every v."""
    if grid is None:
        u = interior_grid(32)
        v = interior_grid(16)
    else:
        u = v = np.asarray(grid, dtype=float)
    U, V = np.meshgrid(u, v, indexing="ij")
    D = S.dU(U, V, h=1e-5)
    d = D[1:, :] - D[:-1, :]
    pts = np.stack([U[:-1, :].ravel(), U[1:, :].ravel(), V[1:, :].ravel()], 1)
    return numkit.verdict_from_slack(-d.ravel(), pts, tol)


def sections_strictly_increasing(S: SemiCopula, u_values, n_v: int = 33) -> tuple[bool, float | None]:
    """Whether every section v -> S(u, v) for the given u is strictly increasing.

    Returns ``(ok, u_bad)`` with the first offending u.
    """
    v = np.linspace(0.0, 1.0, n_v)
    for u in np.atleast_1d(u_values):
        z = S(np.full_like(v, u), v)
        if np.any(np.diff(z) <= 0):
            return False, float(u)
    return True, None
