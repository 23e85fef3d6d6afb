"""Exchangeable bivariate survival models and their ageing functions.

A model is a pair (survival copula C^, marginal Gbar) with joint survival
Fbar(x, y) = C^(Gbar(x), Gbar(y)).  Its ageing function is the semi-copula
B(u, v) = gamma(C^(gamma^{-1}(u), gamma^{-1}(v))) where
gamma(u) = exp(-Gbar^{-1}(u)), so that Fbar(x, y) = Gbar(-ln B(e^-x, e^-y)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numkit, semicopula
from .errors import NotACopula
from .numkit import Status, Verdict
from .semicopula import Generator, SemiCopula
from .univariate import MixtureModel, SurvivalModel


@dataclass(frozen=True)
class GammaTransform:
    """gamma(u) = exp(-Gbar^{-1}(u)) and its inverse z -> Gbar(-ln z)."""

    marginal: SurvivalModel

    def gamma(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            return np.where(u <= 0, 0.0, np.exp(-self.marginal.inverse(u)))

    def gamma_inv(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(all="ignore"):
            return np.where(z <= 0, 0.0, self.marginal.survival(-np.log(z)))

    def gamma_prime(self, u):
        """gamma(u) / g(Gbar^{-1}(u))."""
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            x = self.marginal.inverse(u)
            return np.exp(-x) / self.marginal.density(x)

    def gamma_inv_prime(self, z):
        """g(-ln z) / z."""
        z = np.asarray(z, dtype=float)
        with np.errstate(all="ignore"):
            return self.marginal.density(-np.log(z)) / z


def gamma_transform(m: SurvivalModel) -> GammaTransform:
    return GammaTransform(m)


@dataclass(frozen=True)
class BivariateModel:
    """Exchangeable pair with survival copula ``copula`` and marginal ``marginal``.

    ``joint`` overrides the composition C^(Gbar(x), Gbar(y)) when the joint
    law is known directly (conditionally i.i.d. mixtures).
    """

    copula: SemiCopula
    marginal: SurvivalModel
    joint: Callable | None = None
    label: str = field(default="")

    @property
    def key(self) -> str:
        return self.label or f"{self.copula.name}|{self.marginal.key}"

    def joint_survival(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.joint is not None:
            return self.joint(x, y)
        return self.copula(self.marginal.survival(x), self.marginal.survival(y))

    @property
    def x_max(self) -> float:
        return self.marginal.x_max


# ---------------------------------------------------------------------------
# ageing function
# ---------------------------------------------------------------------------


def ageing_function(mdl: BivariateModel) -> SemiCopula:
    """B = gamma o C^ o (gamma^{-1} x gamma^{-1}), evaluated lazily.

    When C^ is Archimedean with generator phi, B is Archimedean with
    generator psi(u) = phi(Gbar(-ln u)).
    """
    gt = GammaTransform(mdl.marginal)
    C = mdl.copula

    def func(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        out = gt.gamma(C(gt.gamma_inv(u), gt.gamma_inv(v)))
        # the boundary holds exactly; gamma o gamma^{-1} only to roundoff
        return np.where(v >= 1.0, u, np.where(u >= 1.0, v, out))

    section_inv = None
    if C.section_inv is not None:

        def section_inv(u, t):
            return gt.gamma(C.section_inverse(gt.gamma_inv(u), gt.gamma_inv(t)))

    partial_u = None
    if mdl.marginal.has_density:

        def partial_u(u, v):
            a, b = gt.gamma_inv(u), gt.gamma_inv(v)
            with np.errstate(all="ignore"):
                out = gt.gamma_prime(C(a, b)) * C.dU(a, b) * gt.gamma_inv_prime(u)
            return np.where(np.isfinite(out), out, 0.0)

    generator = None
    if C.generator is not None:
        generator = transported_generator(C.generator, mdl.marginal)
    return SemiCopula(
        f"B[{mdl.key}]",
        func,
        kind="semi-copula",
        generator=generator,
        partial_u=partial_u,
        section_inv=section_inv,
    )


def transported_generator(phi: Generator, m: SurvivalModel) -> Generator:
    """psi(u) = phi(Gbar(-ln u)), psi^{-1}(x) = exp(-Gbar^{-1}(phi^{-1}(x)))."""
    gt = GammaTransform(m)

    def psi(u):
        return phi.phi(gt.gamma_inv(u))

    def psi_inv(x):
        return gt.gamma(phi.phi_inv(x))

    def psi_prime(u):
        return phi.derivative(gt.gamma_inv(u)) * gt.gamma_inv_prime(u)

    return Generator(f"{phi.name}@{m.key}", psi, psi_inv, psi_prime, convex="unchecked")


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def schur_constant_model(m: SurvivalModel) -> BivariateModel:
    """Fbar(x, y) = Gbar(x + y); requires a convex Gbar."""
    conv = semicopula.survival_convexity(m)
    if conv.fails:
        raise NotACopula(f"survival function of {m.key} is not convex near {conv.witness}")
    C = semicopula.schur_constant_semicopula(m)
    return BivariateModel(C, m)


def conditionally_iid_model(mix: MixtureModel) -> BivariateModel:
    """Fbar(x, y) = sum_j w_j Gbar_j(x) Gbar_j(y), marginal the mixture."""
    marginal = mix.as_model()
    w = np.asarray(mix.weights)

    def joint(x, y):
        return sum(wj * c.survival(x) * c.survival(y) for wj, c in zip(w, mix.components))

    def copula(u, v):
        return joint(marginal.inverse(u), marginal.inverse(v))

    C = SemiCopula(f"ciid[{mix.key}]", copula, kind="copula")
    return BivariateModel(C, marginal, joint=joint, label=f"ciid|{mix.key}")


# ---------------------------------------------------------------------------
# bivariate ageing checks
# ---------------------------------------------------------------------------


def wedge_grid(x_max: float, n: int = 16, n_t: int = 12) -> np.ndarray:
    """Points (x, y, t) with 0 <= x < y <= x_max and t in (0, x_max]."""
    xs = np.linspace(0.0, x_max, n)
    ts = np.linspace(0.0, x_max, n_t + 1)[1:]
    X, Y, T = np.meshgrid(xs, xs, ts, indexing="ij")
    keep = X < Y
    return np.stack([X[keep], Y[keep], T[keep]], 1)


def biv_ifr_check(mdl: BivariateModel, grid3d=None, tol: float = numkit.VERDICT_TOL) -> dict[str, Verdict]:
    """Bayesian biv-IFR/DFR by conditional survival probabilities.

    For x < y compares P(X > x+t | X > x, Y > y) with P(Y > y+t | X > x, Y > y).
    Points where the conditioning event has negligible probability are
    skipped.
    """
    pts = wedge_grid(mdl.x_max) if grid3d is None else np.asarray(grid3d, dtype=float)
    x, y, t = pts[:, 0], pts[:, 1], pts[:, 2]
    base = mdl.joint_survival(x, y)
    ok = base > 1e-300
    with np.errstate(all="ignore"):
        diff = (mdl.joint_survival(x + t, y) - mdl.joint_survival(x, y + t)) / base
    diff, pts = diff[ok], pts[ok]
    return {
        "bivIFR": numkit.verdict_from_slack(diff, pts, tol),
        "bivDFR": numkit.verdict_from_slack(-diff, pts, tol),
    }


def schur_concavity_check(mdl: BivariateModel, grid3d=None, tol: float = numkit.VERDICT_TOL) -> dict[str, Verdict]:
    """Schur-concavity (Fbar(x+t, y) >= Fbar(x, y+t) for x <= y) and Schur-convexity."""
    pts = wedge_grid(mdl.x_max) if grid3d is None else np.asarray(grid3d, dtype=float)
    x, y, t = pts[:, 0], pts[:, 1], pts[:, 2]
    diff = mdl.joint_survival(x + t, y) - mdl.joint_survival(x, y + t)
    return {
        "Schur-concave": numkit.verdict_from_slack(diff, pts, tol),
        "Schur-convex": numkit.verdict_from_slack(-diff, pts, tol),
    }


def _side_agrees(verdicts) -> bool:
    statuses = {v.status for v in verdicts}
    return not (Status.HOLDS in statuses and Status.FAILS in statuses)


@dataclass(frozen=True)
class TriangleReport:
    model: str
    biv: dict
    schur: dict
    migrativity: dict
    agree: bool

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "bivIFR": self.biv["bivIFR"].to_dict(),
            "bivDFR": self.biv["bivDFR"].to_dict(),
            "Schur-concave": self.schur["Schur-concave"].to_dict(),
            "Schur-convex": self.schur["Schur-convex"].to_dict(),
            "B-PMD": self.migrativity["PMD"].to_dict(),
            "B-NMD": self.migrativity["NMD"].to_dict(),
            "agree": self.agree,
        }


def equivalence_triangle(mdl: BivariateModel, grid3d=None, tol: float = numkit.VERDICT_TOL) -> TriangleReport:
    """Bayesian biv-IFR, Schur-concavity of Fbar, supermigrativity of B.

    The migrativity grid is the image of the wedge grid under
    (x, y, t) -> (e^-x, e^-y, e^-t), so the three checks look at the same
    configurations.  A side (positive or negative) agrees unless one check
    Holds while another Fails; Inconclusive is compatible with both.
    """
    pts = wedge_grid(mdl.x_max) if grid3d is None else np.asarray(grid3d, dtype=float)
    biv = biv_ifr_check(mdl, pts, tol)
    schur = schur_concavity_check(mdl, pts, tol)
    B = ageing_function(mdl)
    mpts = np.exp(-pts)
    mig = semicopula.check_migrativity(B, mpts, tol)
    agree = _side_agrees([biv["bivIFR"], schur["Schur-concave"], mig["PMD"]]) and _side_agrees(
        [biv["bivDFR"], schur["Schur-convex"], mig["NMD"]]
    )
    return TriangleReport(mdl.key, biv, schur, mig, agree)


# ---------------------------------------------------------------------------
# rebuilding a joint law from an ageing function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RebuiltModel:
    joint: Callable
    copula: SemiCopula
    two_increasing: Verdict


def rebuild_from_ageing(B: SemiCopula, h: SurvivalModel, n: int = 64) -> RebuiltModel:
    """Mbar(x, y) = Hbar(-ln B(e^-x, e^-y)) with an advisory validity check.

    The induced copula C(u, v) = Mbar(Hbar^{-1}(u), Hbar^{-1}(v)) is tested
    for 2-increasingness on an n x n grid; Mbar is a survival function only
    if that holds.
    """

    def joint(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            b = B(np.exp(-x), np.exp(-y))
            return np.where(b <= 0, 0.0, h.survival(-np.log(b)))

    def copula(u, v):
        return joint(h.inverse(u), h.inverse(v))

    C = SemiCopula(f"rebuilt[{B.name}|{h.key}]", copula, kind="semi-copula")
    verdict = semicopula.validate(C, np.linspace(0.0, 1.0, n))["two_increasing"]
    return RebuiltModel(joint, C, verdict)
