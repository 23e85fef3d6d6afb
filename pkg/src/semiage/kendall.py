"""Generalized Kendall distributions of semi-copulas.

Three independent routes compute K(t):

* partition supremum over finite partitions of [0, 1] (any semi-copula),
* the closed form t - phi(t)/phi'(t) for Archimedean semi-copulas,
* the integral t + int_t^1 dS/du(u, S_u^{-1}(t)) du for copulas whose
  sections v -> S(u, v) are strictly increasing.

A fourth transports the curve of a survival copula to the ageing function
of the corresponding exchangeable model.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numkit
from .errors import (
    DegenerateGenerator,
    GridMismatch,
    MissingDensity,
    NotPseudoArchimedean,
    SectionInversionFailure,
)
from .numkit import Verdict
from .semicopula import Generator, SemiCopula, sections_strictly_increasing
from .univariate import SurvivalModel

PROVENANCES = ("partition-sup", "archimedean-closed-form", "integral-form", "transported-from-copula")
GAP_TOL = 1e-6


class KendallPrecisionWarning(UserWarning):
    """Partition refinement hit its cell cap before converging."""


def default_grid() -> np.ndarray:
    """t = 0.05, 0.10, ..., 0.95."""
    return np.round(np.arange(1, 20) * 0.05, 10)


def k_independence(t):
    """K_Pi(t) = t - t ln t."""
    t = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        return np.where(t > 0, t - t * np.log(t), 0.0)


@dataclass(frozen=True)
class KendallCurve:
    """K(t) tabulated on an ordered grid in (0, 1).

    ``evaluator`` (if present) recomputes K at arbitrary t by the same
    route; otherwise evaluation between grid points is linear interpolation
    with the fixed endpoint values K(0) = 0 and K(1) = 1.
    """

    grid: np.ndarray
    values: np.ndarray
    provenance: str
    evaluator: Callable | None = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        g = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if g.ndim != 1 or np.any(np.diff(g) <= 0) or np.any((g <= 0) | (g >= 1)):
            raise GridMismatch("Kendall grid must be strictly increasing inside (0, 1)")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.evaluator is not None:
            return np.asarray(self.evaluator(t), dtype=float)
        xs = np.concatenate([[0.0], self.grid, [1.0]])
        ys = np.concatenate([[0.0], self.values, [1.0]])
        return np.interp(t, xs, ys)

    @classmethod
    def tabulate(cls, fn: Callable, grid, provenance: str) -> "KendallCurve":
        g = np.asarray(grid, dtype=float)
        return cls(g, np.asarray(fn(g), dtype=float), provenance, evaluator=fn)

    def lower_bound_verdict(self, tol: float = numkit.VERDICT_TOL) -> Verdict:
        """K(t) >= t on the grid."""
        return numkit.verdict_from_slack(self.values - self.grid, self.grid, tol)

    def is_monotone(self) -> bool:
        """Recorded, never required: semi-copula curves may decrease."""
        return bool(np.all(np.diff(self.values) >= 0))

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        buf.write(f"# provenance: {self.provenance}\n")
        buf.write("t,K\n")
        for t, k in zip(self.grid, self.values):
            buf.write(f"{t:.12g},{k:.12g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "KendallCurve":
        provenance = "partition-sup"
        rows = []
        for line in text.splitlines():
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                body = s[1:].strip()
                if body.startswith("provenance:"):
                    provenance = body.split(":", 1)[1].strip()
                continue
            rows.append(s)
        reader = csv.reader(rows)
        header = next(reader)
        if [h.strip() for h in header[:2]] != ["t", "K"]:
            raise GridMismatch(f"expected columns t,K, got {header}")
        data = np.array([[float(r[0]), float(r[1])] for r in reader])
        if data.size == 0:
            raise GridMismatch("Kendall CSV has no rows")
        return cls(data[:, 0], data[:, 1], provenance)


# ---------------------------------------------------------------------------
# route 1: partition supremum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionResult:
    value: float
    cells: int
    converged: bool


def _partition_sum(S: SemiCopula, t: float, n: int) -> float:
    # cells of (t, 1]; the cell [0, t] has right end t and contributes nothing
    edges = t + (1.0 - t) * np.arange(n + 1) / n
    edges[-1] = 1.0
    lo, hi = edges[:-1], edges[1:]
    v = S.section_inverse(hi, np.full_like(hi, t))
    terms = S(hi, v) - S(lo, v)
    return t + float(np.sum(terms))


def kendall_partition_detail(
    S: SemiCopula, t: float, start_n: int = 64, max_n: int = 16384, tol: float = 1e-4
) -> PartitionResult:
    """Partition-sum value under dyadic refinement of (t, 1].

    Refinement doubles the number of cells until successive values differ
    by less than ``tol``.  The returned value is the finest level reached,
    i.e. the fine-mesh limit of the partition sums.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if t == 1.0:
        return PartitionResult(1.0, 0, True)
    n = start_n
    prev = _partition_sum(S, t, n)
    while n < max_n:
        n *= 2
        cur = _partition_sum(S, t, n)
        if abs(cur - prev) < tol:
            return PartitionResult(cur, n, True)
        prev = cur
    return PartitionResult(prev, n, False)


def kendall_partition_sup(
    S: SemiCopula, t: float, start_n: int = 64, max_n: int = 16384, tol: float = 1e-4
) -> float:
    """Generalized Kendall value of a semi-copula by partition sums.

    Warns with :class:`KendallPrecisionWarning` if refinement stops at
    ``max_n`` without meeting ``tol``.
    """
    res = kendall_partition_detail(S, t, start_n, max_n, tol)
    if not res.converged:
        warnings.warn(
            f"partition refinement for {S.name} at t={t:g} not converged at {res.cells} cells",
            KendallPrecisionWarning,
            stacklevel=2,
        )
    return res.value


def partition_curve(S: SemiCopula, grid=None, **refine) -> KendallCurve:
    g = default_grid() if grid is None else np.asarray(grid, dtype=float)

    def fn(ts):
        ts = np.asarray(ts, dtype=float)
        out = [kendall_partition_sup(S, float(x), **refine) for x in ts.ravel()]
        return np.array(out).reshape(ts.shape)

    return KendallCurve.tabulate(fn, g, "partition-sup")


# ---------------------------------------------------------------------------
# route 2: Archimedean closed form
# ---------------------------------------------------------------------------


def kendall_archimedean(g: Generator, t):
    """K(t) = t - phi(t) / phi'(t)."""
    t = np.asarray(t, dtype=float)
    d = np.asarray(g.derivative(t), dtype=float)
    if np.any(d == 0) or np.any(~np.isfinite(d)):
        bad = t[np.broadcast_to((d == 0) | ~np.isfinite(d), t.shape)] if t.ndim else t
        raise DegenerateGenerator(f"phi' of {g.name} vanishes or is undefined at t={np.ravel(bad)[:3]}")
    with np.errstate(all="ignore"):
        out = t - np.asarray(g.phi(t), dtype=float) / d
    return float(out) if out.ndim == 0 else out


def archimedean_curve(g: Generator, grid=None) -> KendallCurve:
    grid = default_grid() if grid is None else grid
    return KendallCurve.tabulate(lambda ts: kendall_archimedean(g, ts), grid, "archimedean-closed-form")


# ---------------------------------------------------------------------------
# route 3: integral of the partial derivative along the level curve
# ---------------------------------------------------------------------------


def _check_sections(C: SemiCopula, t: float) -> None:
    us = np.linspace(t, 1.0, 18)[1:-1] if t < 1 else np.array([])
    ok, u_bad = sections_strictly_increasing(C, us)
    if not ok:
        raise SectionInversionFailure(f"section v -> {C.name}(u, v) is not strictly increasing at u={u_bad:.6g}")


def kendall_integral(C: SemiCopula, t, tol: float = 1e-10):
    """K(t) = t + int_t^1 dC/du(u, C_u^{-1}(t)) du.

    Requires strictly increasing sections; this is checked on a coarse
    grid of u in (t, 1) first.  Array ``t`` is integrated as one batch.
    """
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    for x in flat:
        if 0.0 < x < 1.0:
            _check_sections(C, float(x))
    inner = (flat > 0.0) & (flat < 1.0)
    out = np.where(flat >= 1.0, 1.0, 0.0)
    if np.any(inner):
        ti = flat[inner]
        tt = ti[:, None]

        def integrand(u):
            tb = np.broadcast_to(tt, u.shape)
            v = C.section_inverse(u, tb)
            return C.dU(u, v)

        out[inner] = ti + numkit.integrate_batch(integrand, ti, np.ones_like(ti), tol=tol)
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def integral_curve(C: SemiCopula, grid=None) -> KendallCurve:
    g = default_grid() if grid is None else np.asarray(grid, dtype=float)
    for x in g:
        _check_sections(C, float(x))
    return KendallCurve.tabulate(lambda ts: kendall_integral(C, ts), g, "integral-form")


# ---------------------------------------------------------------------------
# classification and equivalence
# ---------------------------------------------------------------------------


def classify_pkd_nkd(K: KendallCurve, tol: float = numkit.VERDICT_TOL) -> dict[str, Verdict]:
    """PKD: K <= K_Pi pointwise; NKD: K >= K_Pi.

    The comonotone copula M (K(t) = t) is PKD under this orientation.
    """
    diff = k_independence(K.grid) - K.values
    return {
        "PKD": numkit.verdict_from_slack(diff, K.grid, tol),
        "NKD": numkit.verdict_from_slack(-diff, K.grid, tol),
    }


def kendall_equivalent(K1: KendallCurve, K2: KendallCurve, tol: float = 1e-3) -> Verdict:
    """Holds iff sup |K1 - K2| <= tol on a common grid.

    Grids that differ are reconciled by evaluating a curve that carries an
    evaluator on the other curve's grid.
    """
    if K1.grid.shape == K2.grid.shape and np.allclose(K1.grid, K2.grid, rtol=0, atol=1e-12):
        grid, a, b = K1.grid, K1.values, K2.values
    elif K2.evaluator is not None:
        grid, a, b = K1.grid, K1.values, K2(K1.grid)
    elif K1.evaluator is not None:
        grid, a, b = K2.grid, K1(K2.grid), K2.values
    else:
        raise GridMismatch("Kendall curves live on different grids and neither can be re-evaluated")
    return numkit.equivalence_verdict(a - b, grid, tol)


# ---------------------------------------------------------------------------
# pseudo-generator reconstruction
# ---------------------------------------------------------------------------


def _gap_check(K: KendallCurve, gap_tol: float) -> None:
    gap = K.values - K.grid
    bad = gap <= gap_tol
    if np.any(bad):
        ts = K.grid[bad]
        raise NotPseudoArchimedean(
            f"K(t) - t <= {gap_tol:g} for t in [{ts.min():.6g}, {ts.max():.6g}]",
            t_range=(float(ts.min()), float(ts.max())),
        )


def reconstruct_generator(K: KendallCurve, t0: float, gap_tol: float = GAP_TOL) -> Generator:
    """Pseudo-generator phi(t) = exp(int_{t0}^t ds / (s - K(s))).

    phi(t0) = 1.  The derivative is taken numerically from phi itself so
    that the round trip through the closed form is a genuine check.
    """
    t0 = float(t0)
    if not 0.0 < t0 < 1.0:
        raise ValueError("t0 must lie in (0, 1)")
    _gap_check(K, gap_tol)

    def integrand(s):
        return 1.0 / (s - float(K(np.array(s))))

    def segment(a: float, b: float) -> float:
        if abs(b - a) < 1e-6 * min(a, b, 1.0 - a, 1.0 - b):
            # Simpson's rule; quad misreads such short intervals as bad behaviour
            return (b - a) * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b)) / 6.0
        # rounding in s - K(s) bounds the attainable accuracy where the gap is tiny
        gap = abs(1.0 / integrand(0.5 * (a + b)))
        return numkit.integrate(integrand, a, b, tol=max(1e-11, 1e-14 * abs(b - a) / gap**2))

    # log phi is tabulated at knots: the kinks of an interpolated curve,
    # decades towards 0 and 1 where the integrand grows without bound, and
    # t0; s - K(s) is mostly cancellation error within 1e-8 of 1
    decades = 10.0 ** -np.arange(1, 9)
    knots = np.concatenate([decades, 1.0 - decades, np.linspace(0.1, 0.9, 9), [t0]])
    if K.evaluator is None:
        knots = np.concatenate([knots, K.grid])
    knots = np.unique(knots)
    i0 = int(np.searchsorted(knots, t0))
    table = np.zeros_like(knots)
    for i in range(i0 + 1, len(knots)):
        table[i] = table[i - 1] + segment(knots[i - 1], knots[i])
    for i in range(i0 - 1, -1, -1):
        table[i] = table[i + 1] - segment(knots[i], knots[i + 1])

    def log_phi(t: float) -> float:
        i = int(np.searchsorted(knots, t, side="right")) - 1
        if i < 0:
            return table[0] - segment(t, knots[0])
        if knots[i] == t:
            return float(table[i])
        return float(table[i]) + segment(knots[i], t)

    def phi(t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty_like(flat)
        for i, x in enumerate(flat):
            if x >= 1.0:
                out[i] = 0.0
            elif x <= 0.0:
                out[i] = math.inf
            else:
                out[i] = math.exp(log_phi(float(x)))
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def phi_prime(t):
        t = np.asarray(t, dtype=float)
        h = 1e-6 * np.minimum(1.0, np.minimum(t, 1.0 - t) * 10.0)
        h = np.maximum(h, 1e-9)
        return (np.asarray(phi(t + h)) - np.asarray(phi(t - h))) / (2.0 * h)

    lo_t, hi_t = 1e-12, float(knots[-1])

    def phi_inv_scalar(x: float) -> float:
        # phi decreasing: the largest t with phi(t) >= x
        y = math.log(x)
        if y >= table[0]:
            a, b = lo_t, float(knots[0])
            if log_phi(a) < y:
                return 0.0
        elif y <= table[-1]:
            return hi_t
        else:
            j = int(np.searchsorted(-table, -y, side="right"))
            a, b = float(knots[j - 1]), float(knots[j])
        for _ in range(80):
            mid = 0.5 * (a + b)
            if log_phi(mid) >= y:
                a = mid
            else:
                b = mid
            if b - a < 1e-13 * b:
                break
        return a

    def phi_inv(x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty_like(flat)
        for i, xi in enumerate(flat):
            if xi <= 0.0:
                out[i] = 1.0
            elif not math.isfinite(xi):
                out[i] = 0.0
            else:
                out[i] = phi_inv_scalar(float(xi))
        return out.reshape(x.shape) if x.ndim else float(out[0])

    return Generator(f"reconstructed@{t0:g}", phi=phi, phi_inv=phi_inv, phi_prime=phi_prime, convex="unchecked")


# ---------------------------------------------------------------------------
# transport to the ageing function
# ---------------------------------------------------------------------------


def transport_kendall_to_ageing(K_C: KendallCurve | Callable, m: SurvivalModel, t):
    """K_B(t) = t + gamma'(gamma^{-1}(t)) [K_C(gamma^{-1}(t)) - gamma^{-1}(t)].

    gamma(u) = exp(-Gbar^{-1}(u)) so gamma^{-1}(t) = Gbar(-ln t) and
    gamma'(gamma^{-1}(t)) = t / g(-ln t).
    """
    if not m.has_density:
        raise MissingDensity(f"marginal {m.key} has no density")
    t = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        x = -np.log(t)
        z = m.survival(x)
        slope = t / m.density(x)
    kz = np.asarray(K_C(z), dtype=float)
    out = t + slope * (kz - z)
    out = np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, out))
    return float(out) if out.ndim == 0 else out


def transported_curve(K_C: KendallCurve, m: SurvivalModel, grid=None) -> KendallCurve:
    grid = default_grid() if grid is None else grid
    return KendallCurve.tabulate(lambda ts: transport_kendall_to_ageing(K_C, m, ts), grid, "transported-from-copula")
