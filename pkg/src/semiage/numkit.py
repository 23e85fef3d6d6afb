"""Numerical substrate: bisection inverses, quadrature, grid verdicts.

Every check in the package reduces to "is this slack nonnegative on a grid",
so the three-valued :class:`Verdict` lives here together with the few
numerical primitives the other modules share.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _spi

from .errors import MonotonicityViolation, QuadratureFailure

INVERSE_TOL = 1e-10
QUAD_TOL = 1e-9
VERDICT_TOL = 1e-7
# Truncation distance for declared endpoint singularities.
SINGULAR_EPS = 1e-8


# ---------------------------------------------------------------------------
# functions and verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealFunction1D:
    """A real function on an interval, with optional analytic derivative.

    ``endpoints`` tags each end of ``domain`` as ``"finite"`` (finite limit)
    or ``"diverges"``.
    """

    eval: Callable
    domain: tuple[float, float] = (-math.inf, math.inf)
    derivative: Callable | None = None
    endpoints: tuple[str, str] = ("finite", "finite")

    def __call__(self, x):
        return self.eval(x)

    def deriv(self, x, h: float = 1e-6):
        if self.derivative is not None:
            return self.derivative(x)
        return central_difference(self.eval, x, h=h, domain=self.domain)


class Status(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Verdict:
    """Grid-certified outcome of an inequality ``slack >= 0``.

    ``margin`` is the worst signed slack seen.  ``Holds`` means no slack fell
    below ``-floor`` (round-off level), ``Inconclusive`` means the worst
    violation is within ``tol``, ``Fails`` means it exceeds ``tol`` and
    ``witness`` records where.
    """

    status: Status
    margin: float
    tol: float
    witness: tuple | None = None
    checked: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @property
    def inconclusive(self) -> bool:
        return self.status is Status.INCONCLUSIVE

    def to_dict(self) -> dict:
        out = {"status": self.status.value, "margin": _clean(self.margin), "tol": self.tol}
        if self.witness is not None:
            out["witness"] = [_clean(w) for w in _flatten(self.witness)]
        return out

    @classmethod
    def holds_trivially(cls, tol: float = 0.0) -> "Verdict":
        return cls(Status.HOLDS, math.inf, tol)


def _flatten(w):
    for item in w:
        if isinstance(item, (tuple, list, np.ndarray)):
            yield from _flatten(item)
        else:
            yield item


def _clean(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(f"{x:.12g}")


def verdict_from_slack(
    slack,
    points=None,
    tol: float = VERDICT_TOL,
    floor: float | None = None,
) -> Verdict:
    """Classify an array of slacks (nonnegative = inequality respected).

    ``points`` is indexed like ``slack`` (first axis) and supplies the
    witness.  NaN slacks count as violations of unbounded size.
    """
    s = np.asarray(slack, dtype=float).ravel()
    if s.size == 0:
        return Verdict(Status.HOLDS, math.inf, tol, checked=0)
    if floor is None:
        floor = tol * 1e-2
    s = np.where(np.isnan(s), -np.inf, s)
    i = int(np.argmin(s))
    worst = float(s[i])
    witness = None
    if points is not None and worst < -floor:
        witness = _point_at(points, i)
    if worst >= -floor:
        status = Status.HOLDS
    elif worst >= -tol:
        status = Status.INCONCLUSIVE
    else:
        status = Status.FAILS
    return Verdict(status, worst, tol, witness, checked=s.size)


def equivalence_verdict(deviation, points=None, tol: float = VERDICT_TOL) -> Verdict:
    """Two-valued check that every ``|deviation|`` is at most ``tol``.

    ``margin`` is ``tol - max|deviation|``; there is no Inconclusive band.
    """
    d = np.abs(np.asarray(deviation, dtype=float).ravel())
    if d.size == 0:
        return Verdict(Status.HOLDS, tol, tol)
    d = np.where(np.isnan(d), np.inf, d)
    i = int(np.argmax(d))
    margin = tol - float(d[i])
    if margin >= 0:
        return Verdict(Status.HOLDS, margin, tol, checked=d.size)
    witness = _point_at(points, i) if points is not None else None
    return Verdict(Status.FAILS, margin, tol, witness, checked=d.size)


def _point_at(points, i):
    if isinstance(points, (list, tuple)) and points and isinstance(points[0], np.ndarray):
        return tuple(float(np.ravel(p)[i]) for p in points)
    p = np.asarray(points, dtype=float)
    if p.ndim == 1:
        return (float(p[i]),)
    return tuple(float(c) for c in p.reshape(-1, p.shape[-1])[i])


def _evaluate(f, x):
    x = np.asarray(x, dtype=float)
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape == x.shape:
            return y
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(xi))) for xi in x.ravel()]).reshape(x.shape)


def monotonicity_verdict(
    f: Callable,
    grid: Sequence[float],
    direction: str = "increasing",
    tol: float = VERDICT_TOL,
    floor: float | None = None,
) -> Verdict:
    """Check that ``f`` is monotone along an ordered grid (>= 16 points)."""
    g = np.asarray(grid, dtype=float)
    if g.size < 16:
        raise ValueError("monotonicity_verdict needs at least 16 grid points")
    if np.any(np.diff(g) <= 0):
        raise ValueError("grid must be strictly increasing")
    return sequence_verdict(g, _evaluate(f, g), direction, tol, floor)


def sequence_verdict(
    grid: np.ndarray,
    values: np.ndarray,
    direction: str = "increasing",
    tol: float = VERDICT_TOL,
    floor: float | None = None,
) -> Verdict:
    """Monotonicity verdict for values already tabulated on ``grid``."""
    g = np.asarray(grid, dtype=float)
    d = np.diff(np.asarray(values, dtype=float))
    if direction == "increasing":
        slack = d
    elif direction == "decreasing":
        slack = -d
    else:
        raise ValueError(f"unknown direction {direction!r}")
    pairs = np.stack([g[:-1], g[1:]], axis=1)
    return verdict_from_slack(slack, pairs, tol=tol, floor=floor)


def convexity_verdict(
    f: Callable,
    grid: Sequence[float],
    shape: str = "convex",
    tol: float = VERDICT_TOL,
    floor: float | None = None,
) -> Verdict:
    """Sign of second divided differences of ``f`` along a grid."""
    g = np.asarray(grid, dtype=float)
    y = _evaluate(f, g)
    h1 = np.diff(g)[:-1]
    h2 = np.diff(g)[1:]
    # second divided difference scaled by the local step, so slacks are on
    # the scale of first differences
    dd = ((y[2:] - y[1:-1]) / h2 - (y[1:-1] - y[:-2]) / h1) * np.minimum(h1, h2)
    slack = dd if shape == "convex" else -dd
    triples = np.stack([g[:-2], g[1:-1], g[2:]], axis=1)
    return verdict_from_slack(slack, triples, tol=tol, floor=floor)


# ---------------------------------------------------------------------------
# inverses
# ---------------------------------------------------------------------------


def _direction(fa: float, fb: float) -> int:
    if fb > fa:
        return 1
    if fb < fa:
        return -1
    return 0


def monotone_inverse(
    f: Callable[[float], float],
    target: float,
    bracket: tuple[float, float],
    tol: float = INVERSE_TOL,
    samples: int = 17,
) -> float:
    """Generalised inverse of a monotone function by bisection.

    Increasing ``f``: returns ``sup{x in bracket : f(x) <= target}``.
    Decreasing ``f``: returns ``sup{x in bracket : f(x) >= target}``.
    An empty set gives 0 (the ``sup(empty) = 0`` convention); a target
    beyond the far end returns the right endpoint.
    """
    a, b = float(bracket[0]), float(bracket[1])
    xs = np.linspace(a, b, samples)
    ys = np.array([float(f(x)) for x in xs])
    sign = _direction(ys[0], ys[-1])
    if sign == 0:
        sign = 1
    d = np.diff(ys) * sign
    scale = max(1.0, float(np.max(np.abs(ys[np.isfinite(ys)]))) if np.any(np.isfinite(ys)) else 1.0)
    if np.any(d < -1e-12 * scale):
        k = int(np.argmin(d))
        raise MonotonicityViolation(
            f"function not monotone on [{a}, {b}] between x={xs[k]:.6g} and x={xs[k + 1]:.6g}"
        )

    def below(y):
        # True where x is inside the defining set
        return y <= target if sign > 0 else y >= target

    if not below(ys[0]):
        return 0.0
    if below(ys[-1]):
        return b
    lo, hi = a, b
    for _ in range(200):
        if hi - lo <= tol * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if below(float(f(mid))):
            lo = mid
        else:
            hi = mid
    return lo


def monotone_inverse_array(
    f: Callable[[np.ndarray], np.ndarray],
    target,
    lo,
    hi,
    increasing: bool = True,
    tol: float = 1e-13,
) -> np.ndarray:
    """Vectorised counterpart of :func:`monotone_inverse`.

    ``f`` maps an array of abscissae to an array of values elementwise, so
    each element may have its own target and bracket (broadcast together).
    Same conventions as the scalar version; no monotonicity sampling.
    """
    target, lo, hi = np.broadcast_arrays(
        np.asarray(target, float), np.asarray(lo, float), np.asarray(hi, float)
    )
    lo = lo.copy()
    hi = hi.copy()
    target = target.copy()

    def inside(y):
        return y <= target if increasing else y >= target

    with np.errstate(all="ignore"):
        in_lo = inside(f(lo))
        in_hi = inside(f(hi))
    empty = ~in_lo
    full = in_hi
    width = float(np.max(hi - lo)) if hi.size else 0.0
    n_iter = int(math.ceil(math.log2(max(width, tol) / tol))) + 2 if width > 0 else 0
    for _ in range(min(n_iter, 200)):
        mid = 0.5 * (lo + hi)
        with np.errstate(all="ignore"):
            ok = inside(f(mid))
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    out = np.where(full, hi, lo)
    return np.where(empty, 0.0, out)


# ---------------------------------------------------------------------------
# quadrature and differences
# ---------------------------------------------------------------------------


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
    singular: tuple[bool, bool] = (False, False),
    eps: float = SINGULAR_EPS,
    limit: int = 200,
) -> float:
    """Adaptive quadrature of ``f`` over ``[a, b]`` (QUADPACK via SciPy).

    Endpoints flagged in ``singular`` are approached by shrinking the
    excluded gap by decades down to ``eps``; the integral is accepted once a
    shell contributes less than ``tol``.  A shell still above ``tol`` at
    ``eps`` means the tail does not converge and raises QuadratureFailure.
    """
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, tol, singular[::-1], eps, limit)
    lo_gap = 1e-2 * (b - a) if singular[0] else 0.0
    hi_gap = 1e-2 * (b - a) if singular[1] else 0.0
    total = _quad(f, a + lo_gap, b - hi_gap, tol, limit)
    for side, gap in ((0, lo_gap), (1, hi_gap)):
        if gap == 0.0:
            continue
        while True:
            new_gap = gap / 10.0
            if side == 0:
                piece = _quad(f, a + new_gap, a + gap, tol, limit)
            else:
                piece = _quad(f, b - gap, b - new_gap, tol, limit)
            total += piece
            gap = new_gap
            if abs(piece) < tol:
                break
            if gap <= eps:
                raise QuadratureFailure(
                    f"tail near {'left' if side == 0 else 'right'} endpoint does not converge "
                    f"(last shell contributed {piece:.3g})"
                )
    return total


@functools.lru_cache(maxsize=None)
def _unit_gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point rule on [0, 1]."""
    s, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (s + 1.0), 0.5 * w


def integrate_batch(
    f: Callable[[np.ndarray], np.ndarray],
    a,
    b,
    tol: float = QUAD_TOL,
    n_start: int = 16,
    n_max: int = 4096,
) -> np.ndarray:
    """Many integrals over [a_i, b_i] at once by Gauss-Legendre doubling.

    ``f`` receives nodes of shape (m, n), row i belonging to integral i,
    and must return values of the same shape.  The substitution
    u = a + (b - a)(3s^2 - 2s^3) flattens square-root type endpoint
    behaviour.  The node count doubles until every estimate moves by less
    than ``tol``; reaching ``n_max`` raises QuadratureFailure.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    width = (b - a)[:, None]

    def estimate(n):
        s, w = _unit_gauss_legendre(n)
        u = a[:, None] + width * (3.0 * s**2 - 2.0 * s**3)
        jac = width * 6.0 * s * (1.0 - s)
        with np.errstate(all="ignore"):
            vals = np.asarray(f(u), dtype=float)
        return np.sum(vals * jac * w, axis=1)

    n = n_start
    prev = estimate(n)
    while n < n_max:
        n *= 2
        cur = estimate(n)
        err = np.abs(cur - prev)
        if np.all(np.isfinite(cur)) and np.all(err < tol * np.maximum(1.0, np.abs(cur))):
            return cur
        prev = cur
    raise QuadratureFailure(f"Gauss-Legendre estimates not within {tol:g} at {n_max} nodes")


def _quad(f, a, b, tol, limit):
    with warnings.catch_warnings():
        warnings.simplefilter("error", _spi.IntegrationWarning)
        try:
            val, err = _spi.quad(f, a, b, epsabs=tol, epsrel=tol, limit=limit)
        except _spi.IntegrationWarning as exc:
            raise QuadratureFailure(f"quadrature on [{a:.6g}, {b:.6g}] did not converge: {exc}") from exc
    if not math.isfinite(val):
        raise QuadratureFailure(f"non-finite integral on [{a:.6g}, {b:.6g}]")
    if err > 100 * max(tol, tol * abs(val)):
        raise QuadratureFailure(f"error estimate {err:.3g} above tolerance on [{a:.6g}, {b:.6g}]")
    return val


def central_difference(f, x, h: float = 1e-6, domain=(-math.inf, math.inf)):
    """First derivative by central differences, one-sided at domain edges."""
    x = np.asarray(x, dtype=float)
    lo = np.maximum(x - h, domain[0])
    hi = np.minimum(x + h, domain[1])
    return (np.asarray(f(hi), float) - np.asarray(f(lo), float)) / (hi - lo)


def interior_grid(n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """``n`` equispaced points strictly inside ``(lo, hi)``."""
    return lo + (hi - lo) * np.arange(1, n + 1) / (n + 1)
