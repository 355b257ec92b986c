"""Adaptive one-dimensional integration engines.

Three entry points share one vectorised Gauss-Kronrod (10/21) panel rule:

* :func:`integrate_finite` -- adaptive bisection on a finite interval.
* :func:`integrate_semi_infinite_damped` -- ``[a, inf)`` for integrands with a
  known exponential envelope, truncated where the envelope tail is negligible.
* :func:`integrate_oscillatory_abel` -- Abel-regularised ``int_0^inf g(x) sin(xy) dx``
  evaluated on an epsilon ladder and extrapolated to epsilon -> 0.

Integrands are called with 1-D ``ndarray`` arguments and must return an array
of the same shape. All engines are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ExtrapolationError, NonFiniteIntegrandError

__all__ = [
    "QuadSpec",
    "QuadResult",
    "gauss_kronrod_panels",
    "integrate_finite",
    "integrate_semi_infinite_damped",
    "integrate_oscillatory_abel",
    "polynomial_extrapolate",
    "DEFAULT_EPS_LADDER",
    "chebyshev_ladder",
    "integrate_sine_direct",
]

ArrayFunc = Callable[[np.ndarray], np.ndarray]

# Kronrod 21-point extension of the 10-point Gauss-Legendre rule on [-1, 1]
# (non-negative abscissae; the rule is symmetric).
_XK = np.array([
    0.0,
    0.14887433898163122,
    0.2943928627014602,
    0.4333953941292472,
    0.5627571346686047,
    0.6794095682990244,
    0.7808177265864169,
    0.8650633666889845,
    0.9301574913557082,
    0.9739065285171717,
    0.9956571630258081,
])
_WK = np.array([
    0.1494455540029169,
    0.14773910490133849,
    0.14277593857706009,
    0.13470921731147334,
    0.12349197626206584,
    0.10938715880229764,
    0.0931254545836976,
    0.07503967481091996,
    0.054755896574351995,
    0.032558162307964725,
    0.011694638867371874,
])
_WG = np.array([
    0.0,
    0.29552422471475287,
    0.0,
    0.26926671930999635,
    0.0,
    0.21908636251598204,
    0.0,
    0.1494513491505806,
    0.0,
    0.06667134430868814,
    0.0,
])

NODES = np.concatenate([-_XK[:0:-1], _XK])
KRONROD_WEIGHTS = np.concatenate([_WK[:0:-1], _WK])
GAUSS_WEIGHTS = np.concatenate([_WG[:0:-1], _WG])
NPOINTS = NODES.size  # 21

_EPS = np.finfo(float).eps

DEFAULT_EPS_LADDER = (0.1, 0.05, 0.025, 0.0125, 0.00625)


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances and work limits for one integration call."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 4000
    max_evaluations: int = 2_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.max_evaluations < NPOINTS:
            raise ValueError(f"max_evaluations must be >= {NPOINTS}")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class QuadResult:
    value: float
    err_estimate: float
    evaluations: int
    converged: bool

    def __float__(self):
        return float(self.value)


def _call(f: ArrayFunc, x: np.ndarray):
    out = f(x)
    inner = None
    if isinstance(out, tuple):
        out, inner = out
        inner = np.abs(np.broadcast_to(np.asarray(inner, dtype=float), x.shape))
    y = np.asarray(out, dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).astype(float)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)]
        raise NonFiniteIntegrandError(
            f"integrand returned a non-finite value at x = {bad[0]!r}")
    return y, inner


def gauss_kronrod_panels(f: ArrayFunc, a, b):
    """Apply the 10/21 Gauss-Kronrod pair on each panel ``[a_i, b_i]``.

    Returns ``(integral, error, fvals)`` where ``fvals`` has shape
    ``(npanels, 21)``. The error estimate follows the QUADPACK recipe. An
    integrand may return ``(values, errors)``; the errors of its own inner
    computations are then propagated into the panel error.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    half = 0.5 * (b - a)
    centre = 0.5 * (b + a)
    x = centre[:, None] + half[:, None] * NODES[None, :]
    fx, inner = _call(f, x.ravel())
    fx = fx.reshape(x.shape)

    kron = fx @ KRONROD_WEIGHTS
    gauss = fx @ GAUSS_WEIGHTS
    resabs = np.abs(fx) @ KRONROD_WEIGHTS
    mean = 0.5 * kron
    resasc = np.abs(fx - mean[:, None]) @ KRONROD_WEIGHTS

    absh = np.abs(half)
    err = absh * np.abs(kron - gauss)
    scaled = absh * resasc
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(scaled > 0, 200.0 * err / scaled, 0.0)
    err = np.where(scaled > 0, scaled * np.minimum(1.0, ratio ** 1.5), err)
    floor = 50.0 * _EPS * absh * resabs
    err = np.maximum(err, floor)
    if inner is not None:
        err = err + absh * (inner.reshape(x.shape) @ np.abs(KRONROD_WEIGHTS))
    return kron * half, err, fx


def _adaptive(f: ArrayFunc, edges: np.ndarray, spec: QuadSpec,
              abs_floor: float = 0.0) -> QuadResult:
    """Globally adaptive GK21 bisection starting from the panels in ``edges``.

    Every panel whose error exceeds its share of the target (proportional to
    its width) is bisected; all new panels are evaluated in one batch.
    """
    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    vals, errs, _ = gauss_kronrod_panels(f, lo, hi)
    nevals = NPOINTS * lo.size
    span = float(np.sum(hi - lo))

    while True:
        total = float(np.sum(vals))
        total_err = float(np.sum(errs))
        target = max(spec.target(total), abs_floor)
        if total_err <= target:
            return QuadResult(total, total_err, nevals, True)

        share = target * (hi - lo) / span if span > 0 else np.full_like(errs, target)
        split = errs > share
        if not np.any(split):
            split = errs == errs.max()
        nsplit = int(np.count_nonzero(split))
        if (lo.size + nsplit > spec.max_subdivisions
                or nevals + 2 * NPOINTS * nsplit > spec.max_evaluations):
            return QuadResult(total, total_err, nevals, False)

        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        if np.any(new_hi - new_lo <= 4 * _EPS * np.maximum(np.abs(new_lo), 1e-300)):
            return QuadResult(total, total_err, nevals, False)
        nv, ne, _ = gauss_kronrod_panels(f, new_lo, new_hi)
        nevals += NPOINTS * new_lo.size

        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])


def integrate_finite(f: ArrayFunc, a: float, b: float, spec: QuadSpec | None = None,
                     points: Sequence[float] | None = None) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` by adaptive Gauss-Kronrod bisection.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    a, b : float
        Finite limits with ``a <= b``.
    spec : QuadSpec, optional
        Tolerances; defaults to ``QuadSpec()``.
    points : sequence of float, optional
        Interior break points (kinks, known oscillation nodes) used to seed
        the initial panel set.

    Returns
    -------
    QuadResult
        ``converged`` is False when work limits were hit; ``value`` is then the
        best available estimate.
    """
    spec = spec or QuadSpec()
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integrate_finite requires finite limits")
    if a > b:
        raise ValueError("require a <= b")
    if a == b:
        return QuadResult(0.0, 0.0, 0, True)
    edges = [a, b]
    if points is not None:
        inner = sorted(float(p) for p in points if a < p < b)
        edges = [a, *inner, b]
    return _adaptive(f, np.asarray(edges, dtype=float), spec)


def _envelope_scale(f: ArrayFunc, a: float, decay_rate: float) -> float:
    # Probe |f(x)| e^{c (x - a)} over the first ~60 e-foldings.
    x = a + np.linspace(0.0, 60.0 / decay_rate, 241)[1:]
    with np.errstate(over="ignore", invalid="ignore"):
        y = np.abs(np.asarray(f(x), dtype=float)) * np.exp(decay_rate * (x - a))
    y = y[np.isfinite(y)]
    return float(y.max()) if y.size else 1.0


def integrate_semi_infinite_damped(f: ArrayFunc, a: float, decay_rate: float,
                                   spec: QuadSpec | None = None,
                                   envelope: float | None = None) -> QuadResult:
    """Integrate ``f`` over ``[a, inf)`` given ``|f(x)| <= M exp(-c (x - a))``.

    The range is truncated at the point ``X`` where the envelope tail
    ``M exp(-c (X - a)) / c`` drops below ``0.01 * abs_tol``; the tail bound is
    added to the returned error estimate. If ``envelope`` (``M``) is not given
    it is estimated by probing ``f`` (times a safety factor of 10).
    """
    spec = spec or QuadSpec()
    c = float(decay_rate)
    if not c > 0:
        raise ValueError("decay_rate must be positive")
    m = envelope if envelope is not None else 10.0 * _envelope_scale(f, a, c)
    m = max(m, 1e-300)
    budget = 0.01 * spec.abs_tol
    span = max(math.log(m / (c * budget)), 1.0) / c
    upper = a + span
    tail = m * math.exp(-c * span) / c
    # Geometric-ish break points keep the first panels resolving the bulk.
    nseed = max(4, int(math.ceil(c * span / 4.0)))
    points = a + span * (np.arange(1, nseed) / nseed) ** 2
    res = integrate_finite(f, a, upper, spec, points=points)
    return QuadResult(res.value, res.err_estimate + tail, res.evaluations, res.converged)


def polynomial_extrapolate(eps: Sequence[float], values: Sequence[float]):
    """Neville extrapolation of ``values(eps)`` to ``eps = 0``.

    Returns the table diagonal: ``diag[k]`` uses the first ``k + 1`` points.
    """
    x = np.asarray(eps, dtype=float)
    p = np.asarray(values, dtype=float).copy()
    n = x.size
    diag = [p[0]]
    # p[i] holds P_{i-k..i}(0) after pass k.
    for k in range(1, n):
        for i in range(n - 1, k - 1, -1):
            p[i] = (x[i] * p[i - 1] - x[i - k] * p[i]) / (x[i] - x[i - k])
        diag.append(p[k])
    return diag


def chebyshev_ladder(y: float, npoints: int = 16, lo: float = 0.05,
                     hi: float = 0.5) -> tuple[float, ...]:
    """Decreasing epsilon ladder at Chebyshev points of ``[lo*y, hi*y]``.

    ``I(eps)`` is analytic for ``|eps| < y``, so scaling the ladder with ``y``
    keeps the extrapolation error independent of ``y``; Chebyshev spacing keeps
    the degree-15 extrapolation well conditioned.
    """
    k = np.arange(npoints)
    t = np.cos((2 * k + 1) * np.pi / (2 * npoints))
    eps = y * (0.5 * (lo + hi) + 0.5 * (hi - lo) * t)
    return tuple(float(e) for e in sorted(eps, reverse=True))


def _damped_sine_integral(g: ArrayFunc, y: float, eps: float, spec: QuadSpec,
                          growth: float) -> QuadResult:
    """``int_0^inf g(x) sin(xy) exp(-eps x) dx`` summed panel by panel between
    the zeros of ``sin(xy)``."""
    # Beyond X the damped integrand is below the tolerance even for
    # polynomially growing g (|g| <~ x^growth).
    logt = -math.log(0.01 * spec.rel_tol)
    xmax = (logt + growth * math.log(max(logt, 2.0) / eps + 1.0) + 5.0) / eps
    half_period = math.pi / y
    npan = int(math.ceil(xmax / half_period))
    edges = half_period * np.arange(npan + 1)

    def integrand(x):
        return g(x) * np.sin(x * y) * np.exp(-eps * x)

    vals, errs, _ = gauss_kronrod_panels(integrand, edges[:-1], edges[1:])
    nevals = NPOINTS * npan
    # Panels are single half-periods; refine any that are under-resolved
    # (first few panels where g varies on a scale shorter than pi/y).
    total = math.fsum(vals)
    target = spec.target(total)
    bad = errs > target / npan
    if np.any(bad):
        idx = np.flatnonzero(bad)
        sub = QuadSpec(rel_tol=spec.rel_tol, abs_tol=target / (10 * max(idx.size, 1)),
                       max_subdivisions=spec.max_subdivisions,
                       max_evaluations=spec.max_evaluations)
        for i in idx:
            r = _adaptive(integrand, np.array([edges[i], edges[i + 1]]), sub)
            vals[i] = r.value
            errs[i] = r.err_estimate
            nevals += r.evaluations
        total = math.fsum(vals)
    # Panel errors here are dominated by roundoff floors of an alternating
    # sum, so they are combined in quadrature rather than linearly.
    err = math.sqrt(float(np.sum(errs ** 2))) + 4 * _EPS * math.sqrt(npan) * float(np.max(np.abs(vals)))
    return QuadResult(total, err, nevals, err <= spec.target(total))


def integrate_oscillatory_abel(g: ArrayFunc, y: float,
                               eps_ladder: Sequence[float] = DEFAULT_EPS_LADDER,
                               spec: QuadSpec | None = None,
                               growth: float = 2.0) -> QuadResult:
    """Abel-regularised ``int_0^inf g(x) sin(x y) dx``.

    For each ``eps`` in the ladder the damped integral
    ``I(eps) = int_0^inf g(x) sin(xy) exp(-eps x) dx`` is computed by summing
    half-period panels; ``I(eps)`` is then extrapolated polynomially to
    ``eps = 0``. The error estimate is the difference of the last two
    extrapolants plus the propagated quadrature error.

    ``growth`` bounds the power-law growth of ``g`` and only affects where the
    damped integrals are truncated.

    Raises
    ------
    ExtrapolationError
        If successive extrapolants do not contract.
    """
    spec = spec or QuadSpec()
    if not y > 0:
        raise ValueError("y must be positive")
    ladder = [float(e) for e in eps_ladder]
    if len(ladder) < 3:
        raise ValueError("eps_ladder needs at least three entries")
    if any(e <= 0 for e in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("eps_ladder must be positive and strictly decreasing")

    inner = QuadSpec(rel_tol=min(spec.rel_tol, 1e-13), abs_tol=min(spec.abs_tol, 1e-15),
                     max_subdivisions=spec.max_subdivisions,
                     max_evaluations=spec.max_evaluations)
    runs = [_damped_sine_integral(g, y, e, inner, growth) for e in ladder]
    values = [r.value for r in runs]
    # Neville table runs from the smallest eps upward so that the residual
    # compares against the extrapolant that drops the least informative point.
    diag = polynomial_extrapolate(ladder[::-1], values[::-1])
    steps = [abs(b - a) for a, b in zip(diag, diag[1:])]
    if len(steps) >= 2 and not steps[-1] < steps[0]:
        raise ExtrapolationError(
            f"Abel extrapolants do not contract: {diag!r}")
    # Remaining error of the final extrapolant: geometric tail of the step
    # sequence, with the contraction rate taken over the last few steps.
    resid = steps[-1]
    span = min(6, len(steps))
    if span >= 2 and steps[-span] > 0:
        rate = min(0.9, (steps[-1] / steps[-span]) ** (1.0 / (span - 1)))
        resid = steps[-1] * rate / (1.0 - rate)
    # Propagate quadrature error through the (linear) extrapolation weights.
    weights = _neville_weights(ladder)
    qerr = math.sqrt(float(np.sum((weights * np.array([r.err_estimate for r in runs])) ** 2)))
    err = resid + qerr
    evaluations = sum(r.evaluations for r in runs)
    # Inner errors are already in ``err``; convergence is judged on the total.
    converged = err <= spec.target(diag[-1])
    return QuadResult(float(diag[-1]), float(err), evaluations, bool(converged))


def integrate_sine_direct(g: ArrayFunc, y: float, spec: QuadSpec | None = None,
                          npanels: int = 400, levels: int = 12) -> QuadResult:
    """Convergent ``int_0^inf g(x) sin(xy) dx`` by summation between zeros.

    The integral over each half period ``[j pi/y, (j+1) pi/y]`` is computed
    with adaptive Gauss-Kronrod; the partial sums form an alternating
    sequence whose limit is accelerated by repeated averaging of neighbours
    (the Euler transform of the tail). Requires ``g`` to decay monotonically
    at large ``x``.
    """
    spec = spec or QuadSpec()
    if not y > 0:
        raise ValueError("y must be positive")
    if npanels < levels + 4:
        raise ValueError("npanels too small for the requested averaging levels")
    half_period = math.pi / y
    edges = half_period * np.arange(npanels + 1)

    def integrand(x):
        return g(x) * np.sin(x * y)

    vals, errs, _ = gauss_kronrod_panels(integrand, edges[:-1], edges[1:])
    nevals = NPOINTS * npanels
    inner = QuadSpec(rel_tol=min(spec.rel_tol, 1e-13), abs_tol=min(spec.abs_tol, 1e-16))
    for i in np.flatnonzero(errs > inner.target(float(np.max(np.abs(vals)))) / npanels):
        r = _adaptive(integrand, np.array([edges[i], edges[i + 1]]), inner)
        vals[i], errs[i] = r.value, r.err_estimate
        nevals += r.evaluations
    partial = np.cumsum(vals)
    seq = partial[-(levels + 2):]
    prev = None
    for _ in range(levels):
        prev = seq
        seq = 0.5 * (seq[1:] + seq[:-1])
    value = float(seq[-1])
    err = abs(float(seq[-1] - seq[-2])) + abs(float(prev[-1] - seq[-1])) * 1e-3
    err += math.sqrt(float(np.sum(errs ** 2)))
    return QuadResult(value, float(err), nevals, bool(err <= spec.target(value)))


def _neville_weights(x: Sequence[float]) -> np.ndarray:
    # Lagrange weights of the interpolant through all points, evaluated at 0.
    x = np.asarray(x, dtype=float)
    w = np.ones_like(x)
    for i in range(x.size):
        for j in range(x.size):
            if i != j:
                w[i] *= x[j] / (x[j] - x[i])
    return w
