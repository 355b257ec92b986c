r"""Special functions behind the Rindler-mode integrals.

The modified Bessel functions of the second kind are evaluated from the
integral representation

.. math::
    K_\mu(x) = \int_0^\infty e^{-x\cosh t} \cosh(\mu t)\, dt ,

whose integrand already decays double-exponentially, so the trapezoidal rule
converges geometrically in the step size. For imaginary order :math:`\mu = i\nu`
the integrand oscillates and the result is exponentially small
(:math:`\sim e^{-\pi\nu/2}`), so the contour is shifted to
:math:`t = u + i\theta` (allowed for :math:`0 \le \theta < \pi/2`), giving

.. math::
    K_{i\nu}(x) = e^{-\nu\theta} \int_0^\infty e^{-x\cos\theta\cosh u}
                  \cos(\nu u - x\sin\theta \sinh u)\, du .

Choosing :math:`\sin\theta = \nu/x` puts the line through the saddle point
when :math:`\nu < x`; for :math:`\nu \ge x` the line sits just below
:math:`\pi/2`. Either way the integrand magnitude stays within a small factor
of the result and cancellation is avoided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleError, ToleranceNotMetError
from .quadrature import QuadSpec, gauss_kronrod_panels

__all__ = [
    "KsqTailTable",
    "EvalResult",
    "gamma_real",
    "bessel_k_int",
    "bessel_k_int_result",
    "bessel_k_imag",
    "bessel_k_imag_array",
    "ksq_log_integral",
    "ksq_segments",
    "ksq_tail_cutoff",
]

_EPS = np.finfo(float).eps
# Trapezoid range: drop the integrand once it is below e^-_TAIL of its peak.
_TAIL = 46.0
_MAX_POINTS = 2 ** 17


@dataclass(frozen=True)
class EvalResult:
    value: float
    err_estimate: float
    evaluations: int
    underflow: bool = False

    def __post_init__(self):
        if self.err_estimate < 0:
            raise ValueError("err_estimate must be non-negative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be >= 1")

    def __float__(self):
        return float(self.value)


def gamma_real(x: float) -> float:
    """Gamma function of a real argument.

    Negative arguments use the reflection formula
    ``Gamma(x) = pi / (sin(pi x) Gamma(1 - x))``.
    """
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma_real has a pole at x = {x}")
    if x > 0:
        return math.gamma(x)
    return math.pi / (math.sin(math.pi * x) * math.gamma(1.0 - x))


def _trapezoid_k(order_re: float, order_im: float, x: np.ndarray, rtol: float):
    """Scaled trapezoidal evaluation for an array ``x``.

    Exactly one of ``order_re`` (integer order, cosh kernel) and ``order_im``
    (imaginary order, shifted contour) is non-zero, or both are zero (K_0).

    Returns ``(log_scale, scaled_value, scaled_error, evaluations)`` such that
    ``K = exp(log_scale) * scaled_value``.
    """
    n_ord = float(order_re)
    nu = float(order_im)
    if nu > 0:
        theta = np.arcsin(np.minimum(nu / x, 1.0))
        delta = min(math.pi / 4, 1.5 / nu)
        theta = np.minimum(theta, 0.5 * math.pi - delta)
    else:
        theta = np.zeros_like(x)
    c = np.cos(theta)
    s = np.sin(theta)
    a = x * c

    # Range: a (cosh U - 1) - n U >= _TAIL, relative to the peak of the
    # integrand (at u = 0 unless the cosh(n u) growth moves it outward).
    if n_ord > 0:
        upeak = np.arcsinh(np.maximum(n_ord / a, 0.0))
        # d/du [n u - a cosh u] = 0 at a sinh u = n.
        logpeak = n_ord * upeak - a * (np.cosh(upeak) - 1.0)
        target = _TAIL + np.maximum(logpeak, 0.0)
        U = np.arccosh(1.0 + target / a)
        for _ in range(30):
            U = np.arccosh(1.0 + (target + n_ord * U) / a)
    else:
        U = np.arccosh(1.0 + _TAIL / a)

    nx = x.size
    value = np.empty(nx)
    error = np.empty(nx)
    done = np.zeros(nx, dtype=bool)
    prev = None
    npts = 8
    evals = 0
    while True:
        todo = ~done
        idx = np.flatnonzero(todo)
        k = np.arange(npts + 1)
        u = U[idx, None] * (k[None, :] / npts)
        ai = a[idx, None]
        if nu > 0:
            f = np.exp(-ai * (np.cosh(u) - 1.0)) * np.cos(nu * u - (x[idx] * s[idx])[:, None] * np.sinh(u))
        elif n_ord > 0:
            # cosh(n u) e^{-a (cosh u - 1)} written as a sum of exponentials.
            em = np.exp(-ai * (np.cosh(u) - 1.0) - n_ord * u)
            ep = np.exp(-ai * (np.cosh(u) - 1.0) + n_ord * u)
            f = 0.5 * (em + ep)
        else:
            f = np.exp(-ai * (np.cosh(u) - 1.0))
        f[:, 0] *= 0.5
        f[:, -1] *= 0.5
        h = U[idx] / npts
        T = h * f.sum(axis=1)
        floor = 16 * _EPS * h * np.abs(f).sum(axis=1)
        evals += npts + 1
        if prev is not None:
            d = np.abs(T - prev[idx])
            ok = d <= rtol * np.abs(T) + floor
            value[idx] = T
            error[idx] = np.maximum(d, floor)
            done[idx[ok]] = True
            if done.all() or npts >= _MAX_POINTS:
                break
        prev = np.empty(nx)
        prev[idx] = T
        npts *= 2
    log_scale = -a - nu * theta
    return log_scale, value, error, evals, done


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("Bessel K requires x > 0")
    return x


def bessel_k_int_result(order: int, x: float, rtol: float = 1e-14) -> EvalResult:
    """``K_order(x)`` for order in {0, 1, 2} with an error estimate.

    ``underflow`` is set when the result is below the smallest normal double
    (the value is then rounded, possibly to zero).
    """
    if order not in (0, 1, 2):
        raise DomainError("bessel_k_int supports orders 0, 1, 2")
    xa = _check_x(np.atleast_1d(x))
    log_scale, val, err, evals, _ = _trapezoid_k(order, 0.0, xa, rtol)
    factor = math.exp(log_scale[0])
    underflow = log_scale[0] + math.log(max(val[0], 1e-300)) < math.log(np.finfo(float).tiny)
    return EvalResult(float(val[0] * factor), float(err[0] * factor), evals, bool(underflow))


def bessel_k_int(order: int, x):
    """Modified Bessel function ``K_n(x)`` for integer order ``n`` in {0, 1, 2}.

    Accepts a scalar or an array of positive ``x``.
    """
    if order not in (0, 1, 2):
        raise DomainError("bessel_k_int supports orders 0, 1, 2")
    scalar = np.ndim(x) == 0
    xa = _check_x(np.atleast_1d(x)).ravel()
    log_scale, val, _, _, _ = _trapezoid_k(order, 0.0, xa, 1e-14)
    with np.errstate(under="ignore"):
        out = val * np.exp(log_scale)
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def bessel_k_imag_array(nu: float, x, rtol: float = 1e-13):
    """Vectorised ``K_{i nu}(x)`` returning ``(values, errors, evaluations)``."""
    nu = float(nu)
    if not nu >= 0:
        raise DomainError("bessel_k_imag requires nu >= 0")
    xa = _check_x(np.atleast_1d(x)).ravel()
    log_scale, val, err, evals, _ = _trapezoid_k(0.0, nu, xa, rtol)
    with np.errstate(under="ignore"):
        scale = np.exp(log_scale)
    return val * scale, err * scale, evals


def bessel_k_imag(nu: float, x):
    """Real-valued ``K_{i nu}(x)`` for ``nu >= 0`` and ``x > 0``.

    Scalar in, scalar out; arrays of ``x`` are evaluated together.
    """
    scalar = np.ndim(x) == 0
    vals, _, _ = bessel_k_imag_array(nu, x)
    return float(vals[0]) if scalar else vals.reshape(np.shape(x))


def ksq_tail_cutoff(tol: float) -> float:
    r"""Point ``X`` beyond which ``int_X^inf K_{i nu}(t)^2 dt / t <= tol``.

    Uses ``|K_{i nu}(t)| <= K_0(t) <= sqrt(pi / 2t) e^{-t}`` so the tail is
    bounded by ``pi e^{-2X} / (4 X^2)``.
    """
    X = 1.0
    for _ in range(60):
        X_new = 0.5 * math.log(math.pi / (4.0 * tol * X * X))
        X_new = max(X_new, 1.0)
        if abs(X_new - X) < 1e-12:
            break
        X = X_new
    return X


def _ksq_integrand(nu: float, rtol: float):
    def f(u):
        k, _, _ = bessel_k_imag_array(nu, np.exp(u), rtol)
        return k * k
    return f


def _log_panels(nu: float, ulo: float, uhi: float) -> np.ndarray:
    # Panels no wider than a quarter of the oscillation period 2 pi / nu in the
    # region chi < nu, and no wider than 1 elsewhere.
    edges = [ulo]
    u_osc = math.log(nu) if nu > 0 else -math.inf
    quarter = 0.5 * math.pi / nu if nu > 0 else math.inf
    u = ulo
    while u < uhi:
        step = min(quarter, 1.0) if u < u_osc else 1.0
        u = min(u + step, uhi)
        edges.append(u)
    return np.asarray(edges)


def ksq_segments(nu: float, bounds, rel_tol: float = 1e-10, abs_floor: float = 1e-300,
                 max_rounds: int = 40):
    r"""Integrals of ``K_{i nu}(t)^2 / t`` between consecutive ``bounds``.

    ``bounds`` is an increasing array of finite positive points. All segments
    are refined together: the integrand is positive, so each segment is held
    to ``rel_tol`` relative accuracy (or ``abs_floor``). Returns
    ``(values, errors, evaluations, converged)``.
    """
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 1 or b.size < 2:
        raise DomainError("need at least two bounds")
    if np.any(b <= 0) or np.any(np.diff(b) < 0):
        raise DomainError("bounds must be positive and non-decreasing")
    ub = np.log(b)
    nseg = b.size - 1
    f = _ksq_integrand(nu, min(1e-12, 0.01 * rel_tol))

    # Seed panels, remembering which segment each panel belongs to.
    lo_list, hi_list, owner = [], [], []
    for i in range(nseg):
        if ub[i + 1] <= ub[i]:
            continue
        e = _log_panels(nu, ub[i], ub[i + 1])
        lo_list.append(e[:-1])
        hi_list.append(e[1:])
        owner.append(np.full(e.size - 1, i))
    values = np.zeros(nseg)
    errors = np.zeros(nseg)
    if not lo_list:
        return values, errors, 1, True
    lo = np.concatenate(lo_list)
    hi = np.concatenate(hi_list)
    own = np.concatenate(owner)
    vals, errs, _ = gauss_kronrod_panels(f, lo, hi)
    evals = vals.size * 21
    converged = False
    for _ in range(max_rounds):
        seg_val = np.bincount(own, weights=vals, minlength=nseg)
        seg_err = np.bincount(own, weights=errs, minlength=nseg)
        seg_tol = np.maximum(rel_tol * np.abs(seg_val), abs_floor)
        bad_seg = seg_err > seg_tol
        if not bad_seg.any():
            converged = True
            break
        # Within failing segments, split panels carrying more than their
        # width-share of the segment tolerance.
        width = hi - lo
        seg_width = np.bincount(own, weights=width, minlength=nseg)
        share = seg_tol[own] * width / seg_width[own]
        split = bad_seg[own] & (errs > share)
        # Guarantee progress in every failing segment.
        for s in np.flatnonzero(bad_seg):
            members = np.flatnonzero(own == s)
            if not split[members].any():
                split[members[np.argmax(errs[members])]] = True
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_own = np.concatenate([own[split], own[split]])
        nv, ne, _ = gauss_kronrod_panels(f, new_lo, new_hi)
        evals += nv.size * 21
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        own = np.concatenate([own[keep], new_own])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
    values = np.bincount(own, weights=vals, minlength=nseg)
    errors = np.bincount(own, weights=errs, minlength=nseg)
    return values, errors, evals, converged


def ksq_log_integral(nu: float, x_lo: float, x_hi: float,
                     spec: QuadSpec | None = None) -> EvalResult:
    r"""``int_{x_lo}^{x_hi} K_{i nu}(t)^2 dt / t`` with ``x_hi`` possibly infinite.

    Integrates in ``u = ln t``, where the small-``t`` oscillation of
    ``K_{i nu}`` is nearly periodic with period ``2 pi / nu``. An infinite upper
    limit is truncated at the point where the analytic envelope bound of the
    tail falls below ``0.01 * abs_tol``; that bound is added to the error.

    Raises
    ------
    ToleranceNotMetError
        If refinement stops short of the tolerance; ``best`` carries the
        estimate.
    """
    spec = spec or QuadSpec()
    nu = float(nu)
    if not nu >= 0:
        raise DomainError("nu must be non-negative")
    if not (x_lo > 0) or not (x_hi >= x_lo) or math.isnan(x_hi):
        raise DomainError("require 0 < x_lo <= x_hi")
    if x_hi == x_lo:
        return EvalResult(0.0, 0.0, 1)
    tail = 0.0
    upper = x_hi
    if math.isinf(x_hi):
        cut = ksq_tail_cutoff(0.01 * spec.abs_tol)
        if cut <= x_lo:
            # Whole range lies in the certified tail; integrate a finite
            # stretch and bound the rest.
            cut = x_lo + 40.0
        tail = math.pi * math.exp(-2 * cut) / (4 * cut * cut)
        upper = cut
    vals, errs, evals, ok = ksq_segments(nu, [x_lo, upper], rel_tol=spec.rel_tol,
                                         abs_floor=0.5 * spec.abs_tol)
    result = EvalResult(float(vals[0]), float(errs[0]) + tail, evals)
    if not ok:
        raise ToleranceNotMetError(
            f"ksq_log_integral(nu={nu}, {x_lo}, {x_hi}) did not reach tolerance", best=result)
    return result


# Chebyshev points of the first kind on [-1, 1] and the matching
# value-to-coefficient transform.
_NCHEB = 24
_CHEB_T = np.cos(np.pi * (np.arange(_NCHEB) + 0.5) / _NCHEB)[::-1]
_CHEB_MAT = np.cos(np.outer(np.arange(_NCHEB), np.pi * (np.arange(_NCHEB) + 0.5) / _NCHEB))[:, ::-1]


def _cheb_coeffs(fvals):
    c = (2.0 / _NCHEB) * fvals @ _CHEB_MAT.T
    c[:, 0] *= 0.5
    return c


def _cheb_eval(coeffs, t):
    """Evaluate row-wise Chebyshev series ``coeffs[i]`` at ``t[i]`` (Clenshaw)."""
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for k in range(coeffs.shape[1] - 1, 0, -1):
        b1, b2 = 2.0 * t * b1 - b2 + coeffs[:, k], b1
    return t * b1 - b2 + coeffs[:, 0]


def _cheb_integral(coeffs):
    # Coefficients of the antiderivative (constant term left at zero).
    n = coeffs.shape[1]
    c = np.concatenate([coeffs, np.zeros((coeffs.shape[0], 2))], axis=1)
    out = np.zeros((coeffs.shape[0], n + 1))
    out[:, 1] = c[:, 0] - 0.5 * c[:, 2]
    for k in range(2, n + 1):
        out[:, k] = (c[:, k - 1] - c[:, k + 1]) / (2.0 * k)
    return out


class KsqTailTable:
    r"""Cached tail integral ``G(z) = int_z^X K_{i nu}(t)^2 dt / t`` for one order.

    ``K_{i nu}(e^u)^2`` is represented on ``[ln z_min, ln X]`` by piecewise
    Chebyshev interpolants (24 points per panel), refined until the trailing
    coefficients meet ``rel_tol`` relative to the panel integral or the
    ``abs_floor`` share of the panel. The antiderivative of each interpolant
    gives ``G`` anywhere in the range at negligible cost, which is what lets
    a k-integral over inner chi-integrals reuse one table per frequency.
    Beyond ``X`` the analytic envelope bound (at most
    ``pi e^{-2X} / (4 X^2)``) is reported as error, not added.
    """

    def __init__(self, nu: float, z_min: float, z_max: float, rel_tol: float = 1e-10,
                 abs_floor: float = 0.0, max_panels: int = 4000):
        if not (0 < z_min < z_max):
            raise DomainError("require 0 < z_min < z_max")
        self.nu = float(nu)
        self.rel_tol = rel_tol
        self.abs_floor = abs_floor
        self.max_panels = max_panels
        self.z_max = float(z_max)
        self.tail_bound = math.pi * math.exp(-2 * z_max) / (4 * z_max * z_max)
        self.evaluations = 0
        self.converged = True
        self._k_rtol = min(1e-12, 0.01 * rel_tol)
        u_lo, u_hi = math.log(z_min), math.log(z_max)
        self._edges_lo = np.empty(0)
        self._edges_hi = np.empty(0)
        self._coef = np.empty((0, _NCHEB))
        self._build(u_lo, u_hi)

    @property
    def u_min(self):
        return float(self._edges_lo[0])

    def _initial_edges(self, u_lo, u_hi):
        nu = self.nu
        u_osc = math.log(nu) + 1.0 if nu > 0 else -math.inf
        width_osc = min(1.0, 5.0 / nu) if nu > 0 else 1.0
        edges = [u_lo]
        u = u_lo
        while u < u_hi - 1e-14:
            step = width_osc if u < u_osc else 1.0
            u = min(u + step, u_hi)
            edges.append(u)
        return np.asarray(edges)

    def _fit(self, lo, hi):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        u = mid[:, None] + half[:, None] * _CHEB_T[None, :]
        k, _, _ = bessel_k_imag_array(self.nu, np.exp(u.ravel()), self._k_rtol)
        self.evaluations += u.size
        f = (k * k).reshape(u.shape)
        coef = _cheb_coeffs(f)
        integral = half * 2.0 * np.sum(coef[:, ::2] / (1.0 - np.arange(0, _NCHEB, 2) ** 2), axis=1)
        # Trailing coefficients estimate the interpolation error of the panel.
        tail = np.max(np.abs(coef[:, -4:]), axis=1) + 2 * _EPS * np.max(np.abs(coef), axis=1)
        err = 2.0 * half * tail
        return coef, integral, err

    def _build(self, u_lo, u_hi):
        span = u_hi - u_lo
        edges = self._initial_edges(u_lo, u_hi)
        lo, hi = edges[:-1], edges[1:]
        done_lo, done_hi, done_c, done_i, done_e = [], [], [], [], []
        while lo.size:
            coef, integ, err = self._fit(lo, hi)
            tol = np.maximum(self.rel_tol * np.abs(integ), self.abs_floor * (hi - lo) / max(span, 1e-300))
            ok = err <= tol
            if len(done_lo) + lo.size > self.max_panels:
                ok[:] = True
                self.converged = False
            done_lo.append(lo[ok]); done_hi.append(hi[ok]); done_c.append(coef[ok])
            done_i.append(integ[ok]); done_e.append(err[ok])
            bad = ~ok
            mid = 0.5 * (lo[bad] + hi[bad])
            lo, hi = np.concatenate([lo[bad], mid]), np.concatenate([mid, hi[bad]])
        lo = np.concatenate(done_lo + [self._edges_lo])
        hi = np.concatenate(done_hi + [self._edges_hi])
        coef = np.concatenate(done_c + [self._coef])
        order = np.argsort(lo)
        self._edges_lo, self._edges_hi, self._coef = lo[order], hi[order], coef[order]
        # Recompute panel integrals/errors for the merged set.
        half = 0.5 * (self._edges_hi - self._edges_lo)
        even = np.arange(0, _NCHEB, 2)
        self._panel_int = half * 2.0 * np.sum(self._coef[:, ::2] / (1.0 - even ** 2), axis=1)
        tail = np.max(np.abs(self._coef[:, -4:]), axis=1) + 2 * _EPS * np.max(np.abs(self._coef), axis=1)
        self._panel_err = 2.0 * half * tail
        self._icoef = _cheb_integral(self._coef)
        # G at each panel's right edge, accumulated from the top.
        rev_int = np.cumsum(self._panel_int[::-1])[::-1]
        rev_err = np.cumsum(self._panel_err[::-1])[::-1]
        self._g_right = np.append(rev_int[1:], 0.0)
        self._e_right = np.append(rev_err[1:], 0.0)
        self._p_right = _cheb_eval(self._icoef, np.ones(len(half)))

    def extend_down(self, z_min: float):
        """Grow the table towards smaller arguments; existing values are kept."""
        u_new = math.log(z_min)
        if u_new < self.u_min:
            self._build(u_new, self.u_min)

    def _locate(self, u):
        i = np.searchsorted(self._edges_hi, u, side="left")
        i = np.clip(i, 0, self._edges_lo.size - 1)
        half = 0.5 * (self._edges_hi[i] - self._edges_lo[i])
        t = (u - 0.5 * (self._edges_hi[i] + self._edges_lo[i])) / half
        return i, np.clip(t, -1.0, 1.0), half

    def tail(self, z):
        """Return ``(G(z), err)`` for scalar or array ``z`` (``G = 0`` above ``X``)."""
        if np.ndim(z) == 0:
            g, e = self.tail(np.atleast_1d(z))
            return float(g[0]), float(e[0])
        z = np.asarray(z, dtype=float)
        u = np.log(z)
        if np.any(u < self.u_min - 1e-12):
            raise DomainError("query below the tabulated range; call extend_down first")
        above = u >= math.log(self.z_max)
        i, t, half = self._locate(np.minimum(u, math.log(self.z_max)))
        partial = half * (self._p_right[i] - _cheb_eval(self._icoef[i], t))
        g = np.where(above, 0.0, self._g_right[i] + partial)
        frac = np.where(above, 0.0, (1.0 - t) / 2.0)
        e = np.where(above, 0.0, self._e_right[i] + frac * self._panel_err[i])
        # Tail beyond X, bounded analytically.
        zc = np.maximum(z, self.z_max)
        e = e + math.pi * np.exp(-2 * zc) / (4 * zc * zc)
        return g, e

    def integrand(self, z):
        """Interpolated ``K_{i nu}(z)^2``."""
        if np.ndim(z) == 0:
            return float(self.integrand(np.atleast_1d(z))[0])
        u = np.log(np.asarray(z, dtype=float))
        i, t, _ = self._locate(u)
        return _cheb_eval(self._coef[i], t)

    def between(self, z_lo, z_hi):
        """``int_{z_lo}^{z_hi} K^2 dt/t`` for paired arrays; short intervals are
        integrated directly on the interpolant to avoid cancellation."""
        if np.ndim(z_lo) == 0 and np.ndim(z_hi) == 0:
            v, e = self.between(np.atleast_1d(z_lo), np.atleast_1d(z_hi))
            return float(v[0]), float(e[0])
        z_lo = np.asarray(z_lo, dtype=float)
        z_hi = np.asarray(z_hi, dtype=float)
        g_lo, e_lo = self.tail(z_lo)
        g_hi, e_hi = self.tail(z_hi)
        val = g_lo - g_hi
        err = np.abs(e_lo - e_hi) + self.rel_tol * np.abs(val)
        width = np.log(z_hi) - np.log(z_lo)
        short = (width < 1e-2) & (z_hi <= self.z_max)
        if np.any(short):
            ul = np.log(z_lo[short])
            w = width[short]
            xg, wg = np.polynomial.legendre.leggauss(8)
            uu = ul[:, None] + 0.5 * w[:, None] * (xg[None, :] + 1.0)
            fv = self.integrand(np.exp(uu.ravel())).reshape(uu.shape)
            val = val.copy()
            val[short] = 0.5 * w * (fv @ wg)
            err = err.copy()
            err[short] = self.rel_tol * np.abs(val[short])
        return val, err
