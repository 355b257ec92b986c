"""Particle census of the Minkowski vacuum inside a uniformly accelerated box.

Everything here works in natural units (hbar = c = 1) with lengths in metres
and masses as inverse metres (``m = 1 / reduced Compton wavelength``). The
census for a box spanning ``chi1 <= chi <= chi2`` above the Rindler horizon,
with transverse area ``s_perp``, reduces to

    N = s_perp / (2 pi^3 chi1^2) * I(mu, rho),      mu = m chi1,  rho = chi2 / chi1,

    I = int dW W e^{-pi W} int dk k int_{kappa}^{rho kappa} dx/x K_{iW}(x)^2,
    kappa = sqrt(k^2 + mu^2),

so the physics depends on the box only through ``mu``, ``rho`` and
``s_perp / chi1^2``. Tolerances in :class:`NumericsConfig` refer to ``I``.

Integration order is outer ``W`` (frequency in units of the acceleration),
middle ``k`` (rescaled transverse momentum, integrated in ``ln k``), inner
``x``. The inner integral is read from a per-frequency
:class:`~unruh_census.specfun.KsqTailTable`, so every ``k`` node at a given
``W`` reuses the same Bessel evaluations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import DomainError, ThresholdUndefinedError, ToleranceNotMetError
from .quadrature import QuadResult, QuadSpec, integrate_finite
from .specfun import KsqTailTable, bessel_k_imag, bessel_k_imag_array, bessel_k_int

__all__ = [
    "FieldSpec",
    "DetectorBox",
    "NumericsConfig",
    "CensusResult",
    "RegimeTag",
    "rindler_mode_amplitude",
    "thermal_occupancy",
    "operator_weight_ratio",
    "census_exact",
    "census_reduced",
    "constant_C",
    "constant_D",
    "census_high_acc_limit",
    "census_low_acc_limit",
    "sudden_birth_threshold",
    "classify_regime",
    "MASSIVE_HIGH_ACC_MU",
]

#: ``m chi1`` at or below which a massive field counts as deep in the
#: high-acceleration regime (the "mu << 1" condition).
MASSIVE_HIGH_ACC_MU = 0.1

# Distance beyond max(mu, 1) at which the inner tables stop. K^2 there is
# below e^{-40} relative to its value at the lower end.
_TABLE_MARGIN = 20.0


@dataclass(frozen=True)
class FieldSpec:
    """Scalar field of mass ``mass`` (inverse metres; 0 for massless)."""

    mass: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass >= 0):
            raise DomainError(f"mass must be finite and >= 0, got {self.mass!r}")

    @property
    def massless(self) -> bool:
        return self.mass == 0.0


@dataclass(frozen=True)
class DetectorBox:
    """Box from ``chi1`` to ``chi2`` above the horizon with transverse area ``s_perp``."""

    chi1: float
    chi2: float
    s_perp: float

    def __post_init__(self):
        for name in ("chi1", "chi2", "s_perp"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if not self.chi1 > 0:
            raise DomainError(f"chi1 must be > 0, got {self.chi1!r}")
        if not self.chi2 >= self.chi1:
            raise DomainError(f"require chi1 <= chi2, got {self.chi1!r} > {self.chi2!r}")
        if not self.s_perp > 0:
            raise DomainError(f"s_perp must be > 0, got {self.s_perp!r}")

    @classmethod
    def from_acceleration(cls, a1: float, length: float, s_perp: float) -> "DetectorBox":
        """Box whose near face has proper acceleration ``a1`` and depth ``length``."""
        if not (a1 > 0 and math.isfinite(a1)):
            raise DomainError(f"a1 must be positive and finite, got {a1!r}")
        if not length >= 0:
            raise DomainError(f"length must be >= 0, got {length!r}")
        chi1 = 1.0 / a1
        return cls(chi1, chi1 + length, s_perp)

    @property
    def a1(self) -> float:
        """Peak proper acceleration ``1/chi1`` (inverse metres)."""
        return 1.0 / self.chi1

    @property
    def length(self) -> float:
        return self.chi2 - self.chi1

    @property
    def volume(self) -> float:
        return self.s_perp * (self.chi2 - self.chi1)

    @property
    def aspect(self) -> float:
        """``chi2 / chi1``."""
        return self.chi2 / self.chi1


@dataclass(frozen=True)
class NumericsConfig:
    """Cutoffs and tolerances for the census integrals.

    Parameters
    ----------
    omega_tilde_max : float
        Upper limit of the frequency integral. The neglected tail is bounded
        analytically and added to the error estimate.
    kprime_max : float or None
        Upper limit of the rescaled transverse momentum; ``None`` picks
        ``max(m chi1, 1) + 20`` where the Bessel envelope makes the rest
        negligible.
    quad : QuadSpec
        Tolerances on the dimensionless reduced integral ``I``.
    """

    omega_tilde_max: float = 12.0
    kprime_max: Optional[float] = None
    quad: QuadSpec = dc_field(default_factory=lambda: QuadSpec(rel_tol=1e-8, abs_tol=1e-16))

    def __post_init__(self):
        if not (self.omega_tilde_max > 0 and math.isfinite(self.omega_tilde_max)):
            raise DomainError("omega_tilde_max must be positive and finite")
        if self.kprime_max is not None and not self.kprime_max > 0:
            raise DomainError("kprime_max must be positive")
        if not math.exp(-math.pi * self.omega_tilde_max) < self.quad.abs_tol:
            raise DomainError(
                f"omega_tilde_max = {self.omega_tilde_max} leaves a tail "
                f"e^(-pi*W) = {math.exp(-math.pi * self.omega_tilde_max):.3g} "
                f"that is not below abs_tol = {self.quad.abs_tol:.3g}")


class RegimeTag(str, enum.Enum):
    SUPPRESSED = "suppressed"
    HIGH_ACCELERATION = "high_acceleration"
    LOW_ACCELERATION_MASSLESS = "low_acceleration_massless"
    CROSSOVER = "crossover"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CensusResult:
    """Expected particle number in the box, with an error estimate."""

    expectation: float
    err_estimate: float
    regime: RegimeTag
    converged: bool = True
    evaluations: int = 0

    def __post_init__(self):
        if not self.expectation >= 0:
            raise ValueError(f"expectation must be >= 0, got {self.expectation!r}")
        if not self.err_estimate >= 0:
            raise ValueError(f"err_estimate must be >= 0, got {self.err_estimate!r}")


# --------------------------------------------------------------------------
# Mode functions and small closed forms


def rindler_mode_amplitude(omega_tilde: float, kappa: float, chi: float, a: float) -> float:
    r"""Magnitude of a right-wedge Rindler mode at distance ``chi`` from the horizon.

    Returns :math:`\sqrt{\sinh(\pi\tilde\Omega)/(4\pi^4 a)}\,K_{i\tilde\Omega}(\kappa\chi)`,
    the plane-wave phase in ``(tau, x_perp)`` being omitted. ``a`` is the
    arbitrary Rindler normalisation parameter; no census depends on it.
    """
    for name, v in (("omega_tilde", omega_tilde), ("kappa", kappa), ("chi", chi), ("a", a)):
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"{name} must be positive and finite, got {v!r}")
    x = math.pi * omega_tilde
    # log sinh(x), stable for large x
    log_sinh = x + math.log1p(-math.exp(-2 * x)) - math.log(2.0)
    prefactor = math.exp(0.5 * (log_sinh - math.log(4 * math.pi ** 4 * a)))
    return prefactor * bessel_k_imag(omega_tilde, kappa * chi)


def thermal_occupancy(omega_tilde):
    """Bose-Einstein occupation ``1 / (exp(2 pi W) - 1)`` at Unruh temperature.

    Accepts scalars or arrays; ``W`` must be strictly positive.
    """
    w = np.asarray(omega_tilde, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("thermal occupancy diverges at omega_tilde <= 0")
    out = 1.0 / np.expm1(2 * np.pi * w)
    return float(out) if out.ndim == 0 else out


def operator_weight_ratio(omega: float, omega_prime: float) -> float:
    """Relative weight ``(W + W') / (2 sqrt(W W'))`` of the two number-operator forms.

    The two candidate number operators differ only by this factor inside the
    frequency double integral. It equals 1 exactly on the diagonal, which is
    all a thermal (delta-correlated) state such as the Minkowski vacuum probes.
    """
    if not (omega > 0 and omega_prime > 0):
        raise DomainError("frequencies must be positive")
    if omega == omega_prime:
        return 1.0
    r = math.sqrt(omega / omega_prime)
    return 0.5 * (r + 1.0 / r)


# --------------------------------------------------------------------------
# The census integral


def _small_k_bound(k: float, mu: float, rho: float) -> float:
    """Bound on ``int_0^k k' dG dk'`` (the part of the middle integral below ``k``).

    Uses ``|K_{iW}(x)| <= K_0(x) <= ln(2/x)`` for ``x <= 1`` and, for massive
    fields, ``K_0(kappa) <= K_0(mu)``.
    """
    L = math.log(2.0 / k)
    if math.isinf(rho):
        per = (L ** 3 + 1.5 * L * L + 1.5 * L + 0.75) / 3.0 + 0.2
        if mu > 0:
            per = min(per, float(_g0_upper(mu)))
    else:
        lr = math.log(rho)
        per = lr * (L * L + L + 0.5)
        if mu > 0:
            per = min(per, lr * float(bessel_k_int(0, mu)) ** 2)
    return 0.5 * k * k * per


def _g0_upper(mu: float) -> float:
    # int_mu^inf K_0^2 dx/x <= K_0(mu)^2 ln(...) is awkward; a safe cover is
    # K_0(mu)^2 * (1 + ln^+(1/mu)) + pi e^{-2 mu}/(4 mu^2) for every mu > 0.
    k0 = float(bessel_k_int(0, mu))
    return k0 * k0 * (1.0 + max(0.0, math.log(1.0 / mu))) + math.pi * math.exp(-2 * mu) / (4 * mu * mu)


def _mass_ceiling(mu: float) -> float:
    """Frequency-independent bound on ``M(W)`` for a massive field.

    ``M <= (1/2) int_mu^inf x K_0(x)^2 dx = (mu^2/4) (K_1(mu)^2 - K_0(mu)^2)``,
    from the antiderivative ``(x^2/2)(K_0^2 - K_1^2)`` of ``x K_0^2``.
    """
    if mu == 0:
        return math.inf
    k0 = float(bessel_k_int(0, mu))
    k1 = float(bessel_k_int(1, mu))
    return 0.25 * mu * mu * (k1 - k0) * (k1 + k0)


def _middle(nu: float, mu: float, rho: float, k_hi: float, rel_tol: float,
            abs_tol: float, mass_ceiling: float = math.inf):
    """``M(W) = int_0^inf dk k [G(kappa) - G(rho kappa)]`` at one frequency.

    Returns ``(value, err, evaluations, converged)``. ``rho = inf`` drops the
    upper inner limit (the integrand of the constant ``C``).
    """
    # M(W) <= pi W / (4 sinh pi W) for every mass and depth; when that is
    # already inside the budget the frequency contributes only as error.
    ceiling = math.pi * nu / (4 * math.sinh(math.pi * nu)) if nu > 0 else 0.25
    ceiling = min(ceiling, mass_ceiling)
    if ceiling <= abs_tol:
        return 0.0, ceiling, 0, True
    x_top = max(mu, 1.0) + _TABLE_MARGIN
    k_lo = 1e-4 * mu if mu > 0 else 1e-7
    for k_try in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        if k_try > k_lo and _small_k_bound(k_try, mu, rho) <= 0.1 * abs_tol:
            k_lo = k_try
            break
    # Table accuracy: relative part well inside the middle tolerance, absolute
    # part spread over the k-weight (int k dk up to k_hi).
    table = KsqTailTable(nu, math.hypot(k_lo, mu), max(x_top, math.hypot(k_hi, mu) * 1.0001),
                         rel_tol=0.05 * rel_tol, abs_floor=0.05 * abs_tol / (0.5 * k_hi * k_hi))
    infinite = math.isinf(rho)

    def integrand(s):
        k = np.exp(s)
        kappa = np.hypot(k, mu)
        if infinite:
            dg, de = table.tail(kappa)
        else:
            dg, de = table.between(kappa, rho * kappa)
        w = k * k
        return w * dg, w * de

    spec = QuadSpec(rel_tol=0.5 * rel_tol, abs_tol=0.5 * abs_tol)
    s_lo, s_hi = math.log(k_lo), math.log(k_hi)
    points = np.arange(math.ceil(s_lo), s_hi)
    res = integrate_finite(integrand, s_lo, s_hi, spec, points=points)
    value, err, evals, ok = res.value, res.err_estimate, res.evaluations, res.converged
    # Push the lower cutoff down until the analytic bound on the remainder is negligible.
    for _ in range(12):
        bound = _small_k_bound(k_lo, mu, rho)
        if bound <= 0.1 * max(abs_tol, rel_tol * abs(value)):
            break
        k_new = k_lo * 1e-2
        table.extend_down(math.hypot(k_new, mu))
        extra = integrate_finite(integrand, math.log(k_new), math.log(k_lo), spec,
                                 points=np.arange(math.ceil(math.log(k_new)), math.log(k_lo)))
        value += extra.value
        err += extra.err_estimate
        evals += extra.evaluations
        ok = ok and extra.converged
        k_lo = k_new
    else:
        ok = False
    err += _small_k_bound(k_lo, mu, rho)
    # Beyond k_hi: k G(kappa) <= (pi/4) e^{-2k}/k, integrated.
    err += math.pi / 8 * math.exp(-2 * k_hi) / (k_hi * k_hi)
    return value, err, evals + table.evaluations, ok and table.converged


def _outer_tail_bound(w_max: float, mass_ceiling: float = math.inf) -> float:
    # M(W) <= pi W / (4 sinh pi W); integrate W e^{-pi W} M(W) beyond w_max.
    x = 2 * math.pi * w_max
    massless = (math.pi / 2) * math.exp(-x) * (w_max ** 2 / (2 * math.pi) + w_max / (2 * math.pi ** 2)
                                               + 1 / (4 * math.pi ** 3)) / (-math.expm1(-x))
    # M(W) <= mass_ceiling; int_w^inf W e^{-pi W} dW = e^{-pi w} (w/pi + 1/pi^2).
    massive = mass_ceiling * math.exp(-math.pi * w_max) * (w_max / math.pi + 1 / math.pi ** 2)
    return min(massless, massive)


def _frequency_integral(middle, cfg: NumericsConfig, mass_ceiling: float = math.inf,
                        abs_tol: float | None = None):
    """Outer integral ``int_0^Wmax dW W e^{-pi W} M(W)``, propagating inner errors.

    The lightly damped range ``W < 3`` is done first; its value fixes the
    absolute error budget for the strongly damped remainder, where each
    frequency then only needs the accuracy its weight ``W e^{-pi W}`` calls for.
    """
    rel = cfg.quad.rel_tol
    w_max = cfg.omega_tilde_max
    abs_tol = cfg.quad.abs_tol if abs_tol is None else abs_tol
    low_spec = QuadSpec(rel_tol=rel, abs_tol=abs_tol, max_subdivisions=cfg.quad.max_subdivisions,
                        max_evaluations=cfg.quad.max_evaluations)
    work = {"evals": 0, "ok": True}

    def make_integrand(budget):
        def integrand(w):
            out = np.empty_like(w)
            err = np.empty_like(w)
            for i, nu in enumerate(w):
                weight = nu * math.exp(-math.pi * nu)
                val, e, n, ok = middle(nu, 0.1 * rel, 0.05 * budget / (weight * w_max))
                out[i] = weight * val
                err[i] = weight * e
                work["evals"] += n
                work["ok"] &= ok
            return out, err
        return integrand

    split = min(3.0, w_max)
    low = integrate_finite(make_integrand(abs_tol), 0.0, split, low_spec,
                           points=[1.0] if split > 1.0 else None)
    value, err, evals, ok = low.value, low.err_estimate, low.evaluations, low.converged
    if w_max > split:
        budget = low_spec.target(value)
        spec = QuadSpec(rel_tol=rel, abs_tol=0.5 * budget, max_subdivisions=cfg.quad.max_subdivisions,
                        max_evaluations=cfg.quad.max_evaluations)
        high = integrate_finite(make_integrand(budget), split, w_max, spec)
        value += high.value
        err += high.err_estimate
        evals += high.evaluations
        ok = ok and high.converged
    err += _outer_tail_bound(w_max, mass_ceiling)
    return QuadResult(value, err, evals + work["evals"], ok and work["ok"])


def census_reduced(mu: float, rho: float, cfg: NumericsConfig | None = None) -> QuadResult:
    """Dimensionless census integral ``I(mu, rho)``.

    ``N = s_perp / (2 pi^3 chi1^2) * I(m chi1, chi2/chi1)``. ``rho = inf`` is
    allowed and gives the high-acceleration constant ``2 pi^3 C`` at ``mu = 0``.
    """
    cfg = cfg or NumericsConfig()
    if not (mu >= 0 and math.isfinite(mu)):
        raise DomainError(f"mu must be finite and >= 0, got {mu!r}")
    if not rho >= 1:
        raise DomainError(f"rho must be >= 1, got {rho!r}")
    if rho == 1.0:
        return QuadResult(0.0, 0.0, 0, True)
    k_hi = cfg.kprime_max if cfg.kprime_max is not None else max(mu, 1.0) + _TABLE_MARGIN

    ceiling = _mass_ceiling(mu)
    if ceiling == 0.0:
        # K_0(mu)^2 underflows: I is below the smallest representable double.
        return QuadResult(0.0, 0.0, 0, True)
    # Deep in the suppressed regime the whole integral can fall below abs_tol;
    # tie the absolute floor to the mass bound so the relative target still holds.
    abs_tol = min(cfg.quad.abs_tol, 1e-3 * cfg.quad.rel_tol * ceiling / math.pi ** 2)

    def middle(nu, rel, abs_budget):
        return _middle(nu, mu, rho, k_hi, rel, abs_budget, ceiling)

    return _frequency_integral(middle, cfg, ceiling, abs_tol)


def census_exact(field: FieldSpec, box: DetectorBox, cfg: NumericsConfig | None = None,
                 *, strict: bool = False) -> CensusResult:
    """Expected number of Unruh particles inside ``box`` for the Minkowski vacuum.

    Parameters
    ----------
    field : FieldSpec
    box : DetectorBox
    cfg : NumericsConfig, optional
    strict : bool
        If True, raise :class:`ToleranceNotMetError` (carrying the best
        estimate) when any quadrature stops short of its tolerance. Otherwise
        the result is returned with ``converged = False``.

    Returns
    -------
    CensusResult
    """
    cfg = cfg or NumericsConfig()
    regime = classify_regime(field, box)
    if box.chi2 == box.chi1:
        return CensusResult(0.0, 0.0, regime)
    mu = field.mass * box.chi1
    rho = box.chi2 / box.chi1
    res = census_reduced(mu, rho, cfg)
    scale = box.s_perp / (2 * math.pi ** 3 * box.chi1 ** 2)
    out = CensusResult(max(res.value, 0.0) * scale, res.err_estimate * scale, regime,
                       res.converged, res.evaluations)
    if strict and not res.converged:
        raise ToleranceNotMetError("census quadrature did not reach its tolerance", best=out)
    return out


def _scaled_constant(res: QuadResult, name: str, full: bool):
    scale = 1.0 / (2 * math.pi ** 3)
    out = QuadResult(res.value * scale, res.err_estimate * scale, res.evaluations, res.converged)
    if not res.converged:
        raise ToleranceNotMetError(f"constant {name} did not converge", best=out)
    return out if full else out.value


def constant_C(cfg: NumericsConfig | None = None, *, full: bool = False):
    r"""High-acceleration coefficient :math:`C` in ``N ~ C S_perp a1^2``.

    Evaluated as the massless reduced census with the far face at infinity.
    Returns a float, or the :class:`QuadResult` (with error estimate) when
    ``full`` is True. Raises :class:`ToleranceNotMetError` on non-convergence.
    """
    return _scaled_constant(census_reduced(0.0, math.inf, cfg), "C", full)


def constant_D(cfg: NumericsConfig | None = None, *, full: bool = False):
    r"""Thin-box coefficient :math:`D` in ``N ~ D V a1^3`` (massless field).

    ``D = (1/2 pi^3) int dW W e^{-pi W} int dk k K_{iW}(k)^2``. Return
    convention as for :func:`constant_C`.
    """
    cfg = cfg or NumericsConfig()
    x_top = 1.0 + _TABLE_MARGIN

    def middle(nu, rel, abs_tol):
        def integrand(s):
            k = np.exp(s)
            kv, ke, _ = bessel_k_imag_array(nu, k, rtol=min(1e-12, 0.01 * rel))
            return k * k * kv * kv, 2 * k * k * np.abs(kv) * ke

        spec = QuadSpec(rel_tol=0.5 * rel, abs_tol=0.5 * abs_tol)
        k_lo = 1e-4
        total = integrate_finite(integrand, math.log(k_lo), math.log(x_top), spec,
                                 points=np.arange(-9.0, math.log(x_top)))
        value, err, n, ok = total.value, total.err_estimate, total.evaluations, total.converged
        # int_0^k t K_0(t)^2 dt <= (k^2/2)(L^2 + L + 1/2), L = ln(2/k)
        while True:
            L = math.log(2 / k_lo)
            bound = 0.5 * k_lo ** 2 * (L * L + L + 0.5)
            if bound <= 0.01 * max(abs_tol, rel * abs(value)) or k_lo < 1e-30:
                break
            extra = integrate_finite(integrand, math.log(k_lo * 1e-2), math.log(k_lo), spec)
            value += extra.value
            err += extra.err_estimate
            n += extra.evaluations
            ok = ok and extra.converged
            k_lo *= 1e-2
        err += bound + math.pi / 8 * math.exp(-2 * x_top)
        return value, err, n, ok

    return _scaled_constant(_frequency_integral(middle, cfg), "D", full)


def census_high_acc_limit(s_perp: float, a1: float, C_value: float) -> float:
    """High-acceleration asymptote ``C * s_perp * a1^2`` (any mass, any depth)."""
    if not (s_perp > 0 and a1 > 0 and C_value > 0):
        raise DomainError("s_perp, a1 and C must be positive")
    return C_value * s_perp * a1 * a1


def census_low_acc_limit(volume: float, a1: float, D_value: float) -> float:
    """Thin-box asymptote ``D * V * a1^3`` for a massless field."""
    if not (volume > 0 and a1 > 0 and D_value > 0):
        raise DomainError("volume, a1 and D must be positive")
    return D_value * volume * a1 ** 3


def sudden_birth_threshold(field: FieldSpec) -> float:
    """Acceleration ``a1 = m`` (inverse metres) at which the census switches on.

    Equality is the convention; below it the census is exponentially small.
    The corresponding ``chi1`` is the reduced Compton wavelength.
    """
    if field.massless:
        raise ThresholdUndefinedError("a massless field has no sudden-birth threshold")
    return field.mass


def classify_regime(field: FieldSpec, box: DetectorBox) -> RegimeTag:
    """Tag the parameter point with its asymptotic regime.

    ``m chi1 > 1`` is suppressed. Massless boxes with ``chi2/chi1 - 1 <= 1``
    are in the thin-box (low-acceleration) regime and deeper ones in the
    high-acceleration regime. Massive fields count as high-acceleration when
    ``m chi1 <= MASSIVE_HIGH_ACC_MU``; everything else is crossover.
    """
    mu = field.mass * box.chi1
    if mu > 1:
        return RegimeTag.SUPPRESSED
    if field.massless:
        if box.aspect - 1 <= 1:
            return RegimeTag.LOW_ACCELERATION_MASSLESS
        return RegimeTag.HIGH_ACCELERATION
    if mu <= MASSIVE_HIGH_ACC_MU:
        return RegimeTag.HIGH_ACCELERATION
    return RegimeTag.CROSSOVER
