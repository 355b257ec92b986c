"""Equal-time commutators of the Minkowski particle-number density.

The commutator of the density at two points splits into a local contact term
(proportional to ``i delta^3(x1 - x2)``) and smooth nonlocal coefficient
functions multiplying antisymmetric operator combinations of the positive and
negative frequency field parts. Those coefficients reduce to radial momentum
integrals of the form

    1 / (4 pi^2 r) * int_0^inf dk k w(k) sin(k r),

with ``w = 1/sqrt(k^2 + m^2)`` for the field-field part and
``w = sqrt(k^2 + m^2)`` for the momentum-momentum part. Both integrals
diverge and are assigned their Abel values; the sine-transform identity

    int_0^inf dx x sin(xy) / (x^2 + a^2)^(3/2 - nu)
        = sqrt(pi) (2a)^nu / (2 Gamma(3/2 - nu)) y^(1 - nu) K_nu(a y)

turns them into modified Bessel functions. Two closed forms with different
prefactors are in circulation for these coefficients; both are provided and
:func:`comm_oracle` (Abel-regularised momentum-space quadrature) decides
which one is right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence

import numpy as np

from .errors import DomainError, ExtrapolationError
from .quadrature import (QuadResult, QuadSpec, chebyshev_ladder, integrate_oscillatory_abel,
                         integrate_sine_direct)
from .specfun import bessel_k_int, gamma_real

__all__ = [
    "ContactTerm",
    "CommutatorCoefficients",
    "DiscrepancyRow",
    "FORMS",
    "VALIDATED_FORM",
    "contact_terms",
    "comm_phiphi_closed",
    "comm_pipi_closed",
    "comm_oracle",
    "commutator_coefficients",
    "bateman_lhs",
    "bateman_rhs",
    "discrepancy_report",
    "format_report",
]

#: Names of the two candidate closed forms.
#: ``"derived"``: m K1(mr) / (4 pi^2 r) and -m^2 K2(mr) / (4 pi^2 r^2).
#: ``"alternative"``: m^2 K1(mr) / (2 pi^2 r) and -m K2(mr) / (2 pi^2 r^2).
FORMS = ("derived", "alternative")

#: The form that agrees with the Abel-regularised momentum integrals.
VALIDATED_FORM = "derived"

_ORACLE_SPEC = QuadSpec(rel_tol=1e-8, abs_tol=1e-15)


@dataclass(frozen=True)
class ContactTerm:
    """Local part ``coefficient * i * delta^3(x1 - x2)`` of a field commutator.

    Distributions have no pointwise value, so the term is kept symbolic.
    """

    coefficient: Fraction
    first: str
    second: str

    def __str__(self):
        return f"[{self.first}(x1), {self.second}(x2)] = ({self.coefficient}) i delta^3(x1 - x2)"


def contact_terms(first: str = "phi+", second: str = "pi-") -> ContactTerm:
    """Contact term of ``[first(x1), second(x2)]`` at equal times.

    ``[phi+, pi-]`` carries ``+1/2`` and the reversed pair ``[pi-, phi+]``
    carries ``-1/2``; the mode normalisation makes it mass independent. The
    conjugate pair ``[phi-, pi+]`` carries the other half of the canonical
    commutator, again ``+1/2``.
    """
    allowed = {("phi+", "pi-"): Fraction(1, 2), ("phi-", "pi+"): Fraction(1, 2)}
    if (first, second) in allowed:
        return ContactTerm(allowed[(first, second)], first, second)
    if (second, first) in allowed:
        return ContactTerm(-allowed[(second, first)], first, second)
    raise DomainError(f"no contact term between {first!r} and {second!r}")


def _check_mr(m: float, r: float):
    if not (m > 0 and math.isfinite(m)):
        raise DomainError(f"m must be positive and finite, got {m!r}")
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"r must be positive and finite, got {r!r}")


def comm_phiphi_closed(m: float, r: float, form: str = VALIDATED_FORM) -> float:
    """Coefficient of the antisymmetrised ``phi- phi+`` combination.

    Parameters
    ----------
    m, r : float
        Mass (inverse length) and separation ``|x1 - x2|``, both positive.
    form : {"derived", "alternative"}
        ``"derived"`` returns ``m K1(m r) / (4 pi^2 r)``; ``"alternative"``
        returns ``m^2 K1(m r) / (2 pi^2 r)``.
    """
    _check_mr(m, r)
    k1 = float(bessel_k_int(1, m * r))
    if form == "derived":
        return m * k1 / (4 * math.pi ** 2 * r)
    if form == "alternative":
        return m * m * k1 / (2 * math.pi ** 2 * r)
    raise DomainError(f"unknown form {form!r}; expected one of {FORMS}")


def comm_pipi_closed(m: float, r: float, form: str = VALIDATED_FORM) -> float:
    """Coefficient of the antisymmetrised ``pi- pi+`` combination (negative).

    ``"derived"`` returns ``-m^2 K2(m r) / (4 pi^2 r^2)``; ``"alternative"``
    returns ``-m K2(m r) / (2 pi^2 r^2)``.
    """
    _check_mr(m, r)
    k2 = float(bessel_k_int(2, m * r))
    if form == "derived":
        return -m * m * k2 / (4 * math.pi ** 2 * r * r)
    if form == "alternative":
        return -m * k2 / (2 * math.pi ** 2 * r * r)
    raise DomainError(f"unknown form {form!r}; expected one of {FORMS}")


def comm_oracle(kind: str, m: float, r: float, spec: QuadSpec | None = None,
                method: str = "abel") -> QuadResult:
    """Momentum-space ``1/(4 pi^2 r) int_0^inf dk k w(k) sin(k r)`` by quadrature.

    ``kind`` is ``"phiphi"`` (``w = 1/sqrt(k^2+m^2)``) or ``"pipi"``
    (``w = sqrt(k^2+m^2)``); ``m = 0`` is allowed. This is the ground truth
    the closed forms are checked against, and it never touches a Bessel
    function.

    ``method="abel"`` extrapolates ``int k w(k) e^{-eps k} sin(k r) dk`` to
    ``eps -> 0``. ``method="subtracted"`` is an independent cross-check: it
    removes the non-decaying large-``k`` part of ``k w(k)`` (``1`` for
    phiphi, ``k^2 + m^2/2`` for pipi), adds back its Abel value (``1/r`` and
    ``m^2/(2r) - 2/r^3``), and sums the convergent remainder over half
    periods.
    """
    spec = spec or _ORACLE_SPEC
    if not (m >= 0 and math.isfinite(m)):
        raise DomainError(f"m must be finite and >= 0, got {m!r}")
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"r must be positive and finite, got {r!r}")
    if kind not in ("phiphi", "pipi"):
        raise DomainError(f"kind must be 'phiphi' or 'pipi', got {kind!r}")
    m2 = m * m
    if method == "abel":
        if kind == "phiphi":
            def g(k):
                return k / np.sqrt(k * k + m2)
        else:
            def g(k):
                return k * np.sqrt(k * k + m2)
        res = integrate_oscillatory_abel(g, r, chebyshev_ladder(r), spec,
                                         growth=0.0 if kind == "phiphi" else 2.0)
    elif method == "subtracted":
        if kind == "phiphi":
            def g(k):
                return k / np.sqrt(k * k + m2) - 1.0
            known = 1.0 / r
        else:
            def g(k):
                # k sqrt(k^2+m^2) - k^2 - m^2/2 = -m^4 / (2 (sqrt(k^2+m^2) + k)^2)
                q = np.sqrt(k * k + m2) + k
                return -0.5 * m2 * m2 / (q * q)
            known = 0.5 * m2 / r - 2.0 / r ** 3
        rem = integrate_sine_direct(g, r, spec)
        res = QuadResult(rem.value + known, rem.err_estimate, rem.evaluations, rem.converged)
    else:
        raise DomainError(f"unknown method {method!r}")
    scale = 1.0 / (4 * math.pi ** 2 * r)
    return QuadResult(res.value * scale, res.err_estimate * scale, res.evaluations, res.converged)


@dataclass(frozen=True)
class CommutatorCoefficients:
    """Local and nonlocal parts of the density commutator at one separation."""

    contact_coefficient: Fraction
    phiphi: float
    pipi: float
    separation: float
    mass: float


def commutator_coefficients(m: float, r: float) -> CommutatorCoefficients:
    """Assemble the validated coefficient set at mass ``m`` and separation ``r``."""
    return CommutatorCoefficients(
        contact_coefficient=contact_terms().coefficient,
        phiphi=comm_phiphi_closed(m, r),
        pipi=comm_pipi_closed(m, r),
        separation=r,
        mass=m,
    )


def bateman_rhs(alpha: float, y: float, nu: int) -> float:
    """Closed side ``sqrt(pi) (2a)^nu / (2 Gamma(3/2 - nu)) y^(1-nu) K_nu(a y)``.

    Simplified forms: ``nu = 0`` gives ``y K0(a y)``, ``nu = 1`` gives
    ``a K1(a y)`` and ``nu = 2`` gives ``-a^2 K2(a y) / y`` (the sign comes from
    ``Gamma(-1/2) = -2 sqrt(pi)``). Orders are limited to those available in
    :func:`bessel_k_int`.
    """
    if not (alpha > 0 and y > 0):
        raise DomainError("alpha and y must be positive")
    if nu not in (0, 1, 2):
        raise DomainError(f"nu must be 0, 1 or 2, got {nu!r}")
    pref = math.sqrt(math.pi) * (2 * alpha) ** nu / (2 * gamma_real(1.5 - nu))
    return pref * y ** (1 - nu) * float(bessel_k_int(nu, alpha * y))


def bateman_lhs(alpha: float, y: float, nu: int, spec: QuadSpec | None = None,
                method: str = "auto") -> QuadResult:
    """Sine transform ``int_0^inf dx x sin(xy) / (x^2 + a^2)^(3/2 - nu)``.

    ``method="auto"`` uses Abel regularisation for ``nu >= 1`` (the integral
    diverges) and direct half-period summation for ``nu = 0``; ``"abel"`` and
    ``"direct"`` force one path.
    """
    spec = spec or _ORACLE_SPEC
    if not (alpha > 0 and y > 0):
        raise DomainError("alpha and y must be positive")
    if nu not in (0, 1, 2):
        raise DomainError(f"nu must be 0, 1 or 2, got {nu!r}")
    a2 = alpha * alpha
    p = 1.5 - nu

    def g(x):
        return x / (x * x + a2) ** p

    if method == "auto":
        method = "direct" if nu == 0 else "abel"
    if method == "direct":
        if nu != 0:
            raise DomainError("direct summation needs a convergent integral (nu = 0)")
        return integrate_sine_direct(g, y, spec)
    if method == "abel":
        return integrate_oscillatory_abel(g, y, chebyshev_ladder(y), spec, growth=max(0.0, nu - 0.5))
    raise DomainError(f"unknown method {method!r}")


@dataclass(frozen=True)
class DiscrepancyRow:
    kind: str
    mass: float
    r: float
    oracle: float
    oracle_err: float
    derived: float
    alternative: float
    status: str = "ok"

    @property
    def rel_dev_derived(self) -> float:
        return abs(self.derived - self.oracle) / abs(self.oracle)

    @property
    def rel_dev_alternative(self) -> float:
        return abs(self.alternative - self.oracle) / abs(self.oracle)

    def matches(self, tol: float = 1e-6) -> List[str]:
        """Candidate forms agreeing with the oracle to ``tol`` relative."""
        if self.status != "ok":
            return []
        out = []
        if self.rel_dev_derived <= tol:
            out.append("derived")
        if self.rel_dev_alternative <= tol:
            out.append("alternative")
        return out


def discrepancy_report(m: float, r_grid: Iterable[float], kinds: Sequence[str] = ("phiphi", "pipi"),
                       spec: QuadSpec | None = None, tol: float = 1e-6) -> List[DiscrepancyRow]:
    """Oracle and both closed forms at every ``r`` in ``r_grid``.

    A row is ``"ok"`` when the oracle's error estimate is at most half the
    comparison tolerance ``tol`` (relative), so that a match or mismatch at
    ``tol`` is meaningful. Otherwise the row is ``"unresolved"``, or
    ``"oracle_failed"`` if the extrapolation did not contract. Failures do
    not abort the report.
    """
    rows = []
    closed = {"phiphi": comm_phiphi_closed, "pipi": comm_pipi_closed}
    for kind in kinds:
        for r in r_grid:
            r = float(r)
            try:
                res = comm_oracle(kind, m, r, spec)
                val, err = res.value, res.err_estimate
                status = "ok" if err <= 0.5 * tol * abs(val) else "unresolved"
            except ExtrapolationError:
                status, val, err = "oracle_failed", math.nan, math.nan
            rows.append(DiscrepancyRow(kind, m, r, val, err,
                                       closed[kind](m, r, "derived"),
                                       closed[kind](m, r, "alternative"), status))
    return rows


def format_report(rows: Sequence[DiscrepancyRow], tol: float = 1e-6) -> str:
    """Plain-text table of a discrepancy report, one grid point per line."""
    head = (f"{'kind':<7}{'m':>12}{'r':>12}{'oracle':>19}{'oracle_err':>11}"
            f"{'derived':>19}{'alternative':>19}{'dev_derived':>13}{'dev_alt':>11}  match  status")
    lines = [head]
    for row in rows:
        match = "+".join(row.matches(tol)) or "none"
        lines.append(
            f"{row.kind:<7}{row.mass:>12.4e}{row.r:>12.4e}{row.oracle:>19.10e}{row.oracle_err:>11.2e}"
            f"{row.derived:>19.10e}{row.alternative:>19.10e}{row.rel_dev_derived:>13.2e}"
            f"{row.rel_dev_alternative:>11.2e}  {match:<5}  {row.status}")
    return "\n".join(lines)
