"""SI <-> natural-unit conversion (hbar = c = 1, lengths kept in metres).

Masses become inverse reduced Compton wavelengths, ``m c / hbar`` in 1/m, and
proper accelerations become inverse lengths, ``a / c^2``, so that a box whose
near face accelerates at ``a`` sits ``chi1 = c^2 / a`` above the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError

__all__ = [
    "UnitSystem",
    "CODATA2018",
    "Quantity",
    "KINDS",
    "convert_si_to_natural",
    "convert_natural_to_si",
    "mass_to_kg",
    "acceleration_to_si",
]


@dataclass(frozen=True)
class UnitSystem:
    """Conversion constants, all in SI."""

    c: float  # m/s
    hbar: float  # J s
    electron_mass: float  # kg
    standard_gravity: float  # m/s^2

    @property
    def electron_inverse_compton(self) -> float:
        """``m_e c / hbar`` in 1/m."""
        return self.electron_mass * self.c / self.hbar


#: CODATA 2018 recommended values (c and g exact by definition).
CODATA2018 = UnitSystem(
    c=299_792_458.0,
    hbar=1.054_571_817e-34,
    electron_mass=9.109_383_7015e-31,
    standard_gravity=9.806_65,
)

KINDS = ("length", "area", "volume", "mass", "acceleration")


class Quantity(NamedTuple):
    """An SI value tagged with what it measures (one of :data:`KINDS`)."""

    kind: str
    value: float


def _factor(kind: str, units: UnitSystem) -> float:
    # natural = factor * SI
    if kind in ("length", "area", "volume"):
        return 1.0
    if kind == "mass":
        return units.c / units.hbar
    if kind == "acceleration":
        return 1.0 / (units.c * units.c)
    raise DomainError(f"unknown quantity kind {kind!r}; expected one of {KINDS}")


def convert_si_to_natural(quantity: Quantity, units: UnitSystem = CODATA2018) -> float:
    """Natural-unit value of a tagged SI quantity.

    Lengths, areas and volumes pass through (metres). A mass in kg becomes
    ``m c / hbar`` in 1/m; an acceleration in m/s^2 becomes ``a / c^2`` in 1/m.

    >>> round(convert_si_to_natural(Quantity("acceleration", 299792458.0 ** 2)), 12)
    1.0
    """
    kind, value = quantity
    return float(value) * _factor(kind, units)


def convert_natural_to_si(quantity: Quantity, units: UnitSystem = CODATA2018) -> float:
    """Inverse of :func:`convert_si_to_natural`; ``quantity.value`` is natural."""
    kind, value = quantity
    return float(value) / _factor(kind, units)


def mass_to_kg(value: float, unit: str, units: UnitSystem = CODATA2018) -> float:
    """Mass in kg from a value in ``"me"`` (electron masses), ``"kg"`` or
    ``"natural"`` (1/m)."""
    if not math.isfinite(value):
        raise DomainError(f"mass must be finite, got {value!r}")
    if unit == "me":
        return value * units.electron_mass
    if unit == "kg":
        return value
    if unit == "natural":
        return convert_natural_to_si(Quantity("mass", value), units)
    raise DomainError(f"unknown mass unit {unit!r}")


def acceleration_to_si(value: float, unit: str, units: UnitSystem = CODATA2018) -> float:
    """Acceleration in m/s^2 from ``"si"``, ``"g"`` (standard gravity) or
    ``"natural"`` (1/m)."""
    if unit == "si":
        return value
    if unit == "g":
        return value * units.standard_gravity
    if unit == "natural":
        return convert_natural_to_si(Quantity("acceleration", value), units)
    raise DomainError(f"unknown acceleration unit {unit!r}")
