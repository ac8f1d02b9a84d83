"""Resource-state families and their parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# "quadrature": d is the shift of <q> applied to each mode before squeezing
#   (operator amplitude d/2, since <q> = 2 Re(alpha) with unit vacuum variance).
# "operator": d is the argument of exp[d(a^dag - a)] itself.
DISPLACEMENT_CONVENTIONS = ("quadrature", "operator")
DEFAULT_CONVENTION = "quadrature"


class Family(str, Enum):
    TMSV = "tmsv"
    SPS_TMSV = "sps-tmsv"
    TMSC = "tmsc"
    SPS_TMSC = "sps-tmsc"

    @property
    def subtracted(self) -> bool:
        return self in (Family.SPS_TMSV, Family.SPS_TMSC)

    @property
    def displaced(self) -> bool:
        return self in (Family.TMSC, Family.SPS_TMSC)

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("_", "-"))
        except ValueError:
            choices = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown family {value!r}; choose from {choices}") from None


@dataclass(frozen=True)
class StateSpec:
    """A resource state: family tag plus variance V, displacement d and SPS transmissivity T_S.

    Parameters that the family does not use are normalized away (d -> 0 for
    undisplaced families, T_S -> None for families without subtraction).
    """

    family: Family
    V: float
    d: float = 0.0
    T_S: float | None = None

    def __post_init__(self):
        family = Family.parse(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "V", float(self.V))
        if not self.V >= 1.0:
            raise ValueError(f"V must be >= 1, got {self.V}")
        if family.displaced:
            if not self.d >= 0.0:
                raise ValueError(f"d must be >= 0, got {self.d}")
            object.__setattr__(self, "d", float(self.d))
        else:
            if self.d not in (0, 0.0, None):
                raise ValueError(f"family {family.value} takes no displacement (d={self.d})")
            object.__setattr__(self, "d", 0.0)
        if family.subtracted:
            if self.T_S is None or not 0.0 <= self.T_S <= 1.0:
                raise ValueError(f"T_S must lie in [0, 1], got {self.T_S}")
            object.__setattr__(self, "T_S", float(self.T_S))
        else:
            object.__setattr__(self, "T_S", None)

    @property
    def squeezing(self) -> float:
        return squeezing_from_variance(self.V)

    def as_dict(self) -> dict:
        return {"family": self.family.value, "V": self.V, "d": self.d, "T_S": self.T_S}


def squeezing_from_variance(V: float) -> float:
    """Two-mode squeezing r with cosh(2r) = V."""
    return 0.5 * math.acosh(V)


def squeezed_photon_ratio(V: float) -> float:
    """lambda^2 = tanh^2 r = (V-1)/(V+1)."""
    return (V - 1.0) / (V + 1.0)


def displacement_amplitude(d: float, convention: str = DEFAULT_CONVENTION) -> float:
    """Operator amplitude alpha of the pre-squeezing displacement D(alpha)."""
    if convention == "quadrature":
        return d / 2.0
    if convention == "operator":
        return float(d)
    raise ValueError(
        f"unknown displacement convention {convention!r}; choose from {DISPLACEMENT_CONVENTIONS}"
    )


def mean_photon_number(V: float, alpha: float) -> float:
    """Mean photon number per mode of S(r) D(alpha) D(alpha) |00>: sinh^2 r + (alpha e^r)^2."""
    r = squeezing_from_variance(V)
    return math.sinh(r) ** 2 + (alpha * math.exp(r)) ** 2
