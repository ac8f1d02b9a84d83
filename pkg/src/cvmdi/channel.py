"""Fiber link model and its reduction to an equivalent one-way channel."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import ChannelError

GAIN_MODES = ("li-optimal", "fixed", "numeric")

# Excess-noise linear fit (shot-noise units) and fiber loss used for every figure.
DEFAULT_W = 0.16
DEFAULT_EPS_A0 = 19.09e-5
DEFAULT_EPS_A1 = 6.13e-5
DEFAULT_EPS_B = 19.09e-5
DEFAULT_BETA = 0.96


@dataclass(frozen=True)
class LinkBudget:
    """Physical parameters of the Alice-Charlie-Bob link.

    Distances in km, attenuation ``w`` in dB/km, noises in shot-noise units.
    ``eps_fit_a1`` is per km.
    """

    L_AC: float = 0.0
    L_BC: float = 0.0
    w: float = DEFAULT_W
    eps_fit_a0: float = DEFAULT_EPS_A0
    eps_fit_a1: float = DEFAULT_EPS_A1
    T_B: float = 1.0
    eps_B: float = DEFAULT_EPS_B
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if not self.L_AC >= 0.0:
            raise ValueError(f"L_AC must be >= 0, got {self.L_AC}")
        if not self.L_BC >= 0.0:
            raise ValueError(f"L_BC must be >= 0, got {self.L_BC}")
        if not self.w > 0.0:
            raise ValueError(f"w must be > 0, got {self.w}")
        if not 0.0 < self.T_B <= 1.0:
            raise ValueError(f"T_B must lie in (0, 1], got {self.T_B}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")

    def at_distance(self, L_AC: float) -> "LinkBudget":
        return dataclasses.replace(self, L_AC=float(L_AC))

    @classmethod
    def with_bob_distance(cls, L_BC: float, **kwargs) -> "LinkBudget":
        """Build a link whose Bob-side transmissivity follows from ``L_BC``."""
        w = kwargs.get("w", DEFAULT_W)
        return cls(L_BC=L_BC, T_B=transmissivity_from_distance(L_BC, w), **kwargs)


@dataclass(frozen=True)
class OneWayChannel:
    T: float
    eps_th: float
    chi_ch: float
    g: float


def transmissivity_from_distance(L: float, w: float = DEFAULT_W) -> float:
    if L < 0:
        raise ValueError(f"distance must be >= 0, got {L}")
    return 10.0 ** (-w * L / 10.0)


def excess_noise_at(L: float, a0: float = DEFAULT_EPS_A0, a1: float = DEFAULT_EPS_A1) -> float:
    if L < 0:
        raise ValueError(f"distance must be >= 0, got {L}")
    return a0 + a1 * L


def li_optimal_gain(V_bob: float, T_B: float = 1.0) -> float:
    """Displacement gain g with g^2 = (2/T_B)(V-1)/(V+1)."""
    return math.sqrt(2.0 / T_B * (V_bob - 1.0) / (V_bob + 1.0))


def max_gain(T_B: float = 1.0) -> float:
    """Upper end of the gain search in numeric mode (the V -> inf optimal gain)."""
    return math.sqrt(2.0 / T_B)


def equivalent_excess_noise(T_A: float, eps_A: float, T_B: float, eps_B: float) -> float:
    """Excess noise of the equivalent one-way channel.

    Algebraically (T_B/T_A)(eps_B - 2) + eps_A + 2/T_A, regrouped so that at
    T_B = 1 the result is exactly eps_A + eps_B/T_A with no cancellation.
    """
    return eps_A + (T_B * eps_B + 2.0 * (1.0 - T_B)) / T_A


def one_way_reduce(
    link: LinkBudget,
    V_bob: float,
    gain_mode: str = "li-optimal",
    gain: float | None = None,
) -> OneWayChannel:
    """Map the two-channel MDI link onto an equivalent one-way channel.

    Args:
        link: link parameters.
        V_bob: variance of Bob's retained two-mode squeezed state.
        gain_mode: ``"li-optimal"`` derives g from ``V_bob``; ``"fixed"`` and
            ``"numeric"`` use ``gain`` (the numeric search lives in the key-rate
            pipeline, which calls back here with each trial gain).
        gain: displacement gain for the non-default modes.

    Returns:
        OneWayChannel with T = g^2 T_A / 2. For ``V_bob == 1`` under the default
        mode the gain vanishes, T = 0 and chi_ch is infinite.
    """
    if V_bob < 1.0:
        raise ValueError(f"V_bob must be >= 1, got {V_bob}")
    if gain_mode not in GAIN_MODES:
        raise ValueError(f"unknown gain mode {gain_mode!r}; choose from {GAIN_MODES}")
    T_A = transmissivity_from_distance(link.L_AC, link.w)
    if T_A == 0.0:
        raise ChannelError(f"transmissivity underflows at L_AC={link.L_AC} km")
    eps_A = excess_noise_at(link.L_AC, link.eps_fit_a0, link.eps_fit_a1)
    eps_th = equivalent_excess_noise(T_A, eps_A, link.T_B, link.eps_B)

    if gain_mode == "li-optimal":
        g = li_optimal_gain(V_bob, link.T_B)
        T = T_A / link.T_B * (V_bob - 1.0) / (V_bob + 1.0)
    else:
        if gain is None or not gain >= 0.0:
            raise ValueError(f"gain mode {gain_mode!r} needs a non-negative gain, got {gain}")
        g = float(gain)
        T = g * g / 2.0 * T_A
    chi_ch = (1.0 - T) / T + eps_th if T > 0.0 else math.inf
    return OneWayChannel(T=T, eps_th=eps_th, chi_ch=chi_ch, g=g)
