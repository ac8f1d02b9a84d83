"""Secret key rate of the equivalent one-way protocol.

K = P_SPS * (beta * I_AB - chi_BE), evaluated from the covariance matrix of
the resource state. For the non-Gaussian photon-subtracted states this is the
Gaussian lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .analytic import photon_subtracted_moments, tmsc_mean
from .channel import LinkBudget, OneWayChannel, max_gain, one_way_reduce
from .errors import UnphysicalStateError
from .fock import fock_observables, resolve_cutoff
from .gaussian import (
    entropy_g,
    heterodyne_condition,
    mutual_information,
    symplectic_eigenvalues,
    tmsv_covariance,
)
from .states import DEFAULT_CONVENTION, StateSpec, displacement_amplitude

ENGINES = ("analytic", "fock")
HOLEVO_FLOOR = -1e-9


@dataclass(frozen=True, eq=False)
class KeyRateBreakdown:
    P_SPS: float
    I_AB: float
    chi_BE: float
    K: float
    nu1: float
    nu2: float
    nu3: float
    cov_source: np.ndarray
    cov_after: np.ndarray
    channel: OneWayChannel
    beta: float

    def as_dict(self) -> dict:
        return {
            "P_SPS": self.P_SPS,
            "I_AB": self.I_AB,
            "chi_BE": self.chi_BE,
            "K": self.K,
            "nu1": self.nu1,
            "nu2": self.nu2,
            "nu3": self.nu3,
            "beta": self.beta,
            "channel": {
                "T": self.channel.T,
                "eps_th": self.channel.eps_th,
                "chi_ch": self.channel.chi_ch,
                "g": self.channel.g,
            },
            "cov_source": self.cov_source.tolist(),
            "cov_after": self.cov_after.tolist(),
        }


def propagate(cov_source, ch: OneWayChannel) -> np.ndarray:
    """Send mode 2 through the equivalent channel.

    Mode 1 is untouched, the cross terms scale by sqrt(T) and the mode-2
    variances become T (V_B + chi_ch).
    """
    cov = np.array(cov_source, dtype=float)
    T = ch.T
    out = cov.copy()
    out[0:2, 2:4] *= math.sqrt(T)
    out[2:4, 0:2] *= math.sqrt(T)
    for i in (2, 3):
        # T = 0 (vanishing gain) leaves only the vacuum contribution 1 - T.
        out[i, i] = T * (cov[i, i] + ch.chi_ch) if T > 0.0 else 1.0
    # q-p cross entries of mode 2 pick up the factor T only
    out[2, 3] = out[3, 2] = T * cov[2, 3]
    return out


def holevo_bound(cov_after):
    """Holevo bound chi_BE = g(nu1) + g(nu2) - g(nu3).

    Returns (chi_BE, nu1, nu2, nu3) where nu3 is the symplectic eigenvalue of
    mode 1 conditioned on the heterodyne outcome of mode 2.
    """
    nu1, nu2 = symplectic_eigenvalues(cov_after)
    cond = heterodyne_condition(cov_after)
    prod = cond[0, 0] * cond[1, 1]
    if prod < 0.0:
        raise UnphysicalStateError(f"conditional covariance has negative determinant {prod}")
    nu3 = math.sqrt(prod)
    chi = entropy_g(nu1) + entropy_g(nu2) - entropy_g(nu3)
    if chi < HOLEVO_FLOOR:
        raise UnphysicalStateError(f"Holevo bound {chi:.3e} is negative")
    return chi, nu1, nu2, nu3


def source_covariance(
    spec: StateSpec,
    engine: str = "analytic",
    convention: str = DEFAULT_CONVENTION,
    cutoffs: tuple[int, int] | None = None,
    cutoff_tol: float = 1e-8,
):
    """(P_SPS, mean, cov) of the resource state before the channel.

    Families without subtraction always use the exact Gaussian covariance.
    Photon-subtracted families use the closed form (``engine="analytic"``) or
    the truncated Fock construction (``engine="fock"``; cutoffs resolved to
    ``cutoff_tol`` unless given).
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    alpha = displacement_amplitude(spec.d, convention)
    if not spec.family.subtracted:
        return 1.0, tmsc_mean(spec.V, alpha), tmsv_covariance(spec.V)
    if engine == "analytic":
        return photon_subtracted_moments(spec.V, alpha, spec.T_S)
    if cutoffs is None:
        cutoffs = resolve_cutoff(spec, cutoff_tol, convention=convention)
    return fock_observables(spec, cutoffs[0], cutoffs[1], convention)


def key_rate_from_covariance(p_sps, cov_source, link: LinkBudget, channel: OneWayChannel) -> KeyRateBreakdown:
    cov_after = propagate(cov_source, channel)
    i_ab = mutual_information(cov_after)
    chi, nu1, nu2, nu3 = holevo_bound(cov_after)
    K = p_sps * (link.beta * i_ab - chi)
    return KeyRateBreakdown(
        P_SPS=p_sps,
        I_AB=i_ab,
        chi_BE=chi,
        K=K,
        nu1=nu1,
        nu2=nu2,
        nu3=nu3,
        cov_source=np.asarray(cov_source, dtype=float),
        cov_after=cov_after,
        channel=channel,
        beta=link.beta,
    )


def secret_key_rate(
    spec: StateSpec,
    link: LinkBudget,
    gain_mode: str = "li-optimal",
    gain: float | None = None,
    *,
    engine: str = "analytic",
    convention: str = DEFAULT_CONVENTION,
    cutoffs: tuple[int, int] | None = None,
    cutoff_tol: float = 1e-8,
) -> KeyRateBreakdown:
    """Evaluate the key rate of one resource state over one link.

    Bob's retained mode always carries the Gaussian variance ``spec.V``, which
    fixes the default displacement gain. With ``gain_mode="numeric"`` the
    gain is instead chosen to maximize K over (0, sqrt(2/T_B)].

    K is returned raw and may be negative.
    """
    p_sps, _, cov_source = source_covariance(spec, engine, convention, cutoffs, cutoff_tol)

    if gain_mode != "numeric":
        channel = one_way_reduce(link, spec.V, gain_mode, gain)
        return key_rate_from_covariance(p_sps, cov_source, link, channel)

    def evaluate(g):
        return key_rate_from_covariance(p_sps, cov_source, link, one_way_reduce(link, spec.V, "fixed", g))

    def negative_rate(g):
        try:
            return -evaluate(g).K
        except UnphysicalStateError:
            return math.inf

    g_hi = max_gain(link.T_B)
    res = minimize_scalar(negative_rate, bounds=(1e-9 * g_hi, g_hi), method="bounded",
                          options={"xatol": 1e-10})
    best = evaluate(res.x)
    edge = evaluate(g_hi)
    return edge if edge.K > best.K else best
