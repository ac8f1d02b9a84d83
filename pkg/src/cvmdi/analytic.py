"""Closed-form moments of the photon-subtracted two-mode squeezed coherent state.

The Fock construction in :mod:`cvmdi.fock` is exact but needs cutoffs in the
hundreds to thousands once the displacement is large. This module gets the
same moments from 4x4 and 6x6 matrix algebra:

* For |psi> = D1(g) D2(g) S12(r)|00> (g = alpha e^r real), the squeezed-vacuum
  form exp(lambda a1^dag a2^dag) gives a2|psi> = A|psi> with
  A = lambda a1^dag + g (1 - lambda).
* The subtraction Kraus operator is sqrt(1-T) T^(n2/2) a2, and T^(n2/2)
  commutes with A, so the heralded state is sqrt(1-T) A |phi> where
  |phi> = T^(n2/2)|psi>.
* |phi> is Gaussian: it is |psi> sent through a beamsplitter of
  transmissivity T with the vacuum ancilla projected back onto vacuum, which
  is a Gaussian conditioning step.
* Moments of A^dag X A in the Gaussian state |phi> follow from Wick's theorem.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import VanishingPostSelectionError
from .fock import P_SPS_MIN
from .gaussian import LADDER_TO_QUADRATURE, quadrature_moments, tmsv_covariance
from .states import squeezed_photon_ratio, squeezing_from_variance

_QUADRATURE_TO_LADDER = np.linalg.inv(LADDER_TO_QUADRATURE)

# [b_k, b_l] for b = (a1, a1^dag, a2, a2^dag).
_COMMUTATOR = np.array(
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=complex
)


def tmsc_mean(V: float, alpha: float) -> np.ndarray:
    """Quadrature mean 2 alpha e^r (1, 0, 1, 0) of S12(r) D1(alpha) D2(alpha)|00>."""
    g = alpha * math.exp(squeezing_from_variance(V))
    return 2.0 * g * np.array([1.0, 0.0, 1.0, 0.0])


def attenuate_mode2(cov, mean, T):
    """Apply T^(n2/2) to a pure two-mode Gaussian state.

    Returns (cov, mean, weight) of the normalized result and its squared norm.
    """
    t, u = math.sqrt(T), math.sqrt(1.0 - T)
    full = np.eye(6)
    full[:4, :4] = cov
    m = np.zeros(6)
    m[:4] = mean
    bs = np.eye(6)
    for k in (0, 1):
        # mode 2 (index 2+k) mixes with the ancilla (index 4+k)
        bs[2 + k, 2 + k] = t
        bs[2 + k, 4 + k] = u
        bs[4 + k, 2 + k] = -u
        bs[4 + k, 4 + k] = t
    full = bs @ full @ bs.T
    m = bs @ m
    s_aa, s_ac, s_cc = full[:4, :4], full[:4, 4:], full[4:, 4:]
    inv = np.linalg.inv(s_cc + np.eye(2))
    cond_cov = s_aa - s_ac @ inv @ s_ac.T
    cond_mean = m[:4] - s_ac @ inv @ m[4:]
    weight = 2.0 / math.sqrt(np.linalg.det(s_cc + np.eye(2))) * math.exp(-0.5 * m[4:] @ inv @ m[4:])
    return 0.5 * (cond_cov + cond_cov.T), cond_mean, weight


def _sandwiched_moments(cov, mean, wa, ca, wz, cz):
    """Wick moments of A^dag X A in a Gaussian state, X in {1, b_k, b_k b_l}.

    A^dag = wa.b + ca and A = wz.b + cz.
    """
    m = _QUADRATURE_TO_LADDER @ mean
    G = _QUADRATURE_TO_LADDER @ cov @ _QUADRATURE_TO_LADDER.T + 0.5 * _COMMUTATOR
    mu_a = wa @ m + ca
    mu_z = wz @ m + cz
    ga = wa @ G  # <dA^dag db_l>
    gz = G @ wz  # <db_k dA>
    gaz = wa @ G @ wz
    norm = mu_a * mu_z + gaz
    first = mu_a * mu_z * m + ga * mu_z + gaz * m + gz * mu_a
    mm = np.outer(m, m)
    second = (
        mu_a * mu_z * mm
        + mu_z * (np.outer(ga, m) + np.outer(m, ga))
        + gaz * mm
        + mu_a * mu_z * G
        + mu_a * (np.outer(gz, m) + np.outer(m, gz))
        + np.outer(ga, gz)
        + np.outer(gz, ga)
        + gaz * G
    )
    return norm, first, second


def photon_subtracted_moments(V: float, alpha: float, T_S: float):
    """Success probability, mean and covariance after subtracting a photon from mode 2.

    Args:
        V: two-mode squeezing variance (>= 1).
        alpha: operator amplitude of the displacement applied to each mode
            before squeezing.
        T_S: subtraction beamsplitter transmissivity.

    Returns:
        (P_SPS, mean, cov).
    """
    if not 0.0 <= T_S <= 1.0:
        raise ValueError(f"T_S must lie in [0, 1], got {T_S}")
    lam = math.sqrt(squeezed_photon_ratio(V))
    g = alpha * math.exp(squeezing_from_variance(V))
    cov0 = tmsv_covariance(V)
    mean0 = tmsc_mean(V, alpha)

    cov, mean, weight = attenuate_mode2(cov0, mean0, T_S)
    e = np.eye(4)
    c = g * (1.0 - lam)
    norm, first, second = _sandwiched_moments(cov, mean, lam * e[0], c, lam * e[1], c)
    p_sps = (1.0 - T_S) * weight * float(norm.real)
    if not p_sps >= P_SPS_MIN:
        raise VanishingPostSelectionError(
            f"single-photon subtraction succeeds with probability {p_sps:.3e} (T_S={T_S})",
            probability=p_sps,
        )
    out_mean, out_cov = quadrature_moments(first / norm, second / norm)
    return p_sps, out_mean, out_cov
