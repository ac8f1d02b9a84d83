"""Truncated Fock-space construction of the resource states.

This is the numerical reference for the photon-subtracted states: it builds
the two-mode amplitude grid explicitly, applies the single-photon-subtraction
Kraus operator and reads the first and second moments off the amplitudes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import CutoffError, VanishingPostSelectionError
from .gaussian import quadrature_moments
from .states import (
    DEFAULT_CONVENTION,
    StateSpec,
    displacement_amplitude,
    mean_photon_number,
    squeezed_photon_ratio,
    squeezing_from_variance,
)

NORM_TOL = 1e-6
TAIL_TOL = 1e-10
P_SPS_MIN = 1e-15
DEFAULT_CUTOFF_CAP = 4096
CUTOFF_STEP = 10

# Squeezed-vacuum terms with amplitude below this do not register in double precision.
_NEGLIGIBLE_AMPLITUDE = 1e-18


@dataclass(frozen=True, eq=False)
class FockAmplitudes:
    """Two-mode pure state truncated to ``n1_cutoff x n2_cutoff`` photon numbers.

    ``amp[n1, n2]`` is the amplitude of |n1, n2>; photon numbers at or above a
    cutoff are implicitly zero.
    """

    amp: np.ndarray

    @property
    def n1_cutoff(self) -> int:
        return self.amp.shape[0]

    @property
    def n2_cutoff(self) -> int:
        return self.amp.shape[1]

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amp, self.amp).real)


@functools.lru_cache(maxsize=4)
def _quadrature_eigensystem(n: int):
    # Truncated q = a + a^dag is tridiagonal with sqrt(k) off the diagonal.
    return eigh_tridiagonal(np.zeros(n), np.sqrt(np.arange(1.0, n)))


def displacement_columns(alpha: float, n_rows: int, n_cols: int, pad: int | None = None) -> np.ndarray:
    """First ``n_cols`` columns of the real displacement matrix <m|D(alpha)|n>, m < n_rows.

    D(alpha) = exp[alpha (a^dag - a)] is evaluated spectrally from the
    eigenbasis of the truncated position operator in a padded space, which
    stays unitary for large alpha where the textbook recurrences blow up.
    """
    if n_cols > n_rows:
        raise ValueError("n_cols must not exceed n_rows")
    if alpha == 0.0:
        return np.eye(n_rows, n_cols)
    if pad is None:
        pad = int(8.0 * math.sqrt(n_rows)) + 40
    size = n_rows + pad
    w, v = _quadrature_eigensystem(size)
    # a^dag - a = S (-i X) S^-1 with S = diag(i^k), X the truncated position operator, so
    # D_mn = i^(m-n) sum_k v_mk v_nk exp(-i alpha w_k).
    rows, cols = v[:n_rows], v[:n_cols]
    cos_part = (rows * np.cos(alpha * w)) @ cols.T
    sin_part = (rows * np.sin(alpha * w)) @ cols.T
    diff = (np.arange(n_rows)[:, None] - np.arange(n_cols)[None, :]) % 4
    out = np.where(diff == 0, cos_part, 0.0)
    out = np.where(diff == 1, sin_part, out)
    out = np.where(diff == 2, -cos_part, out)
    out = np.where(diff == 3, -sin_part, out)
    return out


def build_tmsc(V: float, d: float, n1_cutoff: int, n2_cutoff: int) -> FockAmplitudes:
    """Amplitudes of S12(r) D1(d) D2(d) |00> with cosh(2r) = V.

    ``d`` is the operator amplitude of D(d) = exp[d(a^dag - a)]. The state is
    assembled as D1(d e^r) D2(d e^r) S12(r) |00>, i.e. a squeezed vacuum with
    amplitudes sqrt(1 - lambda^2) lambda^n on |n, n> whose modes are then
    displaced independently.

    Raises:
        CutoffError: when the squeezed-vacuum tail or the post-displacement
            norm deficit shows the cutoffs are too small.
    """
    if V < 1.0:
        raise ValueError(f"V must be >= 1, got {V}")
    if d < 0.0:
        raise ValueError(f"d must be >= 0, got {d}")
    if n1_cutoff < 1 or n2_cutoff < 1:
        raise ValueError("cutoffs must be >= 1")

    lam2 = squeezed_photon_ratio(V)
    n_terms = min(n1_cutoff, n2_cutoff)
    tail = lam2**n_terms
    if tail > TAIL_TOL:
        mode = 1 if n1_cutoff <= n2_cutoff else 2
        raise CutoffError(
            f"cutoff {n_terms} of mode {mode} leaves squeezed-vacuum tail {tail:.2e}", mode=mode
        )
    if lam2 > 0.0:
        keep = math.ceil(2.0 * math.log(_NEGLIGIBLE_AMPLITUDE) / math.log(lam2))
        n_terms = max(1, min(n_terms, keep))
    else:
        n_terms = 1
    n = np.arange(n_terms)
    coeff = math.sqrt(1.0 - lam2) * np.exp(0.5 * n * math.log(lam2)) if lam2 > 0 else np.ones(1)

    alpha = d * math.exp(squeezing_from_variance(V))
    cols = displacement_columns(alpha, max(n1_cutoff, n2_cutoff), n_terms)
    u1, u2 = cols[:n1_cutoff], cols[:n2_cutoff]
    amp = (u1 * coeff) @ u2.T

    state = FockAmplitudes(amp.astype(complex))
    deficit = abs(state.norm_sq - 1.0)
    if deficit > NORM_TOL:
        w2 = coeff**2
        lost1 = float(np.sum(w2 * (1.0 - np.sum(u1**2, axis=0))))
        lost2 = float(np.sum(w2 * (1.0 - np.sum(u2**2, axis=0))))
        mode = 1 if lost1 >= lost2 else 2
        raise CutoffError(
            f"norm deficit {deficit:.2e} after displacement; mode {mode} cutoff too small "
            f"(cutoffs {n1_cutoff}, {n2_cutoff})",
            mode=mode,
        )
    return state


def subtraction_weights(n2_cutoff: int, T_S: float) -> np.ndarray:
    """sqrt(1-T_S) T_S^(m/2) sqrt(m+1): the Kraus matrix element <m|M|m+1>."""
    m = np.arange(n2_cutoff - 1, dtype=float)
    return math.sqrt(1.0 - T_S) * np.power(T_S, m / 2.0) * np.sqrt(m + 1.0)


def subtract_photon(state: FockAmplitudes, T_S: float) -> tuple[FockAmplitudes, float]:
    """Herald one photon reflected off a beamsplitter of transmissivity ``T_S`` on mode 2.

    Returns the renormalized post-selected state and the success probability.

    Raises:
        VanishingPostSelectionError: if the success probability is below 1e-15
            (e.g. T_S = 1 or a vacuum input).
    """
    if not 0.0 <= T_S <= 1.0:
        raise ValueError(f"T_S must lie in [0, 1], got {T_S}")
    amp = state.amp
    out = np.zeros_like(amp)
    if amp.shape[1] > 1:
        out[:, :-1] = amp[:, 1:] * subtraction_weights(amp.shape[1], T_S)
    p_sps = float(np.vdot(out, out).real)
    if p_sps < P_SPS_MIN:
        raise VanishingPostSelectionError(
            f"single-photon subtraction succeeds with probability {p_sps:.3e} (T_S={T_S})",
            probability=p_sps,
        )
    return FockAmplitudes(out / math.sqrt(p_sps)), p_sps


def _lower(amp, axis):
    # Apply the annihilation operator of the given mode to an amplitude grid.
    out = np.zeros_like(amp)
    s = np.sqrt(np.arange(1.0, amp.shape[axis]))
    if axis == 0:
        out[:-1] = amp[1:] * s[:, None]
    else:
        out[:, :-1] = amp[:, 1:] * s[None, :]
    return out


def ladder_moments(state: FockAmplitudes):
    """<b_k> and <b_k b_l> for b = (a1, a1^dag, a2, a2^dag), exact on the truncated grid."""
    psi = state.amp
    low = [_lower(psi, 0), _lower(psi, 1)]
    mean = np.zeros(4, dtype=complex)
    second = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        ai = np.vdot(psi, low[i])
        mean[2 * i], mean[2 * i + 1] = ai, np.conj(ai)
    for i in range(2):
        for j in range(2):
            aa = np.vdot(psi, _lower(low[j], i))  # <a_i a_j>
            ada = np.vdot(low[i], low[j])  # <a_i^dag a_j>
            second[2 * i, 2 * j] = aa
            second[2 * i + 1, 2 * j + 1] = np.conj(aa)
            second[2 * i + 1, 2 * j] = ada
            # <a_j a_i^dag> = <a_i^dag a_j>^* + delta_ij
            second[2 * j, 2 * i + 1] = np.conj(ada) + (1.0 if i == j else 0.0)
    return mean, second


def moments(state: FockAmplitudes):
    """Quadrature mean vector and symmetrized covariance of a normalized state."""
    mean_b, second_b = ladder_moments(state)
    return quadrature_moments(mean_b, second_b)


def fock_source(spec: StateSpec, n1_cutoff: int, n2_cutoff: int, convention: str = DEFAULT_CONVENTION):
    """Build the resource state of ``spec`` on the given grid.

    Returns (state, P_SPS); P_SPS is exactly 1 for families without subtraction.
    """
    alpha = displacement_amplitude(spec.d, convention)
    state = build_tmsc(spec.V, alpha, n1_cutoff, n2_cutoff)
    if spec.family.subtracted:
        return subtract_photon(state, spec.T_S)
    return state, 1.0


def fock_observables(spec: StateSpec, n1_cutoff: int, n2_cutoff: int, convention: str = DEFAULT_CONVENTION):
    """(P_SPS, mean, cov) of the resource state computed on a truncated grid."""
    state, p_sps = fock_source(spec, n1_cutoff, n2_cutoff, convention)
    mean, cov = moments(state)
    return p_sps, mean, cov


def seed_cutoff(spec: StateSpec, convention: str = DEFAULT_CONVENTION) -> int:
    """Initial cutoff guess: ceil(8 * mean photon number) + 20."""
    nbar = mean_photon_number(spec.V, displacement_amplitude(spec.d, convention))
    return math.ceil(8.0 * nbar) + 20


def resolve_cutoff(
    spec: StateSpec,
    tol: float = 1e-8,
    cap: int = DEFAULT_CUTOFF_CAP,
    convention: str = DEFAULT_CONVENTION,
) -> tuple[int, int]:
    """Smallest multiple-of-10 cutoff at which P_SPS and the covariance are converged.

    A cutoff N counts as converged when raising both mode cutoffs to N + 10
    changes P_SPS and every covariance entry by less than ``tol``. The search
    starts at the seed guess, grows geometrically until converged and then
    bisects down on the grid of multiples of 10.

    Raises:
        CutoffError: if convergence would need cutoffs above ``cap``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    nbar = mean_photon_number(spec.V, displacement_amplitude(spec.d, convention))
    cache = {}

    def observe(n):
        if n not in cache:
            try:
                p, _, cov = fock_observables(spec, n, n, convention)
                cache[n] = (p, cov)
            except CutoffError:
                cache[n] = None
        return cache[n]

    def converged(n):
        if n + CUTOFF_STEP > cap:
            return False
        a, b = observe(n), observe(n + CUTOFF_STEP)
        if a is None or b is None:
            return False
        return abs(a[0] - b[0]) < tol and float(np.max(np.abs(a[1] - b[1]))) < tol

    def cap_error():
        return CutoffError(
            f"cutoff would exceed the cap {cap} (estimated mean photon number {nbar:.1f})"
        )

    step = CUTOFF_STEP
    largest = step * ((cap - step) // step)
    if largest < step:
        raise cap_error()
    hi = min(largest, max(step, step * math.ceil(seed_cutoff(spec, convention) / step)))
    lo = 0
    while not converged(hi):
        if hi >= largest:
            raise cap_error()
        lo = hi
        hi = min(largest, 2 * hi)
    # Invariant: converged(hi); lo is 0 or a non-converged cutoff.
    while hi - lo > step:
        mid = step * ((lo + hi) // (2 * step))
        if mid <= lo:
            break
        if converged(mid):
            hi = mid
        else:
            lo = mid
    return hi, hi
