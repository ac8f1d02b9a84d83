"""Brute-force reference constructions used by the self-check and the tests.

These deliberately avoid every shortcut taken by the production code: states
are built by exponentiating truncated two-mode generators, and photon
subtraction is carried out with an explicit ancilla mode.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .gaussian import OMEGA
from .states import squeezing_from_variance


def annihilator(n: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1.0, n)), 1, format="csr")


def direct_tmsc(V: float, alpha: float, cutoff: int) -> np.ndarray:
    """S12(r) D1(alpha) D2(alpha)|00> from truncated operator exponentials.

    S12(r) = exp[r(a1^dag a2^dag - a1 a2)] and D(alpha) = exp[alpha(a^dag - a)].
    Returns a ``cutoff x cutoff`` amplitude grid; ``cutoff`` should be well
    above the photon numbers that matter.
    """
    a = annihilator(cutoff)
    eye = sparse.identity(cutoff, format="csr")
    a1 = sparse.kron(a, eye, format="csr")
    a2 = sparse.kron(eye, a, format="csr")
    vac = np.zeros(cutoff * cutoff)
    vac[0] = 1.0
    shift = alpha * ((a1.T - a1) + (a2.T - a2))
    psi = expm_multiply(shift.tocsc(), vac)
    r = squeezing_from_variance(V)
    squeeze = r * (a1.T @ a2.T - a1 @ a2)
    psi = expm_multiply(squeeze.tocsc(), psi)
    return psi.reshape(cutoff, cutoff)


def beamsplitter_kraus(T: float, n: int) -> np.ndarray:
    """<m, 1| U_BS |k, 0> for mode 2 and a vacuum ancilla, m, k < n.

    U_BS = exp[theta(a^dag b - a b^dag)] with cos(theta) = sqrt(T). Mode and
    ancilla dimensions exceed the largest total photon number involved, so
    the truncated exponential is exact on the relevant subspace.
    """
    theta = math.acos(math.sqrt(T))
    dm, da = n + 1, n + 2
    a = annihilator(dm).toarray()
    b = annihilator(da).toarray()
    A = np.kron(a, np.eye(da))
    B = np.kron(np.eye(dm), b)
    U = expm(theta * (A.T @ B - A @ B.T))
    rows = [m * da + 1 for m in range(n)]
    cols = [k * da for k in range(n)]
    return U[np.ix_(rows, cols)]


def ancilla_subtraction(amp: np.ndarray, T: float):
    """Herald one photon in the ancilla after mixing it with mode 2.

    Returns (normalized amplitudes, success probability). The projection can
    differ from the Kraus form by a global sign; compare via :func:`align_phase`.
    """
    K = beamsplitter_kraus(T, amp.shape[1])
    out = np.asarray(amp) @ K.T
    p = float(np.vdot(out, out).real)
    return out / math.sqrt(p), p


def align_phase(amp: np.ndarray) -> np.ndarray:
    """Rotate the global phase so that the largest amplitude is real positive."""
    amp = np.asarray(amp, dtype=complex)
    idx = np.unravel_index(np.argmax(np.abs(amp)), amp.shape)
    return amp / (amp[idx] / abs(amp[idx]))


def sps_tmsv_probability(V: float, T_S: float) -> float:
    """Closed-form success probability (1-T) lam^2 (1-lam^2) / (1 - lam^2 T)^2."""
    lam2 = (V - 1.0) / (V + 1.0)
    return (1.0 - T_S) * lam2 * (1.0 - lam2) / (1.0 - lam2 * T_S) ** 2


def random_block_covariance(rng: np.random.Generator) -> np.ndarray:
    """Random physical covariance with no q-p correlations.

    A product of thermal modes is passed through a random two-mode squeezer
    and q/p-preserving local squeezers, all of which keep the block form.
    """
    n1, n2 = 1.0 + rng.exponential(3.0, size=2)
    cov = np.diag([n1, n1, n2, n2])
    r = rng.normal(0.0, 0.8)
    ch, sh = math.cosh(r), math.sinh(r)
    tms = np.array([[ch, 0, sh, 0], [0, ch, 0, -sh], [sh, 0, ch, 0], [0, -sh, 0, ch]])
    l1, l2 = rng.normal(0.0, 0.5, size=2)
    loc = np.diag([math.exp(l1), math.exp(-l1), math.exp(l2), math.exp(-l2)])
    S = loc @ tms
    return S @ cov @ S.T


def generic_symplectic_spectrum(cov) -> tuple[float, float]:
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ np.asarray(cov, dtype=float))))[::-1]
    return float(ev[0]), float(ev[2])


def schur_condition(cov) -> np.ndarray:
    """Full Schur complement A - C (B + 1)^-1 C^T with an explicit 2x2 inverse."""
    cov = np.asarray(cov, dtype=float)
    A, B, C = cov[:2, :2], cov[2:, 2:], cov[:2, 2:]
    M = B + np.eye(2)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    inv = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) / det
    return A - C @ inv @ C.T
