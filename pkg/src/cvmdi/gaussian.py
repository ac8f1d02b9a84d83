"""Two-mode covariance-matrix algebra.

All matrices use the (q1, p1, q2, p2) ordering with q = a + a^dag and
p = i(a^dag - a), so the vacuum has unit quadrature variance. Entropies are in
bits.
"""

from __future__ import annotations

import math
import os
from typing import NamedTuple

import numpy as np

from .errors import (
    BlockStructureError,
    NumericalPathologyError,
    UnphysicalStateError,
)

# Eigenvalues in [1 - NU_CLAMP, 1 + NU_CLAMP_ABOVE] are treated as exactly 1.
# The upper band only absorbs rounding in pure-state spectra.
NU_CLAMP = 1e-9
NU_CLAMP_ABOVE = 1e-12
BLOCK_TOL = 1e-8

# When set, every closed-form symplectic spectrum is checked against |eig(i Omega Sigma)|.
CROSS_CHECK = os.environ.get("CVMDI_CROSSCHECK", "") not in ("", "0")

OMEGA = np.array(
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
)

# (row, col) positions that must vanish in q/p block form.
_QP_MIXING = ((0, 1), (0, 3), (1, 2), (2, 3))


class SymplecticPair(NamedTuple):
    nu1: float
    nu2: float


def as_covariance(cov) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance matrix, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise ValueError("covariance matrix is not symmetric")
    return cov


def check_block_structure(cov, tol=BLOCK_TOL):
    scale = max(1.0, float(np.abs(cov).max()))
    for i, j in _QP_MIXING:
        if abs(cov[i, j]) > tol * scale:
            raise BlockStructureError(
                f"q-p mixing entry cov[{i},{j}]={cov[i, j]:.3e} exceeds {tol:g}"
            )


def block_entries(cov):
    """Return (delta1, delta2, kappa1, kappa2, mu1, mu2) of a block-form covariance."""
    return cov[0, 0], cov[1, 1], cov[0, 2], cov[1, 3], cov[2, 2], cov[3, 3]


def tmsv_covariance(V: float) -> np.ndarray:
    """Covariance of the two-mode squeezed vacuum with quadrature variance V."""
    if V < 1.0:
        raise ValueError(f"variance must be >= 1, got {V}")
    c = math.sqrt(V * V - 1.0)
    return np.array(
        [[V, 0.0, c, 0.0], [0.0, V, 0.0, -c], [c, 0.0, V, 0.0], [0.0, -c, 0.0, V]]
    )


# Rows express (q1, p1, q2, p2) in terms of the ladder vector (a1, a1^dag, a2, a2^dag).
LADDER_TO_QUADRATURE = np.array(
    [[1, 1, 0, 0], [-1j, 1j, 0, 0], [0, 0, 1, 1], [0, 0, -1j, 1j]], dtype=complex
)


def quadrature_moments(ladder_mean, ladder_second):
    """Convert ladder-operator moments to the quadrature mean and covariance.

    Args:
        ladder_mean: <b_k> for b = (a1, a1^dag, a2, a2^dag).
        ladder_second: ordered products <b_k b_l>.

    Returns:
        (mean, cov) with cov_ij = 1/2 <{x_i, x_j}> - <x_i><x_j>.
    """
    m = np.asarray(ladder_mean, dtype=complex)
    sym = 0.5 * (ladder_second + np.transpose(ladder_second)) - np.outer(m, m)
    k = LADDER_TO_QUADRATURE
    cov = (k @ sym @ k.T).real
    return (k @ m).real, 0.5 * (cov + cov.T)


def symplectic_eigenvalues_generic(cov) -> SymplecticPair:
    """Symplectic spectrum from the moduli of the eigenvalues of i*Omega*cov.

    Works for any 4x4 covariance; used as the independent check of the
    closed form.
    """
    cov = np.asarray(cov, dtype=float)
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ cov)))[::-1]
    return SymplecticPair(float(ev[0]), float(ev[2]))


def symplectic_eigenvalues(cov) -> SymplecticPair:
    """Closed-form symplectic eigenvalues of a block-form two-mode covariance.

    Uses the local invariants I1 = d1*d2, I2 = m1*m2, I3 = k1*k2 and
    I4 = (d1*m1 - k1^2)(d2*m2 - k2^2); the spectrum is
    sqrt((S +- sqrt(S^2 - 4*I4)) / 2) with S = I1 + I2 + 2*I3.

    Raises:
        BlockStructureError: if q and p quadratures are correlated.
        NumericalPathologyError: if the discriminant is clearly negative.
    """
    cov = as_covariance(cov)
    check_block_structure(cov)
    d1, d2, k1, k2, m1, m2 = block_entries(cov)
    i1, i2, i3 = d1 * d2, m1 * m2, k1 * k2
    s = i1 + i2 + 2.0 * i3
    # S^2 - 4 I4 rewritten without the cancellation that splits degenerate
    # spectra (pure symmetric states) by ~sqrt(machine epsilon).
    disc = (i1 - i2) ** 2 + 4.0 * (d1 * k2 + k1 * m2) * (k1 * d2 + m1 * k2)
    if disc < -1e-10 * max(1.0, s * s):
        raise NumericalPathologyError(f"negative discriminant {disc:.3e} in symplectic spectrum")
    root = math.sqrt(max(disc, 0.0))
    lo = (s - root) / 2.0
    if lo < 0.0:
        if lo < -1e-10 * max(1.0, s):
            raise NumericalPathologyError(f"negative squared symplectic eigenvalue {lo:.3e}")
        lo = 0.0
    pair = SymplecticPair(math.sqrt((s + root) / 2.0), math.sqrt(lo))
    if CROSS_CHECK:
        ref = symplectic_eigenvalues_generic(cov)
        for a, b in zip(pair, ref):
            if abs(a - b) > 1e-9 * max(1.0, b):
                raise AssertionError(f"closed-form spectrum {pair} disagrees with generic {ref}")
    return pair


def entropy_g(nu: float) -> float:
    """Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue nu."""
    nu = float(nu)
    if not nu >= 1.0 - NU_CLAMP:
        raise UnphysicalStateError(f"symplectic eigenvalue {nu!r} is below 1")
    if nu <= 1.0 + NU_CLAMP_ABOVE:
        return 0.0
    a = (nu + 1.0) / 2.0
    b = (nu - 1.0) / 2.0
    return a * math.log2(a) - b * math.log2(b)


def heterodyne_condition(cov) -> np.ndarray:
    """Mode-1 covariance conditioned on a heterodyne measurement of mode 2.

    Returns diag(d1 - k1^2/(m1+1), d2 - k2^2/(m2+1)).
    """
    cov = np.asarray(cov, dtype=float)
    d1, d2, k1, k2, m1, m2 = block_entries(cov)
    if m1 + 1.0 <= 0.0 or m2 + 1.0 <= 0.0:
        raise UnphysicalStateError("mode-2 variances must exceed -1")
    return np.diag([d1 - k1 * k1 / (m1 + 1.0), d2 - k2 * k2 / (m2 + 1.0)])


def mutual_information(cov) -> float:
    """Alice-Bob mutual information (bits) when both sides heterodyne."""
    cov = np.asarray(cov, dtype=float)
    cond = heterodyne_condition(cov)
    iq = 0.5 * math.log2((cov[0, 0] + 1.0) / (cond[0, 0] + 1.0))
    ip = 0.5 * math.log2((cov[1, 1] + 1.0) / (cond[1, 1] + 1.0))
    return iq + ip


def von_neumann_entropy(cov) -> float:
    cov = np.asarray(cov, dtype=float)
    if cov.shape == (2, 2):
        det = float(np.linalg.det(cov))
        if det < 0.0:
            raise UnphysicalStateError(f"single-mode covariance has negative determinant {det}")
        return entropy_g(math.sqrt(det))
    return sum(entropy_g(nu) for nu in symplectic_eigenvalues(cov))
