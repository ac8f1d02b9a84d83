"""Box-constrained key-rate maximization and the distance/variance sweeps built on it."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize

from .channel import LinkBudget
from .errors import NoBracketError, PhysicsError
from .keyrate import secret_key_rate
from .states import DEFAULT_CONVENTION, Family, StateSpec

DIMENSIONS = ("V", "d", "T_S")
GRID_SHAPE = {"V": 15, "d": 11, "T_S": 21}
TIE_TOL = 1e-12
# Largest transmissivity actually evaluated; T_S = 1 heralds nothing.
TS_CEILING = 1.0 - 1e-9
N_SEEDS = 3
DISTANCE_TOL = 0.01
MAX_DISTANCE_KM = 10000.0


@dataclass(frozen=True)
class OptBox:
    V_lo: float = 1.0
    V_hi: float = 15.0
    d_lo: float = 0.0
    d_hi: float = 5.0
    Ts_lo: float = 0.0
    Ts_hi: float = 1.0

    def __post_init__(self):
        for name in DIMENSIONS:
            lo, hi = self.bounds(name)
            if not lo <= hi:
                raise ValueError(f"box for {name} is empty: [{lo}, {hi}]")
        if self.V_lo < 1.0:
            raise ValueError("V_lo must be >= 1")
        if self.d_lo < 0.0:
            raise ValueError("d_lo must be >= 0")
        if self.Ts_lo < 0.0 or self.Ts_hi > 1.0:
            raise ValueError("T_S bounds must lie in [0, 1]")

    def bounds(self, name: str) -> tuple[float, float]:
        if name == "V":
            return self.V_lo, self.V_hi
        if name == "d":
            return self.d_lo, self.d_hi
        if name == "T_S":
            return self.Ts_lo, min(self.Ts_hi, TS_CEILING)
        raise KeyError(name)

    @classmethod
    def fixed_variance(cls, V: float, **kwargs) -> "OptBox":
        return cls(V_lo=V, V_hi=V, **kwargs)


@dataclass
class OptResult:
    best_params: StateSpec
    best_K: float
    evaluations: int
    at_boundary: dict = field(default_factory=dict)

    @property
    def positive_key(self) -> bool:
        return self.best_K > 0.0


def active_dimensions(family: Family, box: OptBox) -> tuple[str, ...]:
    """Search dimensions: those the family uses and the box does not pin."""
    family = Family.parse(family)
    used = ["V"]
    if family.displaced:
        used.append("d")
    if family.subtracted:
        used.append("T_S")
    return tuple(n for n in used if box.bounds(n)[0] < box.bounds(n)[1])


def ts_grid(lo: float, hi: float, n: int = GRID_SHAPE["T_S"]) -> np.ndarray:
    """Transmissivity grid, log-densified in [0.9, 1) where the optima sit.

    With the full [0, 1] box: 6 uniform points below 0.9 and 15 points with
    1 - T_S geometric from 0.1 to 1e-4.
    """
    hi = min(hi, TS_CEILING)
    if lo <= 0.9 < hi:
        n_dense = 15
        dense = 1.0 - 0.1 * np.geomspace(1.0, 1e-3, n_dense)
        dense = dense[dense <= hi]
        coarse = np.linspace(lo, 0.9, n - n_dense + 1)[:-1]
        return np.concatenate([coarse, dense])
    return np.linspace(lo, hi, n)


def _grid_axis(name: str, box: OptBox) -> np.ndarray:
    lo, hi = box.bounds(name)
    if name == "T_S":
        return ts_grid(lo, hi)
    return np.linspace(lo, hi, GRID_SHAPE[name])


def _spec_from(family: Family, params: dict) -> StateSpec:
    return StateSpec(
        family,
        V=params["V"],
        d=params["d"] if family.displaced else 0.0,
        T_S=params["T_S"] if family.subtracted else None,
    )


class _Candidate(NamedTuple):
    K: float
    V: float
    d: float
    T_S: float

    def better_than(self, other: "_Candidate") -> bool:
        # Ties in K go to smaller V, then smaller d, then larger T_S.
        if self.K > other.K + TIE_TOL:
            return True
        if self.K < other.K - TIE_TOL:
            return False
        return (self.V, self.d, -self.T_S) < (other.V, other.d, -other.T_S)


def optimize_key_rate(
    family,
    link: LinkBudget,
    box: OptBox | None = None,
    *,
    gain_mode: str = "li-optimal",
    gain: float | None = None,
    convention: str = DEFAULT_CONVENTION,
    n_seeds: int = N_SEEDS,
) -> OptResult:
    """Maximize K over (V, d, T_S) within ``box``.

    A coarse grid is scanned first, then Nelder-Mead (with bound clipping)
    refines from the best ``n_seeds`` grid points. Points whose evaluation
    fails (e.g. nothing to subtract at V = 1) score -inf. When no point has a
    positive rate the least negative one is returned; check
    ``OptResult.positive_key``.
    """
    family = Family.parse(family)
    box = box or OptBox()
    dims = active_dimensions(family, box)
    fixed = {name: box.bounds(name)[0] for name in DIMENSIONS}
    counter = [0]

    def params_of(x) -> dict:
        p = dict(fixed)
        for name, value in zip(dims, x):
            lo, hi = box.bounds(name)
            p[name] = float(min(max(value, lo), hi))
        return p

    def rate(p: dict) -> float:
        counter[0] += 1
        try:
            return secret_key_rate(_spec_from(family, p), link, gain_mode, gain, convention=convention).K
        except PhysicsError:
            return -math.inf

    def candidate(p: dict, K: float) -> _Candidate:
        return _Candidate(K, p["V"], p["d"], p["T_S"])

    axes = [_grid_axis(name, box) for name in dims]
    grid = []
    for point in itertools.product(*axes):
        p = params_of(point)
        grid.append(candidate(p, rate(p)))
    if not dims:
        grid.append(candidate(fixed, rate(fixed)))

    order = sorted(grid, key=lambda c: (-c.K, c.V, c.d, -c.T_S))
    best = order[0]
    for c in order[1:]:
        if c.better_than(best):
            best = c

    if dims:
        seeds = []
        for c in order:
            if not math.isfinite(c.K):
                break
            x = tuple(getattr(c, n) for n in dims)
            if x not in seeds:
                seeds.append(x)
            if len(seeds) == n_seeds:
                break
        bounds = [box.bounds(n) for n in dims]
        for x0 in seeds:
            res = _refine(lambda x: -rate(params_of(x)), np.array(x0), bounds, dims)
            p = params_of(res)
            c = candidate(p, rate(p))
            if c.better_than(best):
                best = c

    spec = _spec_from(family, best._asdict())
    final = secret_key_rate(spec, link, gain_mode, gain, convention=convention).K if math.isfinite(best.K) else best.K
    flags = {}
    for name in dims:
        lo, hi = box.bounds(name)
        value = getattr(best, name)
        tol = 1e-6 * max(1.0, abs(hi - lo))
        flags[name] = bool(value - lo <= tol or hi - value <= tol)
    return OptResult(best_params=spec, best_K=final, evaluations=counter[0], at_boundary=flags)


def _refine(objective: Callable, x0: np.ndarray, bounds, names) -> np.ndarray:
    n = len(x0)
    simplex = [x0.copy()]
    for i, (lo, hi) in enumerate(bounds):
        step = 0.05 * (hi - lo)
        if names[i] == "T_S":
            # the optimum hugs T_S -> 1, so step on the scale of 1 - T_S
            step = min(step, max(0.5 * (1.0 - x0[i]), 1e-5))
        vertex = x0.copy()
        vertex[i] = x0[i] + step if x0[i] + step <= hi else x0[i] - step
        simplex.append(vertex)
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        bounds=bounds,
        options={
            "initial_simplex": np.array(simplex),
            "xatol": 1e-8,
            "fatol": 1e-16,
            "maxiter": 600 * n,
            "maxfev": 800 * n,
        },
    )
    return res.x


class VarianceScan(NamedTuple):
    V: np.ndarray
    K: np.ndarray

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.K))

    @property
    def V_opt(self) -> float:
        return float(self.V[self.argmax])

    def is_interior_max(self) -> bool:
        return 0 < self.argmax < len(self.V) - 1

    def is_single_peaked(self, clip_negative: bool = False) -> bool:
        """Non-decreasing up to the argmax and non-increasing after it.

        With ``clip_negative`` the test is applied to max(K, 0), the rate that
        can actually be distilled; negative values all mean "no key".
        """
        k = np.maximum(self.K, 0.0) if clip_negative else self.K
        i = self.argmax
        return bool(np.all(np.diff(k[: i + 1]) >= 0) and np.all(np.diff(k[i:]) <= 0))


def scan_variance(
    family,
    link: LinkBudget,
    V_grid,
    d: float = 0.0,
    T_S: float | None = None,
    *,
    gain_mode: str = "li-optimal",
    gain: float | None = None,
    convention: str = DEFAULT_CONVENTION,
) -> VarianceScan:
    family = Family.parse(family)
    V_grid = np.asarray(V_grid, dtype=float)
    if V_grid.size == 0:
        raise ValueError("empty variance grid")
    ks = []
    for V in V_grid:
        spec = StateSpec(family, V, d if family.displaced else 0.0, T_S if family.subtracted else None)
        ks.append(secret_key_rate(spec, link, gain_mode, gain, convention=convention).K)
    return VarianceScan(V_grid, np.array(ks))


def max_distance(
    family,
    link: LinkBudget,
    K_target: float = 0.0,
    *,
    state: StateSpec | None = None,
    box: OptBox | None = None,
    gain_mode: str = "li-optimal",
    gain: float | None = None,
    convention: str = DEFAULT_CONVENTION,
    tol: float = DISTANCE_TOL,
) -> float:
    """Largest L_AC (km) whose key rate exceeds ``K_target``.

    With ``state`` given the state parameters are held fixed; otherwise K is
    optimized over ``box`` at every trial distance. The excess noise follows
    its linear fit as L_AC varies. The comparison is strict (K > K_target)
    because the vacuum source at V = 1 yields K = 0 at every distance.

    Raises:
        NoBracketError: if the target is missed already at L_AC = 0.
    """
    family = Family.parse(family)
    if K_target < 0:
        raise ValueError("K_target must be >= 0")

    def rate(L: float) -> float:
        trial = link.at_distance(L)
        try:
            if state is not None:
                return secret_key_rate(state, trial, gain_mode, gain, convention=convention).K
            return optimize_key_rate(family, trial, box, gain_mode=gain_mode, gain=gain,
                                     convention=convention).best_K
        except PhysicsError:
            return -math.inf

    if not rate(0.0) > K_target:
        raise NoBracketError(f"{family.value}: K <= {K_target:g} already at L_AC = 0")
    lo, hi = 0.0, 50.0
    while rate(hi) > K_target:
        lo, hi = hi, 2.0 * hi
        if hi > MAX_DISTANCE_KM:
            raise NoBracketError(f"{family.value}: K > {K_target:g} beyond {MAX_DISTANCE_KM} km")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate(mid) > K_target:
            lo = mid
        else:
            hi = mid
    return lo


def frontier(
    family,
    link: LinkBudget,
    V_grid,
    K_target: float,
    *,
    d: float | None = None,
    T_S: float | None = None,
    box: OptBox | None = None,
    gain_mode: str = "li-optimal",
    gain: float | None = None,
    convention: str = DEFAULT_CONVENTION,
) -> list[tuple[float, float | None]]:
    """Maximum distance at each variance for a fixed target rate.

    Parameters left as None are optimized within ``box`` at every distance;
    given values are held fixed. Points without a bracket map to None.
    """
    family = Family.parse(family)
    V_grid = [float(v) for v in V_grid]
    if not V_grid:
        raise ValueError("empty variance grid")
    rows = []
    for V in V_grid:
        rows.append((V, frontier_point(family, link, V, K_target, d=d, T_S=T_S, box=box,
                                       gain_mode=gain_mode, gain=gain, convention=convention)))
    return rows


def frontier_point(family, link, V, K_target, *, d=None, T_S=None, box=None,
                   gain_mode="li-optimal", gain=None, convention=DEFAULT_CONVENTION):
    family = Family.parse(family)
    needs_opt = (family.displaced and d is None) or (family.subtracted and T_S is None)
    kwargs = dict(gain_mode=gain_mode, gain=gain, convention=convention)
    try:
        if needs_opt:
            base = box or OptBox()
            pinned = OptBox(
                V_lo=V, V_hi=V,
                d_lo=base.d_lo if d is None else d, d_hi=base.d_hi if d is None else d,
                Ts_lo=base.Ts_lo if T_S is None else T_S, Ts_hi=base.Ts_hi if T_S is None else T_S,
            )
            return max_distance(family, link, K_target, box=pinned, **kwargs)
        spec = StateSpec(family, V, (d or 0.0) if family.displaced else 0.0,
                         T_S if family.subtracted else None)
        return max_distance(family, link, K_target, state=spec, **kwargs)
    except NoBracketError:
        return None


def optimal_parameter_trace(
    family,
    link: LinkBudget,
    L_grid,
    box: OptBox | None = None,
    **kwargs,
) -> list[tuple[float, float, float, float | None, float]]:
    """Rows (L_AC, V*, d*, T_S*, K*) from optimizing at every distance."""
    rows = []
    for L in L_grid:
        res = optimize_key_rate(family, link.at_distance(float(L)), box, **kwargs)
        p = res.best_params
        rows.append((float(L), p.V, p.d, p.T_S, res.best_K))
    return rows
