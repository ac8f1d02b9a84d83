"""Sweep drivers that produce the figure tables.

Each figure is split into independent points that can be evaluated in worker
processes; rows are always merged back in task order and then sorted, so the
output does not depend on the number of workers.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import LinkBudget
from .config import RunConfig
from .errors import PhysicsError
from .keyrate import secret_key_rate
from .optimize import frontier_point, optimize_key_rate
from .states import Family, StateSpec

FIGURES = ("fig2", "fig3", "fig4", "fig5")

COLUMNS = {
    "fig2": ("L_AC_km", "V", "K"),
    "fig3": ("family", "L_AC_km", "K_opt"),
    "fig4": ("family", "L_AC_km", "V_opt", "d_opt", "Ts_opt"),
    "fig5": ("family", "V", "L_max_km"),
}

ALL_FAMILIES = ("tmsv", "sps-tmsv", "sps-tmsc")
# Representative distances for the variance scan; the exact curves are not specified.
FIG2_DISTANCES = (40.0, 80.0, 120.0, 160.0)
FIG2_V_GRID = tuple(float(v) for v in np.round(np.linspace(1.0, 15.0, 57), 10))
FIG3_L_GRID = tuple(float(x) for x in range(0, 165, 5))
FIG4_L_GRID = tuple(float(x) for x in range(5, 155, 5))
FIG5_V_GRID = tuple([1.0] + [1.5 + 0.5 * i for i in range(18)] + [float(v) for v in range(12, 52, 2)])
FIG5_K_TARGET = 1e-3
FIG5_D = 2.0
FIG5_TS = 0.9


@dataclass(frozen=True)
class _Context:
    link: LinkBudget
    gain_mode: str
    gain: float | None
    convention: str

    @property
    def kwargs(self) -> dict:
        return {"gain_mode": self.gain_mode, "gain": self.gain, "convention": self.convention}


def _fig2_point(ctx, family, L, V, d, T_S):
    fam = Family.parse(family)
    spec = StateSpec(fam, V, d if fam.displaced else 0.0, T_S if fam.subtracted else None)
    K = secret_key_rate(spec, ctx.link.at_distance(L), ctx.gain_mode, ctx.gain, convention=ctx.convention).K
    return (L, V, K)


def _fig3_point(ctx, family, L):
    res = optimize_key_rate(family, ctx.link.at_distance(L), **ctx.kwargs)
    return (family, L, res.best_K)


def _fig4_point(ctx, family, L):
    res = optimize_key_rate(family, ctx.link.at_distance(L), **ctx.kwargs)
    p = res.best_params
    fam = p.family
    return (family, L, p.V, p.d if fam.displaced else None, p.T_S)


def _fig5_point(ctx, family, V, K_target, d, T_S):
    L_max = frontier_point(family, ctx.link, V, K_target, d=d, T_S=T_S, **ctx.kwargs)
    return None if L_max is None else (family, V, L_max)


_WORKERS = {"fig2": _fig2_point, "fig3": _fig3_point, "fig4": _fig4_point, "fig5": _fig5_point}


def _run_task(task):
    name, ctx, args = task
    try:
        return ("ok", _WORKERS[name](ctx, *args))
    except PhysicsError as exc:
        return ("error", f"{name} point {args}: {type(exc).__name__}: {exc}")


def effective_config(name: str, cfg: RunConfig) -> RunConfig:
    """Fill the figure-specific defaults (grids, families, fig5 settings) into ``cfg``."""
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; choose from {FIGURES}")
    updates = {"scenario": name}
    if name == "fig2":
        family = Family.parse(cfg.family)
        if family.subtracted and cfg.Ts is None:
            raise ValueError(f"fig2 for {family.value} needs a fixed T_S")
        updates["family"] = family.value
        updates["families"] = None
        updates["L_grid"] = list(cfg.L_grid or FIG2_DISTANCES)
        updates["V_grid"] = list(cfg.V_grid or FIG2_V_GRID)
        updates["d"] = (cfg.d or 0.0) if family.displaced else None
        updates["Ts"] = cfg.Ts if family.subtracted else None
    else:
        updates["families"] = [Family.parse(f).value for f in (cfg.families or ALL_FAMILIES)]
    if name in ("fig3", "fig4"):
        updates["L_grid"] = list(cfg.L_grid or (FIG3_L_GRID if name == "fig3" else FIG4_L_GRID))
    if name == "fig5":
        updates["V_grid"] = list(cfg.V_grid or FIG5_V_GRID)
        updates["K_target"] = FIG5_K_TARGET if cfg.K_target is None else cfg.K_target
        if cfg.fig5_mode == "fixed":
            updates["d"] = FIG5_D if cfg.d is None else cfg.d
            updates["Ts"] = FIG5_TS if cfg.Ts is None else cfg.Ts
    return dataclasses.replace(cfg, **updates)


def figure_tasks(name: str, cfg: RunConfig) -> list:
    """Independent work items (name, context, args) for one figure, from an effective config."""
    ctx = _Context(cfg.link(), cfg.gain_mode, cfg.gain, cfg.d_convention)
    tasks = []
    if name == "fig2":
        for L in cfg.L_grid:
            for V in cfg.V_grid:
                tasks.append((name, ctx, (cfg.family, float(L), float(V), cfg.d or 0.0, cfg.Ts)))
    elif name in ("fig3", "fig4"):
        for family in cfg.families:
            for L in cfg.L_grid:
                tasks.append((name, ctx, (family, float(L))))
    else:
        for family in cfg.families:
            for V in cfg.V_grid:
                tasks.append((name, ctx, (family, float(V), cfg.K_target, cfg.d, cfg.Ts)))
    return tasks


def run_tasks(tasks, threads: int = 1) -> list:
    """Evaluate tasks, in worker processes when ``threads > 1``; order is preserved."""
    if threads <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_task, tasks, chunksize=1))


def _sort_key(row):
    return tuple(v if isinstance(v, str) else (math.inf if v is None else v) for v in row)


def compute_figure(name: str, cfg: RunConfig):
    """Return (columns, rows, errors) for a figure; ``cfg`` must be effective.

    ``errors`` lists the messages of points that raised a physics error; the
    corresponding rows are omitted. fig5 points without a bracket are
    omitted silently.
    """
    results = run_tasks(figure_tasks(name, cfg), cfg.threads)
    rows, errors = [], []
    for status, value in results:
        if status == "error":
            errors.append(value)
        elif value is not None:
            rows.append(value)
    rows.sort(key=_sort_key)
    return COLUMNS[name], rows, errors
