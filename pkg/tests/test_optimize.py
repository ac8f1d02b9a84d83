import numpy as np
import pytest

from cvmdi.channel import LinkBudget
from cvmdi.errors import NoBracketError
from cvmdi.figures import FIG2_V_GRID
from cvmdi.keyrate import secret_key_rate
from cvmdi.optimize import (
    OptBox,
    active_dimensions,
    frontier,
    max_distance,
    optimize_key_rate,
    scan_variance,
    ts_grid,
)
from cvmdi.states import Family

from helpers import GOLDEN


def test_box_validation():
    with pytest.raises(ValueError):
        OptBox(V_lo=5.0, V_hi=2.0)
    with pytest.raises(ValueError):
        OptBox(V_lo=0.5)
    with pytest.raises(ValueError):
        OptBox(Ts_hi=1.5)


def test_dimension_dropping():
    box = OptBox()
    assert active_dimensions(Family.TMSV, box) == ("V",)
    assert active_dimensions(Family.SPS_TMSV, box) == ("V", "T_S")
    assert active_dimensions(Family.SPS_TMSC, box) == ("V", "d", "T_S")
    assert active_dimensions(Family.SPS_TMSC, OptBox.fixed_variance(6.0)) == ("d", "T_S")


def test_ts_grid_is_dense_near_one():
    grid = ts_grid(0.0, 1.0)
    assert len(grid) == 21
    assert np.sum(grid >= 0.9) == 15 and grid.max() < 1.0
    assert np.all(np.diff(grid) > 0)


def test_tmsv_optimum_at_short_distance():
    res = optimize_key_rate("tmsv", LinkBudget(L_AC=25.0))
    assert res.best_params.V == 15.0
    assert res.at_boundary["V"]


def test_sps_tmsc_optimum_at_short_distance():
    res = optimize_key_rate("sps-tmsc", LinkBudget(L_AC=25.0))
    assert abs(res.best_params.T_S - 0.995) <= 0.005
    assert res.best_params.d == 5.0 and res.at_boundary["d"]


def test_result_reproduces_key_rate_and_beats_grid():
    link = LinkBudget(L_AC=90.0)
    res = optimize_key_rate("sps-tmsv", link)
    assert res.best_K == secret_key_rate(res.best_params, link).K
    grid_best = max(
        secret_key_rate(spec, link).K
        for spec in [res.best_params.__class__("sps-tmsv", V, 0.0, t)
                     for V in np.linspace(1.0, 15.0, 15)[1:] for t in ts_grid(0.0, 1.0)]
    )
    assert res.best_K >= grid_best


def test_determinism():
    link = LinkBudget(L_AC=60.0)
    a = optimize_key_rate("sps-tmsc", link)
    b = optimize_key_rate("sps-tmsc", link)
    assert a == b


def test_no_positive_key_flag():
    res = optimize_key_rate("sps-tmsv", LinkBudget(L_AC=300.0))
    assert not res.positive_key
    assert res.best_K <= 0


@pytest.mark.parametrize("L", [30.0, 100.0])
def test_pinned_displacement_matches_reduced_family(L):
    link = LinkBudget(L_AC=L)
    pinned = optimize_key_rate("sps-tmsc", link, OptBox(d_hi=0.0))
    reduced = optimize_key_rate("sps-tmsv", link)
    assert pinned.best_K == pytest.approx(reduced.best_K, abs=1e-12)
    assert pinned.best_params.V == pytest.approx(reduced.best_params.V, abs=1e-9)
    tmsc = optimize_key_rate("tmsc", link, OptBox(d_hi=0.0))
    tmsv = optimize_key_rate("tmsv", link)
    assert tmsc.best_K == tmsv.best_K


def test_scan_variance_shape():
    scans = [scan_variance("tmsv", LinkBudget(L_AC=L), FIG2_V_GRID) for L in (40.0, 80.0, 120.0)]
    for s in scans:
        assert s.is_interior_max() and s.is_single_peaked(clip_negative=True)
    assert scans[0].V_opt > scans[1].V_opt > scans[2].V_opt
    assert scans[0].K[0] <= 0.0


def test_scan_variance_golden():
    ref = GOLDEN["scan_tmsv_L80"]
    s = scan_variance("tmsv", LinkBudget(L_AC=80.0), ref["V"])
    assert np.allclose(s.K, ref["K"], rtol=1e-9, atol=0)


def test_scan_rejects_empty_grid():
    with pytest.raises(ValueError):
        scan_variance("tmsv", LinkBudget(), [])


def test_max_distance_fixed_state():
    from cvmdi.states import StateSpec

    spec = StateSpec("tmsv", 6.0)
    L0 = max_distance("tmsv", LinkBudget(), 0.0, state=spec)
    L1 = max_distance("tmsv", LinkBudget(), 1e-3, state=spec)
    L2 = max_distance("tmsv", LinkBudget(), 1e-2, state=spec)
    assert L0 > L1 > L2 > 0
    assert secret_key_rate(spec, LinkBudget(L_AC=L0)).K > 0
    assert secret_key_rate(spec, LinkBudget(L_AC=L0 + 0.01)).K <= 0
    with pytest.raises(NoBracketError):
        max_distance("tmsv", LinkBudget(), 10.0, state=spec)


def test_frontier_tmsv_peaks_near_six():
    rows = frontier("tmsv", LinkBudget(), np.arange(1.0, 16.0, 1.0), 1e-3)
    assert rows[0] == (1.0, None)
    Vs = [V for V, L in rows if L is not None]
    Ls = [L for V, L in rows if L is not None]
    assert 5.0 <= Vs[int(np.argmax(Ls))] <= 7.0
