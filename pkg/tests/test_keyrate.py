import math

import numpy as np
import pytest

from cvmdi.channel import LinkBudget, OneWayChannel, one_way_reduce
from cvmdi.errors import VanishingPostSelectionError
from cvmdi.fock import resolve_cutoff
from cvmdi.gaussian import tmsv_covariance
from cvmdi.keyrate import holevo_bound, propagate, secret_key_rate, source_covariance
from cvmdi.states import StateSpec

from helpers import GOLDEN


def test_propagate_identity_channel():
    cov = tmsv_covariance(4.0)
    out = propagate(cov, OneWayChannel(T=1.0, eps_th=0.0, chi_ch=0.0, g=math.sqrt(2)))
    assert np.array_equal(out, cov)


def test_propagate_arithmetic():
    out = propagate(tmsv_covariance(2.0), OneWayChannel(T=0.5, eps_th=0.0, chi_ch=3.0, g=1.0))
    assert out[2, 2] == pytest.approx(2.5) and out[3, 3] == pytest.approx(2.5)
    assert out[0, 2] == pytest.approx(math.sqrt(0.5) * math.sqrt(3.0))
    assert out[1, 3] == pytest.approx(-math.sqrt(0.5) * math.sqrt(3.0))
    assert np.array_equal(out[:2, :2], tmsv_covariance(2.0)[:2, :2])


def test_holevo_pure_lossless():
    chi, nu1, nu2, nu3 = holevo_bound(tmsv_covariance(5.0))
    assert nu1 == pytest.approx(1.0, abs=1e-12) and nu2 == pytest.approx(1.0, abs=1e-12)
    assert nu3 == pytest.approx(1.0, abs=1e-12)
    assert chi == 0.0


def test_holevo_product_state():
    v = 3.0
    chi, *_ = holevo_bound(np.diag([v] * 4))
    from cvmdi.gaussian import entropy_g

    assert chi == pytest.approx(entropy_g(v), abs=1e-14)


def test_golden_pipeline_at_50_km():
    ref = GOLDEN["pipeline_L50_tmsv_V6"]
    kr = secret_key_rate(StateSpec("tmsv", 6.0), LinkBudget(L_AC=50.0))
    assert np.allclose(kr.cov_after, ref["cov_after"], rtol=1e-13, atol=0)
    for key in ("I_AB", "chi_BE", "K", "nu1", "nu2", "nu3"):
        assert getattr(kr, key) == pytest.approx(ref[key], rel=1e-10), key


def test_positive_key_at_120_km():
    kr = secret_key_rate(StateSpec("tmsv", 6.0), LinkBudget(L_AC=120.0))
    assert kr.K > 0
    assert kr.K == pytest.approx(GOLDEN["keyrate_tmsv_V6_L120"]["K"], rel=1e-9)


def test_sps_tmsc_against_fock_fixture():
    ref = GOLDEN["keyrate_sps_tmsc_V6_d5_Ts0.99_L50"]
    kr = secret_key_rate(StateSpec("sps-tmsc", 6.0, 5.0, 0.99), LinkBudget(L_AC=50.0))
    assert kr.P_SPS == pytest.approx(ref["P_SPS"], abs=1e-8)
    assert kr.K == pytest.approx(ref["K"], abs=1e-8)
    assert np.allclose(kr.cov_source, ref["cov"], atol=1e-8, rtol=0)


@pytest.mark.parametrize("L", [0.0, 40.0, 120.0])
@pytest.mark.parametrize("V", [1.5, 6.0, 15.0])
def test_displacement_alone_changes_nothing(L, V):
    link = LinkBudget(L_AC=L)
    base = secret_key_rate(StateSpec("tmsv", V), link)
    for d in (0.5, 2.0, 5.0):
        kr = secret_key_rate(StateSpec("tmsc", V, d), link)
        assert kr.K == base.K
        assert np.array_equal(kr.cov_after, base.cov_after)


@pytest.mark.parametrize("engine", ["analytic", "fock"])
def test_undisplaced_sps_tmsc_reduces_to_sps_tmsv(engine):
    link = LinkBudget(L_AC=60.0)
    a = secret_key_rate(StateSpec("sps-tmsc", 4.0, 0.0, 0.9), link, engine=engine)
    b = secret_key_rate(StateSpec("sps-tmsv", 4.0, 0.0, 0.9), link, engine=engine)
    assert abs(a.K - b.K) <= 1e-12
    assert a.cov_after.shape == b.cov_after.shape
    assert np.abs(a.cov_after - b.cov_after).max() <= 1e-12


def test_breakdown_invariants():
    link = LinkBudget(L_AC=70.0)
    for spec in (StateSpec("tmsv", 6.0), StateSpec("tmsc", 6.0, 1.0),
                 StateSpec("sps-tmsv", 6.0, 0.0, 0.8), StateSpec("sps-tmsc", 9.0, 3.0, 0.97)):
        kr = secret_key_rate(spec, link)
        assert kr.K == pytest.approx(kr.P_SPS * (link.beta * kr.I_AB - kr.chi_BE), abs=1e-12)
        assert kr.nu3 > 0
        if not spec.family.subtracted:
            assert kr.P_SPS == 1.0


def test_holevo_nonnegative_on_default_grid():
    for L in range(0, 170, 20):
        link = LinkBudget(L_AC=float(L))
        for V in np.linspace(1.0, 15.0, 15):
            for spec in (StateSpec("tmsv", V), StateSpec("sps-tmsc", max(V, 1.1), 2.5, 0.99)):
                assert secret_key_rate(spec, link).chi_BE >= -1e-9


def test_mutual_information_decreases_with_distance():
    for spec in (StateSpec("tmsv", 6.0), StateSpec("sps-tmsc", 6.0, 5.0, 0.99)):
        info = [secret_key_rate(spec, LinkBudget(L_AC=L)).I_AB for L in np.linspace(0, 200, 41)]
        assert np.all(np.diff(info) < 0)


@pytest.mark.parametrize("spec", [StateSpec("sps-tmsv", 6.0, 0.0, 0.9), StateSpec("sps-tmsc", 6.0, 2.0, 0.99)])
def test_key_rate_converged_in_cutoff(spec):
    link = LinkBudget(L_AC=80.0)
    n1, n2 = resolve_cutoff(spec)
    k0 = secret_key_rate(spec, link, engine="fock", cutoffs=(n1, n2)).K
    k1 = secret_key_rate(spec, link, engine="fock", cutoffs=(n1 + 10, n2 + 10)).K
    assert abs(k1 - k0) < 1e-6
    assert abs(secret_key_rate(spec, link).K - k0) < 1e-8


def test_vanishing_post_selection_propagates():
    with pytest.raises(VanishingPostSelectionError):
        secret_key_rate(StateSpec("sps-tmsv", 6.0, 0.0, 1.0), LinkBudget(L_AC=50.0))


def test_numeric_gain_is_at_least_default():
    link = LinkBudget(L_AC=80.0)
    spec = StateSpec("tmsv", 6.0)
    default = secret_key_rate(spec, link)
    numeric = secret_key_rate(spec, link, "numeric")
    assert numeric.K >= default.K - 1e-12
    assert 0 < numeric.channel.g <= math.sqrt(2.0) + 1e-12


def test_vacuum_source_has_no_key():
    kr = secret_key_rate(StateSpec("tmsv", 1.0), LinkBudget(L_AC=30.0))
    assert kr.I_AB == 0.0 and kr.K <= 0.0


def test_unknown_engine():
    with pytest.raises(ValueError):
        source_covariance(StateSpec("sps-tmsv", 2.0, 0.0, 0.5), engine="magic")


def test_breakdown_serializes():
    d = secret_key_rate(StateSpec("sps-tmsc", 3.0, 1.0, 0.9), LinkBudget(L_AC=10.0)).as_dict()
    assert set(d) >= {"P_SPS", "I_AB", "chi_BE", "K", "nu1", "nu2", "nu3", "channel", "cov_after"}
    assert one_way_reduce(LinkBudget(L_AC=10.0), 3.0).T == d["channel"]["T"]
