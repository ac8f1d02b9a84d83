"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line through the ``acceptance_report`` fixture;
the lines are collected in the terminal summary.
"""

import numpy as np
import pytest

from cvmdi import oracles
from cvmdi.channel import LinkBudget, equivalent_excess_noise, excess_noise_at, transmissivity_from_distance
from cvmdi.cli import main
from cvmdi.figures import FIG2_V_GRID
from cvmdi.fock import fock_observables, resolve_cutoff
from cvmdi.gaussian import entropy_g, symplectic_eigenvalues, tmsv_covariance, von_neumann_entropy
from cvmdi.keyrate import secret_key_rate
from cvmdi.optimize import frontier_point, max_distance, optimize_key_rate, scan_variance
from cvmdi.states import StateSpec

TRACE_L = tuple(float(x) for x in range(5, 150, 10))


@pytest.fixture(scope="module")
def optimized_limits():
    link = LinkBudget()
    return {fam: max_distance(fam, link, 0.0) for fam in ("tmsv", "sps-tmsv", "sps-tmsc")}


@pytest.fixture(scope="module")
def sps_tmsc_trace():
    link = LinkBudget()
    return {L: optimize_key_rate("sps-tmsc", link.at_distance(L)) for L in TRACE_L + (25.0, 125.0)}


def test_criterion_1_oracle_cross_checks(acceptance_report):
    worst_p = 0.0
    for V in (1.5, 2.0, 6.0, 15.0):
        for T_S in (0.5, 0.9, 0.99):
            spec = StateSpec("sps-tmsv", V, 0.0, T_S)
            n = max(resolve_cutoff(spec, tol=1e-12))
            p, _, _ = fock_observables(spec, n, n)
            worst_p = max(worst_p, abs(p - oracles.sps_tmsv_probability(V, T_S)))
    worst_cov = 0.0
    for V in (2.0, 6.0):
        for d in (0.0, 1.0, 5.0):
            spec = StateSpec("tmsc", V, d)
            n = max(resolve_cutoff(spec, tol=1e-10))
            _, _, cov = fock_observables(spec, n, n)
            worst_cov = max(worst_cov, float(np.max(np.abs(cov - tmsv_covariance(V)))))
    passed = worst_p <= 1e-8 and worst_cov <= 1e-8
    acceptance_report(1, "oracle cross-checks", passed,
                      f"max |dP_SPS|={worst_p:.2e}, max |dcov|={worst_cov:.2e}")
    assert passed


def test_criterion_2_symplectic_oracle(acceptance_report):
    rng = np.random.default_rng(20240501)
    worst = 0.0
    for _ in range(1000):
        cov = oracles.random_block_covariance(rng)
        closed = np.array(symplectic_eigenvalues(cov))
        generic = np.array(oracles.generic_symplectic_spectrum(cov))
        worst = max(worst, float(np.max(np.abs(closed - generic) / np.maximum(1.0, generic))))
    passed = worst <= 1e-9
    acceptance_report(2, "closed-form vs generic symplectic spectrum", passed, f"max rel err {worst:.2e}")
    assert passed


def test_criterion_3_interior_optimum(acceptance_report):
    scans = {L: scan_variance("tmsv", LinkBudget(L_AC=L), FIG2_V_GRID) for L in (40.0, 80.0, 120.0)}
    peaked = all(s.is_single_peaked(clip_negative=True) for s in scans.values())
    v_opt = [scans[L].V_opt for L in sorted(scans)]
    decreasing = all(a > b for a, b in zip(v_opt, v_opt[1:]))
    passed = peaked and decreasing
    detail = ", ".join(f"V*({L:g} km)={scans[L].V_opt:g}" for L in sorted(scans))
    acceptance_report(3, "single-peaked K(V) with argmax decreasing in L", passed, detail)
    assert passed


def test_criterion_4_optimal_parameters(acceptance_report, sps_tmsc_trace, optimized_limits):
    ts25 = sps_tmsc_trace[25.0].best_params.T_S
    ts125 = sps_tmsc_trace[125.0].best_params.T_S
    d_hits = sum(abs(sps_tmsc_trace[L].best_params.d - 5.0) < 1e-6 for L in TRACE_L) / len(TRACE_L)
    link = LinkBudget()
    v_small = {
        "tmsv": optimize_key_rate("tmsv", link.at_distance(5.0)).best_params.V,
        "sps-tmsc": sps_tmsc_trace[5.0].best_params.V,
    }
    v_limit = {
        fam: optimize_key_rate(fam, link.at_distance(optimized_limits[fam] - 5.0)).best_params.V
        for fam in ("tmsv", "sps-tmsc")
    }
    checks = [
        abs(ts25 - 0.995) <= 0.005,
        abs(ts125 - 0.989) <= 0.005,
        d_hits >= 0.9,
        all(abs(v - 15.0) < 1e-6 for v in v_small.values()),
        all(5.0 <= v <= 7.0 for v in v_limit.values()),
    ]
    passed = all(checks)
    detail = (f"Ts*(25)={ts25:.4f}, Ts*(125)={ts125:.4f}, d*=5 on {100 * d_hits:.0f}%, "
              f"V*(5 km)={v_small}, V*(L_max-5)=" + "{" + ", ".join(f"{k}: {v:.2f}" for k, v in v_limit.items()) + "}")
    acceptance_report(4, "optimal-parameter reproduction", passed, detail)
    assert passed


def test_criterion_5_headline_ordering(acceptance_report, optimized_limits):
    lm = optimized_limits
    passed = lm["sps-tmsv"] < lm["tmsv"] and abs(lm["tmsv"] - lm["sps-tmsc"]) <= 2.0
    detail = ", ".join(f"{k}={v:.2f} km" for k, v in lm.items())
    acceptance_report(5, "L_max ordering at optimum", passed, detail)
    assert passed


def test_criterion_6_high_variance_frontier(acceptance_report):
    link = LinkBudget()

    def limits(V):
        return {fam: frontier_point(fam, link, V, 1e-3, d=2.0, T_S=0.9)
                for fam in ("tmsv", "sps-tmsv", "sps-tmsc")}

    hi, mid = limits(50.0), limits(6.0)
    known = all(v is not None for v in list(hi.values()) + list(mid.values()))
    passed = known and hi["tmsv"] < hi["sps-tmsv"] < hi["sps-tmsc"]
    passed = passed and mid["sps-tmsv"] < mid["tmsv"] and abs(mid["tmsv"] - mid["sps-tmsc"]) <= 2.0

    def show(row):
        return ", ".join(f"{k}={'none' if v is None else f'{v:.2f}'}" for k, v in row.items())

    acceptance_report(6, "fixed-parameter frontier ordering", passed, f"V=50: {show(hi)}; V=6: {show(mid)}")
    assert passed


def test_criterion_7_identities(acceptance_report):
    failures = []
    for L in (0.0, 50.0, 120.0):
        link = LinkBudget(L_AC=L)
        for V in (1.5, 6.0, 15.0):
            for d in (0.0, 1.0, 5.0):
                if secret_key_rate(StateSpec("tmsc", V, d), link).K != secret_key_rate(StateSpec("tmsv", V), link).K:
                    failures.append(f"K(TMSC) != K(TMSV) at L={L}, V={V}, d={d}")
    for L in np.linspace(0.0, 200.0, 81):
        T_A = transmissivity_from_distance(L)
        eps_A = excess_noise_at(L)
        for eps_B in (0.0, 19.09e-5, 0.01):
            lhs = equivalent_excess_noise(T_A, eps_A, 1.0, eps_B)
            if abs(lhs - (eps_A + eps_B / T_A)) > 1e-15:
                failures.append(f"one-way reduction at L={L:g}, eps_B={eps_B}")
    if entropy_g(1.0) != 0.0:
        failures.append("g(1) != 0")
    for V in (1.0, 2.0, 6.0, 15.0, 50.0):
        if von_neumann_entropy(tmsv_covariance(V)) != 0.0:
            failures.append(f"pure TMSV entropy nonzero at V={V}")
    link = LinkBudget(L_AC=50.0)
    worst = 0.0
    for spec in (StateSpec("sps-tmsv", 6.0, 0.0, 0.9), StateSpec("sps-tmsc", 6.0, 5.0, 0.99),
                 StateSpec("sps-tmsc", 15.0, 2.0, 0.95)):
        n1, n2 = resolve_cutoff(spec)
        k0 = secret_key_rate(spec, link, engine="fock", cutoffs=(n1, n2)).K
        k1 = secret_key_rate(spec, link, engine="fock", cutoffs=(n1 + 10, n2 + 10)).K
        worst = max(worst, abs(k1 - k0))
    if not worst < 1e-6:
        failures.append(f"cutoff +10 changes K by {worst:.2e}")
    passed = not failures
    acceptance_report(7, "identity and algebraic suite", passed,
                      "; ".join(failures) or f"max |dK| under cutoff+10 = {worst:.1e}")
    assert passed


def _figure_bytes(tmp_path, tag, args):
    out = tmp_path / f"{tag}.csv"
    assert main(["figure", *args, "--out", str(out)]) == 0
    return out.read_bytes()


@pytest.mark.parametrize("name,args", [
    ("fig2", []),
    ("fig3", ["--L-grid", "0,40,80,120", "--families", "tmsv,sps-tmsc"]),
    ("fig4", ["--L-grid", "20,100", "--families", "sps-tmsv"]),
    ("fig5", ["--V-grid", "2,6,50", "--families", "tmsv,sps-tmsv,sps-tmsc"]),
])
def test_criterion_8_determinism(acceptance_report, tmp_path, name, args):
    serial = _figure_bytes(tmp_path, "serial", [name, *args, "--threads", "1"])
    again = _figure_bytes(tmp_path, "again", [name, *args, "--threads", "1"])
    parallel = _figure_bytes(tmp_path, "parallel", [name, *args, "--threads", "3"])
    passed = serial == again == parallel and len(serial.splitlines()) > 1
    acceptance_report(8, f"byte-identical {name} across --threads 1/3", passed, f"{len(serial)} bytes")
    assert passed
