"""Fast invariant suite behind ``cvmdi selfcheck``."""

from __future__ import annotations

import csv
import json
import pathlib
import sys
import time
from importlib import resources

import numpy as np

from . import oracles
from .analytic import photon_subtracted_moments
from .channel import LinkBudget, equivalent_excess_noise, excess_noise_at, transmissivity_from_distance
from .fock import build_tmsc, fock_observables, moments, subtract_photon
from .gaussian import symplectic_eigenvalues
from .keyrate import secret_key_rate
from .states import StateSpec, displacement_amplitude


def default_fixture_dir() -> pathlib.Path:
    return pathlib.Path(str(resources.files("cvmdi") / "data"))


def _close(name, got, want, tol):
    got, want = np.asarray(got, dtype=float), np.asarray(want, dtype=float)
    if want.ndim and got.shape != want.shape:
        raise AssertionError(f"{name}: shape {got.shape} differs from reference {want.shape}")
    err = float(np.max(np.abs(got - want))) if got.size else 0.0
    if not err <= tol:
        raise AssertionError(f"{name}: deviation {err:.3e} exceeds {tol:g}")


def check_displacement_identity(fixtures):
    for V, alpha in ((1.5, 0.2), (2.5, 0.4)):
        ref = oracles.direct_tmsc(V, alpha, 110)
        got = build_tmsc(V, alpha, 60, 60).amp
        _close(f"V={V}, alpha={alpha}", np.abs(got - ref[:60, :60]), 0.0, 1e-8)


def check_kraus_ancilla(fixtures):
    state = build_tmsc(2.0, 0.3, 30, 30)
    out, p = subtract_photon(state, 0.8)
    ref, p_ref = oracles.ancilla_subtraction(state.amp, 0.8)
    _close("P_SPS", p, p_ref, 1e-10)
    _close("amplitudes", np.abs(oracles.align_phase(out.amp) - oracles.align_phase(ref)), 0.0, 1e-10)


def check_sps_probability(fixtures):
    for V in (1.5, 2.0, 6.0):
        for T_S in (0.5, 0.9):
            p, _, _ = fock_observables(StateSpec("sps-tmsv", V, 0.0, T_S), 120, 120)
            _close(f"V={V}, T_S={T_S}", p, oracles.sps_tmsv_probability(V, T_S), 1e-8)


def check_symplectic(fixtures):
    rng = np.random.default_rng(7)
    for _ in range(200):
        cov = oracles.random_block_covariance(rng)
        pair = symplectic_eigenvalues(cov)
        _close("closed form vs |eig(i Omega cov)|", pair, oracles.generic_symplectic_spectrum(cov),
               1e-9 * max(1.0, pair[0]))
        if min(pair) < 1.0 - 1e-9:
            raise AssertionError(f"unphysical spectrum {pair}")


def check_one_way_identity(fixtures):
    for L in np.linspace(0.0, 200.0, 41):
        T_A = transmissivity_from_distance(L)
        eps_A = excess_noise_at(L)
        eps_th = equivalent_excess_noise(T_A, eps_A, 1.0, 19.09e-5)
        _close(f"L={L}", eps_th - eps_A, 19.09e-5 / T_A, 1e-15)


def check_analytic_vs_fock(fixtures):
    alpha = displacement_amplitude(1.0)
    p, mean, cov = photon_subtracted_moments(3.0, alpha, 0.9)
    p_f, mean_f, cov_f = fock_observables(StateSpec("sps-tmsc", 3.0, 1.0, 0.9), 90, 90)
    _close("P_SPS", p, p_f, 1e-8)
    _close("mean", mean, mean_f, 1e-8)
    _close("cov", cov, cov_f, 1e-8)


def _golden(fixtures):
    with open(pathlib.Path(fixtures) / "golden.json") as fh:
        return json.load(fh)


def check_fixture_amplitudes(fixtures):
    ref = _golden(fixtures)["sps_tmsv_V2_Ts0.9"]
    n = ref["cutoff"]
    expected = np.zeros((n, n), dtype=complex)
    with open(pathlib.Path(fixtures) / "sps_tmsv_V2_Ts0.9_amplitudes.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            expected[int(row["n1"]), int(row["n2"])] = complex(float(row["re"]), float(row["im"]))
    out, p = subtract_photon(build_tmsc(ref["V"], 0.0, n, n), ref["T_S"])
    _close("amplitudes", np.abs(out.amp - expected), 0.0, 1e-12)
    _close("P_SPS", p, ref["P_SPS"], 1e-12)
    _close("cov", moments(out)[1], ref["cov"], 1e-10)


def check_fixture_pipeline(fixtures):
    golden = _golden(fixtures)
    ref = golden["pipeline_L50_tmsv_V6"]
    kr = secret_key_rate(StateSpec("tmsv", 6.0), LinkBudget(L_AC=50.0))
    for key in ("I_AB", "chi_BE", "K", "nu1", "nu2", "nu3"):
        _close(key, getattr(kr, key), ref[key], 1e-10)
    for key in ("T", "eps_th", "chi_ch"):
        _close(key, getattr(kr.channel, key), ref[key], 1e-12)
    _close("cov_after", kr.cov_after, ref["cov_after"], 1e-10)
    ref = golden["keyrate_sps_tmsc_V6_d5_Ts0.99_L50"]
    kr = secret_key_rate(StateSpec("sps-tmsc", 6.0, 5.0, 0.99), LinkBudget(L_AC=50.0))
    _close("SPS-TMSC P_SPS", kr.P_SPS, ref["P_SPS"], 1e-8)
    _close("SPS-TMSC K", kr.K, ref["K"], 1e-8)


CHECKS = (
    ("displacement-identity", check_displacement_identity),
    ("kraus-ancilla-equivalence", check_kraus_ancilla),
    ("sps-tmsv-probability", check_sps_probability),
    ("symplectic-physicality", check_symplectic),
    ("one-way-reduction-identity", check_one_way_identity),
    ("analytic-vs-fock", check_analytic_vs_fock),
    ("fixture-fock-amplitudes", check_fixture_amplitudes),
    ("fixture-pipeline", check_fixture_pipeline),
)


def run_selfcheck(fixtures=None, verbose: bool = False, stream=None) -> bool:
    """Run every check, print one line each and return True iff all pass."""
    stream = stream or sys.stdout
    fixtures = pathlib.Path(fixtures) if fixtures else default_fixture_dir()
    ok = True
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            check(fixtures)
            status, detail = "PASS", ""
        except Exception as exc:  # a broken fixture file must fail its check, not crash the suite
            ok = False
            status, detail = "FAIL", f"  ({type(exc).__name__}: {exc})"
        line = f"{status} {name}{detail}"
        if verbose:
            line += f"  [{1000.0 * (time.perf_counter() - start):.1f} ms]"
        print(line, file=stream)
    print("selfcheck: " + ("all checks passed" if ok else "FAILED"), file=stream)
    return ok


__all__ = ["CHECKS", "run_selfcheck", "default_fixture_dir"]
