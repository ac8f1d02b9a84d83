"""Regenerate the golden fixtures in src/cvmdi/data.

Gaussian pipeline numbers come from the extended-precision oracle in
tests/mp_oracle.py; photon-subtracted numbers come from the Fock engine at
converged cutoffs (never from the closed-form fast path).
Run from the repository root: python3 tools/make_fixtures.py
"""

import csv
import json
import pathlib
import sys

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import mp_oracle  # noqa: E402

from cvmdi.channel import LinkBudget, one_way_reduce  # noqa: E402
from cvmdi.fock import build_tmsc, fock_observables, resolve_cutoff, subtract_photon, moments  # noqa: E402
from cvmdi.keyrate import key_rate_from_covariance  # noqa: E402
from cvmdi.states import StateSpec, mean_photon_number, displacement_amplitude  # noqa: E402

DATA = ROOT / "src" / "cvmdi" / "data"


def f(x):
    return float(x)


def main():
    DATA.mkdir(exist_ok=True)
    golden = {}

    # SPS-TMSV V=2, T_S=0.9 on the Fock grid, checked at two cutoffs.
    n = 40
    states = {}
    for cut in (n, n + 10):
        out, p = subtract_photon(build_tmsc(2.0, 0.0, cut, cut), 0.9)
        states[cut] = (out, p, moments(out)[1])
    (out, p, cov), (_, p2, cov2) = states[n], states[n + 10]
    assert abs(p - p2) < 1e-12 and np.abs(cov - cov2).max() < 1e-8
    with open(DATA / "sps_tmsv_V2_Ts0.9_amplitudes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n1", "n2", "re", "im"])
        for (i, j), a in np.ndenumerate(out.amp):
            if a != 0:
                w.writerow([i, j, repr(float(a.real)), repr(float(a.imag))])
    golden["sps_tmsv_V2_Ts0.9"] = {"cutoff": n, "T_S": 0.9, "V": 2.0, "P_SPS": p, "cov": cov.tolist()}

    # Gaussian pipeline at 50 km, TMSV V=6.
    ref = mp_oracle.tmsv_pipeline(50, 6)
    golden["pipeline_L50_tmsv_V6"] = {
        k: ([[f(x) for x in row] for row in v] if k == "cov_after" else f(v)) for k, v in ref.items()
    }
    golden["keyrate_tmsv_V6_L120"] = {"K": f(mp_oracle.tmsv_pipeline(120, 6)["K"])}
    Vs = list(range(2, 16))
    golden["scan_tmsv_L80"] = {"V": Vs, "K": [f(mp_oracle.tmsv_pipeline(80, V)["K"]) for V in Vs]}

    # SPS-TMSC single point from the Fock engine.
    spec = StateSpec("sps-tmsc", 6.0, 5.0, 0.99)
    cut = resolve_cutoff(spec, 1e-10)
    p, _, cov = fock_observables(spec, *cut)
    link = LinkBudget(L_AC=50.0)
    kr = key_rate_from_covariance(p, cov, link, one_way_reduce(link, 6.0))
    golden["keyrate_sps_tmsc_V6_d5_Ts0.99_L50"] = {"cutoff": cut[0], "P_SPS": p, "K": kr.K, "cov": cov.tolist()}

    # Resolved cutoffs for the heaviest point of the default box.
    spec = StateSpec("sps-tmsc", 15.0, 5.0, 0.99)
    cut = resolve_cutoff(spec, 1e-8)
    golden["cutoff_sps_tmsc_V15_d5_Ts0.99"] = {
        "tol": 1e-8,
        "cutoffs": list(cut),
        "mean_photon_number": mean_photon_number(15.0, displacement_amplitude(5.0)),
    }

    with open(DATA / "golden.json", "w") as fh:
        json.dump(golden, fh, indent=1, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    main()
