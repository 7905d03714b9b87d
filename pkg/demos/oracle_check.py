"""Compare the closed-form spectrum with a brute-force resolvent calculation.

The oracle builds the truncated Liouvillian as a sparse matrix and solves
(i(w - w') - L) x = a rho_ss on the one-photon-coherence sector for every
probe frequency.
"""
import time

import numpy as np

from optospec.model import ModelParams, derive_constants
from optospec.oracle import absorption_numeric, build_liouvillian, default_truncation
from optospec.spectrum import SpectrumRequest, absorption

for variant in ("ds", "ph"):
    p = ModelParams(omega=50, nu=1, chi=0.5, kappa=0.05, gamma=0.05, mbar=0.5, variant=variant)
    zpl = p.omega - abs(derive_constants(p).beta) ** 2 * p.nu
    grid = np.linspace(zpl - 4, zpl + 4, 400)
    t0 = time.perf_counter()
    ana = absorption(SpectrumRequest(p, grid, normalize=True)).values
    t1 = time.perf_counter()
    trunc = default_truncation(p)
    num = absorption_numeric(build_liouvillian(p, trunc), grid)
    t2 = time.perf_counter()
    err = np.abs(ana - num / num.max()).max()
    print(f"{variant}: max difference {err:.2e}; analytic {t1 - t0:.3f} s, "
          f"oracle {t2 - t1:.1f} s at n_mech={trunc.n_mech}")
