"""Closed-form spectra for the figure presets, with a coarse text plot.

Run with a preset name (default fig2a); CSV tables for plotting come from
``optospec figure <preset>``.
"""
import sys

import numpy as np

from optospec.cli import PRESETS, preset_params
from optospec.model import MEVariant
from optospec.spectrum import SpectrumRequest, absorption

name = sys.argv[1] if len(sys.argv) > 1 else "fig2a"
if PRESETS.get(name, {}).get("kind") != "spectrum":
    sys.exit(f"choose one of {[k for k, v in PRESETS.items() if v['kind'] == 'spectrum']}")

for variant in (MEVariant.PHENOMENOLOGICAL, MEVariant.DRESSED_STATE):
    p = preset_params(name, variant)
    res = absorption(SpectrumRequest(p, normalize=True))
    print(f"\n{name} {variant.value}: zero-phonon line {res.zero_phonon_line:+.3f}, cutoffs {res.cutoffs}")
    # one text row per 0.25 nu bin (maximum in the bin), skipping empty bins
    edges = np.arange(res.grid[0], res.grid[-1] + 0.25, 0.25)
    which = np.digitize(res.grid, edges)
    for b in range(1, len(edges)):
        y = res.values[which == b]
        if y.size and y.max() > 0.01:
            print(f"{edges[b - 1]:+7.2f} {'#' * int(round(60 * y.max()))}")
