"""Dimensionless dephasing rate of the two master equations versus temperature.

The phenomenological rate grows like mbar + 1/2, the dressed-state rate like
2 mbar + 1 at high temperature and vanishes at zero temperature.
"""
import numpy as np

from optospec.spectrum import dephasing_curve

rows = dephasing_curve([0, 0.1, 0.5, 1, 2, 5, 10, 30, 100])
print(f"{'mbar':>6} {'ph':>10} {'ds':>10} {'ds/(2m+1)':>10}")
for mbar, ph, ds in rows:
    print(f"{mbar:6.1f} {ph:10.4f} {ds:10.4f} {ds / (2 * mbar + 1):10.4f}")
