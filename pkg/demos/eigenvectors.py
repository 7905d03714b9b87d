"""Damping-basis eigenvectors: residuals and biorthonormality on a small label set.

kappa/gamma is kept away from integers; at integer ratios some l = 0
eigenvalues coincide and the generator has Jordan blocks there.
"""
import itertools
import warnings

import numpy as np

from optospec.eigensystem import Truncation, TruncationWarning, eigenvalue, left_eigenvector, right_eigenvector
from optospec.model import ModelParams
from optospec.oracle import build_liouvillian, vec

warnings.simplefilter("ignore", TruncationWarning)
p = ModelParams(omega=50, nu=1, chi=0.5, kappa=0.013, gamma=0.01, mbar=1.0, variant="ph")
trunc = Truncation(3, 80)
lmat = build_liouvillian(p, trunc).matrix
labels = list(itertools.product((-1, 0, 1), (0, 1), range(-2, 3), range(3)))

R = np.array([vec(right_eigenvector(lab, p, trunc)) for lab in labels])
L = np.array([vec(left_eigenvector(lab, p, trunc)) for lab in labels])
res = [np.linalg.norm(lmat @ r - eigenvalue(lab, p) * r) / np.linalg.norm(r) for lab, r in zip(labels, R)]
gram = L.conj() @ R.T
print(f"{len(labels)} labels, worst residual {max(res):.1e}, "
      f"worst |<left|right> - delta| {np.abs(gram - np.eye(len(labels))).max():.1e}")
for lab in labels[:6]:
    print(lab, f"{eigenvalue(lab, p):.6f}")
