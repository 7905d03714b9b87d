"""Laguerre polynomials, log-factorials and Gaussian-Laguerre plane integrals.

The plane integral evaluated here is

    I(j, l) = ∫ d²ξ ξ^l L_j^(l)(q|ξ|²) exp(-c|ξ|²) exp(ς ξ* - ζ* ξ)

over the complex plane, valid for ``Re(c) > 0``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

# relative |q - c| / |c| below which the q == c limit is used
DEGENERATE_THRESHOLD = 1e-12


def laguerre(m: int, k: int, x):
    """Generalized Laguerre polynomial ``L_m^(k)(x)``.

    Parameters
    ----------
    m : int
        Degree, ``m >= 0``.
    k : int
        Order (superscript), ``k >= 0``.
    x : scalar or array_like, real or complex
        Evaluation points.

    Returns
    -------
    scalar or numpy.ndarray
        Same shape as ``x``.

    Notes
    -----
    Evaluated by the upward three-term recurrence
    ``(n+1) L_{n+1} = (2n + k + 1 - x) L_n - (n + k) L_{n-1}``, which does
    not suffer the alternating-sum cancellation of the explicit series.
    """
    if m < 0 or k < 0:
        raise ValueError(f"laguerre needs m >= 0 and k >= 0, got m={m}, k={k}")
    x = np.asarray(x)
    prev = np.ones_like(x, dtype=np.result_type(x, float))
    if m == 0:
        return prev[()] if prev.ndim == 0 else prev
    cur = (k + 1) - x
    for n in range(1, m):
        prev, cur = cur, ((2 * n + k + 1 - x) * cur - (n + k) * prev) / (n + 1)
    return cur[()] if np.ndim(cur) == 0 else cur


def log_factorial(n):
    """Natural log of ``n!`` for nonnegative integer (array) ``n``."""
    arr = np.asarray(n)
    if np.any(arr < 0):
        raise ValueError("log_factorial needs n >= 0")
    out = gammaln(arr + 1.0)
    return float(out) if out.ndim == 0 else out


def _check_c(c):
    if not complex(c).real > 0:
        raise ValueError(f"plane integral diverges for Re(c) <= 0 (c={c})")


def integral_I(j: int, l: int, q, c, varsigma, zeta) -> complex:
    """Closed form of the Gaussian-Laguerre plane integral.

    ``pi (c-q)^j / c^(j+l+1) ς^l L_j^(l)(q ς ζ* / (c (q-c))) exp(-ς ζ* / c)``.
    When ``q`` coincides with ``c`` to relative precision
    :data:`DEGENERATE_THRESHOLD` the limiting form
    :func:`integral_I_degenerate` is returned instead.
    """
    q, c, vs, zs = complex(q), complex(c), complex(varsigma), complex(zeta).conjugate()
    _check_c(c)
    if abs(q - c) < DEGENERATE_THRESHOLD * abs(c):
        return integral_I_degenerate(j, l, c, varsigma, zeta)
    arg = q * vs * zs / (c * (q - c))
    return complex(
        math.pi
        * (c - q) ** j
        / c ** (j + l + 1)
        * vs**l
        * laguerre(j, l, arg)
        * np.exp(-vs * zs / c)
    )


def integral_I_degenerate(j: int, l: int, c, varsigma, zeta) -> complex:
    """Plane integral for ``q == c``: ``pi ς^l (ς ζ*)^j exp(-ς ζ*/c) / (j! c^(j+l+1))``."""
    c, vs, zs = complex(c), complex(varsigma), complex(zeta).conjugate()
    _check_c(c)
    return complex(
        math.pi / math.factorial(j) / c ** (j + l + 1) * vs**l * (vs * zs) ** j * np.exp(-vs * zs / c)
    )
