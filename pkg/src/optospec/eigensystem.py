"""Exact eigensystem of the optomechanical Lindblad generators.

Eigenpairs are indexed by four integers ``(l, n, k, m)``: ``l`` selects the
diagonal ``|j+l><j|`` of the cavity density matrix, ``n`` the position on
that diagonal, and ``(k, m)`` a damped-harmonic-oscillator eigenvector of
the mechanics.

Operators are dense ``numpy`` arrays. Composite cavity-mechanics matrices
use the ordering ``index = j * n_mech + p`` (``numpy.kron(cavity, mech)``).

Sign convention: the damped-oscillator eigenvectors carry a factor
``(-1)**m`` in both the right and the left family. With it, the weight
factors of :mod:`optospec.spectrum` are plain traces over these vectors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .model import DerivedConstants, ModelParams, derive_constants

N_MAX_SUPPORTED = 2
DEGENERACY_TOL = 1e-12
# coefficients of the recursive sums below this fraction of the largest are dropped
SUPPORT_TOL = 1e-17


class TruncationWarning(UserWarning):
    """A Fock-space truncation is too small for the requested object."""


class DegenerateEigenvalueError(ArithmeticError):
    """An energy denominator of the eigenvector recursion vanishes."""


class EigenLabel(NamedTuple):
    l: int
    n: int
    k: int
    m: int


@dataclass(frozen=True)
class Truncation:
    """Fock cutoffs: cavity states ``0..n_cav-1``, mechanical ``0..n_mech-1``."""

    n_cav: int = 3
    n_mech: int = 40

    def __post_init__(self):
        if self.n_cav < 2 or self.n_mech < 4:
            raise ValueError(f"need n_cav >= 2 and n_mech >= 4, got {self}")

    @property
    def dim(self) -> int:
        return self.n_cav * self.n_mech


@dataclass(frozen=True)
class DisplacementConstants:
    alpha_ln: complex
    beta_ln: complex
    eta_l: complex


# ---------------------------------------------------------------------------
# eigenvalues


def eigenvalue(label, params: ModelParams, consts: DerivedConstants | None = None) -> complex:
    """Eigenvalue ``lambda^(l,n)_(k,m)`` of the generator (any sign of ``l``)."""
    l, n, k, m = label
    if consts is None:
        consts = derive_constants(params)
    b2 = abs(consts.beta) ** 2
    return complex(
        -1j * l * params.omega
        - 0.5 * (2 * n + abs(l)) * params.kappa
        - 1j * k * params.nu
        - 0.5 * (2 * m + abs(k)) * params.gamma
        + 1j * l * b2 * (2 * n + abs(l)) * params.nu
        - l * l * consts.gamma_phi
    )


def displacement_constants(l: int, n: int, consts: DerivedConstants, mbar: float) -> DisplacementConstants:
    """Displacements ``alpha_(l,n)``, ``beta_(l,n)`` and ``eta_l`` for ``l >= 0``."""
    if l < 0:
        raise ValueError("displacement constants are defined for l >= 0")
    b = consts.beta
    d = b.conjugate() - b
    return DisplacementConstants(
        alpha_ln=complex(-(n + l) * b + l * mbar * d),
        beta_ln=complex(-n * b + l * (mbar + 1) * d),
        eta_l=complex(-l * (2 * mbar + 1) * d),
    )


# ---------------------------------------------------------------------------
# single-mode Fock matrices


def destroy(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def displacement_matrix(alpha, n: int, check: bool = True) -> np.ndarray:
    """``D(alpha) = exp(alpha b^dag - alpha^* b)`` in an ``n``-level truncation."""
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(n, dtype=complex)
    b = destroy(n)
    out = expm(alpha * b.conj().T - alpha.conjugate() * b)
    if check:
        if abs(alpha) ** 2 > n / 4:
            warnings.warn(
                f"|alpha|^2 = {abs(alpha) ** 2:.3g} is not small against n = {n}",
                TruncationWarning,
                stacklevel=2,
            )
        defect = np.linalg.norm(out.conj().T @ out - np.eye(n), ord=2)
        if defect > 1e-8:
            warnings.warn(f"displacement unitarity defect {defect:.2e}", TruncationWarning, stacklevel=2)
    return out


def ladder_exponential(eta, n: int, dagger: bool = False) -> np.ndarray:
    """``exp(eta b)`` (or ``exp(eta b^dag)``) summed as a power series.

    The truncated ``b`` is nilpotent, so the series terminates; summation
    stops early once a term's norm drops below ``1e-14``.
    """
    eta = complex(eta)
    out = np.eye(n, dtype=complex)
    if eta == 0:
        return out
    b = destroy(n)
    gen = eta * (b.conj().T if dagger else b)
    term = np.eye(n, dtype=complex)
    for j in range(1, n):
        term = term @ gen / j
        out += term
        if np.abs(term).max() < 1e-14:
            break
    return out


# ---------------------------------------------------------------------------
# damped harmonic oscillator eigenvectors


def _laguerre_coeffs(m: int, k: int) -> np.ndarray:
    # L_m^(k)(y) = sum_i coef[i] y^i
    return np.array([(-1) ** i * math.comb(m + k, m - i) / math.factorial(i) for i in range(m + 1)])


def _dho_right_block(k: int, m: int, mbar: float, n: int) -> np.ndarray:
    s = 1.0 / (mbar + 1.0)
    ratio = mbar / (mbar + 1.0)
    out = np.zeros((n, n), dtype=complex)
    q = np.arange(n - k, dtype=float)
    if q.size == 0:
        return out
    total = np.zeros_like(q)
    falling = np.ones_like(q)
    for i, coef in enumerate(_laguerre_coeffs(m, k)):
        if i > 0:
            falling = falling * (q - (i - 1))
        power = np.where(q >= i, ratio ** np.maximum(q - i, 0), 0.0)
        total += coef * s**i * falling * power
    raising = np.sqrt(np.prod([q + t for t in range(1, k + 1)], axis=0)) if k else 1.0
    vals = (-1) ** m * s ** (k + 1) * raising * total
    out[np.arange(k, n), np.arange(n - k)] = vals
    return out


def _dho_left_block(k: int, m: int, mbar: float, n: int) -> np.ndarray:
    s = 1.0 / (mbar + 1.0)
    out = np.zeros((n, n), dtype=complex)
    q = np.arange(n - k, dtype=float)
    if q.size == 0:
        return out
    total = np.zeros_like(q)
    rising = np.ones_like(q)
    for i, coef in enumerate(_laguerre_coeffs(m, k)):
        if i > 0:
            rising = rising * (q + k + i)
        total += coef * s**i * rising
    raising = np.sqrt(np.prod([q + t for t in range(1, k + 1)], axis=0)) if k else 1.0
    norm = math.factorial(m) / math.factorial(m + k)
    vals = (-1) ** m * norm * raising * total
    out[np.arange(k, n), np.arange(n - k)] = vals
    return out


def _tail_mass(mat: np.ndarray, width: int = 2) -> float:
    total = np.abs(mat).sum()
    if total == 0:
        return 0.0
    return float((np.abs(mat[-width:, :]).sum() + np.abs(mat[:, -width:]).sum()) / total)


def dho_eigvec_right(k: int, m: int, mbar: float, n_mech: int, check: bool = True) -> np.ndarray:
    """Right eigenvector ``mu_hat_(k,m)`` of the thermal damped oscillator.

    Normally ordered form
    ``(-1)^m / (mbar+1)^(k+1) b^dag^k :L_m^(k)(b^dag b/(mbar+1)) exp(-b^dag b/(mbar+1)):``
    evaluated by exact Fock matrix elements. Negative ``k`` returns the
    Hermitian conjugate of the ``|k|`` vector.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    mat = _dho_right_block(abs(k), m, mbar, n_mech)
    if k < 0:
        mat = mat.conj().T
    if check and _tail_mass(mat) > 1e-10:
        warnings.warn(
            f"n_mech={n_mech} truncates mu_hat(k={k}, m={m}) at mbar={mbar}",
            TruncationWarning,
            stacklevel=2,
        )
    return mat


def dho_eigvec_left(k: int, m: int, mbar: float, n_mech: int) -> np.ndarray:
    """Left eigenvector ``mu_check_(k,m)`` (antinormally ordered Laguerre form).

    These grow polynomially with the Fock index; only their traces against
    right eigenvectors are truncation-stable.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    mat = _dho_left_block(abs(k), m, mbar, n_mech)
    return mat.conj().T if k < 0 else mat


# ---------------------------------------------------------------------------
# displaced oscillator eigenvectors


def _pad_for(dc: DisplacementConstants) -> int:
    size = abs(dc.alpha_ln) + abs(dc.beta_ln) + abs(dc.eta_l)
    return int(max(40, math.ceil(2 * size**2 + 10)))


class _Displacer:
    """Applies ``X -> D^dag(alpha) e^{-eta B} X e^{eta B} D(beta)`` on a padded space."""

    def __init__(self, dc: DisplacementConstants, n_mech: int, left: bool):
        self.n_mech = n_mech
        self.size = n_mech + _pad_for(dc)
        self.d_alpha_dag = displacement_matrix(dc.alpha_ln, self.size, check=False).conj().T
        self.d_beta = displacement_matrix(dc.beta_ln, self.size, check=False)
        self.e_minus = ladder_exponential(-dc.eta_l, self.size, dagger=left)
        self.e_plus = ladder_exponential(dc.eta_l, self.size, dagger=left)

    def __call__(self, mat: np.ndarray) -> np.ndarray:
        out = self.d_alpha_dag @ (self.e_minus @ mat @ self.e_plus) @ self.d_beta
        return out[: self.n_mech, : self.n_mech]


def _displacer(kind, l, n, params, n_mech, consts=None):
    return _displacer_cached(kind, l, n, params, n_mech)


@lru_cache(maxsize=64)
def _displacer_cached(kind, l, n, params, n_mech):
    dc = displacement_constants(l, n, derive_constants(params), params.mbar)
    return _Displacer(dc, n_mech, left=(kind == "left"))


def mu_displaced(kind: str, l: int, n: int, k: int, m: int, params: ModelParams, n_mech: int) -> np.ndarray:
    """Asymmetrically displaced oscillator eigenvector ``mu^(l,n)_(k,m)``.

    ``kind="right"``: ``D^dag(alpha) e^{-eta b} mu_hat e^{eta b} D(beta)``;
    ``kind="left"`` uses ``b^dag`` in the exponentials and ``mu_check``.
    Built on a padded space and cropped to ``n_mech``.
    """
    if kind not in ("right", "left"):
        raise ValueError("kind must be 'right' or 'left'")
    if l < 0:
        raise ValueError("mu_displaced is defined for l >= 0")
    disp = _displacer(kind, l, n, params, n_mech)
    if kind == "right":
        base = dho_eigvec_right(k, m, params.mbar, disp.size, check=False)
    else:
        base = dho_eigvec_left(k, m, params.mbar, disp.size)
    out = disp(base)
    if kind == "right" and _tail_mass(out) > 1e-10:
        warnings.warn(f"n_mech={n_mech} truncates displaced mu(k={k}, m={m})", TruncationWarning, stacklevel=2)
    return out


# ---------------------------------------------------------------------------
# overlap coefficients between neighbouring diagonals


def _jay_plus(k: int, kp: int) -> int:
    # 1 for equal nonzero signs, else 0; either choice agrees when k or k' is 0
    return 1 if k * kp > 0 else 0


def c_coefficient(kp: int, mp: int, l: int, k: int, m: int, params: ModelParams,
                  consts: DerivedConstants | None = None) -> complex:
    """Overlap ``Tr{mu_check^(l,n-1)(k',m')^dag mu_hat^(l,n)(k,m)}`` (independent of n).

    Zero whenever a factorial argument is negative.
    """
    if consts is None:
        consts = derive_constants(params)
    return _c_cached(kp, mp, l, k, m, consts.beta, params.mbar)


@lru_cache(maxsize=200_000)
def _c_cached(kp, mp, l, k, m, beta, mbar):
    jp = _jay_plus(k, kp)
    jm = 1 - jp
    a1 = mp - m - abs(k) * jm
    a2 = mp - m + abs(kp) - abs(k) * jp
    if a1 < 0 or a2 < 0 or mp < 0 or m < 0:
        return 0j
    power = 2 * (mp - m) + abs(kp) - abs(k)
    absb = abs(beta)
    if absb == 0:
        if power != 0:
            return 0j
        log_mag = 0.0
    else:
        log_mag = power * math.log(absb)
    log_mag += (
        math.lgamma(mp + 1)
        - math.lgamma(m + 1)
        - math.lgamma(a1 + 1)
        - math.lgamma(a2 + 1)
        + (m - mp) * math.log1p(mbar)
    )
    phase = math.atan2(beta.imag, beta.real) * (kp - k)
    prefactor = np.exp(l * (beta**2 - beta.conjugate() ** 2) / 2)
    return complex(prefactor * np.exp(log_mag + 1j * phase))


def _lower_support(k: int, m: int, shell: int):
    """Labels ``(k', m')`` with nonzero overlap ``c^(l,k,m)_(k',m')`` and
    ``a1 + a2 == shell``."""
    out = []
    for a1 in range(shell + 1):
        a2 = shell - a1
        if k != 0:
            kabs = abs(k) + a2 - a1
            if kabs >= 1:
                out.append((int(math.copysign(kabs, k)), m + a1))
        kabs = a2 - a1 - abs(k)
        mp = m + abs(k) + a1
        if kabs == 0:
            out.append((0, mp))
        elif kabs > 0:
            if k != 0:
                out.append((-int(math.copysign(kabs, k)), mp))
            else:
                out.append((kabs, mp))
                out.append((-kabs, mp))
    return out


def _upper_support(kp: int, mp: int):
    """Labels ``(k, m)`` with nonzero ``c^(l,k,m)_(k',m')`` (finite set)."""
    out = []
    for m in range(mp + 1):
        kmax = abs(kp) + 2 * (mp - m)
        for k in range(-kmax, kmax + 1):
            jp = _jay_plus(k, kp)
            a1 = mp - m - abs(k) * (1 - jp)
            a2 = mp - m + abs(kp) - abs(k) * jp
            if a1 >= 0 and a2 >= 0:
                out.append((k, m))
    return out


# ---------------------------------------------------------------------------
# full eigenvectors


def _check_label(label, trunc: Truncation):
    l, n, k, m = label
    if n < 0 or m < 0:
        raise ValueError(f"invalid label {label}: n and m must be >= 0")
    if n > N_MAX_SUPPORTED:
        raise ValueError(f"eigenvectors are constructed for n <= {N_MAX_SUPPORTED}, got n={n}")
    if n + abs(l) > trunc.n_cav - 1:
        raise ValueError(f"label {tuple(label)} needs n_cav > {n + abs(l)}, got {trunc.n_cav}")


def _denominator(lam, other):
    d = lam - other
    if abs(d) < DEGENERACY_TOL * max(1.0, abs(lam)):
        raise DegenerateEigenvalueError(
            f"eigenvalues {lam:.6g} and {other:.6g} coincide; the eigenvector recursion "
            "has a vanishing denominator at this parameter point"
        )
    return d


def _prune(coeffs: dict) -> dict:
    if not coeffs:
        return coeffs
    top = max(abs(v) for v in coeffs.values())
    return {key: v for key, v in coeffs.items() if abs(v) > SUPPORT_TOL * top}


def right_coefficients(label, params: ModelParams, consts: DerivedConstants | None = None):
    """Expansion of ``rho_hat^(l,n)_(k,m)`` on each diagonal position ``j``.

    Returns ``{j: {(k_j, m_j): coefficient}}`` such that the mechanical
    block at ``|j+l><j|`` is ``sum coefficient * mu_hat^(l,j)_(k_j,m_j)``.
    """
    l, n, k, m = label
    if consts is None:
        consts = derive_constants(params)
    lam = eigenvalue(label, params, consts)
    coeffs = {n: {(k, m): 1.0 + 0j}}
    for j in range(n - 1, -1, -1):
        acc: dict = {}
        for (ku, mu), amp in coeffs[j + 1].items():
            shell, seen_max, quiet = 0, 0.0, 0
            while quiet < 3:
                shell_max = 0.0
                for kl, ml in _lower_support(ku, mu, shell):
                    c = _c_cached(kl, ml, l, ku, mu, consts.beta, params.mbar)
                    if c != 0:
                        acc[(kl, ml)] = acc.get((kl, ml), 0j) + c * amp
                        shell_max = max(shell_max, abs(c))
                seen_max = max(seen_max, shell_max)
                quiet = quiet + 1 if shell_max <= SUPPORT_TOL * seen_max else 0
                shell += 1
        step = params.kappa * math.sqrt((j + 1) * (j + 1 + l))
        level = {}
        for key, val in acc.items():
            if val == 0:
                continue
            other = eigenvalue((l, j, *key), params, consts)
            level[key] = step * val / _denominator(lam, other)
        coeffs[j] = _prune(level)
    return coeffs


def left_coefficients(label, params: ModelParams, j_max: int, consts: DerivedConstants | None = None):
    """Expansion of ``rho_check^(l,n)_(k,m)`` for diagonal positions ``n..j_max``."""
    l, n, k, m = label
    if consts is None:
        consts = derive_constants(params)
    lam = eigenvalue(label, params, consts)
    coeffs = {n: {(k, m): 1.0 + 0j}}
    for j in range(n + 1, j_max + 1):
        acc: dict = {}
        for (kl, ml), amp in coeffs[j - 1].items():
            for ku, mu in _upper_support(kl, ml):
                c = _c_cached(kl, ml, l, ku, mu, consts.beta, params.mbar)
                if c != 0:
                    acc[(ku, mu)] = acc.get((ku, mu), 0j) + c.conjugate() * amp
        step = params.kappa * math.sqrt(j * (j + l))
        level = {}
        for key, val in acc.items():
            if val == 0:
                continue
            other = eigenvalue((l, j, *key), params, consts)
            level[key] = step * val / _denominator(lam, other).conjugate()
        coeffs[j] = _prune(level)
    return coeffs


def _assemble(kind, l, coeffs, params, trunc, consts):
    out = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    nm = trunc.n_mech
    for j, level in coeffs.items():
        if not level or j + l > trunc.n_cav - 1:
            continue
        disp = _displacer(kind, l, j, params, nm, consts)
        base = np.zeros((disp.size, disp.size), dtype=complex)
        for (kk, mm), amp in level.items():
            if kind == "right":
                base += amp * dho_eigvec_right(kk, mm, params.mbar, disp.size, check=False)
            else:
                base += amp * dho_eigvec_left(kk, mm, params.mbar, disp.size)
        block = disp(base)
        out[(j + l) * nm:(j + l + 1) * nm, j * nm:(j + 1) * nm] = block
    return out


def right_eigenvector(label, params: ModelParams, trunc: Truncation) -> np.ndarray:
    """Right eigenvector ``rho_hat^(l,n)_(k,m)`` as a dense Fock matrix.

    Negative ``l`` is obtained from ``rho_hat^(-l,n)_(-k,m)^dag``.
    """
    label = EigenLabel(*label)
    _check_label(label, trunc)
    if label.l < 0:
        return right_eigenvector((-label.l, label.n, -label.k, label.m), params, trunc).conj().T
    consts = derive_constants(params)
    coeffs = right_coefficients(label, params, consts)
    out = _assemble("right", label.l, coeffs, params, trunc, consts)
    nm = trunc.n_mech
    top = out[(label.n + label.l) * nm:(label.n + label.l + 1) * nm, label.n * nm:(label.n + 1) * nm]
    if _tail_mass(top) > 1e-10:
        warnings.warn(f"n_mech={nm} truncates eigenvector {tuple(label)}", TruncationWarning, stacklevel=2)
    return out


def left_eigenvector(label, params: ModelParams, trunc: Truncation) -> np.ndarray:
    """Left eigenvector ``rho_check^(l,n)_(k,m)``, summed up to the cavity cutoff."""
    label = EigenLabel(*label)
    _check_label(label, trunc)
    if label.l < 0:
        return left_eigenvector((-label.l, label.n, -label.k, label.m), params, trunc).conj().T
    consts = derive_constants(params)
    coeffs = left_coefficients(label, params, trunc.n_cav - 1 - label.l, consts)
    return _assemble("left", label.l, coeffs, params, trunc, consts)


def extend_negative_l(label, params: ModelParams, trunc: Truncation):
    """Eigen-data for ``l < 0`` from the conjugation identities.

    Returns ``(eigenvalue, right, left)`` built from the ``(-l, n, -k, m)``
    objects.
    """
    l, n, k, m = label
    if l >= 0:
        raise ValueError("extend_negative_l expects l < 0")
    mirror = (-l, n, -k, m)
    lam = eigenvalue(mirror, params).conjugate()
    right = right_eigenvector(mirror, params, trunc).conj().T
    left = left_eigenvector(mirror, params, trunc).conj().T
    return lam, right, left
