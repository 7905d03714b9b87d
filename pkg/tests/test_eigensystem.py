import itertools
import math

import numpy as np
import pytest

from optospec.eigensystem import (
    DegenerateEigenvalueError,
    EigenLabel,
    Truncation,
    c_coefficient,
    destroy,
    displacement_constants,
    displacement_matrix,
    dho_eigvec_left,
    dho_eigvec_right,
    eigenvalue,
    extend_negative_l,
    left_eigenvector,
    ladder_exponential,
    mu_displaced,
    right_eigenvector,
)
from optospec.model import DerivedConstants, ModelParams, derive_constants
from optospec.oracle import apply_adjoint, apply_liouvillian

from conftest import params

# kappa/gamma deliberately irrational-looking: integer ratios make the
# l = 0 spectrum defective (see test_integer_rate_ratio_is_defective)
GENERIC = dict(kappa=0.013, gamma=0.01)


def coef(m, k, i):
    return (-1) ** i * math.comb(m + k, m - i) / math.factorial(i)


def right_by_operators(k, m, mbar, n, pad=40):
    """(-1)^m s^(k+1) sum_i c_i s^i b^dag^(k+i) (1-s)^(b^dag b) b^i, s = 1/(mbar+1)."""
    size = n + pad
    b = destroy(size)
    bd = b.conj().T
    s = 1 / (mbar + 1)
    decay = np.diag((1 - s) ** np.arange(size))
    out = sum(
        coef(m, k, i) * s**i * np.linalg.matrix_power(bd, k + i) @ decay @ np.linalg.matrix_power(b, i)
        for i in range(m + 1)
    )
    return ((-1) ** m * s ** (k + 1) * out)[:n, :n]


def left_by_operators(k, m, mbar, n, pad=20):
    """(-1)^m m!/(m+k)! sum_i c_i s^i b^i b^dag^(i+k) (antinormal order)."""
    size = n + pad
    b = destroy(size)
    bd = b.conj().T
    s = 1 / (mbar + 1)
    out = sum(coef(m, k, i) * s**i * np.linalg.matrix_power(b, i) @ np.linalg.matrix_power(bd, i + k) for i in range(m + 1))
    return ((-1) ** m * math.factorial(m) / math.factorial(m + k) * out)[:n, :n]


# ---------------------------------------------------------------------------
# eigenvalues


def test_eigenvalue_steady():
    assert eigenvalue((0, 0, 0, 0), params()) == 0


def test_eigenvalue_decoupled():
    p = params(chi=0.0, kappa=0.01, omega=50)
    assert eigenvalue((1, 0, 0, 0), p) == pytest.approx(-0.005 - 50j, abs=1e-15)


def test_eigenvalue_decoupled_sum():
    p = params(chi=0.0, mbar=2.0)
    rng = np.random.default_rng(1)
    for _ in range(50):
        l, k = rng.integers(-3, 4, 2)
        n, m = rng.integers(0, 4, 2)
        cav = -1j * l * p.omega - (2 * n + abs(l)) * p.kappa / 2
        mech = -1j * k * p.nu - (2 * m + abs(k)) * p.gamma / 2
        assert eigenvalue((l, n, k, m), p) == pytest.approx(cav + mech, abs=1e-13)


@pytest.mark.parametrize("variant", ["ph", "ds"])
def test_eigenvalue_conjugation(variant):
    p = params(variant=variant, mbar=0.7)
    for lab in itertools.product(range(-2, 3), range(3), range(-3, 4), range(3)):
        l, n, k, m = lab
        assert eigenvalue((-l, n, -k, m), p) == pytest.approx(np.conj(eigenvalue(lab, p)), abs=1e-14)


@pytest.mark.parametrize("variant", ["ph", "ds"])
def test_eigenvalue_real_part(variant):
    p = params(variant=variant)
    for lab in itertools.product(range(-2, 3), range(3), range(-3, 4), range(3)):
        re = eigenvalue(lab, p).real
        if lab == (0, 0, 0, 0):
            assert re == 0
        else:
            assert re < 0


# ---------------------------------------------------------------------------
# displacement constants


def test_displacement_constants_trivial():
    dc = displacement_constants(0, 0, DerivedConstants(0.4 + 0.1j, 0.0), 2.0)
    assert (dc.alpha_ln, dc.beta_ln, dc.eta_l) == (0, 0, 0)


def test_displacement_constants_dsme():
    p = params(variant="ds", chi=0.5, mbar=2)
    c = derive_constants(p)
    for n in range(3):
        dc = displacement_constants(1, n, c, p.mbar)
        assert dc.eta_l == 0 and dc.beta_ln == -n * c.beta
    assert displacement_constants(1, 0, c, p.mbar).alpha_ln == -c.beta


def test_displacement_constants_phme():
    p = params(variant="ph", chi=0.5, gamma=0.01, mbar=2)
    c = derive_constants(p)
    b = c.beta
    assert b == pytest.approx(0.49998750 + 0.00249994j, abs=1e-7)
    dc = displacement_constants(1, 0, c, 2)
    # independent evaluation through real and imaginary parts
    im = b.imag
    assert dc.alpha_ln == pytest.approx(complex(-b.real, -im - 2 * 2 * im))
    assert dc.beta_ln == pytest.approx(complex(0, -3 * 2 * im))
    assert dc.eta_l == pytest.approx(complex(0, 5 * 2 * im))


def test_displacement_constants_negative_l():
    with pytest.raises(ValueError):
        displacement_constants(-1, 0, DerivedConstants(0.3, 0.0), 1)


# ---------------------------------------------------------------------------
# damped oscillator eigenvectors


def test_thermal_state():
    mbar = 1.5
    mu = dho_eigvec_right(0, 0, mbar, 80)
    d = np.diag(mu).real
    assert np.trace(mu) == pytest.approx(1, abs=1e-12)
    assert np.allclose(d[1:] / d[:-1], mbar / (mbar + 1))
    assert np.allclose(mu, np.diag(d))


def test_traceless_m1():
    mu = dho_eigvec_right(0, 1, 0.0, 20)
    assert np.allclose(mu, np.diag(np.diag(mu)))
    assert abs(np.trace(mu)) < 1e-14


@pytest.mark.parametrize("k,m,mbar", [(1, 0, 1.0), (0, 2, 0.5), (3, 2, 2.0), (2, 3, 0.0)])
def test_right_matches_operator_form(k, m, mbar):
    assert np.allclose(dho_eigvec_right(k, m, mbar, 60), right_by_operators(k, m, mbar, 60), atol=1e-13)


@pytest.mark.parametrize("k,m,mbar", [(0, 0, 1.0), (1, 1, 0.5), (3, 2, 2.0)])
def test_left_matches_operator_form(k, m, mbar):
    got = dho_eigvec_left(k, m, mbar, 30)
    ref = left_by_operators(k, m, mbar, 30)
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_left_identity():
    assert np.allclose(dho_eigvec_left(0, 0, 3.0, 15), np.eye(15))


def test_negative_k_is_adjoint():
    assert np.array_equal(dho_eigvec_left(-1, 1, 0.7, 20), dho_eigvec_left(1, 1, 0.7, 20).conj().T)
    assert np.array_equal(dho_eigvec_right(-2, 1, 0.7, 20), dho_eigvec_right(2, 1, 0.7, 20).conj().T)


@pytest.mark.parametrize("mbar,n", [(0.0, 60), (0.5, 120), (2.0, 220)])
def test_dho_biorthonormal(mbar, n):
    labels = [(k, m) for k in range(-3, 4) for m in range(4)]
    right = {lab: dho_eigvec_right(*lab, mbar, n, check=False) for lab in labels}
    left = {lab: dho_eigvec_left(*lab, mbar, n) for lab in labels}
    worst = 0.0
    for a in labels:
        for b in labels:
            val = np.vdot(left[a], right[b])
            worst = max(worst, abs(val - (a == b)))
    assert worst < 1e-8


def test_truncation_warning():
    from optospec.eigensystem import TruncationWarning

    with pytest.warns(TruncationWarning):
        dho_eigvec_right(0, 0, 5.0, 10)


# ---------------------------------------------------------------------------
# displacement and ladder exponentials


def test_displacement_identity_and_inverse():
    assert np.array_equal(displacement_matrix(0, 10), np.eye(10))
    for alpha in (0.3, 1.2 - 0.7j, 2.0j):
        d = displacement_matrix(alpha, 80)
        dinv = displacement_matrix(-alpha, 80)
        assert np.allclose((d @ dinv)[:40, :40], np.eye(40), atol=1e-10)


def test_displacement_vacuum_overlap():
    for alpha in (0.5, 1 + 1j, 1.7j):
        assert displacement_matrix(alpha, 60)[0, 0] == pytest.approx(np.exp(-abs(alpha) ** 2 / 2), abs=1e-12)


def test_ladder_exponential_inverse():
    e = ladder_exponential(0.3 - 0.2j, 30)
    assert np.allclose(e @ ladder_exponential(-0.3 + 0.2j, 30), np.eye(30), atol=1e-12)
    assert np.array_equal(ladder_exponential(0, 5), np.eye(5))


def test_mu_displaced_trivial():
    p = params(variant="ph", mbar=1.0)
    assert np.allclose(mu_displaced("right", 0, 0, 1, 2, p, 40), dho_eigvec_right(1, 2, 1.0, 40))
    assert np.allclose(mu_displaced("left", 0, 0, 1, 2, p, 40), dho_eigvec_left(1, 2, 1.0, 40))


def test_mu_displaced_dsme():
    p = params(variant="ds", chi=0.5, mbar=1.0)
    beta = derive_constants(p).beta
    got = mu_displaced("right", 1, 0, 0, 0, p, 40)
    d = displacement_matrix(-beta, 80, check=False)
    ref = (d.conj().T @ dho_eigvec_right(0, 0, 1.0, 80))[:40, :40]
    assert np.allclose(got, ref, atol=1e-12)


def test_mu_displaced_rejects():
    with pytest.raises(ValueError):
        mu_displaced("middle", 1, 0, 0, 0, params(), 20)
    with pytest.raises(ValueError):
        mu_displaced("right", -1, 0, 0, 0, params(), 20)


# ---------------------------------------------------------------------------
# overlap coefficients


def c_by_trace(kp, mp, l, k, m, p, n=1, size=140):
    left = mu_displaced("left", l, n - 1, kp, mp, p, size)
    right = mu_displaced("right", l, n, k, m, p, size)
    return np.vdot(left, right)


@pytest.mark.parametrize("variant", ["ph", "ds"])
def test_c_coefficient_trace(variant):
    p = params(variant=variant, chi=0.5, gamma=0.05, mbar=1.0)
    cases = [(1, 1, 1, 1, 1), (1, 2, 1, 1, 1), (0, 1, 1, 0, 0), (-1, 1, 1, 0, 0), (2, 1, 1, 1, 0),
             (-2, 2, 1, 1, 0), (0, 0, 1, 0, 0), (1, 3, 2, -1, 1), (-1, 2, 1, 1, 1)]
    for kp, mp, l, k, m in cases:
        got = c_coefficient(kp, mp, l, k, m, p)
        ref = c_by_trace(kp, mp, l, k, m, p)
        assert abs(got - ref) < 1e-9 * max(1.0, abs(ref)), (kp, mp, l, k, m, got, ref)


def test_c_coefficient_n_independent():
    p = params(variant="ph", chi=0.4, gamma=0.05, mbar=0.5)
    assert c_by_trace(1, 2, 1, 1, 1, p, n=2) == pytest.approx(c_coefficient(1, 2, 1, 1, 1, p), abs=1e-9)


def test_c_coefficient_out_of_domain():
    p = params(variant="ph", mbar=1.0)
    assert c_coefficient(0, 0, 1, 0, 1, p) == 0
    assert c_coefficient(1, 0, 1, 2, 0, p) == 0
    assert abs(c_by_trace(0, 0, 1, 0, 1, p)) < 1e-12
    assert abs(c_by_trace(1, 0, 1, 2, 0, p)) < 1e-12


def test_c_coefficient_dsme_prefactor():
    p = params(variant="ds", chi=0.5, mbar=1.0)
    # m' = m, k' = k: every power is zero and the phase prefactor is one
    assert c_coefficient(1, 1, 1, 1, 1, p) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# full eigenvectors


def _residual(R, lam, p, trunc):
    return np.linalg.norm(apply_liouvillian(p, R, trunc) - lam * R) / np.linalg.norm(R)


def test_steady_state_vector():
    p = params(variant="ph", mbar=1.0)
    trunc = Truncation(3, 60)
    rho = right_eigenvector((0, 0, 0, 0), p, trunc)
    ref = np.kron(np.diag([1.0, 0, 0]), dho_eigvec_right(0, 0, 1.0, 60))
    assert np.allclose(rho, ref)
    assert np.allclose(left_eigenvector((0, 0, 0, 0), p, trunc), np.eye(trunc.dim))


def test_n0_single_term():
    p = params(variant="ph", mbar=1.0)
    trunc = Truncation(3, 60)
    rho = right_eigenvector((1, 0, 1, 1), p, trunc)
    block = mu_displaced("right", 1, 0, 1, 1, p, 60)
    ref = np.zeros_like(rho)
    ref[60:120, 0:60] = block
    assert np.allclose(rho, ref)


@pytest.mark.parametrize("variant,mbar", [("ph", 0.0), ("ds", 1.0), ("ph", 1.0)])
def test_right_eigenvectors(variant, mbar):
    p = params(variant=variant, mbar=mbar, **GENERIC)
    trunc = Truncation(3, 80)
    for lab in itertools.product((0, 1, 2), (0, 1), range(-2, 3), range(3)):
        if lab[0] + lab[1] > 2:
            continue
        R = right_eigenvector(lab, p, trunc)
        assert _residual(R, eigenvalue(lab, p), p, trunc) < 1e-7, lab


def _interior(trunc):
    mask = np.zeros(trunc.dim, bool)
    for j in range(trunc.n_cav):
        mask[j * trunc.n_mech:(j + 1) * trunc.n_mech - 1] = True
    return np.ix_(mask, mask)


@pytest.mark.parametrize("variant,mbar", [("ds", 0.0), ("ph", 1.0)])
def test_left_eigenvectors(variant, mbar):
    p = params(variant=variant, mbar=mbar, **GENERIC)
    trunc = Truncation(3, 40)
    box = _interior(trunc)
    for lab in itertools.product((0, 1), (0, 1), range(-2, 3), range(3)):
        L = left_eigenvector(lab, p, trunc)
        res = apply_adjoint(p, L, trunc) - np.conj(eigenvalue(lab, p)) * L
        assert np.linalg.norm(res[box]) / np.linalg.norm(L[box]) < 1e-7, lab


def test_dsme_n0_simplification():
    p = params(variant="ds", chi=0.5, mbar=1.0)
    trunc = Truncation(2, 40)
    beta = derive_constants(p).beta
    d = displacement_matrix(-beta, 100, check=False)
    for k, m in [(0, 0), (1, 1), (-2, 0)]:
        R = right_eigenvector((1, 0, k, m), p, trunc)[40:, :40]
        assert np.allclose(R, (d.conj().T @ dho_eigvec_right(k, m, 1.0, 100, check=False))[:40, :40])
        L = left_eigenvector((1, 0, k, m), p, trunc)[40:, :40]
        assert np.allclose(L, (d.conj().T @ dho_eigvec_left(k, m, 1.0, 100))[:40, :40])


def test_negative_l():
    p = params(variant="ph", mbar=0.5, **GENERIC)
    trunc = Truncation(3, 50)
    R1 = right_eigenvector((1, 0, 0, 0), p, trunc)
    assert np.array_equal(right_eigenvector((-1, 0, 0, 0), p, trunc), R1.conj().T)
    for lab in [(-1, 0, 1, 1), (-1, 1, -2, 0), (-2, 0, 0, 1)]:
        lam, R, L = extend_negative_l(lab, p, trunc)
        assert lam == eigenvalue(lab, p)
        assert _residual(R, lam, p, trunc) < 1e-7
        assert np.array_equal(R, right_eigenvector(lab, p, trunc))
    with pytest.raises(ValueError):
        extend_negative_l((1, 0, 0, 0), p, trunc)


def test_label_limits():
    p = params()
    with pytest.raises(ValueError):
        right_eigenvector((0, 3, 0, 0), p, Truncation(5, 20))
    with pytest.raises(ValueError):
        right_eigenvector((2, 1, 0, 0), p, Truncation(3, 20))
    with pytest.raises(ValueError):
        Truncation(1, 20)
    assert EigenLabel(1, 0, -1, 2).k == -1


def test_degenerate_denominator():
    # kappa = gamma puts lambda(0,1,k,m) on top of lambda(0,0,k,m+1)
    p = params(kappa=0.01, gamma=0.01)
    with pytest.raises(DegenerateEigenvalueError):
        right_eigenvector((0, 1, 0, 0), p, Truncation(3, 30))
    with pytest.raises(DegenerateEigenvalueError):
        left_eigenvector((0, 0, 0, 1), p, Truncation(3, 30))


@pytest.mark.parametrize("variant", ["ph", "ds"])
def test_integer_rate_ratio_is_defective(variant):
    """At kappa = gamma the l = 0 generator has a Jordan block: the
    eigenvalue of (0,1,k,m) is doubly degenerate but has one eigenvector."""
    from scipy.linalg import svdvals

    from optospec.oracle import build_liouvillian

    p = params(variant=variant, kappa=0.01, gamma=0.01, mbar=0.0)
    lmat = build_liouvillian(p, Truncation(2, 20))
    block = lmat.sector(0).toarray()
    shifted = block - eigenvalue((0, 1, 0, 0), p) * np.eye(block.shape[0])
    s1 = svdvals(shifted)
    s2 = svdvals(shifted @ shifted)
    assert np.sum(s1 < 1e-9 * s1[0]) == 1
    assert np.sum(s2 < 1e-9 * s2[0]) == 2
