"""Brute-force truncated-Fock Liouvillian used to check the analytic results.

Vectorization is column stacking, ``vec(A X B) = (B^T kron A) vec(X)``, so
left multiplication is ``I kron A`` and right multiplication ``B^T kron I``.
Hilbert-space indices follow ``j_cav * n_mech + p_mech``.

The generator conserves ``l = j_row - j_col`` and never raises the photon
number, so it splits into sectors of fixed ``l`` and each sector is block
triangular in the photon pair ``(j + l, j)``. Both facts are checked, not
assumed, where they are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .eigensystem import EigenLabel, Truncation, eigenvalue
from .model import ModelParams, derive_constants


class SteadyStateError(RuntimeError):
    """The generator does not have a unique steady state."""


def default_truncation(params: ModelParams, n_cav: int = 3) -> Truncation:
    b2 = abs(derive_constants(params).beta) ** 2
    return Truncation(n_cav=n_cav, n_mech=max(40, math.ceil(8 * params.mbar + 15 * b2 + 25)))


# ---------------------------------------------------------------------------
# operators


def _destroy(n):
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, format="csr", dtype=complex)


def system_operators(params: ModelParams, trunc: Truncation) -> dict:
    """Sparse ``a``, ``b``, ``H`` and the jump operators with their rates."""
    ic = sp.identity(trunc.n_cav, dtype=complex, format="csr")
    im = sp.identity(trunc.n_mech, dtype=complex, format="csr")
    a = sp.kron(_destroy(trunc.n_cav), im, format="csr")
    b = sp.kron(ic, _destroy(trunc.n_mech), format="csr")
    num_a = (a.conj().T @ a).tocsr()
    h = params.omega * num_a + params.nu * (b.conj().T @ b) - params.chi * num_a @ (b + b.conj().T)
    if params.is_dressed:
        bm = (b - (params.chi / params.nu) * num_a).tocsr()
        extra = [(derive_constants(params).gamma_phi, num_a)]
    else:
        bm = b
        extra = []
    jumps = [
        (params.kappa / 2, a),
        (params.gamma * (params.mbar + 1) / 2, bm),
        (params.gamma * params.mbar / 2, bm.conj().T.tocsr()),
    ] + extra
    return {"a": a, "b": b, "H": h.tocsr(), "jumps": jumps}


def _spre(x, eye):
    return sp.kron(eye, x, format="csr")


def _spost(x, eye):
    return sp.kron(x.T, eye, format="csr")


@dataclass
class LiouvillianMatrix:
    """Sparse superoperator together with the data it was built from."""

    matrix: sp.csr_matrix
    params: ModelParams
    trunc: Truncation

    @property
    def variant(self):
        return self.params.variant

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def sector_indices(self, l: int) -> np.ndarray:
        return sector_indices(l, self.trunc)

    def sector(self, l: int) -> sp.csr_matrix:
        idx = self.sector_indices(l)
        return self.matrix[idx][:, idx].tocsr()

    def pair_block(self, j_row: int, j_col: int) -> np.ndarray:
        idx = pair_indices(j_row, j_col, self.trunc)
        return self.matrix[idx][:, idx].toarray()


def build_liouvillian(params: ModelParams, trunc: Truncation) -> LiouvillianMatrix:
    """Sparse matrix of the Lindblad generator of either variant.

    ``L = -i[H, .] + sum_X rate_X D[X]`` with ``D[X] rho = 2 X rho X^dag - X^dag X rho - rho X^dag X``.
    """
    ops = system_operators(params, trunc)
    eye = sp.identity(trunc.dim, dtype=complex, format="csr")
    h = ops["H"]
    out = -1j * (_spre(h, eye) - _spost(h, eye))
    for rate, x in ops["jumps"]:
        if rate == 0:
            continue
        xd = x.conj().T.tocsr()
        xdx = (xd @ x).tocsr()
        out = out + rate * (2 * sp.kron(x.conj(), x) - _spre(xdx, eye) - _spost(xdx, eye))
    return LiouvillianMatrix(matrix=out.tocsr(), params=params, trunc=trunc)


def apply_liouvillian(params: ModelParams, rho: np.ndarray, trunc: Truncation) -> np.ndarray:
    """``L rho`` evaluated with matrix products (no superoperator is formed)."""
    ops = system_operators(params, trunc)
    h = ops["H"]
    out = -1j * (h @ rho - (h.T @ rho.T).T)
    for rate, x in ops["jumps"]:
        if rate == 0:
            continue
        xd = x.conj().T
        xdx = xd @ x
        xr = x @ rho
        out = out + rate * (2 * (xd.T @ xr.T).T - xdx @ rho - (xdx.T @ rho.T).T)
    return np.asarray(out)


def apply_adjoint(params: ModelParams, x_op: np.ndarray, trunc: Truncation) -> np.ndarray:
    """Heisenberg-picture generator ``L^dag X`` (adjoint in the trace inner product)."""
    ops = system_operators(params, trunc)
    h = ops["H"]
    out = 1j * (h @ x_op - (h.T @ x_op.T).T)
    for rate, x in ops["jumps"]:
        if rate == 0:
            continue
        xd = x.conj().T
        xdx = xd @ x
        out = out + rate * (2 * xd @ (x.T @ x_op.T).T - xdx @ x_op - (xdx.T @ x_op.T).T)
    return np.asarray(out)


# ---------------------------------------------------------------------------
# sectors


def _vec_index(rows, cols, dim):
    return (cols * dim + rows).ravel()


def pair_indices(j_row: int, j_col: int, trunc: Truncation) -> np.ndarray:
    """Vector indices of the mechanical block at ``|j_row><j_col|`` (column-stacked)."""
    nm = trunc.n_mech
    p = np.arange(nm)
    rows = j_row * nm + p[None, :]
    cols = j_col * nm + p[:, None]
    return _vec_index(rows, cols, trunc.dim)


def sector_pairs(l: int, trunc: Truncation):
    return [(j + l, j) for j in range(trunc.n_cav) if 0 <= j + l < trunc.n_cav]


def sector_indices(l: int, trunc: Truncation) -> np.ndarray:
    pairs = sector_pairs(l, trunc)
    if not pairs:
        raise ValueError(f"sector l={l} is empty for n_cav={trunc.n_cav}")
    return np.concatenate([pair_indices(r, c, trunc) for r, c in pairs])


def vec(mat: np.ndarray) -> np.ndarray:
    return np.asarray(mat).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def off_sector_norm(lmat: LiouvillianMatrix) -> float:
    """Norm of all matrix elements connecting different ``l`` sectors."""
    labels = np.empty(lmat.dim, dtype=int)
    for l in range(-(lmat.trunc.n_cav - 1), lmat.trunc.n_cav):
        labels[sector_indices(l, lmat.trunc)] = l
    coo = lmat.matrix.tocoo()
    mask = labels[coo.row] != labels[coo.col]
    return float(np.sqrt(np.sum(np.abs(coo.data[mask]) ** 2)))


# ---------------------------------------------------------------------------
# steady state


def steady_state(lmat: LiouvillianMatrix, tol: float = 1e-13, max_iter: int = 50) -> np.ndarray:
    """Null vector of the ``l = 0`` sector by shifted inverse iteration.

    Returns the Hermitized, trace-normalized density matrix. Raises
    :class:`SteadyStateError` if the zero eigenvalue is not simple.
    """
    p = lmat.params
    if p.kappa <= 0 or p.gamma <= 0:
        raise SteadyStateError("a unique steady state needs kappa > 0 and gamma > 0")
    idx = lmat.sector_indices(0)
    block = lmat.matrix[idx][:, idx].tocsc()
    shift = 1e-3 * min(p.kappa, p.gamma)
    eye = sp.identity(block.shape[0], dtype=complex, format="csc")
    lu = spla.splu((block + shift * eye).tocsc())

    # two independent starts; a simple zero eigenvalue sends both to one line
    rng = np.random.default_rng(12345)
    starts = [vec(np.eye(lmat.trunc.dim))[idx].astype(complex),
              rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)]
    found = []
    for x in starts:
        x = x / np.linalg.norm(x)
        for _ in range(max_iter):
            y = lu.solve(x)
            y /= np.linalg.norm(y)
            done = np.linalg.norm(y - x * np.vdot(x, y) / abs(np.vdot(x, y))) < tol
            x = y
            if done:
                break
        found.append(x)
    overlap = abs(np.vdot(found[0], found[1]))
    if overlap < 1 - 1e-8:
        raise SteadyStateError(f"zero eigenvalue is not simple (overlap {overlap:.3g})")
    resid = np.linalg.norm(block @ found[0])
    if resid > 1e-8 * max(1.0, spla.norm(block, 1)):
        raise SteadyStateError(f"inverse iteration did not converge (residual {resid:.3g})")

    full = np.zeros(lmat.dim, dtype=complex)
    full[idx] = found[0]
    rho = unvec(full, lmat.trunc.dim)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho)


def thermal_state(mbar: float, n: int) -> np.ndarray:
    p = np.arange(n)
    return np.diag((1 / (mbar + 1)) * (mbar / (mbar + 1)) ** p).astype(complex)


# ---------------------------------------------------------------------------
# absorption spectrum


def absorption_numeric(lmat: LiouvillianMatrix, omega_p_grid, rho_st: np.ndarray | None = None) -> np.ndarray:
    """``Re Tr{a^dag (i w_p - L)^-1 (rho_st a)}`` on a grid of probe frequencies.

    One sparse LU factorization per frequency, restricted to ``l = -1``,
    the only sector ``rho_st a`` and ``a`` occupy.
    """
    grid = np.asarray(omega_p_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty frequency grid")
    if lmat.params.kappa <= 0:
        raise ValueError("the resolvent is singular on the real axis for kappa = 0")
    if rho_st is None:
        rho_st = steady_state(lmat)
    a = system_operators(lmat.params, lmat.trunc)["a"].toarray()
    idx = lmat.sector_indices(-1)
    src = vec(rho_st @ a)[idx]
    probe = vec(a)[idx].conj()
    block = lmat.matrix[idx][:, idx].tocsc()
    eye = sp.identity(idx.size, dtype=complex, format="csc")
    out = np.empty(grid.size)
    for i, w in enumerate(grid):
        x = spla.spsolve((1j * w * eye - block).tocsc(), src)
        out[i] = float(np.real(probe @ x))
    return out


# ---------------------------------------------------------------------------
# eigenvalues


def _upper_coupling_norm(lmat: LiouvillianMatrix, l: int) -> float:
    """Norm of couplings from a photon pair into a higher one (should be zero)."""
    pairs = sector_pairs(l, lmat.trunc)
    total = 0.0
    for i, (r_to, c_to) in enumerate(pairs):
        for r_from, c_from in pairs[:i]:
            blk = lmat.matrix[pair_indices(r_to, c_to, lmat.trunc)][:, pair_indices(r_from, c_from, lmat.trunc)]
            total += spla.norm(blk) ** 2
    return math.sqrt(total)


def numeric_eigenvalues(lmat: LiouvillianMatrix, sectors=None, count: int | None = None) -> np.ndarray:
    """Eigenvalues of the truncated generator, sorted by ``|Re|``.

    Because the generator is block triangular in photon pairs within each
    ``l`` sector, the spectrum is the union of the spectra of the diagonal
    pair blocks; each is a dense ``n_mech**2`` eigenproblem. The triangular
    structure is verified before it is used.
    """
    if sectors is None:
        sectors = range(-(lmat.trunc.n_cav - 1), lmat.trunc.n_cav)
    vals = []
    for l in sectors:
        leak = _upper_coupling_norm(lmat, l)
        if leak > 1e-12:
            raise RuntimeError(f"sector l={l} is not photon-pair triangular (leak {leak:.2e})")
        for r, c in sector_pairs(l, lmat.trunc):
            vals.append(np.linalg.eigvals(lmat.pair_block(r, c)))
    ev = np.concatenate(vals)
    ev = ev[np.argsort(np.abs(ev.real), kind="stable")]
    return ev if count is None else ev[:count]


@dataclass
class LabelMatch:
    label: EigenLabel
    analytic: complex
    numeric: complex | None
    error: float


def match_labels(numeric, labels, params: ModelParams, tol: float = 1e-6):
    """Greedy nearest-neighbour matching of analytic labels to numeric eigenvalues.

    Returns ``(matches, unmatched_numeric)``. A label whose nearest free
    eigenvalue is farther than ``tol`` gets ``numeric=None``.
    """
    pool = np.array(numeric, dtype=complex)
    free = np.ones(pool.size, dtype=bool)
    matches = []
    for lab in labels:
        lab = EigenLabel(*lab)
        lam = eigenvalue(lab, params)
        dist = np.where(free, np.abs(pool - lam), np.inf)
        i = int(np.argmin(dist)) if pool.size else -1
        if i >= 0 and dist[i] <= tol:
            free[i] = False
            matches.append(LabelMatch(lab, lam, complex(pool[i]), float(dist[i])))
        else:
            err = float(dist[i]) if i >= 0 else math.inf
            matches.append(LabelMatch(lab, lam, None, err))
    return matches, pool[free]


def eigenvalues_near(lmat: LiouvillianMatrix, j_row: int, j_col: int, targets, count: int = 1) -> np.ndarray:
    """Eigenvalues of one photon-pair block closest to each target.

    Shift-invert Arnoldi on the sparse block; a cheap substitute for the
    dense solve when ``n_mech`` is large. Returns shape ``(len(targets), count)``.
    """
    idx = pair_indices(j_row, j_col, lmat.trunc)
    block = lmat.matrix[idx][:, idx].tocsc()
    out = []
    for t in np.atleast_1d(targets):
        vals = spla.eigs(block, k=count, sigma=complex(t), return_eigenvectors=False)
        out.append(vals[np.argsort(np.abs(vals - t))])
    return np.array(out)
