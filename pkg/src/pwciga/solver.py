"""Banded LU with partial pivoting, multi-RHS substitution and the
alternating-directions solver for Kronecker-structured mass systems.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from scipy.linalg import lapack

SINGULAR_RTOL = 1e-14
DENSE_LIMIT = 3000


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a pivot falls below the singularity threshold."""


@dataclass(frozen=True)
class BandedMatrix:
    """Square matrix in LAPACK band storage, ``ab[ku + i - j, j] = A[i, j]``."""

    ab: np.ndarray
    kl: int
    ku: int

    @property
    def n(self) -> int:
        return self.ab.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.n

    @classmethod
    def from_dense(cls, a, kl: int | None = None, ku: int | None = None) -> "BandedMatrix":
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        rows, cols = np.nonzero(a)
        if kl is None:
            kl = int(max(0, (rows - cols).max(initial=0)))
        if ku is None:
            ku = int(max(0, (cols - rows).max(initial=0)))
        ab = np.zeros((kl + ku + 1, n))
        for d in range(-kl, ku + 1):
            diag = np.diagonal(a, d)
            if d >= 0:
                ab[ku - d, d:] = diag
            else:
                ab[ku - d, :n + d] = diag
        outside = np.tril(a, -kl - 1) if kl + 1 < n else np.zeros_like(a)
        outside = outside + (np.triu(a, ku + 1) if ku + 1 < n else 0.0)
        if np.any(outside != 0):
            raise ValueError("matrix has entries outside the requested band")
        return cls(ab, kl, ku)

    def to_dense(self) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n))
        for d in range(-self.kl, self.ku + 1):
            row = self.ab[self.ku - d]
            if d >= 0:
                idx = np.arange(n - d)
                out[idx, idx + d] = row[d:]
            else:
                idx = np.arange(n + d)
                out[idx - d, idx] = row[:n + d]
        return out

    def __matmul__(self, x):
        return self.to_dense() @ x

    def max_abs(self) -> float:
        return float(np.abs(self.ab).max(initial=0.0))


@dataclass(frozen=True)
class BandedLU:
    """Output of :func:`factor_banded`; holds LAPACK ``gbtrf`` factors."""

    lu: np.ndarray
    piv: np.ndarray
    kl: int
    ku: int

    @property
    def n(self) -> int:
        return self.lu.shape[1]


def factor_banded(m: BandedMatrix) -> BandedLU:
    """PA = LU with partial pivoting, keeping the band (+kl fill for U)."""
    kl, ku, n = m.kl, m.ku, m.n
    work = np.zeros((2 * kl + ku + 1, n), order="F")
    work[kl:] = m.ab
    lu, piv, info = lapack.dgbtrf(work, kl, ku, overwrite_ab=1)
    if info < 0:
        raise ValueError(f"dgbtrf: illegal argument {-info}")
    scale = m.max_abs()
    pivots = np.abs(lu[kl + ku])
    if info > 0 or scale == 0.0 or pivots.min() < SINGULAR_RTOL * scale:
        raise SingularMatrixError(
            f"singular banded matrix: min |pivot| {pivots.min():.3e}, max |entry| {scale:.3e}")
    lu.setflags(write=False)
    piv.setflags(write=False)
    return BandedLU(lu, piv, kl, ku)


def solve_multi_rhs(lu: BandedLU, rhs) -> np.ndarray:
    """Solve for every column of ``rhs`` (a vector or an ``(n, k)`` matrix)."""
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != lu.n:
        raise ValueError(f"rhs has {b.shape[0]} rows, factorization has dimension {lu.n}")
    vector = b.ndim == 1
    b2 = np.array(b.reshape(lu.n, -1), order="F")
    if b2.shape[1] == 0:
        return b2.reshape(b.shape)
    x, info = lapack.dgbtrs(lu.lu, lu.kl, lu.ku, b2, lu.piv, overwrite_b=1)
    if info != 0:
        raise ValueError(f"dgbtrs failed with info={info}")
    return x[:, 0] if vector else x


def adi_solve(factors, rhs) -> np.ndarray:
    """Solve ``(M_0 kron M_1 kron ...) u = rhs`` by one 1D sweep per axis.

    ``rhs`` is a tensor with ``rhs.shape[d] == factors[d].n``. The first sweep
    solves along axis 0 with all other indices as right-hand side columns; the
    axis is then rotated to the back so the next axis becomes leading.
    """
    t = np.asarray(rhs, dtype=float)
    if t.ndim != len(factors):
        raise ValueError(f"tensor has {t.ndim} axes but {len(factors)} factors were given")
    for d, f in enumerate(factors):
        if t.shape[d] != f.n:
            raise ValueError(f"axis {d}: tensor size {t.shape[d]} != factor size {f.n}")
    for f in factors:
        lead = t.shape[0]
        rest = t.shape[1:]
        sol = solve_multi_rhs(f, np.ascontiguousarray(t).reshape(lead, -1))
        # move the solved axis to the back
        t = np.moveaxis(sol.reshape((lead,) + rest), 0, -1)
    return np.ascontiguousarray(t)


def _max_abs(a) -> float:
    if scipy.sparse.issparse(a):
        return float(abs(a).max()) if a.nnz else 0.0
    return float(np.abs(a).max(initial=0.0))


def dense_solve(a, rhs) -> np.ndarray:
    """Direct LU solve with partial pivoting for a general square system.

    Small systems go through LAPACK ``getrf``; larger sparse ones through
    SuperLU with its pivot threshold set to full partial pivoting.
    """
    b = np.asarray(rhs, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, matrix has {n}")
    scale = _max_abs(a)
    if scale == 0.0:
        raise SingularMatrixError("zero matrix")
    if n <= DENSE_LIMIT or not scipy.sparse.issparse(a):
        dense = a.toarray() if scipy.sparse.issparse(a) else np.asarray(a, dtype=float)
        with warnings.catch_warnings():
            # exact zero pivots are reported below as SingularMatrixError
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(dense, check_finite=True)
        if np.abs(np.diag(lu)).min() < SINGULAR_RTOL * scale:
            raise SingularMatrixError("singular matrix in dense LU")
        x = scipy.linalg.lu_solve((lu, piv), b)
    else:
        try:
            solver = scipy.sparse.linalg.splu(
                scipy.sparse.csc_matrix(a), permc_spec="COLAMD", diag_pivot_thresh=1.0)
        except RuntimeError as exc:
            raise SingularMatrixError(str(exc)) from exc
        if np.abs(solver.U.diagonal()).min() < SINGULAR_RTOL * scale:
            raise SingularMatrixError("singular matrix in sparse LU")
        x = solver.solve(b)
    return x
