"""Symmetric sparse matrices and their Cholesky factorization.

Matrices are stored as the lower triangle in compressed sparse column
form; the full operator is materialized lazily for products. The
factorization is an unpivoted sparse Cholesky P A Pᵀ = L Lᵀ with a
fill-reducing minimum-degree ordering P, performed through SuperLU in
symmetric mode (no numerical pivoting), which for a symmetric positive
definite input yields U = diag(d) Lᵀ with d > 0.
"""

from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DimensionMismatchError, NotPositiveDefiniteError


class SparseSymMatrix:
    """Square symmetric matrix storing only the lower triangle.

    Parameters
    ----------
    lower : scipy sparse matrix
        Lower triangle (entries with row >= col) of the matrix, in any
        scipy sparse format. Entries above the diagonal are rejected.
    """

    def __init__(self, lower):
        lower = sp.csc_array(lower)
        if lower.shape[0] != lower.shape[1]:
            raise DimensionMismatchError(
                "expected a square matrix, got shape %s" % (lower.shape,)
            )
        coo = sp.coo_array(lower)
        if np.any(coo.row < coo.col):
            raise ValueError("entries above the diagonal are not allowed")
        lower.sort_indices()
        self._lower = lower
        self._full = None

    @classmethod
    def from_triplets(cls, n, rows, cols, values):
        """Build from lower-triangle COO triplets (duplicates are summed)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if np.any(rows < cols):
            raise ValueError("triplets must address the lower triangle")
        lower = sp.coo_array((values, (rows, cols)), shape=(n, n))
        return cls(lower.tocsc())

    @classmethod
    def from_full(cls, a, sym_tol=1e-10):
        """Build from a full symmetric matrix (dense or scipy sparse).

        The input must be symmetric to ``sym_tol`` relative to its largest
        entry; the stored matrix is the symmetrized lower triangle.
        """
        a = sp.csc_array(a) if sp.issparse(a) else sp.csc_array(np.asarray(a))
        gap = abs(a - a.T)
        scale = abs(a).max() if a.nnz else 0.0
        if a.nnz and gap.nnz and gap.max() > sym_tol * max(scale, 1e-300):
            raise ValueError("matrix is not symmetric to tolerance %g" % sym_tol)
        sym = (a + a.T) * 0.5
        return cls(sp.tril(sym, format="csc"))

    @property
    def n(self):
        return self._lower.shape[0]

    @property
    def shape(self):
        return self._lower.shape

    @property
    def nnz_lower(self):
        return self._lower.nnz

    @property
    def lower(self):
        """Lower triangle as CSC (shared, do not mutate)."""
        return self._lower

    def to_scipy(self):
        """Full symmetric matrix as CSR (cached)."""
        if self._full is None:
            low = self._lower
            diag = sp.dia_array((low.diagonal()[None, :], [0]), shape=low.shape)
            self._full = (low + low.T - diag).tocsr()
            self._full.sort_indices()
        return self._full

    def to_dense(self):
        return self.to_scipy().toarray()

    def matvec(self, x):
        """Product A @ x for a vector or a stack of column vectors."""
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise DimensionMismatchError(
                "operand has leading dimension %d, expected %d" % (x.shape[0], self.n)
            )
        return self.to_scipy() @ x

    def __matmul__(self, x):
        return self.matvec(x)

    def scaled(self, c):
        """New matrix c * A."""
        return SparseSymMatrix(self._lower * float(c))

    @staticmethod
    def linear_combination(matrices, coefficients):
        """Sum of cᵢ Aᵢ over matrices of identical dimension."""
        if len(matrices) != len(coefficients) or not matrices:
            raise DimensionMismatchError("need equally many matrices and coefficients")
        n = matrices[0].n
        acc = None
        for a, c in zip(matrices, coefficients):
            if a.n != n:
                raise DimensionMismatchError(
                    "matrix dimensions disagree: %d vs %d" % (a.n, n)
                )
            term = a.lower * float(c)
            acc = term if acc is None else acc + term
        return SparseSymMatrix(acc)


class CholeskyFactor:
    """Sparse Cholesky factorization P A Pᵀ = L Lᵀ of an SPD matrix.

    ``perm`` is the fill-reducing permutation P as an index vector:
    (P A Pᵀ)[i, j] == A[perm[i], perm[j]].
    """

    def __init__(self, matrix):
        if not isinstance(matrix, SparseSymMatrix):
            matrix = SparseSymMatrix.from_full(matrix)
        a = sp.csc_matrix(matrix.to_scipy())
        try:
            lu = splu(
                a,
                diag_pivot_thresh=0.0,
                permc_spec="MMD_AT_PLUS_A",
                options=dict(SymmetricMode=True),
            )
        except RuntimeError as exc:
            if "singular" in str(exc).lower():
                raise NotPositiveDefiniteError(0) from exc
            raise
        d = lu.U.diagonal()
        bad = np.flatnonzero(d <= 0.0)
        # perm maps factor ordering back to original indices.
        perm = np.empty(matrix.n, dtype=np.int64)
        perm[lu.perm_c] = np.arange(matrix.n)
        if bad.size:
            raise NotPositiveDefiniteError(perm[bad[0]])
        self.n = matrix.n
        self._lu = lu
        self._sqrt_d = np.sqrt(d)
        self.perm = perm

    @property
    def L(self):
        """Lower Cholesky factor of the permuted matrix (CSC)."""
        return (self._lu.L @ sp.diags_array(self._sqrt_d)).tocsc()

    def solve(self, b):
        """Solve A x = b for a vector or a stack of right-hand sides."""
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise DimensionMismatchError(
                "right-hand side has leading dimension %d, expected %d"
                % (b.shape[0], self.n)
            )
        return self._lu.solve(b)


def cholesky_factorize(matrix):
    """Factor an SPD SparseSymMatrix; raises NotPositiveDefiniteError."""
    return CholeskyFactor(matrix)


def write_matrix_market(path, matrix, comment=""):
    """Write a SparseSymMatrix (or array) to a Matrix Market file."""
    if isinstance(matrix, SparseSymMatrix):
        scipy.io.mmwrite(path, matrix.lower, comment=comment, symmetry="symmetric")
    else:
        scipy.io.mmwrite(path, np.asarray(matrix), comment=comment)


def read_matrix_market(path):
    """Read a symmetric Matrix Market file as a SparseSymMatrix.

    Dense (array-format) files are returned as plain ndarrays.
    """
    a = scipy.io.mmread(path)
    if isinstance(a, np.ndarray):
        return a
    return SparseSymMatrix.from_full(a.tocsc())
