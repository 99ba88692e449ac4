"""Affine stiffness/mass pencils, parameter boxes, and scaling.

A pencil holds base matrices K0, M0 and per-parameter increments so
that K(x) = K0 + sum_j x_j dK_j and M(x) = M0 + sum_j x_j dM_j. The
dependence is exactly linear; derivative matrices are the increments
themselves.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError
from .sparse import SparseSymMatrix


class FeasibleBox:
    """Componentwise parameter bounds a <= x <= b with a < b."""

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=np.float64)
        self.upper = np.asarray(upper, dtype=np.float64)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise DimensionMismatchError("bounds must be 1-d arrays of equal length")
        if np.any(self.lower >= self.upper):
            raise ValueError("every lower bound must be strictly below the upper")

    def __len__(self):
        return self.lower.size

    def contains(self, x, rtol=0.0):
        x = np.asarray(x)
        slack = rtol * (self.upper - self.lower)
        return bool(
            np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack)
        )

    def project(self, x):
        return np.clip(x, self.lower, self.upper)

    def midpoint(self):
        return 0.5 * (self.lower + self.upper)

    def intersect(self, lower, upper):
        """Intersection with another componentwise box [lower, upper]."""
        return (
            np.maximum(self.lower, lower),
            np.minimum(self.upper, upper),
        )

    def scaled_by(self, reference):
        return FeasibleBox(self.lower / reference, self.upper / reference)


class ParametricPencil:
    """Affine symmetric pencil (K(x), M(x)) with shared dimension.

    Parameters
    ----------
    k0, m0 : SparseSymMatrix
        Parameter-independent parts.
    k_increments, m_increments : list of SparseSymMatrix
        Per-parameter derivative matrices dK_j, dM_j (zero matrices are
        allowed; both lists have length n_parameters).
    names : list of str, optional
        Parameter labels for reporting.
    """

    def __init__(self, k0, m0, k_increments, m_increments, names=None):
        if k0.n != m0.n:
            raise DimensionMismatchError("K0 and M0 dimensions disagree")
        if len(k_increments) != len(m_increments):
            raise DimensionMismatchError("increment lists must have equal length")
        for mat in list(k_increments) + list(m_increments):
            if mat.n != k0.n:
                raise DimensionMismatchError("increment dimension disagrees with K0")
        self.k0 = k0
        self.m0 = m0
        self.k_increments = list(k_increments)
        self.m_increments = list(m_increments)
        self.names = list(names) if names is not None else [
            "x%d" % j for j in range(len(k_increments))
        ]

    @property
    def n(self):
        return self.k0.n

    @property
    def n_parameters(self):
        return len(self.k_increments)

    def _check_x(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_parameters,):
            raise DimensionMismatchError(
                "expected %d parameters, got shape %s" % (self.n_parameters, x.shape)
            )
        return x

    def evaluate(self, x):
        """Matrices (K(x), M(x)) at parameter vector x."""
        x = self._check_x(x)
        k = SparseSymMatrix.linear_combination(
            [self.k0] + self.k_increments, np.concatenate(([1.0], x))
        )
        m = SparseSymMatrix.linear_combination(
            [self.m0] + self.m_increments, np.concatenate(([1.0], x))
        )
        return k, m

    def derivative(self, j):
        """Increment pair (dK_j, dM_j); constant in x."""
        if not 0 <= j < self.n_parameters:
            raise IndexError("parameter index %d out of range" % j)
        return self.k_increments[j], self.m_increments[j]

    def scaled_by(self, reference):
        """Pencil over scaled parameters y = x / reference.

        The reference must be strictly positive componentwise; the
        returned pencil satisfies K_scaled(y) = K(reference * y).
        """
        reference = np.asarray(reference, dtype=np.float64)
        if reference.shape != (self.n_parameters,):
            raise DimensionMismatchError("reference has wrong length")
        if np.any(reference <= 0.0):
            raise ValueError("scaling reference must be strictly positive")
        k_inc = [m.scaled(r) for m, r in zip(self.k_increments, reference)]
        m_inc = [m.scaled(r) for m, r in zip(self.m_increments, reference)]
        return ParametricPencil(self.k0, self.m0, k_inc, m_inc, self.names)


def default_start(box):
    """Box midpoint, the conventional starting point."""
    return box.midpoint()
