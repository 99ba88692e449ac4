"""Frequency-mismatch objective on a parametric pencil.

phi(x) = sum_i w_i^2 (f_i(x) - fbar_i)^2, where f_i(x) are the s
smallest natural frequencies of the pencil at x, fbar are the measured
targets, and the weight vector w has unit Euclidean norm. Frequencies
derive from pencil eigenvalues as f = sqrt(lambda) / (2 pi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .lanczos import lanczos_smallest

TWO_PI = 2.0 * np.pi


def frequencies_from_eigenvalues(eigenvalues):
    """Natural frequencies (Hz) from pencil eigenvalues (rad/s)^2."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if np.any(lam < 0.0):
        raise ValueError(
            "negative eigenvalue %g: pencil is not positive definite"
            % float(lam.min())
        )
    return np.sqrt(lam) / TWO_PI


def make_weights(mode, measured, custom=None):
    """Unit-norm weight vector for the frequency mismatch.

    mode 'uniform' weights all modes alike; 'relative' weights each
    mode by the reciprocal of its measured frequency (so the objective
    tracks relative errors); 'custom' normalizes the given vector.
    """
    f = np.asarray(measured, dtype=np.float64)
    if mode == "uniform":
        w = np.ones_like(f)
    elif mode == "relative":
        if np.any(f == 0.0):
            raise ValueError("relative weights need nonzero measured frequencies")
        w = 1.0 / f
    elif mode == "custom":
        if custom is None:
            raise ValueError("custom mode requires a weight vector")
        w = np.asarray(custom, dtype=np.float64)
        if w.shape != f.shape:
            raise DimensionMismatchError("custom weights must match target length")
        if np.any(w < 0.0) or not np.any(w > 0.0):
            raise ValueError("custom weights must be nonnegative and not all zero")
    else:
        raise ValueError("unknown weight mode '%s'" % mode)
    return w / np.linalg.norm(w)


def weighted_mismatch(f_computed, f_measured, weights):
    """The objective value sum_i (w_i (f_i - fbar_i))^2."""
    d = weights * (np.asarray(f_computed) - np.asarray(f_measured))
    return float(d @ d)


@dataclass
class UpdatingProblem:
    """A model-updating instance: pencil, feasible box, and targets.

    Parameters are validated on construction: at least one free
    parameter, strictly positive nondecreasing targets, box matching
    the parameter count. ``weights`` may be a mode name or a vector.
    """

    pencil: object
    box: object
    measured: np.ndarray
    weights: object = "uniform"
    lanczos_tol: float = 1e-5
    criticality_tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        self.measured = np.asarray(self.measured, dtype=np.float64)
        if self.pencil.n_parameters == 0:
            raise ValueError("empty free-parameter set: nothing to update")
        if len(self.box) != self.pencil.n_parameters:
            raise DimensionMismatchError(
                "box has %d bounds for %d parameters"
                % (len(self.box), self.pencil.n_parameters)
            )
        if self.measured.ndim != 1 or self.measured.size == 0:
            raise ValueError("measured frequencies must be a nonempty vector")
        if np.any(self.measured <= 0.0) or np.any(np.diff(self.measured) < 0.0):
            raise ValueError("measured frequencies must be positive and nondecreasing")
        if isinstance(self.weights, str):
            self.weights = make_weights(self.weights, self.measured)
        else:
            self.weights = make_weights("custom", self.measured, self.weights)

    @property
    def s(self):
        return self.measured.size

    def scaled_by(self, reference):
        """The same problem over scaled parameters y = x / reference."""
        return UpdatingProblem(
            pencil=self.pencil.scaled_by(reference),
            box=self.box.scaled_by(reference),
            measured=self.measured,
            weights=self.weights.copy(),
            lanczos_tol=self.lanczos_tol,
            criticality_tol=self.criticality_tol,
            seed=self.seed,
        )


@dataclass
class EvalCounter:
    """Tally of the expensive operations of a run."""

    factorizations: int = 0
    lanczos_runs: int = 0


@dataclass
class FullEvaluation:
    """Objective value, frequencies, and eigendata at one point."""

    value: float
    frequencies: np.ndarray
    lanczos: object


def evaluate_full(problem, x, counter=None):
    """Evaluate phi(x) through a fresh factorization and Lanczos run."""
    k, m = problem.pencil.evaluate(x)
    if counter is not None:
        counter.factorizations += 1
        counter.lanczos_runs += 1
    res = lanczos_smallest(
        k, m, problem.s, tol=problem.lanczos_tol, seed=problem.seed
    )
    f = frequencies_from_eigenvalues(res.eigenvalues)
    return FullEvaluation(
        value=weighted_mismatch(f, problem.measured, problem.weights),
        frequencies=f,
        lanczos=res,
    )


def eigenvalue_derivatives(pencil, x, eigenvalues, vectors):
    """d lambda_i / d x_j for the pencil at x, given eigenpairs.

    Uses the standard first-order formula for simple eigenvalues:
    v_i^T (dK_j - lambda_i dM_j) v_i / (v_i^T M v_i).
    """
    _, m = pencil.evaluate(x)
    mv = m.matvec(vectors)
    vmv = np.einsum("ni,ni->i", vectors, mv)
    out = np.empty((len(eigenvalues), pencil.n_parameters))
    for j in range(pencil.n_parameters):
        dk, dm = pencil.derivative(j)
        kv = dk.matvec(vectors)
        dmv = dm.matvec(vectors)
        num = np.einsum("ni,ni->i", vectors, kv) - eigenvalues * np.einsum(
            "ni,ni->i", vectors, dmv
        )
        out[:, j] = num / vmv
    return out


def mismatch_gradient(frequencies, eigenvalues, dlam, measured, weights):
    """Chain rule from eigenvalue derivatives to the objective gradient."""
    coef = weights**2 * (frequencies - measured) / (TWO_PI * np.sqrt(eigenvalues))
    return coef @ dlam


def full_gradient(problem, x, lanczos_result):
    """Gradient of phi at x from a converged Lanczos evaluation."""
    lam = lanczos_result.eigenvalues
    dlam = eigenvalue_derivatives(problem.pencil, x, lam, lanczos_result.vectors)
    f = frequencies_from_eigenvalues(lam)
    return mismatch_gradient(f, lam, dlam, problem.measured, problem.weights)
