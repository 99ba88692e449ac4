"""Box-constrained minimization by projected gradients with L-BFGS.

Minimizes f over a box [lower, upper] starting from a feasible point.
Directions come from a limited-memory BFGS two-loop recursion applied
to the components not pinned at active bounds; steps follow the
projected path x(t) = clip(x + t d) with Armijo backtracking, falling
back to the projected steepest-descent direction when the quasi-Newton
direction fails to produce decrease. The method is monotone: every
iterate improves on the previous one, and the first accepted step from
the start already satisfies an Armijo decrease along the projected
gradient path.

Termination is on the projected-gradient norm ||x - clip(x - g)||.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ARMIJO = 1e-4
_MAX_HALVINGS = 40


@dataclass
class BoxMinResult:
    x: np.ndarray
    value: float
    grad: np.ndarray
    iterations: int
    status: str  # 'converged' | 'stalled' | 'maxiter'


def projected_gradient_norm(x, grad, lower, upper):
    return float(np.linalg.norm(x - np.clip(x - grad, lower, upper)))


def _two_loop(grad, pairs):
    q = grad.copy()
    coeffs = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        q -= a * y
        coeffs.append(a)
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(coeffs)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def minimize_box(
    fun,
    grad,
    x0,
    lower,
    upper,
    tol=1e-8,
    max_iter=400,
    memory=10,
    reject=(),
):
    """Minimize fun over the box; see module docstring.

    Parameters
    ----------
    fun, grad : callables
        Objective value and gradient; ``grad`` is only called at
        accepted iterates. Exceptions listed in ``reject`` thrown by
        ``fun`` mark the candidate as unacceptable and shorten the step.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    x = np.clip(np.asarray(x0, dtype=np.float64), lower, upper)
    f = fun(x)
    g = np.asarray(grad(x), dtype=np.float64)
    pairs = []
    status = "maxiter"
    it = 0

    for it in range(1, max_iter + 1):
        if projected_gradient_norm(x, g, lower, upper) <= tol:
            status = "converged"
            break

        # bound components where the gradient pushes outward
        span = upper - lower
        at_low = (x <= lower + 1e-12 * span) & (g > 0.0)
        at_high = (x >= upper - 1e-12 * span) & (g < 0.0)
        pinned = at_low | at_high

        directions = []
        if pairs:
            gm = np.where(pinned, 0.0, g)
            d = -_two_loop(gm, pairs)
            d[pinned] = 0.0
            if d @ g < 0.0:  # keep only if a descent direction
                directions.append(d)
        directions.append(np.where(pinned, 0.0, -g))

        moved = None
        for d in directions:
            if not np.any(d):
                continue
            t = 1.0
            for _ in range(_MAX_HALVINGS):
                xc = np.clip(x + t * d, lower, upper)
                slope = g @ (xc - x)
                if slope >= 0.0:
                    t *= 0.5
                    continue
                try:
                    fc = fun(xc)
                except reject:
                    t *= 0.5
                    continue
                if fc <= f + _ARMIJO * slope:
                    moved = (xc, fc)
                    break
                t *= 0.5
            if moved:
                break
            pairs = []  # quasi-Newton memory unreliable past this point
        if not moved:
            status = "stalled"
            break

        xn, fn = moved
        gn = np.asarray(grad(xn), dtype=np.float64)
        s, y = xn - x, gn - g
        sy = s @ y
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))
            if len(pairs) > memory:
                pairs.pop(0)
        x, f, g = xn, fn, gn

    return BoxMinResult(x=x, value=f, grad=g, iterations=it, status=status)
