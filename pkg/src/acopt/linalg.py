"""Preconditioned conjugate gradients in a weighted inner product."""
from __future__ import annotations

import numpy as np


class CGError(RuntimeError):
    pass


def pcg(apply, b, inner, precond=None, rtol=1e-13, atol=0.0, maxiter=2000, x0=None):
    """Solve ``apply(x) = b`` for an operator self-adjoint in ``inner``.

    Returns ``(x, iterations)``.  Convergence is measured by the
    ``inner``-norm of the recursively updated residual.
    """
    bnorm = np.sqrt(inner(b, b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = x0.copy()
        r = b - apply(x)
    target = max(rtol * bnorm, atol)
    if np.sqrt(inner(r, r)) <= target:
        return x, 0
    z = precond(r) if precond is not None else r
    d = z.copy()
    rz = inner(r, z)
    for k in range(1, maxiter + 1):
        q = apply(d)
        dq = inner(d, q)
        if dq <= 0.0:
            raise CGError(f"non-positive curvature {dq:.3e} in cg iteration {k}")
        a = rz / dq
        x += a * d
        r -= a * q
        if np.sqrt(inner(r, r)) <= target:
            return x, k
        z = precond(r) if precond is not None else r
        rz_new = inner(r, z)
        d *= rz_new / rz
        d += z
        rz = rz_new
    raise CGError(f"cg did not reach rtol={rtol:.1e} in {maxiter} iterations "
                  f"(residual {np.sqrt(inner(r, r)) / bnorm:.2e})")
