"""Pure numpy versions of the compiled kernels in ``_accel.pyx``."""
from __future__ import annotations

import numpy as np


def aberth(coeffs, z0, maxiter: int, tol: float):
    """Simultaneous Aberth-Ehrlich iteration (Jacobi sweep) in double precision."""
    c = np.asarray(coeffs, dtype=np.complex128)
    z = np.array(z0, dtype=np.complex128, copy=True)
    n = len(c) - 1
    rev = c[::-1]
    drev = (np.arange(n, 0, -1) * rev[:-1])
    for it in range(1, maxiter + 1):
        p = np.polyval(rev, z)
        dp = np.polyval(drev, z) if n > 1 else np.full_like(z, rev[0])
        done = p == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dp != 0, p / np.where(dp != 0, dp, 1), 1e-3)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(done, 0, w)
        step = np.max(np.abs(w) / np.maximum(np.abs(z), 1.0)) if n else 0.0
        z = z - w
        if step <= tol:
            return z, it
    return z, maxiter


def riesz_energy_grad(x, s: float):
    """Sum of K_s over ordered pairs i != j, and the gradient of the unordered-pair sum (half that of the ordered sum)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    diff = x[:, None, :] - x[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    r = np.sqrt(r2)
    if s == 0.0:
        e = -np.log(r)
    else:
        e = r ** (-s) / s
    np.fill_diagonal(e, 0.0)
    f = r2 ** (-0.5 * s - 1.0)
    np.fill_diagonal(f, 0.0)
    grad = -np.einsum("ij,ijk->ik", f, diff)
    return float(e.sum()), grad


def coulomb_grad_hess(y, pos, q, s: float):
    """Gradient and Hessian of sum_i q_i K_s(y - pos_i) at each row of ``y``."""
    y = np.asarray(y, dtype=np.float64)
    pos = np.asarray(pos, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    diff = y[:, None, :] - pos[None, :, :]
    r2 = np.einsum("tik,tik->ti", diff, diff)
    f1 = q * r2 ** (-0.5 * s - 1.0)
    f2 = q * (s + 2.0) * r2 ** (-0.5 * s - 2.0)
    grad = -np.einsum("ti,tik->tk", f1, diff)
    d = y.shape[1]
    hess = np.einsum("ti,tia,tib->tab", f2, diff, diff)
    hess -= f1.sum(axis=1)[:, None, None] * np.eye(d)[None, :, :]
    return grad, hess
